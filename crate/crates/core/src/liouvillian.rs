//! Generators of the two-atom master equation in the Heisenberg picture.
//!
//! The single-atom Liouvillian is
//!
//! ```text
//! ℒ Q = −iδ[N, Q] − (i/2)[Ω σ_e1 + Ω* σ_1e, Q] + γ Σ_a (2 D†_a Q D_a − N Q − Q N)
//! ```
//!
//! with `e` the excited sublevel reached by the incident polarization and `N`
//! the excited-state projector. The photon-exchange part couples the atoms
//! through `T = γ g Δ`:
//!
//! ```text
//! ℒ_αβ Q = Σ_ab T_ab D†_{α,a}[Q, D_{β,b}] + T*_ab [D†_{β,a}, Q] D_{α,b}
//! ```
//!
//! Expectation values obey `d⟨Q⟩/dt = (A + V)⟨Q⟩ + j` on the 255 truncated
//! pair coordinates.

use std::io::{self, BufRead, Write};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use thiserror::Error;

use crate::geometry::{ComplexVec3, PairGeometry, Spherical, C64, I, ONE, ZERO};
use crate::operators::{
    coordinates, sigma, superoperator, Op4, PairIndex, SuperOp16, SINGLE_DIM, TRUNCATED_DIM,
};

/// Polarization of the incident laser and the transition it drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Incident {
    /// `ε_L = ê₊₁`, laser along ẑ, drives |1⟩ → |4⟩.
    CircularPlus,
    /// `ε_L = ê₀`, laser along x̂, drives |1⟩ → |3⟩.
    LinearZ,
}

impl Incident {
    pub fn excited_level(self) -> usize {
        match self {
            Incident::CircularPlus => 4,
            Incident::LinearZ => 3,
        }
    }

    pub fn polarization(self) -> ComplexVec3 {
        match self {
            Incident::CircularPlus => ComplexVec3::basis(Spherical::Plus),
            Incident::LinearZ => ComplexVec3::basis(Spherical::Zero),
        }
    }

    /// Unit propagation direction `k̂_L`.
    pub fn laser_direction(self) -> [f64; 3] {
        match self {
            Incident::CircularPlus => [0.0, 0.0, 1.0],
            Incident::LinearZ => [1.0, 0.0, 0.0],
        }
    }

    /// Detection direction at angle `theta` from exact backscattering.
    pub fn detection_direction(self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        match self {
            Incident::CircularPlus => [s, 0.0, -c],
            Incident::LinearZ => [-c, s, 0.0],
        }
    }
}

/// Which dipole transitions take part in photon exchange and detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DipoleModel {
    /// All three σ_1e transitions.
    Full,
    /// Only the transition driven by the laser (two-level scalar model).
    DrivenTransition,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    pub rabi: C64,
    pub detuning: f64,
    pub gamma: f64,
    pub incident: Incident,
}

impl DriveParams {
    /// Real Rabi frequency giving saturation `s` at detuning `δ` (γ = 1).
    pub fn from_saturation(s: f64, detuning: f64, incident: Incident) -> Self {
        let gamma = 1.0;
        let rabi = (2.0 * s.max(0.0) * (detuning * detuning + gamma * gamma)).sqrt();
        Self { rabi: C64::new(rabi, 0.0), detuning, gamma, incident }
    }

    pub fn from_rabi(rabi: f64, detuning: f64, incident: Incident) -> Self {
        Self { rabi: C64::new(rabi, 0.0), detuning, gamma: 1.0, incident }
    }

    /// `s = |Ω|² / 2(δ² + γ²)`.
    pub fn saturation(&self) -> f64 {
        self.rabi.norm_sqr() / (2.0 * (self.detuning.powi(2) + self.gamma.powi(2)))
    }
}

fn spherical_cartesian(q: Spherical) -> [C64; 3] {
    ComplexVec3::basis(q).to_cartesian()
}

/// Cartesian components `D_a` of the lowering dipole operator
/// `D = −ê₋₁σ₁₂ + ê₀σ₁₃ − ê₊₁σ₁₄`.
pub fn dipole_components(model: DipoleModel, incident: Incident) -> [Op4; 3] {
    let terms = [
        (Spherical::Minus, -ONE, 2usize),
        (Spherical::Zero, ONE, 3),
        (Spherical::Plus, -ONE, 4),
    ];
    let mut d = [Op4::zeros(); 3];
    for (q, sign, level) in terms {
        if model == DipoleModel::DrivenTransition && level != incident.excited_level() {
            continue;
        }
        let e = spherical_cartesian(q);
        for a in 0..3 {
            d[a] += sigma(1, level) * (sign * e[a]);
        }
    }
    d
}

fn commutator(a: &Op4, b: &Op4) -> Op4 {
    a * b - b * a
}

/// Coordinate matrix of the single-atom Liouvillian for one Rabi frequency.
pub fn single_atom_liouvillian(drive: &DriveParams, rabi: C64) -> SuperOp16 {
    let d = dipole_components(DipoleModel::Full, drive.incident);
    let dd: Vec<Op4> = d.iter().map(|x| x.adjoint()).collect();
    let n = sigma(2, 2) + sigma(3, 3) + sigma(4, 4);
    let p = sigma(drive.incident.excited_level(), 1);
    let h = p * rabi + p.adjoint() * rabi.conj();
    let gamma = C64::new(drive.gamma, 0.0);
    superoperator(|q| {
        let mut r = commutator(&n, q) * (-I * drive.detuning) - commutator(&h, q) * (I * 0.5);
        let mut decay = -(n * q + q * n);
        for a in 0..3 {
            decay += dd[a] * q * d[a] * C64::new(2.0, 0.0);
        }
        r += decay * gamma;
        r
    })
}

/// Single-atom generator with its truncated system and steady state.
#[derive(Clone, Debug)]
pub struct SingleAtomSystem {
    pub generator: SuperOp16,
    pub a: SMatrix<C64, 15, 15>,
    pub j: SVector<C64, 15>,
    /// Full coordinates `⟨Q_n⟩`, with `⟨𝟙/2⟩ = 1/2`.
    pub steady_state: [C64; SINGLE_DIM],
}

impl SingleAtomSystem {
    pub fn expectation(&self, op: &Op4) -> C64 {
        coordinates(op).iter().zip(self.steady_state.iter()).map(|(o, x)| o * x).sum()
    }
}

pub fn build_single_generator(drive: &DriveParams) -> SingleAtomSystem {
    let generator = single_atom_liouvillian(drive, drive.rabi);
    let a: SMatrix<C64, 15, 15> = generator.fixed_view::<15, 15>(1, 1).into_owned();
    let j: SVector<C64, 15> = generator.fixed_view::<15, 1>(1, 0).into_owned() * C64::new(0.5, 0.0);
    let x = a.lu().solve(&(-j)).expect("single-atom generator is invertible for γ > 0");
    let mut steady_state = [ZERO; SINGLE_DIM];
    steady_state[0] = C64::new(0.5, 0.0);
    steady_state[1..].copy_from_slice(x.as_slice());
    SingleAtomSystem { generator, a, j, steady_state }
}

/// Which atom carries `D†` in the T-part of an exchange term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ordering {
    /// `ℒ_12`: photon emitted by the second atom, absorbed by the first.
    FirstSecond,
    /// `ℒ_21`.
    SecondFirst,
}

/// One Cartesian component `(a, b)` of the T or T* part of `ℒ_12` or `ℒ_21`
/// on the truncated coordinates, without its coefficient.
#[derive(Clone, Debug)]
pub struct InteractionTerm {
    pub a: usize,
    pub b: usize,
    /// `true` for the T* part, whose coefficient carries `g*`.
    pub conjugate: bool,
    pub ordering: Ordering,
    /// Change of the first atom's excitation charge from row to column
    /// element; always ±1.
    pub charge_shift: i32,
    /// `(row, col, value)` in truncated indices.
    pub entries: Vec<(usize, usize, C64)>,
}

impl InteractionTerm {
    /// Cartesian tensor slot `3a + b`.
    pub fn slot(&self) -> usize {
        3 * self.a + self.b
    }

    /// `γ g Δ_ab` or its conjugate partner `γ g* Δ*_ab`.
    pub fn coefficient(&self, gamma: f64, g: C64, delta_ab: C64) -> C64 {
        if self.conjugate {
            g.conj() * delta_ab.conj() * gamma
        } else {
            g * delta_ab * gamma
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(x.len());
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
        out
    }

    pub fn apply_transpose(&self, y: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(y.len());
        for &(r, c, v) in &self.entries {
            out[c] += v * y[r];
        }
        out
    }
}

fn kron_entries(first: &SuperOp16, second: &SuperOp16) -> Vec<(usize, usize, C64)> {
    let nz = |m: &SuperOp16| -> Vec<(usize, usize, C64)> {
        let mut v = Vec::new();
        for r in 0..SINGLE_DIM {
            for c in 0..SINGLE_DIM {
                if m[(r, c)] != ZERO {
                    v.push((r, c, m[(r, c)]));
                }
            }
        }
        v
    };
    let (f, s) = (nz(first), nz(second));
    let mut out = Vec::with_capacity(f.len() * s.len());
    for &(i, ip, x) in &f {
        for &(j, jp, y) in &s {
            let row = PairIndex::new(i, j).truncated();
            let col = PairIndex::new(ip, jp).truncated();
            match (row, col) {
                (Some(r), Some(c)) => out.push((r, c, x * y)),
                _ => debug_assert!((x * y).norm() < 1e-14, "exchange term touches 𝟙⊗𝟙"),
            }
        }
    }
    out.sort_by_key(|&(r, c, _)| (r, c));
    out
}

fn build_terms(model: DipoleModel, incident: Incident) -> Vec<InteractionTerm> {
    let d = dipole_components(model, incident);
    let dd: Vec<Op4> = d.iter().map(|x| x.adjoint()).collect();
    let mut terms = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let left_dd = superoperator(|q| dd[a] * q);
            let right_d = superoperator(|q| q * d[b]);
            let comm_d = superoperator(|q| commutator(q, &d[b]));
            let comm_dd = superoperator(|q| commutator(&dd[a], q));
            let parts = [
                (false, Ordering::FirstSecond, 1, &left_dd, &comm_d),
                (true, Ordering::FirstSecond, -1, &right_d, &comm_dd),
                (false, Ordering::SecondFirst, -1, &comm_d, &left_dd),
                (true, Ordering::SecondFirst, 1, &comm_dd, &right_d),
            ];
            for (conjugate, ordering, charge_shift, first, second) in parts {
                let entries = kron_entries(first, second);
                if entries.is_empty() {
                    continue;
                }
                terms.push(InteractionTerm { a, b, conjugate, ordering, charge_shift, entries });
            }
        }
    }
    terms
}

/// Cached exchange terms for a dipole model.
pub fn interaction_terms(model: DipoleModel, incident: Incident) -> &'static [InteractionTerm] {
    static FULL: OnceLock<Vec<InteractionTerm>> = OnceLock::new();
    static DRIVEN_CIRCULAR: OnceLock<Vec<InteractionTerm>> = OnceLock::new();
    static DRIVEN_LINEAR: OnceLock<Vec<InteractionTerm>> = OnceLock::new();
    let cell = match (model, incident) {
        (DipoleModel::Full, _) => &FULL,
        (DipoleModel::DrivenTransition, Incident::CircularPlus) => &DRIVEN_CIRCULAR,
        (DipoleModel::DrivenTransition, Incident::LinearZ) => &DRIVEN_LINEAR,
    };
    cell.get_or_init(|| build_terms(model, incident))
}

/// Truncated generator `A` and drive vector `j` for two independent atoms
/// with Rabi frequencies `rabi[0]`, `rabi[1]`.
pub fn uncoupled_generator(drive: &DriveParams, rabi: [C64; 2]) -> (DMatrix<C64>, DVector<C64>) {
    let s1 = single_atom_liouvillian(drive, rabi[0]);
    let s2 = if rabi[1] == rabi[0] { s1 } else { single_atom_liouvillian(drive, rabi[1]) };
    let mut a = DMatrix::zeros(TRUNCATED_DIM, TRUNCATED_DIM);
    let mut j = DVector::zeros(TRUNCATED_DIM);
    for i in 0..SINGLE_DIM {
        for k in 0..SINGLE_DIM {
            let row = match PairIndex::new(i, k).truncated() {
                Some(r) => r,
                None => continue,
            };
            // (S₁ ⊗ 𝟙 + 𝟙 ⊗ S₂) restricted to this row
            for ip in 0..SINGLE_DIM {
                let v = s1[(i, ip)];
                if v != ZERO {
                    match PairIndex::new(ip, k).truncated() {
                        Some(c) => a[(row, c)] += v,
                        None => j[row] += v * 0.25,
                    }
                }
            }
            for kp in 0..SINGLE_DIM {
                let v = s2[(k, kp)];
                if v != ZERO {
                    match PairIndex::new(i, kp).truncated() {
                        Some(c) => a[(row, c)] += v,
                        None => j[row] += v * 0.25,
                    }
                }
            }
        }
    }
    (a, j)
}

/// Exchange matrix `V` for coupling `g` and projector components `Δ_ab`.
pub fn interaction_matrix(
    terms: &[InteractionTerm],
    gamma: f64,
    g: C64,
    delta: &[[C64; 3]; 3],
) -> DMatrix<C64> {
    let mut v = DMatrix::zeros(TRUNCATED_DIM, TRUNCATED_DIM);
    for t in terms {
        let c = t.coefficient(gamma, g, delta[t.a][t.b]);
        if c == ZERO {
            continue;
        }
        for &(r, col, x) in &t.entries {
            v[(r, col)] += c * x;
        }
    }
    v
}

#[derive(Clone, Debug)]
pub struct LiouvilleSystem {
    pub a: DMatrix<C64>,
    pub j: DVector<C64>,
    pub v: DMatrix<C64>,
    pub drive: DriveParams,
    pub geometry: PairGeometry,
    pub dipole: DipoleModel,
    /// Position-dependent Rabi frequencies `Ω e^{i k_L·r_α}`.
    pub rabi: [C64; 2],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Assemble the pair system with the physical laser phases at both atoms.
pub fn build_pair_system(drive: &DriveParams, geometry: &PairGeometry, dipole: DipoleModel) -> LiouvilleSystem {
    let kl = drive.incident.laser_direction().map(|x| x * geometry.k0);
    let rabi = [0, 1].map(|atom| drive.rabi * C64::from_polar(1.0, dot(kl, geometry.position(atom))));
    let (a, j) = uncoupled_generator(drive, rabi);
    let delta = geometry.projector().cartesian;
    let v = interaction_matrix(interaction_terms(dipole, drive.incident), drive.gamma, geometry.g, &delta);
    LiouvilleSystem { a, j, v, drive: *drive, geometry: *geometry, dipole, rabi }
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Matrices read back from a text dump.
#[derive(Clone, Debug, PartialEq)]
pub struct DumpedSystem {
    pub a: DMatrix<C64>,
    pub j: DVector<C64>,
    pub v: DMatrix<C64>,
}

fn write_section<W: Write>(w: &mut W, name: &str, m: &DMatrix<C64>) -> io::Result<()> {
    writeln!(w, "# {} {} {}", name, m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if z != ZERO {
                writeln!(w, "{} {} {:e} {:e}", r, c, z.re, z.im)?;
            }
        }
    }
    Ok(())
}

impl LiouvilleSystem {
    /// Text dump: for each of `A`, `j`, `V` a header `# NAME ROWS COLS`
    /// followed by `row col re im` lines for the nonzero entries (0-based).
    pub fn write_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_section(w, "A", &self.a)?;
        let j = DMatrix::from_column_slice(self.j.len(), 1, self.j.as_slice());
        write_section(w, "j", &j)?;
        write_section(w, "V", &self.v)
    }
}

pub fn read_dump<R: BufRead>(r: R) -> Result<DumpedSystem, DumpError> {
    let mut sections: Vec<(String, DMatrix<C64>)> = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let err = |message: &str| DumpError::Parse { line: n + 1, message: message.to_string() };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields[0] == "#" {
            if fields.len() != 4 {
                return Err(err("malformed header"));
            }
            let rows: usize = fields[2].parse().map_err(|_| err("bad row count"))?;
            let cols: usize = fields[3].parse().map_err(|_| err("bad column count"))?;
            sections.push((fields[1].to_string(), DMatrix::zeros(rows, cols)));
            continue;
        }
        let (_, m) = sections.last_mut().ok_or_else(|| err("entry before header"))?;
        if fields.len() != 4 {
            return Err(err("expected `row col re im`"));
        }
        let row: usize = fields[0].parse().map_err(|_| err("bad row"))?;
        let col: usize = fields[1].parse().map_err(|_| err("bad column"))?;
        let re: f64 = fields[2].parse().map_err(|_| err("bad real part"))?;
        let im: f64 = fields[3].parse().map_err(|_| err("bad imaginary part"))?;
        if row >= m.nrows() || col >= m.ncols() {
            return Err(err("index out of range"));
        }
        m[(row, col)] = C64::new(re, im);
    }
    let mut take = |name: &str| {
        sections
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| sections.swap_remove(i).1)
            .ok_or_else(|| DumpError::Parse { line: 0, message: format!("missing section {name}") })
    };
    let a = take("A")?;
    let j = take("j")?;
    let v = take("V")?;
    Ok(DumpedSystem { a, j: DVector::from_column_slice(j.as_slice()), v })
}

/// `Σ_a p_a D_a` for Cartesian components `p`.
pub(crate) fn contract(polarization: &[C64; 3], d: &[Op4; 3]) -> Op4 {
    let mut out = Op4::zeros();
    for a in 0..3 {
        out += d[a] * polarization[a];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{charge, PairIndex};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn dipole_number_operator() {
        let d = dipole_components(DipoleModel::Full, Incident::CircularPlus);
        let n: Op4 = d.iter().map(|x| x.adjoint() * x).sum();
        let want = sigma(2, 2) + sigma(3, 3) + sigma(4, 4);
        assert!((n - want).camax() < 1e-15);
    }

    #[test]
    fn undriven_atom_relaxes_to_ground() {
        let drive = DriveParams::from_rabi(0.0, 0.0, Incident::CircularPlus);
        let sys = build_single_generator(&drive);
        assert!(close(sys.expectation(&sigma(1, 1)), ONE, 1e-14));
        for k in 1..=4 {
            for l in 1..=4 {
                if (k, l) != (1, 1) {
                    assert!(sys.expectation(&sigma(k, l)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bloch_steady_state() {
        for &(s, delta) in &[(0.3, 0.0), (1.0, 2.0), (7.0, -1.5)] {
            let drive = DriveParams::from_saturation(s, delta, Incident::CircularPlus);
            let sys = build_single_generator(&drive);
            let want11 = (2.0 + s) / (2.0 * (1.0 + s));
            assert!(close(sys.expectation(&sigma(1, 1)), C64::new(want11, 0.0), 1e-13));
            let want14 = I * C64::new(1.0, delta) / drive.rabi.conj() * (s / (1.0 + s));
            assert!(close(sys.expectation(&sigma(1, 4)), want14, 1e-13));
            assert!(sys.expectation(&sigma(2, 2)).norm() < 1e-14);
            assert!(sys.expectation(&sigma(3, 3)).norm() < 1e-14);
        }
    }

    #[test]
    fn exchange_terms_shift_first_atom_charge() {
        // every term maps into the truncated space; charge bookkeeping holds
        for t in interaction_terms(DipoleModel::Full, Incident::CircularPlus) {
            for &(r, c, _) in &t.entries {
                let (pr, pc) = (PairIndex::from_truncated(r), PairIndex::from_truncated(c));
                assert_eq!(charge(pr.first) - charge(pc.first), t.charge_shift);
            }
        }
    }

    #[test]
    fn zero_coupling_gives_zero_interaction() {
        let drive = DriveParams::from_saturation(1.0, 0.0, Incident::CircularPlus);
        let geom = PairGeometry::new(0.5, 0.2, 10.0).unwrap().with_coupling(ZERO);
        let sys = build_pair_system(&drive, &geom, DipoleModel::Full);
        assert_eq!(sys.v.camax(), 0.0);
    }

    #[test]
    fn interaction_is_linear_in_coupling() {
        let drive = DriveParams::from_saturation(1.0, 0.0, Incident::CircularPlus);
        let geom = PairGeometry::new(0.5, 0.2, 10.0).unwrap();
        let v1 = build_pair_system(&drive, &geom, DipoleModel::Full).v;
        let v2 = build_pair_system(&drive, &geom.with_coupling(geom.g * 2.0), DipoleModel::Full).v;
        assert!((v2 - v1 * C64::new(2.0, 0.0)).camax() < 1e-15);
    }

    #[test]
    fn dump_round_trip() {
        let drive = DriveParams::from_saturation(0.4, 1.0, Incident::LinearZ);
        let geom = PairGeometry::new(1.0, 2.0, 6.0).unwrap();
        let sys = build_pair_system(&drive, &geom, DipoleModel::Full);
        let mut buf = Vec::new();
        sys.write_dump(&mut buf).unwrap();
        let back = read_dump(buf.as_slice()).unwrap();
        assert!((back.a - &sys.a).camax() < 1e-15 * sys.a.camax());
        assert!((back.v - &sys.v).camax() < 1e-15 * sys.v.camax());
        assert!((back.j - &sys.j).camax() < 1e-15);
        assert!(read_dump("1 2 3 4\n".as_bytes()).is_err());
    }
}
