//! Spherical-basis vector algebra and the geometry of an atom pair.
//!
//! Vectors are stored by their coordinates on the spherical basis
//!
//! ```text
//! ê₊₁ = −(x̂ + iŷ)/√2,   ê₀ = ẑ,   ê₋₁ = (x̂ − iŷ)/√2
//! ```
//!
//! **Contraction convention.** Every dot product and tensor component in this
//! crate is *non-conjugating*: `a·b = Σ_i a_i b_i` in Cartesian components, so
//! that `ê_q·ê_{q'} = (−1)^q δ_{q,−q'}` and `Δ_{q,q'} = ê_q·Δ·ê_{q'}`. This is
//! the dyadic convention of the dipole operators and projector below; most
//! linear-algebra code conjugates the left factor instead. The Hermitian inner
//! product is available separately as [`ComplexVec3::inner`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("interatomic distance must be positive and finite, got k0*r = {0}")]
    InvalidSeparation(f64),
    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),
}

/// Index `q ∈ {−1, 0, +1}` of a spherical basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spherical {
    Minus,
    Zero,
    Plus,
}

impl Spherical {
    pub const ALL: [Spherical; 3] = [Spherical::Minus, Spherical::Zero, Spherical::Plus];

    pub fn q(self) -> i32 {
        match self {
            Spherical::Minus => -1,
            Spherical::Zero => 0,
            Spherical::Plus => 1,
        }
    }

    fn slot(self) -> usize {
        (self.q() + 1) as usize
    }
}

/// Complex 3-vector in the spherical basis `{ê₋₁, ê₀, ê₊₁}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVec3 {
    /// Coordinates `[c₋₁, c₀, c₊₁]`.
    pub c: [C64; 3],
}

impl ComplexVec3 {
    pub const fn new(minus: C64, zero: C64, plus: C64) -> Self {
        Self { c: [minus, zero, plus] }
    }

    /// The basis vector `ê_q`.
    pub fn basis(q: Spherical) -> Self {
        let mut c = [ZERO; 3];
        c[q.slot()] = ONE;
        Self { c }
    }

    pub fn component(&self, q: Spherical) -> C64 {
        self.c[q.slot()]
    }

    pub fn from_cartesian(v: [C64; 3]) -> Self {
        let [x, y, z] = v;
        // c₋₁ = (x + iy)/√2, c₊₁ = −(x − iy)/√2
        let minus = (x + I * y) * FRAC_1_SQRT_2;
        let plus = -(x - I * y) * FRAC_1_SQRT_2;
        Self::new(minus, z, plus)
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        Self::from_cartesian(v.map(|x| C64::new(x, 0.0)))
    }

    pub fn to_cartesian(&self) -> [C64; 3] {
        let [m, z, p] = self.c;
        [
            (m - p) * FRAC_1_SQRT_2,
            -I * (m + p) * FRAC_1_SQRT_2,
            z,
        ]
    }

    /// Non-conjugating contraction `a·b`.
    pub fn dot(&self, other: &ComplexVec3) -> C64 {
        let a = self.to_cartesian();
        let b = other.to_cartesian();
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// Hermitian inner product `a*·b`.
    pub fn inner(&self, other: &ComplexVec3) -> C64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean norm; the spherical basis is orthonormal under `inner`.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conj(&self) -> Self {
        Self::from_cartesian(self.to_cartesian().map(|z| z.conj()))
    }
}

impl fmt::Display for ComplexVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}) ê₋₁ + ({:.6}) ê₀ + ({:.6}) ê₊₁",
            self.c[0], self.c[1], self.c[2]
        )
    }
}

/// Unit vector along the interatomic axis with polar angle `theta` and
/// azimuth `phi`, measured against the spherical basis.
pub fn unit_vector(theta: f64, phi: f64) -> ComplexVec3 {
    let phi = phi.rem_euclid(2.0 * PI);
    let st = theta.sin() * FRAC_1_SQRT_2;
    ComplexVec3::new(
        C64::from_polar(st, phi),
        C64::new(theta.cos(), 0.0),
        -C64::from_polar(st, -phi),
    )
}

/// Transverse projector `Δ = 𝟙 − n̂n̂`, stored in Cartesian components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseProjector {
    pub cartesian: [[C64; 3]; 3],
}

impl TransverseProjector {
    /// `Δ_{q,q'} = ê_q·Δ·ê_{q'}` without conjugation.
    pub fn component(&self, q: Spherical, qp: Spherical) -> C64 {
        let left = ComplexVec3::basis(q).to_cartesian();
        let right = ComplexVec3::basis(qp).to_cartesian();
        let mut acc = ZERO;
        for a in 0..3 {
            for b in 0..3 {
                acc += left[a] * self.cartesian[a][b] * right[b];
            }
        }
        acc
    }

    pub fn apply(&self, v: &ComplexVec3) -> ComplexVec3 {
        let x = v.to_cartesian();
        let mut out = [ZERO; 3];
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = (0..3).map(|b| self.cartesian[a][b] * x[b]).sum();
        }
        ComplexVec3::from_cartesian(out)
    }

    /// Tensor product `Δ·Δ'`.
    pub fn compose(&self, other: &TransverseProjector) -> TransverseProjector {
        let mut out = [[ZERO; 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = (0..3)
                    .map(|c| self.cartesian[a][c] * other.cartesian[c][b])
                    .sum();
            }
        }
        TransverseProjector { cartesian: out }
    }

    /// Real Cartesian components; exact for projectors built from real axes.
    #[cfg(test)]
    pub(crate) fn real_parts(&self) -> [[f64; 3]; 3] {
        self.cartesian.map(|row| row.map(|z| z.re))
    }
}

pub fn transverse_projector(n_hat: &ComplexVec3) -> TransverseProjector {
    let n = n_hat.to_cartesian();
    let mut cartesian = [[ZERO; 3]; 3];
    for (a, row) in cartesian.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            let id = if a == b { ONE } else { ZERO };
            *slot = id - n[a] * n[b];
        }
    }
    TransverseProjector { cartesian }
}

/// Far-field dipole-dipole coupling `g = (3i / 2k₀r) e^{ik₀r}`.
pub fn coupling_constant(k0: f64, r12: f64) -> Result<C64, GeometryError> {
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(GeometryError::InvalidWavenumber(k0));
    }
    let kr = k0 * r12;
    if !(kr.is_finite() && kr > 0.0) {
        return Err(GeometryError::InvalidSeparation(kr));
    }
    Ok(I * (1.5 / kr) * C64::from_polar(1.0, kr))
}

/// Relative placement of two atoms. Lengths are in units of `1/k₀` with
/// `k₀ = 1`; the atoms sit at `±r₁₂ n̂ / 2` around the pair midpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGeometry {
    pub theta: f64,
    pub phi: f64,
    pub r12: f64,
    pub k0: f64,
    pub g: C64,
    pub n_hat: ComplexVec3,
}

impl PairGeometry {
    pub fn new(theta: f64, phi: f64, r12: f64) -> Result<Self, GeometryError> {
        let k0 = 1.0;
        let g = coupling_constant(k0, r12)?;
        Ok(Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
            r12,
            k0,
            g,
            n_hat: unit_vector(theta, phi),
        })
    }

    /// Replace the coupling constant while keeping positions (and hence the
    /// laser and detection phases) fixed.
    pub fn with_coupling(mut self, g: C64) -> Self {
        self.g = g;
        self
    }

    pub fn projector(&self) -> TransverseProjector {
        transverse_projector(&self.n_hat)
    }

    /// Real Cartesian components of `n̂`.
    pub fn axis(&self) -> [f64; 3] {
        let st = self.theta.sin();
        [st * self.phi.cos(), st * self.phi.sin(), self.theta.cos()]
    }

    /// Separation vector `r₁₂ = r₁ − r₂ = r₁₂ n̂`.
    pub fn separation(&self) -> [f64; 3] {
        self.axis().map(|x| x * self.r12)
    }

    /// Position of atom `index` (0 or 1).
    pub fn position(&self, index: usize) -> [f64; 3] {
        let sign = if index == 0 { 0.5 } else { -0.5 };
        self.separation().map(|x| x * sign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn basis_contractions() {
        for q in Spherical::ALL {
            for qp in Spherical::ALL {
                let a = ComplexVec3::basis(q);
                let b = ComplexVec3::basis(qp);
                let herm = if q == qp { 1.0 } else { 0.0 };
                assert!(close(a.inner(&b), C64::new(herm, 0.0), 1e-15));
                let plain = if q.q() == -qp.q() {
                    if q.q().rem_euclid(2) == 1 { -1.0 } else { 1.0 }
                } else {
                    0.0
                };
                assert!(close(a.dot(&b), C64::new(plain, 0.0), 1e-15));
            }
        }
    }

    #[test]
    fn unit_vector_examples() {
        let n = unit_vector(0.0, 0.0);
        assert!(close(n.c[0], ZERO, 1e-15));
        assert!(close(n.c[1], ONE, 1e-15));
        assert!(close(n.c[2], ZERO, 1e-15));

        let n = unit_vector(PI / 2.0, 0.0);
        assert!(close(n.c[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(n.c[1], ZERO, 1e-15));
        assert!(close(n.c[2], C64::new(-FRAC_1_SQRT_2, 0.0), 1e-15));

        // spherical and Cartesian descriptions agree
        let g = PairGeometry::new(0.4, 2.1, 10.0).unwrap();
        let from_axis = ComplexVec3::from_real(g.axis());
        for (a, b) in from_axis.c.iter().zip(g.n_hat.c.iter()) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn projector_components() {
        let delta = transverse_projector(&unit_vector(0.0, 0.0));
        assert!(close(delta.component(Spherical::Zero, Spherical::Zero), ZERO, 1e-15));

        let (theta, phi) = (1.1_f64, 0.7_f64);
        let delta = transverse_projector(&unit_vector(theta, phi));
        let s2 = theta.sin().powi(2);
        let pp = -C64::from_polar(1.0, 2.0 * phi) * s2 / 2.0;
        assert!(close(delta.component(Spherical::Plus, Spherical::Plus), pp, 1e-14));
        let pm = C64::new(-1.0 + s2 / 2.0, 0.0);
        assert!(close(delta.component(Spherical::Plus, Spherical::Minus), pm, 1e-14));
    }

    #[test]
    fn coupling_examples() {
        assert_abs_diff_eq!(coupling_constant(1.0, 1.5).unwrap().norm(), 1.0, epsilon = 1e-15);
        let g = coupling_constant(1.0, 2.0 * PI * 1e3).unwrap();
        assert_abs_diff_eq!(g.norm(), 2.387e-4, epsilon = 1e-7);
        let ratio = coupling_constant(1.0, 14.0).unwrap() / coupling_constant(1.0, 7.0).unwrap();
        assert_abs_diff_eq!(ratio.norm(), 0.5, epsilon = 1e-15);
        // arg g = k0 r + π/2
        let g = coupling_constant(1.0, 0.3).unwrap();
        assert_abs_diff_eq!(g.arg(), 0.3 + PI / 2.0, epsilon = 1e-14);
        assert_eq!(coupling_constant(1.0, 0.0), Err(GeometryError::InvalidSeparation(0.0)));
        assert!(coupling_constant(1.0, -2.0).is_err());
        assert!(coupling_constant(1.0, f64::NAN).is_err());
    }

    #[test]
    fn positions_straddle_midpoint() {
        let g = PairGeometry::new(0.3, 1.0, 4.0).unwrap();
        let (r1, r2) = (g.position(0), g.position(1));
        let sep = g.separation();
        for a in 0..3 {
            assert_abs_diff_eq!(r1[a] - r2[a], sep[a], epsilon = 1e-15);
            assert_abs_diff_eq!(r1[a] + r2[a], 0.0, epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn projector_is_idempotent_and_transverse(theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
            let n = unit_vector(theta, phi);
            prop_assert!((n.norm() - 1.0).abs() < 1e-14);
            let delta = transverse_projector(&n);
            let sq = delta.compose(&delta);
            for a in 0..3 {
                for b in 0..3 {
                    prop_assert!((sq.cartesian[a][b] - delta.cartesian[a][b]).norm() < 1e-14);
                }
            }
            prop_assert!(delta.apply(&n).norm() < 1e-14);
        }

        #[test]
        fn cartesian_round_trip(re in proptest::array::uniform3(-5.0..5.0f64),
                                im in proptest::array::uniform3(-5.0..5.0f64)) {
            let v = [0, 1, 2].map(|i| C64::new(re[i], im[i]));
            let back = ComplexVec3::from_cartesian(v).to_cartesian();
            for i in 0..3 {
                prop_assert!((back[i] - v[i]).norm() < 1e-13);
            }
        }
    }
}
