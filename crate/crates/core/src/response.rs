//! Second-order response to the exchange coupling, separated from the
//! geometry.
//!
//! A pair with laser phases `φ₁ = k_L·r₁₂` and `φ₂ = 0` is gauge-equivalent to
//! one with a real Rabi frequency on both atoms. In that frame the generator
//! `A`, its Green's matrix and the order-0 state are independent of the
//! geometry. Every exchange term carries the coefficient
//!
//! ```text
//! c_k = γ · (g or g*) · Δ_ab · e^{−i d_k ψ},   ψ = k_L·r₁₂
//! ```
//!
//! where `d_k = ±1` is the change of the first atom's excitation charge. A
//! second-order observable is a quadratic form `Σ_lk c_l c_k Z_lk`, with
//! `Z_lk = (B_lᵀ G₀ᵀ o)·(G₀ B_k ⟨Q⟩^[0])`. Grouping terms by their powers of `g`
//! and `e^{iψ}` gives a [`HarmonicForm`]: nine 9×9 Cartesian tensors that can
//! be evaluated at a point or averaged over the fast phases analytically.

use nalgebra::DVector;

use crate::channels::{Channel, ChannelObservableSet};
use crate::geometry::{C64, ZERO};
use crate::liouvillian::{interaction_terms, uncoupled_generator, DriveParams, InteractionTerm, Ordering};
use crate::operators::ObservableCoordinates;
use crate::solver::{GreensMatrix, SolverError};

/// Index of the `(M, N)` class: `M` counts `g` minus `g*` factors, `N` the
/// power of `e^{iψ}`. Both range over {−2, 0, 2}.
fn class_index(m: i32, n: i32) -> usize {
    (3 * (m / 2 + 1) + (n / 2 + 1)) as usize
}

/// The class holding `|g|²` terms with no `ψ` dependence after the
/// observable's own phase is included.
fn class_values(index: usize) -> (i32, i32) {
    let i = index as i32;
    (2 * (i / 3) - 2, 2 * (i % 3) - 2)
}

/// Quadratic form in the exchange coefficients, grouped by harmonic class.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicForm {
    /// `r[class][9 slot_l + slot_k]`, already multiplied by `γ²`.
    pub r: [[C64; 81]; 9],
    /// Power of `e^{iψ}` contributed by the observable itself (gauge phase
    /// and detection phase).
    pub psi_shift: i32,
    /// Interference term: carries `e^{iκ}` and is reported as `2 Re`.
    pub detected: bool,
}

impl HarmonicForm {
    fn from_quadratic(
        z: &[Vec<C64>],
        terms: &[InteractionTerm],
        weights: &[f64],
        gamma: f64,
        psi_shift: i32,
        detected: bool,
    ) -> Self {
        let mut r = [[ZERO; 81]; 9];
        for (l, tl) in terms.iter().enumerate() {
            for (k, tk) in terms.iter().enumerate() {
                let m = sign(tl) + sign(tk);
                let n = -(tl.charge_shift + tk.charge_shift);
                let w = weights[l] * weights[k] * gamma * gamma;
                r[class_index(m, n)][9 * tl.slot() + tk.slot()] += z[l][k] * w;
            }
        }
        Self { r, psi_shift, detected }
    }

    /// `Σ R Δ Δ` per class for a real transverse projector.
    pub fn contract(&self, delta: &[[f64; 3]; 3]) -> [C64; 9] {
        let flat: Vec<f64> = delta.iter().flatten().copied().collect();
        let mut out = [ZERO; 9];
        for (class, slot) in out.iter_mut().enumerate() {
            let r = &self.r[class];
            let mut acc = ZERO;
            for (i, di) in flat.iter().enumerate() {
                if *di == 0.0 {
                    continue;
                }
                let row: C64 = (0..9).map(|j| r[9 * i + j] * flat[j]).sum();
                acc += row * *di;
            }
            *slot = acc;
        }
        out
    }

    /// Combine contracted classes with the coupling and phases of one
    /// configuration.
    pub fn combine(&self, contracted: &[C64; 9], g: C64, psi: f64, kappa: f64) -> f64 {
        let mut total = ZERO;
        for (class, value) in contracted.iter().enumerate() {
            if *value == ZERO {
                continue;
            }
            let (m, n) = class_values(class);
            let gfac = match m {
                2 => g * g,
                0 => C64::new(g.norm_sqr(), 0.0),
                _ => (g * g).conj(),
            };
            total += value * gfac * C64::from_polar(1.0, f64::from(n + self.psi_shift) * psi);
        }
        if self.detected {
            2.0 * (total * C64::from_polar(1.0, kappa)).re
        } else {
            total.re
        }
    }

    /// Value at one configuration.
    pub fn evaluate(&self, delta: &[[f64; 3]; 3], g: C64, psi: f64, kappa: f64) -> f64 {
        self.combine(&self.contract(delta), g, psi, kappa)
    }

    /// Average over the fast phases `k₀r₁₂` and `ψ` at `|g| = 1`, given the
    /// angular moments `⟨Δ_ab Δ_cd e^{iκ}⟩` (or `⟨Δ_ab Δ_cd⟩` for ladder
    /// terms).
    pub fn phase_average(&self, moments: &[[C64; 9]; 9]) -> f64 {
        let n = -self.psi_shift;
        if !(-2..=2).contains(&n) {
            return 0.0;
        }
        let r = &self.r[class_index(0, n)];
        let mut total = ZERO;
        for (i, row) in moments.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                total += r[9 * i + j] * m;
            }
        }
        if self.detected {
            2.0 * total.re
        } else {
            total.re
        }
    }
}

fn sign(t: &InteractionTerm) -> i32 {
    if t.conjugate {
        -1
    } else {
        1
    }
}

/// Harmonic forms of one channel's double-scattering observables.
#[derive(Clone, Debug)]
pub struct ChannelForms {
    pub ladder: HarmonicForm,
    pub crossed: HarmonicForm,
    pub elastic_ladder: HarmonicForm,
    pub elastic_crossed: HarmonicForm,
    /// Order-0 `Σ_α⟨E†_α E_α⟩` and `Σ_α|⟨E_α⟩|²`.
    pub single_scatter: f64,
    pub elastic_single_scatter: f64,
}

/// Drive-dependent part of the second-order response for one channel.
#[derive(Clone, Debug)]
pub struct ResponseEngine {
    pub channel: Channel,
    pub drive: DriveParams,
    terms: &'static [InteractionTerm],
    weights: Vec<f64>,
    green: GreensMatrix,
    x0: DVector<C64>,
    u: Vec<DVector<C64>>,
    obs: ChannelObservableSet,
}

impl ResponseEngine {
    pub fn new(channel: Channel, drive: &DriveParams) -> Result<Self, SolverError> {
        let mut drive = *drive;
        drive.incident = channel.incident();
        let rabi = C64::new(drive.rabi.norm(), 0.0);
        let (a, j) = uncoupled_generator(&drive, [rabi, rabi]);
        let green = GreensMatrix::new(&a)?;
        let x0 = green.apply(&j);
        let terms = interaction_terms(channel.dipole_model(), channel.incident());
        let u = terms.iter().map(|t| green.apply(&t.apply(&x0))).collect();
        Ok(Self {
            channel,
            drive,
            terms,
            weights: vec![1.0; terms.len()],
            green,
            x0,
            u,
            obs: channel.observables(),
        })
    }

    /// Test hook: scale every exchange term in which the first atom absorbs
    /// (`ℒ_12`) by `1 + epsilon`. Any nonzero value breaks the symmetry
    /// between the two scattering paths.
    pub fn with_asymmetry(mut self, epsilon: f64) -> Self {
        for (w, t) in self.weights.iter_mut().zip(self.terms) {
            *w = if t.ordering == Ordering::FirstSecond { 1.0 + epsilon } else { 1.0 };
        }
        self
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        self.terms
    }

    pub fn rcond(&self) -> f64 {
        self.green.rcond()
    }

    fn zeroth(&self, o: &ObservableCoordinates) -> C64 {
        o.expectation(&self.x0)
    }

    /// `∂⟨O⟩^[1]/∂c_k`.
    fn linear(&self, o: &ObservableCoordinates) -> Vec<C64> {
        self.u.iter().map(|uk| o.correction(uk)).collect()
    }

    /// `∂²⟨O⟩^[2]/∂c_l∂c_k` (not symmetrized).
    fn quadratic(&self, o: &ObservableCoordinates) -> Vec<Vec<C64>> {
        let y = self.green.apply_transpose(&o.dense());
        self.terms
            .iter()
            .map(|tl| {
                let w = tl.apply_transpose(&y);
                self.u.iter().map(|uk| w.dot(uk)).collect()
            })
            .collect()
    }

    fn product_form(&self, a: &ObservableCoordinates, b: &ObservableCoordinates) -> Vec<Vec<C64>> {
        let (za, zb) = (self.zeroth(a), self.zeroth(b));
        let (la, lb) = (self.linear(a), self.linear(b));
        let (qa, qb) = (self.quadratic(a), self.quadratic(b));
        (0..self.terms.len())
            .map(|l| {
                (0..self.terms.len())
                    .map(|k| za * qb[l][k] + zb * qa[l][k] + la[l] * lb[k])
                    .collect()
            })
            .collect()
    }

    fn form(&self, z: &[Vec<C64>], psi_shift: i32, detected: bool) -> HarmonicForm {
        HarmonicForm::from_quadratic(z, self.terms, &self.weights, self.drive.gamma, psi_shift, detected)
    }

    pub fn forms(&self) -> ChannelForms {
        let n = self.terms.len();
        let obs = &self.obs;
        let mut el_ladder = vec![vec![ZERO; n]; n];
        for atom in 0..2 {
            let z = self.product_form(&obs.emit_dagger[atom], &obs.emit[atom]);
            for (acc, row) in el_ladder.iter_mut().zip(z) {
                for (a, b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        let el_crossed = self.product_form(&obs.emit_dagger[0], &obs.emit[1]);
        let elastic_single_scatter = (0..2)
            .map(|a| (self.zeroth(&obs.emit_dagger[a]) * self.zeroth(&obs.emit[a])).re)
            .sum();
        // E† on the first atom carries gauge phase e^{−iψ}; the detection
        // phase e^{ik·r₁₂} contributes a further e^{−iψ} times e^{iκ}
        ChannelForms {
            ladder: self.form(&self.quadratic(&obs.ladder), 0, false),
            crossed: self.form(&self.quadratic(&obs.crossed), -2, true),
            elastic_ladder: self.form(&el_ladder, 0, false),
            elastic_crossed: self.form(&el_crossed, -2, true),
            single_scatter: self.zeroth(&obs.ladder).re,
            elastic_single_scatter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::fixed_geometry_intensities;
    use crate::geometry::PairGeometry;
    use crate::liouvillian::build_pair_system;
    use crate::solver::perturbative_orders;

    fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn class_indexing() {
        for i in 0..9 {
            let (m, n) = class_values(i);
            assert_eq!(class_index(m, n), i);
        }
    }

    // the gauge-frame engine and the direct build agree at fixed geometry
    #[test]
    fn matches_direct_build() {
        let cases = [
            (Channel::HparH, 0.7, 0.0, (0.9, 0.4, 8.3), 0.0),
            (Channel::HperpH, 2.0, 1.5, (2.1, 5.0, 6.2), 0.002),
            (Channel::LinPerpLin, 0.3, -2.0, (1.3, 2.0, 11.0), 0.01),
            (Channel::LinParLin, 5.0, 0.0, (0.4, 3.3, 4.4), 0.0),
            (Channel::ScalarTwoLevel, 1.0, 3.0, (2.6, 1.0, 9.9), 0.005),
        ];
        for (channel, s, delta, (th, ph, r), theta) in cases {
            let drive = DriveParams::from_saturation(s, delta, channel.incident());
            let geom = PairGeometry::new(th, ph, r).unwrap();
            let orders = perturbative_orders(&build_pair_system(&drive, &geom, channel.dipole_model()), 2).unwrap();
            let direct = fixed_geometry_intensities(channel, &orders, theta).unwrap();

            let engine = ResponseEngine::new(channel, &drive).unwrap();
            let forms = engine.forms();
            let kl = channel.incident().laser_direction();
            let k = channel.incident().detection_direction(theta);
            let sep = geom.separation();
            let psi = dot(kl, sep);
            let kappa = dot([k[0] + kl[0], k[1] + kl[1], k[2] + kl[2]], sep);
            let delta_t = geom.projector().real_parts();
            let eval = |f: &HarmonicForm| f.evaluate(&delta_t, geom.g, psi, kappa);

            let scale = direct.total.ladder.abs().max(1e-300);
            assert!((eval(&forms.ladder) - direct.total.ladder).abs() < 1e-11 * scale, "{channel} ladder");
            assert!((eval(&forms.crossed) - direct.total.crossed).abs() < 1e-11 * scale, "{channel} crossed");
            let scale = direct.elastic.ladder.abs().max(1e-300);
            assert!((eval(&forms.elastic_ladder) - direct.elastic.ladder).abs() < 1e-11 * scale, "{channel} el ladder");
            assert!((eval(&forms.elastic_crossed) - direct.elastic.crossed).abs() < 1e-11 * scale, "{channel} el crossed");
            assert!((forms.single_scatter - direct.total.single_scatter).abs() < 1e-14);
            assert!((forms.elastic_single_scatter - direct.elastic.single_scatter).abs() < 1e-14);
        }
    }

    #[test]
    fn asymmetry_hook_changes_crossed_only_when_nonzero() {
        let drive = DriveParams::from_saturation(1.0, 0.0, Channel::HparH.incident());
        let base = ResponseEngine::new(Channel::HparH, &drive).unwrap().forms();
        let same = ResponseEngine::new(Channel::HparH, &drive).unwrap().with_asymmetry(0.0).forms();
        assert_eq!(base.crossed, same.crossed);
        let skew = ResponseEngine::new(Channel::HparH, &drive).unwrap().with_asymmetry(0.1).forms();
        assert_ne!(base.elastic_crossed, skew.elastic_crossed);
    }
}
