//! Configuration averages over pair orientation and separation.
//!
//! Orientations are isotropic: Gauss-Legendre in `cos ϑ` times a uniform
//! trapezoid in `φ`, with the polar axis along the laser for channel
//! averages so that the laser phase only varies with `ϑ`. Separations are
//! either fixed at `ℓ` with the fast phase `k₀r₁₂` averaged out
//! ([`AverageMode::Phase`]) or integrated over `[ℓ − 2π, ℓ + 2π]`
//! ([`AverageMode::Radial`]).
//!
//! Phase mode treats `k₀r₁₂` and the laser phase `k_L·r₁₂` as independent
//! uniformly distributed phases. Only the `|g|²` terms with no net laser
//! phase survive, and they are contracted against angular moments of `Δ⊗Δ`.
//! Radial mode keeps every term and lets the separation integral wash out the
//! oscillating ones. The two differ at order `1/kℓ`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{enhancement_factor, mean_coupling_sqr};
use crate::channels::Channel;
use crate::geometry::{coupling_constant, PairGeometry, C64, ZERO};
use crate::liouvillian::DriveParams;
use crate::response::{ChannelForms, HarmonicForm, ResponseEngine};
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AverageError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{quantity} did not converge: {coarse:e} at base resolution, {fine:e} at double")]
    NonConvergence { quantity: &'static str, coarse: f64, fine: f64 },
    #[error("invalid average configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AverageMode {
    Phase,
    Radial,
}

impl AverageMode {
    pub fn name(self) -> &'static str {
        match self {
            AverageMode::Phase => "phase",
            AverageMode::Radial => "radial",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageConfig {
    /// Mean separation in units of `1/k₀`.
    pub kl: f64,
    pub mode: AverageMode,
    /// Nodes in `cos ϑ` and in `φ`.
    pub angular_nodes: usize,
    /// Uniform nodes of the fast phase, for generic integrands in phase mode.
    pub phase_nodes: usize,
    /// Gauss-Legendre nodes across the radial window.
    pub radial_nodes: usize,
    /// Detection angles from exact backscattering.
    pub thetas: Vec<f64>,
    /// Relative agreement required between base and doubled resolution.
    pub tolerance: f64,
}

impl Default for AverageConfig {
    fn default() -> Self {
        Self {
            kl: 1e3,
            mode: AverageMode::Phase,
            angular_nodes: 64,
            phase_nodes: 16,
            radial_nodes: 64,
            thetas: vec![0.0],
            tolerance: 1e-6,
        }
    }
}

impl AverageConfig {
    pub fn validate(&self) -> Result<(), AverageError> {
        let bad = |msg: String| Err(AverageError::Config(msg));
        if !(self.kl.is_finite() && self.kl > 2.0 * PI) {
            return bad(format!("kl must exceed 2π, got {}", self.kl));
        }
        if self.angular_nodes < 2 || self.phase_nodes < 3 || self.radial_nodes < 2 {
            return bad("node counts too small".into());
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return bad("non-finite detection angle".into());
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        Self {
            angular_nodes: 2 * self.angular_nodes,
            phase_nodes: 2 * self.phase_nodes,
            radial_nodes: 2 * self.radial_nodes,
            ..self.clone()
        }
    }

    /// Polar nodes actually used: radial mode has to resolve the laser phase
    /// `kℓ cos ϑ` (up to four times over), so it needs about `2kℓ` nodes.
    fn polar_nodes(&self) -> usize {
        match self.mode {
            AverageMode::Phase => self.angular_nodes,
            AverageMode::Radial => self.angular_nodes + (2.0 * self.kl).ceil() as usize,
        }
    }
}

/// One orientation with its quadrature weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularNode {
    pub n_hat: [f64; 3],
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

fn frame(axis: [f64; 3]) -> [[f64; 3]; 2] {
    let helper = if axis[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = normalize(cross(helper, axis));
    [e1, cross(axis, e1)]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    a.map(|x| x / n)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Isotropic orientation nodes with weights summing to 1, using `polar`
/// Gauss-Legendre nodes in the cosine of the angle to `axis` and `azimuthal`
/// uniform nodes around it.
pub fn angular_nodes(polar: usize, azimuthal: usize, axis: [f64; 3]) -> Vec<AngularNode> {
    let axis = normalize(axis);
    let [e1, e2] = frame(axis);
    let mut nodes = Vec::with_capacity(polar * azimuthal);
    for (c, w) in gauss_legendre(polar) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..azimuthal {
            let (sp, cp) = (2.0 * PI * j as f64 / azimuthal as f64).sin_cos();
            let n: [f64; 3] = std::array::from_fn(|i| s * cp * e1[i] + s * sp * e2[i] + c * axis[i]);
            nodes.push(AngularNode {
                n_hat: n,
                theta: n[2].clamp(-1.0, 1.0).acos(),
                phi: n[1].atan2(n[0]),
                weight: w / (2.0 * azimuthal as f64),
            });
        }
    }
    nodes
}

fn radial_window(cfg: &AverageConfig, nodes: usize) -> Vec<(f64, f64)> {
    gauss_legendre(nodes)
        .into_iter()
        .map(|(x, w)| (cfg.kl + 2.0 * PI * x, w / 2.0))
        .collect()
}

fn single_average<F>(f: &F, cfg: &AverageConfig) -> Result<(f64, f64), AverageError>
where
    F: Fn(&PairGeometry) -> f64 + Sync,
{
    let nodes = angular_nodes(cfg.polar_nodes(), cfg.angular_nodes, [0.0, 0.0, 1.0]);
    let gt = mean_coupling_sqr(cfg.kl).sqrt();
    let inner: Vec<(f64, f64)> = match cfg.mode {
        AverageMode::Phase => (0..cfg.phase_nodes)
            .map(|j| (2.0 * PI * j as f64 / cfg.phase_nodes as f64, 1.0 / cfg.phase_nodes as f64))
            .collect(),
        AverageMode::Radial => radial_window(cfg, cfg.radial_nodes),
    };
    let parts: Vec<Result<(f64, f64), AverageError>> = nodes
        .par_iter()
        .map(|node| {
            let mut acc = (0.0, 0.0);
            for &(x, w) in &inner {
                let geom = match cfg.mode {
                    AverageMode::Phase => PairGeometry::new(node.theta, node.phi, cfg.kl)
                        .map(|g| g.with_coupling(C64::new(0.0, gt) * C64::from_polar(1.0, x))),
                    AverageMode::Radial => PairGeometry::new(node.theta, node.phi, x),
                }
                .map_err(|e| AverageError::Config(e.to_string()))?;
                let v = f(&geom);
                acc.0 += w * v;
                acc.1 += w * v.abs();
            }
            Ok((acc.0 * node.weight, acc.1 * node.weight))
        })
        .collect();
    let mut total = (0.0, 0.0);
    for p in parts {
        let (v, a) = p?;
        total.0 += v;
        total.1 += a;
    }
    Ok(total)
}

/// Normalized configuration average of `f`, checked against a run at double
/// resolution. In phase mode the pair sits at `r₁₂ = ℓ` and the coupling is
/// `|g̃| i e^{iχ}` with `χ` uniform over one period.
pub fn configuration_average<F>(f: F, cfg: &AverageConfig) -> Result<f64, AverageError>
where
    F: Fn(&PairGeometry) -> f64 + Sync,
{
    cfg.validate()?;
    let (coarse, scale) = single_average(&f, cfg)?;
    let (fine, _) = single_average(&f, &cfg.doubled())?;
    if (coarse - fine).abs() > cfg.tolerance * coarse.abs().max(fine.abs()) + 1e-12 * scale {
        return Err(AverageError::NonConvergence { quantity: "configuration average", coarse, fine });
    }
    Ok(fine)
}

/// Averaged observables of one channel at one drive. Double-scattering
/// intensities are in units of `|g̃|²`; `l1` and `l1_el` are single-atom
/// units.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelObservables {
    pub channel: Channel,
    pub s: f64,
    pub delta: f64,
    pub rabi: f64,
    pub l1: f64,
    pub l1_el: f64,
    pub l2_tot: f64,
    pub l2_el: f64,
    pub thetas: Vec<f64>,
    pub c2_tot: Vec<f64>,
    pub c2_el: Vec<f64>,
    /// Crossed terms at exact backscattering, used for the enhancement.
    pub c2_tot0: f64,
    pub c2_el0: f64,
    pub alpha_tot: f64,
    pub alpha_el: f64,
    pub mode: AverageMode,
    pub kl: f64,
}

/// `[ladder, el_ladder, crossed(θ)…, el_crossed(θ)…]`.
fn averaged_values(forms: &ChannelForms, channel: Channel, cfg: &AverageConfig, thetas: &[f64]) -> Vec<f64> {
    let incident = channel.incident();
    let kl_dir = incident.laser_direction();
    let nodes = angular_nodes(cfg.polar_nodes(), cfg.angular_nodes, kl_dir);
    let kappa_dirs: Vec<[f64; 3]> = thetas
        .iter()
        .map(|&t| {
            let k = incident.detection_direction(t);
            std::array::from_fn(|i| k[i] + kl_dir[i])
        })
        .collect();
    let nt = thetas.len();
    match cfg.mode {
        AverageMode::Phase => {
            let mut plain = [[ZERO; 9]; 9];
            let mut detected = vec![[[ZERO; 9]; 9]; nt];
            for node in &nodes {
                let d = delta_flat(node.n_hat);
                let phases: Vec<C64> = kappa_dirs
                    .iter()
                    .map(|q| C64::from_polar(node.weight, cfg.kl * dot(*q, node.n_hat)))
                    .collect();
                for i in 0..9 {
                    for j in 0..9 {
                        let dd = d[i] * d[j];
                        if dd == 0.0 {
                            continue;
                        }
                        plain[i][j] += node.weight * dd;
                        for (m, p) in detected.iter_mut().zip(&phases) {
                            m[i][j] += p * dd;
                        }
                    }
                }
            }
            let mut out = vec![forms.ladder.phase_average(&plain), forms.elastic_ladder.phase_average(&plain)];
            out.extend(detected.iter().map(|m| forms.crossed.phase_average(m)));
            out.extend(detected.iter().map(|m| forms.elastic_crossed.phase_average(m)));
            out
        }
        AverageMode::Radial => {
            let radial: Vec<(f64, f64, C64)> = radial_window(cfg, cfg.radial_nodes)
                .into_iter()
                .map(|(r, w)| (r, w, coupling_constant(1.0, r).expect("window is positive")))
                .collect();
            let unit = mean_coupling_sqr(cfg.kl);
            let per_node: Vec<Vec<f64>> = nodes
                .par_iter()
                .map(|node| {
                    let delta = delta_matrix(node.n_hat);
                    let c = |f: &HarmonicForm| f.contract(&delta);
                    let (lad, el_lad, cr, el_cr) =
                        (c(&forms.ladder), c(&forms.elastic_ladder), c(&forms.crossed), c(&forms.elastic_crossed));
                    let cl = dot(kl_dir, node.n_hat);
                    let mut acc = vec![0.0; 2 + 2 * nt];
                    for &(r, w, g) in &radial {
                        let psi = r * cl;
                        let w = w * node.weight / unit;
                        acc[0] += w * forms.ladder.combine(&lad, g, psi, 0.0);
                        acc[1] += w * forms.elastic_ladder.combine(&el_lad, g, psi, 0.0);
                        for (t, q) in kappa_dirs.iter().enumerate() {
                            let kappa = r * dot(*q, node.n_hat);
                            acc[2 + t] += w * forms.crossed.combine(&cr, g, psi, kappa);
                            acc[2 + nt + t] += w * forms.elastic_crossed.combine(&el_cr, g, psi, kappa);
                        }
                    }
                    acc
                })
                .collect();
            per_node.into_iter().fold(vec![0.0; 2 + 2 * nt], |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                acc
            })
        }
    }
}

fn delta_matrix(n: [f64; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|a| std::array::from_fn(|b| f64::from(u8::from(a == b)) - n[a] * n[b]))
}

fn delta_flat(n: [f64; 3]) -> [f64; 9] {
    let d = delta_matrix(n);
    std::array::from_fn(|i| d[i / 3][i % 3])
}

/// Full averaged pipeline for one channel at one drive: the response engine
/// in the gauge frame, then the configuration average at base and doubled
/// resolution.
pub fn averaged_channel(channel: Channel, drive: &DriveParams, cfg: &AverageConfig) -> Result<ChannelObservables, AverageError> {
    averaged_with_engine(&ResponseEngine::new(channel, drive)?, cfg)
}

/// As [`averaged_channel`] with a caller-supplied engine (for example one
/// carrying the asymmetry test hook).
pub fn averaged_with_engine(engine: &ResponseEngine, cfg: &AverageConfig) -> Result<ChannelObservables, AverageError> {
    cfg.validate()?;
    let channel = engine.channel;
    let forms = engine.forms();
    let mut thetas = vec![0.0];
    thetas.extend_from_slice(&cfg.thetas);
    let coarse = averaged_values(&forms, channel, cfg, &thetas);
    let fine = averaged_values(&forms, channel, &cfg.doubled(), &thetas);
    let reference = fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        if (a - b).abs() > cfg.tolerance * (a.abs().max(b.abs()) + 1e-6 * reference) + 1e-30 {
            let quantity = match i {
                0 => "ladder",
                1 => "elastic ladder",
                i if i < 2 + thetas.len() => "crossed",
                _ => "elastic crossed",
            };
            return Err(AverageError::NonConvergence { quantity, coarse: *a, fine: *b });
        }
    }
    let nt = thetas.len();
    let mut fine = fine;
    let (mut l1, mut l1_el) = if channel.is_parallel() {
        (forms.single_scatter, forms.elastic_single_scatter)
    } else {
        (0.0, 0.0)
    };
    // without a drive nothing is scattered; report exact zeros rather than
    // rounding residue
    if engine.drive.rabi == ZERO {
        fine.iter_mut().for_each(|v| *v = 0.0);
        (l1, l1_el) = (0.0, 0.0);
    }
    let (l2_tot, l2_el) = (fine[0], fine[1]);
    let c2_tot: Vec<f64> = fine[2..2 + nt].to_vec();
    let c2_el: Vec<f64> = fine[2 + nt..].to_vec();
    Ok(ChannelObservables {
        channel,
        s: engine.drive.saturation(),
        delta: engine.drive.detuning,
        rabi: engine.drive.rabi.norm(),
        l1,
        l1_el,
        l2_tot,
        l2_el,
        thetas: cfg.thetas.clone(),
        c2_tot0: c2_tot[0],
        c2_el0: c2_el[0],
        alpha_tot: enhancement_factor(channel, c2_tot[0], l2_tot, l1, cfg.kl),
        alpha_el: enhancement_factor(channel, c2_el[0], l2_el, l1_el, cfg.kl),
        c2_tot: c2_tot[1..].to_vec(),
        c2_el: c2_el[1..].to_vec(),
        mode: cfg.mode,
        kl: cfg.kl,
    })
}

/// Enhancement factor of the total intensity. `s = 0` is evaluated at
/// `s = 1e−9`, where every intensity vanishes but the ratio is finite.
pub fn enhancement(channel: Channel, s: f64, delta: f64, cfg: &AverageConfig) -> Result<f64, AverageError> {
    let s = if s == 0.0 { 1e-9 } else { s };
    let drive = DriveParams::from_saturation(s, delta, channel.incident());
    let cfg = AverageConfig { thetas: Vec::new(), ..cfg.clone() };
    Ok(averaged_channel(channel, &drive, &cfg)?.alpha_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_channel, hparh_alpha};
    use crate::geometry::Spherical;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn nodes_are_normalized_and_isotropic() {
        for axis in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.3, -0.2, 0.9]] {
            let nodes = angular_nodes(16, 16, axis);
            let w: f64 = nodes.iter().map(|n| n.weight).sum();
            assert!((w - 1.0).abs() < 1e-14);
            for i in 0..3 {
                let m: f64 = nodes.iter().map(|n| n.weight * n.n_hat[i] * n.n_hat[i]).sum();
                assert!((m - 1.0 / 3.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projector_weights() {
        use Spherical::*;
        let cfg = AverageConfig::default();
        for (q, qp, want) in [(Plus, Plus, 2.0 / 15.0), (Plus, Minus, 7.0 / 15.0), (Plus, Zero, 1.0 / 15.0), (Zero, Zero, 8.0 / 15.0)] {
            let got = configuration_average(|g| g.projector().component(q, qp).norm_sqr(), &cfg).unwrap();
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((configuration_average(|_| 3.5, &cfg).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn fast_phase_terms_average_out() {
        let cfg = AverageConfig::default();
        let unit = mean_coupling_sqr(cfg.kl);
        let phase = configuration_average(|g| (g.g * g.g).re, &cfg).unwrap();
        assert!(phase.abs() < 1e-15 * unit);
        let radial = AverageConfig { mode: AverageMode::Radial, angular_nodes: 4, ..cfg };
        let v = configuration_average(|g| (g.g * g.g).re, &radial).unwrap();
        assert!(v.abs() <= 1e-3 * unit, "{}", v / unit);
    }

    #[test]
    fn hparh_matches_closed_form() {
        let cfg = AverageConfig::default();
        for s in [0.05, 1.0, 30.0] {
            let drive = DriveParams::from_saturation(s, 0.0, Channel::HparH.incident());
            let avg = averaged_channel(Channel::HparH, &drive, &cfg).unwrap();
            let want = analytic_channel(Channel::HparH, s, 0.0, 0.0, cfg.kl).unwrap();
            assert!(rel(avg.l2_tot, want.l2_tot) < 1e-8);
            assert!(rel(avg.c2_tot0, want.c2_tot) < 1e-8);
            assert!(rel(avg.l2_el, want.l2_el) < 1e-8);
            assert!(rel(avg.alpha_tot, hparh_alpha(s)) < 1e-8);
        }
    }

    #[test]
    fn parallel_channels_match_closed_form() {
        let cfg = AverageConfig::default();
        for channel in [Channel::HperpH, Channel::LinParLin, Channel::ScalarTwoLevel, Channel::LinPerpLin] {
            for s in [0.2, 3.0] {
                let drive = DriveParams::from_saturation(s, 0.0, channel.incident());
                let avg = averaged_channel(channel, &drive, &cfg).unwrap();
                let want = analytic_channel(channel, s, 0.0, 0.0, cfg.kl).unwrap();
                for (got, want, what) in [
                    (avg.l2_tot, want.l2_tot, "L2"),
                    (avg.c2_tot0, want.c2_tot, "C2"),
                    (avg.l2_el, want.l2_el, "L2 el"),
                    (avg.c2_el0, want.c2_el, "C2 el"),
                    (avg.l1, want.l1, "L1"),
                    (avg.l1_el, want.l1_el, "L1 el"),
                ] {
                    assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-12), "{channel} s={s} {what}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn radial_agrees_with_phase_to_order_inverse_kl() {
        let kl = 100.0;
        let phase = AverageConfig { kl, ..Default::default() };
        let radial = AverageConfig { mode: AverageMode::Radial, angular_nodes: 32, radial_nodes: 48, tolerance: 1e-4, ..phase.clone() };
        let drive = DriveParams::from_saturation(1.0, 0.0, Channel::HparH.incident());
        let a = averaged_channel(Channel::HparH, &drive, &phase).unwrap();
        let b = averaged_channel(Channel::HparH, &drive, &radial).unwrap();
        assert!(rel(b.l2_tot, a.l2_tot) < 5.0 / kl, "{} vs {}", b.l2_tot, a.l2_tot);
        assert!(rel(b.c2_tot0, a.c2_tot0) < 5.0 / kl, "{} vs {}", b.c2_tot0, a.c2_tot0);
    }

    #[test]
    fn zero_drive_gives_no_light() {
        let drive = DriveParams::from_saturation(0.0, 0.0, Channel::HperpH.incident());
        let avg = averaged_channel(Channel::HperpH, &drive, &AverageConfig::default()).unwrap();
        for v in [avg.l1, avg.l2_tot, avg.c2_tot0, avg.l2_el, avg.c2_el0] {
            assert_eq!(v, 0.0);
        }
        assert!(avg.alpha_tot.is_nan() && avg.alpha_el.is_nan());
        let a = enhancement(Channel::HparH, 0.0, 0.0, &AverageConfig::default()).unwrap();
        assert!((a - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = AverageConfig { kl: 3.0, ..Default::default() };
        assert!(matches!(configuration_average(|_| 1.0, &cfg), Err(AverageError::Config(_))));
    }
}
