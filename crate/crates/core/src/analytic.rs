//! Closed-form configuration-averaged intensities at zero detuning.
//!
//! All double-scattering intensities are in units of `|g̃|²`, the squared
//! coupling at the mean interatomic distance. Single-scattering `L₁` is in
//! absolute units (the same prefactor as a single atom's `s/(1+s)`).

use thiserror::Error;

use crate::channels::Channel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("no closed form for channel {channel} at detuning {delta} and angle {theta}")]
    Unsupported { channel: Channel, delta: f64, theta: f64 },
    #[error("saturation must be finite and non-negative, got {0}")]
    Saturation(f64),
}

/// `Σ c_k s^k` with integer coefficients.
fn poly(coeffs: &[i64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c as f64)
}

const R1: [i64; 6] = [0, 6912, 3168, 264, 20, 1];
const R2: [i64; 5] = [0, 1152, 528, 132, 7];
const F1: [i64; 6] = [0, 36, 3, -27, -19, -1];
const F2: [i64; 4] = [288, 132, 23, 1];
const F3: [i64; 8] = [0, 324, 540, 450, 219, 85, 29, 1];
const F4: [i64; 6] = [0, 0, -36, -39, -14, 1];
const F5: [i64; 7] = [0, 0, -72, -51, -1, 3, 1];

/// The rational functions of the saturation parameter that appear in the
/// averaged intensities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polynomials {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
}

pub fn eval_polynomials(s: f64) -> Polynomials {
    let u = 1.0 + s;
    let p = u * u * (12.0 + s) * (32.0 + 20.0 * s + s * s);
    Polynomials {
        r1: 2.0 / 9.0 * poly(&R1, s),
        r2: poly(&R2, s) / 3.0,
        p,
        f1: poly(&F1, s) / (12.0 * u.powi(5) * (3.0 + s)),
        f2: -4.0 * s * s * poly(&F2, s) / (3.0 * u * p),
        f3: poly(&F3, s) / (36.0 * u.powi(6) * (3.0 + s).powi(2)),
        f4: poly(&F4, s) / (3.0 * u.powi(6) * (3.0 + s)),
        f5: poly(&F5, s) / (12.0 * u.powi(6) * (3.0 + s)),
    }
}

/// Averaged observables for one channel, mirroring the numeric pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticChannel {
    pub l1: f64,
    pub l2_tot: f64,
    pub c2_tot: f64,
    pub l1_el: f64,
    pub l2_el: f64,
    pub c2_el: f64,
    pub alpha_tot: f64,
    pub alpha_el: f64,
}

/// `|g̃|² = (3/2kℓ)²`.
pub fn mean_coupling_sqr(kl: f64) -> f64 {
    (1.5 / kl).powi(2)
}

/// Enhancement factor: `1 + C/L` in orthogonal channels, with the
/// single-scattering background (converted to `|g̃|²` units) added to the
/// denominator in parallel channels.
pub fn enhancement_factor(channel: Channel, crossed: f64, ladder: f64, single: f64, kl: f64) -> f64 {
    let background = if channel.is_parallel() { single / mean_coupling_sqr(kl) } else { 0.0 };
    let denom = ladder + background;
    if denom == 0.0 {
        f64::NAN
    } else {
        1.0 + crossed / denom
    }
}

/// HparH elastic ladder, equal to the elastic crossed term at any detuning.
pub fn hparh_elastic(s: f64, delta: f64) -> f64 {
    2.0 / 15.0 * s / ((1.0 + delta * delta) * (1.0 + s).powi(4))
}

/// HparH enhancement `1 + R₁/((4+s)R₂)`.
pub fn hparh_alpha(s: f64) -> f64 {
    let p = eval_polynomials(s);
    1.0 + p.r1 / ((4.0 + s) * p.r2)
}

/// Closed-form averaged observables. `theta` enters only through the
/// quadratic small-angle factor of the HparH and LinPerpLin crossed terms;
/// other channels and nonzero detuning (apart from HparH elastic) are
/// rejected.
pub fn analytic_channel(channel: Channel, s: f64, delta: f64, theta: f64, kl: f64) -> Result<AnalyticChannel, AnalyticError> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(AnalyticError::Saturation(s));
    }
    let unsupported = AnalyticError::Unsupported { channel, delta, theta };
    let orthogonal = matches!(channel, Channel::HparH | Channel::LinPerpLin);
    if (delta != 0.0 && channel != Channel::HparH) || (theta != 0.0 && !orthogonal) {
        return Err(unsupported);
    }
    let p = eval_polynomials(s);
    let u = 1.0 + s;
    let (l1, l1_el) = if channel.is_parallel() { (s / u, s / (u * u)) } else { (0.0, 0.0) };
    let (l2_tot, c2_tot, l2_el, c2_el) = match channel {
        Channel::HparH | Channel::LinPerpLin => {
            let x = kl * theta;
            let scale = if channel == Channel::HparH { 1.0 } else { 0.5 };
            let el = hparh_elastic(s, delta) * scale;
            let l = 2.0 * p.r2 / (15.0 * p.p) * scale;
            let c = p.r1 / ((4.0 + s) * p.p) * (2.0 / 15.0 - x * x / 35.0) * scale;
            if delta != 0.0 {
                (f64::NAN, f64::NAN, el, el)
            } else {
                (l, c, el, el)
            }
        }
        _ => {
            let (w1, w2) = match channel {
                Channel::HperpH => (7.0 / 15.0, 3.0 / 15.0),
                Channel::LinParLin => (8.0 / 15.0, 2.0 / 15.0),
                _ => (7.0 / 15.0, 0.0),
            };
            (
                w1 * p.f1 + w2 * p.f2,
                w1 * p.f3,
                w1 * ((s + s.powi(3)) / u.powi(6) + p.f4) + w2 * 2.0 * p.f2 / u,
                w1 * (s / u.powi(6) + p.f5),
            )
        }
    };
    Ok(AnalyticChannel {
        l1,
        l2_tot,
        c2_tot,
        l1_el,
        l2_el,
        c2_el,
        alpha_tot: enhancement_factor(channel, c2_tot, l2_tot, l1, kl),
        alpha_el: enhancement_factor(channel, c2_el, l2_el, l1_el, kl),
    })
}

/// Small-s coefficients: an intensity `∝ s − a s² + …` is listed as `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expansion {
    pub label: &'static str,
    pub channel: Channel,
    pub elastic: bool,
    pub crossed: f64,
    pub ladder: f64,
}

pub fn analytic_expansions() -> [Expansion; 3] {
    [
        Expansion { label: "hparh total", channel: Channel::HparH, elastic: false, crossed: 2.5, ladder: 2.25 },
        Expansion { label: "scalar total", channel: Channel::ScalarTwoLevel, elastic: false, crossed: 5.0, ladder: 5.25 },
        Expansion { label: "scalar elastic", channel: Channel::ScalarTwoLevel, elastic: true, crossed: 8.0, ladder: 10.0 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // independently expanded copies for a transcription checksum
    fn p_expanded(s: f64) -> f64 {
        384.0 + 1040.0 * s + 960.0 * s.powi(2) + 337.0 * s.powi(3) + 34.0 * s.powi(4) + s.powi(5)
    }

    #[test]
    fn checksum_at_rational_points() {
        for s in [1.0 / 3.0, 5.0 / 7.0, 11.0 / 2.0] {
            let p = eval_polynomials(s);
            assert!((p.p / p_expanded(s) - 1.0).abs() < 1e-14);
            let r1 = (13824.0 * s + 6336.0 * s * s + 528.0 * s.powi(3) + 40.0 * s.powi(4) + 2.0 * s.powi(5)) / 9.0;
            assert!((p.r1 / r1 - 1.0).abs() < 1e-14);
            let r2 = 384.0 * s + 176.0 * s * s + 44.0 * s.powi(3) + 7.0 / 3.0 * s.powi(4);
            assert!((p.r2 / r2 - 1.0).abs() < 1e-14);
            let f2 = -4.0 * s * s * (288.0 + 132.0 * s + 23.0 * s * s + s.powi(3)) / (3.0 * (1.0 + s) * p_expanded(s));
            assert!((p.f2 / f2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_limits() {
        assert_eq!(eval_polynomials(0.0).p, 384.0);
        let s = 1e-6;
        assert!((eval_polynomials(s).f2 / (s * s) + 1.0).abs() < 1e-5);
        let s = 1e8;
        assert!((eval_polynomials(s).r1 / s.powi(5) - 2.0 / 9.0).abs() < 1e-6);
        for s in [0.01, 1.0, 100.0] {
            assert!(eval_polynomials(s).f2 < 0.0);
        }
    }

    #[test]
    fn hparh_limits() {
        assert!((hparh_alpha(1e-9) - 2.0).abs() < 1e-8);
        assert!((hparh_alpha(1e9) - 23.0 / 21.0).abs() < 1e-7);
        let s = 1e-5;
        assert!(((hparh_alpha(s) - 2.0) / s + 0.25).abs() < 1e-3);
        // decreasing up to s ≈ 117, then a shallow rise of ~1e-3 back to 23/21
        let mut prev = f64::INFINITY;
        for i in 0..=300 {
            let s = 10f64.powf(-4.0 + 6.0 * i as f64 / 300.0);
            let a = hparh_alpha(s);
            assert!(a < prev);
            prev = a;
        }
        for i in 0..=100 {
            let s = 100.0 * 10f64.powf(i as f64 / 100.0);
            assert!((hparh_alpha(s) - 23.0 / 21.0).abs() < 1.2e-3);
        }
        let a = analytic_channel(Channel::HparH, 1e-7, 0.0, 0.0, 1e3).unwrap();
        assert!((a.c2_tot / 1e-7 - 2.0 / 15.0).abs() < 1e-6);
        assert!((a.l2_tot / 1e-7 - 2.0 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn elastic_maximum_location() {
        let f = |s: f64| hparh_elastic(s, 0.0);
        let third = 1.0 / 3.0;
        assert!(f(third) > f(third - 1e-4) && f(third) > f(third + 1e-4));
    }

    #[test]
    fn unsupported_combinations() {
        assert!(analytic_channel(Channel::HperpH, 1.0, 2.0, 0.0, 1e3).is_err());
        assert!(analytic_channel(Channel::LinParLin, 1.0, 0.0, 1e-4, 1e3).is_err());
        assert!(analytic_channel(Channel::HparH, -1.0, 0.0, 0.0, 1e3).is_err());
        let a = analytic_channel(Channel::HparH, 1.0, 2.0, 0.0, 1e3).unwrap();
        assert!(a.l2_tot.is_nan());
        assert_eq!(a.l2_el, a.c2_el);
    }

    #[test]
    fn parallel_weights() {
        let s = 0.7;
        let p = eval_polynomials(s);
        let lin = analytic_channel(Channel::LinParLin, s, 0.0, 0.0, 1e3).unwrap();
        assert!((lin.l2_tot - (8.0 * p.f1 + 2.0 * p.f2) / 15.0).abs() < 1e-15);
        assert!((lin.c2_tot - 8.0 / 15.0 * p.f3).abs() < 1e-15);
        let sc = analytic_channel(Channel::ScalarTwoLevel, s, 0.0, 0.0, 1e3).unwrap();
        assert!((sc.l2_tot - 7.0 / 15.0 * p.f1).abs() < 1e-15);
        assert!((sc.l1 - s / (1.0 + s)).abs() < 1e-15);
    }
}
