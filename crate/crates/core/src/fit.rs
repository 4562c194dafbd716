//! Small fitting and search helpers used by the verification checks.

use nalgebra::{DMatrix, DVector};

/// Least-squares coefficients of `y ≈ Σ c_k x^{p_k}` for the given powers.
/// Returns `None` when the design matrix is rank deficient.
pub fn polyfit(xs: &[f64], ys: &[f64], powers: &[i32]) -> Option<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() < powers.len() {
        return None;
    }
    let a = DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= smax * 1e-14) {
        return None;
    }
    svd.solve(&b, 0.0).ok().map(|c| c.iter().copied().collect())
}

/// Slope of `ln|y|` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    polyfit(&lx, &ly, &[0, 1]).map(|c| c[1])
}

/// `n` points spaced evenly in `log10` between `lo` and `hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// Maximum of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial() {
        let xs = logspace(1e-3, 1e-1, 25);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 5.0 * x * x + 7.0 * x.powi(3)).collect();
        let c = polyfit(&xs, &ys, &[1, 2, 3, 4, 5]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-9 && (c[1] + 5.0).abs() < 1e-7);
        assert!(polyfit(&[1.0, 1.0], &[1.0, 2.0], &[0, 1]).is_none());
    }

    #[test]
    fn slope_and_search() {
        let xs = logspace(1e2, 1e4, 21);
        let ys: Vec<f64> = xs.iter().map(|x| -3.0 / (x * x)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-12);
        let m = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((m - 0.3).abs() < 1e-9);
        assert_eq!(logspace(2.0, 5.0, 1), vec![2.0]);
    }
}
