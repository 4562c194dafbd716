//! Verification suite: the numeric pipeline against closed forms and
//! qualitative features, one check per property.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{analytic_channel, analytic_expansions, eval_polynomials, hparh_alpha, hparh_elastic};
use crate::average::{averaged_with_engine, configuration_average, AverageConfig, ChannelObservables};
use crate::channels::{total_intensity_terms, Channel};
use crate::fit::{golden_max, logspace, loglog_slope, polyfit};
use crate::geometry::{PairGeometry, Spherical, C64};
use crate::liouvillian::{build_pair_system, DriveParams};
use crate::response::ResponseEngine;
use crate::solver::{full_steady_state, perturbative_orders};

/// Options shared by all checks.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub average: AverageConfig,
    /// Relative imbalance applied to one direction of photon exchange in the
    /// averaged pipeline. Nonzero values must make the reciprocity check
    /// fail.
    pub asymmetry: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { average: AverageConfig::default(), asymmetry: 0.0, seed: 7 }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl CheckReport {
    /// `PASS 3 enhancement-limits: …`
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {:>2} {}: {}", self.id, self.name, self.summary)
    }
}

type CheckFn = fn(&VerifyOptions, &mut Tally) -> Result<(), String>;

pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    run: CheckFn,
}

impl Check {
    /// Selected by number, name or tag.
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim().to_ascii_lowercase();
        f == self.id.to_string() || f == self.name || self.tags.contains(&f.as_str())
    }

    pub fn run(&self, opts: &VerifyOptions) -> CheckReport {
        let mut tally = Tally::default();
        let outcome = (self.run)(opts, &mut tally);
        let (passed, summary) = match outcome {
            Err(e) => (false, format!("error: {e}")),
            Ok(()) => {
                let failed = tally.failures();
                let summary = if failed == 0 {
                    format!("{} comparisons ok", tally.count)
                } else {
                    format!("{failed} of {} comparisons failed", tally.count)
                };
                (failed == 0, summary)
            }
        };
        CheckReport { id: self.id, name: self.name, passed, summary, details: tally.lines }
    }
}

/// Comparison log for one check.
#[derive(Default)]
struct Tally {
    lines: Vec<String>,
    count: usize,
    failed: usize,
}

impl Tally {
    fn failures(&self) -> usize {
        self.failed
    }

    fn record(&mut self, ok: bool, text: String) {
        self.count += 1;
        if !ok {
            self.failed += 1;
        }
        self.lines.push(format!("{} {text}", if ok { "ok  " } else { "FAIL" }));
    }

    fn rel(&mut self, label: impl AsRef<str>, got: f64, want: f64, tol: f64) {
        let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        self.record(err <= tol, format!("{}: {got:.12e} vs {want:.12e} (rel {err:.2e}, tol {tol:.0e})", label.as_ref()));
    }

    fn abs(&mut self, label: impl AsRef<str>, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.record(err <= tol, format!("{}: {got:.12e} vs {want:.12e} (abs {err:.2e}, tol {tol:.0e})", label.as_ref()));
    }

    fn holds(&mut self, label: impl AsRef<str>, ok: bool, detail: impl AsRef<str>) {
        self.record(ok, format!("{}: {}", label.as_ref(), detail.as_ref()));
    }
}

fn average(channel: Channel, s: f64, delta: f64, opts: &VerifyOptions) -> Result<ChannelObservables, String> {
    average_drive(channel, &DriveParams::from_saturation(s, delta, channel.incident()), opts, &opts.average)
}

fn average_drive(channel: Channel, drive: &DriveParams, opts: &VerifyOptions, cfg: &AverageConfig) -> Result<ChannelObservables, String> {
    let engine = ResponseEngine::new(channel, drive).map_err(|e| e.to_string())?;
    let engine = if opts.asymmetry != 0.0 { engine.with_asymmetry(opts.asymmetry) } else { engine };
    averaged_with_engine(&engine, cfg).map_err(|e| e.to_string())
}

fn par_map<T: Sync, U: Send>(xs: &[T], f: impl Fn(&T) -> Result<U, String> + Sync + Send) -> Result<Vec<U>, String> {
    xs.par_iter().map(f).collect()
}

fn fixed_geometry(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..20 {
        let cos: f64 = rng.random_range(-0.9..0.9);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let r: f64 = rng.random_range(3.0..60.0);
        let geom = PairGeometry::new(cos.acos(), phi, r).map_err(|e| e.to_string())?;
        let w = geom.g.norm_sqr() * geom.projector().component(Spherical::Plus, Spherical::Plus).norm_sqr();
        for s in [0.1, 1.0, 10.0] {
            let drive = DriveParams::from_saturation(s, 0.0, Channel::HparH.incident());
            let sys = build_pair_system(&drive, &geom, Channel::HparH.dipole_model());
            let orders = perturbative_orders(&sys, 2).map_err(|e| e.to_string())?;
            let terms = total_intensity_terms(Channel::HparH, &orders, 0.0).map_err(|e| e.to_string())?;
            let p = eval_polynomials(s);
            t.rel(format!("geometry {i} s={s} populations"), terms.ladder, w * p.r2 / p.p, 1e-10);
            t.rel(format!("geometry {i} s={s} coherences"), terms.crossed, w * p.r1 / ((4.0 + s) * p.p), 1e-10);
        }
    }
    Ok(())
}

fn hparh_average(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let ss = [0.01, 0.1, 0.7, 1.0, 10.0, 100.0];
    let avg = par_map(&ss, |&s| average(Channel::HparH, s, 0.0, opts))?;
    for (s, a) in ss.iter().zip(&avg) {
        let want = analytic_channel(Channel::HparH, *s, 0.0, 0.0, opts.average.kl).map_err(|e| e.to_string())?;
        t.rel(format!("s={s} L2_tot"), a.l2_tot, want.l2_tot, 1e-6);
        t.rel(format!("s={s} C2_tot(0)"), a.c2_tot0, want.c2_tot, 1e-6);
    }
    Ok(())
}

fn enhancement_limits(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let ss = [1e-4, 1e3, 0.1, 1.0, 10.0];
    let avg = par_map(&ss, |&s| average(Channel::HparH, s, 0.0, opts))?;
    t.abs("alpha(1e-4)", avg[0].alpha_tot, 2.0, 1e-3);
    t.abs("alpha(1e3)", avg[1].alpha_tot, 23.0 / 21.0, 1e-3);
    for (s, a) in ss.iter().zip(&avg).skip(2) {
        t.abs(format!("alpha({s})"), a.alpha_tot, hparh_alpha(*s), 1e-6);
    }
    Ok(())
}

fn small_s(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let ss = logspace(1e-3, 1e-1, 25);
    for exp in analytic_expansions() {
        let avg = par_map(&ss, |&s| average(exp.channel, s, 0.0, opts))?;
        let (c, l): (Vec<f64>, Vec<f64>) = if exp.elastic {
            avg.iter().map(|a| (a.c2_el0, a.l2_el)).unzip()
        } else {
            avg.iter().map(|a| (a.c2_tot0, a.l2_tot)).unzip()
        };
        for (what, ys, want) in [("crossed", c, exp.crossed), ("ladder", l, exp.ladder)] {
            let fit = polyfit(&ss, &ys, &[1, 2, 3, 4, 5]).ok_or("singular small-s fit")?;
            t.rel(format!("{} {what} s^2 coefficient", exp.label), -fit[1] / fit[0], want, 1e-2);
        }
    }
    Ok(())
}

fn reciprocity(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut points: Vec<(f64, f64)> = (0..10)
        .map(|_| (10f64.powf(rng.random_range(-2.0..2.0)), rng.random_range(-10.0..10.0)))
        .collect();
    points[0].1 = 0.0;
    let avg = par_map(&points, |&(s, d)| average(Channel::HparH, s, d, opts))?;
    for ((s, d), a) in points.iter().zip(&avg) {
        let label = format!("s={s:.4} delta={d:.3}");
        t.rel(format!("{label} L2_el = C2_el(0)"), a.c2_el0, a.l2_el, 1e-12);
        let want = hparh_elastic(*s, *d);
        t.rel(format!("{label} L2_el closed form"), a.l2_el, want, 1e-6);
        t.rel(format!("{label} C2_el closed form"), a.c2_el0, want, 1e-6);
    }
    Ok(())
}

fn channel_relations(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let ss = [0.1, 0.5, 2.0, 10.0];
    let hpar = par_map(&ss, |&s| average(Channel::HparH, s, 0.0, opts))?;
    let lperp = par_map(&ss, |&s| average(Channel::LinPerpLin, s, 0.0, opts))?;
    for ((s, h), l) in ss.iter().zip(&hpar).zip(&lperp) {
        t.rel(format!("linperplin s={s} L2_tot = hparh/2"), l.l2_tot, 0.5 * h.l2_tot, 1e-10);
        t.rel(format!("linperplin s={s} C2_tot = hparh/2"), l.c2_tot0, 0.5 * h.c2_tot0, 1e-10);
    }
    for channel in [Channel::LinParLin, Channel::HperpH] {
        let avg = par_map(&ss, |&s| average(channel, s, 0.0, opts))?;
        for (s, a) in ss.iter().zip(&avg) {
            let want = analytic_channel(channel, *s, 0.0, 0.0, opts.average.kl).map_err(|e| e.to_string())?;
            t.rel(format!("{channel} s={s} L2_tot"), a.l2_tot, want.l2_tot, 1e-6);
            t.rel(format!("{channel} s={s} C2_tot"), a.c2_tot0, want.c2_tot, 1e-6);
            t.rel(format!("{channel} s={s} L2_el"), a.l2_el, want.l2_el, 1e-6);
            t.rel(format!("{channel} s={s} C2_el"), a.c2_el0, want.c2_el, 1e-6);
        }
    }
    Ok(())
}

/// Indices where `ys < threshold`, as a single contiguous run strictly inside
/// the grid.
fn interior_run(ys: &[f64], threshold: f64) -> Option<(usize, usize)> {
    let below: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] < threshold).collect();
    let (&first, &last) = (below.first()?, below.last()?);
    let contiguous = last - first + 1 == below.len();
    (contiguous && first > 0 && last + 1 < ys.len()).then_some((first, last))
}

fn qualitative(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    // the ladder is positive at weak drive, turns negative at a finite s
    // and then approaches zero from below as 1/s
    let ss = logspace(1e-2, 1e4, 49);
    let hperp = par_map(&ss, |&s| average(Channel::HperpH, s, 0.0, opts))?;
    let l2: Vec<f64> = hperp.iter().map(|a| a.l2_tot).collect();
    let changes: Vec<usize> = (1..l2.len()).filter(|&i| (l2[i] < 0.0) != (l2[i - 1] < 0.0)).collect();
    let single_turn = l2[0] > 0.0 && changes.len() == 1;
    let onset = single_turn.then(|| ss[changes[0] - 1]..=ss[changes[0]]);
    t.holds(
        "hperph L2_tot turns negative once at finite s",
        onset.as_ref().is_some_and(|r| *r.start() > 1e-2 && *r.end() < 10.0),
        match &onset {
            Some(r) => format!("sign change between s = {:.4} and {:.4}", r.start(), r.end()),
            None => format!("{} sign changes", changes.len()),
        },
    );
    let tail = &ss[ss.len() - 9..];
    let slope = loglog_slope(tail, &l2[l2.len() - 9..]).ok_or("singular slope fit")?;
    t.holds(
        "hperph L2_tot approaches zero from below as 1/s",
        l2[l2.len() - 9..].iter().all(|&v| v < 0.0) && (slope + 1.0).abs() < 0.05,
        format!("slope {slope:.4} on s in [1e3, 1e4]"),
    );

    let total = |s: f64| average(Channel::HparH, s, 0.0, opts).map(|a| a.l2_tot + a.c2_tot0);
    let probe = par_map(&[0.1, 0.7, 3.0], |&s| total(s))?;
    let bracketed = probe[1] > probe[0] && probe[1] > probe[2];
    let s_max = golden_max(|s| total(s).unwrap_or(f64::NAN), 0.1, 3.0, 1e-5);
    t.holds(
        "hparh I2_tot interior maximum in [0.5, 0.9]",
        bracketed && (0.5..=0.9).contains(&s_max),
        format!("maximum at s = {s_max:.5}"),
    );

    let s_el = golden_max(|s| hparh_elastic(s, 0.0), 0.01, 2.0, 1e-9);
    t.abs("elastic closed-form maximum", s_el, 1.0 / 3.0, 1e-6);
    let el = average(Channel::HparH, s_el, 0.0, opts)?;
    t.rel("numeric elastic ladder at that maximum", el.l2_el, hparh_elastic(s_el, 0.0), 1e-6);

    let ss = logspace(0.1, 2.0, 27);
    let det = par_map(&ss, |&s| average(Channel::HparH, s, 20.0, opts))?;
    let (i_min, a_min) = det
        .iter()
        .map(|a| a.alpha_tot)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, a)| if a < acc.1 { (i, a) } else { acc });
    t.holds(
        "delta=20: min over s in [0.1, 2] of alpha < 1",
        a_min < 1.0,
        format!("alpha = {a_min:.6} at s = {:.3}", ss[i_min]),
    );
    let half = average(Channel::HparH, 0.5, 20.0, opts)?;
    t.holds("delta=20: alpha(s=0.5) < 1", half.alpha_tot < 1.0, format!("alpha = {:.6}", half.alpha_tot));

    let deltas: Vec<f64> = (0..=60).map(f64::from).collect();
    let cfg = &opts.average;
    let alphas = par_map(&deltas, |&d| {
        average_drive(Channel::HparH, &DriveParams::from_rabi(20.0, d, Channel::HparH.incident()), opts, cfg).map(|a| a.alpha_tot)
    })?;
    match interior_run(&alphas, 1.0) {
        Some((a, b)) => t.holds("rabi=20: alpha < 1 on a finite detuning range", true, format!("delta in [{}, {}]", deltas[a], deltas[b])),
        None => t.holds("rabi=20: alpha < 1 on a finite detuning range", false, "no single interior run below 1"),
    }
    Ok(())
}

fn angular(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    use Spherical::*;
    for (q, qp, want, label) in [
        (Plus, Plus, 2.0 / 15.0, "|D_{+1,+1}|^2"),
        (Plus, Minus, 7.0 / 15.0, "|D_{+1,-1}|^2"),
        (Plus, Zero, 1.0 / 15.0, "|D_{+1,0}|^2"),
        (Zero, Zero, 8.0 / 15.0, "|D_{0,0}|^2"),
    ] {
        let got = configuration_average(|g| g.projector().component(q, qp).norm_sqr(), &opts.average).map_err(|e| e.to_string())?;
        t.abs(format!("<{label}>"), got, want, 1e-6);
    }
    let kl = opts.average.kl;
    let xs: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    let cfg = AverageConfig { thetas: xs.iter().map(|x| x / kl).collect(), ..opts.average.clone() };
    for s in [0.1, 1.0] {
        let drive = DriveParams::from_saturation(s, 0.0, Channel::HparH.incident());
        let a = average_drive(Channel::HparH, &drive, opts, &cfg)?;
        let p = eval_polynomials(s);
        let unit = p.r1 / ((4.0 + s) * p.p);
        let ys: Vec<f64> = a.c2_tot.iter().map(|c| c / unit).collect();
        let fit = polyfit(&xs, &ys, &[0, 2, 4]).ok_or("singular angular fit")?;
        t.rel(format!("s={s} crossed intercept"), fit[0], 2.0 / 15.0, 2e-2);
        t.rel(format!("s={s} crossed curvature"), fit[1], -1.0 / 35.0, 2e-2);
    }
    Ok(())
}

fn nonperturbative(_opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let base = PairGeometry::new(1.0, 0.6, 12.0).map_err(|e| e.to_string())?;
    for (channel, s) in [(Channel::HparH, 1.0), (Channel::LinParLin, 0.5)] {
        let drive = DriveParams::from_saturation(s, 0.7, channel.incident());
        let mags = logspace(1e-3, 1e-2, 5);
        let mut errs = Vec::new();
        for &m in &mags {
            let geom = base.with_coupling(C64::from_polar(m, 0.4));
            let sys = build_pair_system(&drive, &geom, channel.dipole_model());
            let full = full_steady_state(&sys).map_err(|e| e.to_string())?;
            let orders = perturbative_orders(&sys, 2).map_err(|e| e.to_string())?;
            errs.push((full - orders.partial_sum(2)).norm());
        }
        let slope = loglog_slope(&mags, &errs).ok_or("singular slope fit")?;
        t.abs(format!("{channel} remainder exponent"), slope, 3.0, 0.2);
    }
    Ok(())
}

fn tails(opts: &VerifyOptions, t: &mut Tally) -> Result<(), String> {
    let ss = logspace(1e2, 1e4, 21);
    let hpar = par_map(&ss, |&s| average(Channel::HparH, s, 0.0, opts))?;
    let hperp = par_map(&ss, |&s| average(Channel::HperpH, s, 0.0, opts))?;
    let series: [(&str, Vec<f64>, f64); 4] = [
        ("hparh I2_tot", hpar.iter().map(|a| a.l2_tot + a.c2_tot0).collect(), -1.0),
        ("hparh L2_el", hpar.iter().map(|a| a.l2_el).collect(), -3.0),
        ("hperph L2_el", hperp.iter().map(|a| a.l2_el).collect(), -2.0),
        ("hperph C2_el", hperp.iter().map(|a| a.c2_el0).collect(), -1.0),
    ];
    for (label, ys, want) in series {
        let slope = loglog_slope(&ss, &ys).ok_or("singular slope fit")?;
        t.rel(format!("{label} log-log slope"), slope, want, 5e-2);
    }
    Ok(())
}

pub const CHECKS: [Check; 10] = [
    Check { id: 1, name: "fixed-geometry", tags: &["hparh", "oracle"], run: fixed_geometry },
    Check { id: 2, name: "hparh-average", tags: &["hparh", "average"], run: hparh_average },
    Check { id: 3, name: "enhancement-limits", tags: &["hparh", "alpha"], run: enhancement_limits },
    Check { id: 4, name: "small-s", tags: &["hparh", "scalar", "expansion"], run: small_s },
    Check { id: 5, name: "reciprocity", tags: &["hparh", "elastic"], run: reciprocity },
    Check {
        id: 6,
        name: "channel-relations",
        tags: &["hparh", "linperplin", "linparlin", "hperph"],
        run: channel_relations,
    },
    Check { id: 7, name: "qualitative", tags: &["hparh", "hperph", "detuning"], run: qualitative },
    Check { id: 8, name: "angular", tags: &["hparh", "geometry", "cone"], run: angular },
    Check { id: 9, name: "nonperturbative", tags: &["solver"], run: nonperturbative },
    Check { id: 10, name: "tails", tags: &["hparh", "hperph", "elastic"], run: tails },
];

/// Checks selected by `only` (all when `None`).
pub fn select(only: Option<&str>) -> Vec<&'static Check> {
    CHECKS
        .iter()
        .filter(|c| only.is_none_or(|f| f.split(',').any(|part| c.matches(part))))
        .collect()
}

pub fn run_checks(only: Option<&str>, opts: &VerifyOptions) -> Vec<CheckReport> {
    select(only).into_iter().map(|c| c.run(opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(None).len(), 10);
        assert_eq!(select(Some("9")).len(), 1);
        assert_eq!(select(Some("tails")).len(), 1);
        let hparh = select(Some("hparh"));
        assert!(hparh.len() > 1 && hparh.len() < 10);
        assert!(select(Some("nothing")).is_empty());
        assert_eq!(select(Some("1,9")).len(), 2);
    }

    #[test]
    fn runs_cheap_checks() {
        let opts = VerifyOptions::default();
        for r in run_checks(Some("9,angular"), &opts) {
            assert!(r.passed, "{}\n{}", r.line(), r.details.join("\n"));
        }
    }

    #[test]
    fn interior_runs() {
        assert_eq!(interior_run(&[1.0, -1.0, -2.0, 1.0], 0.0), Some((1, 2)));
        assert_eq!(interior_run(&[-1.0, 1.0], 0.0), None);
        assert_eq!(interior_run(&[1.0, -1.0, 1.0, -1.0, 1.0], 0.0), None);
        assert_eq!(interior_run(&[1.0, 2.0], 0.0), None);
    }
}
