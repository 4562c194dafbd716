//! Parameter sweeps over drive and detuning, written as CSV.
//!
//! Points are independent and run on a worker pool. Results are collected
//! in grid order, so the output does not depend on the number of workers.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::average::{averaged_channel, AverageConfig, AverageError, ChannelObservables};
use crate::channels::Channel;
use crate::fit::logspace;
use crate::liouvillian::DriveParams;

/// Environment variable giving the default worker count.
pub const JOBS_ENV: &str = "CBS_JOBS";

pub const CSV_HEADER: &str = "channel,s,delta,theta,L1,L2_tot,C2_tot,I2_tot,L2_el,C2_el,alpha_tot,alpha_el,mode,kl";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("channel {channel} at s = {s}, delta = {delta}: {source}")]
    Point { channel: Channel, s: f64, delta: f64, source: AverageError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Grid of the drive strength, given either as saturation or as Rabi
/// frequency.
#[derive(Clone, Debug, PartialEq)]
pub enum DriveAxis {
    Saturation(Vec<f64>),
    Rabi(Vec<f64>),
}

impl DriveAxis {
    fn values(&self) -> &[f64] {
        match self {
            DriveAxis::Saturation(v) | DriveAxis::Rabi(v) => v,
        }
    }
}

/// Saturation grid: `points` values between `min` and `max`, logarithmic or
/// linear.
pub fn saturation_grid(min: f64, max: f64, points: usize, log: bool) -> Result<Vec<f64>, SweepError> {
    if points == 0 || !(min >= 0.0 && max >= min && max.is_finite()) {
        return Err(SweepError::Spec(format!("bad saturation range [{min}, {max}] with {points} points")));
    }
    if log {
        if min <= 0.0 {
            return Err(SweepError::Spec("logarithmic grid needs s-min > 0".into()));
        }
        return Ok(logspace(min, max, points));
    }
    Ok(linspace(min, max, points))
}

pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub channels: Vec<Channel>,
    pub drive: DriveAxis,
    pub deltas: Vec<f64>,
    pub average: AverageConfig,
    /// Label written into the CSV comments.
    pub label: String,
}

/// Named grids: `fig2` enhancement versus saturation at resonance, `fig3`
/// the same at several detunings, `fig4` versus detuning at fixed Rabi
/// frequency, `fig5` the helicity-flipping channel versus saturation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Default grids. The detunings 5γ and 10γ of `fig3` and the 0 to 60γ
    /// range of `fig4` are free choices.
    pub fn spec(self) -> SweepSpec {
        let s_grid = logspace(1e-2, 1e2, 41);
        let (channels, drive, deltas) = match self {
            Preset::Fig2 => (vec![Channel::HparH], DriveAxis::Saturation(s_grid), vec![0.0]),
            Preset::Fig3 => (vec![Channel::HparH], DriveAxis::Saturation(s_grid), vec![0.0, 5.0, 10.0, 20.0]),
            Preset::Fig4 => (vec![Channel::HparH], DriveAxis::Rabi(vec![10.0, 20.0]), linspace(0.0, 60.0, 61)),
            Preset::Fig5 => (vec![Channel::HperpH], DriveAxis::Saturation(s_grid), vec![0.0]),
        };
        SweepSpec { channels, drive, deltas, average: AverageConfig::default(), label: self.name().into() }
    }
}

/// One computed grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub observables: ChannelObservables,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.channels.is_empty() || self.deltas.is_empty() || self.drive.values().is_empty() {
            return Err(SweepError::Spec("empty grid".into()));
        }
        if self.drive.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SweepError::Spec("drive values must be finite and non-negative".into()));
        }
        if self.deltas.iter().any(|d| !d.is_finite()) {
            return Err(SweepError::Spec("detunings must be finite".into()));
        }
        self.average.validate().map_err(|e| SweepError::Spec(e.to_string()))
    }

    /// Grid points in output order: channel, then drive, then detuning.
    pub fn drives(&self) -> Vec<(Channel, DriveParams)> {
        self.grid().into_iter().map(|(c, d, _)| (c, d)).collect()
    }

    /// As [`drives`](Self::drives), with the nominal saturation of each point
    /// (`None` on a Rabi-frequency axis).
    fn grid(&self) -> Vec<(Channel, DriveParams, Option<f64>)> {
        let mut out = Vec::new();
        for &channel in &self.channels {
            for &v in self.drive.values() {
                for &delta in &self.deltas {
                    let drive = match self.drive {
                        DriveAxis::Saturation(_) => DriveParams::from_saturation(v, delta, channel.incident()),
                        DriveAxis::Rabi(_) => DriveParams::from_rabi(v, delta, channel.incident()),
                    };
                    let nominal = matches!(self.drive, DriveAxis::Saturation(_)).then_some(v);
                    out.push((channel, drive, nominal));
                }
            }
        }
        out
    }
}

/// Worker count: explicit value, then `CBS_JOBS`, then all cores.
pub fn resolve_jobs(jobs: Option<usize>) -> usize {
    jobs.or_else(|| std::env::var(JOBS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepPoint>, SweepError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Spec(e.to_string()))?;
    let grid = spec.grid();
    let results: Vec<Result<SweepPoint, SweepError>> = pool.install(|| {
        grid.par_iter()
            .map(|(channel, drive, nominal)| {
                averaged_channel(*channel, drive, &spec.average)
                    .map(|mut observables| {
                        // report the grid value, not its round trip through Ω
                        if let Some(s) = nominal {
                            observables.s = *s;
                        }
                        SweepPoint { observables }
                    })
                    .map_err(|source| SweepError::Point {
                        channel: *channel,
                        s: drive.saturation(),
                        delta: drive.detuning,
                        source,
                    })
            })
            .collect()
    });
    results.into_iter().collect()
}

/// CSV with `#` comment lines, then one row per point and detection angle.
/// Enhancement factors at `s = 0` are written as `NaN`: every intensity
/// vanishes there.
pub fn write_csv<W: Write>(w: &mut W, spec: &SweepSpec, points: &[SweepPoint]) -> io::Result<()> {
    let avg = &spec.average;
    writeln!(w, "# cbs-core {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# sweep {}", spec.label)?;
    match &spec.drive {
        DriveAxis::Saturation(_) => writeln!(w, "# drive axis: saturation")?,
        DriveAxis::Rabi(v) => {
            let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(w, "# drive axis: rabi {}", list.join(" "))?;
        }
    }
    writeln!(
        w,
        "# mode={} kl={} angular_nodes={} phase_nodes={} radial_nodes={} tolerance={}",
        avg.mode.name(),
        avg.kl,
        avg.angular_nodes,
        avg.phase_nodes,
        avg.radial_nodes,
        avg.tolerance
    )?;
    writeln!(w, "# intensities in units of |g~|^2 = (3/2kl)^2; L1 in single-atom units")?;
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        let o = &p.observables;
        for (i, theta) in o.thetas.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                o.channel.name(),
                o.s,
                o.delta,
                theta,
                o.l1,
                o.l2_tot,
                o.c2_tot[i],
                o.l2_tot + o.c2_tot[i],
                o.l2_el,
                o.c2_el[i],
                o.alpha_tot,
                o.alpha_el,
                o.mode.name(),
                o.kl
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        let mut spec = Preset::Fig2.spec();
        spec.channels = vec![Channel::HparH, Channel::ScalarTwoLevel];
        spec.drive = DriveAxis::Saturation(vec![0.0, 0.5, 2.0]);
        spec.deltas = vec![0.0, 3.0];
        spec.average.thetas = vec![0.0, 1e-3];
        spec.average.angular_nodes = 16;
        spec
    }

    fn csv(spec: &SweepSpec, jobs: usize) -> String {
        let points = run_sweep(spec, jobs).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, spec, &points).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn output_independent_of_workers() {
        let spec = small_spec();
        let serial = csv(&spec, 1);
        assert_eq!(serial, csv(&spec, 4));
        let rows: Vec<&str> = serial.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], CSV_HEADER);
        assert_eq!(rows.len(), 1 + 2 * 3 * 2 * 2);
        assert!(rows[1].starts_with("hparh,0,0,0,0,0,0,0,0,0,NaN,NaN,phase,1000"));
    }

    #[test]
    fn grids() {
        assert_eq!(saturation_grid(0.0, 1.0, 3, false).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(saturation_grid(0.0, 1.0, 3, true).is_err());
        assert!(saturation_grid(1.0, 0.5, 3, false).is_err());
        let g = saturation_grid(1e-2, 1e2, 5, true).unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15);
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
            p.spec().validate().unwrap();
        }
    }

    #[test]
    fn rabi_axis_sets_saturation() {
        let mut spec = small_spec();
        spec.drive = DriveAxis::Rabi(vec![20.0]);
        spec.deltas = vec![20.0];
        let (_, d) = spec.drives()[0];
        assert!((d.saturation() - 400.0 / 802.0).abs() < 1e-12);
    }
}
