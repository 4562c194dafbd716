//! A saturation-detuning sweep written as CSV, as `cbs sweep` does.

use cbs_core::channels::Channel;
use cbs_core::sweep::{resolve_jobs, run_sweep, saturation_grid, write_csv, DriveAxis, Preset};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = Preset::Fig3.spec();
    spec.label = "example".into();
    spec.channels = vec![Channel::HparH, Channel::LinParLin];
    spec.drive = DriveAxis::Saturation(saturation_grid(0.1, 10.0, 3, true)?);
    spec.deltas = vec![0.0, 20.0];
    let points = run_sweep(&spec, resolve_jobs(None))?;
    let mut out = Vec::new();
    write_csv(&mut out, &spec, &points)?;
    print!("{}", String::from_utf8(out)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
