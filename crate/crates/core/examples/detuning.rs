//! Enhancement factor versus detuning at fixed Rabi frequency: at Ω = 20γ
//! the crossed term turns negative relative to the ladder over a window
//! of detunings, so α drops below 1.

use cbs_core::average::{averaged_channel, AverageConfig};
use cbs_core::channels::Channel;
use cbs_core::liouvillian::DriveParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = AverageConfig::default();
    println!("{:>6} {:>10} {:>10} {:>10}", "delta", "s", "Omega=10", "Omega=20");
    for delta in (0..=50).step_by(5).map(f64::from) {
        let a = |rabi: f64| {
            let drive = DriveParams::from_rabi(rabi, delta, Channel::HparH.incident());
            averaged_channel(Channel::HparH, &drive, &cfg).map(|o| o.alpha_tot)
        };
        let s = DriveParams::from_rabi(20.0, delta, Channel::HparH.incident()).saturation();
        let (a10, a20) = (a(10.0)?, a(20.0)?);
        let mark = if a20 < 1.0 { "  < 1" } else { "" };
        println!("{delta:>6} {s:>10.4} {a10:>10.5} {a20:>10.5}{mark}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
