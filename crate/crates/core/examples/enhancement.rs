//! Configuration-averaged enhancement factor in the helicity-preserving
//! channel against its closed form, and its decay with detuning.

use cbs_core::analytic::{analytic_channel, hparh_alpha};
use cbs_core::average::{averaged_channel, AverageConfig};
use cbs_core::channels::Channel;
use cbs_core::liouvillian::DriveParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = AverageConfig::default();
    let channel = Channel::HparH;
    println!("{:>8} {:>14} {:>14} {:>12} {:>12}", "s", "L2_tot", "C2_tot(0)", "alpha", "closed form");
    for s in [1e-3, 0.1, 0.7, 1.0, 10.0, 1e3] {
        let drive = DriveParams::from_saturation(s, 0.0, channel.incident());
        let avg = averaged_channel(channel, &drive, &cfg)?;
        let closed = analytic_channel(channel, s, 0.0, 0.0, cfg.kl)?;
        assert!((avg.l2_tot / closed.l2_tot - 1.0).abs() < 1e-6);
        println!("{s:>8} {:>14.8e} {:>14.8e} {:>12.8} {:>12.8}", avg.l2_tot, avg.c2_tot0, avg.alpha_tot, hparh_alpha(s));
    }

    println!();
    println!("{:>8} {:>8} {:>8}  (alpha vs detuning, no closed form)", "s", "delta", "alpha");
    for delta in [0.0, 5.0, 10.0, 20.0] {
        for s in [0.1, 0.5, 2.0] {
            let drive = DriveParams::from_saturation(s, delta, channel.incident());
            let a = averaged_channel(channel, &drive, &cfg)?.alpha_tot;
            println!("{s:>8} {delta:>8} {a:>8.5}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
