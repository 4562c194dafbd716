//! Elastic double scattering: reciprocity between ladder and crossed terms
//! in the helicity-preserving channel, at any detuning, and the inelastic
//! share of the signal.

use cbs_core::analytic::hparh_elastic;
use cbs_core::average::{averaged_channel, AverageConfig};
use cbs_core::channels::Channel;
use cbs_core::fit::golden_max;
use cbs_core::liouvillian::DriveParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = AverageConfig::default();
    let channel = Channel::HparH;
    println!("{:>6} {:>6} {:>14} {:>14} {:>14} {:>10}", "s", "delta", "L2_el", "C2_el(0)", "closed form", "el/total");
    for (s, delta) in [(0.1, 0.0), (1.0 / 3.0, 0.0), (1.0, 0.0), (1.0, 3.0), (10.0, -2.0)] {
        let drive = DriveParams::from_saturation(s, delta, channel.incident());
        let avg = averaged_channel(channel, &drive, &cfg)?;
        let share = (avg.l2_el + avg.c2_el0) / (avg.l2_tot + avg.c2_tot0);
        println!(
            "{s:>6.3} {delta:>6} {:>14.8e} {:>14.8e} {:>14.8e} {share:>10.5}",
            avg.l2_el,
            avg.c2_el0,
            hparh_elastic(s, delta)
        );
    }
    let s_max = golden_max(|s| hparh_elastic(s, 0.0), 0.0, 2.0, 1e-10);
    println!("elastic double scattering peaks at s = {s_max:.8}");

    // parallel channels carry elastic single scattering as well
    let drive = DriveParams::from_saturation(1.0, 0.0, Channel::HperpH.incident());
    let avg = averaged_channel(Channel::HperpH, &drive, &cfg)?;
    println!("hperph at s = 1: L1 = {}, L1_el = {}, alpha_el = {:.8}", avg.l1, avg.l1_el, avg.alpha_el);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
