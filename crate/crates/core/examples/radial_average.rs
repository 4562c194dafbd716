//! The two averaging modes: fast phases averaged out at r = ℓ, or an
//! explicit integral over a one-wavelength window of separations.

use cbs_core::average::{averaged_channel, configuration_average, AverageConfig, AverageMode};
use cbs_core::channels::Channel;
use cbs_core::liouvillian::DriveParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let kl = 60.0;
    let phase = AverageConfig { kl, ..Default::default() };
    let radial = AverageConfig { mode: AverageMode::Radial, angular_nodes: 24, radial_nodes: 48, tolerance: 1e-4, ..phase.clone() };

    let unit = (1.5 / kl) * (1.5 / kl);
    for cfg in [&phase, &radial] {
        let v = configuration_average(|g| (g.g * g.g).re, cfg)?;
        println!("{:>6}: <Re g^2> = {:+.3e} |g~|^2", cfg.mode.name(), v / unit);
    }
    let drive = DriveParams::from_saturation(1.0, 0.0, Channel::HparH.incident());
    let a = averaged_channel(Channel::HparH, &drive, &phase)?;
    let b = averaged_channel(Channel::HparH, &drive, &radial)?;
    println!("L2_tot  phase {:.8e}  radial {:.8e}", a.l2_tot, b.l2_tot);
    println!("C2_tot  phase {:.8e}  radial {:.8e}", a.c2_tot0, b.c2_tot0);
    println!("alpha   phase {:.8}  radial {:.8}  (differ at order 1/kl = {:.3})", a.alpha_tot, b.alpha_tot, 1.0 / kl);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
