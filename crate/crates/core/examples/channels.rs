//! Ladder and crossed intensities of every polarization channel at one pair
//! geometry, plus the direct and reversed elastic amplitudes.

use cbs_core::channels::{elastic_amplitudes, fixed_geometry_intensities, Channel};
use cbs_core::liouvillian::{build_pair_system, DriveParams};
use cbs_core::solver::perturbative_orders;
use cbs_core::PairGeometry;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let geom = PairGeometry::new(1.2, 0.7, 15.0)?;
    let (s, delta) = (0.8, 1.0);
    println!("{:>11} {:>12} {:>12} {:>12} {:>12} {:>12}", "channel", "single", "ladder", "crossed", "el ladder", "el crossed");
    for channel in Channel::ALL {
        let drive = DriveParams::from_saturation(s, delta, channel.incident());
        let sys = build_pair_system(&drive, &geom, channel.dipole_model());
        let orders = perturbative_orders(&sys, 2)?;
        let f = fixed_geometry_intensities(channel, &orders, 0.0)?;
        println!(
            "{:>11} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            channel.name(),
            f.total.single_scatter,
            f.total.ladder,
            f.total.crossed,
            f.elastic.ladder,
            f.elastic.crossed
        );
        if channel == Channel::HparH {
            let (dir, rev) = elastic_amplitudes(channel, &orders, 0.0)?;
            println!("{:>11} |T_dir| = {:.6e}, |T_rev| = {:.6e}", "", dir.norm(), rev.norm());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
