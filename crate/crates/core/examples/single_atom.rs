//! One driven atom: steady state of the optical Bloch equations for the
//! J = 0 → 1 transition and the single-scattering reference intensities.

use cbs_core::channels::single_atom_reference;
use cbs_core::liouvillian::{build_single_generator, DriveParams, Incident};
use cbs_core::operators::sigma;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>8} {:>12} {:>12} {:>12}", "s", "delta", "excited", "|coherence|", "elastic/tot");
    for delta in [0.0, 2.0] {
        for s in [0.1, 1.0, 10.0] {
            let drive = DriveParams::from_saturation(s, delta, Incident::CircularPlus);
            let atom = build_single_generator(&drive);
            let excited = atom.expectation(&sigma(4, 4)).re;
            let coherence = atom.expectation(&sigma(1, 4)).norm();
            // elastic light comes from the mean dipole, total from the population
            let ratio = coherence * coherence / excited;
            println!("{s:>8} {delta:>8} {excited:>12.6} {coherence:>12.6} {ratio:>12.6}");
        }
    }
    let (total, elastic) = single_atom_reference(1.0);
    println!("reference at s = 1: total {total}, elastic {elastic}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
