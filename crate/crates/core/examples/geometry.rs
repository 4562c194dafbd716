//! Spherical basis, the transverse projector and the far-field coupling.

use cbs_core::average::{configuration_average, AverageConfig};
use cbs_core::geometry::{coupling_constant, transverse_projector, unit_vector, Spherical};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = unit_vector(std::f64::consts::FRAC_PI_2, 0.0);
    println!("n(pi/2, 0) = {n}");
    let delta = transverse_projector(&n);
    println!("Delta_(+1,+1) = {:.6}", delta.component(Spherical::Plus, Spherical::Plus));
    println!("Delta_(+1,-1) = {:.6}", delta.component(Spherical::Plus, Spherical::Minus));
    println!("Delta . n     = {}", delta.apply(&n));

    let g = coupling_constant(1.0, 1.5)?;
    println!("g(k r = 3/2) = {g:.6}, |g| = {:.6}", g.norm());

    // orientation averages of the squared projector components
    let cfg = AverageConfig::default();
    use Spherical::*;
    for (q, qp) in [(Plus, Plus), (Plus, Minus), (Plus, Zero), (Zero, Zero)] {
        let w = configuration_average(|geom| geom.projector().component(q, qp).norm_sqr(), &cfg)?;
        println!("<|Delta_({},{})|^2> = {w:.10} = {:.4}/15", q.q(), qp.q(), 15.0 * w);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
