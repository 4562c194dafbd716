//! Two coupled atoms at a fixed geometry: the 255-dimensional system, its
//! perturbation series in the coupling, and the exact steady state.

use cbs_core::liouvillian::{build_pair_system, DipoleModel, DriveParams, Incident};
use cbs_core::solver::{density_operator, full_steady_state, min_eigenvalue, perturbative_orders};
use cbs_core::{PairGeometry, C64};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let drive = DriveParams::from_saturation(1.0, 0.5, Incident::CircularPlus);
    let geom = PairGeometry::new(1.0, 0.3, 6.0)?;
    let sys = build_pair_system(&drive, &geom, DipoleModel::Full);
    let nnz = sys.v.iter().filter(|z| z.norm() > 0.0).count();
    println!("A is {}x{}, V has {nnz} nonzero entries, |g| = {:.4}", sys.a.nrows(), sys.a.ncols(), geom.g.norm());

    let orders = perturbative_orders(&sys, 4)?;
    println!("rcond(A) = {:.3e}", orders.rcond);
    for (n, x) in orders.orders.iter().enumerate() {
        println!("order {n}: |<Q>^[{n}]| = {:.3e}", x.norm());
    }

    let full = full_steady_state(&sys)?;
    for max in 0..=4 {
        println!("|full - sum to order {max}| = {:.3e}", (&full - orders.partial_sum(max)).norm());
    }
    let rho = density_operator(&full)?;
    println!("trace rho = {:.12}, min eigenvalue = {:.3e}", rho.trace().re, min_eigenvalue(&rho));

    // the remainder after second order shrinks like |g|^3
    for m in [1e-2, 1e-3] {
        let weak = build_pair_system(&drive, &geom.with_coupling(C64::from_polar(m, 0.2)), DipoleModel::Full);
        let o = perturbative_orders(&weak, 2)?;
        println!("|g| = {m:e}: remainder {:.3e}", (full_steady_state(&weak)? - o.partial_sum(2)).norm());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
