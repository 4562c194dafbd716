//! The closed-form reference results at zero detuning for all channels.

use cbs_core::analytic::{analytic_channel, analytic_expansions, eval_polynomials};
use cbs_core::channels::Channel;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let kl = 1e3;
    for s in [0.1, 1.0, 10.0] {
        let p = eval_polynomials(s);
        println!("s = {s}: P = {:.6e}, R1 = {:.6e}, R2 = {:.6e}, F1 = {:.6e}, F2 = {:.6e}", p.p, p.r1, p.r2, p.f1, p.f2);
        for channel in Channel::ALL {
            let a = analytic_channel(channel, s, 0.0, 0.0, kl)?;
            println!(
                "  {:>10}: L2 {:>11.4e} C2 {:>11.4e} L2_el {:>11.4e} C2_el {:>11.4e} alpha {:.6}",
                channel.name(),
                a.l2_tot,
                a.c2_tot,
                a.l2_el,
                a.c2_el,
                a.alpha_tot
            );
        }
    }
    println!("small-s expansions, intensity ~ s - a s^2:");
    for e in analytic_expansions() {
        println!("  {:<15} crossed a = {}, ladder a = {}", e.label, e.crossed, e.ladder);
    }
    match analytic_channel(Channel::HperpH, 1.0, 2.0, 0.0, kl) {
        Err(e) => println!("detuned hperph: {e}"),
        Ok(_) => unreachable!("no closed form off resonance"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
