//! Angular shape of the crossed term near exact backscattering.

use cbs_core::analytic::eval_polynomials;
use cbs_core::average::{averaged_channel, AverageConfig};
use cbs_core::channels::Channel;
use cbs_core::fit::polyfit;
use cbs_core::liouvillian::DriveParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = 1.0;
    let base = AverageConfig::default();
    let xs: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let cfg = AverageConfig { thetas: xs.iter().map(|x| x / base.kl).collect(), ..base };
    let drive = DriveParams::from_saturation(s, 0.0, Channel::HparH.incident());
    let avg = averaged_channel(Channel::HparH, &drive, &cfg)?;
    let p = eval_polynomials(s);
    let unit = p.r1 / ((4.0 + s) * p.p);
    println!("{:>8} {:>14} {:>14}", "k l th", "C2_tot/unit", "2/15 - x^2/35");
    let ys: Vec<f64> = avg.c2_tot.iter().map(|c| c / unit).collect();
    for (x, y) in xs.iter().zip(&ys) {
        println!("{x:>8.2} {y:>14.8} {:>14.8}", 2.0 / 15.0 - x * x / 35.0);
    }
    let c = polyfit(&xs, &ys, &[0, 2, 4]).ok_or("singular fit")?;
    println!("fit: {:.6} + {:.6} x^2 + {:.6} x^4 (expected 0.133333, -0.028571)", c[0], c[1], c[2]);
    println!("ladder L2_tot/unit = {:.8} (flat in angle)", avg.l2_tot / unit);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
