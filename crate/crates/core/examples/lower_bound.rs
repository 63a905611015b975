//! Heavy-tailed scale mixture with E rho^s = infinity: D_n against
//! n log n P{rho >= sqrt(n log n)}.

use entropic_clt::harness::{condition81_check, lowerbound_default_grid, lowerbound_experiment, DEFAULT_TAIL_MASS};
use entropic_clt::mixture::MixingMeasure;

fn main() -> entropic_clt::Result<()> {
    let (s, eta) = (3.0, 1.5);
    let ns: Vec<u64> = (4..=10).map(|k| 1 << k).collect();
    let rep = lowerbound_experiment(s, eta, DEFAULT_TAIL_MASS, &ns, &lowerbound_default_grid())?;
    println!("sigma0 = {:.6}, fitted c = {:.4}", rep.sigma0, rep.fitted_c);
    for r in &rep.rows {
        println!(
            "n = {:5}  D_n = {:.5e}  bound = {:.5e}  ratio = {:.4}  scaled = {:.4}",
            r.n, r.d_n, r.bound, r.ratio, r.theorem13_scale
        );
    }
    println!("min/max of the scaled column: {:.3}", rep.scale_spread());

    let p = MixingMeasure::heavy_tail(s, eta, DEFAULT_TAIL_MASS)?;
    for gamma in [0.1, (s - 2.0) / (2.0 * s)] {
        let c = condition81_check(&p, s, gamma, &ns)?;
        println!(
            "gamma = {gamma:.4}: min {:.4e}, log-log slope {:.3} (power part {:.3})",
            c.min,
            c.log_slope,
            c.predicted_exponent.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
