//! Edgeworth approximants of the normalized exponential sum against the
//! numerically inverted density.

use entropic_clt::density::{convolve_power, DistributionSpec, Grid};
use entropic_clt::edgeworth::EdgeworthApproximant;

fn main() -> entropic_clt::Result<()> {
    let spec = DistributionSpec::CenteredExponential;
    let c = spec.cumulants(8)?;
    let n = 20;
    let p = convolve_power(&spec, n, &Grid::default_for(n))?;
    for m in [3, 4, 5, 6, 8] {
        let a = EdgeworthApproximant::new(&c, m)?;
        // sup over [-5, 5]; far tails are dominated by the density itself
        let err = (0..=1000)
            .map(|i| -5.0 + i as f64 * 0.01)
            .map(|x| (p.eval(x) - a.density(n, x)).abs())
            .fold(0.0, f64::max);
        println!("m = {m}: sup |p_n - phi_m| = {err:.3e}");
    }
    let a = EdgeworthApproximant::new(&c, 4)?;
    for (k, q) in a.density_terms().iter().enumerate() {
        let terms: Vec<String> = q.coeffs().iter().map(|(r, a)| format!("({a}) H_{r}")).collect();
        println!("q_{} = phi * [{}]", k + 1, terms.join(" + "));
    }
    Ok(())
}
