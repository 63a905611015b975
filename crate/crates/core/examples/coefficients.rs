//! Exact expansion coefficients for a few summand laws, with the
//! quadrature cross-check.

use entropic_clt::algebra::to_f64;
use entropic_clt::coeffs::{cj_exact, cj_quadrature, required_nodes};
use entropic_clt::density::DistributionSpec;

fn main() -> entropic_clt::Result<()> {
    let families = [
        DistributionSpec::CenteredExponential,
        DistributionSpec::Laplace,
        DistributionSpec::Uniform,
        DistributionSpec::zero_kurtosis_mixture(),
    ];
    for spec in &families {
        let c = spec.cumulants(7)?;
        println!(
            "{}: gamma_3..gamma_7 = {:?}",
            spec.name(),
            c.gammas().iter().map(to_f64).collect::<Vec<_>>()
        );
        for j in 1..=3 {
            let exact = cj_exact(&c, j)?;
            let quad = cj_quadrature(&c, j, required_nodes(j))?;
            println!("  c_{j} = {exact}  ({:.15e}, quadrature {quad:.15e})", to_f64(&exact));
        }
    }
    Ok(())
}
