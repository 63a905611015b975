//! Symmetric laws: n^{k-2} D_n approaches gamma_k^2/(2 k!).

use entropic_clt::density::DistributionSpec;
use entropic_clt::harness::{corollary12_experiment, ExperimentOptions};

fn main() -> entropic_clt::Result<()> {
    let opts = ExperimentOptions::default();
    let runs = [
        (DistributionSpec::Laplace, 4, vec![32, 64, 128, 256, 512]),
        (DistributionSpec::Uniform, 4, vec![32, 64, 128, 256, 512]),
        (DistributionSpec::zero_kurtosis_mixture(), 6, vec![4, 8, 16, 32]),
    ];
    for (spec, k, ns) in runs {
        println!("{} (k = {k})", spec.name());
        for r in corollary12_experiment(&spec, k, &ns, &opts)? {
            println!(
                "  n = {:4}  D_n = {:.6e}  scaled = {:.6}  limit = {:.6}  ratio = {:.4}",
                r.n, r.d_n, r.scaled, r.limit, r.ratio
            );
        }
    }
    Ok(())
}
