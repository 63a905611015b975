//! Splitting the exponential density at a level M and rebuilding p_n from the
//! bounded part.

use entropic_clt::density::{exponential_mass_above, DistributionSpec, Grid};
use entropic_clt::harness::truncation_experiment;

fn main() -> entropic_clt::Result<()> {
    let grid = Grid::symmetric(24.0, 1 << 14);
    for (threshold, m0) in [(0.6, 3), (0.9, 5)] {
        let (b, rows) = truncation_experiment(
            &DistributionSpec::CenteredExponential,
            threshold,
            m0,
            &[8, 16, 32, 64],
            &grid,
        )?;
        println!(
            "M = {threshold}: b = {b:.5} (exact {:.5}), m0 = {m0}",
            exponential_mass_above(threshold)
        );
        for r in rows {
            println!(
                "  n = {:3}  eps_n = {:.3e}  bound holds: {}  L1 = {:.3e} <= {:.3e}",
                r.n, r.epsilon, r.epsilon_bound_holds, r.l1, r.l1_bound
            );
        }
    }
    Ok(())
}
