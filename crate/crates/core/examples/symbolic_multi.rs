//! Coefficients as polynomials in the cumulants, in one and two dimensions.

use entropic_clt::algebra::{rat, CumulantSet, CumulantTensor, MultiIndex};
use entropic_clt::coeffs::{cj_symbolic, special_case_coefficient};

fn main() -> entropic_clt::Result<()> {
    for j in 1..=2 {
        println!("c_{j}, d = 1: {}", cj_symbolic(j, 1)?);
    }
    println!("c_1, d = 2: {}", cj_symbolic(1, 2)?);
    let c2 = cj_symbolic(2, 2)?;
    println!("c_2, d = 2 has {} terms", c2.terms().len());

    // vanishing third cumulants leave only the fourth-order squares
    let zero: Vec<MultiIndex> = (0..=3).map(|a| MultiIndex::new(vec![a, 3 - a])).collect();
    println!("c_2, d = 2, gamma_3 = 0: {}", c2.restrict_zero(&zero));
    println!("special case k = 5: {}", special_case_coefficient(5));

    let x = CumulantSet::new(vec![rat(1, 2), rat(-1, 3)]);
    let mut t = CumulantTensor::iid_product(&x, 2);
    t.set(MultiIndex::new(vec![2, 1]), rat(1, 5))?;
    println!(
        "c_1 for a correlated-cumulant example: {}",
        cj_symbolic(1, 2)?.evaluate_tensor(&t)?
    );
    Ok(())
}
