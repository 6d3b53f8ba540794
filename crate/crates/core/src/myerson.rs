//! Optimal posted prices for one-dimensional laws, and the two simple
//! mechanism benchmarks built from them: per-item sale and grand-bundle sale.


use crate::dist::{Dist1D, JointDist};
use crate::num::Scalar;

/// An optimal posted price together with its revenue and sale probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceQuote<T> {
    pub price: T,
    pub revenue: T,
    pub sale_prob: T,
}

/// Revenue-maximizing posted price for `f`. A buyer at value `v` purchases
/// whenever `v >= price`, so only support points need to be considered; ties
/// are broken toward the lowest optimal price.
pub fn myerson_price<T: Scalar>(f: &Dist1D<T>) -> PriceQuote<T> {
    let mut best: Option<PriceQuote<T>> = None;
    // Walk the support descending, accumulating Pr[v >= price] exactly.
    let mut sale_prob = T::zero();
    for (value, prob) in f.support().iter().rev() {
        sale_prob = sale_prob + prob.clone();
        let revenue = value.clone() * sale_prob.clone();
        let better = match &best {
            None => true,
            // `>=` because later candidates have lower prices.
            Some(b) => revenue >= b.revenue,
        };
        if better {
            best = Some(PriceQuote { price: value.clone(), revenue, sale_prob: sale_prob.clone() });
        }
    }
    best.expect("law has non-empty support")
}

/// Revenue of selling every item separately at its own optimal price.
pub fn srev<T: Scalar>(d: &JointDist<T>) -> T {
    (0..d.n_items())
        .map(|j| myerson_price(&d.marginal(j).expect("index in range")).revenue)
        .fold(T::zero(), |acc, r| acc + r)
}

/// Revenue of selling the grand bundle at its optimal price.
pub fn brev<T: Scalar>(d: &JointDist<T>) -> T {
    myerson_price(&d.sum_dist()).revenue
}
