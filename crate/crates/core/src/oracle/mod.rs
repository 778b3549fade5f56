//! Ground-truth machinery: brute-force MMS values and partitions,
//! best-achievable-α search, an exact dynamic program and FPTAS for
//! identical agents, the almost-identical wrapper, and the exact solver for
//! single-category bivalued instances.

mod bivalued;
mod bruteforce;
mod identical;

pub use bivalued::{bivalued_exact, bivalued_mms_partition, BivaluedProfile};
pub use bruteforce::{
    best_alpha, best_alpha_guarded, mms_bruteforce, mms_bruteforce_guarded, AlphaBound, BestAlpha,
};
pub use identical::{
    almost_identical, fptas_identical, fptas_identical_run, mms_identical_dp, IdenticalDpRun,
};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::Error;
use crate::instance::Instance;
use crate::rational::{denominator_lcm, Rational};
use crate::Result;

/// Default cap on the `n^m` assignment enumeration.
pub const DEFAULT_BRUTEFORCE_GUARD: u128 = 10_000_000;

/// An exact MMS value together with a witnessing feasible partition.
#[derive(Debug, Clone)]
pub struct MmsResult {
    pub value: Rational,
    pub partition: crate::instance::Allocation,
}

/// Per-agent exact MMS values, routed to the cheapest applicable oracle:
/// the identical-agent dynamic program when all rows are equal, otherwise
/// brute force with duplicate valuation rows computed once.
pub fn mms_values(inst: &Instance) -> Result<Vec<Rational>> {
    if inst.n_agents() == 0 {
        return Ok(Vec::new());
    }
    if inst.agents_identical() {
        let res = mms_identical_dp(inst)?;
        return Ok(vec![res.value; inst.n_agents()]);
    }
    let mut values: Vec<Option<Rational>> = vec![None; inst.n_agents()];
    for i in 0..inst.n_agents() {
        if values[i].is_some() {
            continue;
        }
        let mu = mms_bruteforce(inst, i)?.value;
        for j in i..inst.n_agents() {
            if values[j].is_none() && inst.valuations()[j] == inst.valuations()[i] {
                values[j] = Some(mu.clone());
            }
        }
    }
    Ok(values.into_iter().map(|v| v.unwrap()).collect())
}

/// Valuation table scaled to integers by the common denominator, so that
/// enumeration and DP run on machine integers while staying exact.
pub(crate) struct ScaledValues {
    pub lcm: BigInt,
    pub rows: Vec<Vec<i128>>,
}

impl ScaledValues {
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let lcm = denominator_lcm(inst.valuations().iter().flatten());
        let lcm_rat = Rational::from_integer(lcm.clone());
        let mut rows = Vec::with_capacity(inst.n_agents());
        for row in inst.valuations() {
            let mut out = Vec::with_capacity(row.len());
            for v in row {
                let scaled = (v * &lcm_rat).to_integer();
                let as_i128 = i128::try_from(&scaled).map_err(|_| Error::GuardExceeded {
                    what: "scaled value magnitude",
                    limit: i128::MAX as u128,
                    actual: u128::try_from(scaled.abs()).unwrap_or(u128::MAX),
                })?;
                out.push(as_i128);
            }
            rows.push(out);
        }
        Ok(ScaledValues { lcm, rows })
    }

    /// Converts a scaled integer back to the instance's value scale.
    pub fn unscale(&self, v: i128) -> Rational {
        Rational::new(BigInt::from(v), self.lcm.clone())
    }
}

/// Category structure stripped down to what assignment enumeration needs.
pub(crate) struct Shape {
    pub n_agents: usize,
    pub n_items: usize,
    pub cat_of: Vec<usize>,
    pub quotas: Vec<(usize, usize)>,
    pub cat_sizes: Vec<usize>,
}

impl Shape {
    pub fn of_instance(inst: &Instance) -> Self {
        Shape {
            n_agents: inst.n_agents(),
            n_items: inst.n_items(),
            cat_of: inst.category_of_items(),
            quotas: inst
                .categories()
                .iter()
                .map(|c| (c.q_minus, c.q_plus))
                .collect(),
            cat_sizes: inst.categories().iter().map(|c| c.len()).collect(),
        }
    }

    pub fn enumeration_size(&self) -> u128 {
        let mut size: u128 = 1;
        for _ in 0..self.n_items {
            size = size.saturating_mul(self.n_agents as u128);
        }
        size
    }
}

/// Walks every feasible assignment of items to agents in lexicographic
/// order of the assignment vector (item id -> agent), invoking `visit` on
/// each complete feasible assignment.
///
/// Pruning: a bundle never exceeds a category's upper quota, and a branch
/// is abandoned as soon as the remaining items of some category cannot
/// cover the bundles' outstanding lower-quota deficits.
pub(crate) fn for_each_feasible_assignment(
    shape: &Shape,
    mut visit: impl FnMut(&[usize]),
) {
    let n = shape.n_agents;
    let m = shape.n_items;
    if n == 0 {
        if m == 0 {
            visit(&[]);
        }
        return;
    }
    let n_cats = shape.cat_sizes.len();
    let mut assign = vec![0usize; m];
    let mut counts = vec![vec![0usize; n_cats]; n];
    // deficits[c]: total lower-quota shortfall across bundles for category c.
    let mut deficits: Vec<usize> = shape
        .quotas
        .iter()
        .map(|&(q_minus, _)| q_minus * n)
        .collect();
    let mut remaining: Vec<usize> = shape.cat_sizes.clone();

    fn rec(
        shape: &Shape,
        item: usize,
        assign: &mut Vec<usize>,
        counts: &mut Vec<Vec<usize>>,
        deficits: &mut Vec<usize>,
        remaining: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if item == shape.n_items {
            visit(assign);
            return;
        }
        let c = shape.cat_of[item];
        let (q_minus, q_plus) = shape.quotas[c];
        remaining[c] -= 1;
        for agent in 0..shape.n_agents {
            if counts[agent][c] >= q_plus {
                continue;
            }
            counts[agent][c] += 1;
            let fills_deficit = counts[agent][c] <= q_minus;
            if fills_deficit {
                deficits[c] -= 1;
            }
            if deficits[c] <= remaining[c] {
                assign[item] = agent;
                rec(shape, item + 1, assign, counts, deficits, remaining, visit);
            }
            if fills_deficit {
                deficits[c] += 1;
            }
            counts[agent][c] -= 1;
        }
        remaining[c] += 1;
    }

    rec(
        shape,
        0,
        &mut assign,
        &mut counts,
        &mut deficits,
        &mut remaining,
        &mut visit,
    );
}
