//! Brute-force oracles: exact MMS by exhaustive partition enumeration and
//! the best achievable approximation factor over all feasible allocations.

use num_traits::Zero;

use crate::error::Error;
use crate::instance::{Allocation, Instance, Kind};
use crate::rational::Rational;
use crate::Result;

use super::{
    for_each_feasible_assignment, MmsResult, ScaledValues, Shape, DEFAULT_BRUTEFORCE_GUARD,
};

/// Exact MMS value and a witnessing partition for one agent, by exhaustive
/// enumeration with the default tractability guard.
pub fn mms_bruteforce(inst: &Instance, agent: usize) -> Result<MmsResult> {
    mms_bruteforce_guarded(inst, agent, DEFAULT_BRUTEFORCE_GUARD)
}

/// As [`mms_bruteforce`] with an explicit cap on the `n^m` enumeration.
///
/// Among maximizing partitions, the one with the lexicographically smallest
/// assignment vector is returned. Bundles of a partition are
/// interchangeable, so the search only visits assignments whose bundle
/// labels appear in first-use order; the lexicographically smallest optimum
/// always has that form.
pub fn mms_bruteforce_guarded(inst: &Instance, agent: usize, guard: u128) -> Result<MmsResult> {
    if agent >= inst.n_agents() {
        return Err(Error::AgentOutOfRange {
            agent,
            agents: inst.n_agents(),
        });
    }
    let shape = Shape::of_instance(inst);
    let size = shape.enumeration_size();
    if size > guard {
        return Err(Error::GuardExceeded {
            what: "brute-force enumeration n^m (try the identical-agent DP or a smaller instance)",
            limit: guard,
            actual: size,
        });
    }
    let scaled = ScaledValues::from_instance(inst)?;
    let values = &scaled.rows[agent];
    let n = shape.n_agents;
    let m = shape.n_items;
    let n_cats = shape.cat_sizes.len();

    let mut best: Option<(i128, Vec<usize>)> = None;
    let mut assign = vec![0usize; m];
    let mut bundle_vals = vec![0i128; n];
    let mut counts = vec![vec![0usize; n_cats]; n];
    let mut deficits: Vec<usize> = shape.quotas.iter().map(|&(q, _)| q * n).collect();
    let mut remaining_cat: Vec<usize> = shape.cat_sizes.clone();
    // Suffix sums of positive (goods) parts for the optimistic bound.
    let mut pos_suffix = vec![0i128; m + 1];
    for g in (0..m).rev() {
        pos_suffix[g] = pos_suffix[g + 1] + values[g].max(0);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        shape: &Shape,
        values: &[i128],
        pos_suffix: &[i128],
        item: usize,
        used: usize,
        assign: &mut Vec<usize>,
        bundle_vals: &mut Vec<i128>,
        counts: &mut Vec<Vec<usize>>,
        deficits: &mut Vec<usize>,
        remaining_cat: &mut Vec<usize>,
        best: &mut Option<(i128, Vec<usize>)>,
    ) {
        let n = shape.n_agents;
        if item == shape.n_items {
            let min = *bundle_vals.iter().min().expect("n >= 1");
            if best.as_ref().map_or(true, |(b, _)| min > *b) {
                *best = Some((min, assign.clone()));
            }
            return;
        }
        // Optimistic bound: every bundle could still gain all remaining
        // positive value; negative items only lower the minimum.
        if let Some((b, _)) = best {
            let ub = bundle_vals.iter().map(|v| v + pos_suffix[item]).min().unwrap();
            if ub <= *b {
                return;
            }
        }
        let c = shape.cat_of[item];
        let (q_minus, q_plus) = shape.quotas[c];
        remaining_cat[c] -= 1;
        let bundle_cap = (used + 1).min(n);
        for k in 0..bundle_cap {
            if counts[k][c] >= q_plus {
                continue;
            }
            counts[k][c] += 1;
            let fills = counts[k][c] <= q_minus;
            if fills {
                deficits[c] -= 1;
            }
            if deficits[c] <= remaining_cat[c] {
                assign[item] = k;
                bundle_vals[k] += values[item];
                rec(
                    shape,
                    values,
                    pos_suffix,
                    item + 1,
                    used.max(k + 1),
                    assign,
                    bundle_vals,
                    counts,
                    deficits,
                    remaining_cat,
                    best,
                );
                bundle_vals[k] -= values[item];
            }
            if fills {
                deficits[c] += 1;
            }
            counts[k][c] -= 1;
        }
        remaining_cat[c] += 1;
    }

    rec(
        &shape,
        values,
        &pos_suffix,
        0,
        0,
        &mut assign,
        &mut bundle_vals,
        &mut counts,
        &mut deficits,
        &mut remaining_cat,
        &mut best,
    );

    let (value, assign) = best.ok_or_else(|| {
        Error::Precondition("no feasible partition exists; validate the instance first".into())
    })?;
    let mut bundles = vec![Vec::new(); n];
    for (g, &k) in assign.iter().enumerate() {
        bundles[k].push(g);
    }
    Ok(MmsResult {
        value: scaled.unscale(value),
        partition: Allocation::new(bundles),
    })
}

/// How good an allocation can be, relative to the agents' MMS values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaBound {
    /// Every α is achievable (e.g. all MMS values are zero for goods).
    Any,
    Value(Rational),
}

/// Result of [`best_alpha`].
#[derive(Debug, Clone)]
pub struct BestAlpha {
    pub alpha: AlphaBound,
    pub allocation: Allocation,
    pub mms_values: Vec<Rational>,
}

/// The best approximation factor any feasible allocation can achieve.
///
/// For goods this maximizes `min_i v_i(A_i)/μ_i` over feasible allocations
/// (agents with `μ_i = 0` impose no constraint). For chores the ordering is
/// inverted: the result is the smallest α such that some feasible
/// allocation satisfies `v_i(A_i) >= α·μ_i` for all agents.
pub fn best_alpha(inst: &Instance) -> Result<BestAlpha> {
    best_alpha_guarded(inst, DEFAULT_BRUTEFORCE_GUARD)
}

pub fn best_alpha_guarded(inst: &Instance, guard: u128) -> Result<BestAlpha> {
    let maximize = match inst.kind() {
        Kind::Goods => true,
        Kind::Chores => false,
        Kind::Mixed => {
            return Err(Error::Precondition(
                "best_alpha requires a goods or chores instance".to_string(),
            ))
        }
    };
    let shape = Shape::of_instance(inst);
    let size = shape.enumeration_size();
    if size > guard {
        return Err(Error::GuardExceeded {
            what: "best-alpha enumeration n^m",
            limit: guard,
            actual: size,
        });
    }
    let mms = super::mms_values(inst)?;
    let scaled = ScaledValues::from_instance(inst)?;
    // μ scaled to the same integer grid as the values.
    let mu_scaled: Vec<Rational> = mms
        .iter()
        .map(|mu| mu * Rational::from_integer(scaled.lcm.clone()))
        .collect();

    let n = inst.n_agents();
    // (quality, assignment): for goods quality is the min ratio (None =
    // unbounded, i.e. every constrained agent satisfied trivially); for
    // chores it is the max needed alpha (None = no agent constrains it).
    let mut best: Option<(Option<Rational>, Vec<usize>)> = None;
    let mut feasible_unconstrained: Option<Vec<usize>> = None;

    for_each_feasible_assignment(&shape, |assign| {
        let mut bundle_vals = vec![0i128; n];
        for (g, &i) in assign.iter().enumerate() {
            bundle_vals[i] += scaled.rows[i][g];
        }
        let mut quality: Option<Rational> = None;
        let mut impossible = false;
        for i in 0..n {
            let mu = &mu_scaled[i];
            let v = Rational::from_integer(bundle_vals[i].into());
            if mu.is_zero() {
                if maximize {
                    // Goods: v >= α·0 holds for every α.
                    continue;
                }
                // Chores: v = 0 imposes nothing; v < 0 admits no α at all.
                if !v.is_zero() {
                    impossible = true;
                    break;
                }
                continue;
            }
            let ratio = v / mu;
            quality = Some(match quality {
                None => ratio,
                Some(q) => {
                    if maximize {
                        q.min(ratio)
                    } else {
                        q.max(ratio)
                    }
                }
            });
        }
        if impossible {
            return;
        }
        match quality {
            None => {
                if feasible_unconstrained.is_none() {
                    feasible_unconstrained = Some(assign.to_vec());
                }
            }
            Some(q) => {
                let better = match &best {
                    None => true,
                    Some((None, _)) => false,
                    Some((Some(cur), _)) =>

                        if maximize { q > *cur } else { q < *cur },
                };
                if better {
                    best = Some((Some(q), assign.to_vec()));
                }
            }
        }
    });

    // An allocation leaving every agent unconstrained beats any finite one.
    if let Some(assign) = feasible_unconstrained {
        let alloc = assignment_to_allocation(&assign, n);
        return Ok(BestAlpha {
            alpha: AlphaBound::Any,
            allocation: alloc,
            mms_values: mms,
        });
    }
    match best {
        Some((Some(alpha), assign)) => Ok(BestAlpha {
            alpha: AlphaBound::Value(alpha),
            allocation: assignment_to_allocation(&assign, n),
            mms_values: mms,
        }),
        _ => Err(Error::Precondition(
            "no feasible allocation exists; validate the instance first".to_string(),
        )),
    }
}

fn assignment_to_allocation(assign: &[usize], n: usize) -> Allocation {
    let mut bundles = vec![Vec::new(); n];
    for (g, &i) in assign.iter().enumerate() {
        bundles[i].push(g);
    }
    Allocation::new(bundles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn goods(n: usize, values: Vec<Vec<i64>>, q: (usize, usize)) -> Instance {
        let vals = values
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::single_category(n, vals, q.0, q.1, Kind::Goods).unwrap()
    }

    #[test]
    fn mms_on_forced_partitions() {
        // Only splits of sizes (2,2) are feasible; μ = 3 via {g0,g3}/{g1,g2}.
        let inst = goods(2, vec![vec![3, 2, 1, 1]; 2], (2, 2));
        let res = mms_bruteforce(&inst, 0).unwrap();
        assert_eq!(res.value, rat(3));
        let min_bundle = res
            .partition
            .bundles
            .iter()
            .map(|b| inst.bundle_value(0, b).unwrap())
            .min()
            .unwrap();
        assert_eq!(min_bundle, rat(3));
        assert!(inst.is_feasible_allocation(&res.partition).unwrap());

        // With q = (1,1) and two items, μ is the smaller item value.
        let inst = goods(2, vec![vec![5, 2]; 2], (1, 1));
        assert_eq!(mms_bruteforce(&inst, 0).unwrap().value, rat(2));
    }

    #[test]
    fn mms_respects_guard() {
        let inst = goods(2, vec![vec![1; 10]; 2], (0, 10));
        assert!(matches!(
            mms_bruteforce_guarded(&inst, 0, 100),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn mms_for_chores_is_nonpositive() {
        let vals = vec![vec![rat(-2), rat(-1), rat(-3), rat(0)]; 2];
        let inst = Instance::single_category(2, vals, 2, 2, Kind::Chores).unwrap();
        let res = mms_bruteforce(&inst, 0).unwrap();
        assert_eq!(res.value, rat(-3));
    }

    #[test]
    fn best_alpha_is_one_for_identical_agents() {
        let inst = goods(2, vec![vec![3, 2, 1, 1]; 2], (2, 2));
        let res = best_alpha(&inst).unwrap();
        assert_eq!(res.alpha, AlphaBound::Value(rat(1)));
    }

    #[test]
    fn best_alpha_handles_all_zero_goods() {
        let inst = goods(2, vec![vec![0, 0]; 2], (1, 1));
        let res = best_alpha(&inst).unwrap();
        assert_eq!(res.alpha, AlphaBound::Any);
    }

    #[test]
    fn best_alpha_chores_minimizes_needed_factor() {
        let vals = vec![vec![rat(-1), rat(-1), rat(-1), rat(-1)]; 2];
        let inst = Instance::single_category(2, vals, 0, 4, Kind::Chores).unwrap();
        let res = best_alpha(&inst).unwrap();
        // μ = -2 each; a 2/2 split needs exactly α = 1.
        assert_eq!(res.alpha, AlphaBound::Value(rat(1)));
    }
}
