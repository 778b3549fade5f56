//! Exact MMS machinery for single-category bivalued instances, where every
//! item value is one of two common constants `a >= b`.
//!
//! Each agent's MMS subproblem is characterized by bundle count and the
//! numbers of `a`- and `b`-valued items left, so an exact MMS partition
//! comes from a small dynamic program, and a valid-reduction recursion
//! turns those partitions into an exact MMS allocation.

use num_traits::Zero;

use crate::error::Error;
use crate::instance::{Allocation, Instance};
use crate::ordered::{lift_allocation, to_ordered};
use crate::rational::Rational;
use crate::Result;

use super::MmsResult;

/// The two common values of a bivalued instance and each agent's count of
/// `a`-valued items.
#[derive(Debug, Clone)]
pub struct BivaluedProfile {
    pub a: Rational,
    pub b: Rational,
    pub a_counts: Vec<usize>,
}

impl BivaluedProfile {
    /// Extracts the profile, or fails when more than two distinct values
    /// occur. A constant instance yields `a = b`.
    pub fn extract(inst: &Instance) -> Result<Self> {
        let mut distinct: Vec<&Rational> = Vec::new();
        for row in inst.valuations() {
            for v in row {
                if !distinct.contains(&v) {
                    distinct.push(v);
                    if distinct.len() > 2 {
                        return Err(Error::NotBivalued);
                    }
                }
            }
        }
        let (a, b) = match distinct.len() {
            0 => (Rational::zero(), Rational::zero()),
            1 => (distinct[0].clone(), distinct[0].clone()),
            _ => {
                let hi = distinct[0].max(distinct[1]).clone();
                let lo = distinct[0].min(distinct[1]).clone();
                (hi, lo)
            }
        };
        let a_counts = inst
            .valuations()
            .iter()
            .map(|row| row.iter().filter(|v| **v == a).count())
            .collect();
        Ok(BivaluedProfile { a, b, a_counts })
    }
}

#[derive(Clone, Debug)]
enum DpVal {
    Infeasible,
    /// No bundles left and no items left: an empty min.
    Unbounded,
    Fin(Rational),
}

/// `max-min` bundle value over partitions of `n_a` items of value `a` and
/// `n_b` of value `b` into `k` bundles of sizes in `[q_minus, q_plus]`,
/// together with the per-bundle `(a, b)` counts of one maximizing
/// partition (lexicographically smallest count sequence).
fn partition_counts(
    k: usize,
    a: &Rational,
    b: &Rational,
    n_a: usize,
    n_b: usize,
    q_minus: usize,
    q_plus: usize,
) -> Result<(Rational, Vec<(usize, usize)>)> {
    let mut memo: Vec<Vec<Vec<Option<DpVal>>>> =
        vec![vec![vec![None; n_b + 1]; n_a + 1]; k + 1];

    fn solve(
        memo: &mut Vec<Vec<Vec<Option<DpVal>>>>,
        k: usize,
        a: &Rational,
        b: &Rational,
        rem_a: usize,
        rem_b: usize,
        q_minus: usize,
        q_plus: usize,
    ) -> DpVal {
        if let Some(v) = &memo[k][rem_a][rem_b] {
            return v.clone();
        }
        let result = if k == 0 {
            if rem_a == 0 && rem_b == 0 {
                DpVal::Unbounded
            } else {
                DpVal::Infeasible
            }
        } else {
            let mut best: DpVal = DpVal::Infeasible;
            for x in 0..=rem_a {
                for y in 0..=rem_b {
                    let size = x + y;
                    if size < q_minus || size > q_plus {
                        continue;
                    }
                    let child = solve(memo, k - 1, a, b, rem_a - x, rem_b - y, q_minus, q_plus);
                    let value = a * Rational::from_integer(x.into())
                        + b * Rational::from_integer(y.into());
                    let candidate = match child {
                        DpVal::Infeasible => continue,
                        DpVal::Unbounded => value,
                        DpVal::Fin(c) => value.min(c),
                    };
                    best = match best {
                        DpVal::Infeasible => DpVal::Fin(candidate),
                        DpVal::Unbounded => unreachable!("k >= 1"),
                        DpVal::Fin(cur) => DpVal::Fin(cur.max(candidate)),
                    };
                }
            }
            best
        };
        memo[k][rem_a][rem_b] = Some(result.clone());
        result
    }

    let opt = match solve(&mut memo, k, a, b, n_a, n_b, q_minus, q_plus) {
        DpVal::Fin(v) => v,
        DpVal::Unbounded => {
            // Zero bundles and zero items: the empty partition.
            return Ok((Rational::zero(), Vec::new()));
        }
        DpVal::Infeasible => {
            return Err(Error::Precondition(
                "no feasible partition exists; validate the instance first".to_string(),
            ))
        }
    };

    // Reconstruct the lexicographically smallest count sequence achieving
    // the optimum.
    let mut counts = Vec::with_capacity(k);
    let (mut rem_a, mut rem_b) = (n_a, n_b);
    for level in (1..=k).rev() {
        let mut chosen = None;
        'outer: for x in 0..=rem_a {
            for y in 0..=rem_b {
                let size = x + y;
                if size < q_minus || size > q_plus {
                    continue;
                }
                let child = solve(&mut memo, level - 1, a, b, rem_a - x, rem_b - y, q_minus, q_plus);
                let value = a * Rational::from_integer(x.into())
                    + b * Rational::from_integer(y.into());
                let achieved = match child {
                    DpVal::Infeasible => continue,
                    DpVal::Unbounded => value,
                    DpVal::Fin(c) => value.min(c),
                };
                if achieved >= opt {
                    chosen = Some((x, y));
                    break 'outer;
                }
            }
        }
        let (x, y) = chosen.expect("optimal branch must be reconstructible");
        counts.push((x, y));
        rem_a -= x;
        rem_b -= y;
    }
    Ok((opt, counts))
}

/// Exact MMS value and partition for one agent of an ordered
/// single-category bivalued instance.
///
/// Among optimal partitions, one is returned whose first bundle has size at
/// most `m/n` when `b >= 0` and at least `m/n` otherwise; some bundle of any
/// partition is on the required side of the average.
pub fn bivalued_mms_partition(inst: &Instance, agent: usize) -> Result<MmsResult> {
    if !inst.is_single_category() {
        return Err(Error::Precondition(
            "bivalued solver requires a single-category instance".to_string(),
        ));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "bivalued_mms_partition requires an ordered instance".to_string(),
        ));
    }
    if agent >= inst.n_agents() {
        return Err(Error::AgentOutOfRange {
            agent,
            agents: inst.n_agents(),
        });
    }
    let profile = BivaluedProfile::extract(inst)?;
    let cat = &inst.categories()[0];
    let n = inst.n_agents();
    let m = inst.n_items();
    let ell = profile.a_counts[agent];
    let (value, mut counts) = partition_counts(
        n,
        &profile.a,
        &profile.b,
        ell,
        m - ell,
        cat.q_minus,
        cat.q_plus,
    )?;
    designate_first_bundle(&mut counts, m, n, &profile.b);

    // In the ordered instance the agent's a-items occupy the first `ell`
    // positions; consume positions in order, bundle by bundle.
    let mut bundles = Vec::with_capacity(n);
    let (mut next_a, mut next_b) = (0usize, ell);
    for &(x, y) in &counts {
        let mut bundle = Vec::with_capacity(x + y);
        for _ in 0..x {
            bundle.push(cat.item_ids[next_a]);
            next_a += 1;
        }
        for _ in 0..y {
            bundle.push(cat.item_ids[next_b]);
            next_b += 1;
        }
        bundles.push(bundle);
    }
    Ok(MmsResult {
        value,
        partition: Allocation::new(bundles),
    })
}

/// Reorders `counts` so the first bundle's size is at most the average when
/// `b >= 0`, and at least the average otherwise.
fn designate_first_bundle(counts: &mut [(usize, usize)], m: usize, n: usize, b: &Rational) {
    let below_average = *b >= Rational::zero();
    let pick = counts.iter().position(|&(x, y)| {
        let scaled = (x + y) * n;
        if below_average {
            scaled <= m
        } else {
            scaled >= m
        }
    });
    if let Some(j) = pick {
        counts.swap(0, j);
    }
}

/// Exact MMS allocation for a single-category bivalued instance of goods,
/// chores, or mixed signs.
///
/// The instance is first brought to ordered form. The recursion repeatedly
/// takes an agent with the most `a`-valued items, computes their MMS
/// partition with the size-conditioned first bundle, hands them the
/// matching block of their `a`-items plus the costliest tail, and recurses
/// on the reduced instance. The result is lifted back to the original item
/// ids.
pub fn bivalued_exact(inst: &Instance) -> Result<Allocation> {
    if !inst.is_single_category() {
        return Err(Error::Precondition(
            "bivalued solver requires a single-category instance".to_string(),
        ));
    }
    let profile = BivaluedProfile::extract(inst)?;
    let reduction = to_ordered(inst);
    let ordered = &reduction.ordered_instance;
    let cat = &ordered.categories()[0];
    let (q_minus, q_plus) = (cat.q_minus, cat.q_plus);
    let a = &profile.a;
    let b = &profile.b;

    // Remaining positions into the ordered category, always ascending, and
    // remaining original agent ids.
    let mut remaining: Vec<usize> = (0..ordered.n_items()).collect();
    let mut agents: Vec<usize> = (0..ordered.n_agents()).collect();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); ordered.n_agents()];

    while !agents.is_empty() {
        let k = agents.len();
        // Count each remaining agent's a-items among the remaining
        // positions; in the ordered instance those are value-a positions.
        let ells: Vec<usize> = agents
            .iter()
            .map(|&i| {
                remaining
                    .iter()
                    .filter(|&&pos| ordered.value(i, cat.item_ids[pos]) == a)
                    .count()
            })
            .collect();
        let star = ells
            .iter()
            .enumerate()
            .max_by(|(ia, la), (ib, lb)| la.cmp(lb).then(ib.cmp(ia)))
            .map(|(idx, _)| idx)
            .unwrap();
        let ell_star = ells[star];
        let total = remaining.len();
        let (_, mut counts) =
            partition_counts(k, a, b, ell_star, total - ell_star, q_minus, q_plus)?;
        designate_first_bundle(&mut counts, total, k, b);
        let (p_a, p_b) = counts[0];

        // B: the p_a least valuable of i*'s a-items plus the p_b costliest
        // tail items of the remaining ordered instance.
        let mut take: Vec<usize> = Vec::with_capacity(p_a + p_b);
        take.extend_from_slice(&remaining[ell_star - p_a..ell_star]);
        take.extend_from_slice(&remaining[total - p_b..total]);

        let agent = agents.remove(star);
        bundles[agent] = take.iter().map(|&pos| cat.item_ids[pos]).collect();
        let taken: std::collections::BTreeSet<usize> = take.into_iter().collect();
        remaining.retain(|pos| !taken.contains(pos));
    }
    debug_assert!(remaining.is_empty());

    let ordered_alloc = Allocation::new(bundles);
    lift_allocation(&reduction, &ordered_alloc)
}
