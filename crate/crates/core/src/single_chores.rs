//! Bag-filling algorithm for single-category ordered instances of chores,
//! guaranteeing every agent at least `(3n-1)/(2n)` times their (negative)
//! MMS cost.
//!
//! The mirror image of the goods routine: bags are kept in decreasing size
//! order, the special items are the `n` most costly ones, and there is no
//! valid reduction; a pigeonhole bundle from the costly tail stands in for
//! it inside the `μ̂` bound.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::instance::{validate_instance, Allocation, Instance, Kind};
use crate::rational::{rat, ratio, Rational};
use crate::single_goods::BagState;
use crate::{Result, RunOptions};

/// Result of a run with the thresholds the report needs.
#[derive(Debug, Clone)]
pub struct ChoresRun {
    pub allocation: Allocation,
    pub alpha: Rational,
    pub mu_hat: Vec<Rational>,
}

/// The guarantee of the algorithm: `(3n-1)/(2n)`, the bottom of the
/// admissible α band `[(3 - 1/max{n,1})/2, 3/2]`.
pub fn default_alpha(n: usize) -> Rational {
    let n = n.max(1) as i64;
    ratio(3 * n - 1, 2 * n)
}

fn alpha_band(n: usize) -> (Rational, Rational) {
    (default_alpha(n), ratio(3, 2))
}

/// Computes a feasible allocation with `v_i(A_i) >= α·μ_i` for every agent
/// of a single-category ordered instance of chores (values non-positive).
pub fn approx_chores(inst: &Instance, alpha: &Rational) -> Result<Allocation> {
    Ok(approx_chores_run(inst, alpha, RunOptions::default())?.allocation)
}

pub fn approx_chores_run(inst: &Instance, alpha: &Rational, opts: RunOptions) -> Result<ChoresRun> {
    check_preconditions(inst)?;
    let n = inst.n_agents();
    let (lo, hi) = alpha_band(n);
    if !(alpha >= &lo && alpha <= &hi) {
        return Err(Error::Precondition(format!(
            "alpha {} outside the admissible band [{}, {}]",
            alpha, lo, hi
        )));
    }
    let cat = &inst.categories()[0];
    let (q_minus, q_plus) = (cat.q_minus, cat.q_plus);
    let ids = &cat.item_ids;
    let n_loc = n;
    let m = ids.len();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mu_hat_report: Vec<Rational> = vec![Rational::default(); n];

    if m <= n_loc {
        // Trivial case: one chore each; the exact MMS is the value of the
        // most costly chore (zero when there are none).
        for agent in 0..n_loc {
            if agent < m {
                bundles[agent].push(ids[agent]);
            }
            mu_hat_report[agent] = if m > 0 {
                inst.value(agent, ids[m - 1]).clone()
            } else {
                Rational::default()
            };
        }
        return Ok(ChoresRun {
            allocation: Allocation::new(bundles),
            alpha: alpha.clone(),
            mu_hat: mu_hat_report,
        });
    }

    let (sizes, mut bags) = init_bags_positions(m, n_loc, q_minus, q_plus)?;
    let value_at = |agent: usize, pos: usize| -> &Rational { inst.value(agent, ids[pos]) };
    let mu_hat = mu_hat_chores(m, n_loc, &bags, &value_at);
    let _ = sizes;

    if opts.check_invariants {
        check_chores_positions(
            m,
            n_loc,
            (q_minus, q_plus),
            n_loc,
            &bags,
            &[],
            &(0..n_loc).collect::<Vec<_>>(),
            &mu_hat,
            alpha,
            &value_at,
        )
        .map_err(|(label, detail)| Error::InvariantViolated { label, detail })?;
    }

    // Thresholds: keep updating while someone still tolerates the bag at
    // (α - 1/2)·μ̂; assign once someone tolerates it at α·μ̂.
    let hi_threshold: Vec<Rational> = mu_hat
        .iter()
        .map(|mu| (alpha - ratio(1, 2)) * mu)
        .collect();
    let lo_threshold: Vec<Rational> = mu_hat.iter().map(|mu| alpha * mu).collect();

    let mut remaining: Vec<usize> = (0..n_loc).collect();
    let mut assigned: Vec<(usize, BTreeSet<usize>)> = Vec::new();

    for t in (1..=n_loc).rev() {
        let snapshot = bags.clone();
        let mut bag = bags.pop().expect("t bags remain");
        let special_t = m - n_loc + t - 1;
        let mut bag_values: Vec<Rational> = (0..n_loc)
            .map(|agent| {
                bag.iter()
                    .map(|&pos| value_at(agent, pos))
                    .fold(Rational::default(), |acc, v| acc + v)
            })
            .collect();

        for k_idx in (0..t - 1).rev() {
            let special_k = m - n_loc + k_idx;
            loop {
                let someone_tolerates = remaining
                    .iter()
                    .any(|&i| bag_values[i] >= hi_threshold[i]);
                if !someone_tolerates {
                    break;
                }
                if equal_excluding(&bag, special_t, &snapshot[k_idx], special_k) {
                    break;
                }
                // Least valuable (most costly) item of B_k besides its
                // special item: the largest position.
                let g = *bags[k_idx]
                    .iter()
                    .rev()
                    .find(|&&pos| pos != special_k)
                    .ok_or_else(|| Error::Internal("donor bag has only its special item".into()))?;
                if bag.len() < snapshot[k_idx].len() {
                    // Move g into B.
                    bags[k_idx].remove(&g);
                    bag.insert(g);
                    for agent in 0..n_loc {
                        let v = value_at(agent, g).clone();
                        bag_values[agent] += v;
                    }
                } else {
                    // Swap: the most valuable (least costly) item of B
                    // besides g_t goes back to B_k.
                    let h = *bag
                        .iter()
                        .find(|&&pos| pos != special_t)
                        .ok_or_else(|| Error::Internal("bag has only its special item".into()))?;
                    bag.remove(&h);
                    bag.insert(g);
                    bags[k_idx].remove(&g);
                    bags[k_idx].insert(h);
                    for agent in 0..n_loc {
                        let delta = value_at(agent, g).clone() - value_at(agent, h);
                        bag_values[agent] += delta;
                    }
                }
            }
        }

        let chosen = remaining
            .iter()
            .position(|&i| bag_values[i] >= lo_threshold[i])
            .ok_or_else(|| {
                Error::Internal(format!(
                    "no remaining agent accepts the bag at round t={t}; \
                     the invariants exclude this for in-band alpha"
                ))
            })?;
        let local = remaining.remove(chosen);
        bundles[local] = bag.iter().map(|&pos| ids[pos]).collect();
        mu_hat_report[local] = mu_hat[local].clone();
        assigned.push((local, bag));

        if opts.check_invariants {
            check_chores_positions(
                m,
                n_loc,
                (q_minus, q_plus),
                t - 1,
                &bags,
                &assigned,
                &remaining,
                &mu_hat,
                alpha,
                &value_at,
            )
            .map_err(|(label, detail)| Error::InvariantViolated { label, detail })?;
        }
    }

    Ok(ChoresRun {
        allocation: Allocation::new(bundles),
        alpha: alpha.clone(),
        mu_hat: mu_hat_report,
    })
}

fn check_preconditions(inst: &Instance) -> Result<()> {
    if inst.kind() != Kind::Chores {
        return Err(Error::Precondition(
            "approx_chores requires kind chores".to_string(),
        ));
    }
    if !inst.is_single_category() {
        return Err(Error::Precondition(
            "approx_chores requires a single-category instance".to_string(),
        ));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "approx_chores requires an ordered instance; apply to_ordered first".to_string(),
        ));
    }
    let report = validate_instance(inst);
    if !report.ok() {
        return Err(Error::Precondition(format!(
            "invalid instance: {}",
            report.violations.join("; ")
        )));
    }
    Ok(())
}

/// Bag sizes `b_n..b_1` and initial bags for chores: bag `k` holds the
/// special item `g_{m-n+k}` plus a block of the most costly fillers, and
/// sizes descend from `b_1` to `b_n`.
fn init_bags_positions(
    m: usize,
    n: usize,
    q_minus: usize,
    q_plus: usize,
) -> Result<(Vec<usize>, Vec<BTreeSet<usize>>)> {
    if m <= n {
        return Err(Error::Precondition(
            "bag initialization needs more items than agents".to_string(),
        ));
    }
    let mut sizes = vec![0usize; n];
    let mut suffix: i64 = 0;
    for k in (1..=n).rev() {
        let room = m as i64 - suffix - (k as i64 - 1) * q_plus as i64;
        let b = (q_minus as i64).max(1).max(room);
        if b > q_plus as i64 {
            return Err(Error::Internal(format!(
                "bag size b_{k} = {b} above q⁺ = {q_plus}; quota inequality must be violated"
            )));
        }
        sizes[k - 1] = b as usize;
        suffix += b;
    }
    if suffix != m as i64 {
        return Err(Error::Internal(format!(
            "bag sizes sum to {suffix}, expected {m}"
        )));
    }

    let mut bags = vec![BTreeSet::new(); n];
    let mut s_after = 0usize;
    for k in (1..=n).rev() {
        let mut bag = BTreeSet::new();
        bag.insert(m - n + k - 1);
        let s_k = s_after + sizes[k - 1] - 1;
        for j in s_after + 1..=s_k {
            bag.insert(j - 1);
        }
        s_after = s_k;
        bags[k - 1] = bag;
    }
    Ok((sizes, bags))
}

/// `μ̂_i = min( {2·v_i(g_{m-n})} ∪ {suffix averages of bag values} )`.
fn mu_hat_chores<'a>(
    m: usize,
    n_local: usize,
    bags: &[BTreeSet<usize>],
    value_at: &impl Fn(usize, usize) -> &'a Rational,
) -> Vec<Rational> {
    (0..n_local)
        .map(|agent| {
            let mut best = rat(2) * value_at(agent, m - n_local - 1);
            let mut suffix = Rational::default();
            for r in (1..=bags.len()).rev() {
                for &pos in &bags[r - 1] {
                    suffix += value_at(agent, pos);
                }
                let avg = &suffix / rat((bags.len() - r + 1) as i64);
                best = best.min(avg);
            }
            best
        })
        .collect()
}

fn equal_excluding(
    a: &BTreeSet<usize>,
    skip_a: usize,
    b: &BTreeSet<usize>,
    skip_b: usize,
) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut lhs = a.iter().filter(|&&p| p != skip_a);
    let mut rhs = b.iter().filter(|&&p| p != skip_b);
    loop {
        match (lhs.next(), rhs.next()) {
            (None, None) => return true,
            (Some(x), Some(y)) if x == y => continue,
            _ => return false,
        }
    }
}

/// The pigeonhole bundle of Lemma-style tail items: `d+1` consecutive items
/// from the costly end of category `cat_index`, positions
/// `|C|-j` for `d(n-1) <= j <= dn` (1-based). Satisfies
/// `v_i(B) >= μ_i` for every agent of an ordered chores instance.
pub fn chores_pigeonhole_bundle(inst: &Instance, cat_index: usize, d: usize) -> Result<Vec<usize>> {
    if inst.kind() != Kind::Chores {
        return Err(Error::Precondition(
            "pigeonhole bundle requires a chores instance".to_string(),
        ));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "pigeonhole bundle requires an ordered instance".to_string(),
        ));
    }
    let n = inst.n_agents();
    let cat = inst
        .categories()
        .get(cat_index)
        .ok_or_else(|| Error::Precondition(format!("no category {cat_index}")))?;
    let size = cat.len();
    if size < d * n + 1 {
        return Err(Error::Precondition(format!(
            "category of size {size} cannot host the d={d} pigeonhole bundle for {n} agents"
        )));
    }
    // j ranges over d(n-1) .. dn, so the bundle has d+1 items.
    let bundle: Vec<usize> = (d * (n.saturating_sub(1))..=d * n)
        .map(|j| cat.item_ids[size - 1 - j])
        .collect();
    Ok(bundle)
}

/// Checks the chores variant of Conditions (C1) to (C6) at boundary `t`.
pub fn check_invariants_chores(
    inst: &Instance,
    state: &BagState,
    assigned: &[(usize, Vec<usize>)],
    alpha: &Rational,
) -> std::result::Result<(), (&'static str, String)> {
    let cat = &inst.categories()[0];
    let m = cat.item_ids.len();
    let mut pos_of = vec![0usize; m];
    for (pos, &id) in cat.item_ids.iter().enumerate() {
        pos_of[id] = pos;
    }
    let bags: Vec<BTreeSet<usize>> = state
        .bags
        .iter()
        .map(|bag| bag.iter().map(|&id| pos_of[id]).collect())
        .collect();
    let assigned_pos: Vec<(usize, BTreeSet<usize>)> = assigned
        .iter()
        .map(|(agent, bundle)| (*agent, bundle.iter().map(|&id| pos_of[id]).collect()))
        .collect();
    let remaining: Vec<usize> = state.remaining_agents.iter().copied().collect();
    let value_at = |agent: usize, pos: usize| -> &Rational { inst.value(agent, cat.item_ids[pos]) };
    check_chores_positions(
        m,
        inst.n_agents(),
        (cat.q_minus, cat.q_plus),
        state.t,
        &bags,
        &assigned_pos,
        &remaining,
        &state.mu_hat,
        alpha,
        &value_at,
    )
}

#[allow(clippy::too_many_arguments)]
fn check_chores_positions<'a>(
    m: usize,
    n_local: usize,
    (q_minus, q_plus): (usize, usize),
    t: usize,
    bags: &[BTreeSet<usize>],
    assigned: &[(usize, BTreeSet<usize>)],
    remaining: &[usize],
    mu_hat: &[Rational],
    alpha: &Rational,
    value_at: &impl Fn(usize, usize) -> &'a Rational,
) -> std::result::Result<(), (&'static str, String)> {
    debug_assert_eq!(bags.len(), t);
    let mut seen = vec![false; m];
    let mut total = 0usize;
    for set in bags.iter().chain(assigned.iter().map(|(_, b)| b)) {
        for &pos in set {
            if seen[pos] {
                return Err(("C1", format!("item position {pos} occurs twice")));
            }
            seen[pos] = true;
            total += 1;
        }
    }
    if total != m {
        return Err(("C2", format!("{total} of {m} items covered")));
    }
    // C3: sizes descend within the quota window.
    for (k, bag) in bags.iter().enumerate() {
        if bag.len() < q_minus || bag.len() > q_plus {
            return Err((
                "C3",
                format!("|B_{}| = {} outside [{q_minus}, {q_plus}]", k + 1, bag.len()),
            ));
        }
        if k + 1 < t && bags[k].len() < bags[k + 1].len() {
            return Err(("C3", format!("|B_{}| < |B_{}|", k + 1, k + 2)));
        }
    }
    // C4: bag k's only costly-tail item is g_{m-n+k}.
    for (k, bag) in bags.iter().enumerate() {
        let tail: Vec<usize> = bag
            .iter()
            .copied()
            .filter(|&p| p >= m - n_local)
            .collect();
        if tail != [m - n_local + k] {
            return Err((
                "C4",
                format!(
                    "B_{} ∩ costly tail = {:?}, expected [{}]",
                    k + 1,
                    tail,
                    m - n_local + k
                ),
            ));
        }
    }
    // C5: filler values ordered across consecutive bags.
    for &agent in remaining {
        let mut prev_max: Option<&Rational> = None;
        for (k, bag) in bags.iter().enumerate() {
            let special = m - n_local + k;
            let rest: Vec<&Rational> = bag
                .iter()
                .filter(|&&p| p != special)
                .map(|&p| value_at(agent, p))
                .collect();
            if rest.is_empty() {
                continue;
            }
            let min = rest.iter().copied().min().unwrap();
            let max = rest.iter().copied().max().unwrap();
            if let Some(pm) = prev_max {
                if pm > min {
                    return Err((
                        "C5",
                        format!(
                            "agent {agent}: bag {} holds a cheaper filler than bag {}",
                            k,
                            k + 1
                        ),
                    ));
                }
            }
            prev_max = Some(max);
        }
    }
    // C6: suffix bag values with the chores slack term.
    let slack = (ratio(3, 2) - alpha) * rat((n_local - t) as i64);
    for &agent in remaining {
        let mut suffix = Rational::default();
        for r in (1..=t).rev() {
            for &pos in &bags[r - 1] {
                suffix += value_at(agent, pos);
            }
            let required = (rat((t - r + 1) as i64) + &slack) * &mu_hat[agent];
            if suffix < required {
                return Err((
                    "C6",
                    format!(
                        "agent {agent}, suffix r={r}: value {} < required {}",
                        suffix, required
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Initial chores bag state for tests and the invariant hook.
pub fn init_bags_chores(inst: &Instance) -> Result<BagState> {
    check_preconditions(inst)?;
    let n = inst.n_agents();
    let cat = &inst.categories()[0];
    let (sizes, bags) = init_bags_positions(inst.n_items(), n, cat.q_minus, cat.q_plus)?;
    let value_at = |agent: usize, pos: usize| -> &Rational { inst.value(agent, cat.item_ids[pos]) };
    let mu_hat = mu_hat_chores(inst.n_items(), n, &bags, &value_at);
    Ok(BagState {
        t: n,
        bags: bags
            .into_iter()
            .map(|bag| bag.into_iter().map(|pos| cat.item_ids[pos]).collect())
            .collect(),
        remaining_agents: (0..n).collect(),
        mu_hat,
        bag_sizes: sizes,
    })
}
