//! Bag-filling algorithm for single-category ordered instances of goods,
//! guaranteeing every agent a `2n/(3n-1)` fraction of their MMS.
//!
//! The algorithm first packs all items into `n` bags whose sizes are the
//! lexicographically minimal feasible ladder, derives per-agent MMS upper
//! bounds `μ̂` from suffix averages of the bag values, peels off agents via
//! valid reductions while the two items `{g_n, g_{n+1}}` are valuable
//! enough for someone, and finally runs `n` rounds of move/swap updates
//! that shrink one bag at a time until a remaining agent accepts it.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::instance::{validate_instance, Allocation, Instance, Kind};
use crate::rational::{rat, ratio, Rational};
use crate::{Result, RunOptions};

/// The evolving bag machinery: bags `B_1..B_t`, the remaining agents, and
/// the per-agent thresholds.
#[derive(Debug, Clone)]
pub struct BagState {
    /// Remaining-round counter.
    pub t: usize,
    /// Bags `B_1..B_t` as sets of item ids.
    pub bags: Vec<BTreeSet<usize>>,
    /// Agents not yet assigned a bundle.
    pub remaining_agents: BTreeSet<usize>,
    /// Per-agent `μ̂`; empty until computed from the initial bags.
    pub mu_hat: Vec<Rational>,
    /// Initial bag sizes `b_1..b_n`.
    pub bag_sizes: Vec<usize>,
}

/// Result of a run with the data needed for reports: which `μ̂` threshold
/// was in force when each agent's bundle was assigned.
#[derive(Debug, Clone)]
pub struct GoodsRun {
    pub allocation: Allocation,
    pub alpha: Rational,
    pub mu_hat: Vec<Rational>,
}

/// The guarantee of the algorithm: `2n/(3n-1)`, the top of the admissible
/// α band `[2/3, 2/(3 - 1/max{n,1})]`.
pub fn default_alpha(n: usize) -> Rational {
    let n = n.max(1) as i64;
    ratio(2 * n, 3 * n - 1)
}

fn alpha_band(n: usize) -> (Rational, Rational) {
    (ratio(2, 3), default_alpha(n))
}

/// Computes a feasible allocation with `v_i(A_i) >= α·μ_i` for every agent
/// of a single-category ordered instance of goods.
pub fn approx_goods(inst: &Instance, alpha: &Rational) -> Result<Allocation> {
    Ok(approx_goods_run(inst, alpha, RunOptions::default())?.allocation)
}

/// As [`approx_goods`], returning the per-agent thresholds and honoring
/// [`RunOptions::check_invariants`].
pub fn approx_goods_run(inst: &Instance, alpha: &Rational, opts: RunOptions) -> Result<GoodsRun> {
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
    // Remaining items in ordered (non-increasing value) order, and the
    // remaining original agent indices, both shrinking across reductions.
    let mut ids: Vec<usize> = cat.item_ids.clone();
    let mut agents: Vec<usize> = (0..n).collect();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mu_hat_report: Vec<Rational> = vec![Rational::default(); n];

    loop {
        let k = agents.len();
        let m = ids.len();
        if m <= k {
            // Trivial case: the j-th remaining agent takes the j-th item.
            // The exact MMS here is v(g_k) when m = k and 0 otherwise.
            for (j, &agent) in agents.iter().enumerate() {
                if j < m {
                    bundles[agent].push(ids[j]);
                }
                mu_hat_report[agent] = if m == k {
                    inst.value(agent, ids[k - 1]).clone()
                } else {
                    Rational::default()
                };
            }
            break;
        }

        let (sizes, bags) = init_bags_positions(m, k, q_minus, q_plus)?;
        let value_at =
            |agent: usize, pos: usize| -> &Rational { inst.value(agents[agent], ids[pos]) };
        let mu_hat = mu_hat_from_bags(&bags, k, &value_at);

        if opts.check_invariants {
            check_goods_positions(
                m,
                k,
                (q_minus, q_plus),
                k,
                &bags,
                &[],
                &(0..k).collect::<Vec<_>>(),
                &mu_hat,
                alpha,
                &value_at,
            )
            .map_err(|(label, detail)| Error::InvariantViolated { label, detail })?;
        }

        // Valid reduction: someone values {g_k, g_{k+1}} at α·μ̂ or more.
        let pair = [k - 1, k];
        let reducer = (0..k).find(|&i| {
            let v = value_at(i, pair[0]) + value_at(i, pair[1]);
            v >= alpha * &mu_hat[i]
        });
        if let Some(local_star) = reducer {
            let positions = reduction_positions(m, k, q_minus, q_plus)?;
            let agent = agents.remove(local_star);
            mu_hat_report[agent] = mu_hat[local_star].clone();
            let taken: BTreeSet<usize> = positions.into_iter().collect();
            bundles[agent] = taken.iter().map(|&p| ids[p]).collect();
            let mut next_ids = Vec::with_capacity(m - taken.len());
            for (pos, &id) in ids.iter().enumerate() {
                if !taken.contains(&pos) {
                    next_ids.push(id);
                }
            }
            ids = next_ids;
            continue;
        }

        // Irreducible: run the main move/swap rounds.
        let _ = sizes;
        main_rounds(
            inst,
            &ids,
            &agents,
            bags,
            &mu_hat,
            alpha,
            (q_minus, q_plus),
            opts,
            &mut bundles,
            &mut mu_hat_report,
        )?;
        break;
    }

    Ok(GoodsRun {
        allocation: Allocation::new(bundles),
        alpha: alpha.clone(),
        mu_hat: mu_hat_report,
    })
}

fn check_preconditions(inst: &Instance) -> Result<()> {
    if inst.kind() != Kind::Goods {
        return Err(Error::Precondition(
            "approx_goods requires kind goods".to_string(),
        ));
    }
    if !inst.is_single_category() {
        return Err(Error::Precondition(
            "approx_goods requires a single-category instance".to_string(),
        ));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "approx_goods requires an ordered instance; apply to_ordered first".to_string(),
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

/// Bag sizes `b_n..b_1` (lexicographically minimal feasible ladder) and the
/// initial bags over item positions `0..m-1`. Requires `m > n`.
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
    let lower_each = q_minus.max(1);
    let mut sizes = vec![0usize; n];
    let mut suffix: i64 = 0;
    for k in (1..=n).rev() {
        let room = m as i64 - suffix - (k as i64 - 1) * lower_each as i64;
        let b = (q_plus as i64).min(room);
        if b < lower_each as i64 {
            return Err(Error::Internal(format!(
                "bag size b_{k} = {b} below {lower_each}; quota inequality must be violated"
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

    // Bag k holds g_k plus the block of items g_{n+j} for
    // j in (S_{k+1}, S_k], where S_k sums (b_{k'} - 1) over k' >= k.
    let mut bags = vec![BTreeSet::new(); n];
    let mut s_after = 0usize;
    for k in (1..=n).rev() {
        let mut bag = BTreeSet::new();
        bag.insert(k - 1);
        let s_k = s_after + sizes[k - 1] - 1;
        for j in s_after + 1..=s_k {
            bag.insert(n + j - 1);
        }
        s_after = s_k;
        bags[k - 1] = bag;
    }
    Ok((sizes, bags))
}

/// `μ̂_i = min_r` of the suffix-average `v_i(B_r ∪ .. ∪ B_n)/(n-r+1)`.
fn mu_hat_from_bags<'a>(
    bags: &[BTreeSet<usize>],
    n_local: usize,
    value_at: &impl Fn(usize, usize) -> &'a Rational,
) -> Vec<Rational> {
    (0..n_local)
        .map(|agent| {
            let mut best: Option<Rational> = None;
            let mut suffix = Rational::default();
            for r in (1..=bags.len()).rev() {
                for &pos in &bags[r - 1] {
                    suffix += value_at(agent, pos);
                }
                let avg = &suffix / rat((bags.len() - r + 1) as i64);
                best = Some(match best {
                    None => avg,
                    Some(b) => b.min(avg),
                });
            }
            best.expect("at least one bag")
        })
        .collect()
}

/// The valid-reduction bundle over positions: `{g_n, g_{n+1}}` plus the
/// `max{q⁻, m - q⁺(n-1)} - 2` least valuable tail items.
fn reduction_positions(m: usize, n: usize, q_minus: usize, q_plus: usize) -> Result<Vec<usize>> {
    let keep = m as i64 - q_plus as i64 * (n as i64 - 1);
    let target = (q_minus as i64).max(keep);
    let tail = (target - 2).max(0) as usize;
    let mut positions = vec![n - 1, n];
    if tail > m || m - tail <= n {
        return Err(Error::Internal(format!(
            "reduction tail of {tail} items overlaps the head (m={m}, n={n})"
        )));
    }
    positions.extend(m - tail..m);
    Ok(positions)
}

/// The `t = n..1` outer rounds on an irreducible instance: move/swap the
/// current bag down while some remaining agent still values it at
/// `(3/2)·α·μ̂`, then hand it to a remaining agent who values it at `α·μ̂`.
#[allow(clippy::too_many_arguments)]
fn main_rounds(
    inst: &Instance,
    ids: &[usize],
    agents: &[usize],
    mut bags: Vec<BTreeSet<usize>>,
    mu_hat: &[Rational],
    alpha: &Rational,
    quotas: (usize, usize),
    opts: RunOptions,
    bundles: &mut [Vec<usize>],
    mu_hat_report: &mut [Rational],
) -> Result<()> {
    let n_local = agents.len();
    let m = ids.len();
    let value_at = |agent: usize, pos: usize| -> &Rational { inst.value(agents[agent], ids[pos]) };
    let hi_threshold: Vec<Rational> = mu_hat.iter().map(|mu| ratio(3, 2) * alpha * mu).collect();
    let lo_threshold: Vec<Rational> = mu_hat.iter().map(|mu| alpha * mu).collect();

    let mut remaining: Vec<usize> = (0..n_local).collect();
    let mut assigned: Vec<(usize, BTreeSet<usize>)> = Vec::new();

    for t in (1..=n_local).rev() {
        let snapshot = bags.clone();
        let mut bag = bags.pop().expect("t bags remain");
        let special_t = t - 1;
        let mut bag_values: Vec<Rational> = (0..n_local)
            .map(|agent| {
                bag.iter()
                    .map(|&pos| value_at(agent, pos))
                    .fold(Rational::default(), |acc, v| acc + v)
            })
            .collect();

        for k_idx in (0..t - 1).rev() {
            let special_k = k_idx;
            loop {
                let someone_high = remaining
                    .iter()
                    .any(|&i| bag_values[i] >= hi_threshold[i]);
                if !someone_high {
                    break;
                }
                if equal_excluding(&bag, special_t, &snapshot[k_idx], special_k) {
                    break;
                }
                // Least valuable item of B besides g_t: the largest position.
                let g = *bag
                    .iter()
                    .rev()
                    .find(|&&pos| pos != special_t)
                    .ok_or_else(|| Error::Internal("bag has only its special item".into()))?;
                if bag.len() > snapshot[k_idx].len() {
                    // Move g into B_k.
                    bag.remove(&g);
                    bags[k_idx].insert(g);
                    for agent in 0..n_local {
                        let v = value_at(agent, g).clone();
                        bag_values[agent] -= v;
                    }
                } else {
                    // Swap g with the most valuable item of B_k besides g_k.
                    let h = *bags[k_idx]
                        .iter()
                        .find(|&&pos| pos != special_k)
                        .ok_or_else(|| Error::Internal("swap partner bag exhausted".into()))?;
                    bag.remove(&g);
                    bag.insert(h);
                    bags[k_idx].remove(&h);
                    bags[k_idx].insert(g);
                    for agent in 0..n_local {
                        let delta = value_at(agent, h).clone() - value_at(agent, g);
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
        let agent = agents[local];
        bundles[agent] = bag.iter().map(|&pos| ids[pos]).collect();
        mu_hat_report[agent] = mu_hat[local].clone();
        assigned.push((local, bag));

        if opts.check_invariants {
            check_goods_positions(
                m,
                n_local,
                quotas,
                t - 1,
                &bags,
                &assigned,
                &remaining,
                mu_hat,
                alpha,
                &value_at,
            )
            .map_err(|(label, detail)| Error::InvariantViolated { label, detail })?;
        }
    }
    Ok(())
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

/// Position-level checker for Conditions (C1) to (C6) of the goods
/// invariants at round boundary `t`.
#[allow(clippy::too_many_arguments)]
fn check_goods_positions<'a>(
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
    // C1 + C2: bags and assigned bundles are disjoint and cover M.
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
    // C3: sizes ascend within the quota window.
    for (k, bag) in bags.iter().enumerate() {
        if bag.len() < q_minus || bag.len() > q_plus {
            return Err((
                "C3",
                format!("|B_{}| = {} outside [{q_minus}, {q_plus}]", k + 1, bag.len()),
            ));
        }
        if k + 1 < t && bags[k].len() > bags[k + 1].len() {
            return Err((
                "C3",
                format!("|B_{}| > |B_{}|", k + 1, k + 2),
            ));
        }
    }
    // C4: bag k's only top-n item is g_k.
    for (k, bag) in bags.iter().enumerate() {
        let top: Vec<usize> = bag.iter().copied().filter(|&p| p < n_local).collect();
        if top != [k] {
            return Err((
                "C4",
                format!("B_{} ∩ top-n = {:?}, expected [{}]", k + 1, top, k),
            ));
        }
    }
    // C5: non-special values are ordered across consecutive bags for every
    // remaining agent.
    for &agent in remaining {
        let mut prev_max: Option<&Rational> = None;
        for (k, bag) in bags.iter().enumerate() {
            let rest: Vec<&Rational> = bag
                .iter()
                .filter(|&&p| p != k)
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
                        format!("agent {agent}: bag {} holds a more valuable filler than bag {}", k, k + 1),
                    ));
                }
            }
            prev_max = Some(max);
        }
    }
    // C6: suffix bag values stay above the threshold line.
    let penalty = (ratio(3, 2) * alpha - rat(1)) * rat((n_local - t) as i64);
    for &agent in remaining {
        let mut suffix = Rational::default();
        for r in (1..=t).rev() {
            for &pos in &bags[r - 1] {
                suffix += value_at(agent, pos);
            }
            let required = (rat((t - r + 1) as i64) - &penalty) * &mu_hat[agent];
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

/// Packs the items of an ordered single-category instance into the initial
/// bags. Requires `|M| > |N|`; the trivial case is the caller's business.
pub fn init_bags_goods(inst: &Instance) -> Result<BagState> {
    check_preconditions(inst)?;
    let n = inst.n_agents();
    let cat = &inst.categories()[0];
    let (sizes, bags) = init_bags_positions(inst.n_items(), n, cat.q_minus, cat.q_plus)?;
    Ok(BagState {
        t: n,
        bags: bags
            .into_iter()
            .map(|bag| bag.into_iter().map(|pos| cat.item_ids[pos]).collect())
            .collect(),
        remaining_agents: (0..n).collect(),
        mu_hat: Vec::new(),
        bag_sizes: sizes,
    })
}

/// Per-agent `μ̂` from the initial bags: the minimum suffix-average of bag
/// values. Satisfies `μ̂_i >= μ_i` for every agent.
pub fn mu_hat_goods(inst: &Instance, state: &BagState) -> Result<Vec<Rational>> {
    let cat = &inst.categories()[0];
    let pos_of = position_index(cat.item_ids.len(), &cat.item_ids);
    let bags: Vec<BTreeSet<usize>> = state
        .bags
        .iter()
        .map(|bag| bag.iter().map(|&id| pos_of[id]).collect())
        .collect();
    let value_at = |agent: usize, pos: usize| -> &Rational { inst.value(agent, cat.item_ids[pos]) };
    Ok(mu_hat_from_bags(&bags, inst.n_agents(), &value_at))
}

/// One valid-reduction step on a full instance: the bundle for `agent` and
/// the reduced instance over the surviving agents with relabeled dense item
/// ids (`item_map[new_id] = old_id`).
pub struct ValidReduction {
    pub bundle: Vec<usize>,
    pub reduced: Instance,
    pub item_map: Vec<usize>,
}

/// Applies the goods valid reduction for `agent`, who must value
/// `{g_n, g_{n+1}}` at `α·μ̂` or more (checked against the supplied `μ̂`).
pub fn valid_reduction_goods(
    inst: &Instance,
    agent: usize,
    alpha: &Rational,
    mu_hat: &Rational,
) -> Result<ValidReduction> {
    check_preconditions(inst)?;
    let n = inst.n_agents();
    let m = inst.n_items();
    let cat = &inst.categories()[0];
    if m <= n {
        return Err(Error::Precondition(
            "valid reduction needs more items than agents".to_string(),
        ));
    }
    let pair_value =
        inst.value(agent, cat.item_ids[n - 1]).clone() + inst.value(agent, cat.item_ids[n]);
    if &pair_value < &(alpha * mu_hat) {
        return Err(Error::Precondition(format!(
            "agent {agent} values {{g_n, g_n+1}} at {} < α·μ̂ = {}",
            pair_value,
            alpha * mu_hat
        )));
    }
    let positions = reduction_positions(m, n, cat.q_minus, cat.q_plus)?;
    let taken: BTreeSet<usize> = positions.iter().copied().collect();
    let bundle: Vec<usize> = taken.iter().map(|&p| cat.item_ids[p]).collect();

    let item_map: Vec<usize> = (0..m)
        .filter(|p| !taken.contains(p))
        .map(|p| cat.item_ids[p])
        .collect();
    let valuations = inst
        .valuations()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != agent)
        .map(|(_, row)| item_map.iter().map(|&old| row[old].clone()).collect())
        .collect();
    let reduced = Instance::new(
        n - 1,
        vec![crate::instance::Category::new(
            cat.name.clone(),
            (0..item_map.len()).collect(),
            cat.q_minus,
            cat.q_plus,
        )],
        valuations,
        inst.kind(),
    )?;
    Ok(ValidReduction {
        bundle,
        reduced,
        item_map,
    })
}

/// Checks Conditions (C1) to (C6) for a state of the main routine.
/// `assigned` holds the bundles handed out so far in the main rounds, as
/// `(agent, bundle)` pairs. Returns the first violated condition label.
pub fn check_invariants_goods(
    inst: &Instance,
    state: &BagState,
    assigned: &[(usize, Vec<usize>)],
    alpha: &Rational,
) -> std::result::Result<(), (&'static str, String)> {
    let cat = &inst.categories()[0];
    let pos_of = position_index(cat.item_ids.len(), &cat.item_ids);
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
    check_goods_positions(
        inst.n_items(),
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

fn position_index(m: usize, item_ids: &[usize]) -> Vec<usize> {
    let mut pos_of = vec![0usize; m];
    for (pos, &id) in item_ids.iter().enumerate() {
        pos_of[id] = pos;
    }
    pos_of
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::tight_goods_instance;
    use crate::oracle::{mms_bruteforce, mms_values};
    use crate::verify::verify_alpha_mms;

    fn goods(n: usize, values: Vec<Vec<i64>>, q: (usize, usize)) -> Instance {
        let vals = values
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::single_category(n, vals, q.0, q.1, Kind::Goods).unwrap()
    }

    #[test]
    fn bag_initialization_examples() {
        // n=2, m=6, q=(3,3): b=(3,3); B_2={g2,g3,g4}, B_1={g1,g5,g6}.
        let (sizes, bags) = init_bags_positions(6, 2, 3, 3).unwrap();
        assert_eq!(sizes, vec![3, 3]);
        assert_eq!(bags[1], BTreeSet::from([1, 2, 3]));
        assert_eq!(bags[0], BTreeSet::from([0, 4, 5]));

        // n=2, m=5, q=(1,4): b_2 = min{4, 5-1} = 4, b_1 = 1.
        let (sizes, bags) = init_bags_positions(5, 2, 1, 4).unwrap();
        assert_eq!(sizes, vec![1, 4]);
        assert_eq!(bags[1], BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(bags[0], BTreeSet::from([0]));
    }

    #[test]
    fn bag_initialization_invariants_on_random_shapes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut tried = 0;
        while tried < 200 {
            let n: usize = rng.random_range(1..=6);
            let m = rng.random_range(n + 1..=n + 12);
            let q_minus = rng.random_range(0..=m / n);
            let q_plus = rng.random_range(m.div_ceil(n)..=m);
            if q_minus > q_plus {
                continue;
            }
            tried += 1;
            let (sizes, bags) = init_bags_positions(m, n, q_minus, q_plus).unwrap();
            assert_eq!(sizes.iter().sum::<usize>(), m);
            let mut seen = vec![false; m];
            for bag in &bags {
                for &p in bag {
                    assert!(!seen[p], "overlap at {p}");
                    seen[p] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "union must be all items");
            for w in bags.windows(2) {
                assert!(w[0].len() <= w[1].len(), "sizes must ascend");
            }
            for bag in &bags {
                assert!(bag.len() >= q_minus.max(1) && bag.len() <= q_plus);
            }
        }
    }

    #[test]
    fn mu_hat_on_tight_instance_is_one() {
        let inst = tight_goods_instance(2).unwrap();
        let state = init_bags_goods(&inst).unwrap();
        let mu_hat = mu_hat_goods(&inst, &state).unwrap();
        assert_eq!(mu_hat, vec![rat(1), rat(1)]);
    }

    #[test]
    fn mu_hat_equals_common_value_for_identical_bags() {
        // Four items of value 2 in bags of two: every suffix average is 4.
        let inst = goods(2, vec![vec![2, 2, 2, 2]; 2], (2, 2));
        let state = init_bags_goods(&inst).unwrap();
        let mu_hat = mu_hat_goods(&inst, &state).unwrap();
        assert_eq!(mu_hat, vec![rat(4), rat(4)]);
    }

    #[test]
    fn mu_hat_dominates_oracle_mms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n: usize = rng.random_range(2..=3);
            let m = rng.random_range(n + 1..=8);
            let q_minus = rng.random_range(0..=m / n);
            let q_plus = rng.random_range(m.div_ceil(n)..=m);
            let mut rows = Vec::new();
            for _ in 0..n {
                let mut row: Vec<i64> = (0..m).map(|_| rng.random_range(0..=6)).collect();
                row.sort_unstable_by(|a, b| b.cmp(a));
                rows.push(row);
            }
            let inst = goods(n, rows, (q_minus, q_plus));
            let state = init_bags_goods(&inst).unwrap();
            let mu_hat = mu_hat_goods(&inst, &state).unwrap();
            for agent in 0..n {
                let mu = mms_bruteforce(&inst, agent).unwrap().value;
                assert!(mu_hat[agent] >= mu, "μ̂ must upper-bound μ");
            }
        }
    }

    #[test]
    fn reduction_bundle_examples() {
        // n=2, m=6, q=(3,3): tail count max{3, 6-3} - 2 = 1.
        assert_eq!(reduction_positions(6, 2, 3, 3).unwrap(), vec![1, 2, 5]);
        // Unconstrained tail is empty.
        assert_eq!(reduction_positions(6, 2, 0, 6).unwrap(), vec![1, 2]);
    }

    #[test]
    fn reduction_does_not_decrease_survivor_mms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut fired = 0;
        for _ in 0..200 {
            let n: usize = rng.random_range(2..=3);
            let m = rng.random_range(n + 1..=7);
            let q_minus = rng.random_range(0..=m / n);
            let q_plus = rng.random_range(m.div_ceil(n)..=m);
            let mut row: Vec<i64> = (0..m).map(|_| rng.random_range(0..=5)).collect();
            row.sort_unstable_by(|a, b| b.cmp(a));
            let inst = goods(n, vec![row; n], (q_minus, q_plus));
            let state = init_bags_goods(&inst).unwrap();
            let mu_hat = mu_hat_goods(&inst, &state).unwrap();
            let alpha = default_alpha(n);
            let red = match valid_reduction_goods(&inst, 0, &alpha, &mu_hat[0]) {
                Ok(r) => r,
                Err(_) => continue,
            };
            fired += 1;
            for survivor in 1..n {
                let before = mms_bruteforce(&inst, survivor).unwrap().value;
                let after = mms_bruteforce(&red.reduced, survivor - 1).unwrap().value;
                assert!(after >= before, "survivor MMS decreased");
            }
        }
        assert!(fired > 20, "reduction precondition should fire often");
    }

    #[test]
    fn tight_instance_hits_exact_ratio() {
        for n in 1..=4 {
            let inst = tight_goods_instance(n).unwrap();
            let alpha = default_alpha(n);
            let alloc = approx_goods(&inst, &alpha).unwrap();
            assert!(inst.is_feasible_allocation(&alloc).unwrap());
            let mus = mms_values(&inst).unwrap();
            assert!(mus.iter().all(|mu| *mu == rat(1)));
            let min_ratio = (0..n)
                .map(|i| inst.bundle_value(i, &alloc.bundles[i]).unwrap())
                .min()
                .unwrap();
            assert_eq!(min_ratio, alpha, "worst bundle must sit exactly at 2n/(3n-1)");
        }
    }

    #[test]
    fn single_agent_takes_everything() {
        let inst = goods(1, vec![vec![3, 2, 1]], (1, 3));
        let alloc = approx_goods(&inst, &default_alpha(1)).unwrap();
        assert_eq!(alloc.bundles[0], vec![0, 1, 2]);
    }

    #[test]
    fn trivial_case_when_items_do_not_exceed_agents() {
        let inst = goods(3, vec![vec![5, 4, 0]; 3], (0, 1));
        let alloc = approx_goods(&inst, &default_alpha(3)).unwrap();
        assert_eq!(alloc.bundles, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn random_instances_meet_guarantee_with_invariants_on() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let opts = RunOptions {
            check_invariants: true,
        };
        for _ in 0..120 {
            let n = 3;
            let m = 9;
            let mut row = |_: usize| -> Vec<i64> {
                let mut r: Vec<i64> = (0..m).map(|_| rng.random_range(0..=6)).collect();
                r.sort_unstable_by(|a, b| b.cmp(a));
                r
            };
            let rows: Vec<Vec<i64>> = (0..n).map(&mut row).collect();
            let inst = goods(n, rows, (2, 4));
            let alpha = default_alpha(n);
            let run = approx_goods_run(&inst, &alpha, opts).unwrap();
            let mus = mms_values(&inst).unwrap();
            let report = verify_alpha_mms(&inst, &run.allocation, &alpha, &mus).unwrap();
            assert!(report.ok, "guarantee violated: {:?}", report.margins);
        }
    }

    #[test]
    fn rejects_out_of_band_alpha_and_wrong_inputs() {
        let inst = goods(2, vec![vec![3, 2, 1, 0]; 2], (2, 2));
        assert!(approx_goods(&inst, &rat(1)).is_err());
        assert!(approx_goods(&inst, &ratio(1, 2)).is_err());

        let unordered = goods(2, vec![vec![1, 2, 3, 4]; 2], (2, 2));
        assert!(matches!(
            approx_goods(&unordered, &default_alpha(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn invariant_checker_flags_corrupted_state() {
        let inst = tight_goods_instance(2).unwrap();
        let mut state = init_bags_goods(&inst).unwrap();
        state.mu_hat = mu_hat_goods(&inst, &state).unwrap();
        let alpha = default_alpha(2);
        assert!(check_invariants_goods(&inst, &state, &[], &alpha).is_ok());

        // Swap a top-n item across bags: C4 must fire.
        let b0: Vec<usize> = state.bags[0].iter().copied().collect();
        let b1: Vec<usize> = state.bags[1].iter().copied().collect();
        state.bags[0].remove(&b0[0]);
        state.bags[0].insert(b1[0]);
        state.bags[1].remove(&b1[0]);
        state.bags[1].insert(b0[0]);
        let err = check_invariants_goods(&inst, &state, &[], &alpha).unwrap_err();
        assert_eq!(err.0, "C4");
    }
}
