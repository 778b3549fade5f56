//! Exact dynamic program and FPTAS for instances with identical agents,
//! plus the almost-identical wrapper.
//!
//! The DP processes items one at a time over a state space of per-agent
//! accumulated values and per-category counts. Agents are identical, so
//! states are kept canonical by sorting the agent coordinates, which
//! quotients out the bundle-relabeling symmetry. For the FPTAS the value
//! coordinates are additionally collapsed into multiplicative buckets of
//! width `Δ = 1 + ε/(2m)`, whose accumulated distortion `Δ^m` stays within
//! the advertised `1 ± ε`.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::instance::{Allocation, Instance, Kind};
use crate::rational::{rat, Rational};
use crate::Result;

use super::{MmsResult, ScaledValues};

const STATE_GUARD: usize = 4_000_000;

/// One agent slot of a DP state: accumulated value and per-category counts.
type Slot = (i128, Vec<u16>);

#[derive(Debug, Clone)]
struct State {
    slots: Vec<Slot>,
}

impl State {
    fn canonical(mut slots: Vec<Slot>) -> Self {
        slots.sort();
        State { slots }
    }
}

/// Output of one DP run, with the explored-state counter used to compare
/// trimmed against untrimmed searches.
#[derive(Debug, Clone)]
pub struct IdenticalDpRun {
    pub value: Rational,
    pub partition: Allocation,
    pub states_explored: usize,
}

/// Exact MMS for an instance whose agents all share one valuation row.
///
/// Works for goods and for chores; chores are solved as a min-max problem
/// on negated costs. The witnessing partition is reconstructed from
/// back-pointers.
pub fn mms_identical_dp(inst: &Instance) -> Result<MmsResult> {
    let run = identical_dp_run(inst, None)?;
    Ok(MmsResult {
        value: run.value,
        partition: run.partition,
    })
}

/// `(1-ε)`-MMS allocation for identical agents (goods), or `(1+ε)`-MMS for
/// chores, via the trimmed state space.
pub fn fptas_identical(inst: &Instance, eps: &Rational) -> Result<Allocation> {
    Ok(fptas_identical_run(inst, eps)?.partition)
}

/// As [`fptas_identical`], exposing the run statistics.
pub fn fptas_identical_run(inst: &Instance, eps: &Rational) -> Result<IdenticalDpRun> {
    if !(eps > &Rational::zero() && eps <= &Rational::one()) {
        return Err(Error::EpsOutOfRange(crate::rational::format_rational(eps)));
    }
    identical_dp_run(inst, Some(eps))
}

/// Shared engine behind the exact DP and the FPTAS.
pub(crate) fn identical_dp_run(inst: &Instance, trim: Option<&Rational>) -> Result<IdenticalDpRun> {
    for (agent, row) in inst.valuations().iter().enumerate() {
        if row != &inst.valuations()[0] {
            return Err(Error::NotIdentical { agent });
        }
    }
    let minimize_max = match inst.kind() {
        Kind::Goods => false,
        Kind::Chores => true,
        Kind::Mixed => {
            return Err(Error::Precondition(
                "identical-agent DP requires a goods or chores instance".to_string(),
            ))
        }
    };
    let n = inst.n_agents();
    let m = inst.n_items();
    if n == 0 {
        return Err(Error::Precondition("no agents".to_string()));
    }

    let scaled = ScaledValues::from_instance(inst)?;
    // Chores become non-negative costs; the objective flips to min-max.
    let costs: Vec<i128> = scaled.rows[0]
        .iter()
        .map(|&v| if minimize_max { -v } else { v })
        .collect();
    if costs.iter().any(|&v| v < 0) {
        return Err(Error::Precondition(
            "value signs conflict with the declared kind".to_string(),
        ));
    }

    let cat_of = inst.category_of_items();
    let n_cats = inst.categories().len();
    let quotas: Vec<(u16, u16)> = inst
        .categories()
        .iter()
        .map(|c| (c.q_minus as u16, c.q_plus as u16))
        .collect();
    let mut remaining_per_cat: Vec<usize> = inst.categories().iter().map(|c| c.len()).collect();

    let buckets = trim.map(|eps| {
        // Δ = 1 + ε/(2m); bucket width of the value coordinates.
        let delta = Rational::one() + eps / rat(2 * m.max(1) as i64);
        BucketTable::new(delta)
    });

    let initial = State::canonical(vec![(0i128, vec![0u16; n_cats]); n]);
    let mut layers: Vec<Vec<State>> = Vec::with_capacity(m + 1);
    // back[k][s] = (state index in layer k-1, slot index that received item k-1).
    let mut back: Vec<Vec<(usize, usize)>> = Vec::with_capacity(m + 1);
    layers.push(vec![initial]);
    back.push(Vec::new());
    let mut states_explored = 1usize;

    let mut item_order: Vec<usize> = Vec::with_capacity(m);
    for cat in inst.categories() {
        item_order.extend_from_slice(&cat.item_ids);
    }

    let mut buckets_table = buckets;
    for (step, &item) in item_order.iter().enumerate() {
        let c = cat_of[item];
        remaining_per_cat[c] -= 1;
        let remaining_c = remaining_per_cat[c];
        let (q_minus, q_plus) = quotas[c];
        let prev = &layers[step];
        let mut next: Vec<State> = Vec::new();
        let mut next_back: Vec<(usize, usize)> = Vec::new();
        let mut index: HashMap<Vec<Slot>, usize> = HashMap::new();
        // For trimmed runs: merge-key -> position of the kept representative.
        let mut merged: HashMap<Vec<(i64, Vec<u16>)>, usize> = HashMap::new();

        for (p_idx, state) in prev.iter().enumerate() {
            for slot in 0..n {
                if state.slots[slot].1[c] >= q_plus {
                    continue;
                }
                let mut slots = state.slots.clone();
                slots[slot].0 += costs[item];
                slots[slot].1[c] += 1;
                // The remaining items of this category must still be able to
                // cover every slot's lower-quota shortfall.
                let deficit: usize = slots
                    .iter()
                    .map(|s| (q_minus.saturating_sub(s.1[c])) as usize)
                    .sum();
                if deficit > remaining_c {
                    continue;
                }
                let cand = State::canonical(slots);
                match &mut buckets_table {
                    None => {
                        if let std::collections::hash_map::Entry::Vacant(e) =
                            index.entry(cand.slots.clone())
                        {
                            e.insert(next.len());
                            next.push(cand);
                            next_back.push((p_idx, slot));
                        }
                    }
                    Some(table) => {
                        let key: Vec<(i64, Vec<u16>)> = {
                            let mut k: Vec<(i64, Vec<u16>)> = cand
                                .slots
                                .iter()
                                .map(|(v, cts)| (table.bucket(*v), cts.clone()))
                                .collect();
                            k.sort();
                            k
                        };
                        match merged.entry(key) {
                            std::collections::hash_map::Entry::Vacant(e) => {
                                e.insert(next.len());
                                next.push(cand);
                                next_back.push((p_idx, slot));
                            }
                            std::collections::hash_map::Entry::Occupied(e) => {
                                let at = *e.get();
                                // Keep the lexicographically smallest member
                                // as the bucket representative.
                                if cand.slots < next[at].slots {
                                    next[at] = cand;
                                    next_back[at] = (p_idx, slot);
                                }
                            }
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            return Err(Error::Precondition(
                "no feasible partition exists; validate the instance first".to_string(),
            ));
        }
        states_explored += next.len();
        if states_explored > STATE_GUARD {
            return Err(Error::GuardExceeded {
                what: "identical-agent DP state space",
                limit: STATE_GUARD as u128,
                actual: states_explored as u128,
            });
        }
        layers.push(next);
        back.push(next_back);
    }

    // Final objective over quota-feasible states only, so the reconstructed
    // partition is always feasible.
    let last = layers.len() - 1;
    let mut best: Option<(i128, usize)> = None;
    for (idx, state) in layers[last].iter().enumerate() {
        let feasible = state.slots.iter().all(|(_, counts)| {
            counts
                .iter()
                .zip(&quotas)
                .all(|(&c, &(q_minus, q_plus))| q_minus <= c && c <= q_plus)
        });
        if !feasible {
            continue;
        }
        let objective = if minimize_max {
            state.slots.iter().map(|(v, _)| *v).max().unwrap()
        } else {
            state.slots.iter().map(|(v, _)| *v).min().unwrap()
        };
        let better = match best {
            None => true,
            Some((cur, _)) => {
                if minimize_max {
                    objective < cur
                } else {
                    objective > cur
                }
            }
        };
        if better {
            best = Some((objective, idx));
        }
    }
    let (objective, mut idx) = best.ok_or_else(|| {
        Error::Precondition("no feasible partition exists; validate the instance first".to_string())
    })?;

    // Walk the back-pointers to the root, then replay forward: at each step
    // the recorded slot identifies a bundle by its (value, counts) signature
    // in the predecessor state.
    let mut steps: Vec<(usize, usize)> = Vec::with_capacity(m);
    for k in (1..layers.len()).rev() {
        let (prev_idx, slot) = back[k][idx];
        steps.push((prev_idx, slot));
        idx = prev_idx;
    }
    steps.reverse();

    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut signatures: Vec<Slot> = vec![(0, vec![0u16; n_cats]); n];
    for (k, &(prev_idx, slot)) in steps.iter().enumerate() {
        let item = item_order[k];
        let c = cat_of[item];
        let target = &layers[k][prev_idx].slots[slot];
        let holder = signatures
            .iter()
            .position(|s| s == target)
            .expect("replayed signature must match a concrete bundle");
        bundles[holder].push(item);
        signatures[holder].0 += costs[item];
        signatures[holder].1[c] += 1;
    }

    let signed = if minimize_max { -objective } else { objective };
    Ok(IdenticalDpRun {
        value: scaled.unscale(signed),
        partition: Allocation::new(bundles),
        states_explored,
    })
}

/// Lazily extended table of powers of Δ for bucketing values.
struct BucketTable {
    delta: Rational,
    powers: Vec<Rational>,
    cache: HashMap<i128, i64>,
}

impl BucketTable {
    fn new(delta: Rational) -> Self {
        BucketTable {
            delta,
            powers: vec![Rational::one()],
            cache: HashMap::new(),
        }
    }

    /// Largest `b` with `Δ^b <= v`, with zero in its own bucket.
    fn bucket(&mut self, v: i128) -> i64 {
        debug_assert!(v >= 0);
        if v == 0 {
            return -1;
        }
        if let Some(&b) = self.cache.get(&v) {
            return b;
        }
        let target = Rational::from_integer(v.into());
        while *self.powers.last().unwrap() <= target {
            let next = self.powers.last().unwrap() * &self.delta;
            self.powers.push(next);
        }
        // partition_point: first index with Δ^idx > v.
        let b = self.powers.partition_point(|p| *p <= target) as i64 - 1;
        self.cache.insert(v, b);
        b
    }
}

/// Solves an instance where all agents except at most one share a common
/// valuation: solve the all-identical surrogate with the FPTAS, then give
/// the deviating agent the bundle of maximum common value.
pub fn almost_identical(inst: &Instance, eps: &Rational) -> Result<Allocation> {
    let deviator = find_deviator(inst)?;
    let Some((i_star, common_row)) = deviator else {
        return fptas_identical(inst, eps);
    };
    let surrogate = Instance::new(
        inst.n_agents(),
        inst.categories().to_vec(),
        vec![common_row; inst.n_agents()],
        inst.kind(),
    )?;
    let alloc = fptas_identical(&surrogate, eps)?;
    let common_values: Vec<Rational> = alloc
        .bundles
        .iter()
        .map(|b| surrogate.bundle_value(0, b))
        .collect::<Result<_>>()?;
    let i_max = common_values
        .iter()
        .enumerate()
        .max_by(|(ia, va), (ib, vb)| va.cmp(vb).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    let mut bundles = alloc.bundles;
    bundles.swap(i_star, i_max);
    Ok(Allocation::new(bundles))
}

/// Returns the deviating agent and the shared valuation row, or `None` when
/// all agents are identical. With two agents and differing rows, the second
/// agent is treated as the deviator.
fn find_deviator(inst: &Instance) -> Result<Option<(usize, Vec<Rational>)>> {
    let rows = inst.valuations();
    let Some(d) = rows.iter().position(|r| r != &rows[0]) else {
        return Ok(None);
    };
    if rows
        .iter()
        .enumerate()
        .all(|(i, r)| i == d || r == &rows[0])
    {
        return Ok(Some((d, rows[0].clone())));
    }
    if rows
        .iter()
        .enumerate()
        .all(|(i, r)| i == 0 || r == &rows[d])
    {
        return Ok(Some((0, rows[d].clone())));
    }
    let second = rows
        .iter()
        .enumerate()
        .skip(d + 1)
        .find(|(_, r)| *r != &rows[0] && *r != &rows[d])
        .map(|(i, _)| i)
        .unwrap_or(d + 1);
    Err(Error::MoreThanOneDeviating { first: d, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mms_bruteforce;
    use crate::rational::ratio;

    fn goods(n: usize, values: Vec<Vec<i64>>, q: (usize, usize)) -> Instance {
        let vals = values
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::single_category(n, vals, q.0, q.1, Kind::Goods).unwrap()
    }

    #[test]
    fn dp_matches_hand_value() {
        let inst = goods(2, vec![vec![2, 2, 1, 1]; 2], (2, 2));
        let res = mms_identical_dp(&inst).unwrap();
        assert_eq!(res.value, rat(3));
        assert!(inst.is_feasible_allocation(&res.partition).unwrap());
        let min = res
            .partition
            .bundles
            .iter()
            .map(|b| inst.bundle_value(0, b).unwrap())
            .min()
            .unwrap();
        assert_eq!(min, rat(3));
    }

    #[test]
    fn dp_all_zero_values() {
        let inst = goods(3, vec![vec![0; 6]; 3], (2, 2));
        let res = mms_identical_dp(&inst).unwrap();
        assert_eq!(res.value, rat(0));
        assert!(inst.is_feasible_allocation(&res.partition).unwrap());
    }

    #[test]
    fn dp_agrees_with_bruteforce_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n: usize = rng.random_range(2..=3);
            let m = rng.random_range(n..=7);
            let split = rng.random_range(1..m);
            let row: Vec<i64> = (0..m).map(|_| rng.random_range(0..=6)).collect();
            let vals: Vec<Vec<Rational>> =
                vec![row.iter().map(|&v| rat(v)).collect(); n];
            let cats = vec![
                crate::instance::Category::new("A", (0..split).collect(), 0, split),
                crate::instance::Category::new("B", (split..m).collect(), 0, m - split),
            ];
            let inst = Instance::new(n, cats, vals, Kind::Goods).unwrap();
            let dp = mms_identical_dp(&inst).unwrap();
            let bf = mms_bruteforce(&inst, 0).unwrap();
            assert_eq!(dp.value, bf.value);
        }
    }

    #[test]
    fn dp_rejects_non_identical_agents() {
        let inst = goods(2, vec![vec![1, 2], vec![2, 1]], (1, 1));
        assert!(matches!(
            mms_identical_dp(&inst),
            Err(Error::NotIdentical { agent: 1 })
        ));
    }

    #[test]
    fn fptas_meets_its_bound() {
        let inst = goods(2, vec![vec![5, 4, 3, 2, 1, 1]; 2], (3, 3));
        let exact = mms_identical_dp(&inst).unwrap();
        assert_eq!(exact.value, rat(8));
        let alloc = fptas_identical(&inst, &ratio(1, 10)).unwrap();
        assert!(inst.is_feasible_allocation(&alloc).unwrap());
        let min = alloc
            .bundles
            .iter()
            .map(|b| inst.bundle_value(0, b).unwrap())
            .min()
            .unwrap();
        assert!(min >= (rat(1) - ratio(1, 10)) * exact.value);
    }

    #[test]
    fn fptas_eps_one_accepts_any_feasible_outcome() {
        let inst = goods(2, vec![vec![3, 1, 4, 1]; 2], (2, 2));
        let alloc = fptas_identical(&inst, &rat(1)).unwrap();
        assert!(inst.is_feasible_allocation(&alloc).unwrap());
        assert!(fptas_identical(&inst, &rat(0)).is_err());
        assert!(fptas_identical(&inst, &rat(2)).is_err());
    }

    #[test]
    fn trimming_never_explores_more_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n: usize = rng.random_range(2..=3);
            let m = rng.random_range(n..=7);
            let row: Vec<i64> = (0..m).map(|_| rng.random_range(0..=8)).collect();
            let inst = goods(n, vec![row; n], (0, m));
            let exact = identical_dp_run(&inst, None).unwrap();
            let trimmed = identical_dp_run(&inst, Some(&ratio(1, 10))).unwrap();
            assert!(trimmed.states_explored <= exact.states_explored);
        }
    }

    #[test]
    fn chores_dp_is_min_max_on_costs() {
        let vals = vec![vec![rat(-3), rat(-3), rat(-2), rat(-1), rat(-1)]; 2];
        let inst = Instance::single_category(2, vals, 2, 3, Kind::Chores).unwrap();
        let res = mms_identical_dp(&inst).unwrap();
        // Best split: {-3,-2} and {-3,-1,-1}: min bundle value is -5.
        assert_eq!(res.value, rat(-5));
        let bf = mms_bruteforce(&inst, 0).unwrap();
        assert_eq!(bf.value, res.value);
    }

    #[test]
    fn almost_identical_gives_deviator_the_best_common_bundle() {
        let vals = vec![
            vec![rat(4), rat(3), rat(2), rat(1)],
            vec![rat(1), rat(1), rat(1), rat(10)],
        ];
        let inst = Instance::single_category(2, vals, 2, 2, Kind::Goods).unwrap();
        let alloc = almost_identical(&inst, &ratio(1, 10)).unwrap();
        assert!(inst.is_feasible_allocation(&alloc).unwrap());
        // The surrogate uses agent 0's row; the deviator (agent 1) must hold
        // the bundle the common valuation ranks highest.
        let v0 = inst.bundle_value(0, &alloc.bundles[0]).unwrap();
        let v1 = inst.bundle_value(0, &alloc.bundles[1]).unwrap();
        assert!(v1 >= v0);
    }

    #[test]
    fn almost_identical_rejects_two_deviators() {
        let vals = vec![
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(1), rat(3)],
            vec![rat(3), rat(2), rat(1)],
        ];
        let inst = Instance::single_category(3, vals, 1, 1, Kind::Goods).unwrap();
        assert!(matches!(
            almost_identical(&inst, &ratio(1, 2)),
            Err(Error::MoreThanOneDeviating { .. })
        ));
    }
}
