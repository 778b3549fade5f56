//! Bag-filling algorithms for categorized instances: goods at `n/(2n-1)`
//! and chores at `(2n-1)/n`, plus the general valid-reduction bundle
//! builder they share with the single-category routines.
//!
//! Bags here are grown per category between the floor `⌊|C∩M|/t⌋` and the
//! ceiling `⌈|C∩M|/t⌉` of the remaining category sizes, which keeps every
//! assigned bundle inside the quota window.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::instance::{validate_instance, Allocation, Category, Instance, Kind};
use crate::rational::{rat, ratio, Rational};
use crate::{Result, RunOptions};

#[derive(Debug, Clone)]
pub struct CategorizedRun {
    pub allocation: Allocation,
    pub alpha: Rational,
    pub mu_hat: Vec<Rational>,
}

/// Goods guarantee `n/(2n-1)`: the top of the band `[1/2, 1/(2 - 1/max{n,1})]`.
pub fn default_alpha_goods(n: usize) -> Rational {
    let n = n.max(1) as i64;
    ratio(n, 2 * n - 1)
}

/// Chores guarantee `(2n-1)/n`: the bottom of the band `[2 - 1/max{n,1}, 2]`.
pub fn default_alpha_chores(n: usize) -> Rational {
    let n = n.max(1) as i64;
    ratio(2 * n - 1, n)
}

/// One valid-reduction step (goods): the bundle handed to the leaving agent
/// and the reduced instance with dense relabeled item ids
/// (`item_map[new_id] = old_id`).
pub struct CategorizedReduction {
    pub bundle: Vec<usize>,
    pub reduced: Instance,
    pub item_map: Vec<usize>,
}

/// Builds the valid-reduction bundle for an ordered goods instance: the
/// `d+1` items `g^{C*}_j` with `d(n-1) < j <= dn+1`, the tail of `C*` up to
/// `max{q⁻, |C*| - q⁺(n-1)}` total, and every other category's tail of
/// `max{q⁻_C, |C| - q⁺_C(n-1)}` items. The reduced instance keeps all
/// quotas and satisfies the quota inequality with one agent fewer.
pub fn valid_reduction_bundle(
    inst: &Instance,
    agent: usize,
    cat_index: usize,
    d: usize,
) -> Result<CategorizedReduction> {
    if inst.kind() != Kind::Goods {
        return Err(Error::Precondition(
            "valid reduction is defined for ordered goods instances".to_string(),
        ));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "valid reduction requires an ordered instance".to_string(),
        ));
    }
    if agent >= inst.n_agents() {
        return Err(Error::AgentOutOfRange {
            agent,
            agents: inst.n_agents(),
        });
    }
    let n = inst.n_agents();
    let star = inst
        .categories()
        .get(cat_index)
        .ok_or_else(|| Error::Precondition(format!("no category {cat_index}")))?;
    if star.is_empty() {
        return Err(Error::Precondition(
            "reduction category must be non-empty".to_string(),
        ));
    }
    if star.len() < d * n + 1 {
        return Err(Error::Precondition(format!(
            "category of size {} cannot host a d={d} reduction for {n} agents",
            star.len()
        )));
    }

    let mut taken_per_cat: Vec<BTreeSet<usize>> = Vec::with_capacity(inst.categories().len());
    for (c, cat) in inst.categories().iter().enumerate() {
        let size = cat.len();
        let mut taken = BTreeSet::new();
        let tail_total = tail_size(size, cat.q_minus, cat.q_plus, n);
        if c == cat_index {
            // Head block: 0-based positions d(n-1) .. dn.
            for pos in d * (n - 1)..=d * n {
                taken.insert(pos);
            }
            let tail = tail_total.saturating_sub(d + 1);
            if tail > 0 && size - tail <= d * n {
                return Err(Error::Internal(format!(
                    "reduction tail overlaps head in category {c}"
                )));
            }
            for pos in size - tail..size {
                taken.insert(pos);
            }
        } else {
            for pos in size - tail_total..size {
                taken.insert(pos);
            }
        }
        taken_per_cat.push(taken);
    }

    let bundle: Vec<usize> = inst
        .categories()
        .iter()
        .zip(&taken_per_cat)
        .flat_map(|(cat, taken)| taken.iter().map(|&pos| cat.item_ids[pos]))
        .collect();

    let mut item_map = Vec::new();
    let mut categories = Vec::new();
    for (cat, taken) in inst.categories().iter().zip(&taken_per_cat) {
        let survivors: Vec<usize> = (0..cat.len())
            .filter(|pos| !taken.contains(pos))
            .map(|pos| cat.item_ids[pos])
            .collect();
        let start = item_map.len();
        item_map.extend_from_slice(&survivors);
        categories.push(Category::new(
            cat.name.clone(),
            (start..item_map.len()).collect(),
            cat.q_minus,
            cat.q_plus,
        ));
    }
    let valuations = inst
        .valuations()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != agent)
        .map(|(_, row)| item_map.iter().map(|&old| row[old].clone()).collect())
        .collect();
    let reduced = Instance::new(n - 1, categories, valuations, inst.kind())?;
    Ok(CategorizedReduction {
        bundle,
        reduced,
        item_map,
    })
}

/// `max{q⁻_C, |C| - q⁺_C(n-1)}`: how many of a category's items must leave
/// with the reduced agent.
fn tail_size(size: usize, q_minus: usize, q_plus: usize, n: usize) -> usize {
    let keep = size as i64 - q_plus as i64 * (n as i64 - 1);
    (q_minus as i64).max(keep).max(0) as usize
}

/// `n/(2n-1)`-MMS allocation for an ordered (multi-category) instance of
/// goods.
pub fn approx_categorized_goods(inst: &Instance, alpha: &Rational) -> Result<Allocation> {
    Ok(approx_categorized_goods_run(inst, alpha, RunOptions::default())?.allocation)
}

pub fn approx_categorized_goods_run(
    inst: &Instance,
    alpha: &Rational,
    opts: RunOptions,
) -> Result<CategorizedRun> {
    check_preconditions(inst, Kind::Goods)?;
    let n = inst.n_agents();
    let lo = ratio(1, 2);
    let hi = default_alpha_goods(n);
    if !(alpha >= &lo && alpha <= &hi) {
        return Err(Error::Precondition(format!(
            "alpha {} outside the admissible band [{}, {}]",
            alpha, lo, hi
        )));
    }

    // Remaining item ids per category, each list in ordered (descending
    // value) order, plus the remaining original agent ids.
    let mut remaining: Vec<Vec<usize>> = inst
        .categories()
        .iter()
        .map(|c| c.item_ids.clone())
        .collect();
    let mut agents: Vec<usize> = (0..n).collect();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mu_hat_report: Vec<Rational> = vec![Rational::default(); n];

    // Valid reductions: while someone finds some category's best remaining
    // item worth α·μ̂ on its own, peel that agent off.
    loop {
        let k = agents.len();
        if k == 0 {
            return Ok(CategorizedRun {
                allocation: Allocation::new(bundles),
                alpha: alpha.clone(),
                mu_hat: mu_hat_report,
            });
        }
        let mu_hat: Vec<Rational> = agents
            .iter()
            .map(|&a| total_value(inst, a, &remaining) / rat(k as i64))
            .collect();
        let hit = agents.iter().enumerate().find_map(|(local, &a)| {
            remaining.iter().enumerate().find_map(|(c, ids)| {
                ids.first().and_then(|&g| {
                    if inst.value(a, g) >= &(alpha * &mu_hat[local]) {
                        Some((local, c))
                    } else {
                        None
                    }
                })
            })
        });
        let Some((local_star, c_star)) = hit else {
            // Irreducible: hand off to the bag-filling rounds.
            main_rounds_goods(
                inst,
                remaining,
                &agents,
                &mu_hat,
                alpha,
                opts,
                &mut bundles,
                &mut mu_hat_report,
            )?;
            return Ok(CategorizedRun {
                allocation: Allocation::new(bundles),
                alpha: alpha.clone(),
                mu_hat: mu_hat_report,
            });
        };
        let agent = agents.remove(local_star);
        mu_hat_report[agent] = mu_hat[local_star].clone();
        let mut bundle = Vec::new();
        for (c, ids) in remaining.iter_mut().enumerate() {
            let size = ids.len();
            let cat = &inst.categories()[c];
            let mut tail = tail_size(size, cat.q_minus, cat.q_plus, k);
            let mut head = 0usize;
            if c == c_star {
                head = 1;
                tail = tail.saturating_sub(1);
            }
            if head + tail > size {
                return Err(Error::Internal(format!(
                    "reduction would take {} of {} items in category {c}",
                    head + tail,
                    size
                )));
            }
            bundle.extend_from_slice(&ids[..head]);
            bundle.extend_from_slice(&ids[size - tail..]);
            let kept: Vec<usize> = ids[head..size - tail].to_vec();
            *ids = kept;
        }
        bundles[agent] = bundle;
    }
}

/// `(2n-1)/n`-MMS allocation for an ordered (multi-category) instance of
/// chores. Not recursive: there is no valid reduction for chores.
pub fn approx_categorized_chores(inst: &Instance, alpha: &Rational) -> Result<Allocation> {
    Ok(approx_categorized_chores_run(inst, alpha, RunOptions::default())?.allocation)
}

pub fn approx_categorized_chores_run(
    inst: &Instance,
    alpha: &Rational,
    opts: RunOptions,
) -> Result<CategorizedRun> {
    check_preconditions(inst, Kind::Chores)?;
    let n = inst.n_agents();
    let lo = default_alpha_chores(n);
    let hi = rat(2);
    if !(alpha >= &lo && alpha <= &hi) {
        return Err(Error::Precondition(format!(
            "alpha {} outside the admissible band [{}, {}]",
            alpha, lo, hi
        )));
    }
    let remaining: Vec<Vec<usize>> = inst
        .categories()
        .iter()
        .map(|c| c.item_ids.clone())
        .collect();
    let agents: Vec<usize> = (0..n).collect();
    // μ̂_i = min{ v_i(M)/n, min_g v_i(g) }.
    let mu_hat: Vec<Rational> = (0..n)
        .map(|a| {
            let avg = total_value(inst, a, &remaining) / rat(n as i64);
            let worst_item = inst.valuations()[a].iter().min();
            match worst_item {
                Some(w) => avg.min(w.clone()),
                None => avg,
            }
        })
        .collect();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mu_hat_report: Vec<Rational> = vec![Rational::default(); n];
    main_rounds_chores(
        inst,
        remaining,
        &agents,
        &mu_hat,
        alpha,
        opts,
        &mut bundles,
        &mut mu_hat_report,
    )?;
    Ok(CategorizedRun {
        allocation: Allocation::new(bundles),
        alpha: alpha.clone(),
        mu_hat: mu_hat_report,
    })
}

fn check_preconditions(inst: &Instance, kind: Kind) -> Result<()> {
    if inst.kind() != kind {
        return Err(Error::Precondition(format!(
            "algorithm requires kind {}",
            kind.as_str()
        )));
    }
    if !inst.is_ordered() {
        return Err(Error::Precondition(
            "algorithm requires an ordered instance; apply to_ordered first".to_string(),
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

fn total_value(inst: &Instance, agent: usize, remaining: &[Vec<usize>]) -> Rational {
    remaining
        .iter()
        .flatten()
        .map(|&g| inst.value(agent, g))
        .fold(Rational::default(), |acc, v| acc + v)
}

/// The bag within one round: per-category index sets into the remaining
/// lists, with the bag's running value per local agent.
struct RoundBag {
    per_cat: Vec<BTreeSet<usize>>,
    values: Vec<Rational>,
}

#[allow(clippy::too_many_arguments)]
fn main_rounds_goods(
    inst: &Instance,
    mut remaining: Vec<Vec<usize>>,
    agents: &[usize],
    mu_hat: &[Rational],
    alpha: &Rational,
    opts: RunOptions,
    bundles: &mut [Vec<usize>],
    mu_hat_report: &mut [Rational],
) -> Result<()> {
    let n_local = agents.len();
    let thresholds: Vec<Rational> = mu_hat.iter().map(|mu| alpha * mu).collect();
    let mut active: Vec<usize> = (0..n_local).collect();

    for t in (1..=n_local).rev() {
        let counts: Vec<usize> = remaining.iter().map(|ids| ids.len()).collect();
        let floors: Vec<usize> = counts.iter().map(|&c| c / t).collect();
        let ceils: Vec<usize> = counts.iter().map(|&c| c.div_ceil(t)).collect();

        // Seed with each category's least valuable floor-many items.
        let mut bag = RoundBag {
            per_cat: counts
                .iter()
                .zip(&floors)
                .map(|(&cnt, &fl)| (cnt - fl..cnt).collect())
                .collect(),
            values: vec![Rational::default(); n_local],
        };
        for (c, ids) in remaining.iter().enumerate() {
            for &idx in &bag.per_cat[c] {
                for (local, &a) in agents.iter().enumerate() {
                    let v = inst.value(a, ids[idx]).clone();
                    bag.values[local] += v;
                }
            }
        }

        for c in 0..remaining.len() {
            loop {
                let someone = active.iter().any(|&i| bag.values[i] >= thresholds[i]);
                if someone {
                    break;
                }
                // Stop once B ∩ C is the ceiling-many most valuable items.
                let set = &bag.per_cat[c];
                if set.len() == ceils[c] && set.last().map_or(true, |&mx| mx == ceils[c] - 1) {
                    break;
                }
                if set.len() == ceils[c] {
                    let worst = *set.iter().next_back().expect("non-empty at the ceiling");
                    bag.per_cat[c].remove(&worst);
                    for (local, &a) in agents.iter().enumerate() {
                        let v = inst.value(a, remaining[c][worst]).clone();
                        bag.values[local] -= v;
                    }
                }
                let best_outside = (0..counts[c])
                    .find(|idx| !bag.per_cat[c].contains(idx))
                    .ok_or_else(|| Error::Internal("no item left to add to the bag".into()))?;
                bag.per_cat[c].insert(best_outside);
                for (local, &a) in agents.iter().enumerate() {
                    let v = inst.value(a, remaining[c][best_outside]).clone();
                    bag.values[local] += v;
                }
            }
        }

        assign_round(
            inst,
            &mut remaining,
            agents,
            &mut active,
            bag,
            &floors,
            &ceils,
            mu_hat,
            &thresholds,
            t,
            opts,
            bundles,
            mu_hat_report,
            true,
            alpha,
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn main_rounds_chores(
    inst: &Instance,
    mut remaining: Vec<Vec<usize>>,
    agents: &[usize],
    mu_hat: &[Rational],
    alpha: &Rational,
    opts: RunOptions,
    bundles: &mut [Vec<usize>],
    mu_hat_report: &mut [Rational],
) -> Result<()> {
    let n_local = agents.len();
    let thresholds: Vec<Rational> = mu_hat.iter().map(|mu| alpha * mu).collect();
    let mut active: Vec<usize> = (0..n_local).collect();

    for t in (1..=n_local).rev() {
        let counts: Vec<usize> = remaining.iter().map(|ids| ids.len()).collect();
        let floors: Vec<usize> = counts.iter().map(|&c| c / t).collect();
        let ceils: Vec<usize> = counts.iter().map(|&c| c.div_ceil(t)).collect();

        // Seed with each category's least valuable ceiling-many items.
        let mut bag = RoundBag {
            per_cat: counts
                .iter()
                .zip(&ceils)
                .map(|(&cnt, &ce)| (cnt - ce..cnt).collect())
                .collect(),
            values: vec![Rational::default(); n_local],
        };
        for (c, ids) in remaining.iter().enumerate() {
            for &idx in &bag.per_cat[c] {
                for (local, &a) in agents.iter().enumerate() {
                    let v = inst.value(a, ids[idx]).clone();
                    bag.values[local] += v;
                }
            }
        }

        for c in 0..remaining.len() {
            loop {
                let someone = active.iter().any(|&i| bag.values[i] >= thresholds[i]);
                if someone {
                    break;
                }
                // Stop once B ∩ C is the floor-many most valuable items.
                let set = &bag.per_cat[c];
                if set.len() == floors[c] && set.last().map_or(true, |&mx| mx == floors[c] - 1) {
                    break;
                }
                let at_floor = set.len() == floors[c];
                let worst = *set
                    .iter()
                    .next_back()
                    .ok_or_else(|| Error::Internal("pruning an empty bag slice".into()))?;
                bag.per_cat[c].remove(&worst);
                for (local, &a) in agents.iter().enumerate() {
                    let v = inst.value(a, remaining[c][worst]).clone();
                    bag.values[local] -= v;
                }
                if at_floor {
                    let best_outside = (0..counts[c])
                        .find(|idx| !bag.per_cat[c].contains(idx))
                        .ok_or_else(|| Error::Internal("no item left to swap into the bag".into()))?;
                    bag.per_cat[c].insert(best_outside);
                    for (local, &a) in agents.iter().enumerate() {
                        let v = inst.value(a, remaining[c][best_outside]).clone();
                        bag.values[local] += v;
                    }
                }
            }
        }

        assign_round(
            inst,
            &mut remaining,
            agents,
            &mut active,
            bag,
            &floors,
            &ceils,
            mu_hat,
            &thresholds,
            t,
            opts,
            bundles,
            mu_hat_report,
            false,
            alpha,
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assign_round(
    inst: &Instance,
    remaining: &mut Vec<Vec<usize>>,
    agents: &[usize],
    active: &mut Vec<usize>,
    bag: RoundBag,
    floors: &[usize],
    ceils: &[usize],
    mu_hat: &[Rational],
    thresholds: &[Rational],
    t: usize,
    opts: RunOptions,
    bundles: &mut [Vec<usize>],
    mu_hat_report: &mut [Rational],
    goods: bool,
    alpha: &Rational,
) -> Result<()> {
    // Per-category bag bounds must hold at every assignment.
    for (c, set) in bag.per_cat.iter().enumerate() {
        if set.len() < floors[c] || set.len() > ceils[c] {
            return Err(Error::InvariantViolated {
                label: "bag-bounds",
                detail: format!(
                    "category {c}: |B∩C| = {} outside [{}, {}]",
                    set.len(),
                    floors[c],
                    ceils[c]
                ),
            });
        }
    }
    let chosen = active
        .iter()
        .position(|&i| bag.values[i] >= thresholds[i])
        .ok_or_else(|| {
            Error::Internal(format!(
                "no remaining agent accepts the bag at round t={t}; \
                 the invariants exclude this for in-band alpha"
            ))
        })?;
    let local = active.remove(chosen);
    let agent = agents[local];
    mu_hat_report[agent] = mu_hat[local].clone();
    let mut bundle = Vec::new();
    for (c, ids) in remaining.iter_mut().enumerate() {
        let taken = &bag.per_cat[c];
        bundle.extend(taken.iter().map(|&idx| ids[idx]));
        let kept: Vec<usize> = ids
            .iter()
            .enumerate()
            .filter(|(idx, _)| !taken.contains(idx))
            .map(|(_, &id)| id)
            .collect();
        *ids = kept;
    }
    bundles[agent] = bundle;

    if opts.check_invariants {
        check_categorized_state(
            inst,
            remaining,
            agents,
            active,
            mu_hat,
            alpha,
            t - 1,
            goods,
        )
        .map_err(|(label, detail)| Error::InvariantViolated { label, detail })?;
    }
    Ok(())
}

/// Conditions (C1) to (C4) of the categorized invariants at boundary `t`:
/// the remaining pool is disjoint from assigned bundles and covers the rest
/// (guaranteed structurally here), per-category remaining counts stay in
/// `[q⁻t, q⁺t]`, and the remaining pool keeps enough value for the
/// remaining agents.
#[allow(clippy::too_many_arguments)]
fn check_categorized_state(
    inst: &Instance,
    remaining: &[Vec<usize>],
    agents: &[usize],
    active: &[usize],
    mu_hat: &[Rational],
    alpha: &Rational,
    t: usize,
    goods: bool,
) -> std::result::Result<(), (&'static str, String)> {
    for (c, ids) in remaining.iter().enumerate() {
        let cat = &inst.categories()[c];
        if ids.len() < cat.q_minus * t || ids.len() > cat.q_plus * t {
            return Err((
                "C3",
                format!(
                    "category {c}: {} remaining items outside [{}, {}] at t={t}",
                    ids.len(),
                    cat.q_minus * t,
                    cat.q_plus * t
                ),
            ));
        }
    }
    let n_local = agents.len();
    for &local in active {
        let value = total_value(inst, agents[local], remaining);
        let required = if goods {
            (rat(t as i64) - (rat(2) * alpha - rat(1)) * rat((n_local - t) as i64)) * &mu_hat[local]
        } else {
            (rat(t as i64) + (rat(2) - alpha) * rat((n_local - t) as i64)) * &mu_hat[local]
        };
        if value < required {
            return Err((
                "C4",
                format!(
                    "agent {}: remaining value {} < required {} at t={t}",
                    agents[local], value, required
                ),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{mms_bruteforce, mms_values};
    use crate::verify::verify_alpha_mms;

    fn two_cat(
        n: usize,
        sizes: (usize, usize),
        q1: (usize, usize),
        q2: (usize, usize),
        rows: Vec<Vec<i64>>,
        kind: Kind,
    ) -> Instance {
        let vals = rows
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::new(
            n,
            vec![
                Category::new("A", (0..sizes.0).collect(), q1.0, q1.1),
                Category::new("B", (sizes.0..sizes.0 + sizes.1).collect(), q2.0, q2.1),
            ],
            vals,
            kind,
        )
        .unwrap()
    }

    #[test]
    fn reduction_bundle_with_empty_tails() {
        // d=0, q⁻=0, q⁺ large: only the category's best item leaves.
        let inst = two_cat(
            3,
            (3, 3),
            (0, 3),
            (0, 3),
            vec![vec![5, 4, 3, 2, 1, 0]; 3],
            Kind::Goods,
        );
        let red = valid_reduction_bundle(&inst, 0, 0, 0).unwrap();
        assert_eq!(red.bundle, vec![0]);
        assert_eq!(red.reduced.n_items(), 5);
    }

    #[test]
    fn reduction_bundle_with_unit_quotas() {
        // d=0, |C1|=|C2|=3, n=3, q=(1,1) both: head g^{C*}_1, tail sizes
        // max{1, 3-2} = 1 per category (minus the head for C*).
        let inst = two_cat(
            3,
            (3, 3),
            (1, 1),
            (1, 1),
            vec![vec![5, 4, 3, 2, 1, 0]; 3],
            Kind::Goods,
        );
        let red = valid_reduction_bundle(&inst, 0, 0, 0).unwrap();
        // g^{C*}_1 = item 0, plus nothing more from C* (tail 1-1=0)...
        // tail of C* is max{1, 3-2} - 1 = 0, other category's tail is item 5.
        assert_eq!(red.bundle, vec![0, 5]);
        let report = validate_instance(&red.reduced);
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn reduction_keeps_survivor_mms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..80 {
            let n = rng.random_range(2..=3);
            let s1 = rng.random_range(n..=4);
            let s2 = rng.random_range(n..=4);
            let mk_row = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut a: Vec<i64> = (0..s1).map(|_| rng.random_range(0..=5)).collect();
                let mut b: Vec<i64> = (0..s2).map(|_| rng.random_range(0..=5)).collect();
                a.sort_unstable_by(|x, y| y.cmp(x));
                b.sort_unstable_by(|x, y| y.cmp(x));
                a.extend(b);
                a
            };
            let rows: Vec<Vec<i64>> = (0..n).map(|_| mk_row(&mut rng)).collect();
            let inst = two_cat(
                n,
                (s1, s2),
                (1, s1),
                (0, s2),
                rows,
                Kind::Goods,
            );
            if !validate_instance(&inst).ok() {
                continue;
            }
            let red = match valid_reduction_bundle(&inst, 0, 0, 0) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for survivor in 1..n {
                let before = mms_bruteforce(&inst, survivor).unwrap().value;
                let after = mms_bruteforce(&red.reduced, survivor - 1).unwrap().value;
                assert!(after >= before);
            }
        }
    }

    #[test]
    fn uniform_single_category_split() {
        // Single category q=(0,m): n=2, four items of value 1 give everyone
        // value 2 = μ.
        let inst = Instance::single_category(
            2,
            vec![vec![rat(1); 4]; 2],
            0,
            4,
            Kind::Goods,
        )
        .unwrap();
        let alloc = approx_categorized_goods(&inst, &default_alpha_goods(2)).unwrap();
        for agent in 0..2 {
            assert_eq!(
                inst.bundle_value(agent, &alloc.bundles[agent]).unwrap(),
                rat(2)
            );
        }
    }

    #[test]
    fn two_categories_meet_two_thirds_of_mms() {
        // v = [3,1 | 2,2] for both agents, q=(1,1) per category. The four
        // feasible allocations give bundle values (5,3) or (3,5), so μ = 3.
        let inst = two_cat(
            2,
            (2, 2),
            (1, 1),
            (1, 1),
            vec![vec![3, 1, 2, 2]; 2],
            Kind::Goods,
        );
        let mus = mms_values(&inst).unwrap();
        assert_eq!(mus[0], rat(3));
        let alpha = default_alpha_goods(2);
        let alloc = approx_categorized_goods(&inst, &alpha).unwrap();
        let report = verify_alpha_mms(&inst, &alloc, &alpha, &mus).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn uniform_chores_split_evenly() {
        let inst = Instance::single_category(
            2,
            vec![vec![rat(-1); 4]; 2],
            0,
            4,
            Kind::Chores,
        )
        .unwrap();
        let alloc = approx_categorized_chores(&inst, &default_alpha_chores(2)).unwrap();
        for agent in 0..2 {
            assert_eq!(
                inst.bundle_value(agent, &alloc.bundles[agent]).unwrap(),
                rat(-2)
            );
        }
    }

    #[test]
    fn single_chore_agent_case() {
        let inst = Instance::single_category(
            1,
            vec![vec![rat(-1), rat(-3)]],
            0,
            2,
            Kind::Chores,
        )
        .unwrap();
        let alloc = approx_categorized_chores(&inst, &default_alpha_chores(1)).unwrap();
        assert_eq!(alloc.bundles[0], vec![0, 1]);
    }

    #[test]
    fn random_goods_meet_guarantee_with_invariants_on() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        let opts = RunOptions {
            check_invariants: true,
        };
        for _ in 0..100 {
            let n = 3;
            let s1 = rng.random_range(3..=5);
            let s2 = rng.random_range(3..=4);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    let mut a: Vec<i64> = (0..s1).map(|_| rng.random_range(0..=6)).collect();
                    let mut b: Vec<i64> = (0..s2).map(|_| rng.random_range(0..=6)).collect();
                    a.sort_unstable_by(|x, y| y.cmp(x));
                    b.sort_unstable_by(|x, y| y.cmp(x));
                    a.extend(b);
                    a
                })
                .collect();
            let inst = two_cat(n, (s1, s2), (1, 2), (0, 2), rows, Kind::Goods);
            if !validate_instance(&inst).ok() {
                continue;
            }
            let alpha = default_alpha_goods(n);
            let run = approx_categorized_goods_run(&inst, &alpha, opts).unwrap();
            let mus = mms_values(&inst).unwrap();
            let report = verify_alpha_mms(&inst, &run.allocation, &alpha, &mus).unwrap();
            assert!(report.ok, "violation: {:?}", report.margins);
        }
    }

    #[test]
    fn random_chores_meet_guarantee_with_invariants_on() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        let opts = RunOptions {
            check_invariants: true,
        };
        for _ in 0..100 {
            let n = 3;
            let s1 = rng.random_range(3..=5);
            let s2 = rng.random_range(3..=4);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    let mut a: Vec<i64> = (0..s1).map(|_| -rng.random_range(0..=4)).collect();
                    let mut b: Vec<i64> = (0..s2).map(|_| -rng.random_range(0..=4)).collect();
                    a.sort_unstable_by(|x, y| y.cmp(x));
                    b.sort_unstable_by(|x, y| y.cmp(x));
                    a.extend(b);
                    a
                })
                .collect();
            let inst = two_cat(n, (s1, s2), (1, 2), (0, 2), rows, Kind::Chores);
            if !validate_instance(&inst).ok() {
                continue;
            }
            let alpha = default_alpha_chores(n);
            let run = approx_categorized_chores_run(&inst, &alpha, opts).unwrap();
            let mus = mms_values(&inst).unwrap();
            let report = verify_alpha_mms(&inst, &run.allocation, &alpha, &mus).unwrap();
            assert!(report.ok, "violation: {:?}", report.margins);
        }
    }
}
