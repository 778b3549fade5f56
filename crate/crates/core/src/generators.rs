//! Constructors for tight worst-case families and reproducible random
//! instance samplers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::instance::{Category, Instance, Kind};
use crate::rational::{rat, ratio, Rational};
use crate::Result;

/// The tight goods family: `n` agents, `3n` goods, quotas `(3, 3)`,
/// identical valuations chosen so the oracle MMS is exactly `1` for every
/// agent while the bag-filling algorithm cannot beat `2n/(3n-1)`.
///
/// The instance is emitted already ordered.
pub fn tight_goods_instance(n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Precondition("tight family needs n >= 1".to_string()));
    }
    let n_i = n as i64;
    let m = 3 * n;
    let values: Vec<Rational> = (1..=m as i64)
        .map(|j| {
            if j <= n_i {
                ratio(2 * n_i - j, 3 * n_i - 1)
            } else if j <= 3 * n_i - 2 {
                // ⌈(5n + 1 - j) / 2⌉ over the common denominator 6n - 2.
                ratio((5 * n_i + 2 - j) / 2, 6 * n_i - 2)
            } else {
                ratio(3 * n_i - j, 3 * n_i - 1)
            }
        })
        .collect();
    Instance::single_category(n, vec![values; n], 3, 3, Kind::Goods)
}

/// The tight chores family: `n` agents, `2n` chores, quotas `(1, n+1)`,
/// identical valuations with oracle MMS exactly `-1` while the algorithm's
/// worst agent lands exactly at `(3n-1)/(2n)` times that.
pub fn tight_chores_instance(n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Precondition("tight family needs n >= 1".to_string()));
    }
    let n_i = n as i64;
    let m = 2 * n;
    let values: Vec<Rational> = (1..=m as i64)
        .map(|j| {
            if j < n_i {
                ratio(-1, 2 * n_i)
            } else if j <= n_i + 1 {
                ratio(-1, 2)
            } else {
                ratio(1, 2 * n_i) - rat(1)
            }
        })
        .collect();
    Instance::single_category(n, vec![values; n], 1, n + 1, Kind::Chores)
}

/// Relabels item ids by a seeded permutation and scrambles each category's
/// list order, so the result is equivalent to `inst` but no longer ordered.
/// Exercises the ordered-instance reduction.
pub fn shuffle_items(inst: &Instance, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = inst.n_items();
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);

    let categories = inst
        .categories()
        .iter()
        .map(|cat| {
            let mut ids: Vec<usize> = cat.item_ids.iter().map(|&g| perm[g]).collect();
            ids.shuffle(&mut rng);
            Category::new(cat.name.clone(), ids, cat.q_minus, cat.q_plus)
        })
        .collect();
    let mut valuations = vec![vec![Rational::default(); m]; inst.n_agents()];
    for (i, row) in inst.valuations().iter().enumerate() {
        for (g, v) in row.iter().enumerate() {
            valuations[i][perm[g]] = v.clone();
        }
    }
    Instance::new(inst.n_agents(), categories, valuations, inst.kind())
        .expect("permutation preserves instance shape")
}

/// How quotas are derived from category sizes in [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotaPolicy {
    /// `(⌊|C|/n⌋, ⌈|C|/n⌉)`: as tight as the sizes allow.
    Tight,
    /// `(⌊|C|/(2n)⌋, min(|C|, 2·⌈|C|/n⌉))`: slack on both sides.
    Loose,
    /// `(⌊|C|/n⌋, |C|)`: only the lower quota binds.
    LowerOnly,
    /// `(0, ⌈|C|/n⌉)`: only the upper quota binds.
    UpperOnly,
    /// `(0, |C|)`.
    Unconstrained,
}

impl QuotaPolicy {
    pub fn quotas(&self, size: usize, n: usize) -> (usize, usize) {
        let floor = size / n;
        let ceil = size.div_ceil(n);
        match self {
            QuotaPolicy::Tight => (floor, ceil),
            QuotaPolicy::Loose => (size / (2 * n), (2 * ceil).min(size)),
            QuotaPolicy::LowerOnly => (floor, size),
            QuotaPolicy::UpperOnly => (0, ceil),
            QuotaPolicy::Unconstrained => (0, size),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tight" => Ok(QuotaPolicy::Tight),
            "loose" => Ok(QuotaPolicy::Loose),
            "lower-only" => Ok(QuotaPolicy::LowerOnly),
            "upper-only" => Ok(QuotaPolicy::UpperOnly),
            "unconstrained" => Ok(QuotaPolicy::Unconstrained),
            other => Err(Error::Unsatisfiable(format!(
                "unknown quota policy {:?}",
                other
            ))),
        }
    }
}

/// Deterministic random instance: values are small integers drawn uniformly
/// from `value_range`, quotas derived from `quota_policy`. The same inputs
/// always produce the same instance.
pub fn random_instance(
    seed: u64,
    n_agents: usize,
    category_sizes: &[usize],
    quota_policy: QuotaPolicy,
    value_range: (i64, i64),
    kind: Kind,
) -> Result<Instance> {
    if n_agents == 0 {
        return Err(Error::Unsatisfiable("need at least one agent".to_string()));
    }
    if category_sizes.is_empty() || category_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Unsatisfiable(
            "category sizes must be positive".to_string(),
        ));
    }
    let (lo, hi) = value_range;
    if lo > hi {
        return Err(Error::Unsatisfiable(format!(
            "empty value range [{lo}, {hi}]"
        )));
    }
    match kind {
        Kind::Goods if lo < 0 => {
            return Err(Error::Unsatisfiable(
                "goods require a non-negative value range".to_string(),
            ))
        }
        Kind::Chores if hi > 0 => {
            return Err(Error::Unsatisfiable(
                "chores require a non-positive value range".to_string(),
            ))
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut categories = Vec::with_capacity(category_sizes.len());
    let mut next_id = 0usize;
    for (idx, &size) in category_sizes.iter().enumerate() {
        let (q_minus, q_plus) = quota_policy.quotas(size, n_agents);
        categories.push(Category::new(
            format!("c{idx}"),
            (next_id..next_id + size).collect(),
            q_minus,
            q_plus,
        ));
        next_id += size;
    }
    let m = next_id;
    let valuations = (0..n_agents)
        .map(|_| (0..m).map(|_| rat(rng.random_range(lo..=hi))).collect())
        .collect();
    Instance::new(n_agents, categories, valuations, kind)
}
