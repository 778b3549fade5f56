//! Instance model: agents, items, categories with quota pairs, valuations,
//! plus the feasibility predicates and exact valuation arithmetic.

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::rational::Rational;
use crate::Result;

/// Sign restriction on item values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// All values are non-negative.
    Goods,
    /// All values are non-positive.
    Chores,
    /// No sign restriction. Representable, but rejected by the
    /// approximation algorithms; only the bivalued exact solver accepts it.
    Mixed,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Goods => "goods",
            Kind::Chores => "chores",
            Kind::Mixed => "mixed",
        }
    }
}

/// A category: an ordered list of item ids plus its quota pair.
///
/// In an ordered instance `item_ids` is sorted so that every agent's value
/// is non-increasing along the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub item_ids: Vec<usize>,
    pub q_minus: usize,
    pub q_plus: usize,
}

impl Category {
    pub fn new(name: impl Into<String>, item_ids: Vec<usize>, q_minus: usize, q_plus: usize) -> Self {
        Category {
            name: name.into(),
            item_ids,
            q_minus,
            q_plus,
        }
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }
}

/// A problem instance: agents, categorized items and the valuation table.
///
/// Items are identified by stable integer ids `0..m-1`. The categories
/// partition the item ids; `valuations[i][g]` is agent `i`'s value for
/// item `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n_agents: usize,
    categories: Vec<Category>,
    valuations: Vec<Vec<Rational>>,
    kind: Kind,
    n_items: usize,
}

impl Instance {
    /// Builds an instance, checking structural sanity: the categories must
    /// partition `0..m-1` and the valuation table must be `n x m`.
    ///
    /// Semantic invariants (quota inequalities, value signs, `n >= 1`) are
    /// reported by [`validate_instance`] rather than rejected here.
    pub fn new(
        n_agents: usize,
        categories: Vec<Category>,
        valuations: Vec<Vec<Rational>>,
        kind: Kind,
    ) -> Result<Self> {
        let n_items: usize = categories.iter().map(|c| c.item_ids.len()).sum();
        let mut seen = vec![false; n_items];
        for cat in &categories {
            for &g in &cat.item_ids {
                if g >= n_items {
                    return Err(Error::MalformedInstance(format!(
                        "category {:?} references item {} but there are {} items",
                        cat.name, g, n_items
                    )));
                }
                if seen[g] {
                    return Err(Error::MalformedInstance(format!(
                        "item {} appears in more than one category",
                        g
                    )));
                }
                seen[g] = true;
            }
        }
        if valuations.len() != n_agents {
            return Err(Error::MalformedInstance(format!(
                "expected {} valuation rows, got {}",
                n_agents,
                valuations.len()
            )));
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != n_items {
                return Err(Error::MalformedInstance(format!(
                    "agent {} has {} values, expected {}",
                    i,
                    row.len(),
                    n_items
                )));
            }
        }
        Ok(Instance {
            n_agents,
            categories,
            valuations,
            kind,
            n_items,
        })
    }

    /// Single-category convenience constructor; the category is named `"M"`
    /// and holds items `0..m-1` in id order.
    pub fn single_category(
        n_agents: usize,
        valuations: Vec<Vec<Rational>>,
        q_minus: usize,
        q_plus: usize,
        kind: Kind,
    ) -> Result<Self> {
        let m = valuations.first().map_or(0, |r| r.len());
        let cat = Category::new("M", (0..m).collect(), q_minus, q_plus);
        Instance::new(n_agents, vec![cat], valuations, kind)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    /// Agent `i`'s value for item `g`.
    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.valuations[agent][item]
    }

    pub fn is_single_category(&self) -> bool {
        self.categories.len() == 1
    }

    /// Index of the category containing each item.
    pub fn category_of_items(&self) -> Vec<usize> {
        let mut of = vec![usize::MAX; self.n_items];
        for (c, cat) in self.categories.iter().enumerate() {
            for &g in &cat.item_ids {
                of[g] = c;
            }
        }
        of
    }

    /// True iff all agents have equal valuation rows.
    pub fn agents_identical(&self) -> bool {
        self.valuations.windows(2).all(|w| w[0] == w[1])
    }

    /// True iff `item_ids` of every category is sorted so that every
    /// agent's values are non-increasing along the list.
    pub fn is_ordered(&self) -> bool {
        self.categories.iter().all(|cat| {
            self.valuations.iter().all(|row| {
                cat.item_ids
                    .windows(2)
                    .all(|w| row[w[0]] >= row[w[1]])
            })
        })
    }

    /// Exact additive value of a bundle for one agent; the empty bundle has
    /// value zero.
    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Result<Rational> {
        if agent >= self.n_agents {
            return Err(Error::AgentOutOfRange {
                agent,
                agents: self.n_agents,
            });
        }
        let mut sum = Rational::zero();
        for &g in bundle {
            if g >= self.n_items {
                return Err(Error::ItemNotInInstance { item: g });
            }
            sum += &self.valuations[agent][g];
        }
        Ok(sum)
    }

    /// True iff every category's intersection count with `bundle` lies in
    /// `[q_minus, q_plus]`.
    pub fn is_feasible_bundle(&self, bundle: &[usize]) -> Result<bool> {
        for &g in bundle {
            if g >= self.n_items {
                return Err(Error::ItemNotInInstance { item: g });
            }
        }
        let of = self.category_of_items();
        let mut counts = vec![0usize; self.categories.len()];
        for &g in bundle {
            counts[of[g]] += 1;
        }
        Ok(self
            .categories
            .iter()
            .zip(&counts)
            .all(|(cat, &c)| cat.q_minus <= c && c <= cat.q_plus))
    }

    /// True iff `alloc` partitions the items and every bundle is feasible.
    pub fn is_feasible_allocation(&self, alloc: &Allocation) -> Result<bool> {
        alloc.check_partition(self)?;
        for bundle in &alloc.bundles {
            if !self.is_feasible_bundle(bundle)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An ordered partition of the items, one bundle per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Builds an allocation with each bundle sorted by item id.
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for b in &mut bundles {
            b.sort_unstable();
        }
        Allocation { bundles }
    }

    pub fn n_bundles(&self) -> usize {
        self.bundles.len()
    }

    /// Errors unless the bundles are disjoint and cover all items of `inst`.
    pub fn check_partition(&self, inst: &Instance) -> Result<()> {
        if self.bundles.len() != inst.n_agents() {
            return Err(Error::NotAPartition(format!(
                "{} bundles for {} agents",
                self.bundles.len(),
                inst.n_agents()
            )));
        }
        let mut seen = vec![false; inst.n_items()];
        let mut total = 0usize;
        for bundle in &self.bundles {
            for &g in bundle {
                if g >= inst.n_items() {
                    return Err(Error::NotAPartition(format!("unknown item {}", g)));
                }
                if seen[g] {
                    return Err(Error::NotAPartition(format!("item {} assigned twice", g)));
                }
                seen[g] = true;
                total += 1;
            }
        }
        if total != inst.n_items() {
            return Err(Error::NotAPartition(format!(
                "{} of {} items assigned",
                total,
                inst.n_items()
            )));
        }
        Ok(())
    }

    /// Which bundle holds each item; items must be partitioned.
    pub fn holder_of_items(&self, n_items: usize) -> Vec<usize> {
        let mut holder = vec![usize::MAX; n_items];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                holder[g] = i;
            }
        }
        holder
    }
}

/// Outcome of [`validate_instance`]: either ok or a list of violations.
/// Violations are data, not exceptions.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the semantic instance invariants:
///
/// * `n >= 1` (a zero-agent instance is rejected; one agent is fine),
/// * `q_minus <= q_plus` per category,
/// * the quota inequality `q_minus * n <= |C| <= q_plus * n` per category,
/// * the sign restriction implied by `kind`.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let n = inst.n_agents();
    if n == 0 {
        violations.push("instance must have at least one agent".to_string());
    }
    for cat in inst.categories() {
        if cat.q_minus > cat.q_plus {
            violations.push(format!(
                "category {:?}: q⁻={} > q⁺={}",
                cat.name, cat.q_minus, cat.q_plus
            ));
        }
        let size = cat.len();
        if cat.q_minus * n > size {
            violations.push(format!(
                "category {:?}: q⁻·n={} > |C|={}",
                cat.name,
                cat.q_minus * n,
                size
            ));
        }
        if cat.q_plus * n < size {
            violations.push(format!(
                "category {:?}: q⁺·n={} < |C|={}",
                cat.name,
                cat.q_plus * n,
                size
            ));
        }
    }
    match inst.kind() {
        Kind::Goods => {
            'outer: for (i, row) in inst.valuations().iter().enumerate() {
                for (g, v) in row.iter().enumerate() {
                    if v.is_negative() {
                        violations.push(format!(
                            "kind is goods but v_{}(g_{}) = {} < 0",
                            i,
                            g,
                            crate::rational::format_rational(v)
                        ));
                        break 'outer;
                    }
                }
            }
        }
        Kind::Chores => {
            'outer: for (i, row) in inst.valuations().iter().enumerate() {
                for (g, v) in row.iter().enumerate() {
                    if v.is_positive() {
                        violations.push(format!(
                            "kind is chores but v_{}(g_{}) = {} > 0",
                            i,
                            g,
                            crate::rational::format_rational(v)
                        ));
                        break 'outer;
                    }
                }
            }
        }
        Kind::Mixed => {}
    }
    ValidationReport { violations }
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
    fn validate_quota_bounds() {
        // Equality at both bounds: 1*2 <= 4 <= 2*2.
        let inst = goods(2, vec![vec![1, 1, 1, 1]; 2], (1, 2));
        assert!(validate_instance(&inst).ok());

        // Lower-bound violation: q⁻·n = 4 > |C| = 3.
        let inst = goods(2, vec![vec![1, 1, 1]; 2], (2, 3));
        let report = validate_instance(&inst);
        assert!(!report.ok());
        assert!(report.violations[0].contains("q⁻·n=4 > |C|=3"));

        // Exact quotas on two categories.
        let vals: Vec<Vec<Rational>> = vec![(0..9).map(rat).collect(); 3];
        let inst = Instance::new(
            3,
            vec![
                Category::new("A", vec![0, 1, 2], 1, 1),
                Category::new("B", vec![3, 4, 5, 6, 7, 8], 2, 2),
            ],
            vals,
            Kind::Goods,
        )
        .unwrap();
        assert!(validate_instance(&inst).ok());
    }

    #[test]
    fn validate_rejects_zero_agents_and_wrong_signs() {
        let inst = Instance::new(0, vec![Category::new("M", vec![], 0, 0)], vec![], Kind::Goods)
            .unwrap();
        assert!(!validate_instance(&inst).ok());

        let inst = Instance::single_category(
            1,
            vec![vec![rat(-1), rat(2)]],
            0,
            2,
            Kind::Goods,
        )
        .unwrap();
        let report = validate_instance(&inst);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("goods"));
    }

    #[test]
    fn feasible_bundle_counts() {
        let inst = goods(2, vec![vec![0, 0, 0, 0]; 2], (1, 2));
        assert!(inst.is_feasible_bundle(&[0, 2]).unwrap());
        assert!(!inst.is_feasible_bundle(&[0, 1, 2]).unwrap());
        assert!(matches!(
            inst.is_feasible_bundle(&[9]),
            Err(Error::ItemNotInInstance { item: 9 })
        ));

        let vals: Vec<Vec<Rational>> = vec![(0..4).map(rat).collect(); 2];
        let two_cats = Instance::new(
            2,
            vec![
                Category::new("A", vec![0, 1], 1, 1),
                Category::new("B", vec![2, 3], 1, 1),
            ],
            vals,
            Kind::Goods,
        )
        .unwrap();
        assert!(two_cats.is_feasible_bundle(&[0, 3]).unwrap());
        assert!(!two_cats.is_feasible_bundle(&[0, 1]).unwrap());
    }

    #[test]
    fn feasible_allocation_checks_partition() {
        let inst = goods(2, vec![vec![0, 0, 0, 0]; 2], (2, 2));
        let ok = Allocation::new(vec![vec![0, 1], vec![2, 3]]);
        assert!(inst.is_feasible_allocation(&ok).unwrap());

        let lopsided = Allocation::new(vec![vec![0, 1, 2], vec![3]]);
        assert!(!inst.is_feasible_allocation(&lopsided).unwrap());

        let overlapping = Allocation::new(vec![vec![0, 1], vec![1, 2]]);
        assert!(matches!(
            inst.is_feasible_allocation(&overlapping),
            Err(Error::NotAPartition(_))
        ));

        // A one-agent allocation is feasible iff the whole item set fits the quotas.
        let solo = goods(1, vec![vec![1, 2, 3]], (1, 3));
        let all = Allocation::new(vec![vec![0, 1, 2]]);
        assert!(solo.is_feasible_allocation(&all).unwrap());
        let tight = goods(1, vec![vec![1, 2, 3]], (3, 3));
        assert!(tight.is_feasible_allocation(&all).unwrap());
    }

    #[test]
    fn bundle_value_is_exact_sum() {
        let inst = goods(1, vec![vec![3, 2, 1]], (0, 3));
        assert_eq!(inst.bundle_value(0, &[0, 2]).unwrap(), rat(4));
        assert_eq!(inst.bundle_value(0, &[]).unwrap(), rat(0));
        assert!(matches!(
            inst.bundle_value(1, &[0]),
            Err(Error::AgentOutOfRange { .. })
        ));

        let chores = Instance::single_category(
            1,
            vec![vec![crate::rational::ratio(-1, 2), crate::rational::ratio(-1, 2)]],
            0,
            2,
            Kind::Chores,
        )
        .unwrap();
        assert_eq!(chores.bundle_value(0, &[0, 1]).unwrap(), rat(-1));
    }
}
