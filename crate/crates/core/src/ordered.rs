//! Ordered-instance reduction and allocation lifting.
//!
//! Any instance can be reduced to an *ordered* one, where within each
//! category every agent's values are non-increasing along the item list, by
//! replacing each agent's value at position `j` with the `j`-th largest of
//! that agent's values in the category. MMS values are unchanged by this
//! permutation of values, and an allocation for the ordered instance lifts
//! back to one for the original that is at least as good for every agent.

use crate::error::Error;
use crate::instance::{Allocation, Category, Instance};
use crate::rational::Rational;
use crate::Result;

/// The pair of an ordered instance and the original it was derived from.
///
/// Per category, the multiset of each agent's item values is identical in
/// both instances; only their arrangement along the category differs.
#[derive(Debug, Clone)]
pub struct OrderedReduction {
    pub ordered_instance: Instance,
    pub original_instance: Instance,
}

/// Computes the ordered instance: for each category and agent, position
/// `j` carries the `j`-th largest of that agent's values within the
/// category. Categories, quotas and kind are unchanged. Sorting is stable
/// on item id, so ties keep the lower original id first.
pub fn to_ordered(inst: &Instance) -> OrderedReduction {
    let mut valuations: Vec<Vec<Rational>> =
        vec![vec![Rational::default(); inst.n_items()]; inst.n_agents()];
    for cat in inst.categories() {
        for (agent, row) in inst.valuations().iter().enumerate() {
            let mut vals: Vec<&Rational> = cat.item_ids.iter().map(|&g| &row[g]).collect();
            // Descending by value; `sort_by` is stable, so equal values keep
            // the category's id order.
            vals.sort_by(|a, b| b.cmp(a));
            for (pos, v) in vals.into_iter().enumerate() {
                valuations[agent][cat.item_ids[pos]] = v.clone();
            }
        }
    }
    let ordered_instance = Instance::new(
        inst.n_agents(),
        inst.categories().to_vec(),
        valuations,
        inst.kind(),
    )
    .expect("ordered instance inherits a valid shape");
    OrderedReduction {
        ordered_instance,
        original_instance: inst.clone(),
    }
}

/// Per-agent, per-category iterator over original items in descending value
/// order (ties by lowest id), consuming each id exactly once.
struct ValueCursor {
    ids: Vec<usize>,
    next: usize,
}

impl ValueCursor {
    fn new(cat: &Category, row: &[Rational]) -> Self {
        let mut ids = cat.item_ids.clone();
        ids.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
        ValueCursor { ids, next: 0 }
    }

    fn take_best_unassigned(&mut self, assigned: &[bool]) -> Option<usize> {
        while self.next < self.ids.len() {
            let g = self.ids[self.next];
            self.next += 1;
            if !assigned[g] {
                return Some(g);
            }
        }
        None
    }
}

/// Lifts an allocation for the ordered instance back to the original
/// instance.
///
/// For each category, walking positions `j = 1..|C|`, the agent holding the
/// `j`-th ordered item receives their most valuable still-unassigned
/// original item in the category (ties to the lowest item id). The result
/// has the same per-category bundle cardinalities and satisfies
/// `v_i(A_i) >= ṽ_i(Ã_i)` for every agent.
pub fn lift_allocation(
    reduction: &OrderedReduction,
    ordered_alloc: &Allocation,
) -> Result<Allocation> {
    let ordered = &reduction.ordered_instance;
    let original = &reduction.original_instance;
    if !ordered.is_feasible_allocation(ordered_alloc)? {
        return Err(Error::InfeasibleAllocation(
            "ordered allocation is not feasible for the ordered instance".to_string(),
        ));
    }

    let holder = ordered_alloc.holder_of_items(ordered.n_items());
    let mut assigned = vec![false; original.n_items()];
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); original.n_agents()];

    for cat in original.categories() {
        let mut cursors: Vec<ValueCursor> = original
            .valuations()
            .iter()
            .map(|row| ValueCursor::new(cat, row))
            .collect();
        for &pos_item in &cat.item_ids {
            let agent = holder[pos_item];
            let g = cursors[agent]
                .take_best_unassigned(&assigned)
                .ok_or_else(|| Error::Internal("lift cursor exhausted".to_string()))?;
            assigned[g] = true;
            bundles[agent].push(g);
        }
    }
    Ok(Allocation::new(bundles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Kind;
    use crate::rational::rat;

    fn inst(n: usize, values: Vec<Vec<i64>>, q: (usize, usize), kind: Kind) -> Instance {
        let vals = values
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::single_category(n, vals, q.0, q.1, kind).unwrap()
    }

    #[test]
    fn orders_each_agent_independently() {
        let original = inst(2, vec![vec![1, 3, 2], vec![2, 1, 3]], (1, 2), Kind::Goods);
        let red = to_ordered(&original);
        let ord = &red.ordered_instance;
        assert_eq!(ord.valuations()[0], vec![rat(3), rat(2), rat(1)]);
        assert_eq!(ord.valuations()[1], vec![rat(3), rat(2), rat(1)]);
        assert!(ord.is_ordered());
    }

    #[test]
    fn idempotent_on_ordered_input() {
        let original = inst(2, vec![vec![3, 2, 1], vec![5, 5, 0]], (1, 2), Kind::Goods);
        let red = to_ordered(&original);
        assert_eq!(red.ordered_instance.valuations(), original.valuations());
    }

    #[test]
    fn orders_categories_independently() {
        let vals = vec![
            vec![rat(1), rat(4), rat(2), rat(9)],
            vec![rat(0), rat(2), rat(7), rat(3)],
        ];
        let original = Instance::new(
            2,
            vec![
                Category::new("A", vec![0, 1], 1, 1),
                Category::new("B", vec![2, 3], 1, 1),
            ],
            vals,
            Kind::Goods,
        )
        .unwrap();
        let ord = to_ordered(&original).ordered_instance;
        assert_eq!(ord.valuations()[0], vec![rat(4), rat(1), rat(9), rat(2)]);
        assert_eq!(ord.valuations()[1], vec![rat(2), rat(0), rat(7), rat(3)]);
        assert!(ord.is_ordered());
    }

    #[test]
    fn lift_preserves_values_for_identical_agents() {
        let original = inst(2, vec![vec![2, 3, 1, 4]; 2], (2, 2), Kind::Goods);
        let red = to_ordered(&original);
        let ordered_alloc = Allocation::new(vec![vec![0, 2], vec![1, 3]]);
        let lifted = lift_allocation(&red, &ordered_alloc).unwrap();
        for agent in 0..2 {
            let lifted_value = original
                .bundle_value(agent, &lifted.bundles[agent])
                .unwrap();
            let ordered_value = red
                .ordered_instance
                .bundle_value(agent, &ordered_alloc.bundles[agent])
                .unwrap();
            assert_eq!(lifted_value, ordered_value);
        }
    }

    #[test]
    fn lift_never_decreases_value() {
        // Ordered instance of v1=[1,3,2], v2=[2,1,3] has rows [3,2,1] each.
        let original = inst(2, vec![vec![1, 3, 2], vec![2, 1, 3]], (1, 2), Kind::Goods);
        let red = to_ordered(&original);
        let ordered_alloc = Allocation::new(vec![vec![0], vec![1, 2]]);
        let lifted = lift_allocation(&red, &ordered_alloc).unwrap();
        assert!(original.is_feasible_allocation(&lifted).unwrap());
        for agent in 0..2 {
            let lifted_value = original
                .bundle_value(agent, &lifted.bundles[agent])
                .unwrap();
            let ordered_value = red
                .ordered_instance
                .bundle_value(agent, &ordered_alloc.bundles[agent])
                .unwrap();
            assert!(lifted_value >= ordered_value);
        }
        // Agent 0 holds g1 in the ordered allocation and takes their maximum
        // original item first: item 1 with value 3.
        assert_eq!(lifted.bundles[0], vec![1]);
    }

    #[test]
    fn lift_rejects_infeasible_ordered_allocation() {
        let original = inst(2, vec![vec![1, 2, 3, 4]; 2], (2, 2), Kind::Goods);
        let red = to_ordered(&original);
        let bad = Allocation::new(vec![vec![0], vec![1, 2, 3]]);
        assert!(lift_allocation(&red, &bad).is_err());
    }
}
