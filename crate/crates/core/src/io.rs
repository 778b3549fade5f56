//! JSON serialization of instances and allocations.
//!
//! Instance files look like:
//!
//! ```json
//! {
//!   "agents": 2,
//!   "kind": "goods",
//!   "categories": [
//!     { "name": "c0", "items": [0, 1, 2, 3], "q_minus": 1, "q_plus": 2 }
//!   ],
//!   "valuations": [ ["3/5", 1, 0, "2/5"], [1, 1, 0, 0] ]
//! }
//! ```
//!
//! with one valuation row per agent and one column per item id. Rationals
//! are `"p/q"` strings or bare integers. Allocation files are
//! `{ "bundles": [[ids], ...] }` with one bundle per agent.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::instance::{Allocation, Category, Instance, Kind};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::Result;

#[derive(Serialize, Deserialize)]
struct CategoryJson {
    name: String,
    items: Vec<usize>,
    q_minus: usize,
    q_plus: usize,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    agents: usize,
    kind: String,
    categories: Vec<CategoryJson>,
    valuations: Vec<Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
struct AllocationJson {
    bundles: Vec<Vec<usize>>,
}

fn rational_to_value(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(format_rational(r))
}

fn value_to_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Ok(crate::rational::rat(i))
            } else {
                Err(Error::BadRational(num.to_string()))
            }
        }
        Value::String(s) => parse_rational(s),
        other => Err(Error::BadRational(other.to_string())),
    }
}

fn parse_kind(s: &str) -> Result<Kind> {
    match s {
        "goods" => Ok(Kind::Goods),
        "chores" => Ok(Kind::Chores),
        "mixed" => Ok(Kind::Mixed),
        other => Err(Error::MalformedInstance(format!(
            "unknown kind {:?} (expected goods, chores, or mixed)",
            other
        ))),
    }
}

/// Renders an instance as pretty-printed JSON.
pub fn instance_to_json(inst: &Instance) -> String {
    let doc = InstanceJson {
        agents: inst.n_agents(),
        kind: inst.kind().as_str().to_string(),
        categories: inst
            .categories()
            .iter()
            .map(|c| CategoryJson {
                name: c.name.clone(),
                items: c.item_ids.clone(),
                q_minus: c.q_minus,
                q_plus: c.q_plus,
            })
            .collect(),
        valuations: inst
            .valuations()
            .iter()
            .map(|row| row.iter().map(rational_to_value).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail")
}

/// Parses an instance from JSON text.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let doc: InstanceJson = serde_json::from_str(text)?;
    let kind = parse_kind(&doc.kind)?;
    let categories = doc
        .categories
        .into_iter()
        .map(|c| Category::new(c.name, c.items, c.q_minus, c.q_plus))
        .collect();
    let valuations = doc
        .valuations
        .iter()
        .map(|row| row.iter().map(value_to_rational).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Instance::new(doc.agents, categories, valuations, kind)
}

pub fn allocation_to_json(alloc: &Allocation) -> String {
    let doc = AllocationJson {
        bundles: alloc.bundles.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("allocation serialization cannot fail")
}

pub fn allocation_from_json(text: &str) -> Result<Allocation> {
    let doc: AllocationJson = serde_json::from_str(text)?;
    Ok(Allocation::new(doc.bundles))
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_allocation(path: &std::path::Path) -> Result<Allocation> {
    allocation_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn instance_round_trip() {
        let inst = Instance::new(
            2,
            vec![
                Category::new("a", vec![0, 1], 1, 1),
                Category::new("b", vec![2], 0, 1),
            ],
            vec![
                vec![ratio(3, 5), rat(1), rat(0)],
                vec![rat(2), ratio(-1, 2), rat(4)],
            ],
            Kind::Mixed,
        )
        .unwrap();
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn accepts_bare_integers_and_fraction_strings() {
        let text = r#"{
            "agents": 1,
            "kind": "goods",
            "categories": [ { "name": "M", "items": [0, 1], "q_minus": 0, "q_plus": 2 } ],
            "valuations": [ [3, "1/2"] ]
        }"#;
        let inst = instance_from_json(text).unwrap();
        assert_eq!(*inst.value(0, 0), rat(3));
        assert_eq!(*inst.value(0, 1), ratio(1, 2));
    }

    #[test]
    fn rejects_floats_and_unknown_kinds() {
        let text = r#"{
            "agents": 1,
            "kind": "goods",
            "categories": [ { "name": "M", "items": [0], "q_minus": 0, "q_plus": 1 } ],
            "valuations": [ [0.5] ]
        }"#;
        assert!(instance_from_json(text).is_err());

        let text = r#"{
            "agents": 1,
            "kind": "stuff",
            "categories": [ { "name": "M", "items": [0], "q_minus": 0, "q_plus": 1 } ],
            "valuations": [ [1] ]
        }"#;
        assert!(matches!(
            instance_from_json(text),
            Err(Error::MalformedInstance(_))
        ));
    }

    #[test]
    fn allocation_round_trip() {
        let alloc = Allocation::new(vec![vec![2, 0], vec![1]]);
        let text = allocation_to_json(&alloc);
        let back = allocation_from_json(&text).unwrap();
        assert_eq!(back.bundles, vec![vec![0, 2], vec![1]]);
    }
}
