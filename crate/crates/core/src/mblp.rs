//! Construction and emission of the mixed binary linear program whose
//! optimum, for a fixed dimension (agents, category sizes, quotas), equals
//! the exact worst-case MMS approximation ratio over all goods instances of
//! that dimension.
//!
//! The program is emitted, never solved here: the model grows exponentially
//! in the item count, so the acceptance surface is structural (variable and
//! constraint counts, witness feasibility, byte-stable files) rather than
//! bound reproduction.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::Error;
use crate::instance::{Allocation, Instance, Kind};
use crate::oracle::{best_alpha_guarded, AlphaBound};
use crate::rational::Rational;
use crate::Result;

pub const DEFAULT_BUNDLE_GUARD: usize = 4096;
pub const DEFAULT_ALLOCATION_GUARD: usize = 1_000_000;

/// A problem dimension: everything about an instance except the valuations.
#[derive(Debug, Clone)]
pub struct Dimension {
    pub n_agents: usize,
    /// `(size, q_minus, q_plus)` per category.
    pub categories: Vec<(usize, usize, usize)>,
}

impl Dimension {
    pub fn new(n_agents: usize, categories: Vec<(usize, usize, usize)>) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Precondition("dimension needs agents".to_string()));
        }
        for (idx, &(size, q_minus, q_plus)) in categories.iter().enumerate() {
            if q_minus > q_plus {
                return Err(Error::Precondition(format!(
                    "category {idx}: q⁻ > q⁺"
                )));
            }
            if q_minus * n_agents > size || q_plus * n_agents < size {
                return Err(Error::Precondition(format!(
                    "category {idx}: quota inequality violated ({q_minus}·{n_agents} <= {size} <= {q_plus}·{n_agents})"
                )));
            }
        }
        Ok(Dimension {
            n_agents,
            categories,
        })
    }

    pub fn n_items(&self) -> usize {
        self.categories.iter().map(|c| c.0).sum()
    }

    /// An instance of this dimension with the given valuation rows.
    pub fn instance(&self, valuations: Vec<Vec<Rational>>, kind: Kind) -> Result<Instance> {
        let mut categories = Vec::new();
        let mut next = 0usize;
        for (idx, &(size, q_minus, q_plus)) in self.categories.iter().enumerate() {
            categories.push(crate::instance::Category::new(
                format!("c{idx}"),
                (next..next + size).collect(),
                q_minus,
                q_plus,
            ));
            next += size;
        }
        Instance::new(self.n_agents, categories, valuations, kind)
    }

    /// Number of feasible bundles, as the product over categories of the
    /// binomial-sum counts, saturating at `usize::MAX`.
    pub fn bundle_count(&self) -> usize {
        let mut total: usize = 1;
        for &(size, q_minus, q_plus) in &self.categories {
            let per_cat: usize = (q_minus..=q_plus.min(size))
                .map(|c| binomial(size, c))
                .fold(0usize, |a, b| a.saturating_add(b));
            total = total.saturating_mul(per_cat);
        }
        total
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All feasible bundles of the dimension, as sorted id lists in
/// lexicographic order.
pub fn enumerate_feasible_bundles(dim: &Dimension) -> Result<Vec<Vec<usize>>> {
    enumerate_feasible_bundles_guarded(dim, DEFAULT_BUNDLE_GUARD)
}

pub fn enumerate_feasible_bundles_guarded(
    dim: &Dimension,
    guard: usize,
) -> Result<Vec<Vec<usize>>> {
    let count = dim.bundle_count();
    if count > guard {
        return Err(Error::GuardExceeded {
            what: "feasible bundle enumeration",
            limit: guard as u128,
            actual: count as u128,
        });
    }
    // Per category: every admissible subset, then the cross product.
    let mut per_cat: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut next = 0usize;
    for &(size, q_minus, q_plus) in &dim.categories {
        let ids: Vec<usize> = (next..next + size).collect();
        next += size;
        let mut subsets = Vec::new();
        for take in q_minus..=q_plus.min(size) {
            combinations(&ids, take, &mut subsets);
        }
        per_cat.push(subsets);
    }
    let mut bundles = vec![Vec::new()];
    for subsets in per_cat {
        let mut grown = Vec::with_capacity(bundles.len() * subsets.len());
        for prefix in &bundles {
            for subset in &subsets {
                let mut bundle = prefix.clone();
                bundle.extend_from_slice(subset);
                grown.push(bundle);
            }
        }
        bundles = grown;
    }
    bundles.sort();
    Ok(bundles)
}

fn combinations(ids: &[usize], take: usize, out: &mut Vec<Vec<usize>>) {
    let mut current = Vec::with_capacity(take);
    fn rec(ids: &[usize], take: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == take {
            out.push(current.clone());
            return;
        }
        for i in start..ids.len() {
            if ids.len() - i < take - current.len() {
                break;
            }
            current.push(ids[i]);
            rec(ids, take, i + 1, current, out);
            current.pop();
        }
    }
    rec(ids, take, 0, &mut current, out);
}

/// All ordered partitions of the items into feasible bundles, in
/// lexicographic order of the item-to-agent assignment vector.
pub fn enumerate_feasible_allocations(dim: &Dimension) -> Result<Vec<Allocation>> {
    enumerate_feasible_allocations_guarded(dim, DEFAULT_ALLOCATION_GUARD)
}

pub fn enumerate_feasible_allocations_guarded(
    dim: &Dimension,
    guard: usize,
) -> Result<Vec<Allocation>> {
    let zeros = vec![vec![Rational::zero(); dim.n_items()]; dim.n_agents];
    let inst = dim.instance(zeros, Kind::Goods)?;
    let shape = crate::oracle::Shape::of_instance(&inst);
    let mut out = Vec::new();
    let mut over = false;
    crate::oracle::for_each_feasible_assignment(&shape, |assign| {
        if out.len() >= guard {
            over = true;
            return;
        }
        let mut bundles = vec![Vec::new(); dim.n_agents];
        for (g, &i) in assign.iter().enumerate() {
            bundles[i].push(g);
        }
        out.push(Allocation::new(bundles));
    });
    if over {
        return Err(Error::GuardExceeded {
            what: "feasible allocation enumeration",
            limit: guard as u128,
            actual: (guard + 1) as u128,
        });
    }
    Ok(out)
}

/// One linear constraint row: `Σ coeff·var (op) rhs` with integer
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub name: String,
    /// `(variable index, coefficient)`, in ascending variable order.
    pub terms: Vec<(usize, i64)>,
    pub op: RowOp,
    pub rhs: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Ge,
    Le,
}

impl RowOp {
    fn as_str(&self) -> &'static str {
        match self {
            RowOp::Eq => "=",
            RowOp::Ge => ">=",
            RowOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// `alpha in [0, ∞)`.
    AlphaContinuous,
    /// `u_{i,g} in [0, 1]`.
    UnitContinuous,
    Binary,
}

/// The assembled program: variable table, rows, and the enumerations they
/// were built from.
#[derive(Debug, Clone)]
pub struct MblpModel {
    pub var_names: Vec<String>,
    pub var_kinds: Vec<VarKind>,
    pub rows: Vec<Row>,
    pub bundles: Vec<Vec<usize>>,
    pub allocations: Vec<Allocation>,
    pub dimension: Dimension,
}

impl MblpModel {
    pub fn n_variables(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn n_binaries(&self) -> usize {
        self.var_kinds
            .iter()
            .filter(|k| **k == VarKind::Binary)
            .count()
    }

    fn var(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    /// Evaluates every row at the assignment `values` (one rational per
    /// variable); returns the first violated row's name.
    pub fn check_assignment(&self, values: &[Rational]) -> std::result::Result<(), String> {
        if values.len() != self.var_names.len() {
            return Err(format!(
                "{} values for {} variables",
                values.len(),
                self.var_names.len()
            ));
        }
        for (idx, kind) in self.var_kinds.iter().enumerate() {
            let v = &values[idx];
            let ok = match kind {
                VarKind::AlphaContinuous => *v >= Rational::zero(),
                VarKind::UnitContinuous => {
                    *v >= Rational::zero() && *v <= Rational::from_integer(1.into())
                }
                VarKind::Binary => {
                    v.is_zero() || *v == Rational::from_integer(1.into())
                }
            };
            if !ok {
                return Err(format!("variable bound violated: {}", self.var_names[idx]));
            }
        }
        for row in &self.rows {
            let lhs: Rational = row
                .terms
                .iter()
                .map(|&(var, coeff)| Rational::from_integer(coeff.into()) * &values[var])
                .fold(Rational::zero(), |a, b| a + b);
            let rhs = Rational::from_integer(row.rhs.into());
            let ok = match row.op {
                RowOp::Eq => lhs == rhs,
                RowOp::Ge => lhs >= rhs,
                RowOp::Le => lhs <= rhs,
            };
            if !ok {
                return Err(row.name.clone());
            }
        }
        Ok(())
    }
}

/// Builds the program: minimize α subject to
///
/// * `Σ_S p_{i,k,S} = 1` for all agents `i, k`,
/// * `Σ_k Σ_{S∋g} p_{i,k,S} = 1` for all `i, g` (each agent's selected
///   bundles partition the items),
/// * `Σ_{g∈S} u_{i,g} >= p_{i,k,S}`,
/// * `Σ_{g∈S} u_{i,g} <= α + |S|·(1 - ℓ_{i,S})`,
/// * `Σ_i ℓ_{i,A_i} >= 1` for every feasible allocation `A`.
pub fn build_mblp(dim: &Dimension) -> Result<MblpModel> {
    build_mblp_guarded(dim, DEFAULT_BUNDLE_GUARD, DEFAULT_ALLOCATION_GUARD)
}

pub fn build_mblp_guarded(
    dim: &Dimension,
    bundle_guard: usize,
    allocation_guard: usize,
) -> Result<MblpModel> {
    let bundles = enumerate_feasible_bundles_guarded(dim, bundle_guard)?;
    let allocations = enumerate_feasible_allocations_guarded(dim, allocation_guard)?;
    let n = dim.n_agents;
    let m = dim.n_items();
    let s_count = bundles.len();

    let mut var_names = Vec::with_capacity(1 + n * m + n * n * s_count + n * s_count);
    let mut var_kinds = Vec::with_capacity(var_names.capacity());
    var_names.push("alpha".to_string());
    var_kinds.push(VarKind::AlphaContinuous);
    let u_base = var_names.len();
    for i in 0..n {
        for g in 0..m {
            var_names.push(format!("u_{i}_{g}"));
            var_kinds.push(VarKind::UnitContinuous);
        }
    }
    let p_base = var_names.len();
    for i in 0..n {
        for k in 0..n {
            for s in 0..s_count {
                var_names.push(format!("p_{i}_{k}_{s}"));
                var_kinds.push(VarKind::Binary);
            }
        }
    }
    let l_base = var_names.len();
    for i in 0..n {
        for s in 0..s_count {
            var_names.push(format!("l_{i}_{s}"));
            var_kinds.push(VarKind::Binary);
        }
    }

    let u = |i: usize, g: usize| u_base + i * m + g;
    let p = |i: usize, k: usize, s: usize| p_base + (i * n + k) * s_count + s;
    let l = |i: usize, s: usize| l_base + i * s_count + s;

    // Which bundles contain each item, for the partition-cover rows.
    let mut bundles_with: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (s, bundle) in bundles.iter().enumerate() {
        for &g in bundle {
            bundles_with[g].push(s);
        }
    }

    let mut rows = Vec::new();
    // Each (i, k) picks exactly one feasible bundle.
    for i in 0..n {
        for k in 0..n {
            rows.push(Row {
                name: format!("choose_{i}_{k}"),
                terms: (0..s_count).map(|s| (p(i, k, s), 1)).collect(),
                op: RowOp::Eq,
                rhs: 1,
            });
        }
    }
    // Each agent's selected bundles cover every item exactly once.
    for i in 0..n {
        for g in 0..m {
            let mut terms: Vec<(usize, i64)> = Vec::new();
            for k in 0..n {
                for &s in &bundles_with[g] {
                    terms.push((p(i, k, s), 1));
                }
            }
            terms.sort_unstable();
            rows.push(Row {
                name: format!("cover_{i}_{g}"),
                terms,
                op: RowOp::Eq,
                rhs: 1,
            });
        }
    }
    // A selected bundle is worth at least one to its owner.
    for i in 0..n {
        for k in 0..n {
            for (s, bundle) in bundles.iter().enumerate() {
                let mut terms: Vec<(usize, i64)> =
                    bundle.iter().map(|&g| (u(i, g), 1)).collect();
                terms.push((p(i, k, s), -1));
                terms.sort_unstable();
                rows.push(Row {
                    name: format!("worth_{i}_{k}_{s}"),
                    terms,
                    op: RowOp::Ge,
                    rhs: 0,
                });
            }
        }
    }
    // Marked bundles are worth at most α, with big-M = |S|.
    for i in 0..n {
        for (s, bundle) in bundles.iter().enumerate() {
            let mut terms: Vec<(usize, i64)> = bundle.iter().map(|&g| (u(i, g), 1)).collect();
            terms.push((0, -1));
            terms.push((l(i, s), bundle.len() as i64));
            terms.sort_unstable();
            rows.push(Row {
                name: format!("atmost_{i}_{s}"),
                terms,
                op: RowOp::Le,
                rhs: bundle.len() as i64,
            });
        }
    }
    // In every feasible allocation someone's bundle is marked.
    let bundle_index: std::collections::HashMap<&[usize], usize> = bundles
        .iter()
        .enumerate()
        .map(|(s, b)| (b.as_slice(), s))
        .collect();
    for (a_idx, alloc) in allocations.iter().enumerate() {
        let mut terms = Vec::with_capacity(n);
        for (i, bundle) in alloc.bundles.iter().enumerate() {
            let s = *bundle_index
                .get(bundle.as_slice())
                .ok_or_else(|| Error::Internal("allocation bundle missing from S".into()))?;
            terms.push((l(i, s), 1));
        }
        terms.sort_unstable();
        rows.push(Row {
            name: format!("someone_{a_idx}"),
            terms,
            op: RowOp::Ge,
            rhs: 1,
        });
    }

    Ok(MblpModel {
        var_names,
        var_kinds,
        rows,
        bundles,
        allocations,
        dimension: dim.clone(),
    })
}

/// Renders the model in LP text format with deterministic ordering, so
/// repeated emissions are byte-identical.
pub fn emit_lp(model: &MblpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj: alpha\nSubject To\n");
    for row in &model.rows {
        let mut line = format!(" {}:", row.name);
        for (pos, &(var, coeff)) in row.terms.iter().enumerate() {
            let name = &model.var_names[var];
            if pos == 0 {
                if coeff == 1 {
                    let _ = write!(line, " {name}");
                } else if coeff == -1 {
                    let _ = write!(line, " - {name}");
                } else {
                    let _ = write!(line, " {coeff} {name}");
                }
            } else if coeff == 1 {
                let _ = write!(line, " + {name}");
            } else if coeff == -1 {
                let _ = write!(line, " - {name}");
            } else if coeff < 0 {
                let _ = write!(line, " - {} {name}", -coeff);
            } else {
                let _ = write!(line, " + {coeff} {name}");
            }
        }
        let _ = writeln!(line, " {} {}", row.op.as_str(), row.rhs);
        out.push_str(&line);
    }
    out.push_str("Bounds\n");
    for (idx, kind) in model.var_kinds.iter().enumerate() {
        match kind {
            VarKind::AlphaContinuous => {
                let _ = writeln!(out, " 0 <= {}", model.var_names[idx]);
            }
            VarKind::UnitContinuous => {
                let _ = writeln!(out, " 0 <= {} <= 1", model.var_names[idx]);
            }
            VarKind::Binary => {}
        }
    }
    out.push_str("Binaries\n");
    for (idx, kind) in model.var_kinds.iter().enumerate() {
        if *kind == VarKind::Binary {
            let _ = writeln!(out, " {}", model.var_names[idx]);
        }
    }
    out.push_str("End\n");
    out
}

/// Sidecar mapping from bundle indices (used in variable names) to item
/// ids, emitted next to the LP file.
pub fn emit_mapping(model: &MblpModel) -> String {
    let doc = serde_json::json!({
        "agents": model.dimension.n_agents,
        "items": model.dimension.n_items(),
        "categories": model.dimension.categories.iter().map(|&(size, q_minus, q_plus)| {
            serde_json::json!({"size": size, "q_minus": q_minus, "q_plus": q_plus})
        }).collect::<Vec<_>>(),
        "bundles": model.bundles,
        "allocation_count": model.allocations.len(),
    });
    serde_json::to_string_pretty(&doc).expect("mapping serialization cannot fail")
}

/// Minimal structural parser for the LP files this module emits; used to
/// check self-consistency of the emission.
#[derive(Debug, PartialEq, Eq)]
pub struct ParsedLp {
    pub objective: String,
    pub rows: Vec<(String, String)>,
    pub bounds: Vec<String>,
    pub binaries: Vec<String>,
}

pub fn parse_lp(text: &str) -> Result<ParsedLp> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Binaries,
        End,
    }
    let mut section = Section::Preamble;
    let mut parsed = ParsedLp {
        objective: String::new(),
        rows: Vec::new(),
        bounds: Vec::new(),
        binaries: Vec::new(),
    };
    for line in text.lines() {
        let trimmed = line.trim();
        match trimmed {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble => {
                return Err(Error::Precondition(format!(
                    "unexpected preamble line {trimmed:?}"
                )))
            }
            Section::Objective => parsed.objective = trimmed.to_string(),
            Section::Rows => {
                let (name, body) = trimmed.split_once(':').ok_or_else(|| {
                    Error::Precondition(format!("constraint without name: {trimmed:?}"))
                })?;
                parsed
                    .rows
                    .push((name.trim().to_string(), body.trim().to_string()));
            }
            Section::Bounds => parsed.bounds.push(trimmed.to_string()),
            Section::Binaries => parsed.binaries.push(trimmed.to_string()),
            Section::End => {
                return Err(Error::Precondition(format!(
                    "content after End: {trimmed:?}"
                )))
            }
        }
    }
    Ok(parsed)
}

/// The witness assignment of the feasibility direction: `u` copies a
/// (scaled) hard instance's values, `p` marks each agent's MMS partition,
/// and `ℓ` marks the bundles worth less than `α`.
pub fn build_witness(
    model: &MblpModel,
    inst: &Instance,
    alpha: &Rational,
) -> Result<Vec<Rational>> {
    let dim = &model.dimension;
    let n = dim.n_agents;
    let m = dim.n_items();
    if inst.n_agents() != n || inst.n_items() != m {
        return Err(Error::Precondition(
            "instance does not match the model dimension".to_string(),
        ));
    }
    let mut values = vec![Rational::zero(); model.var_names.len()];
    values[model.var("alpha").expect("alpha variable")] = alpha.clone();
    for i in 0..n {
        for g in 0..m {
            let idx = model
                .var(&format!("u_{i}_{g}"))
                .ok_or_else(|| Error::Internal("missing u variable".into()))?;
            values[idx] = inst.value(i, g).clone();
        }
    }
    let bundle_index: std::collections::HashMap<&[usize], usize> = model
        .bundles
        .iter()
        .enumerate()
        .map(|(s, b)| (b.as_slice(), s))
        .collect();
    for i in 0..n {
        let partition = crate::oracle::mms_bruteforce(inst, i)?.partition;
        for (k, bundle) in partition.bundles.iter().enumerate() {
            let s = *bundle_index.get(bundle.as_slice()).ok_or_else(|| {
                Error::Internal("MMS partition bundle missing from S".into())
            })?;
            let idx = model
                .var(&format!("p_{i}_{k}_{s}"))
                .ok_or_else(|| Error::Internal("missing p variable".into()))?;
            values[idx] = Rational::from_integer(1.into());
        }
    }
    for i in 0..n {
        for (s, bundle) in model.bundles.iter().enumerate() {
            let worth = inst.bundle_value(i, bundle)?;
            if worth < *alpha {
                let idx = model
                    .var(&format!("l_{i}_{s}"))
                    .ok_or_else(|| Error::Internal("missing l variable".into()))?;
                values[idx] = Rational::from_integer(1.into());
            }
        }
    }
    Ok(values)
}

/// True iff the best achievable factor on `(dim, valuations)` is at most
/// `alpha`: a desk-scale certificate that the dimension's worst case is no
/// better than `alpha`.
pub fn check_alpha_witness(
    dim: &Dimension,
    valuations: Vec<Vec<Rational>>,
    alpha: &Rational,
) -> Result<bool> {
    let inst = dim.instance(valuations, Kind::Goods)?;
    let best = best_alpha_guarded(&inst, crate::oracle::DEFAULT_BRUTEFORCE_GUARD)?;
    Ok(match best.alpha {
        AlphaBound::Any => false,
        AlphaBound::Value(a) => a <= *alpha,
    })
}

/// Items of each bundle as a set, for duplicate-freeness checks.
pub fn bundle_set(bundle: &[usize]) -> BTreeSet<usize> {
    bundle.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::tight_goods_instance;
    use crate::rational::{rat, ratio};

    fn dim_2_2_unit() -> Dimension {
        Dimension::new(2, vec![(2, 1, 1)]).unwrap()
    }

    #[test]
    fn bundle_enumeration_counts() {
        // Single category m=4, q=(2,2): C(4,2) = 6.
        let dim = Dimension::new(2, vec![(4, 2, 2)]).unwrap();
        assert_eq!(enumerate_feasible_bundles(&dim).unwrap().len(), 6);

        // Two categories of size 2, q=(1,1): 2 × 2.
        let dim = Dimension::new(2, vec![(2, 1, 1), (2, 1, 1)]).unwrap();
        assert_eq!(enumerate_feasible_bundles(&dim).unwrap().len(), 4);

        // q=(0,m), m=3: the full power set.
        let dim = Dimension::new(1, vec![(3, 0, 3)]).unwrap();
        let bundles = enumerate_feasible_bundles(&dim).unwrap();
        assert_eq!(bundles.len(), 8);
        // Lexicographic and duplicate-free.
        let mut sorted = bundles.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, bundles);
    }

    #[test]
    fn bundle_enumeration_matches_power_set_filtering() {
        let dim = Dimension::new(2, vec![(3, 1, 2), (3, 1, 2)]).unwrap();
        let fast: Vec<Vec<usize>> = enumerate_feasible_bundles(&dim).unwrap();
        let zeros = vec![vec![rat(0); 6]; 2];
        let inst = dim.instance(zeros, Kind::Goods).unwrap();
        let mut slow = Vec::new();
        for mask in 0u32..(1 << 6) {
            let bundle: Vec<usize> = (0..6).filter(|g| mask & (1 << g) != 0).collect();
            if inst.is_feasible_bundle(&bundle).unwrap() {
                slow.push(bundle);
            }
        }
        slow.sort();
        assert_eq!(fast, slow);
    }

    #[test]
    fn allocation_enumeration_counts() {
        let dim = dim_2_2_unit();
        assert_eq!(enumerate_feasible_allocations(&dim).unwrap().len(), 2);

        let dim = Dimension::new(2, vec![(4, 2, 2)]).unwrap();
        assert_eq!(enumerate_feasible_allocations(&dim).unwrap().len(), 6);

        // n=2, m=3, q=(1,2): splits of sizes (1,2) and (2,1).
        let dim = Dimension::new(2, vec![(3, 1, 2)]).unwrap();
        assert_eq!(enumerate_feasible_allocations(&dim).unwrap().len(), 6);
    }

    #[test]
    fn model_counts_match_closed_forms() {
        let dim = dim_2_2_unit();
        let model = build_mblp(&dim).unwrap();
        let (n, m, s, f) = (2usize, 2usize, 2usize, 2usize);
        assert_eq!(model.n_variables(), 1 + n * m + n * n * s + n * s);
        assert_eq!(model.n_variables(), 17);
        assert_eq!(model.n_constraints(), n * n + n * m + n * n * s + n * s + f);
        assert_eq!(model.n_constraints(), 22);
        assert_eq!(model.n_binaries(), 12);
    }

    #[test]
    fn every_row_references_declared_variables() {
        let dim = Dimension::new(2, vec![(3, 1, 2)]).unwrap();
        let model = build_mblp(&dim).unwrap();
        for row in &model.rows {
            for &(var, _) in &row.terms {
                assert!(var < model.var_names.len(), "row {} out of range", row.name);
            }
        }
    }

    #[test]
    fn emission_is_deterministic_and_parses_back() {
        let dim = Dimension::new(2, vec![(3, 1, 2)]).unwrap();
        let model = build_mblp(&dim).unwrap();
        let text1 = emit_lp(&model);
        let text2 = emit_lp(&build_mblp(&dim).unwrap());
        assert_eq!(text1, text2, "emission must be byte-stable");

        let parsed = parse_lp(&text1).unwrap();
        assert_eq!(parsed.objective, "obj: alpha");
        assert_eq!(parsed.rows.len(), model.n_constraints());
        assert_eq!(parsed.binaries.len(), model.n_binaries());
        for ((name, _), row) in parsed.rows.iter().zip(&model.rows) {
            assert_eq!(name, &row.name);
        }
    }

    #[test]
    fn binaries_section_lists_exactly_p_and_l() {
        let dim = dim_2_2_unit();
        let model = build_mblp(&dim).unwrap();
        let text = emit_lp(&model);
        let parsed = parse_lp(&text).unwrap();
        for name in &parsed.binaries {
            assert!(name.starts_with("p_") || name.starts_with("l_"));
        }
        assert_eq!(
            parsed.binaries.len(),
            model
                .var_names
                .iter()
                .filter(|v| v.starts_with("p_") || v.starts_with("l_"))
                .count()
        );
    }

    #[test]
    fn witness_from_tight_instance_is_feasible_just_above_one() {
        // The tight goods instance for n=2 has μ = 1 for both agents, and
        // an exact MMS allocation exists, so the thresholded witness
        // satisfies every row exactly when α exceeds 1.
        let inst = tight_goods_instance(2).unwrap();
        let dim = Dimension::new(2, vec![(6, 3, 3)]).unwrap();
        let model = build_mblp(&dim).unwrap();

        let alpha = rat(1) + ratio(1, 100);
        let witness = build_witness(&model, &inst, &alpha).unwrap();
        assert_eq!(model.check_assignment(&witness), Ok(()));

        // At 4/5 + δ the someone-at-most-alpha rows fail: the MMS partition
        // itself is a feasible allocation giving both agents exactly 1.
        let low = ratio(4, 5) + ratio(1, 100);
        let witness = build_witness(&model, &inst, &low).unwrap();
        let err = model.check_assignment(&witness).unwrap_err();
        assert!(err.starts_with("someone_"), "unexpected failure: {err}");
    }

    #[test]
    fn alpha_witness_checks_against_best_alpha() {
        let inst = tight_goods_instance(2).unwrap();
        let dim = Dimension::new(2, vec![(6, 3, 3)]).unwrap();
        let vals = inst.valuations().to_vec();
        assert!(check_alpha_witness(&dim, vals.clone(), &rat(1)).unwrap());
        assert!(!check_alpha_witness(&dim, vals, &ratio(99, 100)).unwrap());

        // Identical agents always admit an exact MMS allocation.
        let dim = Dimension::new(2, vec![(4, 2, 2)]).unwrap();
        let rows = vec![vec![rat(3), rat(2), rat(1), rat(1)]; 2];
        assert!(check_alpha_witness(&dim, rows, &rat(1)).unwrap());
    }
}
