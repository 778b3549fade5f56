//! Algorithm selection and the shared solve pipeline: validate, route,
//! reduce to ordered form, run, lift back.

use crate::error::Error;
use crate::instance::{validate_instance, Allocation, Instance, Kind};
use crate::oracle::{almost_identical, bivalued_exact, BivaluedProfile};
use crate::ordered::{lift_allocation, to_ordered};
use crate::rational::{rat, ratio, Rational};
use crate::{multi_category, single_chores, single_goods};
use crate::{Result, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Auto,
    SingleGoods,
    SingleChores,
    MultiGoods,
    MultiChores,
    Bivalued,
    Identical,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Algorithm::Auto),
            "single-goods" => Ok(Algorithm::SingleGoods),
            "single-chores" => Ok(Algorithm::SingleChores),
            "multi-goods" => Ok(Algorithm::MultiGoods),
            "multi-chores" => Ok(Algorithm::MultiChores),
            "bivalued" => Ok(Algorithm::Bivalued),
            "identical" => Ok(Algorithm::Identical),
            other => Err(Error::Precondition(format!("unknown algorithm {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::SingleGoods => "single-goods",
            Algorithm::SingleChores => "single-chores",
            Algorithm::MultiGoods => "multi-goods",
            Algorithm::MultiChores => "multi-chores",
            Algorithm::Bivalued => "bivalued",
            Algorithm::Identical => "identical",
        }
    }
}

/// Solver configuration; `alpha`/`eps` default per algorithm when `None`.
#[derive(Debug, Clone, Default)]
pub struct SolveConfig {
    pub algorithm: Option<Algorithm>,
    pub alpha: Option<Rational>,
    pub eps: Option<Rational>,
    pub options: RunOptions,
}

/// A solve outcome with everything reports need.
#[derive(Debug, Clone)]
pub struct Solved {
    pub algorithm: &'static str,
    pub alpha: Rational,
    pub allocation: Allocation,
    /// Per-agent μ̂ thresholds, for the algorithms that compute them.
    pub mu_hat: Option<Vec<Rational>>,
}

/// Routing for `auto`: exact solvers first (bivalued single-category, then
/// identical or almost-identical agents), then the single-category
/// bag-filling algorithms, then the categorized ones. Mixed-sign instances
/// are only solvable on the bivalued route.
pub fn route_auto(inst: &Instance) -> Result<Algorithm> {
    if inst.is_single_category() && BivaluedProfile::extract(inst).is_ok() {
        return Ok(Algorithm::Bivalued);
    }
    if inst.agents_identical() {
        if inst.kind() == Kind::Mixed {
            return Err(unsupported_kind());
        }
        return Ok(Algorithm::Identical);
    }
    match (inst.kind(), inst.is_single_category()) {
        (Kind::Goods, true) => Ok(Algorithm::SingleGoods),
        (Kind::Chores, true) => Ok(Algorithm::SingleChores),
        (Kind::Goods, false) => Ok(Algorithm::MultiGoods),
        (Kind::Chores, false) => Ok(Algorithm::MultiChores),
        (Kind::Mixed, _) => Err(unsupported_kind()),
    }
}

fn unsupported_kind() -> Error {
    Error::Precondition(
        "unsupported kind: mixed-sign instances are only solvable when bivalued".to_string(),
    )
}

/// Validates, routes, orders, runs, and lifts. The returned allocation is
/// for the original (not the ordered) instance.
pub fn solve(inst: &Instance, config: &SolveConfig) -> Result<Solved> {
    let report = validate_instance(inst);
    if !report.ok() {
        return Err(Error::MalformedInstance(report.violations.join("; ")));
    }
    let n = inst.n_agents();
    let algorithm = match config.algorithm.unwrap_or(Algorithm::Auto) {
        Algorithm::Auto => route_auto(inst)?,
        fixed => fixed,
    };

    match algorithm {
        Algorithm::Auto => unreachable!("auto resolved above"),
        Algorithm::Bivalued => {
            let allocation = bivalued_exact(inst)?;
            Ok(Solved {
                algorithm: "bivalued",
                alpha: config.alpha.clone().unwrap_or_else(|| rat(1)),
                allocation,
                mu_hat: None,
            })
        }
        Algorithm::Identical => {
            let eps = config.eps.clone().unwrap_or_else(|| ratio(1, 10));
            let allocation = almost_identical(inst, &eps)?;
            let alpha = config.alpha.clone().unwrap_or_else(|| match inst.kind() {
                Kind::Chores => rat(1) + &eps,
                _ => rat(1) - &eps,
            });
            Ok(Solved {
                algorithm: "identical",
                alpha,
                allocation,
                mu_hat: None,
            })
        }
        Algorithm::SingleGoods => {
            let reduction = to_ordered(inst);
            let alpha = config
                .alpha
                .clone()
                .unwrap_or_else(|| single_goods::default_alpha(n));
            let run =
                single_goods::approx_goods_run(&reduction.ordered_instance, &alpha, config.options)?;
            Ok(Solved {
                algorithm: "single-goods",
                alpha,
                allocation: lift_allocation(&reduction, &run.allocation)?,
                mu_hat: Some(run.mu_hat),
            })
        }
        Algorithm::SingleChores => {
            let reduction = to_ordered(inst);
            let alpha = config
                .alpha
                .clone()
                .unwrap_or_else(|| single_chores::default_alpha(n));
            let run = single_chores::approx_chores_run(
                &reduction.ordered_instance,
                &alpha,
                config.options,
            )?;
            Ok(Solved {
                algorithm: "single-chores",
                alpha,
                allocation: lift_allocation(&reduction, &run.allocation)?,
                mu_hat: Some(run.mu_hat),
            })
        }
        Algorithm::MultiGoods => {
            let reduction = to_ordered(inst);
            let alpha = config
                .alpha
                .clone()
                .unwrap_or_else(|| multi_category::default_alpha_goods(n));
            let run = multi_category::approx_categorized_goods_run(
                &reduction.ordered_instance,
                &alpha,
                config.options,
            )?;
            Ok(Solved {
                algorithm: "multi-goods",
                alpha,
                allocation: lift_allocation(&reduction, &run.allocation)?,
                mu_hat: Some(run.mu_hat),
            })
        }
        Algorithm::MultiChores => {
            let reduction = to_ordered(inst);
            let alpha = config
                .alpha
                .clone()
                .unwrap_or_else(|| multi_category::default_alpha_chores(n));
            let run = multi_category::approx_categorized_chores_run(
                &reduction.ordered_instance,
                &alpha,
                config.options,
            )?;
            Ok(Solved {
                algorithm: "multi-chores",
                alpha,
                allocation: lift_allocation(&reduction, &run.allocation)?,
                mu_hat: Some(run.mu_hat),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{tight_chores_instance, tight_goods_instance};
    use crate::oracle::mms_values;
    use crate::verify::verify_alpha_mms;

    #[test]
    fn auto_routes_by_structure() {
        // Tight goods: identical agents but not bivalued.
        let inst = tight_goods_instance(2).unwrap();
        assert_eq!(route_auto(&inst).unwrap(), Algorithm::Identical);

        // Two distinct values in a single category: bivalued wins.
        let vals = vec![
            vec![rat(1), rat(1), rat(0), rat(0)],
            vec![rat(1), rat(0), rat(0), rat(0)],
        ];
        let inst = Instance::single_category(2, vals, 1, 3, Kind::Goods).unwrap();
        assert_eq!(route_auto(&inst).unwrap(), Algorithm::Bivalued);

        // Three distinct values and distinct rows: bag filling.
        let vals = vec![
            vec![rat(3), rat(2), rat(1), rat(0)],
            vec![rat(2), rat(3), rat(1), rat(1)],
        ];
        let inst = Instance::single_category(2, vals, 2, 2, Kind::Goods).unwrap();
        assert_eq!(route_auto(&inst).unwrap(), Algorithm::SingleGoods);
    }

    #[test]
    fn solve_output_reverifies_at_its_alpha() {
        for inst in [
            tight_goods_instance(3).unwrap(),
            tight_chores_instance(3).unwrap(),
        ] {
            for algorithm in ["auto", "single-goods", "single-chores"] {
                let algorithm = Algorithm::parse(algorithm).unwrap();
                let matches_kind = match algorithm {
                    Algorithm::SingleGoods => inst.kind() == Kind::Goods,
                    Algorithm::SingleChores => inst.kind() == Kind::Chores,
                    _ => true,
                };
                if !matches_kind {
                    continue;
                }
                let config = SolveConfig {
                    algorithm: Some(algorithm),
                    ..Default::default()
                };
                let solved = solve(&inst, &config).unwrap();
                let mus = mms_values(&inst).unwrap();
                let report =
                    verify_alpha_mms(&inst, &solved.allocation, &solved.alpha, &mus).unwrap();
                assert!(report.ok, "{} failed to re-verify", solved.algorithm);
            }
        }
    }

    #[test]
    fn unordered_input_is_handled_by_the_pipeline() {
        // The solver orders internally and lifts back, so a scrambled tight
        // instance still lands exactly on the guarantee.
        let inst = crate::generators::shuffle_items(&tight_goods_instance(2).unwrap(), 7);
        let config = SolveConfig {
            algorithm: Some(Algorithm::SingleGoods),
            ..Default::default()
        };
        let solved = solve(&inst, &config).unwrap();
        assert!(inst.is_feasible_allocation(&solved.allocation).unwrap());
        let worst = (0..2)
            .map(|i| inst.bundle_value(i, &solved.allocation.bundles[i]).unwrap())
            .min()
            .unwrap();
        assert_eq!(worst, ratio(4, 5));
    }

    #[test]
    fn mixed_non_bivalued_is_rejected() {
        let vals = vec![vec![rat(2), rat(1), rat(-1)]; 2];
        let inst = Instance::single_category(2, vals, 1, 2, Kind::Mixed).unwrap();
        // Three distinct values: not bivalued, and mixed kind cannot route.
        assert!(matches!(route_auto(&inst), Err(Error::Precondition(_))));
    }
}
