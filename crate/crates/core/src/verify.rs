//! Exact verification of `α`-MMS guarantees.

use crate::error::Error;
use crate::instance::{Allocation, Instance};
use crate::rational::Rational;
use crate::Result;

/// Per-agent outcome of a guarantee check.
#[derive(Debug, Clone)]
pub struct AgentMargin {
    pub agent: usize,
    pub bundle_value: Rational,
    /// `v_i(A_i) - α·μ_i`; non-negative iff the agent's guarantee holds.
    pub margin: Rational,
}

/// Result of [`verify_alpha_mms`].
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub ok: bool,
    pub margins: Vec<AgentMargin>,
}

/// Checks `v_i(A_i) >= α·μ_i` for every agent, by exact comparison.
///
/// `mms_values` must be supplied by an oracle (see [`crate::oracle`]). The
/// allocation must be feasible; an infeasible one is an error, not a
/// negative verdict.
pub fn verify_alpha_mms(
    inst: &Instance,
    alloc: &Allocation,
    alpha: &Rational,
    mms_values: &[Rational],
) -> Result<VerifyReport> {
    if mms_values.len() != inst.n_agents() {
        return Err(Error::Precondition(format!(
            "{} MMS values for {} agents",
            mms_values.len(),
            inst.n_agents()
        )));
    }
    if !inst.is_feasible_allocation(alloc)? {
        return Err(Error::InfeasibleAllocation(
            "allocation violates quota constraints".to_string(),
        ));
    }
    let mut margins = Vec::with_capacity(inst.n_agents());
    let mut ok = true;
    for agent in 0..inst.n_agents() {
        let bundle_value = inst.bundle_value(agent, &alloc.bundles[agent])?;
        let margin = &bundle_value - alpha * &mms_values[agent];
        if margin < Rational::default() {
            ok = false;
        }
        margins.push(AgentMargin {
            agent,
            bundle_value,
            margin,
        });
    }
    Ok(VerifyReport { ok, margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Kind;
    use crate::rational::{rat, ratio};

    #[test]
    fn alpha_zero_accepts_any_feasible_goods_allocation() {
        let inst = Instance::single_category(
            2,
            vec![vec![rat(1), rat(2), rat(3), rat(4)]; 2],
            2,
            2,
            Kind::Goods,
        )
        .unwrap();
        let alloc = Allocation::new(vec![vec![0, 1], vec![2, 3]]);
        let report =
            verify_alpha_mms(&inst, &alloc, &rat(0), &[rat(3), rat(3)]).unwrap();
        assert!(report.ok);
        assert!(report.margins.iter().all(|m| m.margin >= rat(0)));
    }

    #[test]
    fn margin_sign_flips_across_the_threshold() {
        // One agent holds value 4/5 with μ = 1: exactly tight at α = 4/5,
        // failing at any larger α.
        let inst = Instance::single_category(
            2,
            vec![vec![ratio(4, 5), rat(1)]; 2],
            1,
            1,
            Kind::Goods,
        )
        .unwrap();
        let alloc = Allocation::new(vec![vec![0], vec![1]]);
        let mu = vec![rat(1), rat(1)];

        let tight = verify_alpha_mms(&inst, &alloc, &ratio(4, 5), &mu).unwrap();
        assert!(tight.ok);
        assert_eq!(tight.margins[0].margin, rat(0));

        let above = ratio(4, 5) + ratio(1, 100);
        let failing = verify_alpha_mms(&inst, &alloc, &above, &mu).unwrap();
        assert!(!failing.ok);
        assert!(failing.margins[0].margin < rat(0));
    }

    #[test]
    fn infeasible_allocation_is_an_error() {
        let inst = Instance::single_category(
            2,
            vec![vec![rat(1), rat(1), rat(1), rat(1)]; 2],
            2,
            2,
            Kind::Goods,
        )
        .unwrap();
        let alloc = Allocation::new(vec![vec![0, 1, 2], vec![3]]);
        assert!(matches!(
            verify_alpha_mms(&inst, &alloc, &rat(1), &[rat(2), rat(2)]),
            Err(Error::InfeasibleAllocation(_))
        ));
    }
}
