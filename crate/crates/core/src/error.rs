//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed rational literal: {0:?}")]
    BadRational(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("item {item} not in instance")]
    ItemNotInInstance { item: usize },

    #[error("agent index {agent} out of range (instance has {agents} agents)")]
    AgentOutOfRange { agent: usize, agents: usize },

    #[error("not a partition: {0}")]
    NotAPartition(String),

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant {label} violated: {detail}")]
    InvariantViolated { label: &'static str, detail: String },

    #[error("internal invariant failure: {0}")]
    Internal(String),

    #[error("tractability guard exceeded for {what}: {actual} > {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("instance is not bivalued: found more than two distinct values")]
    NotBivalued,

    #[error("agents are not identical: agent {agent} differs")]
    NotIdentical { agent: usize },

    #[error("more than one deviating agent: agents {first} and {second} both differ")]
    MoreThanOneDeviating { first: usize, second: usize },

    #[error("epsilon out of range (0, 1]: {0}")]
    EpsOutOfRange(String),

    #[error("unsatisfiable generator parameters: {0}")]
    Unsatisfiable(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
