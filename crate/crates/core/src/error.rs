use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("edge weight {0} is negative or not finite")]
    InvalidWeight(f64),
    #[error("matrix is not symmetric with a zero diagonal")]
    NotSymmetric,
    #[error("packed length does not match the node count")]
    DimensionMismatch,
    #[error("node block is empty")]
    EmptyBlock,
    #[error("restricted support graph is disconnected")]
    SingularComponent,
    #[error("{nodes} nodes exceeds the enumeration limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopulaError {
    #[error("column {0} is constant and carries no rank information")]
    ConstantColumn(usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("parameter out of the family domain: {0}")]
    ParameterOutOfDomain(&'static str),
    #[error("argument outside the unit interval")]
    ArgumentOutOfRange,
    #[error("Kendall's tau {0} cannot be represented by this family")]
    TauOutOfRange(f64),
    #[error("data matrix is ragged or empty")]
    BadShape,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("support graph of beta is disconnected")]
    DisconnectedSupport,
    #[error("block {0} of the partition is disconnected under beta")]
    BlockDisconnected(usize),
    #[error("every cut has a disconnected side")]
    AllCutsSingular,
    #[error("no cuts supplied")]
    NoCuts,
    #[error("dimension mismatch between weights, potentials, partition or cuts")]
    DimensionMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpgError {
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("average degree {avg_degree} is infeasible for a block of {block} nodes")]
    InfeasibleDegree { avg_degree: f64, block: usize },
    #[error("clique sizes sum to {got}, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("estimate and truth have different node counts")]
    DimensionMismatch,
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error(transparent)]
    Copula(#[from] CopulaError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Optimizer(#[from] SpgError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("fit failed after restart: {0}")]
    Diverged(ObjectiveError),
}
