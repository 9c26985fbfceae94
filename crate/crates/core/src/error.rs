use thiserror::Error;

/// Grid node identified by its (first-axis, second-axis) indices.
pub type Node = (usize, usize);

#[derive(Debug, Error)]
pub enum Error {
    #[error("north pole: N3 = {n3} cannot be projected")]
    Pole { n3: f64 },

    #[error("operator {op} is not defined on a {kind} grid")]
    KindMismatch { op: &'static str, kind: &'static str },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain mismatch between fields")]
    DomainMismatch,

    #[error("singular frame system at node {node:?} (|det| = {det:.3e})")]
    SingularSystem { node: Node, det: f64 },

    #[error("closed form requires mu1 = mu2, got mu1 = {mu1}, mu2 = {mu2}")]
    MuMismatch { mu1: f64, mu2: f64 },

    #[error("curvature {k} at node {node:?} is within tolerance of the forbidden value {forbidden}")]
    ForbiddenCurvature { node: Node, k: f64, forbidden: f64 },

    #[error("curvature {k} at node {node:?} has the wrong sign for this branch")]
    CurvatureSign { node: Node, k: f64 },

    #[error("tau must be positive for {preset}, got {tau}")]
    InvalidTau { preset: &'static str, tau: f64 },

    #[error("unknown group preset {0:?}")]
    UnknownPreset(String),

    #[error("gauge constant missing or not of the required sign: {0}")]
    GaugeUnderdetermined(String),

    #[error("u-line and v-line integrations disagree by {discrepancy:.3e}")]
    InconsistentLines { discrepancy: f64 },

    #[error("unit-norm drift {drift:.3e} exceeds the step tolerance")]
    StepRejected { drift: f64 },

    #[error("tangent vectors degenerate at node {node:?}")]
    DegenerateTangents { node: Node },

    #[error("grid touches the excluded set: {0}")]
    DomainError(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
