use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("indeterminate form {0}")]
    Indeterminate(&'static str),
    #[error("operation needs a finite affine expression")]
    InfiniteAffine,
    #[error("cannot parse rational `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PafError {
    #[error("no cell contains the valuation")]
    NoCell,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A single diagnostic produced while reading a model file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ModelDiagnostic {
    pub line: usize,
    pub kind: ModelErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("duplicate location `{0}`")]
    DuplicateLocation(String),
    #[error("location `{0}` has two transitions labelled `{1}`")]
    DuplicateAction(String, String),
    #[error("the location graph has a cycle through `{0}`")]
    Cycle(String),
    #[error("strict constraint `{0}` is not supported by the solver")]
    StrictGuard(String),
    #[error("integer constant `{0}` is out of range")]
    ConstantOverflow(String),
    #[error("no target location declared")]
    NoTarget,
    #[error("more than one target location declared")]
    MultipleTargets,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ModelError(pub Vec<ModelDiagnostic>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no transition labelled `{0}` from the current location")]
    NoSuchTransition(String),
    #[error("guard violated after the delay")]
    GuardViolated,
    #[error("invariant violated")]
    InvariantViolated,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptError {
    #[error("empty optimization domain")]
    EmptyDomain,
    #[error("slope depends on the valuation")]
    NonConstantSlope,
    #[error("unbounded interval with a non-constant value")]
    UnboundedSlope,
    #[error("point outside the domain")]
    OutsideDomain,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the location graph has a cycle")]
    CycleDetected,
    #[error("location `{location}`: {source}")]
    Location {
        location: String,
        #[source]
        source: Box<EngineError>,
    },
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("horizon exceeded")]
    HorizonExceeded,
    #[error("strategy proposed an illegal move at location `{0}`")]
    IllegalMove(String),
    #[error("permissiveness is not finite at the start configuration")]
    NotFinite,
    #[error("grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Paf(#[from] PafError),
    #[error(transparent)]
    Step(#[from] StepError),
}
