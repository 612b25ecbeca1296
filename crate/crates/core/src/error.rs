use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 4 points to fit a cubic, got {0}")]
    TooFewPoints(usize),
    #[error("points are coincident or collinear in parameter")]
    Degenerate,
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error("object {object_id}: {reason}")]
    Object { object_id: u32, reason: String },
    #[error("{field}: {source}")]
    Curve {
        field: String,
        #[source]
        source: FitError,
    },
}

impl ValidationError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Field {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn object(object_id: u32, reason: impl Into<String>) -> Self {
        Self::Object {
            object_id,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictionError {
    #[error("prediction horizon overruns the track: step {step} + {horizon} > {last}")]
    HorizonOverrun {
        step: usize,
        horizon: usize,
        last: usize,
    },
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid prediction config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    #[error("{component} standard deviation {value} outside [{lo}, {hi}]")]
    SigmaOutOfBounds {
        component: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("risk tensor shape mismatch: {0}")]
    Shape(&'static str),
    #[error("invalid risk config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("invalid planner config: {0}")]
    Config(&'static str),
    #[error("input ({v}, {dtheta}) outside the admissible input set")]
    InputOutOfBounds { v: f64, dtheta: f64 },
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregationError {
    #[error("cluster {0:?} has no scenarios")]
    EmptyCluster(String),
    #[error("no traces to aggregate")]
    NoTraces,
    #[error("trace for scenario {0:?} is empty")]
    EmptyTrace(String),
    #[error("scenario {scenario:?} has more than one {perspective} trace at a-level {a_level}")]
    Duplicate {
        scenario: String,
        perspective: &'static str,
        a_level: &'static str,
    },
}
