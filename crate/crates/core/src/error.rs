use thiserror::Error;

use crate::expr::{EvalPoint, ParseError};

/// Sample point attached to a failed certification, as `(name, value)` pairs.
pub type Witness = Vec<(String, f64)>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid jet space: {0}")]
    InvalidSpace(String),

    #[error("order overflow: needs jet order {needed}, space has {max}")]
    OrderOverflow { needed: usize, max: usize },

    #[error("invalid vector field: {0}")]
    InvalidField(String),

    #[error("invalid twist: {0}")]
    InvalidTwist(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("Maurer-Cartan condition fails for directions ({i}, {j}), residual {residual:e}")]
    MchViolation { i: usize, j: usize, residual: f64 },

    #[error("more than 90% of sample draws hit singularities")]
    PersistentDomainFailure,

    #[error("matrix is singular at a sample point")]
    SingularAtSample,

    #[error("symbolic inverse only supported up to size 3, got {0}")]
    MatrixTooLarge(usize),

    #[error("gauge correspondence requires a vertical field")]
    NonVerticalInput,

    #[error("restriction needs {0}, which the equation does not determine")]
    NeedsUnavailableDerivative(String),

    #[error("equation is not in solved form: {0}")]
    NotSolvedForm(String),

    #[error("distribution drops rank at too many sample points")]
    DegenerateDistribution,

    #[error("fields are not in involution: [X{alpha}, X{beta}] leaves their span")]
    NotInvolutive { alpha: usize, beta: usize, witness: Witness },

    #[error("sample matrix is ill-conditioned after resampling")]
    IllConditioned,

    #[error("base invariant has vanishing total derivative")]
    DegenerateBase,

    #[error("invariants by differentiation fail at order {order} (residual {residual:e})")]
    IbdpViolation { order: usize, residual: f64, witness: Witness },

    #[error("input is not invariant: {0}")]
    NotInvariant(String),

    #[error("elimination pivot vanishes: {0}")]
    NonGenericChain(String),

    #[error("reduced equation is not expressible in the invariants: {detail}")]
    NotExpressible { detail: String, witness: Witness },

    #[error("Lagrangian is degenerate (singular Hessian)")]
    DegenerateLagrangian,

    #[error("coefficients are not proportional at {coordinate}")]
    NotProportional { coordinate: String, witness: Witness },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("non-finite sample value")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn witness_from(point: &EvalPoint, space: Option<&crate::jet::JetSpace>) -> Witness {
    let mut out: Vec<(String, f64)> = point
        .iter()
        .map(|(s, v)| {
            let name = match space {
                Some(sp) => sp.symbol_name(s),
                None => format!("{s:?}"),
            };
            (name, *v)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
