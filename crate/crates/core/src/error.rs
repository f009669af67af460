use core::fmt;

/// Errors raised across the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A state, ensemble or parameter failed validation.
    InvalidInput(&'static str),
    /// Bisector requested for antipodal (orthogonal) states.
    AntipodalInput,
    /// Overlap triple not produced by any three qubit states.
    NotRealizable,
    /// Ensemble average does not match the reduced state.
    NotSteerable { max_deviation: f64 },
    /// An ensemble member lies outside the support of the reduced state.
    RankDeficient { member: usize, residual: f64 },
    /// Ensembles of a scenario do not share a common average.
    InconsistentEnsembles { max_deviation: f64 },
    /// Noisy (w < 1) scenarios need a maximally mixed reduced state.
    NotMaximallyMixed,
    /// Operation only defined for the canned constructions.
    UnsupportedScenario,
    /// Neither a witness nor a certificate reached its tolerance.
    NumericallyAmbiguous { residual: f64, margin: f64 },
    /// Pivot budget exhausted.
    IterationLimit,
    /// Every searched configuration admits a model at w = 1.
    NoViolationFound,
    /// Feasible region along a bisection trace is not a down-set.
    NonMonotone { infeasible_at: f64, feasible_at: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::AntipodalInput => write!(f, "bisector undefined for antipodal states"),
            Error::NotRealizable => write!(f, "overlap triple is not realizable by qubit states"),
            Error::NotSteerable { max_deviation } => {
                write!(f, "ensemble average differs from reduced state by {max_deviation:e}")
            }
            Error::RankDeficient { member, residual } => write!(
                f,
                "ensemble member {member} lies outside the reduced-state support (residual {residual:e})"
            ),
            Error::InconsistentEnsembles { max_deviation } => {
                write!(f, "ensemble averages differ by {max_deviation:e}")
            }
            Error::NotMaximallyMixed => {
                write!(f, "noisy scenarios require a maximally mixed reduced state")
            }
            Error::UnsupportedScenario => write!(f, "scenario has no canned marginal system"),
            Error::NumericallyAmbiguous { residual, margin } => write!(
                f,
                "numerically ambiguous: witness residual {residual:e}, certificate margin {margin:e}"
            ),
            Error::IterationLimit => write!(f, "simplex pivot limit reached"),
            Error::NoViolationFound => {
                write!(f, "no configuration in the family is infeasible at w = 1")
            }
            Error::NonMonotone { infeasible_at, feasible_at } => write!(
                f,
                "non-monotone trace: infeasible at w = {infeasible_at}, feasible at w = {feasible_at}"
            ),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
