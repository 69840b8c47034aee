//! Euclidean projection onto the ℓ∞,1 mixed-norm ball.
//!
//! The projection of a matrix `B` onto `{X : Σ_m ‖x_m‖∞ ≤ τ}` is computed
//! through its dual: every row is projected onto a common ℓ1 ball of radius
//! `γ`, and `γ` is found as the root of a monotone scalar search function.
//! [`linf1::newton_project`] performs that root search with a Newton update,
//! row pruning and a shrink-based starting point. [`baselines`] carries the
//! bracketing (GRF) and Steffensen (SRF) root searches it is compared to,
//! [`oracle`] a slow bisection reference, and [`mtl`] a projected-gradient
//! multi-task LASSO solver that consumes any of the projectors.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod l1ball;
pub mod linf1;
pub mod matrix;
pub mod mtl;
pub mod oracle;

pub use baselines::{grf_project, srf_project, SteffensenOptions};
pub use error::{Error, Result};
pub use linf1::{newton_project, ProjectionResult, SolverOptions};
pub use matrix::GroupMatrix;

use std::fmt;
use std::str::FromStr;

/// Root-search strategy used to project onto the ℓ∞,1 ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Grf,
    Srf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Newton, Method::Grf, Method::Srf];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Grf => "grf",
            Method::Srf => "srf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(Method::Newton),
            "grf" => Ok(Method::Grf),
            "srf" => Ok(Method::Srf),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Anything that projects a matrix onto the ℓ∞,1 ball of a given radius.
pub trait Projector {
    fn project(&self, b: &GroupMatrix, tau: f64) -> Result<ProjectionResult>;
}

/// A [`Method`] together with the knobs that method reads.
#[derive(Debug, Clone, Copy)]
pub struct MethodProjector {
    pub method: Method,
    pub options: SolverOptions,
    pub steffensen: SteffensenOptions,
}

impl MethodProjector {
    /// Default options for `method`. GRF starts with pruning and the
    /// initial point switched off.
    pub fn new(method: Method) -> Self {
        let options = match method {
            Method::Grf => SolverOptions::baseline(),
            _ => SolverOptions::default(),
        };
        Self {
            method,
            options,
            steffensen: SteffensenOptions::default(),
        }
    }

    pub fn with_pruning(mut self, on: bool) -> Self {
        self.options.use_pruning = on;
        self.steffensen.use_pruning = on;
        self
    }

    pub fn with_initial_point(mut self, on: bool) -> Self {
        self.options.use_initial_point = on;
        self.steffensen.use_initial_point = on;
        self
    }
}

impl Projector for MethodProjector {
    fn project(&self, b: &GroupMatrix, tau: f64) -> Result<ProjectionResult> {
        match self.method {
            Method::Newton => newton_project(b, tau, &self.options),
            Method::Grf => grf_project(b, tau, &self.options),
            Method::Srf => srf_project(b, tau, &self.steffensen),
        }
    }
}

impl<F> Projector for F
where
    F: Fn(&GroupMatrix, f64) -> Result<ProjectionResult>,
{
    fn project(&self, b: &GroupMatrix, tau: f64) -> Result<ProjectionResult> {
        self(b, tau)
    }
}
