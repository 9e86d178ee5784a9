//! Univariate-guided sparse regression.
//!
//! Stage 1 fits one univariate model per feature (with leave-one-out
//! predictions); stage 2 runs a non-negative lasso on those predictions and
//! the result is collapsed back to a linear model in the original features.
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`).

pub mod cv;
pub mod data;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod scalar;
pub mod simulate;
pub mod solver;
pub mod univariate;
pub mod verify;

pub use cv::CvResult;
pub use data::{Dataset, Family, FitConfig, LambdaRule};
pub use error::{Error, ErrorKind, Result};
pub use pipeline::{
    lasso_cv, ovr_multiclass, polish, predict, unilasso_cv, unilasso_external, unilasso_polish, unireg,
    CollapsedModel, ExternalScores, PathFit, Variant,
};
pub use scalar::Scalar;
pub use solver::{fit_path, PathSolution, SolverProblem};
pub use univariate::{fit_univariate, UnivariateFits};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type UnivariateFits64 = UnivariateFits<f64>;
pub type UnivariateFits32 = UnivariateFits<f32>;
pub type SolverProblem64 = SolverProblem<f64>;
pub type SolverProblem32 = SolverProblem<f32>;
pub type PathSolution64 = PathSolution<f64>;
pub type PathSolution32 = PathSolution<f32>;
pub type CvResult64 = CvResult<f64>;
pub type CvResult32 = CvResult<f32>;
pub type PathFit64 = PathFit<f64>;
pub type PathFit32 = PathFit<f32>;
pub type CollapsedModel64 = CollapsedModel<f64>;
pub type CollapsedModel32 = CollapsedModel<f32>;
pub type ExternalScores64 = ExternalScores<f64>;
pub type ExternalScores32 = ExternalScores<f32>;
