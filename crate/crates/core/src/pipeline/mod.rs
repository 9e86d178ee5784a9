//! End-to-end estimators: uniLasso and its variants, uniReg, polish,
//! external scores and one-versus-rest classification.

mod external;
mod model;
mod multiclass;
mod polish;
mod stage2;
mod unireg;

pub use external::{read_external_scores, read_external_scores_from, ExternalScores, ResolvedScores};
pub use model::{
    CoefficientPath, CollapsedModel, PathStage, Prediction, Stage2Coefficients, UnivariateSummary, Variant,
};
pub use multiclass::{ovr_multiclass, OvrModel};
pub use polish::{polish, unilasso_polish, PolishFit};
pub use stage2::{
    build_design, fit_stage2_cv, fit_stage2_path, fit_stage2_path_with_lambdas, PathFit, Stage2Design, Stage2Kind,
};
pub use unireg::{unireg, unireg_bootstrap_ci, BootstrapInterval, UNIREG_MIN_RATIO};

use crate::data::{Dataset, FitConfig};
use crate::error::Result;
use crate::scalar::Scalar;

/// uniLasso with the penalty chosen by cross-validation.
///
/// The `loo`, `sign_constraint` and `use_magnitude` flags of `config` select
/// the variant; the defaults give the standard estimator.
pub fn unilasso_cv<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<PathFit<F>> {
    fit_stage2_cv(dataset, &Stage2Kind::from_config(config), None, config)
}

/// The cross-validated model of the variant selected by `config`.
pub fn variant_fit<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<CollapsedModel<F>> {
    Ok(unilasso_cv(dataset, config)?.model)
}

/// Plain lasso on standardized features with cross-validation.
pub fn lasso_cv<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<PathFit<F>> {
    fit_stage2_cv(dataset, &Stage2Kind::Lasso, None, config)
}

/// Adaptive lasso (penalty factors `1/|slope_j|`) with cross-validation.
pub fn adaptive_lasso_cv<F: Scalar>(dataset: &Dataset<F>, sign_constraint: bool, config: &FitConfig) -> Result<PathFit<F>> {
    fit_stage2_cv(dataset, &Stage2Kind::Adaptive { sign_constraint }, None, config)
}

/// uniLasso whose stage-2 columns come from external univariate scores.
pub fn unilasso_external<F: Scalar>(
    dataset: &Dataset<F>,
    scores: &ExternalScores<F>,
    config: &FitConfig,
) -> Result<PathFit<F>> {
    fit_stage2_cv(dataset, &Stage2Kind::External(scores.clone()), None, config)
}

/// Linear predictor (and probabilities for binomial models) on new rows.
pub fn predict<F: Scalar>(model: &CollapsedModel<F>, x: ndarray::ArrayView2<'_, F>) -> Result<Prediction<F>> {
    model.predict(x)
}

#[cfg(test)]
mod tests;
