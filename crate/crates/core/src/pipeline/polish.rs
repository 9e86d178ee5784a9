use ndarray::{concatenate, Array2, Axis};

use super::model::{CoefficientPath, CollapsedModel, PathStage, Variant};
use super::stage2::{fit_stage2_cv, PathFit, Stage2Kind};
use crate::data::{Dataset, FitConfig};
use crate::error::Result;
use crate::scalar::Scalar;

/// A polished model with both underlying fits and the stitched path.
#[derive(Debug, Clone)]
pub struct PolishFit<F> {
    pub model: CollapsedModel<F>,
    pub base: PathFit<F>,
    /// Plain lasso fitted with the base predictions as offset.
    pub residual_fit: PathFit<F>,
    /// Base path up to its selected point, then base plus residual-fit path.
    pub stitched: CoefficientPath<F>,
}

/// Fits a cross-validated lasso on top of `base`'s selected linear predictor
/// and adds its coefficients to the base model.
pub fn polish<F: Scalar>(dataset: &Dataset<F>, base: &PathFit<F>, config: &FitConfig) -> Result<PolishFit<F>> {
    let offset = base.model.linear_predictor(dataset.features.view())?;
    let residual_fit = fit_stage2_cv(dataset, &Stage2Kind::Lasso, Some(&offset), config)?;
    let add = &residual_fit.model;
    let model = CollapsedModel {
        family: dataset.family,
        variant: Variant::Polish,
        gamma0: base.model.gamma0 + add.gamma0,
        gammas: &base.model.gammas + &add.gammas,
        lambda_selected: add.lambda_selected,
        feature_names: dataset.names(),
        univariate: base.model.univariate.clone(),
        stage2: None,
    };
    let stitched = stitch(base, &residual_fit);
    Ok(PolishFit {
        model,
        base: base.clone(),
        residual_fit,
        stitched,
    })
}

/// uniLasso with cross-validation followed by [`polish`].
pub fn unilasso_polish<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<PolishFit<F>> {
    let base = super::unilasso_cv(dataset, config)?;
    polish(dataset, &base, config)
}

fn stitch<F: Scalar>(base: &PathFit<F>, residual: &PathFit<F>) -> CoefficientPath<F> {
    let head = base.selected + 1;
    let bp = &base.coefficient_path;
    let rp = &residual.coefficient_path;
    let shifted: Array2<F> = &rp.coefs + &base.model.gammas.view().insert_axis(Axis(0));
    let coefs = concatenate(Axis(0), &[bp.coefs.slice(ndarray::s![..head, ..]), shifted.view()])
        .expect("same feature count");
    let mut lambdas = bp.lambdas[..head].to_vec();
    lambdas.extend_from_slice(&rp.lambdas);
    let mut stages = vec![PathStage::Base; head];
    stages.extend(std::iter::repeat_n(PathStage::Polish, rp.len()));
    let mut intercepts = bp.intercepts[..head].to_vec();
    intercepts.extend(rp.intercepts.iter().map(|&b| b + base.model.gamma0));
    let mut objective = bp.objective[..head].to_vec();
    objective.extend_from_slice(&rp.objective);
    CoefficientPath {
        lambdas,
        stages,
        intercepts,
        coefs,
        objective,
    }
}
