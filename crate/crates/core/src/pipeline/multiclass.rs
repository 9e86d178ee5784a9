use ndarray::{Array1, Array2, ArrayView2};

use super::model::CollapsedModel;
use crate::data::{Dataset, Family, FitConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One binomial uniLasso model per class.
#[derive(Debug, Clone)]
pub struct OvrModel<F> {
    /// Class labels in increasing order.
    pub classes: Vec<F>,
    pub models: Vec<CollapsedModel<F>>,
}

impl<F: Scalar> OvrModel<F> {
    /// `n x K` matrix of per-class probabilities. Rows need not sum to 1.
    pub fn predict_proba(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        let mut out = Array2::zeros((x.nrows(), self.classes.len()));
        for (k, m) in self.models.iter().enumerate() {
            out.column_mut(k).assign(&m.predict_response(x)?);
        }
        Ok(out)
    }

    /// Most probable class per row; ties go to the lowest class index.
    pub fn predict(&self, x: ArrayView2<'_, F>) -> Result<Array1<F>> {
        let probs = self.predict_proba(x)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for k in 1..row.len() {
                    if row[k] > row[best] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

/// One-versus-rest uniLasso for a response holding integer class labels.
pub fn ovr_multiclass<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<OvrModel<F>> {
    let y = &dataset.response;
    if let Some(i) = y.iter().position(|v| !v.is_finite() || v.fract() != F::zero()) {
        return Err(Error::InvalidInput(format!("row {} has non-integer class label {}", i + 1, y[i])));
    }
    let mut classes: Vec<F> = y.to_vec();
    classes.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    classes.dedup();
    if classes.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "one-versus-rest needs at least 3 classes, found {}",
            classes.len()
        )));
    }
    for &c in &classes {
        let count = y.iter().filter(|&&v| v == c).count();
        if count < config.n_folds {
            return Err(Error::InvalidConfig(format!(
                "class {c} has {count} members, fewer than n_folds = {}; use fewer folds",
                config.n_folds
            )));
        }
    }
    let models = classes
        .iter()
        .map(|&c| {
            let indicator = y.mapv(|v| if v == c { F::one() } else { F::zero() });
            let binary = dataset.with_response(indicator, Family::Binomial)?;
            Ok(super::unilasso_cv(&binary, config)?.model)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OvrModel { classes, models })
}
