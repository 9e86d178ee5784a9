use std::collections::BTreeSet;

use ndarray::{Array1, ArrayView1};

use crate::data::{Dataset, Family, FitConfig};
use crate::error::{Error, Result};
use crate::pipeline::{lasso_cv, CollapsedModel, PathFit};
use crate::scalar::sigmoid;

/// Test-set performance and support recovery of one fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Mean squared error (gaussian) or misclassification rate (binomial).
    pub error: f64,
    pub support: usize,
    /// True positive rate; NaN when the true support is empty.
    pub tpr: f64,
    /// False positive rate; NaN when every feature is in the true support.
    pub fpr: f64,
}

pub fn evaluate(model: &CollapsedModel<f64>, test: &Dataset<f64>, true_beta: ArrayView1<'_, f64>) -> Result<Metrics> {
    evaluate_coefficients(model.gamma0, model.gammas.view(), model.family, test, true_beta)
}

pub fn evaluate_coefficients(
    gamma0: f64,
    gammas: ArrayView1<'_, f64>,
    family: Family,
    test: &Dataset<f64>,
    true_beta: ArrayView1<'_, f64>,
) -> Result<Metrics> {
    if gammas.len() != test.p() || true_beta.len() != test.p() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} coefficients, truth {}, test set {} features",
            gammas.len(),
            true_beta.len(),
            test.p()
        )));
    }
    let eta = test.features.dot(&gammas) + gamma0;
    let error = match family {
        Family::Gaussian => mean_squared_error(eta.view(), test.response.view()),
        Family::Binomial => {
            let wrong = eta
                .iter()
                .zip(test.response.iter())
                .filter(|(e, y)| (sigmoid(**e) > 0.5) != (**y > 0.5))
                .count();
            wrong as f64 / test.n() as f64
        }
    };
    let (tpr, fpr) = support_rates(gammas, true_beta);
    Ok(Metrics {
        error,
        support: gammas.iter().filter(|v| **v != 0.0).count(),
        tpr,
        fpr,
    })
}

pub fn mean_squared_error(pred: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    let r: Array1<f64> = &y - &pred;
    r.dot(&r) / y.len() as f64
}

/// `(TPR, FPR)` of the estimated support against the true one.
pub fn support_rates(estimate: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>) -> (f64, f64) {
    let (mut tp, mut fp, mut pos) = (0usize, 0usize, 0usize);
    for (e, t) in estimate.iter().zip(truth.iter()) {
        let selected = *e != 0.0;
        if *t != 0.0 {
            pos += 1;
            tp += selected as usize;
        } else {
            fp += selected as usize;
        }
    }
    let neg = truth.len() - pos;
    let rate = |k: usize, d: usize| if d == 0 { f64::NAN } else { k as f64 / d as f64 };
    (rate(tp, pos), rate(fp, neg))
}

/// Jaccard index of two supports; two empty supports score 1.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let a: BTreeSet<_> = a.iter().collect();
    let b: BTreeSet<_> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Mean pairwise Jaccard index of the models' supports.
pub fn stability(models: &[CollapsedModel<f64>]) -> f64 {
    let supports: Vec<Vec<usize>> = models.iter().map(|m| m.support()).collect();
    support_stability(&supports)
}

/// Mean pairwise Jaccard index of the supports (1 for fewer than two).
pub fn support_stability(supports: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            total += jaccard(&supports[i], &supports[j]);
            pairs += 1;
        }
    }
    if pairs == 0 {
        1.0
    } else {
        total / pairs as f64
    }
}

/// Lasso model with at most `target` nonzero coefficients: starting from the
/// CV minimum, move toward larger penalties until the support is small enough.
pub fn matching_from_path(lasso: &PathFit<f64>, target: usize) -> CollapsedModel<f64> {
    let path = &lasso.coefficient_path;
    let start = lasso.cv.as_ref().map_or(lasso.selected, |cv| cv.idx_min);
    let k = (0..=start).rev().find(|&k| path.support_size(k) <= target).unwrap_or(0);
    lasso.model_at(k)
}

/// Cross-validated lasso restricted to the given support size.
pub fn matching_lasso(dataset: &Dataset<f64>, target: usize, config: &FitConfig) -> Result<CollapsedModel<f64>> {
    Ok(matching_from_path(&lasso_cv(dataset, config)?, target))
}
