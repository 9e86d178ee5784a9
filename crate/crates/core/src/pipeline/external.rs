use std::io::Read;
use std::path::Path;

use ndarray::Array1;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::univariate::fit_univariate;

/// Univariate coefficients computed elsewhere, one row per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScores<F> {
    pub slopes: Array1<F>,
    /// Missing intercepts default to `ybar - slope_j * xbar_j` on the training data.
    pub intercepts: Option<Array1<F>>,
    pub ses: Option<Array1<F>>,
    pub feature_names: Option<Vec<String>>,
}

/// External scores with intercepts filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScores<F> {
    pub slopes: Array1<F>,
    pub intercepts: Array1<F>,
}

impl<F: Scalar> ExternalScores<F> {
    pub fn new(slopes: Array1<F>) -> Self {
        ExternalScores {
            slopes,
            intercepts: None,
            ses: None,
            feature_names: None,
        }
    }

    pub fn with_intercepts(mut self, intercepts: Array1<F>) -> Self {
        self.intercepts = Some(intercepts);
        self
    }

    /// Univariate fits of another dataset (no leave-one-out).
    pub fn from_dataset(external: &Dataset<F>) -> Result<Self> {
        let fits = fit_univariate(external)?;
        Ok(ExternalScores::new(fits.slopes).with_intercepts(fits.intercepts))
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        let check = |name: &str, v: &Array1<F>| -> Result<()> {
            if v.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "external {name} has {} entries, data has {p} features",
                    v.len()
                )));
            }
            if let Some(j) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("external {name} entry {j} is not finite")));
            }
            Ok(())
        };
        check("slopes", &self.slopes)?;
        if let Some(i) = &self.intercepts {
            check("intercepts", i)?;
        }
        if let Some(s) = &self.ses {
            check("standard errors", s)?;
        }
        Ok(())
    }

    /// Checks dimensions and names against the training data and fills in
    /// missing intercepts.
    pub fn resolved(&self, dataset: &Dataset<F>) -> Result<ResolvedScores<F>> {
        self.validate(dataset.p())?;
        if let (Some(names), Some(_)) = (&self.feature_names, &dataset.feature_names) {
            let expected = dataset.names();
            if let Some(j) = (0..names.len()).find(|&j| names[j] != expected[j]) {
                return Err(Error::InvalidInput(format!(
                    "external scores row {} is for feature '{}', data column is '{}'",
                    j + 1,
                    names[j],
                    expected[j]
                )));
            }
        }
        let intercepts = match &self.intercepts {
            Some(i) => i.clone(),
            None => {
                let ybar = dataset.response.mean().unwrap_or(F::zero());
                let xbar = crate::linalg::column_means(dataset.features.view());
                Array1::from_iter((0..dataset.p()).map(|j| ybar - self.slopes[j] * xbar[j]))
            }
        };
        Ok(ResolvedScores {
            slopes: self.slopes.clone(),
            intercepts,
        })
    }
}

/// Reads scores from CSV with a header row. Column `slope` is required;
/// `intercept`, `se` and `feature` are optional.
pub fn read_external_scores_from<R: Read>(reader: R) -> Result<ExternalScores<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let slope = find("slope").ok_or_else(|| Error::InvalidInput("external scores need a 'slope' column".into()))?;
    let (icpt, se, feat) = (find("intercept"), find("se"), find("feature"));
    let mut slopes = Vec::new();
    let mut intercepts = Vec::new();
    let mut ses = Vec::new();
    let mut names = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let line = r + 2;
        let num = |c: usize| -> Result<f64> {
            let field = rec.get(c).unwrap_or("");
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "line {line}, column '{}': '{field}' is not a finite number",
                    header[c]
                ))
            })
        };
        slopes.push(num(slope)?);
        if let Some(c) = icpt {
            intercepts.push(num(c)?);
        }
        if let Some(c) = se {
            ses.push(num(c)?);
        }
        if let Some(c) = feat {
            names.push(rec.get(c).unwrap_or("").to_string());
        }
    }
    Ok(ExternalScores {
        slopes: Array1::from(slopes),
        intercepts: icpt.map(|_| Array1::from(intercepts)),
        ses: se.map(|_| Array1::from(ses)),
        feature_names: feat.map(|_| names),
    })
}

pub fn read_external_scores(path: &Path) -> Result<ExternalScores<f64>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_external_scores_from(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Family;
    use ndarray::array;

    #[test]
    fn reads_optional_columns() {
        let text = "feature,slope,se\nx1,0.5,0.1\nx2,-1.25,0.2\n";
        let s = read_external_scores_from(text.as_bytes()).unwrap();
        assert_eq!(s.slopes, array![0.5, -1.25]);
        assert!(s.intercepts.is_none());
        assert_eq!(s.ses, Some(array![0.1, 0.2]));
        assert_eq!(s.feature_names, Some(vec!["x1".to_string(), "x2".to_string()]));
    }

    #[test]
    fn missing_slope_column_is_rejected() {
        assert!(read_external_scores_from("a,b\n1,2\n".as_bytes()).is_err());
        let bad = read_external_scores_from("slope\nfoo\n".as_bytes()).unwrap_err();
        assert!(bad.to_string().contains("'slope'"), "{bad}");
    }

    #[test]
    fn default_intercepts_use_training_means() {
        let d: Dataset<f64> = Dataset::new(array![[1.0, 0.0], [2.0, 1.0], [3.0, 5.0]], array![1.0, 2.0, 6.0], Family::Gaussian).unwrap();
        let r = ExternalScores::new(array![2.0, 0.0]).resolved(&d).unwrap();
        assert!((r.intercepts[0] - (3.0 - 2.0 * 2.0)).abs() < 1e-12);
        assert!((r.intercepts[1] - 3.0).abs() < 1e-12);
        assert!(ExternalScores::new(array![1.0]).resolved(&d).is_err());
    }
}
