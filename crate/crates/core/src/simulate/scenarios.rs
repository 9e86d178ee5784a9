use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::data::{Dataset, Family};
use crate::error::{Error, Result};
use crate::univariate::fit_univariate;

/// Simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    LowSnr,
    MediumSnr,
    HighSnr,
    Homecourt,
    TwoClass,
    CounterExample,
    External,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::LowSnr,
        ScenarioKind::MediumSnr,
        ScenarioKind::HighSnr,
        ScenarioKind::Homecourt,
        ScenarioKind::TwoClass,
        ScenarioKind::CounterExample,
        ScenarioKind::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::LowSnr => "low_snr",
            ScenarioKind::MediumSnr => "medium_snr",
            ScenarioKind::HighSnr => "high_snr",
            ScenarioKind::Homecourt => "homecourt",
            ScenarioKind::TwoClass => "two_class",
            ScenarioKind::CounterExample => "counter_example",
            ScenarioKind::External => "external",
        }
    }

    pub fn family(self) -> Family {
        if self == ScenarioKind::TwoClass {
            Family::Binomial
        } else {
            Family::Gaussian
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::InvalidInput(format!("unknown scenario '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Parameters of one simulation design.
///
/// `snr` is ignored by `two_class` (mean shift 0.5) and `counter_example`
/// (noise SD 0.5); `sparsity` is ignored by the designs with a fixed support.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub rho: f64,
    pub sparsity: f64,
    pub n_test: usize,
    /// Rows of the external data set (`external` only).
    pub n_external: usize,
}

/// Mean shift of the informative features in the `two_class` design.
pub const TWO_CLASS_SHIFT: f64 = 0.5;
/// Informative features in the `two_class` design.
pub const TWO_CLASS_INFORMATIVE: usize = 20;
/// Noise SD in the `counter_example` design.
pub const COUNTER_EXAMPLE_SIGMA: f64 = 0.5;

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        let base = Scenario {
            kind,
            n: 300,
            p: 1000,
            snr: 1.0,
            rho: 0.5,
            sparsity: 0.1,
            n_test: 10_000,
            n_external: 0,
        };
        match kind {
            ScenarioKind::LowSnr => Scenario { snr: 0.5, ..base },
            ScenarioKind::MediumSnr => base,
            ScenarioKind::HighSnr => Scenario { snr: 3.0, ..base },
            ScenarioKind::Homecourt => Scenario {
                n: 100,
                p: 30,
                rho: 0.8,
                sparsity: 0.2,
                ..base
            },
            ScenarioKind::TwoClass => Scenario {
                n: 200,
                p: 500,
                rho: 0.8,
                sparsity: TWO_CLASS_INFORMATIVE as f64 / 500.0,
                ..base
            },
            ScenarioKind::CounterExample => Scenario {
                n: 100,
                p: 20,
                rho: 0.0,
                sparsity: 0.1,
                ..base
            },
            ScenarioKind::External => Scenario {
                snr: 1.5,
                rho: 0.8,
                sparsity: 0.05,
                n_external: 600,
                ..base
            },
        }
    }

    pub fn with_size(mut self, n: usize, p: usize) -> Self {
        self.n = n;
        self.p = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let min_p = match self.kind {
            ScenarioKind::CounterExample => 2,
            _ => 1,
        };
        if self.n < 3 || self.p < min_p || self.n_test < 1 {
            return Err(Error::InvalidConfig(format!(
                "scenario needs n >= 3, p >= {min_p} and a test set (got n={}, p={}, n_test={})",
                self.n, self.p, self.n_test
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidConfig(format!("snr must be positive, got {}", self.snr)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!("rho must be in [0, 1), got {}", self.rho)));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::InvalidConfig(format!("sparsity must be in (0, 1], got {}", self.sparsity)));
        }
        if self.kind == ScenarioKind::External && self.n_external < 3 {
            return Err(Error::InvalidConfig("external scenario needs at least 3 external rows".into()));
        }
        Ok(())
    }

    /// Draws training data, an independent test set and the true coefficients.
    pub fn generate(&self, seed: u64) -> Result<SimData> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.kind {
            ScenarioKind::LowSnr | ScenarioKind::MediumSnr | ScenarioKind::HighSnr => {
                let k = ((self.sparsity * self.p as f64).round() as usize).min(self.p);
                let mut beta = Array1::zeros(self.p);
                for j in sample(&mut rng, self.p, k).into_vec() {
                    beta[j] = rng.sample::<f64, _>(StandardNormal);
                }
                let draw = |rng: &mut ChaCha8Rng, n| equicorrelated(rng, n, self.p, self.rho);
                self.linear_model(&mut rng, draw, beta)
            }
            ScenarioKind::Homecourt => self.homecourt(&mut rng),
            ScenarioKind::TwoClass => self.two_class(&mut rng),
            ScenarioKind::CounterExample => self.counter_example(&mut rng),
            ScenarioKind::External => {
                let unif = Uniform::new(0.5, 2.0).expect("valid range");
                let mut beta = Array1::zeros(self.p);
                for j in (0..self.p.min(100)).step_by(2) {
                    beta[j] = rng.sample(unif);
                }
                let draw = |rng: &mut ChaCha8Rng, n| ar1(rng, n, self.p, self.rho);
                let mut data = self.linear_model(&mut rng, draw, beta)?;
                let sigma = data.sigma;
                let x = ar1(&mut rng, self.n_external, self.p, self.rho);
                let y = respond(&mut rng, &x, data.true_beta.view(), sigma);
                data.external = Some(Dataset::new(x, y, Family::Gaussian)?);
                Ok(data)
            }
        }
    }

    fn linear_model(
        &self,
        rng: &mut ChaCha8Rng,
        draw: impl Fn(&mut ChaCha8Rng, usize) -> Array2<f64>,
        beta: Array1<f64>,
    ) -> Result<SimData> {
        let x = draw(rng, self.n);
        let sigma = calibrated_sigma(&x, beta.view(), self.snr);
        let y = respond(rng, &x, beta.view(), sigma);
        let xt = draw(rng, self.n_test);
        let yt = respond(rng, &xt, beta.view(), sigma);
        Ok(SimData {
            train: Dataset::new(x, y, Family::Gaussian)?,
            test: Dataset::new(xt, yt, Family::Gaussian)?,
            true_beta: beta,
            sigma,
            external: None,
        })
    }

    /// Two-stage design whose effective coefficients are univariate slopes
    /// times non-negative coefficients.
    fn homecourt(&self, rng: &mut ChaCha8Rng) -> Result<SimData> {
        let k = ((self.sparsity * self.p as f64).round() as usize).clamp(1, self.p);
        let mut beta = Array1::zeros(self.p);
        for j in sample(rng, self.p, k).into_vec() {
            beta[j] = rng.sample::<f64, _>(StandardNormal).abs();
        }
        let x = ar1(rng, self.n, self.p, self.rho);
        let sigma1 = calibrated_sigma(&x, beta.view(), self.snr);
        let y1 = respond(rng, &x, beta.view(), sigma1);
        let first = Dataset::new(x.clone(), y1, Family::Gaussian)?;
        let slopes = fit_univariate(&first)?.slopes;
        let effective = &slopes * &beta;
        let sigma = calibrated_sigma(&x, effective.view(), self.snr);
        let y = respond(rng, &x, effective.view(), sigma);
        let xt = ar1(rng, self.n_test, self.p, self.rho);
        let yt = respond(rng, &xt, effective.view(), sigma);
        Ok(SimData {
            train: Dataset::new(x, y, Family::Gaussian)?,
            test: Dataset::new(xt, yt, Family::Gaussian)?,
            true_beta: effective,
            sigma,
            external: None,
        })
    }

    fn two_class(&self, rng: &mut ChaCha8Rng) -> Result<SimData> {
        let informative = TWO_CLASS_INFORMATIVE.min(self.p);
        let mut draw = |n: usize| -> Result<Dataset<f64>> {
            let mut x = ar1(rng, n, self.p, self.rho);
            let y = Array1::from_shape_fn(n, |i| (i % 2) as f64);
            for i in 0..n {
                if y[i] == 1.0 {
                    for j in 0..informative {
                        x[[i, j]] += TWO_CLASS_SHIFT;
                    }
                }
            }
            Dataset::new(x, y, Family::Binomial)
        };
        let train = draw(self.n)?;
        let test = draw(self.n_test)?;
        let true_beta = Array1::from_shape_fn(self.p, |j| if j < informative { TWO_CLASS_SHIFT } else { 0.0 });
        Ok(SimData {
            train,
            test,
            true_beta,
            sigma: 0.0,
            external: None,
        })
    }

    fn counter_example(&self, rng: &mut ChaCha8Rng) -> Result<SimData> {
        let mut beta = Array1::zeros(self.p);
        beta[0] = 1.0;
        beta[1] = -0.5;
        let draw = |rng: &mut ChaCha8Rng, n: usize| {
            let mut x = Array2::from_shape_fn((n, self.p), |_| rng.sample::<f64, _>(StandardNormal));
            for i in 0..n {
                x[[i, 1]] += x[[i, 0]];
            }
            x
        };
        let x = draw(rng, self.n);
        let y = respond(rng, &x, beta.view(), COUNTER_EXAMPLE_SIGMA);
        let xt = draw(rng, self.n_test);
        let yt = respond(rng, &xt, beta.view(), COUNTER_EXAMPLE_SIGMA);
        Ok(SimData {
            train: Dataset::new(x, y, Family::Gaussian)?,
            test: Dataset::new(xt, yt, Family::Gaussian)?,
            true_beta: beta,
            sigma: COUNTER_EXAMPLE_SIGMA,
            external: None,
        })
    }
}

/// One simulated replicate.
#[derive(Debug, Clone)]
pub struct SimData {
    pub train: Dataset<f64>,
    pub test: Dataset<f64>,
    /// Generating coefficients (for `two_class`, the mean shift per feature).
    pub true_beta: Array1<f64>,
    /// Noise SD (0 for `two_class`).
    pub sigma: f64,
    /// Extra rows from the same distribution (`external` only).
    pub external: Option<Dataset<f64>>,
}

/// Equicorrelated standard normal features: `sqrt(rho) u_i + sqrt(1 - rho) e_ij`.
pub fn equicorrelated(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> Array2<f64> {
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let u: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            x[[i, j]] = a * u + b * rng.sample::<f64, _>(StandardNormal);
        }
    }
    x
}

/// Standard normal features with AR(1) correlation `rho^|j - k|`.
pub fn ar1(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> Array2<f64> {
    let b = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let mut prev: f64 = rng.sample(StandardNormal);
        x[[i, 0]] = prev;
        for j in 1..p {
            prev = rho * prev + b * rng.sample::<f64, _>(StandardNormal);
            x[[i, j]] = prev;
        }
    }
    x
}

/// Noise SD giving `Var(X beta) / sigma^2 = snr` on this draw.
pub fn calibrated_sigma(x: &Array2<f64>, beta: ArrayView1<'_, f64>, snr: f64) -> f64 {
    let signal = x.dot(&beta);
    let var = signal.var(0.0);
    if var > 0.0 {
        (var / snr).sqrt()
    } else {
        1.0
    }
}

fn respond(rng: &mut ChaCha8Rng, x: &Array2<f64>, beta: ArrayView1<'_, f64>, sigma: f64) -> Array1<f64> {
    let mut y = x.dot(&beta);
    for v in y.iter_mut() {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    y
}
