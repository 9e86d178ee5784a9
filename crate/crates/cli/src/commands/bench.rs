use std::time::Instant;

use unilasso::data::FitConfig;
use unilasso::pipeline::{lasso_cv, unilasso_cv, unilasso_polish, unireg, CollapsedModel};
use unilasso::simulate::{Scenario, ScenarioKind};
use unilasso::{Error, Result};

use crate::args::BenchArgs;
use crate::output::{num, Sink};

type Estimator = fn(&unilasso::Dataset<f64>, &FitConfig) -> Result<CollapsedModel<f64>>;

const ESTIMATORS: [(&str, Estimator); 4] = [
    ("unilasso", |d, c| Ok(unilasso_cv(d, c)?.model)),
    ("lasso", |d, c| Ok(lasso_cv(d, c)?.model)),
    ("polish", |d, c| Ok(unilasso_polish(d, c)?.model)),
    ("unireg", unireg),
];

pub fn run(args: &BenchArgs) -> Result<()> {
    if args.repeats == 0 {
        return Err(Error::InvalidConfig("--repeats must be positive".into()));
    }
    let kind: ScenarioKind = args.scenario.parse()?;
    let scenario = Scenario {
        n_test: 1,
        ..Scenario::new(kind).with_size(args.n, args.p)
    };
    let data = scenario.generate(args.seed)?.train;
    let config = FitConfig {
        seed: args.seed,
        ..FitConfig::default()
    };

    let mut sink = Sink::open(args.output.as_ref())?;
    sink.record(["method", "n", "p", "support", "lambda"])?;
    for (name, fit) in ESTIMATORS {
        let mut times = Vec::with_capacity(args.repeats);
        let mut model = None;
        for _ in 0..args.repeats {
            let start = Instant::now();
            model = Some(fit(&data, &config)?);
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        let model = model.expect("at least one repeat");
        sink.record([
            name.to_string(),
            data.n().to_string(),
            data.p().to_string(),
            model.support_size().to_string(),
            num(model.lambda_selected),
        ])?;
        eprintln!(
            "{name:<9} median {:.4}s  min {:.4}s  ({} runs)",
            times[times.len() / 2],
            times[0],
            times.len()
        );
    }
    sink.finish()
}
