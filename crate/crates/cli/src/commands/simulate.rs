use unilasso::data::FitConfig;
use unilasso::simulate::{run_simulation, summarize, Method, Scenario, ScenarioKind};
use unilasso::{Error, Result};

use crate::args::SimulateArgs;
use crate::output::{num, Sink};

pub fn scenario_from(args: &SimulateArgs) -> Result<Scenario> {
    let kind: ScenarioKind = args.scenario.parse()?;
    let base = Scenario::new(kind);
    let sc = Scenario {
        n: args.n.unwrap_or(base.n),
        p: args.p.unwrap_or(base.p),
        n_test: args.n_test.unwrap_or(base.n_test),
        snr: args.snr.unwrap_or(base.snr),
        rho: args.rho.unwrap_or(base.rho),
        sparsity: args.sparsity.unwrap_or(base.sparsity),
        n_external: args.n_external.unwrap_or(base.n_external),
        ..base
    };
    sc.validate()?;
    Ok(sc)
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig("--methods lists no method".into()));
    }
    Ok(methods)
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let scenario = scenario_from(args)?;
    let methods = parse_methods(&args.methods)?;
    if args.replicates == 0 {
        return Err(Error::InvalidConfig("--replicates must be positive".into()));
    }
    let config = FitConfig {
        n_folds: args.folds,
        n_lambda: args.n_lambda,
        ..FitConfig::default()
    };
    config.validate()?;
    let records = run_simulation(&scenario, args.seed, args.replicates, &methods, &config)?;

    let mut sink = Sink::create(&args.output)?;
    sink.record(["seed", "method", "mse", "support", "tpr", "fpr"])?;
    for r in &records {
        sink.record([
            r.seed.to_string(),
            r.method.to_string(),
            num(r.metrics.error),
            r.metrics.support.to_string(),
            num(r.metrics.tpr),
            num(r.metrics.fpr),
        ])?;
    }
    sink.finish()?;

    let mut out = Sink::open(args.summary.as_ref())?;
    out.record([
        "method",
        "replicates",
        "mse_mean",
        "mse_se",
        "support_mean",
        "support_se",
        "tpr_mean",
        "fpr_mean",
        "mse_ratio",
        "sign_violations",
    ])?;
    for s in summarize(&records) {
        let violations: usize = records.iter().filter(|r| r.method == s.method).map(|r| r.sign_violations).sum();
        out.record([
            s.method.to_string(),
            s.replicates.to_string(),
            num(s.mean_error),
            num(s.se_error),
            num(s.mean_support),
            num(s.se_support),
            num(s.mean_tpr),
            num(s.mean_fpr),
            s.error_ratio.map_or_else(String::new, num),
            violations.to_string(),
        ])?;
    }
    out.finish()
}
