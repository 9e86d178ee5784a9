use unilasso::data::{Dataset, FitConfig};
use unilasso::io::{read_dataset, ResponseSelector};
use unilasso::simulate::{Scenario, ScenarioKind};
use unilasso::verify::run_checks;
use unilasso::{Error, Result};

use crate::args::{FamilyArg, VerifyArgs};
use crate::output::{num, Sink};

fn parse_shape(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidConfig(format!("--random expects NxP, got '{text}'"));
    let (n, p) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
}

fn dataset(args: &VerifyArgs) -> Result<Dataset<f64>> {
    let family = match args.family {
        FamilyArg::Gaussian => unilasso::Family::Gaussian,
        FamilyArg::Binomial => unilasso::Family::Binomial,
        FamilyArg::Multiclass => {
            return Err(Error::InvalidConfig("verify needs a gaussian or binomial response".into()));
        }
    };
    if let Some(shape) = &args.random {
        let (n, p) = parse_shape(shape)?;
        let base = match family {
            unilasso::Family::Gaussian => Scenario {
                sparsity: 0.4,
                ..Scenario::new(ScenarioKind::MediumSnr)
            },
            unilasso::Family::Binomial => Scenario::new(ScenarioKind::TwoClass),
        };
        let sc = Scenario { n_test: 1, ..base.with_size(n, p) };
        return Ok(sc.generate(args.seed)?.train);
    }
    let input = args.input.as_ref().expect("clap requires --input without --random");
    let selector = match (&args.response, args.response_index) {
        (Some(name), _) => ResponseSelector::Name(name.clone()),
        (None, Some(k)) => ResponseSelector::Index(k),
        (None, None) => {
            return Err(Error::InvalidConfig("--input needs --response or --response-index".into()));
        }
    };
    read_dataset(input, &selector, family)
}

pub fn run(args: &VerifyArgs) -> Result<()> {
    let config = FitConfig {
        seed: args.seed,
        ..FitConfig::default()
    };
    let solver_config = FitConfig {
        tol: args.solver_tol.unwrap_or(config.tol),
        ..config.clone()
    };
    solver_config.validate()?;
    let data = dataset(args)?;
    let checks = run_checks(&data, &config, &solver_config)?;

    let mut sink = Sink::open(args.output.as_ref())?;
    sink.line(&format!("# n={} p={} family={}", data.n(), data.p(), data.family))?;
    sink.record(["check", "discrepancy", "tolerance", "status"])?;
    for c in &checks {
        let status = if c.passed() { "pass" } else { "FAIL" };
        sink.record([c.name.to_string(), num(c.discrepancy), num(c.tolerance), status.into()])?;
    }
    sink.finish()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Oracle(format!("checks failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!(parse_shape("40x5").unwrap(), (40, 5));
        assert_eq!(parse_shape("60X3").unwrap(), (60, 3));
        assert!(parse_shape("40").is_err());
        assert!(parse_shape("ax5").is_err());
    }
}
