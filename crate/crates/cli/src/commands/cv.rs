use unilasso::{Error, Result};

use super::{fit_variant, load};
use crate::args::{CvArgs, FamilyArg};
use crate::output::{num, write_text, Sink};

pub fn run(args: &CvArgs) -> Result<()> {
    args.variant.check_family(args.data.family)?;
    if args.data.family == FamilyArg::Multiclass {
        return Err(Error::InvalidConfig("cv needs a gaussian or binomial response".into()));
    }
    let config = args.variant.apply(args.config.config()?);
    let data = load(&args.data)?;
    let fit = fit_variant(&data, &args.variant, &config)?;
    let cv = fit.cv.as_ref().expect("cross-validated fit");

    let mut sink = Sink::create(&args.output)?;
    let folds: Vec<String> = cv.fold_assignment.iter().map(|f| f.to_string()).collect();
    sink.line(&format!("# seed={} n_folds={} folds={}", config.seed, cv.n_folds(), folds.join(" ")))?;
    let binomial = cv.misclass_mean.is_some();
    let mut header = vec!["lambda", "cv_mean", "cv_se", "n_active"];
    if binomial {
        header.extend(["misclass_mean", "misclass_se"]);
    }
    sink.record(&header)?;
    for k in 0..cv.lambdas.len() {
        let mut row = vec![
            num(cv.lambdas[k]),
            num(cv.cv_mean[k]),
            num(cv.cv_se[k]),
            fit.path.n_active[k].to_string(),
        ];
        if let (Some(m), Some(s)) = (&cv.misclass_mean, &cv.misclass_se) {
            row.push(num(m[k]));
            row.push(num(s[k]));
        }
        sink.record(&row)?;
    }
    sink.finish()?;

    if let Some(path) = &args.model {
        write_text(path, &fit.model.to_json()?)?;
    }
    let mut out = Sink::stdout();
    out.line(&format!(
        "lambda_min: {} (index {})  lambda_1se: {} (index {})  selected: {}",
        num(cv.lambda_min()),
        cv.idx_min,
        num(cv.lambda_1se()),
        cv.idx_1se,
        num(fit.model.lambda_selected)
    ))?;
    out.finish()
}
