//! Synthetic data designs, evaluation metrics and a replicate harness.

mod harness;
mod metrics;
mod scenarios;

pub use harness::{mean_se, run_replicate, run_simulation, score, summarize, Method, MethodSummary, ReplicateRecord};
pub use metrics::{
    evaluate, evaluate_coefficients, jaccard, matching_from_path, matching_lasso, mean_squared_error, stability,
    support_rates, support_stability, Metrics,
};
pub use scenarios::{
    ar1, calibrated_sigma, equicorrelated, Scenario, ScenarioKind, SimData, COUNTER_EXAMPLE_SIGMA,
    TWO_CLASS_INFORMATIVE, TWO_CLASS_SHIFT,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Family;

    #[test]
    fn scenario_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.as_str().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("medium".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn snr_is_calibrated_on_the_training_draw() {
        let sc = Scenario { n_test: 50, ..Scenario::new(ScenarioKind::HighSnr).with_size(200, 50) };
        let d = sc.generate(3).unwrap();
        let signal = d.train.features.dot(&d.true_beta);
        let snr = signal.var(0.0) / (d.sigma * d.sigma);
        assert!((snr - 3.0).abs() < 1e-9);
        assert_eq!(d.true_beta.iter().filter(|b| **b != 0.0).count(), 5);
        assert_eq!(d.test.n(), 50);
    }

    #[test]
    fn realized_snr_on_large_draws() {
        for kind in [ScenarioKind::LowSnr, ScenarioKind::MediumSnr, ScenarioKind::HighSnr, ScenarioKind::External] {
            let sc = Scenario { n_test: 10, n_external: 10, ..Scenario::new(kind).with_size(10_000, 60) };
            let d = sc.generate(11).unwrap();
            let signal = d.train.features.dot(&d.true_beta);
            let snr = signal.var(0.0) / (d.train.response.clone() - &signal).var(0.0);
            assert!((snr / sc.snr - 1.0).abs() < 0.1, "{kind}: {snr}");
        }
        let sc = Scenario { n_test: 10, ..Scenario::new(ScenarioKind::Homecourt).with_size(10_000, 30) };
        let d = sc.generate(11).unwrap();
        let signal = d.train.features.dot(&d.true_beta);
        let snr = signal.var(0.0) / (d.train.response.clone() - &signal).var(0.0);
        assert!((snr - 1.0).abs() < 0.1, "homecourt: {snr}");
    }

    #[test]
    fn homecourt_effective_signs_follow_univariate_slopes() {
        let sc = Scenario { n_test: 5000, ..Scenario::new(ScenarioKind::Homecourt) };
        let d = sc.generate(2).unwrap();
        assert_eq!(d.true_beta.iter().filter(|b| **b != 0.0).count(), 6);
        let x = &d.test.features;
        let lag1 = (0..29).map(|j| x.column(j).dot(&x.column(j + 1)) / 5000.0).sum::<f64>() / 29.0;
        assert!((lag1 - 0.8).abs() < 0.05, "{lag1}");
    }

    #[test]
    fn generation_is_seeded() {
        let sc = Scenario { n_test: 20, ..Scenario::new(ScenarioKind::Homecourt) };
        let a = sc.generate(9).unwrap();
        let b = sc.generate(9).unwrap();
        let c = sc.generate(10).unwrap();
        assert_eq!(a.train.features, b.train.features);
        assert_eq!(a.train.response, b.train.response);
        assert_ne!(a.train.response, c.train.response);
    }

    #[test]
    fn ar1_correlation_decays() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = ar1(&mut rng, 20_000, 3, 0.8);
        let c = |a: usize, b: usize| x.column(a).dot(&x.column(b)) / 20_000.0;
        assert!((c(0, 1) - 0.8).abs() < 0.02);
        assert!((c(0, 2) - 0.64).abs() < 0.02);
        assert!((c(2, 2) - 1.0).abs() < 0.03);
        let e = equicorrelated(&mut rng, 20_000, 3, 0.5);
        let r = e.column(0).dot(&e.column(2)) / 20_000.0;
        assert!((r - 0.5).abs() < 0.03);
    }

    #[test]
    fn two_class_is_balanced_and_shifted() {
        let sc = Scenario { n_test: 20_000, ..Scenario::new(ScenarioKind::TwoClass).with_size(40, 30) };
        let d = sc.generate(2).unwrap();
        assert_eq!(d.train.family, Family::Binomial);
        assert_eq!(d.train.response.sum(), 20.0);
        assert_eq!(d.true_beta.iter().filter(|b| **b != 0.0).count(), 20);
        let t = &d.test;
        for j in [0, 19, 20, 29] {
            let (mut s1, mut s0) = (0.0, 0.0);
            for i in 0..t.n() {
                if t.response[i] == 1.0 {
                    s1 += t.features[[i, j]];
                } else {
                    s0 += t.features[[i, j]];
                }
            }
            let shift = (s1 - s0) / 10_000.0;
            let expect = if j < 20 { 0.5 } else { 0.0 };
            assert!((shift - expect).abs() < 0.05, "j={j} shift={shift}");
        }
    }

    #[test]
    fn counter_example_structure() {
        let sc = Scenario { n_test: 10, ..Scenario::new(ScenarioKind::CounterExample) };
        let d = sc.generate(4).unwrap();
        assert_eq!(d.train.p(), 20);
        assert_eq!(d.true_beta[0], 1.0);
        assert_eq!(d.true_beta[1], -0.5);
        assert_eq!(d.sigma, COUNTER_EXAMPLE_SIGMA);
        let big = Scenario { n_test: 20_000, ..sc }.generate(4).unwrap();
        let v = big.test.features.column(1).var(1.0);
        assert!((v - 2.0).abs() < 0.1, "{v}");
    }

    #[test]
    fn external_scenario_has_extra_rows() {
        let sc = Scenario { n_test: 10, ..Scenario::new(ScenarioKind::External).with_size(50, 120) };
        let d = sc.generate(1).unwrap();
        assert_eq!(d.external.as_ref().unwrap().n(), 600);
        assert_eq!(d.true_beta.iter().filter(|b| **b != 0.0).count(), 50);
        assert!(d.true_beta.iter().all(|b| *b == 0.0 || (0.5..2.0).contains(b)));
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        assert!(Scenario { snr: 0.0, ..Scenario::new(ScenarioKind::LowSnr) }.generate(1).is_err());
        assert!(Scenario { rho: 1.0, ..Scenario::new(ScenarioKind::LowSnr) }.generate(1).is_err());
        assert!(Scenario::new(ScenarioKind::LowSnr).with_size(2, 5).generate(1).is_err());
    }
}
