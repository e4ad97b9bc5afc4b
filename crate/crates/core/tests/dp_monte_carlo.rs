use anonybench_core::dp::{dp_count, laplace_noise, BudgetAccountant, DpEngine};
use anonybench_core::{AttributeSchema, Dataset, Error, Kind, Role, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const SAMPLES: usize = 100_000;

fn table() -> Dataset {
    let rows = (0..50).map(|i| vec![Value::text(if i % 5 == 0 { "flu" } else { "cold" })]).collect();
    Dataset::new(vec![AttributeSchema::new("dx", Role::Sensitive, Kind::Categorical)], rows).unwrap()
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn laplace_cdf(x: f64, b: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}

#[test]
fn noise_moments_and_shape() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let mut xs: Vec<f64> = (0..SAMPLES).map(|_| laplace_noise(&mut rng, 1.0)).collect();
    let (mean, var) = moments(&xs);
    assert!(mean.abs() <= 0.05, "mean {mean}");
    assert!((var - 2.0).abs() <= 0.2, "variance {var}");

    // Kolmogorov-Smirnov against Laplace(0, 1) at the 1% level
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = laplace_cdf(x, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn count_answers_are_unbiased() {
    let d = table();
    let mut engine = DpEngine::new(SAMPLES as f64, 9).unwrap();
    let pred = [("dx".to_string(), "flu".to_string())];
    let errs: Vec<f64> = (0..SAMPLES).map(|_| engine.count(&d, &pred, 1.0).unwrap().value - 10.0).collect();
    let (mean, var) = moments(&errs);
    assert!(mean.abs() <= 0.05, "mean {mean}");
    assert!((var - 2.0).abs() <= 0.2, "variance {var}");
    assert!(engine.accountant().remaining().abs() <= 1e-6);
}

#[test]
fn budget_refuses_the_overdraft() {
    let d = table();
    let mut acc = BudgetAccountant::new(1.0).unwrap();
    dp_count(&d, &[], 0.3, &mut acc, 1).unwrap();
    dp_count(&d, &[], 0.3, &mut acc, 2).unwrap();
    let before = acc.clone();
    assert!(matches!(dp_count(&d, &[], 0.5, &mut acc, 3), Err(Error::BudgetExhausted { .. })));
    assert_eq!(acc.ledger(), before.ledger());
    assert_eq!(acc.spent(), before.spent());
    dp_count(&d, &[], 0.4, &mut acc, 4).unwrap();
    assert!(acc.remaining().abs() <= 1e-12);
}

#[test]
fn ledger_is_deterministic_under_seed() {
    let d = table();
    let run = |seed| {
        let mut e = DpEngine::new(1.0, seed).unwrap();
        let a = e.count(&d, &[("dx".into(), "flu".into())], 0.25).unwrap();
        let h = e.histogram(&d, "dx", 0.5).unwrap();
        let refused = e.count(&d, &[], 0.5).is_err();
        (a, h, refused, e.accountant().ledger().to_vec())
    };
    assert_eq!(run(5), run(5));
    let (a, _, refused, ledger) = run(5);
    assert!(refused);
    assert_eq!(ledger.len(), 2);
    assert_eq!(ledger.iter().map(|l| l.timestamp).collect::<Vec<_>>(), vec![1, 2]);
    assert_ne!(run(6).0.value, a.value);
}
