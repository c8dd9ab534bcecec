//! Seed sweep for the moving challenge; tuning aid only.
use transfer_forest::bench::{run_synth_experiment, Algorithm, ExperimentConfig};
use transfer_forest::forest::{FeatureSubsample, InductionConfig};
use transfer_forest::synth::{Challenge, ChallengeSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let bootstrap = std::env::var("BOOTSTRAP").is_ok();
    let mtry = std::env::var("MTRY").ok().and_then(|v| v.parse().ok());
    let cfg = ExperimentConfig {
        algorithms: vec![Algorithm::Ser, Algorithm::Strut, Algorithm::Mix],
        trials: 100,
        seed,
        induction: InductionConfig {
            bootstrap,
            feature_subsample: mtry.map(FeatureSubsample::Fixed).unwrap_or(FeatureSubsample::Log2),
            ..Default::default()
        },
        ..Default::default()
    };
    for ch in [Challenge::Moving, Challenge::Mixture] {
        let out = run_synth_experiment(&ChallengeSpec::new(ch), &cfg).unwrap();
        let g = |a: Algorithm| {
            let s = out.report.summary(a).unwrap();
            (s.mean * 100.0, s.std_error * 100.0)
        };
        let (ser, ser_se) = g(Algorithm::Ser);
        let (strut, _) = g(Algorithm::Strut);
        let (mix, _) = g(Algorithm::Mix);
        println!(
            "seed {seed} {:<9} ser {ser:5.2}±{ser_se:.2} strut {strut:5.2} mix {mix:5.2}  ordering_ok={}",
            ch.name(),
            if ch == Challenge::Moving { strut < mix && mix < ser } else { mix <= ser.min(strut) + 0.5 }
        );
    }
}
