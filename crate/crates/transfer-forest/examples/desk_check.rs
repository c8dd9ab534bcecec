//! Quick desk-scale benchmark sweep used while tuning; not part of the
//! test suite. Run with `cargo run --release --example desk_check`.

use transfer_forest::bench::{run_synth_experiment, Algorithm, ExperimentConfig};
use transfer_forest::synth::{Challenge, ChallengeSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let challenges: Vec<Challenge> = if args.len() > 2 {
        args[2..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        Challenge::ALL.to_vec()
    };
    let cfg = ExperimentConfig {
        algorithms: vec![
            Algorithm::SrcOnly,
            Algorithm::TgtOnly,
            Algorithm::Ser,
            Algorithm::Strut,
            Algorithm::Mix,
        ],
        trials,
        seed: 7,
        diagnostics: false,
        ..Default::default()
    };
    println!(
        "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "challenge", "src_only", "tgt_only", "ser", "strut", "mix"
    );
    for ch in challenges {
        let spec = ChallengeSpec::new(ch);
        let start = std::time::Instant::now();
        let out = run_synth_experiment(&spec, &cfg).unwrap();
        let m = |a: Algorithm| out.report.summary(a).unwrap().mean * 100.0;
        println!(
            "{:<14} {:>9.1} {:>9.1} {:>9.1} {:>9.1} {:>9.1}   ({:.1}s)",
            ch.name(),
            m(Algorithm::SrcOnly),
            m(Algorithm::TgtOnly),
            m(Algorithm::Ser),
            m(Algorithm::Strut),
            m(Algorithm::Mix),
            start.elapsed().as_secs_f64(),
        );
    }
}
