use icct::recovery::{one_culture_benchmark, run_recovery, three_culture_benchmark};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "three".into());
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let config = match which.as_str() {
        "one" => one_culture_benchmark(seed),
        _ => three_culture_benchmark(seed),
    };
    let t0 = std::time::Instant::now();
    let score = run_recovery(&config, 100).unwrap();
    println!(
        "{which} seed {seed}: occupied_modal={} expected={} hit={} ari={:.4} rmse={:.4} ({:?})",
        score.occupied_modal,
        score.expected_cultures,
        score.culture_count_hit,
        score.ari,
        score.consensus_rmse,
        t0.elapsed()
    );
}
