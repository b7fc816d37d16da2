use icct::inference::geweke::{run_geweke, GewekeConfig};
use icct::model::config::{ConcentrationPrior, Priors, ProposalSds, StudyConfig};

fn main() {
    let rounds: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(30_000);
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(12345);
    let config = GewekeConfig {
        n_respondents: 3,
        n_items: 3,
        rounds,
        study: StudyConfig {
            truncation_j: 2,
            priors: if std::env::args().nth(3).as_deref() == Some("gamma") {
                Priors {
                    concentration: ConcentrationPrior::Gamma { shape: 2.0, rate: 1.0 },
                    ..Priors::default()
                }
            } else {
                Priors::default()
            },
            proposal_sds: ProposalSds {
                difficulty: 0.5,
                log_competence: 0.5,
                shift: 0.5,
                log_scale: 0.5,
            },
            ..StudyConfig::default()
        },
        seed,
    };
    let t0 = std::time::Instant::now();
    let summary = run_geweke(&config).unwrap();
    for m in &summary.monitors {
        println!(
            "{:16} forward {:+.4}  chain {:+.4}  z {:.2}",
            m.name, m.forward_mean, m.chain_mean, m.z_score
        );
    }
    println!("elapsed {:?}", t0.elapsed());
}
