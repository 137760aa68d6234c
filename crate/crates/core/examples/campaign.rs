//! Simulates the default campaign and prints cross-validated results for
//! every classifier in both modes.

use std::time::Instant;

use sensorscene_core::dataset::make_folds;
use sensorscene_core::eval::{cross_validate, ClassifierKind, ClassifierSpec, MetricReport, Mode};
use sensorscene_core::rng::rng_from_seed;
use sensorscene_core::sim::{simulate_campaign, SimConfig};

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(42, |s| s.parse().expect("seed"));
    let start = Instant::now();
    let config = match std::env::args().nth(2) {
        Some(path) => SimConfig::from_file(std::path::Path::new(&path)).expect("config"),
        None => SimConfig::default(),
    };
    let data = simulate_campaign(seed, &config).expect("campaign");
    println!("simulated {} observations in {:.2?}", data.n_observations(), start.elapsed());
    let plan = make_folds(&data, 10, &mut rng_from_seed(seed)).expect("folds");
    for mode in [Mode::ThreeClass, Mode::TwoClass] {
        println!("{}", MetricReport::table_header(mode));
        for kind in ClassifierKind::ALL {
            if std::env::var("KINDS").is_ok_and(|k| !k.split(',').any(|n| n == kind.name())) {
                continue;
            }
            let t = Instant::now();
            let out = cross_validate(&data, &ClassifierSpec::default_for(kind), &plan, mode, seed).expect("cv");
            println!("{}    ({:.2?}, warnings {})", out.report.table_row(), t.elapsed(), out.report.warnings);
            if let Some(imp) = &out.report.importance {
                if mode == Mode::ThreeClass {
                    let cells: Vec<String> =
                        imp.variables.iter().zip(&imp.importance).map(|(v, x)| format!("{v}={x:.3}")).collect();
                    println!("    {}", cells.join(" "));
                }
            }
        }
    }
}
