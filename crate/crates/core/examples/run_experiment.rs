//! Runs an experiment config through the same path as `hcmrh run` and exports
//! the problem it used.

use hcmrh::cli::{export_problem, load_exported, read_csv, run_config};
use hcmrh::problems::ProblemSpec;

const CONFIG: &str = r#"
output_dir = "out"
max_iters = 20

[problem]
name = "heat"
n = 64
nl = 1e-2
seed = 9

[outputs]
singvals = true

[[solvers]]
name = "hcmrh"

[[solvers]]
name = "gmres"

[[solvers]]
name = "chebyshev"
interval = "full"
"#;

fn main() -> hcmrh::Result<()> {
    let dir = std::env::temp_dir().join("hcmrh-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("heat.toml");
    std::fs::write(&config, CONFIG)?;
    for s in run_config(&config)? {
        println!(
            "{:<10} {:>3} iterations  stop {:<14} rel_error {:.4}",
            s.label, s.iterations, s.stop_reason, s.relative_error
        );
    }
    let (header, rows) = read_csv(&dir.join("out").join("history_hcmrh.csv"))?;
    println!("history_hcmrh.csv: {} rows, columns {}", rows.len(), header.join(","));

    let spec = ProblemSpec::parse("heat:n=64,nl=1e-2,seed=9")?;
    export_problem(&spec, &dir.join("export"))?;
    let exported = load_exported(&dir.join("export"))?;
    println!(
        "exported {} with A {}x{}",
        exported.spec,
        exported.a.rows(),
        exported.a.cols()
    );
    println!("files under {}", dir.display());
    Ok(())
}
