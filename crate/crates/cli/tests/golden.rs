use std::path::Path;

use fracbern_cli::{run_plan_with_workers, SweepPlan};

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/sweep.json");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/sweep.csv");

#[test]
fn golden_sweep_is_byte_identical_across_runs_and_worker_counts() {
    let plan = SweepPlan::load(Path::new(CONFIG)).unwrap();
    let golden = std::fs::read_to_string(GOLDEN).unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 4, 4] {
        let table = run_plan_with_workers(&plan, workers).unwrap();
        assert_eq!(table.error_rows(), 0);
        outputs.push(table.to_csv_string());
    }
    for (i, out) in outputs.iter().enumerate() {
        assert!(out == &golden, "run {i} differs from the golden file");
    }
}
