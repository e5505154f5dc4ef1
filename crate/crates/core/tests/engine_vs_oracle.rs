use num_bigint::BigUint;
use saw_core::flm::{box_counts, enumerate, RunPlan};
use saw_core::modseries::ModulusSet;
use saw_core::oracle::{count_walks, BoxTable};
use saw_core::tm::{sweep, SweepConfig};

fn exact(plan: &RunPlan) -> Vec<BigUint> {
    enumerate(plan).unwrap().series.to_exact().unwrap().coefficients().unwrap()
}

#[test]
fn series_matches_oracle_for_w_max_six() {
    let plan = RunPlan::new(6);
    assert_eq!(exact(&plan), count_walks(13).coefficients().unwrap());
}

#[test]
fn every_small_box_matches_oracle() {
    let table = BoxTable::compute(11);
    let plan = RunPlan { moduli: ModulusSet::new(&[(1 << 61) - 1]).unwrap(), ..RunPlan::new(5) };
    for w in 0..=3 {
        for l in w.max(1)..=5 {
            let engine = box_counts(&plan, w, l).unwrap();
            let oracle: Vec<BigUint> = table.spanning(w, l).into_iter().map(BigUint::from).collect();
            assert_eq!(&engine[..12], &oracle[..], "box {w}x{l}");
        }
    }
}

#[test]
fn pruning_never_changes_the_ledger() {
    let moduli = ModulusSet::new(&[1_000_000_007]).unwrap();
    for w in 1..=4 {
        let mut cfg = SweepConfig::new(w, 2 * 4 + 1 - w, 9);
        let (pruned, _) = sweep(&cfg, &moduli).unwrap();
        cfg.prune = false;
        let (full, _) = sweep(&cfg, &moduli).unwrap();
        // Narrow boxes (fewer columns than rows) belong to another sweep
        // and are pruned away on purpose.
        for (a, b) in pruned.per_column.iter().zip(&full.per_column).skip(w) {
            assert_eq!(a.to_rows(9, 1), b.to_rows(9, 1), "width {w}");
        }
    }
}

#[test]
fn pruned_and_unpruned_series_agree() {
    for w_max in 2..=4 {
        let full = RunPlan { prune: false, ..RunPlan::new(w_max) };
        assert_eq!(exact(&RunPlan::new(w_max)), exact(&full));
    }
}

#[test]
fn generated_states_are_valid() {
    let moduli = ModulusSet::new(&[1_000_000_007]).unwrap();
    for w in 0..=4 {
        let cfg = SweepConfig { check_states: true, prune: false, ..SweepConfig::new(w, 9 - w, 9) };
        sweep(&cfg, &moduli).unwrap();
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let one = enumerate(&RunPlan::new(6)).unwrap().series.to_text();
    for workers in [2, 3, 8] {
        let many = enumerate(&RunPlan { workers, ..RunPlan::new(6) }).unwrap().series.to_text();
        assert_eq!(one, many, "{workers} workers");
    }
}
