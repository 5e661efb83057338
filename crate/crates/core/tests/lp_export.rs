mod common;

use common::lp_text;
use ttr_core::instance_gen::{generate_one, GenConfig};
use ttr_core::lp::export_lp;
use ttr_core::oracle::{oracle_search, DEFAULT_GUARD};
use ttr_core::orders::{solve_with_rule, Rule};
use ttr_core::{F64Objective, Instance, LpExportConfig, Profile, TimetableConfig};

fn uniform(stations: usize, trains: usize) -> Instance {
    let mut pa = vec![vec![0; stations]; trains];
    let mut pd = vec![vec![0; stations]; trains];
    for k in 0..trains {
        let mut t = 10 + 8 * k as i64;
        for i in 0..stations {
            pa[k][i] = t;
            pd[k][i] = t + 2;
            t += 2 + 12;
        }
    }
    Instance {
        num_stations: stations,
        num_trains: trains,
        planned_arrival: pa,
        planned_departure: pd,
        min_run: vec![vec![10; stations - 1]; trains],
        min_dwell: vec![2; stations],
        headway: 5,
        track_capacity: vec![3; stations],
        occurred_delay: vec![vec![0; stations]; trains],
    }
}

fn lp_optimum(inst: &Instance, profile: Profile) -> f64 {
    let mut buf = Vec::new();
    export_lp(inst, &F64Objective::standard(), &LpExportConfig::for_instance(inst), profile, &mut buf).unwrap();
    let model = lp_text::parse(std::str::from_utf8(&buf).unwrap());
    lp_text::solve(&model).expect("solver returns an optimum")
}

fn oracle(inst: &Instance) -> f64 {
    oracle_search(inst, TimetableConfig::default(), &F64Objective::standard(), DEFAULT_GUARD).unwrap().objective
}

#[test]
fn single_punctual_train_has_zero_optimum() {
    let inst = uniform(2, 1);
    assert!(lp_optimum(&inst, Profile::StrictMilp).abs() < 1e-6);
    assert!(lp_optimum(&inst, Profile::Operational).abs() < 1e-6);
}

#[test]
fn delayed_pair_matches_or_undercuts_the_oracle() {
    let mut inst = uniform(3, 2);
    inst.occurred_delay[0][0] = 10;
    let lp = lp_optimum(&inst, Profile::Operational);
    let best = oracle(&inst);
    assert!(lp <= best + 1e-6, "lp {lp} oracle {best}");
    let fcfs = solve_with_rule(&inst, Rule::Fcfs, TimetableConfig::default()).unwrap();
    let j = ttr_core::objective::objective(&fcfs.solution, &inst, &F64Objective::standard()).unwrap();
    assert!(best <= j + 1e-9);
}

#[test]
fn emitted_column_and_row_counts() {
    let inst = uniform(3, 3);
    let mut buf = Vec::new();
    let stats =
        export_lp(&inst, &F64Objective::standard(), &LpExportConfig::for_instance(&inst), Profile::Operational, &mut buf)
            .unwrap();
    let model = lp_text::parse(std::str::from_utf8(&buf).unwrap());
    let (k, i, p) = (3, 3, 3);
    let expected = k * i * 2 + k * i + k * (k - 1) / 2 * i + k * (i - 1) * p;
    assert_eq!(model.names.len(), expected);
    assert_eq!(stats.variables(), expected);
    assert_eq!(model.num_binaries(), k * (k - 1) / 2 * i + k * (i - 1) * p);
    assert_eq!(model.num_rows(), stats.constraints);
}

#[test]
fn generated_instances_lp_never_exceeds_oracle() {
    for seed in 0..8 {
        let inst = generate_one(&GenConfig::disturbance(3, 3).with_seed(500 + seed)).unwrap();
        let lp = lp_optimum(&inst, Profile::Operational);
        let best = oracle(&inst);
        assert!(lp <= best + 1e-6, "seed {seed}: lp {lp} oracle {best}");
    }
}

