use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttr_core::instance_gen::{bundled_seed, generate, generate_batch, generate_one, GenConfig, GenError};
use ttr_core::{validate, Profile, Solution};

#[test]
fn generated_plans_validate_with_zero_delays() {
    let sizes = [(5, 5), (4, 3), (8, 6), (10, 10), (20, 30)];
    for n in 0..1000u64 {
        let (stations, trains) = sizes[(n % sizes.len() as u64) as usize];
        let cfg = if n % 2 == 0 { GenConfig::disturbance(stations, trains) } else { GenConfig::disruption(stations, trains) };
        let mut inst = generate_one(&cfg.with_seed(n)).unwrap();
        inst.occurred_delay = vec![vec![0; stations]; trains];
        let v = validate(&Solution::planned(&inst), &inst, Profile::StrictMilp).unwrap();
        assert!(v.is_empty(), "seed {n}: {v:?}");
    }
}

#[test]
fn origin_delays_are_uniform_on_the_disturbance_range() {
    let cfg = GenConfig { count: 200, ..GenConfig::disturbance(3, 5) };
    let batch = generate_batch(&cfg).unwrap();
    let delays: Vec<i64> = batch.iter().flat_map(|inst| inst.occurred_delay.iter().map(|row| row[0])).collect();
    assert_eq!(delays.len(), 1000);
    assert!(delays.iter().all(|&d| (0..=60).contains(&d)));
    let mean = delays.iter().sum::<i64>() as f64 / delays.len() as f64;
    assert!((mean - 30.0).abs() <= 3.0, "mean {mean}");
    for inst in &batch {
        assert!(inst.occurred_delay.iter().all(|row| row[1..].iter().all(|&e| e == 0)));
    }
}

#[test]
fn run_times_stay_within_the_type_range() {
    let seed_tt = bundled_seed(6, 6);
    let cfg = GenConfig::disturbance(6, 6);
    for s in 0..50 {
        let inst = generate(&seed_tt, &cfg, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        for k in 0..6 {
            for i in 0..5 {
                let full = seed_tt.min_run[k][i] as f64;
                let rt = inst.min_run[k][i] as f64;
                assert!(rt <= full && rt >= (0.3 * full).round() && rt >= 1.0);
            }
        }
    }
}

#[test]
fn trains_leave_the_origin_in_index_order() {
    for s in 0..200 {
        let inst = generate_one(&GenConfig::disruption(5, 5).with_seed(s)).unwrap();
        for k in 1..5 {
            assert!(inst.planned_departure[k][0] > inst.planned_departure[k - 1][0], "seed {s}");
        }
    }
}

#[test]
fn generation_is_reproducible_per_seed() {
    let cfg = GenConfig { count: 5, ..GenConfig::disruption(5, 5).with_seed(77) };
    assert_eq!(generate_batch(&cfg).unwrap(), generate_batch(&cfg).unwrap());
    assert_eq!(generate_batch(&cfg).unwrap()[2], generate_one(&cfg.with_seed(79)).unwrap());
}

#[test]
fn degenerate_requests_are_rejected() {
    assert!(matches!(generate_one(&GenConfig::disturbance(0, 3)), Err(GenError::Degenerate)));
    assert!(matches!(generate_one(&GenConfig { tau3: 0.0, ..GenConfig::disturbance(3, 3) }), Err(GenError::Config(_))));
    assert!(matches!(generate_one(&GenConfig { tau1: -1.0, ..GenConfig::disturbance(3, 3) }), Err(GenError::Config(_))));
}
