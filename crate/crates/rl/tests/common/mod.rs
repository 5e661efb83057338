#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttr_core::instance_gen::{generate_one, GenConfig};
use ttr_core::Instance;
use ttr_neural::{NetConfig, PolicyParams, Tensor};

pub fn small_net() -> NetConfig {
    NetConfig { hidden: 16, include_flag: false, batch_norm: true }
}

pub fn random_policy(seed: u64, net: NetConfig) -> PolicyParams {
    PolicyParams::init(net, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Policy whose swap probability is exactly one half everywhere.
pub fn neutral_policy(net: NetConfig) -> PolicyParams {
    let mut p = random_policy(0, net);
    p.get_mut(Tensor::ActorW2).iter_mut().for_each(|x| *x = 0.0);
    p.get_mut(Tensor::ActorB2)[0] = 0.0;
    p
}

pub fn disruption(stations: usize, trains: usize, seed: u64) -> Instance {
    generate_one(&GenConfig::disruption(stations, trains).with_seed(seed)).unwrap()
}

pub fn disturbance(stations: usize, trains: usize, seed: u64) -> Instance {
    generate_one(&GenConfig::disturbance(stations, trains).with_seed(seed)).unwrap()
}
