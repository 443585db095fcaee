#![allow(dead_code)]

pub mod stub;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucsearch::{CommitmentMatrix, UcInstance, UnitSpec};

/// Random instance with integral parameters; initial states are random and
/// may start inside a minimum-time lock.
pub fn random_instance(seed: u64, units: usize, periods: usize) -> UcInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<UnitSpec> = (0..units)
        .map(|id| {
            let p_max = rng.random_range(20..=120) as f64;
            let p_min = (p_max * rng.random_range(0.1..0.6)).round();
            let min_up = rng.random_range(1..=3);
            let min_down = rng.random_range(1..=3);
            UnitSpec {
                id,
                p_min,
                p_max,
                cost_rate: rng.random_range(1..=50) as f64,
                min_up,
                min_down,
                initial_state: rng.random_bool(0.5),
                initial_duration: Some(rng.random_range(1..=4)),
            }
        })
        .collect();
    let cap: f64 = specs.iter().map(|u| u.p_max).sum();
    let demand = (0..periods)
        .map(|_| (cap * rng.random_range(0.0..0.95)).round())
        .collect();
    UcInstance::new(specs, demand).unwrap()
}

pub fn random_commitment(seed: u64, units: usize, periods: usize) -> CommitmentMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let bits = (0..units * periods).map(|_| rng.random_bool(0.5)).collect();
    CommitmentMatrix::from_flat(units, periods, bits)
}
