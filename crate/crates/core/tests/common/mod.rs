#![allow(dead_code)]

use predprey_core::ModelParameters;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random parameters with an interior equilibrium at a chosen prey level.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParameters {
    let capacity = rng.gen_range(20.0..200.0);
    let r = rng.gen_range(0.2..2.0);
    let mating = rng.gen_range(0.005..0.05);
    let residual = rng.gen_range(1.0..10.0);
    let x_star = rng.gen_range(0.05..0.8) * capacity;
    ModelParameters {
        r,
        capacity,
        omega: r * rng.gen_range(1.1..3.0),
        refuge: rng.gen_range(0.5..5.0),
        refuge_slope: rng.gen_range(0.0..0.5),
        mating,
        omega1: mating * (x_star + residual),
        residual,
        exponent: 2.0,
        tau: rng.gen_range(0.1..10.0),
    }
}

/// Max relative deviation between two scalars with an absolute floor.
pub fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
