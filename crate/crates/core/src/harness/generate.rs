use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::{KMedoidInstance, TransportInstance};

/// Uniform points in the unit square.
pub fn gen_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

/// `n` uniform unit-square points with Euclidean distances.
///
/// # Panics
/// If `n < 2` or `k` is not in `[1, n]`.
pub fn gen_kmedoid_instance(n: usize, k: usize, seed: u64) -> KMedoidInstance {
    assert!(n >= 2, "need at least two points");
    KMedoidInstance::from_points(&gen_points(n, seed), k).expect("generated distances are valid")
}

/// Supplies and demands uniform in `[0, max_units]`, demands scaled down
/// (rounding down) when they would exceed total supply; costs uniform in `(0, 1]`.
///
/// # Panics
/// If `m` or `n` is zero.
pub fn gen_transport_instance(m: usize, n: usize, seed: u64, max_units: u64) -> TransportInstance {
    assert!(m > 0 && n > 0, "need at least one centre and one incident point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supplies: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=max_units)).collect();
    let mut demands: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max_units)).collect();
    let costs: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect()).collect();
    let supply: u64 = supplies.iter().sum();
    let demand: u64 = demands.iter().sum();
    if demand > supply {
        for d in &mut demands {
            *d = *d * supply / demand;
        }
    }
    TransportInstance::new(supplies, demands, costs).expect("generated instance is feasible")
}
