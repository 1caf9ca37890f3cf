//! Seeded random instances and configurations, for property checks and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::Configuration;
use crate::model::{Capacity, Dims, GameInstance, Mode};

/// Size ranges for [`random_instance`], inclusive. `modes` counts walking.
#[derive(Debug, Clone, Copy)]
pub struct InstanceRanges {
    pub zones: (usize, usize),
    pub populations: (usize, usize),
    pub modes: (usize, usize),
}

impl Default for InstanceRanges {
    fn default() -> Self {
        InstanceRanges {
            zones: (2, 4),
            populations: (1, 3),
            modes: (2, 4),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random instance with integer demand (about a quarter of the triples
/// empty), costs in `[1, 50)` with walking the dearest on average, and
/// capacities anywhere from zero to the zone's departures. Population
/// sizes equal their demand totals.
pub fn random_instance(seed: u64, ranges: InstanceRanges) -> GameInstance {
    let mut r = rng(seed);
    let dims = Dims::new(
        r.gen_range(ranges.zones.0..=ranges.zones.1),
        r.gen_range(ranges.populations.0..=ranges.populations.1),
        r.gen_range(ranges.modes.0..=ranges.modes.1),
    );
    let mut demand = vec![0.0; dims.n_triples()];
    let mut cost = vec![0.0; dims.n_vars()];
    let mut departures = vec![0.0; dims.zones];
    for i in 0..dims.zones {
        for j in 0..dims.zones {
            for k in 0..dims.populations {
                for m in 0..dims.modes {
                    let base = if m == Mode::WALKING { 10.0 } else { 1.0 };
                    cost[dims.var(i, j, k, m)] = r.gen_range(base..50.0);
                }
                if i != j && r.gen_bool(0.75) {
                    let x = f64::from(r.gen_range(1u32..=100));
                    demand[dims.triple(i, j, k)] = x;
                    departures[i] += x;
                }
            }
        }
    }
    let capacity = (0..dims.zones)
        .flat_map(|i| (0..dims.modes).map(move |m| (i, m)))
        .map(|(i, m)| {
            if m == Mode::WALKING {
                Capacity::Unbounded
            } else {
                Capacity::Seats(r.gen_range(0.0..=departures[i]).round())
            }
        })
        .collect();
    GameInstance::from_costs(dims, cost, demand, capacity).expect("generated instances are valid")
}

/// A random configuration that satisfies every feasibility condition:
/// random splits per triple, with each zone's overflow on a bounded mode
/// moved to walking.
pub fn random_feasible_configuration(inst: &GameInstance, r: &mut impl Rng) -> Configuration {
    let d = inst.dims();
    let mut cfg = Configuration::zeros(d);
    let triples: Vec<_> = inst.active_triples().collect();
    for &(i, j, k) in &triples {
        // Sparse splits are as interesting as dense ones.
        let mut modes: Vec<usize> = (0..d.modes).collect();
        modes.shuffle(r);
        modes.truncate(r.gen_range(1..=d.modes));
        let weights: Vec<f64> = modes.iter().map(|_| r.gen_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for (m, w) in modes.iter().zip(&weights) {
            cfg.set(i, j, k, *m, w / total);
        }
    }
    for i in 0..d.zones {
        for m in 1..d.modes {
            let Capacity::Seats(seats) = inst.capacity(i, m) else {
                continue;
            };
            let load: f64 = triples
                .iter()
                .filter(|t| t.0 == i)
                .map(|&(_, j, k)| inst.demand(i, j, k) * cfg.get(i, j, k, m))
                .sum();
            if load <= seats {
                continue;
            }
            let scale = seats / load;
            for &(_, j, k) in triples.iter().filter(|t| t.0 == i) {
                let x = cfg.get(i, j, k, m);
                let kept = x * scale;
                cfg.set(i, j, k, m, kept);
                let walk = cfg.get(i, j, k, Mode::WALKING);
                cfg.set(i, j, k, Mode::WALKING, walk + (x - kept));
            }
        }
    }
    cfg
}
