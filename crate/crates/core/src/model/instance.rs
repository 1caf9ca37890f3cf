//! Fully resolved game: cost tensor, demand, capacities and travel times.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::city::{CityModel, Mode};
use super::controls::ScenarioControls;
use super::validation::{validate_city, validate_controls};
use crate::error::Error;
use crate::travel_cost::{compute_distance, compute_travel_time, resolve_fare, trip_cost, DistanceMatrix};

/// Tensor dimensions. `modes` counts walking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub zones: usize,
    pub populations: usize,
    pub modes: usize,
}

impl Dims {
    pub fn new(zones: usize, populations: usize, modes: usize) -> Self {
        Dims {
            zones,
            populations,
            modes,
        }
    }

    /// Flat index of the `(origin, destination, population)` triple.
    #[inline]
    pub fn triple(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.zones + j) * self.populations + k
    }

    /// Flat index of decision variable `x[i, j, k, m]`.
    #[inline]
    pub fn var(&self, i: usize, j: usize, k: usize, m: usize) -> usize {
        self.triple(i, j, k) * self.modes + m
    }

    #[inline]
    pub fn od_mode(&self, i: usize, j: usize, m: usize) -> usize {
        (i * self.zones + j) * self.modes + m
    }

    #[inline]
    pub fn zone_mode(&self, i: usize, m: usize) -> usize {
        i * self.modes + m
    }

    pub fn n_triples(&self) -> usize {
        self.zones * self.zones * self.populations
    }

    /// `N^2 M K`, the size of the full decision tensor.
    pub fn n_vars(&self) -> usize {
        self.n_triples() * self.modes
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} zones x {} populations x {} modes",
            self.zones, self.populations, self.modes
        )
    }
}

/// Seats departing a zone by one mode per window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Seats(f64),
    /// Walking: never saturates.
    Unbounded,
}

impl Capacity {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Capacity::Unbounded)
    }

    pub fn seats(&self) -> Option<f64> {
        match *self {
            Capacity::Seats(s) => Some(s),
            Capacity::Unbounded => None,
        }
    }

    /// True when `load` uses the capacity up to `tol` (relative to the
    /// capacity, with an absolute floor of `tol`).
    pub fn is_saturated(&self, load: f64, tol: f64) -> bool {
        match *self {
            Capacity::Seats(c) => load >= c - tol * c.abs().max(1.0),
            Capacity::Unbounded => false,
        }
    }

    /// Remaining seats, or `None` when unbounded.
    pub fn slack(&self, load: f64) -> Option<f64> {
        self.seats().map(|c| c - load)
    }
}

impl Serialize for Capacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Capacity::Seats(c) => s.serialize_f64(c),
            Capacity::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// Raw tensors for [`GameInstance::new`]. Layouts follow [`Dims`].
#[derive(Debug, Clone)]
pub struct InstanceParts {
    pub dims: Dims,
    /// `c[i, j, k, m]`, indexed by [`Dims::var`].
    pub cost: Vec<f64>,
    /// `d[i, j, k]`, indexed by [`Dims::triple`].
    pub demand: Vec<f64>,
    /// `C[i, m]`, indexed by [`Dims::zone_mode`].
    pub capacity: Vec<Capacity>,
    /// `t[i, j, m]` in hours, indexed by [`Dims::od_mode`].
    pub travel_time: Vec<f64>,
    /// `p[i, j, m]` in USD, indexed by [`Dims::od_mode`].
    pub fare: Vec<f64>,
    pub distance: DistanceMatrix,
    /// `P[k]`.
    pub population_size: Vec<f64>,
    pub window_hours: f64,
}

/// A validated, immutable game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    dims: Dims,
    cost: Vec<f64>,
    demand: Vec<f64>,
    capacity: Vec<Capacity>,
    travel_time: Vec<f64>,
    fare: Vec<f64>,
    distance: DistanceMatrix,
    population_size: Vec<f64>,
    window_hours: f64,
}

impl GameInstance {
    /// Checks every instance invariant and takes ownership of the tensors.
    pub fn new(p: InstanceParts) -> Result<Self, Error> {
        let d = p.dims;
        let bad = |msg: String| Err(Error::Instance(msg));
        if d.modes == 0 {
            return bad("an instance needs at least the walking mode".into());
        }
        let checks = [
            ("cost", p.cost.len(), d.n_vars()),
            ("demand", p.demand.len(), d.n_triples()),
            ("capacity", p.capacity.len(), d.zones * d.modes),
            ("travel_time", p.travel_time.len(), d.zones * d.zones * d.modes),
            ("fare", p.fare.len(), d.zones * d.zones * d.modes),
            ("population_size", p.population_size.len(), d.populations),
            ("distance", p.distance.len(), d.zones),
        ];
        for (name, got, want) in checks {
            if got != want {
                return bad(format!("{name} has {got} entries, expected {want} for {d}"));
            }
        }
        if let Some(c) = p.cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return bad(format!("cost entries must be finite and >= 0, found {c}"));
        }
        if let Some(x) = p.demand.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return bad(format!("demand entries must be finite and >= 0, found {x}"));
        }
        for i in 0..d.zones {
            for k in 0..d.populations {
                if p.demand[d.triple(i, i, k)] != 0.0 {
                    return bad(format!("intra-zone demand at zone {i}, population {k}"));
                }
            }
            for m in 0..d.modes {
                if p.travel_time[d.od_mode(i, i, m)] != 0.0 {
                    return bad(format!("t[{i},{i},{m}] must be 0"));
                }
                match p.capacity[d.zone_mode(i, m)] {
                    Capacity::Unbounded if m != Mode::WALKING => {
                        return bad(format!("only walking may be unbounded (zone {i}, mode {m})"))
                    }
                    Capacity::Seats(_) if m == Mode::WALKING => {
                        return bad(format!("walking capacity in zone {i} must be unbounded"))
                    }
                    Capacity::Seats(s) if !(s.is_finite() && s >= 0.0) => {
                        return bad(format!("capacity of zone {i}, mode {m} is invalid: {s}"))
                    }
                    _ => {}
                }
            }
        }
        if p.travel_time.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("travel times must be finite and >= 0".into());
        }
        if p.population_size.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("population sizes must be finite and >= 0".into());
        }
        if !(p.window_hours.is_finite() && p.window_hours > 0.0) {
            return bad(format!("window_hours must be > 0, got {}", p.window_hours));
        }
        Ok(GameInstance {
            dims: d,
            cost: p.cost,
            demand: p.demand,
            capacity: p.capacity,
            travel_time: p.travel_time,
            fare: p.fare,
            distance: p.distance,
            population_size: p.population_size,
            window_hours: p.window_hours,
        })
    }

    /// Instance from a cost tensor alone: zero travel times and fares,
    /// population sizes equal to their demand totals.
    pub fn from_costs(
        dims: Dims,
        cost: Vec<f64>,
        demand: Vec<f64>,
        capacity: Vec<Capacity>,
    ) -> Result<Self, Error> {
        let mut population_size = vec![0.0; dims.populations];
        if demand.len() == dims.n_triples() {
            for i in 0..dims.zones {
                for j in 0..dims.zones {
                    for (k, size) in population_size.iter_mut().enumerate() {
                        *size += demand[dims.triple(i, j, k)];
                    }
                }
            }
        }
        let odm = dims.zones * dims.zones * dims.modes;
        Self::new(InstanceParts {
            dims,
            cost,
            demand,
            capacity,
            travel_time: vec![0.0; odm],
            fare: vec![0.0; odm],
            distance: DistanceMatrix::zeros(dims.zones),
            population_size,
            window_hours: 1.0,
        })
    }

    /// Copy of this instance with different population sizes. Used to pose
    /// deliberately inconsistent problems.
    pub fn with_population_sizes(&self, sizes: Vec<f64>) -> Result<Self, Error> {
        let mut parts = self.to_parts();
        parts.population_size = sizes;
        Self::new(parts)
    }

    pub fn to_parts(&self) -> InstanceParts {
        InstanceParts {
            dims: self.dims,
            cost: self.cost.clone(),
            demand: self.demand.clone(),
            capacity: self.capacity.clone(),
            travel_time: self.travel_time.clone(),
            fare: self.fare.clone(),
            distance: self.distance.clone(),
            population_size: self.population_size.clone(),
            window_hours: self.window_hours,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cost(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        self.cost[self.dims.var(i, j, k, m)]
    }

    pub fn demand(&self, i: usize, j: usize, k: usize) -> f64 {
        self.demand[self.dims.triple(i, j, k)]
    }

    pub fn capacity(&self, i: usize, m: usize) -> Capacity {
        self.capacity[self.dims.zone_mode(i, m)]
    }

    pub fn travel_time(&self, i: usize, j: usize, m: usize) -> f64 {
        self.travel_time[self.dims.od_mode(i, j, m)]
    }

    pub fn fare(&self, i: usize, j: usize, m: usize) -> f64 {
        self.fare[self.dims.od_mode(i, j, m)]
    }

    pub fn distance(&self) -> &DistanceMatrix {
        &self.distance
    }

    pub fn population_size(&self, k: usize) -> f64 {
        self.population_size[k]
    }

    pub fn window_hours(&self) -> f64 {
        self.window_hours
    }

    pub fn cost_tensor(&self) -> &[f64] {
        &self.cost
    }

    pub fn demand_tensor(&self) -> &[f64] {
        &self.demand
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    /// `(origin, destination, population)` triples with positive demand, in
    /// index order.
    pub fn active_triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let d = self.dims;
        (0..d.zones).flat_map(move |i| {
            (0..d.zones).flat_map(move |j| {
                (0..d.populations)
                    .filter(move |&k| self.demand[d.triple(i, j, k)] > 0.0)
                    .map(move |k| (i, j, k))
            })
        })
    }
}

/// Resolves a city and a set of controls into a game instance.
pub fn build_instance(city: &CityModel, controls: &ScenarioControls) -> Result<GameInstance, Error> {
    let report = validate_city(city);
    if !report.is_valid() {
        return Err(Error::InvalidCity(report));
    }
    let report = validate_controls(city, controls);
    if !report.is_valid() {
        return Err(Error::InvalidControls(report));
    }

    let modes = city.all_modes();
    let dims = Dims::new(city.n_zones(), city.n_populations(), modes.len());
    let n = dims.zones;
    let distance = compute_distance(&city.zones, city.defaults.circuity);

    let mut travel_time = vec![0.0; n * n * dims.modes];
    let mut fare = vec![0.0; n * n * dims.modes];
    for mode in &modes {
        let t = compute_travel_time(&distance, mode, &city.travel_time_overrides)?;
        let scheme = controls.fare_override(mode.id).unwrap_or(mode.fare);
        for i in 0..n {
            for j in 0..n {
                let idx = dims.od_mode(i, j, mode.id);
                travel_time[idx] = t[i * n + j];
                if i != j && mode.id != Mode::WALKING {
                    fare[idx] = resolve_fare(scheme, distance.get(i, j));
                }
            }
        }
    }

    let mut cost = vec![0.0; dims.n_vars()];
    for i in 0..n {
        for j in 0..n {
            for pop in &city.populations {
                for m in 0..dims.modes {
                    let odm = dims.od_mode(i, j, m);
                    cost[dims.var(i, j, pop.id, m)] =
                        trip_cost(fare[odm], pop.value_of_time, travel_time[odm]);
                }
            }
        }
    }

    let mut demand = vec![0.0; dims.n_triples()];
    for e in city.demand.iter() {
        demand[dims.triple(e.origin, e.destination, e.population)] = e.count;
    }

    let mut capacity = Vec::with_capacity(n * dims.modes);
    for i in 0..n {
        for mode in &modes {
            capacity.push(if mode.id == Mode::WALKING {
                Capacity::Unbounded
            } else {
                let vehicles = f64::from(controls.vehicles(i, mode.id));
                Capacity::Seats(vehicles * f64::from(mode.seats_per_vehicle))
            });
        }
    }

    GameInstance::new(InstanceParts {
        dims,
        cost,
        demand,
        capacity,
        travel_time,
        fare,
        distance,
        population_size: city.populations.iter().map(|p| p.size as f64).collect(),
        window_hours: city.defaults.window_hours,
    })
}
