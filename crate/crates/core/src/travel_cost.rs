//! Inter-zone distances, travel times and the generalized trip cost
//! `fare + value_of_time * travel_time`.

use crate::error::Error;
use crate::model::{FareScheme, Mode, TravelTimeOverride, Zone};

/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MILES: f64 = 3958.8;

/// Square matrix of network miles between zone centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    miles: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            miles: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "distance matrix must be square");
        DistanceMatrix {
            n,
            miles: rows.into_iter().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.miles[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, miles: f64) {
        self.miles[i * self.n + j] = miles;
    }

    /// Row-major `n * n` entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.miles
    }
}

/// Haversine distance between two WGS-84 points, in miles.
pub fn great_circle_miles(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * a.sqrt().min(1.0).asin()
}

/// Great-circle distance between every pair of zone centroids, scaled by
/// `circuity` to approximate street-network miles.
pub fn compute_distance(zones: &[Zone], circuity: f64) -> DistanceMatrix {
    let n = zones.len();
    let mut d = DistanceMatrix::zeros(n);
    for (i, a) in zones.iter().enumerate() {
        for (j, b) in zones.iter().enumerate() {
            if i != j {
                let gc = great_circle_miles(a.latitude, a.longitude, b.latitude, b.longitude);
                d.set(i, j, gc * circuity);
            }
        }
    }
    d
}

/// Travel times in hours for one mode, row-major `n * n`.
///
/// Overrides for this mode replace `distance / speed`; the diagonal is
/// always zero regardless of overrides.
pub fn compute_travel_time(
    dist: &DistanceMatrix,
    mode: &Mode,
    overrides: &[TravelTimeOverride],
) -> Result<Vec<f64>, Error> {
    if !(mode.speed.is_finite() && mode.speed > 0.0) {
        return Err(Error::Instance(format!(
            "mode `{}` has non-positive speed {}",
            mode.name, mode.speed
        )));
    }
    let n = dist.len();
    let mut t: Vec<f64> = dist.as_slice().iter().map(|d| d / mode.speed).collect();
    for o in overrides.iter().filter(|o| o.mode == mode.id) {
        if !(o.hours.is_finite() && o.hours >= 0.0) {
            return Err(Error::Instance(format!(
                "travel time override ({}, {}, {}) is negative or not finite: {}",
                o.origin, o.destination, o.mode, o.hours
            )));
        }
        if o.origin >= n || o.destination >= n {
            return Err(Error::Instance(format!(
                "travel time override references zone outside 0..{n}"
            )));
        }
        t[o.origin * n + o.destination] = o.hours;
    }
    for i in 0..n {
        t[i * n + i] = 0.0;
    }
    Ok(t)
}

/// Monetary fare for one trip of `miles` under `scheme`.
pub fn resolve_fare(scheme: FareScheme, miles: f64) -> f64 {
    match scheme {
        FareScheme::PerTrip(amount) => amount,
        FareScheme::PerMile(rate) => rate * miles,
    }
}

/// Generalized cost of one trip: fare plus travel time valued at the
/// traveler's value of time.
pub fn trip_cost(fare: f64, value_of_time: f64, hours: f64) -> f64 {
    fare + value_of_time * hours
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FareScheme;

    fn zone(id: usize, lat: f64, lon: f64) -> Zone {
        Zone {
            id,
            name: format!("z{id}"),
            latitude: lat,
            longitude: lon,
        }
    }

    fn bus(speed: f64) -> Mode {
        Mode {
            id: 1,
            name: "bus".into(),
            speed,
            fare: FareScheme::PerTrip(2.0),
            seats_per_vehicle: 50,
            emissions_rate: 2800.0,
            operating_cost: 90.0,
            taxable: false,
        }
    }

    #[test]
    fn identical_coordinates_are_zero_miles() {
        let zs = [zone(0, 42.36, -71.09), zone(1, 42.36, -71.09)];
        let d = compute_distance(&zs, 1.3);
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn circuity_scales_off_diagonal_entries() {
        let zs = [zone(0, 42.36, -71.09), zone(1, 42.377, -71.117), zone(2, 42.365, -71.01)];
        let base = compute_distance(&zs, 1.0);
        let scaled = compute_distance(&zs, 1.3);
        for i in 0..3 {
            for j in 0..3 {
                assert!((scaled.get(i, j) - 1.3 * base.get(i, j)).abs() <= 1e-12 * base.get(i, j));
            }
        }
    }

    #[test]
    fn travel_time_is_distance_over_speed() {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 5.0], vec![5.0, 0.0]]);
        let t = compute_travel_time(&d, &bus(10.0), &[]).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn override_wins_and_makes_times_asymmetric() {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 5.0], vec![5.0, 0.0]]);
        let ov = [TravelTimeOverride { origin: 0, destination: 1, mode: 1, hours: 0.4 }];
        let t = compute_travel_time(&d, &bus(10.0), &ov).unwrap();
        assert_eq!(t[1], 0.4);
        assert_eq!(t[2], 0.5);
    }

    #[test]
    fn diagonal_override_is_ignored() {
        let d = DistanceMatrix::zeros(2);
        let ov = [TravelTimeOverride { origin: 1, destination: 1, mode: 1, hours: 3.0 }];
        let t = compute_travel_time(&d, &bus(10.0), &ov).unwrap();
        assert_eq!(t[3], 0.0);
    }

    #[test]
    fn negative_override_is_an_error() {
        let d = DistanceMatrix::zeros(2);
        let ov = [TravelTimeOverride { origin: 0, destination: 1, mode: 1, hours: -1.0 }];
        assert!(compute_travel_time(&d, &bus(10.0), &ov).is_err());
    }

    #[test]
    fn trip_cost_examples() {
        assert!((trip_cost(2.0, 35.0, 0.2) - 9.0).abs() < 1e-12);
        assert_eq!(trip_cost(0.0, 7.0, 1.0), 7.0);
        let amod = resolve_fare(FareScheme::PerMile(1.0), 3.0);
        assert!((trip_cost(amod, 15.0, 0.1) - 4.5).abs() < 1e-12);
    }
}
