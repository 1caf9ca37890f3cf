use mobeq_core::city_data::{
    boston_doubled_amod_fare_controls, boston_doubled_buses_controls, boston_nominal_controls,
    bundled_city, bundled_datasets, bundled_nominal_controls, city_to_string, parse_city,
    BUNDLED_KEYS,
};
use mobeq_core::session::evaluate;

const WALK: usize = 0;
const BUS: usize = 1;
const AMOD: usize = 2;
const BIKE: usize = 3;

#[test]
fn bundled_files_round_trip_and_solve() {
    for key in BUNDLED_KEYS {
        let city = bundled_city(key).unwrap();
        assert_eq!(parse_city(&city_to_string(&city)).unwrap(), city, "{key}");
        for p in &city.populations {
            assert_eq!(p.size as f64, city.demand.population_total(p.id), "{key}");
        }
        let report = evaluate(&city, &bundled_nominal_controls(key).unwrap(), 1).unwrap();
        assert!(report.nash.verdict, "{key}");
    }
    assert_eq!(bundled_datasets().len(), 3);
    assert_eq!(bundled_city("kyiv").unwrap().n_zones(), 12);
    assert!(bundled_city("atlantis").is_none());
}

#[test]
fn boston_has_eight_landmarks_three_populations_and_about_thirty_thousand_trips() {
    let city = bundled_city("boston").unwrap();
    let names: Vec<&str> = city.zones.iter().map(|z| z.name.as_str()).collect();
    assert_eq!(
        names,
        ["MIT", "Harvard", "MGH", "Logan Airport", "City Hall", "Boston Common", "Prudential", "Fenway"]
    );
    let vot: Vec<f64> = city.populations.iter().map(|p| p.value_of_time).collect();
    assert_eq!(vot, [35.0, 15.0, 7.0]);
    assert!((city.demand.total() - 30_000.0).abs() < 50.0);
    assert!(city.notes.iter().any(|n| n.contains("SYNTHETIC")));
}

#[test]
fn doubling_buses_fills_the_new_seats_in_the_first_two_zones() {
    let city = bundled_city("boston").unwrap();
    let a = evaluate(&city, &boston_nominal_controls(), 1).unwrap().kpis;
    let b = evaluate(&city, &boston_doubled_buses_controls(), 2).unwrap().kpis;
    for z in [0, 1] {
        assert_eq!(a.riders[z][BUS], 750.0);
        assert!((a.mode_share[z][BUS] - 0.44).abs() <= 0.02, "{}", a.mode_share[z][BUS]);
        assert_eq!(b.riders[z][BUS], 1500.0);
        // The new riders come off their feet.
        assert!(b.riders[z][WALK] < a.riders[z][WALK]);
    }
    assert!(b.avg_travel_time < a.avg_travel_time);
    assert!(b.co2 > a.co2);
    assert!(b.revenue[BUS] > a.revenue[BUS]);
    assert_eq!(b.operating_cost[BUS], 2.0 * a.operating_cost[BUS]);
}

#[test]
fn doubling_the_amod_fare_empties_amod_in_zones_five_and_six() {
    let city = bundled_city("boston").unwrap();
    let a = evaluate(&city, &boston_nominal_controls(), 1).unwrap().kpis;
    let c = evaluate(&city, &boston_doubled_amod_fare_controls(), 3).unwrap().kpis;
    for z in [4, 5] {
        assert!(a.riders[z][AMOD] > 0.0);
        assert_eq!(c.mode_share[z][AMOD], 0.0);
        let gain = |m: usize| c.riders[z][m] - a.riders[z][m];
        assert!(gain(BUS) > 0.5 * a.riders[z][AMOD]);
        assert!(gain(BUS) > gain(WALK) && gain(BUS) > gain(BIKE));
    }
}
