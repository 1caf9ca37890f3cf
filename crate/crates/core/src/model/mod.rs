//! Domain types for the mobility game and their validation.

mod city;
mod controls;
mod instance;
mod validation;

pub use city::{
    CityDefaults, CityModel, DemandEntry, DemandTensor, FareScheme, Mode, ModeDefaults, Population,
    TravelTimeOverride, Zone, DEFAULT_CIRCUITY, DEFAULT_WINDOW_HOURS, SCHEMA_VERSION,
    WALKING_SPEED_MPH,
};
pub use controls::{FareOverride, FleetEntry, ScenarioControls, TaxRate};
pub use instance::{build_instance, Capacity, Dims, GameInstance, InstanceParts};
pub use validation::{validate_city, validate_controls, ValidationReport, Violation, ViolationKind};
