//! Family structures and daily consumption profiles: action classification,
//! behavioral validation and persistence.

mod classify;
mod files;
mod validate;

pub use classify::{classify_action, is_school_or_work, ActionClass};
pub use files::{
    family_id, profile_csv_header, profile_file_name, read_families, read_profile_csv, write_families,
    write_profile_csv, HouseholdError, CONSERVATION_TOLERANCE,
};
pub use validate::{
    has_behavior_errors, validate_behavior, validate_hvac, BehaviorViolation, BehaviorViolationKind,
    COOLING_MIN_OUTDOOR, HEATING_MAX_OUTDOOR, MAX_REPEAT_HOURS, MAX_SLEEP_HOURS,
};
