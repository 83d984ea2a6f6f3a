use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::Country;

/// Capital city used as the weather location for a country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capital {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    /// Offset of local standard time from UTC. Hourly TMY records are
    /// shifted by the whole-hour floor of this offset.
    pub utc_offset_minutes: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapitalRegistry {
    entries: BTreeMap<Country, Capital>,
}

fn capital(name: &str, latitude: f64, longitude: f64, utc_offset_minutes: i32) -> Capital {
    Capital { name: name.to_string(), latitude, longitude, utc_offset_minutes }
}

impl Default for CapitalRegistry {
    fn default() -> Self {
        let entries = BTreeMap::from([
            (Country::Usa, capital("Washington D.C.", 38.91, -77.04, -300)),
            (Country::Japan, capital("Tokyo", 35.68, 139.65, 540)),
            (Country::India, capital("New Delhi", 28.61, 77.21, 330)),
            (Country::Sweden, capital("Stockholm", 59.33, 18.07, 60)),
            (Country::Uae, capital("Abu Dhabi", 24.45, 54.38, 240)),
            (Country::Brazil, capital("Brasília", -15.79, -47.88, -180)),
        ]);
        CapitalRegistry { entries }
    }
}

impl CapitalRegistry {
    pub fn get(&self, country: Country) -> Option<&Capital> {
        self.entries.get(&country)
    }

    pub fn set(&mut self, country: Country, capital: Capital) {
        self.entries.insert(country, capital);
    }

    pub fn covers(&self, countries: &[Country]) -> bool {
        countries.iter().all(|c| self.entries.contains_key(c))
    }
}
