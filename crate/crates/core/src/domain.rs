//! Shared vocabulary: countries, seasons, day types and pipeline stages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Countries with built-in calendars, capitals and hemisphere data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Country {
    Usa,
    Japan,
    India,
    Sweden,
    Uae,
    Brazil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hemisphere {
    Northern,
    Southern,
}

impl Country {
    pub const ALL: [Country; 6] = [
        Country::Usa,
        Country::Japan,
        Country::India,
        Country::Sweden,
        Country::Uae,
        Country::Brazil,
    ];

    /// Name used in prompts and output files.
    pub fn name(self) -> &'static str {
        match self {
            Country::Usa => "USA",
            Country::Japan => "Japan",
            Country::India => "India",
            Country::Sweden => "Sweden",
            Country::Uae => "United Arab Emirates",
            Country::Brazil => "Brazil",
        }
    }

    /// Lowercase identifier used for file names.
    pub fn slug(self) -> &'static str {
        match self {
            Country::Usa => "usa",
            Country::Japan => "japan",
            Country::India => "india",
            Country::Sweden => "sweden",
            Country::Uae => "uae",
            Country::Brazil => "brazil",
        }
    }

    pub fn hemisphere(self) -> Hemisphere {
        match self {
            Country::Brazil => Hemisphere::Southern,
            _ => Hemisphere::Northern,
        }
    }

    /// Meteorological season for a calendar month (1..=12).
    pub fn season_of_month(self, month: u32) -> Season {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        let northern = match month {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            _ => Season::Autumn,
        };
        match self.hemisphere() {
            Hemisphere::Northern => northern,
            Hemisphere::Southern => northern.opposite(),
        }
    }

    /// Months (1..=12) that belong to `season` for this country.
    pub fn months_of_season(self, season: Season) -> Vec<u32> {
        (1..=12).filter(|&m| self.season_of_month(m) == season).collect()
    }

    pub fn supported_names() -> String {
        Country::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
    pub supported: String,
}

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown {} '{}' (supported: {})",
            self.kind, self.name, self.supported
        )
    }
}

impl std::error::Error for UnknownName {}

fn normalize_name(s: &str) -> String {
    s.trim()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(|c| c.to_lowercase())
        .collect()
}

impl FromStr for Country {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let country = match normalize_name(s).as_str() {
            "usa" | "us" | "unitedstates" | "unitedstatesofamerica" => Country::Usa,
            "japan" => Country::Japan,
            "india" => Country::India,
            "sweden" => Country::Sweden,
            "uae" | "unitedarabemirates" => Country::Uae,
            "brazil" | "brasil" => Country::Brazil,
            _ => {
                return Err(UnknownName {
                    kind: "country",
                    name: s.to_string(),
                    supported: Country::supported_names(),
                })
            }
        };
        Ok(country)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Autumn];

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "Winter",
            Season::Spring => "Spring",
            Season::Summer => "Summer",
            Season::Autumn => "Autumn",
        }
    }

    pub fn opposite(self) -> Season {
        match self {
            Season::Winter => Season::Summer,
            Season::Spring => Season::Autumn,
            Season::Summer => Season::Winter,
            Season::Autumn => Season::Spring,
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Season {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_name(s).as_str() {
            "winter" => Ok(Season::Winter),
            "spring" => Ok(Season::Spring),
            "summer" => Ok(Season::Summer),
            "autumn" | "fall" => Ok(Season::Autumn),
            _ => Err(UnknownName {
                kind: "season",
                name: s.to_string(),
                supported: "Winter, Spring, Summer, Autumn".into(),
            }),
        }
    }
}

/// The two daily patterns generated per family and season. Holidays are
/// folded into `Weekend` when a year is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Weekday, DayType::Weekend];

    pub fn name(self) -> &'static str {
        match self {
            DayType::Weekday => "Weekday",
            DayType::Weekend => "Weekend",
        }
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DayType {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_name(s).as_str() {
            "weekday" => Ok(DayType::Weekday),
            "weekend" => Ok(DayType::Weekend),
            _ => Err(UnknownName {
                kind: "day type",
                name: s.to_string(),
                supported: "Weekday, Weekend".into(),
            }),
        }
    }
}

/// Pipeline stages, totally ordered by execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StageId {
    FamilyTypes,
    WeatherRanges,
    WeatherData,
    EnergyPatterns,
}

impl StageId {
    pub const ALL: [StageId; 4] = [
        StageId::FamilyTypes,
        StageId::WeatherRanges,
        StageId::WeatherData,
        StageId::EnergyPatterns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StageId::FamilyTypes => "Family Types",
            StageId::WeatherRanges => "Weather Ranges",
            StageId::WeatherData => "Weather Data",
            StageId::EnergyPatterns => "Energy Patterns",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            StageId::FamilyTypes => "family_types",
            StageId::WeatherRanges => "weather_ranges",
            StageId::WeatherData => "weather_data",
            StageId::EnergyPatterns => "energy_patterns",
        }
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StageId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_name(s).as_str() {
            "familytypes" | "families" | "stage1" | "1" => Ok(StageId::FamilyTypes),
            "weatherranges" | "ranges" | "stage2" | "2" => Ok(StageId::WeatherRanges),
            "weatherdata" | "weather" | "stage3" | "3" => Ok(StageId::WeatherData),
            "energypatterns" | "energy" | "stage4" | "4" => Ok(StageId::EnergyPatterns),
            _ => Err(UnknownName {
                kind: "stage",
                name: s.to_string(),
                supported: "FamilyTypes, WeatherRanges, WeatherData, EnergyPatterns".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeatherSource {
    #[default]
    Llm,
    External,
}

/// The five weather quantities exchanged between stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WeatherParameter {
    Temperature,
    Humidity,
    SolRadDiffuse,
    SolRadDirect,
    WindSpeed,
}

impl WeatherParameter {
    pub const ALL: [WeatherParameter; 5] = [
        WeatherParameter::Temperature,
        WeatherParameter::Humidity,
        WeatherParameter::SolRadDiffuse,
        WeatherParameter::SolRadDirect,
        WeatherParameter::WindSpeed,
    ];

    /// Section name in the `#Name#[...]` grammars.
    pub fn section_name(self) -> &'static str {
        match self {
            WeatherParameter::Temperature => "Temperature",
            WeatherParameter::Humidity => "Humidity",
            WeatherParameter::SolRadDiffuse => "SolRad-Diffuse",
            WeatherParameter::SolRadDirect => "SolRad-Direct",
            WeatherParameter::WindSpeed => "Wind-Speed",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            WeatherParameter::Temperature => "°C",
            WeatherParameter::Humidity => "%",
            WeatherParameter::SolRadDiffuse | WeatherParameter::SolRadDirect => "W/m²",
            WeatherParameter::WindSpeed => "m/s",
        }
    }

    pub fn is_solar(self) -> bool {
        matches!(self, WeatherParameter::SolRadDiffuse | WeatherParameter::SolRadDirect)
    }

    pub fn from_section_name(name: &str) -> Option<Self> {
        let n = normalize_name(name);
        WeatherParameter::ALL
            .into_iter()
            .find(|p| normalize_name(p.section_name()) == n)
    }
}

impl fmt::Display for WeatherParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.section_name())
    }
}

/// Lowercase, hyphen-separated identifier safe for file names.
pub fn slugify(s: &str) -> String {
    let mut out = String::new();
    for c in s.trim().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push('x');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seasons_partition_months_for_every_country() {
        for country in Country::ALL {
            let mut months: Vec<u32> = Season::ALL
                .iter()
                .flat_map(|&s| country.months_of_season(s))
                .collect();
            months.sort_unstable();
            assert_eq!(months, (1..=12).collect::<Vec<_>>(), "{country}");
            for s in Season::ALL {
                assert_eq!(country.months_of_season(s).len(), 3);
            }
        }
    }

    #[test]
    fn brazil_january_is_summer() {
        assert_eq!(Country::Brazil.season_of_month(1), Season::Summer);
        assert_eq!(Country::Brazil.season_of_month(7), Season::Winter);
        assert_eq!(Country::Usa.season_of_month(1), Season::Winter);
        assert_eq!(Country::Sweden.season_of_month(12), Season::Winter);
    }

    #[test]
    fn country_aliases() {
        assert_eq!("UAE".parse::<Country>().unwrap(), Country::Uae);
        assert_eq!("United Arab Emirates".parse::<Country>().unwrap(), Country::Uae);
        assert_eq!(" usa ".parse::<Country>().unwrap(), Country::Usa);
        let err = "Atlantis".parse::<Country>().unwrap_err();
        assert!(err.to_string().contains("Brazil"));
    }

    #[test]
    fn stage_order() {
        assert!(StageId::FamilyTypes < StageId::WeatherRanges);
        assert!(StageId::WeatherData < StageId::EnergyPatterns);
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("Single-Parent Family"), "single-parent-family");
        assert_eq!(slugify("  Family with 'Domestic' Worker "), "family-with-domestic-worker");
        assert_eq!(slugify("***"), "x");
    }
}
