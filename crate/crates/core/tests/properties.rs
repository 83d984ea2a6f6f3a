//! Round-trip and invariant properties across the parsers, calendar and
//! signature code.

use std::collections::BTreeMap;

use proptest::prelude::*;
use synthgrid::analytics::signature_from_points;
use synthgrid::calendar::{effective_day_type, CountryCalendar};
use synthgrid::domain::{Country, DayType, Season, WeatherParameter};
use synthgrid::numeric::Decimal;
use synthgrid::parser::{
    extract_envelope, format_consumption, format_hourly_weather, format_weather_ranges, parse_consumption,
    parse_hourly_weather, parse_weather_ranges, wrap_envelope, DailyConsumptionProfile, Envelope, FamilyStructure,
    HourlyEntry, HourlyWeatherDay, MemberSeries, SeasonalWeatherRanges, ValueRange,
};

fn decimal(max_units: i64) -> impl Strategy<Value = Decimal> {
    (-max_units..=max_units, 0u8..=3).prop_map(|(u, p)| Decimal::new(u as f64 / 10f64.powi(p as i32), p))
}

fn non_negative(max_units: i64) -> impl Strategy<Value = Decimal> {
    (0..=max_units, 0u8..=3).prop_map(|(u, p)| Decimal::new(u as f64 / 10f64.powi(p as i32), p))
}

fn label() -> impl Strategy<Value = String> {
    "[A-Z][a-z]{1,8}(-[A-Z][a-z]{1,8})?"
}

fn day_series(value: BoxedStrategy<Decimal>) -> impl Strategy<Value = Vec<HourlyEntry>> {
    prop::collection::vec((label(), value), 24)
        .prop_map(|v| v.into_iter().enumerate().map(|(h, (l, d))| HourlyEntry::new(h as u8, l, d)).collect())
}

fn season() -> impl Strategy<Value = Season> {
    prop::sample::select(Season::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_round_trip(inner in "[A-Za-z0-9#\\[\\](),. -]{1,200}") {
        prop_assume!(!inner.trim().is_empty());
        let env = extract_envelope(&format!("noise {}\ntrailer", wrap_envelope(&inner))).unwrap();
        prop_assert_eq!(env.inner_text(), inner.trim());
    }

    #[test]
    fn ranges_round_trip(bounds in prop::collection::vec((decimal(50_000), non_negative(50_000)), 20)) {
        let mut ranges: BTreeMap<WeatherParameter, BTreeMap<Season, ValueRange>> = BTreeMap::new();
        let mut it = bounds.into_iter();
        for p in WeatherParameter::ALL {
            for s in Season::ALL {
                let (lo, width) = it.next().unwrap();
                let lo = if p == WeatherParameter::Temperature { lo } else { Decimal::new(lo.value.abs(), lo.places) };
                let hi = Decimal::new(lo.value + width.value, lo.places.max(width.places));
                let hi = hi.to_string().parse::<Decimal>().unwrap();
                ranges.entry(p).or_default().insert(s, ValueRange { min: lo, max: hi });
            }
        }
        let r = SeasonalWeatherRanges::new(Country::India, ranges).unwrap();
        let back = parse_weather_ranges(&Envelope::from_inner(format_weather_ranges(&r)), Country::India).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn hourly_round_trip(
        season in season(),
        temp in day_series(decimal(4_000).boxed()),
        hum in day_series(non_negative(10_000).boxed()),
        diffuse in day_series(non_negative(40_000).boxed()),
        direct in day_series(non_negative(90_000).boxed()),
        wind in day_series(non_negative(2_000).boxed()),
    ) {
        let series = WeatherParameter::ALL.into_iter().zip([temp, hum, diffuse, direct, wind]).collect();
        let day = HourlyWeatherDay::new(Country::Sweden, season, series).unwrap();
        let back = parse_hourly_weather(&Envelope::from_inner(format_hourly_weather(&day)), Country::Sweden, season).unwrap();
        prop_assert_eq!(back, day);
    }

    #[test]
    fn consumption_round_trip(
        season in season(),
        n in 1usize..=4,
        series in prop::collection::vec(day_series(non_negative(3_000).boxed()), 6),
        weekend in any::<bool>(),
    ) {
        let names = ["Father", "Mother", "Son", "Daughter"];
        let day_type = if weekend { DayType::Weekend } else { DayType::Weekday };
        let mut series = series.into_iter();
        let members: Vec<MemberSeries> = names[..n]
            .iter()
            .map(|m| MemberSeries { member: m.to_string(), entries: series.next().unwrap() })
            .collect();
        let (heating, cooling) = (series.next().unwrap(), series.next().unwrap());
        let p = DailyConsumptionProfile::new(Country::Usa, "Nuclear Family", season, day_type, members, heating, cooling);
        let family = FamilyStructure {
            country: Country::Usa,
            family_type: "Nuclear Family".into(),
            members: names[..n].iter().map(|s| s.to_string()).collect(),
        };
        let back = parse_consumption(&Envelope::from_inner(format_consumption(&p)), &family, season, day_type).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn day_types_partition_the_year(year in 1900i32..2200, weekend_idx in prop::collection::btree_set(0usize..7, 1..=3)) {
        let days = [chrono::Weekday::Mon, chrono::Weekday::Tue, chrono::Weekday::Wed, chrono::Weekday::Thu,
            chrono::Weekday::Fri, chrono::Weekday::Sat, chrono::Weekday::Sun];
        let mut cal = CountryCalendar::plain(Country::Uae, year);
        cal.weekend_days = weekend_idx.iter().map(|&i| days[i]).collect();
        let dates: Vec<_> = cal.dates().collect();
        let weekend = dates.iter().filter(|&&d| effective_day_type(d, &cal) == DayType::Weekend).count();
        let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        prop_assert_eq!(dates.len(), if leap { 366 } else { 365 });
        // every weekday name occurs 52 or 53 times
        prop_assert!(weekend >= 52 * weekend_idx.len() && weekend <= 53 * weekend_idx.len());
    }

    #[test]
    fn exact_lines_recover_their_slope(a in -5.0f64..5.0, b in -1.0f64..1.0, n in 3usize..200) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| -20.0 + 0.25 * i as f64).map(|t| (t, a + b * t)).collect();
        let s = signature_from_points("line", pts, 100.0, 1.0).unwrap();
        let got = s.slope().unwrap();
        prop_assert!((got - b).abs() <= 1e-9 * b.abs().max(1.0), "{} vs {}", got, b);
        prop_assert_eq!(s.bins.iter().map(|x| x.count).sum::<usize>(), n);
    }
}
