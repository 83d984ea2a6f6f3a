//! Built-in fixed and rule-based national holidays. Lunar-calendar
//! holidays (Diwali, Eid, ...) and Japan's equinox days are not included;
//! supply a holiday file when they matter.

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use crate::domain::Country;

fn ymd(year: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, m, d).expect("valid built-in holiday date")
}

/// The `n`-th (1-based) `weekday` of a month.
fn nth_weekday(year: i32, month: u32, weekday: Weekday, n: u8) -> NaiveDate {
    NaiveDate::from_weekday_of_month_opt(year, month, weekday, n).expect("month has that many weekdays")
}

fn last_weekday(year: i32, month: u32, weekday: Weekday) -> NaiveDate {
    let mut d = if month == 12 { ymd(year + 1, 1, 1) } else { ymd(year, month + 1, 1) } - Duration::days(1);
    while d.weekday() != weekday {
        d -= Duration::days(1);
    }
    d
}

/// Gregorian Easter Sunday (anonymous Gregorian algorithm).
pub fn easter_sunday(year: i32) -> NaiveDate {
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    ymd(year, month as u32, day as u32)
}

pub fn builtin_holidays(country: Country, year: i32) -> Vec<(NaiveDate, &'static str)> {
    use Weekday::*;
    let d = |m, day| ymd(year, m, day);
    let easter = easter_sunday(year);
    let mut out = match country {
        Country::Usa => vec![
            (d(1, 1), "New Year's Day"),
            (nth_weekday(year, 1, Mon, 3), "Martin Luther King Jr. Day"),
            (nth_weekday(year, 2, Mon, 3), "Washington's Birthday"),
            (last_weekday(year, 5, Mon), "Memorial Day"),
            (d(6, 19), "Juneteenth"),
            (d(7, 4), "Independence Day"),
            (nth_weekday(year, 9, Mon, 1), "Labor Day"),
            (nth_weekday(year, 10, Mon, 2), "Columbus Day"),
            (d(11, 11), "Veterans Day"),
            (nth_weekday(year, 11, Thu, 4), "Thanksgiving Day"),
            (d(12, 25), "Christmas Day"),
        ],
        Country::Japan => vec![
            (d(1, 1), "New Year's Day"),
            (nth_weekday(year, 1, Mon, 2), "Coming of Age Day"),
            (d(2, 11), "National Foundation Day"),
            (d(2, 23), "Emperor's Birthday"),
            (d(4, 29), "Showa Day"),
            (d(5, 3), "Constitution Memorial Day"),
            (d(5, 4), "Greenery Day"),
            (d(5, 5), "Children's Day"),
            (nth_weekday(year, 7, Mon, 3), "Marine Day"),
            (d(8, 11), "Mountain Day"),
            (nth_weekday(year, 9, Mon, 3), "Respect for the Aged Day"),
            (nth_weekday(year, 10, Mon, 2), "Sports Day"),
            (d(11, 3), "Culture Day"),
            (d(11, 23), "Labor Thanksgiving Day"),
        ],
        Country::India => vec![
            (d(1, 26), "Republic Day"),
            (d(8, 15), "Independence Day"),
            (d(10, 2), "Gandhi Jayanti"),
        ],
        Country::Sweden => {
            // Midsummer Eve: the Friday between 19 and 25 June
            let midsummer_eve = (19..=25).map(|x| d(6, x)).find(|x| x.weekday() == Fri).unwrap();
            vec![
                (d(1, 1), "New Year's Day"),
                (d(1, 6), "Epiphany"),
                (easter - Duration::days(2), "Good Friday"),
                (easter + Duration::days(1), "Easter Monday"),
                (d(5, 1), "May Day"),
                (easter + Duration::days(39), "Ascension Day"),
                (d(6, 6), "National Day"),
                (midsummer_eve, "Midsummer Eve"),
                (d(12, 24), "Christmas Eve"),
                (d(12, 25), "Christmas Day"),
                (d(12, 26), "Boxing Day"),
                (d(12, 31), "New Year's Eve"),
            ]
        }
        Country::Uae => vec![
            (d(1, 1), "New Year's Day"),
            (d(12, 2), "National Day"),
            (d(12, 3), "National Day Holiday"),
        ],
        Country::Brazil => {
            let mut v = vec![
                (d(1, 1), "New Year's Day"),
                (easter - Duration::days(2), "Good Friday"),
                (d(4, 21), "Tiradentes"),
                (d(5, 1), "Labour Day"),
                (d(9, 7), "Independence Day"),
                (d(10, 12), "Our Lady of Aparecida"),
                (d(11, 2), "All Souls' Day"),
                (d(11, 15), "Republic Proclamation Day"),
                (d(12, 25), "Christmas Day"),
            ];
            if year >= 2024 {
                v.push((d(11, 20), "Black Consciousness Day"));
            }
            v
        }
    };
    out.sort();
    out
}
