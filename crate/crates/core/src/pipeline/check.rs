use std::fs;
use std::path::{Path, PathBuf};

use super::{load_ranges, load_weather_day, RunLayout};
use crate::domain::{Country, DayType, Season};
use crate::household::{family_id, read_families, read_profile_csv, validate_behavior, validate_hvac};
use crate::weather::{validate_hourly, validate_ranges, Severity};

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub path: PathBuf,
    pub severity: Severity,
    pub message: String,
}

fn sorted_entries(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.sort();
    v
}

fn error(path: &Path, message: impl Into<String>) -> Finding {
    Finding { path: path.to_path_buf(), severity: Severity::Error, message: message.into() }
}

/// Re-reads every artifact of a run directory and re-applies the parsers
/// and validators.
pub fn validate_run_dir(dir: &Path) -> Vec<Finding> {
    let layout = RunLayout::new(dir);
    let mut findings = Vec::new();
    for c in Country::ALL {
        let families_path = layout.families(c);
        let families = if families_path.exists() {
            match read_families(&families_path, c) {
                Ok(f) => f,
                Err(e) => {
                    findings.push(error(&families_path, e.to_string()));
                    vec![]
                }
            }
        } else {
            vec![]
        };

        let ranges_path = layout.ranges(c);
        let ranges = if ranges_path.exists() {
            match load_ranges(&layout, c) {
                Ok(r) => {
                    findings.extend(validate_ranges(&r).into_iter().map(|v| Finding {
                        path: ranges_path.clone(),
                        severity: v.severity,
                        message: v.to_string(),
                    }));
                    Some(r)
                }
                Err(e) => {
                    findings.push(error(&ranges_path, e));
                    None
                }
            }
        } else {
            None
        };

        let mut weather = Vec::new();
        for s in Season::ALL {
            let p = layout.weather_day(c, s);
            if !p.exists() {
                continue;
            }
            match load_weather_day(&layout, c, s) {
                Ok(day) => {
                    findings.extend(validate_hourly(&day, ranges.as_ref()).into_iter().map(|v| Finding {
                        path: p.clone(),
                        severity: v.severity,
                        message: v.to_string(),
                    }));
                    weather.push(day);
                }
                Err(e) => findings.push(error(&p, e)),
            }
        }

        for fam_dir in sorted_entries(&dir.join("profiles").join(c.slug())) {
            let fid = fam_dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            let family_type = families
                .iter()
                .enumerate()
                .find(|(i, f)| family_id(*i, f) == fid)
                .map(|(_, f)| f.family_type.clone())
                .unwrap_or_else(|| fid.clone());
            for s in Season::ALL {
                for d in DayType::ALL {
                    let p = layout.profile(c, &fid, s, d);
                    if !p.exists() {
                        continue;
                    }
                    match read_profile_csv(&p, c, &family_type, s, d) {
                        Ok(profile) => {
                            let mut v = validate_behavior(&profile, d);
                            if let Some(w) = weather.iter().find(|w| w.season == s) {
                                v.extend(validate_hvac(&profile, w));
                            }
                            findings.extend(v.into_iter().map(|x| Finding {
                                path: p.clone(),
                                severity: x.severity,
                                message: x.to_string(),
                            }));
                        }
                        Err(e) => findings.push(error(&p, e.to_string())),
                    }
                }
            }
        }
    }
    findings
}
