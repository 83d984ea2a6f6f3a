use std::collections::BTreeMap;
use std::path::Path;

use super::{load_weather_day, write_atomic, ItemFailure, PipelineError, RunLayout};
use crate::analytics::compute_signature;
use crate::calendar::{assemble_year, build_calendar, write_yearly_csv};
use crate::config::RunConfig;
use crate::domain::{DayType, Season};
use crate::household::{family_id, read_families, read_profile_csv};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssemblyOutcome {
    /// Yearly CSVs written, relative to the run directory.
    pub written: Vec<String>,
    pub failures: Vec<ItemFailure>,
}

fn relative(layout: &RunLayout, path: &Path) -> String {
    path.strip_prefix(layout.root()).unwrap_or(path).display().to_string()
}

/// Builds one yearly CSV (and its signature JSON) per family whose eight
/// daily profiles are on disk.
pub fn assemble_from_disk(cfg: &RunConfig, layout: &RunLayout) -> Result<AssemblyOutcome, PipelineError> {
    let mut out = AssemblyOutcome::default();
    for &c in &cfg.countries {
        let fail = |out: &mut AssemblyOutcome, item: String, error: String| out.failures.push(ItemFailure { item, error });
        let families = match read_families(&layout.families(c), c) {
            Ok(f) => f,
            Err(e) => {
                fail(&mut out, c.slug().into(), e.to_string());
                continue;
            }
        };
        let cal = match build_calendar(c, cfg.year, cfg.holiday_file.as_deref(), cfg.weekends.get(&c).map(Vec::as_slice)) {
            Ok(cal) => cal,
            Err(e) => {
                fail(&mut out, c.slug().into(), e.to_string());
                continue;
            }
        };
        let weather: Result<BTreeMap<Season, _>, String> =
            Season::ALL.iter().map(|&s| load_weather_day(layout, c, s).map(|d| (s, d))).collect();
        let weather = match weather {
            Ok(w) => w,
            Err(e) => {
                fail(&mut out, c.slug().into(), e);
                continue;
            }
        };
        for (i, fam) in families.iter().take(cfg.families_per_country).enumerate() {
            let fid = family_id(i, fam);
            let item = format!("{}_{fid}", c.slug());
            let mut daily = BTreeMap::new();
            let mut gaps = Vec::new();
            for s in Season::ALL {
                for d in DayType::ALL {
                    let path = layout.profile(c, &fid, s, d);
                    if !path.exists() {
                        gaps.push(format!("{s}/{d}"));
                        continue;
                    }
                    match read_profile_csv(&path, c, &fam.family_type, s, d) {
                        Ok(p) => {
                            daily.insert((s, d), p);
                        }
                        Err(e) => gaps.push(e.to_string()),
                    }
                }
            }
            if !gaps.is_empty() {
                fail(&mut out, item, format!("missing daily profiles: {}", gaps.join(", ")));
                continue;
            }
            let yearly = match assemble_year(&daily, &cal, &weather, cfg.year) {
                Ok(y) => y,
                Err(e) => {
                    fail(&mut out, item, e.to_string());
                    continue;
                }
            };
            let path = layout.yearly(c, &fid);
            write_yearly_csv(&path, &yearly).map_err(|e| PipelineError::Setup(e.to_string()))?;
            if let Ok(sig) = compute_signature(&yearly, &fid, cfg.balance_point) {
                let sp = layout.signature(c, &fid);
                write_atomic(&sp, (sig.to_json() + "\n").as_bytes())
                    .map_err(|source| PipelineError::Io { path: sp.clone(), source })?;
            }
            out.written.push(relative(layout, &path));
        }
    }
    Ok(out)
}
