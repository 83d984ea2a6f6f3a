use std::fs;
use std::path::{Path, PathBuf};

use super::EnergySignature;
use crate::parser::DailyConsumptionProfile;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: String,
    pub y: String,
}

/// One series per member plus heating, cooling and total, each tagged with
/// the day type (`Weekday/Mother`).
pub fn profile_plot_rows(p: &DailyConsumptionProfile) -> Vec<PlotRow> {
    let tag = p.day_type.name();
    let mut rows = Vec::new();
    let mut push = |name: &str, ys: Vec<String>| {
        for (h, y) in ys.into_iter().enumerate() {
            rows.push(PlotRow { series: format!("{tag}/{name}"), x: h.to_string(), y });
        }
    };
    for m in &p.members {
        push(&m.member, m.entries.iter().map(|e| e.value.to_string()).collect());
    }
    push("Heating", p.heating.iter().map(|e| e.value.to_string()).collect());
    push("Cooling", p.cooling.iter().map(|e| e.value.to_string()).collect());
    push("Total", p.totals.iter().map(|t| t.to_string()).collect());
    rows
}

/// Binned means under series `binned`, followed by the raw pairs under
/// `points`.
pub fn signature_plot_rows(s: &EnergySignature) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = s
        .bins
        .iter()
        .map(|b| PlotRow { series: "binned".into(), x: b.center.to_string(), y: b.mean.to_string() })
        .collect();
    rows.extend(s.points.iter().map(|(t, y)| PlotRow { series: "points".into(), x: t.to_string(), y: y.to_string() }));
    rows
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> Result<(), PlotError> {
    let mut text = String::from("series,x,y\n");
    for r in rows {
        let series = if r.series.contains([',', '"', '\n']) {
            format!("\"{}\"", r.series.replace('"', "\"\""))
        } else {
            r.series.clone()
        };
        text.push_str(&format!("{series},{},{}\n", r.x, r.y));
    }
    fs::write(path, text).map_err(|source| PlotError::Io { path: path.to_path_buf(), source })
}

pub enum PlotSource<'a> {
    Profile(&'a DailyConsumptionProfile),
    Signature(&'a EnergySignature),
}

pub fn emit_plot_data(source: PlotSource<'_>, path: &Path) -> Result<(), PlotError> {
    let rows = match source {
        PlotSource::Profile(p) => profile_plot_rows(p),
        PlotSource::Signature(s) => signature_plot_rows(s),
    };
    write_plot_csv(path, &rows)
}
