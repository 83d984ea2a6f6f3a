use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::YearlyProfile;

pub const DEFAULT_BIN_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignatureError {
    #[error("no data points")]
    Empty,
    #[error("cold slope undefined: fewer than two distinct temperatures below {balance_point} °C")]
    SlopeUndefined { balance_point: f64 },
    #[error("non-finite value at point {0}")]
    NonFinite(usize),
    #[error("bin width must be positive, got {0}")]
    BadBinWidth(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureBin {
    pub center: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySignature {
    pub family_id: String,
    pub balance_point: f64,
    pub bin_width: f64,
    #[serde(skip)]
    pub points: Vec<(f64, f64)>,
    pub bins: Vec<SignatureBin>,
    pub cold_slope: Option<f64>,
}

impl EnergySignature {
    pub fn slope(&self) -> Result<f64, SignatureError> {
        self.cold_slope.ok_or(SignatureError::SlopeUndefined { balance_point: self.balance_point })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signature serializes")
    }
}

/// Ordinary least-squares slope of y on x; `None` with fewer than two
/// distinct x values.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let distinct = points.iter().any(|p| p.0 != points[0].0);
    (distinct && sxx > 0.0).then(|| sxy / sxx)
}

/// Signature of raw `(temperature, kWh)` pairs.
pub fn signature_from_points(
    family_id: &str,
    points: Vec<(f64, f64)>,
    balance_point: f64,
    bin_width: f64,
) -> Result<EnergySignature, SignatureError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(SignatureError::BadBinWidth(bin_width));
    }
    if points.is_empty() {
        return Err(SignatureError::Empty);
    }
    if let Some(i) = points.iter().position(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(SignatureError::NonFinite(i));
    }
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for &(t, y) in &points {
        let e = acc.entry((t / bin_width).floor() as i64).or_default();
        e.0 += y;
        e.1 += 1;
    }
    let bins = acc
        .into_iter()
        .map(|(k, (sum, count))| SignatureBin { center: (k as f64 + 0.5) * bin_width, mean: sum / count as f64, count })
        .collect();
    let cold: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 < balance_point).collect();
    Ok(EnergySignature {
        family_id: family_id.to_string(),
        balance_point,
        bin_width,
        cold_slope: ols_slope(&cold),
        points,
        bins,
    })
}

/// Pairs each hour's outdoor temperature with its total consumption.
pub fn compute_signature(
    yearly: &YearlyProfile,
    family_id: &str,
    balance_point: f64,
) -> Result<EnergySignature, SignatureError> {
    let points = yearly.rows.iter().map(|r| (r.outdoor_temp.value, r.total.value)).collect();
    signature_from_points(family_id, points, balance_point, DEFAULT_BIN_WIDTH)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComparisonError {
    #[error("bin widths differ: {0} vs {1}")]
    BinWidthMismatch(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinDifference {
    pub center: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_a - mean_b`
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignatureComparison {
    pub a: String,
    pub b: String,
    pub bins: Vec<BinDifference>,
    pub only_in_a: Vec<f64>,
    pub only_in_b: Vec<f64>,
    pub slope_a: Option<f64>,
    pub slope_b: Option<f64>,
    pub slope_difference: Option<f64>,
}

fn bin_key(center: f64, width: f64) -> i64 {
    (center / width - 0.5).round() as i64
}

pub fn compare_signatures(a: &EnergySignature, b: &EnergySignature) -> Result<SignatureComparison, ComparisonError> {
    if a.bin_width != b.bin_width {
        return Err(ComparisonError::BinWidthMismatch(a.bin_width, b.bin_width));
    }
    let w = a.bin_width;
    let bm: BTreeMap<i64, &SignatureBin> = b.bins.iter().map(|x| (bin_key(x.center, w), x)).collect();
    let am: BTreeMap<i64, &SignatureBin> = a.bins.iter().map(|x| (bin_key(x.center, w), x)).collect();
    let bins = am
        .iter()
        .filter_map(|(k, x)| {
            bm.get(k).map(|y| BinDifference {
                center: x.center,
                mean_a: x.mean,
                mean_b: y.mean,
                difference: x.mean - y.mean,
            })
        })
        .collect();
    Ok(SignatureComparison {
        a: a.family_id.clone(),
        b: b.family_id.clone(),
        bins,
        only_in_a: am.iter().filter(|(k, _)| !bm.contains_key(k)).map(|(_, x)| x.center).collect(),
        only_in_b: bm.iter().filter(|(k, _)| !am.contains_key(k)).map(|(_, x)| x.center).collect(),
        slope_a: a.cold_slope,
        slope_b: b.cold_slope,
        slope_difference: a.cold_slope.zip(b.cold_slope).map(|(x, y)| x - y),
    })
}

#[derive(Debug, thiserror::Error)]
pub enum ReferenceError {
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

/// Reads a `timestamp,temp_c,total_kwh[,building_id]` CSV into points per
/// building. Rows without a building id go under `"reference"`.
pub fn read_reference_csv(path: &Path) -> Result<BTreeMap<String, Vec<(f64, f64)>>, ReferenceError> {
    let p = path.display().to_string();
    let err = |message: String| ReferenceError::Format { path: p.clone(), message };
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let header: Vec<String> = r.headers().map_err(|e| err(e.to_string()))?.iter().map(str::to_lowercase).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(t), Some(k)) = (col("temp_c"), col("total_kwh")) else {
        return Err(err("header needs temp_c and total_kwh".into()));
    };
    let b = col("building_id");
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("row {}: bad number in column {}", i + 2, header[c])))
        };
        let id = b.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()).unwrap_or("reference");
        out.entry(id.to_string()).or_default().push((num(t)?, num(k)?));
    }
    Ok(out)
}
