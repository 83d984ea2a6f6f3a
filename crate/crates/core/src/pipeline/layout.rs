//! Paths of every artifact under a run's output directory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::domain::{Country, DayType, Season, StageId};
use crate::household::profile_file_name;

#[derive(Debug, Clone)]
pub struct RunLayout {
    root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn families(&self, c: Country) -> PathBuf {
        self.root.join("families").join(format!("{}.json", c.slug()))
    }

    pub fn weather_dir(&self, c: Country) -> PathBuf {
        self.root.join("weather").join(c.slug())
    }

    pub fn ranges(&self, c: Country) -> PathBuf {
        self.weather_dir(c).join("ranges.txt")
    }

    pub fn weather_day(&self, c: Country, s: Season) -> PathBuf {
        self.weather_dir(c).join(format!("{}.txt", s.name().to_lowercase()))
    }

    pub fn weather_csv(&self, c: Country) -> PathBuf {
        self.root.join("weather").join(format!("{}.csv", c.slug()))
    }

    pub fn family_dir(&self, c: Country, family_id: &str) -> PathBuf {
        self.root.join("profiles").join(c.slug()).join(family_id)
    }

    pub fn profile(&self, c: Country, family_id: &str, s: Season, d: DayType) -> PathBuf {
        self.family_dir(c, family_id).join(profile_file_name(s, d))
    }

    pub fn yearly(&self, c: Country, family_id: &str) -> PathBuf {
        self.root.join("yearly").join(c.slug()).join(format!("{family_id}.csv"))
    }

    pub fn signature(&self, c: Country, family_id: &str) -> PathBuf {
        self.root.join("yearly").join(c.slug()).join(format!("{family_id}.signature.json"))
    }

    /// Accepted raw response of a stage item.
    pub fn raw(&self, stage: StageId, item: &str) -> PathBuf {
        self.root.join("raw").join(stage.slug()).join(format!("{item}.txt"))
    }

    pub fn rejected(&self, stage: StageId, item: &str, attempt: u32) -> PathBuf {
        self.root.join("raw").join(stage.slug()).join(format!("{item}.rejected{attempt}.txt"))
    }

    pub fn exchanges(&self) -> PathBuf {
        self.root.join("exchanges.jsonl")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(&tmp, path)
}
