use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::domain::StageId;
use crate::gateway::{duration_ms, ChatExchange};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: StageId,
    pub n_responses: usize,
    #[serde(rename = "avg_time_ms", with = "duration_ms")]
    pub avg_time: Duration,
    #[serde(rename = "total_duration_ms", with = "duration_ms")]
    pub total_duration: Duration,
    pub total_prompt_tokens: u64,
    pub total_completion_tokens: u64,
}

/// Groups exchanges by stage. Exchanges `stage_of` cannot place are
/// skipped.
pub fn summarize_run<F>(log: &[ChatExchange], stage_of: F) -> Vec<StageSummary>
where
    F: Fn(&ChatExchange) -> Option<StageId>,
{
    let mut groups: BTreeMap<StageId, Vec<&ChatExchange>> = BTreeMap::new();
    for ex in log {
        match stage_of(ex) {
            Some(s) => groups.entry(s).or_default().push(ex),
            None => log::warn!("exchange at {} matches no stage", ex.timestamp),
        }
    }
    groups
        .into_iter()
        .map(|(stage, exs)| {
            let total: Duration = exs.iter().map(|e| e.latency).sum();
            StageSummary {
                stage,
                n_responses: exs.len(),
                avg_time: total / exs.len() as u32,
                total_duration: total,
                total_prompt_tokens: exs.iter().map(|e| e.prompt_tokens).sum(),
                total_completion_tokens: exs.iter().map(|e| e.completion_tokens).sum(),
            }
        })
        .collect()
}

/// `H:MM:SS`, rounded to the nearest second.
pub fn format_hms(d: Duration) -> String {
    let s = d.as_secs_f64().round() as u64;
    format!("{}:{:02}:{:02}", s / 3600, s / 60 % 60, s % 60)
}

/// Requests a full run issues per stage, without retries: one per country
/// for Stages 1-2, one per season for Stage 3 and one per family, season
/// and day type for Stage 4.
pub fn planned_requests(stage: StageId, countries: usize, families: usize, seasons: usize, day_types: usize) -> usize {
    match stage {
        StageId::FamilyTypes | StageId::WeatherRanges => countries,
        StageId::WeatherData => countries * seasons,
        StageId::EnergyPatterns => countries * families * seasons * day_types,
    }
}

pub fn render_summary_table(rows: &[StageSummary]) -> String {
    let mut out = String::from("Stage            Responses  Avg/Response  Total Duration  Prompt Tokens  Completion Tokens\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:>9}  {:>12}  {:>14}  {:>13}  {:>17}",
            r.stage.name(),
            r.n_responses,
            format_hms(r.avg_time),
            format_hms(r.total_duration),
            r.total_prompt_tokens,
            r.total_completion_tokens
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ChatMessage;
    use chrono::{DateTime, Utc};

    fn ex(prompt: u64, completion: u64, ms: u64) -> ChatExchange {
        ChatExchange {
            request_messages: vec![ChatMessage::system("s")],
            response_text: String::new(),
            prompt_tokens: prompt,
            completion_tokens: completion,
            latency: Duration::from_millis(ms),
            model_id: "m".into(),
            temperature: 0.7,
            max_tokens: 1,
            attempt: 0,
            timestamp: DateTime::<Utc>::from_timestamp(0, 0).unwrap(),
        }
    }

    #[test]
    fn empty_log() {
        assert!(summarize_run(&[], |_| Some(StageId::FamilyTypes)).is_empty());
    }

    #[test]
    fn one_second_each() {
        let log: Vec<_> = (0..240).map(|_| ex(1, 1, 1000)).collect();
        let s = summarize_run(&log, |_| Some(StageId::EnergyPatterns));
        assert_eq!(s[0].total_duration, Duration::from_secs(240));
        assert_eq!(s[0].avg_time, Duration::from_secs(1));
        assert_eq!(format_hms(s[0].total_duration), "0:04:00");
    }

    #[test]
    fn hms() {
        assert_eq!(format_hms(Duration::from_secs(193)), "0:03:13");
        assert_eq!(format_hms(Duration::from_millis(32_166)), "0:00:32");
        assert_eq!(format_hms(Duration::from_secs(8 * 3600 + 10 * 60 + 36)), "8:10:36");
    }

    #[test]
    fn request_law() {
        assert_eq!(planned_requests(StageId::FamilyTypes, 6, 5, 4, 2), 6);
        assert_eq!(planned_requests(StageId::WeatherData, 6, 5, 4, 2), 24);
        assert_eq!(planned_requests(StageId::EnergyPatterns, 6, 5, 4, 2), 240);
    }
}
