use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::HarnessError;

/// Target success probability of the time-to-solution metric.
pub const TTS_TARGET: f64 = 0.95;

/// Expected iterations to reach a solution with 95% confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtsEstimate {
    /// Fraction of solved repeats.
    pub p: f64,
    /// Mean iterations over solved repeats (0 when none solved).
    pub t: f64,
    /// `None` when no repeat succeeded.
    pub tts: Option<f64>,
}

impl TtsEstimate {
    pub fn from_rate(p: f64, t: f64) -> Self {
        let tts = if p <= 0.0 {
            None
        } else if p >= TTS_TARGET {
            Some(t)
        } else {
            Some(t * (1.0 - TTS_TARGET).ln() / (1.0 - p).ln())
        };
        TtsEstimate { p, t, tts }
    }

    pub fn is_unsolved(&self) -> bool {
        self.tts.is_none()
    }
}

impl std::fmt::Display for TtsEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.tts {
            Some(v) => write!(f, "{v:.3}"),
            None => f.write_str("inf"),
        }
    }
}

/// Success probability and TTS over a set of repeats.
pub fn compute_tts(records: &[RunRecord]) -> Result<TtsEstimate, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let solved: Vec<&RunRecord> = records.iter().filter(|r| r.solved).collect();
    let p = solved.len() as f64 / records.len() as f64;
    let t = if solved.is_empty() {
        0.0
    } else {
        solved.iter().map(|r| r.iterations_used as f64).sum::<f64>() / solved.len() as f64
    };
    Ok(TtsEstimate::from_rate(p, t))
}
