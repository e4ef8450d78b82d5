//! Locomotion metrics from tracked centre-of-mass trajectories, and
//! per-design summary tables.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ContactType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("trial {trial:?} has {count} samples; at least 2 are required")]
    TooFewSamples { trial: String, count: usize },
    #[error("trial {trial:?}: timestamp at sample {index} does not increase")]
    NonIncreasingTime { trial: String, index: usize },
    #[error("trial {trial:?}: non-finite value at sample {index}")]
    NonFinite { trial: String, index: usize },
    #[error("trial {trial:?}: {headings} headings for {samples} samples")]
    HeadingLength { trial: String, headings: usize, samples: usize },
    #[error("no trials to summarize")]
    NoTrials,
    #[error("design {0:?} must have at least one active cell")]
    NoActiveCells(String),
    #[error("no designs to report")]
    NoDesigns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Seconds.
    pub t: f64,
    /// Centimetres.
    pub x: f64,
    pub y: f64,
}

/// One tracked trial: strictly increasing timestamps, at least two samples,
/// and optionally one body heading (radians) per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    trial_id: String,
    samples: Vec<Sample>,
    heading: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(trial_id: impl Into<String>, samples: Vec<Sample>, heading: Option<Vec<f64>>) -> Result<Self, AnalyticsError> {
        let trial = trial_id.into();
        if samples.len() < 2 {
            return Err(AnalyticsError::TooFewSamples { trial, count: samples.len() });
        }
        for (index, s) in samples.iter().enumerate() {
            let finite = s.t.is_finite() && s.x.is_finite() && s.y.is_finite();
            let heading_finite = heading.as_ref().is_none_or(|h| h.get(index).is_none_or(|v| v.is_finite()));
            if !finite || !heading_finite {
                return Err(AnalyticsError::NonFinite { trial, index });
            }
            if index > 0 && s.t <= samples[index - 1].t {
                return Err(AnalyticsError::NonIncreasingTime { trial, index });
            }
        }
        if let Some(h) = &heading {
            if h.len() != samples.len() {
                return Err(AnalyticsError::HeadingLength { trial, headings: h.len(), samples: samples.len() });
            }
        }
        Ok(Trajectory { trial_id: trial, samples, heading })
    }

    pub fn trial_id(&self) -> &str {
        &self.trial_id
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn heading(&self) -> Option<&[f64]> {
        self.heading.as_deref()
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }
}

fn dist(a: &Sample, b: &Sample) -> f64 {
    (b.x - a.x).hypot(b.y - a.y)
}

/// Sum of straight-line distances between consecutive samples.
pub fn path_length(tr: &Trajectory) -> f64 {
    tr.samples.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Distance between the first and last samples.
pub fn net_displacement(tr: &Trajectory) -> f64 {
    dist(&tr.samples[0], &tr.samples[tr.samples.len() - 1])
}

/// Turning sense in the x–y plane with y pointing up: counter-clockwise is
/// a positive heading change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    #[serde(rename = "CW")]
    Cw,
    #[serde(rename = "CCW")]
    Ccw,
    Indeterminate,
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rotation::Cw => "CW",
            Rotation::Ccw => "CCW",
            Rotation::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationParams {
    /// Net heading change (radians) needed to call a direction.
    pub theta_min: f64,
    /// Steps shorter than this (cm) carry no usable heading.
    pub min_step: f64,
}

impl Default for RotationParams {
    fn default() -> Self {
        RotationParams { theta_min: PI, min_step: 0.05 }
    }
}

/// Wraps an angle into `(−π, π]`.
fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Total signed heading change. Uses recorded headings when present,
/// otherwise the direction of motion between samples at least
/// `min_step` apart. `None` when fewer than three samples are usable.
pub fn total_turning(tr: &Trajectory, params: &RotationParams) -> Option<f64> {
    let headings: Vec<f64> = match &tr.heading {
        Some(h) => h.clone(),
        None => {
            let mut out = Vec::new();
            let mut anchor = tr.samples[0];
            for s in &tr.samples[1..] {
                if dist(&anchor, s) >= params.min_step {
                    out.push((s.y - anchor.y).atan2(s.x - anchor.x));
                    anchor = *s;
                }
            }
            out
        }
    };
    // Velocity headings need one more sample than headings.
    let usable = if tr.heading.is_some() { headings.len() } else { headings.len() + 1 };
    if usable < 3 {
        return None;
    }
    Some(headings.windows(2).map(|w| wrap(w[1] - w[0])).sum())
}

pub fn rotation_direction(tr: &Trajectory) -> Rotation {
    rotation_direction_with(tr, &RotationParams::default())
}

pub fn rotation_direction_with(tr: &Trajectory, params: &RotationParams) -> Rotation {
    match total_turning(tr, params) {
        Some(s) if s > params.theta_min => Rotation::Ccw,
        Some(s) if s < -params.theta_min => Rotation::Cw,
        _ => Rotation::Indeterminate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub distance: f64,
    pub net_displacement: f64,
    pub rotation: Rotation,
    pub duration: f64,
}

pub fn trial_stats(tr: &Trajectory, params: &RotationParams) -> TrialStats {
    TrialStats {
        distance: path_length(tr),
        net_displacement: net_displacement(tr),
        rotation: rotation_direction_with(tr, params),
        duration: tr.duration(),
    }
}

/// Per-trial statistics, computed in parallel, in input order.
pub fn analyze_trials(trials: &[Trajectory], params: &RotationParams) -> Vec<TrialStats> {
    trials.par_iter().map(|t| trial_stats(t, params)).collect()
}

/// Morphological description of a design, as given by the experimenter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMeta {
    pub name: String,
    pub passive: u32,
    pub active: u32,
    pub body_length_cm: f64,
    pub body_weight_g: f64,
    pub contact: ContactType,
}

/// The four tracked designs A–D.
pub fn reference_designs() -> [DesignMeta; 4] {
    let d = |name: &str, passive, active, body_length_cm, body_weight_g, contact| DesignMeta {
        name: name.to_string(),
        passive,
        active,
        body_length_cm,
        body_weight_g,
        contact,
    };
    [
        d("Design A", 2, 1, 9.5, 77.0, ContactType::Point),
        d("Design B", 3, 1, 11.5, 98.0, ContactType::Edge),
        d("Design C", 5, 2, 15.0, 175.0, ContactType::Edge),
        d("Design D", 7, 3, 21.0, 252.0, ContactType::Face),
    ]
}

/// Mean with sample standard deviation (divisor N − 1); the deviation is
/// absent for a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: Option<f64>,
}

impl MeanSd {
    /// Two-pass computation. Panics on an empty slice.
    pub fn of(values: &[f64]) -> MeanSd {
        assert!(!values.is_empty(), "mean of no values");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.len() > 1)
            .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        MeanSd { mean, sd }
    }
}

/// Whole-number rendering: `126 +/- 34 SD`, or `126` without a deviation.
impl fmt::Display for MeanSd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sd {
            Some(sd) => write!(f, "{:.0} +/- {:.0} SD", self.mean, sd),
            None => write!(f, "{:.0}", self.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub meta: DesignMeta,
    pub ratio: f64,
    pub distance: MeanSd,
    pub net_displacement: MeanSd,
    pub trials: usize,
}

/// `passive : active` with at most two decimals and trailing zeros removed,
/// e.g. `2 to 1`, `2.5 to 1`, `2.33 to 1`.
pub fn format_ratio(ratio: f64) -> String {
    let s = format!("{ratio:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s} to 1")
}

pub fn summarize(trials: &[TrialStats], meta: &DesignMeta) -> Result<DesignSummary, AnalyticsError> {
    if trials.is_empty() {
        return Err(AnalyticsError::NoTrials);
    }
    if meta.active == 0 {
        return Err(AnalyticsError::NoActiveCells(meta.name.clone()));
    }
    let distance: Vec<f64> = trials.iter().map(|t| t.distance).collect();
    let net: Vec<f64> = trials.iter().map(|t| t.net_displacement).collect();
    Ok(DesignSummary {
        meta: meta.clone(),
        ratio: f64::from(meta.passive) / f64::from(meta.active),
        distance: MeanSd::of(&distance),
        net_displacement: MeanSd::of(&net),
        trials: trials.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

pub const ROW_LABELS: [&str; 9] = [
    "No. of passive cells",
    "No. of active cells",
    "Ratio of passive to active",
    "Body length (cm)",
    "Body weight (g)",
    "Type of surface contacts",
    "Avg. distance traveled (cm)",
    "Avg. net displacement (cm)",
    "No. of trials",
];

fn column(s: &DesignSummary) -> [String; 9] {
    [
        s.meta.passive.to_string(),
        s.meta.active.to_string(),
        format_ratio(s.ratio),
        s.meta.body_length_cm.to_string(),
        s.meta.body_weight_g.to_string(),
        s.meta.contact.to_string(),
        s.distance.to_string(),
        s.net_displacement.to_string(),
        s.trials.to_string(),
    ]
}

/// One row per characteristic, one column per design.
pub fn report_table(summaries: &[DesignSummary], format: TableFormat) -> Result<String, AnalyticsError> {
    if summaries.is_empty() {
        return Err(AnalyticsError::NoDesigns);
    }
    let columns: Vec<[String; 9]> = summaries.iter().map(column).collect();
    let header: Vec<&str> = std::iter::once("").chain(summaries.iter().map(|s| s.meta.name.as_str())).collect();
    let rows = ROW_LABELS.iter().enumerate().map(|(i, label)| {
        std::iter::once(label.to_string()).chain(columns.iter().map(|c| c[i].clone())).collect::<Vec<_>>()
    });
    match format {
        TableFormat::Markdown => {
            let mut out = format!("| {} |\n", header.join(" | "));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
            Ok(out)
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory write");
            for row in rows {
                w.write_record(&row).expect("in-memory write");
            }
            Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8"))
        }
    }
}
