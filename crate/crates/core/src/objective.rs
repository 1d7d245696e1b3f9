//! Objectives over triangulations, flip rewards and the relative-gap metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GapError;
use crate::geom::PointConfig;
use crate::tri::Triangulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinSimplices,
    MinDiameter,
    MinWeight,
    /// `1` when the triangulation is fine and regular, else `0`.
    FrstReach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Objective {
    pub const ALL: [Objective; 4] =
        [Objective::MinSimplices, Objective::MinDiameter, Objective::MinWeight, Objective::FrstReach];

    pub fn name(self) -> &'static str {
        match self {
            Objective::MinSimplices => "min_simplices",
            Objective::MinDiameter => "min_diameter",
            Objective::MinWeight => "min_weight",
            Objective::FrstReach => "frst_reach",
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            Objective::FrstReach => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }

    pub fn evaluate(self, tri: &Triangulation, config: &PointConfig) -> f64 {
        match self {
            Objective::MinSimplices => tri.len() as f64,
            Objective::MinDiameter => tri.dual_diameter() as f64,
            Objective::MinWeight => total_edge_length(tri, config),
            Objective::FrstReach => f64::from(u8::from(tri.is_fine(config) && tri.is_regular(config))),
        }
    }

    /// The value in minimization form: `f` or `−f`.
    pub fn cost(self, value: f64) -> f64 {
        match self.sense() {
            Sense::Minimize => value,
            Sense::Maximize => -value,
        }
    }

    /// Improvement from `before` to `after`, sign-adjusted for the sense.
    pub fn reward(self, before: f64, after: f64) -> f64 {
        self.cost(before) - self.cost(after)
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.cost(a) < self.cost(b)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Objective::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            format!("unknown objective `{s}` (expected one of min_simplices, min_diameter, min_weight, frst_reach)")
        })
    }
}

/// Sum of Euclidean lengths over the 1-skeleton, in sorted edge order.
pub fn total_edge_length(tri: &Triangulation, config: &PointConfig) -> f64 {
    tri.edges()
        .into_iter()
        .map(|(a, b)| {
            let (p, q) = (config.float_point(a), config.float_point(b));
            p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub gaps: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single instance.
    pub std_err: f64,
}

/// Per-instance `(best − reference) / reference` with mean and standard error.
pub fn relative_gap(best: &[f64], reference: &[f64]) -> Result<GapReport, GapError> {
    if best.len() != reference.len() {
        return Err(GapError::LengthMismatch { best: best.len(), reference: reference.len() });
    }
    if let Some((index, &value)) = reference.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
        return Err(GapError::NonPositiveReference { index, value });
    }
    let gaps: Vec<f64> = best.iter().zip(reference).map(|(b, r)| (b - r) / r).collect();
    let (mean, std_err) = mean_and_stderr(&gaps);
    Ok(GapReport { gaps, mean, std_err })
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
