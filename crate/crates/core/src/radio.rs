//! Reception model: nominal disk ranges distorted by a per-direction
//! irregularity table, blocked by obstacles, and dropped by fading.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geometry::{segment_blocked, ObstaclePolygon, Point2D};
use crate::seeds::{rng_for, Stream};

pub const TABLE_BINS: usize = 360;

/// Anchor power levels and environment irregularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    /// Nominal range of each power level, strictly increasing, in meters.
    pub level_ranges: Vec<f64>,
    /// Degree of irregularity, `[0, 1)`.
    #[serde(default)]
    pub doi: f64,
    /// Fraction of anchor stops a sensor misses outright, `[0, 1)`.
    #[serde(default)]
    pub fading_f: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self::two_level(15.0)
    }
}

impl RadioConfig {
    /// Two power levels with ranges `r` and `2r`.
    pub fn two_level(r: f64) -> Self {
        RadioConfig {
            level_ranges: vec![r, 2.0 * r],
            doi: 0.0,
            fading_f: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.level_ranges.is_empty() {
            return Err(ScenarioError::Radio("level_ranges is empty".into()));
        }
        if self.level_ranges.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(ScenarioError::Radio(
                "level ranges must be positive and finite".into(),
            ));
        }
        if self.level_ranges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::Radio(
                "level ranges must be strictly increasing".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.doi) {
            return Err(ScenarioError::Radio(format!("doi {} outside [0, 1)", self.doi)));
        }
        if !(0.0..1.0).contains(&self.fading_f) {
            return Err(ScenarioError::Radio(format!(
                "fading_f {} outside [0, 1)",
                self.fading_f
            )));
        }
        Ok(())
    }

    /// The smallest nominal range, used as the normalizing radio range `r`.
    pub fn base_range(&self) -> f64 {
        self.level_ranges[0]
    }

    pub fn num_levels(&self) -> usize {
        self.level_ranges.len()
    }
}

/// Per-degree range multipliers around one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularRangeTable {
    bins: Vec<f64>,
    doi: f64,
}

impl IrregularRangeTable {
    /// Perfectly isotropic table.
    pub fn isotropic() -> Self {
        IrregularRangeTable {
            bins: vec![1.0; TABLE_BINS],
            doi: 0.0,
        }
    }

    /// Irregularity table from a random stream.
    ///
    /// Start uniform in `[1-doi, 1+doi]`, take a closed random walk whose
    /// steps are at most `doi/10` (the steps sum to zero so bin 359 joins
    /// bin 0 smoothly), then clamp into the range. Clamping is 1-Lipschitz,
    /// so the step bound survives it.
    pub fn from_rng<R: Rng>(rng: &mut R, doi: f64) -> Self {
        if doi == 0.0 {
            return Self::isotropic();
        }
        let (lo, hi) = (1.0 - doi, 1.0 + doi);
        let start = rng.gen_range(lo..=hi);
        let half = doi / 20.0;
        let mut steps: Vec<f64> = (0..TABLE_BINS).map(|_| rng.gen_range(-half..=half)).collect();
        let mean = steps.iter().sum::<f64>() / TABLE_BINS as f64;
        steps.iter_mut().for_each(|s| *s -= mean);
        let mut bins = Vec::with_capacity(TABLE_BINS);
        let mut level = start;
        for step in steps.iter().take(TABLE_BINS) {
            bins.push(level.clamp(lo, hi));
            level += step;
        }
        IrregularRangeTable { bins, doi }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn doi(&self) -> f64 {
        self.doi
    }

    /// Multiplier for a bearing in degrees.
    pub fn multiplier(&self, bearing_deg: f64) -> f64 {
        let idx = (bearing_deg.rem_euclid(360.0).floor() as usize) % TABLE_BINS;
        self.bins[idx]
    }

    pub fn effective_range(&self, tx: Point2D, rx: Point2D, nominal_range: f64) -> f64 {
        if self.doi == 0.0 {
            return nominal_range;
        }
        nominal_range * self.multiplier(tx.bearing_degrees(rx))
    }
}

/// Irregularity table for the anchor at stop `anchor_stop_index`.
pub fn build_range_table(seed: u64, anchor_stop_index: usize, doi: f64) -> IrregularRangeTable {
    let mut rng = rng_for(seed, Stream::StopRangeTable, &[anchor_stop_index as u64]);
    IrregularRangeTable::from_rng(&mut rng, doi)
}

/// Irregularity table for a relaying sensor, keyed by its node id.
pub fn build_relay_range_table(seed: u64, node_id: u32, doi: f64) -> IrregularRangeTable {
    let mut rng = rng_for(seed, Stream::RelayRangeTable, &[node_id as u64]);
    IrregularRangeTable::from_rng(&mut rng, doi)
}

/// Reception decision for one transmission.
///
/// `fading_draw` is a uniform `[0, 1)` value; the transmission is lost when it
/// falls below `fading_f`.
pub fn can_hear(
    tx: Point2D,
    rx: Point2D,
    nominal_range: f64,
    table: &IrregularRangeTable,
    obstacles: &[ObstaclePolygon],
    fading_draw: f64,
    fading_f: f64,
) -> bool {
    fading_draw >= fading_f
        && tx.distance(rx) <= table.effective_range(tx, rx, nominal_range)
        && !segment_blocked(tx, rx, obstacles)
}
