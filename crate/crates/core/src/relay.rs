//! Boundary-node contention for relaying anchor beacons into radio shadows.
//!
//! Every boundary node that hears a stop arms a backoff timer
//!
//! ```text
//! δ = (α · used/initial + β / neighbors) · max_delay
//! ```
//!
//! The first timer to expire rebroadcasts; candidates that hear it cancel.
//! Candidates out of its reach keep waiting and may relay in a later round.

use serde::{Deserialize, Serialize};

use crate::constraint::AnnulusConstraint;
use crate::error::{ConstraintError, ScenarioError};
use crate::geometry::{segment_blocked, ObstaclePolygon, Point2D};
use crate::scenario::SensorNode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentionConfig {
    /// Weight of the energy term.
    pub alpha: f64,
    /// Weight of the neighbor term; `alpha + beta == 1`.
    pub beta: f64,
    /// Seconds.
    pub max_delay: f64,
    /// Rebroadcast radius of a relay, meters.
    pub relay_range: f64,
    /// Boundary flagging distance; the smallest level range when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_distance: Option<f64>,
}

impl Default for ContentionConfig {
    fn default() -> Self {
        ContentionConfig {
            alpha: 0.5,
            beta: 0.5,
            max_delay: 0.1,
            relay_range: 15.0,
            boundary_distance: None,
        }
    }
}

impl ContentionConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |m: String| Err(ScenarioError::Contention(m));
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return err(format!(
                "weights must be non-negative: alpha={} beta={}",
                self.alpha, self.beta
            ));
        }
        // decimal inputs such as 0.3 + 0.7 miss 1.0 by an ulp
        if (self.alpha + self.beta - 1.0).abs() > 1e-12 {
            return err(format!(
                "alpha + beta must equal 1, got {}",
                self.alpha + self.beta
            ));
        }
        if !(self.max_delay.is_finite() && self.max_delay > 0.0) {
            return err(format!("max_delay must be positive, got {}", self.max_delay));
        }
        if !(self.relay_range.is_finite() && self.relay_range > 0.0) {
            return err(format!("relay_range must be positive, got {}", self.relay_range));
        }
        if let Some(d) = self.boundary_distance {
            if !(d.is_finite() && d > 0.0) {
                return err(format!("boundary_distance must be positive, got {d}"));
            }
        }
        Ok(())
    }
}

/// Backoff timer in seconds, or `None` for a node that cannot contend
/// (no neighbors or no energy budget).
pub fn backoff_delay(node: &SensorNode, cfg: &ContentionConfig) -> Option<f64> {
    if node.num_neighbors == 0 || node.initial_energy <= 0.0 {
        return None;
    }
    let energy = node.used_energy / node.initial_energy;
    Some((cfg.alpha * energy + cfg.beta / node.num_neighbors as f64) * cfg.max_delay)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayEvent {
    pub anchor_stop_index: usize,
    pub winner_node_id: u32,
    pub delay: f64,
    pub suppressed_node_ids: Vec<u32>,
}

/// Eligible candidates in firing order: by delay, then id.
fn firing_order<'a>(candidates: &'a [SensorNode], cfg: &ContentionConfig) -> Vec<(f64, &'a SensorNode)> {
    let mut v: Vec<_> = candidates
        .iter()
        .filter_map(|n| backoff_delay(n, cfg).map(|d| (d, n)))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    v
}

fn in_reach(a: &SensorNode, b: &SensorNode, cfg: &ContentionConfig, obstacles: &[ObstaclePolygon]) -> bool {
    a.position.distance(b.position) <= cfg.relay_range && !segment_blocked(a.position, b.position, obstacles)
}

/// All contention rounds for one stop, in firing order.
pub fn contention_rounds(
    anchor_stop_index: usize,
    candidates: &[SensorNode],
    cfg: &ContentionConfig,
    obstacles: &[ObstaclePolygon],
) -> Vec<RelayEvent> {
    let mut pending = firing_order(candidates, cfg);
    let mut events = Vec::new();
    while !pending.is_empty() {
        let (delay, winner) = pending.remove(0);
        let (suppressed, rest): (Vec<_>, Vec<_>) = pending
            .into_iter()
            .partition(|(_, n)| in_reach(winner, n, cfg, obstacles));
        events.push(RelayEvent {
            anchor_stop_index,
            winner_node_id: winner.id,
            delay,
            suppressed_node_ids: suppressed.iter().map(|(_, n)| n.id).collect(),
        });
        pending = rest;
    }
    events
}

/// First contention round for one stop; `None` when nobody can contend.
pub fn run_contention(
    anchor_stop_index: usize,
    candidates: &[SensorNode],
    cfg: &ContentionConfig,
    obstacles: &[ObstaclePolygon],
) -> Option<RelayEvent> {
    contention_rounds(anchor_stop_index, candidates, cfg, obstacles)
        .into_iter()
        .next()
}

/// Annulus for a sensor reached only through a relay: the relay's own upper
/// bound widened by the relay radius.
pub fn relayed_constraint(
    stop: Point2D,
    direct_lower: f64,
    level_upper: f64,
    cfg: &ContentionConfig,
) -> Result<AnnulusConstraint, ConstraintError> {
    if !(cfg.relay_range.is_finite() && cfg.relay_range > 0.0) {
        return Err(ConstraintError::RelayRange(cfg.relay_range));
    }
    AnnulusConstraint::two_sided(stop, direct_lower, level_upper + cfg.relay_range).map(|c| c.relayed())
}
