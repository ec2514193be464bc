//! Mobile anchor trajectory, multi-power beaconing and annulus extraction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::AnnulusConstraint;
use crate::error::ScenarioError;
use crate::geometry::Point2D;
use crate::radio::{build_range_table, can_hear, RadioConfig};
use crate::relay::{relayed_constraint, ContentionConfig};
use crate::scenario::{Field, ScenarioConfig};
use crate::seeds::{rng_for, uniform_draw, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryPattern {
    /// Serpentine rows over the whole field.
    GridSweep,
    /// Straight legs between random waypoints, one stop every `step` meters.
    RandomWaypoint,
    /// Stops listed in `points`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub pattern: TrajectoryPattern,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Point2D>,
    #[serde(default = "default_waypoints")]
    pub waypoints: usize,
}

fn default_step() -> f64 {
    15.0
}

fn default_waypoints() -> usize {
    10
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig::grid(default_step())
    }
}

impl TrajectoryConfig {
    pub fn grid(step: f64) -> Self {
        TrajectoryConfig {
            pattern: TrajectoryPattern::GridSweep,
            step,
            points: Vec::new(),
            waypoints: default_waypoints(),
        }
    }

    pub fn explicit(points: Vec<Point2D>) -> Self {
        TrajectoryConfig {
            pattern: TrajectoryPattern::Explicit,
            points,
            ..Self::default()
        }
    }

    pub fn validate(&self, field: &Field) -> Result<(), ScenarioError> {
        match self.pattern {
            TrajectoryPattern::Explicit => {
                if self.points.is_empty() {
                    return Err(ScenarioError::Trajectory(
                        "explicit pattern without points".into(),
                    ));
                }
                if let Some(p) = self
                    .points
                    .iter()
                    .find(|p| !p.is_finite() || !field.contains(**p))
                {
                    return Err(ScenarioError::Trajectory(format!(
                        "stop {p} is outside the field"
                    )));
                }
            }
            _ => {
                if !(self.step.is_finite() && self.step > 0.0) {
                    return Err(ScenarioError::Trajectory(format!(
                        "step must be positive, got {}",
                        self.step
                    )));
                }
                if self.pattern == TrajectoryPattern::RandomWaypoint && self.waypoints < 1 {
                    return Err(ScenarioError::Trajectory(
                        "random_waypoint needs waypoints >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Multiples of `step` in `[0, extent]`, closed with `extent` itself.
fn axis_stops(extent: f64, step: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..)
        .map(|k| k as f64 * step)
        .take_while(|&x| x <= extent + 1e-9 * extent.max(1.0))
        .map(|x| x.min(extent))
        .collect();
    if v.last()
        .is_some_and(|&last| last < extent - 1e-9 * extent.max(1.0))
    {
        v.push(extent);
    }
    v
}

/// Anchor stops for a trajectory.
pub fn generate_trajectory(
    config: &TrajectoryConfig,
    field: &Field,
    seed: u64,
) -> Result<Vec<Point2D>, ScenarioError> {
    config.validate(field)?;
    let stops = match config.pattern {
        TrajectoryPattern::Explicit => config.points.clone(),
        TrajectoryPattern::GridSweep => {
            let xs = axis_stops(field.width, config.step);
            let ys = axis_stops(field.height, config.step);
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for (row, &y) in ys.iter().enumerate() {
                if row % 2 == 0 {
                    out.extend(xs.iter().map(|&x| Point2D::new(x, y)));
                } else {
                    out.extend(xs.iter().rev().map(|&x| Point2D::new(x, y)));
                }
            }
            out
        }
        TrajectoryPattern::RandomWaypoint => {
            let mut rng = rng_for(seed, Stream::Trajectory, &[]);
            let mut random_point =
                || Point2D::new(rng.gen::<f64>() * field.width, rng.gen::<f64>() * field.height);
            let mut here = random_point();
            let mut out = vec![here];
            // distance already travelled since the last stop
            let mut carried = 0.0;
            for _ in 0..config.waypoints {
                let target = random_point();
                let leg = here.distance(target);
                let mut along = config.step - carried;
                while along <= leg {
                    out.push(here + (target - here) * (along / leg));
                    along += config.step;
                }
                carried = leg - (along - config.step);
                here = target;
            }
            out
        }
    };
    Ok(stops)
}

/// Policy switches for constraint extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Emit `lower = largest range` for stops that were never heard.
    #[serde(default)]
    pub lower_only: bool,
    /// Give relayed constraints the direct-reception lower bound instead of zero.
    #[serde(default)]
    pub relay_lower_from_direct: bool,
}

/// A relayed copy of a stop's beacon that reached the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayedReception {
    pub relay_node_id: u32,
    /// The relay's own upper bound for the stop (smallest level it heard).
    pub level_upper: f64,
    pub relay_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopObservation {
    pub stop_index: usize,
    pub position: Point2D,
    /// Power-level indices heard directly, ascending, 0-based.
    pub heard: Vec<usize>,
    pub relayed: Vec<RelayedReception>,
}

/// Everything one sensor observed during a pass, one entry per stop.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationLog {
    pub node_id: u32,
    pub stops: Vec<StopObservation>,
}

impl ObservationLog {
    /// Line-oriented dump, levels printed 1-based.
    pub fn dump(&self, radio: &RadioConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "node {}", self.node_id);
        for s in &self.stops {
            if s.heard.is_empty() && s.relayed.is_empty() {
                continue;
            }
            let heard: Vec<String> = s
                .heard
                .iter()
                .map(|&l| format!("L{}({})", l + 1, radio.level_ranges[l]))
                .collect();
            let _ = write!(
                out,
                "  stop {} at {} heard=[{}]",
                s.stop_index,
                s.position,
                heard.join(",")
            );
            for r in &s.relayed {
                let _ = write!(
                    out,
                    " relay=node{}(upper {} + {})",
                    r.relay_node_id, r.level_upper, r.relay_range
                );
            }
            out.push('\n');
        }
        out
    }
}

/// Direct beaconing from every stop to every node.
///
/// One fading draw per (stop, node) pair gates all power levels together.
pub fn simulate_beaconing(scenario: &ScenarioConfig, stops: &[Point2D]) -> BTreeMap<u32, ObservationLog> {
    let radio = &scenario.radio;
    let tables: Vec<_> = (0..stops.len())
        .map(|i| build_range_table(scenario.seed, i, radio.doi))
        .collect();
    scenario
        .nodes
        .iter()
        .map(|node| {
            let observations = stops
                .iter()
                .enumerate()
                .map(|(i, &stop)| {
                    let draw = uniform_draw(scenario.seed, Stream::StopFading, &[i as u64, node.id as u64]);
                    let heard = radio
                        .level_ranges
                        .iter()
                        .enumerate()
                        .filter(|(_, &range)| {
                            can_hear(
                                stop,
                                node.position,
                                range,
                                &tables[i],
                                &scenario.obstacles,
                                draw,
                                radio.fading_f,
                            )
                        })
                        .map(|(level, _)| level)
                        .collect();
                    StopObservation {
                        stop_index: i,
                        position: stop,
                        heard,
                        relayed: Vec::new(),
                    }
                })
                .collect();
            (
                node.id,
                ObservationLog {
                    node_id: node.id,
                    stops: observations,
                },
            )
        })
        .collect()
}

/// Largest level range strictly below `upper`, or 0.
fn largest_unheard_below(radio: &RadioConfig, heard: &[usize], upper: f64) -> f64 {
    radio
        .level_ranges
        .iter()
        .enumerate()
        .filter(|(l, &r)| r < upper && !heard.contains(l))
        .map(|(_, &r)| r)
        .fold(0.0, f64::max)
}

/// The tightest consistent annulus for each stop.
///
/// Upper bound: the smallest heard range. Lower bound: the largest unheard
/// range below it, else 0. This never produces an empty annulus, even for
/// inverted patterns (small level heard, larger one missed) caused by
/// irregularity. Stops heard only through relays get one relayed constraint
/// from the tightest relay.
pub fn extract_constraints(
    log: &ObservationLog,
    radio: &RadioConfig,
    extraction: &ExtractionConfig,
) -> Vec<AnnulusConstraint> {
    let mut out = Vec::new();
    for s in &log.stops {
        if let Some(upper) = s.heard.iter().map(|&l| radio.level_ranges[l]).reduce(f64::min) {
            let lower = largest_unheard_below(radio, &s.heard, upper);
            out.push(
                AnnulusConstraint::two_sided(s.position, lower, upper)
                    .expect("largest unheard range lies below the upper bound"),
            );
        } else if let Some(best) = s
            .relayed
            .iter()
            .min_by(|a, b| (a.level_upper + a.relay_range).total_cmp(&(b.level_upper + b.relay_range)))
        {
            let upper = best.level_upper + best.relay_range;
            let lower = if extraction.relay_lower_from_direct {
                largest_unheard_below(radio, &[], upper)
            } else {
                0.0
            };
            let cfg = ContentionConfig {
                relay_range: best.relay_range,
                ..ContentionConfig::default()
            };
            if let Ok(c) = relayed_constraint(s.position, lower, best.level_upper, &cfg) {
                out.push(c);
            }
        } else if extraction.lower_only {
            let lower = *radio.level_ranges.last().expect("validated radio has levels");
            out.push(AnnulusConstraint::lower_only(s.position, lower).expect("ranges are positive"));
        }
    }
    out
}
