//! End-to-end trials: deployment, beaconing, relaying, estimation, metrics.

mod baseline;
mod metrics;
mod sweep;

pub use baseline::{baseline_estimate, BASELINE_GRID};
pub use metrics::{normalized_error, paired_differences, Moments};
pub use sweep::{
    run_sweep, ExperimentConfig, SummaryStats, SweepAxes, SweepOutput, SweepPoint, SweepPointResult,
    SCATTER_HEADER, SUMMARY_HEADER,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beaconing::{
    extract_constraints, generate_trajectory, simulate_beaconing, ExtractionConfig, ObservationLog,
    RelayedReception, TrajectoryConfig,
};
use crate::constraint::AnnulusConstraint;
use crate::error::{Result, ScenarioError};
use crate::geometry::{ObstaclePolygon, Point2D};
use crate::radio::{build_relay_range_table, can_hear, RadioConfig};
use crate::relay::{contention_rounds, ContentionConfig, RelayEvent};
use crate::scenario::{auto_flag_boundary, neighbor_counts, Field, ScenarioConfig, SensorNode};
use crate::seeds::{rng_for, uniform_draw, Stream};
use crate::solver::{estimate_position, SolveStatus, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Convex,
    Baseline,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Convex => "convex",
            Estimator::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "convex" => Ok(Estimator::Convex),
            "baseline" => Ok(Estimator::Baseline),
            other => Err(format!("unknown estimator `{other}` (convex|baseline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub relay_on: bool,
    pub estimator: Estimator,
    pub solver: SolverConfig,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            relay_on: true,
            estimator: Estimator::Convex,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Solved(SolveStatus),
    Baseline,
    NotLocalizable,
}

impl NodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeStatus::Solved(s) => s.as_str(),
            NodeStatus::Baseline => "baseline",
            NodeStatus::NotLocalizable => "not_localizable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutcome {
    pub id: u32,
    pub truth: Point2D,
    pub estimate: Option<Point2D>,
    pub status: NodeStatus,
    pub constraint_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub nodes: Vec<NodeOutcome>,
    /// Mean error over localized nodes divided by the smallest level range.
    pub normalized_error: Option<f64>,
    pub localized_fraction: f64,
    pub mean_constraint_count: f64,
    pub relay_event_count: usize,
    pub runtime: Duration,
}

/// Intermediate products of a trial, for debugging dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub stops: Vec<Point2D>,
    pub logs: BTreeMap<u32, ObservationLog>,
    pub relay_events: Vec<RelayEvent>,
    pub constraints: BTreeMap<u32, Vec<AnnulusConstraint>>,
}

impl TrialTrace {
    pub fn dump(&self, radio: &RadioConfig) -> String {
        let mut out = String::new();
        for (i, s) in self.stops.iter().enumerate() {
            out.push_str(&format!("stop {i} {s}\n"));
        }
        for e in &self.relay_events {
            out.push_str(&format!(
                "relay stop={} winner={} delay={:.6}s suppressed={:?}\n",
                e.anchor_stop_index, e.winner_node_id, e.delay, e.suppressed_node_ids
            ));
        }
        for log in self.logs.values() {
            out.push_str(&log.dump(radio));
            for c in self.constraints.get(&log.node_id).into_iter().flatten() {
                let tag = if c.via_relay() { " (relay)" } else { "" };
                out.push_str(&format!("  constraint {c}{tag}\n"));
            }
        }
        out
    }
}

/// Relay rounds for every stop; relayed receptions are appended to the logs.
fn apply_relays(
    scenario: &ScenarioConfig,
    nodes: &[SensorNode],
    stops: &[Point2D],
    logs: &mut BTreeMap<u32, ObservationLog>,
) -> Vec<RelayEvent> {
    let radio = &scenario.radio;
    let cfg = &scenario.contention;
    let mut events = Vec::new();
    for i in 0..stops.len() {
        let candidates: Vec<SensorNode> = nodes
            .iter()
            .filter(|n| n.is_boundary && !logs[&n.id].stops[i].heard.is_empty())
            .cloned()
            .collect();
        for event in contention_rounds(i, &candidates, cfg, &scenario.obstacles) {
            let relay = candidates
                .iter()
                .find(|n| n.id == event.winner_node_id)
                .expect("winner is a candidate");
            let level_upper = logs[&relay.id].stops[i]
                .heard
                .iter()
                .map(|&l| radio.level_ranges[l])
                .fold(f64::INFINITY, f64::min);
            let table = build_relay_range_table(scenario.seed, relay.id, radio.doi);
            for n in nodes.iter().filter(|n| n.id != relay.id) {
                let obs = &mut logs.get_mut(&n.id).expect("log per node").stops[i];
                if !obs.heard.is_empty() {
                    continue;
                }
                let draw = uniform_draw(
                    scenario.seed,
                    Stream::RelayFading,
                    &[i as u64, relay.id as u64, n.id as u64],
                );
                if can_hear(
                    relay.position,
                    n.position,
                    cfg.relay_range,
                    &table,
                    &scenario.obstacles,
                    draw,
                    radio.fading_f,
                ) {
                    obs.relayed.push(RelayedReception {
                        relay_node_id: relay.id,
                        level_upper,
                        relay_range: cfg.relay_range,
                    });
                }
            }
            events.push(event);
        }
    }
    events
}

/// One full localization pass over a scenario, with intermediate products.
pub fn run_trial_traced(
    scenario: &ScenarioConfig,
    options: &TrialOptions,
) -> Result<(TrialResult, TrialTrace)> {
    scenario.validate()?;
    let started = Instant::now();
    let stops: Vec<Point2D> = generate_trajectory(&scenario.trajectory, &scenario.field, scenario.seed)?
        .into_iter()
        .filter(|p| !scenario.obstacles.iter().any(|o| o.contains_interior(*p)))
        .collect();
    let nodes = auto_flag_boundary(&scenario.nodes, &scenario.obstacles, scenario.boundary_distance());
    let mut logs = simulate_beaconing(scenario, &stops);
    let relay_events = if options.relay_on {
        apply_relays(scenario, &nodes, &stops, &mut logs)
    } else {
        Vec::new()
    };

    let mut outcomes = Vec::with_capacity(nodes.len());
    let mut constraints = BTreeMap::new();
    for node in &nodes {
        let cs = extract_constraints(&logs[&node.id], &scenario.radio, &scenario.extraction);
        let (estimate, status) = match options.estimator {
            Estimator::Convex => match estimate_position(&cs, &options.solver) {
                Ok(r) => (Some(r.x_hat), NodeStatus::Solved(r.status)),
                Err(_) => (None, NodeStatus::NotLocalizable),
            },
            Estimator::Baseline => match baseline_estimate(&cs) {
                Some(p) => (Some(p), NodeStatus::Baseline),
                None => (None, NodeStatus::NotLocalizable),
            },
        };
        outcomes.push(NodeOutcome {
            id: node.id,
            truth: node.position,
            estimate,
            status,
            constraint_count: cs.len(),
        });
        constraints.insert(node.id, cs);
    }

    let truths: Vec<Point2D> = outcomes.iter().map(|o| o.truth).collect();
    let estimates: Vec<Option<Point2D>> = outcomes.iter().map(|o| o.estimate).collect();
    let n = outcomes.len().max(1) as f64;
    let result = TrialResult {
        normalized_error: normalized_error(&truths, &estimates, scenario.radio.base_range()),
        localized_fraction: estimates.iter().filter(|e| e.is_some()).count() as f64 / n,
        mean_constraint_count: outcomes.iter().map(|o| o.constraint_count).sum::<usize>() as f64 / n,
        relay_event_count: relay_events.len(),
        nodes: outcomes,
        runtime: started.elapsed(),
    };
    let trace = TrialTrace {
        stops,
        logs,
        relay_events,
        constraints,
    };
    Ok((result, trace))
}

/// One full localization pass over a scenario.
pub fn run_trial(scenario: &ScenarioConfig, options: &TrialOptions) -> Result<TrialResult> {
    run_trial_traced(scenario, options).map(|(r, _)| r)
}

/// Everything needed to draw random scenarios of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTemplate {
    pub field: Field,
    pub node_count: usize,
    pub obstacles: Vec<ObstaclePolygon>,
    pub radio: RadioConfig,
    pub trajectory: TrajectoryConfig,
    pub contention: ContentionConfig,
    pub extraction: ExtractionConfig,
    /// Joules per node.
    pub initial_energy: f64,
    /// Used energy is drawn uniformly in `[0, max_used_fraction · initial]`.
    pub max_used_fraction: f64,
}

impl Default for ScenarioTemplate {
    /// 100 nodes in a 100 m × 100 m field, levels 15 m and 30 m, grid sweep
    /// every 15 m, ideal radio, no obstacles.
    fn default() -> Self {
        ScenarioTemplate {
            field: Field {
                width: 100.0,
                height: 100.0,
            },
            node_count: 100,
            obstacles: Vec::new(),
            radio: RadioConfig::two_level(15.0),
            trajectory: TrajectoryConfig::grid(15.0),
            contention: ContentionConfig::default(),
            extraction: ExtractionConfig::default(),
            initial_energy: 1.0,
            max_used_fraction: 0.5,
        }
    }
}

impl ScenarioTemplate {
    /// Adds a square obstacle of side `side` at the field center.
    pub fn with_central_obstacle(mut self, side: f64) -> Self {
        let sq = ObstaclePolygon::square(self.field.center(), side).expect("positive side");
        self.obstacles.push(sq);
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let probe = ScenarioConfig {
            field: self.field,
            nodes: Vec::new(),
            obstacles: self.obstacles.clone(),
            radio: self.radio.clone(),
            trajectory: self.trajectory.clone(),
            contention: self.contention.clone(),
            extraction: self.extraction,
            seed: 0,
        };
        probe.validate()?;
        if !(self.initial_energy.is_finite() && self.initial_energy > 0.0) {
            return Err(ScenarioError::Experiment(
                "initial_energy must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.max_used_fraction) {
            return Err(ScenarioError::Experiment(
                "max_used_fraction must lie in [0, 1]".into(),
            ));
        }
        let free =
            self.field.width * self.field.height - self.obstacles.iter().map(|o| o.area()).sum::<f64>();
        if self.node_count > 0 && free <= 0.0 {
            return Err(ScenarioError::Experiment(
                "obstacles cover the whole field".into(),
            ));
        }
        Ok(())
    }

    /// Uniform deployment outside obstacles, fully determined by `seed`.
    pub fn instantiate(&self, seed: u64) -> ScenarioConfig {
        let mut rng = rng_for(seed, Stream::Deployment, &[]);
        let mut nodes = Vec::with_capacity(self.node_count);
        for id in 1..=self.node_count as u32 {
            let position = loop {
                let p = Point2D::new(
                    rng.gen::<f64>() * self.field.width,
                    rng.gen::<f64>() * self.field.height,
                );
                if !self.obstacles.iter().any(|o| o.contains_interior(p)) {
                    break p;
                }
            };
            let used = rng.gen::<f64>() * self.max_used_fraction * self.initial_energy;
            nodes.push(SensorNode {
                id,
                position,
                is_boundary: false,
                initial_energy: self.initial_energy,
                used_energy: used,
                num_neighbors: 0,
            });
        }
        let counts = neighbor_counts(&nodes, self.radio.base_range());
        for (n, c) in nodes.iter_mut().zip(counts) {
            n.num_neighbors = c;
        }
        ScenarioConfig {
            field: self.field,
            nodes,
            obstacles: self.obstacles.clone(),
            radio: self.radio.clone(),
            trajectory: self.trajectory.clone(),
            contention: self.contention.clone(),
            extraction: self.extraction,
            seed,
        }
    }
}
