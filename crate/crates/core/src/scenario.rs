//! Sensor nodes, scenario configuration and the scenario file format.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! seed = 42
//!
//! [field]
//! width = 100.0
//! height = 100.0
//!
//! [radio]
//! level_ranges = [15.0, 30.0]   # meters, strictly increasing
//! doi = 0.2
//! fading_f = 0.0
//!
//! [trajectory]
//! pattern = "grid_sweep"        # grid_sweep | random_waypoint | explicit
//! step = 15.0
//!
//! [contention]
//! alpha = 0.5
//! beta = 0.5
//! max_delay = 0.1               # seconds
//! relay_range = 15.0
//!
//! [extraction]                  # optional
//! lower_only = false
//! relay_lower_from_direct = false
//!
//! [[obstacle]]
//! vertices = [[40.0, 40.0], [60.0, 40.0], [60.0, 60.0], [40.0, 60.0]]
//!
//! [[node]]
//! id = 1
//! x = 10.0
//! y = 20.0
//! is_boundary = false           # optional
//! initial_energy = 1.0          # joules
//! used_energy = 0.2
//! num_neighbors = 7             # optional, computed from geometry when absent
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beaconing::{ExtractionConfig, TrajectoryConfig};
use crate::error::ScenarioError;
use crate::geometry::{nearest_boundary_distance, ObstaclePolygon, Point2D};
use crate::radio::RadioConfig;
use crate::relay::ContentionConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: u32,
    /// Ground-truth position.
    pub position: Point2D,
    pub is_boundary: bool,
    pub initial_energy: f64,
    pub used_energy: f64,
    pub num_neighbors: usize,
}

impl SensorNode {
    pub fn new(id: u32, position: Point2D) -> Self {
        SensorNode {
            id,
            position,
            is_boundary: false,
            initial_energy: 1.0,
            used_energy: 0.0,
            num_neighbors: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Field {
    pub width: f64,
    pub height: f64,
}

impl Field {
    pub fn contains(&self, p: Point2D) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn center(&self) -> Point2D {
        Point2D::new(self.width / 2.0, self.height / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub field: Field,
    pub nodes: Vec<SensorNode>,
    pub obstacles: Vec<ObstaclePolygon>,
    pub radio: RadioConfig,
    pub trajectory: TrajectoryConfig,
    pub contention: ContentionConfig,
    pub extraction: ExtractionConfig,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Checks every invariant, naming the first offending entity.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let f = self.field;
        if !(f.width.is_finite() && f.width > 0.0 && f.height.is_finite() && f.height > 0.0) {
            return Err(ScenarioError::Field(format!(
                "dimensions must be positive, got {} x {}",
                f.width, f.height
            )));
        }
        self.radio.validate()?;
        self.trajectory.validate(&self.field)?;
        self.contention.validate()?;
        let mut seen = HashSet::new();
        for n in &self.nodes {
            let bad = |reason: String| Err(ScenarioError::Node { id: n.id, reason });
            if !seen.insert(n.id) {
                return bad("duplicate node id".into());
            }
            if !n.position.is_finite() || !f.contains(n.position) {
                return bad(format!("position {} is outside the field", n.position));
            }
            if let Some(k) = self
                .obstacles
                .iter()
                .position(|o| o.contains_interior(n.position))
            {
                return bad(format!("position {} is inside obstacle #{k}", n.position));
            }
            if !(n.initial_energy.is_finite() && n.initial_energy >= 0.0) {
                return bad(format!("initial_energy {} must be >= 0", n.initial_energy));
            }
            if !(n.used_energy >= 0.0 && n.used_energy <= n.initial_energy) {
                return bad(format!(
                    "used_energy {} must lie in [0, initial_energy]",
                    n.used_energy
                ));
            }
        }
        Ok(())
    }

    pub fn node(&self, id: u32) -> Option<&SensorNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Distance threshold for boundary flagging; defaults to the smallest level range.
    pub fn boundary_distance(&self) -> f64 {
        self.contention
            .boundary_distance
            .unwrap_or_else(|| self.radio.base_range())
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        toml::to_string(&ScenarioFile::from(self)).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        file.into_config()
    }

    pub fn write(&self, path: &Path) -> Result<(), ScenarioError> {
        let text = self.to_toml_string()?;
        fs::write(path, text).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ScenarioConfig::from_toml_str(&text)
}

/// Number of other nodes within `range` of each node, in input order.
pub fn neighbor_counts(nodes: &[SensorNode], range: f64) -> Vec<usize> {
    nodes
        .iter()
        .map(|a| {
            nodes
                .iter()
                .filter(|b| b.id != a.id && a.position.distance(b.position) <= range)
                .count()
        })
        .collect()
}

/// Flags nodes within `d_b` of an obstacle boundary. Existing flags are kept.
pub fn auto_flag_boundary(nodes: &[SensorNode], obstacles: &[ObstaclePolygon], d_b: f64) -> Vec<SensorNode> {
    nodes
        .iter()
        .map(|n| {
            let near = nearest_boundary_distance(n.position, obstacles) <= d_b;
            SensorNode {
                is_boundary: n.is_boundary || near,
                ..n.clone()
            }
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    seed: u64,
    field: Field,
    radio: RadioConfig,
    #[serde(default)]
    trajectory: TrajectoryConfig,
    #[serde(default)]
    contention: ContentionConfig,
    #[serde(default)]
    extraction: ExtractionConfig,
    #[serde(default, rename = "obstacle")]
    obstacles: Vec<ObstacleEntry>,
    #[serde(default, rename = "node")]
    nodes: Vec<NodeEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleEntry {
    vertices: Vec<Point2D>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: u32,
    x: f64,
    y: f64,
    #[serde(default)]
    is_boundary: bool,
    #[serde(default = "default_energy")]
    initial_energy: f64,
    #[serde(default)]
    used_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_neighbors: Option<usize>,
}

fn default_energy() -> f64 {
    1.0
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(c: &ScenarioConfig) -> Self {
        ScenarioFile {
            seed: c.seed,
            field: c.field,
            radio: c.radio.clone(),
            trajectory: c.trajectory.clone(),
            contention: c.contention.clone(),
            extraction: c.extraction,
            obstacles: c
                .obstacles
                .iter()
                .map(|o| ObstacleEntry {
                    vertices: o.vertices().to_vec(),
                })
                .collect(),
            nodes: c
                .nodes
                .iter()
                .map(|n| NodeEntry {
                    id: n.id,
                    x: n.position.x,
                    y: n.position.y,
                    is_boundary: n.is_boundary,
                    initial_energy: n.initial_energy,
                    used_energy: n.used_energy,
                    num_neighbors: Some(n.num_neighbors),
                })
                .collect(),
        }
    }
}

impl ScenarioFile {
    fn into_config(self) -> Result<ScenarioConfig, ScenarioError> {
        let obstacles = self
            .obstacles
            .into_iter()
            .enumerate()
            .map(|(index, o)| {
                ObstaclePolygon::new(o.vertices).map_err(|e| ScenarioError::Obstacle {
                    index,
                    reason: match e {
                        ScenarioError::InvalidObstacle(r) => r,
                        other => other.to_string(),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let overrides: Vec<Option<usize>> = self.nodes.iter().map(|n| n.num_neighbors).collect();
        let mut nodes: Vec<SensorNode> = self
            .nodes
            .into_iter()
            .map(|n| SensorNode {
                id: n.id,
                position: Point2D::new(n.x, n.y),
                is_boundary: n.is_boundary,
                initial_energy: n.initial_energy,
                used_energy: n.used_energy,
                num_neighbors: 0,
            })
            .collect();
        let config = ScenarioConfig {
            field: self.field,
            nodes: Vec::new(),
            obstacles,
            radio: self.radio,
            trajectory: self.trajectory,
            contention: self.contention,
            extraction: self.extraction,
            seed: self.seed,
        };
        // radio must be valid before its range is used for neighbor counting
        config.radio.validate()?;
        let counts = neighbor_counts(&nodes, config.radio.base_range());
        for ((node, count), given) in nodes.iter_mut().zip(counts).zip(overrides) {
            node.num_neighbors = given.unwrap_or(count);
        }
        let config = ScenarioConfig { nodes, ..config };
        config.validate()?;
        Ok(config)
    }
}
