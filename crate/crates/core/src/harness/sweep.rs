//! Parameter sweeps over many seeded trials, with CSV output.
//!
//! Experiment files are TOML:
//!
//! ```toml
//! base_seed = 1
//! trials_per_point = 100
//! workers = 4                  # optional, 0 = all cores
//!
//! [template]                   # every key optional
//! node_count = 100
//! central_obstacle = 20.0      # side of a square at the field center
//! field = { width = 100.0, height = 100.0 }
//! radio = { level_ranges = [15.0, 30.0] }
//!
//! [sweep]
//! doi = [0.0, 0.2]
//! fading_f = [0.0, 0.1]
//! relay = [true, false]        # optional, default [true]
//! estimator = ["convex"]       # optional, default ["convex"]
//! trajectory_step = [15.0]     # optional, default: the template's step
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{run_trial, Estimator, Moments, NodeOutcome, ScenarioTemplate, TrialOptions};
use crate::beaconing::{ExtractionConfig, TrajectoryConfig};
use crate::error::{Error, Result, ScenarioError};
use crate::exec::par_map;
use crate::geometry::{ObstaclePolygon, Point2D};
use crate::radio::RadioConfig;
use crate::relay::ContentionConfig;
use crate::scenario::Field;
use crate::solver::SolverConfig;

pub const SUMMARY_HEADER: [&str; 12] = [
    "sweep_point",
    "doi",
    "fading_f",
    "relay",
    "estimator",
    "trials",
    "mean_error",
    "std_error",
    "min_error",
    "max_error",
    "localized_fraction",
    "mean_runtime_ms",
];

pub const SCATTER_HEADER: [&str; 6] = ["node_id", "true_x", "true_y", "est_x", "est_y", "status"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub doi: Vec<f64>,
    pub fading_f: Vec<f64>,
    pub relay: Vec<bool>,
    pub estimator: Vec<Estimator>,
    /// Empty means the template's own trajectory.
    pub trajectory_step: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub template: ScenarioTemplate,
    pub axes: SweepAxes,
    pub trials_per_point: usize,
    pub base_seed: u64,
    /// 0 means every available core.
    pub workers: usize,
    pub solver: SolverConfig,
}

/// One combination of sweep axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub doi: f64,
    pub fading_f: f64,
    pub relay: bool,
    pub estimator: Estimator,
    pub trajectory_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    /// Trials that ran to completion.
    pub trials: usize,
    /// Error moments over trials with a defined error; `None` if there were none.
    pub error: Option<Moments>,
    pub localized_fraction: f64,
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPointResult {
    pub point: SweepPoint,
    /// Per trial, in trial order. `None` when no node was localized or the trial failed.
    pub errors: Vec<Option<f64>>,
    pub localized_fractions: Vec<Option<f64>>,
    pub runtimes_ms: Vec<f64>,
    /// Failed trials as (seed, message).
    pub failures: Vec<(u64, String)>,
    /// Per-node outcomes of the first trial.
    pub scatter: Vec<NodeOutcome>,
    pub stats: SummaryStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub points: Vec<SweepPointResult>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |m: &str| Err(ScenarioError::Experiment(m.into()));
        if self.trials_per_point < 1 {
            return err("trials_per_point must be at least 1");
        }
        let a = &self.axes;
        if a.doi.is_empty() || a.fading_f.is_empty() || a.relay.is_empty() || a.estimator.is_empty() {
            return err("sweep axes must be non-empty");
        }
        self.template.validate()?;
        for p in self.points() {
            let mut t = self.template.clone();
            p.apply(&mut t);
            t.radio.validate()?;
            t.trajectory.validate(&t.field)?;
        }
        Ok(())
    }

    /// Sweep points in output order: doi, fading_f, step, relay, estimator.
    pub fn points(&self) -> Vec<SweepPoint> {
        let steps: Vec<Option<f64>> = if self.axes.trajectory_step.is_empty() {
            vec![None]
        } else {
            self.axes.trajectory_step.iter().map(|&s| Some(s)).collect()
        };
        let mut out = Vec::new();
        for &doi in &self.axes.doi {
            for &fading_f in &self.axes.fading_f {
                for &trajectory_step in &steps {
                    for &relay in &self.axes.relay {
                        for &estimator in &self.axes.estimator {
                            out.push(SweepPoint {
                                index: out.len(),
                                doi,
                                fading_f,
                                relay,
                                estimator,
                                trajectory_step,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let config = file.into_config()?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }
}

impl SweepPoint {
    fn apply(&self, t: &mut ScenarioTemplate) {
        t.radio.doi = self.doi;
        t.radio.fading_f = self.fading_f;
        if let Some(step) = self.trajectory_step {
            t.trajectory.step = step;
        }
    }
}

fn summarize(errors: &[Option<f64>], fractions: &[Option<f64>], runtimes: &[f64]) -> SummaryStats {
    let defined: Vec<f64> = errors.iter().flatten().copied().collect();
    let done: Vec<f64> = fractions.iter().flatten().copied().collect();
    SummaryStats {
        trials: done.len(),
        error: Moments::of(&defined),
        localized_fraction: if done.is_empty() {
            0.0
        } else {
            done.iter().sum::<f64>() / done.len() as f64
        },
        mean_runtime_ms: runtimes.iter().sum::<f64>() / runtimes.len().max(1) as f64,
    }
}

/// Runs every (point, trial) pair. Trial `k` uses seed `base_seed + k` at
/// every point, so points are paired trial by trial.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let points = config.points();
    let templates: Vec<ScenarioTemplate> = points
        .iter()
        .map(|p| {
            let mut t = config.template.clone();
            p.apply(&mut t);
            t
        })
        .collect();
    let n = config.trials_per_point;
    let runs = par_map(points.len() * n, config.workers, |job| {
        let (pi, trial) = (job / n, job % n);
        let point = &points[pi];
        let seed = config.base_seed.wrapping_add(trial as u64);
        let scenario = templates[pi].instantiate(seed);
        let options = TrialOptions {
            relay_on: point.relay,
            estimator: point.estimator,
            solver: config.solver,
        };
        (seed, run_trial(&scenario, &options))
    });

    let mut runs = runs.into_iter();
    let mut out = Vec::with_capacity(points.len());
    for point in points {
        let mut errors = Vec::with_capacity(n);
        let mut fractions = Vec::with_capacity(n);
        let mut runtimes = Vec::with_capacity(n);
        let mut failures = Vec::new();
        let mut scatter = Vec::new();
        for trial in 0..n {
            let (seed, result) = runs.next().expect("one run per job");
            match result {
                Ok(r) => {
                    errors.push(r.normalized_error);
                    fractions.push(Some(r.localized_fraction));
                    runtimes.push(r.runtime.as_secs_f64() * 1e3);
                    if trial == 0 {
                        scatter = r.nodes;
                    }
                }
                Err(e) => {
                    errors.push(None);
                    fractions.push(None);
                    failures.push((seed, e.to_string()));
                }
            }
        }
        let stats = summarize(&errors, &fractions, &runtimes);
        out.push(SweepPointResult {
            point,
            errors,
            localized_fractions: fractions,
            runtimes_ms: runtimes,
            failures,
            scatter,
            stats,
        });
    }
    Ok(SweepOutput { points: out })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepOutput {
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_HEADER)?;
        for r in &self.points {
            let p = &r.point;
            let s = &r.stats;
            w.write_record([
                p.index.to_string(),
                p.doi.to_string(),
                p.fading_f.to_string(),
                if p.relay { "on" } else { "off" }.to_string(),
                p.estimator.to_string(),
                s.trials.to_string(),
                opt(s.error.map(|m| m.mean)),
                opt(s.error.map(|m| m.std)),
                opt(s.error.map(|m| m.min)),
                opt(s.error.map(|m| m.max)),
                s.localized_fraction.to_string(),
                format!("{:.3}", s.mean_runtime_ms),
            ])?;
        }
        finish(w)
    }

    pub fn scatter_csv(&self, point: usize) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SCATTER_HEADER)?;
        for n in &self.points[point].scatter {
            w.write_record([
                n.id.to_string(),
                n.truth.x.to_string(),
                n.truth.y.to_string(),
                opt(n.estimate.map(|e| e.x)),
                opt(n.estimate.map(|e| e.y)),
                n.status.as_str().to_string(),
            ])?;
        }
        finish(w)
    }

    /// Writes `summary.csv` and one `scatter_<point>.csv` per point; returns the paths.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join("summary.csv");
        fs::write(&path, self.summary_csv()?)?;
        written.push(path);
        for i in 0..self.points.len() {
            let path = dir.join(format!("scatter_{i}.csv"));
            fs::write(&path, self.scatter_csv(i)?)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    #[serde(default)]
    base_seed: u64,
    trials_per_point: usize,
    #[serde(default)]
    workers: usize,
    #[serde(default)]
    template: TemplateFile,
    #[serde(default)]
    solver: Option<SolverFile>,
    sweep: SweepFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    node_count: Option<usize>,
    field: Option<Field>,
    radio: Option<RadioConfig>,
    trajectory: Option<TrajectoryConfig>,
    contention: Option<ContentionConfig>,
    extraction: Option<ExtractionConfig>,
    central_obstacle: Option<f64>,
    #[serde(default, rename = "obstacle")]
    obstacles: Vec<ObstacleFile>,
    initial_energy: Option<f64>,
    max_used_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    vertices: Vec<Point2D>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverFile {
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    doi: Vec<f64>,
    fading_f: Vec<f64>,
    #[serde(default = "default_relay")]
    relay: Vec<bool>,
    #[serde(default = "default_estimator")]
    estimator: Vec<Estimator>,
    #[serde(default)]
    trajectory_step: Vec<f64>,
}

fn default_relay() -> Vec<bool> {
    vec![true]
}

fn default_estimator() -> Vec<Estimator> {
    vec![Estimator::Convex]
}

impl ExperimentFile {
    fn into_config(self) -> Result<ExperimentConfig, ScenarioError> {
        let d = ScenarioTemplate::default();
        let t = self.template;
        let mut template = ScenarioTemplate {
            field: t.field.unwrap_or(d.field),
            node_count: t.node_count.unwrap_or(d.node_count),
            obstacles: Vec::new(),
            radio: t.radio.unwrap_or(d.radio),
            trajectory: t.trajectory.unwrap_or(d.trajectory),
            contention: t.contention.unwrap_or(d.contention),
            extraction: t.extraction.unwrap_or(d.extraction),
            initial_energy: t.initial_energy.unwrap_or(d.initial_energy),
            max_used_fraction: t.max_used_fraction.unwrap_or(d.max_used_fraction),
        };
        for (index, o) in t.obstacles.into_iter().enumerate() {
            let poly = ObstaclePolygon::new(o.vertices).map_err(|e| ScenarioError::Obstacle {
                index,
                reason: e.to_string(),
            })?;
            template.obstacles.push(poly);
        }
        if let Some(side) = t.central_obstacle {
            let sq = ObstaclePolygon::square(template.field.center(), side)
                .map_err(|e| ScenarioError::Experiment(format!("central_obstacle: {e}")))?;
            template.obstacles.push(sq);
        }
        let defaults = SolverConfig::default();
        let solver = match self.solver {
            Some(s) => SolverConfig {
                tol: s.tol.unwrap_or(defaults.tol),
                max_iter: s.max_iter.unwrap_or(defaults.max_iter),
            },
            None => defaults,
        };
        Ok(ExperimentConfig {
            template,
            axes: SweepAxes {
                doi: self.sweep.doi,
                fading_f: self.sweep.fading_f,
                relay: self.sweep.relay,
                estimator: self.sweep.estimator,
                trajectory_step: self.sweep.trajectory_step,
            },
            trials_per_point: self.trials_per_point,
            base_seed: self.base_seed,
            workers: self.workers,
            solver,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
base_seed = 5
trials_per_point = 2

[template]
node_count = 20
central_obstacle = 20.0

[sweep]
doi = [0.0, 0.2]
fading_f = [0.0]
relay = [true, false]
"#;

    #[test]
    fn parses_and_orders_points() {
        let cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
        assert_eq!(cfg.template.obstacles.len(), 1);
        let pts = cfg.points();
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[1].doi, pts[1].relay), (0.0, false));
        assert_eq!((pts[2].doi, pts[2].relay), (0.2, true));
        assert!(pts.iter().enumerate().all(|(i, p)| p.index == i));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str(
            &SMALL.replace("trials_per_point = 2", "trials_per_point = 0")
        )
        .is_err());
        assert!(ExperimentConfig::from_toml_str(&SMALL.replace("doi = [0.0, 0.2]", "doi = []")).is_err());
        assert!(ExperimentConfig::from_toml_str(&SMALL.replace("doi = [0.0, 0.2]", "doi = [1.5]")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{SMALL}\nbogus = 1\n")).is_err());
    }

    #[test]
    fn singleton_sweep_matches_its_trial() {
        let mut cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
        cfg.axes.doi = vec![0.0];
        cfg.axes.relay = vec![true];
        cfg.trials_per_point = 1;
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.points.len(), 1);
        let trial = run_trial(&cfg.template.instantiate(5), &TrialOptions::default()).unwrap();
        let stats = out.points[0].stats;
        assert_eq!(stats.error.unwrap().mean, trial.normalized_error.unwrap());
        assert_eq!(stats.error.unwrap().std, 0.0);
        let summary = out.summary_csv().unwrap();
        assert!(summary.starts_with(&SUMMARY_HEADER.join(",")));
        assert_eq!(summary.lines().count(), 2);
        let scatter = out.scatter_csv(0).unwrap();
        assert_eq!(scatter.lines().count(), 21);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
        cfg.workers = 1;
        let a = run_sweep(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_sweep(&cfg).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.errors, y.errors);
            assert_eq!(x.scatter, y.scatter);
        }
        for i in 0..a.points.len() {
            assert_eq!(a.scatter_csv(i).unwrap(), b.scatter_csv(i).unwrap());
        }
    }
}
