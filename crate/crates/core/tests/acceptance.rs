//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use beaconloc::constraint::AnnulusConstraint;
use beaconloc::geometry::Point2D;
use beaconloc::harness::{
    paired_differences, run_sweep, run_trial_traced, Estimator, ExperimentConfig, Moments, ScenarioTemplate,
    SweepAxes, SweepOutput, TrialOptions,
};
use beaconloc::radio::RadioConfig;
use beaconloc::relay::{backoff_delay, contention_rounds, ContentionConfig};
use beaconloc::scenario::SensorNode;
use beaconloc::solver::oracle::{oracle_grid, BoundingBox};
use beaconloc::solver::{estimate_position, SolveStatus, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: usize = 100;
const BASE_SEED: u64 = 1;

fn report(id: u32, pass: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn experiment(
    doi: f64,
    fading_f: f64,
    obstacle: bool,
    relay: Vec<bool>,
    estimator: Vec<Estimator>,
) -> ExperimentConfig {
    let template = if obstacle {
        ScenarioTemplate::default().with_central_obstacle(20.0)
    } else {
        ScenarioTemplate::default()
    };
    ExperimentConfig {
        template,
        axes: SweepAxes {
            doi: vec![doi],
            fading_f: vec![fading_f],
            relay,
            estimator,
            trajectory_step: Vec::new(),
        },
        trials_per_point: TRIALS,
        base_seed: BASE_SEED,
        workers: 0,
        solver: SolverConfig::default(),
    }
}

struct Runs {
    /// doi 0.2, no fading, no obstacle: [convex, baseline].
    ideal: SweepOutput,
    ideal_convex_elapsed: Duration,
    /// doi 0.2, f 0.1, central obstacle: [on/convex, on/baseline, off/convex, off/baseline].
    obstacle: SweepOutput,
}

fn runs() -> &'static Runs {
    static RUNS: OnceLock<Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let started = Instant::now();
        let convex = run_sweep(&experiment(0.2, 0.0, false, vec![true], vec![Estimator::Convex])).unwrap();
        let ideal_convex_elapsed = started.elapsed();
        let baseline = run_sweep(&experiment(
            0.2,
            0.0,
            false,
            vec![true],
            vec![Estimator::Baseline],
        ))
        .unwrap();
        let ideal = SweepOutput {
            points: vec![convex.points[0].clone(), baseline.points[0].clone()],
        };
        let obstacle = run_sweep(&experiment(
            0.2,
            0.1,
            true,
            vec![true, false],
            vec![Estimator::Convex, Estimator::Baseline],
        ))
        .unwrap();
        Runs {
            ideal,
            ideal_convex_elapsed,
            obstacle,
        }
    })
}

fn mean_error(out: &SweepOutput, point: usize) -> f64 {
    out.points[point]
        .stats
        .error
        .expect("some trial localized nodes")
        .mean
}

/// Paired `a - b` is negative by more than three standard errors.
fn lower_at_3_sigma(a: &[Option<f64>], b: &[Option<f64>]) -> (bool, Moments) {
    let d = Moments::of(&paired_differences(a, b)).expect("paired trials");
    (d.mean + 3.0 * d.sem() < 0.0, d)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Vec<AnnulusConstraint> {
    let k = rng.gen_range(3..=10);
    let truth = Point2D::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
    let feasible = rng.gen_bool(0.5);
    (0..k)
        .map(|_| {
            let a = Point2D::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            let d = a.distance(truth).max(1.0);
            let (lower, upper) = if feasible || rng.gen_bool(0.5) {
                (d * rng.gen_range(0.0..0.95), d * rng.gen_range(1.05..1.8))
            } else if rng.gen_bool(0.5) {
                let u = d * rng.gen_range(0.2..0.9);
                (u * rng.gen_range(0.0..0.8), u)
            } else {
                let l = d * rng.gen_range(1.1..1.6);
                (l, l * rng.gen_range(1.05..1.5))
            };
            if rng.gen_bool(0.1) {
                AnnulusConstraint::lower_only(a, lower.max(1.0)).unwrap()
            } else {
                AnnulusConstraint::two_sided(a, lower, upper).unwrap()
            }
        })
        .collect()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = SolverConfig::default();
    let (mut worst_obj, mut worst_pos, mut degenerate, mut failures) = (0.0f64, 0.0f64, 0, Vec::new());
    for i in 0..100 {
        let cs = random_instance(&mut rng);
        let r = estimate_position(&cs, &cfg).unwrap();
        let (x, v) = oracle_grid(&cs, BoundingBox::around(&cs, 5.0), 1.0, 4);
        let obj_err = (r.t - v).abs();
        let obj_ok = obj_err <= f64::max(1e-6, 1e-4 * v.abs());
        worst_obj = worst_obj.max(obj_err / v.abs().max(1e-2));
        let pos_ok = match r.status {
            SolveStatus::Optimal => {
                worst_pos = worst_pos.max(r.x_hat.distance(x));
                r.x_hat.distance(x) <= 1e-3
            }
            _ => {
                degenerate += 1;
                true
            }
        };
        if !(obj_ok && pos_ok) {
            failures.push(format!(
                "#{i}: t={} oracle={} x={} oracle_x={}",
                r.t, v, r.x_hat, x
            ));
        }
    }
    let elapsed = started.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    report(
        1,
        pass,
        format!(
            "(worst relative objective gap {worst_obj:.2e}, worst position gap {worst_pos:.2e} m, {degenerate} non-optimal, {:.2}s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass, "{failures:#?}");
}

#[test]
fn criterion_2_analytic_instances() {
    let cfg = SolverConfig::default();
    let r2: [f64; 3] = [16.0, 56.0, 36.0];
    let big_r2: [f64; 3] = [34.0, 74.0, 54.0];
    let cs: Vec<_> = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            AnnulusConstraint::two_sided(Point2D::new(x, y), r2[i].sqrt(), big_r2[i].sqrt()).unwrap()
        })
        .collect();
    let r = estimate_position(&cs, &cfg).unwrap();
    let t_star = 9.0 * 6f64.sqrt();
    let three = r.x_hat.distance(Point2D::new(3.0, 4.0)) <= 1e-4 && (r.t - t_star).abs() <= 1e-6 * t_star;

    let disks = [
        AnnulusConstraint::disk(Point2D::ORIGIN, 1.0).unwrap(),
        AnnulusConstraint::disk(Point2D::new(10.0, 0.0), 1.0).unwrap(),
    ];
    let d = estimate_position(&disks, &cfg).unwrap();
    let disjoint = d.x_hat.distance(Point2D::new(5.0, 0.0)) <= 1e-3;
    let pass = three && disjoint;
    report(
        2,
        pass,
        format!(
            "(three-anchor x={} t={:.10}; disjoint disks x={})",
            r.x_hat, r.t, d.x_hat
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_truth_is_feasible_in_ideal_radio() {
    let template = ScenarioTemplate {
        radio: RadioConfig::two_level(15.0),
        ..ScenarioTemplate::default()
    };
    let (mut checked, mut violated) = (0usize, 0usize);
    for trial in 0..TRIALS as u64 {
        let scenario = template.instantiate(BASE_SEED + trial);
        let (_, trace) = run_trial_traced(&scenario, &TrialOptions::default()).unwrap();
        for node in &scenario.nodes {
            for c in &trace.constraints[&node.id] {
                checked += 1;
                if !c.contains(node.position) {
                    violated += 1;
                }
            }
        }
    }
    let pass = violated == 0 && checked > 0;
    report(
        3,
        pass,
        format!("({checked} constraints checked, {violated} violated)"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_ideal_error_bracket() {
    let r = runs();
    let mean = mean_error(&r.ideal, 0);
    let secs = r.ideal_convex_elapsed.as_secs_f64();
    let pass = (0.05..=0.20).contains(&mean) && secs < 120.0;
    report(
        4,
        pass,
        format!(
            "(mean error {:.2}%, {secs:.1}s for {TRIALS} trials)",
            100.0 * mean
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_obstacle_error_bracket() {
    let r = runs();
    let mean = mean_error(&r.obstacle, 0);
    let ideal = mean_error(&r.ideal, 0);
    let pass = (0.06..=0.25).contains(&mean) && mean > ideal;
    report(
        5,
        pass,
        format!("(mean error {:.2}%, ideal {:.2}%)", 100.0 * mean, 100.0 * ideal),
    );
    assert!(pass);
}

#[test]
fn criterion_6_relay_benefit() {
    let r = runs();
    let (on, off) = (&r.obstacle.points[0], &r.obstacle.points[2]);
    let fraction_ok = on
        .localized_fractions
        .iter()
        .zip(&off.localized_fractions)
        .all(|(a, b)| a.unwrap() >= b.unwrap());
    let (lower, d) = lower_at_3_sigma(&on.errors, &off.errors);
    let pass = fraction_ok && lower;
    report(
        6,
        pass,
        format!(
            "(on {:.2}% vs off {:.2}%, paired diff {:.3}% ± {:.3}% sem, fractions never lower: {fraction_ok})",
            100.0 * mean_error(&r.obstacle, 0),
            100.0 * mean_error(&r.obstacle, 2),
            100.0 * d.mean,
            100.0 * d.sem()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_convex_beats_baseline() {
    let r = runs();
    let (ideal_ok, di) = lower_at_3_sigma(&r.ideal.points[0].errors, &r.ideal.points[1].errors);
    let (obst_ok, dn) = lower_at_3_sigma(&r.obstacle.points[0].errors, &r.obstacle.points[1].errors);
    let pass = ideal_ok && obst_ok;
    report(
        7,
        pass,
        format!(
            "(ideal {:.2}% vs {:.2}%, diff {:.3}% ± {:.3}%; obstacle {:.2}% vs {:.2}%, diff {:.3}% ± {:.3}%)",
            100.0 * mean_error(&r.ideal, 0),
            100.0 * mean_error(&r.ideal, 1),
            100.0 * di.mean,
            100.0 * di.sem(),
            100.0 * mean_error(&r.obstacle, 0),
            100.0 * mean_error(&r.obstacle, 1),
            100.0 * dn.mean,
            100.0 * dn.sem()
        ),
    );
    assert!(pass);
}

fn permutations(items: &[SensorNode]) -> Vec<Vec<SensorNode>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

#[test]
fn criterion_8_backoff_table_and_permutation_invariance() {
    let node = |id, x, used, neighbors| SensorNode {
        used_energy: used,
        num_neighbors: neighbors,
        ..SensorNode::new(id, Point2D::new(x, 0.0))
    };
    let cfg = |alpha: f64, max_delay| ContentionConfig {
        alpha,
        beta: 1.0 - alpha,
        max_delay,
        ..ContentionConfig::default()
    };
    // (alpha, max_delay, used, neighbors, expected seconds)
    let table = [
        (0.5, 0.1, 0.2, 10, 0.015),
        (1.0, 0.1, 0.0, 3, 0.0),
        (0.0, 1.0, 0.4, 1, 1.0),
        (1.0, 1.0, 1.0, 5, 1.0),
        (0.0, 0.1, 0.9, 4, 0.025),
        (0.25, 2.0, 0.5, 2, 0.25 * 0.5 * 2.0 + 0.75 / 2.0 * 2.0),
    ];
    let table_ok = table.iter().all(|&(a, m, used, nb, expect)| {
        let got = backoff_delay(&node(1, 0.0, used, nb), &cfg(a, m)).unwrap();
        (got - expect).abs() <= 4.0 * f64::EPSILON * expect.max(1.0)
    });

    let candidates = [
        node(1, 0.0, 0.3, 6),
        node(2, 8.0, 0.1, 9),
        node(3, 30.0, 0.1, 9),
        node(4, 12.0, 0.7, 2),
        node(5, 50.0, 0.2, 4),
    ];
    let reference = contention_rounds(0, &candidates, &cfg(0.5, 0.1), &[]);
    let perms = permutations(&candidates);
    let perm_ok = perms
        .iter()
        .all(|p| contention_rounds(0, p, &cfg(0.5, 0.1), &[]) == reference);
    let pass = table_ok && perm_ok;
    report(
        8,
        pass,
        format!(
            "({} table cases, {} permutations, winners {:?})",
            table.len(),
            perms.len(),
            reference.iter().map(|e| e.winner_node_id).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

fn strip_runtime(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_9_sweep_determinism() {
    let mut cfg = experiment(0.2, 0.1, true, vec![true, false], vec![Estimator::Convex]);
    cfg.axes.fading_f = vec![0.0, 0.1];
    cfg.trials_per_point = 5;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, workers) in dirs.iter().zip([0, 1]) {
        cfg.workers = workers;
        run_sweep(&cfg).unwrap().write_csv(dir.path()).unwrap();
    }
    let read = |d: &tempfile::TempDir, name: &str| std::fs::read_to_string(d.path().join(name)).unwrap();
    let mut same =
        strip_runtime(&read(&dirs[0], "summary.csv")) == strip_runtime(&read(&dirs[1], "summary.csv"));
    let points = cfg.points().len();
    for i in 0..points {
        let name = format!("scatter_{i}.csv");
        same &= read(&dirs[0], &name).as_bytes() == read(&dirs[1], &name).as_bytes();
    }
    report(
        9,
        same,
        format!("(summary.csv and {points} scatter files compared)"),
    );
    assert!(same);
}
