use beaconloc::harness::{
    paired_differences, run_sweep, run_trial, Estimator, ExperimentConfig, Moments, ScenarioTemplate,
    SweepAxes, TrialOptions,
};
use beaconloc::radio::RadioConfig;
use beaconloc::scenario::load_scenario;
use beaconloc::solver::SolverConfig;

fn sweep(template: ScenarioTemplate, axes: SweepAxes, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        template,
        axes,
        trials_per_point: trials,
        base_seed: 100,
        workers: 0,
        solver: SolverConfig::default(),
    }
}

fn axes(doi: Vec<f64>, fading_f: Vec<f64>, relay: Vec<bool>, steps: Vec<f64>) -> SweepAxes {
    SweepAxes {
        doi,
        fading_f,
        relay,
        estimator: vec![Estimator::Convex],
        trajectory_step: steps,
    }
}

#[test]
fn scenario_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    let scenario = ScenarioTemplate {
        radio: RadioConfig {
            doi: 0.2,
            fading_f: 0.1,
            ..RadioConfig::two_level(15.0)
        },
        ..ScenarioTemplate::default().with_central_obstacle(20.0)
    }
    .instantiate(42);
    scenario.write(&path).unwrap();
    let loaded = load_scenario(&path).unwrap();
    assert_eq!(loaded, scenario);
    let a = run_trial(&scenario, &TrialOptions::default()).unwrap();
    let b = run_trial(&loaded, &TrialOptions::default()).unwrap();
    assert_eq!(a.nodes, b.nodes);
}

#[test]
fn missing_file_is_reported() {
    let err = load_scenario(std::path::Path::new("/nonexistent/s.toml")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/s.toml"));
}

#[test]
fn fading_does_not_help() {
    let cfg = sweep(
        ScenarioTemplate::default(),
        axes(vec![0.2], vec![0.0, 0.1], vec![true], vec![]),
        100,
    );
    let out = run_sweep(&cfg).unwrap();
    let d = Moments::of(&paired_differences(&out.points[1].errors, &out.points[0].errors)).unwrap();
    assert!(d.mean >= -3.0 * d.sem(), "{d:?}");
}

#[test]
fn denser_trajectory_does_not_hurt() {
    let cfg = sweep(
        ScenarioTemplate::default(),
        axes(vec![0.2], vec![0.0], vec![true], vec![15.0, 7.5]),
        100,
    );
    let out = run_sweep(&cfg).unwrap();
    let d = Moments::of(&paired_differences(&out.points[1].errors, &out.points[0].errors)).unwrap();
    assert!(d.mean <= 3.0 * d.sem(), "{d:?}");
}

#[test]
fn relay_never_reduces_coverage() {
    let template = ScenarioTemplate::default().with_central_obstacle(20.0);
    let cfg = sweep(
        template,
        axes(vec![0.2], vec![0.1, 0.4], vec![true, false], vec![15.0, 30.0]),
        20,
    );
    let out = run_sweep(&cfg).unwrap();
    for pair in out.points.chunks(2) {
        assert!(pair[0].point.relay && !pair[1].point.relay);
        for (on, off) in pair[0]
            .localized_fractions
            .iter()
            .zip(&pair[1].localized_fractions)
        {
            assert!(on.unwrap() >= off.unwrap());
        }
    }
}

#[test]
fn metric_invariants_hold_over_a_sweep() {
    let template = ScenarioTemplate {
        node_count: 40,
        ..ScenarioTemplate::default().with_central_obstacle(20.0)
    };
    let cfg = sweep(
        template,
        axes(vec![0.0, 0.3], vec![0.0, 0.5], vec![true], vec![30.0]),
        10,
    );
    for p in run_sweep(&cfg).unwrap().points {
        let s = p.stats;
        assert_eq!(s.trials, 10);
        assert!((0.0..=1.0).contains(&s.localized_fraction));
        if let Some(m) = s.error {
            assert!(m.min >= 0.0 && m.min <= m.mean && m.mean <= m.max);
        }
        assert!(p.failures.is_empty());
    }
}
