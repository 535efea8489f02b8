//! End-to-end pipeline: presets, determinism and the raw-data round trip.

use std::f64::consts::PI;

use pecsim::experiment::config::{preset, InitialState, NoiseSpec, PRESET_NAMES};
use pecsim::experiment::pipeline::{mitigate, simulate, RawData, Stage};
use pecsim::experiment::report::write_report;
use pecsim::hubbard::Components;

#[test]
#[allow(clippy::type_complexity)]
fn preset_table_is_frozen() {
    // (name, sites, components, U, V, steps, φ, initial labels, N_s, pairs)
    let table: [(&str, usize, Components, f64, f64, usize, f64, &[&str], usize, &[(&str, f64)]); 5] = [
        ("two_spinless", 2, Components::One, 0.0, 2.0, 8, PI / 4.0, &["11", "10"], 1000, &[("yy(0,1)", 0.9811)]),
        (
            "three_spinless",
            3,
            Components::One,
            0.0,
            2.0,
            4,
            PI / 8.0,
            &["101", "110"],
            1500,
            &[("yy(0,1)", 0.9779), ("yy(1,2)", 0.9748)],
        ),
        (
            "three_spinless_v0",
            3,
            Components::One,
            0.0,
            0.0,
            4,
            PI / 8.0,
            &["101", "110"],
            1500,
            &[("yy(0,1)", 0.9779), ("yy(1,2)", 0.9748)],
        ),
        (
            "two_site_spinful",
            2,
            Components::Two,
            2.0,
            0.0,
            4,
            PI / 8.0,
            &["1001", "1010"],
            2000,
            &[("yy(0,1)", 0.9755), ("yy(2,3)", 0.9706), ("yy(0,2)", 0.9720), ("yy(1,3)", 0.9744)],
        ),
        (
            "two_site_spinful_u0",
            2,
            Components::Two,
            0.0,
            0.0,
            4,
            PI / 8.0,
            &["1001", "1010"],
            2000,
            &[("yy(0,1)", 0.9755), ("yy(2,3)", 0.9706), ("yy(0,2)", 0.9720), ("yy(1,3)", 0.9744)],
        ),
    ];
    assert_eq!(PRESET_NAMES.len(), table.len());
    for (name, sites, comps, u, v, steps, angle, init, n_s, pairs) in table {
        let cfg = preset(name).unwrap();
        assert_eq!(cfg.model.sites, sites, "{name}");
        assert_eq!(cfg.model.components, comps, "{name}");
        assert_eq!(cfg.model.tunneling, 1.0, "{name}");
        assert_eq!(cfg.model.effective_onsite(), u, "{name}");
        assert_eq!(cfg.model.neighbor, v, "{name}");
        assert_eq!(cfg.trotter.steps, steps, "{name}");
        assert_eq!(cfg.trotter.angle, angle, "{name}");
        assert_eq!(cfg.initial_state, InitialState::Labels(init.iter().map(|s| s.to_string()).collect()), "{name}");
        assert_eq!(cfg.pec.samples, n_s, "{name}");
        assert_eq!(cfg.pec.shots, 300, "{name}");
        assert_eq!(cfg.raw_shots, 300, "{name}");
        assert_eq!(cfg.noise.gates.len(), pairs.len(), "{name}");
        for (key, f) in pairs {
            assert_eq!(cfg.noise.gates[*key], pecsim::experiment::ChannelSpec::depolarizing_at(*f), "{name} {key}");
        }
    }
}

#[test]
fn native_gate_counts_per_step() {
    for (name, yy) in [("two_spinless", 3), ("three_spinless", 6), ("three_spinless_v0", 4), ("two_site_spinful", 6)] {
        let c = pecsim::experiment::pipeline::build_circuit(&preset(name).unwrap()).unwrap();
        assert_eq!(c.entangling_per_step(), yy, "{name}");
        assert!(c.entangling_gates().all(|g| g.kind == pecsim::circuit::EntanglerKind::YY));
    }
}

#[test]
fn exact_pipeline_recovers_ideal_curves() {
    for name in PRESET_NAMES {
        let mut cfg = preset(name).unwrap().with_exact();
        cfg.pec.exact_inverse = true;
        let raw = simulate(&cfg).unwrap();
        let b = mitigate(&raw).unwrap();
        for s in &raw.steps {
            for stage in [Stage::Pec, Stage::Mle] {
                let v = &b.population(stage, s.step).unwrap().values;
                let worst = v.iter().zip(&s.ideal).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max);
                assert!(worst < 1e-9, "{name} {stage:?} step {}: {worst:.1e}", s.step);
            }
        }
        // exact characterization: every gate's noise is seen exactly
        for ch in &b.characterizations {
            assert!(ch.clipped.is_empty());
        }
        assert!(b.steps.windows(2).all(|w| w[1].cost >= w[0].cost));
    }
}

#[test]
fn raw_data_round_trips_through_json() {
    let mut cfg = preset("three_spinless").unwrap();
    cfg.pec.samples = 30;
    cfg.post.bootstrap = 100;
    let raw = simulate(&cfg).unwrap();
    let text = serde_json::to_string(&raw).unwrap();
    let back: RawData = serde_json::from_str(&text).unwrap();
    assert_eq!(mitigate(&raw).unwrap(), mitigate(&back).unwrap());
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let mut cfg = preset("two_site_spinful").unwrap().with_seed(9);
    cfg.pec.samples = 40;
    cfg.post.bootstrap = 100;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_report(&mitigate(&simulate(&cfg).unwrap()).unwrap(), d.path()).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "spin_charge.csv"));
    for n in names {
        let a = std::fs::read(dirs[0].path().join(&n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}

#[test]
fn different_seeds_give_different_samples() {
    let mut cfg = preset("two_spinless").unwrap();
    cfg.pec.samples = 20;
    let a = simulate(&cfg.clone().with_seed(1)).unwrap();
    let b = simulate(&cfg.with_seed(2)).unwrap();
    assert_ne!(a.steps[3].pec_records, b.steps[3].pec_records);
}

#[test]
fn crosstalk_hurts_pec_but_post_selection_recovers_sector() {
    let mut cfg = preset("three_spinless").unwrap().with_exact();
    cfg.pec.exact_inverse = true;
    cfg.noise.crosstalk =
        Some(pecsim::experiment::ChannelSpec::Depolarizing { p: Some(0.05), average_gate_fidelity: None });
    let b = mitigate(&simulate(&cfg).unwrap()).unwrap();
    let last = cfg.trotter.steps;
    let ideal = &b.population(Stage::Ideal, last).unwrap().values;
    let pec = &b.population(Stage::Pec, last).unwrap().values;
    let err: f64 = ideal.iter().zip(pec).map(|(a, b)| (a - b).abs()).sum();
    assert!(err > 1e-3, "cross-talk left no trace: {err}");
    let ps = &b.population(Stage::Ps, last).unwrap().values;
    assert!(ps.iter().enumerate().all(|(k, &p)| b.sector.contains(k) || p == 0.0));
}

#[test]
fn ideal_noise_gives_unit_fits() {
    for name in ["two_spinless", "two_site_spinful"] {
        let mut cfg = preset(name).unwrap().with_exact();
        cfg.noise = NoiseSpec::ideal();
        cfg.pec.exact_inverse = true;
        let b = mitigate(&simulate(&cfg).unwrap()).unwrap();
        for (stage, fit) in &b.fits {
            assert!((fit.per_gate - 1.0).abs() < 1e-12, "{name} {stage:?}");
        }
        assert!(b.steps.iter().all(|s| s.leakage.abs() < 1e-12));
    }
}

#[test]
fn three_site_trotter_leakage_is_removed_by_post_selection() {
    let mut cfg = preset("three_spinless").unwrap().with_exact();
    cfg.noise = NoiseSpec::ideal();
    cfg.pec.exact_inverse = true;
    let b = mitigate(&simulate(&cfg).unwrap()).unwrap();
    assert!(b.steps.iter().any(|s| s.leakage > 1e-3));
    assert!((b.fits[&Stage::Pec].per_gate - 1.0).abs() < 1e-12);
}
