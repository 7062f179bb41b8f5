use std::path::{Path, PathBuf};
use std::process::Command;

use spherelab::harness::{
    emit_csv, load_csv, run_calibration, run_mac, run_sweep, to_csv, to_svg, Detector,
    ExperimentConfig, CSV_HEADER,
};
use spherelab::mac::{theorem1_limits, InfoSetSpec};
use spherelab::model::rho_from_total_db;
use spherelab::numerics::Rng;
use spherelab::Error;

const BASE: &str = r#"
scenario = "flat-mimo"
L = 4
K = 4
snr_grid_db = [-4.0, 4.0, 12.0]
trials = 400
seed = 3

[modulation]
kind = "pam"
M = 2

[[detectors]]
kind = "ml"

[[detectors]]
kind = "sd"
radius = "lattice-independent"

[[detectors]]
kind = "sd"
radius = "lattice-dependent"

[[detectors]]
kind = "mmse"
"#;

fn parse(text: &str, dir: &Path) -> ExperimentConfig {
    ExperimentConfig::from_toml(text, &dir.join("experiment.toml")).unwrap()
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spherelab"));
    cmd.env_remove("SPHERELAB_SEED");
    cmd
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn sphere_decoder_sweeps_reproduce_ml_errors() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&parse(BASE, dir.path())).unwrap();
    let ml = result.series("ML");
    for label in ["FP-SD", "SE-SD"] {
        let sd = result.series(label);
        assert_eq!(sd.len(), ml.len());
        for (a, b) in sd.iter().zip(&ml) {
            assert_eq!(a.ser, b.ser, "{label} at {} dB", a.snr_total_db);
            assert!(a.mean_nodes >= 5.0);
        }
    }
    let mmse = result.series("MMSE");
    assert!(mmse.iter().zip(&ml).all(|(a, b)| a.ser >= b.ser));
}

#[test]
fn detectors_share_the_decision_on_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse(BASE, dir.path());
    let channel = config.channel().unwrap();
    let c = config.modulation.build().unwrap();
    let detectors: Vec<Detector> = config
        .detectors
        .iter()
        .map(|d| Detector::prepare(d, &config).unwrap())
        .collect();
    let mut rng = Rng::new(4);
    for db in [-4.0, 4.0] {
        for _ in 0..300 {
            let (model, _) = channel
                .draw_instance(&c, rho_from_total_db(db, 4), &mut rng)
                .unwrap();
            let ml = detectors[0].run(&model).unwrap().s_hat;
            assert_eq!(detectors[1].run(&model).unwrap().s_hat, ml);
            assert_eq!(detectors[2].run(&model).unwrap().s_hat, ml);
        }
    }
}

#[test]
fn equal_seeds_give_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse(BASE, dir.path());
    let a = to_csv(&run_sweep(&config).unwrap());
    assert_eq!(a, to_csv(&run_sweep(&config).unwrap()));
    let mut other = config.clone();
    other.seed = 4;
    assert_ne!(a, to_csv(&run_sweep(&other).unwrap()));
    assert_eq!(a.lines().next().unwrap(), CSV_HEADER.join(","));
}

#[test]
fn csv_files_round_trip_and_svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&parse(BASE, dir.path())).unwrap();
    let path = dir.path().join("out/sweep.csv");
    emit_csv(&result, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), result);

    let svg = to_svg(&result);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let text: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
    for label in result.detectors() {
        assert!(text.contains(&label.as_str()), "legend misses {label}");
    }
}

#[test]
fn calibrated_table_drives_an_lsr_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{BASE}\n[[detectors]]\nkind = \"lsr\"\ninitial = \"mmse\"\nradius = \"lattice-dependent\"\ntable = \"tables/t.toml\"\n\n\
         [calibration]\ninitial = \"mmse\"\ntrials = 4000\nmin_error_events = 0\n\n[output]\ntable = \"tables/t.toml\"\n"
    );
    let path = dir.path().join("experiment.toml");
    let config = ExperimentConfig::from_toml(&text, &path).unwrap();
    let table = run_calibration(&config).unwrap();
    assert!(dir.path().join("tables/t.toml").exists());
    assert_eq!(table.snr_grid_db, config.snr_grid_db);

    let result = run_sweep(&config).unwrap();
    let lsr_label = result
        .detectors()
        .into_iter()
        .find(|l| l.starts_with("LSR"))
        .unwrap();
    for (lsr, ml) in result.series(&lsr_label).iter().zip(result.series("ML")) {
        let (p, q) = (lsr.ser.unwrap(), ml.ser.unwrap());
        assert!(
            (p - q).abs() <= 2.0 * lsr.ser_ci.unwrap().max(ml.ser_ci.unwrap()).max(1e-3),
            "{p} vs {q}"
        );
        assert!(lsr.mean_kr.is_some() && lsr.p_kr0.is_some());
        assert!(ml.mean_kr.is_none());
    }
    assert_eq!(result.series(&lsr_label)[0].mean_nodes, 0.0);
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("experiment.toml");
    let zero = BASE.replace("trials = 400", "trials = 0");
    assert!(matches!(
        ExperimentConfig::from_toml(&zero, &path),
        Err(Error::Config(_))
    ));
    let descending = BASE.replace("[-4.0, 4.0, 12.0]", "[4.0, -4.0]");
    assert!(matches!(
        ExperimentConfig::from_toml(&descending, &path),
        Err(Error::Config(_))
    ));
    let unknown = format!("{BASE}\nfrobnicate = 1\n");
    assert!(matches!(
        ExperimentConfig::from_toml(&unknown, &path),
        Err(Error::Parse { .. })
    ));
    let tableless = format!("{BASE}\n[[detectors]]\nkind = \"lsr\"\n");
    assert!(ExperimentConfig::from_toml(&tableless, &path).is_err());
}

#[test]
fn mac_runs_stay_within_the_theorem_limits() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{BASE}\n[mac]\nouter = 6\ninner = 400\nbins = 4\nmin_bin_occupancy = 16\n");
    let config = parse(&text, dir.path());
    let (lo, hi) = theorem1_limits(4);
    for spec in [
        InfoSetSpec::RadiusLi { epsilon: 0.01 },
        InfoSetSpec::RadiusLd,
        InfoSetSpec::MmsePoint,
    ] {
        let curve = run_mac(&config, spec).unwrap();
        for v in curve.mac_values {
            assert!((hi - 1e-9..=lo + 1e-9).contains(&v), "{spec}: {v}");
        }
    }
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = bin().arg("version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("spherelab "));

    let status = |cmd: &mut Command| cmd.output().unwrap().status.code();
    let mac = |spec: &str| {
        let mut cmd = bin();
        cmd.args(["mac", "--config"])
            .arg(&config)
            .args(["--info-set", spec, "--out"])
            .arg(dir.path().join("m.csv"));
        cmd
    };
    assert_eq!(status(&mut mac("widest-point")), Some(1));
    assert_eq!(
        status(bin().args(["sweep", "--config", "/nonexistent/x.toml", "--out", "x.csv"])),
        Some(2)
    );
    assert_eq!(status(bin().args(["verify", "--trials", "20"])), Some(0));
    assert_eq!(status(bin().arg("frobnicate")), Some(2));
}

#[test]
fn seed_environment_variable_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let sweep = |out: &str, seed: Option<&str>| {
        let mut cmd = bin();
        cmd.args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out));
        if let Some(s) = seed {
            cmd.env("SPHERELAB_SEED", s);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(sweep("a.csv", Some("4")), Some(0));
    let mut reseeded = parse(BASE, dir.path());
    reseeded.seed = 4;
    let expected = to_csv(&run_sweep(&reseeded).unwrap());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("a.csv")).unwrap(),
        expected
    );
    assert_eq!(sweep("b.csv", Some("four")), Some(1));
}
