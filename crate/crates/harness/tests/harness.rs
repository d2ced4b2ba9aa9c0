use std::fs;
use std::process::Command;

use holoxl_harness::config::SetSpec;
use holoxl_harness::emit::{write_summary, write_weights};
use holoxl_harness::runner::channel_hash;
use holoxl_harness::*;

fn quick() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seeds = vec![3];
    cfg.sets = vec![SetSpec("LP".parse().unwrap())];
    cfg.baselines = vec![Baseline::FdUpa];
    cfg.scenario.num_subcarriers = 2;
    cfg.solver.ao_max_iter = 5;
    cfg
}

#[test]
fn lp_and_fully_digital_share_a_channel() {
    let records = run_scenario(&quick(), 3).unwrap();
    assert_eq!(records.len(), 2);
    let lp = &records[0];
    let fd = &records[1];
    assert_eq!((lp.method.as_str(), fd.method.as_str()), ("LP", "fd_upa"));
    assert!(lp.error.is_none() && fd.error.is_none());
    assert!(lp.rate >= 0.0 && fd.rate >= 0.0);
    assert!(fd.rate >= lp.rate);
    assert_eq!(lp.channel_hash, fd.channel_hash);
    assert!((lp.rate_bps - lp.rate * 600e6 / 2.0).abs() <= 1e-6 * lp.rate_bps);
}

#[test]
fn same_config_and_seed_give_identical_records() {
    let cfg = quick();
    let strip = |mut v: Vec<ResultRecord>| {
        for r in &mut v {
            r.runtime_ms = 0.0;
            if let Some(t) = &mut r.trace {
                for it in &mut t.records {
                    it.timings = Default::default();
                }
            }
        }
        v
    };
    assert_eq!(strip(run_scenario(&cfg, 3).unwrap()), strip(run_scenario(&cfg, 3).unwrap()));
}

#[test]
fn seeds_give_distinct_channels() {
    let cfg = quick();
    let a = run_scenario(&cfg, 1).unwrap();
    let b = run_scenario(&cfg, 2).unwrap();
    assert_ne!(a[0].channel_hash, b[0].channel_hash);
}

#[test]
fn channel_hash_sees_every_entry() {
    let sc = holoxl::scenario::Scenario::build(&Default::default(), 0).unwrap();
    let mut other = sc.channels.clone();
    let z = &mut other.matrices[1][(7, 1)].im;
    *z = f64::from_bits(z.to_bits() + 1);
    assert_ne!(channel_hash(&sc.channels), channel_hash(&other));
}

#[test]
fn failed_cells_are_recorded_and_the_sweep_continues() {
    let mut cfg = quick();
    cfg.kind = Kind::Sweep;
    cfg.sweep = Some(Sweep {
        axis: SweepAxis::ArrayLength,
        values: vec![0.3, 2.0],
    });
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.failures(), 1);
    let failed = out.records.iter().find(|r| r.error.is_some()).unwrap();
    assert_eq!((failed.method.as_str(), failed.point), ("scenario", 0));
    assert!(failed.error.as_ref().unwrap().starts_with("geometry"), "{:?}", failed.error);
    assert_eq!(out.records.iter().filter(|r| r.point == 1 && r.error.is_none()).count(), 2);
    let rows = summarize(&out.records);
    assert_eq!(rows[0].n_failed, 1);
    assert!(rows[0].mean_rate.is_nan());
}

#[test]
fn summary_of_nothing_is_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    write_summary(&path, &summarize(&[])).unwrap();
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "axis,value,method,mean_rate,std_rate,mean_rate_bps,n_seeds,n_failed\n"
    );
}

#[test]
fn one_record_one_row() {
    let records = run_scenario(&quick(), 3).unwrap();
    let rows = summarize(&records[..1]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].mean_rate, records[0].rate);
    assert_eq!(rows[0].std_rate, 0.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    write_summary(&path, &rows).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let field: f64 = text.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(field, records[0].rate, "full precision survives the round trip");
}

#[test]
fn emission_is_byte_stable() {
    let mut cfg = quick();
    cfg.export_channels = true;
    let out = run_sweep(&cfg).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    emit_results(&out, a.path()).unwrap();
    emit_results(&out, b.path()).unwrap();
    for file in ["summary.csv", "records.csv", "config.json", "channels/seed_3/subcarrier_1.csv", "weights/s3_LP.csv"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let echo: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["config_hash"], out.config_hash);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("channels/seed_3/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["model_tag"], "spherical");
    assert_eq!(meta["rows"], 40);
}

#[test]
fn exported_channels_parse_back() {
    let mut cfg = quick();
    cfg.export_channels = true;
    let out = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&out, dir.path()).unwrap();
    let g = &out.channels[0].1.matrices[0];
    let text = fs::read_to_string(dir.path().join("channels/seed_3/subcarrier_0.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert_eq!(f[2].parse::<f64>().unwrap(), g[(i, j)].re);
        assert_eq!(f[3].parse::<f64>().unwrap(), g[(i, j)].im);
        rows += 1;
    }
    assert_eq!(rows, g.nrows() * g.ncols());
}

#[test]
fn weights_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let q = holoxl::linalg::CVector::from_vec(vec![holoxl::linalg::C64::new(0.5, -0.25)]);
    write_weights(&path, holoxl::frontend::FeasibleSet::Unconstrained, &q).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "index,re,im,set\n0,0.5,-0.25,UC\n");
}

fn holoxl_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holoxl"))
}

#[test]
fn cli_run_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[scenario]\nnum_subcarriers = 2\n[solver]\nao_max_iter = 3\n").unwrap();
    let out = dir.path().join("out");
    let status = holoxl_bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seeds", "0..2", "--sets", "AO[0.01,2],UC", "--baselines", "fd_ula", "--threads", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4, "{summary}");
    assert!(summary.contains("\"AO[0.01,2]\""));
    assert!(out.join("traces/p0_s1_UC.csv").exists());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[scenario]\nnot_a_field = 1\n").unwrap();
    let code = |args: &[&str]| holoxl_bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["run", "--sets", "XX"]), Some(2));
    assert_eq!(code(&["sweep"]), Some(2), "sweep without a [sweep] table");
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&["run", "--config", missing.to_str().unwrap()]), Some(3));

    let failing = dir.path().join("failing.toml");
    fs::write(
        &failing,
        "kind = \"sweep\"\nsets = [\"UC\"]\n[sweep]\naxis = \"array_length\"\nvalues = [0.3]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = holoxl_bin()
        .args(["sweep", "--seeds", "0", "--config", failing.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    assert!(fs::read_to_string(out.join("records.csv")).unwrap().contains("geometry"));
}

#[test]
fn shipped_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
