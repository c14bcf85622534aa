// SPDX-License-Identifier: Apache-2.0

//! End-to-end CLI tests over the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_def2graph"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn def2graph")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn parse_reports_listing_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["parse", fixture("listing1.def").to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("design = ac97_top"));
    assert!(text.contains("dbu_per_micron = 2000"));
    assert!(text.contains("stage = routing"));
}

#[test]
fn parse_emit_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let listing = fixture("listing1.def");
    let out1 = run(&["parse", listing.to_str().unwrap(), "--emit"], dir.path());
    assert!(out1.status.success());
    let canon = dir.path().join("canon.def");
    std::fs::write(&canon, &out1.stdout).unwrap();
    let out2 = run(&["parse", canon.to_str().unwrap(), "--emit"], dir.path());
    assert!(out2.status.success());
    assert_eq!(out1.stdout, out2.stdout);
}

#[test]
fn build_listing_all_views_with_parity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "build",
            fixture("listing1_complete.def").to_str().unwrap(),
            "--view",
            "all",
            "--stage",
            "route",
            "-o",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("parity PASS"));
    for v in ["b", "c", "d", "e", "f"] {
        assert!(dir.path().join("out").join(v).join("manifest").is_file());
    }
    assert!(dir.path().join("out/vocab.tsv").is_file());
}

#[test]
fn build_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let def = fixture("listing1_complete.def");
    for o in ["a", "b"] {
        let out = run(
            &["build", def.to_str().unwrap(), "--view", "all", "-o", o],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let diff = Command::new("diff")
        .args(["-r", "a", "b"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(diff.status.success(), "trees differ: {diff:?}");
}

#[test]
fn gen_build_merge_split_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    for (i, seed) in [(1, "11"), (2, "22"), (3, "33")] {
        let def = format!("d{i}.def");
        let out = run(
            &[
                "gen", "--gates", "30", "--fanout", "2", "--io", "4", "--seed", seed, "-o", &def,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{out:?}");
        assert!(dir.path().join(format!("d{i}.truth")).is_file());
        assert!(dir.path().join(format!("d{i}.tech")).is_file());
        let tech = format!("d{i}.tech");
        let out = run(
            &[
                "build", &def, "--view", "b", "--tech", &tech, "--homo", "-o",
                &format!("out{i}"),
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{out:?}");
    }
    let out = run(
        &[
            "merge", "out1/b-homo", "out2/b-homo", "out3/b-homo", "-o", "merged",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let out = run(&["split", "merged", "--seed", "5"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("designs = 1/1/1"));
    assert!(dir.path().join("merged/splits").is_file());
    assert!(dir.path().join("merged/tables/split.__train").is_file());
}

#[test]
fn split_with_two_designs_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    for (i, seed) in [(1, "1"), (2, "2")] {
        run(
            &["gen", "--gates", "10", "--seed", seed, "-o", &format!("d{i}.def")],
            dir.path(),
        );
        run(
            &[
                "build",
                &format!("d{i}.def"),
                "--view",
                "b",
                "--homo",
                "-o",
                &format!("out{i}"),
            ],
            dir.path(),
        );
    }
    run(&["merge", "out1/b-homo", "out2/b-homo", "-o", "m2"], dir.path());
    let out = run(
        &["split", "m2", "--ratios", "70,15,15", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too few designs"));
}

#[test]
fn validate_def_passes() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--gates", "25", "--seed", "4", "-o", "d.def"], dir.path());
    let out = run(&["validate", "d.def"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("validate PASS"));
}

#[test]
fn stats_runs_on_def_and_bundle() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--gates", "25", "--seed", "4", "-o", "d.def"], dir.path());
    let out = run(&["stats", "d.def", "--exact"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("avg_degree ="));
    run(&["build", "d.def", "--view", "f", "-o", "out"], dir.path());
    let out2 = run(&["stats", "out/f", "--sample", "10", "--seed", "3"], dir.path());
    assert!(out2.status.success(), "{out2:?}");
    assert!(stdout(&out2).contains("path_mode = sampled(k=10,seed=3)"));
}

#[test]
fn usage_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--gates", "5", "--seed", "1", "-o", "d.def"], dir.path());
    let out = run(&["build", "d.def", "--view", "z", "-o", "out"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["parse", "nope.def"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_provides_defaults_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg"), "seed = 77\nview = f\n").unwrap();
    run(&["gen", "--gates", "12", "--seed", "1", "-o", "d.def"], dir.path());
    // config's view=f applies when the flag is absent
    let out = run(
        &["--config", "cfg", "build", "d.def", "-o", "outc"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("outc/f/manifest").is_file());
    assert!(!dir.path().join("outc/b").exists());
    // flag overrides config
    let out = run(
        &["--config", "cfg", "build", "d.def", "--view", "b", "-o", "outf"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("outf/b/manifest").is_file());
    assert!(!dir.path().join("outf/f").exists());
}

#[test]
fn r2g_threads_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--gates", "20", "--seed", "9", "-o", "d.def"], dir.path());
    let out = bin()
        .args(["build", "d.def", "--view", "all", "-o", "out"])
        .env("R2G_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("parity PASS"));
}
