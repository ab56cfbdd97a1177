//! End-to-end command tests: exit codes, document outputs, report
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_detkit"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    for a in args {
        cmd.arg(a);
    }
    cmd.output().expect("spawn detkit")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_wd_fig3_holds() {
    let out = run(&[
        "check",
        fixture("fig3.lsts").to_str().unwrap(),
        "--property",
        "wd",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("property: wd"));
    assert!(text.contains("result: holds"));
}

#[test]
fn check_sd_fig19_fails_with_witness() {
    let out = run(&[
        "check",
        fixture("fig19.lsts").to_str().unwrap(),
        "--property",
        "sd",
        "--witness",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("result: fails"));
    assert!(text.contains("witness:"));
    assert!(text.contains("loop:"));
}

#[test]
fn check_wad_fig10_holds() {
    let out = run(&[
        "check",
        fixture("fig10.lsts").to_str().unwrap(),
        "--property",
        "wad",
        "--partition",
        fixture("fig10.part").to_str().unwrap(),
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lsts");
    std::fs::write(&bad, "states: s0\ninitial: s0\nevent: a a\ntrans: s0 a s9\n").unwrap();
    let out = run(&["check", bad.to_str().unwrap(), "--property", "wd"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("s9"), "{err}");
}

#[test]
fn reports_are_byte_deterministic_without_timing() {
    let model = fixture("fig19.lsts");
    let args = [
        "check",
        model.to_str().unwrap(),
        "--property",
        "esd",
        "--witness",
        "--no-timing",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(!a.contains("timing_ms"));
    // With timing enabled a timing line appears.
    let with_timing = stdout(&run(&args[..args.len() - 1]));
    assert!(with_timing.contains("timing_ms"));
}

#[test]
fn construct_cc_matches_accessible_composition() {
    let out = run(&[
        "construct",
        fixture("fig19.lsts").to_str().unwrap(),
        "--what",
        "cc",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("states: s0__s0 s1__s1 s1__s2 s2__s1 s2__s2"));
    assert!(text.contains("trans: s0__s0 t3__t4 s1__s2"));
}

#[test]
fn construct_bifur_uses_fair_and_bifur_events() {
    let out = run(&[
        "construct",
        fixture("fig19.lsts").to_str().unwrap(),
        "--what",
        "bifur",
    ]);
    let text = stdout(&out);
    assert!(text.contains("event: fair fair"));
    assert!(text.contains("trans: s0 bifur s1"));
}

#[test]
fn construct_obs_of_transition_free_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.lsts");
    std::fs::write(&path, "states: s0 s1\ninitial: s0\nevent: a a\n").unwrap();
    let out = run(&["construct", path.to_str().unwrap(), "--what", "obs"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("trans:"));
}

#[test]
fn construct_detector_rejects_assumption_violations() {
    let out = run(&[
        "construct",
        fixture("fig19.lsts").to_str().unwrap(),
        "--what",
        "detector",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn petri_check_esd_fig15_names_item_2() {
    let out = run(&[
        "petri",
        fixture("fig15.net").to_str().unwrap(),
        "check",
        "--property",
        "esd",
        "--max-markings",
        "100",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("item 2"));
}

#[test]
fn petri_check_prompt_fig17_witness_uses_t4() {
    let out = run(&[
        "petri",
        fixture("fig17.net").to_str().unwrap(),
        "check",
        "--property",
        "prompt",
        "--max-depth",
        "20",
        "--witness",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains(" t4 "));
}

#[test]
fn petri_compose_fig6_matches_fig7() {
    let out = run(&["petri", fixture("fig6.net").to_str().unwrap(), "compose"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("places: p1__l p1__r p2__l p2__r"));
    assert!(text.contains("transition: b__b b"));
    assert!(!text.contains("phi"));
}

#[test]
fn petri_unfold_budget_exceeded_exits_2() {
    let out = run(&[
        "petri",
        fixture("fig17.net").to_str().unwrap(),
        "unfold",
        "--max-markings",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("50"), "{err}");
}

#[test]
fn petri_emit_yen_isd_pins_s1() {
    let out = run(&[
        "petri",
        fixture("fig6.net").to_str().unwrap(),
        "emit-yen",
        "--formula",
        "isd",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("markings: M1 M2 M3 M4"));
    assert!(text.contains("(= s1 r1g)"));
    assert!(text.contains("!=diff"));
}

#[test]
fn petri_bifurcation_answers_both_ways() {
    let yes = run(&[
        "petri",
        fixture("fig15.net").to_str().unwrap(),
        "bifurcation",
        "--sequence",
        "a b",
        "--no-timing",
    ]);
    assert_eq!(yes.status.code(), Some(0));
    assert!(stdout(&yes).contains("bifurcation: true"));

    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.net");
    std::fs::write(
        &plain,
        "places: p q\nmarking: p=1\ntransition: t1 a\ntransition: t2 b\n\
         arc: p -> t1 1\narc: t1 -> q 1\narc: q -> t2 1\narc: t2 -> p 1\n",
    )
    .unwrap();
    let no = run(&[
        "petri",
        plain.to_str().unwrap(),
        "bifurcation",
        "--sequence",
        "t1 t2",
        "--no-timing",
    ]);
    assert_eq!(no.status.code(), Some(1));
    assert!(stdout(&no).contains("bifurcation: false"));
}

#[test]
fn gen_coverability_adds_three_places() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.marking");
    std::fs::write(&target, "marking: p2=1\n").unwrap();
    let out = run(&[
        "gen",
        "coverability",
        fixture("fig6.net").to_str().unwrap(),
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("g_p0"));
    assert!(text.contains("sigma_g"));
}

#[test]
fn gen_langeq_on_equal_languages_is_not_wad() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.net");
    let g2 = dir.path().join("g2.net");
    std::fs::write(
        &g1,
        "places: x0\nmarking: x0=1\ntransition: xa a\narc: x0 -> xa 1\narc: xa -> x0 1\n",
    )
    .unwrap();
    std::fs::write(
        &g2,
        "places: y0\nmarking: y0=1\ntransition: ya a\narc: y0 -> ya 1\narc: ya -> y0 1\n",
    )
    .unwrap();
    let gadget = dir.path().join("gadget.net");
    let part = dir.path().join("gadget.part");
    let gen = run(&[
        "gen",
        "langeq",
        g1.to_str().unwrap(),
        g2.to_str().unwrap(),
        "--cells",
        "2",
        "-o",
        gadget.to_str().unwrap(),
        "--partition-out",
        part.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let unfolded = dir.path().join("gadget.lsts");
    let unfold = run(&[
        "petri",
        gadget.to_str().unwrap(),
        "unfold",
        "-o",
        unfolded.to_str().unwrap(),
    ]);
    assert_eq!(unfold.status.code(), Some(0));
    let check = run(&[
        "check",
        unfolded.to_str().unwrap(),
        "--property",
        "wad",
        "--partition",
        part.to_str().unwrap(),
        "--no-timing",
    ]);
    assert_eq!(check.status.code(), Some(1), "{}", stdout(&check));
}

#[test]
fn crosscheck_seed_sweep_agrees() {
    let out = run(&["crosscheck", "--seeds", "1..50", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("summary: 50 instances, 0 disagreements"));
}

#[test]
fn crosscheck_single_model_table() {
    let out = run(&[
        "crosscheck",
        fixture("fig5.lsts").to_str().unwrap(),
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("sd: fails/fails ok"));
    assert!(text.contains("esd: holds/holds ok"));
}
