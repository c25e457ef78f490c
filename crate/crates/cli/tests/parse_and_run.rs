//! Parser diagnostics, workspace construction, command dispatch, and
//! the serialize/parse round trip for audit counterexamples.

use projres::error::Error;
use projres::lab::{
    mix, random_algebra, random_module, random_ses, replay_instance, serialize_instance,
    AuditSuite, GenParams, ReplayOutcome,
};
use projres::algebra::build_algebra;
use projres::horseshoe::ShortExactSequence;
use projres::module::Module;
use projres_cli::parse::{parse, Workspace};
use projres_cli::run::{audit, run, Command};

use std::sync::Arc;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

fn parse_err(source: &str) -> (usize, usize, String) {
    match parse(source) {
        Err(Error::Parse { line, col, message }) => (line, col, message),
        Err(other) => panic!("expected a located parse error, got {other}"),
        Ok(_) => panic!("expected a parse error, got a workspace"),
    }
}

#[test]
fn empty_file_reports_no_algebra_block() {
    let (line, col, message) = parse_err("");
    assert_eq!((line, col), (1, 1));
    assert_eq!(message, "no algebra block");
}

#[test]
fn comments_and_blank_lines_alone_still_report_no_algebra_block() {
    let (_, _, message) = parse_err("# a comment\n\n# another\n");
    assert_eq!(message, "no algebra block");
}

#[test]
fn arrow_with_undeclared_vertex_is_located() {
    let src = "field Q\nalgebra graded D=6\nvertex v\narrow x: v -> w\n";
    let (line, col, message) = parse_err(src);
    assert_eq!((line, col), (4, 15));
    assert_eq!(message, "unknown vertex `w`");
}

#[test]
fn float_literals_are_rejected_with_location() {
    let src = "field Q\nalgebra findim N=2\nvertex v\narrow x: v -> v\nrelation 1*x.x\n\
               module M\nspace v deg 0 dim 1\nact x deg 0 = [[0.5]]\n";
    let (line, _, message) = parse_err(src);
    assert_eq!(line, 8);
    assert!(message.contains("floating point"), "got: {message}");
}

#[test]
fn duplicate_names_are_rejected() {
    let base = "field Q\nalgebra graded D=4\nvertex v\narrow x: v -> v\n";
    let dup_vertex = "field Q\nalgebra graded D=4\nvertex v\nvertex v\n";
    assert!(parse_err(dup_vertex).2.contains("already declared"));
    let dup_module = format!("{base}module M = simple v\nmodule M = simple v\n");
    assert!(parse_err(&dup_module).2.contains("already defined"));
    let clash = format!("{base}module M = simple v\nmap M: M -> M\n");
    assert!(parse_err(&clash).2.contains("already used"));
}

#[test]
fn relations_must_be_admissible_for_the_mode() {
    // terms shorter than two arrows are rejected at their own line
    let src = "field Q\nalgebra graded D=4\nvertex v\narrow x: v -> v\n\
               relation 1*x.x + 1*x\nmodule M = simple v\n";
    let (line, _, message) = parse_err(src);
    assert_eq!(line, 5, "got: {message}");
    assert!(message.contains("length at least 2"), "got: {message}");
    // admissible but inhomogeneous relations fail when the algebra assembles
    let src = "field Q\nalgebra graded D=4\nvertex v\narrow x: v -> v\n\
               relation 1*x.x + 1*x.x.x\nmodule M = simple v\n";
    let (line, _, message) = parse_err(src);
    assert_eq!(line, 2, "got: {message}");
    assert!(message.contains("homogeneous"), "got: {message}");
}

#[test]
fn nonprime_field_is_rejected() {
    let (_, _, message) = parse_err("field F6\nalgebra graded D=4\nvertex v\n");
    assert!(message.contains("not prime"), "got: {message}");
}

#[test]
fn prime_field_scalars_parse() {
    let src = "field F5\nalgebra findim N=2\nvertex v\narrow x: v -> v\nrelation 1*x.x\n\
               module M\nspace v deg 0 dim 2\nact x deg 0 = [[0,3],[0,0]]\n";
    let ws = parse(src).expect("valid F5 workspace");
    assert_eq!(ws.modules["M"].dim(0, 0), 2);
}

#[test]
fn matrix_shape_mismatch_is_located() {
    let src = "field Q\nalgebra graded D=4\nvertex v\narrow x: v -> v\n\
               module M\nspace v deg 0 dim 1\nspace v deg 1 dim 1\nact x deg 0 = [[1,2]]\n";
    let (line, _, message) = parse_err(src);
    assert_eq!(line, 8);
    assert!(message.contains("matrix is 1x2, slot needs 1x1"), "got: {message}");
}

#[test]
fn findim_modules_live_in_degree_zero() {
    let src = "field Q\nalgebra findim N=2\nvertex v\narrow x: v -> v\nrelation 1*x.x\n\
               module M\nspace v deg 1 dim 1\n";
    let (_, _, message) = parse_err(src);
    assert!(message.contains("degree 0"), "got: {message}");
}

#[test]
fn ses_endpoint_mismatch_is_reported() {
    let src = "field Q\nalgebra graded D=4\nvertex v\narrow x: v -> v\n\
               module K = simple v\nmodule M = simple v\nmodule N = simple v\n\
               map i: K -> M\nmap p: M -> N\nses xi = K -p-> M -i-> N\n";
    let (_, _, message) = parse_err(src);
    assert!(message.contains("connects"), "got: {message}");
}

#[test]
fn the_interval_example_file_builds_the_expected_workspace() {
    let ws = parse(&fixture("kx_interval.alg")).expect("fixture parses");
    for name in ["A", "K", "M", "N"] {
        assert!(ws.modules.contains_key(name), "missing module {name}");
    }
    for name in ["i", "p"] {
        assert!(ws.maps.contains_key(name), "missing map {name}");
    }
    assert!(ws.sequences.contains_key("xi"), "missing sequence xi");
    let m = &ws.modules["M"];
    assert_eq!(m.dim(0, 0), 1);
    assert_eq!(m.dim(1, 0), 1);
    assert_eq!(m.dim(2, 0), 0);
    // A is free of rank one: dimension 1 in every degree through the wall
    let a = &ws.modules["A"];
    for d in 0..=6 {
        assert_eq!(a.dim(d, 0), 1, "free module layer {d}");
    }
}

#[test]
fn shorthand_modules_match_their_longhand_definitions() {
    let long = "field Q\nalgebra graded D=3\nvertex v\narrow x: v -> v\n\
                module S\nspace v deg 1 dim 1\n";
    let short = "field Q\nalgebra graded D=3\nvertex v\narrow x: v -> v\n\
                 module S = simple v deg 1\n";
    let a = parse(long).expect("longhand parses");
    let b = parse(short).expect("shorthand parses");
    assert!(same_rep_across_tables(&a.modules["S"], &b.modules["S"]));
}

/// Representation equality that tolerates distinct (but equal) algebra
/// tables, for comparing modules across independent parses.
fn same_rep_across_tables(a: &Module, b: &Module) -> bool {
    if a.dims() != b.dims() || a.is_graded() != b.is_graded() {
        return false;
    }
    let layers = if a.is_graded() { a.validity() } else { 1 };
    let arrows = a.algebra().quiver().arrow_count();
    (0..layers).all(|d| (0..arrows).all(|ar| a.act(d, ar) == b.act(d, ar)))
}

fn random_instance(suite: AuditSuite, seed: u64) -> (String, ShortExactSequence) {
    let p = if suite == AuditSuite::BettiVsCriteria {
        GenParams::graded(seed)
    } else {
        GenParams::findim(seed)
    };
    let p = GenParams { seed: mix(p.seed, 0), ..p };
    let spec = random_algebra(&p);
    let table = Arc::new(build_algebra(spec.clone()).expect("generated algebras build"));
    let m = random_module(&p, &table).expect("generated modules validate");
    let s = random_ses(&p, &m);
    let text = serialize_instance(p.seed, &[format!("suite {suite}")], &spec, &s);
    (text, s)
}

#[test]
fn serialized_instances_reparse_to_equal_workspaces() {
    for (suite, seed) in [
        (AuditSuite::Equivalents, 42u64),
        (AuditSuite::Equivalents, 43),
        (AuditSuite::BettiVsCriteria, 44),
        (AuditSuite::BettiVsCriteria, 45),
    ] {
        let (text, original) = random_instance(suite, seed);
        let ws = parse(&text).unwrap_or_else(|e| panic!("instance must reparse, got {e}\n{text}"));
        let s = &ws.sequences["xi"];
        for (theirs, ours, name) in [
            (s.k(), original.k(), "K"),
            (s.m(), original.m(), "M"),
            (s.n(), original.n(), "N"),
        ] {
            assert!(same_rep_across_tables(theirs, ours), "{name} differs after round trip\n{text}");
        }
        for (theirs, ours, name) in [(s.i(), original.i(), "i"), (s.p(), original.p(), "p")] {
            let dims = theirs.domain().dims();
            let equal = dims.iter().enumerate().all(|(d, layer)| {
                (0..layer.len()).all(|v| theirs.block(d, v) == ours.block(d, v))
            });
            assert!(equal, "map {name} differs after round trip\n{text}");
        }
    }
}

#[test]
fn replay_of_a_reparsed_instance_matches_the_direct_outcome() {
    for (suite, seed) in [(AuditSuite::Equivalents, 2u64), (AuditSuite::BettiVsCriteria, 11)] {
        let p = if suite == AuditSuite::BettiVsCriteria {
            GenParams::graded(seed)
        } else {
            GenParams::findim(seed)
        };
        let (text, original) = random_instance(suite, seed);
        let ws = parse(&text).expect("instance reparses");
        let direct = replay_instance(suite, &original, p.n_max);
        let replayed = replay_instance(suite, &ws.sequences["xi"], p.n_max);
        assert_eq!(direct, replayed, "replay diverged for {suite} seed {seed}\n{text}");
        assert!(
            !matches!(direct, ReplayOutcome::Fail(_)),
            "generated instance unexpectedly violates {suite}"
        );
    }
}

fn ws(name: &str) -> Workspace {
    parse(&fixture(name)).expect("fixture parses")
}

#[test]
fn resolve_command_prints_the_interval_betti_table() {
    let r = run(
        &ws("kx_interval.alg"),
        &Command::Resolve { module: "N".into(), n_max: 6 },
        false,
    );
    assert_eq!(r.code, 0);
    assert!(r.out.contains("0: 0\n1: 1"), "got: {}", r.out);
}

#[test]
fn resolve_machine_lines_are_prefix_tagged() {
    let r = run(
        &ws("kx_interval.alg"),
        &Command::Resolve { module: "N".into(), n_max: 6 },
        true,
    );
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "betti 0 v:0x1\nbetti 1 v:1x1\nstatus terminated\npd finite 1\n");
}

#[test]
fn unknown_names_exit_with_input_error() {
    let w = ws("kx_interval.alg");
    let r = run(&w, &Command::Resolve { module: "Z".into(), n_max: 6 }, false);
    assert_eq!(r.code, 3);
    assert!(r.out.contains("unknown module `Z`"));
    let r = run(&w, &Command::Mhl { ses: "eta".into(), n_max: 6 }, false);
    assert_eq!(r.code, 3);
    let r = run(
        &w,
        &Command::Koszul { module: "N".into(), delta: "dkoszul:1".into(), n_max: 6 },
        false,
    );
    assert_eq!(r.code, 3, "profile below 2 is an input error: {}", r.out);
}

#[test]
fn mhl_command_reports_the_radical_gap_with_exit_one() {
    let r = run(&ws("kx_interval.alg"), &Command::Mhl { ses: "xi".into(), n_max: 6 }, false);
    assert_eq!(r.code, 1);
    assert!(
        r.out.contains("radical condition FAILS at (degree 1, v): dim JK=0 < dim K\u{2229}JM=1"),
        "got: {}",
        r.out
    );
}

#[test]
fn koszul_command_certifies_the_top_of_the_interval() {
    let r = run(
        &ws("kx_interval.alg"),
        &Command::Koszul { module: "N".into(), delta: "koszul".into(), n_max: 6 },
        false,
    );
    assert_eq!(r.code, 0);
    assert!(r.out.contains("overall: certified"), "got: {}", r.out);
    assert!(r.out.contains("delta(0..=6): 0 1 2 3 4 5 6"), "got: {}", r.out);
}

#[test]
fn koszul_infer_reads_the_profile_off_a_graded_resolution() {
    let r = run(
        &ws("kx_interval.alg"),
        &Command::Koszul { module: "M".into(), delta: "infer".into(), n_max: 6 },
        false,
    );
    assert_eq!(r.code, 0, "got: {}", r.out);
    assert!(r.out.contains("inferred:0,2"), "got: {}", r.out);
}

#[test]
fn koszul_infer_is_an_input_error_for_ungraded_resolutions() {
    // shapes over a finite-dimensional algebra carry no degrees, so
    // there is nothing to read a profile from
    let r = run(
        &ws("x3.alg"),
        &Command::Koszul { module: "S".into(), delta: "infer".into(), n_max: 6 },
        false,
    );
    assert_eq!(r.code, 3, "got: {}", r.out);
}

#[test]
fn horseshoe_classic_exposes_the_nonminimal_middle() {
    let r = run(
        &ws("kx_interval.alg"),
        &Command::Horseshoe { ses: "xi".into(), classic: true, n_max: 6 },
        false,
    );
    assert_eq!(r.code, 0, "classic construction is exact: {}", r.out);
    assert!(r.out.contains("L={(v,0), (v,1)}"), "got: {}", r.out);
    assert!(r.out.contains("not minimal"), "got: {}", r.out);
}

#[test]
fn audit_command_rejects_unknown_suites_and_runs_known_ones() {
    let r = audit("nonsense", 5, 1, false);
    assert_eq!(r.code, 3);
    let r = audit("equivalents", 6, 9, false);
    assert!(r.code == 0 || r.code == 2, "small clean batch: {}", r.out);
    assert!(r.out.starts_with("audit equivalents trials 6"), "got: {}", r.out);
}

#[test]
fn exit_codes_depend_only_on_the_verdict() {
    // same command, human and machine rendering: identical codes
    let w = ws("x2_radical.alg");
    for machine in [false, true] {
        let r = run(&w, &Command::Mhl { ses: "xi".into(), n_max: 6 }, machine);
        assert_eq!(r.code, 1);
    }
    for machine in [false, true] {
        let r = run(&w, &Command::Resolve { module: "N".into(), n_max: 4 }, machine);
        assert_eq!(r.code, 0);
    }
}
