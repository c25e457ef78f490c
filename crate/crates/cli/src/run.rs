//! Command dispatch over a parsed workspace.
//!
//! Every command returns a `RunResult`: the full report text and the
//! exit code. Codes encode the verdict and nothing else: 0 certified or
//! true, 1 fails or false (with the witness in the report), 2
//! undetermined, 3 input error. The `machine` flag switches the report
//! to prefix-tagged single-fact lines.

use projres::error::Error;
use projres::horseshoe::{
    build_minimal_horseshoe, classic_horseshoe, verify_diagram, HorseshoeDiagram,
};
use projres::koszul::{certify_delta_koszul, check_criteria, delta_eval, infer_delta};
use projres::lab::{run_audit, AuditSuite, GenParams};
use projres::resolution::{
    betti_machine_lines, betti_table, minimal_resolution, projective_dimension,
    ProjectiveDimension, Resolution,
};
use projres::verdict::Verdict;
use projres::DeltaProfile;

use crate::parse::Workspace;

pub const DEFAULT_N_MAX: usize = 6;

/// One executed command: what to print and how to exit.
pub struct RunResult {
    pub code: i32,
    pub out: String,
}

/// Workspace commands. Audits take no workspace; see `audit`.
pub enum Command {
    Resolve { module: String, n_max: usize },
    Koszul { module: String, delta: String, n_max: usize },
    Mhl { ses: String, n_max: usize },
    Horseshoe { ses: String, classic: bool, n_max: usize },
}

fn input_error(message: impl Into<String>) -> RunResult {
    RunResult { code: 3, out: format!("error: {}\n", message.into()) }
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Certified => 0,
        Verdict::CertifiedUpTo(_) => 2,
        Verdict::Fails(_) => 1,
    }
}

pub fn run(ws: &Workspace, cmd: &Command, machine: bool) -> RunResult {
    match cmd {
        Command::Resolve { module, n_max } => resolve(ws, module, *n_max, machine),
        Command::Koszul { module, delta, n_max } => koszul(ws, module, delta, *n_max, machine),
        Command::Mhl { ses, n_max } => mhl(ws, ses, *n_max, machine),
        Command::Horseshoe { ses, classic, n_max } => {
            horseshoe(ws, ses, *classic, *n_max, machine)
        }
    }
}

fn module_of<'a>(ws: &'a Workspace, name: &str) -> Result<&'a projres::Module, RunResult> {
    ws.modules.get(name).ok_or_else(|| input_error(format!("unknown module `{name}`")))
}

fn ses_of<'a>(
    ws: &'a Workspace,
    name: &str,
) -> Result<&'a projres::ShortExactSequence, RunResult> {
    ws.sequences.get(name).ok_or_else(|| input_error(format!("unknown sequence `{name}`")))
}

fn resolution_status(r: &Resolution) -> &'static str {
    if r.terminated() {
        "terminated"
    } else if r.truncated() {
        "truncated"
    } else {
        "bounded"
    }
}

fn pd_machine_line(pd: &ProjectiveDimension) -> String {
    match pd {
        ProjectiveDimension::Finite(n) => format!("pd finite {n}"),
        ProjectiveDimension::AtLeast(n) => format!("pd atleast {n}"),
        ProjectiveDimension::Undetermined(n) => format!("pd undetermined {n}"),
    }
}

fn resolve(ws: &Workspace, module: &str, n_max: usize, machine: bool) -> RunResult {
    let m = match module_of(ws, module) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let r = match minimal_resolution(m, n_max) {
        Ok(r) => r,
        Err(e) => return input_error(e.to_string()),
    };
    let pd = projective_dimension(&r);
    let code = if r.truncated() { 2 } else { 0 };
    let out = if machine {
        let mut lines = betti_machine_lines(&r);
        lines.push(format!("status {}", resolution_status(&r)));
        lines.push(pd_machine_line(&pd));
        lines.join("\n") + "\n"
    } else {
        let table = betti_table(&r);
        let status = format!("status: {}; {}", resolution_status(&r), pd);
        if table.is_empty() {
            format!("Betti table of {module}: empty (zero module)\n{status}\n")
        } else {
            format!("Betti table of {module}:\n{table}\n{status}\n")
        }
    };
    RunResult { code, out }
}

/// `koszul`, `dkoszul:<d>`, `piecewise:<d>:<p>`, `custom:<c0,c1,...>`,
/// or `infer` (read the profile off the module's own resolution).
fn parse_profile(text: &str) -> Result<Option<DeltaProfile>, String> {
    if text == "infer" {
        return Ok(None);
    }
    if text == "koszul" {
        return Ok(Some(DeltaProfile::koszul()));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| format!("expected an integer, found `{s}`"));
    if let Some(rest) = text.strip_prefix("dkoszul:") {
        return DeltaProfile::d_koszul(int(rest)?).map(Some).map_err(|e| e.to_string());
    }
    if let Some(rest) = text.strip_prefix("piecewise:") {
        let (d, p) = rest
            .split_once(':')
            .ok_or_else(|| format!("expected `piecewise:<d>:<p>`, found `{text}`"))?;
        return DeltaProfile::piecewise(int(d)?, int(p)?).map(Some).map_err(|e| e.to_string());
    }
    if let Some(rest) = text.strip_prefix("custom:") {
        let table: Result<Vec<usize>, String> = rest.split(',').map(int).collect();
        return DeltaProfile::custom(table?).map(Some).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown profile `{text}`; expected koszul, dkoszul:<d>, piecewise:<d>:<p>, custom:<c,...>, or infer"
    ))
}

fn delta_values_line(p: &DeltaProfile, n_max: usize) -> String {
    let mut values = Vec::new();
    for n in 0..=n_max {
        match delta_eval(p, n) {
            Ok(v) => values.push(v.to_string()),
            Err(_) => break,
        }
    }
    format!("delta(0..={n_max}): {}", values.join(" "))
}

fn koszul(ws: &Workspace, module: &str, delta: &str, n_max: usize, machine: bool) -> RunResult {
    let m = match module_of(ws, module) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let profile = match parse_profile(delta) {
        Ok(Some(p)) => p,
        Ok(None) => {
            if !ws.table.is_graded() {
                return input_error(
                    "profiles cannot be inferred from an ungraded resolution; pass an explicit profile",
                );
            }
            let r = match minimal_resolution(m, n_max) {
                Ok(r) => r,
                Err(e) => return input_error(e.to_string()),
            };
            match infer_delta(&r) {
                Some(p) => p,
                None if r.is_empty() && r.terminated() => DeltaProfile::koszul(),
                None => {
                    return RunResult {
                        code: 1,
                        out: "no strictly increasing single-degree generation profile fits \
                              the computed resolution; the module is not delta-Koszul for \
                              any profile\n"
                            .into(),
                    }
                }
            }
        }
        Err(msg) => return input_error(msg),
    };

    let (lines, overall) = if ws.table.is_graded() {
        match certify_delta_koszul(m, &profile, n_max) {
            Ok(cert) => (cert.machine_lines(), cert.overall),
            Err(e) => return input_error(e.to_string()),
        }
    } else {
        match check_criteria(m, &profile, n_max) {
            Ok(report) => (report.machine_lines(), report.overall),
            Err(e) => return input_error(e.to_string()),
        }
    };

    let code = verdict_code(&overall);
    let out = if machine {
        let mut all = vec![format!("profile {profile}")];
        all.extend(lines);
        all.push(format!("overall {overall}"));
        all.join("\n") + "\n"
    } else {
        let mut all = vec![format!("profile: {profile}"), delta_values_line(&profile, n_max)];
        all.extend(lines);
        all.push(format!("overall: {overall}"));
        all.join("\n") + "\n"
    };
    RunResult { code, out }
}

fn mhl_code(d: &HorseshoeDiagram) -> i32 {
    if d.failure().is_some() {
        return 1;
    }
    verdict_code(&verify_diagram(d))
}

fn mhl(ws: &Workspace, ses: &str, n_max: usize, machine: bool) -> RunResult {
    let s = match ses_of(ws, ses) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let d = build_minimal_horseshoe(s, n_max);
    let out = if machine {
        d.machine_lines().join("\n") + "\n"
    } else {
        let table = s.k().algebra();
        let headline = match d.failure() {
            Some((0, gap)) => format!("radical condition FAILS {}", gap.describe(table)),
            Some((lv, gap)) => {
                format!("radical condition FAILS at level {lv} {}", gap.describe(table))
            }
            None if d.truncated_at().is_some() => format!(
                "radical condition holds at every built level (0..{}); undetermined beyond",
                d.levels_built()
            ),
            None => "radical condition holds at every level; minimal horseshoe constructed"
                .to_string(),
        };
        format!("{headline}\n{}\n", d.display())
    };
    RunResult { code: mhl_code(&d), out }
}

fn horseshoe(ws: &Workspace, ses: &str, classic: bool, n_max: usize, machine: bool) -> RunResult {
    let s = match ses_of(ws, ses) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let d = if classic {
        match classic_horseshoe(s, n_max) {
            Ok(d) => d,
            Err(e) => return input_error(e.to_string()),
        }
    } else {
        build_minimal_horseshoe(s, n_max)
    };
    let out = if machine {
        let mut lines = Vec::new();
        for (tag, r) in [("left", d.left()), ("middle", d.middle()), ("right", d.right())] {
            for line in betti_machine_lines(r) {
                lines.push(format!("{tag} {line}"));
            }
        }
        lines.extend(d.machine_lines());
        lines.join("\n") + "\n"
    } else {
        d.display() + "\n"
    };
    RunResult { code: mhl_code(&d), out }
}

pub fn audit(suite: &str, trials: usize, seed: u64, _machine: bool) -> RunResult {
    let Some(which) = AuditSuite::all().into_iter().find(|s| s.name() == suite) else {
        let names: Vec<&str> = AuditSuite::all().iter().map(|s| s.name()).collect();
        return input_error(format!(
            "unknown audit suite `{suite}`; expected one of {}",
            names.join(", ")
        ));
    };
    let params = match which {
        AuditSuite::BettiVsCriteria => GenParams::graded(seed),
        _ => GenParams::findim(seed),
    };
    let report = run_audit(which, trials, &params);
    let code = if !report.failures.is_empty() {
        1
    } else if report.passes == 0 && report.trials > 0 {
        2
    } else {
        0
    };
    RunResult { code, out: report.display() }
}

/// Format a parse diagnostic; other errors fall back to their display.
pub fn render_error(e: &Error) -> String {
    match e {
        Error::Parse { line, col, message } => {
            format!("error: line {line}, column {col}: {message}\n")
        }
        other => format!("error: {other}\n"),
    }
}
