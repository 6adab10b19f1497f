//! Command-line front end. [`run`] returns the exit code and both output
//! streams so the binary and the tests share one code path.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::catalog;
use crate::constructions::{
    realize_sd, realize_sv, realize_wd_li, transform_li_loc_to_sd, ConstructionError, LocalGridFamily,
};
use crate::deciders::{classify, decide_lhv, decide_nsp, Classification, NspVerdict};
use crate::format::{model_value, parse_measurement_list, parse_model, serialize_model, AnyModel};
use crate::model::{EmpiricalModel, HiddenVariableModel, SystemType};
use crate::probabilistic::{chsh_sum, TSIRELSON_BOUND};
use crate::properties::{
    check_empirical, check_hidden, check_prob, check_prob_empirical, EmpiricalProperty, HiddenProperty, ProbProperty,
    Property, Verdict,
};
use crate::quantum::{QuantumRealization, DEFAULT_EPSILON};
use crate::rational::{format_rational, to_f64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "nonloc",
    version,
    about = "Relational models of non-locality and contextuality"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
    /// Report wall-clock timings on stderr.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check properties of a model.
    Check(CheckArgs),
    /// Run every decider on an empirical model.
    Classify { model: String },
    /// Build a hidden-variable realization.
    Realize {
        model: String,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Evaluate a quantum realization.
    Quantum(QuantumArgs),
    /// Exhibit each strict inclusion LHV ⊂ QM ⊂ NS^p ⊂ NS ⊂ EM.
    HierarchyDemo,
    /// List builtin models.
    List,
}

#[derive(Args, Debug)]
struct CheckArgs {
    model: String,
    #[arg(
        long = "property",
        short = 'p',
        required_unless_present = "all",
        conflicts_with = "all"
    )]
    properties: Vec<String>,
    #[arg(long)]
    all: bool,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    realization: String,
    /// Joint measurements, e.g. `X1,Y1;X2,Y2` (default: all).
    #[arg(long)]
    measurements: Option<String>,
    /// Emit the relational model `{p > ε}`.
    #[arg(long, value_name = "EPSILON", conflicts_with = "probs")]
    collapse: Option<f64>,
    /// Emit the probability table (default).
    #[arg(long)]
    probs: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Sv,
    Sd,
    Wdli,
    Upgrade,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Output {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

struct Ctx {
    machine: bool,
    timings: bool,
    started: Instant,
}

impl Ctx {
    fn emit(&self, code: i32, text: String, machine: Value) -> Output {
        let stdout = if self.machine {
            let mut s = serde_json::to_string_pretty(&machine).expect("serializable");
            s.push('\n');
            s
        } else {
            text
        };
        let stderr = if self.timings {
            format!("time: {:.3} ms\n", self.started.elapsed().as_secs_f64() * 1e3)
        } else {
            String::new()
        };
        Output { code, stdout, stderr }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Output {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let ctx = Ctx {
        machine: cli.format == OutputFormat::Machine,
        timings: cli.timings,
        started: Instant::now(),
    };
    match cli.command {
        Command::Check(a) => cmd_check(&ctx, &a),
        Command::Classify { model } => cmd_classify(&ctx, &model),
        Command::Realize { model, method } => cmd_realize(&ctx, &model, method),
        Command::Quantum(a) => cmd_quantum(&ctx, &a),
        Command::HierarchyDemo => cmd_hierarchy_demo(&ctx),
        Command::List => cmd_list(&ctx),
    }
}

fn load(source: &str) -> Result<AnyModel, String> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return catalog::builtin_model(name).ok_or_else(|| {
            let names: Vec<&str> = catalog::BUILTIN_MODELS.iter().map(|(n, _)| *n).collect();
            format!("unknown builtin `{name}` (available: {})", names.join(", "))
        });
    }
    let text = std::fs::read_to_string(source).map_err(|e| format!("cannot read {source}: {e}"))?;
    parse_model(&text).map_err(|e| format!("{source}: {e}"))
}

fn load_quantum(source: &str) -> Result<QuantumRealization, String> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return catalog::builtin_quantum(name).ok_or_else(|| {
            let names: Vec<&str> = catalog::BUILTIN_QUANTUM.iter().map(|(n, _)| *n).collect();
            format!("unknown quantum builtin `{name}` (available: {})", names.join(", "))
        });
    }
    match load(source)? {
        AnyModel::Quantum(q) => Ok(q),
        other => Err(format!(
            "{source} is a {} model, not a quantum realization",
            other.kind()
        )),
    }
}

fn violation_text(v: &Verdict, ty: &SystemType, lambdas: Option<&[String]>) -> Option<String> {
    v.as_ref().err().map(|v| v.describe(ty, lambdas))
}

// ---------------------------------------------------------------- check

fn cmd_check(ctx: &Ctx, a: &CheckArgs) -> Output {
    let model = match load(&a.model) {
        Ok(m) => m,
        Err(e) => return Output::usage(e),
    };
    let parse_all = |names: &[String]| -> Result<Vec<Property>, String> {
        names
            .iter()
            .map(|n| {
                let r = match &model {
                    AnyModel::Empirical(_) => n.parse::<EmpiricalProperty>().map(Property::Empirical).ok(),
                    AnyModel::Hidden(_) => n.parse::<HiddenProperty>().map(Property::Hidden).ok(),
                    AnyModel::Prob(_) | AnyModel::ProbHidden(_) => n.parse::<ProbProperty>().map(Property::Prob).ok(),
                    AnyModel::Quantum(_) => None,
                };
                r.ok_or_else(|| format!("`{n}` is not a property of {} models", model.kind()))
            })
            .collect()
    };
    let props: Vec<Property> = if a.all {
        match &model {
            AnyModel::Empirical(_) => EmpiricalProperty::ALL.iter().map(|p| Property::Empirical(*p)).collect(),
            AnyModel::Hidden(_) => HiddenProperty::ALL.iter().map(|p| Property::Hidden(*p)).collect(),
            AnyModel::Prob(_) | AnyModel::ProbHidden(_) => {
                ProbProperty::ALL.iter().map(|p| Property::Prob(*p)).collect()
            }
            AnyModel::Quantum(_) => {
                return Output::usage("quantum realizations have no checkable properties; use `quantum`")
            }
        }
    } else {
        match parse_all(&a.properties) {
            Ok(p) => p,
            Err(e) => return Output::usage(e),
        }
    };
    let ty = model.system_type();
    let lambdas: Option<&[String]> = match &model {
        AnyModel::Hidden(h) => Some(h.lambdas()),
        AnyModel::ProbHidden(q) => Some(q.lambdas()),
        _ => None,
    };
    let mut text = format!("model: {} ({})\n", a.model, model.kind());
    let mut rows = Vec::new();
    let mut all_hold = true;
    for p in &props {
        let verdict = match (&model, p) {
            (AnyModel::Empirical(e), Property::Empirical(x)) => check_empirical(e, *x),
            (AnyModel::Hidden(h), Property::Hidden(x)) => check_hidden(h, *x),
            (AnyModel::Prob(q), Property::Prob(x)) => check_prob_empirical(q, *x),
            (AnyModel::ProbHidden(q), Property::Prob(x)) => check_prob(q, *x),
            _ => unreachable!("property kinds are matched above"),
        };
        all_hold &= verdict.is_ok();
        let why = violation_text(&verdict, ty, lambdas);
        let _ = writeln!(
            text,
            "{:<6} {}{}",
            p.to_string(),
            if verdict.is_ok() { "holds" } else { "fails" },
            why.as_ref().map(|w| format!("  {w}")).unwrap_or_default()
        );
        rows.push(json!({"property": p.to_string(), "holds": verdict.is_ok(), "violation": why}));
    }
    let machine = json!({"command": "check", "input": a.model, "kind": model.kind(), "verdicts": rows});
    ctx.emit(if all_hold { EXIT_OK } else { EXIT_FAIL }, text, machine)
}

// ---------------------------------------------------------------- classify

fn mark(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn grid_values(grids: &[LocalGridFamily], ty: &SystemType) -> Vec<Value> {
    grids.iter().map(|g| json!(g.describe(ty))).collect()
}

fn nsp_value(v: &NspVerdict, ty: &SystemType) -> Value {
    json!({
        "member": v.member,
        "optimum": v.optimum.as_ref().map(format_rational),
        "witness": v.witness.as_ref().map(|w| model_value(&AnyModel::Prob(w.clone()))),
        "certificate": v.certificate.as_ref().map(|c| c.describe(ty)),
        "cycle": v.certificate.as_ref().and_then(|c| c.row_cycle()).map(|rows| {
            rows.iter().map(|m| ty.show_measurement(m)).collect::<Vec<_>>()
        }),
    })
}

fn classification_text(c: &Classification, ty: &SystemType) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "TOTAL  {}", mark(c.total.is_ok()));
    let _ = writeln!(
        t,
        "NS     {}{}",
        mark(c.ns.is_ok()),
        violation_text(&c.ns, ty, None)
            .map(|w| format!("  {w}"))
            .unwrap_or_default()
    );
    let _ = write!(t, "NS^p   {}", mark(c.nsp.member));
    if let Some(opt) = &c.nsp.optimum {
        let _ = write!(t, "  min conditional {}", format_rational(opt));
    }
    let _ = writeln!(t);
    if let Some(cert) = &c.nsp.certificate {
        for line in cert.describe(ty) {
            let _ = writeln!(t, "         {line}");
        }
        if let Some(cycle) = cert.row_cycle() {
            let rows: Vec<String> = cycle.iter().map(|m| format!("({})", ty.show_measurement(m))).collect();
            let _ = writeln!(t, "         cycle: {}", rows.join(" - "));
        }
    }
    let _ = writeln!(t, "QM     not decided");
    let _ = write!(t, "LHV    {}", mark(c.lhv.member));
    if let Some(r) = &c.lhv.refuter {
        let _ = write!(t, "  no admissible grid covers {}", ty.show_cell(r));
    } else {
        let _ = write!(t, "  {} grid(s)", c.lhv.witness.len());
    }
    let _ = writeln!(t);
    if let Some(h) = &c.hardy_violations {
        let names: Vec<String> = h.iter().map(|v| v.name()).collect();
        let _ = writeln!(
            t,
            "Hardy  {}",
            if names.is_empty() {
                "no violated variant".to_string()
            } else {
                format!("violated: {}", names.join("; "))
            }
        );
    }
    t
}

fn cmd_classify(ctx: &Ctx, source: &str) -> Output {
    let e = match load(source) {
        Ok(AnyModel::Empirical(e)) => e,
        Ok(other) => return Output::usage(format!("classify needs an empirical model, got {}", other.kind())),
        Err(e) => return Output::usage(e),
    };
    let c = match classify(&e) {
        Ok(c) => c,
        Err(err) => {
            return Output {
                code: EXIT_FAIL,
                stdout: String::new(),
                stderr: format!("error: {err}\n"),
            }
        }
    };
    let ty = e.system_type();
    let text = format!("model: {source}\n{}", classification_text(&c, ty));
    let machine = json!({
        "command": "classify",
        "input": source,
        "model": model_value(&AnyModel::Empirical(e.clone())),
        "verdict": {
            "total": c.total.is_ok(),
            "ns": c.ns.is_ok(),
            "ns_violation": violation_text(&c.ns, ty, None),
            "nsp": nsp_value(&c.nsp, ty),
            "qm": "not decided",
            "lhv": {
                "member": c.lhv.member,
                "witness": grid_values(&c.lhv.witness, ty),
                "refuter": c.lhv.refuter.as_ref().map(|r| ty.show_cell(r)),
            },
            "hardy_violations": c.hardy_violations.as_ref().map(|h| h.iter().map(|v| v.name()).collect::<Vec<_>>()),
        }
    });
    ctx.emit(EXIT_OK, text, machine)
}

// ---------------------------------------------------------------- realize

fn passing(h: &HiddenVariableModel) -> Vec<String> {
    HiddenProperty::ALL
        .iter()
        .filter(|p| check_hidden(h, **p).is_ok())
        .map(|p| p.to_string())
        .collect()
}

fn cmd_realize(ctx: &Ctx, source: &str, method: Method) -> Output {
    let model = match load(source) {
        Ok(m) => m,
        Err(e) => return Output::usage(e),
    };
    let built: Result<HiddenVariableModel, ConstructionError> = match (method, &model) {
        (Method::Sv, AnyModel::Empirical(e)) => Ok(realize_sv(e)),
        (Method::Sd, AnyModel::Empirical(e)) => Ok(realize_sd(e)),
        (Method::Wdli, AnyModel::Empirical(e)) => realize_wd_li(e),
        (Method::Upgrade, AnyModel::Hidden(h)) => transform_li_loc_to_sd(h),
        (Method::Upgrade, other) => {
            return Output::usage(format!("`upgrade` needs a hidden-variable model, got {}", other.kind()))
        }
        (_, other) => return Output::usage(format!("this method needs an empirical model, got {}", other.kind())),
    };
    let h = match built {
        Ok(h) => h,
        Err(err) => {
            let detail = match (&err, &model) {
                (ConstructionError::Precondition(v), AnyModel::Hidden(h)) => {
                    format!(
                        "precondition {} fails: {}",
                        v.property,
                        v.describe(h.system_type(), Some(h.lambdas()))
                    )
                }
                _ => err.to_string(),
            };
            let machine = json!({"command": "realize", "input": source, "error": detail});
            let mut out = ctx.emit(EXIT_FAIL, String::new(), machine);
            if !ctx.machine {
                out.stderr.insert_str(0, &format!("error: {detail}\n"));
            }
            return out;
        }
    };
    let passes = passing(&h);
    let hm = AnyModel::Hidden(h);
    let text = format!(
        "# {} realization of {}: |Λ| = {}; passes {}\n{}",
        format!("{method:?}").to_lowercase(),
        source,
        match &hm {
            AnyModel::Hidden(h) => h.lambdas().len(),
            _ => unreachable!(),
        },
        passes.join(", "),
        serialize_model(&hm)
    );
    let machine = json!({
        "command": "realize",
        "input": source,
        "method": format!("{method:?}").to_lowercase(),
        "passes": passes,
        "model": model_value(&hm),
    });
    ctx.emit(EXIT_OK, text, machine)
}

// ---------------------------------------------------------------- quantum

fn cmd_quantum(ctx: &Ctx, a: &QuantumArgs) -> Output {
    let q = match load_quantum(&a.realization) {
        Ok(q) => q,
        Err(e) => return Output::usage(e),
    };
    let ty = q.system_type().clone();
    let rows: BTreeSet<Vec<usize>> = match &a.measurements {
        Some(s) => match parse_measurement_list(&ty, s) {
            Ok(r) => r,
            Err(e) => return Output::usage(e),
        },
        None => ty.all_measurements().collect(),
    };
    if let Some(eps) = a.collapse {
        if !(eps > 0.0 && eps < 1.0) {
            return Output::usage("epsilon must lie in (0, 1)");
        }
        return match q.collapse(&rows, eps) {
            Ok(e) => {
                let m = AnyModel::Empirical(e);
                let machine =
                    json!({"command": "quantum", "input": a.realization, "epsilon": eps, "model": model_value(&m)});
                ctx.emit(EXIT_OK, serialize_model(&m), machine)
            }
            Err(e) => Output::usage(e),
        };
    }
    let mut text = String::new();
    let mut table = Vec::new();
    for m in &rows {
        for o in ty.all_outcomes() {
            let p = match q.statistical_algorithm(m, &o) {
                Ok(p) => p,
                Err(e) => return Output::usage(e),
            };
            let _ = writeln!(text, "{} | {}  {:.12}", ty.show_measurement(m), ty.show_outcome(&o), p);
            table.push(json!({"m": ty.measurement_labels(m), "o": ty.outcome_labels(&o), "p": p}));
        }
    }
    let exact = q.probabilistic(&rows, None, DEFAULT_EPSILON);
    let exact_value = match &exact {
        Ok(p) => {
            let _ = writeln!(text, "# exact (uniform prior over {} row(s)):", rows.len());
            for (c, w) in p.weights() {
                let cond = p.conditional(&c.m, &c.o).expect("positive row");
                let _ = writeln!(text, "{}  {}", ty.show_cell(c), format_rational(&cond));
                let _ = w;
            }
            model_value(&AnyModel::Prob(p.clone()))
        }
        Err(e) => {
            let _ = writeln!(text, "# no exact form: {e}");
            Value::Null
        }
    };
    let machine = json!({"command": "quantum", "input": a.realization, "probabilities": table, "exact": exact_value});
    ctx.emit(EXIT_OK, text, machine)
}

// ---------------------------------------------------------------- hierarchy demo

/// The models the demo inspects; tests substitute tampered versions.
#[derive(Clone, Debug)]
pub struct DemoModels {
    pub epr: EmpiricalModel,
    pub ghz: EmpiricalModel,
    pub ghz_system: QuantumRealization,
    pub pr: EmpiricalModel,
    pub pr_prob: crate::probabilistic::ProbEmpiricalModel,
    pub ns4x4: EmpiricalModel,
    pub ks: EmpiricalModel,
}

impl DemoModels {
    pub fn catalog() -> Self {
        DemoModels {
            epr: catalog::epr_model(),
            ghz: catalog::ghz_model(None).expect("static model"),
            ghz_system: crate::quantum::ghz_system(),
            pr: catalog::pr_box_relational(),
            pr_prob: catalog::pr_box_probabilistic(),
            ns4x4: catalog::ns_counterexample_4x4(),
            ks: catalog::ks_model(&catalog::ks_default_assignment()).expect("static model"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoCheck {
    pub inclusion: &'static str,
    pub claim: String,
    pub expected: bool,
    pub observed: bool,
}

impl DemoCheck {
    pub fn ok(&self) -> bool {
        self.expected == self.observed
    }
}

pub fn hierarchy_checks(d: &DemoModels) -> Vec<DemoCheck> {
    let check = |inclusion, claim: &str, expected, observed| DemoCheck {
        inclusion,
        claim: claim.to_string(),
        expected,
        observed,
    };
    let ghz_collapse = d
        .ghz_system
        .collapse(&d.ghz.domain(), DEFAULT_EPSILON)
        .map(|e| e == d.ghz)
        .unwrap_or(false);
    let chsh = chsh_sum(&d.pr_prob).ok();
    vec![
        check("LHV", "EPR is in LHV", true, decide_lhv(&d.epr).member),
        check(
            "LHV ⊂ QM",
            "GHZ is the collapse of the GHZ quantum system",
            true,
            ghz_collapse,
        ),
        check("LHV ⊂ QM", "GHZ is in LHV", false, decide_lhv(&d.ghz).member),
        check("QM ⊂ NS^p", "PR support is in NS^p", true, decide_nsp(&d.pr).member),
        check(
            "QM ⊂ NS^p",
            "PR box CHSH sum exceeds the Tsirelson bound 2√2",
            true,
            chsh.as_ref().is_some_and(|s| to_f64(s) > TSIRELSON_BOUND),
        ),
        check(
            "QM ⊂ NS^p",
            "PR box distribution collapses to the PR support",
            true,
            d.pr_prob.possibilistic_collapse() == d.pr,
        ),
        check(
            "NS^p ⊂ NS",
            "ns4x4 satisfies NS",
            true,
            check_empirical(&d.ns4x4, EmpiricalProperty::Ns).is_ok(),
        ),
        check("NS^p ⊂ NS", "ns4x4 is in NS^p", false, decide_nsp(&d.ns4x4).member),
        check(
            "NS ⊂ EM",
            "KS satisfies NS",
            false,
            check_empirical(&d.ks, EmpiricalProperty::Ns).is_ok(),
        ),
    ]
}

fn cmd_hierarchy_demo(ctx: &Ctx) -> Output {
    let d = DemoModels::catalog();
    let checks = hierarchy_checks(&d);
    let chsh = chsh_sum(&d.pr_prob)
        .map(|s| format_rational(&s))
        .unwrap_or_else(|e| e.to_string());
    let mut text = String::from("LHV ⊂ QM ⊂ NS^p ⊂ NS ⊂ EM\n");
    for c in &checks {
        let _ = writeln!(
            text,
            "[{}] {:<10} {}: expected {}, got {}",
            if c.ok() { "ok" } else { "MISMATCH" },
            c.inclusion,
            c.claim,
            c.expected,
            c.observed
        );
    }
    let _ = writeln!(
        text,
        "PR box CHSH sum = {chsh}; QM exclusion follows from the Tsirelson bound, not decided here"
    );
    let all_ok = checks.iter().all(DemoCheck::ok);
    let machine = json!({
        "command": "hierarchy-demo",
        "checks": checks.iter().map(|c| json!({
            "inclusion": c.inclusion, "claim": c.claim, "expected": c.expected, "observed": c.observed, "ok": c.ok()
        })).collect::<Vec<_>>(),
        "chsh_pr": chsh,
        "ok": all_ok,
    });
    ctx.emit(if all_ok { EXIT_OK } else { EXIT_FAIL }, text, machine)
}

fn cmd_list(ctx: &Ctx) -> Output {
    let mut text = String::from("models (builtin:<name>):\n");
    for (n, d) in catalog::BUILTIN_MODELS {
        let _ = writeln!(text, "  {n:<14} {d}");
    }
    text.push_str("quantum realizations (quantum builtin:<name>):\n");
    for (n, d) in catalog::BUILTIN_QUANTUM {
        let _ = writeln!(text, "  {n:<14} {d}");
    }
    let machine = json!({
        "models": catalog::BUILTIN_MODELS.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        "quantum": catalog::BUILTIN_QUANTUM.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
    });
    ctx.emit(EXIT_OK, text, machine)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Output {
        run(std::iter::once("nonloc").chain(args.iter().copied()))
    }

    #[test]
    fn check_exit_codes() {
        assert_eq!(go(&["check", "builtin:ks", "--property", "NS"]).code, EXIT_FAIL);
        assert_eq!(go(&["check", "builtin:epr", "--all"]).code, EXIT_FAIL);
        assert_eq!(go(&["check", "builtin:epr", "-p", "NS"]).code, EXIT_OK);
        assert_eq!(go(&["check", "/no/such/file.json", "--all"]).code, EXIT_USAGE);
        assert_eq!(go(&["check", "builtin:epr", "-p", "OI"]).code, EXIT_USAGE);
        assert_eq!(go(&["check", "builtin:epr"]).code, EXIT_USAGE);
        assert_eq!(go(&["frobnicate"]).code, EXIT_USAGE);
    }

    #[test]
    fn help_goes_to_stdout() {
        let out = go(&["--help"]);
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("hierarchy-demo"));
    }

    #[test]
    fn deterministic_output() {
        let a = go(&["--format", "machine", "classify", "builtin:ns4x4"]);
        let b = go(&["--format", "machine", "classify", "builtin:ns4x4"]);
        assert_eq!(a, b);
        assert!(a.stderr.is_empty());
        let t = go(&["--timings", "classify", "builtin:epr"]);
        assert!(t.stderr.starts_with("time:"));
    }

    #[test]
    fn tampered_demo_is_red() {
        let mut d = DemoModels::catalog();
        assert!(hierarchy_checks(&d).iter().all(DemoCheck::ok));
        d.ns4x4 = catalog::pr_box_relational();
        assert!(!hierarchy_checks(&d).iter().all(DemoCheck::ok));
    }
}
