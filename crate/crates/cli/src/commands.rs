use std::fmt::Write as _;
use std::path::Path;

use nmlkit_core::ael::{expansion_exists, parse_ae_theory, FullSetCandidate};
use nmlkit_core::dl::{extension_exists, parse_default_theory};
use nmlkit_core::formula::{implies_bruteforce, sat_bruteforce, Basis, Mode};
use nmlkit_core::io::{parse_formula_set, parse_imp, write_gr, write_labels};
use nmlkit_core::mso::{eval_mso_with, paper_formula, parse_mso, Env, PaperFormula, Variant};
use nmlkit_core::structures::{
    build_ael_structure, build_dl_structure, build_imp_structure, build_prop_structure, gaifman_graph,
    RelationalStructure,
};
use nmlkit_core::twdp::{dp_implication, dp_sat, entailment_oracle_with, OracleKind};
use nmlkit_core::verify::{run_all, run_sweeps, VerifyOptions};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::report::Context;
use crate::{
    AelMethod, AelSolveArgs, BasisArg, CheckImpArgs, CheckSatArgs, DlMethod, DlSolveArgs, KindArg, MsoEvalArgs,
    OracleArg, Output, SatMethod, StructBuildArgs, VariantArg, VerifyArgs,
};

impl BasisArg {
    fn basis(&self) -> Result<Basis, CliError> {
        match &self.basis {
            None => Ok(Basis::default()),
            Some(list) => Basis::parse(list).map_err(|e| CliError::Usage(format!("--basis: {e}"))),
        }
    }
}

impl From<OracleArg> for OracleKind {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Brute => OracleKind::Brute,
            OracleArg::Twdp => OracleKind::Twdp,
        }
    }
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Corrected => Variant::Corrected,
            VariantArg::AsPrinted => Variant::AsPrinted,
        }
    }
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::Prop => "prop",
            KindArg::Imp => "imp",
            KindArg::Dl => "dl",
            KindArg::Ae => "ae",
        }
    }
}

fn method_name(m: SatMethod) -> &'static str {
    match m {
        SatMethod::Brute => "brute",
        SatMethod::Dp => "dp",
    }
}

pub fn check_sat(ctx: &mut Context, a: &CheckSatArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let text = ctx.read(&a.file)?;
    let gamma = ctx
        .time("parse", || parse_formula_set(&text, Mode::Prop, &basis))
        .map_err(CliError::in_file(&a.file))?;
    let limits = ctx.limits;
    let (sat, model) = match a.method {
        SatMethod::Brute => {
            let model = ctx.time("solve", || sat_bruteforce(&gamma, &limits))?;
            (model.is_some(), model)
        }
        SatMethod::Dp => (ctx.time("solve", || dp_sat(&gamma, None, &limits))?, None),
    };
    let mut text = String::from(if sat { "satisfiable\n" } else { "unsatisfiable\n" });
    let model_json = model.map(|m| {
        let mut obj = Map::new();
        let mut line = String::from("model:");
        for (atom, v) in &m {
            obj.insert(atom.to_string(), Value::Bool(*v));
            let _ = write!(line, " {atom}={}", u8::from(*v));
        }
        text.push_str(&line);
        text.push('\n');
        Value::Object(obj)
    });
    Ok(Output {
        json: json!({ "satisfiable": sat, "method": method_name(a.method), "model": model_json }),
        text,
    })
}

pub fn check_imp(ctx: &mut Context, a: &CheckImpArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let text = ctx.read(&a.file)?;
    let (f, g) = ctx
        .time("parse", || parse_imp(&text, &basis))
        .map_err(CliError::in_file(&a.file))?;
    let limits = ctx.limits;
    let mut failing = Vec::new();
    ctx.time("solve", || -> Result<(), CliError> {
        for (i, c) in g.iter().enumerate() {
            let one = std::slice::from_ref(c);
            let holds = match a.method {
                SatMethod::Brute => implies_bruteforce(&f, one, &limits)?,
                SatMethod::Dp => dp_implication(&f, one, &limits)?,
            };
            if !holds {
                failing.push(i + 1);
            }
        }
        Ok(())
    })?;
    let implies = failing.is_empty();
    let mut text = String::from(if implies { "implies\n" } else { "does not imply\n" });
    for i in &failing {
        let _ = writeln!(text, "not entailed: c{i}: {}", g[i - 1]);
    }
    Ok(Output {
        json: json!({ "implies": implies, "method": method_name(a.method), "failing": failing }),
        text,
    })
}

fn mso_check(
    ctx: &mut Context,
    s: &RelationalStructure,
    name: PaperFormula,
    basis: &Basis,
    variant: VariantArg,
) -> Result<(bool, Value), CliError> {
    let phi = paper_formula(name, basis, variant.into());
    let limits = ctx.limits;
    let (holds, stats) = ctx.time("mso", || eval_mso_with(s, &phi, &Env::new(), &limits))?;
    Ok((holds, serde_json::to_value(stats)?))
}

fn variant_name(v: VariantArg) -> String {
    Variant::from(v).to_string()
}

pub fn dl_solve(ctx: &mut Context, a: &DlSolveArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let text = ctx.read(&a.file)?;
    let theory = ctx
        .time("parse", || parse_default_theory(&text, &basis))
        .map_err(CliError::in_file(&a.file))?;
    match a.method {
        DlMethod::Enum => {
            let limits = ctx.limits;
            let oracle = entailment_oracle_with(a.oracle.into(), &limits);
            let (exists, sets) = ctx.time("solve", || extension_exists(&theory, oracle.as_ref(), &limits))?;
            let witnesses: Vec<Vec<usize>> = sets.iter().map(|g| g.iter().map(|i| i + 1).collect()).collect();
            let mut text = String::from(if exists { "extension exists\n" } else { "no extension\n" });
            for (k, w) in witnesses.iter().enumerate() {
                let rules: Vec<String> = w.iter().map(|i| format!("d{i}")).collect();
                let _ = writeln!(text, "generating set {}: {{{}}}", k + 1, rules.join(", "));
            }
            Ok(Output {
                json: json!({
                    "exists": exists,
                    "witnesses": witnesses,
                    "method": "enum",
                    "oracle": OracleKind::from(a.oracle).to_string(),
                }),
                text,
            })
        }
        DlMethod::Mso => {
            let s = ctx.time("build", || build_dl_structure(&theory, &basis))?;
            let (exists, stats) = mso_check(ctx, &s, PaperFormula::Extension, &basis, a.variant)?;
            Ok(Output {
                json: json!({ "exists": exists, "method": "mso", "variant": variant_name(a.variant), "mso_stats": stats }),
                text: String::from(if exists { "extension exists\n" } else { "no extension\n" }),
            })
        }
    }
}

fn full_set_json(c: &FullSetCandidate) -> Value {
    Value::Array(
        c.polarity
            .iter()
            .map(|(b, pos)| json!({ "Lphi": b.to_string(), "sign": if *pos { "+" } else { "-" } }))
            .collect(),
    )
}

pub fn ael_solve(ctx: &mut Context, a: &AelSolveArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let text = ctx.read(&a.file)?;
    let sigma = ctx
        .time("parse", || parse_ae_theory(&text, &basis))
        .map_err(CliError::in_file(&a.file))?;
    match a.method {
        AelMethod::Fullsets => {
            let limits = ctx.limits;
            let oracle = entailment_oracle_with(a.oracle.into(), &limits);
            let (exists, sets) = ctx.time("solve", || expansion_exists(&sigma, oracle.as_ref(), &limits))?;
            let mut text = String::from(if exists { "expansion exists\n" } else { "no expansion\n" });
            for (k, c) in sets.iter().enumerate() {
                let lits: Vec<String> = c
                    .polarity
                    .iter()
                    .map(|(b, pos)| format!("{}{b}", if *pos { "+" } else { "-" }))
                    .collect();
                let _ = writeln!(text, "full set {}: {{{}}}", k + 1, lits.join(", "));
            }
            Ok(Output {
                json: json!({
                    "exists": exists,
                    "full_sets": sets.iter().map(full_set_json).collect::<Vec<_>>(),
                    "method": "fullsets",
                    "oracle": OracleKind::from(a.oracle).to_string(),
                }),
                text,
            })
        }
        AelMethod::Mso => {
            let s = ctx.time("build", || build_ael_structure(&sigma, &basis))?;
            let (exists, stats) = mso_check(ctx, &s, PaperFormula::FullExists, &basis, a.variant)?;
            Ok(Output {
                json: json!({ "exists": exists, "method": "mso", "variant": variant_name(a.variant), "mso_stats": stats }),
                text: String::from(if exists { "expansion exists\n" } else { "no expansion\n" }),
            })
        }
    }
}

/// Reads `file` as the given kind and builds its structure.
pub fn load_structure(
    ctx: &mut Context,
    file: &Path,
    kind: KindArg,
    basis: &Basis,
) -> Result<RelationalStructure, CliError> {
    let text = ctx.read(file)?;
    let at = CliError::in_file(file);
    let s = match kind {
        KindArg::Prop => {
            let gamma = parse_formula_set(&text, Mode::Prop, basis).map_err(&at)?;
            ctx.time("build", || build_prop_structure(&gamma, basis))
        }
        KindArg::Imp => {
            let (f, g) = parse_imp(&text, basis).map_err(&at)?;
            ctx.time("build", || build_imp_structure(&f, &g, basis))
        }
        KindArg::Dl => {
            let t = parse_default_theory(&text, basis).map_err(&at)?;
            ctx.time("build", || build_dl_structure(&t, basis))
        }
        KindArg::Ae => {
            let t = parse_ae_theory(&text, basis).map_err(&at)?;
            ctx.time("build", || build_ael_structure(&t, basis))
        }
    };
    Ok(s?)
}

pub fn struct_build(ctx: &mut Context, a: &StructBuildArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let s = load_structure(ctx, &a.file, a.kind, &basis)?;
    let g = gaifman_graph(&s);
    let universe: Vec<Value> = s
        .elements()
        .iter()
        .enumerate()
        .map(|(i, e)| json!({ "id": i + 1, "description": e.description }))
        .collect();
    let mut relations = Map::new();
    let mut text = String::new();
    for (i, e) in s.elements().iter().enumerate() {
        let _ = writeln!(text, "{} {}", i + 1, e.description);
    }
    for (name, _) in s.vocabulary().relations() {
        let tuples: Vec<Vec<usize>> = s.tuples(name).map(|t| t.iter().map(|x| x + 1).collect()).collect();
        if !tuples.is_empty() {
            let shown: Vec<String> = tuples
                .iter()
                .map(|t| format!("({})", t.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(text, "{name}: {}", shown.join(" "));
        }
        relations.insert(name.clone(), json!(tuples));
    }
    if a.gaifman {
        text = labelled_gr(&g);
    }
    Ok(Output {
        json: json!({
            "kind": a.kind.name(),
            "universe": universe,
            "relations": relations,
            "gaifman": { "n": g.n(), "m": g.edge_count(), "edges": g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>() },
        }),
        text,
    })
}

/// `.gr` text followed by the label sidecar as `c label …` comment lines.
pub fn labelled_gr(g: &nmlkit_core::structures::Graph) -> String {
    let mut out = write_gr(g);
    for line in write_labels(g).lines() {
        let _ = writeln!(out, "c label {line}");
    }
    out
}

pub fn mso_eval(ctx: &mut Context, a: &MsoEvalArgs) -> Result<Output, CliError> {
    let basis = a.basis.basis()?;
    let s = load_structure(ctx, &a.file, a.kind, &basis)?;
    let (label, phi) = if let Some(name) = &a.paper {
        let name: PaperFormula = name.parse().map_err(|e| CliError::Usage(format!("--paper: {e}")))?;
        (name.to_string(), paper_formula(name, &basis, a.variant.into()))
    } else {
        let text = match (&a.formula, &a.formula_file) {
            (Some(t), _) => {
                ctx.absorb(t.as_bytes());
                t.clone()
            }
            (None, Some(path)) => ctx.read(path)?,
            (None, None) => {
                return Err(CliError::Usage(
                    "one of --paper, --formula, --formula-file is required".into(),
                ))
            }
        };
        (
            "custom".to_string(),
            parse_mso(&text).map_err(|e| CliError::Usage(format!("MSO formula: {e}")))?,
        )
    };
    let limits = ctx.limits;
    let (holds, stats) = ctx.time("mso", || eval_mso_with(&s, &phi, &Env::new(), &limits))?;
    let mut text = format!("{}\n", if holds { "true" } else { "false" });
    let mut out = json!({
        "holds": holds,
        "sentence": label,
        "universe": s.len(),
        "stats": stats,
    });
    if a.show {
        let _ = writeln!(text, "{phi}");
        out["formula"] = Value::String(phi.to_string());
    }
    Ok(Output { json: out, text })
}

pub fn verify_paper(ctx: &mut Context, a: &VerifyArgs) -> Result<Output, CliError> {
    let opts = VerifyOptions {
        seed: a.seed,
        quick: a.quick,
        limits: ctx.limits,
    };
    ctx.absorb(format!("seed={} quick={}", a.seed, a.quick).as_bytes());
    let mut reports = ctx.time("criteria", || run_all(&opts));
    if !a.criteria_only {
        reports.extend(ctx.time("sweeps", || run_sweeps(&opts)));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let mut text = String::new();
    for r in &reports {
        let _ = writeln!(text, "{}", r.line());
    }
    let _ = writeln!(text, "{passed}/{} checks passed", reports.len());
    Ok(Output {
        json: json!({
            "seed": a.seed,
            "quick": a.quick,
            "checks": reports,
            "passed": passed,
            "failed": reports.len() - passed,
        }),
        text,
    })
}
