use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use nmlkit_core::ael::expansion_exists;
use nmlkit_core::dl::extension_exists;
use nmlkit_core::error::Result as CoreResult;
use nmlkit_core::families::{gen_ael_lower, gen_dl_lower, gen_imp_lower, gen_pseudo_clique, PseudoCliqueSpec};
use nmlkit_core::formula::{implies_bruteforce, sat_bruteforce, Basis, Formula};
use nmlkit_core::io::{write_formula_set, write_gr, write_imp};
use nmlkit_core::limits::Limits;
use nmlkit_core::mso::{eval_mso_with, paper_formula, Env, PaperFormula, Variant};
use nmlkit_core::random::random_graph;
use nmlkit_core::structures::{build_ael_structure, build_dl_structure, build_imp_structure, gaifman_graph, Graph};
use nmlkit_core::treewidth::{exact_treewidth, heuristic_decomposition, pseudo_clique_lower_bound, Heuristic};
use nmlkit_core::twdp::{chain_family, dp_implication, dp_sat, entailment_oracle_with, ConstraintGraph, OracleKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::gen::{DlVariantArg, ImpKindArg};
use crate::report::{millis, sha256_hex, Context};
use crate::Output;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `{x1, x1 -> x2, …}` with `m` formulas.
    Chain,
    /// Pseudo-clique on `n` mains, paths of `-k` edge-nodes.
    PseudoClique,
    /// G(n, p) graph, seeded.
    RandomGraph,
    DlLower,
    AelLower,
    ImpLower,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    MinFill,
    MinDegree,
    LowerBound,
    DpSat,
    BruteSat,
    DpImp,
    BruteImp,
    Enum,
    Fullsets,
    Mso,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MinFill => "min_fill",
            Method::MinDegree => "min_degree",
            Method::LowerBound => "lower_bound",
            Method::DpSat => "dp_sat",
            Method::BruteSat => "brute_sat",
            Method::DpImp => "dp_imp",
            Method::BruteImp => "brute_imp",
            Method::Enum => "enum",
            Method::Fullsets => "fullsets",
            Method::Mso => "mso",
        }
    }
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Chain => "chain",
            Family::PseudoClique => "pseudo-clique",
            Family::RandomGraph => "random-graph",
            Family::DlLower => "dl-lower",
            Family::AelLower => "ael-lower",
            Family::ImpLower => "imp-lower",
        }
    }

    fn methods(self) -> &'static [Method] {
        use Method::*;
        match self {
            Family::Chain => &[DpSat, BruteSat],
            Family::PseudoClique | Family::RandomGraph => &[Exact, MinFill, MinDegree, LowerBound],
            Family::DlLower => &[Exact, Enum, Mso],
            Family::AelLower => &[Exact, Fullsets, Mso],
            Family::ImpLower => &[Exact, DpImp, BruteImp],
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Comma separated sizes; `a..b` is an inclusive range.
    #[arg(long, value_parser = parse_params)]
    params: Params,
    /// Methods to run (default: every method the family supports).
    #[arg(long, value_enum, value_delimiter = ',')]
    method: Vec<Method>,
    /// Edge-nodes per pair for `pseudo-clique`.
    #[arg(short, default_value_t = 2)]
    k: usize,
    /// Edge probability for `random-graph`.
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, value_enum, default_value = "printed")]
    variant: DlVariantArg,
    #[arg(long, value_enum, default_value = "xor3")]
    kind: ImpKindArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write one JSON report per row here.
    #[arg(long)]
    reports: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Params(Vec<usize>);

fn parse_params(s: &str) -> Result<Params, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a size"));
        match part.split_once("..") {
            Some((a, b)) => out.extend(num(a)?..=num(b)?),
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(Params(out))
}

#[derive(Debug, Serialize)]
struct Row {
    family: &'static str,
    param: usize,
    n_vertices: usize,
    width: Option<usize>,
    method: &'static str,
    wall_ms: f64,
    verdict: String,
}

enum Instance {
    Graph(Graph),
    Sat(Vec<Formula>),
    Imp(Vec<Formula>, Vec<Formula>),
    Dl(nmlkit_core::dl::DefaultTheory),
    Ae(nmlkit_core::ael::AeTheory),
}

impl Instance {
    fn text(&self) -> String {
        match self {
            Instance::Graph(g) => write_gr(g),
            Instance::Sat(f) => write_formula_set(f),
            Instance::Imp(f, g) => write_imp(f, g),
            Instance::Dl(t) => t.to_dt(),
            Instance::Ae(s) => s.to_ae(),
        }
    }

    /// The graph treewidth methods run on.
    fn graph(&self, basis: &Basis) -> CoreResult<Graph> {
        Ok(match self {
            Instance::Graph(g) => g.clone(),
            Instance::Sat(f) => ConstraintGraph::build(f).graph().clone(),
            Instance::Imp(f, g) => gaifman_graph(&build_imp_structure(f, g, basis)?),
            Instance::Dl(t) => gaifman_graph(&build_dl_structure(t, basis)?),
            Instance::Ae(s) => gaifman_graph(&build_ael_structure(s, basis)?),
        })
    }
}

fn instance(a: &BenchArgs, param: usize) -> Instance {
    match a.family {
        Family::Chain => Instance::Sat(chain_family(param)),
        Family::PseudoClique => Instance::Graph(gen_pseudo_clique(&PseudoCliqueSpec::exact(param, a.k))),
        Family::RandomGraph => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(param as u64);
            Instance::Graph(random_graph(&mut rng, param, a.p))
        }
        Family::DlLower => Instance::Dl(gen_dl_lower(
            param,
            match a.variant {
                DlVariantArg::Printed => nmlkit_core::families::DlVariant::Printed,
                DlVariantArg::Symmetric => nmlkit_core::families::DlVariant::Symmetric,
            },
        )),
        Family::AelLower => Instance::Ae(gen_ael_lower(param)),
        Family::ImpLower => {
            let kind = match a.kind {
                ImpKindArg::Xor3 => nmlkit_core::families::ImpKind::Xor3,
                ImpKindArg::CnfDnf => nmlkit_core::families::ImpKind::CnfDnf,
            };
            let (f, g) = gen_imp_lower(kind, param);
            Instance::Imp(f, g)
        }
    }
}

fn yes_no(b: bool, yes: &str, no: &str) -> String {
    if b { yes } else { no }.to_string()
}

/// Runs `method`, returning the width it used or computed and its verdict.
fn measure(method: Method, inst: &Instance, graph: &Graph, limits: &Limits) -> CoreResult<(Option<usize>, String)> {
    let basis = Basis::default();
    let oracle = || entailment_oracle_with(OracleKind::Twdp, limits);
    Ok(match (method, inst) {
        (Method::Exact, _) => {
            let (w, _) = exact_treewidth(graph, None, limits)?;
            (Some(w), format!("width={w}"))
        }
        (Method::MinFill | Method::MinDegree, _) => {
            let h = if method == Method::MinFill {
                Heuristic::MinFill
            } else {
                Heuristic::MinDegree
            };
            let w = heuristic_decomposition(graph, h).width()?;
            (Some(w), format!("width<={w}"))
        }
        (Method::LowerBound, _) => {
            let lb = pseudo_clique_lower_bound(graph, limits)?;
            let w = lb.value.saturating_sub(1);
            (Some(w), format!("width>={w}"))
        }
        (Method::DpSat, Instance::Sat(f)) => (None, yes_no(dp_sat(f, None, limits)?, "sat", "unsat")),
        (Method::BruteSat, Instance::Sat(f)) => (None, yes_no(sat_bruteforce(f, limits)?.is_some(), "sat", "unsat")),
        (Method::DpImp, Instance::Imp(f, g)) => (None, yes_no(dp_implication(f, g, limits)?, "implies", "no")),
        (Method::BruteImp, Instance::Imp(f, g)) => (None, yes_no(implies_bruteforce(f, g, limits)?, "implies", "no")),
        (Method::Enum, Instance::Dl(t)) => {
            let (exists, _) = extension_exists(t, oracle().as_ref(), limits)?;
            (None, yes_no(exists, "exists", "none"))
        }
        (Method::Fullsets, Instance::Ae(s)) => {
            let (exists, _) = expansion_exists(s, oracle().as_ref(), limits)?;
            (None, yes_no(exists, "exists", "none"))
        }
        (Method::Mso, Instance::Dl(t)) => {
            let s = build_dl_structure(t, &basis)?;
            let phi = paper_formula(PaperFormula::Extension, &basis, Variant::Corrected);
            (
                None,
                yes_no(eval_mso_with(&s, &phi, &Env::new(), limits)?.0, "exists", "none"),
            )
        }
        (Method::Mso, Instance::Ae(sigma)) => {
            let s = build_ael_structure(sigma, &basis)?;
            let phi = paper_formula(PaperFormula::FullExists, &basis, Variant::Corrected);
            (
                None,
                yes_no(eval_mso_with(&s, &phi, &Env::new(), limits)?.0, "exists", "none"),
            )
        }
        _ => unreachable!("methods are checked against the family"),
    })
}

pub fn run(ctx: &mut Context, a: &BenchArgs) -> Result<Output, CliError> {
    let methods: Vec<Method> = if a.method.is_empty() {
        a.family.methods().to_vec()
    } else {
        a.method.clone()
    };
    if let Some(m) = methods.iter().find(|m| !a.family.methods().contains(m)) {
        return Err(CliError::Usage(format!(
            "method {} does not apply to family {}",
            m.name(),
            a.family.name()
        )));
    }
    let limits = ctx.limits;
    let basis = Basis::default();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &param in &a.params.0 {
        let inst = instance(a, param);
        let text = inst.text();
        ctx.absorb(text.as_bytes());
        let fingerprint = sha256_hex(text.as_bytes());
        let graph = inst.graph(&basis)?;
        for &method in &methods {
            let start = Instant::now();
            let outcome = measure(method, &inst, &graph, &limits);
            let wall_ms = millis(start);
            let (width, verdict, hit) = match outcome {
                // The DP runs on a min-fill decomposition of the constraint graph.
                Ok((None, v)) if method == Method::DpSat => (
                    Some(heuristic_decomposition(&graph, Heuristic::MinFill).width()?),
                    v,
                    Vec::new(),
                ),
                Ok((w, v)) => (w, v, Vec::new()),
                Err(e) if e.is_resource_limit() => (None, format!("limit: {e}"), vec![e.to_string()]),
                Err(e) => (None, format!("error: {e}"), Vec::new()),
            };
            let row = Row {
                family: a.family.name(),
                param,
                n_vertices: graph.n(),
                width,
                method: method.name(),
                wall_ms,
                verdict,
            };
            let mut report = serde_json::to_value(&row)?;
            report["fingerprint"] = json!(fingerprint);
            report["limits_hit"] = json!(hit);
            reports.push(report);
            rows.push(row);
        }
    }

    let mut csv_out = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        csv_out.serialize(row)?;
    }
    let csv_bytes = csv_out
        .into_inner()
        .map_err(|e| CliError::Io("csv".into(), e.into_error()))?;
    let csv_text = String::from_utf8(csv_bytes).expect("csv is utf-8");
    if let Some(path) = &a.reports {
        let mut f = File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        for r in &reports {
            writeln!(f, "{r}").map_err(|e| CliError::Io(path.display().to_string(), e))?;
        }
    }
    let text = match &a.csv {
        Some(path) => {
            std::fs::write(path, &csv_text).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            String::new()
        }
        None => csv_text,
    };
    Ok(Output {
        json: json!({ "family": a.family.name(), "seed": a.seed, "rows": reports }),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params() {
        assert_eq!(parse_params("3..6").unwrap().0, vec![3, 4, 5, 6]);
        assert_eq!(parse_params("1000, 2000").unwrap().0, vec![1000, 2000]);
        assert!(parse_params("x").is_err());
        assert!(parse_params("").is_err());
    }
}
