use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use nmlkit_core::io::{parse_gr, parse_td, read_labels, write_td};
use nmlkit_core::structures::{Graph, VertexLabel};
use nmlkit_core::treewidth::{
    certificate_holds, exact_treewidth, heuristic_decomposition, normalize_pseudo, pseudo_clique_lower_bound,
    validate_decomposition, Heuristic, TreeDecomposition,
};
use serde_json::json;

use crate::error::CliError;
use crate::report::Context;
use crate::Output;

#[derive(Subcommand)]
pub enum TwCommand {
    /// Compute a tree decomposition of a `.gr` graph; prints `.td`.
    Compute(ComputeArgs),
    /// Check a `.td` decomposition against its graph.
    Verify(VerifyArgs),
    /// Rewrite a decomposition of a labelled pseudo-clique into normal form.
    Normalize(NormalizeArgs),
    /// Certified lower bound from a subdivided clique.
    LowerBound(LowerBoundArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum HeuristicArg {
    MinFill,
    MinDegree,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::MinFill => Heuristic::MinFill,
            HeuristicArg::MinDegree => Heuristic::MinDegree,
        }
    }
}

#[derive(Args)]
pub struct ComputeArgs {
    graph: PathBuf,
    /// Exact treewidth by branch and bound.
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    #[arg(long, value_enum, default_value = "min-fill")]
    heuristic: HeuristicArg,
    /// Write the `.td` here instead of printing it.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    graph: PathBuf,
    td: PathBuf,
}

#[derive(Args)]
pub struct NormalizeArgs {
    graph: PathBuf,
    td: PathBuf,
    /// Label sidecar; defaults to `c label` lines inside the graph file.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LowerBoundArgs {
    graph: PathBuf,
}

pub fn run(ctx: &mut Context, command: TwCommand) -> Result<Output, CliError> {
    match command {
        TwCommand::Compute(a) => compute(ctx, &a),
        TwCommand::Verify(a) => verify(ctx, &a),
        TwCommand::Normalize(a) => normalize(ctx, &a),
        TwCommand::LowerBound(a) => lower_bound(ctx, &a),
    }
}

/// Reads a `.gr` file, picking up labels from `sidecar` or from embedded
/// `c label <id> <label> <description>` lines.
pub fn load_graph(ctx: &mut Context, path: &Path, sidecar: Option<&Path>) -> Result<Graph, CliError> {
    let text = ctx.read(path)?;
    let mut g = ctx.time("parse", || parse_gr(&text)).map_err(CliError::in_file(path))?;
    let labels = match sidecar {
        Some(p) => Some((ctx.read(p)?, p.to_path_buf())),
        None => {
            let embedded: String = text
                .lines()
                .filter_map(|l| l.trim_start().strip_prefix("c label "))
                .map(|l| format!("{l}\n"))
                .collect();
            (!embedded.is_empty()).then(|| (embedded, path.to_path_buf()))
        }
    };
    if let Some((labels, from)) = labels {
        read_labels(&mut g, &labels).map_err(CliError::in_file(&from))?;
    }
    Ok(g)
}

fn load_td(ctx: &mut Context, path: &Path, g: &Graph) -> Result<TreeDecomposition, CliError> {
    let text = ctx.read(path)?;
    let (td, n) = parse_td(&text).map_err(CliError::in_file(path))?;
    if n != g.n() {
        return Err(CliError::Usage(format!(
            "{}: decomposition declares {n} vertices, graph has {}",
            path.display(),
            g.n()
        )));
    }
    Ok(td)
}

fn emit_td(td_text: String, out: Option<&Path>) -> Result<String, CliError> {
    match out {
        Some(p) => {
            fs::write(p, &td_text).map_err(|e| CliError::Io(p.display().to_string(), e))?;
            Ok(String::new())
        }
        None => Ok(td_text),
    }
}

fn compute(ctx: &mut Context, a: &ComputeArgs) -> Result<Output, CliError> {
    let g = load_graph(ctx, &a.graph, None)?;
    let limits = ctx.limits;
    let (method, td) = if a.exact {
        (
            "exact".to_string(),
            ctx.time("solve", || exact_treewidth(&g, None, &limits))?.1,
        )
    } else {
        let h = Heuristic::from(a.heuristic);
        (
            h.name().to_string(),
            ctx.time("solve", || heuristic_decomposition(&g, h)),
        )
    };
    let width = td.width()?;
    let valid = validate_decomposition(&g, &td)?.is_empty();
    let td_text = write_td(&td, g.n());
    let text = format!(
        "c width {width} ({method})\n{}",
        emit_td(td_text.clone(), a.out.as_deref())?
    );
    Ok(Output {
        json: json!({
            "width": width,
            "method": method,
            "exact": a.exact,
            "n_vertices": g.n(),
            "n_edges": g.edge_count(),
            "bags": td.num_bags(),
            "valid": valid,
            "td": td_text,
        }),
        text,
    })
}

fn verify(ctx: &mut Context, a: &VerifyArgs) -> Result<Output, CliError> {
    let g = load_graph(ctx, &a.graph, None)?;
    let td = load_td(ctx, &a.td, &g)?;
    let violations: Vec<String> = ctx
        .time("verify", || validate_decomposition(&g, &td))?
        .iter()
        .map(ToString::to_string)
        .collect();
    let valid = violations.is_empty();
    let width = if td.num_bags() > 0 { Some(td.width()?) } else { None };
    let mut text = match (valid, width) {
        (true, Some(w)) => format!("valid, width {w}\n"),
        _ => "invalid\n".to_string(),
    };
    for v in &violations {
        text.push_str(v);
        text.push('\n');
    }
    Ok(Output {
        json: json!({ "valid": valid, "width": width, "violations": violations }),
        text,
    })
}

fn normalize(ctx: &mut Context, a: &NormalizeArgs) -> Result<Output, CliError> {
    let g = load_graph(ctx, &a.graph, a.labels.as_deref())?;
    let td = load_td(ctx, &a.td, &g)?;
    let out = ctx.time("normalize", || normalize_pseudo(&g, &td))?;
    let valid = validate_decomposition(&g, &out)?.is_empty();
    // Largest number of bags any single edge-node ends up in.
    let edge_nodes: BTreeSet<usize> = g.labelled(VertexLabel::Edge).into_iter().collect();
    let max_occurrence = edge_nodes
        .iter()
        .map(|v| out.bags().values().filter(|b| b.contains(v)).count())
        .max()
        .unwrap_or(0);
    let td_text = write_td(&out, g.n());
    let text = emit_td(td_text.clone(), a.out.as_deref())?;
    Ok(Output {
        json: json!({
            "width_before": td.width()?,
            "width_after": out.width()?,
            "valid": valid,
            "edge_node_max_bags": max_occurrence,
            "td": td_text,
        }),
        text,
    })
}

fn lower_bound(ctx: &mut Context, a: &LowerBoundArgs) -> Result<Output, CliError> {
    let g = load_graph(ctx, &a.graph, None)?;
    let limits = ctx.limits;
    let lb = ctx.time("solve", || pseudo_clique_lower_bound(&g, &limits))?;
    let certified = certificate_holds(&g, &lb);
    let bound = lb.value.saturating_sub(1);
    let clique: Vec<String> = lb.clique.iter().map(usize::to_string).collect();
    Ok(Output {
        json: json!({
            "lower_bound": bound,
            "clique_size": lb.value,
            "clique": lb.clique,
            "certified": certified,
        }),
        text: format!("treewidth >= {bound} (subdivided clique on {})\n", clique.join(" ")),
    })
}
