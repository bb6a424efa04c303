use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use nmlkit_core::families::{
    gen_ael_lower, gen_dl_lower, gen_imp_lower, gen_pseudo_clique, DlVariant, ImpKind, PseudoCliqueSpec,
};
use nmlkit_core::io::{write_gr, write_imp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::commands::labelled_gr;
use crate::error::CliError;
use crate::report::Context;
use crate::Output;

#[derive(Subcommand)]
pub enum GenCommand {
    /// Pseudo-clique on `n` main-nodes with paths of up to `k` edge-nodes (`.gr`).
    PseudoClique(PseudoCliqueArgs),
    /// Literal default theory whose structure embeds a pseudo-clique (`.dt`).
    DlLower(DlLowerArgs),
    /// Autoepistemic theory of pairwise disjunctions (`.ae`).
    AelLower(AelLowerArgs),
    /// Implication instance (`.imp`).
    ImpLower(ImpLowerArgs),
}

#[derive(Args)]
pub struct OutArg {
    /// Write here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PseudoCliqueArgs {
    #[arg(short)]
    n: usize,
    #[arg(short)]
    k: usize,
    /// Random per-pair path lengths in `0..=k` instead of exactly `k`.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Append `c label` lines with main/edge labels.
    #[arg(long)]
    labels: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DlVariantArg {
    Printed,
    Symmetric,
}

#[derive(Args)]
pub struct DlLowerArgs {
    #[arg(short)]
    n: usize,
    #[arg(long, value_enum, default_value = "printed")]
    variant: DlVariantArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
pub struct AelLowerArgs {
    #[arg(short)]
    k: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ImpKindArg {
    Xor3,
    #[value(name = "cnf_dnf", alias = "cnf-dnf")]
    CnfDnf,
}

#[derive(Args)]
pub struct ImpLowerArgs {
    #[arg(long, value_enum)]
    kind: ImpKindArg,
    #[arg(short)]
    n: usize,
    #[command(flatten)]
    out: OutArg,
}

pub fn run(ctx: &mut Context, command: GenCommand) -> Result<Output, CliError> {
    let (family, format, content, out) = match &command {
        GenCommand::PseudoClique(a) => {
            if a.n < 2 {
                return Err(CliError::Usage("-n must be at least 2".into()));
            }
            let spec = if a.random {
                PseudoCliqueSpec::random(a.n, a.k, &mut ChaCha8Rng::seed_from_u64(a.seed))
            } else {
                PseudoCliqueSpec::exact(a.n, a.k)
            };
            let g = gen_pseudo_clique(&spec);
            let text = if a.labels { labelled_gr(&g) } else { write_gr(&g) };
            ("pseudo-clique", "gr", text, &a.out)
        }
        GenCommand::DlLower(a) => {
            let variant = match a.variant {
                DlVariantArg::Printed => DlVariant::Printed,
                DlVariantArg::Symmetric => DlVariant::Symmetric,
            };
            ("dl-lower", "dt", gen_dl_lower(a.n, variant).to_dt(), &a.out)
        }
        GenCommand::AelLower(a) => ("ael-lower", "ae", gen_ael_lower(a.k).to_ae(), &a.out),
        GenCommand::ImpLower(a) => {
            let kind = match a.kind {
                ImpKindArg::Xor3 => ImpKind::Xor3,
                ImpKindArg::CnfDnf => ImpKind::CnfDnf,
            };
            let (f, g) = gen_imp_lower(kind, a.n);
            ("imp-lower", "imp", write_imp(&f, &g), &a.out)
        }
    };
    ctx.absorb(content.as_bytes());
    let text = match &out.out {
        Some(p) => {
            fs::write(p, &content).map_err(|e| CliError::Io(p.display().to_string(), e))?;
            String::new()
        }
        None => content.clone(),
    };
    Ok(Output {
        json: json!({ "family": family, "format": format, "content": content }),
        text,
    })
}
