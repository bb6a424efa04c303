//! End-to-end checks of the toolkit against independent oracles and known
//! treewidth values. Shared by the acceptance tests and the
//! `verify-paper` command.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ael::{expansion_exists, parse_ae_theory, AeTheory};
use crate::dl::extension_exists;
use crate::error::Result;
use crate::families::{gen_ael_lower, gen_dl_lower, gen_pseudo_clique, DlVariant, PseudoCliqueSpec};
use crate::formula::{implies_bruteforce, sat_bruteforce, Basis, Connective};
use crate::io::{parse_gr, parse_td, write_gr, write_td};
use crate::limits::Limits;
use crate::mso::{eval_mso_with, paper_formula, Env, PaperFormula, Variant};
use crate::random::{random_ae_theory, random_gamma, random_graph, random_imp_pair, random_literal_theory};
use crate::structures::{
    build_ael_structure, build_dl_structure, build_imp_structure, build_prop_structure, gaifman_graph, Graph,
    VertexLabel,
};
use crate::treewidth::{
    exact_treewidth, heuristic_decomposition, is_valid, normalize_pseudo, Heuristic, TreeDecomposition,
};
use crate::twdp::{chain_family, dp_sat, entailment_oracle_with, OracleKind};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

impl CriterionReport {
    /// `PASS [3] name: detail (12 ms)`.
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_ms
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Smaller samples, for interactive use.
    pub quick: bool,
    pub limits: Limits,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            quick: false,
            limits: Limits::default(),
        }
    }
}

impl VerifyOptions {
    fn samples(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(5)
        } else {
            full
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "pseudo-clique treewidth"),
    (2, "pseudo-clique normalisation"),
    (3, "sat/imp encodings"),
    (4, "extension encoding"),
    (5, "full-set encoding"),
    (6, "dp scaling"),
    (7, "oracle cross-validation"),
    (8, "lower-bound width growth"),
    (9, "format round-trips"),
];

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&(id, _)| run(id, opts)).collect()
}

pub fn run(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown");
    let start = Instant::now();
    let outcome = match id {
        1 => pseudo_clique_width(opts),
        2 => normalisation(opts),
        3 => sat_imp_encodings(opts),
        4 => extension_encoding(opts),
        5 => full_set_encoding(opts),
        6 => dp_scaling(opts),
        7 => oracle_cross_validation(opts),
        8 => width_growth(opts),
        9 => round_trips(opts),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport {
        id,
        name,
        passed,
        detail,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

type Outcome = Result<(bool, String)>;

fn pseudo_clique_instances() -> Vec<(usize, usize, Graph)> {
    let mut out = Vec::new();
    for n in 3..=6 {
        for k in 0..=3 {
            out.push((n, k, gen_pseudo_clique(&PseudoCliqueSpec::exact(n, k))));
        }
    }
    out
}

fn pseudo_clique_width(opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let mut wrong = Vec::new();
    let instances = pseudo_clique_instances();
    for (n, k, g) in &instances {
        let (w, td) = exact_treewidth(g, None, &opts.limits)?;
        if w != n - 1 || !is_valid(g, &td) {
            wrong.push(format!("n={n} k={k}: {w}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = wrong.is_empty() && secs < 60.0;
    Ok((
        ok,
        format!(
            "{}/{} instances with width n-1 in {secs:.2} s (limit 60 s){}",
            instances.len() - wrong.len(),
            instances.len(),
            list(&wrong)
        ),
    ))
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; mismatches: {}", items.join(", "))
    }
}

/// The seeded pseudo-cliques and input decompositions used for normalisation.
pub fn normalisation_instances(opts: &VerifyOptions) -> Vec<(PseudoCliqueSpec, Graph, TreeDecomposition)> {
    let mut rng = opts.rng(2);
    (0..opts.samples(100))
        .map(|_| {
            let n = rng.gen_range(3..=6);
            let spec = PseudoCliqueSpec::random(n, 3, &mut rng);
            let g = gen_pseudo_clique(&spec);
            let td = if rng.gen_bool(0.5) {
                heuristic_decomposition(&g, Heuristic::MinFill)
            } else {
                TreeDecomposition::from_parts([g.vertices().collect()], [])
            };
            (spec, g, td)
        })
        .collect()
}

fn normalisation(opts: &VerifyOptions) -> Outcome {
    let instances = normalisation_instances(opts);
    let (mut valid, mut narrower, mut single, mut relaxed) = (0, 0, 0, 0);
    for (spec, g, td) in &instances {
        let out = normalize_pseudo(g, td)?;
        valid += usize::from(is_valid(g, &out));
        narrower += usize::from(out.width()? <= td.width()?);
        let mut exactly_once = true;
        let mut small_and_few = true;
        let mut next = spec.n + 1;
        for &k in spec.lengths.values() {
            for v in next..next + k {
                let bags: Vec<&BTreeSet<usize>> = out.bags().values().filter(|b| b.contains(&v)).collect();
                exactly_once &= bags.len() == 1 && bags[0].len() <= 3;
                let allowed = if k == 1 { 1 } else { 2 };
                small_and_few &= !bags.is_empty() && bags.len() <= allowed && bags.iter().all(|b| b.len() <= 3);
            }
            next += k;
        }
        debug_assert!(g.labelled(VertexLabel::Edge).len() == next - spec.n - 1);
        single += usize::from(exactly_once);
        relaxed += usize::from(small_and_few);
    }
    let total = instances.len();
    let ok = valid == total && narrower == total && single == total;
    Ok((
        ok,
        format!(
            "(a) valid {valid}/{total}, (b) width not increased {narrower}/{total}, \
             (c) every edge-node in exactly one bag of size <= 3 {single}/{total}; \
             edge-nodes only in bags of size <= 3, one bag when k = 1 and at most two otherwise {relaxed}/{total}"
        ),
    ))
}

fn bases() -> Vec<Basis> {
    let b = |cs: &[Connective]| Basis::new(cs.iter().copied()).expect("nonempty");
    use Connective::*;
    vec![
        Basis::default(),
        b(&[Or, Not]),
        b(&[And, Xor, True]),
        b(&[Imp, False]),
        b(&[Iff, Xor3, And]),
    ]
}

fn sat_imp_encodings(opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let bases = bases();
    let mut rng = opts.rng(3);
    let n = opts.samples(100);
    let mut sat_agree = 0;
    for i in 0..n {
        let basis = &bases[i % bases.len()];
        let gamma = random_gamma(&mut rng, basis, 8);
        let s = build_prop_structure(&gamma, basis)?;
        let phi = paper_formula(PaperFormula::Sat, basis, Variant::Corrected);
        let (mso, _) = eval_mso_with(&s, &phi, &Env::new(), &opts.limits)?;
        sat_agree += usize::from(mso == sat_bruteforce(&gamma, &opts.limits)?.is_some());
    }
    let mut imp_agree = 0;
    for i in 0..n {
        let basis = &bases[i % bases.len()];
        let (f, g) = random_imp_pair(&mut rng, basis, 8);
        let s = build_imp_structure(&f, &g, basis)?;
        let phi = paper_formula(PaperFormula::Imp, basis, Variant::Corrected);
        let (mso, _) = eval_mso_with(&s, &phi, &Env::new(), &opts.limits)?;
        imp_agree += usize::from(mso == implies_bruteforce(&f, &g, &opts.limits)?);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        sat_agree == n && imp_agree == n && secs < 120.0,
        format!("sat {sat_agree}/{n}, imp {imp_agree}/{n} in {secs:.2} s (limit 120 s)"),
    ))
}

fn extension_encoding(opts: &VerifyOptions) -> Outcome {
    let basis = Basis::default();
    let phi = paper_formula(PaperFormula::Extension, &basis, Variant::Corrected);
    let oracle = entailment_oracle_with(OracleKind::Brute, &opts.limits);
    let mut rng = opts.rng(4);
    let n = opts.samples(100);
    let (mut agree, mut with_ext, mut firing) = (0, 0, 0);
    for _ in 0..n {
        let t = random_literal_theory(&mut rng, 3, 3);
        let (expected, sets) = extension_exists(&t, oracle.as_ref(), &opts.limits)?;
        firing += usize::from(sets.iter().any(|g| !g.is_empty()));
        let s = build_dl_structure(&t, &basis)?;
        let (mso, _) = eval_mso_with(&s, &phi, &Env::new(), &opts.limits)?;
        agree += usize::from(mso == expected);
        with_ext += usize::from(expected);
    }
    Ok((
        agree == n,
        format!("{agree}/{n} agree ({with_ext} with an extension, {firing} with a nonempty generating set)"),
    ))
}

fn full_set_encoding(opts: &VerifyOptions) -> Outcome {
    let basis = Basis::new([Connective::Not, Connective::And, Connective::Or, Connective::Imp]).expect("nonempty");
    let phi = paper_formula(PaperFormula::FullExists, &basis, Variant::Corrected);
    let oracle = entailment_oracle_with(OracleKind::Brute, &opts.limits);
    let mut rng = opts.rng(5);
    let n = opts.samples(100);
    let (mut agree, mut with_exp) = (0, 0);
    for _ in 0..n {
        let sigma = random_ae_theory(&mut rng, 3, 8);
        let (expected, _) = expansion_exists(&sigma, oracle.as_ref(), &opts.limits)?;
        let s = build_ael_structure(&sigma, &basis)?;
        let (mso, _) = eval_mso_with(&s, &phi, &Env::new(), &opts.limits)?;
        agree += usize::from(mso == expected);
        with_exp += usize::from(expected);
    }
    let count = |text: &str| -> Result<usize> {
        let sigma = parse_ae_theory(text, &basis)?;
        Ok(expansion_exists(&sigma, oracle.as_ref(), &opts.limits)?.1.len())
    };
    let fixtures = [
        count("L p -> p")?,
        count("!L p -> p")?,
        expansion_exists(&AeTheory::new(Vec::new()), oracle.as_ref(), &opts.limits)?
            .1
            .len(),
    ];
    let fixtures_ok = fixtures == [2, 0, 1];
    Ok((
        agree == n && fixtures_ok,
        format!(
            "{agree}/{n} agree ({with_exp} with an expansion); full sets for {{Lp->p}}, {{!Lp->p}}, {{}}: {fixtures:?} (expected [2, 0, 1])"
        ),
    ))
}

fn time_dp(m: usize, limits: &Limits) -> Result<(bool, f64)> {
    let gamma = chain_family(m);
    let mut best = f64::INFINITY;
    let mut verdict = false;
    for _ in 0..3 {
        let start = Instant::now();
        verdict = dp_sat(&gamma, None, limits)?;
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok((verdict, best))
}

fn dp_scaling(opts: &VerifyOptions) -> Outcome {
    let (sat_1000, t_1000) = time_dp(1000, &opts.limits)?;
    let (sat_2000, t_2000) = time_dp(2000, &opts.limits)?;
    let ratio = t_2000 / t_1000.max(1e-9);
    let brute = sat_bruteforce(&chain_family(2000), &opts.limits);
    let rejected = matches!(&brute, Err(e) if e.is_resource_limit());
    let ok = sat_1000 && sat_2000 && t_2000 < 1.0 && ratio <= 2.5 && rejected;
    Ok((
        ok,
        format!(
            "m=2000 in {:.1} ms (limit 1000 ms), time ratio 2000/1000 = {ratio:.2} (limit 2.50), brute force {}",
            t_2000 * 1e3,
            if rejected {
                "rejected by the atom cap"
            } else {
                "not rejected"
            }
        ),
    ))
}

fn oracle_cross_validation(opts: &VerifyOptions) -> Outcome {
    let brute = entailment_oracle_with(OracleKind::Brute, &opts.limits);
    let twdp = entailment_oracle_with(OracleKind::Twdp, &opts.limits);
    let bases = bases();
    let mut rng = opts.rng(7);
    let q = opts.samples(300);
    let mut queries = 0;
    for i in 0..q {
        let (f, g) = random_imp_pair(&mut rng, &bases[i % bases.len()], 8);
        queries += usize::from(brute.entails(&f, &g[0])? == twdp.entails(&f, &g[0])?);
    }
    let t = opts.samples(200);
    let (mut dl, mut ae) = (0, 0);
    for _ in 0..t {
        let theory = random_literal_theory(&mut rng, 4, 3);
        dl += usize::from(
            extension_exists(&theory, brute.as_ref(), &opts.limits)?
                == extension_exists(&theory, twdp.as_ref(), &opts.limits)?,
        );
        let sigma = random_ae_theory(&mut rng, 3, 10);
        ae += usize::from(
            expansion_exists(&sigma, brute.as_ref(), &opts.limits)?
                == expansion_exists(&sigma, twdp.as_ref(), &opts.limits)?,
        );
    }
    Ok((
        queries == q && dl == t && ae == t,
        format!("entailment {queries}/{q}, extensions {dl}/{t}, expansions {ae}/{t}"),
    ))
}

/// Graphs tagged with the family parameter that produced them.
pub type GraphFamily = Vec<(usize, Graph)>;

/// Gaifman graphs of the lower-bound families, dl then ae.
pub fn lower_bound_graphs() -> Result<(GraphFamily, GraphFamily)> {
    let basis = Basis::default();
    let dl = (2..=5)
        .map(|n| {
            Ok((
                n,
                gaifman_graph(&build_dl_structure(&gen_dl_lower(n, DlVariant::Printed), &basis)?),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let ae = (3..=6)
        .map(|k| Ok((k, gaifman_graph(&build_ael_structure(&gen_ael_lower(k), &basis)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok((dl, ae))
}

fn width_growth(opts: &VerifyOptions) -> Outcome {
    let (dl, ae) = lower_bound_graphs()?;
    let dl_widths = dl
        .iter()
        .map(|(_, g)| exact_treewidth(g, None, &opts.limits).map(|(w, _)| w))
        .collect::<Result<Vec<_>>>()?;
    let ae_widths = ae
        .iter()
        .map(|(_, g)| exact_treewidth(g, None, &opts.limits).map(|(w, _)| w))
        .collect::<Result<Vec<_>>>()?;
    let increasing = dl_widths.windows(2).all(|w| w[0] < w[1]);
    let expected: Vec<usize> = ae.iter().map(|(k, _)| k - 1).collect();
    Ok((
        increasing && ae_widths == expected,
        format!(
            "dl n=2..5 widths {dl_widths:?} (strictly increasing: {increasing}); ael k=3..6 widths {ae_widths:?} (expected {expected:?})"
        ),
    ))
}

fn round_trips(opts: &VerifyOptions) -> Outcome {
    let mut graphs: Vec<Graph> = pseudo_clique_instances().into_iter().map(|(_, _, g)| g).collect();
    graphs.extend(normalisation_instances(opts).into_iter().map(|(_, g, _)| g));
    let (dl, ae) = lower_bound_graphs()?;
    graphs.extend(dl.into_iter().chain(ae).map(|(_, g)| g));
    let mut rng = opts.rng(9);
    for _ in 0..opts.samples(50) {
        let n = rng.gen_range(0..=20);
        let p = rng.gen_range(0.05..0.5);
        graphs.push(random_graph(&mut rng, n, p));
    }

    let (mut gr_ok, mut td_ok, mut td_total, mut valid) = (0, 0, 0, 0);
    for g in &graphs {
        let text = write_gr(g);
        let back = parse_gr(&text)?;
        gr_ok += usize::from(write_gr(&back) == text && back.edges().eq(g.edges()));

        let mut tds = vec![
            heuristic_decomposition(g, Heuristic::MinFill),
            heuristic_decomposition(g, Heuristic::MinDegree),
        ];
        if g.n() <= 40 {
            tds.push(exact_treewidth(g, None, &opts.limits)?.1);
        }
        if g.labels().is_some() {
            tds.push(normalize_pseudo(g, &tds[0])?);
        }
        for td in tds {
            td_total += 1;
            let text = write_td(&td, g.n());
            let (back, n) = parse_td(&text)?;
            td_ok += usize::from(n == g.n() && back == td && write_td(&back, n) == text);
            valid += usize::from(is_valid(g, &td));
        }
    }
    let total = graphs.len();
    Ok((
        gr_ok == total && td_ok == td_total && valid == td_total,
        format!(
            ".gr {gr_ok}/{total} bit-exact, .td {td_ok}/{td_total} bit-exact, valid decompositions {valid}/{td_total}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// Module invariant sweeps

pub const SWEEPS: [&str; 15] = [
    "implication via satisfiability",
    "formula print/parse round trip",
    "structure well-formedness",
    "mso sat sweep over {or, not}",
    "mso relabelling invariance",
    "heuristic decompositions valid",
    "exact width bounds",
    "normalisation preserves validity",
    "dp agrees with brute force",
    "dp independent of decomposition",
    "generating sets re-verify",
    "full sets well-formed",
    "generators in their classes",
    "nice decompositions",
    "default and gaifman shape",
];

pub fn run_sweeps(opts: &VerifyOptions) -> Vec<CriterionReport> {
    (0..SWEEPS.len()).map(|i| run_sweep(i, opts)).collect()
}

/// Sweep `index` into [`SWEEPS`], reported with id `10 + index`.
pub fn run_sweep(index: usize, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let mut rng = opts.rng(100 + index as u64);
    let outcome = match index {
        0 => implication_via_sat(opts, &mut rng),
        1 => print_parse(opts, &mut rng),
        2 => structure_well_formed(opts, &mut rng),
        3 => mso_sat_sweep(opts, &mut rng),
        4 => relabelling(opts, &mut rng),
        5 => heuristic_valid(opts, &mut rng),
        6 => exact_bounds(opts, &mut rng),
        7 => normalisation_valid(opts),
        8 => dp_vs_brute(opts, &mut rng),
        9 => dp_decomposition_independent(opts, &mut rng),
        10 => generating_sets(opts, &mut rng),
        11 => full_sets(opts, &mut rng),
        12 => generator_classes(),
        13 => nice(opts, &mut rng),
        14 => gaifman_shape(opts, &mut rng),
        _ => Ok((false, format!("no sweep {index}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport {
        id: 10 + index as u8,
        name: SWEEPS.get(index).copied().unwrap_or("unknown"),
        passed,
        detail,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

fn tally(ok: usize, n: usize) -> (bool, String) {
    (ok == n, format!("{ok}/{n}"))
}

fn implication_via_sat(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let n = opts.samples(200);
    let bases = bases();
    let mut ok = 0;
    for i in 0..n {
        let (f, g) = random_imp_pair(rng, &bases[i % bases.len()], 10);
        let mut via_sat = true;
        for c in &g {
            let mut probe = f.clone();
            probe.push(crate::formula::Formula::not(c.clone()));
            via_sat &= sat_bruteforce(&probe, &opts.limits)?.is_none();
        }
        ok += usize::from(implies_bruteforce(&f, &g, &opts.limits)? == via_sat);
    }
    Ok(tally(ok, n))
}

fn print_parse(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::formula::{parse_formula, Mode};
    let n = opts.samples(500);
    let mut ok = 0;
    for _ in 0..n {
        let f = crate::random::random_formula(rng, 4, 5);
        let back = parse_formula(&f.to_string(), Mode::Prop, &Basis::default())?;
        ok += usize::from(back == f && f.subformulae().len() <= f.node_count());
    }
    Ok(tally(ok, n))
}

fn structure_well_formed(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::formula::subformulae_of;
    use crate::structures::StructureKind;
    let n = opts.samples(50);
    let basis = Basis::default();
    let limits = &opts.limits;
    let struc = |kind| crate::mso::theta_struc(&basis, kind);
    let mut ok = 0;
    let mut total = 0;
    for _ in 0..n {
        let gamma = random_gamma(rng, &basis, 10);
        let s = build_prop_structure(&gamma, &basis)?;
        let sized = s.len() == subformulae_of(&gamma).len();
        let checks = [
            (s, StructureKind::Prop),
            {
                let (f, g) = random_imp_pair(rng, &basis, 10);
                (build_imp_structure(&f, &g, &basis)?, StructureKind::Imp)
            },
            (
                build_dl_structure(&random_literal_theory(rng, 3, 3), &basis)?,
                StructureKind::Dl,
            ),
            (
                build_ael_structure(&random_ae_theory(rng, 3, 8), &basis)?,
                StructureKind::Ae,
            ),
        ];
        for (i, (s, kind)) in checks.into_iter().enumerate() {
            total += 1;
            let (holds, _) = eval_mso_with(&s, &struc(kind), &Env::new(), limits)?;
            ok += usize::from(holds && s.validate().is_ok() && (i > 0 || sized));
        }
    }
    Ok(tally(ok, total))
}

fn mso_sat_sweep(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let basis = Basis::new([Connective::Or, Connective::Not]).expect("nonempty");
    let phi = paper_formula(PaperFormula::Sat, &basis, Variant::Corrected);
    let n = opts.samples(200);
    let mut ok = 0;
    for _ in 0..n {
        let gamma = random_gamma(rng, &basis, 8);
        let s = build_prop_structure(&gamma, &basis)?;
        let (mso, _) = eval_mso_with(&s, &phi, &Env::new(), &opts.limits)?;
        ok += usize::from(mso == sat_bruteforce(&gamma, &opts.limits)?.is_some());
    }
    Ok(tally(ok, n))
}

fn relabelling(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use rand::seq::SliceRandom;
    let basis = Basis::default();
    let cases = [
        (
            PaperFormula::Sat,
            build_prop_structure(&random_gamma(rng, &basis, 8), &basis)?,
        ),
        {
            let (f, g) = random_imp_pair(rng, &basis, 8);
            (PaperFormula::Imp, build_imp_structure(&f, &g, &basis)?)
        },
        (
            PaperFormula::Extension,
            build_dl_structure(&random_literal_theory(rng, 3, 3), &basis)?,
        ),
        (
            PaperFormula::FullExists,
            build_ael_structure(&random_ae_theory(rng, 2, 6), &basis)?,
        ),
    ];
    let relabelings = if opts.quick { 3 } else { 10 };
    let (mut ok, mut total) = (0, 0);
    for (name, s) in &cases {
        let phi = paper_formula(*name, &basis, Variant::Corrected);
        let (base, _) = eval_mso_with(s, &phi, &Env::new(), &opts.limits)?;
        for _ in 0..relabelings {
            let mut perm: Vec<usize> = (0..s.len()).collect();
            perm.shuffle(rng);
            let (v, _) = eval_mso_with(&s.permuted(&perm), &phi, &Env::new(), &opts.limits)?;
            ok += usize::from(v == base);
            total += 1;
        }
    }
    Ok(tally(ok, total))
}

fn sweep_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.gen_range(0..=max_n);
    let p = rng.gen_range(0.05..0.6);
    random_graph(rng, n, p)
}

fn heuristic_valid(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let n = opts.samples(500);
    let mut ok = 0;
    for _ in 0..n {
        let g = sweep_graph(rng, 30);
        ok += usize::from(
            [Heuristic::MinFill, Heuristic::MinDegree]
                .iter()
                .all(|&h| is_valid(&g, &heuristic_decomposition(&g, h))),
        );
    }
    Ok(tally(ok, n))
}

fn exact_bounds(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::treewidth::pseudo_clique_lower_bound;
    let n = opts.samples(100);
    let mut ok = 0;
    for _ in 0..n {
        let g = sweep_graph(rng, 14);
        let (w, td) = exact_treewidth(&g, None, &opts.limits)?;
        let upper = [Heuristic::MinFill, Heuristic::MinDegree]
            .iter()
            .map(|&h| heuristic_decomposition(&g, h).width())
            .collect::<Result<Vec<_>>>()?;
        let lb = pseudo_clique_lower_bound(&g, &opts.limits)?;
        ok += usize::from(
            is_valid(&g, &td) && td.width()? == w && upper.iter().all(|&u| w <= u) && lb.value.saturating_sub(1) <= w,
        );
    }
    Ok(tally(ok, n))
}

fn normalisation_valid(opts: &VerifyOptions) -> Outcome {
    let instances = normalisation_instances(opts);
    let mut ok = 0;
    for (_, g, td) in &instances {
        let out = normalize_pseudo(g, td)?;
        ok += usize::from(is_valid(g, &out) && out.width()? <= td.width()?);
    }
    Ok(tally(ok, instances.len()))
}

fn dp_vs_brute(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::twdp::dp_implication;
    let bases = bases();
    let n = opts.samples(500);
    let mut sat = 0;
    for i in 0..n {
        let gamma = random_gamma(rng, &bases[i % bases.len()], 14);
        sat += usize::from(dp_sat(&gamma, None, &opts.limits)? == sat_bruteforce(&gamma, &opts.limits)?.is_some());
    }
    let m = opts.samples(200);
    let mut imp = 0;
    for i in 0..m {
        let (f, g) = random_imp_pair(rng, &bases[i % bases.len()], 12);
        imp += usize::from(dp_implication(&f, &g, &opts.limits)? == implies_bruteforce(&f, &g, &opts.limits)?);
    }
    Ok((sat == n && imp == m, format!("sat {sat}/{n}, implication {imp}/{m}")))
}

fn dp_decomposition_independent(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::twdp::ConstraintGraph;
    let n = opts.samples(100);
    let mut ok = 0;
    for _ in 0..n {
        let gamma = random_gamma(rng, &Basis::default(), 12);
        let cg = ConstraintGraph::build(&gamma);
        let g = cg.graph();
        let mut tds = vec![
            heuristic_decomposition(g, Heuristic::MinFill),
            heuristic_decomposition(g, Heuristic::MinDegree),
        ];
        tds.push(exact_treewidth(g, None, &opts.limits)?.1);
        let verdicts = tds
            .iter()
            .map(|td| dp_sat(&gamma, Some(td), &opts.limits))
            .collect::<Result<Vec<_>>>()?;
        ok += usize::from(verdicts.windows(2).all(|w| w[0] == w[1]));
    }
    Ok(tally(ok, n))
}

fn generating_sets(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::dl::stage_fixpoint;
    let oracle = entailment_oracle_with(OracleKind::Twdp, &opts.limits);
    let n = opts.samples(200);
    let mut ok = 0;
    for _ in 0..n {
        let t = random_literal_theory(rng, 4, 4);
        let (exists, sets) = extension_exists(&t, oracle.as_ref(), &opts.limits)?;
        let mut good = exists == !sets.is_empty();
        for g in &sets {
            let (fixed, applied) = stage_fixpoint(&t, g, oracle.as_ref())?;
            good &= fixed && applied == *g;
        }
        ok += usize::from(good);
    }
    Ok(tally(ok, n))
}

fn full_sets(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let oracle = entailment_oracle_with(OracleKind::Twdp, &opts.limits);
    let n = opts.samples(200);
    let mut ok = 0;
    for i in 0..n {
        let sigma = if i % 4 == 0 {
            AeTheory::new(random_gamma(rng, &Basis::default(), 8))
        } else {
            random_ae_theory(rng, 3, 10)
        };
        let beliefs = sigma.belief_subformulae();
        let (exists, sets) = expansion_exists(&sigma, oracle.as_ref(), &opts.limits)?;
        let mut good = exists == !sets.is_empty();
        for set in &sets {
            good &= set.polarity.len() == beliefs.len() && set.polarity.iter().map(|(b, _)| b).eq(beliefs.iter());
        }
        if beliefs.is_empty() {
            good &= exists && sets.len() == 1;
        }
        ok += usize::from(good);
    }
    Ok(tally(ok, n))
}

fn generator_classes() -> Outcome {
    use crate::families::{check_class, gen_imp_lower, ImpKind, Instance, InstanceClass};
    use crate::treewidth::is_pseudo_clique;
    let mut failures = Vec::new();
    for n in 2..=6 {
        for k in 0..=3 {
            let g = gen_pseudo_clique(&PseudoCliqueSpec::exact(n, k));
            let mains: BTreeSet<usize> = g.labelled(VertexLabel::Main).into_iter().collect();
            if !is_pseudo_clique(&g, &mains) {
                failures.push(format!("pseudo-clique({n},{k})"));
            }
        }
    }
    for n in 1..=5 {
        let t = gen_dl_lower(n, DlVariant::Printed);
        if let Some(why) = check_class(&Instance::Dl(&t), InstanceClass::DlLiterals)? {
            failures.push(format!("dl-lower({n}): {why}"));
        }
        let s = gen_ael_lower(n);
        if let Some(why) = check_class(&Instance::Ae(&s), InstanceClass::AeDisjunctions)? {
            failures.push(format!("ael-lower({n}): {why}"));
        }
    }
    for n in 3..=6 {
        for (kind, class) in [
            (ImpKind::Xor3, InstanceClass::ImpXor3),
            (ImpKind::CnfDnf, InstanceClass::ImpCnfDnf),
        ] {
            let (f, g) = gen_imp_lower(kind, n);
            if let Some(why) = check_class(&Instance::Imp(&f, &g), class)? {
                failures.push(format!("imp-lower({class},{n}): {why}"));
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "all generated instances conform".into()
        } else {
            failures.join("; ")
        },
    ))
}

fn nice(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::treewidth::make_nice;
    let n = opts.samples(200);
    let mut ok = 0;
    for _ in 0..n {
        let g = sweep_graph(rng, 20);
        let td = heuristic_decomposition(&g, Heuristic::MinFill);
        let nice = make_nice(&td)?;
        ok += usize::from(nice.width() == td.width()? && is_valid(&g, &nice.to_decomposition()));
    }
    Ok(tally(ok, n))
}

fn gaifman_shape(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Outcome {
    use crate::dl::{DefaultRule, DefaultTheory};
    use crate::formula::Formula;
    use crate::structures::ElementKind;
    use rand::seq::SliceRandom;
    let n = opts.samples(200);
    let literal = |rng: &mut ChaCha8Rng, v: usize| {
        let x = Formula::var(format!("x{v}"));
        if rng.gen_bool(0.5) {
            Formula::not(x)
        } else {
            x
        }
    };
    let (mut degree, mut relabel, mut triangle_free) = (0, 0, 0);
    for _ in 0..n {
        // Each rule draws its three literals from three different variables.
        let rules = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut vars: Vec<usize> = (0..5).collect();
                vars.shuffle(rng);
                DefaultRule::new(literal(rng, vars[0]), literal(rng, vars[1]), literal(rng, vars[2]))
            })
            .collect();
        let t = DefaultTheory::new(Vec::new(), rules);
        let s = build_dl_structure(&t, &Basis::default())?;
        let g = gaifman_graph(&s);
        let defaults: Vec<usize> = (0..s.len())
            .filter(|&i| matches!(s.elements()[i].kind, ElementKind::Default { .. }))
            .collect();
        degree += usize::from(defaults.iter().all(|&d| g.adjacency()[d + 1].len() == 3));
        triangle_free += usize::from(!has_triangle(&g));

        let mut perm: Vec<usize> = (0..s.len()).collect();
        perm.shuffle(rng);
        let h = gaifman_graph(&s.permuted(&perm));
        // New element i is old element perm[i].
        let mapped: BTreeSet<(usize, usize)> = h
            .edges()
            .map(|(a, b)| {
                let (x, y) = (perm[a - 1] + 1, perm[b - 1] + 1);
                (x.min(y), x.max(y))
            })
            .collect();
        relabel += usize::from(mapped == g.edges().collect::<BTreeSet<_>>());
    }
    Ok((
        degree == n && relabel == n && triangle_free == n,
        format!("degree 3 {degree}/{n}, relabelling {relabel}/{n}, triangle-free {triangle_free}/{n}"),
    ))
}

fn has_triangle(g: &Graph) -> bool {
    g.edges().any(|(a, b)| {
        g.vertices()
            .any(|c| c != a && c != b && g.has_edge(a, c) && g.has_edge(b, c))
    })
}
