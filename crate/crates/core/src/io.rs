//! Text formats: PACE `.gr`/`.td`, vertex label sidecars, `.fs` and `.imp`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dl::{parse_line_formula, strip_comment};
use crate::error::{Error, Result};
use crate::formula::{Basis, Formula, Mode};
use crate::structures::{Graph, VertexLabel};
use crate::treewidth::TreeDecomposition;

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format { line, msg: msg.into() }
}

/// Non-comment, non-blank lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(move |(i, l)| {
        let fields: Vec<&str> = l.split_ascii_whitespace().collect();
        match fields.first() {
            None => None,
            Some(&"c") => None,
            _ => Some((i + 1, fields)),
        }
    })
}

fn number(field: Option<&&str>, line: usize, what: &str) -> Result<usize> {
    let field = field.ok_or_else(|| format_err(line, format!("missing {what}")))?;
    field
        .parse()
        .map_err(|_| format_err(line, format!("{what} `{field}` is not a number")))
}

pub fn parse_gr(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| format_err(1, "missing `p tw` header"))?;
    if header.len() != 4 || header[0] != "p" || header[1] != "tw" {
        return Err(format_err(line, "expected `p tw <n> <m>`"));
    }
    let n = number(header.get(2), line, "vertex count")?;
    let m = number(header.get(3), line, "edge count")?;
    let mut g = Graph::new(n);
    let mut seen = 0;
    for (line, fields) in lines {
        if fields.len() != 2 {
            return Err(format_err(line, "expected `<u> <v>`"));
        }
        let u = number(fields.first(), line, "vertex")?;
        let v = number(fields.get(1), line, "vertex")?;
        g.add_edge(u, v).map_err(|e| format_err(line, e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        return Err(format_err(line, format!("header declares {m} edges, found {seen}")));
    }
    Ok(g)
}

pub fn write_gr(g: &Graph) -> String {
    let mut out = format!("p tw {} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Parses a `.td` file, returning the decomposition and the declared vertex count.
pub fn parse_td(text: &str) -> Result<(TreeDecomposition, usize)> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| format_err(1, "missing `s td` header"))?;
    if header.len() != 5 || header[0] != "s" || header[1] != "td" {
        return Err(format_err(line, "expected `s td <bags> <max bag> <n>`"));
    }
    let num_bags = number(header.get(2), line, "bag count")?;
    let max_bag = number(header.get(3), line, "max bag size")?;
    let n = number(header.get(4), line, "vertex count")?;
    let mut td = TreeDecomposition::new();
    let mut edges = Vec::new();
    for (line, fields) in lines {
        if fields[0] == "b" {
            let id = number(fields.get(1), line, "bag id")?;
            if id == 0 || id > num_bags {
                return Err(format_err(line, format!("bag id {id} outside 1..={num_bags}")));
            }
            if td.bag(id).is_some() {
                return Err(format_err(line, format!("bag {id} declared twice")));
            }
            let mut bag = BTreeSet::new();
            for f in &fields[2..] {
                let v = number(Some(f), line, "vertex")?;
                if v == 0 || v > n {
                    return Err(format_err(line, format!("vertex {v} outside 1..={n}")));
                }
                bag.insert(v);
            }
            td.set_bag(id, bag);
        } else {
            if fields.len() != 2 {
                return Err(format_err(line, "expected `b ...` or a tree edge `<a> <b>`"));
            }
            let a = number(fields.first(), line, "bag id")?;
            let b = number(fields.get(1), line, "bag id")?;
            edges.push((line, a, b));
        }
    }
    if td.num_bags() != num_bags {
        return Err(format_err(
            line,
            format!("header declares {num_bags} bags, found {}", td.num_bags()),
        ));
    }
    for (line, a, b) in edges {
        if td.bag(a).is_none() || td.bag(b).is_none() {
            return Err(format_err(line, format!("edge {a} {b} references an undeclared bag")));
        }
        td.add_edge(a, b);
    }
    if td.max_bag_size() != max_bag {
        return Err(format_err(
            line,
            format!("header declares max bag size {max_bag}, found {}", td.max_bag_size()),
        ));
    }
    Ok((td, n))
}

/// Emits `.td` text with bags by id, vertices ascending and edges sorted.
pub fn write_td(td: &TreeDecomposition, n: usize) -> String {
    let mut out = format!("s td {} {} {}\n", td.num_bags(), td.max_bag_size(), n);
    for (id, bag) in td.bags() {
        out.push_str(&format!("b {id}"));
        for v in bag {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for (a, b) in td.edges() {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

/// One `<id> <main|edge|none> <description>` line per vertex.
pub fn write_labels(g: &Graph) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        let _ = write!(out, "{v} {}", g.label(v));
        if let Some(d) = g.description(v).filter(|d| !d.is_empty()) {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    out
}

/// Reads a label sidecar into `g`. Every vertex must be listed exactly once.
pub fn read_labels(g: &mut Graph, text: &str) -> Result<()> {
    let mut labels = vec![None; g.n()];
    let mut descriptions = vec![String::new(); g.n()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut parts = raw.splitn(3, char::is_whitespace);
        let v = number(parts.next().as_ref(), line, "vertex")?;
        if v == 0 || v > g.n() {
            return Err(format_err(line, format!("vertex {v} outside 1..={}", g.n())));
        }
        let label = parts.next().unwrap_or("");
        let label = VertexLabel::parse(label).ok_or_else(|| format_err(line, format!("unknown label `{label}`")))?;
        if labels[v - 1].replace(label).is_some() {
            return Err(format_err(line, format!("vertex {v} labelled twice")));
        }
        descriptions[v - 1] = parts.next().unwrap_or("").trim().to_string();
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| format_err(0, format!("vertex {} has no label", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    g.set_labels(labels)?;
    g.set_descriptions(descriptions)
}

/// `.fs`: one formula per line, `#` comments.
pub fn parse_formula_set(text: &str, mode: Mode, basis: &Basis) -> Result<Vec<Formula>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = strip_comment(raw);
        if !content.is_empty() {
            out.push(parse_line_formula(content, i + 1, mode, basis)?);
        }
    }
    Ok(out)
}

pub fn write_formula_set(formulas: &[Formula]) -> String {
    formulas.iter().map(|f| format!("{f}\n")).collect()
}

/// `.imp`: `p: <formula>` premise lines and `c: <formula>` conclusion lines.
pub fn parse_imp(text: &str, basis: &Basis) -> Result<(Vec<Formula>, Vec<Formula>)> {
    let (mut premises, mut conclusions) = (Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let (tag, rest) = content
            .split_once(':')
            .ok_or_else(|| format_err(line, "expected `p: <formula>` or `c: <formula>`"))?;
        let f = parse_line_formula(rest.trim(), line, Mode::Prop, basis)?;
        match tag.trim() {
            "p" => premises.push(f),
            "c" => conclusions.push(f),
            other => return Err(format_err(line, format!("unknown line tag `{other}`"))),
        }
    }
    Ok((premises, conclusions))
}

pub fn write_imp(premises: &[Formula], conclusions: &[Formula]) -> String {
    let mut out = String::new();
    for f in premises {
        let _ = writeln!(out, "p: {f}");
    }
    for f in conclusions {
        let _ = writeln!(out, "c: {f}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_pseudo_clique, PseudoCliqueSpec};
    use crate::formula::parse_formula;
    use crate::treewidth::{heuristic_decomposition, Heuristic};

    #[test]
    fn gr_round_trip() {
        let text = "c a comment\np tw 4 3\n1 2\n2 3\n\n3 4\n";
        let g = parse_gr(text).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(write_gr(&g), "p tw 4 3\n1 2\n2 3\n3 4\n");
        assert_eq!(parse_gr(&write_gr(&g)).unwrap(), g);
    }

    #[test]
    fn gr_errors() {
        assert!(parse_gr("p tw 2 1\n1 3\n").is_err());
        assert!(parse_gr("p tw 2 2\n1 2\n").is_err());
        assert!(parse_gr("p td 2 1\n1 2\n").is_err());
        assert!(matches!(
            parse_gr("p tw 2 1\n1 x\n"),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn td_round_trip() {
        let text = "c x\ns td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3\n1 2\n2 3\n";
        let (td, n) = parse_td(text).unwrap();
        assert_eq!(n, 3);
        assert_eq!(td.num_bags(), 3);
        let back = write_td(&td, n);
        assert_eq!(back, "s td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3\n1 2\n2 3\n");
        assert_eq!(parse_td(&back).unwrap().0, td);
    }

    #[test]
    fn td_errors() {
        assert!(parse_td("s td 1 2 2\nb 1 1 3\n").is_err());
        assert!(parse_td("s td 1 1 2\nb 1 1 2\n").is_err());
        assert!(parse_td("s td 2 1 2\nb 1 1\n").is_err());
        assert!(parse_td("s td 1 1 2\nb 1 1\n1 2\n").is_err());
    }

    #[test]
    fn generated_instances_round_trip() {
        for n in 2..=5 {
            for k in 0..=3 {
                let g = gen_pseudo_clique(&PseudoCliqueSpec::exact(n, k));
                let gr = write_gr(&g);
                let mut back = parse_gr(&gr).unwrap();
                read_labels(&mut back, &write_labels(&g)).unwrap();
                assert_eq!(back, g);
                assert_eq!(write_gr(&back), gr);
                let td = heuristic_decomposition(&g, Heuristic::MinFill);
                let text = write_td(&td, g.n());
                assert_eq!(write_td(&parse_td(&text).unwrap().0, g.n()), text);
            }
        }
    }

    #[test]
    fn labels_with_spaces_in_descriptions() {
        let mut g = Graph::new(2);
        read_labels(&mut g, "1 main x 1\n2 none\n").unwrap();
        assert_eq!(g.description(1), Some("x 1"));
        assert_eq!(g.label(2), VertexLabel::None);
        assert!(read_labels(&mut Graph::new(2), "1 main\n").is_err());
    }

    #[test]
    fn imp_and_fs() {
        let basis = Basis::default();
        let (f, g) = parse_imp("# modus ponens\np: p\np: p -> q\nc: q\n", &basis).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(g, vec![parse_formula("q", Mode::Prop, &basis).unwrap()]);
        assert_eq!(parse_imp(&write_imp(&f, &g), &basis).unwrap(), (f, g));
        assert!(parse_imp("x: p\n", &basis).is_err());
        let fs = parse_formula_set("p | q\n\n!p # note\n", Mode::Prop, &basis).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(
            parse_formula_set(&write_formula_set(&fs), Mode::Prop, &basis).unwrap(),
            fs
        );
    }
}
