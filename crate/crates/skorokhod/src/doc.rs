//! Text document format for functions, time changes, homeomorphisms, and
//! turbofunctions.
//!
//! Layout (UTF-8, LF line endings, field order fixed):
//!
//! ```text
//! skorokhod-doc v1
//! name: <label>
//! kind: step | pl_cadlag | timechange | homeo | turbo
//! nodes: <count>            (or f_nodes:/sigma_nodes: for turbo)
//! <t> <left> <right>        (one row per node; two columns for monotone kinds)
//! ```
//!
//! Numbers are serialized with 17 significant digits so that
//! `parse(serialize(x))` reproduces `x` bit for bit.

use std::fmt::Write as _;

use thiserror::Error;

use crate::piecewise::{CadlagFunction, CadlagNode, Homeomorphism, PiecewiseError, TimeChange};
use crate::turbo::{embed, Turbofunction};

pub const MAGIC: &str = "skorokhod-doc v1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document '{name}' fails validation: {source}")]
    Invalid {
        name: String,
        #[source]
        source: PiecewiseError,
    },
    #[error("document kind '{found}' cannot be used as {wanted}")]
    WrongKind { found: &'static str, wanted: &'static str },
}

#[derive(Debug, Clone)]
pub enum Payload {
    Step(CadlagFunction),
    PlCadlag(CadlagFunction),
    TimeChange(TimeChange),
    Homeo(Homeomorphism),
    Turbo(Turbofunction),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Step(_) => "step",
            Payload::PlCadlag(_) => "pl_cadlag",
            Payload::TimeChange(_) => "timechange",
            Payload::Homeo(_) => "homeo",
            Payload::Turbo(_) => "turbo",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FunctionDocument {
    pub name: String,
    pub payload: Payload,
}

impl FunctionDocument {
    pub fn new(name: impl Into<String>, payload: Payload) -> Self {
        FunctionDocument { name: name.into(), payload }
    }

    /// Interpret the document as a plain càdlàg function.
    pub fn as_function(&self) -> Result<&CadlagFunction, DocError> {
        match &self.payload {
            Payload::Step(f) | Payload::PlCadlag(f) => Ok(f),
            other => Err(DocError::WrongKind { found: other.kind(), wanted: "function" }),
        }
    }

    /// Interpret the document as a turbofunction, embedding plain functions.
    pub fn as_turbo(&self) -> Result<Turbofunction, DocError> {
        match &self.payload {
            Payload::Step(f) | Payload::PlCadlag(f) => Ok(embed(f.clone())),
            Payload::Turbo(x) => Ok(x.clone()),
            other => Err(DocError::WrongKind { found: other.kind(), wanted: "turbo" }),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_cadlag_rows(out: &mut String, f: &CadlagFunction) {
    for n in f.nodes() {
        let _ = writeln!(out, "{} {} {}", fmt_f64(n.t), fmt_f64(n.left), fmt_f64(n.right));
    }
}

fn write_pair_rows(out: &mut String, nodes: &[(f64, f64)]) {
    for &(t, v) in nodes {
        let _ = writeln!(out, "{} {}", fmt_f64(t), fmt_f64(v));
    }
}

pub fn serialize(doc: &FunctionDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "name: {}", doc.name);
    let _ = writeln!(out, "kind: {}", doc.payload.kind());
    match &doc.payload {
        Payload::Step(f) | Payload::PlCadlag(f) => {
            let _ = writeln!(out, "nodes: {}", f.nodes().len());
            write_cadlag_rows(&mut out, f);
        }
        Payload::TimeChange(tc) => {
            let _ = writeln!(out, "nodes: {}", tc.nodes().len());
            write_pair_rows(&mut out, tc.nodes());
        }
        Payload::Homeo(h) => {
            let _ = writeln!(out, "nodes: {}", h.nodes().len());
            write_pair_rows(&mut out, h.nodes());
        }
        Payload::Turbo(x) => {
            let _ = writeln!(out, "f_nodes: {}", x.f.nodes().len());
            write_cadlag_rows(&mut out, &x.f);
            let _ = writeln!(out, "sigma_nodes: {}", x.sigma.nodes().len());
            write_pair_rows(&mut out, x.sigma.nodes());
        }
    }
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.iter.next().map(|(i, l)| (i + 1, l))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), DocError> {
        self.next().ok_or_else(|| DocError::Parse {
            line: 0,
            message: format!("unexpected end of document, expected {what}"),
        })
    }
}

fn err(line: usize, message: impl Into<String>) -> DocError {
    DocError::Parse { line, message: message.into() }
}

fn field<'a>(line: usize, text: &'a str, key: &str) -> Result<&'a str, DocError> {
    let prefix = format!("{key}: ");
    text.strip_prefix(&prefix)
        .ok_or_else(|| err(line, format!("expected '{key}: …', found '{text}'")))
}

fn count(line: usize, text: &str, key: &str) -> Result<usize, DocError> {
    field(line, text, key)?
        .trim()
        .parse()
        .map_err(|_| err(line, format!("invalid {key} count")))
}

fn floats(line: usize, text: &str, n: usize) -> Result<Vec<f64>, DocError> {
    let vals: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
    let vals = vals.map_err(|_| err(line, format!("invalid number in '{text}'")))?;
    if vals.len() != n {
        return Err(err(line, format!("expected {n} columns, found {}", vals.len())));
    }
    Ok(vals)
}

fn parse_cadlag_rows(
    lines: &mut Lines,
    n: usize,
    name: &str,
) -> Result<CadlagFunction, DocError> {
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, text) = lines.expect("a node row")?;
        let v = floats(ln, text, 3)?;
        nodes.push(CadlagNode::new(v[0], v[1], v[2]));
    }
    CadlagFunction::new(nodes).map_err(|source| DocError::Invalid { name: name.into(), source })
}

fn parse_pair_rows(lines: &mut Lines, n: usize) -> Result<Vec<(f64, f64)>, DocError> {
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, text) = lines.expect("a node row")?;
        let v = floats(ln, text, 2)?;
        nodes.push((v[0], v[1]));
    }
    Ok(nodes)
}

pub fn parse(input: &str) -> Result<FunctionDocument, DocError> {
    let mut lines = Lines { iter: input.lines().enumerate() };
    let (ln, magic) = lines.expect("a header line")?;
    if magic != MAGIC {
        return Err(err(ln, format!("expected header '{MAGIC}', found '{magic}'")));
    }
    let (ln, text) = lines.expect("the name field")?;
    let name = field(ln, text, "name")?.to_string();
    let (ln, text) = lines.expect("the kind field")?;
    let kind = field(ln, text, "kind")?.trim().to_string();
    let payload = match kind.as_str() {
        "step" | "pl_cadlag" => {
            let (ln, text) = lines.expect("the node count")?;
            let n = count(ln, text, "nodes")?;
            let f = parse_cadlag_rows(&mut lines, n, &name)?;
            if kind == "step" {
                if !f.is_step() {
                    return Err(err(ln, "kind is 'step' but the nodes are not a step function"));
                }
                Payload::Step(f)
            } else {
                Payload::PlCadlag(f)
            }
        }
        "timechange" => {
            let (ln, text) = lines.expect("the node count")?;
            let n = count(ln, text, "nodes")?;
            let nodes = parse_pair_rows(&mut lines, n)?;
            Payload::TimeChange(TimeChange::new(nodes).map_err(|source| DocError::Invalid {
                name: name.clone(),
                source,
            })?)
        }
        "homeo" => {
            let (ln, text) = lines.expect("the node count")?;
            let n = count(ln, text, "nodes")?;
            let nodes = parse_pair_rows(&mut lines, n)?;
            Payload::Homeo(Homeomorphism::new(nodes).map_err(|source| DocError::Invalid {
                name: name.clone(),
                source,
            })?)
        }
        "turbo" => {
            let (ln, text) = lines.expect("the graph node count")?;
            let nf = count(ln, text, "f_nodes")?;
            let f = parse_cadlag_rows(&mut lines, nf, &name)?;
            let (ln, text) = lines.expect("the time-change node count")?;
            let ns = count(ln, text, "sigma_nodes")?;
            let nodes = parse_pair_rows(&mut lines, ns)?;
            let sigma = TimeChange::new(nodes).map_err(|source| DocError::Invalid {
                name: name.clone(),
                source,
            })?;
            Payload::Turbo(Turbofunction::new(f, sigma))
        }
        other => return Err(err(ln, format!("unknown kind '{other}'"))),
    };
    if let Some((ln, text)) = lines.next() {
        if !text.trim().is_empty() {
            return Err(err(ln, format!("trailing content '{text}'")));
        }
    }
    Ok(FunctionDocument { name, payload })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_homeo, random_pl, random_step, random_timechange, random_turbo, Rng};
    use crate::piecewise::sup_distance;
    use crate::turbo::{triangle_family, triangle_limit};

    #[test]
    fn round_trip_is_byte_identical() {
        let mut rng = Rng::new(11);
        for i in 0..50 {
            let payload = match i % 5 {
                0 => Payload::Step(random_step(&mut rng, 6)),
                1 => Payload::PlCadlag(random_pl(&mut rng, 6)),
                2 => Payload::TimeChange(random_timechange(&mut rng, 6)),
                3 => Payload::Homeo(random_homeo(&mut rng, 6)),
                _ => Payload::Turbo(random_turbo(&mut rng, 6)),
            };
            let doc = FunctionDocument::new(format!("case-{i}"), payload);
            let text = serialize(&doc);
            let back = parse(&text).expect("serialized document parses");
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn round_trip_preserves_values() {
        let f = triangle_family(8.0).unwrap();
        let doc = FunctionDocument::new("g8", Payload::PlCadlag(f.clone()));
        let back = parse(&serialize(&doc)).unwrap();
        let g = back.as_function().unwrap();
        assert_eq!(sup_distance(&f, g), 0.0);
    }

    #[test]
    fn turbo_document_and_embedding() {
        let x = triangle_limit();
        let doc = FunctionDocument::new("limit", Payload::Turbo(x.clone()));
        let back = parse(&serialize(&doc)).unwrap();
        let y = back.as_turbo().unwrap();
        assert_eq!(sup_distance(&x.f, &y.f), 0.0);
        assert!(x.sigma.approx_eq(&y.sigma, 0.0));

        let step = FunctionDocument::new(
            "s",
            Payload::Step(CadlagFunction::step(&[0.5], &[0.0, 1.0]).unwrap()),
        );
        let t = step.as_turbo().unwrap();
        assert!(t.sigma.is_strictly_increasing());
    }

    #[test]
    fn parse_errors_report_lines() {
        let e = parse("bogus").unwrap_err();
        assert!(matches!(e, DocError::Parse { line: 1, .. }), "{e}");

        let text = "skorokhod-doc v1\nname: x\nkind: step\nnodes: 2\n0 0 0\nnot a number";
        let e = parse(text).unwrap_err();
        assert!(matches!(e, DocError::Parse { line: 6, .. }), "{e}");

        let text = "skorokhod-doc v1\nname: x\nkind: nope\n";
        let e = parse(text).unwrap_err();
        assert!(matches!(e, DocError::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        // ramp is not a step function
        let text =
            "skorokhod-doc v1\nname: ramp\nkind: step\nnodes: 2\n0e0 0e0 0e0\n1e0 1e0 1e0\n";
        assert!(parse(text).is_err());
    }
}
