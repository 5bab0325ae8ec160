//! Line-oriented text format for networks and evidence.
//!
//! ```text
//! network chain3
//! variable A 0 1
//! variable B 0 1
//! parents B A
//! cpt A
//! 0.7 0.3
//! cpt B
//! 0.8 0.2
//! 0.3 0.7
//! ```
//!
//! `#` starts a comment. Variables appear in vertex order, rows of a `cpt`
//! block follow the parent enumeration order (last parent fastest). The
//! serializer prints every probability with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ris::graph::VertexId;
use ris::network::{BayesianNetwork, Evidence, Variable};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] ris::Error),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// A whitespace-separated token with its 1-based position.
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Vec<Token<'_>>> {
    text.lines()
        .enumerate()
        .map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (j, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(j),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &content[s..j],
                            line: i + 1,
                            column: content[..s].chars().count() + 1,
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            tokens
        })
        .filter(|t| !t.is_empty())
        .collect()
}

struct CptBlock {
    line: usize,
    rows: Vec<f64>,
    row_count: usize,
}

pub fn parse_network(text: &str) -> Result<BayesianNetwork, FormatError> {
    let lines = tokenize(text);
    let mut it = lines.iter().peekable();
    let name = match it.next() {
        Some(first) if first[0].text == "network" && first.len() == 2 => first[1].text.to_string(),
        Some(first) => return Err(syntax(first[0].line, first[0].column, "expected `network <name>`")),
        None => return Err(syntax(1, 1, "empty network file")),
    };

    let mut variables: Vec<Variable> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut parents: Vec<Option<Vec<VertexId>>> = Vec::new();
    let mut cpts: Vec<Option<CptBlock>> = Vec::new();
    let mut current: Option<usize> = None;

    let lookup = |index: &BTreeMap<String, usize>, t: &Token| {
        index
            .get(t.text)
            .copied()
            .ok_or_else(|| syntax(t.line, t.column, format!("unknown variable `{}`", t.text)))
    };

    for tokens in it {
        let head = &tokens[0];
        match head.text {
            "network" => return Err(syntax(head.line, head.column, "duplicate `network` line")),
            "variable" => {
                current = None;
                if !cpts.iter().all(Option::is_none) {
                    return Err(syntax(head.line, head.column, "variables must precede every cpt block"));
                }
                if tokens.len() < 2 {
                    return Err(syntax(head.line, head.column, "expected `variable <name> <state> ...`"));
                }
                let name = tokens[1].text.to_string();
                if index.contains_key(&name) {
                    return Err(syntax(tokens[1].line, tokens[1].column, format!("duplicate variable `{name}`")));
                }
                let states = tokens[2..].iter().map(|t| t.text.to_string()).collect();
                let id = VertexId(variables.len());
                let var = Variable::new(id, name.clone(), states)
                    .map_err(|e| syntax(tokens[1].line, tokens[1].column, e.to_string()))?;
                index.insert(name, id.index());
                variables.push(var);
                parents.push(None);
                cpts.push(None);
            }
            "parents" => {
                current = None;
                if tokens.len() < 3 {
                    return Err(syntax(head.line, head.column, "expected `parents <name> <parent> ...`"));
                }
                let child = lookup(&index, &tokens[1])?;
                if parents[child].is_some() {
                    return Err(syntax(tokens[1].line, tokens[1].column, "parents declared twice"));
                }
                if cpts[child].is_some() {
                    return Err(syntax(head.line, head.column, "parents must precede the cpt block"));
                }
                let ps = tokens[2..]
                    .iter()
                    .map(|t| lookup(&index, t).map(VertexId))
                    .collect::<Result<Vec<_>, _>>()?;
                parents[child] = Some(ps);
            }
            "cpt" => {
                if tokens.len() != 2 {
                    return Err(syntax(head.line, head.column, "expected `cpt <name>`"));
                }
                let v = lookup(&index, &tokens[1])?;
                if cpts[v].is_some() {
                    return Err(syntax(tokens[1].line, tokens[1].column, "cpt declared twice"));
                }
                let row_count = parents[v]
                    .iter()
                    .flatten()
                    .map(|p| variables[p.index()].arity())
                    .product();
                cpts[v] = Some(CptBlock {
                    line: head.line,
                    rows: Vec::new(),
                    row_count,
                });
                current = Some(v);
            }
            _ => {
                let v = current.ok_or_else(|| syntax(head.line, head.column, format!("unexpected `{}`", head.text)))?;
                let arity = variables[v].arity();
                if tokens.len() != arity {
                    return Err(syntax(
                        head.line,
                        head.column,
                        format!("expected {arity} probabilities, found {}", tokens.len()),
                    ));
                }
                let block = cpts[v].as_mut().expect("open block");
                if block.rows.len() == block.row_count * arity {
                    return Err(syntax(head.line, head.column, format!("too many rows for `{}`", variables[v].name())));
                }
                for t in tokens {
                    let p: f64 = t
                        .text
                        .parse()
                        .map_err(|_| syntax(t.line, t.column, format!("`{}` is not a number", t.text)))?;
                    block.rows.push(p);
                }
            }
        }
    }

    let mut tables = Vec::with_capacity(variables.len());
    for (v, block) in cpts.into_iter().enumerate() {
        let name = variables[v].name();
        let block = block.ok_or_else(|| syntax(lines.last().map_or(1, |l| l[0].line), 1, format!("no cpt for `{name}`")))?;
        if block.rows.len() != block.row_count * variables[v].arity() {
            return Err(syntax(
                block.line,
                1,
                format!(
                    "cpt `{name}` has {} rows, expected {}",
                    block.rows.len() / variables[v].arity(),
                    block.row_count
                ),
            ));
        }
        tables.push(block.rows);
    }
    let parents = parents.into_iter().map(Option::unwrap_or_default).collect();
    Ok(BayesianNetwork::new(name, variables, parents, tables)?)
}

fn push_prob(out: &mut String, p: f64) {
    write!(out, "{p:.16e}").expect("writing to a string");
}

pub fn serialize_network(bn: &BayesianNetwork) -> String {
    let mut out = format!("network {}\n", bn.name());
    for var in bn.variables() {
        writeln!(out, "variable {} {}", var.name(), var.states().join(" ")).unwrap();
    }
    for v in bn.dag().vertices() {
        let ps = bn.dag().parents(v);
        if !ps.is_empty() {
            let names: Vec<&str> = ps.iter().map(|p| bn.variable(*p).name()).collect();
            writeln!(out, "parents {} {}", bn.variable(v).name(), names.join(" ")).unwrap();
        }
    }
    for v in bn.dag().vertices() {
        writeln!(out, "cpt {}", bn.variable(v).name()).unwrap();
        let cpt = bn.cpt(v);
        for r in 0..cpt.row_count() {
            for (i, &p) in cpt.row(r).iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                push_prob(&mut out, p);
            }
            out.push('\n');
        }
    }
    out
}

/// Lines of `<variable> <state>`.
pub fn parse_evidence(bn: &BayesianNetwork, text: &str) -> Result<Evidence, FormatError> {
    let mut e = Evidence::empty();
    for tokens in tokenize(text) {
        if tokens.len() != 2 {
            return Err(syntax(tokens[0].line, tokens[0].column, "expected `<variable> <state>`"));
        }
        let (var, state) = (&tokens[0], &tokens[1]);
        let v = bn
            .vertex(var.text)
            .ok_or_else(|| syntax(var.line, var.column, format!("unknown variable `{}`", var.text)))?;
        let s = bn
            .variable(v)
            .state_index(state.text)
            .ok_or_else(|| syntax(state.line, state.column, format!("unknown state `{}`", state.text)))?;
        if e.contains(v) {
            return Err(syntax(var.line, var.column, format!("`{}` observed twice", var.text)));
        }
        e.insert(bn, v, s)?;
    }
    Ok(e)
}

pub fn serialize_evidence(bn: &BayesianNetwork, e: &Evidence) -> String {
    let mut out = String::new();
    for (v, s) in e.iter() {
        let var = bn.variable(v);
        writeln!(out, "{} {}", var.name(), var.states()[s]).unwrap();
    }
    out
}
