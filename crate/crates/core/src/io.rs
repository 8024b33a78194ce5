//! Reading and writing graphs: whitespace edge lists and a GML subset.
//!
//! Edge lists hold one `u v` pair of 0-based node indices per line; `#`
//! starts a comment. A `# nodes N` comment declares the node count so that
//! trailing isolated nodes survive a round trip; without it the count is
//! one more than the largest index seen.
//!
//! The GML reader understands `graph [ directed D node [ id I label "S"
//! value V ] edge [ source I target J ] ]`. Other keys, including nested
//! lists, are skipped. Arcs are symmetrized, self loops dropped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::graph::{symmetrize_directed, Graph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Gml,
}

impl GraphFormat {
    /// `.gml` files are GML; everything else is read as an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("gml") => GraphFormat::Gml,
            _ => GraphFormat::EdgeList,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("edge references undeclared node id {id}")]
    DanglingEdge { id: i64 },
    #[error("duplicate node id {id}")]
    DuplicateNode { id: i64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph plus the per-node ground truth found in the file, if any.
///
/// `labels[i]` is `None` for nodes the file leaves unlabeled; such nodes are
/// excluded from evaluation. Integer label values are kept as is; any other
/// values are numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub labels: Option<Vec<Option<usize>>>,
}

pub fn load_graph(path: &Path, format: GraphFormat) -> Result<LoadedGraph, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        GraphFormat::EdgeList => Ok(LoadedGraph {
            graph: parse_edgelist(&text)?,
            labels: None,
        }),
        GraphFormat::Gml => parse_gml(&text),
    }
}

pub fn parse_edgelist(text: &str) -> Result<Graph, IoError> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let (content, comment) = match line.find('#') {
            Some(pos) => (&line[..pos], Some(&line[pos + 1..])),
            None => (line, None),
        };
        if let Some(comment) = comment {
            let mut words = comment.split_whitespace();
            if let (Some("nodes"), Some(count)) = (words.next(), words.next()) {
                declared = Some(count.parse::<usize>().map_err(|_| IoError::Parse {
                    line: lineno + 1,
                    column: line.find(count).unwrap_or(0) + 1,
                    message: format!("bad node count {count:?}"),
                })?);
            }
        }
        let mut fields = Vec::with_capacity(2);
        for (offset, word) in split_with_offsets(content) {
            let value = word.parse::<usize>().map_err(|_| IoError::Parse {
                line: lineno + 1,
                column: offset + 1,
                message: format!("expected a node index, found {word:?}"),
            })?;
            fields.push(value);
        }
        match fields.as_slice() {
            [] => {}
            &[u, v] => edges.push((u, v)),
            _ => {
                return Err(IoError::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: format!("expected two node indices, found {}", fields.len()),
                })
            }
        }
    }
    let n = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Ok(Graph::new(n, edges)?)
}

fn split_with_offsets(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.split_whitespace()
        .map(move |w| (w.as_ptr() as usize - s.as_ptr() as usize, w))
}

pub fn write_edgelist(g: &Graph) -> String {
    let mut out = format!("# nodes {}\n", g.n());
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// GML with node ids `0..n`; names become `label` and ground truth `value`.
pub fn write_gml(g: &Graph, labels: Option<&[Option<usize>]>) -> String {
    let mut out = String::from("graph\n[\n");
    for i in 0..g.n() {
        write!(out, "  node\n  [\n    id {i}\n").unwrap();
        if let Some(name) = g.node_name(i) {
            writeln!(out, "    label \"{name}\"").unwrap();
        }
        if let Some(Some(l)) = labels.map(|ls| ls[i]) {
            writeln!(out, "    value {l}").unwrap();
        }
        out.push_str("  ]\n");
    }
    for &(u, v) in g.edges() {
        write!(out, "  edge\n  [\n    source {u}\n    target {v}\n  ]\n").unwrap();
    }
    out.push_str("]\n");
    out
}

/// Reads a `name<TAB>label` (or `index label`) ground-truth file against a
/// graph. Names are matched against the graph's node names when it has them,
/// otherwise the first column is a node index. Labels are numbered in order
/// of first appearance unless they are all integers.
pub fn parse_labels(text: &str, g: &Graph) -> Result<Vec<Option<usize>>, IoError> {
    let mut raw: Vec<Option<String>> = vec![None; g.n()];
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |message: String| IoError::Parse {
            line: lineno + 1,
            column: 1,
            message,
        };
        let (key, value) = content
            .split_once('\t')
            .or_else(|| content.rsplit_once(char::is_whitespace))
            .ok_or_else(|| parse_err("expected `node label`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let node = match g.node_names() {
            Some(names) => names.iter().position(|s| s == key),
            None => key.parse::<usize>().ok().filter(|&i| i < g.n()),
        }
        .ok_or_else(|| parse_err(format!("unknown node {key:?}")))?;
        raw[node] = Some(value.to_string());
    }
    Ok(number_labels(&raw))
}

fn number_labels(raw: &[Option<String>]) -> Vec<Option<usize>> {
    let all_integers = raw.iter().flatten().all(|v| v.parse::<usize>().is_ok());
    if all_integers {
        return raw.iter().map(|v| v.as_ref().map(|s| s.parse().unwrap())).collect();
    }
    let mut seen: Vec<&str> = Vec::new();
    raw.iter()
        .map(|v| {
            v.as_deref().map(|s| match seen.iter().position(|x| *x == s) {
                Some(p) => p,
                None => {
                    seen.push(s);
                    seen.len() - 1
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Key(String),
    Str(String),
    Num(String),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> IoError {
        IoError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Next token with the position where it starts.
    fn next_token(&mut self) -> Result<Option<(Token, usize, usize)>, IoError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, column) = (self.line, self.column);
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let token = match c {
            '[' => {
                self.bump();
                Token::Open
            }
            ']' => {
                self.bump();
                Token::Close
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(self.error(line, column, "unterminated string")),
                    }
                }
                Token::Str(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        s.push(ch);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Token::Key(s)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if ch.is_ascii_digit() || matches!(ch, '-' | '+' | '.' | 'e' | 'E') {
                        s.push(ch);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Token::Num(s)
            }
            other => return Err(self.error(line, column, format!("unexpected character {other:?}"))),
        };
        Ok(Some((token, line, column)))
    }
}

#[derive(Debug, Clone)]
enum Value {
    Scalar(String),
    List(Vec<(String, Value)>),
}

fn parse_list(lexer: &mut Lexer, nested: bool) -> Result<Vec<(String, Value)>, IoError> {
    let mut items = Vec::new();
    loop {
        let Some((token, line, column)) = lexer.next_token()? else {
            if nested {
                return Err(lexer.error(lexer.line, lexer.column, "unexpected end of file, expected `]`"));
            }
            return Ok(items);
        };
        let key = match token {
            Token::Key(k) => k,
            Token::Close if nested => return Ok(items),
            other => return Err(lexer.error(line, column, format!("expected a key, found {other:?}"))),
        };
        let value = match lexer.next_token()? {
            Some((Token::Open, _, _)) => Value::List(parse_list(lexer, true)?),
            Some((Token::Str(s) | Token::Num(s), _, _)) => Value::Scalar(s),
            Some((other, l, c)) => return Err(lexer.error(l, c, format!("expected a value for {key:?}, found {other:?}"))),
            None => return Err(lexer.error(lexer.line, lexer.column, format!("missing value for {key:?}"))),
        };
        items.push((key, value));
    }
}

fn scalar<'v>(items: &'v [(String, Value)], key: &str) -> Option<&'v str> {
    items.iter().find_map(|(k, v)| match v {
        Value::Scalar(s) if k == key => Some(s.as_str()),
        _ => None,
    })
}

fn parse_id(s: &str) -> Result<i64, IoError> {
    s.parse::<i64>()
        .or_else(|_| s.parse::<f64>().map(|x| x as i64))
        .map_err(|_| IoError::Parse {
            line: 0,
            column: 0,
            message: format!("node id {s:?} is not a number"),
        })
}

pub fn parse_gml(text: &str) -> Result<LoadedGraph, IoError> {
    let mut lexer = Lexer::new(text);
    let top = parse_list(&mut lexer, false)?;
    let body = top
        .iter()
        .find_map(|(k, v)| match v {
            Value::List(items) if k == "graph" => Some(items),
            _ => None,
        })
        .ok_or_else(|| IoError::Parse {
            line: 1,
            column: 1,
            message: "no `graph [ ... ]` block".into(),
        })?;

    let mut ids: Vec<i64> = Vec::new();
    let mut names = Vec::new();
    let mut raw_labels = Vec::new();
    let mut edges = Vec::new();
    for (key, value) in body {
        let Value::List(items) = value else { continue };
        match key.as_str() {
            "node" => {
                let id = scalar(items, "id").ok_or_else(|| IoError::Parse {
                    line: 0,
                    column: 0,
                    message: format!("node #{} has no id", ids.len()),
                })?;
                ids.push(parse_id(id)?);
                names.push(scalar(items, "label").map(str::to_string));
                raw_labels.push(scalar(items, "value").map(str::to_string));
            }
            "edge" => {
                let endpoint = |k: &str| {
                    scalar(items, k).map(parse_id).transpose()?.ok_or_else(|| IoError::Parse {
                        line: 0,
                        column: 0,
                        message: format!("edge without {k}"),
                    })
                };
                edges.push((endpoint("source")?, endpoint("target")?));
            }
            _ => {}
        }
    }

    let mut by_id: Vec<(i64, usize)> = ids.iter().copied().zip(0..).collect();
    by_id.sort_unstable();
    if let Some(w) = by_id.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(IoError::DuplicateNode { id: w[0].0 });
    }
    let index_of = |id: i64| {
        by_id
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|p| by_id[p].1)
            .map_err(|_| IoError::DanglingEdge { id })
    };
    let pairs = edges
        .iter()
        .map(|&(s, t)| Ok((index_of(s)?, index_of(t)?)))
        .collect::<Result<Vec<_>, IoError>>()?;

    let n = ids.len();
    // The `directed` flag needs no branch: undirected files in the wild still
    // carry self loops and repeated edges, so every file is symmetrized.
    let mut graph = symmetrize_directed(n, &pairs)?;
    if names.iter().all(Option::is_some) && n > 0 {
        graph = graph.with_node_names(names.into_iter().map(Option::unwrap).collect())?;
    }
    let labels = raw_labels
        .iter()
        .any(Option::is_some)
        .then(|| number_labels(&raw_labels));
    Ok(LoadedGraph { graph, labels })
}
