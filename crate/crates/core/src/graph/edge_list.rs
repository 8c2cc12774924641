//! Plain-text edge lists: a node count on the first line, then one `i j`
//! pair per line. `#` starts a comment that runs to the end of the line.

use std::fmt::Write as _;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a non-negative integer, found `{s}`"),
            })
        };
        match (n, fields.as_slice()) {
            (None, [count]) => n = Some(parse(count)?),
            (None, _) => {
                return Err(Error::Parse {
                    line,
                    message: "first line must hold the node count".into(),
                })
            }
            (Some(n), [a, b]) => {
                let (i, j) = (parse(a)?, parse(b)?);
                if i >= n || j >= n {
                    return Err(Error::Parse {
                        line,
                        message: format!("node out of range in edge ({i}, {j}); n = {n}"),
                    });
                }
                if i == j {
                    return Err(Error::Parse {
                        line,
                        message: format!("self-loop at node {i}"),
                    });
                }
                edges.push(((i, j), line));
            }
            (Some(_), _) => {
                return Err(Error::Parse {
                    line,
                    message: "expected an edge `i j`".into(),
                })
            }
        }
    }

    let n = n.ok_or(Error::Parse {
        line: 0,
        message: "empty edge list".into(),
    })?;
    let mut g = Graph::empty(n);
    for ((i, j), line) in edges {
        if g.has_edge(i, j) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate edge ({i}, {j})"),
            });
        }
        g.set_edge(i, j);
    }
    Ok(g)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{}\n", g.node_count());
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}
