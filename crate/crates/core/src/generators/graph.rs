use crate::error::{Error, Result};

/// Undirected simple graph with a fixed vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Graph> {
        let mut g = Graph { vertices: Vec::new(), edges: Vec::new() };
        for v in vertices {
            g.add_vertex(v)?;
        }
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    fn add_vertex(&mut self, v: &str) -> Result<()> {
        if self.vertices.iter().any(|w| w == v) {
            return Err(Error::InvalidModel(format!("duplicate vertex `{v}`")));
        }
        if v == "tau" {
            return Err(Error::InvalidModel("`tau` is reserved for the internal action".into()));
        }
        self.vertices.push(v.to_string());
        Ok(())
    }

    fn index(&self, v: &str) -> Result<usize> {
        self.vertices.iter().position(|w| w == v).ok_or_else(|| Error::InvalidModel(format!("unknown vertex `{v}`")))
    }

    fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        if i == j {
            return Err(Error::InvalidModel(format!("self-loop on `{a}`")));
        }
        let e = (i.min(j), i.max(j));
        if !self.edges.contains(&e) {
            self.edges.push(e);
        }
        Ok(())
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    /// Size of a maximum clique by subset enumeration.
    pub fn max_clique_brute_force(&self) -> usize {
        let n = self.vertices.len();
        (0u32..1 << n)
            .filter(|mask| {
                let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                members.iter().enumerate().all(|(k, &i)| members[k + 1..].iter().all(|&j| self.adjacent(i, j)))
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Parses `vertices a b c` and `edge a b` lines; `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut g = Graph { vertices: Vec::new(), edges: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let wrap = |e: Error| match e {
            Error::InvalidModel(m) => Error::Parse { line, message: m },
            other => other,
        };
        match toks.as_slice() {
            ["vertices", vs @ ..] => {
                for v in vs {
                    g.add_vertex(v).map_err(wrap)?;
                }
            }
            ["edge", a, b] => g.add_edge(a, b).map_err(wrap)?,
            _ => return Err(Error::Parse { line, message: format!("expected `vertices ...` or `edge <u> <v>`, found `{content}`") }),
        }
    }
    if g.vertices.is_empty() {
        return Err(Error::Parse { line: 1, message: "graph has no vertices".into() });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_figure_graph() {
        let g = parse_graph("vertices a b c d\nedge a b\nedge a c\nedge a d\nedge b c\n").unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(3), 1);
        assert_eq!(g.max_clique_brute_force(), 3);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(parse_graph("vertices a b\nedge a a\n").is_err());
        assert!(matches!(parse_graph("vertices a\nedge a z\n"), Err(Error::Parse { line: 2, .. })));
    }
}
