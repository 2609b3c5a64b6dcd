use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Digraph;

/// A simple path with its total weight. The weight is accumulated front to
/// back, which is also the order the DAG dynamic program sums in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    vertices: Vec<usize>,
    weight: f64,
}

impl Path {
    pub fn empty() -> Path {
        Path { vertices: Vec::new(), weight: 0.0 }
    }

    pub fn single(v: usize) -> Path {
        Path { vertices: vec![v], weight: 0.0 }
    }

    /// Validates `vertices` against `graph` and computes the weight.
    pub fn from_vertices(graph: &Digraph, vertices: Vec<usize>) -> Result<Path> {
        let mut seen = vec![false; graph.n()];
        let mut weight = 0.0;
        for (i, &v) in vertices.iter().enumerate() {
            if v >= graph.n() {
                return Err(Error::InvalidPath(format!("vertex {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPath(format!("vertex {v} repeats")));
            }
            if i > 0 {
                let u = vertices[i - 1];
                weight += graph
                    .weight(u, v)
                    .ok_or_else(|| Error::InvalidPath(format!("missing edge {u} -> {v}")))?;
            }
        }
        Ok(Path { vertices, weight })
    }

    /// Trusted constructor for callers that already hold the weight.
    pub(crate) fn from_parts(vertices: Vec<usize>, weight: f64) -> Path {
        Path { vertices, weight }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<usize> {
        self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn first(&self) -> Option<usize> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.vertices.last().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Checks that this is a simple path of `graph` whose cached weight
    /// matches the recomputed one within 1e-9 relative tolerance.
    pub fn validate(&self, graph: &Digraph) -> Result<()> {
        let fresh = Path::from_vertices(graph, self.vertices.clone())?;
        let tol = 1e-9 * fresh.weight.abs().max(1.0);
        if (fresh.weight - self.weight).abs() > tol {
            return Err(Error::InvalidPath(format!(
                "cached weight {} differs from recomputed {}",
                self.weight, fresh.weight
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list_str;

    #[test]
    fn builds_and_validates() {
        let g = parse_edge_list_str("0 1 1\n1 2 2.5\n2 0 1\n2 3 1").unwrap().graph;
        let p = Path::from_vertices(&g, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(p.weight(), 4.5);
        assert_eq!(p.to_string(), "0 1 2 3");
        p.validate(&g).unwrap();
        assert!(Path::from_vertices(&g, vec![0, 2]).is_err());
        assert!(Path::from_vertices(&g, vec![0, 1, 2, 0]).is_err());
        assert!(Path::from_parts(vec![0, 1], 3.0).validate(&g).is_err());
    }
}
