use std::collections::{BTreeSet, HashMap};

use super::GameError;

/// Simple undirected graph with labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GameError> {
        super::check_unique("vertices", &vertices)?;
        let n = vertices.len();
        let mut sets = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GameError::InvalidGraph(format!(
                    "edge ({u}, {v}) references a missing vertex"
                )));
            }
            if u == v {
                return Err(GameError::InvalidGraph(format!("loop at vertex {:?}", vertices[u])));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        Ok(Self {
            vertices,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn from_labeled_edges(vertices: Vec<String>, edges: &[(String, String)]) -> Result<Self, GameError> {
        let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut idx = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            let lookup = |x: &String| {
                index
                    .get(x.as_str())
                    .copied()
                    .ok_or_else(|| GameError::UnknownLabel(x.clone()))
            };
            idx.push((lookup(u)?, lookup(v)?));
        }
        Self::new(vertices, &idx)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Ordered pairs `(s, t)` with `s = t` or `s ~ t`.
    pub fn promise_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count())
            .flat_map(move |s| std::iter::once((s, s)).chain(self.adjacency[s].iter().map(move |&t| (s, t))))
    }

    pub fn is_proper_coloring(&self, colors: &[usize]) -> Result<(), (usize, usize)> {
        match self.edges().find(|&(u, v)| colors[u] == colors[v]) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn complete_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::new(numbered(n), &edges).expect("valid complete graph")
}

pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
    Graph::new(numbered(n), &edges).expect("valid cycle")
}

/// Bit string of vertex `v` in `H_n`; character `i` is bit `i`.
pub fn bit_label(v: usize, n: usize) -> String {
    (0..n).map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Hadamard graph `H_n`: `n`-bit strings, adjacent at Hamming distance `n/2`.
///
/// Vertex `v` carries the string whose `i`-th character is bit `i` of `v`.
pub fn hadamard_graph(n: usize) -> Result<Graph, GameError> {
    if n == 0 || n % 2 == 1 {
        return Err(GameError::OddN(n));
    }
    if n > 20 {
        return Err(GameError::InvalidGraph(format!(
            "H_{n} has too many vertices to materialize"
        )));
    }
    let count = 1usize << n;
    let labels = (0..count).map(|v| bit_label(v, n)).collect();
    let mut adjacency = vec![Vec::new(); count];
    for (u, nb) in adjacency.iter_mut().enumerate() {
        for v in 0..count {
            if (u ^ v).count_ones() as usize == n / 2 {
                nb.push(v);
            }
        }
    }
    Ok(Graph {
        vertices: labels,
        adjacency,
    })
}
