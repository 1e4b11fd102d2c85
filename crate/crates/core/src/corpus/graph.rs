use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
}

/// Undirected, loop-free friendship/interaction graph keyed by participant id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: &str) {
        if !self.adjacency.contains_key(id) {
            self.adjacency.insert(id.to_string(), BTreeSet::new());
        }
    }

    /// Adds the edge `{u, v}`. Returns `false` when it was already present.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.to_string()));
        }
        self.add_vertex(u);
        self.add_vertex(v);
        let fresh = self
            .adjacency
            .get_mut(u)
            .expect("vertex just added")
            .insert(v.to_string());
        self.adjacency
            .get_mut(v)
            .expect("vertex just added")
            .insert(u.to_string());
        Ok(fresh)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.adjacency.contains_key(id)
    }

    pub fn linked(&self, u: &str, v: &str) -> bool {
        self.adjacency.get(u).is_some_and(|n| n.contains(v))
    }

    pub fn neighbors(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.adjacency.get(id)
    }

    pub fn degree(&self, id: &str) -> usize {
        self.adjacency.get(id).map_or(0, BTreeSet::len)
    }

    /// Size of the intersection of the two neighbourhoods.
    pub fn common_neighbors(&self, u: &str, v: &str) -> usize {
        match (self.adjacency.get(u), self.adjacency.get(v)) {
            (Some(a), Some(b)) => {
                let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                small.iter().filter(|x| large.contains(*x)).count()
            }
            _ => 0,
        }
    }

    /// Number of edges among the given vertices (each pair counted once).
    pub fn edges_among(&self, ids: &[&str]) -> usize {
        let mut count = 0;
        for (i, u) in ids.iter().enumerate() {
            for v in &ids[i + 1..] {
                if self.linked(u, v) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    /// Every edge once as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.adjacency.iter().flat_map(|(u, ns)| {
            ns.iter()
                .filter(move |v| u.as_str() < v.as_str())
                .map(move |v| (u.as_str(), v.as_str()))
        })
    }
}
