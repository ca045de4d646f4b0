//! Explicit-state reachability with cover-based unboundedness detection.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::marking::Marking;
use crate::net::PetriNet;

pub const DEFAULT_CAP: u32 = 8;
pub const DEFAULT_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("exploration incomplete (state limit or token cap reached)")]
    IncompleteExploration,
}

/// Bounds on an exploration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Largest token count tolerated in any place.
    pub cap: u32,
    /// Largest number of stored markings.
    pub limit: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            limit: DEFAULT_LIMIT,
        }
    }
}

/// Evidence that a net is unbounded: `larger` strictly covers `smaller`
/// and is reached from it by firing `pump`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnboundedWitness {
    pub smaller: Marking,
    pub larger: Marking,
    /// Firing sequence from the initial marking to `larger`.
    pub path: Vec<String>,
    /// Suffix of `path` leading from `smaller` to `larger`.
    pub pump: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub transition: usize,
    pub to: usize,
}

/// Markings reachable from the initial one, in breadth-first discovery order.
/// Vertex 0 is the root.
#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    places: Vec<String>,
    transitions: Vec<String>,
    states: Vec<Box<[u32]>>,
    index: HashMap<Box<[u32]>, usize>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    parent: Vec<Option<(usize, usize)>>,
    expanded: Vec<bool>,
    truncated: bool,
    unbounded: Option<UnboundedWitness>,
}

/// Breadth-first closure of the initial marking under the firing rule.
///
/// A newly produced marking that strictly covers a marking on its own
/// discovery path is recorded as an unbounded witness and not expanded.
/// Markings over `cap` and markings beyond `limit` are dropped and the graph
/// is flagged truncated.
pub fn explore(net: &PetriNet, opts: ExploreOptions) -> ReachabilityGraph {
    let root: Box<[u32]> = net.initial_state().into_boxed_slice();
    let mut g = ReachabilityGraph {
        places: net.places().to_vec(),
        transitions: net.transitions().to_vec(),
        states: vec![root.clone()],
        index: HashMap::from([(root, 0)]),
        edges: Vec::new(),
        out: vec![Vec::new()],
        parent: vec![None],
        expanded: vec![false],
        truncated: false,
        unbounded: None,
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        g.expanded[i] = true;
        for t in 0..net.transitions().len() {
            if !net.enabled_in(&g.states[i], t) {
                continue;
            }
            let next = net.fire_in(&g.states[i], t).into_boxed_slice();
            if let Some(&j) = g.index.get(&next) {
                g.push_edge(i, t, j);
                continue;
            }
            let covered = g.path_vertices(i).into_iter().find(|&a| strictly_covers(&next, &g.states[a]));
            if let Some(anc) = covered {
                let j = g.push_vertex(next, i, t);
                if g.unbounded.is_none() {
                    let path = g.path_to(j);
                    let depth_anc = g.path_to(anc).len();
                    g.unbounded = Some(UnboundedWitness {
                        smaller: g.marking(anc),
                        larger: g.marking(j),
                        pump: path[depth_anc..].to_vec(),
                        path,
                    });
                }
                continue;
            }
            if next.iter().any(|&n| n > opts.cap) || g.states.len() >= opts.limit {
                g.truncated = true;
                continue;
            }
            let j = g.push_vertex(next, i, t);
            queue.push_back(j);
        }
    }
    g
}

fn strictly_covers(big: &[u32], small: &[u32]) -> bool {
    big.iter().zip(small).all(|(b, s)| b >= s) && big != small
}

impl ReachabilityGraph {
    fn push_vertex(&mut self, state: Box<[u32]>, from: usize, t: usize) -> usize {
        let j = self.states.len();
        self.index.insert(state.clone(), j);
        self.states.push(state);
        self.out.push(Vec::new());
        self.parent.push(Some((from, t)));
        self.expanded.push(false);
        self.push_edge(from, t, j);
        j
    }

    fn push_edge(&mut self, from: usize, transition: usize, to: usize) {
        self.out[from].push(self.edges.len());
        self.edges.push(Edge {
            from,
            transition,
            to,
        });
    }

    /// Vertices on the discovery path from the root to `i`, inclusive.
    fn path_vertices(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while let Some((p, _)) = self.parent[i] {
            out.push(p);
            i = p;
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = &Edge> {
        self.out[i].iter().map(move |&e| &self.edges[e])
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn marking(&self, i: usize) -> Marking {
        self.states[i]
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(p, &n)| (self.places[p].clone(), n))
            .collect()
    }

    pub fn markings(&self) -> impl Iterator<Item = Marking> + '_ {
        (0..self.states.len()).map(|i| self.marking(i))
    }

    pub fn transition_name(&self, t: usize) -> &str {
        &self.transitions[t]
    }

    pub fn find(&self, m: &Marking) -> Option<usize> {
        let mut s = vec![0u32; self.places.len()];
        for (p, n) in m.iter() {
            let i = self.places.binary_search_by(|q| q.as_str().cmp(p)).ok()?;
            s[i] = n;
        }
        self.index.get(s.as_slice()).copied()
    }

    /// Firing sequence from the root to vertex `i` along the discovery tree.
    pub fn path_to(&self, mut i: usize) -> Vec<String> {
        let mut seq = Vec::new();
        while let Some((p, t)) = self.parent[i] {
            seq.push(self.transitions[t].clone());
            i = p;
        }
        seq.reverse();
        seq
    }

    /// Whether every successor of vertex `i` has been generated.
    pub fn is_expanded(&self, i: usize) -> bool {
        self.expanded[i]
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn unbounded_witness(&self) -> Option<&UnboundedWitness> {
        self.unbounded.as_ref()
    }

    /// Not truncated and no unboundedness witness: the vertex set is exactly
    /// the reachable set.
    pub fn is_complete(&self) -> bool {
        !self.truncated && self.unbounded.is_none()
    }

    /// Largest token count seen in any place of any vertex.
    pub fn max_tokens(&self) -> u32 {
        self.states
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Graph-description text with one node per marking.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph reachability {\n");
        for i in 0..self.states.len() {
            let shape = if i == 0 { ", shape=doublecircle" } else { "" };
            s.push_str(&format!("  m{i} [label=\"{}\"{shape}];\n", self.marking(i)));
        }
        for e in &self.edges {
            s.push_str(&format!(
                "  m{} -> m{} [label=\"{}\"];\n",
                e.from, e.to, self.transitions[e.transition]
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Every reachable marking has at most one token per place.
pub fn is_safe(rg: &ReachabilityGraph) -> Result<bool, ReachError> {
    if !rg.is_complete() {
        return Err(ReachError::IncompleteExploration);
    }
    Ok(rg.max_tokens() <= 1)
}
