//! Generalized workflow nets.

mod smd;
mod soundness;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::marking::Marking;
use crate::net::{Node, PetriNet};

pub use smd::{
    find_sequential_cover, is_sequential_component, is_smd, sequential_component_through,
    SequentialComponent,
};
pub use soundness::{check_soundness, SoundnessClause, SoundnessReport, Verdict, Violation, Witness};

/// Which requirement of the workflow-net definition a node violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum GwfClause {
    /// Initial marking nonempty, set-valued, with empty preset.
    Initial,
    /// Final marking nonempty, set-valued, with empty postset.
    Final,
    /// Every node lies on a path from the initial to the final marking.
    Connected,
}

impl fmt::Display for GwfClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GwfClause::Initial => "1 (initial marking)",
            GwfClause::Final => "2 (final marking)",
            GwfClause::Connected => "3 (connectedness)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GwfViolation {
    pub clause: GwfClause,
    pub nodes: Vec<String>,
    pub reason: String,
}

impl fmt::Display for GwfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}: {} [{}]", self.clause, self.reason, self.nodes.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("not a generalized workflow net: {}", fmt_violations(.0))]
    StructuralViolation(Vec<GwfViolation>),
}

fn fmt_violations(v: &[GwfViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A net with initial marking `m0` and final marking `mf`, both sets of
/// places, such that `•m0 = ∅`, `mf• = ∅` and every node sits on a path
/// from `m0` to `mf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwfNet {
    net: PetriNet,
    final_marking: Marking,
}

impl GwfNet {
    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn initial(&self) -> &Marking {
        self.net.initial()
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn into_parts(self) -> (PetriNet, Marking) {
        (self.net, self.final_marking)
    }
}

/// Validates the workflow-net requirements, listing every violation.
pub fn check_gwf(net: PetriNet, final_marking: Marking) -> Result<GwfNet, WorkflowError> {
    let violations = gwf_violations(&net, &final_marking);
    if violations.is_empty() {
        Ok(GwfNet { net, final_marking })
    } else {
        Err(WorkflowError::StructuralViolation(violations))
    }
}

pub fn gwf_violations(net: &PetriNet, final_marking: &Marking) -> Vec<GwfViolation> {
    let mut out = Vec::new();
    let m0 = net.initial();
    if m0.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Initial,
            nodes: vec![],
            reason: "initial marking is empty".into(),
        });
    }
    let multi: Vec<String> = m0.iter().filter(|(_, n)| *n > 1).map(|(p, _)| p.to_string()).collect();
    if !multi.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Initial,
            nodes: multi,
            reason: "initial marking is not a set".into(),
        });
    }
    let fed: Vec<String> = m0
        .support()
        .filter(|p| net.preset(p).map(|s| !s.is_empty()).unwrap_or(false))
        .map(str::to_string)
        .collect();
    if !fed.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Initial,
            nodes: fed,
            reason: "initial places have a nonempty preset".into(),
        });
    }

    if final_marking.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Final,
            nodes: vec![],
            reason: "final marking is empty".into(),
        });
    }
    let unknown: Vec<String> = final_marking
        .support()
        .filter(|p| !net.is_place(p))
        .map(str::to_string)
        .collect();
    if !unknown.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Final,
            nodes: unknown,
            reason: "final marking names unknown places".into(),
        });
    }
    let multi: Vec<String> = final_marking
        .iter()
        .filter(|(_, n)| *n > 1)
        .map(|(p, _)| p.to_string())
        .collect();
    if !multi.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Final,
            nodes: multi,
            reason: "final marking is not a set".into(),
        });
    }
    let draining: Vec<String> = final_marking
        .support()
        .filter(|p| net.postset(p).map(|s| !s.is_empty()).unwrap_or(false))
        .map(str::to_string)
        .collect();
    if !draining.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Final,
            nodes: draining,
            reason: "final places have a nonempty postset".into(),
        });
    }

    let from_start = closure(net, m0.support().filter_map(|p| net.node(p)), true);
    let to_end = closure(net, final_marking.support().filter_map(|p| net.node(p)), false);
    let unreachable: Vec<String> = net
        .node_names()
        .filter(|x| !from_start.contains(&net.node(x).unwrap()))
        .map(str::to_string)
        .collect();
    if !unreachable.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Connected,
            nodes: unreachable,
            reason: "not reachable from an initial place".into(),
        });
    }
    let stuck: Vec<String> = net
        .node_names()
        .filter(|x| !to_end.contains(&net.node(x).unwrap()))
        .map(str::to_string)
        .collect();
    if !stuck.is_empty() {
        out.push(GwfViolation {
            clause: GwfClause::Connected,
            nodes: stuck,
            reason: "no path to a final place".into(),
        });
    }
    out
}

fn closure(net: &PetriNet, start: impl Iterator<Item = Node>, forward: bool) -> BTreeSet<Node> {
    let mut seen: BTreeSet<Node> = start.collect();
    let mut queue: VecDeque<Node> = seen.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        let next = if forward { net.post_nodes(x) } else { net.pre_nodes(x) };
        for y in next {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}
