use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::GwfNet;
use crate::marking::Marking;
use crate::reach::{explore, ExploreOptions, ReachError, ReachabilityGraph, UnboundedWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Sound,
    Unsound,
}

/// The three soundness requirements, in checking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SoundnessClause {
    /// The final marking is reachable from every reachable marking.
    ProperTermination,
    /// No reachable marking strictly contains the final marking.
    CleanTermination,
    /// Every transition is enabled at some reachable marking.
    NoDeadTransitions,
}

impl SoundnessClause {
    pub fn number(self) -> u8 {
        match self {
            SoundnessClause::ProperTermination => 1,
            SoundnessClause::CleanTermination => 2,
            SoundnessClause::NoDeadTransitions => 3,
        }
    }
}

impl fmt::Display for SoundnessClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SoundnessClause::ProperTermination => "proper termination",
            SoundnessClause::CleanTermination => "clean termination",
            SoundnessClause::NoDeadTransitions => "no dead transitions",
        };
        write!(f, "{} ({name})", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// A firing sequence from the initial marking and the marking it reaches.
    Run { sequence: Vec<String>, marking: Marking },
    Unbounded(UnboundedWitness),
    DeadTransitions(Vec<String>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Run { sequence, marking } => {
                writeln!(f, "fire {}", sequence.join(" "))?;
                write!(f, "marking {marking}")
            }
            Witness::Unbounded(w) => {
                writeln!(f, "fire {}", w.path.join(" "))?;
                writeln!(f, "marking {}", w.larger)?;
                write!(f, "covers {} via {}", w.smaller, w.pump.join(" "))
            }
            Witness::DeadTransitions(ts) => write!(f, "dead {}", ts.join(" ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: SoundnessClause,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub verdict: Verdict,
    /// Violated clauses in checking order; empty iff sound.
    pub violations: Vec<Violation>,
    pub states: usize,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.verdict == Verdict::Sound
    }

    pub fn violated_clause(&self) -> Option<SoundnessClause> {
        self.violations.first().map(|v| v.clause)
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.violations.first().map(|v| &v.witness)
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            Verdict::Sound => write!(f, "sound ({} reachable markings)", self.states),
            Verdict::Unsound => {
                write!(f, "unsound")?;
                for v in &self.violations {
                    write!(f, "\nviolated clause {}\n{}", v.clause, v.witness)?;
                }
                Ok(())
            }
        }
    }
}

/// Decides soundness on the explicit reachability graph.
///
/// Proper termination is checked by a backward closure from the final-marking
/// vertex. An unboundedness witness settles the verdict as unsound. A
/// truncated exploration still yields a verdict when the explored part
/// already shows a dead non-final marking or a marking strictly above the
/// final one; otherwise it is reported as incomplete.
pub fn check_soundness(g: &GwfNet, opts: ExploreOptions) -> Result<SoundnessReport, ReachError> {
    let rg = explore(g.net(), opts);
    let mf = g.final_marking();
    let mut violations = Vec::new();

    if let Some(w) = rg.unbounded_witness() {
        violations.push(Violation {
            clause: SoundnessClause::ProperTermination,
            witness: Witness::Unbounded(w.clone()),
        });
        return Ok(unsound(violations, &rg));
    }

    if rg.is_truncated() {
        if let Some(i) = (0..rg.vertex_count()).find(|&i| is_dead(g, &rg, i) && rg.marking(i) != *mf) {
            violations.push(run_violation(SoundnessClause::ProperTermination, &rg, rg.path_to(i), i));
        }
        if let Some(v) = clean_termination(&rg, mf) {
            violations.push(v);
        }
        return if violations.is_empty() {
            Err(ReachError::IncompleteExploration)
        } else {
            Ok(unsound(violations, &rg))
        };
    }

    // Backward closure from the final vertex.
    let n = rg.vertex_count();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in rg.edges() {
        rev[e.to].push(e.from);
    }
    let mut good = vec![false; n];
    let mut queue = VecDeque::new();
    if let Some(f) = rg.find(mf) {
        good[f] = true;
        queue.push_back(f);
    }
    while let Some(i) = queue.pop_front() {
        for &j in &rev[i] {
            if !good[j] {
                good[j] = true;
                queue.push_back(j);
            }
        }
    }
    if let Some(bad) = (0..n).find(|&i| !good[i]) {
        let (seq, end) = extend_to_dead(g, &rg, bad);
        violations.push(run_violation(SoundnessClause::ProperTermination, &rg, seq, end));
    }
    if let Some(v) = clean_termination(&rg, mf) {
        violations.push(v);
    }
    let mut fired = vec![false; g.net().transitions().len()];
    for e in rg.edges() {
        fired[e.transition] = true;
    }
    let dead: Vec<String> = g
        .net()
        .transitions()
        .iter()
        .zip(&fired)
        .filter(|(_, &f)| !f)
        .map(|(t, _)| t.clone())
        .collect();
    if !dead.is_empty() {
        violations.push(Violation {
            clause: SoundnessClause::NoDeadTransitions,
            witness: Witness::DeadTransitions(dead),
        });
    }
    if violations.is_empty() {
        Ok(SoundnessReport {
            verdict: Verdict::Sound,
            violations,
            states: n,
        })
    } else {
        Ok(unsound(violations, &rg))
    }
}

fn unsound(violations: Vec<Violation>, rg: &ReachabilityGraph) -> SoundnessReport {
    SoundnessReport {
        verdict: Verdict::Unsound,
        violations,
        states: rg.vertex_count(),
    }
}

fn run_violation(
    clause: SoundnessClause,
    rg: &ReachabilityGraph,
    sequence: Vec<String>,
    end: usize,
) -> Violation {
    Violation {
        clause,
        witness: Witness::Run {
            sequence,
            marking: rg.marking(end),
        },
    }
}

fn clean_termination(rg: &ReachabilityGraph, mf: &Marking) -> Option<Violation> {
    (0..rg.vertex_count())
        .find(|&i| rg.marking(i).strictly_covers(mf))
        .map(|i| run_violation(SoundnessClause::CleanTermination, rg, rg.path_to(i), i))
}

fn is_dead(g: &GwfNet, rg: &ReachabilityGraph, i: usize) -> bool {
    let s = rg.state(i);
    (0..g.net().transitions().len()).all(|t| !g.net().enabled_in(s, t))
}

/// From a vertex that cannot reach the final marking, walks forward to the
/// nearest dead marking when one exists, so the witness ends in a terminal
/// state. Returns the full sequence from the root and the end vertex.
fn extend_to_dead(g: &GwfNet, rg: &ReachabilityGraph, bad: usize) -> (Vec<String>, usize) {
    let n = rg.vertex_count();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[bad] = true;
    let mut queue = VecDeque::from([bad]);
    let mut end = bad;
    while let Some(i) = queue.pop_front() {
        if is_dead(g, rg, i) {
            end = i;
            break;
        }
        for e in rg.successors(i) {
            if !seen[e.to] {
                seen[e.to] = true;
                prev[e.to] = Some((i, e.transition));
                queue.push_back(e.to);
            }
        }
    }
    let mut tail = Vec::new();
    let mut cur = end;
    while let Some((p, t)) = prev[cur] {
        tail.push(rg.transition_name(t).to_string());
        cur = p;
    }
    tail.reverse();
    let mut seq = rg.path_to(bad);
    seq.extend(tail);
    (seq, end)
}
