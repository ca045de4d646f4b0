//! Branching processes and unfoldings of safe nets.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::net::{NetError, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub id: String,
    pub place: String,
    /// Index of the producing event; `None` for minimal conditions.
    pub pre: Option<usize>,
    /// Indices of the consuming events.
    pub post: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub id: String,
    pub transition: String,
    pub preset: Vec<usize>,
    pub postset: Vec<usize>,
}

/// An occurrence net given by conditions and events, with the folding map
/// stored on each node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchingProcess {
    pub conditions: Vec<Condition>,
    pub events: Vec<Event>,
    pub min: Vec<usize>,
    /// Construction stopped at the event bound with extensions remaining.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("net is not safe: place {0} can hold two tokens")]
    UnsafeNet(String),
    #[error("map has no image for {0}")]
    MapMismatch(String),
}

/// Candidate extension: presets are condition indices sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    size: usize,
    transition: usize,
    preset: Vec<usize>,
}

/// Possible-extensions construction.
///
/// Each round adds the smallest candidate by (local configuration size,
/// transition name, preset ids), so ids are deterministic. Candidates with
/// the preset and transition of an existing event are never added. Acyclic
/// nets are unfolded completely whatever `depth` is; otherwise at most
/// `depth` events are created and the result is marked partial if more
/// were possible.
pub fn unfold(net: &PetriNet, depth: usize) -> Result<BranchingProcess, UnfoldError> {
    let bounded = !net.is_acyclic();
    let mut bp = BranchingProcess {
        conditions: Vec::new(),
        events: Vec::new(),
        min: Vec::new(),
        partial: false,
    };
    let mut co: Vec<BTreeSet<usize>> = Vec::new();
    // Causal past of each event, itself included.
    let mut past: Vec<BTreeSet<usize>> = Vec::new();
    for (p, n) in net.initial().iter() {
        if n > 1 {
            return Err(UnfoldError::UnsafeNet(p.to_string()));
        }
        let i = bp.conditions.len();
        bp.conditions.push(Condition {
            id: format!("b{i}"),
            place: p.to_string(),
            pre: None,
            post: Vec::new(),
        });
        bp.min.push(i);
    }
    for &i in &bp.min {
        co.push(bp.min.iter().copied().filter(|&j| j != i).collect());
    }
    let mut existing: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();

    while let Some(next) = extensions(net, &bp, &co, &past, &existing).into_iter().next() {
        if bounded && bp.events.len() >= depth {
            bp.partial = true;
            break;
        }
        let e = bp.events.len();
        let t = next.transition;
        existing.insert((t, next.preset.clone()));
        let mut pe: BTreeSet<usize> = BTreeSet::from([e]);
        for &b in &next.preset {
            if let Some(f) = bp.conditions[b].pre {
                pe.extend(past[f].iter().copied());
            }
            bp.conditions[b].post.push(e);
        }
        past.push(pe);

        let mut shared: Option<BTreeSet<usize>> = None;
        for &b in &next.preset {
            shared = Some(match shared {
                None => co[b].clone(),
                Some(s) => s.intersection(&co[b]).copied().collect(),
            });
        }
        let shared = shared.unwrap_or_default();
        let first = bp.conditions.len();
        let outs: Vec<usize> = net.post_t(t).to_vec();
        let mut postset = Vec::new();
        for (k, &p) in outs.iter().enumerate() {
            let i = first + k;
            let place = net.places()[p].clone();
            if shared.iter().any(|&d| bp.conditions[d].place == place) {
                return Err(UnfoldError::UnsafeNet(place));
            }
            bp.conditions.push(Condition {
                id: format!("b{i}"),
                place,
                pre: Some(e),
                post: Vec::new(),
            });
            postset.push(i);
        }
        for &i in &postset {
            let mut c = shared.clone();
            c.extend(postset.iter().copied().filter(|&j| j != i));
            for &d in &shared {
                co[d].insert(i);
            }
            co.push(c);
        }
        bp.events.push(Event {
            id: format!("e{e}"),
            transition: net.transitions()[t].clone(),
            preset: next.preset,
            postset,
        });
    }
    Ok(bp)
}

fn extensions(
    net: &PetriNet,
    bp: &BranchingProcess,
    co: &[BTreeSet<usize>],
    past: &[BTreeSet<usize>],
    existing: &BTreeSet<(usize, Vec<usize>)>,
) -> BTreeSet<Candidate> {
    let mut by_place: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in bp.conditions.iter().enumerate() {
        by_place.entry(c.place.as_str()).or_default().push(i);
    }
    let mut out = BTreeSet::new();
    for t in 0..net.transitions().len() {
        let places: Vec<&str> = net.pre_t(t).iter().map(|&p| net.places()[p].as_str()).collect();
        let mut chosen = Vec::new();
        choose(&places, &by_place, co, &mut chosen, &mut |preset: &[usize]| {
            let mut preset = preset.to_vec();
            preset.sort_unstable();
            if existing.contains(&(t, preset.clone())) {
                return;
            }
            let mut events = BTreeSet::new();
            for &b in &preset {
                if let Some(f) = bp.conditions[b].pre {
                    events.extend(past[f].iter().copied());
                }
            }
            out.insert(Candidate {
                size: events.len() + 1,
                transition: t,
                preset,
            });
        });
    }
    out
}

fn choose(
    places: &[&str],
    by_place: &BTreeMap<&str, Vec<usize>>,
    co: &[BTreeSet<usize>],
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let Some((p, rest)) = places.split_first() else {
        emit(chosen);
        return;
    };
    for &b in by_place.get(p).map(Vec::as_slice).unwrap_or(&[]) {
        if chosen.iter().all(|&c| co[c].contains(&b)) {
            chosen.push(b);
            choose(rest, by_place, co, chosen, emit);
            chosen.pop();
        }
    }
}

impl BranchingProcess {
    /// The folding map from condition and event ids to net nodes.
    pub fn folding(&self) -> BTreeMap<String, String> {
        self.conditions
            .iter()
            .map(|c| (c.id.clone(), c.place.clone()))
            .chain(self.events.iter().map(|e| (e.id.clone(), e.transition.clone())))
            .collect()
    }

    /// Whether every node of `net` is the image of some node.
    pub fn folding_is_surjective(&self, net: &PetriNet) -> bool {
        let image: BTreeSet<String> = self.folding().into_values().collect();
        net.node_names().all(|x| image.contains(x))
    }

    /// The occurrence net as a marked net with the minimal conditions marked.
    pub fn occurrence_net(&self) -> Result<PetriNet, NetError> {
        let mut b = PetriNet::builder();
        for c in &self.conditions {
            b.place(c.id.clone());
        }
        for e in &self.events {
            b.transition(e.id.clone());
            for &c in &e.preset {
                b.arc(self.conditions[c].id.clone(), e.id.clone());
            }
            for &c in &e.postset {
                b.arc(e.id.clone(), self.conditions[c].id.clone());
            }
        }
        for &c in &self.min {
            b.mark(self.conditions[c].id.clone());
        }
        b.build()
    }

    /// Events in the causal past of event `e`, `e` included.
    pub fn local_configuration(&self, e: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([e]);
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            for &b in &self.events[x].preset {
                if let Some(f) = self.conditions[b].pre {
                    if seen.insert(f) {
                        stack.push(f);
                    }
                }
            }
        }
        seen
    }

    /// Violations of the occurrence-net requirements (`"occurrence N"`) and
    /// of the branching-process requirements w.r.t. `net`
    /// (`"branching N"`), each with a short description.
    pub fn violations(&self, net: &PetriNet) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut bad = |tag: &str, msg: String| out.push((tag.to_string(), msg));

        let mut producers: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, e) in self.events.iter().enumerate() {
            for &c in &e.postset {
                if let Some(prev) = producers.insert(c, i) {
                    bad("occurrence 1", format!("{} produced by e{prev} and e{i}", self.conditions[c].id));
                }
            }
        }
        match self.occurrence_net() {
            Ok(o) => {
                if !o.is_acyclic() {
                    bad("occurrence 2", "flow relation has a cycle".into());
                }
            }
            Err(err) => bad("occurrence 2", err.to_string()),
        }
        // Finite past holds for any finite structure; self-conflict next.
        for e in 0..self.events.len() {
            let conf = self.local_configuration(e);
            let mut used: BTreeMap<usize, usize> = BTreeMap::new();
            for &f in &conf {
                for &c in &self.events[f].preset {
                    if used.insert(c, f).is_some() {
                        bad("occurrence 4", format!("e{e} is in self-conflict"));
                    }
                }
            }
        }

        for c in &self.conditions {
            if !net.is_place(&c.place) {
                bad("branching 1", format!("{} maps to non-place {}", c.id, c.place));
            }
        }
        for e in &self.events {
            if !net.is_transition(&e.transition) {
                bad("branching 1", format!("{} maps to non-transition {}", e.id, e.transition));
            }
        }
        let min_img: Vec<&str> = self.min.iter().map(|&c| self.conditions[c].place.as_str()).collect();
        let min_set: BTreeSet<&str> = min_img.iter().copied().collect();
        let m0: BTreeSet<&str> = net.initial().support().collect();
        if min_img.len() != min_set.len() || min_set != m0 {
            bad("branching 2", "minimal conditions do not biject onto the initial marking".into());
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if c.pre.is_none() && !self.min.contains(&i) {
                bad("branching 2", format!("{} has empty preset but is not minimal", c.id));
            }
        }
        for e in &self.events {
            if !net.is_transition(&e.transition) {
                continue;
            }
            let img = |cs: &[usize]| -> Vec<String> {
                let mut v: Vec<String> = cs.iter().map(|&c| self.conditions[c].place.clone()).collect();
                v.sort();
                v
            };
            let pre: Vec<String> = net.preset(&e.transition).unwrap().into_iter().collect();
            let post: Vec<String> = net.postset(&e.transition).unwrap().into_iter().collect();
            if img(&e.preset) != pre || img(&e.postset) != post {
                bad("branching 3", format!("{} neighbourhood does not match {}", e.id, e.transition));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.events {
            let mut pre = e.preset.clone();
            pre.sort_unstable();
            if !seen.insert((pre, e.transition.clone())) {
                bad("branching 4", format!("{} duplicates an earlier event", e.id));
            }
        }
        out
    }
}

/// Pointwise composition `phi ∘ u`.
pub fn compose_maps(
    u: &BTreeMap<String, String>,
    phi: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, UnfoldError> {
    u.iter()
        .map(|(x, y)| {
            phi.get(y)
                .map(|z| (x.clone(), z.clone()))
                .ok_or_else(|| UnfoldError::MapMismatch(y.clone()))
        })
        .collect()
}
