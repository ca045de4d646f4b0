//! Abstraction morphisms between nets: structural validation, local
//! unfolding conditions and behavioural preservation and reflection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::labeled::LgwfNet;
use crate::marking::Marking;
use crate::net::{NetError, PetriNet};
use crate::reach::{explore, ExploreOptions};
use crate::unfolding::{compose_maps, unfold, UnfoldError};
use crate::workflow::{check_gwf, check_soundness, is_smd, sequential_component_through, SequentialComponent, SoundnessReport};

pub type NodeMap = BTreeMap<String, String>;

/// Prefix of the artificial input place of a local net.
pub const BOTTOM_IN: &str = "⊥in:";
/// Prefix of the artificial output place of a local net.
pub const BOTTOM_OUT: &str = "⊥out:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("{node} is not a node of the {side} net")]
    UnknownNode { node: String, side: &'static str },
    #[error("map is not total; unmapped: {}", .0.join(", "))]
    NotTotal(Vec<String>),
    #[error("not a valid morphism: {0}")]
    InvalidMorphism(String),
    #[error("place {0} is not properly refined")]
    NotProperlyRefined(String),
    #[error("source net is not sound: {0}")]
    SourceNotSound(String),
    #[error("exploration incomplete (state limit or token cap reached)")]
    IncompleteExploration,
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A total map from the nodes of `source` to the nodes of `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism<'a> {
    source: &'a PetriNet,
    target: &'a PetriNet,
    map: NodeMap,
}

impl<'a> Morphism<'a> {
    pub fn new(source: &'a PetriNet, target: &'a PetriNet, map: NodeMap) -> Result<Self, MorphismError> {
        for (x, y) in &map {
            if source.node(x).is_none() {
                return Err(MorphismError::UnknownNode { node: x.clone(), side: "source" });
            }
            if target.node(y).is_none() {
                return Err(MorphismError::UnknownNode { node: y.clone(), side: "target" });
            }
        }
        let missing: Vec<String> = source
            .node_names()
            .filter(|x| !map.contains_key(*x))
            .map(str::to_string)
            .collect();
        if !missing.is_empty() {
            return Err(MorphismError::NotTotal(missing));
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(net: &'a PetriNet) -> Self {
        let map = net.node_names().map(|x| (x.to_string(), x.to_string())).collect();
        Self { source: net, target: net, map }
    }

    pub fn source(&self) -> &'a PetriNet {
        self.source
    }

    pub fn target(&self) -> &'a PetriNet {
        self.target
    }

    pub fn map(&self) -> &NodeMap {
        &self.map
    }

    pub fn image(&self, x: &str) -> &str {
        &self.map[x]
    }

    pub fn image_set<'s>(&self, xs: impl IntoIterator<Item = &'s String>) -> BTreeSet<String> {
        xs.into_iter().map(|x| self.map[x.as_str()].clone()).collect()
    }

    pub fn preimage(&self, y: &str) -> BTreeSet<String> {
        self.map
            .iter()
            .filter(|(_, v)| v.as_str() == y)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Set image of a marking.
    pub fn image_marking(&self, m: &Marking) -> Marking {
        m.image_set(|p| self.map[p].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MorphismClause {
    /// Source or target is not state machine decomposable (hence not known safe).
    Precondition,
    Surjective,
    Places,
    Initial,
    Final,
    TransitionNeighbourhood,
    Labels,
    Collapse,
    Acyclic,
    InputPlaces,
    OutputPlaces,
    Internal,
    SequentialComponent,
}

impl MorphismClause {
    pub fn id(self) -> &'static str {
        match self {
            MorphismClause::Precondition => "pre",
            MorphismClause::Surjective => "surj",
            MorphismClause::Places => "1",
            MorphismClause::Initial => "2",
            MorphismClause::Final => "2'",
            MorphismClause::TransitionNeighbourhood => "3",
            MorphismClause::Labels => "3'",
            MorphismClause::Collapse => "4",
            MorphismClause::Acyclic => "5a",
            MorphismClause::InputPlaces => "5b",
            MorphismClause::OutputPlaces => "5c",
            MorphismClause::Internal => "5d",
            MorphismClause::SequentialComponent => "5e",
        }
    }
}

impl fmt::Display for MorphismClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphismFailure {
    pub clause: MorphismClause,
    pub nodes: Vec<String>,
    pub detail: String,
}

impl fmt::Display for MorphismFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}: {} [{}]", self.clause, self.detail, self.nodes.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphismReport {
    pub valid: bool,
    pub failures: Vec<MorphismFailure>,
    /// For each source place mapped into a target place, a sequential
    /// component through it containing the preimage of the target place's
    /// neighbourhood.
    pub sm_witnesses: BTreeMap<String, SequentialComponent>,
}

impl MorphismReport {
    pub fn failed(&self, clause: MorphismClause) -> bool {
        self.failures.iter().any(|f| f.clause == clause)
    }

    fn push(&mut self, clause: MorphismClause, nodes: impl IntoIterator<Item = String>, detail: impl Into<String>) {
        self.failures.push(MorphismFailure {
            clause,
            nodes: nodes.into_iter().collect(),
            detail: detail.into(),
        });
        self.valid = false;
    }
}

impl fmt::Display for MorphismReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        f.write_str("invalid")?;
        for x in &self.failures {
            write!(f, "\n{x}")?;
        }
        Ok(())
    }
}

fn set(xs: BTreeSet<String>) -> String {
    format!("{{{}}}", xs.into_iter().collect::<Vec<_>>().join(","))
}

/// Checks every clause of the α-morphism definition and collects all
/// failures rather than stopping at the first.
pub fn check_alpha(m: &Morphism) -> MorphismReport {
    let (n1, n2) = (m.source, m.target);
    let mut r = MorphismReport {
        valid: true,
        failures: Vec::new(),
        sm_witnesses: BTreeMap::new(),
    };
    if !is_smd(n1) {
        r.push(MorphismClause::Precondition, ["source".to_string()], "source is not state machine decomposable");
    }
    if !is_smd(n2) {
        r.push(MorphismClause::Precondition, ["target".to_string()], "target is not state machine decomposable");
    }

    let image: BTreeSet<&str> = m.map.values().map(String::as_str).collect();
    let missed: Vec<String> = n2.node_names().filter(|y| !image.contains(y)).map(str::to_string).collect();
    if !missed.is_empty() {
        r.push(MorphismClause::Surjective, missed, "not in the image");
    }

    let bad: Vec<String> = n1.places().iter().filter(|p| !n2.is_place(m.image(p))).cloned().collect();
    if !bad.is_empty() {
        r.push(MorphismClause::Places, bad, "place mapped to a transition");
    }
    let uncovered: Vec<String> = n2
        .places()
        .iter()
        .filter(|p2| !n1.places().iter().any(|p1| m.image(p1) == p2.as_str()))
        .cloned()
        .collect();
    if !uncovered.is_empty() {
        r.push(MorphismClause::Places, uncovered, "target place is not the image of a place");
    }

    let m0_img = m.image_marking(n1.initial());
    let m0_tgt = Marking::from_places(n2.initial().support());
    if m0_img != m0_tgt {
        r.push(
            MorphismClause::Initial,
            m0_img.support().chain(m0_tgt.support()).map(str::to_string).collect::<BTreeSet<_>>(),
            format!("image of initial marking {m0_img} differs from {m0_tgt}"),
        );
    }

    for t1 in n1.transitions() {
        let y = m.image(t1);
        let pre = m.image_set(&n1.preset(t1).unwrap());
        let post = m.image_set(&n1.postset(t1).unwrap());
        if n2.is_transition(y) {
            let (pre2, post2) = (n2.preset(y).unwrap(), n2.postset(y).unwrap());
            if pre != pre2 || post != post2 {
                r.push(
                    MorphismClause::TransitionNeighbourhood,
                    [t1.clone()],
                    format!(
                        "maps to {y}: image of neighbourhood {} -> {} differs from {} -> {}",
                        set(pre),
                        set(post),
                        set(pre2),
                        set(post2)
                    ),
                );
            }
        } else {
            let mut nb = pre;
            nb.extend(post);
            if nb != BTreeSet::from([y.to_string()]) {
                r.push(
                    MorphismClause::Collapse,
                    [t1.clone()],
                    format!("maps to place {y} but its neighbourhood maps to {}", set(nb)),
                );
            }
        }
    }

    for p2 in n2.places() {
        let a = m.preimage(p2);
        if a.is_empty() {
            continue;
        }
        let places: BTreeSet<String> = a.iter().filter(|x| n1.is_place(x)).cloned().collect();
        if places.len() != a.len() && !n1.is_acyclic_on(&a) {
            r.push(MorphismClause::Acyclic, [p2.clone()], "refining subnet has a cycle");
        }
        let sub = n1.subnet(&a).unwrap();
        let pre2 = n2.preset(p2).unwrap();
        let post2 = n2.postset(p2).unwrap();
        for p1 in sub.inputs.iter().filter(|x| n1.is_place(x)) {
            let pre1 = n1.preset(p1).unwrap();
            let img = m.image_set(&pre1);
            if !img.is_subset(&pre2) {
                r.push(
                    MorphismClause::InputPlaces,
                    [p1.clone()],
                    format!("input place of the subnet refining {p2}: preset maps to {} not within {}", set(img), set(pre2.clone())),
                );
            } else if !pre2.is_empty() && pre1.is_empty() {
                r.push(
                    MorphismClause::InputPlaces,
                    [p1.clone()],
                    format!("input place of the subnet refining {p2} has an empty preset"),
                );
            }
        }
        for p1 in sub.outputs.iter().filter(|x| n1.is_place(x)) {
            let img = m.image_set(&n1.postset(p1).unwrap());
            if img != post2 {
                r.push(
                    MorphismClause::OutputPlaces,
                    [p1.clone()],
                    format!("output place of the subnet refining {p2}: postset maps to {} not {}", set(img), set(post2.clone())),
                );
            }
        }
        let only = BTreeSet::from([p2.clone()]);
        for p1 in &places {
            if !sub.inputs.contains(p1) && m.image_set(&n1.preset(p1).unwrap()) != only {
                r.push(MorphismClause::Internal, [p1.clone()], format!("internal place: preset does not map to {p2}"));
            }
            if !sub.outputs.contains(p1) && m.image_set(&n1.postset(p1).unwrap()) != only {
                r.push(MorphismClause::Internal, [p1.clone()], format!("internal place: postset does not map to {p2}"));
            }
        }
        let mut nb2 = pre2.clone();
        nb2.extend(post2.iter().cloned());
        let required: BTreeSet<String> = nb2
            .iter()
            .flat_map(|t2| m.preimage(t2))
            .filter(|x| n1.is_transition(x))
            .collect();
        for p1 in &places {
            match sequential_component_through(n1, p1, &required) {
                Some(c) => {
                    r.sm_witnesses.insert(p1.clone(), c);
                }
                None => r.push(
                    MorphismClause::SequentialComponent,
                    [p1.clone()],
                    format!("no sequential component through {p1} containing {}", set(required.clone())),
                ),
            }
        }
    }
    r
}

/// α-morphism check on the underlying nets plus preservation of the final
/// marking and of transition labels.
pub fn check_alpha_hat(src: &LgwfNet, tgt: &LgwfNet, map: NodeMap) -> Result<MorphismReport, MorphismError> {
    let m = Morphism::new(src.net(), tgt.net(), map)?;
    let mut r = check_alpha(&m);
    let f1 = m.image_marking(src.final_marking());
    if &f1 != tgt.final_marking() {
        r.push(
            MorphismClause::Final,
            f1.support().chain(tgt.final_marking().support()).map(str::to_string).collect::<BTreeSet<_>>(),
            format!("image of final marking {f1} differs from {}", tgt.final_marking()),
        );
    }
    let labeled: BTreeSet<&String> = src.h().keys().chain(src.ell().keys()).collect();
    for t1 in labeled {
        let y = m.image(t1);
        if !tgt.net().is_transition(y) {
            r.push(MorphismClause::Labels, [t1.clone()], format!("labeled transition mapped to place {y}"));
            continue;
        }
        if let Some(l) = src.h().get(t1) {
            if tgt.h().get(y) != Some(l) {
                r.push(MorphismClause::Labels, [t1.clone()], format!("label {l} not carried by {y}"));
            }
        }
        if let Some(s) = src.ell().get(t1) {
            if tgt.ell().get(y) != Some(s) {
                r.push(MorphismClause::Labels, [t1.clone()], format!("sync label {s} not carried by {y}"));
            }
        }
    }
    Ok(r)
}

fn require_valid(m: &Morphism) -> Result<(), MorphismError> {
    let r = check_alpha(m);
    if r.valid {
        Ok(())
    } else {
        Err(MorphismError::InvalidMorphism(r.to_string()))
    }
}

/// Input places of subnets refining initially marked places that are not
/// themselves initially marked.
pub fn well_marked_failures(m: &Morphism) -> Result<Vec<String>, MorphismError> {
    require_valid(m)?;
    let mut out = Vec::new();
    for p2 in m.target.initial().support() {
        let sub = m.source.subnet(&m.preimage(p2))?;
        for p1 in sub.inputs.iter().filter(|x| m.source.is_place(x)) {
            if m.source.initial().get(p1) == 0 {
                out.push(p1.clone());
            }
        }
    }
    Ok(out)
}

pub fn check_well_marked(m: &Morphism) -> Result<bool, MorphismError> {
    Ok(well_marked_failures(m)?.is_empty())
}

/// Target places whose preimage contains a transition.
pub fn properly_refined_places(m: &Morphism) -> Result<BTreeSet<String>, MorphismError> {
    require_valid(m)?;
    Ok(m.target
        .places()
        .iter()
        .filter(|p2| m.preimage(p2).iter().any(|x| m.source.is_transition(x)))
        .cloned()
        .collect())
}

/// The local nets around a properly refined place and the restricted map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalNetPair {
    pub place: String,
    pub s1: PetriNet,
    pub s2: PetriNet,
    pub phi_s: NodeMap,
}

/// `S1(p2)`: the refining subnet with the preimages of the neighbouring
/// transitions; `S2(p2)`: `p2` with its neighbouring transitions. A shared
/// artificial input place feeds the entry transitions and a shared
/// artificial output place collects from the exit transitions, so each of
/// them keeps a nonempty preset and postset.
pub fn build_local_nets(m: &Morphism, p2: &str) -> Result<LocalNetPair, MorphismError> {
    let (n1, n2) = (m.source, m.target);
    if !n2.is_place(p2) {
        return Err(MorphismError::UnknownNode { node: p2.to_string(), side: "target" });
    }
    let a = m.preimage(p2);
    if !a.iter().any(|x| n1.is_transition(x)) {
        return Err(MorphismError::NotProperlyRefined(p2.to_string()));
    }
    let pre2 = n2.preset(p2)?;
    let post2 = n2.postset(p2)?;
    let t_in: BTreeSet<String> = pre2.iter().flat_map(|t| m.preimage(t)).collect();
    let t_out: BTreeSet<String> = post2.iter().flat_map(|t| m.preimage(t)).collect();
    let bin = format!("{BOTTOM_IN}{p2}");
    let bout = format!("{BOTTOM_OUT}{p2}");

    let mut nodes: BTreeSet<String> = a.clone();
    nodes.extend(t_in.iter().cloned());
    nodes.extend(t_out.iter().cloned());
    let mut b1 = PetriNet::builder();
    let mut phi_s = NodeMap::new();
    for x in &nodes {
        if n1.is_place(x) {
            b1.place(x.clone());
        } else {
            b1.transition(x.clone());
        }
        phi_s.insert(x.clone(), m.image(x).to_string());
    }
    for (x, y) in n1.arcs() {
        if nodes.contains(&x) && nodes.contains(&y) {
            b1.arc(x, y);
        }
    }
    if !t_in.is_empty() {
        b1.place(bin.clone());
        phi_s.insert(bin.clone(), bin.clone());
        for t in &t_in {
            b1.arc(bin.clone(), t.clone());
        }
        b1.mark(bin.clone());
    } else {
        for p in n1.initial().support().filter(|p| a.contains(*p)) {
            b1.mark(p);
        }
    }
    if !t_out.is_empty() {
        b1.place(bout.clone());
        phi_s.insert(bout.clone(), bout.clone());
        for t in &t_out {
            b1.arc(t.clone(), bout.clone());
        }
    }
    let s1 = b1.build()?;

    let mut b2 = PetriNet::builder();
    b2.place(p2);
    for t in &pre2 {
        b2.transition(t.clone()).arc(t.clone(), p2);
    }
    for t in &post2 {
        b2.transition(t.clone()).arc(p2, t.clone());
    }
    if !pre2.is_empty() {
        b2.place(bin.clone()).mark(bin.clone());
        for t in &pre2 {
            b2.arc(bin.clone(), t.clone());
        }
    } else {
        b2.mark(p2);
    }
    if !post2.is_empty() {
        b2.place(bout.clone());
        for t in &post2 {
            b2.arc(t.clone(), bout.clone());
        }
    }
    let s2 = b2.build()?;
    Ok(LocalNetPair {
        place: p2.to_string(),
        s1,
        s2,
        phi_s,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalPlaceResult {
    pub place: String,
    pub holds: bool,
    pub events: usize,
    pub conditions: usize,
    /// The α-check of the folding composed with the restricted map.
    pub report: MorphismReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalConditionReport {
    pub holds: bool,
    pub places: Vec<LocalPlaceResult>,
}

impl LocalConditionReport {
    /// Target nodes named by failures of the composed maps.
    pub fn failing_nodes(&self) -> BTreeSet<String> {
        self.places
            .iter()
            .flat_map(|p| p.report.failures.iter().flat_map(|f| f.nodes.iter().cloned()))
            .collect()
    }
}

impl fmt::Display for LocalConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "local condition {}", if self.holds { "holds" } else { "fails" })?;
        for p in &self.places {
            write!(
                f,
                "\nplace {}: {} ({} events, {} conditions)",
                p.place,
                if p.holds { "ok" } else { "fails" },
                p.events,
                p.conditions
            )?;
            for x in &p.report.failures {
                write!(f, "\n  {x}")?;
            }
        }
        Ok(())
    }
}

/// For every properly refined place, unfolds `S1(p2)` and checks that the
/// folding composed with the restricted map is an α-morphism onto `S2(p2)`.
pub fn check_local_condition(m: &Morphism) -> Result<LocalConditionReport, MorphismError> {
    let mut out = LocalConditionReport {
        holds: true,
        places: Vec::new(),
    };
    for p2 in properly_refined_places(m)? {
        let pair = build_local_nets(m, &p2)?;
        let bp = unfold(&pair.s1, usize::MAX)?;
        let u = bp.folding();
        let composed = compose_maps(&u, &pair.phi_s)?;
        let report = match bp.occurrence_net() {
            Ok(occ) => {
                let phi = Morphism::new(&occ, &pair.s2, composed)?;
                check_alpha(&phi)
            }
            Err(e) => MorphismReport {
                valid: false,
                failures: vec![MorphismFailure {
                    clause: MorphismClause::Precondition,
                    nodes: vec![p2.clone()],
                    detail: format!("unfolding is not a net: {e}"),
                }],
                sm_witnesses: BTreeMap::new(),
            },
        };
        out.holds &= report.valid;
        out.places.push(LocalPlaceResult {
            place: p2,
            holds: report.valid,
            events: bp.events.len(),
            conditions: bp.conditions.len(),
            report,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BehaviourReport {
    pub holds: bool,
    pub failures: Vec<String>,
    pub markings: usize,
    pub edges: usize,
}

/// Every reachable source marking maps to a reachable target marking; a
/// source step mapped to a transition is matched by that transition in the
/// target, and a step mapped to a place leaves the image unchanged.
pub fn check_preservation(m: &Morphism, opts: ExploreOptions) -> Result<BehaviourReport, MorphismError> {
    let g1 = explore(m.source, opts);
    let g2 = explore(m.target, opts);
    if !g1.is_complete() || !g2.is_complete() {
        return Err(MorphismError::IncompleteExploration);
    }
    let reach2: BTreeSet<Marking> = g2.markings().collect();
    let mut failures = Vec::new();
    let images: Vec<Marking> = g1.markings().map(|x| m.image_marking(&x)).collect();
    for (i, img) in images.iter().enumerate() {
        if !reach2.contains(img) {
            failures.push(format!("image {img} of {} is not reachable", g1.marking(i)));
        }
    }
    for e in g1.edges() {
        let t = g1.transition_name(e.transition);
        let y = m.image(t);
        let (a, b) = (&images[e.from], &images[e.to]);
        if m.target.is_transition(y) {
            match m.target.fire(a, y) {
                Ok(next) if &next == b => {}
                _ => failures.push(format!("{t} at {} is not simulated by {y} at {a}", g1.marking(e.from))),
            }
        } else if a != b {
            failures.push(format!("{t} maps to place {y} but changes the image from {a} to {b}"));
        }
    }
    Ok(BehaviourReport {
        holds: failures.is_empty(),
        failures,
        markings: g1.vertex_count(),
        edges: g1.edges().len(),
    })
}

/// Reflection without the soundness premise: every reachable target
/// marking has a reachable preimage, and for every transition enabled there
/// each of its preimage transitions is enabled at some reachable preimage.
pub fn reflection_failures(m: &Morphism, opts: ExploreOptions) -> Result<BehaviourReport, MorphismError> {
    let g1 = explore(m.source, opts);
    let g2 = explore(m.target, opts);
    if !g1.is_complete() || !g2.is_complete() {
        return Err(MorphismError::IncompleteExploration);
    }
    let mut by_image: BTreeMap<Marking, Vec<Marking>> = BTreeMap::new();
    for x in g1.markings() {
        by_image.entry(m.image_marking(&x)).or_default().push(x);
    }
    let mut failures = Vec::new();
    for m2 in g2.markings() {
        let Some(pre) = by_image.get(&m2) else {
            failures.push(format!("{m2} has no reachable preimage"));
            continue;
        };
        for t2 in m.target.enabled_transitions(&m2) {
            for t1 in m.preimage(t2).iter().filter(|x| m.source.is_transition(x)) {
                if !pre.iter().any(|m1| m.source.enabled(m1, t1).unwrap_or(false)) {
                    failures.push(format!("{t2} is enabled at {m2} but {t1} is enabled at no preimage"));
                }
            }
        }
    }
    Ok(BehaviourReport {
        holds: failures.is_empty(),
        failures,
        markings: g2.vertex_count(),
        edges: g2.edges().len(),
    })
}

/// Reflection of reachable markings and firings. Refuses to run unless the
/// source, with final marking `source_final`, is a sound workflow net.
pub fn check_reflection(
    m: &Morphism,
    source_final: &Marking,
    opts: ExploreOptions,
) -> Result<BehaviourReport, MorphismError> {
    let g = check_gwf(m.source.clone(), source_final.clone())
        .map_err(|e| MorphismError::SourceNotSound(e.to_string()))?;
    let report: SoundnessReport = check_soundness(&g, opts).map_err(|_| MorphismError::IncompleteExploration)?;
    if !report.is_sound() {
        return Err(MorphismError::SourceNotSound(report.to_string()));
    }
    reflection_failures(m, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PetriNet {
        PetriNet::builder()
            .place("s")
            .place("f")
            .transition("t")
            .arc("s", "t")
            .arc("t", "f")
            .mark("s")
            .build()
            .unwrap()
    }

    fn map(pairs: &[(&str, &str)]) -> NodeMap {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn identity_is_valid() {
        let n = chain();
        let m = Morphism::identity(&n);
        let r = check_alpha(&m);
        assert!(r.valid, "{r}");
        assert!(check_well_marked(&m).unwrap());
        assert!(properly_refined_places(&m).unwrap().is_empty());
        assert!(check_local_condition(&m).unwrap().holds);
        assert!(check_preservation(&m, ExploreOptions::default()).unwrap().holds);
        let fin = Marking::from_places(["f"]);
        assert!(check_reflection(&m, &fin, ExploreOptions::default()).unwrap().holds);
    }

    #[test]
    fn totality_and_unknown_nodes() {
        let n = chain();
        let e = Morphism::new(&n, &n, map(&[("s", "s"), ("f", "f")])).unwrap_err();
        assert_eq!(e, MorphismError::NotTotal(vec!["t".into()]));
        let e = Morphism::new(&n, &n, map(&[("s", "s"), ("f", "f"), ("t", "zz")])).unwrap_err();
        assert!(matches!(e, MorphismError::UnknownNode { side: "target", .. }));
    }

    #[test]
    fn mismatched_neighbourhood() {
        // Two-step chain folded onto a one-step chain with a bad transition map.
        let n1 = PetriNet::builder()
            .place("a")
            .place("b")
            .place("c")
            .transition("x")
            .transition("y")
            .arc("a", "x")
            .arc("x", "b")
            .arc("b", "y")
            .arc("y", "c")
            .mark("a")
            .build()
            .unwrap();
        let n2 = chain();
        let m = Morphism::new(&n1, &n2, map(&[("a", "s"), ("x", "t"), ("b", "f"), ("y", "t"), ("c", "f")])).unwrap();
        let r = check_alpha(&m);
        assert!(!r.valid);
        assert!(r
            .failures
            .iter()
            .any(|f| f.clause == MorphismClause::TransitionNeighbourhood && f.nodes == vec!["y".to_string()]));
    }

    #[test]
    fn chain_refinement_local_nets() {
        // tin -> pa -> tint -> pb -> tout refines tin -> p -> tout.
        let n1 = PetriNet::builder()
            .place("i")
            .place("pa")
            .place("pb")
            .place("o")
            .transition("tin")
            .transition("tint")
            .transition("tout")
            .arc("i", "tin")
            .arc("tin", "pa")
            .arc("pa", "tint")
            .arc("tint", "pb")
            .arc("pb", "tout")
            .arc("tout", "o")
            .mark("i")
            .build()
            .unwrap();
        let n2 = PetriNet::builder()
            .place("i")
            .place("p")
            .place("o")
            .transition("tin")
            .transition("tout")
            .arc("i", "tin")
            .arc("tin", "p")
            .arc("p", "tout")
            .arc("tout", "o")
            .mark("i")
            .build()
            .unwrap();
        let m = Morphism::new(
            &n1,
            &n2,
            map(&[
                ("i", "i"),
                ("tin", "tin"),
                ("pa", "p"),
                ("tint", "p"),
                ("pb", "p"),
                ("tout", "tout"),
                ("o", "o"),
            ]),
        )
        .unwrap();
        let r = check_alpha(&m);
        assert!(r.valid, "{r}");
        assert_eq!(properly_refined_places(&m).unwrap(), BTreeSet::from(["p".to_string()]));
        let pair = build_local_nets(&m, "p").unwrap();
        assert_eq!(pair.s1.places().len(), 4);
        assert_eq!(pair.s2.places().len(), 3);
        assert!(pair.s1.is_place("⊥in:p") && pair.s1.is_place("⊥out:p"));
        assert!(check_local_condition(&m).unwrap().holds);
        let pres = check_preservation(&m, ExploreOptions::default()).unwrap();
        assert!(pres.holds, "{:?}", pres.failures);
        assert_eq!(
            build_local_nets(&m, "i"),
            Err(MorphismError::NotProperlyRefined("i".into()))
        );
    }
}
