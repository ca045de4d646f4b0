//! Soundness by construction: refining the components of a verified
//! interface and certifying the refined composition without exploring it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::compose::{as_compose, ComposeError, ComposeOptions, Composition, Origin};
use crate::iso::isomorphism;
use crate::labeled::{validate_lgwf, Labels, LgwfNet};
use crate::marking::Marking;
use crate::morphism::{
    check_alpha_hat, check_local_condition, well_marked_failures, LocalConditionReport, Morphism, MorphismError,
    MorphismReport, NodeMap,
};
use crate::net::PetriNet;
use crate::reach::ExploreOptions;
use crate::workflow::{check_gwf, check_soundness, SoundnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error("{0} has no counterpart in the interface")]
    Unmappable(String),
    #[error("refinements target different interfaces")]
    DifferentInterfaces,
    #[error("diagram does not commute at {0}")]
    NonCommutingDiagram(String),
    #[error("substituted net is not isomorphic to the direct composition")]
    NotIsomorphic,
    #[error("substituted net is not a labeled workflow net: {0}")]
    InvalidResult(String),
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
}

/// Two refined components, their abstractions and the abstraction maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementScenario {
    pub r1: LgwfNet,
    pub r2: LgwfNet,
    pub n1: LgwfNet,
    pub n2: LgwfNet,
    pub phi1: NodeMap,
    pub phi2: NodeMap,
}

impl RefinementScenario {
    /// The interface `n1 ⊛ n2`.
    pub fn interface(&self) -> Result<Composition, RefineError> {
        Ok(as_compose(&self.n1, &self.n2, ComposeOptions::default())?)
    }

    /// The refined system `r1 ⊛ r2`.
    pub fn system(&self) -> Result<Composition, RefineError> {
        Ok(as_compose(&self.r1, &self.r2, ComposeOptions::default())?)
    }

    pub fn morphism_report(&self, side: Side) -> Result<MorphismReport, RefineError> {
        let (r, n, phi) = self.parts(side);
        Ok(check_alpha_hat(r, n, phi.clone())?)
    }

    fn parts(&self, side: Side) -> (&LgwfNet, &LgwfNet, &NodeMap) {
        match side {
            Side::Left => (&self.r1, &self.n1, &self.phi1),
            Side::Right => (&self.r2, &self.n2, &self.phi2),
        }
    }
}

/// `r1 ⊛ n2` (left) or `n1 ⊛ r2` (right) with the induced map onto the
/// interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intermediate {
    pub side: Side,
    pub composition: Composition,
    pub interface: Composition,
    pub map: NodeMap,
    pub report: MorphismReport,
    /// Channel arcs of the interface whose preimages are not fully wired.
    pub arc_failures: Vec<String>,
}

impl Intermediate {
    pub fn is_valid(&self) -> bool {
        self.report.valid && self.arc_failures.is_empty()
    }
}

fn index(c: &Composition) -> BTreeMap<Origin, String> {
    c.provenance.iter().map(|(x, o)| (o.clone(), x.clone())).collect()
}

/// Node of `interface` induced by a node of the refined component mapped
/// to `y` in its abstraction `abs`.
fn lift(interface: &BTreeMap<Origin, String>, abs: &LgwfNet, side: Side, y: &str) -> Option<String> {
    let own = |x: String| match side {
        Side::Left => Origin::Left(x),
        Side::Right => Origin::Right(x),
    };
    if let Some(z) = interface.get(&own(y.to_string())) {
        return Some(z.clone());
    }
    if let Some(c) = abs.k().get(y) {
        return interface.get(&Origin::Channel(c.clone())).cloned();
    }
    if abs.ell().contains_key(y) {
        let mut pairs = interface.iter().filter(|(o, _)| match (o, side) {
            (Origin::Sync(a, _), Side::Left) => a == y,
            (Origin::Sync(_, b), Side::Right) => b == y,
            _ => false,
        });
        let first = pairs.next()?;
        if pairs.next().is_none() {
            return Some(first.1.clone());
        }
    }
    None
}

fn induced_map(
    comp: &Composition,
    interface: &Composition,
    abs: &LgwfNet,
    phi: &NodeMap,
    side: Side,
) -> Result<NodeMap, RefineError> {
    let idx = index(interface);
    let mut map = NodeMap::new();
    for (x, o) in &comp.provenance {
        let y = match (o, side) {
            (Origin::Left(a), Side::Left) | (Origin::Right(a), Side::Right) => lift(&idx, abs, side, &phi[a]),
            (Origin::Left(_), Side::Right) | (Origin::Right(_), Side::Left) | (Origin::Channel(_), _) => {
                idx.get(o).cloned()
            }
            (Origin::Sync(a, b), Side::Left) => idx.get(&Origin::Sync(phi[a].clone(), b.clone())).cloned(),
            (Origin::Sync(a, b), Side::Right) => idx.get(&Origin::Sync(a.clone(), phi[b].clone())).cloned(),
        };
        map.insert(x.clone(), y.ok_or_else(|| RefineError::Unmappable(x.clone()))?);
    }
    Ok(map)
}

/// Builds the intermediate refinement on one side, the map induced by the
/// component map and the identity on the other component, and validates it.
pub fn intermediate_refinement(s: &RefinementScenario, side: Side) -> Result<Intermediate, RefineError> {
    let interface = s.interface()?;
    let (r, n, phi) = s.parts(side);
    let composition = match side {
        Side::Left => as_compose(r, &s.n2, ComposeOptions::default())?,
        Side::Right => as_compose(&s.n1, r, ComposeOptions::default())?,
    };
    let map = induced_map(&composition, &interface, n, phi, side)?;
    let report = check_alpha_hat(&composition.result, &interface.result, map.clone())?;
    let arc_failures = channel_arc_failures(&composition.result, &interface.result, &map);
    Ok(Intermediate {
        side,
        composition,
        interface,
        map,
        report,
        arc_failures,
    })
}

/// For every arc between a channel place and a transition of the target,
/// the preimage of the place is wired to every preimage of the transition.
pub fn channel_arc_failures(source: &LgwfNet, target: &LgwfNet, map: &NodeMap) -> Vec<String> {
    let mut pre: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (x, y) in map {
        pre.entry(y.as_str()).or_default().push(x.as_str());
    }
    let mut out = Vec::new();
    for (a, b) in target.net().arcs() {
        let (p, t, into_t) = if target.k().contains_key(&a) {
            (a, b, true)
        } else if target.k().contains_key(&b) {
            (b, a, false)
        } else {
            continue;
        };
        let ps = pre.get(p.as_str()).cloned().unwrap_or_default();
        let ts = pre.get(t.as_str()).cloned().unwrap_or_default();
        for &p1 in &ps {
            for &t1 in ts.iter().filter(|x| source.net().is_transition(x)) {
                let ok = if into_t {
                    source.net().has_arc(p1, t1)
                } else {
                    source.net().has_arc(t1, p1)
                };
                if !ok {
                    out.push(if into_t {
                        format!("missing arc {p1} -> {t1}")
                    } else {
                        format!("missing arc {t1} -> {p1}")
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Component {
    R1,
    R2,
    N1,
    N2,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::R1 => "r1",
            Component::R2 => "r2",
            Component::N1 => "n1",
            Component::N2 => "n2",
        })
    }
}

/// A premise of soundness by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Premise {
    ComponentSound(Component),
    Morphism(Side),
    WellMarked(Side),
    LocalCondition(Side),
    InterfaceComposable,
    InterfaceSound,
    Intermediate(Side),
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi = |s: &Side| match s {
            Side::Left => "phi1",
            Side::Right => "phi2",
        };
        match self {
            Premise::ComponentSound(c) => write!(f, "{c} sound"),
            Premise::Morphism(s) => write!(f, "{} is an alpha-hat morphism", phi(s)),
            Premise::WellMarked(s) => write!(f, "{} source well-marked", phi(s)),
            Premise::LocalCondition(s) => write!(f, "{} local condition", phi(s)),
            Premise::InterfaceComposable => f.write_str("interface composable"),
            Premise::InterfaceSound => f.write_str("interface sound"),
            Premise::Intermediate(Side::Left) => f.write_str("r1+n2 refines the interface"),
            Premise::Intermediate(Side::Right) => f.write_str("r1+r2 refines r1+n2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PremiseResult {
    pub premise: Premise,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conclusion {
    /// `r1 ⊛ r2` is sound: soundness of the interface carries over to
    /// `r1 ⊛ n2` by refining the left component, and from there to
    /// `r1 ⊛ r2` by refining the right one.
    Certified,
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub premises: Vec<PremiseResult>,
    pub interface_sound: Option<SoundnessReport>,
    pub component_sound: BTreeMap<Component, Option<SoundnessReport>>,
    pub morphism_reports: BTreeMap<Side, MorphismReport>,
    pub local_condition_reports: BTreeMap<Side, LocalConditionReport>,
    pub conclusion: Conclusion,
    /// Explicit soundness of `r1 ⊛ r2`, when requested.
    pub audit: Option<SoundnessReport>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.conclusion == Conclusion::Certified
    }

    pub fn failed_premises(&self) -> Vec<Premise> {
        self.premises.iter().filter(|p| !p.holds).map(|p| p.premise).collect()
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.premises {
            write!(f, "[{}] {}", if p.holds { "ok" } else { "FAIL" }, p.premise)?;
            if !p.detail.is_empty() {
                write!(f, ": {}", p.detail.replace('\n', "\n    "))?;
            }
            writeln!(f)?;
        }
        match self.conclusion {
            Conclusion::Certified => write!(
                f,
                "certified: r1+r2 is sound (interface sound, refined left to r1+n2, then right to r1+r2)"
            )?,
            Conclusion::Uncertified => {
                let failed: Vec<String> = self.failed_premises().iter().map(|p| p.to_string()).collect();
                write!(f, "not certified: {}", failed.join("; "))?
            }
        }
        if let Some(a) = &self.audit {
            write!(f, "\naudit: {}", if a.is_sound() { "sound" } else { "unsound" })?;
        }
        Ok(())
    }
}

fn soundness(n: &LgwfNet, opts: ExploreOptions) -> (bool, String, Option<SoundnessReport>) {
    match check_soundness(n.gwf(), opts) {
        Ok(r) => (r.is_sound(), if r.is_sound() { String::new() } else { r.to_string() }, Some(r)),
        Err(e) => (false, e.to_string(), None),
    }
}

/// Checks every premise and certifies `r1 ⊛ r2` sound when all hold. All
/// failing premises are listed. With `audit`, `r1 ⊛ r2` is additionally
/// checked explicitly; the audit never affects the conclusion.
pub fn certify(s: &RefinementScenario, opts: ExploreOptions, audit: bool) -> Certificate {
    let mut premises = Vec::new();
    let mut push = |premise, holds, detail: String| premises.push(PremiseResult { premise, holds, detail });
    let mut component_sound = BTreeMap::new();
    for (c, n) in [
        (Component::R1, &s.r1),
        (Component::R2, &s.r2),
        (Component::N1, &s.n1),
        (Component::N2, &s.n2),
    ] {
        let (ok, detail, r) = soundness(n, opts);
        push(Premise::ComponentSound(c), ok, detail);
        component_sound.insert(c, r);
    }
    let mut morphism_reports = BTreeMap::new();
    let mut local_condition_reports = BTreeMap::new();
    for side in [Side::Left, Side::Right] {
        let (r, n, phi) = s.parts(side);
        let m = match Morphism::new(r.net(), n.net(), phi.clone()) {
            Ok(m) => m,
            Err(e) => {
                push(Premise::Morphism(side), false, e.to_string());
                continue;
            }
        };
        let report = s.morphism_report(side).expect("map already checked");
        push(Premise::Morphism(side), report.valid, if report.valid { String::new() } else { report.to_string() });
        morphism_reports.insert(side, report.clone());
        if !report.valid {
            continue;
        }
        match well_marked_failures(&m) {
            Ok(bad) => push(Premise::WellMarked(side), bad.is_empty(), bad.join(", ")),
            Err(e) => push(Premise::WellMarked(side), false, e.to_string()),
        }
        match check_local_condition(&m) {
            Ok(l) => {
                push(
                    Premise::LocalCondition(side),
                    l.holds,
                    if l.holds { String::new() } else { l.to_string() },
                );
                local_condition_reports.insert(side, l);
            }
            Err(e) => push(Premise::LocalCondition(side), false, e.to_string()),
        }
    }
    let mut interface_sound = None;
    match s.interface() {
        Ok(c) => {
            push(Premise::InterfaceComposable, true, String::new());
            let (ok, detail, r) = soundness(&c.result, opts);
            push(Premise::InterfaceSound, ok, detail);
            interface_sound = r;
        }
        Err(e) => push(Premise::InterfaceComposable, false, e.to_string()),
    }
    // Both refinement steps: the left component against the interface, then
    // the right component against `r1 ⊛ n2`.
    match intermediate_refinement(s, Side::Left) {
        Ok(i) => push(Premise::Intermediate(Side::Left), i.is_valid(), intermediate_detail(&i)),
        Err(e) => push(Premise::Intermediate(Side::Left), false, e.to_string()),
    }
    let second = RefinementScenario {
        r1: s.r1.clone(),
        r2: s.r2.clone(),
        n1: s.r1.clone(),
        n2: s.n2.clone(),
        phi1: s.r1.net().node_names().map(|x| (x.to_string(), x.to_string())).collect(),
        phi2: s.phi2.clone(),
    };
    match intermediate_refinement(&second, Side::Right) {
        Ok(i) => push(Premise::Intermediate(Side::Right), i.is_valid(), intermediate_detail(&i)),
        Err(e) => push(Premise::Intermediate(Side::Right), false, e.to_string()),
    }
    let conclusion = if premises.iter().all(|p| p.holds) {
        Conclusion::Certified
    } else {
        Conclusion::Uncertified
    };
    let audit = if audit {
        s.system().ok().and_then(|c| check_soundness(c.result.gwf(), opts).ok())
    } else {
        None
    };
    Certificate {
        premises,
        interface_sound,
        component_sound,
        morphism_reports,
        local_condition_reports,
        conclusion,
        audit,
    }
}

fn intermediate_detail(i: &Intermediate) -> String {
    let mut parts = Vec::new();
    if !i.report.valid {
        parts.push(i.report.to_string());
    }
    parts.extend(i.arc_failures.iter().cloned());
    parts.join("\n")
}

/// The net obtained by substituting both refinements into the interface,
/// with its maps onto the two intermediate refinements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedComposition {
    pub net: LgwfNet,
    pub to_left: NodeMap,
    pub to_right: NodeMap,
    /// Isomorphism onto the direct composition `r1 ⊛ r2`.
    pub iso: NodeMap,
}

/// Substitutes refined places and transitions of both sides into the
/// interface, pairing the refined copies of synchronised transitions, and
/// checks that both routes to the interface agree on every node.
pub fn compose_refinements(left: &Intermediate, right: &Intermediate) -> Result<RefinedComposition, RefineError> {
    if left.side != Side::Left || right.side != Side::Right || left.interface.result != right.interface.result {
        return Err(RefineError::DifferentInterfaces);
    }
    let (lc, rc) = (&left.composition, &right.composition);
    let (ln, rn) = (lc.result.net(), rc.result.net());
    let (l_idx, r_idx) = (index(lc), index(rc));
    let interface = &left.interface;
    let mut b = PetriNet::builder();
    let mut labels = Labels::default();
    let mut to_left = NodeMap::new();
    let mut to_right = NodeMap::new();
    let mut fin = Marking::new();

    for c in interface.result.k().keys() {
        if !ln.is_place(c) || !rn.is_place(c) {
            return Err(RefineError::Unmappable(c.clone()));
        }
        b.place(c.clone());
        labels.k.insert(c.clone(), c.clone());
        to_left.insert(c.clone(), c.clone());
        to_right.insert(c.clone(), c.clone());
    }

    // Refined left nodes come from r1 ⊛ n2, refined right nodes from n1 ⊛ r2.
    let own = |c: &Composition, is_left: bool| -> BTreeSet<String> {
        c.provenance
            .iter()
            .filter(|(_, o)| match o {
                Origin::Left(_) => is_left,
                Origin::Right(_) => !is_left,
                _ => false,
            })
            .map(|(x, _)| x.clone())
            .collect()
    };
    let (own_l, own_r) = (own(lc, true), own(rc, false));
    for is_left in [true, false] {
        let (comp, src, mine, map, other_idx) = if is_left {
            (&lc.result, ln, &own_l, &left.map, &r_idx)
        } else {
            (&rc.result, rn, &own_r, &right.map, &l_idx)
        };
        for x in mine {
            if src.is_place(x) {
                b.place(x.clone());
                if src.initial().get(x) > 0 {
                    b.tokens(x.clone(), src.initial().get(x));
                }
                if comp.final_marking().get(x) > 0 {
                    fin.set(x.clone(), comp.final_marking().get(x));
                }
            } else {
                b.transition(x.clone());
                if let Some(l) = comp.h().get(x) {
                    labels.h.insert(x.clone(), l.clone());
                }
                let keep = |p: &String| mine.contains(p) || comp.k().contains_key(p);
                for p in src.preset(x)?.into_iter().filter(keep) {
                    b.arc(p, x.clone());
                }
                for p in src.postset(x)?.into_iter().filter(keep) {
                    b.arc(x.clone(), p);
                }
            }
            // The node itself in its own intermediate; in the other one, the
            // node with the same interface origin as its image.
            let o = &interface.provenance[&map[x]];
            let there = other_idx.get(o).cloned().ok_or_else(|| RefineError::Unmappable(x.clone()))?;
            if is_left {
                to_left.insert(x.clone(), x.clone());
                to_right.insert(x.clone(), there);
            } else {
                to_right.insert(x.clone(), x.clone());
                to_left.insert(x.clone(), there);
            }
        }
    }

    // Synchronised pairs: refined copies from both sides with a common
    // interface transition.
    let syncs = |c: &Composition, map: &NodeMap, y: &String, is_left: bool| -> Vec<(String, String)> {
        c.provenance
            .iter()
            .filter_map(|(x, o)| match o {
                Origin::Sync(a, b) if &map[x] == y => Some((x.clone(), if is_left { a.clone() } else { b.clone() })),
                _ => None,
            })
            .collect()
    };
    for (y, o) in &interface.provenance {
        if !matches!(o, Origin::Sync(_, _)) {
            continue;
        }
        for (xl, t1) in syncs(lc, &left.map, y, true) {
            for (xr, t2) in syncs(rc, &right.map, y, false) {
                let t = format!("({t1},{t2})");
                b.transition(t.clone());
                labels.ell.insert(t.clone(), lc.result.ell()[&xl].clone());
                for p in ln.preset(&xl)?.into_iter().filter(|p| own_l.contains(p)) {
                    b.arc(p, t.clone());
                }
                for p in ln.postset(&xl)?.into_iter().filter(|p| own_l.contains(p)) {
                    b.arc(t.clone(), p);
                }
                for p in rn.preset(&xr)?.into_iter().filter(|p| own_r.contains(p)) {
                    b.arc(p, t.clone());
                }
                for p in rn.postset(&xr)?.into_iter().filter(|p| own_r.contains(p)) {
                    b.arc(t.clone(), p);
                }
                to_left.insert(t.clone(), xl.clone());
                to_right.insert(t, xr);
            }
        }
    }
    let net = b.build().map_err(|e| RefineError::InvalidResult(e.to_string()))?;
    let g = check_gwf(net, fin).map_err(|e| RefineError::InvalidResult(e.to_string()))?;
    let first = lc.result.name().split('+').next().unwrap_or_default();
    let second = rc.result.name().rsplit('+').next().unwrap_or_default();
    let n = validate_lgwf(format!("{first}+{second}"), g, labels)
        .map_err(|e| RefineError::InvalidResult(e.to_string()))?;

    for x in n.net().node_names() {
        if left.map[&to_left[x]] != right.map[&to_right[x]] {
            return Err(RefineError::NonCommutingDiagram(x.to_string()));
        }
    }
    Ok(RefinedComposition {
        iso: NodeMap::new(),
        net: n,
        to_left,
        to_right,
    })
}

/// Substitutes both refinements and checks the result against the direct
/// composition `r1 ⊛ r2`.
pub fn refine_both(s: &RefinementScenario) -> Result<RefinedComposition, RefineError> {
    let left = intermediate_refinement(s, Side::Left)?;
    let right = intermediate_refinement(s, Side::Right)?;
    let mut out = compose_refinements(&left, &right)?;
    let direct = s.system()?;
    out.iso = isomorphism(&out.net, &direct.result).ok_or(RefineError::NotIsomorphic)?;
    Ok(out)
}
