//! Asynchronous-synchronous composition of labeled workflow nets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::labeled::{validate_lgwf, AsyncLabel, Labels, LgwfNet};
use crate::marking::Marking;
use crate::net::PetriNet;
use crate::workflow::check_gwf;

/// Where a node of a composition comes from. Component node names are the
/// names in the input nets, before any renaming.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Origin {
    Left(String),
    Right(String),
    Channel(String),
    Sync(String, String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Left(x) => write!(f, "left:{x}"),
            Origin::Right(x) => write!(f, "right:{x}"),
            Origin::Channel(c) => write!(f, "channel:{c}"),
            Origin::Sync(a, b) => write!(f, "sync:({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub result: LgwfNet,
    pub provenance: BTreeMap<String, Origin>,
    /// Right-component nodes renamed to avoid collisions: original to new.
    pub renamed: BTreeMap<String, String>,
    /// Places removed by P-simplification, keyed by the place kept.
    pub merged: BTreeMap<String, Vec<String>>,
    /// Origins of the places removed by P-simplification.
    pub absorbed: BTreeMap<String, Origin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComposeOptions {
    /// Rename colliding right-component nodes by appending `'`.
    pub auto_prefix: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("components share node names: {}", .0.join(", "))]
    ComponentsNotDisjoint(Vec<String>),
    #[error("generated node name {0} collides with a component node")]
    NameCollision(String),
    #[error("composition is not a labeled workflow net: {0}")]
    InvalidResult(String),
    #[error("projection of {sequence:?} is not a firing sequence of the {side} component")]
    NotReachable { side: &'static str, sequence: Vec<String> },
}

fn sync_name(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

fn node_names(n: &LgwfNet) -> BTreeSet<String> {
    n.net().node_names().map(str::to_string).collect()
}

/// Renames every node of a labeled net through `f`.
pub fn rename(n: &LgwfNet, f: impl Fn(&str) -> String) -> Result<LgwfNet, ComposeError> {
    let net = n.net();
    let mut b = PetriNet::builder();
    for p in net.places() {
        b.place(f(p));
    }
    for t in net.transitions() {
        b.transition(f(t));
    }
    for (x, y) in net.arcs() {
        b.arc(f(&x), f(&y));
    }
    for (p, c) in net.initial().iter() {
        b.tokens(f(p), c);
    }
    let built = b.build().map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let g = check_gwf(built, n.final_marking().map_places(&f))
        .map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let labels = Labels {
        h: n.h().iter().map(|(t, l)| (f(t), l.clone())).collect(),
        ell: n.ell().iter().map(|(t, s)| (f(t), s.clone())).collect(),
        k: n.k().iter().map(|(p, c)| (f(p), c.clone())).collect(),
    };
    validate_lgwf(n.name(), g, labels).map_err(|e| ComposeError::InvalidResult(e.to_string()))
}

/// `n1 ⊛ n2`.
///
/// Channel places of the components are dropped and one place per channel
/// with both a sender and a receiver in the union is created, named by the
/// channel. Transitions with equal synchronous labels are paired and named
/// `(t1,t2)`; synchronously labeled transitions without a partner vanish.
pub fn as_compose(n1: &LgwfNet, n2: &LgwfNet, opts: ComposeOptions) -> Result<Composition, ComposeError> {
    let left_names = node_names(n1);
    let clash: Vec<String> = node_names(n2).intersection(&left_names).cloned().collect();
    let mut renamed = BTreeMap::new();
    let right = if clash.is_empty() {
        n2.clone()
    } else if opts.auto_prefix {
        let mut taken = left_names.clone();
        taken.extend(node_names(n2));
        for x in node_names(n2) {
            if left_names.contains(&x) {
                let mut y = format!("{x}'");
                while taken.contains(&y) {
                    y.push('\'');
                }
                taken.insert(y.clone());
                renamed.insert(x, y);
            }
        }
        rename(n2, |x| renamed.get(x).cloned().unwrap_or_else(|| x.to_string()))?
    } else {
        return Err(ComposeError::ComponentsNotDisjoint(clash));
    };
    let back: BTreeMap<String, String> = renamed.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    let orig = |x: &str| back.get(x).cloned().unwrap_or_else(|| x.to_string());

    let (a, b) = (n1.net(), right.net());
    let mut provenance: BTreeMap<String, Origin> = BTreeMap::new();
    let mut nb = PetriNet::builder();
    let mut labels = Labels::default();

    // Channels with complementary labels in the union.
    let all_h: Vec<&AsyncLabel> = n1.h().values().chain(right.h().values()).collect();
    let channels: BTreeSet<String> = all_h
        .iter()
        .filter(|l| all_h.contains(&&l.complement()))
        .map(|l| l.channel.clone())
        .collect();

    for p in a.places().iter().filter(|p| !n1.k().contains_key(*p)) {
        nb.place(p.clone());
        provenance.insert(p.clone(), Origin::Left(p.clone()));
    }
    for p in b.places().iter().filter(|p| !right.k().contains_key(*p)) {
        nb.place(p.clone());
        provenance.insert(p.clone(), Origin::Right(orig(p)));
    }
    for c in &channels {
        if provenance.contains_key(c) {
            return Err(ComposeError::NameCollision(c.clone()));
        }
        nb.place(c.clone());
        labels.k.insert(c.clone(), c.clone());
        provenance.insert(c.clone(), Origin::Channel(c.clone()));
    }

    let async_side = |n: &LgwfNet, side: fn(String) -> Origin, nb: &mut crate::net::NetBuilder,
                      labels: &mut Labels,
                      provenance: &mut BTreeMap<String, Origin>|
     -> Result<(), ComposeError> {
        let net = n.net();
        for t in net.transitions().iter().filter(|t| !n.ell().contains_key(*t)) {
            if provenance.contains_key(t) {
                return Err(ComposeError::NameCollision(t.clone()));
            }
            nb.transition(t.clone());
            provenance.insert(t.clone(), side(orig(t)));
            for p in net.preset(t).unwrap().iter().filter(|p| !n.k().contains_key(*p)) {
                nb.arc(p.clone(), t.clone());
            }
            for p in net.postset(t).unwrap().iter().filter(|p| !n.k().contains_key(*p)) {
                nb.arc(t.clone(), p.clone());
            }
            if let Some(l) = n.h().get(t) {
                labels.h.insert(t.clone(), l.clone());
                if channels.contains(&l.channel) {
                    if l.is_send() {
                        nb.arc(t.clone(), l.channel.clone());
                    } else {
                        nb.arc(l.channel.clone(), t.clone());
                    }
                }
            }
        }
        Ok(())
    };
    async_side(n1, Origin::Left, &mut nb, &mut labels, &mut provenance)?;
    async_side(&right, Origin::Right, &mut nb, &mut labels, &mut provenance)?;

    for (t1, s1) in n1.ell() {
        for (t2, s2) in right.ell() {
            if s1 != s2 {
                continue;
            }
            let t = sync_name(t1, t2);
            if provenance.contains_key(&t) {
                return Err(ComposeError::NameCollision(t));
            }
            nb.transition(t.clone());
            for p in a.preset(t1).unwrap().iter().filter(|p| !n1.k().contains_key(*p)) {
                nb.arc(p.clone(), t.clone());
            }
            for p in a.postset(t1).unwrap().iter().filter(|p| !n1.k().contains_key(*p)) {
                nb.arc(t.clone(), p.clone());
            }
            for p in b.preset(t2).unwrap().iter().filter(|p| !right.k().contains_key(*p)) {
                nb.arc(p.clone(), t.clone());
            }
            for p in b.postset(t2).unwrap().iter().filter(|p| !right.k().contains_key(*p)) {
                nb.arc(t.clone(), p.clone());
            }
            labels.ell.insert(t.clone(), s1.clone());
            provenance.insert(t, Origin::Sync(t1.clone(), orig(t2)));
        }
    }

    for p in a.initial().support().chain(b.initial().support()) {
        nb.mark(p);
    }
    let fin = n1.final_marking().union_set(right.final_marking());
    let net = nb.build().map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let g = check_gwf(net, fin).map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let name = format!("{}+{}", n1.name(), n2.name());
    let result = validate_lgwf(name, g, labels).map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    Ok(Composition {
        result,
        provenance,
        renamed,
        merged: BTreeMap::new(),
        absorbed: BTreeMap::new(),
    })
}

/// Preset, postset, initial and final tokens.
type PlaceSignature = (BTreeSet<String>, BTreeSet<String>, u32, u32);

/// Merges unlabeled places with equal presets, postsets and marking
/// membership until the net is P-simple. The lexicographically smallest
/// name of each class is kept.
pub fn p_simplify(c: &Composition) -> Result<Composition, ComposeError> {
    let n = &c.result;
    let net = n.net();
    let mut classes: BTreeMap<PlaceSignature, Vec<String>> = BTreeMap::new();
    for p in net.places().iter().filter(|p| !n.k().contains_key(*p)) {
        let key = (
            net.preset(p).unwrap(),
            net.postset(p).unwrap(),
            net.initial().get(p),
            n.final_marking().get(p),
        );
        classes.entry(key).or_default().push(p.clone());
    }
    let mut merged = c.merged.clone();
    let mut drop = BTreeSet::new();
    for ps in classes.into_values().filter(|ps| ps.len() > 1) {
        let keep = ps[0].clone();
        drop.extend(ps[1..].iter().cloned());
        merged.entry(keep).or_default().extend(ps[1..].iter().cloned());
    }
    if drop.is_empty() {
        return Ok(c.clone());
    }
    let mut b = PetriNet::builder();
    for p in net.places().iter().filter(|p| !drop.contains(*p)) {
        b.place(p.clone());
    }
    for t in net.transitions() {
        b.transition(t.clone());
    }
    for (x, y) in net.arcs() {
        if !drop.contains(&x) && !drop.contains(&y) {
            b.arc(x, y);
        }
    }
    for (p, k) in net.initial().iter().filter(|(p, _)| !drop.contains(*p)) {
        b.tokens(p, k);
    }
    let built = b.build().map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let fin = n.final_marking().restrict(|p| !drop.contains(p));
    let g = check_gwf(built, fin).map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let result = validate_lgwf(n.name(), g, n.labels().clone())
        .map_err(|e| ComposeError::InvalidResult(e.to_string()))?;
    let (provenance, mut absorbed): (BTreeMap<_, _>, BTreeMap<_, _>) = c
        .provenance
        .clone()
        .into_iter()
        .partition(|(x, _)| !drop.contains(x));
    absorbed.extend(c.absorbed.clone());
    Ok(Composition {
        result,
        provenance,
        renamed: c.renamed.clone(),
        merged,
        absorbed,
    })
}

/// A composition marking split into its component and channel parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub left: Marking,
    pub right: Marking,
    pub channels: Marking,
}

/// Projects a composition marking onto the two components (in their own
/// node names) and the channel places. Places removed by P-simplification
/// receive the tokens of the place they were merged into.
pub fn decompose_marking(c: &Composition, m: &Marking) -> Decomposition {
    let mut d = Decomposition {
        left: Marking::new(),
        right: Marking::new(),
        channels: Marking::new(),
    };
    for (p, n) in m.iter() {
        let extra = c.merged.get(p).into_iter().flatten();
        for o in c.provenance.get(p).into_iter().chain(extra.filter_map(|q| c.absorbed.get(q))) {
            match o {
                Origin::Left(x) => d.left.add(x.clone(), n),
                Origin::Right(x) => d.right.add(x.clone(), n),
                Origin::Channel(_) => d.channels.add(p, n),
                Origin::Sync(..) => {}
            }
        }
    }
    d
}

/// Splits a composition firing sequence into the component sequences.
pub fn project_sequence<S: AsRef<str>>(c: &Composition, seq: &[S]) -> (Vec<String>, Vec<String>) {
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for t in seq {
        match c.provenance.get(t.as_ref()) {
            Some(Origin::Left(x)) => l.push(x.clone()),
            Some(Origin::Right(x)) => r.push(x.clone()),
            Some(Origin::Sync(a, b)) => {
                l.push(a.clone());
                r.push(b.clone());
            }
            _ => {}
        }
    }
    (l, r)
}

/// Decomposes the marking reached by `seq` and confirms that the projected
/// sequences fire in the components. The returned component markings are
/// the full markings reached there, channel places of the components
/// included; their restriction to non-channel places equals the projection.
pub fn decompose_verified<S: AsRef<str>>(
    c: &Composition,
    n1: &LgwfNet,
    n2: &LgwfNet,
    seq: &[S],
) -> Result<Decomposition, ComposeError> {
    let m = c
        .result
        .net()
        .replay(c.result.net().initial(), seq)
        .map_err(|_| ComposeError::NotReachable {
            side: "composed",
            sequence: seq.iter().map(|s| s.as_ref().to_string()).collect(),
        })?;
    let d = decompose_marking(c, &m);
    let (l, r) = project_sequence(c, seq);
    let m1 = n1
        .net()
        .replay(n1.net().initial(), &l)
        .map_err(|_| ComposeError::NotReachable { side: "left", sequence: l.clone() })?;
    let m2 = n2
        .net()
        .replay(n2.net().initial(), &r)
        .map_err(|_| ComposeError::NotReachable { side: "right", sequence: r.clone() })?;
    if m1.restrict(|p| !n1.k().contains_key(p)) != d.left {
        return Err(ComposeError::NotReachable { side: "left", sequence: l });
    }
    if m2.restrict(|p| !n2.k().contains_key(p)) != d.right {
        return Err(ComposeError::NotReachable { side: "right", sequence: r });
    }
    Ok(Decomposition {
        left: m1,
        right: m2,
        channels: d.channels,
    })
}

/// Flattens a possibly nested synchronisation name `((a,b),c)` into its
/// sorted leaves.
pub fn sync_leaves(name: &str) -> Vec<String> {
    fn go(s: &str, out: &mut Vec<String>) {
        let inner = s
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .filter(|r| balanced(r));
        let Some(inner) = inner else {
            out.push(s.to_string());
            return;
        };
        let mut depth = 0;
        let mut start = 0;
        for (i, ch) in inner.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    go(&inner[start..i], out);
                    start = i + 1;
                }
                _ => {}
            }
        }
        go(&inner[start..], out);
    }
    // Nesting never closes early and some comma sits at the top level.
    fn balanced(s: &str) -> bool {
        let mut depth = 0i32;
        let mut top_comma = false;
        for ch in s.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => top_comma = true,
                _ => {}
            }
            if depth < 0 {
                return false;
            }
        }
        depth == 0 && top_comma
    }
    let mut out = Vec::new();
    go(name, &mut out);
    out.sort();
    out
}

/// Renames every synchronised transition to the flat sorted tuple of its
/// leaves, so that compositions differing only in the order or nesting of
/// pairing compare equal.
pub fn canonical_sync_names(n: &LgwfNet) -> Result<LgwfNet, ComposeError> {
    rename(n, |x| {
        let leaves = sync_leaves(x);
        if leaves.len() > 1 {
            format!("({})", leaves.join(","))
        } else {
            x.to_string()
        }
    })
}

/// Equality of nets, final markings and labelings after canonical renaming
/// of synchronised transitions; net names are ignored.
pub fn equal_up_to_sync_order(a: &LgwfNet, b: &LgwfNet) -> Result<bool, ComposeError> {
    let a = canonical_sync_names(a)?;
    let b = canonical_sync_names(b)?;
    Ok(a.gwf() == b.gwf() && a.labels() == b.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeled::LgwfBuilder;

    fn exchange() -> (LgwfNet, LgwfNet) {
        let n1 = LgwfBuilder::new("N1")
            .initial("i1")
            .place("p1")
            .place("p2")
            .final_place("o1")
            .send("a", "x")
            .receive("c", "y")
            .sync("b", "s")
            .path(&["i1", "a", "p1", "c", "p2", "b", "o1"])
            .build()
            .unwrap();
        let n2 = LgwfBuilder::new("N2")
            .initial("i2")
            .place("q1")
            .place("q2")
            .final_place("o2")
            .receive("d", "x")
            .send("e", "y")
            .sync("f", "s")
            .path(&["i2", "d", "q1", "e", "q2", "f", "o2"])
            .build()
            .unwrap();
        (n1, n2)
    }

    #[test]
    fn exchange_composition() {
        let (n1, n2) = exchange();
        let c = as_compose(&n1, &n2, ComposeOptions::default()).unwrap();
        let net = c.result.net();
        assert!(net.is_place("x") && net.is_place("y"));
        assert!(net.is_transition("(b,f)"));
        assert!(!net.is_transition("b") && !net.is_transition("f"));
        assert!(net.has_arc("a", "x") && net.has_arc("x", "d"));
        assert!(net.has_arc("e", "y") && net.has_arc("y", "c"));
        assert_eq!(c.result.k().get("x").map(String::as_str), Some("x"));
        assert_eq!(c.result.ell().get("(b,f)").map(String::as_str), Some("s"));
        assert!(!net.is_p_simple());
        assert_eq!(c.provenance["(b,f)"], Origin::Sync("b".into(), "f".into()));
        let s = p_simplify(&c).unwrap();
        assert!(s.result.net().is_p_simple());
        assert!(s.result.net().is_place("o1") && !s.result.net().is_place("o2"));
        assert_eq!(s.merged["o1"], vec!["o2".to_string()]);
    }

    #[test]
    fn disjoint_union_without_labels() {
        let a = LgwfBuilder::new("A").initial("s").final_place("f").transition("t").path(&["s", "t", "f"]).build().unwrap();
        let b = LgwfBuilder::new("B").initial("s2").final_place("f2").transition("u").path(&["s2", "u", "f2"]).build().unwrap();
        let c = as_compose(&a, &b, ComposeOptions::default()).unwrap();
        assert_eq!(c.result.net().places().len(), 4);
        assert!(c.result.k().is_empty() && c.result.ell().is_empty());
    }

    #[test]
    fn sender_without_receiver_gets_no_channel() {
        let a = LgwfBuilder::new("A").initial("s").final_place("f").send("t", "c").path(&["s", "t", "f"]).build().unwrap();
        let b = LgwfBuilder::new("B").initial("s2").final_place("f2").transition("u").path(&["s2", "u", "f2"]).build().unwrap();
        let c = as_compose(&a, &b, ComposeOptions::default()).unwrap();
        assert!(!c.result.net().is_place("c"));
        assert_eq!(c.result.h()["t"].to_string(), "c!");
    }

    #[test]
    fn collisions() {
        let (n1, _) = exchange();
        assert!(matches!(
            as_compose(&n1, &n1, ComposeOptions::default()),
            Err(ComposeError::ComponentsNotDisjoint(_))
        ));
        let c = as_compose(&n1, &n1, ComposeOptions { auto_prefix: true }).unwrap();
        assert_eq!(c.renamed["a"], "a'");
        assert!(c.result.net().is_transition("(b,b')"));
        assert_eq!(c.provenance["a'"], Origin::Right("a".into()));
    }

    #[test]
    fn decomposition_of_exchange() {
        let (n1, n2) = exchange();
        let c = as_compose(&n1, &n2, ComposeOptions::default()).unwrap();
        let d = decompose_marking(&c, c.result.net().initial());
        assert_eq!(d.left, Marking::from_places(["i1"]));
        assert_eq!(d.right, Marking::from_places(["i2"]));
        assert!(d.channels.is_empty());
        let v = decompose_verified(&c, &n1, &n2, &["a"]).unwrap();
        assert_eq!(v.channels, Marking::from_places(["x"]));
        assert_eq!(v.left, Marking::from_places(["p1"]));
        let s = p_simplify(&c).unwrap();
        let seq = ["a", "d", "e", "c", "(b,f)"];
        let v = decompose_verified(&s, &n1, &n2, &seq).unwrap();
        assert_eq!(v.left, Marking::from_places(["o1"]));
        assert_eq!(v.right, Marking::from_places(["o2"]));
    }

    #[test]
    fn leaves_flatten() {
        assert_eq!(sync_leaves("((b,a),c)"), vec!["a", "b", "c"]);
        assert_eq!(sync_leaves("(x,(z,y))"), vec!["x", "y", "z"]);
        assert_eq!(sync_leaves("plain"), vec!["plain"]);
    }

    #[test]
    fn commutes_on_exchange() {
        let (n1, n2) = exchange();
        let ab = as_compose(&n1, &n2, ComposeOptions::default()).unwrap();
        let ba = as_compose(&n2, &n1, ComposeOptions::default()).unwrap();
        assert!(equal_up_to_sync_order(&ab.result, &ba.result).unwrap());
    }
}
