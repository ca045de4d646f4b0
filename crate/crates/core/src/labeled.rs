//! Labeled workflow nets: asynchronous send/receive labels, synchronous
//! labels and channel places.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::marking::Marking;
use crate::net::PetriNet;
use crate::workflow::{check_gwf, GwfNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    Send,
    Receive,
}

/// `c!` or `c?` for a channel `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AsyncLabel {
    pub channel: String,
    pub direction: Direction,
}

impl AsyncLabel {
    pub fn send(channel: impl Into<String>) -> Self {
        Self {
            channel: channel.into(),
            direction: Direction::Send,
        }
    }

    pub fn receive(channel: impl Into<String>) -> Self {
        Self {
            channel: channel.into(),
            direction: Direction::Receive,
        }
    }

    pub fn channel_of(&self) -> &str {
        &self.channel
    }

    pub fn complement(&self) -> Self {
        Self {
            channel: self.channel.clone(),
            direction: match self.direction {
                Direction::Send => Direction::Receive,
                Direction::Receive => Direction::Send,
            },
        }
    }

    pub fn is_send(&self) -> bool {
        self.direction == Direction::Send
    }
}

impl fmt::Display for AsyncLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::Send => '!',
            Direction::Receive => '?',
        };
        write!(f, "{}{d}", self.channel)
    }
}

impl Serialize for AsyncLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid asynchronous label {0:?}")]
pub struct ParseLabelError(pub String);

impl FromStr for AsyncLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLabelError(s.to_string());
        let (channel, last) = s.split_at(s.len().checked_sub(1).ok_or_else(err)?);
        if !is_token(channel) {
            return Err(err());
        }
        match last {
            "!" => Ok(Self::send(channel)),
            "?" => Ok(Self::receive(channel)),
            _ => Err(err()),
        }
    }
}

pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

/// The three labelings of a net, before validation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    /// Transition to asynchronous action.
    pub h: BTreeMap<String, AsyncLabel>,
    /// Transition to synchronous activity.
    pub ell: BTreeMap<String, String>,
    /// Place to channel name.
    pub k: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum LabelClause {
    /// A labeling refers to a missing node or to a node of the wrong kind.
    Domain,
    /// A transition carries both an asynchronous and a synchronous label.
    DisjointDomains,
    /// Two places carry the same channel label.
    Injective,
    /// A sender and a receiver of a channel are not wired through its place.
    ChannelConnection,
    /// A channel place has an empty or wrongly labeled preset or postset.
    ChannelPlace,
    /// A channel place belongs to the initial or final marking.
    ChannelMarked,
    /// A channel name coincides with a synchronous label, or a label is not
    /// a token.
    Namespace,
}

impl fmt::Display for LabelClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelClause::Domain => "label domain",
            LabelClause::DisjointDomains => "2 (async and sync domains disjoint)",
            LabelClause::Injective => "3 (channel labeling injective)",
            LabelClause::ChannelConnection => "3a (complementary transitions wired through channel)",
            LabelClause::ChannelPlace => "3b (channel place neighbourhood)",
            LabelClause::ChannelMarked => "channel place in initial or final marking",
            LabelClause::Namespace => "label namespace",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelViolation {
    pub clause: LabelClause,
    pub nodes: Vec<String>,
}

impl fmt::Display for LabelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {} [{}]", self.clause, self.nodes.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("labeling violates {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Violations(Vec<LabelViolation>),
}

/// A workflow net together with validated labelings `h`, `ℓ` and `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LgwfNet {
    name: String,
    gwf: GwfNet,
    labels: Labels,
}

impl LgwfNet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gwf(&self) -> &GwfNet {
        &self.gwf
    }

    pub fn net(&self) -> &PetriNet {
        self.gwf.net()
    }

    pub fn final_marking(&self) -> &Marking {
        self.gwf.final_marking()
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn h(&self) -> &BTreeMap<String, AsyncLabel> {
        &self.labels.h
    }

    pub fn ell(&self) -> &BTreeMap<String, String> {
        &self.labels.ell
    }

    pub fn k(&self) -> &BTreeMap<String, String> {
        &self.labels.k
    }

    /// The place labeled with channel `c`, if any.
    pub fn channel_place(&self, c: &str) -> Option<&str> {
        self.labels
            .k
            .iter()
            .find(|(_, ch)| ch.as_str() == c)
            .map(|(p, _)| p.as_str())
    }

    /// Channel names occurring in `h`.
    pub fn channels(&self) -> BTreeSet<&str> {
        self.labels.h.values().map(|l| l.channel_of()).collect()
    }

    pub fn sync_labels(&self) -> BTreeSet<&str> {
        self.labels.ell.values().map(String::as_str).collect()
    }

    /// The underlying workflow net with all labels erased.
    pub fn underlying(&self) -> GwfNet {
        self.gwf.clone()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn into_parts(self) -> (String, GwfNet, Labels) {
        (self.name, self.gwf, self.labels)
    }

    /// Same net and labels, labels re-validated.
    pub fn revalidate(&self) -> Result<LgwfNet, LabelError> {
        validate_lgwf(self.name.clone(), self.gwf.clone(), self.labels.clone())
    }
}

/// Convenience for nets without labels.
pub fn unlabeled(name: impl Into<String>, gwf: GwfNet) -> LgwfNet {
    LgwfNet {
        name: name.into(),
        gwf,
        labels: Labels::default(),
    }
}

/// Checks the labeling axioms and returns every violated clause.
pub fn label_violations(g: &GwfNet, labels: &Labels) -> Vec<LabelViolation> {
    let net = g.net();
    let mut out = Vec::new();
    let mut push = |clause, nodes: Vec<String>| {
        if !nodes.is_empty() {
            out.push(LabelViolation { clause, nodes });
        }
    };

    let bad_h: Vec<String> = labels.h.keys().filter(|t| !net.is_transition(t)).cloned().collect();
    let bad_ell: Vec<String> = labels.ell.keys().filter(|t| !net.is_transition(t)).cloned().collect();
    let bad_k: Vec<String> = labels.k.keys().filter(|p| !net.is_place(p)).cloned().collect();
    push(
        LabelClause::Domain,
        bad_h.into_iter().chain(bad_ell).chain(bad_k).collect(),
    );

    let names: Vec<String> = labels
        .h
        .values()
        .map(|l| l.channel.clone())
        .chain(labels.ell.values().cloned())
        .chain(labels.k.values().cloned())
        .filter(|s| !is_token(s))
        .collect();
    push(LabelClause::Namespace, names);
    let chans: BTreeSet<&str> = labels
        .h
        .values()
        .map(|l| l.channel_of())
        .chain(labels.k.values().map(String::as_str))
        .collect();
    let clash: Vec<String> = labels
        .ell
        .iter()
        .filter(|(_, s)| chans.contains(s.as_str()))
        .map(|(t, _)| t.clone())
        .collect();
    push(LabelClause::Namespace, clash);

    let both: Vec<String> = labels.h.keys().filter(|t| labels.ell.contains_key(*t)).cloned().collect();
    push(LabelClause::DisjointDomains, both);

    let mut by_channel: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (p, c) in &labels.k {
        by_channel.entry(c).or_default().push(p.clone());
    }
    for ps in by_channel.values().filter(|ps| ps.len() > 1) {
        push(LabelClause::Injective, ps.clone());
    }

    for (t1, l1) in labels.h.iter().filter(|(_, l)| l.is_send()) {
        for (t2, _) in labels.h.iter().filter(|(_, l)| **l == l1.complement()) {
            let wired = labels.k.iter().any(|(p, c)| {
                *c == l1.channel && net.has_arc(t1, p) && net.has_arc(p, t2)
            });
            if !wired {
                push(LabelClause::ChannelConnection, vec![t1.clone(), t2.clone()]);
            }
        }
    }

    for (p, c) in labels.k.iter().filter(|(p, _)| net.is_place(p)) {
        let pre = net.preset(p).unwrap_or_default();
        let post = net.postset(p).unwrap_or_default();
        let send = AsyncLabel::send(c.clone());
        let recv = AsyncLabel::receive(c.clone());
        let pre_ok = !pre.is_empty() && pre.iter().all(|t| labels.h.get(t) == Some(&send));
        let post_ok = !post.is_empty() && post.iter().all(|t| labels.h.get(t) == Some(&recv));
        if !pre_ok || !post_ok {
            push(LabelClause::ChannelPlace, vec![p.clone()]);
        }
        if g.initial().get(p) > 0 || g.final_marking().get(p) > 0 {
            push(LabelClause::ChannelMarked, vec![p.clone()]);
        }
    }
    out
}

pub fn validate_lgwf(
    name: impl Into<String>,
    g: GwfNet,
    labels: Labels,
) -> Result<LgwfNet, LabelError> {
    let v = label_violations(&g, &labels);
    if v.is_empty() {
        Ok(LgwfNet {
            name: name.into(),
            gwf: g,
            labels,
        })
    } else {
        Err(LabelError::Violations(v))
    }
}

/// Builds a net, a workflow net and a labeled net in one step.
#[derive(Debug, Clone, Default)]
pub struct LgwfBuilder {
    name: String,
    net: crate::net::NetBuilder,
    final_places: Vec<String>,
    labels: Labels,
    declared: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
    #[error(transparent)]
    Workflow(#[from] crate::workflow::WorkflowError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

impl LgwfBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Declares a place; repeated declarations of the same name are merged.
    pub fn place(&mut self, p: &str) -> &mut Self {
        if self.declared.insert(p.to_string()) {
            self.net.place(p);
        }
        self
    }

    pub fn initial(&mut self, p: &str) -> &mut Self {
        self.place(p);
        self.net.mark(p);
        self
    }

    pub fn final_place(&mut self, p: &str) -> &mut Self {
        self.place(p);
        self.final_places.push(p.to_string());
        self
    }

    pub fn channel(&mut self, p: &str, c: &str) -> &mut Self {
        self.place(p);
        self.labels.k.insert(p.to_string(), c.to_string());
        self
    }

    /// Declares a transition; repeated declarations are merged.
    pub fn transition(&mut self, t: &str) -> &mut Self {
        if self.declared.insert(t.to_string()) {
            self.net.transition(t);
        }
        self
    }

    pub fn send(&mut self, t: &str, c: &str) -> &mut Self {
        self.transition(t);
        self.labels.h.insert(t.to_string(), AsyncLabel::send(c));
        self
    }

    pub fn receive(&mut self, t: &str, c: &str) -> &mut Self {
        self.transition(t);
        self.labels.h.insert(t.to_string(), AsyncLabel::receive(c));
        self
    }

    pub fn sync(&mut self, t: &str, s: &str) -> &mut Self {
        self.transition(t);
        self.labels.ell.insert(t.to_string(), s.to_string());
        self
    }

    pub fn arc(&mut self, a: &str, b: &str) -> &mut Self {
        self.net.arc(a, b);
        self
    }

    /// Arcs along a path `x0 -> x1 -> ... -> xn`.
    pub fn path(&mut self, nodes: &[&str]) -> &mut Self {
        for w in nodes.windows(2) {
            self.net.arc(w[0], w[1]);
        }
        self
    }

    pub fn build(&self) -> Result<LgwfNet, BuildError> {
        let net = self.net.build()?;
        let g = check_gwf(net, Marking::from_places(self.final_places.iter().cloned()))?;
        Ok(validate_lgwf(self.name.clone(), g, self.labels.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parsing_and_complement() {
        let l: AsyncLabel = "x!".parse().unwrap();
        assert_eq!(l.channel_of(), "x");
        assert_eq!(l.complement().to_string(), "x?");
        assert_eq!(l.complement().complement(), l);
        assert!("!".parse::<AsyncLabel>().is_err());
        assert!("x".parse::<AsyncLabel>().is_err());
    }

    fn wired() -> LgwfBuilder {
        let mut b = LgwfBuilder::new("n");
        b.initial("s")
            .place("m")
            .final_place("f")
            .channel("hp", "h")
            .send("t1", "h")
            .receive("t2", "h")
            .path(&["s", "t1", "m", "t2", "f"])
            .path(&["t1", "hp", "t2"]);
        b
    }

    #[test]
    fn wired_channel_is_valid() {
        let n = wired().build().unwrap();
        assert_eq!(n.channel_place("h"), Some("hp"));
        assert!(n.revalidate().is_ok());
    }

    #[test]
    fn lone_sender_needs_no_channel() {
        let n = LgwfBuilder::new("n")
            .initial("s")
            .final_place("f")
            .send("t", "f")
            .path(&["s", "t", "f"])
            .build()
            .unwrap();
        assert!(n.k().is_empty());
    }

    #[test]
    fn disjoint_domains() {
        let mut b = wired();
        b.sync("t1", "s");
        let Err(BuildError::Label(LabelError::Violations(v))) = b.build() else {
            panic!("expected label violation")
        };
        assert!(v
            .iter()
            .any(|x| x.clause == LabelClause::DisjointDomains && x.nodes == vec!["t1".to_string()]));
    }

    #[test]
    fn missing_channel_place() {
        let r = LgwfBuilder::new("n")
            .initial("s")
            .place("m")
            .final_place("f")
            .send("t1", "h")
            .receive("t2", "h")
            .path(&["s", "t1", "m", "t2", "f"])
            .build();
        let Err(BuildError::Label(LabelError::Violations(v))) = r else {
            panic!("expected label violation")
        };
        assert_eq!(v[0].clause, LabelClause::ChannelConnection);
    }

    #[test]
    fn namespace_clash() {
        let mut b = wired();
        b.sync("u", "h").path(&["s", "u", "f"]);
        let Err(BuildError::Label(LabelError::Violations(v))) = b.build() else {
            panic!("expected label violation")
        };
        assert!(v.iter().any(|x| x.clause == LabelClause::Namespace));
    }

    #[test]
    fn underlying_drops_labels() {
        let n = wired().build().unwrap();
        let g = n.underlying();
        assert_eq!(g.net(), n.net());
        let bare = unlabeled("n", g);
        assert!(bare.h().is_empty() && bare.ell().is_empty() && bare.k().is_empty());
    }
}
