//! Place/transition nets: structure, firing rule and structural predicates.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::marking::Marking;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("invalid node name {0:?}")]
    InvalidName(String),
    #[error("node {0} is declared twice")]
    DuplicateNode(String),
    #[error("node {0} not found")]
    NodeNotFound(String),
    #[error("arc {from} -> {to} must connect a place and a transition")]
    ArcKind { from: String, to: String },
    #[error("node {0} is isolated")]
    IsolatedNode(String),
    #[error("transition {0} has an empty preset")]
    EmptyPreset(String),
    #[error("transition {0} has an empty postset")]
    EmptyPostset(String),
    #[error("self-loop between place {place} and transition {transition}")]
    SelfLoop { place: String, transition: String },
    #[error("marking refers to {0}, which is not a place of the net")]
    MarkingOutsideNet(String),
    #[error("{0} is not a transition")]
    NotATransition(String),
    #[error("transition {transition} is not enabled at {marking}")]
    NotEnabled { transition: String, marking: Marking },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Place,
    Transition,
}

/// Index handle into one particular [`PetriNet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Place(usize),
    Transition(usize),
}

impl Node {
    pub fn kind(self) -> NodeKind {
        match self {
            Node::Place(_) => NodeKind::Place,
            Node::Transition(_) => NodeKind::Transition,
        }
    }
}

/// Accumulates declarations; [`NetBuilder::build`] enforces the net class.
#[derive(Debug, Clone, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: BTreeSet<(String, String)>,
    initial: Marking,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: impl Into<String>) -> &mut Self {
        self.places.push(name.into());
        self
    }

    pub fn transition(&mut self, name: impl Into<String>) -> &mut Self {
        self.transitions.push(name.into());
        self
    }

    pub fn arc(&mut self, from: impl Into<String>, to: impl Into<String>) -> &mut Self {
        self.arcs.insert((from.into(), to.into()));
        self
    }

    /// Adds `count` initial tokens to `place`.
    pub fn tokens(&mut self, place: impl Into<String>, count: u32) -> &mut Self {
        self.initial.add(place, count);
        self
    }

    pub fn mark(&mut self, place: impl Into<String>) -> &mut Self {
        self.tokens(place, 1)
    }

    pub fn build(&self) -> Result<PetriNet, NetError> {
        let mut places = self.places.clone();
        let mut transitions = self.transitions.clone();
        places.sort();
        transitions.sort();
        let mut index = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            check_name(p)?;
            if index.insert(p.clone(), Node::Place(i)).is_some() {
                return Err(NetError::DuplicateNode(p.clone()));
            }
        }
        for (j, t) in transitions.iter().enumerate() {
            check_name(t)?;
            if index.insert(t.clone(), Node::Transition(j)).is_some() {
                return Err(NetError::DuplicateNode(t.clone()));
            }
        }
        let mut place_pre = vec![Vec::new(); places.len()];
        let mut place_post = vec![Vec::new(); places.len()];
        let mut trans_pre = vec![Vec::new(); transitions.len()];
        let mut trans_post = vec![Vec::new(); transitions.len()];
        for (from, to) in &self.arcs {
            let a = *index
                .get(from)
                .ok_or_else(|| NetError::NodeNotFound(from.clone()))?;
            let b = *index
                .get(to)
                .ok_or_else(|| NetError::NodeNotFound(to.clone()))?;
            match (a, b) {
                (Node::Place(p), Node::Transition(t)) => {
                    place_post[p].push(t);
                    trans_pre[t].push(p);
                }
                (Node::Transition(t), Node::Place(p)) => {
                    trans_post[t].push(p);
                    place_pre[p].push(t);
                }
                _ => {
                    return Err(NetError::ArcKind {
                        from: from.clone(),
                        to: to.clone(),
                    })
                }
            }
        }
        for v in place_pre
            .iter_mut()
            .chain(place_post.iter_mut())
            .chain(trans_pre.iter_mut())
            .chain(trans_post.iter_mut())
        {
            v.sort_unstable();
        }
        for (t, name) in transitions.iter().enumerate() {
            if trans_pre[t].is_empty() && trans_post[t].is_empty() {
                return Err(NetError::IsolatedNode(name.clone()));
            }
            if trans_pre[t].is_empty() {
                return Err(NetError::EmptyPreset(name.clone()));
            }
            if trans_post[t].is_empty() {
                return Err(NetError::EmptyPostset(name.clone()));
            }
            if let Some(&p) = trans_pre[t]
                .iter()
                .find(|p| trans_post[t].binary_search(p).is_ok())
            {
                return Err(NetError::SelfLoop {
                    place: places[p].clone(),
                    transition: name.clone(),
                });
            }
        }
        for (p, name) in places.iter().enumerate() {
            if place_pre[p].is_empty() && place_post[p].is_empty() {
                return Err(NetError::IsolatedNode(name.clone()));
            }
        }
        for (p, _) in self.initial.iter() {
            if !matches!(index.get(p), Some(Node::Place(_))) {
                return Err(NetError::MarkingOutsideNet(p.to_string()));
            }
        }
        Ok(PetriNet {
            places,
            transitions,
            index,
            place_pre,
            place_post,
            trans_pre,
            trans_post,
            initial: self.initial.clone(),
        })
    }
}

fn check_name(name: &str) -> Result<(), NetError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(NetError::InvalidName(name.to_string()));
    }
    Ok(())
}

/// The fragment `N(A)` of a net together with its input and output elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subnet {
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
    pub arcs: BTreeSet<(String, String)>,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
}

/// A marked place/transition net without self-loops, isolated nodes, or
/// transitions with an empty preset or postset.
///
/// Places and transitions are kept in name order, which fixes the dense
/// state layout used by exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    index: HashMap<String, Node>,
    place_pre: Vec<Vec<usize>>,
    place_post: Vec<Vec<usize>>,
    trans_pre: Vec<Vec<usize>>,
    trans_post: Vec<Vec<usize>>,
    initial: Marking,
}

impl PetriNet {
    pub fn builder() -> NetBuilder {
        NetBuilder::new()
    }

    /// A builder pre-filled with this net's declarations.
    pub fn to_builder(&self) -> NetBuilder {
        let mut b = NetBuilder::new();
        for p in &self.places {
            b.place(p.clone());
        }
        for t in &self.transitions {
            b.transition(t.clone());
        }
        for (x, y) in self.arcs() {
            b.arc(x, y);
        }
        b.initial = self.initial.clone();
        b
    }

    /// Same structure with a different initial marking.
    pub fn with_initial(&self, initial: Marking) -> Result<PetriNet, NetError> {
        let mut b = self.to_builder();
        b.initial = initial;
        b.build()
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.places
            .iter()
            .chain(self.transitions.iter())
            .map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    pub fn initial(&self) -> &Marking {
        &self.initial
    }

    pub fn node(&self, name: &str) -> Option<Node> {
        self.index.get(name).copied()
    }

    pub fn kind(&self, name: &str) -> Option<NodeKind> {
        self.node(name).map(Node::kind)
    }

    pub fn is_place(&self, name: &str) -> bool {
        matches!(self.node(name), Some(Node::Place(_)))
    }

    pub fn is_transition(&self, name: &str) -> bool {
        matches!(self.node(name), Some(Node::Transition(_)))
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        match self.node(name)? {
            Node::Place(i) => Some(i),
            Node::Transition(_) => None,
        }
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        match self.node(name)? {
            Node::Transition(i) => Some(i),
            Node::Place(_) => None,
        }
    }

    pub fn node_name(&self, node: Node) -> &str {
        match node {
            Node::Place(i) => &self.places[i],
            Node::Transition(i) => &self.transitions[i],
        }
    }

    /// Input places of transition `t` (by index).
    pub fn pre_t(&self, t: usize) -> &[usize] {
        &self.trans_pre[t]
    }

    pub fn post_t(&self, t: usize) -> &[usize] {
        &self.trans_post[t]
    }

    /// Input transitions of place `p` (by index).
    pub fn pre_p(&self, p: usize) -> &[usize] {
        &self.place_pre[p]
    }

    pub fn post_p(&self, p: usize) -> &[usize] {
        &self.place_post[p]
    }

    pub fn pre_nodes(&self, node: Node) -> Vec<Node> {
        match node {
            Node::Place(p) => self.place_pre[p].iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.trans_pre[t].iter().map(|&p| Node::Place(p)).collect(),
        }
    }

    pub fn post_nodes(&self, node: Node) -> Vec<Node> {
        match node {
            Node::Place(p) => self.place_post[p].iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.trans_post[t].iter().map(|&p| Node::Place(p)).collect(),
        }
    }

    /// All arcs as name pairs, sorted.
    pub fn arcs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (t, name) in self.transitions.iter().enumerate() {
            for &p in &self.trans_pre[t] {
                out.push((self.places[p].clone(), name.clone()));
            }
            for &p in &self.trans_post[t] {
                out.push((name.clone(), self.places[p].clone()));
            }
        }
        out.sort();
        out
    }

    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        match (self.node(from), self.node(to)) {
            (Some(Node::Place(p)), Some(Node::Transition(t))) => {
                self.trans_pre[t].binary_search(&p).is_ok()
            }
            (Some(Node::Transition(t)), Some(Node::Place(p))) => {
                self.trans_post[t].binary_search(&p).is_ok()
            }
            _ => false,
        }
    }

    fn lookup(&self, name: &str) -> Result<Node, NetError> {
        self.node(name)
            .ok_or_else(|| NetError::NodeNotFound(name.to_string()))
    }

    fn names(&self, nodes: Vec<Node>) -> BTreeSet<String> {
        nodes
            .into_iter()
            .map(|n| self.node_name(n).to_string())
            .collect()
    }

    pub fn preset(&self, x: &str) -> Result<BTreeSet<String>, NetError> {
        Ok(self.names(self.pre_nodes(self.lookup(x)?)))
    }

    pub fn postset(&self, x: &str) -> Result<BTreeSet<String>, NetError> {
        Ok(self.names(self.post_nodes(self.lookup(x)?)))
    }

    /// Union of the presets of all members of `a`.
    pub fn preset_of<'s>(
        &self,
        a: impl IntoIterator<Item = &'s str>,
    ) -> Result<BTreeSet<String>, NetError> {
        let mut out = BTreeSet::new();
        for x in a {
            out.extend(self.preset(x)?);
        }
        Ok(out)
    }

    pub fn postset_of<'s>(
        &self,
        a: impl IntoIterator<Item = &'s str>,
    ) -> Result<BTreeSet<String>, NetError> {
        let mut out = BTreeSet::new();
        for x in a {
            out.extend(self.postset(x)?);
        }
        Ok(out)
    }

    pub fn neighbourhood(&self, x: &str) -> Result<BTreeSet<String>, NetError> {
        let mut out = self.preset(x)?;
        out.extend(self.postset(x)?);
        Ok(out)
    }

    /// The subnet generated by `a` with its input and output elements.
    pub fn subnet(&self, a: &BTreeSet<String>) -> Result<Subnet, NetError> {
        let mut sub = Subnet {
            places: BTreeSet::new(),
            transitions: BTreeSet::new(),
            arcs: BTreeSet::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
        };
        for x in a {
            let node = self.lookup(x)?;
            match node {
                Node::Place(_) => sub.places.insert(x.clone()),
                Node::Transition(_) => sub.transitions.insert(x.clone()),
            };
            let pre = self.pre_nodes(node);
            let post = self.post_nodes(node);
            if pre.is_empty() || pre.iter().any(|&y| !a.contains(self.node_name(y))) {
                sub.inputs.insert(x.clone());
            }
            if post.is_empty() || post.iter().any(|&y| !a.contains(self.node_name(y))) {
                sub.outputs.insert(x.clone());
            }
            for y in post {
                let yn = self.node_name(y);
                if a.contains(yn) {
                    sub.arcs.insert((x.clone(), yn.to_string()));
                }
            }
        }
        Ok(sub)
    }

    /// Dense token vector in place-index order.
    pub fn state_of(&self, m: &Marking) -> Result<Vec<u32>, NetError> {
        let mut s = vec![0; self.places.len()];
        for (p, n) in m.iter() {
            let i = self
                .place_index(p)
                .ok_or_else(|| NetError::MarkingOutsideNet(p.to_string()))?;
            s[i] = n;
        }
        Ok(s)
    }

    pub fn marking_of(&self, state: &[u32]) -> Marking {
        state
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (self.places[i].clone(), n))
            .collect()
    }

    pub fn initial_state(&self) -> Vec<u32> {
        self.state_of(&self.initial)
            .expect("initial marking validated at construction")
    }

    pub fn enabled_in(&self, state: &[u32], t: usize) -> bool {
        self.trans_pre[t].iter().all(|&p| state[p] >= 1)
    }

    /// Fires `t` on a dense state; the caller guarantees enabledness.
    pub fn fire_in(&self, state: &[u32], t: usize) -> Vec<u32> {
        let mut next = state.to_vec();
        for &p in &self.trans_pre[t] {
            next[p] -= 1;
        }
        for &p in &self.trans_post[t] {
            next[p] += 1;
        }
        next
    }

    fn transition_arg(&self, t: &str) -> Result<usize, NetError> {
        match self.lookup(t)? {
            Node::Transition(j) => Ok(j),
            Node::Place(_) => Err(NetError::NotATransition(t.to_string())),
        }
    }

    pub fn enabled(&self, m: &Marking, t: &str) -> Result<bool, NetError> {
        let j = self.transition_arg(t)?;
        Ok(self.trans_pre[j]
            .iter()
            .all(|&p| m.get(&self.places[p]) >= 1))
    }

    /// `m − •t + t•`.
    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking, NetError> {
        if !self.enabled(m, t)? {
            return Err(NetError::NotEnabled {
                transition: t.to_string(),
                marking: m.clone(),
            });
        }
        let j = self.transition_arg(t)?;
        let mut next = m.clone();
        for &p in &self.trans_pre[j] {
            let p = &self.places[p];
            next.set(p.clone(), next.get(p) - 1);
        }
        for &p in &self.trans_post[j] {
            next.add(self.places[p].clone(), 1);
        }
        Ok(next)
    }

    /// Fires a whole sequence from `m`, failing at the first disabled step.
    pub fn replay<S: AsRef<str>>(&self, m: &Marking, seq: &[S]) -> Result<Marking, NetError> {
        seq.iter()
            .try_fold(m.clone(), |cur, t| self.fire(&cur, t.as_ref()))
    }

    /// Transitions enabled at `m`, in name order.
    pub fn enabled_transitions(&self, m: &Marking) -> Vec<&str> {
        self.transitions
            .iter()
            .filter(|t| self.enabled(m, t).unwrap_or(false))
            .map(String::as_str)
            .collect()
    }

    /// No two distinct places share both preset and postset.
    pub fn is_p_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        (0..self.places.len()).all(|p| seen.insert((&self.place_pre[p], &self.place_post[p])))
    }

    fn forward_closure(&self, from: Node) -> BTreeSet<Node> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for y in self.post_nodes(x) {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    fn backward_closure(&self, from: Node) -> BTreeSet<Node> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for y in self.pre_nodes(x) {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// `(x, y) ∈ F*` (reflexive).
    pub fn causal(&self, x: &str, y: &str) -> Result<bool, NetError> {
        let a = self.lookup(x)?;
        let b = self.lookup(y)?;
        Ok(self.forward_closure(a).contains(&b))
    }

    /// Two distinct transitions sharing an input place precede `x` and `y`.
    pub fn conflict(&self, x: &str, y: &str) -> Result<bool, NetError> {
        let past = |n: Node| -> Vec<usize> {
            self.backward_closure(n)
                .into_iter()
                .filter_map(|m| match m {
                    Node::Transition(t) => Some(t),
                    Node::Place(_) => None,
                })
                .collect()
        };
        let px = past(self.lookup(x)?);
        let py = past(self.lookup(y)?);
        Ok(px.iter().any(|&tx| {
            py.iter().any(|&ty| {
                tx != ty
                    && self.trans_pre[tx]
                        .iter()
                        .any(|p| self.trans_pre[ty].binary_search(p).is_ok())
            })
        }))
    }

    /// True when the flow relation has no cycle.
    pub fn is_acyclic(&self) -> bool {
        let all: BTreeSet<String> = self.node_names().map(str::to_string).collect();
        self.is_acyclic_on(&all)
    }

    /// True when the subnet generated by `a` has no cycle.
    pub fn is_acyclic_on(&self, a: &BTreeSet<String>) -> bool {
        // Kahn's algorithm restricted to `a`.
        let nodes: Vec<Node> = a.iter().filter_map(|x| self.node(x)).collect();
        let inside = |n: Node| a.contains(self.node_name(n));
        let mut indeg: HashMap<Node, usize> = nodes
            .iter()
            .map(|&n| (n, self.pre_nodes(n).into_iter().filter(|&m| inside(m)).count()))
            .collect();
        let mut queue: VecDeque<Node> = nodes.iter().copied().filter(|n| indeg[n] == 0).collect();
        let mut removed = 0;
        while let Some(n) = queue.pop_front() {
            removed += 1;
            for m in self.post_nodes(n) {
                if let Some(d) = indeg.get_mut(&m) {
                    *d -= 1;
                    if *d == 0 {
                        queue.push_back(m);
                    }
                }
            }
        }
        removed == nodes.len()
    }
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

    fn choice() -> PetriNet {
        PetriNet::builder()
            .place("s")
            .place("f")
            .transition("t1")
            .transition("t2")
            .arc("s", "t1")
            .arc("s", "t2")
            .arc("t1", "f")
            .arc("t2", "f")
            .mark("s")
            .build()
            .unwrap()
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn presets_and_postsets() {
        let n = chain();
        assert_eq!(n.preset("t").unwrap(), set(&["s"]));
        assert!(n.preset("s").unwrap().is_empty());
        assert_eq!(n.postset("t").unwrap(), set(&["f"]));
        assert!(n.postset("f").unwrap().is_empty());
        assert_eq!(n.preset("nope"), Err(NetError::NodeNotFound("nope".into())));

        let join = PetriNet::builder()
            .place("p1")
            .place("p2")
            .place("q")
            .transition("t")
            .arc("p1", "t")
            .arc("p2", "t")
            .arc("t", "q")
            .build()
            .unwrap();
        assert_eq!(join.preset("t").unwrap(), set(&["p1", "p2"]));
        let c = choice();
        assert_eq!(c.postset_of(["t1", "t2"]).unwrap(), set(&["f"]));
        assert_eq!(c.postset_of(["s", "t1"]).unwrap(), set(&["t1", "t2", "f"]));
    }

    #[test]
    fn subnet_inputs_outputs() {
        let n = chain();
        let all = n.subnet(&set(&["s", "t", "f"])).unwrap();
        assert_eq!(all.inputs, set(&["s"]));
        assert_eq!(all.outputs, set(&["f"]));
        assert_eq!(all.arcs.len(), 2);

        let tf = n.subnet(&set(&["t", "f"])).unwrap();
        assert_eq!(tf.inputs, set(&["t"]));
        assert_eq!(tf.outputs, set(&["f"]));

        let s = n.subnet(&set(&["s"])).unwrap();
        assert_eq!(s.inputs, set(&["s"]));
        assert_eq!(s.outputs, set(&["s"]));
        assert!(n.subnet(&set(&["zz"])).is_err());
    }

    #[test]
    fn firing_rule() {
        let n = chain();
        let m = Marking::from_places(["s"]);
        assert!(n.enabled(&m, "t").unwrap());
        assert!(!n.enabled(&Marking::new(), "t").unwrap());
        assert_eq!(n.fire(&m, "t").unwrap(), Marking::from_places(["f"]));
        assert!(matches!(
            n.fire(&Marking::new(), "t"),
            Err(NetError::NotEnabled { .. })
        ));
        assert_eq!(n.enabled(&m, "s"), Err(NetError::NotATransition("s".into())));

        let fork = PetriNet::builder()
            .place("p")
            .place("q")
            .place("r")
            .transition("t")
            .arc("p", "t")
            .arc("t", "q")
            .arc("t", "r")
            .build()
            .unwrap();
        assert_eq!(
            fork.fire(&Marking::from_places(["p"]), "t").unwrap(),
            Marking::from_places(["q", "r"])
        );

        let consumer = PetriNet::builder()
            .place("c")
            .place("o")
            .transition("t")
            .arc("c", "t")
            .arc("t", "o")
            .build()
            .unwrap();
        let mut two = Marking::new();
        two.add("c", 2);
        let after = consumer.fire(&two, "t").unwrap();
        assert_eq!(after.get("c"), 1);
        assert_eq!(after.get("o"), 1);

        let join = PetriNet::builder()
            .place("p1")
            .place("p2")
            .place("q")
            .transition("t")
            .arc("p1", "t")
            .arc("p2", "t")
            .arc("t", "q")
            .build()
            .unwrap();
        assert!(!join.enabled(&Marking::from_places(["p1"]), "t").unwrap());
    }

    #[test]
    fn construction_rejects_excluded_shapes() {
        let self_loop = PetriNet::builder()
            .place("p")
            .place("q")
            .transition("t")
            .arc("p", "t")
            .arc("t", "p")
            .arc("t", "q")
            .build();
        assert!(matches!(self_loop, Err(NetError::SelfLoop { .. })));

        let isolated = PetriNet::builder()
            .place("p")
            .place("lonely")
            .place("q")
            .transition("t")
            .arc("p", "t")
            .arc("t", "q")
            .build();
        assert_eq!(isolated, Err(NetError::IsolatedNode("lonely".into())));

        let no_post = PetriNet::builder()
            .place("p")
            .transition("t")
            .arc("p", "t")
            .build();
        assert_eq!(no_post, Err(NetError::EmptyPostset("t".into())));

        let bad_arc = PetriNet::builder()
            .place("p")
            .place("q")
            .arc("p", "q")
            .build();
        assert!(matches!(bad_arc, Err(NetError::ArcKind { .. })));

        let dup = PetriNet::builder().place("x").transition("x").build();
        assert_eq!(dup, Err(NetError::DuplicateNode("x".into())));

        let bad_name = PetriNet::builder().place("a b").build();
        assert!(matches!(bad_name, Err(NetError::InvalidName(_))));
    }

    #[test]
    fn p_simplicity() {
        assert!(chain().is_p_simple());
        let parallel = PetriNet::builder()
            .place("s")
            .place("a")
            .place("b")
            .place("f")
            .transition("t")
            .transition("u")
            .arc("s", "t")
            .arc("t", "a")
            .arc("t", "b")
            .arc("a", "u")
            .arc("b", "u")
            .arc("u", "f")
            .build()
            .unwrap();
        assert!(!parallel.is_p_simple());
    }

    #[test]
    fn causality_and_conflict() {
        let n = chain();
        assert!(n.causal("s", "f").unwrap());
        assert!(!n.causal("f", "s").unwrap());
        assert!(n.causal("t", "t").unwrap());
        let c = choice();
        assert!(c.conflict("t1", "t2").unwrap());
        assert!(!c.conflict("t1", "t1").unwrap());
        assert!(!n.conflict("s", "f").unwrap());
    }

    #[test]
    fn acyclicity() {
        assert!(chain().is_acyclic());
        let cyc = PetriNet::builder()
            .place("p")
            .place("q")
            .transition("a")
            .transition("b")
            .arc("p", "a")
            .arc("a", "q")
            .arc("q", "b")
            .arc("b", "p")
            .build()
            .unwrap();
        assert!(!cyc.is_acyclic());
        assert!(cyc.is_acyclic_on(&set(&["p", "a", "q"])));
    }
}
