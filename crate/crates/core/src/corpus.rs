//! Random generators for nets, composable components and refinement
//! scenarios.
//!
//! Abstract nets are block structured (sequence, exclusive choice and
//! parallel blocks between an entry and an exit place), hence sound and
//! state machine decomposable. Refined nets are derived from abstract ones
//! by refinement moves so that the abstraction map exists by construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::labeled::{validate_lgwf, AsyncLabel, Labels, LgwfNet};
use crate::marking::Marking;
use crate::morphism::NodeMap;
use crate::net::PetriNet;
use crate::refine::RefinementScenario;
use crate::workflow::{check_gwf, GwfNet};

/// An editable labeled net.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Draft {
    pub prefix: String,
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
    pub arcs: BTreeSet<(String, String)>,
    pub init: BTreeSet<String>,
    pub fin: BTreeSet<String>,
    pub h: BTreeMap<String, AsyncLabel>,
    pub ell: BTreeMap<String, String>,
    counter: usize,
}

impl Draft {
    pub fn new(prefix: &str) -> Self {
        Self {
            prefix: prefix.to_string(),
            ..Self::default()
        }
    }

    fn fresh(&mut self, kind: &str) -> String {
        loop {
            self.counter += 1;
            let x = format!("{}{}{}", self.prefix, kind, self.counter);
            if !self.places.contains(&x) && !self.transitions.contains(&x) {
                return x;
            }
        }
    }

    pub fn place(&mut self) -> String {
        let p = self.fresh("p");
        self.places.insert(p.clone());
        p
    }

    pub fn transition(&mut self) -> String {
        let t = self.fresh("t");
        self.transitions.insert(t.clone());
        t
    }

    pub fn arc(&mut self, a: &str, b: &str) {
        self.arcs.insert((a.to_string(), b.to_string()));
    }

    pub fn preset(&self, x: &str) -> BTreeSet<String> {
        self.arcs.iter().filter(|(_, b)| b == x).map(|(a, _)| a.clone()).collect()
    }

    pub fn postset(&self, x: &str) -> BTreeSet<String> {
        self.arcs.iter().filter(|(a, _)| a == x).map(|(_, b)| b.clone()).collect()
    }

    /// `entry -> t -> exit`.
    pub fn step(&mut self, entry: &str, exit: &str) -> String {
        let t = self.transition();
        self.arc(entry, &t);
        self.arc(&t, exit);
        t
    }

    /// A random block between `entry` and `exit` with at most `budget`
    /// additional places.
    pub fn block(&mut self, rng: &mut StdRng, entry: &str, exit: &str, budget: usize) {
        let roll = rng.gen_range(0..10);
        if budget == 0 || roll < 3 {
            self.step(entry, exit);
        } else if roll < 6 {
            let mid = self.place();
            let left = rng.gen_range(0..budget);
            self.block(rng, entry, &mid, left);
            self.block(rng, &mid, exit, budget - 1 - left);
        } else if roll < 8 {
            let left = rng.gen_range(0..=budget);
            self.block(rng, entry, exit, left);
            self.block(rng, entry, exit, budget - left);
        } else if budget >= 4 {
            let split = self.step_from(entry);
            let join = self.step_into(exit);
            let rest = budget - 4;
            let left = rng.gen_range(0..=rest);
            for share in [left, rest - left] {
                let (q, r) = (self.place(), self.place());
                self.arc(&split, &q);
                self.arc(&r, &join);
                self.block(rng, &q, &r, share);
            }
        } else {
            self.step(entry, exit);
        }
    }

    fn step_from(&mut self, entry: &str) -> String {
        let t = self.transition();
        self.arc(entry, &t);
        t
    }

    fn step_into(&mut self, exit: &str) -> String {
        let t = self.transition();
        self.arc(&t, exit);
        t
    }

    pub fn remove(&mut self, x: &str) {
        self.places.remove(x);
        self.transitions.remove(x);
        self.init.remove(x);
        self.fin.remove(x);
        self.h.remove(x);
        self.ell.remove(x);
        self.arcs.retain(|(a, b)| a != x && b != x);
    }

    pub fn net(&self) -> Result<PetriNet, String> {
        let mut b = PetriNet::builder();
        for p in &self.places {
            b.place(p.clone());
        }
        for t in &self.transitions {
            b.transition(t.clone());
        }
        for (x, y) in &self.arcs {
            b.arc(x.clone(), y.clone());
        }
        for p in &self.init {
            b.mark(p.clone());
        }
        b.build().map_err(|e| e.to_string())
    }

    pub fn gwf(&self) -> Result<GwfNet, String> {
        check_gwf(self.net()?, Marking::from_places(self.fin.iter().cloned())).map_err(|e| e.to_string())
    }

    pub fn lgwf(&self, name: &str) -> Result<LgwfNet, String> {
        let labels = Labels {
            h: self.h.clone(),
            ell: self.ell.clone(),
            k: BTreeMap::new(),
        };
        validate_lgwf(name, self.gwf()?, labels).map_err(|e| e.to_string())
    }

    pub fn from_lgwf(prefix: &str, n: &LgwfNet) -> Self {
        let net = n.net();
        Self {
            prefix: prefix.to_string(),
            places: net.places().iter().cloned().collect(),
            transitions: net.transitions().iter().cloned().collect(),
            arcs: net.arcs().into_iter().collect(),
            init: net.initial().support().map(str::to_string).collect(),
            fin: n.final_marking().support().map(str::to_string).collect(),
            h: n.h().clone(),
            ell: n.ell().clone(),
            counter: net.node_count(),
        }
    }
}

/// A sound state machine decomposable workflow net with a single initial
/// and a single final place.
pub fn process_tree(rng: &mut StdRng, prefix: &str, budget: usize) -> Draft {
    let mut d = Draft::new(prefix);
    let (i, o) = (d.place(), d.place());
    d.init.insert(i.clone());
    d.fin.insert(o.clone());
    d.block(rng, &i, &o, budget);
    d
}

/// A random workflow net with at most `max_nodes` nodes: a block-structured
/// net, possibly with two initial places, perturbed by extra arcs. Such nets
/// are frequently unsound or unbounded.
pub fn random_gwf(rng: &mut StdRng, max_nodes: usize) -> GwfNet {
    loop {
        let mut d = Draft::new("");
        let two = rng.gen_bool(0.3);
        let budget = rng.gen_range(0..=3);
        let (i, o) = (d.place(), d.place());
        d.init.insert(i.clone());
        d.fin.insert(o.clone());
        d.block(rng, &i, &o, budget);
        if two {
            let (i2, o2) = (d.place(), d.place());
            d.init.insert(i2.clone());
            d.fin.insert(o2.clone());
            if rng.gen_bool(0.5) {
                d.step(&i2, &o2);
            } else {
                let t = d.transition();
                d.arc(&i2, &t);
                d.arc(&t, &o2);
                let ts: Vec<String> = d.transitions.iter().filter(|x| **x != t).cloned().collect();
                let u = ts.choose(rng).unwrap().clone();
                let q = d.place();
                d.arc(&t, &q);
                d.arc(&q, &u);
            }
        }
        for _ in 0..rng.gen_range(0..=3) {
            let ps: Vec<String> = d.places.iter().cloned().collect();
            let ts: Vec<String> = d.transitions.iter().cloned().collect();
            let p = ps.choose(rng).unwrap().clone();
            let t = ts.choose(rng).unwrap().clone();
            if rng.gen_bool(0.5) {
                if !d.init.contains(&p) && !d.arcs.contains(&(p.clone(), t.clone())) {
                    d.arc(&t, &p);
                }
            } else if !d.fin.contains(&p) && !d.arcs.contains(&(t.clone(), p.clone())) {
                d.arc(&p, &t);
            }
        }
        if d.places.len() + d.transitions.len() > max_nodes {
            continue;
        }
        if let Ok(g) = d.gwf() {
            return g;
        }
    }
}

/// A refinement move applied to a draft, tracking the abstraction map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Replaces a place by a block between a fresh entry and exit place.
    RefinePlace,
    /// Replaces a place by a choice between two exit places, duplicating
    /// each transition of its postset once per exit place.
    SplitExit,
    /// Duplicates a transition.
    SplitTransition,
}

/// Applies a random move. `phi` maps the nodes of `d` to abstract nodes and
/// is updated in place. Returns the move applied, if any was applicable.
pub fn apply_move(rng: &mut StdRng, d: &mut Draft, phi: &mut NodeMap) -> Option<Move> {
    let mv = *[Move::RefinePlace, Move::RefinePlace, Move::SplitExit, Move::SplitTransition]
        .choose(rng)
        .unwrap();
    match mv {
        Move::RefinePlace => {
            let ps: Vec<String> = d.places.iter().cloned().collect();
            let p = ps.choose(rng)?.clone();
            let (a, b) = (d.place(), d.place());
            let budget = rng.gen_range(0..=3);
            let before: BTreeSet<String> = d.places.union(&d.transitions).cloned().collect();
            d.block(rng, &a, &b, budget);
            for t in d.preset(&p) {
                d.arc(&t, &a);
            }
            for t in d.postset(&p) {
                d.arc(&b, &t);
            }
            if d.init.contains(&p) {
                d.init.insert(a.clone());
            }
            if d.fin.contains(&p) {
                d.fin.insert(b.clone());
            }
            let target = phi[&p].clone();
            d.remove(&p);
            phi.remove(&p);
            let after: BTreeSet<String> = d.places.union(&d.transitions).cloned().collect();
            for x in after.difference(&before).chain([&a, &b]) {
                phi.insert(x.clone(), target.clone());
            }
        }
        Move::SplitExit => {
            let ps: Vec<String> = d.places.iter().filter(|p| !d.fin.contains(*p)).cloned().collect();
            let p = ps.choose(rng)?.clone();
            let target = phi[&p].clone();
            let entry = d.place();
            let exits = [d.place(), d.place()];
            for u in &exits {
                let t = d.step(&entry, u);
                phi.insert(t, target.clone());
                phi.insert(u.clone(), target.clone());
            }
            phi.insert(entry.clone(), target.clone());
            for t in d.preset(&p) {
                d.arc(&t, &entry);
            }
            if d.init.contains(&p) {
                d.init.insert(entry.clone());
            }
            for t in d.postset(&p) {
                for u in &exits {
                    let c = d.transition();
                    for x in d.preset(&t) {
                        d.arc(if x == p { u } else { &x }, &c);
                    }
                    for x in d.postset(&t) {
                        d.arc(&c, &x);
                    }
                    if let Some(l) = d.h.get(&t).cloned() {
                        d.h.insert(c.clone(), l);
                    }
                    if let Some(s) = d.ell.get(&t).cloned() {
                        d.ell.insert(c.clone(), s);
                    }
                    phi.insert(c, phi[&t].clone());
                }
                d.remove(&t);
                phi.remove(&t);
            }
            d.remove(&p);
            phi.remove(&p);
        }
        Move::SplitTransition => {
            let ts: Vec<String> = d.transitions.iter().cloned().collect();
            let t = ts.choose(rng)?.clone();
            let c = d.transition();
            for x in d.preset(&t) {
                d.arc(&x, &c);
            }
            for x in d.postset(&t) {
                d.arc(&c, &x);
            }
            if let Some(l) = d.h.get(&t).cloned() {
                d.h.insert(c.clone(), l);
            }
            if let Some(s) = d.ell.get(&t).cloned() {
                d.ell.insert(c.clone(), s);
            }
            phi.insert(c, phi[&t].clone());
        }
    }
    Some(mv)
}

fn identity(d: &Draft) -> NodeMap {
    d.places.iter().chain(&d.transitions).map(|x| (x.clone(), x.clone())).collect()
}

/// A refined net, its abstraction and the map between them.
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub refined: GwfNet,
    pub abstracted: GwfNet,
    pub map: NodeMap,
    pub moves: Vec<Move>,
}

/// Draws an abstract block-structured net, occasionally perturbed by an
/// extra arc, and refines it by one to three moves. The map is not
/// validated here.
pub fn abstraction(rng: &mut StdRng) -> Abstraction {
    loop {
        let budget = rng.gen_range(1..=4);
        let mut abs = process_tree(rng, "x", budget);
        if rng.gen_bool(0.2) {
            let ps: Vec<String> = abs.places.iter().filter(|p| !abs.init.contains(*p)).cloned().collect();
            let ts: Vec<String> = abs.transitions.iter().cloned().collect();
            let (p, t) = (ps.choose(rng).unwrap().clone(), ts.choose(rng).unwrap().clone());
            if !abs.arcs.contains(&(p.clone(), t.clone())) {
                abs.arc(&t, &p);
            }
        }
        let Ok(abstracted) = abs.gwf() else { continue };
        let mut d = abs.clone();
        d.prefix = "y".into();
        let mut map = identity(&d);
        let mut moves = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            if let Some(m) = apply_move(rng, &mut d, &mut map) {
                moves.push(m);
            }
        }
        let Ok(refined) = d.gwf() else { continue };
        return Abstraction {
            refined,
            abstracted,
            map,
            moves,
        };
    }
}

/// Shape options for generated communicating components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOptions {
    /// Allow a sender to skip a message its partner waits for.
    pub optional_send: bool,
    pub max_places: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            optional_send: false,
            max_places: 12,
        }
    }
}

struct Components {
    drafts: Vec<Draft>,
    cursors: Vec<String>,
    channels: usize,
    syncs: usize,
}

impl Components {
    fn new(prefixes: &[&str]) -> Self {
        let mut drafts = Vec::new();
        let mut cursors = Vec::new();
        for p in prefixes {
            let mut d = Draft::new(p);
            let i = d.place();
            d.init.insert(i.clone());
            drafts.push(d);
            cursors.push(i);
        }
        Self {
            drafts,
            cursors,
            channels: 0,
            syncs: 0,
        }
    }

    fn advance(&mut self, i: usize) -> (String, String) {
        let next = self.drafts[i].place();
        let prev = std::mem::replace(&mut self.cursors[i], next.clone());
        (prev, next)
    }

    fn channel(&mut self) -> String {
        self.channels += 1;
        format!("c{}", self.channels)
    }

    fn sync(&mut self) -> String {
        self.syncs += 1;
        format!("s{}", self.syncs)
    }

    fn local(&mut self, rng: &mut StdRng, i: usize) {
        let (a, b) = self.advance(i);
        let budget = rng.gen_range(0..=2);
        let d = &mut self.drafts[i];
        d.block(rng, &a, &b, budget);
    }

    fn message(&mut self, i: usize, j: usize) {
        let c = self.channel();
        let (a, b) = self.advance(i);
        let t = self.drafts[i].step(&a, &b);
        self.drafts[i].h.insert(t, AsyncLabel::send(&c));
        let (a, b) = self.advance(j);
        let t = self.drafts[j].step(&a, &b);
        self.drafts[j].h.insert(t, AsyncLabel::receive(&c));
    }

    fn message_choice(&mut self, i: usize, j: usize) {
        let (c1, c2) = (self.channel(), self.channel());
        let (a, b) = self.advance(i);
        let (x, y) = self.advance(j);
        for c in [c1, c2] {
            let t = self.drafts[i].step(&a, &b);
            self.drafts[i].h.insert(t, AsyncLabel::send(&c));
            let t = self.drafts[j].step(&x, &y);
            self.drafts[j].h.insert(t, AsyncLabel::receive(&c));
        }
    }

    fn optional_send(&mut self, i: usize, j: usize) {
        let c = self.channel();
        let (a, b) = self.advance(i);
        let t = self.drafts[i].step(&a, &b);
        self.drafts[i].h.insert(t, AsyncLabel::send(&c));
        self.drafts[i].step(&a, &b);
        let (a, b) = self.advance(j);
        let t = self.drafts[j].step(&a, &b);
        self.drafts[j].h.insert(t, AsyncLabel::receive(&c));
    }

    /// All of `who` synchronise on one fresh label.
    fn sync_all(&mut self, who: &[usize]) {
        let s = self.sync();
        for &i in who {
            let (a, b) = self.advance(i);
            let t = self.drafts[i].step(&a, &b);
            self.drafts[i].ell.insert(t, s.clone());
        }
    }

    /// `who` agree on one of two fresh labels.
    fn sync_choice(&mut self, who: &[usize]) {
        let (s1, s2) = (self.sync(), self.sync());
        for &i in who {
            let (a, b) = self.advance(i);
            for s in [&s1, &s2] {
                let t = self.drafts[i].step(&a, &b);
                self.drafts[i].ell.insert(t, s.clone());
            }
        }
    }

    /// `who` may synchronise on a fresh label or skip it independently.
    fn optional_sync(&mut self, who: &[usize]) {
        let s = self.sync();
        for &i in who {
            let (a, b) = self.advance(i);
            let t = self.drafts[i].step(&a, &b);
            self.drafts[i].ell.insert(t, s.clone());
            self.drafts[i].step(&a, &b);
        }
    }

    fn places(&self) -> usize {
        self.drafts.iter().map(|d| d.places.len()).max().unwrap_or(0)
    }

    fn finish(mut self, names: &[&str]) -> Vec<LgwfNet> {
        for (d, c) in self.drafts.iter_mut().zip(self.cursors.iter_mut()) {
            if d.init.contains(c) {
                let o = d.place();
                d.step(c, &o);
                *c = o;
            }
            d.fin.insert(c.clone());
        }
        self.drafts
            .iter()
            .zip(names)
            .map(|(d, n)| d.lgwf(n).expect("generated component is a labeled workflow net"))
            .collect()
    }
}

/// Two communicating components with channels only across them. Without
/// `optional_send` the composition is sound by construction.
pub fn random_pair(rng: &mut StdRng, opts: PairOptions) -> (LgwfNet, LgwfNet) {
    let mut c = Components::new(&["a", "b"]);
    let steps = rng.gen_range(1..=5);
    for _ in 0..steps {
        if c.places() + 4 > opts.max_places {
            break;
        }
        let (i, j) = if rng.gen_bool(0.5) { (0, 1) } else { (1, 0) };
        match rng.gen_range(0..if opts.optional_send { 7 } else { 6 }) {
            0 => c.local(rng, i),
            1 | 2 => c.message(i, j),
            3 => c.message_choice(i, j),
            4 => c.sync_all(&[0, 1]),
            5 => c.sync_choice(&[0, 1]),
            _ => c.optional_send(i, j),
        }
    }
    let mut v = c.finish(&["A", "B"]);
    let b = v.pop().unwrap();
    (v.pop().unwrap(), b)
}

/// Three components. With `three_way`, synchronisation labels are shared by
/// all three; otherwise each label is shared by one pair only and sits on
/// an optional branch.
pub fn random_triple(rng: &mut StdRng, three_way: bool) -> [LgwfNet; 3] {
    let mut c = Components::new(&["a", "b", "e"]);
    for _ in 0..rng.gen_range(2..=5) {
        if c.places() + 4 > 12 {
            break;
        }
        let mut who = [0, 1, 2];
        who.shuffle(rng);
        let (i, j) = (who[0], who[1]);
        match rng.gen_range(0..5) {
            0 => c.local(rng, i),
            1 => c.message(i, j),
            2 => c.message_choice(i, j),
            _ if three_way => {
                if rng.gen_bool(0.5) {
                    c.sync_all(&[0, 1, 2])
                } else {
                    c.sync_choice(&[0, 1, 2])
                }
            }
            _ => {
                let mut pair = [i, j];
                pair.sort_unstable();
                c.optional_sync(&pair)
            }
        }
    }
    let v = c.finish(&["A", "B", "C"]);
    [v[0].clone(), v[1].clone(), v[2].clone()]
}

fn refine_component(rng: &mut StdRng, n: &LgwfNet, prefix: &str, name: &str) -> Option<(LgwfNet, NodeMap)> {
    let mut d = Draft::from_lgwf(prefix, n);
    let mut phi = identity(&d);
    for _ in 0..rng.gen_range(0..=2) {
        apply_move(rng, &mut d, &mut phi);
    }
    let r = d.lgwf(name).ok()?;
    Some((r, phi))
}

/// A sound interface of two components and a refinement of each.
pub fn refinement_scenario(rng: &mut StdRng) -> RefinementScenario {
    loop {
        let (n1, n2) = random_pair(rng, PairOptions::default());
        let Some((r1, phi1)) = refine_component(rng, &n1, "ar", "R1") else { continue };
        let Some((r2, phi2)) = refine_component(rng, &n2, "br", "R2") else { continue };
        return RefinementScenario {
            r1,
            r2,
            n1: n1.with_name("N1"),
            n2: n2.with_name("N2"),
            phi1,
            phi2,
        };
    }
}
