//! Reference checks written against the textbook definitions, sharing no
//! exploration code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use wfnet::compose::{decompose_verified, Composition};
use wfnet::labeled::LgwfNet;
use wfnet::reach::{explore, ExploreOptions};
use wfnet::{Marking, PetriNet};

pub const TOKEN_BOUND: u32 = 64;
pub const STATE_LIMIT: usize = 500_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Naive {
    Sound,
    Unsound,
    /// Some place exceeded the token bound, so the net is unbounded or at
    /// least not safe enough to be sound in the sizes generated here.
    Unbounded,
}

/// Plain breadth-first enumeration of the reachability set followed by the
/// three soundness clauses checked literally.
pub fn naive_soundness(net: &PetriNet, fin: &Marking) -> Naive {
    let places: Vec<String> = net.places().to_vec();
    let pidx: BTreeMap<&str, usize> = places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let trans: Vec<String> = net.transitions().to_vec();
    let mut pre = vec![Vec::new(); trans.len()];
    let mut post = vec![Vec::new(); trans.len()];
    for (a, b) in net.arcs() {
        if let Some(&p) = pidx.get(a.as_str()) {
            pre[trans.iter().position(|t| *t == b).unwrap()].push(p);
        } else {
            post[trans.iter().position(|t| *t == a).unwrap()].push(pidx[b.as_str()]);
        }
    }
    let vec_of = |m: &Marking| -> Vec<u32> { places.iter().map(|p| m.get(p)).collect() };
    let start = vec_of(net.initial());
    let goal = vec_of(fin);

    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut states: Vec<Vec<u32>> = Vec::new();
    let mut back: Vec<Vec<usize>> = Vec::new();
    let mut fired = vec![false; trans.len()];
    let mut queue = VecDeque::new();
    seen.insert(start.clone(), 0);
    states.push(start);
    back.push(Vec::new());
    queue.push_back(0);
    while let Some(i) = queue.pop_front() {
        for t in 0..trans.len() {
            if !pre[t].iter().all(|&p| states[i][p] > 0) {
                continue;
            }
            fired[t] = true;
            let mut m = states[i].clone();
            for &p in &pre[t] {
                m[p] -= 1;
            }
            for &p in &post[t] {
                m[p] += 1;
            }
            if m.iter().any(|&x| x > TOKEN_BOUND) {
                return Naive::Unbounded;
            }
            let j = match seen.get(&m) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    assert!(j < STATE_LIMIT, "oracle state limit");
                    seen.insert(m.clone(), j);
                    states.push(m);
                    back.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            back[j].push(i);
        }
    }
    // Clause 2: nothing strictly above the final marking.
    let above = states
        .iter()
        .any(|m| m != &goal && m.iter().zip(&goal).all(|(a, b)| a >= b));
    if above {
        return Naive::Unsound;
    }
    // Clause 1: every state reaches the final one.
    let Some(&g) = seen.get(&goal) else {
        return Naive::Unsound;
    };
    let mut reaches = vec![false; states.len()];
    reaches[g] = true;
    let mut queue = VecDeque::from([g]);
    while let Some(j) = queue.pop_front() {
        for &i in &back[j] {
            if !reaches[i] {
                reaches[i] = true;
                queue.push_back(i);
            }
        }
    }
    if !reaches.iter().all(|&r| r) {
        return Naive::Unsound;
    }
    // Clause 3.
    if fired.iter().all(|&f| f) {
        Naive::Sound
    } else {
        Naive::Unsound
    }
}

/// Every reachable marking of the composition splits into markings
/// reachable in the components plus tokens on channel places only.
pub fn decomposition_failures(n1: &LgwfNet, n2: &LgwfNet, c: &Composition, opts: ExploreOptions) -> Vec<String> {
    let g = explore(c.result.net(), opts);
    let mut out = Vec::new();
    if !g.is_complete() {
        out.push("exploration incomplete".to_string());
        return out;
    }
    for i in 0..g.vertex_count() {
        let seq = g.path_to(i);
        match decompose_verified(c, n1, n2, &seq) {
            Ok(d) => {
                if let Some(p) = d.channels.support().find(|p| !c.result.k().contains_key(*p)) {
                    out.push(format!("{p} is not a channel"));
                }
                let rest = g
                    .marking(i)
                    .restrict(|p| !c.result.k().contains_key(p));
                let mut sum = Marking::new();
                for (p, n) in d.left.iter().chain(d.right.iter()) {
                    if !n1.k().contains_key(p) && !n2.k().contains_key(p) {
                        sum.add(p.to_string(), n);
                    }
                }
                if rest.total() != sum.total() {
                    out.push(format!("token count mismatch at {}", g.marking(i)));
                }
            }
            Err(e) => out.push(format!("{e} after {seq:?}")),
        }
    }
    out
}
