//! Isomorphism of labeled nets up to node names.
//!
//! Colour refinement over kind, markings and labels narrows the candidates;
//! a backtracking search then fixes the bijection.

use std::collections::{BTreeMap, BTreeSet};

use crate::labeled::LgwfNet;
use crate::morphism::NodeMap;

struct Graph {
    names: Vec<String>,
    pre: Vec<BTreeSet<usize>>,
    post: Vec<BTreeSet<usize>>,
    base: Vec<String>,
}

fn graph(n: &LgwfNet) -> Graph {
    let net = n.net();
    let names: Vec<String> = net.node_names().map(str::to_string).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, x)| (x.as_str(), i)).collect();
    let mut pre = vec![BTreeSet::new(); names.len()];
    let mut post = vec![BTreeSet::new(); names.len()];
    for (a, b) in net.arcs() {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        post[i].insert(j);
        pre[j].insert(i);
    }
    let base = names
        .iter()
        .map(|x| {
            format!(
                "{}|{}|{}|{}|{}|{}",
                if net.is_place(x) { "p" } else { "t" },
                net.initial().get(x),
                n.final_marking().get(x),
                n.h().get(x).map(|l| l.to_string()).unwrap_or_default(),
                n.ell().get(x).cloned().unwrap_or_default(),
                n.k().get(x).cloned().unwrap_or_default(),
            )
        })
        .collect();
    Graph { names, pre, post, base }
}

/// Joint colour refinement so that colours of both graphs are comparable.
fn refine(a: &Graph, b: &Graph) -> (Vec<usize>, Vec<usize>) {
    let palette = |sigs: Vec<String>| -> Vec<usize> {
        let ids: BTreeMap<&String, usize> = sigs
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        sigs.iter().map(|s| ids[s]).collect()
    };
    let mut sigs: Vec<String> = a.base.iter().chain(&b.base).cloned().collect();
    let mut colours = palette(sigs);
    let split = a.names.len();
    let mut classes = colours.iter().collect::<BTreeSet<_>>().len();
    loop {
        sigs = (0..colours.len())
            .map(|i| {
                let (g, off, x) = if i < split { (a, 0, i) } else { (b, split, i - split) };
                let mut pre: Vec<usize> = g.pre[x].iter().map(|&y| colours[y + off]).collect();
                let mut post: Vec<usize> = g.post[x].iter().map(|&y| colours[y + off]).collect();
                pre.sort_unstable();
                post.sort_unstable();
                format!("{}|{:?}|{:?}", colours[i], pre, post)
            })
            .collect();
        colours = palette(sigs);
        let now = colours.iter().collect::<BTreeSet<_>>().len();
        if now == classes {
            break;
        }
        classes = now;
    }
    let cb = colours.split_off(split);
    (colours, cb)
}

/// A bijection between the nodes of `a` and `b` preserving node kinds,
/// arcs, initial and final markings and the three labelings.
pub fn isomorphism(a: &LgwfNet, b: &LgwfNet) -> Option<NodeMap> {
    let (ga, gb) = (graph(a), graph(b));
    if ga.names.len() != gb.names.len() {
        return None;
    }
    let (ca, cb) = refine(&ga, &gb);
    let mut ha = ca.clone();
    let mut hb = cb.clone();
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return None;
    }
    // Most constrained nodes first.
    let mut order: Vec<usize> = (0..ga.names.len()).collect();
    let size = |c: usize| ca.iter().filter(|&&x| x == c).count();
    order.sort_by_key(|&x| (size(ca[x]), x));
    let mut f = vec![usize::MAX; ga.names.len()];
    let mut used = vec![false; gb.names.len()];
    if search(&ga, &gb, &ca, &cb, &order, 0, &mut f, &mut used) {
        Some(
            f.iter()
                .enumerate()
                .map(|(x, &y)| (ga.names[x].clone(), gb.names[y].clone()))
                .collect(),
        )
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &Graph,
    b: &Graph,
    ca: &[usize],
    cb: &[usize],
    order: &[usize],
    depth: usize,
    f: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&x) = order.get(depth) else {
        return true;
    };
    for y in 0..b.names.len() {
        if used[y] || cb[y] != ca[x] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&z| {
            let w = f[z];
            a.post[x].contains(&z) == b.post[y].contains(&w) && a.pre[x].contains(&z) == b.pre[y].contains(&w)
        });
        if !consistent {
            continue;
        }
        f[x] = y;
        used[y] = true;
        if search(a, b, ca, cb, order, depth + 1, f, used) {
            return true;
        }
        used[y] = false;
        f[x] = usize::MAX;
    }
    false
}

pub fn is_isomorphic(a: &LgwfNet, b: &LgwfNet) -> bool {
    isomorphism(a, b).is_some()
}
