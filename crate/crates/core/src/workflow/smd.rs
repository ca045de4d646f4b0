use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::net::PetriNet;

/// A place set whose generated subnet, together with its neighbouring
/// transitions, is a connected state machine carrying exactly one token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SequentialComponent {
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
}

fn in_count(net: &PetriNet, t: usize, a: &[bool]) -> usize {
    net.pre_t(t).iter().filter(|&&p| a[p]).count()
}

fn out_count(net: &PetriNet, t: usize, a: &[bool]) -> usize {
    net.post_t(t).iter().filter(|&&p| a[p]).count()
}

fn neighbour_transitions(net: &PetriNet, a: &[bool]) -> BTreeSet<usize> {
    let mut ts = BTreeSet::new();
    for (p, _) in a.iter().enumerate().filter(|(_, &x)| x) {
        ts.extend(net.pre_p(p).iter().copied());
        ts.extend(net.post_p(p).iter().copied());
    }
    ts
}

fn tokens(net: &PetriNet, a: &[bool]) -> u64 {
    net.places()
        .iter()
        .enumerate()
        .filter(|(i, _)| a[*i])
        .map(|(_, p)| net.initial().get(p) as u64)
        .sum()
}

fn to_component(net: &PetriNet, a: &[bool]) -> SequentialComponent {
    SequentialComponent {
        places: a
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(p, _)| net.places()[p].clone())
            .collect(),
        transitions: neighbour_transitions(net, a)
            .into_iter()
            .map(|t| net.transitions()[t].clone())
            .collect(),
    }
}

/// Checks the state-machine, connectivity and single-token conditions for
/// an explicit place set.
pub fn is_sequential_component(net: &PetriNet, places: &BTreeSet<String>) -> bool {
    let mut a = vec![false; net.places().len()];
    for p in places {
        match net.place_index(p) {
            Some(i) => a[i] = true,
            None => return false,
        }
    }
    if places.is_empty() || tokens(net, &a) != 1 {
        return false;
    }
    let ts = neighbour_transitions(net, &a);
    if ts
        .iter()
        .any(|&t| in_count(net, t, &a) != 1 || out_count(net, t, &a) != 1)
    {
        return false;
    }
    // Connectivity through the neighbouring transitions.
    let start = a.iter().position(|&x| x).unwrap();
    let mut seen = vec![false; a.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for &t in net.pre_p(p).iter().chain(net.post_p(p)) {
            for &q in net.pre_t(t).iter().chain(net.post_t(t)) {
                if a[q] && !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    seen == a
}

/// Depth-first search for a sequential component containing `place` whose
/// transitions include all of `required`.
///
/// Starting from `{place}`, the first transition lacking an input or output
/// inside the set is repaired by adding one candidate place, branching over
/// all candidates. Sets in which some transition already has two inputs or
/// two outputs inside, or which hold more than one token, are abandoned.
/// Every component through `place` is reached as a leaf, so the search is
/// exact; its cost is exponential in the worst case.
pub fn sequential_component_through(
    net: &PetriNet,
    place: &str,
    required: &BTreeSet<String>,
) -> Option<SequentialComponent> {
    let p = net.place_index(place)?;
    let mut req = Vec::new();
    for t in required {
        req.push(net.transition_index(t)?);
    }
    let mut a = vec![false; net.places().len()];
    a[p] = true;
    search(net, &mut a, &req).then(|| to_component(net, &a))
}

fn search(net: &PetriNet, a: &mut [bool], req: &[usize]) -> bool {
    if tokens(net, a) > 1 {
        return false;
    }
    let ts = neighbour_transitions(net, a);
    let mut deficient = None;
    for &t in &ts {
        let (i, o) = (in_count(net, t, a), out_count(net, t, a));
        if i > 1 || o > 1 {
            return false;
        }
        if deficient.is_none() && (i == 0 || o == 0) {
            deficient = Some((t, i == 0));
        }
    }
    let Some((t, need_input)) = deficient else {
        return tokens(net, a) == 1 && req.iter().all(|r| ts.contains(r));
    };
    let candidates: Vec<usize> = if need_input {
        net.pre_t(t).to_vec()
    } else {
        net.post_t(t).to_vec()
    };
    for q in candidates {
        a[q] = true;
        if search(net, a, req) {
            return true;
        }
        a[q] = false;
    }
    false
}

/// A set of sequential components covering every place, taking for each
/// uncovered place (in name order) the first component found through it and
/// then dropping components made redundant by later ones. `None` when some
/// place lies in no sequential component.
pub fn find_sequential_cover(net: &PetriNet) -> Option<Vec<SequentialComponent>> {
    let mut covered: BTreeSet<String> = BTreeSet::new();
    let mut cover = Vec::new();
    let none = BTreeSet::new();
    for p in net.places() {
        if covered.contains(p) {
            continue;
        }
        let c = sequential_component_through(net, p, &none)?;
        covered.extend(c.places.iter().cloned());
        cover.push(c);
    }
    let mut i = 0;
    while i < cover.len() {
        let redundant = cover[i].places.iter().all(|p| {
            cover
                .iter()
                .enumerate()
                .any(|(j, c)| j != i && c.places.contains(p))
        });
        if redundant {
            cover.remove(i);
        } else {
            i += 1;
        }
    }
    Some(cover)
}

/// State machine decomposable: covered by sequential components.
pub fn is_smd(net: &PetriNet) -> bool {
    find_sequential_cover(net).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn state_machine_is_own_component() {
        let n = PetriNet::builder()
            .place("s")
            .place("m")
            .place("f")
            .transition("a")
            .transition("b")
            .transition("c")
            .arc("s", "a")
            .arc("s", "b")
            .arc("a", "m")
            .arc("b", "m")
            .arc("m", "c")
            .arc("c", "f")
            .mark("s")
            .build()
            .unwrap();
        let cover = find_sequential_cover(&n).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover[0].places, set(&["f", "m", "s"]));
        assert!(is_sequential_component(&n, &cover[0].places));
    }

    #[test]
    fn parallel_chains_need_two_components() {
        // s1 -> a -> p1 -> sync <- p2 <- b <- s2 ; sync -> f1, f2
        let n = PetriNet::builder()
            .place("s1")
            .place("s2")
            .place("p1")
            .place("p2")
            .place("f1")
            .place("f2")
            .transition("a")
            .transition("b")
            .transition("sync")
            .arc("s1", "a")
            .arc("a", "p1")
            .arc("s2", "b")
            .arc("b", "p2")
            .arc("p1", "sync")
            .arc("p2", "sync")
            .arc("sync", "f1")
            .arc("sync", "f2")
            .mark("s1")
            .mark("s2")
            .build()
            .unwrap();
        let cover = find_sequential_cover(&n).unwrap();
        assert_eq!(cover.len(), 2);
        for c in &cover {
            assert!(is_sequential_component(&n, &c.places));
        }
        assert!(is_smd(&n));
    }

    #[test]
    fn extra_producer_breaks_cover() {
        // t feeds both m and d; d is consumed with i2's token.
        let n = PetriNet::builder()
            .place("i1")
            .place("f1")
            .place("d")
            .place("i2")
            .place("f2")
            .transition("t1")
            .transition("t2")
            .transition("r")
            .arc("i1", "t1")
            .arc("i1", "t2")
            .arc("t1", "f1")
            .arc("t1", "d")
            .arc("t2", "f1")
            .arc("d", "r")
            .arc("i2", "r")
            .arc("r", "f2")
            .mark("i1")
            .mark("i2")
            .build()
            .unwrap();
        assert!(!is_smd(&n));
        assert!(sequential_component_through(&n, "d", &BTreeSet::new()).is_none());
    }

    #[test]
    fn required_transitions_respected() {
        let n = PetriNet::builder()
            .place("s")
            .place("f")
            .transition("t")
            .arc("s", "t")
            .arc("t", "f")
            .mark("s")
            .build()
            .unwrap();
        assert!(sequential_component_through(&n, "s", &set(&["t"])).is_some());
        assert!(sequential_component_through(&n, "s", &set(&["nope"])).is_none());
    }
}
