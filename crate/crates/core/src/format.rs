//! The `wfnet` line format for nets and morphisms.
//!
//! ```text
//! # wfnet v1
//! net producer
//! place i init
//! place o final
//! trans a async=x!
//! arc a o
//! arc i a
//! ```
//!
//! Serialization sorts places, transitions and arcs so that equal nets
//! produce equal bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::labeled::{validate_lgwf, AsyncLabel, Labels, LgwfNet};
use crate::marking::Marking;
use crate::morphism::{Morphism, MorphismError, NodeMap};
use crate::net::PetriNet;
use crate::workflow::check_gwf;

pub const HEADER: &str = "# wfnet v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line 1: missing `{HEADER}` header")]
    MissingHeader,
    #[error("{0}")]
    Semantic(String),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlaceDecl {
    pub id: String,
    pub init: bool,
    pub fin: bool,
    pub chan: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransDecl {
    pub id: String,
    pub async_label: Option<AsyncLabel>,
    pub sync: Option<String>,
}

/// A parsed net file before semantic validation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetDocument {
    pub name: String,
    pub places: Vec<PlaceDecl>,
    pub transitions: Vec<TransDecl>,
    pub arcs: Vec<(String, String)>,
}

fn check_id(line: usize, id: &str) -> Result<(), FormatError> {
    if id.starts_with('⊥') {
        return Err(syntax(line, format!("identifier {id} uses the reserved prefix ⊥")));
    }
    if id.contains('=') || id.starts_with('#') {
        return Err(syntax(line, format!("invalid identifier {id}")));
    }
    Ok(())
}

fn body(text: &str) -> Result<impl Iterator<Item = (usize, Vec<&str>)>, FormatError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(HEADER) {
        return Err(FormatError::MissingHeader);
    }
    Ok(lines.enumerate().filter_map(|(i, l)| {
        let l = l.split_once('#').map_or(l, |(a, _)| a);
        let words: Vec<&str> = l.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 2, words))
    }))
}

pub fn parse_document(text: &str) -> Result<NetDocument, FormatError> {
    let mut doc = NetDocument::default();
    let mut named = false;
    let mut seen = BTreeSet::new();
    for (n, words) in body(text)? {
        match words[0] {
            "net" => {
                if named {
                    return Err(syntax(n, "second `net` declaration"));
                }
                let [_, name] = words[..] else {
                    return Err(syntax(n, "expected `net <name>`"));
                };
                doc.name = name.to_string();
                named = true;
            }
            "place" => {
                let Some(id) = words.get(1) else {
                    return Err(syntax(n, "expected `place <id>`"));
                };
                check_id(n, id)?;
                let mut p = PlaceDecl {
                    id: id.to_string(),
                    init: false,
                    fin: false,
                    chan: None,
                };
                for w in &words[2..] {
                    match *w {
                        "init" if !p.init => p.init = true,
                        "final" if !p.fin => p.fin = true,
                        _ => match w.strip_prefix("chan=") {
                            Some(c) if !c.is_empty() && p.chan.is_none() => p.chan = Some(c.to_string()),
                            _ => return Err(syntax(n, format!("unexpected place attribute {w}"))),
                        },
                    }
                }
                if !seen.insert(p.id.clone()) {
                    return Err(syntax(n, format!("{} declared twice", p.id)));
                }
                doc.places.push(p);
            }
            "trans" => {
                let Some(id) = words.get(1) else {
                    return Err(syntax(n, "expected `trans <id>`"));
                };
                check_id(n, id)?;
                let mut t = TransDecl {
                    id: id.to_string(),
                    async_label: None,
                    sync: None,
                };
                for w in &words[2..] {
                    if let Some(l) = w.strip_prefix("async=") {
                        if t.async_label.is_some() {
                            return Err(syntax(n, "second async label"));
                        }
                        t.async_label = Some(l.parse().map_err(|e| syntax(n, format!("{e}")))?);
                    } else if let Some(s) = w.strip_prefix("sync=") {
                        if t.sync.is_some() || s.is_empty() {
                            return Err(syntax(n, format!("unexpected transition attribute {w}")));
                        }
                        t.sync = Some(s.to_string());
                    } else {
                        return Err(syntax(n, format!("unexpected transition attribute {w}")));
                    }
                }
                if !seen.insert(t.id.clone()) {
                    return Err(syntax(n, format!("{} declared twice", t.id)));
                }
                doc.transitions.push(t);
            }
            "arc" => {
                let [_, a, b] = words[..] else {
                    return Err(syntax(n, "expected `arc <src> <dst>`"));
                };
                doc.arcs.push((a.to_string(), b.to_string()));
            }
            w => return Err(syntax(n, format!("unknown declaration {w}"))),
        }
    }
    if !named {
        return Err(syntax(1, "missing `net <name>` declaration"));
    }
    Ok(doc)
}

impl NetDocument {
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "net {}", self.name).unwrap();
        let mut places = self.places.clone();
        places.sort();
        for p in places {
            write!(out, "place {}", p.id).unwrap();
            if p.init {
                out.push_str(" init");
            }
            if p.fin {
                out.push_str(" final");
            }
            if let Some(c) = p.chan {
                write!(out, " chan={c}").unwrap();
            }
            out.push('\n');
        }
        let mut ts = self.transitions.clone();
        ts.sort();
        for t in ts {
            write!(out, "trans {}", t.id).unwrap();
            if let Some(l) = t.async_label {
                write!(out, " async={l}").unwrap();
            }
            if let Some(s) = t.sync {
                write!(out, " sync={s}").unwrap();
            }
            out.push('\n');
        }
        let mut arcs = self.arcs.clone();
        arcs.sort();
        arcs.dedup();
        for (a, b) in arcs {
            writeln!(out, "arc {a} {b}").unwrap();
        }
        out
    }

    /// The marked net and its final marking, without workflow or label checks.
    pub fn to_petri(&self) -> Result<(PetriNet, Marking), FormatError> {
        let mut b = PetriNet::builder();
        for p in &self.places {
            b.place(p.id.clone());
            if p.init {
                b.mark(p.id.clone());
            }
        }
        for t in &self.transitions {
            b.transition(t.id.clone());
        }
        for (x, y) in &self.arcs {
            b.arc(x.clone(), y.clone());
        }
        let net = b.build().map_err(|e| FormatError::Semantic(e.to_string()))?;
        let fin = Marking::from_places(self.places.iter().filter(|p| p.fin).map(|p| p.id.clone()));
        Ok((net, fin))
    }

    pub fn labels(&self) -> Labels {
        Labels {
            h: self
                .transitions
                .iter()
                .filter_map(|t| t.async_label.clone().map(|l| (t.id.clone(), l)))
                .collect(),
            ell: self
                .transitions
                .iter()
                .filter_map(|t| t.sync.clone().map(|s| (t.id.clone(), s)))
                .collect(),
            k: self
                .places
                .iter()
                .filter_map(|p| p.chan.clone().map(|c| (p.id.clone(), c)))
                .collect(),
        }
    }

    pub fn to_lgwf(&self) -> Result<LgwfNet, FormatError> {
        let (net, fin) = self.to_petri()?;
        let g = check_gwf(net, fin).map_err(|e| FormatError::Semantic(e.to_string()))?;
        validate_lgwf(self.name.clone(), g, self.labels()).map_err(|e| FormatError::Semantic(e.to_string()))
    }

    pub fn from_lgwf(n: &LgwfNet) -> Self {
        let mut d = Self::from_net(n.name(), n.net(), n.final_marking());
        for p in &mut d.places {
            p.chan = n.k().get(&p.id).cloned();
        }
        for t in &mut d.transitions {
            t.async_label = n.h().get(&t.id).cloned();
            t.sync = n.ell().get(&t.id).cloned();
        }
        d
    }

    /// Nets whose initial marking is not a set lose their multiplicities.
    pub fn from_net(name: &str, net: &PetriNet, fin: &Marking) -> Self {
        Self {
            name: name.to_string(),
            places: net
                .places()
                .iter()
                .map(|p| PlaceDecl {
                    id: p.clone(),
                    init: net.initial().get(p) > 0,
                    fin: fin.get(p) > 0,
                    chan: None,
                })
                .collect(),
            transitions: net
                .transitions()
                .iter()
                .map(|t| TransDecl {
                    id: t.clone(),
                    async_label: None,
                    sync: None,
                })
                .collect(),
            arcs: net.arcs(),
        }
    }
}

/// Parses and validates a labeled workflow net.
pub fn parse_net(text: &str) -> Result<LgwfNet, FormatError> {
    parse_document(text)?.to_lgwf()
}

pub fn serialize_net(n: &LgwfNet) -> String {
    NetDocument::from_lgwf(n).serialize()
}

/// A parsed morphism file: the names of the two nets and the node map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MorphismDocument {
    pub source: String,
    pub target: String,
    pub map: NodeMap,
}

pub fn parse_morphism(text: &str) -> Result<MorphismDocument, FormatError> {
    let mut doc = MorphismDocument::default();
    let mut header = false;
    for (n, words) in body(text)? {
        match words[..] {
            ["morphism", s, "->", t] if !header => {
                doc.source = s.to_string();
                doc.target = t.to_string();
                header = true;
            }
            ["map", a, b] if header => {
                if doc.map.insert(a.to_string(), b.to_string()).is_some() {
                    return Err(syntax(n, format!("{a} mapped twice")));
                }
            }
            _ => return Err(syntax(n, "expected `morphism <src> -> <dst>` followed by `map <a> <b>` lines")),
        }
    }
    if !header {
        return Err(syntax(1, "missing `morphism <src> -> <dst>` declaration"));
    }
    Ok(doc)
}

impl MorphismDocument {
    pub fn serialize(&self) -> String {
        let mut out = format!("{HEADER}\nmorphism {} -> {}\n", self.source, self.target);
        for (a, b) in &self.map {
            writeln!(out, "map {a} {b}").unwrap();
        }
        out
    }

    /// Binds the map to concrete nets, checking totality and node names.
    pub fn bind<'a>(&self, source: &'a PetriNet, target: &'a PetriNet) -> Result<Morphism<'a>, MorphismError> {
        Morphism::new(source, target, self.map.clone())
    }
}

/// Scenario manifest: paths of the six inputs of a refinement scenario.
#[derive(Debug, Clone, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
pub struct ScenarioManifest {
    pub r1: String,
    pub r2: String,
    pub n1: String,
    pub n2: String,
    pub phi1: String,
    pub phi2: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "# wfnet v1\nnet chain\nplace f final\nplace s init\ntrans t\narc s t\narc t f\n";

    #[test]
    fn chain_round_trip() {
        let n = parse_net(CHAIN).unwrap();
        assert_eq!(n.net().places().len(), 2);
        assert_eq!(serialize_net(&n), CHAIN);
        assert_eq!(parse_document(CHAIN).unwrap().serialize(), CHAIN);
    }

    #[test]
    fn header_required() {
        assert_eq!(parse_document("net x\n"), Err(FormatError::MissingHeader));
    }

    #[test]
    fn both_labels_rejected() {
        let text = "# wfnet v1\nnet n\nplace s init\nplace f final\ntrans t async=c! sync=s\narc s t\narc t f\n";
        let e = parse_net(text).unwrap_err();
        assert!(e.to_string().contains("2 (async and sync domains disjoint)"), "{e}");
    }

    #[test]
    fn line_numbers_and_reserved_names() {
        let e = parse_document("# wfnet v1\nnet n\nplace ⊥in:p\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 3, .. }));
        let e = parse_document("# wfnet v1\nnet n\n\nfrob x\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 4, .. }));
    }

    #[test]
    fn morphism_documents() {
        let n = parse_net(CHAIN).unwrap();
        let text = "# wfnet v1\nmorphism chain -> chain\nmap f f\nmap s s\nmap t t\n";
        let d = parse_morphism(text).unwrap();
        assert_eq!(d.serialize(), text);
        let m = d.bind(n.net(), n.net()).unwrap();
        assert_eq!(m, Morphism::identity(n.net()));
        let d = parse_morphism("# wfnet v1\nmorphism chain -> chain\nmap f f\nmap s s\n").unwrap();
        assert_eq!(d.bind(n.net(), n.net()), Err(MorphismError::NotTotal(vec!["t".into()])));
        let d = parse_morphism("# wfnet v1\nmorphism chain -> chain\nmap f f\nmap s s\nmap t u\n").unwrap();
        assert!(matches!(d.bind(n.net(), n.net()), Err(MorphismError::UnknownNode { .. })));
    }
}
