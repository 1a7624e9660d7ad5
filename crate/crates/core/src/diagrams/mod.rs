//! Open wiring graphs: the normal form of morphisms.
//!
//! A [`Diagram`] has a domain and codomain string, a list of boxes (one per
//! transition occurrence, with ports fixed by the transition's interface)
//! and a set of wires. Every endpoint is either a boundary position or a
//! box port, and every endpoint is used by exactly one wire. Wires run from
//! a producer to a consumer of the same place:
//!
//! | endpoint            | `p` letter / positive count | `p^-1` letter / negative count |
//! |---------------------|-----------------------------|--------------------------------|
//! | domain position     | producer                    | consumer                       |
//! | codomain position   | consumer                    | producer                       |
//! | box input port      | consumer                    | producer                       |
//! | box output port     | producer                    | consumer                       |
//!
//! Closed loops of wire that touch no box are dropped whenever they arise.

mod dot;
mod equality;
mod readback;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Letter, ObjString, PlaceId, Sign, SignedMultiset};
use crate::net::TransitionId;
use crate::terms::{Signature, Term, TermError};

pub use equality::{
    equal, equality_registry, EqualityStrategy, QuotientEquality, WiringEquality,
};
pub use readback::{permutation_term, structural_term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Producer,
    Consumer,
}

impl Polarity {
    fn of_count(k: i64, positive: Polarity) -> Polarity {
        if k > 0 {
            positive
        } else {
            positive.opposite()
        }
    }

    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Producer => Polarity::Consumer,
            Polarity::Consumer => Polarity::Producer,
        }
    }
}

/// Where a wire end is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Dom(usize),
    Cod(usize),
    /// `(box, port)` on the input side.
    In(usize, usize),
    Out(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port {
    pub place: PlaceId,
    pub polarity: Polarity,
}

/// A transition occurrence with its canonical ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxInstance {
    pub transition: TransitionId,
    pub input: SignedMultiset,
    pub output: SignedMultiset,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
}

fn ports(m: &SignedMultiset, positive: Polarity) -> Vec<Port> {
    m.iter()
        .flat_map(|(p, k)| {
            let port = Port {
                place: p.clone(),
                polarity: Polarity::of_count(k, positive),
            };
            std::iter::repeat_n(port, k.unsigned_abs() as usize)
        })
        .collect()
}

impl BoxInstance {
    pub fn new(transition: TransitionId, input: SignedMultiset, output: SignedMultiset) -> Self {
        BoxInstance {
            inputs: ports(&input, Polarity::Consumer),
            outputs: ports(&output, Polarity::Producer),
            transition,
            input,
            output,
        }
    }

    pub fn inputs(&self) -> &[Port] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Port] {
        &self.outputs
    }

    /// The input ports read as a string, in port order.
    pub fn domain(&self) -> ObjString {
        ObjString::section(&self.input)
    }

    pub fn codomain(&self) -> ObjString {
        ObjString::section(&self.output)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wire {
    pub from: Site,
    pub to: Site,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("boundary mismatch: [{left}] does not match [{right}]")]
    BoundaryMismatch { left: ObjString, right: ObjString },
    #[error("invalid wiring: {0}")]
    InvalidWiring(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A morphism in normal form. Structural equality (`==`) compares the
/// exact representation; use [`equal`] for equality of morphisms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    dom: ObjString,
    cod: ObjString,
    boxes: Vec<BoxInstance>,
    wires: Vec<Wire>,
}

fn letter_polarity(l: &Letter, positive: Polarity) -> Polarity {
    match l.sign {
        Sign::Pos => positive,
        Sign::Neg => positive.opposite(),
    }
}

impl Diagram {
    /// Assembles a diagram, checking that every endpoint is used exactly
    /// once by a wire of matching place and direction.
    pub fn from_parts(
        dom: ObjString,
        cod: ObjString,
        boxes: Vec<BoxInstance>,
        wires: Vec<Wire>,
    ) -> Result<Diagram, DiagramError> {
        let d = Diagram::assemble(dom, cod, boxes, wires);
        d.check()?;
        Ok(d)
    }

    pub(crate) fn assemble(dom: ObjString, cod: ObjString, boxes: Vec<BoxInstance>, mut wires: Vec<Wire>) -> Diagram {
        wires.sort();
        Diagram {
            dom,
            cod,
            boxes,
            wires,
        }
    }

    pub fn empty() -> Diagram {
        Diagram::assemble(ObjString::unit(), ObjString::unit(), Vec::new(), Vec::new())
    }

    pub fn identity(u: &ObjString) -> Diagram {
        let pairs = (0..u.len()).map(|i| (Site::Dom(i), Site::Cod(i)));
        Diagram::structural(u.clone(), u.clone(), pairs)
    }

    /// A box-free diagram joining the given pairs of boundary sites.
    /// Each pair is oriented automatically.
    pub fn structural(
        dom: ObjString,
        cod: ObjString,
        pairs: impl IntoIterator<Item = (Site, Site)>,
    ) -> Diagram {
        let mut d = Diagram::assemble(dom, cod, Vec::new(), Vec::new());
        let wires = pairs.into_iter().map(|(a, b)| d.orient(a, b)).collect();
        d.wires = wires;
        d.wires.sort();
        d
    }

    pub fn dom(&self) -> &ObjString {
        &self.dom
    }

    pub fn cod(&self) -> &ObjString {
        &self.cod
    }

    pub fn boxes(&self) -> &[BoxInstance] {
        &self.boxes
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn is_box_free(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Place and direction of an endpoint, if the site exists.
    pub fn endpoint(&self, site: Site) -> Option<Port> {
        match site {
            Site::Dom(i) => self.dom.letters().get(i).map(|l| Port {
                place: l.place.clone(),
                polarity: letter_polarity(l, Polarity::Producer),
            }),
            Site::Cod(i) => self.cod.letters().get(i).map(|l| Port {
                place: l.place.clone(),
                polarity: letter_polarity(l, Polarity::Consumer),
            }),
            Site::In(b, k) => self.boxes.get(b).and_then(|bx| bx.inputs.get(k)).cloned(),
            Site::Out(b, k) => self.boxes.get(b).and_then(|bx| bx.outputs.get(k)).cloned(),
        }
    }

    fn polarity(&self, site: Site) -> Polarity {
        self.endpoint(site).expect("site exists").polarity
    }

    fn orient(&self, a: Site, b: Site) -> Wire {
        if self.polarity(a) == Polarity::Producer {
            Wire { from: a, to: b }
        } else {
            Wire { from: b, to: a }
        }
    }

    /// Every endpoint of the diagram, boundaries first.
    pub fn sites(&self) -> Vec<Site> {
        let mut out: Vec<Site> = (0..self.dom.len()).map(Site::Dom).collect();
        out.extend((0..self.cod.len()).map(Site::Cod));
        for (b, bx) in self.boxes.iter().enumerate() {
            out.extend((0..bx.inputs.len()).map(|k| Site::In(b, k)));
            out.extend((0..bx.outputs.len()).map(|k| Site::Out(b, k)));
        }
        out
    }

    pub fn check(&self) -> Result<(), DiagramError> {
        let mut used: HashMap<Site, usize> = HashMap::new();
        for w in &self.wires {
            let (Some(a), Some(b)) = (self.endpoint(w.from), self.endpoint(w.to)) else {
                return Err(DiagramError::InvalidWiring(format!(
                    "wire {:?} -> {:?} uses a missing endpoint",
                    w.from, w.to
                )));
            };
            if a.place != b.place {
                return Err(DiagramError::InvalidWiring(format!(
                    "wire {:?} -> {:?} joins {} to {}",
                    w.from, w.to, a.place, b.place
                )));
            }
            if a.polarity != Polarity::Producer || b.polarity != Polarity::Consumer {
                return Err(DiagramError::InvalidWiring(format!(
                    "wire {:?} -> {:?} does not run from a producer to a consumer",
                    w.from, w.to
                )));
            }
            *used.entry(w.from).or_default() += 1;
            *used.entry(w.to).or_default() += 1;
        }
        for site in self.sites() {
            match used.get(&site).copied().unwrap_or(0) {
                1 => {}
                0 => return Err(DiagramError::InvalidWiring(format!("endpoint {site:?} is unused"))),
                n => {
                    return Err(DiagramError::InvalidWiring(format!(
                        "endpoint {site:?} is used by {n} wires"
                    )))
                }
            }
        }
        Ok(())
    }

    /// The partner of every endpoint.
    pub fn partner_map(&self) -> HashMap<Site, Site> {
        self.wires
            .iter()
            .flat_map(|w| [(w.from, w.to), (w.to, w.from)])
            .collect()
    }

    /// Transition labels with multiplicity.
    pub fn box_labels(&self) -> BTreeMap<&TransitionId, usize> {
        let mut out = BTreeMap::new();
        for b in &self.boxes {
            *out.entry(&b.transition).or_default() += 1;
        }
        out
    }

    pub fn of_term(term: &Term, sig: &dyn Signature) -> Result<Diagram, DiagramError> {
        term.typecheck(sig)?;
        Ok(Diagram::interpret(term, sig))
    }

    fn interpret(term: &Term, sig: &dyn Signature) -> Diagram {
        match term {
            Term::Id(u) => Diagram::identity(u),
            Term::Sym(u, v) => {
                let (m, n) = (u.len(), v.len());
                let pairs = (0..m)
                    .map(|i| (Site::Dom(i), Site::Cod(n + i)))
                    .chain((0..n).map(|j| (Site::Dom(m + j), Site::Cod(j))));
                Diagram::structural(u.concat(v), v.concat(u), pairs)
            }
            Term::Cup(u) => {
                let n = 2 * u.len();
                let pairs = (0..u.len()).map(|i| (Site::Cod(i), Site::Cod(n - 1 - i)));
                Diagram::structural(ObjString::unit(), u.concat(&u.dual()), pairs)
            }
            Term::Cap(u) => {
                let n = 2 * u.len();
                let pairs = (0..u.len()).map(|i| (Site::Dom(i), Site::Dom(n - 1 - i)));
                Diagram::structural(u.concat(&u.dual()), ObjString::unit(), pairs)
            }
            Term::Gen(t, u, v) => {
                let (input, output) = sig.interface(t).expect("typechecked");
                Diagram::generator(
                    BoxInstance::new(t.clone(), input.clone(), output.clone()),
                    u,
                    v,
                )
            }
            Term::Comp(a, b) => Diagram::interpret(a, sig)
                .compose(&Diagram::interpret(b, sig))
                .expect("typechecked"),
            Term::Tensor(a, b) => Diagram::interpret(a, sig).tensor(&Diagram::interpret(b, sig)),
        }
    }

    /// One box wired to the boundary strings `u -> v`, whose multiplicities
    /// must equal the box interface.
    pub fn generator(bx: BoxInstance, u: &ObjString, v: &ObjString) -> Diagram {
        // Per place: outside producers feed box consumers first; whatever
        // remains on either side pairs up around the box.
        fn wire_side(
            wires: &mut Vec<Wire>,
            boundary: impl Iterator<Item = (Site, Port)>,
            box_ports: impl Iterator<Item = (Site, Port)>,
        ) {
            let mut producers: BTreeMap<PlaceId, Vec<Site>> = BTreeMap::new();
            let mut consumers: BTreeMap<PlaceId, Vec<Site>> = BTreeMap::new();
            let mut boundary_consumers: BTreeMap<PlaceId, Vec<Site>> = BTreeMap::new();
            let mut box_producers: BTreeMap<PlaceId, Vec<Site>> = BTreeMap::new();
            for (site, port) in boundary {
                match port.polarity {
                    Polarity::Producer => producers.entry(port.place).or_default().push(site),
                    Polarity::Consumer => boundary_consumers.entry(port.place).or_default().push(site),
                }
            }
            for (site, port) in box_ports {
                match port.polarity {
                    Polarity::Producer => box_producers.entry(port.place).or_default().push(site),
                    Polarity::Consumer => consumers.entry(port.place).or_default().push(site),
                }
            }
            for (p, sites) in box_producers {
                producers.entry(p).or_default().extend(sites);
            }
            for (p, sites) in boundary_consumers {
                consumers.entry(p).or_default().extend(sites);
            }
            for (p, from) in producers {
                let to = consumers.remove(&p).unwrap_or_default();
                debug_assert_eq!(from.len(), to.len());
                wires.extend(from.into_iter().zip(to).map(|(from, to)| Wire { from, to }));
            }
        }

        let mut d = Diagram::assemble(u.clone(), v.clone(), vec![bx], Vec::new());
        let mut wires = Vec::new();
        let dom_ports: Vec<_> = (0..u.len()).map(|i| (Site::Dom(i), d.endpoint(Site::Dom(i)).unwrap())).collect();
        let in_ports: Vec<_> = d.boxes[0]
            .inputs
            .iter()
            .enumerate()
            .map(|(k, p)| (Site::In(0, k), p.clone()))
            .collect();
        wire_side(&mut wires, dom_ports.into_iter(), in_ports.into_iter());
        let cod_ports: Vec<_> = (0..v.len()).map(|j| (Site::Cod(j), d.endpoint(Site::Cod(j)).unwrap())).collect();
        let out_ports: Vec<_> = d.boxes[0]
            .outputs
            .iter()
            .enumerate()
            .map(|(k, p)| (Site::Out(0, k), p.clone()))
            .collect();
        wire_side(&mut wires, cod_ports.into_iter(), out_ports.into_iter());
        d.wires = wires;
        d.wires.sort();
        d
    }

    /// A single box between its canonical strings.
    pub fn single_box(bx: BoxInstance) -> Diagram {
        let (u, v) = (bx.domain(), bx.codomain());
        Diagram::generator(bx, &u, &v)
    }

    /// Sequential composite `self ; next`.
    pub fn compose(&self, next: &Diagram) -> Result<Diagram, DiagramError> {
        if self.cod != next.dom {
            return Err(DiagramError::BoundaryMismatch {
                left: self.cod.clone(),
                right: next.dom.clone(),
            });
        }
        let shift = self.boxes.len();
        let first = |s: Site| match s {
            Site::Cod(k) => Node::Glue(k),
            other => Node::Real(other),
        };
        let second = |s: Site| match s {
            Site::Dom(k) => Node::Glue(k),
            Site::In(b, k) => Node::Real(Site::In(b + shift, k)),
            Site::Out(b, k) => Node::Real(Site::Out(b + shift, k)),
            other => Node::Real(other),
        };
        let links: Vec<(Node, Node)> = self
            .wires
            .iter()
            .map(|w| (first(w.from), first(w.to)))
            .chain(next.wires.iter().map(|w| (second(w.from), second(w.to))))
            .collect();
        let mut boxes = self.boxes.clone();
        boxes.extend(next.boxes.iter().cloned());
        let mut d = Diagram::assemble(self.dom.clone(), next.cod.clone(), boxes, Vec::new());
        d.wires = splice(&links, |s| d.polarity(s));
        d.wires.sort();
        Ok(d)
    }

    /// Parallel composite: `other` sits to the right of `self`.
    pub fn tensor(&self, other: &Diagram) -> Diagram {
        let (dm, cm, bm) = (self.dom.len(), self.cod.len(), self.boxes.len());
        let shift = |s: Site| match s {
            Site::Dom(i) => Site::Dom(i + dm),
            Site::Cod(j) => Site::Cod(j + cm),
            Site::In(b, k) => Site::In(b + bm, k),
            Site::Out(b, k) => Site::Out(b + bm, k),
        };
        let mut boxes = self.boxes.clone();
        boxes.extend(other.boxes.iter().cloned());
        let wires = self
            .wires
            .iter()
            .copied()
            .chain(other.wires.iter().map(|w| Wire {
                from: shift(w.from),
                to: shift(w.to),
            }))
            .collect();
        Diagram::assemble(
            self.dom.concat(&other.dom),
            self.cod.concat(&other.cod),
            boxes,
            wires,
        )
    }

    /// The same boxes and wires read in the opposite direction:
    /// `dual(cod) -> dual(dom)`.
    pub fn transpose(&self) -> Diagram {
        let (n, m) = (self.dom.len(), self.cod.len());
        let flip = |s: Site| match s {
            Site::Dom(i) => Site::Cod(n - 1 - i),
            Site::Cod(j) => Site::Dom(m - 1 - j),
            other => other,
        };
        let wires = self
            .wires
            .iter()
            .map(|w| Wire {
                from: flip(w.from),
                to: flip(w.to),
            })
            .collect();
        Diagram::assemble(self.cod.dual(), self.dom.dual(), self.boxes.clone(), wires)
    }

    /// A representative with boxes ordered by label and interface.
    pub fn normalize(&self) -> Diagram {
        let mut order: Vec<usize> = (0..self.boxes.len()).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (&self.boxes[a], &self.boxes[b]);
            (&x.transition, &x.input, &x.output).cmp(&(&y.transition, &y.input, &y.output))
        });
        self.permute_boxes(&order)
    }

    /// Reorders boxes so that new box `i` is old box `order[i]`.
    pub(crate) fn permute_boxes(&self, order: &[usize]) -> Diagram {
        let mut position = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let relabel = |s: Site| match s {
            Site::In(b, k) => Site::In(position[b], k),
            Site::Out(b, k) => Site::Out(position[b], k),
            other => other,
        };
        let boxes = order.iter().map(|&i| self.boxes[i].clone()).collect();
        let wires = self
            .wires
            .iter()
            .map(|w| Wire {
                from: relabel(w.from),
                to: relabel(w.to),
            })
            .collect();
        Diagram::assemble(self.dom.clone(), self.cod.clone(), boxes, wires)
    }

    /// `multiplicity(cod) - multiplicity(dom)`.
    pub fn net_flow(&self) -> SignedMultiset {
        &self.cod.multiplicity() - &self.dom.multiplicity()
    }

    pub fn to_dot(&self) -> String {
        dot::render(self)
    }

    /// Reads the diagram back as a term over the boxes' transitions.
    pub fn to_term(&self) -> Term {
        readback::to_term(self)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] -> [{}] with {} boxes and {} wires",
            self.dom,
            self.cod,
            self.boxes.len(),
            self.wires.len()
        )
    }
}

/// Endpoint of a link when splicing wires: either a site of the result or
/// an internal junction that disappears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Node {
    Real(Site),
    Glue(usize),
}

/// Fuses chains of links through junctions into wires between real sites.
/// Every junction must touch exactly two links and every real site one.
/// Chains that close on themselves without reaching a real site vanish.
pub(crate) fn splice(links: &[(Node, Node)], polarity: impl Fn(Site) -> Polarity) -> Vec<Wire> {
    let mut incident: HashMap<Node, Vec<usize>> = HashMap::new();
    for (i, (a, b)) in links.iter().enumerate() {
        incident.entry(*a).or_default().push(i);
        incident.entry(*b).or_default().push(i);
    }
    let mut starts: Vec<Site> = incident
        .keys()
        .filter_map(|n| match n {
            Node::Real(s) => Some(*s),
            Node::Glue(_) => None,
        })
        .collect();
    starts.sort();
    let mut done = std::collections::HashSet::new();
    let mut wires = Vec::new();
    for start in starts {
        if done.contains(&start) {
            continue;
        }
        let mut link = incident[&Node::Real(start)][0];
        let mut at = Node::Real(start);
        let end = loop {
            let (a, b) = links[link];
            let next = if a == at { b } else { a };
            match next {
                Node::Real(s) => break s,
                Node::Glue(_) => {
                    let pair = &incident[&next];
                    link = if pair[0] == link { pair[1] } else { pair[0] };
                    at = next;
                }
            }
        };
        done.insert(start);
        done.insert(end);
        wires.push(if polarity(start) == Polarity::Producer {
            Wire { from: start, to: end }
        } else {
            Wire { from: end, to: start }
        });
    }
    wires
}

#[derive(Serialize, Deserialize)]
struct DiagramFile {
    dom: ObjString,
    cod: ObjString,
    boxes: Vec<BoxFile>,
    wires: Vec<WireFile>,
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    transition: TransitionId,
    #[serde(rename = "in")]
    input: SignedMultiset,
    #[serde(rename = "out")]
    output: SignedMultiset,
}

#[derive(Serialize, Deserialize)]
struct WireFile {
    from: (String, Option<usize>, usize),
    to: (String, Option<usize>, usize),
}

fn site_triple(s: Site) -> (String, Option<usize>, usize) {
    match s {
        Site::Dom(i) => ("dom".into(), None, i),
        Site::Cod(i) => ("cod".into(), None, i),
        Site::In(b, k) => ("in".into(), Some(b), k),
        Site::Out(b, k) => ("out".into(), Some(b), k),
    }
}

fn triple_site((kind, b, k): (String, Option<usize>, usize)) -> Result<Site, String> {
    match (kind.as_str(), b) {
        ("dom", None) => Ok(Site::Dom(k)),
        ("cod", None) => Ok(Site::Cod(k)),
        ("in", Some(b)) => Ok(Site::In(b, k)),
        ("out", Some(b)) => Ok(Site::Out(b, k)),
        _ => Err(format!("bad endpoint [{kind:?}, {b:?}, {k}]")),
    }
}

impl Serialize for Diagram {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DiagramFile {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            boxes: self
                .boxes
                .iter()
                .map(|b| BoxFile {
                    transition: b.transition.clone(),
                    input: b.input.clone(),
                    output: b.output.clone(),
                })
                .collect(),
            wires: self
                .wires
                .iter()
                .map(|w| WireFile {
                    from: site_triple(w.from),
                    to: site_triple(w.to),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Diagram {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = DiagramFile::deserialize(deserializer)?;
        let boxes = file
            .boxes
            .into_iter()
            .map(|b| BoxInstance::new(b.transition, b.input, b.output))
            .collect();
        let wires = file
            .wires
            .into_iter()
            .map(|w| Ok(Wire {
                from: triple_site(w.from)?,
                to: triple_site(w.to)?,
            }))
            .collect::<Result<Vec<_>, String>>()
            .map_err(D::Error::custom)?;
        Diagram::from_parts(file.dom, file.cod, boxes, wires).map_err(D::Error::custom)
    }
}
