//! Moving between nets and category presentations, and pushing diagrams
//! along net morphisms.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Letter, ObjString, PlaceId, Sign, SignedMultiset};
use crate::diagrams::{splice, BoxInstance, Diagram, Node, Site};
use crate::net::{Flavor, MorphismMap, MorphismViolation, Net, NetMorphism, Transition, TransitionId, Violation};
use crate::terms::Signature;

/// Generating objects and generating arrows of a free compact closed
/// category over a net: the net without its flavor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryPresentation {
    pub places: BTreeSet<PlaceId>,
    pub generators: IndexMap<TransitionId, Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctorError {
    #[error("invalid net: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNet(Vec<Violation>),
    #[error("invalid morphism: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMorphism(Vec<MorphismViolation>),
    #[error("diagram is not over the source net: {0}")]
    ForeignDiagram(String),
}

impl CategoryPresentation {
    pub fn generator(&self, t: &TransitionId) -> Option<&Transition> {
        self.generators.get(t)
    }
}

impl Signature for CategoryPresentation {
    fn has_place(&self, place: &PlaceId) -> bool {
        self.places.contains(place)
    }

    fn interface(&self, t: &TransitionId) -> Option<(&SignedMultiset, &SignedMultiset)> {
        self.generators.get(t).map(|g| (&g.input, &g.output))
    }
}

impl Serialize for CategoryPresentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // Same schema as a net, minus the flavor.
        let mut value = serde_json::to_value(unfold(self)).map_err(serde::ser::Error::custom)?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("flavor");
        }
        value.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CategoryPresentation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let net = Net::deserialize(deserializer)?;
        Ok(presentation_of(&net))
    }
}

fn presentation_of(net: &Net) -> CategoryPresentation {
    CategoryPresentation {
        places: net.places().clone(),
        generators: net.transitions().map(|(t, tr)| (t.clone(), tr.clone())).collect(),
    }
}

pub fn fold(net: &Net) -> Result<CategoryPresentation, FunctorError> {
    net.validate().map_err(FunctorError::InvalidNet)?;
    Ok(presentation_of(net))
}

/// The integer net with one transition per generator.
pub fn unfold(pres: &CategoryPresentation) -> Net {
    let mut net = Net::new(Flavor::Int);
    for p in &pres.places {
        net.add_place(p.clone());
    }
    for (t, g) in &pres.generators {
        net.add_transition(t.clone(), g.clone());
    }
    net
}

/// All interfaces are non-negative.
pub fn is_positive(pres: &CategoryPresentation) -> bool {
    pres.generators
        .values()
        .all(|g| g.input.is_nat() && g.output.is_nat())
}

/// Builds the comparison morphism from `net` to `unfold(fold(net))` and
/// checks that it is a morphism and bijective on places and transitions.
pub fn roundtrip_check(net: &Net) -> Result<NetMorphism, Vec<String>> {
    let pres = fold(net).map_err(|e| vec![e.to_string()])?;
    let back = unfold(&pres);
    let unit = NetMorphism::new(net.clone(), back.clone(), MorphismMap::identity(net));
    let mut problems: Vec<String> = match unit.check() {
        Ok(()) => Vec::new(),
        Err(vs) => vs.iter().map(|v| v.to_string()).collect(),
    };
    let images: BTreeSet<&TransitionId> = unit.map.f.values().collect();
    let targets: BTreeSet<&TransitionId> = back.transitions().map(|(t, _)| t).collect();
    if images.len() != unit.map.f.len() || images != targets {
        problems.push("transition map is not a bijection".into());
    }
    let place_images: BTreeSet<&PlaceId> = unit
        .map
        .g
        .values()
        .filter_map(|m| match m.iter().collect::<Vec<_>>().as_slice() {
            [(q, 1)] => Some(*q),
            _ => None,
        })
        .collect();
    if place_images.len() != net.places().len() || &place_images.into_iter().cloned().collect::<BTreeSet<_>>() != back.places() {
        problems.push("place map is not a bijection of generators".into());
    }
    if problems.is_empty() {
        Ok(unit)
    } else {
        Err(problems)
    }
}

fn expand_letter(l: &Letter, g: &BTreeMap<PlaceId, SignedMultiset>) -> ObjString {
    let s = ObjString::section(&g[&l.place]);
    match l.sign {
        Sign::Pos => s,
        Sign::Neg => s.dual(),
    }
}

/// Image of a string under the morphism's action on objects.
pub fn expand_string(u: &ObjString, g: &BTreeMap<PlaceId, SignedMultiset>) -> ObjString {
    u.iter().fold(ObjString::unit(), |acc, l| acc.concat(&expand_letter(l, g)))
}

/// Where each letter of a string lands after expansion, ordered so that the
/// two ends of a wire line up index by index.
fn aligned_positions(u: &ObjString, g: &BTreeMap<PlaceId, SignedMultiset>) -> Vec<Vec<usize>> {
    let mut offset = 0;
    u.iter()
        .map(|l| {
            let n = expand_letter(l, g).len();
            let positions: Vec<usize> = match l.sign {
                Sign::Pos => (offset..offset + n).collect(),
                Sign::Neg => (offset..offset + n).rev().collect(),
            };
            offset += n;
            positions
        })
        .collect()
}

fn check_over(net: &Net, d: &Diagram) -> Result<(), FunctorError> {
    for l in d.dom().iter().chain(d.cod().iter()) {
        if !net.has_place(&l.place) {
            return Err(FunctorError::ForeignDiagram(format!("unknown place {}", l.place)));
        }
    }
    for b in d.boxes() {
        match net.transition(&b.transition) {
            Ok(tr) if tr.input == b.input && tr.output == b.output => {}
            Ok(_) => {
                return Err(FunctorError::ForeignDiagram(format!(
                    "box {} has the wrong interface",
                    b.transition
                )))
            }
            Err(_) => {
                return Err(FunctorError::ForeignDiagram(format!(
                    "unknown transition {}",
                    b.transition
                )))
            }
        }
    }
    Ok(())
}

/// Pushes a diagram over `m.source` to one over `m.target`: every letter
/// becomes the chosen string for its image, every wire a bundle, and every
/// box the image transition.
pub fn lift_morphism(m: &NetMorphism, d: &Diagram) -> Result<Diagram, FunctorError> {
    m.check().map_err(FunctorError::InvalidMorphism)?;
    check_over(&m.source, d)?;
    let g = &m.map.g;

    let dom = expand_string(d.dom(), g);
    let cod = expand_string(d.cod(), g);
    let dom_pos = aligned_positions(d.dom(), g);
    let cod_pos = aligned_positions(d.cod(), g);

    // Each source box becomes its image box wired to the expanded port
    // strings; those strings are junctions to be spliced away.
    let mut boxes = Vec::new();
    let mut links: Vec<(Node, Node)> = Vec::new();
    let mut port_nodes: BTreeMap<Site, Vec<Node>> = BTreeMap::new();
    let mut next_glue = 0;
    for (b, bx) in d.boxes().iter().enumerate() {
        let ft = &m.map.f[&bx.transition];
        let target = m.target.transition(ft).expect("checked morphism");
        let image = BoxInstance::new(ft.clone(), target.input.clone(), target.output.clone());
        let (u, v) = (bx.domain(), bx.codomain());
        let local = Diagram::generator(image.clone(), &expand_string(&u, g), &expand_string(&v, g));
        boxes.push(image);

        let (dom_base, cod_base) = (next_glue, next_glue + local.dom().len());
        next_glue = cod_base + local.cod().len();
        let to_node = |s: Site| match s {
            Site::Dom(i) => Node::Glue(dom_base + i),
            Site::Cod(j) => Node::Glue(cod_base + j),
            Site::In(_, k) => Node::Real(Site::In(b, k)),
            Site::Out(_, k) => Node::Real(Site::Out(b, k)),
        };
        links.extend(local.wires().iter().map(|w| (to_node(w.from), to_node(w.to))));
        for (k, positions) in aligned_positions(&u, g).into_iter().enumerate() {
            port_nodes.insert(Site::In(b, k), positions.into_iter().map(|i| Node::Glue(dom_base + i)).collect());
        }
        for (k, positions) in aligned_positions(&v, g).into_iter().enumerate() {
            port_nodes.insert(Site::Out(b, k), positions.into_iter().map(|j| Node::Glue(cod_base + j)).collect());
        }
    }

    let bundle = |s: Site| -> Vec<Node> {
        match s {
            Site::Dom(i) => dom_pos[i].iter().map(|&k| Node::Real(Site::Dom(k))).collect(),
            Site::Cod(j) => cod_pos[j].iter().map(|&k| Node::Real(Site::Cod(k))).collect(),
            port => port_nodes[&port].clone(),
        }
    };
    for w in d.wires() {
        let (a, b) = (bundle(w.from), bundle(w.to));
        debug_assert_eq!(a.len(), b.len());
        links.extend(a.into_iter().zip(b));
    }

    let shell = Diagram::assemble(dom.clone(), cod.clone(), boxes.clone(), Vec::new());
    let wires = splice(&links, |s| shell.endpoint(s).expect("site exists").polarity);
    Diagram::from_parts(dom, cod, boxes, wires)
        .map_err(|e| FunctorError::ForeignDiagram(format!("lifted wiring is inconsistent: {e}")))
}
