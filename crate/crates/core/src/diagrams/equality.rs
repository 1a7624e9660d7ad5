//! Deciding when two diagrams denote the same morphism.
//!
//! Two strategies are registered:
//!
//! * `quotient` (default) identifies diagrams that differ only in how
//!   same-place wires are paired, as soon as at least one box is present.
//!   A box `t[u|v]` may absorb any extra `x x^-1` pair in `u` or `v`, and
//!   any two structural maps into `u` with the same multiplicity give the
//!   same composite with the box. Routing two wires through such a pair and
//!   re-pairing them there shows that any two same-place wires can swap
//!   partners. What remains is the boundary, the multiset of boxes and,
//!   for box-free diagrams, the exact wiring.
//! * `wiring` is boundary-fixing isomorphism of the open graphs, with box
//!   ports permutable within a (side, place) group. This is the finer
//!   equality of the compact closed structure alone.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::{Diagram, Site};
use crate::algebra::{PlaceId, SignedMultiset};
use crate::net::TransitionId;
use crate::registry::{Named, Registry};

pub trait EqualityStrategy: Named + Send + Sync {
    fn equal(&self, a: &Diagram, b: &Diagram) -> bool;
}

pub struct QuotientEquality;

pub struct WiringEquality;

fn box_multiset(d: &Diagram) -> Vec<(&TransitionId, &SignedMultiset, &SignedMultiset)> {
    let mut out: Vec<_> = d
        .boxes()
        .iter()
        .map(|b| (&b.transition, &b.input, &b.output))
        .collect();
    out.sort();
    out
}

impl Named for QuotientEquality {
    fn name(&self) -> &'static str {
        "quotient"
    }
}

impl EqualityStrategy for QuotientEquality {
    fn equal(&self, a: &Diagram, b: &Diagram) -> bool {
        if a.dom() != b.dom() || a.cod() != b.cod() {
            return false;
        }
        if a.is_box_free() && b.is_box_free() {
            return a.wires() == b.wires();
        }
        box_multiset(a) == box_multiset(b)
    }
}

impl Named for WiringEquality {
    fn name(&self) -> &'static str {
        "wiring"
    }
}

impl EqualityStrategy for WiringEquality {
    fn equal(&self, a: &Diagram, b: &Diagram) -> bool {
        if a.dom() != b.dom()
            || a.cod() != b.cod()
            || a.wires().len() != b.wires().len()
            || box_multiset(a) != box_multiset(b)
        {
            return false;
        }
        let (ga, gb) = (Graph::of(a), Graph::of(b));
        let mut palette = Palette::default();
        let ca = ga.initial_colors(&mut palette);
        let cb = gb.initial_colors(&mut palette);
        isomorphic(&ga, &gb, ca, cb, &mut palette)
    }
}

pub fn equality_registry() -> &'static Registry<dyn EqualityStrategy> {
    static REGISTRY: OnceLock<Registry<dyn EqualityStrategy>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn EqualityStrategy> = Registry::new();
        reg.register(Arc::new(QuotientEquality));
        reg.register(Arc::new(WiringEquality));
        reg
    })
}

/// Equality under the default strategy.
pub fn equal(a: &Diagram, b: &Diagram) -> bool {
    equality_registry()
        .default_strategy()
        .expect("registry has a default")
        .equal(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Dom,
    Cod,
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeLabel {
    place: PlaceId,
    from: Kind,
    to: Kind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Seed {
    Dom(usize),
    Cod(usize),
    Box(TransitionId, SignedMultiset, SignedMultiset),
    Fresh(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Seed(Seed),
    Refined(usize, Vec<(EdgeLabel, bool, usize)>),
}

#[derive(Default)]
struct Palette {
    ids: BTreeMap<Key, usize>,
    fresh: usize,
}

impl Palette {
    fn color(&mut self, key: Key) -> usize {
        let next = self.ids.len();
        *self.ids.entry(key).or_insert(next)
    }

    fn fresh(&mut self) -> usize {
        self.fresh += 1;
        self.color(Key::Seed(Seed::Fresh(self.fresh)))
    }
}

/// Vertices are boundary positions (domain first, then codomain) and
/// boxes; edges carry the place and the kinds of both ends.
struct Graph {
    seeds: Vec<Seed>,
    edges: Vec<(usize, usize, EdgeLabel)>,
    adjacency: Vec<Vec<(usize, EdgeLabel, bool)>>,
}

impl Graph {
    fn of(d: &Diagram) -> Graph {
        let (n, m) = (d.dom().len(), d.cod().len());
        let mut seeds: Vec<Seed> = (0..n).map(Seed::Dom).collect();
        seeds.extend((0..m).map(Seed::Cod));
        seeds.extend(
            d.boxes()
                .iter()
                .map(|b| Seed::Box(b.transition.clone(), b.input.clone(), b.output.clone())),
        );
        let vertex = |s: Site| match s {
            Site::Dom(i) => (i, Kind::Dom),
            Site::Cod(j) => (n + j, Kind::Cod),
            Site::In(b, _) => (n + m + b, Kind::In),
            Site::Out(b, _) => (n + m + b, Kind::Out),
        };
        let mut adjacency = vec![Vec::new(); seeds.len()];
        let mut edges = Vec::new();
        for w in d.wires() {
            let (u, ku) = vertex(w.from);
            let (v, kv) = vertex(w.to);
            let label = EdgeLabel {
                place: d.endpoint(w.from).expect("valid").place,
                from: ku,
                to: kv,
            };
            adjacency[u].push((v, label.clone(), true));
            adjacency[v].push((u, label.clone(), false));
            edges.push((u, v, label));
        }
        Graph {
            seeds,
            edges,
            adjacency,
        }
    }

    fn initial_colors(&self, palette: &mut Palette) -> Vec<usize> {
        self.seeds
            .iter()
            .map(|s| palette.color(Key::Seed(s.clone())))
            .collect()
    }

    fn refine_once(&self, colors: &[usize], palette: &mut Palette) -> Vec<usize> {
        (0..colors.len())
            .map(|v| {
                let mut around: Vec<_> = self.adjacency[v]
                    .iter()
                    .map(|(w, label, out)| (label.clone(), *out, colors[*w]))
                    .collect();
                around.sort();
                palette.color(Key::Refined(colors[v], around))
            })
            .collect()
    }
}

fn class_count(a: &[usize], b: &[usize]) -> usize {
    let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn histogram(colors: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        out.entry(c).or_default().push(v);
    }
    out
}

/// Refines both colorings in lockstep until the partition is stable.
fn refine(
    ga: &Graph,
    gb: &Graph,
    mut ca: Vec<usize>,
    mut cb: Vec<usize>,
    palette: &mut Palette,
) -> (Vec<usize>, Vec<usize>) {
    let mut classes = class_count(&ca, &cb);
    loop {
        let na = ga.refine_once(&ca, palette);
        let nb = gb.refine_once(&cb, palette);
        let next = class_count(&na, &nb);
        ca = na;
        cb = nb;
        if next == classes {
            return (ca, cb);
        }
        classes = next;
    }
}

fn isomorphic(ga: &Graph, gb: &Graph, ca: Vec<usize>, cb: Vec<usize>, palette: &mut Palette) -> bool {
    let (ca, cb) = refine(ga, gb, ca, cb, palette);
    let (ha, hb) = (histogram(&ca), histogram(&cb));
    if ha.len() != hb.len() || ha.iter().zip(&hb).any(|((c1, v1), (c2, v2))| c1 != c2 || v1.len() != v2.len()) {
        return false;
    }
    let Some((_, members)) = ha
        .iter()
        .filter(|(_, vs)| vs.len() > 1)
        .min_by_key(|(_, vs)| vs.len())
    else {
        return edges_match(ga, gb, &ca, &hb);
    };
    let v = members[0];
    let candidates = &hb[&ca[v]];
    candidates.iter().any(|&w| {
        let tag = palette.fresh();
        let (mut na, mut nb) = (ca.clone(), cb.clone());
        na[v] = tag;
        nb[w] = tag;
        isomorphic(ga, gb, na, nb, palette)
    })
}

/// With every class a singleton the coloring is a bijection; accept it
/// when it carries the edge multiset of `ga` onto that of `gb`.
fn edges_match(ga: &Graph, gb: &Graph, ca: &[usize], hb: &BTreeMap<usize, Vec<usize>>) -> bool {
    let image = |v: usize| hb[&ca[v]][0];
    let mut mapped: Vec<_> = ga
        .edges
        .iter()
        .map(|(u, v, l)| (image(*u), image(*v), l.clone()))
        .collect();
    let mut target = gb.edges.clone();
    mapped.sort();
    target.sort();
    mapped == target
}
