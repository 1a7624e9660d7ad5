//! Brute-force equality oracle for a one-transition signature.
//!
//! Terms are hash-consed and typed independently of the library. Starting
//! from every term of the universe, each axiom is applied in both directions
//! at every position, as long as the result stays within a size bound; a
//! union-find records which terms are connected by such rewrites and is then
//! closed under congruence.

use std::collections::{HashMap, VecDeque};

use zpetri_core::algebra::{Letter, ObjString};
use zpetri_core::terms::Term;

/// Letters are `2 * place + (1 if inverse)`.
pub type Str = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Id(Str),
    Sym(Str, Str),
    Cup(Str),
    Cap(Str),
    /// The single transition with the given domain and codomain strings.
    Gen(Str, Str),
    Comp(u32, u32),
    Tensor(u32, u32),
}

pub struct Signature {
    pub places: Vec<&'static str>,
    pub transition: &'static str,
    /// Signed count per place.
    pub input: Vec<i64>,
    pub output: Vec<i64>,
}

pub struct Limits {
    pub max_size: u16,
    pub max_string: usize,
    pub max_pool: usize,
}

pub struct Arena {
    sig: Signature,
    limits: Limits,
    nodes: Vec<Node>,
    index: HashMap<Node, u32>,
    types: Vec<(Str, Str)>,
    sizes: Vec<u16>,
    structural: Vec<bool>,
}

fn dual(s: &[u8]) -> Str {
    s.iter().rev().map(|l| l ^ 1).collect()
}

fn cat(a: &[u8], b: &[u8]) -> Str {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

impl Arena {
    pub fn new(sig: Signature, limits: Limits) -> Self {
        Arena {
            sig,
            limits,
            nodes: Vec::new(),
            index: HashMap::new(),
            types: Vec::new(),
            sizes: Vec::new(),
            structural: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn ty(&self, id: u32) -> &(Str, Str) {
        &self.types[id as usize]
    }

    pub fn size(&self, id: u32) -> u16 {
        self.sizes[id as usize]
    }

    fn count(&self, s: &[u8]) -> Vec<i64> {
        let mut c = vec![0; self.sig.places.len()];
        for l in s {
            c[(l / 2) as usize] += if l % 2 == 0 { 1 } else { -1 };
        }
        c
    }

    fn strings_ok(&self, ss: &[&Str]) -> bool {
        ss.iter().all(|s| s.len() <= self.limits.max_string)
    }

    /// Interns a node if it is well typed and within bounds.
    pub fn intern(&mut self, node: Node) -> Option<u32> {
        if let Some(&id) = self.index.get(&node) {
            return Some(id);
        }
        let (ty, size, structural) = match &node {
            Node::Id(u) => {
                if !self.strings_ok(&[u]) {
                    return None;
                }
                ((u.clone(), u.clone()), 1, true)
            }
            Node::Sym(u, v) => {
                if !self.strings_ok(&[u, v]) {
                    return None;
                }
                ((cat(u, v), cat(v, u)), 1, true)
            }
            Node::Cup(u) => {
                if !self.strings_ok(&[u]) {
                    return None;
                }
                ((Vec::new(), cat(u, &dual(u))), 1, true)
            }
            Node::Cap(u) => {
                if !self.strings_ok(&[u]) {
                    return None;
                }
                ((cat(u, &dual(u)), Vec::new()), 1, true)
            }
            Node::Gen(u, v) => {
                if !self.strings_ok(&[u, v]) || self.count(u) != self.sig.input || self.count(v) != self.sig.output {
                    return None;
                }
                ((u.clone(), v.clone()), 1, false)
            }
            Node::Comp(a, b) => {
                let (ta, tb) = (self.ty(*a), self.ty(*b));
                if ta.1 != tb.0 {
                    return None;
                }
                let size = 1 + self.size(*a) + self.size(*b);
                let s = self.structural[*a as usize] && self.structural[*b as usize];
                ((ta.0.clone(), tb.1.clone()), size, s)
            }
            Node::Tensor(a, b) => {
                let (ta, tb) = (self.ty(*a), self.ty(*b));
                let size = 1 + self.size(*a) + self.size(*b);
                let s = self.structural[*a as usize] && self.structural[*b as usize];
                ((cat(&ta.0, &tb.0), cat(&ta.1, &tb.1)), size, s)
            }
        };
        if size > self.limits.max_size || self.nodes.len() >= self.limits.max_pool {
            return None;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        self.types.push(ty);
        self.sizes.push(size);
        self.structural.push(structural);
        Some(id)
    }

    /// Strips structural siblings off a generator-bearing term.
    fn core(&self, id: u32) -> u32 {
        match *self.node(id) {
            Node::Comp(a, b) | Node::Tensor(a, b) => {
                match (self.structural[a as usize], self.structural[b as usize]) {
                    (true, false) => self.core(b),
                    (false, true) => self.core(a),
                    _ => id,
                }
            }
            _ => id,
        }
    }

    fn comp(&mut self, a: u32, b: u32) -> Option<u32> {
        self.intern(Node::Comp(a, b))
    }

    fn tensor(&mut self, a: u32, b: u32) -> Option<u32> {
        self.intern(Node::Tensor(a, b))
    }

    fn id(&mut self, u: Str) -> Option<u32> {
        self.intern(Node::Id(u))
    }

    fn sym(&mut self, u: Str, v: Str) -> Option<u32> {
        self.intern(Node::Sym(u, v))
    }

    pub fn letters(&self) -> Vec<u8> {
        (0..2 * self.sig.places.len() as u8).collect()
    }

    /// Every one-node term over single letters.
    pub fn leaves(&mut self) -> Vec<u32> {
        let letters = self.letters();
        let mut nodes = vec![Node::Id(Vec::new())];
        for &x in &letters {
            nodes.push(Node::Id(vec![x]));
            nodes.push(Node::Cup(vec![x]));
            nodes.push(Node::Cap(vec![x]));
            for &y in &letters {
                nodes.push(Node::Sym(vec![x], vec![y]));
            }
        }
        let input = self.section(&self.sig.input.clone());
        let output = self.section(&self.sig.output.clone());
        nodes.push(Node::Gen(input, output));
        nodes.into_iter().filter_map(|n| self.intern(n)).collect()
    }

    fn section(&self, counts: &[i64]) -> Str {
        let mut s = Vec::new();
        for (p, &k) in counts.iter().enumerate() {
            let l = 2 * p as u8 + u8::from(k < 0);
            s.extend(std::iter::repeat_n(l, k.unsigned_abs() as usize));
        }
        s
    }

    /// All well-typed terms with at most three leaves.
    pub fn universe(&mut self) -> Vec<u32> {
        let leaves = self.leaves();
        let mut out = leaves.clone();
        let mut pairs = Vec::new();
        for &x in &leaves {
            for &y in &leaves {
                pairs.extend(self.comp(x, y));
                pairs.extend(self.tensor(x, y));
            }
        }
        out.extend(&pairs);
        for &p in &pairs {
            for &z in &leaves {
                out.extend(self.comp(p, z));
                out.extend(self.tensor(p, z));
                out.extend(self.comp(z, p));
                out.extend(self.tensor(z, p));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Results of one rewrite at the root.
    fn root_rewrites(&mut self, id: u32, out: &mut Vec<u32>) {
        let node = self.node(id).clone();
        let (dom, cod) = self.ty(id).clone();
        // Unit laws, expanding direction.
        out.extend(self.id(dom.clone()).and_then(|i| self.comp(i, id)));
        out.extend(self.id(cod.clone()).and_then(|i| self.comp(id, i)));
        out.extend(self.id(Vec::new()).and_then(|e| self.tensor(e, id)));
        out.extend(self.id(Vec::new()).and_then(|e| self.tensor(id, e)));

        match node {
            Node::Id(w) => {
                for k in 1..w.len() {
                    let (l, r) = (w[..k].to_vec(), w[k..].to_vec());
                    if let (Some(a), Some(b)) = (self.id(l.clone()), self.id(r.clone())) {
                        out.extend(self.tensor(a, b));
                    }
                    if let (Some(a), Some(b)) = (self.sym(l.clone(), r.clone()), self.sym(r, l)) {
                        out.extend(self.comp(a, b));
                    }
                }
                if w.is_empty() {
                    for x in self.letters() {
                        out.extend(self.circle(vec![x]));
                    }
                } else {
                    out.extend(self.yank_left(&w));
                    out.extend(self.yank_right(&w));
                }
            }
            Node::Sym(u, v) => {
                if u.is_empty() || v.is_empty() {
                    out.extend(self.id(cat(&u, &v)));
                }
                for k in 1..v.len() {
                    out.extend(self.hexagon_right(&u, &v[..k], &v[k..]));
                }
                for k in 1..u.len() {
                    out.extend(self.hexagon_left(&u[..k], &u[k..], &v));
                }
            }
            Node::Cup(w) => {
                let d = dual(&w);
                if let (Some(c), Some(s)) = (self.intern(Node::Cup(d.clone())), self.sym(d, w)) {
                    out.extend(self.comp(c, s));
                }
            }
            Node::Cap(w) => {
                let d = dual(&w);
                if let (Some(s), Some(c)) = (self.sym(w, d.clone()), self.intern(Node::Cap(d))) {
                    out.extend(self.comp(s, c));
                }
            }
            Node::Gen(..) => {}
            Node::Comp(a, b) => self.comp_rewrites(a, b, out),
            Node::Tensor(a, b) => self.tensor_rewrites(a, b, out),
        }
    }

    fn circle(&mut self, u: Str) -> Option<u32> {
        let d = dual(&u);
        let cup = self.intern(Node::Cup(u.clone()))?;
        let s = self.sym(u, d.clone())?;
        let cap = self.intern(Node::Cap(d))?;
        let left = self.comp(cup, s)?;
        self.comp(left, cap)
    }

    /// `(id(v) * cup(v^-1)) ; (cap(v) * id(v))`
    fn yank_left(&mut self, v: &[u8]) -> Option<u32> {
        let i = self.id(v.to_vec())?;
        let cup = self.intern(Node::Cup(dual(v)))?;
        let cap = self.intern(Node::Cap(v.to_vec()))?;
        let top = self.tensor(i, cup)?;
        let bottom = self.tensor(cap, i)?;
        self.comp(top, bottom)
    }

    /// `(cup(v) * id(v)) ; (id(v) * cap(v^-1))`
    fn yank_right(&mut self, v: &[u8]) -> Option<u32> {
        let i = self.id(v.to_vec())?;
        let cup = self.intern(Node::Cup(v.to_vec()))?;
        let cap = self.intern(Node::Cap(dual(v)))?;
        let top = self.tensor(cup, i)?;
        let bottom = self.tensor(i, cap)?;
        self.comp(top, bottom)
    }

    /// `sym(u|v w) = (sym(u|v) * id(w)) ; (id(v) * sym(u|w))`
    fn hexagon_right(&mut self, u: &[u8], v: &[u8], w: &[u8]) -> Option<u32> {
        let s1 = self.sym(u.to_vec(), v.to_vec())?;
        let iw = self.id(w.to_vec())?;
        let iv = self.id(v.to_vec())?;
        let s2 = self.sym(u.to_vec(), w.to_vec())?;
        let top = self.tensor(s1, iw)?;
        let bottom = self.tensor(iv, s2)?;
        self.comp(top, bottom)
    }

    /// `sym(u v|w) = (id(u) * sym(v|w)) ; (sym(u|w) * id(v))`
    fn hexagon_left(&mut self, u: &[u8], v: &[u8], w: &[u8]) -> Option<u32> {
        let iu = self.id(u.to_vec())?;
        let s1 = self.sym(v.to_vec(), w.to_vec())?;
        let s2 = self.sym(u.to_vec(), w.to_vec())?;
        let iv = self.id(v.to_vec())?;
        let top = self.tensor(iu, s1)?;
        let bottom = self.tensor(s2, iv)?;
        self.comp(top, bottom)
    }

    fn comp_rewrites(&mut self, a: u32, b: u32, out: &mut Vec<u32>) {
        let (na, nb) = (self.node(a).clone(), self.node(b).clone());
        // Unit laws, contracting direction.
        if matches!(nb, Node::Id(_)) {
            out.push(a);
        }
        if matches!(na, Node::Id(_)) {
            out.push(b);
        }
        // Associativity.
        if let Node::Comp(x, y) = na {
            out.extend(self.comp(y, b).and_then(|yb| self.comp(x, yb)));
        }
        if let Node::Comp(y, z) = nb {
            out.extend(self.comp(a, y).and_then(|ay| self.comp(ay, z)));
        }
        // Interchange, towards tensors of composites.
        if let (Node::Tensor(x, x2), Node::Tensor(y, y2)) = (&na, &nb) {
            if self.ty(*x).1 == self.ty(*y).0 {
                if let (Some(l), Some(r)) = (self.comp(*x, *y), self.comp(*x2, *y2)) {
                    out.extend(self.tensor(l, r));
                }
            }
        }
        // Symmetry is involutive.
        if let (Node::Sym(u, v), Node::Sym(v2, u2)) = (&na, &nb) {
            if u == u2 && v == v2 {
                out.extend(self.id(cat(u, v)));
            }
        }
        // Naturality of the symmetry, both directions.
        if let (Node::Sym(u, u2), Node::Tensor(beta, alpha)) = (&na, &nb) {
            if &self.ty(*beta).0 == u2 && &self.ty(*alpha).0 == u {
                let (v, v2) = (self.ty(*alpha).1.clone(), self.ty(*beta).1.clone());
                if let (Some(t), Some(s)) = (self.tensor(*alpha, *beta), self.sym(v, v2)) {
                    out.extend(self.comp(t, s));
                }
            }
        }
        if let (Node::Tensor(alpha, beta), Node::Sym(v, v2)) = (&na, &nb) {
            if &self.ty(*alpha).1 == v && &self.ty(*beta).1 == v2 {
                let (u, u2) = (self.ty(*alpha).0.clone(), self.ty(*beta).0.clone());
                if let (Some(s), Some(t)) = (self.sym(u, u2), self.tensor(*beta, *alpha)) {
                    out.extend(self.comp(s, t));
                }
            }
        }
        // Hexagons, contracting direction.
        if let (Node::Tensor(s1, iw), Node::Tensor(iv, s2)) = (&na, &nb) {
            if let (Node::Sym(u, v), Node::Id(w), Node::Id(v2), Node::Sym(u2, w2)) =
                (self.node(*s1), self.node(*iw), self.node(*iv), self.node(*s2))
            {
                if u == u2 && v == v2 && w == w2 {
                    let (u, vw) = (u.clone(), cat(v, w));
                    out.extend(self.sym(u, vw));
                }
            }
            if let (Node::Id(u), Node::Sym(v, w), Node::Sym(u2, w2), Node::Id(v2)) =
                (self.node(*s1), self.node(*iw), self.node(*iv), self.node(*s2))
            {
                if u == u2 && v == v2 && w == w2 {
                    let (uv, w) = (cat(u, v), w.clone());
                    out.extend(self.sym(uv, w));
                }
            }
        }
        // Yanking, contracting direction.
        if let (Node::Tensor(p, q), Node::Tensor(r, s)) = (&na, &nb) {
            if let (Node::Id(v), Node::Cup(d), Node::Cap(v2), Node::Id(v3)) =
                (self.node(*p), self.node(*q), self.node(*r), self.node(*s))
            {
                if v == v2 && v == v3 && *d == dual(v) {
                    out.extend(self.id(v.clone()));
                }
            }
            if let (Node::Cup(v), Node::Id(v2), Node::Id(v3), Node::Cap(d)) =
                (self.node(*p), self.node(*q), self.node(*r), self.node(*s))
            {
                if v == v2 && v == v3 && *d == dual(v) {
                    out.extend(self.id(v.clone()));
                }
            }
        }
        // Caps and cups absorb a symmetry.
        if let (Node::Sym(x, y), Node::Cap(y2)) = (&na, &nb) {
            if y == y2 && *x == dual(y) {
                out.extend(self.intern(Node::Cap(x.clone())));
            }
        }
        if let (Node::Cup(u), Node::Sym(x, y)) = (&na, &nb) {
            if x == u && *y == dual(u) {
                out.extend(self.intern(Node::Cup(y.clone())));
            }
        }
        // Circle deletion.
        let circle_parts = match (&na, &nb) {
            (Node::Comp(c, s), Node::Cap(_)) => Some((*c, *s, b)),
            (Node::Cup(_), Node::Comp(s, c)) => Some((a, *s, *c)),
            _ => None,
        };
        if let Some((c, s, k)) = circle_parts {
            if let (Node::Cup(u), Node::Sym(x, y), Node::Cap(d)) = (self.node(c), self.node(s), self.node(k)) {
                if x == u && *y == dual(u) && d == y {
                    out.extend(self.id(Vec::new()));
                }
            }
        }
        // Generators absorb structural morphisms on either side.
        if self.structural[a as usize] {
            if let Node::Gen(_, v) = &nb {
                let u = self.ty(a).0.clone();
                out.extend(self.intern(Node::Gen(u, v.clone())));
            }
        }
        if self.structural[b as usize] {
            if let Node::Gen(u, _) = &na {
                let v = self.ty(b).1.clone();
                out.extend(self.intern(Node::Gen(u.clone(), v)));
            }
        }
    }

    fn tensor_rewrites(&mut self, a: u32, b: u32, out: &mut Vec<u32>) {
        let (na, nb) = (self.node(a).clone(), self.node(b).clone());
        if matches!(&na, Node::Id(u) if u.is_empty()) {
            out.push(b);
        }
        if matches!(&nb, Node::Id(u) if u.is_empty()) {
            out.push(a);
        }
        if let Node::Tensor(x, y) = na {
            out.extend(self.tensor(y, b).and_then(|yb| self.tensor(x, yb)));
        }
        if let Node::Tensor(y, z) = nb {
            out.extend(self.tensor(a, y).and_then(|ay| self.tensor(ay, z)));
        }
        if let (Node::Id(u), Node::Id(v)) = (&na, &nb) {
            out.extend(self.id(cat(u, v)));
        }
        // Interchange, towards composites of tensors.
        if let (Node::Comp(x, y), Node::Comp(x2, y2)) = (na, nb) {
            if let (Some(l), Some(r)) = (self.tensor(x, x2), self.tensor(y, y2)) {
                out.extend(self.comp(l, r));
            }
        }
    }

    /// Results of one rewrite anywhere in the term.
    pub fn rewrites(&mut self, id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        self.root_rewrites(id, &mut out);
        match self.node(id).clone() {
            Node::Comp(a, b) => {
                for r in self.rewrites(a) {
                    out.extend(self.comp(r, b));
                }
                for r in self.rewrites(b) {
                    out.extend(self.comp(a, r));
                }
            }
            Node::Tensor(a, b) => {
                for r in self.rewrites(a) {
                    out.extend(self.tensor(r, b));
                }
                for r in self.rewrites(b) {
                    out.extend(self.tensor(a, r));
                }
            }
            _ => {}
        }
        out
    }

    fn string(&self, s: &[u8]) -> ObjString {
        s.iter()
            .map(|&l| {
                let p = self.sig.places[(l / 2) as usize];
                if l % 2 == 0 {
                    Letter::pos(p)
                } else {
                    Letter::neg(p)
                }
            })
            .collect()
    }

    pub fn to_term(&self, id: u32) -> Term {
        match self.node(id) {
            Node::Id(u) => Term::Id(self.string(u)),
            Node::Sym(u, v) => Term::Sym(self.string(u), self.string(v)),
            Node::Cup(u) => Term::Cup(self.string(u)),
            Node::Cap(u) => Term::Cap(self.string(u)),
            Node::Gen(u, v) => Term::gen(self.sig.transition, self.string(u), self.string(v)),
            Node::Comp(a, b) => self.to_term(*a).comp(self.to_term(*b)),
            Node::Tensor(a, b) => self.to_term(*a).tensor(self.to_term(*b)),
        }
    }
}

#[derive(Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new() -> Self {
        UnionFind { parent: Vec::new() }
    }

    pub fn find(&mut self, x: u32) -> u32 {
        while self.parent.len() <= x as usize {
            self.parent.push(self.parent.len() as u32);
        }
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

pub struct Closure {
    /// Rewrites and congruence only.
    pub axioms: UnionFind,
    /// Additionally closed under the derived wrapping rule.
    pub derived: UnionFind,
}

/// Connects every term reachable from `start` by rewrites within the limits.
pub fn closure(arena: &mut Arena, start: &[u32]) -> Closure {
    let mut uf = UnionFind::new();
    let mut seen = vec![false; arena.len()];
    let mut queue: VecDeque<u32> = start.iter().copied().collect();
    for &s in start {
        seen[s as usize] = true;
    }
    while let Some(id) = queue.pop_front() {
        for r in arena.rewrites(id) {
            if seen.len() <= r as usize {
                seen.resize(arena.len(), false);
            }
            uf.union(id, r);
            if !seen[r as usize] {
                seen[r as usize] = true;
                queue.push_back(r);
            }
        }
    }
    let mut axioms = uf.clone();
    congruence(arena, &mut axioms, false);
    let mut derived = axioms.clone();
    congruence(arena, &mut derived, true);
    Closure { axioms, derived }
}

#[derive(PartialEq, Eq, Hash)]
enum Key<'a> {
    Plain(bool, u32, u32),
    /// A generator-bearing part combined with a structural part.
    Mixed(u32, &'a (Str, Str)),
}

/// Merges composites whose parts are already merged, until nothing changes.
///
/// Besides plain congruence this applies one derived rule: wrapping a
/// generator-bearing term in structural material, by composing or tensoring
/// it with structural terms any number of times, gives a result that
/// depends only on the wrapped term and on the overall type. It follows from
/// the generator-slide axiom: the structural wires can be routed through
/// the generator's domain with a cup and cap pair, slid through, and bent
/// back out on whichever side and in whichever order the type requires.
fn congruence(arena: &Arena, uf: &mut UnionFind, derived: bool) {
    loop {
        let mut changed = false;
        let mut seen: HashMap<Key, u32> = HashMap::new();
        for id in 0..arena.len() as u32 {
            let (comp, a, b) = match *arena.node(id) {
                Node::Comp(a, b) => (true, a, b),
                Node::Tensor(a, b) => (false, a, b),
                _ => continue,
            };
            let mixed = arena.structural[a as usize] != arena.structural[b as usize];
            let key = if derived && mixed {
                Key::Mixed(uf.find(arena.core(id)), arena.ty(id))
            } else {
                Key::Plain(comp, uf.find(a), uf.find(b))
            };
            match seen.get(&key) {
                Some(&other) => {
                    if uf.find(other) != uf.find(id) {
                        uf.union(other, id);
                        changed = true;
                    }
                }
                None => {
                    seen.insert(key, id);
                }
            }
        }
        if !changed {
            break;
        }
    }
}
