//! Turning diagrams back into terms.
//!
//! A box-free diagram `u -> v` is read as
//! `cup(v) * id(u) ; id(v) * (perm ; cap(z))`: the cup bends the codomain
//! round to the left, a permutation brings every wire's two ends into
//! mirrored positions, and a single cap closes them all. Boxes are handled
//! by bending their inputs the same way and reading the wiring around them
//! as one structural map.

use super::{Diagram, Site};
use crate::algebra::ObjString;
use crate::terms::Term;

fn is_unit_id(t: &Term) -> bool {
    matches!(t, Term::Id(u) if u.is_empty())
}

/// Tensor of the non-trivial parts, or `id()` when nothing is left.
fn tensor_parts(parts: Vec<Term>) -> Term {
    Term::tensor_all(parts.into_iter().filter(|t| !is_unit_id(t))).unwrap_or(Term::Id(ObjString::unit()))
}

fn letters_between(w: &ObjString, from: usize, to: usize) -> ObjString {
    ObjString::from_letters(w.letters()[from..to].to_vec())
}

/// A composite of adjacent swaps taking `w` to the string whose `k`-th
/// letter is `w[order[k]]`.
pub fn permutation_term(w: &ObjString, order: &[usize]) -> Term {
    assert_eq!(order.len(), w.len(), "order must permute the whole string");
    let mut current: Vec<usize> = (0..w.len()).collect();
    let mut text = w.clone();
    let mut steps = Vec::new();
    for (k, &wanted) in order.iter().enumerate() {
        let mut j = current.iter().position(|&x| x == wanted).expect("order is a permutation");
        while j > k {
            let letters = text.letters();
            steps.push(tensor_parts(vec![
                Term::Id(letters_between(&text, 0, j - 1)),
                Term::Sym(
                    ObjString::from_letters(vec![letters[j - 1].clone()]),
                    ObjString::from_letters(vec![letters[j].clone()]),
                ),
                Term::Id(letters_between(&text, j + 1, text.len())),
            ]));
            let mut swapped = letters.to_vec();
            swapped.swap(j - 1, j);
            text = ObjString::from_letters(swapped);
            current.swap(j - 1, j);
            j -= 1;
        }
    }
    Term::comp_all(steps).unwrap_or(Term::Id(w.clone()))
}

/// The box-free diagram `dom -> cod` joining the given site pairs, as a term.
pub fn structural_term(dom: &ObjString, cod: &ObjString, pairs: &[(Site, Site)]) -> Term {
    let d = Diagram::structural(dom.clone(), cod.clone(), pairs.iter().copied());
    structural(&d)
}

fn structural(d: &Diagram) -> Term {
    let (u, v) = (d.dom(), d.cod());
    let nv = v.len();
    // Positions in w = dual(v) u.
    let index = |s: Site| match s {
        Site::Cod(j) => nv - 1 - j,
        Site::Dom(i) => nv + i,
        _ => unreachable!("structural diagrams have no boxes"),
    };
    let w = v.dual().concat(u);
    let mut pairs: Vec<(usize, usize)> = d
        .wires()
        .iter()
        .map(|wire| {
            let (a, b) = (index(wire.from), index(wire.to));
            (a.min(b), a.max(b))
        })
        .collect();
    pairs.sort();
    let n = pairs.len();
    let mut order = vec![0; 2 * n];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        order[k] = a;
        order[2 * n - 1 - k] = b;
    }
    let z = ObjString::from_letters(pairs.iter().map(|&(a, _)| w.letters()[a].clone()).collect());
    let close = if n == 0 {
        Term::Id(ObjString::unit())
    } else {
        permutation_term(&w, &order).comp(Term::Cap(z))
    };
    if nv == 0 {
        return close;
    }
    let open = tensor_parts(vec![Term::Cup(v.clone()), Term::Id(u.clone())]);
    open.comp(tensor_parts(vec![Term::Id(v.clone()), close]))
}

pub(super) fn to_term(d: &Diagram) -> Term {
    if d.is_box_free() {
        return structural(d);
    }
    let mut b_in = ObjString::unit();
    let mut b_out = ObjString::unit();
    let mut in_offset = Vec::new();
    let mut out_offset = Vec::new();
    let mut gens = Vec::new();
    for bx in d.boxes() {
        in_offset.push(b_in.len());
        out_offset.push(b_out.len());
        let (dom, cod) = (bx.domain(), bx.codomain());
        b_in = b_in.concat(&dom);
        b_out = b_out.concat(&cod);
        gens.push(Term::Gen(bx.transition.clone(), dom, cod));
    }
    let (ni, no) = (b_in.len(), b_out.len());
    // The wiring around the boxes: b_out dual(b_in) dom -> cod.
    let inner_dom = b_out.concat(&b_in.dual()).concat(d.dom());
    let relocate = |s: Site| match s {
        Site::Out(b, k) => Site::Dom(out_offset[b] + k),
        Site::In(b, k) => Site::Dom(no + ni - 1 - (in_offset[b] + k)),
        Site::Dom(i) => Site::Dom(no + ni + i),
        cod => cod,
    };
    let inner = Diagram::structural(
        inner_dom,
        d.cod().clone(),
        d.wires().iter().map(|w| (relocate(w.from), relocate(w.to))),
    );
    let bend = tensor_parts(vec![Term::Cup(b_in.clone()), Term::Id(d.dom().clone())]);
    let boxes = tensor_parts(vec![
        Term::tensor_all(gens).expect("at least one box"),
        Term::Id(b_in.dual().concat(d.dom())),
    ]);
    bend.comp(boxes).comp(structural(&inner))
}
