//! Random generators shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zpetri_core::algebra::{Letter, ObjString, SignedMultiset};
use zpetri_core::net::{Flavor, Net, Transition, TransitionId};
use zpetri_core::terms::{Signature, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ms(entries: &[(&str, i64)]) -> SignedMultiset {
    entries.iter().copied().collect()
}

pub fn word(s: &str) -> ObjString {
    s.parse().expect("well-formed string")
}

pub fn random_letter(rng: &mut impl Rng, places: &[&str]) -> Letter {
    let p = *places.choose(rng).expect("at least one place");
    if rng.gen_bool(0.5) {
        Letter::pos(p)
    } else {
        Letter::neg(p)
    }
}

pub fn random_string(rng: &mut impl Rng, places: &[&str], max_len: usize) -> ObjString {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| random_letter(rng, places)).collect()
}

/// A shuffled string with multiplicity `m`, padded with `pad` cancelling pairs.
pub fn arrangement(rng: &mut impl Rng, m: &SignedMultiset, places: &[&str], pad: usize) -> ObjString {
    let mut letters = ObjString::section(m).letters().to_vec();
    for _ in 0..pad {
        let l = random_letter(rng, places);
        letters.push(l.inverse());
        letters.push(l);
    }
    letters.shuffle(rng);
    ObjString::from_letters(letters)
}

/// Places `a b c` with a spread of interface shapes, including a signed one.
pub fn term_signature() -> Net {
    Net::new(Flavor::Int)
        .with_place("a")
        .with_place("b")
        .with_place("c")
        .with_transition("f", ms(&[("a", 1)]), ms(&[("b", 1)]))
        .with_transition("g", ms(&[("a", 1), ("b", 1)]), ms(&[("c", 1)]))
        .with_transition("h", ms(&[]), ms(&[("a", 1)]))
        .with_transition("k", ms(&[("a", 2)]), ms(&[]))
        .with_transition("n", ms(&[("a", -1)]), ms(&[("b", 1)]))
}

pub const TERM_PLACES: [&str; 3] = ["a", "b", "c"];

pub fn cod_of(term: &Term, sig: &dyn Signature) -> ObjString {
    term.typecheck(sig).expect("generated terms are well typed").cod
}

fn is_cap_domain(u: &ObjString) -> Option<ObjString> {
    if !u.len().is_multiple_of(2) || u.is_empty() {
        return None;
    }
    let (l, r) = u.split_at(u.len() / 2);
    (r == l.dual()).then_some(l)
}

/// Single-node terms with domain `dom`.
fn leaves(rng: &mut impl Rng, sig: &Net, dom: &ObjString, gens: bool) -> Vec<Term> {
    let mut out = vec![Term::Id(dom.clone())];
    if !dom.is_empty() {
        let (l, r) = dom.split_at(rng.gen_range(0..=dom.len()));
        out.push(Term::Sym(l, r));
    }
    if let Some(half) = is_cap_domain(dom) {
        out.push(Term::Cap(half));
    }
    if gens {
        let m = dom.multiplicity();
        for (t, tr) in sig.transitions() {
            if tr.input == m {
                let pad = rng.gen_range(0..=1);
                let v = arrangement(rng, &tr.output, &TERM_PLACES, pad);
                out.push(Term::Gen(t.clone(), dom.clone(), v));
            }
        }
    }
    out
}

/// A closed-off piece `I -> w`: a cup, or a generator with bent inputs.
fn source(rng: &mut impl Rng, sig: &Net, gens: bool) -> Term {
    if gens && rng.gen_bool(0.5) {
        let ts: Vec<(&TransitionId, &Transition)> = sig.transitions().collect();
        let (t, tr) = *ts.choose(rng).expect("signature has transitions");
        let u = arrangement(rng, &tr.input, &TERM_PLACES, 0);
        let pad = rng.gen_range(0..=1);
        let v = arrangement(rng, &tr.output, &TERM_PLACES, pad);
        let g = Term::Gen(t.clone(), u.clone(), v);
        if u.is_empty() {
            return g;
        }
        return Term::Cup(u.clone()).comp(g.tensor(Term::Id(u.dual())));
    }
    let len = rng.gen_range(1..=2);
    Term::Cup((0..len).map(|_| random_letter(rng, &TERM_PLACES)).collect())
}

/// A random well-typed term with the given domain.
pub fn random_term(rng: &mut impl Rng, sig: &Net, dom: &ObjString, depth: usize, gens: bool) -> Term {
    if depth == 0 {
        let options = leaves(rng, sig, dom, gens);
        return options.choose(rng).cloned().expect("identity is always available");
    }
    match rng.gen_range(0..6) {
        0 | 1 => {
            let (l, r) = dom.split_at(rng.gen_range(0..=dom.len()));
            let left = random_term(rng, sig, &l, depth - 1, gens);
            left.tensor(random_term(rng, sig, &r, depth - 1, gens))
        }
        2 | 3 => {
            let first = random_term(rng, sig, dom, depth - 1, gens);
            let mid = cod_of(&first, sig);
            first.comp(random_term(rng, sig, &mid, depth - 1, gens))
        }
        4 => {
            let piece = source(rng, sig, gens);
            if rng.gen_bool(0.5) {
                Term::Id(dom.clone()).tensor(piece)
            } else {
                piece.tensor(Term::Id(dom.clone()))
            }
        }
        _ => random_term(rng, sig, dom, 0, gens),
    }
}

/// A random structural term (no generators) with the given domain.
pub fn random_structural(rng: &mut impl Rng, dom: &ObjString, depth: usize) -> Term {
    random_term(rng, &term_signature(), dom, depth, false)
}

/// A random integer-flavor net with places `p0..` and transitions `t0..`.
pub fn random_net(rng: &mut impl Rng, max_places: usize, max_transitions: usize, weights: (i64, i64)) -> Net {
    let n_places = rng.gen_range(1..=max_places);
    let n_trans = rng.gen_range(0..=max_transitions);
    let places: Vec<String> = (0..n_places).map(|i| format!("p{i}")).collect();
    let mut net = Net::new(Flavor::Int);
    for p in &places {
        net = net.with_place(p.as_str());
    }
    for i in 0..n_trans {
        let mut side = || -> SignedMultiset {
            let mut m = SignedMultiset::new();
            for p in &places {
                if rng.gen_bool(0.5) {
                    m.add_count(p.as_str().into(), rng.gen_range(weights.0..=weights.1));
                }
            }
            m
        };
        let input = side();
        let output = side();
        net.add_transition(TransitionId::new(format!("t{i}")), Transition::new(input, output));
    }
    net
}
