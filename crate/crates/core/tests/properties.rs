mod common;

use common::{ms, random_net, random_string, random_term, rng, term_signature, TERM_PLACES};
use rand::seq::SliceRandom;
use rand::Rng;
use zpetri_core::diagrams::{equal, Diagram};
use zpetri_core::functors::lift_morphism;
use zpetri_core::net::{FiringEvent, Flavor, MorphismMap, Net, NetMorphism, State, Transition};
use zpetri_core::terms::{parse, Term};

fn random_pair(seed: u64) -> (Net, Term) {
    let sig = term_signature();
    let mut r = rng(seed);
    let dom = random_string(&mut r, &TERM_PLACES, 3);
    let depth = r.gen_range(0..=4);
    let t = random_term(&mut r, &sig, &dom, depth, true);
    (sig, t)
}

#[test]
fn rendered_terms_parse_back() {
    for seed in 0..300 {
        let (_, t) = random_pair(seed);
        let text = t.to_string();
        assert_eq!(parse(&text).unwrap(), t, "{text}");
    }
}

#[test]
fn readback_preserves_meaning() {
    for seed in 0..300 {
        let (sig, t) = random_pair(seed);
        let d = Diagram::of_term(&t, &sig).unwrap();
        let back = Diagram::of_term(&d.to_term(), &sig).unwrap();
        assert_eq!(back.dom(), d.dom());
        assert_eq!(back.cod(), d.cod());
        assert!(equal(&back, &d), "readback of {t} changed its meaning");
    }
}

#[test]
fn normal_form_is_equal_and_stable() {
    for seed in 0..300 {
        let (sig, t) = random_pair(seed);
        let d = Diagram::of_term(&t, &sig).unwrap();
        let n = d.normalize();
        assert!(equal(&n, &d));
        assert_eq!(n.normalize(), n);
    }
}

#[test]
fn diagram_of_composite_matches_composition() {
    let sig = term_signature();
    let mut r = rng(41);
    for _ in 0..200 {
        let dom = random_string(&mut r, &TERM_PLACES, 3);
        let a = random_term(&mut r, &sig, &dom, 2, true);
        let mid = a.typecheck(&sig).unwrap().cod;
        let b = random_term(&mut r, &sig, &mid, 2, true);
        let whole = Diagram::of_term(&a.clone().comp(b.clone()), &sig).unwrap();
        let da = Diagram::of_term(&a, &sig).unwrap();
        let db = Diagram::of_term(&b, &sig).unwrap();
        assert!(equal(&whole, &da.compose(&db).unwrap()));
        let side = Diagram::of_term(&a.clone().tensor(b.clone()), &sig).unwrap();
        assert!(equal(&side, &da.tensor(&db)));
    }
}

#[test]
fn integer_firing_is_order_independent() {
    let mut r = rng(5);
    for _ in 0..100 {
        let net = random_net(&mut r, 4, 4, (-2, 3));
        let names: Vec<_> = net.transitions().map(|(t, _)| t.clone()).collect();
        if names.is_empty() {
            continue;
        }
        let mut events: Vec<FiringEvent> = (0..6)
            .map(|k| FiringEvent::new(names.choose(&mut r).unwrap().clone(), None, k))
            .collect();
        let start = State::default();
        let forward = net.fire_sequence(&start, &events).unwrap();
        events.shuffle(&mut r);
        let shuffled = net.fire_sequence(&start, &events).unwrap();
        assert_eq!(forward.last(), shuffled.last());
    }
}

#[test]
fn nets_survive_json() {
    let mut r = rng(8);
    for _ in 0..100 {
        let net = random_net(&mut r, 5, 5, (-3, 3));
        let json = serde_json::to_string(&net).unwrap();
        let back: Net = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
    }
}

#[test]
fn flavors_agree_on_nonnegative_runs() {
    let mut r = rng(13);
    for _ in 0..100 {
        let net = random_net(&mut r, 3, 3, (0, 2));
        let names: Vec<_> = net.transitions().map(|(t, _)| t.clone()).collect();
        let Some(t) = names.choose(&mut r) else { continue };
        let start: State = net.places().iter().map(|p| (p.as_str(), 3)).collect();
        let nat = net.with_flavor(Flavor::Nat).fire(&start, t);
        let z = net.with_flavor(Flavor::ZState).fire(&start, t).unwrap();
        let covered = net.transition(t).unwrap().input.iter().all(|(p, k)| start.get(p) >= k);
        assert_eq!(nat.is_ok(), covered);
        if let Ok(s) = nat {
            assert_eq!(s, z);
        }
    }
}

/// Sends `a` to `x y`, `b` to `y^-1` and `c` to `x`, with each transition
/// mapped to a copy carrying the image interfaces.
fn bundling() -> NetMorphism {
    let source = term_signature();
    let map = MorphismMap {
        f: source.transitions().map(|(t, _)| (t.clone(), t.clone())).collect(),
        g: [
            ("a".into(), ms(&[("x", 1), ("y", 1)])),
            ("b".into(), ms(&[("y", -1)])),
            ("c".into(), ms(&[("x", 1)])),
        ]
        .into_iter()
        .collect(),
    };
    let mut target = Net::new(Flavor::Int).with_place("x").with_place("y");
    for (t, tr) in source.transitions() {
        target.add_transition(t.clone(), Transition::new(map.apply(&tr.input), map.apply(&tr.output)));
    }
    NetMorphism::new(source, target, map)
}

#[test]
fn lifting_respects_composition() {
    let m = bundling();
    m.check().unwrap();
    let sig = &m.source;
    let mut r = rng(17);
    for _ in 0..100 {
        let dom = random_string(&mut r, &TERM_PLACES, 2);
        let a = random_term(&mut r, sig, &dom, 2, true);
        let mid = a.typecheck(sig).unwrap().cod;
        let b = random_term(&mut r, sig, &mid, 2, true);
        let da = Diagram::of_term(&a, sig).unwrap();
        let db = Diagram::of_term(&b, sig).unwrap();
        let whole = lift_morphism(&m, &da.compose(&db).unwrap()).unwrap();
        let parts = lift_morphism(&m, &da).unwrap().compose(&lift_morphism(&m, &db).unwrap()).unwrap();
        assert!(equal(&whole, &parts), "{a} ; {b}");
    }
}
