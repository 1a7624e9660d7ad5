//! Execution diagrams of firing traces, their causal order, and reordering
//! of traces that pass through illegal states.

use std::collections::{BTreeSet, HashSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Letter, ObjString, PlaceId};
use crate::diagrams::{BoxInstance, Diagram, Polarity, Site, Wire};
use crate::net::{FiringEvent, Flavor, Net, NetError, State};
use crate::registry::{Named, Registry};

/// Node budget used when none is given.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub net: Net,
    pub initial: State,
    pub events: Vec<FiringEvent>,
}

impl Trace {
    pub fn new(net: Net, initial: State, events: Vec<FiringEvent>) -> Self {
        Trace {
            net,
            initial,
            events,
        }
    }

    /// States after each prefix of the trace, starting with the initial one.
    pub fn replay(&self) -> Result<Vec<State>, NetError> {
        self.net.fire_sequence(&self.initial, &self.events)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionError {
    #[error("traces of {0} nets are not supported here")]
    UnsupportedFlavor(Flavor),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// The execution diagram of a trace: box `i` is event `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub diagram: Diagram,
    pub states: Vec<State>,
}

struct Token {
    place: PlaceId,
    polarity: Polarity,
    site: Site,
    owner: Option<usize>,
}

/// Builds the execution diagram of a trace.
///
/// Open wire ends form a frontier. A consumer port takes the oldest open
/// producer end of its place; if there is none it stays open as a debt.
/// A producer port pays the oldest debt of its place, otherwise it stays
/// open as a token. Ends are never matched with another port of the box
/// being fired. What is left open at the end becomes the codomain.
pub fn trace_to_diagram(trace: &Trace) -> Result<Execution, ExecutionError> {
    if trace.net.flavor == Flavor::Nat {
        return Err(ExecutionError::UnsupportedFlavor(Flavor::Nat));
    }
    let states = trace.replay()?;
    let dom = ObjString::section(trace.initial.marking());
    let mut frontier: Vec<Token> = dom
        .iter()
        .enumerate()
        .map(|(i, l)| Token {
            place: l.place.clone(),
            polarity: if l.sign.value() > 0 {
                Polarity::Producer
            } else {
                Polarity::Consumer
            },
            site: Site::Dom(i),
            owner: None,
        })
        .collect();
    let mut wires = Vec::new();
    let mut boxes = Vec::new();

    for (b, ev) in trace.events.iter().enumerate() {
        let tr = trace.net.transition(&ev.transition)?;
        let bx = BoxInstance::new(ev.transition.clone(), tr.input.clone(), tr.output.clone());
        let ports = bx
            .inputs()
            .iter()
            .enumerate()
            .map(|(k, p)| (Site::In(b, k), p))
            .chain(bx.outputs().iter().enumerate().map(|(k, p)| (Site::Out(b, k), p)));
        for (site, port) in ports {
            let partner = frontier.iter().position(|tok| {
                tok.place == port.place && tok.polarity != port.polarity && tok.owner != Some(b)
            });
            match partner {
                Some(i) => {
                    let tok = frontier.remove(i);
                    wires.push(match port.polarity {
                        Polarity::Producer => Wire { from: site, to: tok.site },
                        Polarity::Consumer => Wire { from: tok.site, to: site },
                    });
                }
                None => frontier.push(Token {
                    place: port.place.clone(),
                    polarity: port.polarity,
                    site,
                    owner: Some(b),
                }),
            }
        }
        boxes.push(bx);
    }

    let mut cod = Vec::new();
    for (j, tok) in frontier.into_iter().enumerate() {
        match tok.polarity {
            Polarity::Producer => {
                cod.push(Letter::pos(tok.place));
                wires.push(Wire { from: tok.site, to: Site::Cod(j) });
            }
            Polarity::Consumer => {
                cod.push(Letter::neg(tok.place));
                wires.push(Wire { from: Site::Cod(j), to: tok.site });
            }
        }
    }
    let diagram = Diagram::from_parts(dom, ObjString::from_letters(cod), boxes, wires)
        .expect("frontier construction yields a valid diagram");
    Ok(Execution { diagram, states })
}

/// Strict partial order on boxes induced by box-to-box wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalOrder {
    size: usize,
    edges: BTreeSet<(usize, usize)>,
    relation: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("CyclicError: the boxes {0:?} depend on each other")]
pub struct CyclicError(pub Vec<usize>);

fn box_of(s: Site) -> Option<usize> {
    match s {
        Site::In(b, _) | Site::Out(b, _) => Some(b),
        _ => None,
    }
}

pub fn causal_order(d: &Diagram) -> Result<CausalOrder, CyclicError> {
    let n = d.boxes().len();
    let edges: BTreeSet<(usize, usize)> = d
        .wires()
        .iter()
        .filter_map(|w| Some((box_of(w.from)?, box_of(w.to)?)))
        .collect();
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &edges {
        succ[a].push(b);
    }
    let mut relation = BTreeSet::new();
    for start in 0..n {
        let mut stack = succ[start].clone();
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                relation.insert((start, v));
                stack.extend(&succ[v]);
            }
        }
    }
    let cyclic: Vec<usize> = (0..n).filter(|&v| relation.contains(&(v, v))).collect();
    if !cyclic.is_empty() {
        return Err(CyclicError(cyclic));
    }
    Ok(CausalOrder {
        size: n,
        edges,
        relation,
    })
}

impl CausalOrder {
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.relation.contains(&(a, b))
    }

    /// All related pairs (the transitive closure).
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.relation.iter().copied()
    }

    /// Pairs joined directly by a wire.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn predecessors(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.relation.iter().filter(move |&&(_, y)| y == b).map(|&(x, _)| x)
    }

    /// Whether `order` lists every box once, after all its predecessors.
    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        let mut position = vec![usize::MAX; self.size];
        for (i, &b) in order.iter().enumerate() {
            if b >= self.size || position[b] != usize::MAX {
                return false;
            }
            position[b] = i;
        }
        order.len() == self.size && self.relation.iter().all(|&(a, b)| position[a] < position[b])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub reordered: bool,
    pub trace: Vec<FiringEvent>,
    pub states: Vec<State>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvableReason {
    IllegalInitialState,
    Cyclic,
    NoLegalOrder,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("resolution is not defined for {0} nets")]
    RejectedFlavor(Flavor),
    #[error("Unresolvable ({reason:?}); best legal prefix has {} events", best_prefix.len())]
    Unresolvable {
        reason: UnresolvableReason,
        best_prefix: Vec<FiringEvent>,
    },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// The data a resolver searches over.
pub struct OrderProblem<'a> {
    pub net: &'a Net,
    pub initial: &'a State,
    pub events: &'a [FiringEvent],
    pub order: &'a CausalOrder,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Vec<usize>),
    NotFound { best_prefix: Vec<usize>, budget_exhausted: bool },
}

/// Finds a linear extension of the causal order whose replay stays legal.
pub trait Resolver: Named + Send + Sync {
    fn search(&self, problem: &OrderProblem<'_>) -> SearchOutcome;
}

impl OrderProblem<'_> {
    fn step(&self, s: &State, e: usize) -> State {
        let tr = self.net.transition(&self.events[e].transition).expect("replayed");
        State::new(&(s.marking() - &tr.input) + &tr.output)
    }

    fn nat_enabled(&self, s: &State, e: usize) -> bool {
        let tr = self.net.transition(&self.events[e].transition).expect("replayed");
        tr.input.iter().all(|(p, k)| s.get(p) >= k)
    }

    fn ready(&self, placed: &[bool]) -> Vec<usize> {
        (0..self.events.len())
            .filter(|&e| !placed[e] && self.order.predecessors(e).all(|p| placed[p]))
            .collect()
    }
}

/// Depth-first search over linear extensions. Events enabled in the
/// ordinary sense are tried first, then by timestamp. Since the state
/// reached depends only on the set of events fired, dead sets are
/// remembered.
pub struct DfsResolver;

impl Named for DfsResolver {
    fn name(&self) -> &'static str {
        "dfs"
    }
}

struct Dfs<'p, 'a> {
    problem: &'p OrderProblem<'a>,
    nodes: usize,
    dead: HashSet<Vec<bool>>,
    best: Vec<usize>,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl Dfs<'_, '_> {
    fn go(&mut self, s: &State, placed: &mut Vec<bool>, order: &mut Vec<usize>) -> Step {
        if order.len() > self.best.len() {
            self.best = order.clone();
        }
        if order.len() == placed.len() {
            return Step::Found;
        }
        if self.dead.contains(placed) {
            return Step::Dead;
        }
        let p = self.problem;
        let mut ready = p.ready(placed);
        ready.sort_by_key(|&e| (!p.nat_enabled(s, e), p.events[e].timestamp, e));
        for e in ready {
            self.nodes += 1;
            if self.nodes > p.budget {
                return Step::OutOfBudget;
            }
            let next = p.step(s, e);
            if !next.is_legal() {
                continue;
            }
            placed[e] = true;
            order.push(e);
            match self.go(&next, placed, order) {
                Step::Dead => {}
                other => return other,
            }
            order.pop();
            placed[e] = false;
        }
        self.dead.insert(placed.clone());
        Step::Dead
    }
}

impl Resolver for DfsResolver {
    fn search(&self, problem: &OrderProblem<'_>) -> SearchOutcome {
        let mut dfs = Dfs {
            problem,
            nodes: 0,
            dead: HashSet::new(),
            best: Vec::new(),
        };
        let mut placed = vec![false; problem.events.len()];
        let mut order = Vec::new();
        match dfs.go(problem.initial, &mut placed, &mut order) {
            Step::Found => SearchOutcome::Found(order),
            Step::Dead => SearchOutcome::NotFound {
                best_prefix: dfs.best,
                budget_exhausted: false,
            },
            Step::OutOfBudget => SearchOutcome::NotFound {
                best_prefix: dfs.best,
                budget_exhausted: true,
            },
        }
    }
}

/// Tries every permutation in lexicographic order of event index and keeps
/// the first legal linear extension. Only for small traces.
pub struct ExhaustiveResolver;

impl Named for ExhaustiveResolver {
    fn name(&self) -> &'static str {
        "exhaustive"
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl Resolver for ExhaustiveResolver {
    fn search(&self, problem: &OrderProblem<'_>) -> SearchOutcome {
        let mut perm: Vec<usize> = (0..problem.events.len()).collect();
        let mut best = Vec::new();
        let mut tried = 0;
        loop {
            tried += 1;
            if tried > problem.budget {
                return SearchOutcome::NotFound {
                    best_prefix: best,
                    budget_exhausted: true,
                };
            }
            if problem.order.is_linear_extension(&perm) {
                let mut s = problem.initial.clone();
                let mut legal_prefix = 0;
                for &e in &perm {
                    s = problem.step(&s, e);
                    if !s.is_legal() {
                        break;
                    }
                    legal_prefix += 1;
                }
                if legal_prefix == perm.len() {
                    return SearchOutcome::Found(perm);
                }
                if legal_prefix > best.len() {
                    best = perm[..legal_prefix].to_vec();
                }
            }
            if !next_permutation(&mut perm) {
                return SearchOutcome::NotFound {
                    best_prefix: best,
                    budget_exhausted: false,
                };
            }
        }
    }
}

pub fn resolver_registry() -> &'static Registry<dyn Resolver> {
    static REGISTRY: OnceLock<Registry<dyn Resolver>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Resolver> = Registry::new();
        reg.register(Arc::new(DfsResolver));
        reg.register(Arc::new(ExhaustiveResolver));
        reg
    })
}

/// Resolves with the default resolver and budget.
pub fn resolve(trace: &Trace) -> Result<Resolution, ResolveError> {
    let resolver = resolver_registry().default_strategy().expect("registry has a default");
    resolve_with(resolver.as_ref(), trace, DEFAULT_BUDGET)
}

/// Reorders `trace` so that every intermediate state is legal. A trace
/// that is already legal and respects its causal order comes back as is.
pub fn resolve_with(resolver: &dyn Resolver, trace: &Trace, budget: usize) -> Result<Resolution, ResolveError> {
    if trace.net.flavor == Flavor::Int {
        return Err(ResolveError::RejectedFlavor(Flavor::Int));
    }
    let zstate = Trace::new(trace.net.with_flavor(Flavor::ZState), trace.initial.clone(), trace.events.clone());
    let states = zstate.replay()?;
    let unresolvable = |reason, prefix: &[usize]| ResolveError::Unresolvable {
        reason,
        best_prefix: prefix.iter().map(|&e| trace.events[e].clone()).collect(),
    };
    if !trace.initial.is_legal() {
        return Err(unresolvable(UnresolvableReason::IllegalInitialState, &[]));
    }
    let execution = trace_to_diagram(&zstate).map_err(|e| match e {
        ExecutionError::Net(n) => ResolveError::Net(n),
        ExecutionError::UnsupportedFlavor(f) => ResolveError::RejectedFlavor(f),
    })?;
    let order = causal_order(&execution.diagram).map_err(|_| unresolvable(UnresolvableReason::Cyclic, &[]))?;
    let identity: Vec<usize> = (0..trace.events.len()).collect();
    if states.iter().all(State::is_legal) && order.is_linear_extension(&identity) {
        return Ok(Resolution {
            reordered: false,
            trace: trace.events.clone(),
            states,
        });
    }
    let problem = OrderProblem {
        net: &zstate.net,
        initial: &trace.initial,
        events: &trace.events,
        order: &order,
        budget,
    };
    match resolver.search(&problem) {
        SearchOutcome::Found(perm) => {
            let events: Vec<FiringEvent> = perm.iter().map(|&e| trace.events[e].clone()).collect();
            let states = zstate.net.fire_sequence(&trace.initial, &events)?;
            Ok(Resolution {
                reordered: perm != identity,
                trace: events,
                states,
            })
        }
        SearchOutcome::NotFound {
            best_prefix,
            budget_exhausted,
        } => Err(unresolvable(
            if budget_exhausted {
                UnresolvableReason::BudgetExhausted
            } else {
                UnresolvableReason::NoLegalOrder
            },
            &best_prefix,
        )),
    }
}
