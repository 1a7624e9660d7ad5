//! A deterministic multi-agent simulator with delayed broadcasts.
//!
//! Agents fire transitions from fixed schedules on their own local view of
//! the net state, which only learns of other agents' firings once the
//! broadcast arrives. The merged global trace is ordered by logical time,
//! ties broken by agent name, and replayed to find illegal stretches; if
//! there are any, the merged trace is handed to the resolver.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::SignedMultiset;
use crate::execution::{resolve, ResolveError, Resolution, Trace, UnresolvableReason};
use crate::net::{FiringEvent, Net, State, TransitionId, ZStateSemantics};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(String),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub name: String,
    /// `(local time, transition)` pairs.
    #[serde(default)]
    pub schedule: Vec<(u64, TransitionId)>,
}

fn default_max_steps() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub net: Source<Net>,
    #[serde(default = "empty_state")]
    pub initial: Source<State>,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
    /// Broadcast latency between any two agents.
    #[serde(default)]
    pub delay: u64,
    /// Per-pair overrides: sender, then receiver.
    #[serde(default)]
    pub delays: BTreeMap<String, BTreeMap<String, u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Upper bound of a random extra delay added to each delivery.
    #[serde(default)]
    pub jitter: u64,
}

fn empty_state() -> Source<State> {
    Source::Inline(State::default())
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {what}: {source}")]
    Parse {
        what: String,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn load<T>(source: &Source<T>, base: &Path) -> Result<T, SimError>
where
    T: for<'de> Deserialize<'de> + Clone,
{
    match source {
        Source::Inline(v) => Ok(v.clone()),
        Source::Path(p) => {
            let path = base.join(p);
            let text = std::fs::read_to_string(&path).map_err(|source| SimError::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|source| SimError::Parse {
                what: path.display().to_string(),
                source,
            })
        }
    }
}

/// A configuration with its files loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub net: Net,
    pub initial: State,
    pub agents: Vec<AgentConfig>,
    pub delay: u64,
    pub delays: BTreeMap<String, BTreeMap<String, u64>>,
    pub seed: u64,
    pub max_steps: usize,
    pub jitter: u64,
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Scenario, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: SimConfig = serde_json::from_str(&text).map_err(|source| SimError::Parse {
            what: path.display().to_string(),
            source,
        })?;
        cfg.into_scenario(path.parent().unwrap_or(Path::new(".")))
    }

    /// Loads referenced files relative to `base` and validates.
    pub fn into_scenario(self, base: &Path) -> Result<Scenario, SimError> {
        let scenario = Scenario {
            net: load(&self.net, base)?,
            initial: load(&self.initial, base)?,
            agents: self.agents,
            delay: self.delay,
            delays: self.delays,
            seed: self.seed,
            max_steps: self.max_steps,
            jitter: self.jitter,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if let Err(vs) = self.net.validate() {
            let msgs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            return Err(SimError::Config(format!("net: {}", msgs.join("; "))));
        }
        let mut names = BTreeSet::new();
        for a in &self.agents {
            if !names.insert(a.name.as_str()) {
                return Err(SimError::Config(format!("duplicate agent {}", a.name)));
            }
            for (_, t) in &a.schedule {
                if self.net.transition(t).is_err() {
                    return Err(SimError::Config(format!("agent {} schedules unknown transition {t}", a.name)));
                }
            }
        }
        for (from, row) in &self.delays {
            for to in std::iter::once(from).chain(row.keys()) {
                if !names.contains(to.as_str()) {
                    return Err(SimError::Config(format!("delay refers to unknown agent {to}")));
                }
            }
        }
        Ok(())
    }

    fn latency(&self, from: &str, to: &str) -> u64 {
        self.delays
            .get(from)
            .and_then(|row| row.get(to))
            .copied()
            .unwrap_or(self.delay)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub index: usize,
    pub time: u64,
    pub agent: String,
    pub transition: TransitionId,
    pub state: State,
    pub legal: bool,
}

/// A maximal run of consecutive illegal global states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllegalInterval {
    pub from_step: usize,
    pub to_step: usize,
    pub from_time: u64,
    pub to_time: u64,
    /// The lowest count reached by each place that went negative.
    pub deficit: SignedMultiset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReport {
    pub name: String,
    pub fired: usize,
    pub received: usize,
    pub final_view: State,
    /// Logical times at which a delivered broadcast made the local view illegal.
    pub conflicts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ResolutionOutcome {
    NotNeeded,
    Resolved { resolution: Resolution },
    Unresolvable {
        reason: UnresolvableReason,
        best_prefix: Vec<FiringEvent>,
    },
    Rejected { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub trace: Vec<FiringEvent>,
    pub initial: State,
    pub steps: Vec<Step>,
    pub illegal_intervals: Vec<IllegalInterval>,
    pub agents: Vec<AgentReport>,
    pub truncated: bool,
    pub resolution: ResolutionOutcome,
}

impl SimReport {
    pub fn final_state(&self) -> &State {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    // Deliveries at a given time happen before firings at that time.
    Deliver { to: usize, from: usize, transition: TransitionId },
    Fire { agent: usize, transition: TransitionId },
}

pub fn simulate(sc: &Scenario) -> SimReport {
    let mut agents = sc.agents.clone();
    agents.sort_by(|a, b| a.name.cmp(&b.name));
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut queue: BinaryHeap<Reverse<(u64, Action, u64)>> = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, a) in agents.iter().enumerate() {
        for (time, t) in &a.schedule {
            queue.push(Reverse((*time, Action::Fire { agent: i, transition: t.clone() }, seq)));
            seq += 1;
        }
    }

    let mut views: Vec<State> = vec![sc.initial.clone(); agents.len()];
    let mut reports: Vec<AgentReport> = agents
        .iter()
        .map(|a| AgentReport {
            name: a.name.clone(),
            fired: 0,
            received: 0,
            final_view: sc.initial.clone(),
            conflicts: Vec::new(),
        })
        .collect();
    let mut fired: Vec<(u64, usize, TransitionId)> = Vec::new();
    let mut processed = 0;
    let mut truncated = false;

    while let Some(Reverse((time, action, _))) = queue.pop() {
        if processed == sc.max_steps {
            truncated = true;
            break;
        }
        processed += 1;
        match action {
            Action::Fire { agent, transition } => {
                views[agent] = sc.net.fire_with(&ZStateSemantics, &views[agent], &transition).expect("validated schedule");
                reports[agent].fired += 1;
                fired.push((time, agent, transition.clone()));
                for to in 0..agents.len() {
                    if to == agent {
                        continue;
                    }
                    let mut delay = sc.latency(&agents[agent].name, &agents[to].name);
                    if sc.jitter > 0 {
                        delay += rng.gen_range(0..=sc.jitter);
                    }
                    queue.push(Reverse((
                        time + delay,
                        Action::Deliver { to, from: agent, transition: transition.clone() },
                        seq,
                    )));
                    seq += 1;
                }
            }
            Action::Deliver { to, transition, .. } => {
                let was_legal = views[to].is_legal();
                views[to] = sc.net.fire_with(&ZStateSemantics, &views[to], &transition).expect("validated schedule");
                reports[to].received += 1;
                if was_legal && !views[to].is_legal() {
                    reports[to].conflicts.push(time);
                }
            }
        }
    }
    for (r, v) in reports.iter_mut().zip(&views) {
        r.final_view = v.clone();
    }

    // `fired` is already in (time, agent name) order.
    let trace: Vec<FiringEvent> = fired
        .iter()
        .enumerate()
        .map(|(i, (_, a, t))| FiringEvent::new(t.clone(), Some(&agents[*a].name), i as i64 + 1))
        .collect();
    let mut steps = Vec::new();
    let mut state = sc.initial.clone();
    for (i, (time, a, t)) in fired.iter().enumerate() {
        state = sc.net.fire_with(&ZStateSemantics, &state, t).expect("validated schedule");
        steps.push(Step {
            index: i + 1,
            time: *time,
            agent: agents[*a].name.clone(),
            transition: t.clone(),
            legal: state.is_legal(),
            state: state.clone(),
        });
    }
    let illegal_intervals = illegal_intervals(&steps);
    let resolution = if illegal_intervals.is_empty() && sc.initial.is_legal() {
        ResolutionOutcome::NotNeeded
    } else {
        match resolve(&Trace::new(sc.net.clone(), sc.initial.clone(), trace.clone())) {
            Ok(resolution) => ResolutionOutcome::Resolved { resolution },
            Err(ResolveError::Unresolvable { reason, best_prefix }) => {
                ResolutionOutcome::Unresolvable { reason, best_prefix }
            }
            Err(e) => ResolutionOutcome::Rejected { error: e.to_string() },
        }
    };
    SimReport {
        seed: sc.seed,
        trace,
        initial: sc.initial.clone(),
        steps,
        illegal_intervals,
        agents: reports,
        truncated,
        resolution,
    }
}

fn illegal_intervals(steps: &[Step]) -> Vec<IllegalInterval> {
    let mut out: Vec<IllegalInterval> = Vec::new();
    let mut open = false;
    for step in steps {
        if step.legal {
            open = false;
            continue;
        }
        let negative: SignedMultiset = step.state.marking().iter().filter(|(_, k)| *k < 0).map(|(p, k)| (p.clone(), k)).collect();
        match out.last_mut() {
            Some(cur) if open => {
                cur.to_step = step.index;
                cur.to_time = step.time;
                for (p, k) in negative.iter() {
                    if k < cur.deficit.get(p) {
                        cur.deficit.add_count(p.clone(), k - cur.deficit.get(p));
                    }
                }
            }
            _ => out.push(IllegalInterval {
                from_step: step.index,
                to_step: step.index,
                from_time: step.time,
                to_time: step.time,
                deficit: negative,
            }),
        }
        open = true;
    }
    out
}
