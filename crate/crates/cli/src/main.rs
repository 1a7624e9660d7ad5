use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use zpetri_core::diagrams::{equality_registry, Diagram};
use zpetri_core::execution::{resolve_with, resolver_registry, ResolveError, Trace, DEFAULT_BUDGET};
use zpetri_core::functors::{fold, roundtrip_check, unfold, CategoryPresentation};
use zpetri_core::net::{semantics_registry, FiringEvent, Net, NetError, State};
use zpetri_core::sim::{simulate, SimConfig};
use zpetri_core::terms::{parse, Term};

#[derive(Parser)]
#[command(name = "zpetri", version, about = "Petri nets with integer states and their string diagrams")]
struct Cli {
    /// Only report through the exit code where possible.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override the simulator seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Check a net's invariants.
    Validate {
        #[arg(long)]
        net: PathBuf,
    },
    /// Fire one transition.
    Fire {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        transition: String,
        /// Defaults to the net's own flavor.
        #[arg(long)]
        semantics: Option<String>,
    },
    /// Replay a trace and print every state.
    Replay {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Decide whether two terms denote the same morphism.
    Eq {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[arg(long, default_value = "quotient")]
        equality: String,
    },
    /// Print the normal-form diagram of a term.
    Normalize {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the transposed diagram of a term.
    Transpose {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the category presentation of a net.
    Fold {
        #[arg(long)]
        net: PathBuf,
    },
    /// Print the integer net of a presentation.
    Unfold {
        #[arg(long)]
        pres: PathBuf,
    },
    /// Check that unfolding the fold of a net gives the net back.
    Roundtrip {
        #[arg(long)]
        net: PathBuf,
    },
    /// Reorder a trace so that every intermediate state is legal.
    Resolve {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "dfs")]
        resolver: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Run a multi-agent scenario.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Upper bound of random extra delivery delay, overriding the config.
        #[arg(long)]
        jitter: Option<u64>,
    },
    /// Write the Graphviz rendering of a term's diagram.
    ExportDot {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

/// Whether the command's answer was positive. Errors are usage problems.
enum Outcome {
    Success,
    Failure,
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {what} file {}", path.display()))
}

/// A term given inline, or `@path` to read it from a file.
fn read_term(arg: &str) -> Result<Term> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("cannot read term file {path}"))?,
        None => arg.to_owned(),
    };
    parse(text.trim()).with_context(|| format!("cannot parse term `{}`", text.trim()))
}

fn diagram_of(net: &Net, arg: &str) -> Result<Diagram> {
    let term = read_term(arg)?;
    Diagram::of_term(&term, net).with_context(|| format!("ill-typed term `{term}`"))
}

fn render(d: &Diagram, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(d).expect("diagram serializes"),
        Format::Dot => d.to_dot().trim_end().to_owned(),
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn run(cli: &Cli) -> Result<Outcome> {
    let say = |text: &str| {
        if !cli.quiet {
            println!("{text}");
        }
    };
    match &cli.command {
        Command::Validate { net } => {
            let net: Net = read_json(net, "net")?;
            for w in net.diagnostics().iter().filter(|v| v.is_warning()) {
                eprintln!("warning: {w}");
            }
            match net.validate() {
                Ok(()) => {
                    say("ok");
                    Ok(Outcome::Success)
                }
                Err(vs) => {
                    for v in vs {
                        eprintln!("{v}");
                    }
                    Ok(Outcome::Failure)
                }
            }
        }
        Command::Fire {
            net,
            state,
            transition,
            semantics,
        } => {
            let net: Net = read_json(net, "net")?;
            let state: State = read_json(state, "state")?;
            let sem = match semantics {
                Some(name) => semantics_registry().get(name).with_context(|| {
                    let known: Vec<_> = semantics_registry().names().collect();
                    format!("unknown semantics {name}; expected one of {}", known.join(", "))
                })?,
                None => net.semantics(),
            };
            match net.fire_with(sem.as_ref(), &state, &transition.as_str().into()) {
                Ok(next) => {
                    say(&serde_json::to_string(&next)?);
                    Ok(Outcome::Success)
                }
                Err(e @ NetError::NotEnabled { .. }) => {
                    eprintln!("{e}");
                    Ok(Outcome::Failure)
                }
                Err(e) => bail!(e),
            }
        }
        Command::Replay { net, state, trace } => {
            let net: Net = read_json(net, "net")?;
            let state: State = read_json(state, "state")?;
            let events: Vec<FiringEvent> = read_json(trace, "trace")?;
            match net.fire_sequence(&state, &events) {
                Ok(states) => {
                    for s in &states {
                        say(&serde_json::to_string(s)?);
                    }
                    Ok(Outcome::Success)
                }
                Err(e @ NetError::NotEnabled { .. }) => {
                    eprintln!("{e}");
                    Ok(Outcome::Failure)
                }
                Err(e) => bail!(e),
            }
        }
        Command::Eq { net, lhs, rhs, equality } => {
            let net: Net = read_json(net, "net")?;
            let strategy = equality_registry().get(equality).with_context(|| {
                let known: Vec<_> = equality_registry().names().collect();
                format!("unknown equality {equality}; expected one of {}", known.join(", "))
            })?;
            let (a, b) = (diagram_of(&net, lhs)?, diagram_of(&net, rhs)?);
            if strategy.equal(&a, &b) {
                say("equal");
                Ok(Outcome::Success)
            } else {
                say("not equal");
                Ok(Outcome::Failure)
            }
        }
        Command::Normalize { net, term, format } => {
            let net: Net = read_json(net, "net")?;
            say(&render(&diagram_of(&net, term)?.normalize(), *format));
            Ok(Outcome::Success)
        }
        Command::Transpose { net, term, format } => {
            let net: Net = read_json(net, "net")?;
            say(&render(&diagram_of(&net, term)?.transpose().normalize(), *format));
            Ok(Outcome::Success)
        }
        Command::Fold { net } => {
            let net: Net = read_json(net, "net")?;
            match fold(&net) {
                Ok(pres) => {
                    say(&pretty(&pres));
                    Ok(Outcome::Success)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(Outcome::Failure)
                }
            }
        }
        Command::Unfold { pres } => {
            let pres: CategoryPresentation = read_json(pres, "presentation")?;
            say(&pretty(&unfold(&pres)));
            Ok(Outcome::Success)
        }
        Command::Roundtrip { net } => {
            let net: Net = read_json(net, "net")?;
            match roundtrip_check(&net) {
                Ok(unit) => {
                    say(&pretty(&unit.map));
                    Ok(Outcome::Success)
                }
                Err(problems) => {
                    for p in problems {
                        eprintln!("{p}");
                    }
                    Ok(Outcome::Failure)
                }
            }
        }
        Command::Resolve {
            net,
            state,
            trace,
            resolver,
            budget,
        } => {
            let net: Net = read_json(net, "net")?;
            let state: State = read_json(state, "state")?;
            let events: Vec<FiringEvent> = read_json(trace, "trace")?;
            let strategy = resolver_registry().get(resolver).with_context(|| {
                let known: Vec<_> = resolver_registry().names().collect();
                format!("unknown resolver {resolver}; expected one of {}", known.join(", "))
            })?;
            match resolve_with(strategy.as_ref(), &Trace::new(net, state, events), *budget) {
                Ok(res) => {
                    say(&pretty(&res));
                    Ok(Outcome::Success)
                }
                Err(e @ ResolveError::Unresolvable { .. }) => {
                    eprintln!("{e}");
                    if let ResolveError::Unresolvable { best_prefix, .. } = &e {
                        say(&pretty(&serde_json::json!({ "best_prefix": best_prefix })));
                    }
                    Ok(Outcome::Failure)
                }
                Err(e @ ResolveError::RejectedFlavor(_)) => {
                    eprintln!("{e}");
                    Ok(Outcome::Failure)
                }
                Err(e) => bail!(e),
            }
        }
        Command::Simulate { config, jitter } => {
            let mut scenario = SimConfig::from_file(config)?;
            if let Some(seed) = cli.seed {
                scenario.seed = seed;
            }
            if let Some(jitter) = jitter {
                scenario.jitter = *jitter;
            }
            say(&simulate(&scenario).to_json());
            Ok(Outcome::Success)
        }
        Command::ExportDot { net, term, output } => {
            let net: Net = read_json(net, "net")?;
            let dot = diagram_of(&net, term)?.normalize().to_dot();
            fs::write(output, dot).with_context(|| format!("cannot write {}", output.display()))?;
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
