//! `psi`: parse agent files, draw transition graphs, check bisimilarity and
//! test instance requisites.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use psi_core::bisim::verify::{base_names, verify_concrete, verify_symbolic};
use psi_core::lts::MAX_STATES;
use psi_core::{
    build_lts, check_requisites, concrete_bisim, crosscheck, int_literals, parse, registry_lookup, requisite_pool,
    symbolic_bisim, Agent, DomainConfig, LtsMode, Name, Nominal, ParsedUnit, RequisiteSamples, Term,
};

#[derive(Parser)]
#[command(name = "psi", version, about = "Psi-calculus semantics and bisimulation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a file and print its definitions.
    Parse {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the reachable transition graph of a definition.
    Lts {
        file: PathBuf,
        def: String,
        #[arg(long, value_enum, default_value_t = LtsArg::Late)]
        mode: LtsArg,
        /// Cap on explored states.
        #[arg(long, default_value_t = MAX_STATES)]
        max_states: usize,
        /// Graphviz output instead of text.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[command(flatten)]
        dom: DomArgs,
        #[arg(long)]
        json: bool,
    },
    /// Decide bisimilarity of two definitions.
    Bisim {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = BisimArg::Symbolic)]
        mode: BisimArg,
        #[command(flatten)]
        dom: DomArgs,
        #[arg(long)]
        json: bool,
    },
    /// Property-test the requisites of a registered instance.
    CheckInstance {
        key: String,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, env = "PSI_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LtsArg {
    Late,
    Early,
    Symbolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum BisimArg {
    Concrete,
    Symbolic,
    Crosscheck,
}

#[derive(Args)]
struct DomArgs {
    /// Name pool; defaults to the file's `names` line, else the free names
    /// of the definitions involved.
    #[arg(long, value_delimiter = ',')]
    names: Option<Vec<String>>,
    /// Names never substituted by solutions.
    #[arg(long, value_delimiter = ',')]
    rigid: Vec<String>,
    /// Integer literals for the pool; defaults to those in the definitions.
    #[arg(long, value_delimiter = ',')]
    literals: Option<Vec<i64>>,
    #[arg(long, default_value_t = 1)]
    term_depth: usize,
    #[arg(long, default_value_t = 1)]
    assert_depth: usize,
    #[arg(long, default_value_t = 1)]
    rep_bound: usize,
    #[arg(long, default_value_t = 1)]
    probe_depth: usize,
}

impl DomArgs {
    fn config(&self, unit: &ParsedUnit, agents: &[&Agent]) -> DomainConfig {
        let names: Vec<Name> = match (&self.names, &unit.names) {
            (Some(given), _) => given.iter().map(|n| Name::new(n)).collect(),
            (None, Some(declared)) => declared.clone(),
            (None, None) => {
                let mut free = std::collections::BTreeSet::new();
                agents.iter().for_each(|a| free.extend(a.support()));
                free.into_iter().collect()
            }
        };
        let literals = match &self.literals {
            Some(ints) => ints.iter().map(|i| Term::Int(*i)).collect(),
            None => int_literals(agents),
        };
        DomainConfig {
            names,
            literals,
            term_depth: self.term_depth,
            assert_depth: self.assert_depth,
            rep_bound: self.rep_bound,
            probe_depth: self.probe_depth,
            rigid: self.rigid.iter().map(|n| Name::new(n)).collect(),
        }
    }
}

fn load(file: &PathBuf) -> Result<ParsedUnit> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    parse(&text).with_context(|| file.display().to_string())
}

fn print_json(v: &Value) {
    use std::io::Write;
    // a closed pipe (`psi ... | head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("plain data"));
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Parse { file, json } => {
            let unit = load(&file)?;
            if json {
                let defs: Vec<Value> = unit
                    .defs
                    .iter()
                    .map(|(n, a)| json!({"name": n, "agent": a.to_string()}))
                    .collect();
                let names = unit.names.as_ref().map(|ns| ns.iter().map(|n| n.to_string()).collect::<Vec<_>>());
                print_json(&json!({"instance": unit.instance_key, "names": names, "defs": defs}));
            } else {
                println!("instance {}", unit.instance_key);
                if let Some(ns) = &unit.names {
                    println!("names {}", ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
                }
                for (n, a) in &unit.defs {
                    println!("def {n} = {a}");
                }
            }
            Ok(0)
        }
        Command::Lts {
            file,
            def,
            mode,
            max_states,
            dot,
            dom,
            json,
        } => {
            let unit = load(&file)?;
            let p = unit.get(&def)?;
            let cfg = dom.config(&unit, &[p]);
            let mode = match mode {
                LtsArg::Late => LtsMode::Late,
                LtsArg::Early => LtsMode::Early,
                LtsArg::Symbolic => LtsMode::Symbolic,
            };
            let inst = &*unit.instance;
            let g = build_lts(inst, &inst.unit(), p, &cfg, mode, max_states)?;
            if json {
                print_json(&g.to_json());
            } else if dot {
                print!("{}", g.to_dot());
            } else {
                for (i, s) in g.states.iter().enumerate() {
                    let mark = if s.truncated { " (truncated)" } else { "" };
                    println!("s{i}: {}{mark}", s.agent);
                }
                for e in &g.edges {
                    match &e.constraint {
                        Some(c) => println!("s{} --{}, {}--> s{}", e.source, e.action, c, e.target),
                        None => println!("s{} --{}--> s{}", e.source, e.action, e.target),
                    }
                }
                if !g.complete {
                    println!("incomplete: stopped at {max_states} states");
                }
            }
            Ok(0)
        }
        Command::Bisim {
            file,
            left,
            right,
            mode,
            dom,
            json,
        } => {
            let unit = load(&file)?;
            let p = unit.get(&left)?;
            let q = unit.get(&right)?;
            let cfg = dom.config(&unit, &[p, q]);
            let inst = &*unit.instance;
            let (out, ok) = match mode {
                BisimArg::Concrete => {
                    let v = concrete_bisim(inst, &inst.unit(), p, q, &cfg)?;
                    if v.bisimilar {
                        if let Err(e) = verify_concrete(inst, &cfg, &v.witness, &base_names(&cfg, p, q)) {
                            bail!("witness failed verification: {e}");
                        }
                    }
                    (v.to_json(), v.bisimilar)
                }
                BisimArg::Symbolic => {
                    let v = symbolic_bisim(inst, p, q, &cfg)?;
                    if v.bisimilar {
                        if let Err(e) = verify_symbolic(inst, &cfg, &v.witness, p, q) {
                            bail!("witness failed verification: {e}");
                        }
                    }
                    (v.to_json(), v.bisimilar)
                }
                BisimArg::Crosscheck => {
                    let c = crosscheck(inst, p, q, &cfg)?;
                    let mut v = serde_json::to_value(&c)?;
                    v["check"] = json!("crosscheck");
                    (v, c.agree)
                }
            };
            if json {
                print_json(&out);
            } else {
                print_verdict(&out);
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::CheckInstance {
            key,
            samples,
            seed,
            json,
        } => {
            let inst = registry_lookup(&key)?;
            let report = check_requisites(&*inst, &RequisiteSamples::new(requisite_pool(&key), samples, seed));
            if json {
                print_json(&serde_json::to_value(&report)?);
            } else {
                for l in &report.laws {
                    let status = if l.passed { "pass" } else { "FAIL" };
                    println!("{status} {:?} ({} checked)", l.law, l.checked);
                    if let Some(c) = &l.counterexample {
                        println!("  counterexample: {c}");
                    }
                }
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Constraints in text output: extensional ones by their size.
fn constraint_text(c: &Value) -> String {
    match (c.get("sols"), c.get("and")) {
        (Some(Value::Array(sols)), _) => format!("ext[{} solutions]", sols.len()),
        (_, Some(Value::Array(all))) if all.is_empty() => "true".to_string(),
        _ => c.to_string(),
    }
}

fn print_verdict(v: &Value) {
    if v["check"] == "crosscheck" {
        let agree = if v["agree"] == true { "agree" } else { "disagree" };
        println!(
            "symbolic {} concrete {} over {} closings: {agree}",
            v["symbolic"], v["concrete"], v["closings"]
        );
        if let Some(f) = v["failing"].as_str() {
            println!("concrete check fails under {f}");
        }
        return;
    }
    println!("{} ({} nodes)", text(&v["verdict"]), v["nodes"]);
    if v["truncated"] == true {
        println!("warning: replication bound reached");
    }
    for t in v["witness"].as_array().into_iter().flatten() {
        let first = if t["env"].is_null() { constraint_text(&t["constraint"]) } else { text(&t["env"]) };
        println!("  ({first}, {}, {})", text(&t["left"]), text(&t["right"]));
    }
    if let Some(c) = v.get("counterexample") {
        println!("start {}", text(&c["start"]));
        for s in c["steps"].as_array().into_iter().flatten() {
            let sol = s["solution"].as_str().map(|x| format!(" under {x}")).unwrap_or_default();
            println!("  {} {}{sol}", text(&s["side"]), text(&s["action"]));
            println!("    {}", text(&s["left"]));
            println!("    {}", text(&s["right"]));
        }
        println!("{}", text(&c["reason"]));
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
