//! Command-line front end. Results go to standard output as JSON lines (or
//! `key=value` text), diagnostics to standard error.
//!
//! Exit codes: 0 for success, zero, finite, equivalent and valid inputs; 1
//! for nonzero, infinite, inequivalent and improper inputs; 2 for input and
//! runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounded::{
    census_equivalence, multiplicity_equiv_bounded, multiplicity_equiv_letter_bounded,
    parse_order, EquivOptions,
};
use crate::circuit::{coefficient, Circuit};
use crate::decide::{
    coeff_alg, eq_alg_probe, eq_alg_with, fin_alg_with, slp_to_system, BoundConfig, CoeffQuery,
    Engine, PROBE_PRIME,
};
use crate::grammar::Grammar;
use crate::poly::MultiIndex;
use crate::polysys::{PolySystem, PolynomialApproximants};
use crate::{Error, Result};

/// Environment variable holding the default `--bound`.
pub const BOUND_ENV: &str = "ALGSERIES_BOUND";

#[derive(Debug, Parser)]
#[command(name = "algseries", version, about = "Algebraic power series from proper polynomial systems")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Hensel,
    Kleene,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Hensel => Engine::Hensel,
            EngineArg::Kleene => Engine::Kleene,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundArg {
    /// Degree bound: `D`, `explicit:D` or `formula:c` (heuristic).
    #[arg(long, env = BOUND_ENV)]
    pub bound: Option<String>,
}

impl BoundArg {
    fn resolve(&self) -> Result<BoundConfig> {
        match &self.bound {
            Some(b) => b.parse(),
            None => Err(Error::BadBound(format!(
                "no bound given; pass --bound or set {BOUND_ENV}"
            ))),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficient of X^v modulo p in the first solution component.
    Coeff {
        #[arg(long, conflicts_with = "circuit", required_unless_present = "circuit")]
        system: Option<PathBuf>,
        /// Circuit instead of a system; the coefficient is read from its polynomial.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// With --circuit: go through the equivalent proper system (one
        /// equation per gate; meant for small circuits).
        #[arg(long, requires = "circuit")]
        via_system: bool,
        /// Exponents, comma separated.
        #[arg(long)]
        v: String,
        #[arg(long)]
        p: u64,
        /// Defaults to hensel, or kleene with --via-system.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Whether the first solution component vanishes (through the bound).
    Zero {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        bound: BoundArg,
        #[arg(long, value_enum, default_value_t = EngineArg::Hensel)]
        engine: EngineArg,
        /// Decide through the reversal circuit and a randomized degree probe.
        #[arg(long)]
        probe: bool,
        /// Prime for --probe.
        #[arg(long, default_value_t = PROBE_PRIME)]
        prime: u64,
    },
    /// Whether the first solution component has finite support.
    Finite {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        bound: BoundArg,
        #[arg(long, value_enum, default_value_t = EngineArg::Hensel)]
        engine: EngineArg,
    },
    /// Multiplicity equivalence of two nonterminals.
    Equiv {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        n1: String,
        #[arg(long)]
        n2: String,
        /// Letter order, comma separated; requires letter-bounded languages.
        #[arg(long, conflicts_with = "bounded")]
        order: Option<String>,
        /// Words w1,...,wk: compare on w1* ... wk* only.
        #[arg(long)]
        bounded: Option<String>,
        #[command(flatten)]
        bound: BoundArg,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Write the polynomial approximant circuit of a stage.
    Compile {
        #[arg(long)]
        system: PathBuf,
        /// Stage; the circuit agrees with the solution below degree 2^n.
        #[arg(long)]
        n: usize,
        /// Output file; the circuit text is put in the record otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derivation count of a word, or census count of a Parikh vector.
    Oracle {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        n: String,
        #[arg(long, conflicts_with = "parikh", required_unless_present = "parikh")]
        word: Option<String>,
        /// Letter counts in terminal order, comma separated.
        #[arg(long)]
        parikh: Option<String>,
    },
    /// Validate a system, grammar or circuit file.
    Check {
        #[arg(long, group = "input")]
        system: Option<PathBuf>,
        #[arg(long, group = "input")]
        grammar: Option<PathBuf>,
        #[arg(long, group = "input")]
        circuit: Option<PathBuf>,
    },
}

/// One command's result: a record and the exit code it implies.
struct Outcome {
    record: Value,
    code: i32,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_exponents(text: &str) -> Result<MultiIndex> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Invalid(format!("bad exponent `{t}`")))
        })
        .collect::<Result<Vec<_>>>()
        .map(MultiIndex)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn execute(cli: &Cli, diag: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Coeff {
            system,
            circuit,
            via_system,
            v,
            p,
            engine,
        } => {
            let v = parse_exponents(v)?;
            if let Some(path) = circuit {
                let c = Circuit::parse(&read(path)?)?;
                if v.len() != c.vars().len() {
                    return Err(Error::Invalid(format!(
                        "--v has {} entries, circuit has {} variables",
                        v.len(),
                        c.vars().len()
                    )));
                }
                let (residue, route) = if *via_system {
                    let r = slp_to_system(&c)?;
                    let q = CoeffQuery {
                        v: r.shifted_index(&v),
                        p: *p,
                    };
                    let e = engine.map_or(Engine::Kleene, Into::into);
                    (coeff_alg(&r.system, &q, e)?.residue, "system")
                } else {
                    let c = coefficient(&c, &v, Some(*p))?;
                    (c.try_into().expect("reduced residue"), "circuit")
                };
                return Ok(Outcome {
                    record: json!({"problem": "coeff", "v": v, "p": p, "residue": residue, "route": route}),
                    code: 0,
                });
            }
            let s = PolySystem::parse(&read(system.as_ref().expect("required"))?)?;
            let e = engine.map_or(Engine::Hensel, Into::into);
            let r = coeff_alg(&s, &CoeffQuery { v: v.clone(), p: *p }, e)?;
            if !r.prime {
                writeln!(diag, "warning: modulus {p} is not prime").ok();
            }
            Ok(Outcome {
                record: merge(json!({"problem": "coeff", "v": v, "p": p}), to_value(&r)),
                code: 0,
            })
        }
        Command::Zero {
            system,
            bound,
            engine,
            probe,
            prime,
        } => {
            let s = PolySystem::parse(&read(system)?)?;
            let b = bound.resolve()?;
            if *probe {
                let r = eq_alg_probe(&s, &b, *prime, cli.seed)?;
                let code = if r.zero { 0 } else { 1 };
                return Ok(Outcome {
                    record: merge(json!({"problem": "zero", "method": "probe"}), to_value(&r)),
                    code,
                });
            }
            let r = eq_alg_with(&s, &b, (*engine).into())?;
            let code = if r.zero { 0 } else { 1 };
            Ok(Outcome {
                record: merge(json!({"problem": "zero"}), to_value(&r)),
                code,
            })
        }
        Command::Finite {
            system,
            bound,
            engine,
        } => {
            let s = PolySystem::parse(&read(system)?)?;
            let r = fin_alg_with(&s, &bound.resolve()?, (*engine).into())?;
            let code = if r.finite { 0 } else { 1 };
            Ok(Outcome {
                record: merge(json!({"problem": "finite"}), to_value(&r)),
                code,
            })
        }
        Command::Equiv {
            grammar,
            n1,
            n2,
            order,
            bounded,
            bound,
            engine,
        } => {
            let g = Grammar::parse(&read(grammar)?)?;
            let opts = EquivOptions {
                bounds: bound.resolve()?,
                engine: engine.map(Into::into),
            };
            let v = if let Some(words) = bounded {
                let ws = words
                    .split(',')
                    .map(|w| g.word(w))
                    .collect::<Result<Vec<_>>>()?;
                multiplicity_equiv_bounded(&g, n1, n2, &ws, &opts)?
            } else if let Some(o) = order {
                let names: Vec<&str> = o.split(',').map(str::trim).collect();
                let o = parse_order(&g, &names)?;
                multiplicity_equiv_letter_bounded(&g, n1, n2, Some(&o), &opts)?
            } else {
                census_equivalence(&g, n1, n2, &opts)?
            };
            let code = if v.equivalent { 0 } else { 1 };
            Ok(Outcome {
                record: merge(json!({"problem": "equiv", "n1": n1, "n2": n2}), to_value(&v)),
                code,
            })
        }
        Command::Compile { system, n, out } => {
            let s = PolySystem::parse(&read(system)?)?;
            s.require_proper()?;
            let e = PolynomialApproximants::build(&s, *n)?;
            let c = e.circuit(0);
            let text = c.to_string();
            let mut record = json!({
                "problem": "compile",
                "stage": n,
                "gates": c.size(),
                "formal_degree": c.formal_degree().to_string(),
                "exact_below": if *n >= 64 { Value::Null } else { json!(1u64 << n) },
            });
            match out {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| {
                        Error::Invalid(format!("cannot write {}: {e}", path.display()))
                    })?;
                    record["out"] = json!(path.display().to_string());
                }
                None => record["circuit"] = json!(text),
            }
            Ok(Outcome { record, code: 0 })
        }
        Command::Oracle {
            grammar,
            n,
            word,
            parikh,
        } => {
            let g = Grammar::parse(&read(grammar)?)?;
            let record = match (word, parikh) {
                (Some(w), _) => {
                    let ws = g.word(w)?;
                    let c = g.count_derivations(n, &ws)?;
                    json!({"problem": "oracle", "n": n, "word": g.word_text(&ws), "count": c.to_string()})
                }
                (None, Some(v)) => {
                    let v = parse_exponents(v)?;
                    let c = g.census_count(n, &v)?;
                    json!({"problem": "oracle", "n": n, "parikh": v, "count": c.to_string()})
                }
                (None, None) => unreachable!("clap requires one"),
            };
            Ok(Outcome { record, code: 0 })
        }
        Command::Check {
            system,
            grammar,
            circuit,
        } => {
            if let Some(path) = system {
                let s = PolySystem::parse(&read(path)?)?;
                let report = s.validate_proper();
                let roundtrip = PolySystem::parse(&s.to_string())? == s;
                let proper = report.is_proper();
                return Ok(Outcome {
                    record: json!({
                        "problem": "check", "kind": "system", "proper": proper,
                        "violations": to_value(&report.violations),
                        "equations": s.l(), "indeterminates": s.k(), "degree": s.degree(),
                        "round_trip": roundtrip,
                    }),
                    code: if proper && roundtrip { 0 } else { 1 },
                });
            }
            if let Some(path) = grammar {
                // improper grammars are rejected by the parser
                let text = read(path)?;
                match Grammar::parse(&text) {
                    Ok(g) => {
                        let roundtrip = Grammar::parse(&g.to_string())? == g;
                        return Ok(Outcome {
                            record: json!({
                                "problem": "check", "kind": "grammar", "proper": true,
                                "terminals": g.terminals().len(), "nonterminals": g.nonterminals().len(),
                                "rules": g.rules().len(), "round_trip": roundtrip,
                            }),
                            code: if roundtrip { 0 } else { 1 },
                        });
                    }
                    Err(Error::ImproperGrammar(m)) => {
                        return Ok(Outcome {
                            record: json!({"problem": "check", "kind": "grammar", "proper": false, "violations": [m]}),
                            code: 1,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
            let path = circuit
                .as_ref()
                .ok_or_else(|| Error::Invalid("one of --system, --grammar, --circuit".into()))?;
            let c = Circuit::parse(&read(path)?)?;
            let roundtrip = Circuit::parse(&c.to_string())? == c;
            Ok(Outcome {
                record: json!({
                    "problem": "check", "kind": "circuit", "gates": c.size(),
                    "vars": c.vars(), "formal_degree": c.formal_degree().to_string(),
                    "round_trip": roundtrip,
                }),
                code: if roundtrip { 0 } else { 1 },
            })
        }
    }
}

fn emit(out: &mut dyn Write, format: Format, record: &Value) {
    match format {
        Format::Json => {
            writeln!(out, "{record}").ok();
        }
        Format::Text => {
            if let Value::Object(m) = record {
                for (k, v) in m {
                    let shown = match v {
                        Value::String(s) if !s.contains('\n') => s.clone(),
                        Value::String(s) => format!("\n{s}"),
                        other => other.to_string(),
                    };
                    writeln!(out, "{k}={shown}").ok();
                }
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                write!(err, "{e}").ok();
            } else {
                write!(out, "{e}").ok();
            }
            return code;
        }
    };
    match execute(&cli, err) {
        Ok(o) => {
            emit(out, cli.format, &o.record);
            o.code
        }
        Err(e) => {
            let record = json!({"error": error_kind(&e), "message": e.to_string()});
            writeln!(err, "{record}").ok();
            2
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::AmbientMismatch(..) => "ambient_mismatch",
        Error::InsufficientPrecision { .. } => "insufficient_precision",
        Error::NotAUnit(_) => "not_a_unit",
        Error::BadModulus(_) => "bad_modulus",
        Error::MissingVariable(_) => "missing_variable",
        Error::Parse { .. } => "parse",
        Error::NotSquare { .. } => "not_square",
        Error::DegreeBoundTooSmall { .. } => "degree_bound_too_small",
        Error::NotProper(_) => "not_proper",
        Error::ImproperGrammar(_) => "improper_grammar",
        Error::JacobianNotUnit(_) => "jacobian_not_unit",
        Error::BoundInfeasible { .. } => "bound_infeasible",
        Error::BadBound(_) => "bad_bound",
        Error::UnknownSymbol(_) => "unknown_symbol",
        Error::BadAutomaton(_) => "bad_automaton",
        Error::BadOrder(_) => "bad_order",
        Error::NotLetterBounded(_) => "not_letter_bounded",
        Error::Stage { .. } => "stage",
        Error::Invalid(_) => "invalid",
    }
}
