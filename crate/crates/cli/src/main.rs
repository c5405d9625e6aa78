//! `multient` command-line front end.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use multient::classify::{self, StructureReport};
use multient::gsd::{gsd, GsdConfig};
use multient::io::{read_state, state_to_json, write_state};
use multient::measures::{self, MeasureConfig, MeasureResult, Method};
use multient::{random_density, random_pure, DensityMatrix, Error, PartySystem, State, DEFAULT_SIZE_CAP};

use output::{emit, fmt_num};

#[derive(Parser)]
#[command(name = "multient", version, about = "Multipartite entanglement measures and structure classification")]
struct Cli {
    /// Emit a single JSON document instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// GSD restarts per decomposition.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit with status 4 when a decomposition does not converge.
    #[arg(long)]
    strict: bool,
    /// Largest composite dimension allowed for intermediate states.
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    size_cap: usize,
}

impl SolverArgs {
    fn config(&self) -> MeasureConfig {
        MeasureConfig {
            gsd: GsdConfig::default().with_restarts(self.restarts).with_seed(self.seed),
            size_cap: self.size_cap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    M1,
    M2,
    M2joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Average,
    Joint,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Additivity,
    Continuity,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement measure of a state file.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "m1")]
        method: MethodArg,
        /// Variant of the spectral measure (with --method m2).
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Entanglement structure of a state file.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Generalized Schmidt decomposition of a pure state file.
    Gsd {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the decomposed state here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Purification of a state file.
    Purify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the purified state here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the entanglement structures of an n-party system.
    Enumerate {
        #[arg(long)]
        parties: usize,
    },
    /// Seeded random pure state, or density matrix when --rank is given.
    Random {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the additivity and continuity suites.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        /// Measure used by the additivity suite.
        #[arg(long, value_enum, default_value = "m1")]
        method: MethodArg,
        /// Number of continuity pairs.
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Core(Error::Argument(_)) => 2,
            Failure::Core(Error::Validation(_) | Error::Parse(_)) => 3,
            Failure::NotConverged => 4,
            Failure::Core(Error::SizeLimit { .. }) => 5,
            Failure::Core(Error::Io(_)) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::NotConverged => "decomposition did not converge".to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn resolve_method(method: MethodArg, variant: Option<VariantArg>) -> std::result::Result<Method, Failure> {
    match (method, variant) {
        (MethodArg::M1, None) => Ok(Method::M1),
        (MethodArg::M1, Some(_)) => Err(Failure::Usage("--variant applies to --method m2".into())),
        (MethodArg::M2, None | Some(VariantArg::Average)) => Ok(Method::M2Average),
        (MethodArg::M2, Some(VariantArg::Joint)) | (MethodArg::M2joint, None | Some(VariantArg::Joint)) => {
            Ok(Method::M2Joint)
        }
        (MethodArg::M2joint, Some(VariantArg::Average)) => {
            Err(Failure::Usage("--method m2joint conflicts with --variant average".into()))
        }
    }
}

fn density_of(state: &State) -> DensityMatrix {
    state.to_density()
}

fn strict_check(strict: bool, converged: bool) -> Outcome {
    if strict && !converged {
        Err(Failure::NotConverged)
    } else {
        Ok(())
    }
}

fn measure_cmd(json: bool, input: &PathBuf, method: Method, solver: &SolverArgs) -> Outcome {
    let state = read_state(input)?;
    let result: MeasureResult = measures::measure(&density_of(&state), method, &solver.config())?;
    let converged = result.converged();
    let human = format!(
        "{} = {} bits\nSchmidt terms: {}\nconverged: {} ({} restarts)",
        method.name(),
        fmt_num(result.value),
        result.schmidt_term_count,
        if converged { "yes" } else { "no" },
        solver.restarts
    );
    emit(json, serde_json::to_value(&result).expect("serializable"), human);
    strict_check(solver.strict, converged)
}

fn classify_human(r: &StructureReport) -> String {
    let mut out = String::new();
    match (r.system_id, r.class_id) {
        (Some(id), Some(class)) => {
            let members: Vec<String> = r.class_members.iter().map(|m| m.to_string()).collect();
            out.push_str(&format!("system {id}, class {class} {{{}}}\n", members.join(",")));
        }
        _ => out.push_str("system id unavailable for this party count\n"),
    }
    let kind = if r.exact { "exact" } else { "heuristic" };
    out.push_str(&format!("loops: {} ({kind})", r.structure.label()));
    for (name, value) in &r.detectors {
        out.push_str(&format!("\n  {name:<28} {}", fmt_num(*value)));
    }
    for w in &r.warnings {
        out.push_str(&format!("\nwarning: {w}"));
    }
    out
}

fn classify_cmd(json: bool, input: &PathBuf) -> Outcome {
    let state = read_state(input)?;
    let report = classify::structure_report(&state)?;
    emit(json, serde_json::to_value(&report).expect("serializable"), classify_human(&report));
    Ok(())
}

fn pairs(data: &[multient::C64]) -> Value {
    Value::Array(data.iter().map(|c| json!([c.re, c.im])).collect())
}

fn gsd_cmd(json: bool, input: &PathBuf, out: Option<&PathBuf>, solver: &SolverArgs) -> Outcome {
    let State::Pure(psi) = read_state(input)? else {
        return Err(Failure::Usage("gsd needs a pure state; purify density matrices first".into()));
    };
    let form = gsd(&psi, &solver.config().gsd)?;
    if let Some(path) = out {
        write_state(&State::Pure(form.decomposed_state()), path)?;
    }
    let converged = form.diagnostics.converged;
    let value = json!({
        "dims": psi.system().dims(),
        "objective": form.objective,
        "termCount": form.term_count(),
        "sortedModuli": form.sorted_moduli(),
        "coefficients": pairs(form.coefficients.data()),
        "localUnitaries": form.local_unitaries.iter().map(|u| {
            let rows: Vec<_> = (0..u.nrows()).map(|i| pairs(&u.row(i).iter().copied().collect::<Vec<_>>())).collect();
            Value::Array(rows)
        }).collect::<Vec<_>>(),
        "diagnostics": form.diagnostics,
    });
    let moduli: Vec<String> = form.sorted_moduli().iter().map(|m| fmt_num(*m)).collect();
    let human = format!(
        "IU entropy = {} bits\nSchmidt terms: {}\nmoduli: {}\nconverged: {} ({} restarts, best {})",
        fmt_num(form.objective),
        form.term_count(),
        moduli.join(" "),
        if converged { "yes" } else { "no" },
        form.diagnostics.restarts,
        form.diagnostics.best_restart
    );
    emit(json, value, human);
    strict_check(solver.strict, converged)
}

fn purify_cmd(json: bool, input: &PathBuf, out: Option<&PathBuf>) -> Outcome {
    let state = read_state(input)?;
    let p = multient::purify(&density_of(&state))?;
    let purified = State::Pure(p.state.clone());
    let Some(path) = out else {
        println!("{}", state_to_json(&purified));
        return Ok(());
    };
    write_state(&purified, path)?;
    let value = json!({
        "sourceDims": p.source_dims,
        "ancillaDims": p.ancilla_dims,
        "dims": p.state.system().dims(),
        "rank": p.source_rank,
        "out": path.display().to_string(),
    });
    let human = format!(
        "rank {} state over {} purified to {}\nwritten to {}",
        p.source_rank,
        PartySystem::new(p.source_dims.clone())?,
        p.state.system(),
        path.display()
    );
    emit(json, value, human);
    Ok(())
}

fn enumerate_cmd(json: bool, parties: usize) -> Outcome {
    let counts = classify::structure_counts(parties)?;
    if parties > 4 {
        let value = json!({ "parties": parties, "structureCount": counts.structures, "classCount": counts.classes, "listed": false });
        let human = format!("{parties} parties: {} structures, {} classes (too many to list)", counts.structures, counts.classes);
        emit(json, value, human);
        return Ok(());
    }
    let catalog = classify::enumerate_structures(parties)?;
    let structures: Vec<Value> = catalog
        .structures()
        .iter()
        .enumerate()
        .map(|(i, s)| json!({ "id": i + 1, "classId": catalog.class_id(i + 1), "loops": s.loops() }))
        .collect();
    let value = json!({
        "parties": parties,
        "structureCount": catalog.len(),
        "classCount": catalog.classes().len(),
        "listed": true,
        "structures": structures,
        "classes": catalog.classes(),
    });
    let mut human = format!("{parties} parties: {} structures, {} classes", catalog.len(), catalog.classes().len());
    for (k, members) in catalog.classes().iter().enumerate() {
        let listed: Vec<String> =
            members.iter().map(|&id| format!("{id} {}", catalog.structure(id).expect("member id").label())).collect();
        human.push_str(&format!("\nclass {}: {}", k + 1, listed.join(", ")));
    }
    emit(json, value, human);
    Ok(())
}

fn random_cmd(json: bool, dims: &[usize], rank: Option<usize>, seed: u64, out: Option<&PathBuf>) -> Outcome {
    let system = PartySystem::new(dims.to_vec())?;
    let state = match rank {
        None => State::Pure(random_pure(&system, seed)),
        Some(r) => State::Density(random_density(&system, r, seed)?),
    };
    let Some(path) = out else {
        println!("{}", state_to_json(&state));
        return Ok(());
    };
    write_state(&state, path)?;
    let kind = if rank.is_some() { "density" } else { "pure" };
    let value = json!({ "kind": kind, "dims": dims, "seed": seed, "out": path.display().to_string() });
    emit(json, value, format!("{kind} state over {system} written to {}", path.display()));
    Ok(())
}

const ADDITIVITY_TOLERANCE: f64 = 5e-4;
const CONTINUITY_FRACTION: f64 = 0.99;
const CONTINUITY_MAX_EPSILON: f64 = 0.05;

fn check_cmd(json: bool, suite: SuiteArg, method: Method, count: usize, solver: &SolverArgs) -> Outcome {
    let config = solver.config();
    let mut doc = serde_json::Map::new();
    let mut lines = Vec::new();
    if suite != SuiteArg::Continuity {
        let cases = measures::additivity_suite(method, &config)?;
        let worst = cases.iter().map(|c| c.check.residual).fold(0.0, f64::max);
        let passed = worst < ADDITIVITY_TOLERANCE;
        for c in &cases {
            lines.push(format!("  {:<20} residual {}", c.name, fmt_num(c.check.residual)));
        }
        lines.insert(0, format!("additivity ({}): max residual {} {}", method.name(), fmt_num(worst), verdict(passed)));
        doc.insert(
            "additivity".into(),
            json!({ "method": method, "tolerance": ADDITIVITY_TOLERANCE, "maxResidual": worst, "passed": passed, "cases": cases }),
        );
    }
    if suite != SuiteArg::Additivity {
        let s = measures::continuity_suite(count, solver.seed, &config)?;
        let passed = s.fraction() >= CONTINUITY_FRACTION && s.max_epsilon <= CONTINUITY_MAX_EPSILON;
        lines.push(format!(
            "continuity: bound holds in {}/{} pairs, max epsilon {} {}",
            s.holds,
            s.cases.len(),
            fmt_num(s.max_epsilon),
            verdict(passed)
        ));
        for v in s.violations() {
            lines.push(format!("  violation: case {} ({}) lhs {} bound {}", v.index, v.base, fmt_num(v.check.lhs), fmt_num(v.check.bound)));
        }
        doc.insert(
            "continuity".into(),
            json!({
                "count": count,
                "seed": solver.seed,
                "holds": s.holds,
                "fraction": s.fraction(),
                "maxEpsilon": s.max_epsilon,
                "passed": passed,
                "cases": s.cases,
            }),
        );
    }
    emit(json, Value::Object(doc), lines.join("\n"));
    Ok(())
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Measure { input, method, variant, solver } => {
            let method = resolve_method(method, variant)?;
            measure_cmd(json, &input, method, &solver)
        }
        Command::Classify { input } => classify_cmd(json, &input),
        Command::Gsd { input, out, solver } => gsd_cmd(json, &input, out.as_ref(), &solver),
        Command::Purify { input, out } => purify_cmd(json, &input, out.as_ref()),
        Command::Enumerate { parties } => enumerate_cmd(json, parties),
        Command::Random { dims, rank, seed, out } => random_cmd(json, &dims, rank, seed, out.as_ref()),
        Command::Check { suite, method, count, solver } => {
            let method = resolve_method(method, None)?;
            check_cmd(json, suite, method, count, &solver)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if json {
                let doc = json!({ "error": { "code": f.exit_code(), "message": f.message() } });
                eprintln!("{doc}");
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.exit_code())
        }
    }
}
