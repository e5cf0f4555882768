//! `trace-hoare`: check, prove and verify triples over block diagrams; run
//! flowcharts and solve stream circuits.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trace_hoare::fc::FcInstance;
use trace_hoare::flowchart::{execute, run, Outcome, RunOutcome, TaggedStore};
use trace_hoare::kernel::{
    check_proof, check_triple, check_typed, synthesize_proof, Instance, ProofError, SynthesisError,
    Triple,
};
use trace_hoare::pointer::{HState, PpInstance};
use trace_hoare::rt::RtInstance;
use trace_hoare::script::{parse_assertion_text, parse_proof, render_proof, Scripted};
use trace_hoare::sexpr::parse_one;
use trace_hoare::stream::circuit::semantics_with;
use trace_hoare::stream::hsc::series_from_sexpr;
use trace_hoare::stream::series::Series;
use trace_hoare::stream::{validity_semantic, validity_syntactic, ScInstance, Solver};
use trace_hoare::{Config, Diagram, Error};

#[derive(Parser)]
#[command(
    name = "trace-hoare",
    version,
    about = "Hoare logic over traced block diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (domain, variables, cost model, addresses, truncation).
    #[arg(long, global = true, env = "TRACE_HOARE_CONFIG")]
    config: Option<PathBuf>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a triple holds.
    Check(TripleArgs),
    /// Build a proof of a true triple and print it as a script.
    Prove {
        #[command(flatten)]
        triple: TripleArgs,
        /// Write the script here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check a proof script.
    Verify {
        #[arg(long, value_enum)]
        instance: Kind,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Execute a flowchart or pointer program on one input.
    Run {
        program: String,
        #[arg(long, value_enum, default_value = "fc")]
        instance: Kind,
        /// Initial store, e.g. `x=0,y=3`; unlisted variables start at the domain minimum.
        #[arg(long, default_value = "")]
        input: String,
        /// Input wire.
        #[arg(long, default_value_t = 0)]
        branch: usize,
    },
    /// Solve a stream circuit on input series.
    Solve {
        program: String,
        /// One per input wire: coefficients such as `1 0 -1/2`, or a series expression.
        #[arg(long = "input-series", required = true)]
        input_series: Vec<String>,
        #[arg(long, value_enum, default_value = "closed")]
        solver: SolverArg,
    },
    /// Type-check a program against an instance; for streams, decide validity.
    Validate {
        program: String,
        #[arg(long, value_enum, default_value = "sc")]
        instance: Kind,
    },
    /// Re-check the bundled examples.
    Selftest,
}

#[derive(Args)]
struct TripleArgs {
    #[arg(long, value_enum)]
    instance: Kind,
    /// Program file, or an inline s-expression.
    #[arg(long)]
    program: String,
    #[arg(long)]
    pre: String,
    #[arg(long)]
    post: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Partial correctness of flowcharts.
    Fc,
    /// Running time of flowcharts.
    Rt,
    /// Pointer programs with separation logic.
    Pp,
    /// Stream circuits.
    Sc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Closed,
    Iterative,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Fc => "fc",
            Kind::Rt => "rt",
            Kind::Pp => "pp",
            Kind::Sc => "sc",
        }
    }
}

/// The machine-readable result of one command.
#[derive(Serialize)]
struct Report {
    command: &'static str,
    instance: Option<&'static str>,
    status: &'static str,
    exit_code: u8,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<String>,
    output: Vec<String>,
    /// The configuration the command ran under.
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<Config>,
}

/// A command outcome other than success.
struct Failure {
    code: u8,
    status: &'static str,
    message: String,
    counterexample: Option<String>,
    location: Option<String>,
    output: Vec<String>,
}

impl Failure {
    fn new(code: u8, status: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            status,
            message: message.into(),
            counterexample: None,
            location: None,
            output: Vec::new(),
        }
    }

    fn negative(message: impl Into<String>) -> Self {
        Failure::new(1, "false", message)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(6, "io-error", format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, status) = match &e {
            Error::Parse { .. } | Error::UnboundVariable(_) => (2, "parse-error"),
            Error::Type(_) | Error::Arity { .. } | Error::WrongAlphabet { .. } => (3, "type-error"),
            Error::InvalidCircuit(_) => (4, "invalid-circuit"),
            Error::TripleFalse(_) => (1, "false"),
            Error::Config(_) => (7, "config-error"),
            Error::NotInvertible
            | Error::ImprecisionOverflow { .. }
            | Error::AddressSpaceExhausted { .. }
            | Error::NegativeCost { .. }
            | Error::Unsupported(_) => (5, "model-error"),
        };
        Failure::new(code, status, e.to_string())
    }
}

impl From<trace_hoare::TypeError> for Failure {
    fn from(e: trace_hoare::TypeError) -> Self {
        Error::from(e).into()
    }
}

impl From<ProofError> for Failure {
    fn from(e: ProofError) -> Self {
        let location = Some(e.location());
        let mut f = match e.error.clone() {
            Some(inner) => Failure::from(inner),
            None => Failure::negative(format!("proof rejected {e}")),
        };
        f.location = location;
        f
    }
}

impl From<SynthesisError> for Failure {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::Instance(inner) => inner.into(),
            SynthesisError::NotProvable => Failure::negative("not provable: the triple is false"),
            SynthesisError::NoWitness(s) => {
                Failure::new(5, "model-error", format!("no proof found: {s}"))
            }
        }
    }
}

/// What a successful command produced.
struct Success {
    message: String,
    output: Vec<String>,
}

fn ok(message: impl Into<String>, output: Vec<String>) -> Result<Success, Failure> {
    Ok(Success {
        message: message.into(),
        output,
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Reads a program from a file, or takes the argument itself if it is an s-expression.
fn load_program(arg: &str) -> Result<Diagram, Failure> {
    let path = Path::new(arg);
    let text = if path.exists() || !arg.contains('(') {
        read(path)?
    } else {
        arg.to_string()
    };
    Ok(Diagram::parse(&text)?)
}

fn check<I: Scripted>(inst: &I, args: &TripleArgs) -> Result<Success, Failure> {
    let t = load_triple(inst, args)?;
    if check_triple(inst, &t)? {
        return ok("triple holds", Vec::new());
    }
    let mut f = Failure::negative("triple does not hold");
    f.counterexample = inst.counterexample(&t.prog, &t.pre, &t.post)?;
    Err(f)
}

fn load_triple<I: Scripted>(inst: &I, args: &TripleArgs) -> Result<Triple<I::Wire>, Failure> {
    let prog = load_program(&args.program)?;
    alphabet_ok(inst, &prog)?;
    let pre = parse_assertion_text(inst, &args.pre, prog.ins())?;
    let post = parse_assertion_text(inst, &args.post, prog.outs())?;
    let t = Triple::new(pre, prog, post);
    check_typed(inst, &t)?;
    Ok(t)
}

fn prove<I: Scripted>(
    inst: &I,
    args: &TripleArgs,
    output: Option<&Path>,
) -> Result<Success, Failure> {
    let t = load_triple(inst, args)?;
    let proof = synthesize_proof(inst, &t)?;
    let script = render_proof(inst, &proof);
    let message = format!("proved with {} rule applications", proof.size());
    match output {
        Some(path) => {
            std::fs::write(path, format!("{script}\n")).map_err(|e| Failure::io(path, e))?;
            ok(
                format!("{message}; written to {}", path.display()),
                Vec::new(),
            )
        }
        None => ok(message, vec![script]),
    }
}

fn verify<I: Scripted>(inst: &I, path: &Path) -> Result<Success, Failure> {
    let proof = parse_proof(inst, &read(path)?)?;
    check_proof(inst, &proof)?;
    ok(
        format!("proof accepted ({} rule applications)", proof.size()),
        Vec::new(),
    )
}

fn run_flowchart(
    cfg: &Config,
    prog: &Diagram,
    input: &str,
    branch: usize,
) -> Result<Success, Failure> {
    let space = cfg.store_space();
    let store = space.parse_store(input)?;
    if branch >= prog.ins() {
        return Err(Error::Arity {
            what: "input wire".into(),
            expected: prog.ins(),
            found: branch + 1,
        }
        .into());
    }
    let result = run(cfg, prog, &TaggedStore { branch, store })?;
    let line = match result.outcome {
        RunOutcome::Terminated(end) if prog.outs() > 1 => {
            format!(
                "{} steps={} wire={}",
                space.show(&end.store),
                result.steps,
                end.branch
            )
        }
        RunOutcome::Terminated(end) => format!("{} steps={}", space.show(&end.store), result.steps),
        RunOutcome::Diverges => format!("DIVERGES after state revisit (steps={})", result.steps),
    };
    ok(line.clone(), vec![line])
}

fn run_pointer(
    cfg: &Config,
    prog: &Diagram,
    input: &str,
    branch: usize,
) -> Result<Success, Failure> {
    let pp = PpInstance::new(cfg);
    let store = cfg.store_space().parse_store(input)?;
    alphabet_ok(&pp, prog)?;
    let start = HState {
        store,
        heap: vec![None; cfg.addrs],
    };
    let ex = execute(pp.machine(), prog, branch, start)?;
    match ex.outcome {
        Outcome::Terminated { branch: out, state } => {
            let mut line = format!("{} steps={}", pp.space().show(&state), ex.steps);
            if prog.outs() > 1 {
                line.push_str(&format!(" wire={out}"));
            }
            ok(line.clone(), vec![line])
        }
        Outcome::Diverges => {
            let line = format!("DIVERGES after state revisit (steps={})", ex.steps);
            ok(line.clone(), vec![line])
        }
        Outcome::Aborted => {
            let mut f =
                Failure::negative(format!("ABORTED: memory fault after {} steps", ex.steps));
            f.status = "aborted";
            Err(f)
        }
    }
}

fn parse_series(src: &str, trunc: usize) -> Result<Series, Failure> {
    if src.trim_start().starts_with('(') {
        return Ok(series_from_sexpr(&parse_one(src)?, trunc)?);
    }
    let coeffs = src
        .split([',', ' '])
        .filter(|c| !c.trim().is_empty())
        .map(|c| trace_hoare::diagram::parse_rational(&parse_one(c)?))
        .collect::<trace_hoare::Result<Vec<_>>>()?;
    Ok(Series::from_coeffs(coeffs, trunc))
}

fn solve(
    cfg: &Config,
    program: &str,
    inputs: &[String],
    solver: SolverArg,
) -> Result<Success, Failure> {
    let prog = load_program(program)?;
    alphabet_ok(&ScInstance::new(cfg), &prog)?;
    if inputs.len() != prog.ins() {
        return Err(Error::Arity {
            what: "input series".into(),
            expected: prog.ins(),
            found: inputs.len(),
        }
        .into());
    }
    let series = inputs
        .iter()
        .map(|s| parse_series(s, cfg.trunc))
        .collect::<Result<Vec<_>, _>>()?;
    let solver = match solver {
        SolverArg::Closed => Solver::ClosedForm,
        SolverArg::Iterative => Solver::Iterative,
    };
    let outputs = semantics_with(&prog, cfg.trunc, solver)?.apply(&series)?;
    let lines: Vec<String> = outputs
        .iter()
        .map(|s| {
            s.coeffs()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    ok(
        format!(
            "{} output wire(s), {} coefficients each",
            lines.len(),
            cfg.trunc
        ),
        lines,
    )
}

fn validate(cfg: &Config, program: &str, kind: Kind) -> Result<Success, Failure> {
    let prog = load_program(program)?;
    let (ins, outs) = prog.arity();
    match kind {
        Kind::Fc => alphabet_ok(&FcInstance::new(cfg), &prog)?,
        Kind::Rt => alphabet_ok(&RtInstance::new(cfg), &prog)?,
        Kind::Pp => alphabet_ok(&PpInstance::new(cfg), &prog)?,
        Kind::Sc => {
            alphabet_ok(&ScInstance::new(cfg), &prog)?;
            let syntactic = validity_syntactic(&prog);
            let semantic = validity_semantic(&prog, cfg.trunc)?;
            let detail = vec![format!("syntactic={syntactic} semantic={semantic}")];
            if !(syntactic && semantic) {
                let mut f = Failure::negative(format!(
                    "invalid circuit {ins}->{outs}: a feedback loop has no delay"
                ));
                f.status = "invalid";
                f.output = detail;
                return Err(f);
            }
            return ok(format!("valid circuit {ins}->{outs}"), detail);
        }
    }
    ok(format!("well-typed {ins}->{outs}"), Vec::new())
}

fn alphabet_ok<I: Instance>(inst: &I, prog: &Diagram) -> trace_hoare::Result<()> {
    if prog.alphabet().within(inst.alphabet()) {
        return Ok(());
    }
    Err(Error::WrongAlphabet {
        expected: inst.name(),
        found: prog.alphabet(),
    })
}

const GOLDEN: &[(&str, &str)] = &[
    ("factorial.sx", include_str!("../../../golden/factorial.sx")),
    ("fib.sx", include_str!("../../../golden/fib.sx")),
    (
        "instant-loop.sx",
        include_str!("../../../golden/instant-loop.sx"),
    ),
    (
        "chaotic-loop.sx",
        include_str!("../../../golden/chaotic-loop.sx"),
    ),
    (
        "fc-while.proof",
        include_str!("../../../golden/fc-while.proof"),
    ),
    (
        "rt-while.proof",
        include_str!("../../../golden/rt-while.proof"),
    ),
    (
        "sc-feedback.proof",
        include_str!("../../../golden/sc-feedback.proof"),
    ),
];

fn golden(name: &str) -> &'static str {
    GOLDEN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .expect("bundled example")
}

type SelfCheck<'a> = (&'a str, Box<dyn Fn() -> Result<bool, Failure> + 'a>);

fn selftest() -> Result<Success, Failure> {
    let cfg = Config::default();
    let checks: Vec<SelfCheck> = vec![
        (
            "factorial runs in 11 steps",
            Box::new(|| {
                let s =
                    run_flowchart(&cfg, &Diagram::parse(golden("factorial.sx"))?, "x=0,y=3", 0)?;
                Ok(s.message == "x=6 y=0 steps=11")
            }),
        ),
        (
            "while derivation (partial correctness)",
            Box::new(|| {
                let fc = FcInstance::new(&cfg);
                Ok(check_proof(&fc, &parse_proof(&fc, golden("fc-while.proof"))?).is_ok())
            }),
        ),
        (
            "while derivation (running time)",
            Box::new(|| {
                let rt = RtInstance::new(&cfg);
                Ok(check_proof(&rt, &parse_proof(&rt, golden("rt-while.proof"))?).is_ok())
            }),
        ),
        (
            "feedback derivation (streams)",
            Box::new(|| {
                let sc = ScInstance::new(&cfg);
                Ok(check_proof(&sc, &parse_proof(&sc, golden("sc-feedback.proof"))?).is_ok())
            }),
        ),
        (
            "Fibonacci circuit",
            Box::new(|| {
                let s = solve_text(&cfg, golden("fib.sx"), "1")?;
                Ok(s.output[0].starts_with("1 1 2 3 5 8 13 21 34 55 "))
            }),
        ),
        (
            "loops without delay are rejected",
            Box::new(|| {
                let mut rejected = true;
                for name in ["instant-loop.sx", "chaotic-loop.sx"] {
                    let d = Diagram::parse(golden(name))?;
                    rejected &= !validity_syntactic(&d) && !validity_semantic(&d, cfg.trunc)?;
                }
                Ok(rejected)
            }),
        ),
    ];
    let mut lines = Vec::new();
    let mut failed = 0;
    for (name, check) in &checks {
        let (mark, note) = match check() {
            Ok(true) => ("ok", String::new()),
            Ok(false) => ("FAIL", String::new()),
            Err(f) => ("FAIL", format!(": {}", f.message)),
        };
        failed += usize::from(mark == "FAIL");
        lines.push(format!("{mark} {name}{note}"));
    }
    if failed > 0 {
        let mut f = Failure::negative(format!("{failed} of {} self-checks failed", checks.len()));
        f.output = lines;
        return Err(f);
    }
    ok(format!("all {} self-checks pass", checks.len()), lines)
}

fn solve_text(cfg: &Config, program: &str, input: &str) -> Result<Success, Failure> {
    solve(cfg, program, &[input.to_string()], SolverArg::Closed)
}

fn dispatch(cli: &Cli, cfg: &Config) -> (&'static str, Option<Kind>, Result<Success, Failure>) {
    match &cli.command {
        Command::Check(args) => (
            "check",
            Some(args.instance),
            with_instance(cfg, args.instance, |i| i.check(args)),
        ),
        Command::Prove { triple, output } => (
            "prove",
            Some(triple.instance),
            with_instance(cfg, triple.instance, |i| i.prove(triple, output.as_deref())),
        ),
        Command::Verify { instance, proof } => (
            "verify",
            Some(*instance),
            with_instance(cfg, *instance, |i| i.verify(proof)),
        ),
        Command::Run {
            program,
            instance,
            input,
            branch,
        } => {
            let result = load_program(program).and_then(|prog| match instance {
                Kind::Fc | Kind::Rt => run_flowchart(cfg, &prog, input, *branch),
                Kind::Pp => run_pointer(cfg, &prog, input, *branch),
                Kind::Sc => Err(Error::Unsupported(
                    "stream circuits are solved, not run; use `solve`".into(),
                )
                .into()),
            });
            ("run", Some(*instance), result)
        }
        Command::Solve {
            program,
            input_series,
            solver,
        } => (
            "solve",
            Some(Kind::Sc),
            solve(cfg, program, input_series, *solver),
        ),
        Command::Validate { program, instance } => (
            "validate",
            Some(*instance),
            validate(cfg, program, *instance),
        ),
        Command::Selftest => ("selftest", None, selftest()),
    }
}

/// Object-safe view of the generic commands, one implementation per instance.
trait Commands {
    fn check(&self, args: &TripleArgs) -> Result<Success, Failure>;
    fn prove(&self, args: &TripleArgs, output: Option<&Path>) -> Result<Success, Failure>;
    fn verify(&self, path: &Path) -> Result<Success, Failure>;
}

impl<I: Scripted> Commands for I {
    fn check(&self, args: &TripleArgs) -> Result<Success, Failure> {
        check(self, args)
    }

    fn prove(&self, args: &TripleArgs, output: Option<&Path>) -> Result<Success, Failure> {
        prove(self, args, output)
    }

    fn verify(&self, path: &Path) -> Result<Success, Failure> {
        verify(self, path)
    }
}

fn with_instance(
    cfg: &Config,
    kind: Kind,
    f: impl FnOnce(&dyn Commands) -> Result<Success, Failure>,
) -> Result<Success, Failure> {
    match kind {
        Kind::Fc => f(&FcInstance::new(cfg)),
        Kind::Rt => f(&RtInstance::new(cfg)),
        Kind::Pp => f(&PpInstance::new(cfg)),
        Kind::Sc => f(&ScInstance::new(cfg)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, kind, result, config) =
        match Config::resolve(cli.config.as_deref()).and_then(|c| c.validate().map(|()| c)) {
            Ok(cfg) => {
                let (command, kind, result) = dispatch(&cli, &cfg);
                (command, kind, result, Some(cfg))
            }
            Err(e) => ("config", None, Err(e.into()), None),
        };
    let report = match result {
        Ok(s) => Report {
            command,
            instance: kind.map(Kind::name),
            status: "ok",
            exit_code: 0,
            message: s.message,
            counterexample: None,
            location: None,
            output: s.output,
            config,
        },
        Err(f) => Report {
            command,
            instance: kind.map(Kind::name),
            status: f.status,
            exit_code: f.code,
            message: f.message,
            counterexample: f.counterexample,
            location: f.location,
            output: f.output,
            config,
        },
    };
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        print_text(command, &report);
    }
    ExitCode::from(report.exit_code)
}

fn print_text(command: &str, r: &Report) {
    let bare = matches!(command, "run" | "solve") && r.exit_code == 0;
    for line in &r.output {
        println!("{line}");
    }
    if bare {
        return;
    }
    let text = match &r.counterexample {
        Some(c) => format!("{}: {c}", r.message),
        None => r.message.clone(),
    };
    if r.exit_code == 0 && r.output.is_empty() {
        println!("{text}");
    } else if r.exit_code == 0 {
        eprintln!("{text}");
    } else {
        eprintln!("error ({}): {text}", r.status);
    }
}
