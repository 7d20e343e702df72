//! `chorc`: command-line driver for the choreography compiler.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 projection error,
//! 3 runtime or verification failure, 4 exploration limit reached.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chorc_core::codegen::{compile, output_files, CodegenConfig, OutputLayout};
use chorc_core::dsl::{parse_file, ParsedProgram};
use chorc_core::ir::dump_ir;
use chorc_core::runtime::{
    check_deadlock_freedom, enumerate_traces, random_trace, trace_equiv, ChorSemantics, Limits,
    NetSemantics, RuntimeError, Trace,
};
use chorc_core::{epp, validate_program, Memory, ProcProgram, ProcessId, Value, VarName};
use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "chorc", version, about = "Choreography compiler: project, simulate, verify and generate Jolie services")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a choreography.
    Check { file: PathBuf },
    /// Project a choreography and print the process IR as JSON.
    Project {
        file: PathBuf,
        /// Write the IR to this file instead of standard output.
        #[arg(long)]
        ir_out: Option<PathBuf>,
    },
    /// Run the choreography.
    Run(RunArgs),
    /// Run the projected network.
    Simulate(RunArgs),
    /// Compare the traces of a choreography and its projection and search
    /// the projection for deadlocks.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Generate one Jolie service per process.
    Compile {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write all services into one `services.ol`.
        #[arg(long)]
        single_file: bool,
        #[arg(long, default_value_t = 9000)]
        base_port: u16,
    },
}

#[derive(Args)]
struct Bounds {
    /// Initial value, as `Pid.var=int:N`, `Pid.var=str:TEXT` or
    /// `Pid.var=bool:true|false`.
    #[arg(long = "mem", value_name = "KEY=VAL", value_parser = parse_binding)]
    mem: Vec<(ProcessId, VarName, Value)>,
    /// Maximum trace length.
    #[arg(long, default_value_t = Limits::default().depth)]
    depth: usize,
    /// Maximum number of configurations to visit.
    #[arg(long, default_value_t = Limits::default().max_configs)]
    max_configs: usize,
}

impl Bounds {
    fn limits(&self) -> Limits {
        Limits {
            depth: self.depth,
            max_configs: self.max_configs,
            ..Limits::default()
        }
    }

    fn memory(&self) -> Memory {
        self.mem.iter().cloned().collect()
    }
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[command(flatten)]
    bounds: Bounds,
    /// Seed for the random scheduler; the default is 0.
    #[arg(long, conflicts_with = "exhaustive")]
    seed: Option<u64>,
    /// Print every maximal trace instead of one random run.
    #[arg(long)]
    exhaustive: bool,
}

fn parse_binding(s: &str) -> Result<(ProcessId, VarName, Value), String> {
    let (key, val) = s.split_once('=').ok_or("expected KEY=VAL")?;
    let (pid, var) = key.split_once('.').ok_or("key must be Pid.var")?;
    let pid = ProcessId::new(pid).map_err(|e| e.to_string())?;
    let var = VarName::new(var).map_err(|e| e.to_string())?;
    let value = if let Some(n) = val.strip_prefix("int:") {
        Value::Int(n.parse().map_err(|_| format!("{n:?} is not an integer"))?)
    } else if let Some(t) = val.strip_prefix("str:") {
        Value::str(t)
    } else if let Some(b) = val.strip_prefix("bool:") {
        Value::Bool(b.parse().map_err(|_| format!("{b:?} is not a boolean"))?)
    } else {
        return Err("value must start with int:, str: or bool:".into());
    };
    Ok((pid, var, value))
}

/// Failure carrying its exit code; the message has been printed already.
struct Exit(u8);

const PARSE: u8 = 1;
const PROJECT: u8 = 2;
const FAILURE: u8 = 3;
const LIMIT: u8 = 4;

fn report(code: u8, msg: impl Display) -> Exit {
    eprintln!("error: {msg}");
    Exit(code)
}

fn runtime_failure(e: RuntimeError) -> Exit {
    let code = if e.is_limit() { LIMIT } else { FAILURE };
    report(code, e)
}

fn load(file: &Path) -> Result<ParsedProgram, Exit> {
    let src = fs::read_to_string(file).map_err(|e| report(PARSE, format!("{}: {e}", file.display())))?;
    let parsed = parse_file(&file.display().to_string(), &src).map_err(|errors| {
        for e in &errors {
            eprintln!("error: {e}");
        }
        Exit(PARSE)
    })?;
    let errors = validate_program(&parsed.program);
    if !errors.is_empty() {
        for e in &errors {
            match e.loc().and_then(|loc| parsed.span(loc)) {
                Some(span) => eprintln!("error: {span}: {e}"),
                None => eprintln!("error: {e}"),
            }
        }
        return Err(Exit(PARSE));
    }
    Ok(parsed)
}

fn project(parsed: &ParsedProgram) -> Result<ProcProgram, Exit> {
    epp(&parsed.program).map_err(|e| match parsed.span(&e.loc) {
        Some(span) => report(PROJECT, format!("{span}: {e}")),
        None => report(PROJECT, e),
    })
}

fn print_traces(mut traces: Vec<Trace>) {
    traces.sort_by_cached_key(ToString::to_string);
    for (i, t) in traces.iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{t}");
    }
}

fn run(args: &RunArgs, network: bool) -> Result<(), Exit> {
    let parsed = load(&args.file)?;
    let limits = args.bounds.limits();
    let mem = args.bounds.memory();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(0));
    let traces = if network {
        let proc = project(&parsed)?;
        let sem = NetSemantics::new(&proc.defs, limits.unfold);
        let start = sem.initial(&proc.network, &mem).map_err(runtime_failure)?;
        if args.exhaustive {
            enumerate_traces(&sem, &start, limits.depth, limits.max_configs).map(|t| t.into_iter().collect())
        } else {
            random_trace(&sem, &start, limits.depth, &mut rng).map(|t| vec![t])
        }
    } else {
        let prog = &parsed.program;
        let sem = ChorSemantics::new(&prog.defs, limits.unfold);
        let start = sem.initial(&prog.main, mem).map_err(runtime_failure)?;
        if args.exhaustive {
            enumerate_traces(&sem, &start, limits.depth, limits.max_configs).map(|t| t.into_iter().collect())
        } else {
            random_trace(&sem, &start, limits.depth, &mut rng).map(|t| vec![t])
        }
    };
    print_traces(traces.map_err(runtime_failure)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Check { file } => {
            let parsed = load(&file)?;
            println!(
                "ok: {} definitions, {} nodes in main",
                parsed.program.defs.len(),
                parsed.program.main.size()
            );
        }
        Command::Project { file, ir_out } => {
            let proc = project(&load(&file)?)?;
            let text = dump_ir(&proc);
            match ir_out {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| report(FAILURE, format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Run(args) => run(&args, false)?,
        Command::Simulate(args) => run(&args, true)?,
        Command::Verify { file, bounds } => {
            let parsed = load(&file)?;
            let proc = project(&parsed)?;
            let (mem, limits) = (bounds.memory(), bounds.limits());
            let equiv = trace_equiv(&parsed.program, &proc, &mem, limits).map_err(runtime_failure)?;
            print!("{equiv}");
            let deadlocks = check_deadlock_freedom(&proc, &mem, limits).map_err(runtime_failure)?;
            print!("{deadlocks}");
            if !equiv.equal || !deadlocks.is_deadlock_free() {
                return Err(report(FAILURE, "verification failed"));
            }
        }
        Command::Compile {
            file,
            out,
            single_file,
            base_port,
        } => {
            let proc = project(&load(&file)?)?;
            let cfg = CodegenConfig {
                base_port,
                layout: if single_file {
                    OutputLayout::SingleFile
                } else {
                    OutputLayout::FilePerService
                },
                ..CodegenConfig::default()
            };
            let services = compile(&proc, &cfg).map_err(|e| report(PARSE, e))?;
            let files = output_files(&services, cfg.layout).map_err(|e| report(PARSE, e))?;
            fs::create_dir_all(&out).map_err(|e| report(FAILURE, format!("{}: {e}", out.display())))?;
            for (name, text) in files {
                let path = out.join(name);
                fs::write(&path, text).map_err(|e| report(FAILURE, format!("{}: {e}", path.display())))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code)) => ExitCode::from(code),
    }
}
