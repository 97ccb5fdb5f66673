//! `templet`: check, map, graph and run marked modules.
//!
//! Exit status is 0 on success, 1 when the input is at fault (syntax,
//! semantic or protocol errors) and 2 when the environment is (unreadable
//! files, bad configuration, bad arguments).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Config;
use templet::bundled::{trig_network_from, WorkerVariant, HELLO_MODULE, INPUT_VAR};
use templet::mapper::map_module_with;
use templet::runtime::HaltReason;
use templet::scheme::Position;
use templet::source::line_col;
use templet::{analyze, class_graph, parse_text, Diagnostic, Resolution, SourceModule, TemplateSet};

const TEMPLATES_ENV: &str = "TEMPLET_TEMPLATES";

#[derive(Parser)]
#[command(name = "templet", version, about = "Templet markup toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan, parse and check a module.
    Check {
        /// Module file, or a bundled example name.
        file: String,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Regenerate the code regions of a module from its scheme.
    Map {
        file: String,
        /// Directory of `.tpl` files overriding the built-in templates.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Rewrite the input file.
        #[arg(long, conflicts_with = "out")]
        in_place: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print the DOT graph of one channel or process class.
    Graph {
        file: String,
        #[arg(long)]
        class: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the trig network over a bundled example or a module declaring
    /// the same Link, Master and Worker classes.
    Run {
        /// `trig`, `trig-chain`, `trig-grouped` or a module file.
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Input value, `x=<number>`.
        #[arg(long = "input", value_name = "KEY=VALUE")]
        inputs: Vec<String>,
        /// Write the event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        trace_format: TraceFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

/// Why a command stopped. The message has already been printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Language,
    Environment,
}

impl Failure {
    fn code(self) -> u8 {
        match self {
            Failure::Language => 1,
            Failure::Environment => 2,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn environment(message: impl std::fmt::Display) -> Failure {
    eprintln!("templet: {message}");
    Failure::Environment
}

/// A module's text and where it came from.
struct Input {
    /// Name used in diagnostics.
    name: String,
    path: Option<PathBuf>,
    text: String,
}

impl Input {
    /// An existing file wins over a bundled example of the same name.
    fn load(target: &str) -> Outcome<Input> {
        let path = Path::new(target);
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| environment(format!("{target}: {e}")))?;
            return Ok(Input {
                name: target.to_owned(),
                path: Some(path.to_owned()),
                text,
            });
        }
        let text = match target {
            "hello" => HELLO_MODULE.to_owned(),
            _ => match WorkerVariant::from_example_name(target) {
                Some(v) => v.module(),
                None => {
                    return Err(environment(format!(
                        "{target}: no such file or bundled example"
                    )))
                }
            },
        };
        Ok(Input {
            name: target.to_owned(),
            path: None,
            text,
        })
    }

    fn dir(&self) -> PathBuf {
        match self.path.as_deref().and_then(Path::parent) {
            Some(p) if !p.as_os_str().is_empty() => p.to_owned(),
            _ => PathBuf::from("."),
        }
    }
}

/// Prints diagnostics in file coordinates.
struct Reporter<'a> {
    file: &'a str,
    text: &'a str,
    /// Byte offset where the scheme text begins.
    scheme_at: usize,
}

impl Reporter<'_> {
    fn at_offset(&self, offset: usize) -> Position {
        let (line, column) = line_col(self.text, offset);
        Position::new(line, column)
    }

    /// Converts a position inside the scheme text.
    fn at_scheme(&self, pos: Position) -> Position {
        if pos.line == 0 {
            return self.at_offset(self.scheme_at);
        }
        let start = self.at_offset(self.scheme_at);
        if pos.line == 1 {
            Position::new(start.line, start.column + pos.column - 1)
        } else {
            Position::new(start.line + pos.line - 1, pos.column)
        }
    }

    fn diagnostic(&self, d: &Diagnostic) {
        eprintln!("{}", d.render(self.file, self.at_scheme(d.pos)));
    }

    fn error(&self, pos: Position, code: &str, message: impl std::fmt::Display) {
        eprintln!("{}:{}:{}: error {code} {message}", self.file, pos.line, pos.column);
    }
}

/// A module that scanned, parsed and resolved without errors.
struct Checked {
    input: Input,
    config: Config,
    module: SourceModule,
    resolution: Resolution,
}

impl Checked {
    fn reporter(&self) -> Reporter<'_> {
        Reporter {
            file: &self.input.name,
            text: &self.input.text,
            scheme_at: self.module.scheme_text_offset(),
        }
    }
}

fn check_input(input: Input, strict: bool) -> Outcome<Checked> {
    let config = Config::discover(&input.dir()).map_err(environment)?;
    let mut rep = Reporter {
        file: &input.name,
        text: &input.text,
        scheme_at: 0,
    };
    let module = match templet::scan(&input.text, &config.signatures) {
        Ok(m) => m,
        Err(e) => {
            rep.error(rep.at_offset(e.offset().unwrap_or(0)), e.code(), &e);
            return Err(Failure::Language);
        }
    };
    rep.scheme_at = module.scheme_text_offset();
    let scheme = match parse_text(&module.scheme_block().text) {
        Ok(s) => s,
        Err(e) => {
            let expected = e.expected.join(" or ");
            rep.error(
                rep.at_scheme(e.pos),
                "SyntaxError",
                format!("expected {expected}, found {}", e.found),
            );
            return Err(Failure::Language);
        }
    };
    let resolution = analyze(&scheme);
    for d in &resolution.diagnostics {
        rep.diagnostic(d);
    }
    if resolution.has_errors() || (strict && !resolution.diagnostics.is_empty()) {
        return Err(Failure::Language);
    }
    Ok(Checked {
        input,
        config,
        module,
        resolution,
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| environment(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_check(file: &str, strict: bool) -> Outcome {
    check_input(Input::load(file)?, strict).map(|_| ())
}

fn templates(flag: Option<PathBuf>, config: &Config) -> Outcome<TemplateSet> {
    let dir = flag
        .or_else(|| std::env::var_os(TEMPLATES_ENV).map(PathBuf::from))
        .or_else(|| config.templates.clone());
    let mut set = TemplateSet::builtin();
    if let Some(dir) = dir {
        set.overlay(TemplateSet::load_dir(&dir).map_err(environment)?);
    }
    Ok(set)
}

fn cmd_map(file: &str, templates_dir: Option<PathBuf>, in_place: bool, out: Option<PathBuf>) -> Outcome {
    let c = check_input(Input::load(file)?, false)?;
    let set = templates(templates_dir, &c.config)?;
    let rep = c.reporter();
    let mapped = match map_module_with(&c.module, &c.resolution.scheme, &set, &Default::default()) {
        Ok(m) => m,
        Err(e) => {
            rep.error(rep.at_offset(c.module.scheme_block().span.start), e.code(), &e);
            return Err(Failure::Language);
        }
    };
    for w in &mapped.warnings {
        rep.diagnostic(w);
    }
    let text = templet::render(&mapped.module);
    let target = match (in_place, out) {
        (true, _) => Some(
            c.input
                .path
                .clone()
                .ok_or_else(|| environment("--in-place needs a file, not a bundled example"))?,
        ),
        (false, out) => out,
    };
    write_output(target.as_deref(), &text)
}

fn cmd_graph(file: &str, class: &str, out: Option<PathBuf>) -> Outcome {
    let c = check_input(Input::load(file)?, false)?;
    let Some(doc) = class_graph(&c.resolution.scheme, class) else {
        let rep = c.reporter();
        rep.error(
            rep.at_scheme(Position::default()),
            "UnknownClass",
            format!("no class '{class}' in the scheme"),
        );
        return Err(Failure::Language);
    };
    write_output(out.as_deref(), &doc.dot)
}

fn parse_input(raw: &str) -> Outcome<f64> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| environment(format!("--input '{raw}' is not KEY=VALUE")))?;
    if key.trim() != INPUT_VAR {
        return Err(environment(format!(
            "unknown input '{}', the trig network takes '{INPUT_VAR}'",
            key.trim()
        )));
    }
    value
        .trim()
        .parse()
        .map_err(|_| environment(format!("input {INPUT_VAR} = '{value}' is not a number")))
}

fn halt_code(r: HaltReason) -> &'static str {
    match r {
        HaltReason::QueueEmpty => "QueueEmpty",
        HaltReason::ProtocolViolation => "ProtocolViolation",
        HaltReason::UnknownMessage => "UnknownMessage",
        HaltReason::StepLimit => "StepLimit",
    }
}

fn cmd_run(
    target: &str,
    seed: Option<u64>,
    inputs: &[String],
    trace: Option<PathBuf>,
    format: TraceFormat,
) -> Outcome {
    let mut x = 0.5;
    for raw in inputs {
        x = parse_input(raw)?;
    }
    let c = check_input(Input::load(target)?, false)?;
    let rep = c.reporter();
    let scheme = &c.module.scheme_block().text;
    let mut net = trig_network_from(scheme, x).map_err(|e| {
        rep.error(rep.at_scheme(Position::default()), e.code(), &e);
        Failure::Language
    })?;
    let seed = seed.or(c.config.seed).unwrap_or(1);
    let t = net.engine.run(seed).map_err(|e| {
        rep.error(rep.at_scheme(Position::default()), e.code(), &e);
        Failure::Language
    })?;

    if let Some(path) = trace.or_else(|| c.config.trace.clone()) {
        let text = match format {
            TraceFormat::Text => t.to_text(),
            TraceFormat::Json => t.to_json(),
        };
        write_output(Some(&path), &text)?;
    }

    let halt = t.halt_reason().unwrap_or(HaltReason::StepLimit);
    if halt != HaltReason::QueueEmpty {
        let detail = match t.events.last() {
            Some(templet::runtime::Event::Halt { detail, .. }) => detail.clone(),
            _ => String::new(),
        };
        rep.error(
            rep.at_scheme(Position::default()),
            halt_code(halt),
            format!("run halted with {} (seed {seed}): {detail}", halt.as_str()),
        );
        return Err(Failure::Language);
    }
    match net.result() {
        Some(r) => println!("sin2(x) + cos2(x) = {r}"),
        None => println!("sin2(x) + cos2(x) = (not computed)"),
    }
    for (name, state) in net.engine.channel_states() {
        println!("{name}: {}", state.as_deref().unwrap_or("-"));
    }
    println!("halt: {} after {} sends (seed {seed})", halt.as_str(), t.count_sends());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, strict } => cmd_check(&file, strict),
        Command::Map {
            file,
            templates,
            in_place,
            out,
        } => cmd_map(&file, templates, in_place, out),
        Command::Graph { file, class, out } => cmd_graph(&file, &class, out),
        Command::Run {
            target,
            seed,
            inputs,
            trace,
            trace_format,
        } => cmd_run(&target, seed, &inputs, trace, trace_format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => ExitCode::from(f.code()),
    }
}
