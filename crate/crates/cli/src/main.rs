//! `tensor1` command-line tool.
//!
//! Exit codes: 0 success, 1 semantic error, 2 parse error, 3 I/O error,
//! 4 configuration or schema error.

mod output;

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensor1::cd::tensor1_cd_xml;
use tensor1::om::{parse_compact, parse_xml, serialize_xml, to_compact, OMNode, ParseError};
use tensor1::semantics::{
    evaluate, has_errors, validate, Diagnostic, EnvError, Environment, Value,
};
use tensor1::tensor::{transform, Frame, Limits};

const MAX_ORDER_VAR: &str = "TENSOR1_MAX_ORDER";

#[derive(Parser, Debug)]
#[command(
    name = "tensor1",
    version,
    about = "Parse, validate and evaluate tensor1 OpenMath formulas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical XML (or compact text) form of a formula.
    Parse {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Report diagnostics; exits 1 if any is an error.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        /// Environment supplying tensor orders and frame dimensions.
        #[arg(long, value_name = "PATH")]
        env: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate a formula against an environment.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_name = "PATH")]
        env: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print the basis, dual basis and metric of a frame.
    FrameInfo {
        #[arg(long, value_name = "PATH")]
        env: PathBuf,
        #[arg(long, value_name = "NAME")]
        frame: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-express a named tensor of the environment in another frame.
    Transform {
        /// Name of the tensor binding.
        #[arg(value_name = "TENSOR")]
        tensor: String,
        #[arg(long, value_name = "PATH")]
        env: PathBuf,
        #[arg(long, value_name = "NAME")]
        frame: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Write the tensor1 content dictionary.
    EmitCd {
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Formula file, or `-` for stdin.
    #[arg(value_name = "INPUT", default_value = "-")]
    path: String,
    /// Read the compact syntax (the default for input not starting with `<`).
    #[arg(long)]
    compact: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Xml,
}

/// A failed run: exit code and the lines for stderr.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn new(code: u8, line: impl Into<String>) -> Self {
        Failure {
            code,
            lines: vec![line.into()],
        }
    }

    fn semantic(diags: &[Diagnostic]) -> Self {
        Failure {
            code: 1,
            lines: diags.iter().map(Diagnostic::to_string).collect(),
        }
    }

    fn parse(e: &ParseError) -> Self {
        Failure::new(
            2,
            format!("error {} {} {}", e.kind.code(), e.span, e.message),
        )
    }

    fn env(e: &EnvError) -> Self {
        let code = match e {
            EnvError::Io(_) => 3,
            _ if e.is_schema_error() => 4,
            _ => 1,
        };
        Failure::new(code, format!("error {} {e}", e.code()))
    }

    fn format(command: &str, format: Format) -> Self {
        let name = format!("{format:?}").to_lowercase();
        Failure::new(
            4,
            format!("error BadFormat {command} does not support --format {name}"),
        )
    }
}

type RunResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut err = io::stderr().lock();
            for line in &f.lines {
                let _ = writeln!(err, "{line}");
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> RunResult {
    match command {
        Command::Parse { input, out } => cmd_parse(&input, &out),
        Command::Validate { input, env, out } => cmd_validate(&input, env.as_deref(), &out),
        Command::Eval { input, env, out } => cmd_eval(&input, &env, &out),
        Command::FrameInfo { env, frame, out } => cmd_frame_info(&env, &frame, &out),
        Command::Transform {
            tensor,
            env,
            frame,
            out,
        } => cmd_transform(&tensor, &env, &frame, &out),
        Command::EmitCd { out } => cmd_emit_cd(&out),
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::new(3, format!("error Io {path}: {e}")))?;
    Ok(text)
}

fn parse_input(input: &InputArgs) -> Result<OMNode, Failure> {
    let text = read_input(&input.path)?;
    let is_xml = !input.compact && text.trim_start().starts_with('<');
    let parsed = if is_xml {
        parse_xml(&text)
    } else {
        parse_compact(&text)
    };
    parsed.map_err(|e| Failure::parse(&e))
}

fn emit(out: &OutputArgs, text: &str) -> RunResult {
    let res = match &out.out {
        Some(path) if path.as_os_str() != "-" => std::fs::write(path, text),
        _ => io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::new(3, format!("error Io {e}")))
}

fn limits() -> Result<Limits, Failure> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var(MAX_ORDER_VAR) {
        limits.max_order = v.trim().parse().map_err(|_| {
            Failure::new(
                4,
                format!("error BadConfig {MAX_ORDER_VAR} must be a natural number, got {v:?}"),
            )
        })?;
    }
    Ok(limits)
}

fn load_env(path: &Path) -> Result<Environment, Failure> {
    Environment::load(path, limits()?).map_err(|e| Failure::env(&e))
}

fn warnings_to_stderr(diags: &[Diagnostic]) {
    let mut err = io::stderr().lock();
    for d in diags.iter().filter(|d| !d.is_error()) {
        let _ = writeln!(err, "{d}");
    }
}

fn cmd_parse(input: &InputArgs, out: &OutputArgs) -> RunResult {
    let node = parse_input(input)?;
    match out.format.unwrap_or(Format::Xml) {
        Format::Xml => emit(out, &serialize_xml(&node)),
        Format::Text => emit(out, &format!("{}\n", to_compact(&node))),
        f => Err(Failure::format("parse", f)),
    }
}

fn cmd_validate(input: &InputArgs, env: Option<&Path>, out: &OutputArgs) -> RunResult {
    let node = parse_input(input)?;
    let env = match env {
        Some(p) => load_env(p)?,
        None => Environment::with_limits(limits()?),
    };
    let diags = validate(&node, &env);
    let text = match out.format.unwrap_or(Format::Text) {
        Format::Text => output::diagnostics_text(&diags),
        Format::Json => output::diagnostics_json(&diags),
        f => return Err(Failure::format("validate", f)),
    };
    emit(out, &text)?;
    if has_errors(&diags) {
        Err(Failure {
            code: 1,
            lines: Vec::new(),
        })
    } else {
        Ok(())
    }
}

fn render_value(value: &Value, format: Format, command: &str) -> Result<String, Failure> {
    match format {
        Format::Text => Ok(output::value_text(value)),
        Format::Json => Ok(output::value_json(value)),
        Format::Xml => output::value_xml(value).ok_or_else(|| {
            Failure::new(
                4,
                format!(
                    "error BadFormat {command} cannot write a {} as xml",
                    value.kind_name()
                ),
            )
        }),
    }
}

fn cmd_eval(input: &InputArgs, env_path: &Path, out: &OutputArgs) -> RunResult {
    let format = out.format.unwrap_or(Format::Text);
    let node = parse_input(input)?;
    let env = load_env(env_path)?;
    let diags = validate(&node, &env);
    if has_errors(&diags) {
        return Err(Failure::semantic(&diags));
    }
    warnings_to_stderr(&diags);
    let value = evaluate(&node, &env).map_err(|e| Failure::semantic(&[e.to_diagnostic()]))?;
    emit(out, &render_value(&value, format, "eval")?)
}

fn lookup_frame(env: &Environment, name: &str) -> Result<Arc<Frame>, Failure> {
    env.frame(name).cloned().ok_or_else(|| {
        Failure::new(
            1,
            format!("error UnknownFrame {name} is not a frame of the environment"),
        )
    })
}

fn cmd_frame_info(env_path: &Path, frame: &str, out: &OutputArgs) -> RunResult {
    let env = load_env(env_path)?;
    let frame = lookup_frame(&env, frame)?;
    let text = match out.format.unwrap_or(Format::Text) {
        Format::Text => output::frame_text(&frame),
        Format::Json => output::frame_json(&frame),
        f => return Err(Failure::format("frame-info", f)),
    };
    emit(out, &text)
}

fn cmd_transform(tensor: &str, env_path: &Path, frame: &str, out: &OutputArgs) -> RunResult {
    let env = load_env(env_path)?;
    let target = lookup_frame(&env, frame)?;
    let t = env.tensor(tensor).ok_or_else(|| {
        Failure::new(1, format!("error UnboundVariable no tensor named {tensor}"))
    })?;
    let result =
        transform(t, &target).map_err(|e| Failure::new(1, format!("error {} {e}", e.code())))?;
    emit(
        out,
        &render_value(
            &Value::Tensor(result),
            out.format.unwrap_or(Format::Text),
            "transform",
        )?,
    )
}

fn cmd_emit_cd(out: &OutputArgs) -> RunResult {
    match out.format.unwrap_or(Format::Xml) {
        Format::Xml => emit(out, &tensor1_cd_xml()),
        f => Err(Failure::format("emit-cd", f)),
    }
}
