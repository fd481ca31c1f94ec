use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Statechart language variants: parse, reduce, enumerate and check.
///
/// Exit status: 0 success or pass, 1 a check failed, 2 usage, parse or
/// bounds error.
#[derive(Parser)]
#[command(name = "lvw", version)]
pub struct Cli {
    /// Worker threads for enumeration-backed commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for evidence reports.
    #[arg(long, global = true, default_value = "reports")]
    reports: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse statecharts and print them back in canonical form.
    Parse {
        files: Vec<PathBuf>,
        #[command(flatten)]
        lang: LangArgs,
        /// Notation of the printed form (defaults to each file's own).
        #[arg(long)]
        render: Option<NotationArg>,
    },
    /// Eliminate hierarchy and multi-triggers; prints the flat model.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        lang: LangArgs,
        /// Conflict rule (defaults to the selection's, then inner-first).
        #[arg(long)]
        priority: Option<PriorityArg>,
    },
    /// Feature-model configurations.
    Config {
        #[command(subcommand)]
        command: ConfigCommand,
    },
    /// Bounded semantics of one model, or the integrated semantics of several.
    Sem {
        models: Vec<PathBuf>,
        #[command(flatten)]
        lang: LangArgs,
        /// Mapping selection, e.g. `stutter,open`.
        #[arg(long)]
        sel: Option<String>,
        /// Union over every completion of `--sel`; `open` and omitted fields stay open.
        #[arg(long)]
        inner: bool,
        /// Check that the (single) model refines this one.
        #[arg(long)]
        refines: Option<PathBuf>,
        #[command(flatten)]
        machines: MachineArgs,
        /// Print every machine of the set.
        #[arg(long)]
        list: bool,
    },
    /// Semantic language refinement between two mapping selections.
    Refine {
        #[arg(long)]
        v1: String,
        #[arg(long)]
        v2: String,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        lang: LangArgs,
        #[command(flatten)]
        machines: MachineArgs,
        /// After a passing refinement, check that this property is preserved
        /// on every corpus model.
        #[arg(long)]
        preserve: Option<String>,
    },
    /// Whether a property is invariant with respect to a variation point.
    Invariant {
        #[arg(long)]
        prop: String,
        #[arg(long)]
        vp: String,
        #[arg(long)]
        corpus: PathBuf,
        /// Selection fixing the other variation point.
        #[arg(long, default_value = "stutter,open")]
        base: String,
        #[command(flatten)]
        lang: LangArgs,
        #[command(flatten)]
        machines: MachineArgs,
    },
    /// Expressiveness of the language restricted by a constraint.
    Express {
        #[arg(long)]
        constraint: String,
        #[arg(long, default_value = "stutter,open")]
        sel: String,
        /// Most states of the enumerated flat models.
        #[arg(long, default_value_t = 2)]
        model_states: usize,
        #[command(flatten)]
        machines: MachineArgs,
    },
    /// Presentation-option checks over a corpus.
    Presopt {
        #[command(subcommand)]
        command: PresoptCommand,
    },
    /// Mini system models and semantic-domain variants.
    Sysmodel {
        #[command(subcommand)]
        command: SysmodelCommand,
    },
    /// Feature models: export, check, record refinements.
    Featmodel {
        #[command(subcommand)]
        command: FeatmodelCommand,
    },
}

#[derive(Args, Clone)]
pub struct LangArgs {
    /// Comma-separated features selecting the syntactic variant; every
    /// construct is accepted when omitted.
    #[arg(long)]
    select: Option<String>,
    /// Feature model validating `--select` (defaults to the shipped one).
    #[arg(long)]
    fm: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct MachineArgs {
    #[arg(long, default_value_t = 2)]
    max_states: usize,
    /// Realization tags to enumerate: `all` or a list of enum, pattern, other.
    #[arg(long, default_value = "all")]
    tags: String,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum NotationArg {
    Arrow,
    Keyword,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PriorityArg {
    Inner,
    Outer,
}

#[derive(Subcommand)]
pub enum ConfigCommand {
    /// Check a feature selection against the feature model.
    Validate {
        #[arg(long)]
        fm: Option<PathBuf>,
        /// Comma-separated feature names; empty selects nothing.
        #[arg(long, default_value = "")]
        select: String,
    },
}

#[derive(Args, Clone)]
pub struct PresoptArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Base language features (defaults to everything except keyword notation).
    #[arg(long)]
    base: Option<String>,
    /// Variant language features (defaults to everything).
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Subcommand)]
pub enum PresoptCommand {
    /// Texts both languages accept must parse to the same model.
    Agree(PresoptArgs),
    /// Every variant text must be expressible in the base language.
    Express(PresoptArgs),
    /// Find two distinct texts with the same abstract syntax.
    Exists(PresoptArgs),
}

#[derive(Args, Clone)]
pub struct DomainArgs {
    /// `default`, one number for every bound, or `classes=2,ops=1,...`.
    #[arg(long, default_value = "default")]
    bounds: String,
    /// Read the subclass relation reflexively.
    #[arg(long)]
    sub_reflexive: bool,
}

#[derive(Subcommand)]
pub enum SysmodelCommand {
    /// Evaluate every registered property on a `.smx` file.
    Check {
        file: PathBuf,
        #[arg(long)]
        sub_reflexive: bool,
    },
    /// Check that the strong property implies the weak one on every model.
    Refine {
        #[arg(long)]
        strong: String,
        #[arg(long)]
        weak: String,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Count (and optionally list) the models within bounds.
    Enumerate {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
pub enum FeatmodelCommand {
    /// Print the feature model as Graphviz DOT or `.fm` text.
    Export {
        #[arg(long)]
        fm: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: ExportFormat,
    },
    /// Parse and check a feature model.
    Check {
        #[arg(long)]
        fm: Option<PathBuf>,
    },
    /// Record a refinement between two alternatives, backed by a passing report.
    Refine {
        #[arg(long)]
        fm: Option<PathBuf>,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        evidence: PathBuf,
        /// Where to write the updated model (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Fm,
}

/// Exits quietly when stdout is closed early, as in `lvw ... | head`.
fn quiet_broken_pipe() {
    let default = std::panic::take_hook();
    std::panic::set_hook(Box::new(move |info| {
        let msg = info
            .payload()
            .downcast_ref::<String>()
            .map(String::as_str)
            .or_else(|| info.payload().downcast_ref::<&str>().copied())
            .unwrap_or("");
        if msg.contains("Broken pipe") {
            std::process::exit(0);
        }
        default(info);
    }));
}

fn main() -> ExitCode {
    quiet_broken_pipe();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => outcome.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
