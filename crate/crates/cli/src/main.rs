//! `amigo`: compile meshes into crochet patterns, embed graphs, verify and summarize.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// A failed command: exit code and message. Stage failures name the stage.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_STAGE: u8 = 3;

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn stage(stage: impl std::fmt::Display, message: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_STAGE,
            message: format!("stage {stage} failed: {message}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "amigo",
    version,
    about = "Compile closed triangle meshes into amigurumi crochet patterns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a mesh into pattern.txt, graph.json, embedding.obj and stats.json.
    Compile(CompileArgs),
    /// Embed a graph JSON and write the predicted shape as OBJ.
    Embed {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write a PLY with per-segment colours.
        #[arg(long)]
        ply: Option<PathBuf>,
    },
    /// Crochet a pattern file and compare the result with a graph JSON.
    Verify { pattern: PathBuf, graph: PathBuf },
    /// Print row, segment and stitch totals of a graph JSON.
    Stats { graph: PathBuf },
}

#[derive(Args)]
struct CompileArgs {
    mesh: PathBuf,
    /// Seed vertex id, or a point x,y,z snapped to the nearest vertex.
    #[arg(long, value_parser = config::SeedSpec::parse, allow_hyphen_values = true)]
    seed: Option<config::SeedSpec>,
    /// Stitch width in area-normalized units.
    #[arg(long)]
    width: Option<f64>,
    /// Stitches per cm; with --toy-height-cm replaces --width.
    #[arg(long, requires = "toy_height_cm", conflicts_with = "width")]
    gauge: Option<f64>,
    /// Height of the finished toy in cm along its largest extent.
    #[arg(long)]
    toy_height_cm: Option<f64>,
    /// Mark creases with front- and back-loop-only stitches.
    #[arg(long)]
    creases: bool,
    #[arg(long)]
    crease_threshold: Option<f64>,
    #[arg(long)]
    no_smooth_craters: bool,
    /// Disable curvature-adapted stitch density.
    #[arg(long)]
    no_adaptive: bool,
    /// Also write the processed mesh, row function, segment labels and a PLY embedding.
    #[arg(long)]
    debug_exports: bool,
    /// Round label style: rnd (Rnd 3:) or rows (rows 2-3:).
    #[arg(long, value_parser = config::parse_label)]
    label: Option<amigo_core::pattern::RoundLabel>,
    /// Config file with key = value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn settings(args: CompileArgs) -> Result<(PathBuf, config::CompileSettings), Failure> {
    let file = match &args.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    let usage = |m: &str| Failure {
        code: EXIT_USAGE,
        message: m.to_string(),
    };
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| usage("missing --seed"))?;
    let width = match (args.width, args.gauge, args.toy_height_cm) {
        (Some(w), _, _) => config::WidthSpec::Normalized(w),
        (None, Some(g), Some(h)) => config::WidthSpec::Gauge {
            stitches_per_cm: g,
            height_cm: h,
        },
        _ => match (
            file.width,
            file.gauge,
            args.toy_height_cm.or(file.toy_height_cm),
        ) {
            (_, Some(g), Some(h)) if file.width.is_none() => config::WidthSpec::Gauge {
                stitches_per_cm: g,
                height_cm: h,
            },
            (Some(w), _, _) => config::WidthSpec::Normalized(w),
            _ => return Err(usage("missing --width (or --gauge with --toy-height-cm)")),
        },
    };
    let output = args
        .output
        .or(file.output)
        .ok_or_else(|| usage("missing -o <dir>"))?;
    let s = config::CompileSettings {
        seed,
        width,
        creases: args.creases || file.creases.unwrap_or(false),
        crease_threshold: args.crease_threshold.or(file.crease_threshold),
        smooth_craters: !args.no_smooth_craters && file.smooth_craters.unwrap_or(true),
        adaptive: !args.no_adaptive && file.adaptive.unwrap_or(true),
        debug_exports: args.debug_exports || file.debug_exports.unwrap_or(false),
        label: args.label.or(file.label).unwrap_or_default(),
        output,
    };
    Ok((args.mesh, s))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile(args) => {
            let (mesh, s) = settings(args)?;
            commands::compile(&mesh, &s)
        }
        Command::Embed { graph, output, ply } => commands::embed(&graph, &output, ply.as_deref()),
        Command::Verify { pattern, graph } => commands::verify(&pattern, &graph),
        Command::Stats { graph } => commands::stats(&graph),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
