use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cg::argue::Semantics;
use cg::cli::{self, CgCommand, RunConfig};

#[derive(Parser)]
#[command(
    name = "cg",
    about = "Context-graph engine: typed theories, views, pushout rule application, argumentation labelings",
    version,
    max_term_width = 100
)]
struct CliArgs {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Args)]
struct Common {
    /// Input .cg files, loaded in order.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Accept views that leave constants unmapped.
    #[arg(long, alias = "partial")]
    allow_partial: bool,
    /// Definition-unfolding step bound.
    #[arg(long, default_value_t = cg::kernel::DEFAULT_UNFOLD_BOUND)]
    unfold_bound: u64,
}

#[derive(Subcommand)]
enum CommandArgs {
    /// Parse, elaborate, and type-check; print a summary.
    Check(Common),
    /// Print a theory's flattened declarations.
    Flatten {
        #[command(flatten)]
        common: Common,
        /// Theory to flatten.
        #[arg(long)]
        theory: String,
    },
    /// Compute all pushouts and dump the materialized graph as .cg text.
    Elaborate(Common),
    /// Detect and inherit attacks, label the graph, report defeat (JSON).
    Argue {
        #[command(flatten)]
        common: Common,
        /// Labeling semantics.
        #[arg(long, default_value = "grounded")]
        semantics: String,
    },
    /// Search for views between two theories.
    Analogies {
        #[command(flatten)]
        common: Common,
        /// Domain theory.
        #[arg(long)]
        from: String,
        /// Codomain theory.
        #[arg(long)]
        to: String,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
        /// Search node budget.
        #[arg(long, default_value_t = cg::analogy::DEFAULT_SEARCH_BUDGET)]
        search_budget: u64,
        /// Keep at most this many candidates.
        #[arg(long, default_value_t = 32)]
        max_results: usize,
    },
    /// Export the graph in DOT format.
    Dot(Common),
    /// Export the graph as JSON.
    Json(Common),
}

fn config_from(common: Common, command: CgCommand) -> RunConfig {
    let mut config = RunConfig::new(command, common.inputs);
    config.output = common.output;
    config.allow_partial = common.allow_partial;
    config.unfold_bound = common.unfold_bound;
    config
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let config = match args.command {
        CommandArgs::Check(c) => config_from(c, CgCommand::Check),
        CommandArgs::Flatten { common, theory } => {
            let mut config = config_from(common, CgCommand::Flatten);
            config.theory = Some(theory);
            config
        }
        CommandArgs::Elaborate(c) => config_from(c, CgCommand::Elaborate),
        CommandArgs::Argue { common, semantics } => {
            let mut config = config_from(common, CgCommand::Argue);
            config.semantics = match semantics.parse::<Semantics>() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(cli::EXIT_USAGE as u8);
                }
            };
            config
        }
        CommandArgs::Analogies {
            common,
            from,
            to,
            json,
            search_budget,
            max_results,
        } => {
            let mut config = config_from(common, CgCommand::Analogies);
            config.from = Some(from);
            config.to = Some(to);
            config.json = json;
            config.search_budget = search_budget;
            config.max_results = max_results;
            config
        }
        CommandArgs::Dot(c) => config_from(c, CgCommand::Dot),
        CommandArgs::Json(c) => config_from(c, CgCommand::Json),
    };
    ExitCode::from(cli::run(&config) as u8)
}
