//! Command-line pipeline: generation, scoring, evaluation, reporting and
//! the rating service, with a provenance manifest beside every output.

pub mod cli;
pub mod commands;
pub mod manifest;

use anyhow::Result;

use cli::{Cli, Command};

/// Runs one subcommand and returns what it prints on success.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Score(a) => commands::score(&a),
        Command::ExportRequests(a) => commands::export_requests_cmd(&a),
        Command::ImportScores(a) => commands::import_scores_cmd(&a),
        Command::ImportAnnotations(a) => commands::import_annotations(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Report(a) => commands::report(&a),
        Command::Correlate(a) => commands::correlate(&a),
        Command::Serve(a) => commands::serve(&a).map(|_| String::new()),
    }
}
