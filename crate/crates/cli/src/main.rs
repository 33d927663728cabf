mod args;
mod commands;

use std::process::ExitCode;

use args::{AnalyzeCommand, Cli, Command, EvalCommand, LmCommand, TrainCommand};
use attnsent::AttentionKind;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

/// Flag combinations that clap cannot express; checked before any file is read.
fn validate(cli: &Cli) -> Result<(), clap::Error> {
    let needs_lm = |kind: Option<AttentionKind>, lm: bool| kind == Some(AttentionKind::Sur) && !lm;
    let missing = match &cli.command {
        Command::Train(TrainCommand::Scbow(a)) => needs_lm(Some(a.model.attention), a.model.lm.is_some()),
        Command::Train(TrainCommand::Pp(a)) => needs_lm(Some(a.model.attention), a.model.lm.is_some()),
        Command::Embed(a) => needs_lm(a.encoder.attention, a.encoder.lm.is_some()),
        Command::Eval(EvalCommand::Sts(a)) => needs_lm(a.encoder.attention, a.encoder.lm.is_some()),
        Command::Eval(EvalCommand::Rt(a)) => needs_lm(a.encoder.attention, a.encoder.lm.is_some()),
        Command::Analyze(AnalyzeCommand::Tags(a)) => needs_lm(a.encoder.attention, a.encoder.lm.is_some()),
        Command::Analyze(AnalyzeCommand::Extremes(a)) => needs_lm(a.encoder.attention, a.encoder.lm.is_some()),
        _ => false,
    };
    if missing {
        return Err(Cli::command().error(ErrorKind::MissingRequiredArgument, "--attention sur requires --lm <FILE>"));
    }
    if let Command::Train(TrainCommand::Pp(a)) = &cli.command {
        if a.batch < 2 {
            return Err(Cli::command().error(ErrorKind::ValueValidation, "--batch must be at least 2 for negative mining"));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Lm(LmCommand::Build(a)) => commands::lm_build(a),
        Command::Lm(LmCommand::Surprisal(a)) => commands::lm_surprisal(a),
        Command::Train(TrainCommand::Scbow(a)) => commands::train_scbow_cmd(a),
        Command::Train(TrainCommand::Pp(a)) => commands::train_pp_cmd(a),
        Command::Embed(a) => commands::embed(a),
        Command::Eval(EvalCommand::Sts(a)) => commands::eval_sts_cmd(a),
        Command::Eval(EvalCommand::Rt(a)) => commands::eval_rt_cmd(a),
        Command::Analyze(AnalyzeCommand::Tags(a)) => commands::analyze_tags(a),
        Command::Analyze(AnalyzeCommand::Nearest(a)) => commands::analyze_nearest(a),
        Command::Analyze(AnalyzeCommand::Norms(a)) => commands::analyze_norms(a),
        Command::Analyze(AnalyzeCommand::Extremes(a)) => commands::analyze_extremes(a),
    }
}

fn category(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<attnsent::Error>())
        .map_or("runtime", attnsent::Error::category)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = validate(&cli) {
        e.exit();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR:{}: {e:#}", category(&e));
            ExitCode::from(1)
        }
    }
}
