//! `chordseq`: train, decode, and evaluate chord sequence models.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chordseq_cli::config::ExperimentConfig;
use chordseq_cli::experiments::{self, DecodeArgs, TemporalChoice};
use chordseq_core::acoustic::ClassifierKind;
use chordseq_core::error::Error as CoreError;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chordseq",
    version,
    about = "Chord sequence modelling experiments: likelihoods, decoding, and chord-level language models"
)]
struct Cli {
    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Pin every model/decoder hyperparameter to the published values.
    #[arg(long, global = true)]
    paper_defaults: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemporalArg {
    None,
    Mv,
    Hmm,
    Rnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum AcousticKindArg {
    Logreg,
    Mlp,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus under <output>/corpus.
    Synth,
    /// Fit the first-order model on the training split.
    TrainMarkov {
        /// Collapse repeated frames and model chord-level sequences.
        #[arg(long)]
        chord_level: bool,
    },
    /// Train the LSTM language model on the training split.
    TrainRnn {
        #[arg(long)]
        chord_level: bool,
    },
    /// Train a frame classifier on the training split.
    TrainAcoustic {
        #[arg(long, value_enum)]
        kind: AcousticKindArg,
    },
    /// Decode the test split into <output>/decoded/<id>.lab.
    Decode {
        #[arg(long, value_enum)]
        temporal: TemporalArg,
        /// Saved classifier checkpoint producing the posteriors.
        #[arg(long)]
        acoustic: Option<PathBuf>,
        /// Directory of <id>.post files to decode instead of running a classifier.
        #[arg(long)]
        posteriors: Option<PathBuf>,
        /// Saved Markov model (needed for --temporal hmm).
        #[arg(long)]
        markov: Option<PathBuf>,
        /// Saved LSTM checkpoint (needed for --temporal rnn).
        #[arg(long)]
        rnn: Option<PathBuf>,
        /// Also write the posteriors next to the decodes.
        #[arg(long)]
        save_posteriors: bool,
    },
    /// Average log-probability of a saved model on the test split.
    EvalLogprob {
        /// Saved Markov model or LSTM checkpoint.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        chord_level: bool,
    },
    /// Weighted Chord Symbol Recall between two annotation directories.
    EvalWcsr {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
    },
    /// Sequence-likelihood comparison of both temporal models.
    Exp1,
    /// Full decoding grid: acoustic models x temporal models, scored by WCSR.
    Exp2,
    /// Chord-level language modelling comparison with per-symbol traces.
    Exp3,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.paper_defaults {
        config.pin_paper_defaults();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(output) = &cli.output {
        config.output_dir = output.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Synth => {
            let dir = experiments::cmd_synth(&config)?;
            println!("corpus written to {}", dir.display());
        }
        Command::TrainMarkov { chord_level } => {
            let path = experiments::cmd_train_markov(&config, chord_level)?;
            println!("markov model written to {}", path.display());
        }
        Command::TrainRnn { chord_level } => {
            let path = experiments::cmd_train_rnn(&config, chord_level)?;
            println!("rnn checkpoint written to {}", path.display());
        }
        Command::TrainAcoustic { kind } => {
            let kind = match kind {
                AcousticKindArg::Logreg => ClassifierKind::LogReg,
                AcousticKindArg::Mlp => ClassifierKind::Mlp,
            };
            let path = experiments::cmd_train_acoustic(&config, kind)?;
            println!("classifier written to {}", path.display());
        }
        Command::Decode {
            temporal,
            acoustic,
            posteriors,
            markov,
            rnn,
            save_posteriors,
        } => {
            let args = DecodeArgs {
                temporal: match temporal {
                    TemporalArg::None => TemporalChoice::None,
                    TemporalArg::Mv => TemporalChoice::MajorityVote,
                    TemporalArg::Hmm => TemporalChoice::Hmm,
                    TemporalArg::Rnn => TemporalChoice::Rnn,
                },
                acoustic_model: acoustic,
                posteriors_dir: posteriors,
                markov_model: markov,
                rnn_model: rnn,
                save_posteriors,
            };
            let dir = experiments::cmd_decode(&config, &args)?;
            println!("decodes written to {}", dir.display());
        }
        Command::EvalLogprob { model, chord_level } => {
            let report = experiments::cmd_eval_logprob(&config, &model, chord_level)?;
            println!("{report}");
        }
        Command::EvalWcsr {
            reference,
            predicted,
        } => {
            let report = experiments::cmd_eval_wcsr(&reference, &predicted)?;
            println!("t_c={}", report.correct_s);
            println!("t_a={}", report.annotated_s);
            println!("wcsr={}", report.recall());
        }
        Command::Exp1 => {
            let report = experiments::cmd_exp1(&config)?;
            print!("{}", report.csv());
        }
        Command::Exp2 => {
            let report = experiments::cmd_exp2(&config)?;
            print!("{}", report.csv());
        }
        Command::Exp3 => {
            let report = experiments::cmd_exp3(&config)?;
            print!("{}", report.csv());
        }
    }
    Ok(())
}

/// 1 = usage, 2 = data, 3 = numerical.
fn classify_error(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::LabelParse { .. } | CoreError::DataFormat { .. } | CoreError::Io(_) => {
                    EXIT_DATA
                }
                CoreError::Diverged { .. } | CoreError::Decode { .. } => EXIT_NUMERICAL,
                CoreError::Contract(_) => EXIT_USAGE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_DATA;
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}
