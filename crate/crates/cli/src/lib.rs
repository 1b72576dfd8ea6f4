//! The `otkit` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Data goes
//! to standard output and diagnostics to standard error.

mod commands;

use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Environment variable naming a directory with an alternative `ottoman.json`.
pub const SCHEME_DIR_VAR: &str = "OTKIT_SCHEME_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "otkit",
    version,
    about = "Ottoman Turkish HTR ground-truth toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reverse each line of standard input by grapheme cluster, keeping digit runs.
    Reverse(ReverseArgs),
    /// Convert transcription text between schemes.
    SchemeConvert(ConvertArgs),
    /// Report graphemes that do not belong to a scheme's alphabet.
    SchemeValidate(ValidateArgs),
    /// Print ranked romanization candidates for Ottoman words.
    Romanize(RomanizeArgs),
    /// Train a word n-gram model.
    LmTrain(LmTrainArgs),
    /// Score lines with a trained model.
    LmScore(LmScoreArgs),
    /// Character and word error rates of hypotheses against references.
    Eval(EvalArgs),
    /// Pair page lines with transcripts and export training files.
    Prepare(PrepareArgs),
    /// Assign train/val/test splits to a manifest.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
pub struct ReverseArgs {
    /// Swap paired brackets after reversing.
    #[arg(long)]
    pub mirror_brackets: bool,
    /// Reverse digit runs like any other text.
    #[arg(long)]
    pub no_digit_runs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Ia,
    Loose,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: SchemeArg,
    #[arg(long, value_enum)]
    pub to: SchemeArg,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Args)]
pub struct RomanizeArgs {
    /// Lexicon file: stems, `form<TAB>full` lines and `-Affix` templates.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Extra `OT-word<TAB>MT-surface` exceptions on top of the built-in ones.
    #[arg(long)]
    pub exceptions: Option<PathBuf>,
    /// Language model for rescoring.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Weight of the generation score against the LM score.
    #[arg(long, requires = "model", default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub max_insertions: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub beam: usize,
    #[arg(long, default_value_t = 50)]
    pub max_candidates: usize,
    /// Also print each candidate's total score.
    #[arg(long)]
    pub scores: bool,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct LmTrainArgs {
    /// Training text files; standard input when none are given.
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 3)]
    pub char_order: usize,
    #[arg(long, default_value_t = 0.1)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct LmScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Print corpus perplexity instead of per-line log-probabilities.
    #[arg(long)]
    pub perplexity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Reference file, or directory of reference files.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Hypothesis file, or directory with files of the same names.
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub report: ReportFormat,
    /// Manifest supplying name, subject and date for each transcript.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Export the text in its original direction.
    #[arg(long)]
    pub no_reverse: bool,
    /// Collapse whitespace in transcripts instead of keeping them verbatim.
    #[arg(long)]
    pub tidy: bool,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Train, validation and test proportions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub ratios: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the labelled manifest here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

/// Standard streams handed to a command.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn read_stdin(&mut self) -> Result<String, Failure> {
        let mut buf = Vec::new();
        self.stdin.read_to_end(&mut buf)?;
        String::from_utf8(buf)
            .map_err(|e| Failure::Data(anyhow::anyhow!("standard input is not UTF-8: {e}")))
    }
}

/// Runs with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let stdout = io::stdout();
    let mut stdout = io::BufWriter::new(stdout.lock());
    let mut stderr = io::stderr();
    let code = run_with(
        args,
        &mut Io {
            stdin: &mut stdin,
            stdout: &mut stdout,
            stderr: &mut stderr,
        },
    );
    if stdout.flush().is_err() {
        return EXIT_DATA;
    }
    code
}

pub fn run_with<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = io.stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = io.stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match commands::dispatch(cli.command, io) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_DATA
        }
    }
}
