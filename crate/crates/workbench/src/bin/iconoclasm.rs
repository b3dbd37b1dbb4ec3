use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use iconoclasm::codec::minimal_init_words;
use iconoclasm::hmm::em_fit;
use iconoclasm::{CodecConfig, CodecKind, Hmm, RateReport};
use iconoclasm_workbench::experiment::{write_csv, PerfectExperiment, TextExperiment};
use iconoclasm_workbench::{load_corpus, CompressedFile, ModelFile};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "iconoclasm",
    version,
    about = "Lossless compression with hidden Markov models via interleaved bits-back ANS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an HMM on the start of a text file with Baum–Welch EM.
    Train(TrainArgs),
    /// Write an HMM with Dirichlet-distributed parameters.
    RandomModel(RandomModelArgs),
    /// Sample a symbol sequence from a model.
    Sample(SampleArgs),
    /// Compress a file under a model.
    Compress(CompressArgs),
    /// Decompress a file produced by `compress`.
    Decompress(DecompressArgs),
    /// Rate vs. length on data sampled from random HMMs.
    ExperimentPerfect(PerfectArgs),
    /// Rate vs. length on held-out text under an EM-trained HMM.
    ExperimentText(TextArgs),
}

#[derive(Args)]
struct CodecArgs {
    /// Quantization precision in bits (8..=24).
    #[arg(long, default_value_t = 16)]
    precision: u32,
    /// 32-bit words in the initial message buffer, or `auto` for the
    /// fewest that let the input encode.
    #[arg(long, default_value = "4")]
    init_words: InitWords,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
}

#[derive(Clone, Copy)]
enum InitWords {
    Fixed(usize),
    Auto,
}

impl std::str::FromStr for InitWords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse()
            .map(Self::Fixed)
            .map_err(|_| format!("expected a word count or `auto`, got {s:?}"))
    }
}

impl CodecArgs {
    fn config(&self) -> CodecConfig {
        CodecConfig {
            precision: self.precision,
            init_words: match self.init_words {
                InitWords::Fixed(n) => n,
                InitWords::Auto => 0,
            },
            init_seed: self.init_seed,
        }
    }

    fn config_for(&self, codec: CodecKind, hmm: &Hmm, xs: &[usize]) -> Result<CodecConfig> {
        let cfg = self.config();
        Ok(match self.init_words {
            InitWords::Fixed(_) => cfg,
            InitWords::Auto => cfg.with_init_words(minimal_init_words(codec, hmm, xs, &cfg)?),
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 64)]
    states: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    smoothing: f64,
    /// Characters from the start of the file to train on.
    #[arg(long, default_value_t = 100_000)]
    train_chars: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct RandomModelArgs {
    #[arg(long, default_value_t = 64)]
    states: usize,
    #[arg(long, default_value_t = 64)]
    obs: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    model: PathBuf,
    /// iconoclasm, vanilla or naive-bbans.
    #[arg(long, default_value = "iconoclasm")]
    codec: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    codec_args: CodecArgs,
    /// Print the rate report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecompressArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Print the rate report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PerfectArgs {
    #[arg(long, default_value_t = 64)]
    states: usize,
    #[arg(long, default_value_t = 64)]
    obs: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,316,1000,3162,10000,31623,100000"
    )]
    lengths: Vec<usize>,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    codec_args: CodecArgs,
}

#[derive(Args)]
struct TextArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    train_chars: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,316,1000,3162,10000,31623,50000"
    )]
    test_lengths: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    states: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    smoothing: f64,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    codec_args: CodecArgs,
}

#[derive(Serialize)]
struct JsonReport {
    codec: &'static str,
    t: usize,
    l_init: u64,
    l_final: u64,
    net_bits: i64,
    h_model: f64,
    ratio: f64,
}

fn print_report(codec: CodecKind, report: &RateReport, json: bool) -> Result<()> {
    if json {
        let out = JsonReport {
            codec: codec.name(),
            t: report.t,
            l_init: report.l_init,
            l_final: report.l_final,
            net_bits: report.net_bits(),
            h_model: report.h_model,
            ratio: report.ratio,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        eprintln!(
            "{codec}: T={} l_init={} l_final={} net={} h={:.3} ratio={:.6}",
            report.t,
            report.l_init,
            report.l_final,
            report.net_bits(),
            report.h_model,
            report.ratio
        );
    }
    Ok(())
}

/// Input for a model: text through its alphabet, otherwise whitespace
/// separated symbol indices.
fn read_symbols(model: &ModelFile, path: &Path) -> Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match &model.alphabet {
        Some(alphabet) => Ok(alphabet.encode(&text)?),
        None => text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .with_context(|| format!("bad symbol {tok:?}"))
            })
            .collect(),
    }
}

fn write_symbols(model: &ModelFile, path: &Path, symbols: &[usize]) -> Result<()> {
    let bytes = match &model.alphabet {
        Some(alphabet) => alphabet.decode(symbols)?.into_bytes(),
        None => symbols
            .iter()
            .map(|s| format!("{s}\n"))
            .collect::<String>()
            .into_bytes(),
    };
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn csv_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn train(args: TrainArgs) -> Result<()> {
    let (alphabet, text) = load_corpus(&args.input, Some(args.train_chars))?;
    eprintln!(
        "training K={} on {} characters (V={}) for {} iterations",
        args.states,
        text.len(),
        alphabet.len(),
        args.iters
    );
    let fit = em_fit(
        &text,
        args.states,
        alphabet.len(),
        args.iters,
        args.seed,
        args.smoothing,
    )?;
    for (i, ll) in fit.log_likelihoods.iter().enumerate() {
        println!(
            "iter {i:>4}  log-likelihood {ll:.6} nats  ({:.6} bits/char)",
            -ll / std::f64::consts::LN_2 / text.len() as f64
        );
    }
    ModelFile::new(fit.hmm, Some(alphabet))?.save(&args.output)?;
    Ok(())
}

fn random_model(args: RandomModelArgs) -> Result<()> {
    if args.states == 0 || args.obs == 0 || args.alpha.is_nan() || args.alpha <= 0.0 {
        bail!("--states and --obs must be positive and --alpha must be > 0");
    }
    let hmm = Hmm::sample_params(args.states, args.obs, args.alpha, args.seed);
    ModelFile::new(hmm, None)?.save(&args.output)?;
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let (xs, _) = model.hmm.sample_sequence(args.length, args.seed);
    write_symbols(&model, &args.output, &xs)
}

fn compress(args: CompressArgs) -> Result<()> {
    let Some(codec) = CodecKind::from_name(&args.codec) else {
        bail!(
            "unknown codec {:?} (expected iconoclasm, vanilla or naive-bbans)",
            args.codec
        );
    };
    let model = ModelFile::load(&args.model)?;
    let symbols = read_symbols(&model, &args.input)?;
    let config = args.codec_args.config_for(codec, &model.hmm, &symbols)?;
    let (file, report) = CompressedFile::compress(&model, codec, config, &symbols)?;
    file.save(&args.output)?;
    print_report(codec, &report, args.json)
}

fn decompress(args: DecompressArgs) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let file = CompressedFile::load(&args.input)?;
    let symbols = file.decompress(&model)?;
    write_symbols(&model, &args.output, &symbols)?;
    let h_model = model.hmm.info_content(&symbols)?;
    let l_init = file.config.initial_message().length_bits();
    let l_final = file.message.length_bits();
    let report = RateReport {
        t: symbols.len(),
        l_init,
        l_final,
        h_model,
        ratio: if h_model > 0.0 {
            l_final as f64 / h_model
        } else {
            f64::INFINITY
        },
    };
    print_report(file.codec, &report, args.json)
}

fn experiment_perfect(args: PerfectArgs) -> Result<()> {
    let exp = PerfectExperiment {
        states: args.states,
        symbols: args.obs,
        alpha: args.alpha,
        seeds: args.seeds,
        lengths: args.lengths,
        config: args.codec_args.config(),
    };
    let results = exp.run()?;
    let rows: Vec<_> = results
        .iter()
        .flat_map(|(_, rows)| rows.iter().copied())
        .collect();
    for (seed, rows) in &results {
        if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
            eprintln!(
                "seed {seed}: ratio {:.4} at T={} -> {:.4} at T={}",
                first.ratio, first.t, last.ratio, last.t
            );
        }
    }
    write_csv(&rows, csv_sink(&args.csv)?)?;
    Ok(())
}

fn experiment_text(args: TextArgs) -> Result<()> {
    let exp = TextExperiment {
        corpus: args.corpus,
        train_chars: args.train_chars,
        test_lengths: args.test_lengths,
        states: args.states,
        iterations: args.iters,
        seed: args.seed,
        smoothing: args.smoothing,
        config: args.codec_args.config(),
    };
    let outcome = exp.run()?;
    eprintln!(
        "alphabet V={}, trained on chars {:?}, final training log-likelihood {:.3} nats",
        outcome.alphabet.len(),
        outcome.train_range,
        outcome.log_likelihoods.last().copied().unwrap_or(f64::NAN)
    );
    write_csv(&outcome.records, csv_sink(&args.csv)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::RandomModel(a) => random_model(a),
        Command::Sample(a) => sample(a),
        Command::Compress(a) => compress(a),
        Command::Decompress(a) => decompress(a),
        Command::ExperimentPerfect(a) => experiment_perfect(a),
        Command::ExperimentText(a) => experiment_text(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
