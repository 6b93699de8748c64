use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use retrobench::agents::{make_agent, Agent};
use retrobench::env::{split_levels, GamePackage, Split, DEFAULT_SCENARIO, DEFAULT_TEST_ZONES};
use retrobench::eval::{
    aggregate, evaluate_level, evaluate_matrix, learning_curve, write_csv, write_curve_tsv, write_json, EpisodeRecord,
    EvalConfig,
};
use retrobench::joint::{joint_train, Checkpoint, JointTrainConfig, QAgent, QAgentConfig, FEATURE_SPEC};
use retrobench::record::{replay_env, ReplayFile};
use retrobench::sim::ZoneSetConfig;
use retrobench_serve::protocol::Mode;
use retrobench_serve::{ServeError, ServerState, SessionConfig};
use thiserror::Error;

mod exit {
    pub const CONFIG: u8 = 2;
    pub const VERIFICATION: u8 = 3;
    pub const IO: u8 = 4;
    pub const OTHER: u8 = 1;
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] retrobench::Error),

    #[error(transparent)]
    Serve(#[from] ServeError),

    #[error("invalid config {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn core_code(e: &retrobench::Error) -> u8 {
    use retrobench::Error as E;
    match e {
        E::Verification(_) | E::Corrupt(_) => exit::VERIFICATION,
        E::Io { .. } => exit::IO,
        E::Aborted(_) => exit::OTHER,
        _ => exit::CONFIG,
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::Serve(ServeError::Core(e)) => core_code(e),
            CliError::Serve(ServeError::Io { .. }) | CliError::Io { .. } => exit::IO,
            CliError::Serve(_) | CliError::Toml { .. } => exit::CONFIG,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "retrobench", version, about = "Procedural platformer benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game package (manifest plus one file per level).
    Gen(GenArgs),
    /// Hold out one act from randomly chosen multi-act zones.
    Split(SplitArgs),
    /// Evaluate a baseline agent on every level of one side of a split.
    Eval(EvalArgs),
    /// Train a linear Q policy jointly on the training levels.
    Jointtrain(JointArgs),
    /// Evaluate a checkpoint on one level, optionally learning online.
    Finetune(FinetuneArgs),
    /// Record one agent episode as a replay file.
    Record(RecordArgs),
    /// Print a replay file, or verify it with --verify.
    Replay(ReplayArgs),
    /// Run the human-play session server.
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "retrobench")]
    name: String,
    /// Full generator settings (TOML); --seed still overrides the master seed.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    package: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TEST_ZONES)]
    test_zones: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Train,
    Test,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    agent: String,
    #[arg(long)]
    package: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    levels: Side,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Number of seeds, numbered from 0.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    copies: u32,
    #[arg(long)]
    no_sticky: bool,
    /// Let the last episode run past the budget instead of cutting it off.
    #[arg(long)]
    whole_episodes: bool,
    #[arg(long, default_value = DEFAULT_SCENARIO)]
    scenario: String,
    /// Aggregate result as JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Learning curve (timestep, mean return) as TSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    bucket: u64,
}

#[derive(Args)]
struct JointArgs {
    /// Training settings (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    package: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration metrics as JSON lines.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Start from this checkpoint instead of zeros.
    #[arg(long)]
    init: Option<PathBuf>,
}

#[derive(Args)]
struct FinetuneArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    package: PathBuf,
    #[arg(long)]
    level: String,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Play the checkpoint greedily-with-epsilon without updating it.
    #[arg(long)]
    no_learn: bool,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long)]
    no_sticky: bool,
    #[arg(long, default_value = DEFAULT_SCENARIO)]
    scenario: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecordArgs {
    #[arg(long)]
    package: PathBuf,
    #[arg(long)]
    level: String,
    #[arg(long, default_value = "random")]
    agent: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    sticky_seed: u64,
    #[arg(long)]
    no_sticky: bool,
    #[arg(long, default_value_t = 0)]
    sim_seed: u64,
    #[arg(long, default_value_t = 4500)]
    max_timesteps: u32,
    #[arg(long, default_value = DEFAULT_SCENARIO)]
    scenario: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    file: PathBuf,
    #[arg(long)]
    package: PathBuf,
    /// Re-run the episode and fail on any divergence.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Practice,
    Test,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    package: PathBuf,
    #[arg(long)]
    split: PathBuf,
    /// Session settings (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Directory of static client files.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    no_sticky: bool,
    #[arg(long)]
    tick_hz: Option<f64>,
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    toml::from_str(&read_text(path)?).map_err(|source| CliError::Toml {
        path: path.to_path_buf(),
        source,
    })
}

fn gen(a: GenArgs) -> Result<()> {
    let mut cfg: ZoneSetConfig = read_toml(a.config.as_deref())?;
    cfg.master_seed = a.seed;
    let pkg = GamePackage::generate(&a.name, &cfg)?;
    fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.clone(),
        source,
    })?;
    pkg.save(&a.out)?;
    eprintln!("wrote {} levels to {}", pkg.level_ids().len(), a.out.display());
    Ok(())
}

fn split(a: SplitArgs) -> Result<()> {
    let pkg = GamePackage::load(&a.package)?;
    let s = split_levels(&pkg, a.seed, a.test_zones)?;
    s.save(&a.out)?;
    eprintln!("{} training levels, {} test levels", s.train.len(), s.test.len());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let pkg = GamePackage::load(&a.package)?;
    let split = Split::load(&a.split)?;
    let levels = match a.levels {
        Side::Train => split.train,
        Side::Test => split.test,
    };
    let cfg = EvalConfig {
        budget: a.budget,
        env_copies: a.copies,
        seeds: (0..a.seeds).collect(),
        include_partial_final_episode: !a.whole_episodes,
        sticky: !a.no_sticky,
        ..EvalConfig::default()
    };
    // Fail on an unknown agent before starting any work.
    make_agent(&a.agent, 0, a.budget)?;
    let factory = |seed: u64| make_agent(&a.agent, seed, a.budget);
    let results = evaluate_matrix(&pkg, &levels, &a.scenario, &cfg, &factory)?;
    let agg = aggregate(&results, &cfg.seeds)?;
    match &a.out {
        Some(path) => write_json(&agg, path)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&agg).map_err(retrobench::Error::from)?
        ),
    }
    if let Some(path) = &a.csv {
        write_csv(&agg, path)?;
    }
    if let Some(path) = &a.curve {
        let episodes: Vec<EpisodeRecord> = results.iter().flat_map(|r| r.episodes.iter().cloned()).collect();
        write_curve_tsv(&learning_curve(&episodes, a.bucket)?, path)?;
    }
    eprintln!(
        "{} on {} levels x {} seeds: mean {:.1} +- {:.1}, final {:.1} +- {:.1}",
        a.agent,
        levels.len(),
        cfg.seeds.len(),
        agg.aggregate_mean,
        agg.stderr_over_seeds,
        agg.final_aggregate_mean,
        agg.final_stderr_over_seeds
    );
    Ok(())
}

fn jointtrain(a: JointArgs) -> Result<()> {
    let cfg: JointTrainConfig = read_toml(a.config.as_deref())?;
    let pkg = GamePackage::load(&a.package)?;
    let split = Split::load(&a.split)?;
    let init = match &a.init {
        Some(path) => {
            let c = Checkpoint::load(path)?;
            c.expect_spec(FEATURE_SPEC)?;
            Some(c.params)
        }
        None => None,
    };
    let result = joint_train(&pkg, &split.train, &cfg, init.as_deref())?;
    Checkpoint::new(FEATURE_SPEC, result.params.clone()).save(&a.out)?;
    if let Some(path) = &a.metrics {
        let mut text = String::new();
        for m in result.metrics() {
            text.push_str(&serde_json::to_string(m).map_err(retrobench::Error::from)?);
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    let returns = &result.workers[0].episode_returns;
    eprintln!(
        "{} iterations on {} levels, workers synchronized: {}, worker 0 finished {} episodes",
        cfg.iterations,
        split.train.len(),
        result.synchronized(),
        returns.len()
    );
    Ok(())
}

fn finetune(a: FinetuneArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    ckpt.expect_spec(FEATURE_SPEC)?;
    let pkg = GamePackage::load(&a.package)?;
    let cfg = EvalConfig {
        budget: a.budget,
        seeds: vec![a.seed],
        sticky: !a.no_sticky,
        ..EvalConfig::default()
    };
    let qcfg = QAgentConfig {
        epsilon: a.epsilon,
        learn: !a.no_learn,
        ..QAgentConfig::default()
    };
    let params = Arc::new(ckpt.params);
    let factory = |seed: u64| -> retrobench::Result<Box<dyn Agent>> {
        Ok(Box::new(QAgent::new(params.to_vec(), qcfg.clone(), seed)?))
    };
    let result = evaluate_level(&pkg, &a.level, &a.scenario, &cfg, a.seed, &factory)?;
    let json = serde_json::to_string_pretty(&result).map_err(retrobench::Error::from)?;
    match &a.out {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "{}: mean {:.1}, final {:.1} over {} episodes",
        a.level,
        result.mean_score,
        result.final_score,
        result.episodes.len()
    );
    Ok(())
}

fn record(a: RecordArgs) -> Result<()> {
    let pkg = GamePackage::load(&a.package)?;
    let sticky_seed = (!a.no_sticky).then_some(a.sticky_seed);
    let mut env = replay_env(&pkg, &a.level, &a.scenario, sticky_seed, a.sim_seed)?;
    let mut agent = make_agent(&a.agent, a.seed, a.max_timesteps as u64)?;
    env.reset()?;
    env.start_recording();
    let ep = agent.run_episode(&mut env, a.max_timesteps)?;
    let actions = env.take_recording();
    let file = ReplayFile::record(&pkg, &a.level, &a.scenario, sticky_seed, a.sim_seed, actions)?;
    if file.summary.total_return.to_bits() != ep.total_return.to_bits() {
        return Err(retrobench::Error::Verification(format!(
            "replayed return {} differs from the live return {}",
            file.summary.total_return, ep.total_return
        ))
        .into());
    }
    file.save(&a.out)?;
    eprintln!(
        "recorded {} timesteps on {} (return {}, {})",
        file.summary.timesteps,
        a.level,
        file.summary.total_return,
        file.summary.done_reason.name()
    );
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let file = ReplayFile::load(&a.file)?;
    let s = &file.summary;
    println!(
        "level {} scenario {} timesteps {} return {} end {}",
        file.level_id,
        file.scenario_id,
        s.timesteps,
        s.total_return,
        s.done_reason.name()
    );
    if a.verify {
        let pkg = GamePackage::load(&a.package)?;
        file.verify(&pkg)?;
        println!("verified");
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut cfg: SessionConfig = match &a.config {
        Some(path) => SessionConfig::load(path)?,
        None => SessionConfig::default(),
    };
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Practice => Mode::Practice,
            ModeArg::Test => Mode::Test,
        };
    }
    if a.no_sticky {
        cfg.sticky = false;
    }
    if let Some(hz) = a.tick_hz {
        cfg.tick_hz = hz;
    }
    if let Some(dir) = a.transcripts {
        cfg.transcript_dir = Some(dir);
    }
    let pkg = GamePackage::load(&a.package)?;
    let split = Split::load(&a.split)?;
    let state = Arc::new(ServerState::new(pkg, split, cfg, a.assets)?);
    let addr = format!("{}:{}", a.host, a.port);
    let io = |source| CliError::Io {
        path: PathBuf::from(&addr),
        source,
    };
    let rt = tokio::runtime::Runtime::new().map_err(io)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(io)?;
        eprintln!("serving on http://{addr}");
        retrobench_serve::serve(listener, state).await.map_err(io)
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Split(a) => split(a),
        Command::Eval(a) => eval(a),
        Command::Jointtrain(a) => jointtrain(a),
        Command::Finetune(a) => finetune(a),
        Command::Record(a) => record(a),
        Command::Replay(a) => replay(a),
        Command::Serve(a) => serve(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
