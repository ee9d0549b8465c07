use std::path::PathBuf;
use std::process::ExitCode;

use ansatz_forge::bench::BenchConfig;
use ansatz_forge::circuit::Entanglement;
use ansatz_forge::llm::LlmConfig;
use ansatz_forge::search::{NoFeedback, SearchConfig};
use ansatz_forge::vqe::{GradientMode, InitStrategy, Optimizer, TrainConfig};
use ansatz_forge_cli::commands::{self, parse_init_strategy};
use ansatz_forge_cli::runs::{ProposerSpec, RunRequest, RunStore};
use ansatz_forge_cli::{service, AppError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ansatz-forge", version, about = "Variational ansatz search and benchmarking")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a problem file as a Pauli Hamiltonian.
    Encode {
        problem: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact ground energy of a Hamiltonian file.
    Exact { hamiltonian: PathBuf },
    /// Train one genome on a Hamiltonian file.
    Train {
        hamiltonian: PathBuf,
        #[arg(long)]
        genome: String,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Run an ansatz search on a problem file and save the run record.
    Search {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = ProposerKind::Random)]
        proposer: ProposerKind,
        /// Blocks per genome.
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Problem name used in the prompt; defaults to the problem's name.
        #[arg(long)]
        task: Option<String>,
        /// Seed for the random proposer.
        #[arg(long, default_value_t = 0)]
        proposer_seed: u64,
        /// Comma-separated block ids for the random and exhaustive proposers.
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<usize>>,
        /// JSON file with the chat endpoint settings (llm proposer).
        #[arg(long)]
        llm_config: Option<PathBuf>,
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
        /// Read reviewer input from stdin: `accept <k>`, `reject <k>`, or
        /// free text.
        #[arg(long)]
        interactive: bool,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Print OpenQASM 2.0 for a genome.
    EmitQasm {
        #[arg(long)]
        genome: String,
        #[arg(long)]
        n_qubits: usize,
        /// `zeros` or a file of angles.
        #[arg(long)]
        params: Option<String>,
        /// Prefix SQRT_H on every qubit.
        #[arg(long)]
        vqe_i: bool,
    },
    /// Baselines against the search winner on the bundled QUBO fixtures.
    Bench {
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        proposer_seed: u64,
        #[arg(long, value_enum, default_value_t = EntanglementArg::Full)]
        entanglement: EntanglementArg,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Serve the HTTP run API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposerKind {
    Llm,
    Random,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntanglementArg {
    Full,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Adam,
    GradientDescent,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradientArg {
    Auto,
    ShiftOnly,
    FiniteDifference,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-6)]
    convergence_tol: f64,
    #[arg(long, default_value_t = 10)]
    convergence_window: usize,
    /// random_uniform, vqe_i, or constant:<angle>.
    #[arg(long, default_value = "random_uniform", value_parser = parse_init_strategy)]
    init: InitStrategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GradientArg::Auto)]
    gradient_mode: GradientArg,
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            optimizer: match self.optimizer {
                OptimizerArg::Adam => Optimizer::Adam,
                OptimizerArg::GradientDescent => Optimizer::GradientDescent,
            },
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            convergence_tol: self.convergence_tol,
            convergence_window: self.convergence_window,
            init_strategy: self.init,
            seed: self.seed,
            gradient_mode: match self.gradient_mode {
                GradientArg::Auto => GradientMode::Auto,
                GradientArg::ShiftOnly => GradientMode::ShiftOnly,
                GradientArg::FiniteDifference => GradientMode::FiniteDifference,
            },
            fd_step: self.fd_step,
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn run(command: Command) -> Result<Output, AppError> {
    match command {
        Command::Encode { problem, output } => {
            commands::encode(&problem, output.as_deref()).map(Output::Json)
        }
        Command::Exact { hamiltonian } => commands::exact(&hamiltonian).map(Output::Json),
        Command::Train { hamiltonian, genome, train } => {
            commands::train_genome(&hamiltonian, &genome, &train.config()).map(Output::Json)
        }
        Command::Search {
            problem,
            proposer,
            blocks,
            iterations,
            task,
            proposer_seed,
            ids,
            llm_config,
            runs_dir,
            interactive,
            train,
        } => {
            let problem = commands::read_problem(&problem)?;
            let proposer = match proposer {
                ProposerKind::Llm => {
                    let config = match llm_config {
                        Some(path) => serde_json::from_str::<LlmConfig>(&commands::read_text(&path)?)
                            .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?,
                        None => LlmConfig::default(),
                    };
                    ProposerSpec::Llm { config }
                }
                ProposerKind::Random => ProposerSpec::Random { seed: proposer_seed, ids },
                ProposerKind::Exhaustive => ProposerSpec::Exhaustive { ids },
            };
            let search = SearchConfig {
                n_blocks: blocks,
                n_qubits: 0,
                max_iterations: iterations,
                task_description: task.unwrap_or_else(|| problem.display_name()),
            };
            let req = RunRequest { problem, search, train: train.config(), proposer };
            let store = RunStore::open(runs_dir)?;
            let progress = |r: &ansatz_forge_cli::runs::RunRecord| {
                if let Some(e) = r.report.history.entries.last() {
                    eprintln!("[{}] {}", r.run_id, e.prompt_line());
                }
            };
            let record = if interactive {
                eprintln!("reviewer input: `accept <k>`, `reject <k>`, or a free-text note per line");
                commands::search(req, &store, &mut commands::stdin_feedback(), progress)?
            } else {
                commands::search(req, &store, &mut NoFeedback, progress)?
            };
            let mut out = serde_json::to_value(&record).expect("records serialize");
            out["record_path"] = json!(store.path_of(&record.run_id).display().to_string());
            Ok(Output::Json(out))
        }
        Command::EmitQasm { genome, n_qubits, params, vqe_i } => {
            commands::qasm(&genome, n_qubits, params.as_deref(), vqe_i).map(Output::Text)
        }
        Command::Bench { iterations, proposer_seed, entanglement, train } => {
            let cfg = BenchConfig {
                train: train.config(),
                search_iterations: iterations,
                proposer_seed,
                entanglement: match entanglement {
                    EntanglementArg::Full => Entanglement::Full,
                    EntanglementArg::Linear => Entanglement::Linear,
                },
                ..BenchConfig::default()
            };
            let tables = commands::bench(&cfg)?;
            for t in &tables {
                eprintln!("{}", t.render());
            }
            Ok(Output::Json(json!({ "config": cfg, "tables": tables })))
        }
        Command::Serve { port, host, runs_dir } => {
            let store = RunStore::open(runs_dir)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| AppError::io("runtime", e))?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| AppError::io(format!("{host}:{port}"), e))?;
                service::serve(listener, store).await
            })?;
            Ok(Output::Json(json!({ "stopped": true })))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(Output::Json(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json output"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
