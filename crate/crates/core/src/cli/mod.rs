//! Command-line front end. Every command reads and writes the plain-text
//! formats of the library modules; all randomness comes from `--seed`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{
    check_unique_intersection_condition, feasible_graph, lower_bound, min_edge_clique_cover, upper_bound,
    verify_solution, CoverMode, RecoveredGraph,
};
use crate::eval::{
    generate_minimal_ring, generate_minimal_tree, generate_random_network, run_experiment, Algorithm,
    ExperimentConfig, Family,
};
use crate::graph::{enumerate_tunnels, parse_graph, to_dot, write_graph, NetworkGraph};
use crate::ilp::{build_ilp_model, default_node_budget, export_lp, import_solution, solve_exact_small, write_solution, IlpError, SolveLimits};
use crate::interference::{
    build_interference_graph, ground_truth, infer_interference_matrix, parse_matrix_csv, write_matrix_csv,
    InterferenceMatrix, TrafficConfig,
};
use crate::recovery::{identify_general, identify_ring, identify_rings, identify_tree};

#[derive(Parser, Debug)]
#[command(name = "pathtomo", version, about = "Infer network topology from tunnel interference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Random,
    Tree,
    Ring,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AlgoArg {
    Tree,
    Ring,
    Rings,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a network. `random`: Erdős–Rényi on n routers, reduced to
    /// minimal form; `tree`: minimal tree with n hosts; `ring`: n routers.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "random")]
        family: FamilyArg,
        /// Edge probability (default 2/n).
        #[arg(long)]
        edge_prob: Option<f64>,
        #[arg(long, default_value_t = 0.8)]
        overlay_fraction: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ground-truth interference matrix of a graph file, as CSV.
    Fmatrix {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Interference matrix measured by simulated traffic and delay regression.
    InferF {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        rate: f64,
        #[arg(long, default_value_t = 0.15)]
        threshold: f64,
        #[arg(long, default_value_t = 1e4)]
        horizon: f64,
        #[arg(long, default_value_t = 1000)]
        min_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover a topology from an interference matrix.
    Recover {
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(short, long)]
        fmatrix: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the link-count bounds of a matrix. With `-g`, also check the
    /// unique-intersection condition on that graph's tunnels.
    Bounds {
        #[arg(short, long)]
        fmatrix: PathBuf,
        /// Use the exact clique cover instead of the greedy bound.
        #[arg(long)]
        exact: bool,
        #[arg(short, long)]
        graph: Option<PathBuf>,
    },
    /// Write the integer program in LP format.
    IlpExport {
        #[arg(short, long)]
        fmatrix: PathBuf,
        /// Node budget (default: twice the overlay count).
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the integer program exactly (toy instances only).
    IlpSolve {
        #[arg(short, long)]
        fmatrix: PathBuf,
        #[arg(long)]
        nodes: Option<usize>,
        /// Seconds before giving up.
        #[arg(long, default_value_t = 30.0)]
        time_limit: f64,
        /// Write the optimal network here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the solution as variable values here.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Check a candidate against every constraint of the integer program:
    /// a solver solution file (`-s`, read against the model with `--nodes`)
    /// or a graph file (`-g`, routed by shortest paths).
    Verify {
        #[arg(short, long)]
        fmatrix: PathBuf,
        #[arg(short, long, conflicts_with = "graph", required_unless_present = "graph")]
        solution: Option<PathBuf>,
        #[arg(short, long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Run an experiment described by a `key = value` config file.
    Evaluate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// `off` leaves the runtime column empty for reproducible reports.
        #[arg(long, value_enum, default_value = "on")]
        timing: Toggle,
    },
    /// Graphviz rendering of a graph file.
    ExportDot {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Failure of a command: the name of the module error plus its message.
#[derive(Debug)]
pub struct CliError {
    pub name: String,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.message.starts_with(&self.name) {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.name, self.message)
        }
    }
}

/// Variant name of a derived-`Debug` error value.
fn variant_name<E: std::fmt::Debug>(e: &E) -> String {
    let d = format!("{e:?}");
    d.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or("Error").to_string()
}

fn fail<E: std::fmt::Debug + std::fmt::Display>(e: E) -> CliError {
    // transparent wrappers show the inner error's name
    let mut name = variant_name(&e);
    let dbg = format!("{e:?}");
    if let Some(inner) = dbg.strip_prefix(&format!("{name}(")) {
        if inner.starts_with(|c: char| c.is_ascii_uppercase()) {
            name = inner.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or(&name).to_string();
        }
    }
    CliError {
        name,
        message: e.to_string(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        name: "Io".into(),
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn read_graph(path: &Path) -> Result<NetworkGraph, CliError> {
    parse_graph(&read(path)?).map_err(fail)
}

fn read_matrix(path: &Path) -> Result<InterferenceMatrix, CliError> {
    parse_matrix_csv(&read(path)?).map_err(fail)
}

/// Parses and runs `argv` (program name first); returns the exit status.
/// Output goes to files or stdout, diagnostics to stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Generate {
            n,
            seed,
            family,
            edge_prob,
            overlay_fraction,
            output,
        } => {
            let g = match family {
                FamilyArg::Random => {
                    let cfg = ExperimentConfig {
                        n: vec![n],
                        edge_prob,
                        overlay_fraction,
                        family: Family::Random,
                        ..ExperimentConfig::default()
                    };
                    cfg.validate().map_err(fail)?;
                    generate_random_network(n, &cfg, seed).map_err(fail)?
                }
                FamilyArg::Tree if n >= 2 => generate_minimal_tree(n, seed),
                FamilyArg::Ring if n >= 3 => generate_minimal_ring(n, seed),
                _ => {
                    return Err(CliError {
                        name: "InvalidConfig".into(),
                        message: format!("n = {n} is too small for this family"),
                    })
                }
            };
            emit(output.as_deref(), &write_graph(&g).map_err(fail)?)
        }
        Command::Fmatrix { graph, output } => {
            let f = ground_truth(&read_graph(&graph)?).map_err(fail)?;
            emit(output.as_deref(), &write_matrix_csv(&f))
        }
        Command::InferF {
            graph,
            rate,
            threshold,
            horizon,
            min_samples,
            seed,
            output,
        } => {
            let g = read_graph(&graph)?;
            let cfg = TrafficConfig {
                rate,
                horizon,
                min_samples,
                threshold,
            };
            let f = infer_interference_matrix(&g, &cfg, seed).map_err(fail)?;
            emit(output.as_deref(), &write_matrix_csv(&f))
        }
        Command::Recover { algo, fmatrix, output } => {
            let f = read_matrix(&fmatrix)?;
            let o = f.overlays();
            let r: RecoveredGraph = match algo {
                AlgoArg::Tree => identify_tree(&f, o),
                AlgoArg::Ring => identify_ring(&f, o),
                AlgoArg::Rings => identify_rings(&f, o).map(|r| r.graph),
                AlgoArg::General => identify_general(&f, o).map(|r| r.graph),
            }
            .map_err(fail)?;
            let g = r.network().map_err(fail)?;
            let d = ground_truth(&g).map_err(fail)?.hamming_distance(&f);
            eprintln!(
                "recovered {} nodes, {} links; matrix disagrees on {d} tunnel pairs",
                g.node_count(),
                g.edge_count()
            );
            emit(output.as_deref(), &write_graph(&g).map_err(fail)?)
        }
        Command::Bounds { fmatrix, exact, graph } => {
            let f = read_matrix(&fmatrix)?;
            let mut out = String::new();
            let gf = build_interference_graph(&f);
            writeln!(out, "overlays: {}", f.overlays().len()).unwrap();
            writeln!(out, "tunnels: {}", f.len()).unwrap();
            writeln!(out, "interfering pairs: {}", gf.edge_count()).unwrap();
            writeln!(out, "upper bound: {}", upper_bound(&f)).unwrap();
            writeln!(out, "feasible graph links: {}", feasible_graph(&f).edge_count()).unwrap();
            if exact {
                let c = min_edge_clique_cover(&gf, CoverMode::Exact).map_err(fail)?;
                writeln!(out, "clique cover: {}", c.size).unwrap();
                writeln!(out, "lower bound: {}", c.size.div_ceil(2)).unwrap();
            } else {
                let c = min_edge_clique_cover(&gf, CoverMode::Greedy).map_err(fail)?;
                writeln!(out, "greedy clique cover: {}", c.size).unwrap();
                writeln!(out, "lower bound: {}", lower_bound(&f, CoverMode::Greedy).map_err(fail)?).unwrap();
            }
            if let Some(path) = graph {
                let g = read_graph(&path)?;
                let ts = enumerate_tunnels(&g).map_err(fail)?;
                let u = check_unique_intersection_condition(&ts);
                writeln!(out, "unique intersection condition: {}", if u.holds { "holds" } else { "fails" }).unwrap();
                let free: Vec<String> = u.witness_free_edges().iter().map(|(a, b)| format!("{{{a},{b}}}")).collect();
                writeln!(out, "witness-free links: {}", free.join(" ")).unwrap();
                let same = ground_truth(&g).map_err(fail)?.hamming_distance(&f) == 0;
                writeln!(out, "graph reproduces matrix: {}", if same { "yes" } else { "no" }).unwrap();
            }
            emit(None, &out)
        }
        Command::IlpExport { fmatrix, nodes, output } => {
            let f = read_matrix(&fmatrix)?;
            let n = nodes.unwrap_or_else(|| default_node_budget(f.overlays().len()));
            let model = build_ilp_model(&f, n).map_err(fail)?;
            emit(output.as_deref(), &export_lp(&model))
        }
        Command::IlpSolve {
            fmatrix,
            nodes,
            time_limit,
            output,
            solution,
        } => {
            let f = read_matrix(&fmatrix)?;
            let n = nodes.unwrap_or_else(|| default_node_budget(f.overlays().len()));
            let model = build_ilp_model(&f, n).map_err(fail)?;
            let limits = SolveLimits {
                time_budget: Duration::from_secs_f64(time_limit.max(0.0)),
                ..SolveLimits::default()
            };
            let r = match solve_exact_small(&model, &limits) {
                Ok(r) => r,
                Err(IlpError::TimeBudgetExceeded { incumbent }) => {
                    if let Some(g) = incumbent.as_ref() {
                        eprintln!("best network found has {} links", g.edge_count());
                    }
                    return Err(fail(IlpError::TimeBudgetExceeded { incumbent }));
                }
                Err(e) => return Err(fail(e)),
            };
            eprintln!("optimum: {} links", r.edge_count());
            if let Some(p) = solution {
                let text = write_solution(&model, &r).map_err(fail)?;
                emit(Some(&p), &text)?;
            }
            let g = r.network().map_err(fail)?;
            emit(output.as_deref(), &write_graph(&g).map_err(fail)?)
        }
        Command::Verify {
            fmatrix,
            solution,
            graph,
            nodes,
        } => {
            let f = read_matrix(&fmatrix)?;
            let cand = match (solution, graph) {
                (Some(s), _) => {
                    let n = nodes.unwrap_or_else(|| default_node_budget(f.overlays().len()));
                    let model = build_ilp_model(&f, n).map_err(fail)?;
                    import_solution(&model, &read(&s)?).map_err(fail)?
                }
                (None, Some(g)) => RecoveredGraph::from_network(&read_graph(&g)?).map_err(fail)?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let v = verify_solution(&f, &cand).map_err(fail)?;
            if v.feasible() {
                emit(None, &format!("feasible: {} links\n", cand.edge_count()))
            } else {
                let mut out = String::new();
                for x in &v.violations {
                    writeln!(out, "{}: {}", x.constraint, x.detail).unwrap();
                }
                eprint!("{out}");
                Err(CliError {
                    name: "Infeasible".into(),
                    message: format!("{} constraint violations", v.violations.len()),
                })
            }
        }
        Command::Evaluate {
            config,
            output,
            jobs,
            timing,
        } => {
            let cfg = ExperimentConfig::parse(&read(&config)?).map_err(fail)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                pool = pool.num_threads(j.max(1));
            }
            let pool = pool.build().map_err(|e| CliError {
                name: "ThreadPool".into(),
                message: e.to_string(),
            })?;
            let report = pool.install(|| run_experiment(&cfg)).map_err(fail)?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv, timing == Toggle::On).map_err(fail)?;
            let csv = String::from_utf8(csv).expect("csv output is utf-8");
            let mut summary = String::from("n,trials,failed,mean_edit_distance,std_edit_distance,heuristic\n");
            for a in &report.aggregates {
                writeln!(
                    summary,
                    "{},{},{},{:.3},{:.3},{}",
                    a.n, a.trials, a.failed, a.mean_edit_distance, a.std_edit_distance, a.heuristic
                )
                .unwrap();
            }
            if cfg.recovery == Algorithm::General || report.aggregates.iter().any(|a| a.heuristic > 0) {
                writeln!(
                    summary,
                    "# distances on graphs above {} nodes are heuristic upper bounds",
                    cfg.exact_edit_limit
                )
                .unwrap();
            }
            match output {
                Some(p) => {
                    emit(Some(&p), &csv)?;
                    emit(None, &summary)
                }
                None => {
                    eprint!("{summary}");
                    emit(None, &csv)
                }
            }
        }
        Command::ExportDot { graph, output } => {
            let g = read_graph(&graph)?;
            emit(output.as_deref(), &to_dot(&g))
        }
    }
}
