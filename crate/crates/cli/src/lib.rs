//! Command line front end for the solver crate.
//!
//! Every solve subcommand reads an instance from `--file` (JSON, or CSV for
//! bare supersets) or generates a seeded demo instance with `--gen`, then
//! writes a canonical JSON report to `--out` or stdout. Exit codes: 0 when
//! solutions were found, 2 when the instance is infeasible or nothing was
//! found, 1 on usage or I/O errors.

pub mod bench;
pub mod gen;
pub mod io;

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use subsetsum::gap::{solve_gap, GapInstance};
use subsetsum::knapsack::{solve_01, solve_mf01k, KnapsackInstance, KnapsackOptions};
use subsetsum::mdim::{solve_md, SupersetMD};
use subsetsum::model::{MiningConfig, Superset1D, TargetRange};
use subsetsum::multiset::{solve_multi, MultiInstance};
use subsetsum::oracle;
use subsetsum::packedint::solve_md_integerized;
use subsetsum::solver1d::{solve_fixed, solve_variable, VariableStrategy};

#[derive(Parser)]
#[command(
    name = "subsetsum",
    version,
    about = "Exact subset-sum, knapsack and assignment solvers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One-dimensional subset sum; omit --len for variable subset size
    Flsss(FlsssArgs),
    /// Multidimensional subset sum
    Mflsss(MdArgs),
    /// Multidimensional subset sum over packed integers
    #[command(name = "mflsss-int")]
    MflsssInt(MdIntArgs),
    /// One subset from each of several supersets, joint sum constrained
    Multiset(MultisetArgs),
    /// Exact multidimensional 0-1 knapsack; omit --len to search all sizes
    Knapsack(KnapsackArgs),
    /// Exact generalized assignment
    Gap(GapArgs),
    /// Brute-force reference solvers for small instances
    Oracle(OracleArgs),
    /// Paired timing experiments; prints CSV
    Bench(BenchCmdArgs),
}

#[derive(Args)]
struct RunOpts {
    /// Stop after this many solutions
    #[arg(long)]
    solutions: Option<usize>,
    /// Wall-clock budget in seconds
    #[arg(long)]
    timeout: Option<f64>,
    /// Worker threads (1 is fully deterministic)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed for --gen instances
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunOpts {
    fn config(&self) -> Result<MiningConfig> {
        let mut cfg = MiningConfig::default();
        if let Some(q) = self.solutions {
            if q == 0 {
                bail!("--solutions must be at least 1");
            }
            cfg.max_solutions = q;
        }
        if let Some(t) = self.timeout {
            if !(t > 0.0) {
                bail!("--timeout must be positive seconds");
            }
            cfg.time_limit = Duration::from_secs_f64(t);
        }
        if self.threads == 0 {
            bail!("--threads must be at least 1");
        }
        cfg.threads = self.threads;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FlsssArgs {
    /// Instance file: JSON object or CSV superset (one value per line)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate a seeded demo superset with this many elements
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Subset size; omit to mine all sizes
    #[arg(long)]
    len: Option<usize>,
    /// Target sum
    #[arg(long)]
    target: Option<f64>,
    /// Error tolerance around the target
    #[arg(long)]
    me: Option<f64>,
    /// Bisect bound updates instead of scanning linearly
    #[arg(long = "use-bisearch")]
    use_bisearch: bool,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args)]
struct MdArgs {
    /// Instance file: JSON object or CSV superset (one row per element)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate a seeded demo superset with this many rows
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Dimensions for --gen supersets
    #[arg(long, default_value_t = 3)]
    dims: usize,
    /// Subset size (rows per solution)
    #[arg(long)]
    len: Option<usize>,
    /// Per-dimension target sums, comma separated
    #[arg(long, value_delimiter = ',')]
    target: Option<Vec<f64>>,
    /// Per-dimension tolerances; a single value is applied to all dimensions
    #[arg(long, value_delimiter = ',')]
    me: Option<Vec<f64>>,
    /// Bisect bound updates instead of scanning linearly
    #[arg(long = "use-bisearch")]
    use_bisearch: bool,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args)]
struct MdIntArgs {
    #[command(flatten)]
    md: MdArgs,
    /// Integerization resolution per dimension
    #[arg(long, default_value_t = 65_536)]
    lambda: u64,
}

#[derive(Args)]
struct MultisetArgs {
    /// Instance file (JSON only)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate seeded demo supersets with this many elements each
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Number of supersets for --gen
    #[arg(long, default_value_t = 2)]
    parts: usize,
    /// Target for the joint sum
    #[arg(long)]
    target: Option<f64>,
    /// Error tolerance around the target
    #[arg(long)]
    me: Option<f64>,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args)]
struct KnapsackArgs {
    /// Instance file (JSON only)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate a seeded demo instance with this many items
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Cost dimensions for --gen
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Exact number of items to select; omit to search all sizes
    #[arg(long)]
    len: Option<usize>,
    /// Tasks seeded per worker thread
    #[arg(long, default_value_t = 16)]
    phi: usize,
    /// Disable incumbent pruning (exhaustive profit enumeration)
    #[arg(long = "no-prune")]
    no_prune: bool,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args)]
struct GapArgs {
    /// Instance file (JSON only)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate a seeded demo instance with this many tasks
    #[arg(long, value_name = "T")]
    gen: Option<usize>,
    /// Agents for --gen
    #[arg(long, default_value_t = 3)]
    agents: usize,
    /// Tasks seeded per worker thread
    #[arg(long, default_value_t = 16)]
    phi: usize,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    SubsetSum,
    Knapsack,
    Gap,
}

#[derive(Args)]
struct OracleArgs {
    /// Which reference solver to run
    #[arg(long, value_enum, default_value_t = OracleKind::SubsetSum)]
    kind: OracleKind,
    /// Instance file, same schemas as the solve subcommands
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generate a seeded demo instance (elements, items or tasks)
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Dimensions for --gen subset-sum and knapsack instances
    #[arg(long, default_value_t = 1)]
    dims: usize,
    /// Agents for --gen assignment instances
    #[arg(long, default_value_t = 3)]
    agents: usize,
    /// Subset or selection size
    #[arg(long)]
    len: Option<usize>,
    /// Target sums, comma separated
    #[arg(long, value_delimiter = ',')]
    target: Option<Vec<f64>>,
    /// Tolerances; a single value is applied to all dimensions
    #[arg(long, value_delimiter = ',')]
    me: Option<Vec<f64>>,
    /// Seed for --gen instances
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmdArgs {
    /// contraction-search, subspacing-tree, order-opt or integerization
    experiment: String,
    /// Paired instances to run
    #[arg(long)]
    instances: Option<usize>,
    /// Workload seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads per solve
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Superset size override
    #[arg(long = "N")]
    n_elems: Option<usize>,
    /// Subset size override
    #[arg(long = "n")]
    subset: Option<usize>,
    /// Dimension override
    #[arg(long)]
    dims: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses argv and runs the requested subcommand, translating errors into
/// process exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Flsss(a) => cmd_flsss(a),
        Cmd::Mflsss(a) => cmd_mflsss(a),
        Cmd::MflsssInt(a) => cmd_mflsss_int(a),
        Cmd::Multiset(a) => cmd_multiset(a),
        Cmd::Knapsack(a) => cmd_knapsack(a),
        Cmd::Gap(a) => cmd_gap(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

fn exit_by_found(found: bool) -> i32 {
    if found {
        0
    } else {
        2
    }
}

/// Resolved subset-sum inputs shared by flsss, mflsss and mflsss-int.
struct ResolvedInstance {
    superset: Vec<Vec<f64>>,
    len: Option<usize>,
    target: Vec<f64>,
    me: Vec<f64>,
}

fn resolve_subset_sum(
    file: &Option<PathBuf>,
    gen_n: Option<usize>,
    gen_dims: usize,
    len_flag: Option<usize>,
    target_flag: Option<Vec<f64>>,
    me_flag: Option<Vec<f64>>,
    seed: u64,
) -> Result<ResolvedInstance> {
    let (superset, mut len, mut target, mut me) = match (file, gen_n) {
        (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
        (Some(path), None) => {
            let (superset, parsed) = io::load_superset_auto(path)?;
            match parsed {
                Some(f) => (superset, f.len, Some(f.target), Some(f.me)),
                None => (superset, None, None, None),
            }
        }
        (None, Some(n)) => {
            if n == 0 {
                bail!("--gen needs at least one element");
            }
            let g = gen::subset_sum(seed, n, gen_dims, len_flag);
            (g.superset, g.len, Some(g.target), Some(g.me))
        }
        (None, None) => bail!("provide an instance with --file or --gen"),
    };
    if let Some(n) = len_flag {
        len = Some(n);
    }
    if let Some(t) = target_flag {
        target = Some(t);
    }
    if let Some(e) = me_flag {
        me = Some(e);
    }
    let dims = superset.first().map(|r| r.len()).unwrap_or(0);
    let target = target.context("no target: pass --target or use a JSON instance")?;
    if target.len() != dims {
        bail!("target has {} dimensions, superset has {dims}", target.len());
    }
    let me = match me {
        None => vec![0.0; dims],
        Some(e) if e.len() == 1 && dims > 1 => vec![e[0]; dims],
        Some(e) => {
            if e.len() != dims {
                bail!("me has {} dimensions, superset has {dims}", e.len());
            }
            e
        }
    };
    Ok(ResolvedInstance {
        superset,
        len,
        target,
        me,
    })
}

fn cmd_flsss(a: FlsssArgs) -> Result<i32> {
    let cfg = {
        let mut cfg = a.run.config()?;
        cfg.use_binary_search = a.use_bisearch;
        cfg
    };
    let inst = resolve_subset_sum(
        &a.file,
        a.gen,
        1,
        a.len,
        a.target.map(|t| vec![t]),
        a.me.map(|e| vec![e]),
        a.run.seed,
    )?;
    let values: Vec<f64> = inst
        .superset
        .iter()
        .map(|r| {
            if r.len() != 1 {
                bail!("flsss expects a one-column superset; use mflsss for {} columns", r.len())
            } else {
                Ok(r[0])
            }
        })
        .collect::<Result<_>>()?;
    let s = Superset1D::new(&values)?;
    let result = match inst.len {
        Some(n) => solve_fixed(&s, n, inst.target[0], inst.me[0], &cfg)?,
        None => solve_variable(&s, inst.target[0], inst.me[0], &cfg, VariableStrategy::LoopSizes)?,
    };
    let report = io::solve_report(result.status, &result.solutions);
    io::emit(&report, a.run.out.as_deref())?;
    Ok(exit_by_found(report.count > 0))
}

fn cmd_mflsss(a: MdArgs) -> Result<i32> {
    let cfg = {
        let mut cfg = a.run.config()?;
        cfg.use_binary_search = a.use_bisearch;
        cfg
    };
    let inst = resolve_subset_sum(&a.file, a.gen, a.dims, a.len, a.target, a.me, a.run.seed)?;
    let n = inst
        .len
        .context("multidimensional solves need --len (or a len field in the file)")?;
    let x = SupersetMD::new(&inst.superset)?;
    let result = solve_md(&x, n, &inst.target, &inst.me, &cfg)?;
    let report = io::solve_report(result.status, &result.solutions);
    io::emit(&report, a.run.out.as_deref())?;
    Ok(exit_by_found(report.count > 0))
}

fn cmd_mflsss_int(a: MdIntArgs) -> Result<i32> {
    let md = a.md;
    let cfg = {
        let mut cfg = md.run.config()?;
        cfg.use_binary_search = md.use_bisearch;
        cfg
    };
    if a.lambda == 0 {
        bail!("--lambda must be at least 1");
    }
    let inst = resolve_subset_sum(&md.file, md.gen, md.dims, md.len, md.target, md.me, md.run.seed)?;
    let n = inst
        .len
        .context("multidimensional solves need --len (or a len field in the file)")?;
    let x = SupersetMD::new(&inst.superset)?;
    let lambda = vec![a.lambda; x.dims()];
    let solved = solve_md_integerized(&x, n, &inst.target, &inst.me, &lambda, &cfg)?;
    let inner = io::solve_report(solved.result.status, &solved.result.solutions);
    let report = io::IntSolveReport {
        status: inner.status,
        approximate: solved.approximate,
        count: inner.count,
        solutions: inner.solutions,
    };
    io::emit(&report, md.run.out.as_deref())?;
    Ok(exit_by_found(report.count > 0))
}

fn cmd_multiset(a: MultisetArgs) -> Result<i32> {
    let cfg = a.run.config()?;
    let (supersets, lens, target, me) = match (&a.file, a.gen) {
        (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
        (Some(path), None) => {
            let f: io::MultisetFile = io::load_json(path)?;
            let t = a.target.or_else(|| f.target.first().copied());
            let e = a.me.or_else(|| f.me.first().copied());
            (f.supersets, f.lens, t, e)
        }
        (None, Some(n)) => {
            if n == 0 || a.parts == 0 {
                bail!("--gen and --parts must be at least 1");
            }
            let g = gen::multiset(a.run.seed, n, a.parts);
            (g.supersets, g.lens, a.target.or(Some(g.target)), a.me)
        }
        (None, None) => bail!("provide an instance with --file or --gen"),
    };
    let target = target.context("no target: pass --target or use a JSON instance")?;
    let me = me.unwrap_or(0.0);
    let range = TargetRange::around(&[target], &[me])?;
    let mi = MultiInstance::new(&supersets, &lens, range)?;
    let result = solve_multi(&mi, &cfg)?;
    let mut solutions: Vec<io::MultiSolutionOut> = result
        .solutions
        .iter()
        .map(|s| io::MultiSolutionOut {
            picks: s.picks.clone(),
            sum: s.achieved_sum,
        })
        .collect();
    solutions.sort_by(|x, y| x.picks.cmp(&y.picks));
    let report = io::MultiReport {
        status: io::status_name(result.status),
        count: solutions.len(),
        solutions,
    };
    io::emit(&report, a.run.out.as_deref())?;
    Ok(exit_by_found(report.count > 0))
}

fn cmd_knapsack(a: KnapsackArgs) -> Result<i32> {
    let cfg = a.run.config()?;
    if a.phi == 0 {
        bail!("--phi must be at least 1");
    }
    let (costs, profits, budgets, len) = match (&a.file, a.gen) {
        (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
        (Some(path), None) => {
            let f: io::KnapsackFile = io::load_json(path)?;
            (f.costs, f.profits, f.budgets, a.len.or(f.len))
        }
        (None, Some(n)) => {
            if n == 0 {
                bail!("--gen needs at least one item");
            }
            let g = gen::knapsack(a.run.seed, n, a.dims.max(1));
            (g.costs, g.profits, g.budgets, a.len)
        }
        (None, None) => bail!("provide an instance with --file or --gen"),
    };
    let inst = KnapsackInstance::new(&costs, &profits, &budgets)?;
    let opts = KnapsackOptions {
        phi: a.phi,
        pruning: !a.no_prune,
    };
    let outcome = match len {
        Some(n) => solve_mf01k(&inst, n, &cfg, &opts)?,
        None => solve_01(&inst, &cfg, &opts)?,
    };
    let report = io::KnapsackReport {
        status: if outcome.proven { "exhausted" } else { "timeout" },
        proven: outcome.proven,
        best: outcome.best.as_ref().map(|b| io::KnapsackBestOut {
            items: b.items.clone(),
            profit: b.profit,
            costs: b.costs.clone(),
        }),
    };
    let found = report.best.is_some();
    io::emit(&report, a.run.out.as_deref())?;
    Ok(exit_by_found(found))
}

fn cmd_gap(a: GapArgs) -> Result<i32> {
    let cfg = a.run.config()?;
    if a.phi == 0 {
        bail!("--phi must be at least 1");
    }
    let (cost, profit, budgets) = match (&a.file, a.gen) {
        (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
        (Some(path), None) => {
            let f: io::GapFile = io::load_json(path)?;
            (f.cost, f.profit, f.budgets)
        }
        (None, Some(t)) => {
            if t == 0 || a.agents == 0 {
                bail!("--gen and --agents must be at least 1");
            }
            let g = gen::gap(a.run.seed, t, a.agents);
            (g.cost, g.profit, g.budgets)
        }
        (None, None) => bail!("provide an instance with --file or --gen"),
    };
    let inst = GapInstance::new(&cost, &profit, &budgets)?;
    let outcome = solve_gap(&inst, &cfg, a.phi)?;
    let report = io::GapReport {
        status: if outcome.proven { "exhausted" } else { "timeout" },
        proven: outcome.proven,
        best: outcome.best.as_ref().map(|b| io::GapBestOut {
            assignment: b.assignment.clone(),
            profit: b.profit,
            agent_loads: b.agent_loads.clone(),
        }),
    };
    let found = report.best.is_some();
    io::emit(&report, a.run.out.as_deref())?;
    Ok(exit_by_found(found))
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    match a.kind {
        OracleKind::SubsetSum => {
            let inst = resolve_subset_sum(&a.file, a.gen, a.dims, a.len, a.target, a.me, a.seed)?;
            let n = inst.len.context("the reference solver needs --len")?;
            let lo: Vec<f64> = inst.target.iter().zip(&inst.me).map(|(t, e)| t - e).collect();
            let hi: Vec<f64> = inst.target.iter().zip(&inst.me).map(|(t, e)| t + e).collect();
            let dims = inst.superset.first().map(|r| r.len()).unwrap_or(0);
            let mut combos = if dims == 1 {
                let values: Vec<f64> = inst.superset.iter().map(|r| r[0]).collect();
                oracle::brute_1d(&values, n, lo[0], hi[0])?
            } else {
                oracle::brute_md(&inst.superset, n, &lo, &hi)?
            };
            combos.sort();
            #[derive(serde::Serialize)]
            struct OracleSubsetReport {
                status: &'static str,
                count: usize,
                solutions: Vec<Vec<u32>>,
            }
            let report = OracleSubsetReport {
                status: "exhausted",
                count: combos.len(),
                solutions: combos,
            };
            let found = report.count > 0;
            io::emit(&report, a.out.as_deref())?;
            Ok(exit_by_found(found))
        }
        OracleKind::Knapsack => {
            let (costs, profits, budgets, len) = match (&a.file, a.gen) {
                (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
                (Some(path), None) => {
                    let f: io::KnapsackFile = io::load_json(path)?;
                    (f.costs, f.profits, f.budgets, a.len.or(f.len))
                }
                (None, Some(n)) => {
                    let g = gen::knapsack(a.seed, n, a.dims.max(1));
                    (g.costs, g.profits, g.budgets, a.len)
                }
                (None, None) => bail!("provide an instance with --file or --gen"),
            };
            let best = oracle::brute_knapsack(&costs, &profits, &budgets, len)?;
            let report = io::KnapsackReport {
                status: "exhausted",
                proven: true,
                best: best.map(|(profit, items)| {
                    let costs_of: Vec<f64> = (0..budgets.len())
                        .map(|t| items.iter().map(|&i| costs[i as usize][t]).sum())
                        .collect();
                    io::KnapsackBestOut {
                        items,
                        profit,
                        costs: costs_of,
                    }
                }),
            };
            let found = report.best.is_some();
            io::emit(&report, a.out.as_deref())?;
            Ok(exit_by_found(found))
        }
        OracleKind::Gap => {
            let (cost, profit, budgets) = match (&a.file, a.gen) {
                (Some(_), Some(_)) => bail!("use either --file or --gen, not both"),
                (Some(path), None) => {
                    let f: io::GapFile = io::load_json(path)?;
                    (f.cost, f.profit, f.budgets)
                }
                (None, Some(t)) => {
                    let g = gen::gap(a.seed, t, a.agents);
                    (g.cost, g.profit, g.budgets)
                }
                (None, None) => bail!("provide an instance with --file or --gen"),
            };
            let best = oracle::brute_gap(&cost, &profit, &budgets)?;
            let report = io::GapReport {
                status: "exhausted",
                proven: true,
                best: best.map(|(profit_sum, assignment)| {
                    let loads: Vec<f64> = (0..budgets.len())
                        .map(|j| {
                            assignment
                                .iter()
                                .enumerate()
                                .filter(|(_, &aj)| aj as usize == j)
                                .map(|(t, _)| cost[t][j])
                                .sum()
                        })
                        .collect();
                    io::GapBestOut {
                        assignment,
                        profit: profit_sum,
                        agent_loads: loads,
                    }
                }),
            };
            let found = report.best.is_some();
            io::emit(&report, a.out.as_deref())?;
            Ok(exit_by_found(found))
        }
    }
}

fn cmd_bench(a: BenchCmdArgs) -> Result<i32> {
    let experiment = bench::Experiment::parse(&a.experiment).with_context(|| {
        format!(
            "unknown experiment {:?}; expected contraction-search, subspacing-tree, order-opt or integerization",
            a.experiment
        )
    })?;
    if a.threads == 0 {
        bail!("--threads must be at least 1");
    }
    let params = bench::BenchParams {
        experiment,
        instances: a.instances,
        seed: a.seed,
        threads: a.threads,
        n_elems: a.n_elems,
        subset: a.subset,
        dims: a.dims,
    };
    let csv = bench::run(&params)?;
    match &a.out {
        Some(path) => std::fs::write(path, &csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}
