use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use superscs::bench::Family;
use superscs::{DirectionKind, LinSysMode, SolverParams};

/// SuperMann-accelerated Douglas–Rachford solver for conic programs.
#[derive(Debug, Parser)]
#[command(name = "superscs", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and print a report.
    Solve(SolveArgs),
    /// Generate a random benchmark problem.
    Gen(GenArgs),
    /// Run a benchmark suite and write timing, profile and sgm CSVs.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Anderson acceleration.
    Anderson,
    /// Restarted Broyden.
    Broyden,
    /// Plain Krasnosel'skii–Mann iterations.
    Km,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinSys {
    /// Sparse LDLᵀ factorization, computed once.
    Direct,
    /// Conjugate gradient on the normal equations.
    Indirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Tolerance on pr, dr, gap and on the certificates.
    #[arg(long, env = "SOLVER_EPS", default_value_t = 1e-4)]
    pub eps: f64,
    /// Wall-clock limit in seconds.
    #[arg(long, env = "SOLVER_MAX_TIME", default_value_t = 300.0)]
    pub max_time: f64,
    /// Iteration limit [default: none].
    #[arg(long, env = "SOLVER_MAX_ITERS")]
    pub max_iters: Option<usize>,
    /// Direction family.
    #[arg(long, env = "SOLVER_DIRECTION", value_enum, default_value_t = Direction::Anderson)]
    pub direction: Direction,
    /// Memory of the direction engine [default: 5 for anderson, 50 for broyden].
    #[arg(long, env = "SOLVER_MEM")]
    pub mem: Option<usize>,
    /// Powell safeguard θ̄ for restarted Broyden.
    #[arg(long, env = "SOLVER_THETA_BAR", default_value_t = 0.5)]
    pub theta_bar: f64,
    /// Blind-update threshold c0.
    #[arg(long, env = "SOLVER_C0", default_value_t = 0.1)]
    pub c0: f64,
    /// Educated-update threshold c1.
    #[arg(long, env = "SOLVER_C1", default_value_t = 0.99)]
    pub c1: f64,
    /// Decay q of the educated-update safeguard.
    #[arg(long, env = "SOLVER_Q", default_value_t = 0.99)]
    pub q: f64,
    /// Safe-update threshold σ.
    #[arg(long, env = "SOLVER_SIGMA", default_value_t = 0.1)]
    pub sigma: f64,
    /// Relaxation λ.
    #[arg(long, env = "SOLVER_LAMBDA", default_value_t = 1.5)]
    pub lambda: f64,
    /// Trial points per line search.
    #[arg(long, env = "SOLVER_MAX_BACKTRACKS", default_value_t = 10)]
    pub max_backtracks: usize,
    /// Enable blind updates [default: true for anderson, false otherwise].
    #[arg(long, env = "SOLVER_K0")]
    pub k0: Option<bool>,
    /// Linear system backend.
    #[arg(long, env = "SOLVER_LINSYS", value_enum, default_value_t = LinSys::Direct)]
    pub linsys: LinSys,
    /// Base CG tolerance for the indirect backend.
    #[arg(long, env = "SOLVER_CG_TOL", default_value_t = 1e-3)]
    pub cg_tol: f64,
}

impl SolverArgs {
    pub fn params(&self) -> SolverParams {
        let mut p = match self.direction {
            Direction::Anderson => SolverParams::anderson(self.mem.unwrap_or(5)),
            Direction::Broyden => SolverParams::broyden(self.mem.unwrap_or(50)),
            Direction::Km => SolverParams::km(),
        };
        if let DirectionKind::RestartedBroyden { theta_bar, .. } = &mut p.direction {
            *theta_bar = self.theta_bar;
        }
        if let Some(k0) = self.k0 {
            p.k0_enabled = k0;
        }
        p.eps = self.eps;
        p.max_time = self.max_time;
        p.max_iters = self.max_iters;
        p.c0 = self.c0;
        p.c1 = self.c1;
        p.q = self.q;
        p.sigma = self.sigma;
        p.lambda = self.lambda;
        p.max_backtracks = self.max_backtracks;
        p.linsys = match self.linsys {
            LinSys::Direct => LinSysMode::Direct,
            LinSys::Indirect => LinSysMode::Indirect { cg_tol: self.cg_tol },
        };
        p
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file (JSON).
    pub file: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report format.
    #[arg(long, env = "SOLVER_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print a progress line to stderr every N iterations (0 disables).
    #[arg(long, env = "SOLVER_LOG_EVERY", default_value_t = 0)]
    pub log_every: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: GenFamily,
    /// Seed for the generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output problem file.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// ½‖Ax − b‖² + μ‖x‖₁ as a second-order cone program.
    Lasso {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Condition number of A.
        #[arg(long, default_value_t = 100.0)]
        cond: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
    },
    /// ℓ1-regularized PCA as a semidefinite program.
    L1Pca {
        /// Matrix order.
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
    },
    /// ℓ1-regularized logistic regression with exponential cones.
    Logreg {
        /// Features.
        #[arg(long)]
        p: usize,
        /// Samples.
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
    },
}

impl GenFamily {
    pub fn family(&self) -> Family {
        match *self {
            GenFamily::Lasso { n, m, cond, mu } => Family::Lasso { n, m, cond, mu },
            GenFamily::L1Pca { d, lambda } => Family::L1Pca { d, lambda },
            GenFamily::Logreg { p, q, lambda } => Family::LogReg { p, q, lambda },
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suite description (JSON).
    pub suite: PathBuf,
    /// Output directory for the CSV and SVG artifacts.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Worker threads.
    #[arg(long, env = "SOLVER_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Skip the SVG profile plot.
    #[arg(long)]
    pub no_svg: bool,
}
