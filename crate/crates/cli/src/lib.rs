//! Command-line front end: argument parsing, dispatch and exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use exitbounds::bounds::{c1_objective, sharp_upper_bound};
use exitbounds::domains::{lambda1_exact, moment_exit_center, parse_spec, DomainSpec, ExactKind, SPEC_GRAMMAR};
use exitbounds::harness::{self, render, Cell, OutputFormat, SweepRow, Table};
use exitbounds::simulate::{default_step, estimate_moments, fd_lambda1, fd_sup_mean_exit};
use exitbounds::Error;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Parser, Debug)]
#[command(name = "exitbounds", version, about = "Spectral exit-time bounds, exact values and simulations")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    output: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "EXITBOUNDS_THREADS", global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Universal bounds for dimension d and order p.
    Bounds {
        #[arg(long, default_value_t = 2)]
        d: u64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Also evaluate the two-variable C1 objective at A,EPS.
        #[arg(long, value_delimiter = ',', value_name = "A,EPS")]
        at: Option<Vec<f64>>,
    },
    /// Exact eigenvalue, center moment and shape functional of a domain.
    Domain {
        #[arg(long, default_value = "ball d=2 r=1")]
        spec: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Monte Carlo moments of the exit time.
    Mc {
        #[arg(long, default_value = "ball d=2 r=1")]
        spec: String,
        #[arg(long, default_value = "1", value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Euler step (defaults to (inradius/50)^2).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Starting point, comma separated (defaults to the center).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
    },
    /// Finite-difference principal eigenvalue of a planar domain.
    Eigen {
        #[arg(long, default_value = "ball d=2 r=1")]
        spec: String,
        /// Coarse grid spacing (defaults to inradius/20).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Reproduction sweeps.
    Sweep(SweepArgs),
    /// Scaled sharp upper bound against its large-d limit.
    Asymptotics {
        #[arg(long, default_value = "1", value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value = "100,10000,1000000", value_delimiter = ',')]
        d_list: Vec<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepKind {
    Rectangles,
    Triangles,
    Ellipses,
    Ordering,
    Moments,
    Symmetrization,
    Floor,
    Survival,
}

#[derive(Args, Debug)]
struct SweepArgs {
    kind: SweepKind,
    #[arg(long, default_value = "1", value_delimiter = ',')]
    p: Vec<f64>,
    /// Aspect ratios for the rectangle sweep.
    #[arg(long, value_delimiter = ',')]
    a_list: Option<Vec<f64>>,
    /// Grid spacing relative to the inradius for finite differences.
    #[arg(long, default_value_t = 0.05)]
    h_rel: f64,
    /// Domains for moment and symmetrization sweeps (repeatable).
    #[arg(long)]
    spec: Vec<String>,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
    t_list: Vec<f64>,
    #[arg(long, default_value = "0.2,0.5,0.9", value_delimiter = ',')]
    eps_list: Vec<f64>,
    /// Grid cells per axis for sup-over-x searches.
    #[arg(long, default_value_t = 4)]
    resolution: usize,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Violated(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Violated(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Violated(m) => m,
        }
    }
}

/// Asserted rows that failed beyond their tolerance.
fn violations(rows: &[SweepRow]) -> Option<Failure> {
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.is_failure())
        .map(|r| format!("violated: {} {} (margin {:e})", r.sweep, r.label, r.margin))
        .collect();
    (!failed.is_empty()).then(|| Failure::Violated(failed.join("\n")))
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(format!("{e}\n\n{SPEC_GRAMMAR}")),
            _ if e.is_numerical() => Failure::Numerical(e.to_string()),
            Error::Internal(_) => Failure::Violated(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn spec(text: &str) -> Result<DomainSpec, Failure> {
    Ok(parse_spec(text)?)
}

fn kind_name(k: ExactKind) -> &'static str {
    match k {
        ExactKind::ExactClosedForm => "exact",
        ExactKind::SeriesTruncated => "series",
        ExactKind::Interval => "interval",
    }
}

fn bounds_cmd(d: u64, p: f64, at: Option<Vec<f64>>) -> Result<Vec<Table>, Failure> {
    let reports = harness::bound_table(&[d], &[p])?;
    let mut tables = vec![harness::bounds_to_table("bounds", &reports)];
    if let Some(at) = at {
        let [a, eps] = at[..] else {
            return Err(Failure::Usage("--at takes two values, A,EPS".into()));
        };
        let mut t = Table::new("c1_objective", &["d", "p", "a", "eps", "objective"]);
        t.push(vec![d.into(), p.into(), a.into(), eps.into(), c1_objective(d, p, a, eps)?.into()]);
        tables.push(t);
    }
    Ok(tables)
}

fn domain_cmd(text: &str, p: f64) -> Result<Vec<Table>, Failure> {
    let s = spec(text)?;
    let mut t = Table::new(
        "domain",
        &["spec", "dim", "p", "inradius", "lambda1", "lambda1_lo", "lambda1_hi", "center_moment", "g", "g_lo", "g_hi", "source"],
    );
    let lam = lambda1_exact(&s);
    let mom = moment_exit_center(&s, p);
    let row: Vec<Cell> = match (lam, mom) {
        (Ok(l), Ok(m)) => {
            let (llo, lhi) = l.bounds();
            let g = l.value.powf(p) * m.value;
            let interval = l.kind == ExactKind::Interval || m.kind == ExactKind::Interval;
            let source = if interval { "interval" } else if l.kind == ExactKind::SeriesTruncated || m.kind == ExactKind::SeriesTruncated { "series" } else { kind_name(l.kind) };
            vec![l.value.into(), llo.into(), lhi.into(), m.value.into(), g.into(), (llo.powf(p) * m.value).into(), (lhi.powf(p) * m.value).into(), source.into()]
        }
        (Err(e), _) | (_, Err(e)) if !matches!(e, Error::NotAvailable(_)) => return Err(e.into()),
        _ if s.dim() == 2 && p == 1.0 && s.is_bounded() => {
            let h = s.inradius() / 20.0;
            let eig = fd_lambda1(&s, h)?;
            let sup = fd_sup_mean_exit(&s, h)?;
            let g = eig.lambda * sup.value;
            vec![eig.lambda.into(), Cell::Empty, Cell::Empty, sup.value.into(), g.into(), Cell::Empty, Cell::Empty, "finite-difference".into()]
        }
        _ => return Err(Failure::Usage(format!("no exact or finite-difference value for `{s}` at p={p}; try `mc`"))),
    };
    let mut full: Vec<Cell> = vec![s.to_string().into(), s.dim().into(), p.into(), s.inradius().into()];
    full.extend(row);
    t.push(full);
    Ok(vec![t])
}

fn mc_cmd(text: &str, ps: &[f64], n: usize, step: Option<f64>, seed: u64, start: Option<Vec<f64>>) -> Result<Vec<Table>, Failure> {
    let s = spec(text)?;
    let step = step.unwrap_or_else(|| default_step(&s));
    let x = start.unwrap_or_else(|| s.center());
    let est = estimate_moments(&s, &x, ps, n, step, seed)?;
    let mut t = Table::new("mc", &["spec", "start", "p", "mean", "std_error", "n", "step", "seed"]);
    let start_text = x.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(";");
    for e in est {
        t.push(vec![
            s.to_string().into(),
            start_text.as_str().into(),
            e.p.into(),
            e.mean.into(),
            e.std_error.into(),
            e.n_samples.into(),
            e.step.into(),
            e.seed.into(),
        ]);
    }
    Ok(vec![t])
}

fn eigen_cmd(text: &str, h: Option<f64>) -> Result<Vec<Table>, Failure> {
    let s = spec(text)?;
    let h = h.unwrap_or(s.inradius() / 20.0);
    let e = fd_lambda1(&s, h)?;
    let exact = lambda1_exact(&s).ok();
    let mut t = Table::new(
        "eigen",
        &["spec", "h", "lambda1", "lambda1_h", "lambda1_h2", "nodes_h", "nodes_h2", "iterations", "exact_lo", "exact_hi"],
    );
    let (lo, hi) = exact.map_or((None, None), |v| {
        let (a, b) = v.bounds();
        (Some(a), Some(b))
    });
    t.push(vec![
        s.to_string().into(),
        e.h.into(),
        e.lambda.into(),
        e.lambda_h.into(),
        e.lambda_h2.into(),
        e.nodes_h.into(),
        e.nodes_h2.into(),
        e.iterations.into(),
        lo.into(),
        hi.into(),
    ]);
    Ok(vec![t])
}

fn sweep_specs(args: &SweepArgs, defaults: &[&str]) -> Result<Vec<DomainSpec>, Failure> {
    if args.spec.is_empty() {
        defaults.iter().map(|d| spec(d)).collect()
    } else {
        args.spec.iter().map(|d| spec(d)).collect()
    }
}

fn sweep_cmd(args: &SweepArgs) -> Result<(Vec<Table>, Vec<SweepRow>), Failure> {
    let rows: Vec<SweepRow> = match args.kind {
        SweepKind::Rectangles => {
            let grid = args.a_list.clone().unwrap_or_else(harness::default_rectangle_grid);
            let mut rows = Vec::new();
            for &p in &args.p {
                rows.extend(harness::rectangle_sweep(&grid, p)?);
            }
            rows
        }
        SweepKind::Triangles => harness::triangle_sweep(&harness::default_triangles(), args.h_rel)?,
        SweepKind::Ellipses => harness::ellipse_check(&harness::default_ellipse_grid(), args.h_rel)?,
        SweepKind::Ordering => {
            let chain = harness::ordering_chain()?;
            harness::ordering_rows(&chain)
        }
        SweepKind::Moments => {
            let specs = sweep_specs(args, &["ball d=2 r=1", "box 1 1", "triangle-eq r=1"])?;
            let mut rows = Vec::new();
            for (i, s) in specs.iter().enumerate() {
                rows.extend(harness::moment_inequality_check(s, args.k_max, &args.p, args.n, args.seed.wrapping_add(i as u64))?);
            }
            rows
        }
        SweepKind::Symmetrization => {
            let specs = sweep_specs(args, &["box 1 1"])?;
            let mut rows = Vec::new();
            for (i, s) in specs.iter().enumerate() {
                rows.extend(harness::symmetrization_check(s, &args.t_list, args.resolution, args.n, args.seed.wrapping_add(i as u64))?);
            }
            rows
        }
        SweepKind::Floor => harness::floor_check(&args.p, args.n, args.seed)?,
        SweepKind::Survival => harness::survival_check(&args.eps_list, &args.t_list, args.n, args.seed)?,
    };
    let name = format!("{:?}", args.kind).to_lowercase();
    Ok((vec![harness::rows_to_table(&name, &rows)], rows))
}

fn asymptotics_cmd(ps: &[f64], d_list: &[u64]) -> Result<Vec<Table>, Failure> {
    let mut t = Table::new(
        "asymptotics",
        &["d", "p", "sharp_upper", "scaled", "limit", "envelope_hi", "in_envelope", "c2", "kappa"],
    );
    for &p in ps {
        for &d in d_list {
            let s = sharp_upper_bound(d, p)?;
            let scaled = (s.bound.ln() - p * (d as f64).ln()).exp();
            let limit = 4f64.powf(-p);
            let hi = limit * (1.0 + 10.0 / (d as f64).sqrt());
            t.push(vec![
                d.into(),
                p.into(),
                s.bound.into(),
                scaled.into(),
                limit.into(),
                hi.into(),
                (scaled >= limit && scaled <= hi).into(),
                s.c2.into(),
                s.kappa.into(),
            ]);
        }
    }
    Ok(vec![t])
}

fn run(cli: &Cli) -> Result<(Vec<Table>, Vec<SweepRow>), Failure> {
    let tables = match &cli.command {
        Command::Bounds { d, p, at } => bounds_cmd(*d, *p, at.clone())?,
        Command::Domain { spec, p } => domain_cmd(spec, *p)?,
        Command::Mc { spec, p, n, step, seed, start } => mc_cmd(spec, p, *n, *step, *seed, start.clone())?,
        Command::Eigen { spec, h } => eigen_cmd(spec, *h)?,
        Command::Sweep(args) => return sweep_cmd(args),
        Command::Asymptotics { p, d_list } => asymptotics_cmd(p, d_list)?,
    };
    Ok((tables, Vec::new()))
}

/// Result of one invocation: what would go to stdout and stderr, and the
/// process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Execution {
    fn fail(f: Failure) -> Self {
        Execution { stdout: String::new(), stderr: format!("error: {}\n", f.message()), code: f.exit_code() }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Execution { stdout: text, stderr: String::new(), code }
            } else {
                Execution { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Execution::fail(Failure::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return Execution::fail(Failure::Usage(e.to_string())),
    };
    let format = match cli.output {
        Format::Table => OutputFormat::Table,
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let (tables, rows) = match pool.install(|| run(&cli)) {
        Ok(r) => r,
        Err(f) => return Execution::fail(f),
    };
    let text = render(&tables, format);
    let stdout = match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return Execution::fail(Failure::Usage(format!("writing {}: {e}", path.display())));
            }
            String::new()
        }
        None => text,
    };
    match violations(&rows) {
        None => Execution { stdout, stderr: String::new(), code: 0 },
        Some(f) => Execution { stdout, stderr: format!("{}\n", f.message()), code: f.exit_code() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_exit_codes() {
        let code = |e: Error| Failure::from(e).exit_code();
        assert_eq!(code(Error::Parse("x".into())), 1);
        assert_eq!(code(Error::Domain("x".into())), 1);
        assert_eq!(code(Error::NotAvailable("x".into())), 1);
        assert_eq!(code(Error::Convergence { what: "cg".into(), iterations: 10, residual: 1.0 }), 2);
        assert_eq!(code(Error::Bracket { lo: 0.0, hi: 1.0, f_lo: 1.0, f_hi: 1.0 }), 2);
        assert_eq!(code(Error::Runaway { steps: 1 }), 2);
        assert_eq!(code(Error::Internal("forms disagree".into())), 3);
    }

    #[test]
    fn parse_errors_echo_grammar() {
        let f = Failure::from(Error::Parse("bad".into()));
        assert!(f.message().contains(SPEC_GRAMMAR));
    }

    #[test]
    fn violated_rows_exit_three() {
        let mut rows = harness::ordering_rows(&harness::ordering_chain().unwrap());
        assert!(violations(&rows).is_none());
        rows[0].verdict = harness::Verdict::Violated;
        assert_eq!(violations(&rows).unwrap().exit_code(), 3);
        rows[0].asserted = false;
        assert!(violations(&rows).is_none());
    }

    #[test]
    fn help_goes_to_stdout() {
        let e = execute(["exitbounds", "--help"]);
        assert_eq!(e.code, 0);
        assert!(e.stdout.contains("Usage"));
        let e = execute(["exitbounds", "bounds", "--d"]);
        assert_eq!(e.code, 1);
        assert!(e.stdout.is_empty());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
