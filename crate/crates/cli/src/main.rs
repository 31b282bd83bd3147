use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use robust_dpg::bubbles::{all_families, scaling_exponents};
use robust_dpg::dpg::{convergence, ratio_sweep};
use robust_dpg::fortin::boundedness_sweep;
use robust_dpg::stability::eigen_sweep;
use robust_dpg::{criss_cross_mesh, reference_simplex, FortinVariant, TestChoice};

const THREADS_VAR: &str = "ROBUST_DPG_THREADS";

#[derive(Parser)]
#[command(name = "robust-dpg", version, about = "Robust Fortin operators and ultraweak DPG experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairing residuals of every basis family and scaling of the modified bubbles.
    VerifyBasis(BasisArgs),
    /// Moment residuals and empirical norms of Fortin operators on seeded probes.
    VerifyFortin(FortinArgs),
    /// Errors and estimator under uniform refinement of the criss-cross mesh.
    DpgConvergence(ConvergenceArgs),
    /// Ratio of error to estimator on the coarse mesh for both test spaces.
    RatioSweep(SweepArgs),
    /// Extreme eigenvalues of the discrete stability problem.
    EigenSweep(SweepArgs),
}

#[derive(Args)]
struct Output {
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=3))]
    n: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(0..=3))]
    p: u64,
    /// Layer widths α/h for the modified families.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
    alpha_list: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FortinArgs {
    /// Operator name, or `all`.
    #[arg(long, default_value = "all")]
    variant: String,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=3))]
    n: u64,
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "1e-3")]
    alpha_sweep: Vec<f64>,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    probes: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    eps: f64,
    #[arg(long, default_value = "eps")]
    choice: TestChoice,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Also write the finest mesh in plain text.
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', value_parser = positive, required = true)]
    eps_list: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a positive number"))
    }
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

struct Csv {
    w: Box<dyn Write>,
}

impl Csv {
    fn open(out: &Output, header: &[&str]) -> Result<Self> {
        let w: Box<dyn Write> = match &out.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let mut csv = Csv { w };
        csv.row(header.iter().map(|s| s.to_string()))?;
        Ok(csv)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        let line: Vec<String> = fields.into_iter().collect();
        writeln!(self.w, "{}", line.join(","))?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

fn verify_basis(a: &BasisArgs) -> Result<()> {
    let n = a.n as usize;
    let p = a.p as usize;
    let t = reference_simplex(n)?;
    let mut csv = Csv::open(&a.output, &["family", "n", "p", "alpha_over_h", "max_residual", "value_slope", "derivative_slope"])?;
    for fam in all_families(&t, p, None)? {
        csv.row([fam.name.clone(), n.to_string(), p.to_string(), String::new(), num(fam.residual(&t)), String::new(), String::new()])?;
    }
    let fits = if a.alpha_list.len() > 1 { scaling_exponents(&t, 0, &a.alpha_list) } else { Vec::new() };
    for &ah in &a.alpha_list {
        for fam in all_families(&t, p, Some(ah * t.diameter()))?.into_iter().filter(|f| f.name.contains("alpha")) {
            let (vs, ds) = fits
                .iter()
                .find(|f| f.name == fam.name)
                .map(|f| (num(f.value_slope), num(f.derivative_slope)))
                .unwrap_or_default();
            csv.row([fam.name.clone(), n.to_string(), p.to_string(), num(ah), num(fam.residual(&t)), vs, ds])?;
        }
    }
    csv.finish()
}

fn verify_fortin(a: &FortinArgs) -> Result<()> {
    let variants: Vec<FortinVariant> = if a.variant == "all" {
        FortinVariant::ALL.to_vec()
    } else {
        vec![a.variant.parse()?]
    };
    let n = a.n as usize;
    let t = reference_simplex(n)?;
    let mut csv = Csv::open(
        &a.output,
        &["variant", "p", "n", "alpha_over_h", "boundary_res", "volume_res", "derived_res", "max_ratio"],
    )?;
    for v in variants {
        if n == 3 && v.needs_split() {
            if a.variant == "all" {
                continue;
            }
            bail!("{v} is only available for n = 2");
        }
        log::info!("{v}: {} probes", a.probes);
        for row in boundedness_sweep(v, &t, a.p, &a.alpha_sweep, a.probes as usize, a.seed)? {
            csv.row([
                v.to_string(),
                a.p.to_string(),
                n.to_string(),
                num(row.alpha_over_h),
                num(row.residuals.boundary),
                num(row.residuals.volume),
                num(row.residuals.derived),
                num(row.max_ratio),
            ])?;
        }
    }
    csv.finish()
}

fn dpg_convergence(a: &ConvergenceArgs) -> Result<()> {
    let rows = convergence(a.eps, a.choice, a.levels)?;
    let mut csv = Csv::open(&a.output, &["dofs", "errU", "errSigma", "est"])?;
    for r in &rows {
        csv.row([r.dofs.to_string(), num(r.err_u), num(r.err_sigma), num(r.est)])?;
    }
    csv.finish()?;
    if let Some(path) = &a.mesh_out {
        let mut mesh = criss_cross_mesh();
        for _ in 0..a.levels {
            mesh = mesh.refine_uniform()?;
        }
        std::fs::write(path, mesh.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn ratio_sweep_cmd(a: &SweepArgs) -> Result<()> {
    let s = ratio_sweep(&a.eps_list)?;
    let mut csv = Csv::open(&a.output, &["eps", "rho_pol", "rho_eps", "slope_pol", "slope_eps"])?;
    for i in 0..s.eps.len() {
        csv.row([num(s.eps[i]), num(s.rho_pol[i]), num(s.rho_eps[i]), num(s.slope_pol), num(s.slope_eps)])?;
    }
    csv.finish()
}

fn eigen_sweep_cmd(a: &SweepArgs) -> Result<()> {
    let rows = eigen_sweep(&a.eps_list)?;
    let mut csv = Csv::open(&a.output, &["eps", "lmax_tilde", "lmin_tilde", "lmax_eps", "lmin_eps"])?;
    for r in &rows {
        csv.row([
            num(r.eps),
            num(r.tilde.lambda_max),
            num(r.tilde.lambda_min),
            num(r.modified.lambda_max),
            num(r.modified.lambda_min),
        ])?;
    }
    csv.finish()
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_VAR}={v}"))?;
        if n == 0 {
            bail!("{THREADS_VAR} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads()?;
    match &cli.command {
        Command::VerifyBasis(a) => verify_basis(a),
        Command::VerifyFortin(a) => verify_fortin(a),
        Command::DpgConvergence(a) => dpg_convergence(a),
        Command::RatioSweep(a) => ratio_sweep_cmd(a),
        Command::EigenSweep(a) => eigen_sweep_cmd(a),
    }
}
