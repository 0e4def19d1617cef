use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use heatlab::dg::{dg_profile, DGParams, DGReport, Variant};
use heatlab::kernel::{kernel_free, KernelQuery, QuadratureSpec};
use heatlab::operator::{build_operator, read_matrix_text, write_kernel_text, GridSpec, PotentialSpec};
use heatlab::pl::{pl_bound, PolyBoundHypothesis};
use heatlab::verify::{emit_report, load_config, run_experiment};
use heatlab::ComplexTime;

#[derive(Parser)]
#[command(name = "heatlab", version, about = "Complex-time fractional heat kernels and their off-diagonal bounds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (stdout when absent, except for verify).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Free-space kernel e^{-z(-Δ)^{α/2}}(r) at query radii.
    Kernel(KernelArgs),
    /// Sector bound from a real-axis polynomial hypothesis.
    Plbound(PlArgs),
    /// Dyadic profile of a stored kernel matrix.
    Dgprofile(DgArgs),
    /// Write the grid kernel e^{-zH} of a periodic operator as text.
    Export(ExportArgs),
    /// Run a verification experiment and write <id>.csv and <id>.json.
    Verify {
        /// Experiment id, e.g. cor_plapplied.
        id: String,
    },
    /// List the registered experiments.
    List,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct KernelArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    modulus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Radius; repeat for several.
    #[arg(long = "r")]
    #[serde(default)]
    r: Vec<f64>,
    /// Envelope on r / |z|^{1/α}.
    #[arg(long)]
    max_scaled_r: Option<f64>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PlArgs {
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    a3: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    beta3: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// |z|; repeat for several.
    #[arg(long)]
    #[serde(default)]
    modulus: Vec<f64>,
    /// arg z; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    theta: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantArg {
    Plain,
    Restricted,
    Dual,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DgArgs {
    /// Kernel text file written by `export`.
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Base radius; defaults to |z|^{1/α} from the file header.
    #[arg(long)]
    r: Option<f64>,
    /// Flat node index of the center; defaults to the grid center.
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    kmax: Option<u32>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExportArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    box_length: Option<f64>,
    #[arg(long)]
    modulus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Gaussian bump amplitude at the grid center (V = 0 when absent).
    #[arg(long)]
    bump_amplitude: Option<f64>,
    #[arg(long)]
    bump_width: Option<f64>,
}

fn from_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).map_err(|e| anyhow!("config error in {}: {}", p.display(), e.message()))
        }
    }
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{name} (flag or config key)"))
}

fn pick_vec(cli: Vec<f64>, file: Vec<f64>) -> Vec<f64> {
    if cli.is_empty() {
        file
    } else {
        cli
    }
}

/// Writes to <out>/<name> when an output directory is given, else to stdout.
fn sink(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_kernel(c: &Common, a: KernelArgs) -> Result<bool> {
    let f: KernelArgs = from_config(c.config.as_deref())?;
    let alpha = need(a.alpha.or(f.alpha), "alpha")?;
    let d = need(a.dim.or(f.dim), "dim")?;
    let z = ComplexTime::new(need(a.modulus.or(f.modulus), "modulus")?, a.theta.or(f.theta).unwrap_or(0.0))?;
    let rs = pick_vec(a.r, f.r);
    if rs.is_empty() {
        bail!("no radii given (--r)");
    }
    let mut spec = QuadratureSpec::default();
    if let Some(m) = a.max_scaled_r.or(f.max_scaled_r) {
        spec = spec.with_envelope(m);
    }
    let mut text = String::from("alpha,d,modulus,theta,r,re,im,abs_err,panels,status\n");
    let mut ok = true;
    for r in rs {
        let q = KernelQuery::new(alpha, d, z, r)?;
        let head = format!("{alpha},{d},{:.15e},{:.15e},{r:.15e}", z.modulus(), z.theta());
        match kernel_free(&q, &spec) {
            Ok(v) => text.push_str(&format!(
                "{head},{:.15e},{:.15e},{:.3e},{},ok\n",
                v.value.re, v.value.im, v.abs_err, v.panels
            )),
            Err(e) => {
                ok = false;
                eprintln!("r = {r}: {e}");
                text.push_str(&format!("{head},,,,,error\n"));
            }
        }
    }
    sink(c.out.as_deref(), "kernel.csv", &text)?;
    Ok(ok)
}

fn run_plbound(c: &Common, a: PlArgs) -> Result<bool> {
    let f: PlArgs = from_config(c.config.as_deref())?;
    let hyp = PolyBoundHypothesis::new(
        need(a.a1.or(f.a1), "a1")?,
        need(a.a2.or(f.a2), "a2")?,
        need(a.a3.or(f.a3), "a3")?,
        need(a.beta1.or(f.beta1), "beta1")?,
        need(a.beta2.or(f.beta2), "beta2")?,
        need(a.beta3.or(f.beta3), "beta3")?,
    )?;
    let eps = a.epsilon.or(f.epsilon).unwrap_or(0.5);
    let moduli = pick_vec(a.modulus, f.modulus);
    let mut thetas = pick_vec(a.theta, f.theta);
    if thetas.is_empty() {
        thetas.push(0.0);
    }
    let mut text = String::from("modulus,theta,epsilon,bound\n");
    for &m in &moduli {
        for &t in &thetas {
            let z = ComplexTime::new(m, t)?;
            text.push_str(&format!("{m:.15e},{t:.15e},{eps},{:.15e}\n", pl_bound(&hyp, &z, eps)?));
        }
    }
    sink(c.out.as_deref(), "plbound.csv", &text)?;
    Ok(true)
}

fn report_text(rep: &DGReport) -> String {
    let mut s = format!("{}\n", DGReport::FLAT_HEADER);
    for line in rep.flat_records() {
        s.push_str(&line);
        s.push('\n');
    }
    s
}

fn run_dgprofile(c: &Common, a: DgArgs) -> Result<bool> {
    let f: DgArgs = from_config(c.config.as_deref())?;
    let path = need(a.kernel.or(f.kernel), "kernel")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let tm = read_matrix_text(&mut BufReader::new(file))?;
    let alpha = tm.alpha;
    let k = tm.into_kernel()?;
    let variant = match a.variant.or(f.variant).unwrap_or(VariantArg::Plain) {
        VariantArg::Plain => Variant::Plain,
        VariantArg::Restricted => Variant::Restricted,
        VariantArg::Dual => Variant::Dual,
    };
    let params = DGParams::new(
        need(a.p.or(f.p), "p")?,
        need(a.q.or(f.q), "q")?,
        need(a.sigma.or(f.sigma), "sigma")?,
        need(a.beta.or(f.beta), "beta")?,
        variant,
    );
    let r = match (a.r.or(f.r), k.z(), alpha) {
        (Some(r), _, _) => r,
        (None, Some(z), Some(al)) => z.modulus().powf(1.0 / al),
        _ => bail!("missing --r and the kernel header has no z and alpha"),
    };
    let x = a.center.or(f.center).unwrap_or_else(|| heatlab::operator::KernelSource::grid(&k).center());
    let rep = dg_profile(&k, x, r, &params, a.kmax.or(f.kmax).unwrap_or(8), c.seed.unwrap_or(0))?;
    sink(c.out.as_deref(), "dgprofile.csv", &report_text(&rep))?;
    eprintln!(
        "C_DG = {:.6e}, slope = {:?} (expected <= {:.4} + {}), {}",
        rep.fitted_cdg,
        rep.fitted_slope,
        rep.expected_slope,
        params.slope_tol,
        if rep.pass { "pass" } else { "fail" }
    );
    Ok(rep.pass)
}

fn run_export(c: &Common, a: ExportArgs) -> Result<bool> {
    let f: ExportArgs = from_config(c.config.as_deref())?;
    let grid = GridSpec::new(
        need(a.dim.or(f.dim), "dim")?,
        need(a.n.or(f.n), "n")?,
        need(a.box_length.or(f.box_length), "box-length")?,
    )?;
    let pot = match (a.bump_amplitude.or(f.bump_amplitude), a.bump_width.or(f.bump_width)) {
        (Some(amp), Some(w)) => PotentialSpec::bump(&grid, amp, w),
        (None, None) => PotentialSpec::Zero,
        _ => bail!("--bump-amplitude and --bump-width go together"),
    };
    let op = build_operator(grid, need(a.alpha.or(f.alpha), "alpha")?, pot)?;
    let z = ComplexTime::new(need(a.modulus.or(f.modulus), "modulus")?, a.theta.or(f.theta).unwrap_or(0.0))?;
    let k = op.semigroup_kernel(&z);
    let mut buf = Vec::new();
    write_kernel_text(&k, &mut buf)?;
    sink(c.out.as_deref(), "kernel.txt", std::str::from_utf8(&buf)?)?;
    Ok(true)
}

fn run_verify(c: &Common, id: &str) -> Result<bool> {
    let path = c.config.as_deref().ok_or_else(|| anyhow!("verify needs --config"))?;
    let mut cfg = load_config(path)?;
    if cfg.experiment != id {
        bail!("config {} is for experiment {:?}, not {:?}", path.display(), cfg.experiment, id);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let dir = c
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    let outcome = run_experiment(&cfg)?;
    let (csv, json) = emit_report(&outcome, &cfg, &dir)?;
    let n = outcome.counts();
    eprintln!(
        "{id}: {} pass, {} fail, {} skip; wrote {} and {}",
        n.pass,
        n.fail,
        n.skip,
        csv.display(),
        json.display()
    );
    for r in outcome.rows.iter().filter(|r| r.status == heatlab::verify::Status::Fail) {
        eprintln!("  fail: {}", r.csv_line());
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let c = &cli.common;
    let res = match cli.cmd {
        Cmd::Kernel(a) => run_kernel(c, a),
        Cmd::Plbound(a) => run_plbound(c, a),
        Cmd::Dgprofile(a) => run_dgprofile(c, a),
        Cmd::Export(a) => run_export(c, a),
        Cmd::Verify { id } => run_verify(c, &id),
        Cmd::List => {
            for e in heatlab::verify::registry() {
                println!("{:16} {}", e.id(), e.describe());
            }
            Ok(true)
        }
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
