//! Command-line surface.
//!
//! Exit codes: 0 success, 2 when a checked invariant is breached, 1 for usage
//! or input errors.

use crate::coherent::{cs_verify, CSLabel};
use crate::error::{Error, Result};
use crate::fockspace::{commutator_defect, passage_check, FockRep};
use crate::output::num;
use crate::params::{g_matrix_check, theta_zero_report, PhysParams};
use crate::thermo::{
    berezin_lieb_bounds, control_params, fermi_dirac_f, gamma_exact, magnetic_moment_landau, magnetic_moment_numeric,
    phi, phi_quadrature, thermo_point, GammaBreakdown, SpectrumKind, ThermoInput, ThermoOptions,
};
use crate::vcs::{
    moment_weight_check, mvcs_check, qvcs_family_norm, qvcs_statistics, w_moment_check, DiagLabel, QuaternionLabel,
};
use crate::wavefunctions::{gram_matrix, write_polar_csv};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;

/// Environment variable holding the worker-thread count for sweeps.
pub const THREADS_ENV: &str = "NCLANDAU_THREADS";

#[derive(Parser, Debug)]
#[command(name = "nclandau", version, about = "Landau levels on the noncommutative plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Energy table in the helicity or polar basis
    Spectrum(SpectrumArgs),
    /// Grand potential, bounds, Poisson pieces and magnetization at one point
    Thermo(ThermoArgs),
    /// Berezin-Lieb bounds against the exact grand potential
    Bounds(PointArgs),
    /// Thermo rows over a grid of (beta, mu, theta, omega_c)
    Sweep(SweepArgs),
    /// Coherent-state symbol, stability and resolution checks
    CsVerify(CsVerifyArgs),
    /// Quaternionic VCS statistics, closed forms beside the brute-force oracle
    Qvcs(QvcsArgs),
    /// Eigenvalues of the commutator matrix against the closed forms
    Gmatrix(CommonArgs),
    /// Every invariant suite, as one JSON report
    VerifyAll(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON parameter file
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Helicity,
    Polar,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumArg {
    Helicity,
    Polar,
}

impl From<SpectrumArg> for SpectrumKind {
    fn from(s: SpectrumArg) -> Self {
        match s {
            SpectrumArg::Helicity => SpectrumKind::Helicity,
            SpectrumArg::Polar => SpectrumKind::Polar,
        }
    }
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "helicity")]
    pub basis: Basis,
    /// Largest occupation (helicity) or radial quantum number (polar)
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    /// Largest |rho| in the polar basis
    #[arg(long, default_value_t = 5)]
    pub rho_max: i64,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub mu: f64,
    /// Spectrum summed by the exact grand potential
    #[arg(long, value_enum, default_value = "helicity")]
    pub spectrum: SpectrumArg,
    /// Certified tail tolerance for the exact sum
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ThermoArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: Format,
    #[arg(long, default_value_t = 400)]
    pub k_cut: usize,
    #[arg(long, default_value_t = 400)]
    pub l_cut: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON sweep configuration; grid flags override its lists
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub omega_c: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct CsVerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 48)]
    pub n_trunc: usize,
}

#[derive(Args, Debug)]
pub struct QvcsArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub vartheta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub varphi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub varrho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Vector index 1..4
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    #[arg(long, default_value_t = 48)]
    pub n_trunc: usize,
}

/// Sweep configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub params: PhysParams,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub omega_c: Vec<f64>,
    #[serde(default)]
    pub options: ThermoOptions,
}

/// Outcome of a command: bytes to emit and whether every checked invariant held.
struct Outcome {
    body: Vec<u8>,
    ok: bool,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (output, res) = dispatch(&cli.command);
    match res.and_then(|o| emit(output.as_ref(), &o.body).map(|_| o.ok)) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(path: Option<&PathBuf>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cmd: &Command) -> (Option<PathBuf>, Result<Outcome>) {
    match cmd {
        Command::Spectrum(a) => (a.common.output.clone(), spectrum(a)),
        Command::Thermo(a) => (a.point.common.output.clone(), thermo(a)),
        Command::Bounds(a) => (a.common.output.clone(), bounds(a)),
        Command::Sweep(a) => (a.common.output.clone(), sweep(a)),
        Command::CsVerify(a) => (a.common.output.clone(), cs(a)),
        Command::Qvcs(a) => (a.output.clone(), qvcs(a)),
        Command::Gmatrix(a) => (a.output.clone(), gmatrix(a)),
        Command::VerifyAll(a) => (a.output.clone(), verify_all(a)),
    }
}

fn load_params(path: &Option<PathBuf>) -> Result<PhysParams> {
    match path {
        Some(p) => PhysParams::from_json_file(p),
        None => Ok(PhysParams::default()),
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Thread pool sized from [`THREADS_ENV`], defaulting to the available cores.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| Error::Domain(format!("{THREADS_ENV} = {v:?} is not an integer")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Domain(e.to_string()))
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let p = load_params(&a.common.params)?;
    let mut body = Vec::new();
    match a.basis {
        Basis::Helicity => FockRep::build(&p, a.n_max + 1)?.write_spectrum_csv(&mut body)?,
        Basis::Polar => write_polar_csv(&p, a.n_max, a.rho_max, &mut body)?,
    }
    Ok(Outcome { body, ok: true })
}

pub const THERMO_COLUMNS: [&str; 12] = [
    "beta",
    "mu",
    "theta",
    "gamma_lower",
    "gamma_exact",
    "gamma_upper",
    "gamma0",
    "gammaL",
    "gammaOsc",
    "M_closed",
    "M_numeric",
    "chi",
];

fn thermo_fields(g: &GammaBreakdown) -> Vec<String> {
    [
        g.beta,
        g.mu,
        g.theta,
        g.gamma_lower,
        g.gamma_exact,
        g.gamma_upper,
        g.gamma0,
        g.gamma_l,
        g.gamma_osc,
        g.m_closed,
        g.m_numeric,
        g.chi,
    ]
    .iter()
    .map(|&x| num(x))
    .collect()
}

fn thermo(a: &ThermoArgs) -> Result<Outcome> {
    let p = load_params(&a.point.common.params)?;
    let t = ThermoInput::new(a.point.beta, a.point.mu, p)?;
    let opts = ThermoOptions {
        tol: a.point.tol,
        spectrum: a.point.spectrum.into(),
        k_cut: a.k_cut,
        l_cut: a.l_cut,
        ..ThermoOptions::default()
    };
    let g = thermo_point(&t, &opts)?;
    let body = match a.out {
        Format::Json => json(&g)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(THERMO_COLUMNS)?;
            w.write_record(thermo_fields(&g))?;
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    Ok(Outcome { body, ok: g.sandwich_ok() })
}

fn bounds(a: &PointArgs) -> Result<Outcome> {
    let p = load_params(&a.common.params)?;
    let t = ThermoInput::new(a.beta, a.mu, p)?;
    let cp = control_params(&t)?;
    let b = berezin_lieb_bounds(&t)?;
    let g = gamma_exact(&t, a.tol, a.spectrum.into())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "beta",
        "mu",
        "theta",
        "kappa_prime_plus",
        "kappa_prime_minus",
        "phi_lower",
        "gamma_exact",
        "phi_upper",
        "slack_lower",
        "slack_upper",
        "tail_bound",
    ])?;
    w.write_record(
        [
            a.beta,
            a.mu,
            p.theta,
            cp.kappa_prime_plus,
            cp.kappa_prime_minus,
            b.lower,
            g.value,
            b.upper,
            g.value - b.lower,
            b.upper - g.value,
            g.tail_bound,
        ]
        .iter()
        .map(|&x| num(x)),
    )?;
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Outcome { body, ok: b.lower <= g.value && g.value <= b.upper })
}

/// Grid points in lexicographic order of their indices over (beta, mu, theta, omega_c).
pub fn sweep_grid(cfg: &SweepConfig) -> Vec<(f64, f64, f64, f64)> {
    let theta = if cfg.theta.is_empty() { vec![cfg.params.theta] } else { cfg.theta.clone() };
    let wc = if cfg.omega_c.is_empty() { vec![cfg.params.omega_c] } else { cfg.omega_c.clone() };
    let mut out = Vec::new();
    for &b in &cfg.beta {
        for &m in &cfg.mu {
            for &th in &theta {
                for &w in &wc {
                    out.push((b, m, th, w));
                }
            }
        }
    }
    out
}

/// `(beta, mu, theta, omega_c, outcome)` for one grid point.
pub type SweepRow = (f64, f64, f64, f64, Result<GammaBreakdown>);

/// Runs the sweep on the configured pool; row order never depends on scheduling.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let grid = sweep_grid(cfg);
    let pool = thread_pool()?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&(b, m, th, w)| {
                let p = cfg.params.with_theta(th).with_omega_c(w);
                let r = ThermoInput::new(b, m, p).and_then(|t| thermo_point(&t, &cfg.options));
                (b, m, th, w, r)
            })
            .collect()
    });
    Ok(rows)
}

fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let mut cfg = match &a.config {
        Some(path) => serde_json::from_str::<SweepConfig>(&std::fs::read_to_string(path)?)?,
        None => SweepConfig {
            params: load_params(&a.common.params)?,
            beta: vec![],
            mu: vec![],
            theta: vec![],
            omega_c: vec![],
            options: ThermoOptions::default(),
        },
    };
    if a.config.is_some() && a.common.params.is_some() {
        cfg.params = load_params(&a.common.params)?;
    }
    for (dst, src) in [(&mut cfg.beta, &a.beta), (&mut cfg.mu, &a.mu), (&mut cfg.theta, &a.theta), (&mut cfg.omega_c, &a.omega_c)] {
        if !src.is_empty() {
            dst.clone_from(src);
        }
    }
    if cfg.beta.is_empty() || cfg.mu.is_empty() {
        return Err(Error::Domain("sweep needs at least one beta and one mu".into()));
    }
    let rows = sweep_rows(&cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = THERMO_COLUMNS.to_vec();
    header.extend(["omega_c", "sandwich_ok", "error"]);
    w.write_record(&header)?;
    let mut ok = true;
    for (b, m, th, wc, r) in rows {
        match r {
            Ok(g) => {
                ok &= g.sandwich_ok();
                let mut f = thermo_fields(&g);
                f.extend([num(wc), g.sandwich_ok().to_string(), String::new()]);
                w.write_record(f)?;
            }
            Err(e) => {
                let mut f = vec![num(b), num(m), num(th)];
                f.extend(std::iter::repeat_n(String::new(), THERMO_COLUMNS.len() - 3));
                f.extend([num(wc), String::new(), e.to_string()]);
                w.write_record(f)?;
            }
        }
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Outcome { body, ok })
}

/// Labels with `|z±| ≤ 1` used by `cs-verify`.
pub fn default_cs_labels() -> Vec<CSLabel> {
    vec![
        CSLabel::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0),
        CSLabel::new(Complex64::new(0.6, -0.3), Complex64::new(0.2, 0.5), 0.4),
        CSLabel::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), 1.3),
        CSLabel::new(Complex64::new(-0.5, 0.7), Complex64::new(0.7, 0.7), 2.1),
    ]
}

#[derive(Serialize)]
struct CsOut {
    n_trunc: usize,
    symbol_deviation: f64,
    symbol_tolerance: f64,
    resolution_deviation: f64,
    resolution_tolerance: f64,
    stability_ok: bool,
}

fn cs(a: &CsVerifyArgs) -> Result<Outcome> {
    let p = load_params(&a.common.params)?;
    let r = cs_verify(&p, a.n_trunc, &default_cs_labels())?;
    let out = CsOut {
        n_trunc: a.n_trunc,
        symbol_deviation: r.symbol_deviation,
        symbol_tolerance: 1e-9,
        resolution_deviation: r.resolution_deviation,
        resolution_tolerance: 1e-8,
        stability_ok: r.stability_ok,
    };
    let ok = out.symbol_deviation < 1e-9 && out.resolution_deviation < 1e-8 && out.stability_ok;
    Ok(Outcome { body: json(&out)?, ok })
}

fn qvcs(a: &QvcsArgs) -> Result<Outcome> {
    let q = QuaternionLabel {
        r: a.r,
        vartheta: a.vartheta,
        phi: a.phi,
        eta: a.eta,
        rho: a.rho,
        gamma: a.gamma,
        varphi: a.varphi,
        varrho: a.varrho,
    };
    let st = qvcs_statistics(&q, a.j, a.theta, a.hbar, a.n_trunc)?;
    let ok = st.heisenberg.holds();
    Ok(Outcome { body: json(&st)?, ok })
}

fn gmatrix(a: &CommonArgs) -> Result<Outcome> {
    let p = load_params(&a.params)?;
    let r = g_matrix_check(&p)?;
    let ok = r.rel_dev_closed < 1e-9;
    Ok(Outcome { body: json(&r)?, ok })
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: PhysParams,
    pub suites: Vec<SuiteResult>,
    pub all_pass: bool,
}

fn suite(name: &'static str, value: f64, tolerance: f64) -> SuiteResult {
    SuiteResult { name, pass: value <= tolerance, value, tolerance }
}

/// Runs every invariant suite at `p` (thermodynamic grids vary β, μ, θ around it).
pub fn verify_suites(p: &PhysParams) -> Result<VerifyReport> {
    let mut s = Vec::new();
    s.push(suite("polylog F3(-1)", (fermi_dirac_f(3, -1.0)? + 0.901543).abs(), 1e-6));
    s.push(suite("polylog F2(-1)", (fermi_dirac_f(2, -1.0)? + std::f64::consts::PI.powi(2) / 12.0).abs(), 1e-12));
    s.push(suite("theta=0 reduction", theta_zero_report(p)?.max_rel_dev, 1e-15));
    s.push(suite("g-matrix eigenvalues", g_matrix_check(p)?.rel_dev_closed, 1e-9));

    let rep = FockRep::build(p, 12)?;
    let cd = commutator_defect(&rep);
    s.push(suite("ladder commutators below top level", cd.low_level.max(cd.cross), 1e-12));
    let pc = passage_check(&rep)?;
    s.push(suite("passage operators", pc.uv_identity_dev.max(pc.vu_identity_dev).max(pc.conjugated_diag_dev), 1e-12));

    let (_, g) = gram_matrix(6, 6, p)?;
    let k = g.nrows();
    let gram_dev = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    s.push(suite("wavefunction orthonormality", gram_dev, 1e-9));

    let cs = cs_verify(p, 48, &default_cs_labels())?;
    s.push(suite("coherent lower symbol", cs.symbol_deviation, 1e-9));
    s.push(suite("coherent resolution", cs.resolution_deviation, 1e-8));
    s.push(suite("coherent stability", if cs.stability_ok { 0.0 } else { 1.0 }, 0.0));

    let grid: Vec<(f64, f64, f64)> = [0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&b| [2.0, 5.0, 8.0].iter().flat_map(move |&m| [0.0, 0.02, 0.05].iter().map(move |&th| (b, m, th))))
        .collect();
    let pool = thread_pool()?;
    let violations: Result<Vec<bool>> = pool.install(|| {
        grid.par_iter()
            .map(|&(b, m, th)| {
                let t = ThermoInput::new(b, m, p.with_theta(th))?;
                let bl = berezin_lieb_bounds(&t)?;
                let g = gamma_exact(&t, 1e-10, SpectrumKind::Helicity)?.value;
                Ok(!(bl.lower <= g && g <= bl.upper))
            })
            .collect()
    });
    s.push(suite("Berezin-Lieb sandwich violations", violations?.iter().filter(|v| **v).count() as f64, 0.0));

    let t1 = ThermoInput::new(1.0, 0.0, *p)?;
    let mut phi_dev = 0.0f64;
    for kp in [0.1, 1.0, 3.0, 10.0] {
        let (a, b) = (phi(kp, &t1)?, phi_quadrature(kp, &t1)?);
        phi_dev = phi_dev.max(((a - b) / b).abs());
    }
    s.push(suite("phi closed form vs quadrature", phi_dev, 1e-8));

    let d = crate::params::derive(p)?;
    let z = [Complex64::new(0.3, 0.4), Complex64::new(0.0, 0.0), Complex64::new(-0.6, 0.1), Complex64::new(0.0, 1.0)];
    let w = [Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.7), Complex64::new(0.2, 0.0), Complex64::new(0.1, 0.1)];
    let mv = mvcs_check(&DiagLabel::new(z, w, 0.3), 40, &d)?;
    s.push(suite("MVCS family norm", (mv.family_norm - 1.0).abs(), 1e-10));
    s.push(suite("MVCS action identity (weighted)", (mv.action_brute - mv.action_weighted).abs(), 1e-10));
    let q = QuaternionLabel { r: 0.8, vartheta: 0.9, phi: 0.6, eta: 1.1, rho: 0.8, gamma: 2.0, varphi: 1.3, varrho: 4.0 };
    s.push(suite("QVCS family norm", (qvcs_family_norm(&q, 40, &d)? - 1.0).abs(), 1e-10));
    let mw = moment_weight_check(10)?;
    s.push(suite("lambda/varpi moments", mw.gauss_laguerre.max(mw.adaptive), 1e-9));
    s.push(suite("W moments", w_moment_check(10)?, 1e-9));

    let st = qvcs_statistics(&QuaternionLabel::only_q(0.0, 0.4, 0.3, 0.2), 1, 0.5, 1.0, 48)?;
    s.push(suite("QVCS hbar^2/2theta scaling at r=0", (st.oracle.dpx2 - 0.25 / (2.0 * 0.5)).abs(), 1e-12));

    let tm = ThermoInput::new(0.5, 30.0, p.with_theta(0.0))?;
    if tm.params.omega_c > 0.0 {
        let mn = magnetic_moment_numeric(&tm, 1e-3 * tm.params.b_field(), SpectrumKind::Polar)?.value;
        let ml = magnetic_moment_landau(&tm)?;
        s.push(suite("numeric magnetization vs Landau part", ((mn - ml) / ml).abs(), 1e-4));
    }

    let all_pass = s.iter().all(|x| x.pass);
    Ok(VerifyReport { params: *p, suites: s, all_pass })
}

fn verify_all(a: &CommonArgs) -> Result<Outcome> {
    let p = load_params(&a.params)?;
    let r = verify_suites(&p)?;
    Ok(Outcome { body: json(&r)?, ok: r.all_pass })
}
