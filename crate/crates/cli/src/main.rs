use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use derham::bump::{random_bump_form, random_cocycle};
use derham::cohomology::{aniso_representative_basis, representative_basis, solvability_check, TimeCoefficient};
use derham::exterior::{form_from_json, Form, FormJson};
use derham::harmonics::harmonic_basis;
use derham::kernels::expansion_table;
use derham::potentials::{check_points, hodge_decompose, lemma_check, moment_functional, DenseForm};
use derham::spaces::{classify_delta, iso_norm, SampleGrid, TimeClass};
use derham::{QuadratureSpec, ScalarField};
use derham_cli::report::{series_csv, Series};
use derham_cli::{run_suite, CliError, Format, Report, SuiteConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "derham", version, about = "Kernels, potentials and cohomology representatives for the de Rham complex on weighted spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    g: Global,
}

#[derive(Args, Clone)]
struct Global {
    /// dimension
    #[arg(long, global = true, env = "DERHAM_N", default_value_t = 3)]
    n: usize,
    /// form degree q
    #[arg(long, global = true, env = "DERHAM_Q", default_value_t = 0)]
    q: usize,
    /// expansion order m (harmonic degree for `harmonic-basis`)
    #[arg(long, global = true, env = "DERHAM_M", default_value_t = 0)]
    m: u32,
    /// weight exponent δ
    #[arg(long, global = true, env = "DERHAM_DELTA", default_value_t = 2.5, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, global = true, env = "DERHAM_LAMBDA", default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, global = true, env = "DERHAM_MU", default_value_t = 0.25)]
    mu: f64,
    /// time horizon
    #[arg(long = "T", global = true, env = "DERHAM_T", default_value_t = 1.0)]
    t_max: f64,
    /// quadrature truncation radius
    #[arg(long = "R", global = true, env = "DERHAM_R")]
    radius: Option<f64>,
    /// polar patch radius around singular targets
    #[arg(long, global = true, env = "DERHAM_EPS")]
    eps: Option<f64>,
    /// target tolerance τ
    #[arg(long, global = true, env = "DERHAM_TOL")]
    tol: Option<f64>,
    /// worker threads (0 = all cores)
    #[arg(long, global = true, env = "DERHAM_WORKERS")]
    workers: Option<usize>,
    /// output file (directory for `run-suite`); stdout when absent
    #[arg(long, global = true, env = "DERHAM_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "DERHAM_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// seed for generated test data
    #[arg(long, global = true, env = "DERHAM_SEED", default_value_t = 2024)]
    seed: u64,
}

impl Global {
    fn spec(&self) -> Result<QuadratureSpec, CliError> {
        let mut s = QuadratureSpec::default();
        if let Some(r) = self.radius {
            s.radius = r;
        }
        if let Some(e) = self.eps {
            s.shell = e;
        }
        if let Some(t) = self.tol {
            s.tol = t;
        }
        if let Some(w) = self.workers {
            s.workers = w;
        }
        s.validate()?;
        Ok(s)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Flags given explicitly, as suite-config overrides.
    fn overrides(&self, m: &clap::ArgMatches) -> Vec<(String, String)> {
        let mut o = Vec::new();
        let explicit = |id: &str| m.value_source(id) == Some(clap::parser::ValueSource::CommandLine);
        let mut put = |id: &str, key: &str, v: String| {
            if explicit(id) {
                o.push((key.to_string(), v));
            }
        };
        put("n", "n", self.n.to_string());
        put("q", "q", self.q.to_string());
        put("m", "m", self.m.to_string());
        put("delta", "delta", self.delta.to_string());
        put("lambda", "lambda", self.lambda.to_string());
        put("mu", "mu", self.mu.to_string());
        put("t_max", "T", self.t_max.to_string());
        put("seed", "seed", self.seed.to_string());
        if let Some(v) = self.radius {
            put("radius", "R", v.to_string());
        }
        if let Some(v) = self.eps {
            put("eps", "eps", v.to_string());
        }
        if let Some(v) = self.tol {
            put("tol", "tol", v.to_string());
        }
        if let Some(v) = self.workers {
            put("workers", "workers", v.to_string());
        }
        o
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    /// C^{s,0}
    Bounded,
    /// C^{s,λ/2}
    Holder,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact exterior-algebra identities and the d/d* adjointness check
    VerifyAlgebra,
    /// Orthogonal harmonic polynomials of degree --m
    HarmonicBasis,
    /// Partial sums of the harmonic expansion of e(x − y) at |x| = 4|y|
    KernelExpansion {
        #[arg(long, default_value_t = 40)]
        max_m: u32,
    },
    /// dΦf = f, d*Φf = 0 and the Φ̂ duals on a cocycle
    PotentialCheck {
        /// cocycle of degree q+1 as form JSON; random bump cocycle when absent
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// u = d*Φ̂u + dΦu with residuals
    HodgeDecompose {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Moment table of a cocycle of degree q+1
    Moments {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Weighted Hölder norm estimate (defaults to the Gaussian)
    NormEstimate {
        #[arg(long)]
        input: Option<PathBuf>,
        /// grid level
        #[arg(long, default_value_t = 1)]
        level: u32,
        /// derivative order s
        #[arg(long, default_value_t = 0)]
        s: u32,
    },
    /// Weight window of δ
    Classify,
    /// Generators of the class-map image in degree q_out = q + 1
    CohomologyBasis {
        #[arg(long)]
        aniso: bool,
        #[arg(long, value_enum, default_value_t = ClassArg::Bounded)]
        time_class: ClassArg,
    },
    /// Pairings of a cocycle with d of harmonic q-forms (CSV by default)
    Solvability {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        input_g: Option<PathBuf>,
    },
    /// Time classes, Γ-norm additivity and time-Hölder monotonicity
    AnisoCheck,
    /// Run a configured suite and write report files
    RunSuite {
        /// flat `key = value` config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// extra `key=value` overrides, applied last
        #[arg(long = "set", value_parser = parse_pair)]
        set: Vec<(String, String)>,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn read_form(path: &Path) -> Result<Form, CliError> {
    Ok(form_from_json(&fs::read_to_string(path)?)?)
}

fn write_out(g: &Global, text: &str) -> Result<(), CliError> {
    match &g.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_value<T: Serialize>(g: &Global, v: &T, csv: Option<Series>) -> Result<(), CliError> {
    match (g.format, csv) {
        (Format::Csv | Format::PlotData, Some(s)) => write_out(g, &series_csv(&s)?),
        _ => write_out(g, &(serde_json::to_string_pretty(v)? + "\n")),
    }
}

fn emit_report(g: &Global, r: &Report) -> Result<bool, CliError> {
    eprint!("{}", r.summary());
    match &g.out {
        Some(dir) => {
            for p in r.emit(dir, g.format)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => match g.format {
            Format::Json => println!("{}", r.to_json()?),
            Format::Csv => print!("{}", r.to_csv()?),
            Format::PlotData => {
                for (name, s) in &r.series {
                    println!("# {name}");
                    print!("{}", series_csv(s)?);
                }
            }
        },
    }
    Ok(r.passed())
}

fn group_suite(g: &Global, group: &str) -> Result<bool, CliError> {
    let cfg = SuiteConfig {
        suite_id: group.into(),
        ns: vec![g.n],
        qs: vec![g.q],
        ms: vec![g.m],
        deltas: vec![g.delta],
        lambda: g.lambda,
        mu: g.mu,
        t_max: g.t_max,
        spec: g.spec()?,
        seed: g.seed,
        checks: Some(vec![group.into()]),
        ..SuiteConfig::default()
    };
    emit_report(g, &run_suite(&cfg)?)
}

fn run(cli: Cli, matches: &clap::ArgMatches) -> Result<bool, CliError> {
    let g = &cli.g;
    let n = g.n;
    match cli.cmd {
        Cmd::VerifyAlgebra => group_suite(g, "algebra"),
        Cmd::AnisoCheck => group_suite(g, "aniso"),
        Cmd::HarmonicBasis => {
            let b = harmonic_basis(n, g.m)?;
            let rows = b.members.iter().map(|h| vec![h.j as f64, derham::poly::q_to_f64(&h.norm_sq)]).collect();
            emit_value(g, &*b, Some(Series::new(&["j", "norm_sq"], rows)))?;
            Ok(true)
        }
        Cmd::KernelExpansion { max_m } => {
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            x[0] = 4.0;
            y[0] = 1.0;
            let rows = expansion_table(n, &x, &y, max_m)?;
            let s = Series::new(&["m", "remainder", "ratio"], rows.iter().map(|r| vec![r.m as f64, r.remainder, r.ratio.unwrap_or(f64::NAN)]).collect());
            emit_value(g, &rows, Some(s))?;
            Ok(true)
        }
        Cmd::PotentialCheck { input } => {
            let spec = g.spec()?;
            let f = match input {
                Some(p) => DenseForm::from_form(&read_form(&p)?)?,
                None => DenseForm::from_bump(&random_cocycle(n, g.q + 1, &mut g.rng())?),
            };
            let zero = DenseForm::zero(n, g.q.saturating_sub(1));
            let r = lemma_check(&f, &zero, g.delta, &spec, &check_points(n))?;
            emit_value(g, &r, None)?;
            Ok(r.pass)
        }
        Cmd::HodgeDecompose { input } => {
            let spec = g.spec()?;
            let u = match input {
                Some(p) => DenseForm::from_form(&read_form(&p)?)?,
                None => DenseForm::from_bump(&random_bump_form(n, g.q, &mut g.rng())),
            };
            let (_, _, r) = hodge_decompose(&u, g.delta, &spec, &check_points(n))?;
            emit_value(g, &r, None)?;
            Ok(r.pass)
        }
        Cmd::Moments { input } => {
            let spec = g.spec()?;
            let f = match input {
                Some(p) => read_form(&p)?,
                None => representative_basis(n, g.q + 1, g.m)?.members.swap_remove(0),
            };
            let t = moment_functional(&DenseForm::from_form(&f)?, g.m, g.q, &spec)?;
            let rows = t.entries.iter().map(|e| vec![e.k as f64, e.j as f64, e.value]).collect();
            emit_value(g, &t, Some(Series::new(&["k", "j", "value"], rows)))?;
            Ok(true)
        }
        Cmd::NormEstimate { input, level, s } => {
            let u = match input {
                Some(p) => read_form(&p)?,
                None => Form::function(n, ScalarField::sampled(|x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())),
            };
            let e = iso_norm(&u, s, g.lambda, g.delta, &SampleGrid::new(n, level)?)?;
            emit_value(g, &e, None)?;
            Ok(true)
        }
        Cmd::Classify => {
            let w = classify_delta(n, g.delta)?;
            emit_value(g, &w, None)?;
            Ok(true)
        }
        Cmd::CohomologyBasis { aniso, time_class } => {
            let q_out = g.q + 1;
            let b = representative_basis(n, q_out, g.m)?;
            let forms = b.members.iter().map(FormJson::from_form).collect::<derham::Result<Vec<_>>>()?;
            #[derive(Serialize)]
            struct Out<'a> {
                basis: &'a derham::cohomology::CohomologyBasis,
                forms: Vec<FormJson>,
                #[serde(skip_serializing_if = "Option::is_none")]
                time_classes: Option<Vec<derham::spaces::TimeClassReport>>,
            }
            let time_classes = if aniso {
                let lam = g.lambda;
                let (class, coeffs): (TimeClass, Vec<TimeCoefficient>) = match time_class {
                    ClassArg::Bounded => (
                        TimeClass::Bounded { s: 0 },
                        (0..b.members.len()).map(|i| Arc::new(move |t: f64| 1.0 + (i + 1) as f64 * t) as TimeCoefficient).collect(),
                    ),
                    ClassArg::Holder => (
                        TimeClass::Holder { s: 0, mu: lam / 2.0 },
                        (0..b.members.len()).map(|_| Arc::new(move |t: f64| t.powf(lam / 2.0)) as TimeCoefficient).collect(),
                    ),
                };
                Some(aniso_representative_basis(n, q_out, g.m, coeffs, g.t_max, class)?.class_reports)
            } else {
                None
            };
            emit_value(g, &Out { basis: &b, forms, time_classes }, None)?;
            Ok(true)
        }
        Cmd::Solvability { input, input_g } => {
            let spec = g.spec()?;
            let f = match input {
                Some(p) => read_form(&p)?,
                None => representative_basis(n, g.q + 1, g.m)?.members.swap_remove(0),
            };
            let gg = input_g.map(|p| read_form(&p)).transpose()?;
            let r = solvability_check(&f, gg.as_ref(), g.q, g.m, &spec)?;
            match g.format {
                Format::Json => write_out(g, &(serde_json::to_string_pretty(&r)? + "\n"))?,
                _ => write_out(g, &r.to_csv())?,
            }
            Ok(true)
        }
        Cmd::RunSuite { config, set } => {
            let text = config.map(fs::read_to_string).transpose()?;
            let mut overrides = g.overrides(matches);
            overrides.extend(set);
            let mut cfg = SuiteConfig::load(text.as_deref(), std::env::vars(), &overrides)?;
            let mut g = g.clone();
            if g.out.is_none() {
                g.out = cfg.out.take();
            }
            emit_report(&g, &run_suite(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let matches = <Cli as clap::CommandFactory>::command().get_matches();
    let cli = <Cli as clap::FromArgMatches>::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(cli, &matches) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
