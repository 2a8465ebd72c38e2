use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use thetanull::census::{
    component_count, gysin_support, moduli_betti, nerve_e1, poincare_polynomial, supported_degrees, NerveInput,
};
use thetanull::charalg::Characteristic;
use thetanull::incidence::{default_grouping, incidence_report, local_intersection_census, sample_stratum_point, Grouping, StratumKind};
use thetanull::io::{read_json, write_json, ZVector};
use thetanull::siegel::{PeriodMatrix, MEMBERSHIP_TOL};
use thetanull::thetanum::{eval_theta, heat_residual, jet_at_zero, order_from_jet, Margins, ThetaConfig};
use thetanull::verify::{run_verify, Status, VerifyConfig};
use thetanull::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;

const CONFIG_ENV: &str = "THETANULL_VERIFY_CONFIG";

#[derive(Parser)]
#[command(name = "thetanull", version, about = "Theta characteristics, thetanulls and the genus-3 hyperelliptic locus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate theta functions.
    #[command(subcommand)]
    Theta(ThetaCommand),
    /// Vanishing thetanulls at points of the reducible strata of 𝔥₃.
    #[command(subcommand)]
    Incidence(IncidenceCommand),
    /// Exact counting formulas and the nerve spectral sequence.
    #[command(subcommand)]
    Census(CensusCommand),
    /// Run the reproduction suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Characteristic as [top|bottom] or g=3:[top|bottom].
    #[arg(long)]
    delta: String,
    /// Period matrix JSON: {"genus", "re", "im"}.
    #[arg(long)]
    omega: PathBuf,
    /// Absolute tolerance for every lattice sum.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Tolerance of the Siegel-space membership test.
    #[arg(long, default_value_t = MEMBERSHIP_TOL)]
    membership_tol: f64,
}

impl PointArgs {
    fn load(&self) -> Result<(Characteristic, PeriodMatrix, ThetaConfig)> {
        let delta: Characteristic = self.delta.parse()?;
        let omega: PeriodMatrix = read_json(&self.omega).with_context(|| format!("reading {}", self.omega.display()))?;
        let omega = PeriodMatrix::new(omega.entries().clone(), self.membership_tol)?;
        let cfg = ThetaConfig {
            tol: self.tol,
            membership_tol: self.membership_tol,
            ..ThetaConfig::default()
        };
        Ok((delta, omega, cfg))
    }
}

#[derive(Args)]
struct MarginArgs {
    #[arg(long, default_value_t = Margins::default().tol_zero)]
    tol_zero: f64,
    #[arg(long, default_value_t = Margins::default().tol_nonzero)]
    tol_nonzero: f64,
}

impl MarginArgs {
    fn margins(&self) -> Margins {
        Margins {
            tol_zero: self.tol_zero,
            tol_nonzero: self.tol_nonzero,
        }
    }
}

#[derive(Subcommand)]
enum ThetaCommand {
    /// ϑ_δ(Ω, z) with its tail bound and truncation radius.
    Eval {
        #[command(flatten)]
        point: PointArgs,
        /// z as {"re": [...], "im": [...]}; defaults to 0.
        #[arg(long)]
        z: Option<PathBuf>,
    },
    /// Value, gradient and Hessian in z at z = 0.
    Jet {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Heat-equation residual for the entry (j, k), 1-based.
    Heat {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
    },
    /// Vanishing order of ϑ_δ(Ω, ·) at z = 0.
    Order {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        margins: MarginArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Generic,
    Red,
    #[value(name = "red_sing")]
    RedSing,
}

impl From<KindArg> for StratumKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Generic => StratumKind::Generic,
            KindArg::Red => StratumKind::Red,
            KindArg::RedSing => StratumKind::RedSing,
        }
    }
}

#[derive(Subcommand)]
enum IncidenceCommand {
    /// Sample a stratum point and classify the 36 even thetanulls there.
    Report {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Grouping as 1-based blocks in JSON, e.g. [[1,3],[2]].
        #[arg(long)]
        grouping: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        margins: MarginArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Double count of hyperelliptic components through a product of three elliptic curves.
    Census,
}

#[derive(Subcommand)]
enum CensusCommand {
    /// 2^{g²}∏(2^{2k}−1)/(2g+2)!, exactly.
    Components {
        #[arg(long)]
        genus: u32,
    },
    /// First Betti number of M_{0,2g+2}.
    Betti {
        #[arg(long)]
        genus: u32,
        /// Also print the coefficients of ∏_{j=2}^{2g}(jt+1).
        #[arg(long)]
        polynomial: bool,
    },
    /// E₁ page and degree support of the nerve spectral sequence.
    Nerve {
        /// NerveInput JSON: {"ambient_dim", "levels"}; defaults to the
        /// reducible boundary of a hyperelliptic component.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Constraints on H_k from the Gysin sequence.
    Gysin {
        #[arg(long, default_value_t = 10)]
        ambient_dim: usize,
        /// Degrees where H_c of the boundary is nonzero (free).
        #[arg(long, value_delimiter = ',', default_values_t = [7, 8])]
        support: Vec<usize>,
        /// H_k of the complement vanishes for k at least this.
        #[arg(long, default_value_t = 3)]
        complement_vanishes_from: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Config JSON; the THETANULL_VERIFY_CONFIG variable overrides the path.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Check names or prefixes, comma separated.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: Complex64) -> String {
    format!("{} {}", sci(z.re), sci(z.im))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Indeterminate(_)) => EXIT_INDETERMINATE,
        Some(
            Error::Schema { .. }
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidArgument(_)
            | Error::InvalidCharacteristic(_)
            | Error::NotInSiegelSpace { .. }
            | Error::GenusMismatch { .. }
            | Error::UnsupportedGrouping(_),
        ) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Theta(cmd) => theta(cmd),
        Command::Incidence(cmd) => incidence(cmd),
        Command::Census(cmd) => census(cmd),
        Command::Verify(args) => verify(args),
    }
}

fn theta(cmd: ThetaCommand) -> Result<u8> {
    let mut out = String::new();
    match cmd {
        ThetaCommand::Eval { point, z } => {
            let (delta, omega, cfg) = point.load()?;
            let z = match z {
                Some(path) => read_json::<ZVector>(&path)?.to_complex()?,
                None => ZVector::zero(omega.genus()).to_complex()?,
            };
            let v = eval_theta(&delta, &omega, &z, &cfg)?;
            writeln!(out, "value      {}", complex(v.value))?;
            writeln!(out, "tail_bound {}", sci(v.tail_bound))?;
            writeln!(out, "radius     {}", sci(v.radius))?;
            writeln!(out, "terms      {}", v.terms)?;
        }
        ThetaCommand::Jet { point } => {
            let (delta, omega, cfg) = point.load()?;
            let jet = jet_at_zero(&delta, &omega, &cfg)?;
            let g = omega.genus();
            writeln!(out, "value {}", complex(jet.value))?;
            for (i, d) in jet.gradient.iter().enumerate() {
                writeln!(out, "gradient[{}] {}", i + 1, complex(*d))?;
            }
            for i in 0..g {
                for j in i..g {
                    writeln!(out, "hessian[{},{}] {}", i + 1, j + 1, complex(jet.hessian[(i, j)]))?;
                }
            }
            writeln!(out, "value_bound    {}", sci(jet.value_bound))?;
            writeln!(out, "gradient_bound {}", sci(jet.gradient_bound))?;
            writeln!(out, "hessian_bound  {}", sci(jet.hessian_bound))?;
            writeln!(out, "radius         {}", sci(jet.radius))?;
        }
        ThetaCommand::Heat { point, j, k, fd_step } => {
            let (delta, omega, cfg) = point.load()?;
            if j == 0 || k == 0 {
                return Err(Error::InvalidArgument("j and k are 1-based".into()).into());
            }
            let r = heat_residual(&delta, &omega, j - 1, k - 1, &cfg, fd_step)?;
            writeln!(out, "lhs      {}", complex(r.lhs))?;
            writeln!(out, "rhs      {}", complex(r.rhs))?;
            writeln!(out, "residual {}", sci(r.residual))?;
            writeln!(out, "relative {}", sci(r.relative()))?;
        }
        ThetaCommand::Order { point, margins } => {
            let (delta, omega, cfg) = point.load()?;
            let jet = jet_at_zero(&delta, &omega, &cfg)?;
            let order = order_from_jet(&jet, &margins.margins());
            writeln!(out, "normalized_value    {}", sci(jet.normalized_value()))?;
            writeln!(out, "normalized_gradient {}", sci(jet.normalized_gradient()))?;
            writeln!(out, "normalized_hessian  {}", sci(jet.normalized_hessian()))?;
            match order.as_int() {
                Some(n) => writeln!(out, "order {n}")?,
                None => {
                    writeln!(out, "order at_least_three_or_indeterminate")?;
                    print!("{out}");
                    return Ok(EXIT_INDETERMINATE);
                }
            }
        }
    }
    print!("{out}");
    Ok(0)
}

fn emit_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_json(p, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn incidence(cmd: IncidenceCommand) -> Result<u8> {
    match cmd {
        IncidenceCommand::Report {
            kind,
            seed,
            grouping,
            tol,
            margins,
            out,
        } => {
            let kind = StratumKind::from(kind);
            let grouping: Grouping = match grouping {
                Some(text) => serde_json::from_str(&text).map_err(Error::from)?,
                None => default_grouping(kind),
            };
            let cfg = ThetaConfig::with_tol(tol);
            let margins = margins.margins();
            let point = sample_stratum_point(kind, &grouping, seed, &cfg, &margins)?;
            let report = incidence_report(&point, &cfg, &margins)?;
            emit_json(&report, out.as_deref())?;
            if !report.is_certain() {
                let list: Vec<String> = report.indeterminate.iter().map(|c| c.to_string()).collect();
                eprintln!("indeterminate: {}", list.join(", "));
                return Ok(EXIT_INDETERMINATE);
            }
            Ok(0)
        }
        IncidenceCommand::Census => {
            emit_json(&local_intersection_census()?, None)?;
            Ok(0)
        }
    }
}

fn census(cmd: CensusCommand) -> Result<u8> {
    match cmd {
        CensusCommand::Components { genus } => {
            let q = component_count(genus)?;
            println!("{q}");
            if !q.is_integer() {
                eprintln!("warning: not an integer");
                return Ok(EXIT_FAIL);
            }
        }
        CensusCommand::Betti { genus, polynomial } => {
            println!("{}", moduli_betti(genus)?);
            if polynomial {
                let coeffs: Vec<String> = poincare_polynomial(genus)?.iter().map(|c| c.to_string()).collect();
                println!("{}", coeffs.join(" "));
            }
        }
        CensusCommand::Nerve { config } => {
            let input = match config {
                Some(path) => read_json::<NerveInput>(&path)?,
                None => NerveInput::reducible_boundary(),
            };
            let table = nerve_e1(&input);
            let support = supported_degrees(&table);
            let doc = serde_json::json!({
                "input": input,
                "e1": table,
                "support": support,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        CensusCommand::Gysin {
            ambient_dim,
            support,
            complement_vanishes_from,
        } => {
            let support: BTreeSet<usize> = support.into_iter().collect();
            if support.iter().any(|&d| d > ambient_dim) {
                return Err(Error::InvalidArgument("support degree exceeds the ambient dimension".into()).into());
            }
            let constraints = gysin_support(ambient_dim, &support, complement_vanishes_from);
            println!("{}", serde_json::to_string_pretty(&constraints)?);
        }
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<u8> {
    let config_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from).or(args.config);
    let mut config = match &config_path {
        Some(p) => read_json::<VerifyConfig>(p).with_context(|| format!("reading config {}", p.display()))?,
        None => VerifyConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tol) = args.tol {
        config.tol = tol;
    }
    if !args.checks.is_empty() {
        config.checks = args.checks;
    }
    let report = run_verify(&config)?;
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Indeterminate => "INDETERMINATE",
        };
        eprintln!("{status:<13} {:<32} {:.3}s", c.name, c.elapsed_secs);
        if let Some(d) = &c.diagnostic {
            eprintln!("              {d}");
        }
    }
    eprintln!("{}", report.note);
    emit_json(&report, args.json.as_deref())?;
    Ok(match report.status {
        Status::Pass => 0,
        Status::Fail => EXIT_FAIL,
        Status::Indeterminate => EXIT_INDETERMINATE,
    })
}
