use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use serrin_warp::config::{parse_number, parse_spacings, RunConfig};
use serrin_warp::report::{write_atomic, Report, Row};
use serrin_warp::suite::{self, Verify};
use serrin_warp::{Error, Result};

#[derive(Parser)]
#[command(name = "serrin-warp", version, about = "Overdetermined torsion problems on warped products")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file, key=value lines or JSON; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Catalog entry, e.g. `space_form:k=-1` or `scaled_model:rho=1,k=-1`.
    #[arg(long, global = true)]
    entry: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Equation constant; defaults to the entry's curvature constant.
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Radius of a ball about the pole.
    #[arg(long, global = true)]
    ball: Option<f64>,
    /// 2D domain, e.g. `ball:r0=2,radius=0.5`, `ellipse:cx=3,a=1,b=0.6`, `band:w=0.5`.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Spacings, coarse to fine, comma separated (`1/64` allowed).
    #[arg(long, global = true)]
    h: Option<String>,
    /// Overrides the default pass tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Row partitions for the threaded sparse products.
    #[arg(long, global = true)]
    partitions: Option<usize>,
    /// JSON report path, written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV dump of the profile, field or path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Ricci lower bound and Serrin coefficient of an entry.
    CheckCurvature,
    /// Radial problem on a ball about the pole.
    SolveRadial,
    /// Dirichlet problem on a 2D domain.
    #[command(name = "solve-2d")]
    Solve2d {
        /// Report the boundary-gradient defect.
        #[arg(long)]
        report_defect: bool,
    },
    /// Integral identities and the P-function.
    Verify {
        #[arg(value_enum)]
        which: Which,
    },
    /// Geodesic shooting.
    Geodesics {
        #[command(subcommand)]
        action: GeoAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Pohozaev,
    Pfunction,
    Compat,
    Identity,
    Intermediate,
}

#[derive(Subcommand)]
enum GeoAction {
    Shoot {
        /// Start point `r,theta`.
        #[arg(long)]
        from: String,
        /// Initial angle from the radial direction.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        psi: f64,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    Distance {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Endpoint tolerance of the shooting.
        #[arg(long, default_value_t = 1e-10)]
        shoot_tol: f64,
    },
    /// Star-shapedness of the `--domain` ball and random-pair agreement.
    Star {
        #[arg(long, default_value_t = 64)]
        rays: usize,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
}

fn point(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text.split_once(',').ok_or_else(|| Error::Config(format!("expected `r,theta`, got `{text}`")))?;
    Ok((parse_number(a)?, parse_number(b)?))
}

fn config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &c.entry {
        cfg.entry = v.clone();
    }
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if c.k.is_some() {
        cfg.k = c.k;
    }
    if c.ball.is_some() {
        cfg.ball = c.ball;
    }
    if c.domain.is_some() {
        cfg.domain = c.domain.clone();
    }
    if let Some(h) = &c.h {
        cfg.h = parse_spacings(h)?;
    }
    if c.tol.is_some() {
        cfg.tolerance = c.tol;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.partitions {
        cfg.partitions = v;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if c.csv.is_some() {
        cfg.csv = c.csv.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = config(&cli.common)?;
    let (command, rows): (String, Vec<Row>) = match &cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            let entries = suite::catalog_list(cfg.n);
            for e in &entries {
                println!("{}", e.summary_line());
            }
            if let Some(p) = &cfg.out {
                let json = serde_json::to_string_pretty(&entries).expect("entries serialize") + "\n";
                write_atomic(p, json.as_bytes())?;
            }
            return Ok(Report { command: "catalog list".into(), rows: Vec::new() });
        }
        Command::CheckCurvature => ("check-curvature".into(), suite::check_curvature(&cfg)?),
        Command::SolveRadial => ("solve-radial".into(), suite::solve_radial(&cfg)?),
        Command::Solve2d { report_defect } => ("solve-2d".into(), suite::solve_2d(&cfg, *report_defect)?),
        Command::Verify { which } => {
            let (name, v) = match which {
                Which::Pohozaev => ("pohozaev", Verify::Pohozaev),
                Which::Pfunction => ("pfunction", Verify::PFunction),
                Which::Compat => ("compat", Verify::Compat),
                Which::Identity => ("identity", Verify::Identity),
                Which::Intermediate => ("intermediate", Verify::Intermediate),
            };
            (format!("verify {name}"), suite::verify(&cfg, v)?)
        }
        Command::Geodesics { action } => match action {
            GeoAction::Shoot { from, psi, length, step } => {
                ("geodesics shoot".into(), suite::geodesics_shoot(&cfg, point(from)?, *psi, *length, *step)?)
            }
            GeoAction::Distance { from, to, shoot_tol } => {
                ("geodesics distance".into(), suite::geodesics_distance(&cfg, point(from)?, point(to)?, *shoot_tol)?)
            }
            GeoAction::Star { rays, pairs } => ("geodesics star".into(), suite::geodesics_star(&cfg, *rays, *pairs)?),
        },
    };
    let report = Report { command, rows };
    for row in &report.rows {
        println!("{}", row.summary());
    }
    if let Some(p) = &cfg.out {
        write_atomic(p, report.to_json().as_bytes())?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
