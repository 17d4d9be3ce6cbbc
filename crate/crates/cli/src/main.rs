use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbr_core::cantor::{build_seed, CantorSystem, Interval};
use cbr_core::config::{parse_rational, ExperimentConfig};
use cbr_core::domain::{build_domain, cap_cover, dimension_table};
use cbr_core::energy::{energy_exponent_table, level_overlap_check, SWEEP_BUDGET};
use cbr_core::experiment::run_experiment;
use cbr_core::export::{self, ArtifactKind, DimensionRecord, ExponentRecord, RegionRecord};
use cbr_core::fourier::kernel::{kernel_scan, MAX_SIDE};
use cbr_core::fourier::probe::{decoupling_probe_1d, decoupling_probe_2d, ProbeRow, ProbeWindow};
use cbr_core::lambdap::{self, lambda_lower_opt, random_lambda_candidate};
use cbr_core::rational::Q;
use cbr_core::regions::{comparison, region_boundary, Exponent, Region};
use cbr_core::sidon::{self, IntegerSet};
use cbr_core::{Error, Result};

#[derive(Parser)]
#[command(name = "cbr", version, about = "Cantor-type convex domains: constructions, certificates and scans")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// B_m[g] integer sets.
    #[command(subcommand)]
    Sidon(SidonCmd),
    /// Λ(p) norms and candidates.
    #[command(subcommand)]
    Lambda(LambdaCmd),
    /// Seed interval family.
    #[command(subcommand)]
    Cantor(CantorCmd),
    /// Convex domain, caps and dimension table.
    #[command(subcommand)]
    Domain(DomainCmd),
    /// Sumset overlaps and the energy exponent table.
    #[command(subcommand)]
    Energy(EnergyCmd),
    /// Kernels and decoupling probes.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Exponent thresholds of the boundedness regions.
    Regions(RegionsArgs),
    /// Run the full pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Copy one artifact out of a finished run.
    Export {
        /// points, seed, domain, caps, dimension, energy_table, energy_report,
        /// kernel_scan, probe1d, probe2d, regions or manifest.
        #[arg(long)]
        kind: String,
        /// Run output directory.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    BoseChowla,
    Greedy,
    Glue,
}

#[derive(Subcommand)]
enum SidonCmd {
    Construct {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Field characteristic (bose-chowla, glue).
        #[arg(long)]
        q: Option<u64>,
        /// Range [1, n] (greedy).
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 1)]
        g: u64,
        /// Number of glued translates (glue).
        #[arg(long, default_value_t = 2)]
        blocks: u64,
    },
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: u32,
    },
}

#[derive(Subcommand)]
enum LambdaCmd {
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = lambdap::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = lambdap::DEFAULT_ITERS)]
        iters: usize,
    },
    Candidate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Args, Clone)]
struct SystemArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: f64,
    /// Override the seed grid N_p.
    #[arg(long)]
    grid: Option<u64>,
}

impl SystemArgs {
    fn system(&self, seed: u64) -> Result<CantorSystem> {
        Ok(CantorSystem::new(build_seed(self.n, self.p, seed, self.grid)?))
    }
}

#[derive(Subcommand)]
enum CantorCmd {
    Build {
        #[command(flatten)]
        sys: SystemArgs,
        /// Also emit the level-k intervals.
        #[arg(long)]
        level: Option<u32>,
    },
}

#[derive(Subcommand)]
enum DomainCmd {
    Build {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 2)]
        depth: u32,
    },
    Caps {
        #[command(flatten)]
        sys: SystemArgs,
        /// δ as 2^-k, a/b or a decimal.
        #[arg(long)]
        delta: String,
    },
    Dimension {
        #[command(flatten)]
        sys: SystemArgs,
        /// Comma-separated δ values, strictly decreasing.
        #[arg(long)]
        ladder: String,
    },
}

#[derive(Subcommand)]
enum EnergyCmd {
    Overlap {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: u32,
    },
    Table {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        ladder: String,
        /// Overlap level for bound-only rows; defaults to the certified one.
        #[arg(long)]
        g: Option<u64>,
    },
}

#[derive(Subcommand)]
enum FourierCmd {
    Kernel {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value = "2^-3,2^-4,2^-5")]
        deltas: String,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = MAX_SIDE)]
        max_side: usize,
    },
    Probe1d {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        /// Length of the window Q; the whole period when absent.
        #[arg(long)]
        window: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    Probe2d {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    Sz,
    Cladek,
    Main,
    LambdaP,
}

#[derive(Args)]
struct RegionsArgs {
    /// Emit the three-region comparison polylines at κ = 1/(4m − 2).
    #[arg(long, conflicts_with = "theorem")]
    comparison: Option<u32>,
    #[arg(long, value_enum)]
    theorem: Option<Theorem>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Exponent q ≥ 4 or "inf"; without it the polyline is printed.
    #[arg(long)]
    q: Option<String>,
}

fn ladder(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_rational).collect()
}

fn reals(s: &str) -> Result<Vec<f64>> {
    Ok(ladder(s)?.iter().map(cbr_core::rational::to_f64).collect())
}

fn read_set(path: &Path) -> Result<IntegerSet> {
    let bytes = std::fs::read(path).map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("--{what} is required here")))
}

fn probe_levels(sys: &CantorSystem, levels: u32) -> Result<Vec<(u32, std::sync::Arc<Vec<Interval>>)>> {
    (1..=levels).map(|k| Ok((k, sys.level(k)?))).collect()
}

fn region(a: &RegionsArgs) -> Result<Region> {
    let kappa = || need(a.kappa, "kappa");
    Ok(match need(a.theorem, "theorem")? {
        Theorem::Sz => Region::SeegerZiesler { kappa: kappa()? },
        Theorem::Cladek => Region::Cladek { m: need(a.m, "m")?, kappa: kappa()? },
        Theorem::Main => Region::Main { m: need(a.m, "m")?, kappa: kappa()?, eps: a.eps },
        Theorem::LambdaP => Region::LambdaP { p: need(a.p, "p")?, eps: a.eps },
    })
}

fn execute(cli: &Cli) -> Result<Vec<u8>> {
    let seed = cli.seed;
    match &cli.command {
        Command::Sidon(SidonCmd::Construct { method, m, q, n, g, blocks }) => {
            let s = match method {
                Method::BoseChowla => sidon::bose_chowla(need(*q, "q")?, *m)?,
                Method::Greedy => sidon::greedy_bm(need(*n, "n")?, *m, *g)?,
                Method::Glue => {
                    let q = need(*q, "q")?;
                    sidon::glue_translates(&sidon::bose_chowla(q, *m)?, q.pow(*m), *blocks)?
                }
            };
            export::json_bytes(&s.certified(*m)?)
        }
        Command::Sidon(SidonCmd::Certify { input, m }) => export::json_bytes(&read_set(input)?.certified(*m)?),
        Command::Lambda(LambdaCmd::Norm { input, p, restarts, iters }) => {
            export::json_bytes(&lambda_lower_opt(&read_set(input)?, *p, *restarts, *iters, seed)?)
        }
        Command::Lambda(LambdaCmd::Candidate { n, p }) => {
            let (set, est) = random_lambda_candidate(*n, *p, seed)?;
            export::json_bytes(&serde_json::json!({ "set": set, "estimate": est }))
        }
        Command::Cantor(CantorCmd::Build { sys, level }) => {
            let s = sys.system(seed)?;
            match level {
                None => export::json_bytes(&s.seed),
                Some(k) => export::json_bytes(&serde_json::json!({ "seed": s.seed, "level": k, "intervals": *s.level(*k)? })),
            }
        }
        Command::Domain(DomainCmd::Build { sys, depth }) => export::json_bytes(&build_domain(&sys.system(seed)?, *depth)?),
        Command::Domain(DomainCmd::Caps { sys, delta }) => {
            let s = sys.system(seed)?;
            let d = parse_rational(delta)?;
            let dom = build_domain(&s, s.k_delta(&d)?)?;
            export::json_bytes(&cap_cover(&dom, &s, &d)?)
        }
        Command::Domain(DomainCmd::Dimension { sys, ladder: l }) => {
            let rows = dimension_table(&sys.system(seed)?, &ladder(l)?, true)?;
            export::csv_bytes(&rows.iter().map(DimensionRecord::from).collect::<Vec<_>>())
        }
        Command::Energy(EnergyCmd::Overlap { sys, level }) => {
            let m = need(lambdap::even_half(sys.p), "p (an even integer)")?;
            export::json_bytes(&level_overlap_check(&sys.system(seed)?, m, *level)?)
        }
        Command::Energy(EnergyCmd::Table { sys, ladder: l, g }) => {
            let m = need(lambdap::even_half(sys.p), "p (an even integer)")?;
            let s = sys.system(seed)?;
            let g = match g {
                Some(g) => *g,
                None => need(s.seed.g, "g")?,
            };
            let rows = energy_exponent_table(&s, m, &ladder(l)?, g, SWEEP_BUDGET)?;
            export::csv_bytes(&rows.iter().map(ExponentRecord::from).collect::<Vec<_>>())
        }
        Command::Fourier(FourierCmd::Kernel { sys, depth, deltas, alpha, max_side }) => {
            let dom = build_domain(&sys.system(seed)?, *depth)?;
            let (rows, _) = kernel_scan(&dom, &reals(deltas)?, *alpha, *max_side)?;
            export::csv_bytes(&rows)
        }
        Command::Fourier(FourierCmd::Probe1d { sys, levels, trials, window, epsilon }) => {
            let s = sys.system(seed)?;
            let w = window.map_or(ProbeWindow::Whole, |len| ProbeWindow::Finite { len });
            let mut rows = Vec::new();
            for (k, iv) in probe_levels(&s, *levels)? {
                let r = decoupling_probe_1d(&iv, sys.p, w, *trials, seed)?;
                rows.push(ProbeRow { level: k, q: sys.p, trials: r.trials, max_ratio: r.max_ratio, ref_exponent: 0.5 * sys.p * epsilon });
            }
            export::csv_bytes(&rows)
        }
        Command::Fourier(FourierCmd::Probe2d { sys, levels, q, trials, epsilon }) => {
            let s = sys.system(seed)?;
            let mut rows = Vec::new();
            for (k, iv) in probe_levels(&s, *levels)? {
                let r = decoupling_probe_2d(&iv, *q, *trials, seed)?;
                rows.push(ProbeRow { level: k, q: *q, trials: r.trials, max_ratio: r.max_ratio, ref_exponent: 0.75 * sys.p * epsilon });
            }
            export::csv_bytes(&rows)
        }
        Command::Regions(a) => {
            if let Some(m) = a.comparison {
                let mut recs: Vec<RegionRecord> = Vec::new();
                for r in comparison(m, a.eps)? {
                    recs.extend(export::region_records(&r)?);
                }
                return export::csv_bytes(&recs);
            }
            let r = region(a)?;
            match &a.q {
                Some(q) => {
                    let q: Exponent = q.parse()?;
                    let alpha = region_boundary(&r, q)?;
                    export::json_bytes(&serde_json::json!({ "region": r, "q": q, "alpha": alpha }))
                }
                None => export::csv_bytes(&export::region_records(&r)?),
            }
        }
        Command::Run { config } => {
            let s = run_experiment(&ExperimentConfig::load(config)?)?;
            export::json_bytes(&serde_json::json!({
                "output": s.output,
                "manifest_sha256": s.manifest_sha256,
                "stages": s.manifest.stages,
            }))
        }
        Command::Export { kind, from, to } => {
            let kind: ArtifactKind = kind.parse()?;
            export::export(kind, from, to)?;
            Ok(format!("{}\n", to.display()).into_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|bytes| match &cli.out {
        Some(path) => Ok(std::fs::write(path, bytes)?),
        None => {
            use std::io::Write;
            Ok(std::io::stdout().write_all(&bytes)?)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
