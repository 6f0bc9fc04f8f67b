//! Command-line harness: field inspection, classification, sums, Kloosterman
//! scans, bound verification, lemma checks and exponent tables.
//!
//! Exit codes: 0 all gates/assertions passed, 2 assertion failure,
//! 3 budget exceeded, 1 operational error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rsums::bounds;
use rsums::classify::{self, ArtinSchreierOpts, CertifyPOpts};
use rsums::expr;
use rsums::harness::{
    self, Budget, DomainKind, ExperimentConfig, FieldSpec, KappaTableSpec, KloostermanScan,
    LemmaSuiteConfig, RunReport, RunStatus,
};

#[derive(Parser)]
#[command(
    name = "rsums",
    version,
    about = "Exact mixed character sums over finite-field elements with restricted coordinates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassArg {
    /// Q_{d,n}: not an n-th power over the closure
    Q,
    /// R_d: a finite pole of order not divisible by p
    R,
    /// one-sided exclusion from the exceptional set E
    E,
    /// P_d: every shift-difference avoids E
    P,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the tower description: moduli, basis, generator, dlog table
    Field {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        table_cap: Option<u128>,
    },
    /// Classify a rational function
    Classify {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        r: usize,
        /// expression, e.g. "(X^2 + t*X + 2)/(X + 1)"
        #[arg(long)]
        f: String,
        #[arg(long, value_enum)]
        class: ClassArg,
        /// degree bound d (defaults to deg f)
        #[arg(long)]
        d: Option<usize>,
        /// character order for Q
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        deg_h_max: usize,
        #[arg(long, default_value_t = 2)]
        ext_degree: usize,
        /// sample this many shifts instead of all of F_{q^r}* (non-certifying)
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a mixed character sum experiment (config file or inline flags)
    Sum {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        f1: Option<String>,
        #[arg(long)]
        f2: Option<String>,
        #[arg(long, default_value_t = 0)]
        chi_m: u128,
        #[arg(long, default_value = "0")]
        psi_beta: String,
        /// comma-separated digit literals, e.g. "0,2"
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "restricted")]
        domain: DomainArg,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        s: Vec<u32>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_terms: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Kloosterman sums over restricted sets for a range of r
    Kloosterman {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// comma-separated list, e.g. "4,5,6"
        #[arg(long, value_delimiter = ',')]
        r_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,2")]
        digits: Vec<String>,
        /// explicit a coefficient (with --b); otherwise sampled
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value_t = 5)]
        samples: u32,
        #[arg(long, default_value = "1")]
        psi_beta: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        s: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Gate the theorem hypothesis, run the sum, assert ratio thresholds
    VerifyBound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Exceptional-vector counts and the dual-path moment identity
    Lemmas {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Emit the exponent table (s, rho, kappa, tau0, Delta(tau0), gamma)
    Kappa {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        s: Vec<u32>,
        /// explicit rho values
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        /// or a uniform grid of this many points on (0, 1]
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DomainArg {
    Full,
    Restricted,
    Subspace,
    Split,
}

impl From<DomainArg> for DomainKind {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Full => DomainKind::Full,
            DomainArg::Restricted => DomainKind::Restricted,
            DomainArg::Subspace => DomainKind::Subspace,
            DomainArg::Split => DomainKind::Split,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn status_code(status: &RunStatus) -> ExitCode {
    match status {
        RunStatus::Pass => ExitCode::SUCCESS,
        RunStatus::AssertionFailed { .. } => ExitCode::from(2),
        RunStatus::BudgetExceeded { .. } => ExitCode::from(3),
    }
}

fn finish_report(
    report: &RunReport,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<ExitCode> {
    harness::emit(report, csv.as_deref(), json.as_deref())?;
    if csv.is_none() && json.is_none() {
        print!("{}", harness::report_json(report)?);
    }
    eprintln!(
        "status: {} rows: {} wall-clock: {:.1} ms",
        match &report.status {
            RunStatus::Pass => "pass".to_string(),
            RunStatus::AssertionFailed { reason } => format!("ASSERTION FAILED ({reason})"),
            RunStatus::BudgetExceeded { resume } =>
                format!("BUDGET EXCEEDED (resume at run {})", resume.next_run_index),
        },
        report.rows.len(),
        report.wall_clock_ms
    );
    Ok(status_code(&report.status))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Field { p, k, r, table_cap } => {
            let mut spec = FieldSpec::simple(p, k, r);
            spec.table_cap = table_cap;
            let ctx = spec.build()?;
            let basis: Vec<String> = ctx
                .basis()
                .iter()
                .map(|b| expr::format_element(&ctx, b))
                .collect();
            let out = serde_json::json!({
                "p": ctx.p(),
                "k": ctx.k(),
                "r": ctx.r(),
                "q": ctx.q().to_string(),
                "order": ctx.order().to_string(),
                "modulus_q": ctx.modulus_q_coeffs(),
                "modulus_qr_codes": ctx.modulus_qr_codes().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "basis": basis,
                "generator": expr::format_element(&ctx, ctx.generator()),
                "dlog_table": ctx.has_dlog_table(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Classify {
            p,
            k,
            r,
            f,
            class,
            d,
            n,
            deg_h_max,
            ext_degree,
            sample,
            seed,
        } => {
            let ctx = FieldSpec::simple(p, k, r).build()?;
            let func = expr::parse_rational(&ctx, &f)?;
            let d = d.unwrap_or_else(|| func.degree());
            let as_opts = ArtinSchreierOpts {
                deg_h_max,
                ext_degree,
            };
            let out = match class {
                ClassArg::Q => {
                    let v = classify::in_q(&ctx, &func, d, n)?;
                    serde_json::json!({"class": format!("Q({d},{n})"), "verdict": v.verdict})
                }
                ClassArg::R => {
                    let v = classify::in_r(&ctx, &func, d)?;
                    serde_json::json!({"class": format!("R({d})"), "verdict": v.verdict})
                }
                ClassArg::E => {
                    let v = classify::not_in_e_witness(&ctx, &func)?;
                    let solved = if func.is_polynomial(&ctx) {
                        Some(classify::solve_artin_schreier(&ctx, &func, as_opts)?.verdict)
                    } else {
                        None
                    };
                    serde_json::json!({
                        "class": "E",
                        "pole_exclusion": v.verdict,
                        "artin_schreier_search": solved,
                    })
                }
                ClassArg::P => {
                    let report = classify::certify_p(
                        &ctx,
                        &func,
                        d,
                        CertifyPOpts {
                            artin_schreier: as_opts,
                            sample: sample.map(|c| (c, seed)),
                        },
                    )?;
                    serde_json::json!({
                        "class": format!("P({d})"),
                        "verdict": report.verdict,
                        "shifts": report.rows.len(),
                        "uncertified": report.uncertified.iter()
                            .map(|w| expr::format_element(&ctx, w)).collect::<Vec<_>>(),
                        "sampled": report.sampled,
                    })
                }
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sum {
            config,
            p,
            k,
            r,
            f1,
            f2,
            chi_m,
            psi_beta,
            a,
            domain,
            s,
            tau,
            seed,
            max_terms,
            csv,
            json,
        } => {
            let cfg: ExperimentConfig = match config {
                Some(path) => load_json(&path)?,
                None => {
                    let p = p.context("--p required without --config")?;
                    let r = r.context("--r required without --config")?;
                    let mut budget = Budget::default();
                    if let Some(mt) = max_terms {
                        budget.max_terms = mt;
                    }
                    ExperimentConfig {
                        field: FieldSpec::simple(p, k, r),
                        a_set: a,
                        chi_m,
                        psi_beta,
                        f1: f1.context("--f1 required without --config")?,
                        f2: f2.context("--f2 required without --config")?,
                        tau,
                        s_list: s,
                        domain: domain.into(),
                        subspace: None,
                        seed,
                        budget,
                        assert_gate: false,
                        ratio_threshold: None,
                    }
                }
            };
            let report = harness::run_experiment(&cfg)?;
            finish_report(&report, csv, json)
        }
        Cmd::Kloosterman {
            config,
            p,
            k,
            r_list,
            digits,
            a,
            b,
            samples,
            psi_beta,
            seed,
            s,
            csv,
            json,
        } => {
            let scan: KloostermanScan = match config {
                Some(path) => load_json(&path)?,
                None => {
                    anyhow::ensure!(!r_list.is_empty(), "--r-list required without --config");
                    let pairs = match (a, b) {
                        (Some(a), Some(b)) => Some(vec![(a, b)]),
                        (None, None) => None,
                        _ => anyhow::bail!("--a and --b must be given together"),
                    };
                    KloostermanScan {
                        p,
                        k,
                        r_list,
                        digits,
                        pairs,
                        samples,
                        psi_beta,
                        seed,
                        s,
                        budget: Budget::default(),
                        table_cap: None,
                    }
                }
            };
            let report = harness::run_kloosterman_scan(&scan)?;
            finish_report(&report, csv, json)
        }
        Cmd::VerifyBound { config, csv, json } => {
            let mut cfg: ExperimentConfig = load_json(&config)?;
            cfg.assert_gate = true;
            let report = harness::run_experiment(&cfg)?;
            finish_report(&report, csv, json)
        }
        Cmd::Lemmas {
            config,
            p,
            k,
            r,
            json,
        } => {
            let cfg: LemmaSuiteConfig = match config {
                Some(path) => load_json(&path)?,
                None => LemmaSuiteConfig {
                    field: FieldSpec::simple(p, k, r),
                    product_f: "X".into(),
                    product_n: 2,
                    linear_f: "1/X".into(),
                    s_list: vec![1],
                    v: None,
                    budget_tuples: 10_000_000,
                    moment: None,
                },
            };
            let report = harness::run_lemma_suite(&cfg)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match &json {
                Some(p) => std::fs::write(p, &text)?,
                None => print!("{text}"),
            }
            eprintln!("wall-clock: {:.1} ms", report.wall_clock_ms);
            Ok(status_code(&report.status))
        }
        Cmd::Kappa { s, rho, grid, out } => {
            let rho_list = match (rho, grid) {
                (Some(r), _) => r,
                (None, Some(n)) => (1..=n).map(|i| i as f64 / n as f64).collect(),
                (None, None) => vec![bounds::rho_cantor()],
            };
            let table = harness::kappa_table_csv(&KappaTableSpec { s_list: s, rho_list })?;
            match out {
                Some(p) => std::fs::write(p, table)?,
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
