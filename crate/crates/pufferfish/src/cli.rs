// SPDX-License-Identifier: Apache-2.0

//! Command-line surface. `main` parses [`Cli`] and calls [`execute`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{render_report, run_experiment, ExperimentConfig, ReportFormat};
use crate::collapse::collapse_demo;
use crate::composition::{compose_linear_dp, compose_pufferfish, remaining_budget, Ledger, LedgerEntry, Remaining};
use crate::error::{Error, Result};
use crate::influence::{gaussian_ab_curve, markov_ab_curve, markov_chain_ab_curve, AbCurve, GaussianSweep};
use crate::mechanisms::{pufferfish_exponential_topk, pufferfish_laplace, MechanismReceipt, Query, UtilityFunction};
use crate::nfc::{check_nfc, LikelihoodMatrix};
use crate::priors::{PriorDocument, SecretPair};
use crate::rng::seeded;

#[derive(Debug, Parser)]
#[command(name = "pufferfish", version, about = "Composable Pufferfish privacy tools")]
pub struct Cli {
    /// RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file (bench).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format (bench).
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: ReportFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    Laplace,
    Exponential,
    Topk,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an (a,b) influence curve.
    Curve {
        /// Binary chain P(0→1).
        #[arg(long, requires = "q", conflicts_with = "prior")]
        p: Option<f64>,
        /// Binary chain P(1→0).
        #[arg(long, requires = "p")]
        q: Option<f64>,
        /// Prior document (markov or gaussian JSON).
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        b_max: u32,
        /// Gaussian grid width δ.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Run a Pufferfish mechanism on a JSON array of values.
    Mechanize {
        #[arg(long, value_enum)]
        mechanism: MechanismArg,
        /// Curve JSON as written by `curve`.
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        eps_p: f64,
        /// Entries |I| for the fallback branch.
        #[arg(long)]
        entries: u64,
        /// JSON array of numbers: the query values or per-candidate utilities.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Lipschitz constant (Laplace) or utility sensitivity.
        #[arg(long, default_value_t = 1.0)]
        sensitivity: f64,
        /// JSON-lines ledger to check and append to.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Total ε_P cap for the ledger.
        #[arg(long, requires = "ledger")]
        cap: Option<f64>,
    },
    /// Run the synthetic Top-K experiment.
    Bench,
    /// Audit a likelihood matrix.
    NfcCheck {
        #[arg(long)]
        matrix: PathBuf,
        /// Secret pair as `left,right`; repeatable. Defaults to every pair of tags.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long)]
        eps: f64,
    },
    /// Expected runs and certificates for a collapse example.
    CollapseDemo {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Totals for a JSON-lines ledger.
    Budget {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        cap: Option<f64>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
}

/// Writes `text` to `out/name` when an output directory is set, else to `w`.
fn deliver(cli: &Cli, name: &str, text: &str, w: &mut dyn Write) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            writeln!(w, "wrote {}", path.display())?;
        }
        None => w.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn curve_cmd(p: Option<f64>, q: Option<f64>, prior: Option<&Path>, b_max: u32, delta: f64) -> Result<AbCurve> {
    match (p, q, prior) {
        (Some(p), Some(q), None) => markov_ab_curve(p, q, b_max),
        (None, None, Some(path)) => match read_json::<PriorDocument>(path)? {
            doc @ PriorDocument::Markov { .. } => {
                let prior = doc.markov()?;
                crate::influence::check_chain_length(b_max, prior.length())?;
                markov_chain_ab_curve(prior.transition(), b_max)
            }
            doc @ PriorDocument::Gaussian { .. } => {
                let g = doc.gaussian()?;
                let sweep = GaussianSweep::new(delta, b_max as usize);
                gaussian_ab_curve(&g, sweep.delta, sweep.r_grid_step, sweep.mu_grid_points, sweep.b_max)
            }
        },
        _ => Err(Error::validation("give either --p and --q or --prior")),
    }
}

#[allow(clippy::too_many_arguments)]
fn mechanize_cmd(
    mechanism: MechanismArg,
    curve: &Path,
    eps_p: f64,
    entries: u64,
    data: &Path,
    k: usize,
    sensitivity: f64,
    ledger_path: Option<&Path>,
    cap: Option<f64>,
    seed: u64,
) -> Result<MechanismReceipt> {
    let curve: AbCurve = read_json(curve)?;
    let values: Vec<f64> = read_json(data)?;
    let mut ledger = ledger_path.map(Ledger::load).transpose()?;
    if let (Some(l), Some(cap)) = (&ledger, cap) {
        let spent = compose_pufferfish(l);
        match remaining_budget(l, cap)? {
            Remaining::Available(left) if eps_p <= left => {}
            _ => return Err(Error::BudgetExhausted { cap, spent }),
        }
    }
    let mut rng = seeded(seed);
    let n = values.len();
    let receipt = match mechanism {
        MechanismArg::Laplace => {
            let q = Query::new(|v: &[f64]| v.to_vec(), sensitivity, n)?;
            pufferfish_laplace(values.as_slice(), &q, &curve, eps_p, entries, &mut rng)?.1
        }
        MechanismArg::Exponential | MechanismArg::Topk => {
            let k = if mechanism == MechanismArg::Exponential { 1 } else { k };
            let u = UtilityFunction::new(|v: &[f64], r| v[r], sensitivity, (0..n).collect())?;
            pufferfish_exponential_topk(values.as_slice(), &u, k, &curve, eps_p, entries, &mut rng)?.1
        }
    }
    .with_seed(seed);
    if let (Some(l), Some(path)) = (ledger.as_mut(), ledger_path) {
        l.append(path, LedgerEntry::from_receipt(&receipt, None))?;
    }
    Ok(receipt)
}

fn default_pairs(l: &LikelihoodMatrix) -> Vec<SecretPair> {
    let mut tags: Vec<&String> = l.datasets().iter().flat_map(|d| &d.secrets).collect();
    tags.sort();
    tags.dedup();
    let mut pairs = Vec::new();
    for (i, a) in tags.iter().enumerate() {
        for b in &tags[i + 1..] {
            let disjoint = l.datasets().iter().all(|d| !(d.secrets.contains(a) && d.secrets.contains(b)));
            if disjoint {
                pairs.push(SecretPair::tagged(a.as_str(), b.as_str()));
            }
        }
    }
    pairs
}

/// Runs one parsed command, writing human or JSON output to `w`.
pub fn execute(cli: &Cli, w: &mut dyn Write) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Curve { p, q, prior, b_max, delta } => {
            let curve = curve_cmd(*p, *q, prior.as_deref(), *b_max, *delta)?;
            deliver(cli, "curve.json", &(serde_json::to_string(&curve)? + "\n"), w)
        }
        Command::Mechanize { mechanism, curve, eps_p, entries, data, k, sensitivity, ledger, cap } => {
            let r = mechanize_cmd(
                *mechanism,
                curve,
                *eps_p,
                *entries,
                data,
                *k,
                *sensitivity,
                ledger.as_deref(),
                *cap,
                seed,
            )?;
            deliver(cli, "receipt.json", &(serde_json::to_string(&r)? + "\n"), w)
        }
        Command::Bench => {
            let mut cfg = match &cli.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let out_dir = cli.out.clone().or_else(|| cfg.out_dir.clone().map(PathBuf::from));
            let report = run_experiment(&cfg)?;
            let text = render_report(&report, cli.format)?;
            let name = format!("{}.{}", cfg.report_name, cli.format.extension());
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join(&name), text)?;
                    writeln!(w, "wrote {}", dir.join(&name).display())?;
                    Ok(())
                }
                None => Ok(w.write_all(text.as_bytes())?),
            }
        }
        Command::NfcCheck { matrix, pairs, eps } => {
            let l: LikelihoodMatrix = read_json(matrix)?;
            let pairs = if pairs.is_empty() {
                default_pairs(&l)
            } else {
                pairs
                    .iter()
                    .map(|p| match p.split_once(',') {
                        Some((a, b)) => Ok(SecretPair::tagged(a.trim(), b.trim())),
                        None => Err(Error::validation(format!("pair '{p}' must look like left,right"))),
                    })
                    .collect::<Result<_>>()?
            };
            if pairs.is_empty() {
                return Err(Error::validation("no secret pairs to audit"));
            }
            let report = check_nfc(&l, &pairs, *eps)?;
            write!(w, "{}", report.table())?;
            let certs: Vec<_> = report.certificates().cloned().collect();
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "verdict": report.verdict(),
                "eps": report.eps,
                "entries": report.entries,
                "certificates": certs,
            }))? + "\n";
            match &cli.out {
                Some(_) => deliver(cli, "nfc_certificates.json", &json, w),
                None => Ok(()),
            }
        }
        Command::CollapseDemo { example, trials } => {
            let r = collapse_demo(*example, *trials, seed)?;
            if r.runs.censored > 0 {
                eprintln!("warning: {} trials hit the run cap", r.runs.censored);
            }
            deliver(cli, &format!("collapse_example{example}.json"), &(serde_json::to_string_pretty(&r)? + "\n"), w)
        }
        Command::Budget { ledger, cap } => {
            if !ledger.exists() {
                return Err(Error::validation(format!("ledger {} does not exist", ledger.display())));
            }
            let l = Ledger::load(ledger)?;
            let eps: Vec<f64> = l.entries().iter().map(|e| e.eps_p).collect();
            let mut summary = serde_json::json!({
                "entries": eps.len(),
                "linear_total": compose_linear_dp(&eps),
                "pufferfish_total": compose_pufferfish(&l),
            });
            if let Some(cap) = cap {
                summary["cap"] = serde_json::json!(cap);
                summary["remaining"] = match remaining_budget(&l, *cap)? {
                    Remaining::Available(x) => serde_json::json!(x),
                    Remaining::Exhausted => serde_json::json!("exhausted"),
                };
            }
            deliver(cli, "budget.json", &(serde_json::to_string_pretty(&summary)? + "\n"), w)
        }
    }
}
