use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use saw_core::analysis::{
    amplitude_fit, da_scan, scan_csv, scan_summary, series_as_f64, universal_ratios, FitModel, DEFAULT_X_C,
};
use saw_core::flm::{box_counts, enumerate, RunPlan};
use saw_core::modseries::{crt_reconstruct, first_mismatch, overlap_len, read_series, write_series, ModulusSet};
use saw_core::oracle::{count_walks, metric_sums};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const GENERATOR: &str = concat!("sawtm ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "sawtm", version, about = "Exact enumeration and series analysis of square-lattice self-avoiding walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count walks up to 2*wmax+1 steps with the transfer-matrix sweep.
    Enumerate {
        #[arg(long)]
        wmax: usize,
        /// Comma-separated, pairwise coprime moduli.
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        no_prune: bool,
        /// Keep per-modulus residues instead of reconstructing integers.
        #[arg(long)]
        residues: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Brute-force reference counts (and metric sums with --metrics).
    Oracle {
        #[arg(long)]
        nmax: usize,
        /// Also write OUTPUT.r2e, OUTPUT.r2g and OUTPUT.r2m.
        #[arg(long)]
        metrics: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Walks spanning one rectangle, by length.
    Box {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        length: usize,
        /// Longest walk counted (default: width + length + 4).
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Compare two series files on their common range of n.
    Verify { a: PathBuf, b: PathBuf },
    /// Reconstruct integers from residues, either one value or a whole file.
    Crt {
        #[arg(long, value_delimiter = ',', requires = "moduli")]
        residues: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u64>>,
        /// Residue series file to convert.
        #[arg(long, conflicts_with = "residues")]
        input: Option<PathBuf>,
        #[arg(short, long, requires = "input")]
        output: Option<PathBuf>,
    },
    /// Differential-approximant scan for the critical point and exponent.
    Analyze {
        #[arg(long)]
        series: PathBuf,
        /// Approximant order(s) K.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        order: Vec<usize>,
        /// Inhomogeneous degree(s) L; "h" for none.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        inhomog: Vec<String>,
        #[arg(long, default_value_t = 0)]
        min_terms: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the last coefficients to the asymptotic form and track a_0.
    Fit {
        #[arg(long)]
        series: PathBuf,
        /// count, r2e, r2g or r2m.
        #[arg(long, default_value = "count")]
        model: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_X_C)]
        xc: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Metric amplitude ratios and the combination F predicted to vanish.
    Ratios {
        #[arg(long = "A")]
        a: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long = "D")]
        d: f64,
        #[arg(long = "E")]
        e: f64,
    },
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Enumerate { wmax, moduli, workers, no_prune, residues, output } => {
            let moduli = match moduli {
                Some(m) => ModulusSet::new(&m)?,
                None => ModulusSet::default_counts(),
            };
            let plan = RunPlan { w_max: wmax, moduli, workers, prune: !no_prune };
            let started = std::time::Instant::now();
            let result = enumerate(&plan)?;
            let mut series = result.series.with_meta("generator", GENERATOR).with_meta("prune", plan.prune);
            if !residues {
                series = series.to_exact()?;
            }
            write_series(&series, &output)?;
            let peak = result.widths.iter().map(|w| w.stats.max_states).max().unwrap_or(0);
            eprintln!(
                "wrote c_0..c_{} to {} ({:.1?}, at most {peak} states)",
                plan.n_max(),
                output.display(),
                started.elapsed()
            );
        }
        Command::Oracle { nmax, metrics, output } => {
            write_series(&count_walks(nmax).with_meta("generator", GENERATOR), &output)?;
            if metrics {
                let m = metric_sums(nmax);
                for (table, ext) in [(m.end_to_end, "r2e"), (m.gyration, "r2g"), (m.monomer, "r2m")] {
                    let mut path = output.clone().into_os_string();
                    path.push(format!(".{ext}"));
                    write_series(&table.with_meta("generator", GENERATOR), PathBuf::from(path))?;
                }
            }
        }
        Command::Box { width, length, nmax, workers } => {
            let n_max = nmax.unwrap_or(width + length + 4);
            // The plan's n_max is odd; the surplus terms are just not printed.
            let plan = RunPlan { workers, ..RunPlan::new((n_max / 2).max(width)) };
            let counts = box_counts(&plan, width, length)?;
            for (n, c) in counts.iter().enumerate().take(n_max + 1) {
                println!("{n}\t{c}");
            }
        }
        Command::Verify { a, b } => {
            let (ta, tb) = (read_series(&a)?, read_series(&b)?);
            let overlap = overlap_len(&ta, &tb);
            if overlap == 0 {
                bail!("{} and {} have no index in common", a.display(), b.display());
            }
            if let Some((n, x, y)) = first_mismatch(&ta, &tb)? {
                println!("mismatch at n = {n}: {x} != {y}");
                return Ok(ExitCode::from(1));
            }
            println!("{overlap} coefficients agree");
        }
        Command::Crt { residues, moduli, input, output } => {
            if let Some(r) = residues {
                let m = moduli.unwrap_or_default();
                ModulusSet::new(&m)?;
                println!("{}", crt_reconstruct(&r, &m)?);
            } else if let Some(input) = input {
                let exact = read_series(&input)?.to_exact()?;
                match output {
                    Some(out) => write_series(&exact, out)?,
                    None => print!("{}", exact.to_text()),
                }
            } else {
                bail!("give either --residues with --moduli, or --input");
            }
        }
        Command::Analyze { series, order, inhomog, min_terms, output } => {
            let table = read_series(&series)?;
            let mut rows = Vec::new();
            for &k in &order {
                for l in &inhomog {
                    let l = if l == "h" { None } else { Some(l.parse().with_context(|| format!("bad degree {l}"))?) };
                    rows.push(da_scan(&table, k, l, min_terms)?);
                }
            }
            print!("{}", scan_summary(&rows));
            if let Some(out) = output {
                write_text(&out, &scan_csv(&rows))?;
            }
        }
        Command::Fit { series, model, k, m, xc, output } => {
            let Some(fit_model) = FitModel::by_name(&model) else { bail!("unknown model {model}") };
            let coeffs = series_as_f64(&read_series(&series)?)?;
            let fit = amplitude_fit(&coeffs, fit_model, xc, k, m)?;
            match fit.estimate() {
                Some(a) => println!("a0 = {a:.10} (model {model}, k = {k}, m = {m}, last n = {})", coeffs.len() - 1),
                None => println!("a0 undetermined: last window is ill-conditioned"),
            }
            if let Some(out) = output {
                write_text(&out, &fit.to_csv())?;
            }
        }
        Command::Ratios { a, c, d, e } => {
            let r = universal_ratios(a, c, d, e)?;
            println!("D/C = {:.9}", r.d_over_c);
            println!("E/C = {:.9}", r.e_over_c);
            println!("F = {:.9}", r.f);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
