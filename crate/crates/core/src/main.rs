use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use riscb::baselines::scsi_codeword;
use riscb::channels::{LosComponents, RicianFactors};
use riscb::codebooks::{
    build_alphabet, dft_codebook, env_aware_codebook, random_codebook, rps_vector,
    write_codebook_csv, CodebookHeader, CodebookScheme, DedupPolicy,
};
use riscb::harness::{figure_preset, run_experiment, ExperimentConfig, ExperimentKind, SweepVar};
use riscb::numeric::{stream_rng, StreamKind};
use riscb::{Error, Result};

#[derive(Parser)]
#[command(name = "riscb", version, about = "RIS codebook link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named figure preset.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Bound versus Monte Carlo received power (single antenna, direct link blocked).
    Theory {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
        t_grid: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-30,3,30"
        )]
        kr_list: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Real-multiplication counts over a grid of RIS sizes.
    Complexity {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "20,40,60,80,100,120,140,160,180,200"
        )]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        a: u32,
        #[arg(long, default_value_t = 4)]
        n_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump a codebook for the default scene as alphabet indices.
    Codebook {
        #[arg(long, default_value = "proposed")]
        scheme: String,
        #[arg(long, default_value_t = 50)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        bits: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            run_experiment(&cfg)?.write_csv(&out)
        }
        Command::Preset {
            name,
            out,
            trials,
            seed,
        } => {
            let mut cfg = figure_preset(&name)?;
            if let Some(t) = trials {
                cfg.run.trials = t;
            }
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            run_experiment(&cfg)?.write_csv(&out)
        }
        Command::Theory {
            n,
            t_grid,
            kr_list,
            trials,
            seed,
            out,
        } => {
            let mut cfg = figure_preset("fig5a")?;
            cfg.system.n_elements = n;
            cfg.run.sweep_values = t_grid.iter().map(|&t| t as f64).collect();
            cfg.run.k_r_list_db = kr_list;
            cfg.run.trials = trials;
            cfg.run.seed = seed;
            run_experiment(&cfg)?.write_csv(&out)
        }
        Command::Complexity {
            m,
            n_grid,
            t,
            a,
            n_iter,
            out,
        } => {
            let mut cfg = ExperimentConfig {
                kind: ExperimentKind::Complexity,
                ..Default::default()
            };
            cfg.system.m_antennas = m;
            cfg.system.t_words = t;
            cfg.system.bits = a;
            cfg.run.ao_iters = n_iter;
            cfg.run.sweep_var = SweepVar::N;
            cfg.run.sweep_values = n_grid.iter().map(|&n| n as f64).collect();
            run_experiment(&cfg)?.write_csv(&out)
        }
        Command::Codebook {
            scheme,
            t,
            n,
            m,
            bits,
            seed,
            out,
        } => dump_codebook(&scheme, t, n, m, bits, seed, &out),
    }
}

fn dump_codebook(
    scheme: &str,
    t: usize,
    n: usize,
    m: usize,
    bits: u32,
    seed: u64,
    out: &std::path::Path,
) -> Result<()> {
    let scheme = CodebookScheme::from_label(scheme)
        .ok_or_else(|| Error::Config(format!("unknown codebook scheme '{scheme}'")))?;
    let cfg = ExperimentConfig::default();
    let alphabet = build_alphabet(bits)?;
    let los = LosComponents::from_geometry(&cfg.geometry, m, n)?;
    let k: RicianFactors = cfg.channel.factors();
    let mut rng = stream_rng(seed, StreamKind::Codebook, 0, 0);
    let words: Vec<Vec<usize>> = match scheme {
        CodebookScheme::EnvironmentAware => {
            env_aware_codebook(&los, &k, t, 0, &alphabet, DedupPolicy::default(), &mut rng)?
                .words()
                .iter()
                .map(|w| w.0.iter().map(|&i| i as usize).collect())
                .collect()
        }
        CodebookScheme::Random => {
            random_codebook(t, n, &alphabet, DedupPolicy::default(), &mut rng)?
                .words()
                .iter()
                .map(|w| w.0.iter().map(|&i| i as usize).collect())
                .collect()
        }
        CodebookScheme::Rps => vec![rps_vector(n, &alphabet, &mut rng)
            .0
            .iter()
            .map(|&i| i as usize)
            .collect()],
        CodebookScheme::Scsi => {
            vec![scsi_codeword(&los, &alphabet)
                .0
                .iter()
                .map(|&i| i as usize)
                .collect()]
        }
        CodebookScheme::Dft => {
            // DFT phases are N-th roots of unity: entry index k means exp(j 2 pi k / N)
            dft_codebook(t, n)?;
            let header = CodebookHeader {
                scheme: scheme.label().to_string(),
                bits: 0,
                levels: n,
                n_elements: n,
                t_words: t,
                seed,
            };
            let words: Vec<Vec<usize>> = (0..t)
                .map(|w| (0..n).map(|e| (w * e) % n).collect())
                .collect();
            return write_codebook_csv(out, &header, &words);
        }
    };
    let header = CodebookHeader {
        scheme: scheme.label().to_string(),
        bits,
        levels: alphabet.len(),
        n_elements: n,
        t_words: words.len(),
        seed,
    };
    write_codebook_csv(out, &header, &words)
}
