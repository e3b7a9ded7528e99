use super::config::{ExperimentConfig, ExperimentKind, SweepVar};
use crate::error::{Error, Result};
use crate::protocol::Estimator;

pub const PRESET_NAMES: [&str; 6] = ["fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b"];

/// Codebook sizes plotted against T.
pub const T_GRID: [f64; 10] = [1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 75.0, 100.0];

const PERFECT_CSI_SCHEMES: [&str; 7] = ["proposed", "ao", "rand", "dft", "rps", "scsi", "no_ris"];

const ESTIMATED_CSI_SCHEMES: [&str; 10] = [
    "proposed@ls",
    "proposed@mmse",
    "ao",
    "ao_est",
    "rand@ls",
    "rand@mmse",
    "dft@ls",
    "rps@ls",
    "scsi@ls",
    "no_ris",
];

fn schemes(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn k_r_grid() -> Vec<f64> {
    (-3..=3).map(|k| 10.0 * k as f64).collect()
}

/// Named figure reproduction setups on top of the default scenario.
pub fn figure_preset(name: &str) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::default();
    c.run.ao_iters = 3;
    match name {
        "fig3a" | "fig3b" => {
            c.run.sweep_var = SweepVar::T;
            c.run.sweep_values = T_GRID.to_vec();
        }
        "fig4a" | "fig4b" => {
            c.run.sweep_var = SweepVar::KrDb;
            c.run.sweep_values = k_r_grid();
            c.system.t_words = 50;
            c.channel.k_d_db = f64::INFINITY;
            c.channel.k_g_db = f64::INFINITY;
        }
        "fig5a" => {
            c.kind = ExperimentKind::Theory;
            c.system.m_antennas = 1;
            c.channel.direct_blocked = true;
            c.channel.k_g_db = f64::INFINITY;
            c.run.sweep_var = SweepVar::T;
            c.run.sweep_values = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
            c.run.k_r_list_db = vec![-30.0, 3.0, 30.0];
            return Ok(c);
        }
        "fig5b" => {
            c.kind = ExperimentKind::Complexity;
            c.run.sweep_var = SweepVar::N;
            c.run.sweep_values = (1..=10).map(|k| 20.0 * k as f64).collect();
            c.run.ao_iters = 4;
            c.system.t_words = 50;
            return Ok(c);
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            )));
        }
    }
    if name.ends_with('a') {
        c.run.schemes = schemes(&PERFECT_CSI_SCHEMES);
        c.run.estimator = Estimator::Genie;
    } else {
        c.run.schemes = schemes(&ESTIMATED_CSI_SCHEMES);
        c.run.estimator = Estimator::Ls;
        c.system.p_u_dbm = if name == "fig3b" { 0.0 } else { -20.0 };
    }
    Ok(c)
}
