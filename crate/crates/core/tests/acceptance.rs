//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Failures are reported, never hidden. The process exits 0 after printing
//! every verdict unless `ACCEPTANCE_STRICT=1` is set, in which case any FAIL
//! makes the exit status 1. Known failures and their causes are listed in
//! the README.

use std::time::Instant;

use riscb::baselines::{ao_optimize, complexity_model, AoConfig};
use riscb::channels::{ChannelRealization, ChannelStats, LosComponents};
use riscb::codebooks::{build_alphabet, env_aware_codebook, random_codebook, DedupPolicy};
use riscb::estimation::{
    ls_estimate, mmse_estimate, sample_covariances, uplink_receive, PilotConfig,
};
use riscb::geometry::link_gains;
use riscb::harness::{
    figure_preset, mean_and_se, run_experiment, run_rates_detailed, run_theory, ExperimentConfig,
    PointOutcome,
};
use riscb::numeric::{
    complex_gaussian_vec, db_to_linear, dbm_to_watts, norm_sqr, stream_rng, CMat, StreamKind,
};
use riscb::protocol::{run_coherence_block, EstimatorChoice, LinkBudget};
use riscb::theory::{mc_power_curve, TheoryParams, TheoryScene};

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, pass: bool, detail: String) -> Verdict {
    println!(
        "criterion {id:>2}: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Verdict { id, pass, detail }
}

fn point<'a>(points: &'a [PointOutcome], scheme: &str, value: f64) -> &'a PointOutcome {
    points
        .iter()
        .find(|p| p.scheme == scheme && p.sweep_value == value)
        .unwrap_or_else(|| panic!("no outcome for {scheme} at {value}"))
}

fn stats_of(p: &PointOutcome) -> (f64, f64) {
    mean_and_se(&p.realized)
}

fn pooled(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

fn theory_params(cfg: &ExperimentConfig, n: usize, t: usize, k_r_db: f64) -> TheoryParams {
    let gains = link_gains(&cfg.geometry, &cfg.path_loss).unwrap();
    TheoryParams {
        p_d: cfg.system.p_d(),
        beta_r: gains.beta_r,
        beta_g: gains.beta_g,
        n_elements: n,
        t_words: t,
        k_r: db_to_linear(k_r_db),
    }
}

fn bound_dominance() -> Verdict {
    let cfg = figure_preset("fig5a").unwrap();
    let start = Instant::now();
    let rows = run_theory(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| r.simulated_power > 1.02 * r.bound_power)
        .map(|r| {
            format!(
                "K_r={} dB T={}: mc/bound={:.3}",
                r.k_r_db,
                r.t,
                r.simulated_power / r.bound_power
            )
        })
        .collect();
    let pass = violations.is_empty() && secs < 120.0;
    report(
        1,
        pass,
        format!(
            "{} grid points, {} above bound x1.02 [{}], runtime {secs:.1} s (limit 120 s)",
            rows.len(),
            violations.len(),
            violations.join("; ")
        ),
    )
}

fn quadratic_scaling() -> Verdict {
    let cfg = ExperimentConfig::default();
    let alphabet = build_alphabet(1).unwrap();
    let t = cfg.system.t_words;
    let power = |n: usize| {
        let scene = TheoryScene::from_geometry(&cfg.geometry, n, alphabet.clone()).unwrap();
        mc_power_curve(&theory_params(&cfg, n, t, 30.0), &scene, &[t], 2000, 42).unwrap()[0]
    };
    let ratio = power(200) / power(100);
    report(
        2,
        (3.6..=4.4).contains(&ratio),
        format!("P(N=200)/P(N=100) = {ratio:.4} at K_r = 30 dB, T = {t} (want [3.6, 4.4])"),
    )
}

fn log_t_scaling() -> Verdict {
    let cfg = ExperimentConfig::default();
    let n = cfg.system.n_elements;
    let scene = TheoryScene::from_geometry(&cfg.geometry, n, build_alphabet(1).unwrap()).unwrap();
    let t_grid: Vec<usize> = (0..8).map(|k| 1 << k).collect();
    let p = mc_power_curve(&theory_params(&cfg, n, 1, -30.0), &scene, &t_grid, 1000, 42).unwrap();
    let x: Vec<f64> = t_grid.iter().map(|&t| (t as f64).log2()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, p.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&p).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = p.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    report(
        3,
        r2 >= 0.95,
        format!("R^2 of mean power against log2 T over T = 1..128 at K_r = -30 dB: {r2:.4} (want >= 0.95)"),
    )
}

fn scheme_ordering(points: &[PointOutcome]) -> Verdict {
    let (p, p_se) = stats_of(point(points, "proposed", 50.0));
    let mut ok = true;
    let mut parts = Vec::new();
    for other in ["rand", "dft", "rps", "no_ris"] {
        let (o, o_se) = stats_of(point(points, other, 50.0));
        let gap = (p - o) / pooled(p_se, o_se);
        ok &= gap >= 3.0;
        parts.push(format!("proposed-{other} = {:+.4} ({gap:+.1} SE)", p - o));
    }
    let (a, a_se) = stats_of(point(points, "ao", 50.0));
    ok &= a >= p;
    parts.push(format!(
        "ao-proposed = {:+.4} ({:+.1} SE)",
        a - p,
        (a - p) / pooled(a_se, p_se)
    ));
    report(
        4,
        ok,
        format!(
            "fig3a T = 50: proposed {p:.4}; {} (strict gaps need >= 3 SE)",
            parts.join(", ")
        ),
    )
}

fn t_monotonicity(points: &[PointOutcome], t_grid: &[f64]) -> Verdict {
    let curves: Vec<&PointOutcome> = t_grid
        .iter()
        .map(|&t| point(points, "proposed", t))
        .collect();
    let trials = curves[0].realized.len();
    let bad_trials = (0..trials)
        .filter(|&i| {
            curves
                .windows(2)
                .any(|w| w[1].realized[i] < w[0].realized[i])
        })
        .count();
    let means: Vec<f64> = curves.iter().map(|c| stats_of(c).0).collect();
    let means_ok = means.windows(2).all(|w| w[1] >= w[0]);
    report(
        5,
        bad_trials == 0 && means_ok,
        format!(
            "{bad_trials} of {trials} trials decrease along T; mean curve non-decreasing: {means_ok}"
        ),
    )
}

fn k_r_sensitivity() -> Verdict {
    let points = run_rates_detailed(&figure_preset("fig4a").unwrap()).unwrap();
    let change = |s: &str| {
        let (lo, lo_se) = stats_of(point(&points, s, -30.0));
        let (hi, hi_se) = stats_of(point(&points, s, 30.0));
        (hi - lo, (hi - lo) / pooled(lo_se, hi_se))
    };
    let (dp, zp) = change("proposed");
    let (dr, zr) = change("rps");
    let (dc, zc) = change("rand");
    report(
        6,
        zp >= 3.0 && zr.abs() < 3.0 && zc.abs() < 3.0,
        format!(
            "rate(30 dB) - rate(-30 dB): proposed {dp:+.4} ({zp:+.1} SE, want >= 3), rps {dr:+.4} ({zr:+.1} SE), rand {dc:+.4} ({zc:+.1} SE) (want |.| < 3)"
        ),
    )
}

fn imperfect_csi() -> Verdict {
    let cfg = figure_preset("fig4b").unwrap();
    let points = run_rates_detailed(&cfg).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for &k in &cfg.run.sweep_values {
        let (p, p_se) = stats_of(point(&points, "proposed@ls", k));
        let (a, a_se) = stats_of(point(&points, "ao_est", k));
        let z = (p - a) / pooled(p_se, a_se);
        ok &= z >= -1.0;
        parts.push(format!("{k} dB: {:+.4} ({z:+.1} SE)", p - a));
    }
    report(
        7,
        ok,
        format!(
            "fig4b proposed@ls - ao_est per K_r (want >= -1 SE everywhere): {}",
            parts.join(", ")
        ),
    )
}

fn estimator_quality() -> Verdict {
    let cfg = ExperimentConfig::default();
    let los =
        LosComponents::from_geometry(&cfg.geometry, cfg.system.m_antennas, cfg.system.n_elements)
            .unwrap();
    let stats = ChannelStats {
        los,
        gains: link_gains(&cfg.geometry, &cfg.path_loss).unwrap(),
        k: cfg.channel.factors(),
    };
    let alphabet = build_alphabet(1).unwrap();
    let words = env_aware_codebook(
        &stats.los,
        &stats.k,
        10,
        0,
        &alphabet,
        DedupPolicy::default(),
        &mut stream_rng(42, StreamKind::Codebook, 0, 0),
    )
    .unwrap()
    .phasors();
    let covs = sample_covariances(
        &words,
        &stats,
        10_000,
        &mut stream_rng(42, StreamKind::Covariance, 0, 0),
    )
    .unwrap();
    let trials = 10_000u32;
    let mut ok = true;
    let mut parts = Vec::new();
    for p_u_dbm in [-30.0, -20.0, -10.0, 0.0] {
        let pilot = PilotConfig::new(dbm_to_watts(p_u_dbm), cfg.system.sigma2_u()).unwrap();
        let (mut e_ls, mut e_mmse) = (0.0, 0.0);
        for i in 0..trials {
            let ch = stats.draw(&mut stream_rng(42, StreamKind::Channel, 0, i));
            let k = i as usize % words.len();
            let h = ch.composite(&words[k]).unwrap();
            let y = uplink_receive(&h, &pilot, &mut stream_rng(42, StreamKind::Pilot, 0, i));
            let ls = ls_estimate(&y, &pilot);
            let mmse = mmse_estimate(&ls, &covs[k], &pilot).unwrap();
            e_ls += norm_sqr(&(&ls - &h));
            e_mmse += norm_sqr(&(&mmse - &h));
        }
        ok &= e_mmse <= e_ls;
        parts.push(format!("{p_u_dbm} dBm: MMSE/LS = {:.4}", e_mmse / e_ls));
    }
    report(
        8,
        ok,
        format!("MSE ratio over 10^4 trials: {}", parts.join(", ")),
    )
}

fn small_instance_oracle() -> Verdict {
    let (m, n) = (2, 4);
    let alphabet = build_alphabet(1).unwrap();
    let words = random_codebook(
        16,
        n,
        &alphabet,
        DedupPolicy::default(),
        &mut stream_rng(9, StreamKind::Codebook, 0, 0),
    )
    .unwrap()
    .phasors();
    let budget = LinkBudget::new(1.0, 0.01).unwrap();
    let pilot = PilotConfig::new(1.0, 0.0).unwrap();
    let trials = 500u32;
    let mut exact = 0;
    let mut worst = 0.0f64;
    for i in 0..trials {
        let mut rng = stream_rng(9, StreamKind::Channel, 0, i);
        let h_d = complex_gaussian_vec(m, &mut rng);
        let h_r = complex_gaussian_vec(n, &mut rng);
        let g = CMat::from_iterator(n, m, complex_gaussian_vec(n * m, &mut rng).iter().copied());
        let ch = ChannelRealization::new(h_d, h_r, g).unwrap();
        let got = run_coherence_block(
            &ch,
            &words,
            &budget,
            &pilot,
            EstimatorChoice::Ls,
            &mut stream_rng(9, StreamKind::Pilot, 0, i),
            "proposed",
        )
        .unwrap()
        .realized_rate;
        let brute = words
            .iter()
            .map(|w| (1.0 + budget.snr_scale() * norm_sqr(&ch.composite(w).unwrap())).log2())
            .fold(f64::NEG_INFINITY, f64::max);
        let rel = (got - brute).abs() / brute.abs();
        worst = worst.max(rel);
        if rel <= 1e-12 {
            exact += 1;
        }
    }
    report(
        9,
        exact == trials,
        format!("{exact}/{trials} trials match the exhaustive optimum over all 16 words (worst relative gap {worst:.2e})"),
    )
}

fn complexity_figures() -> Verdict {
    let r = complexity_model(8, 100, 50, 1, 4).unwrap();
    let got = [
        r.ao_estimation,
        r.ao_optimization,
        r.proposed_estimation,
        r.proposed_optimization,
    ];
    report(
        10,
        got == [1616, 13728, 1600, 2800],
        format!("M=8 N=100 T=50 a=1 n_iter=4 -> {got:?} (want [1616, 13728, 1600, 2800])"),
    )
}

fn ao_monotonicity() -> Verdict {
    let cfg = ExperimentConfig::default();
    let stats = ChannelStats {
        los: LosComponents::from_geometry(&cfg.geometry, 8, 100).unwrap(),
        gains: link_gains(&cfg.geometry, &cfg.path_loss).unwrap(),
        k: cfg.channel.factors(),
    };
    let budget = LinkBudget::new(cfg.system.p_d(), cfg.system.sigma2_d()).unwrap();
    let ao = AoConfig::discrete(3, build_alphabet(1).unwrap());
    let trials = 1000u32;
    let monotone = (0..trials)
        .filter(|&i| {
            let ch = stats.draw(&mut stream_rng(11, StreamKind::Channel, 0, i));
            let out = ao_optimize(&ch.h_d, &ch.d_cascade, &ao, &budget).unwrap();
            out.objective_history.windows(2).all(|w| w[1] >= w[0])
        })
        .count() as u32;
    report(
        11,
        monotone == trials,
        format!("objective non-decreasing in {monotone}/{trials} trials"),
    )
}

fn determinism(first: &ExperimentConfig) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_experiment(first).unwrap().write_csv(&a).unwrap();
    run_experiment(first).unwrap().write_csv(&b).unwrap();
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    report(
        12,
        x == y && !x.is_empty(),
        format!(
            "two fig3a runs with seed {}: {} and {} bytes, identical: {}",
            first.run.seed,
            x.len(),
            y.len(),
            x == y
        ),
    )
}

fn main() {
    let fig3a = figure_preset("fig3a").unwrap();
    let fig3a_points = run_rates_detailed(&fig3a).unwrap();

    let verdicts = vec![
        bound_dominance(),
        quadratic_scaling(),
        log_t_scaling(),
        scheme_ordering(&fig3a_points),
        t_monotonicity(&fig3a_points, &fig3a.run.sweep_values),
        k_r_sensitivity(),
        imperfect_csi(),
        estimator_quality(),
        small_instance_oracle(),
        complexity_figures(),
        ao_monotonicity(),
        determinism(&fig3a),
    ];

    let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.pass).collect();
    println!(
        "acceptance: {}/{} criteria pass",
        verdicts.len() - failed.len(),
        verdicts.len()
    );
    for v in &failed {
        eprintln!("failed criterion {}: {}", v.id, v.detail);
    }
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
