//! Comparison schemes: alternating optimization with full cascaded CSI,
//! the DFT-pattern cascaded channel estimator it relies on under imperfect
//! CSI, the single-word statistical-CSI scheme, plain MISO without an RIS,
//! and the real-multiplication complexity model.

use std::f64::consts::TAU;

use rand::Rng;

use crate::channels::{composite, LosComponents};
use crate::codebooks::{PhaseAlphabet, RcVector};
use crate::error::{Error, Result};
use crate::estimation::{ls_estimate, uplink_receive, PilotConfig};
use crate::numeric::{norm_sqr, CMat, CVec, C64};
use crate::protocol::LinkBudget;

#[derive(Debug, Clone, PartialEq)]
pub enum AoPhases {
    Discrete(PhaseAlphabet),
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoConfig {
    pub n_iter: usize,
    pub phases: AoPhases,
    /// Starting RC vector; all-zero phases when `None`.
    pub init_rc: Option<Vec<C64>>,
}

impl AoConfig {
    pub fn discrete(n_iter: usize, alphabet: PhaseAlphabet) -> Self {
        Self {
            n_iter,
            phases: AoPhases::Discrete(alphabet),
            init_rc: None,
        }
    }

    pub fn continuous(n_iter: usize) -> Self {
        Self {
            n_iter,
            phases: AoPhases::Continuous,
            init_rc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoOutcome {
    pub w: CVec,
    pub rc: Vec<C64>,
    /// `log2(1 + p_d |h^H w|^2 / sigma2_d)` on the channel AO was given.
    pub rate: f64,
    /// `|h^H w|^2` at the start and after each iteration.
    pub objective_history: Vec<f64>,
}

/// Common rotations of the relaxed solution tried when quantizing it.
const ROTATIONS_PER_LEVEL: usize = 4;

/// Alternating optimization of the BS beamformer and RIS phases.
///
/// A round (i) sets `w` to MRT on the composite channel of the current RC
/// vector, then (ii) with `w` fixed forms the direct term `a = h_d^H w` and
/// the per-element reflected terms `c_n = (D w)_n` and rotates every
/// `phi_n c_n` onto `a`. The continuous stage runs `n_iter` such rounds.
/// For discrete phases the best quantization of its result under a few
/// common rotations seeds a second stage of
/// `n_iter` rounds in which the aligned phases are quantized and then
/// refined element by element over the alphabet against `||h||^2`.
///
/// A round's RC vector is kept only if its MRT objective `||h||^2` is not
/// worse, so the recorded history is non-decreasing.
pub fn ao_optimize(
    h_d: &CVec,
    d_cascade: &CMat,
    cfg: &AoConfig,
    budget: &LinkBudget,
) -> Result<AoOutcome> {
    let (n, m) = d_cascade.shape();
    if h_d.len() != m {
        return Err(Error::Dimension(format!(
            "AO: D is {n}x{m} but h_d has {}",
            h_d.len()
        )));
    }
    if cfg.n_iter == 0 {
        return Err(Error::Domain("AO needs at least one iteration".into()));
    }
    let init = match &cfg.init_rc {
        Some(rc) if rc.len() == n => rc.clone(),
        Some(rc) => {
            return Err(Error::Dimension(format!(
                "AO init has {} entries, N = {n}",
                rc.len()
            )))
        }
        None => vec![C64::new(1.0, 0.0); n],
    };
    let mut state = AoState::new(h_d, d_cascade, init)?;
    for _ in 0..cfg.n_iter {
        let rc = state.aligned_phases().collect();
        state.offer(rc)?;
    }
    if let AoPhases::Discrete(alphabet) = &cfg.phases {
        let relaxed = state.rc.clone();
        let start = match &cfg.init_rc {
            Some(rc) => rc
                .iter()
                .map(|z| alphabet.value(alphabet.nearest(z.arg())))
                .collect(),
            None => vec![alphabet.value(0); n],
        };
        state = AoState::new(h_d, d_cascade, start)?;
        let rotations = ROTATIONS_PER_LEVEL * alphabet.len();
        for i in 0..rotations {
            let rot = C64::from_polar(1.0, TAU * i as f64 / rotations as f64);
            let cand = relaxed
                .iter()
                .map(|z| alphabet.value(alphabet.nearest((z * rot).arg())))
                .collect();
            state.offer(cand)?;
        }
        state.history = vec![state.objective];
        for _ in 0..cfg.n_iter {
            let rc = state
                .aligned_phases()
                .map(|z| alphabet.value(alphabet.nearest(z.arg())))
                .collect();
            let rc = coordinate_pass(h_d, d_cascade, rc, alphabet)?;
            state.offer(rc)?;
        }
    }
    let w = state.h.unscale(state.objective.sqrt());
    Ok(AoOutcome {
        rate: (1.0 + budget.snr_scale() * state.objective).log2(),
        w,
        rc: state.rc,
        objective_history: state.history,
    })
}

struct AoState<'a> {
    h_d: &'a CVec,
    d: &'a CMat,
    rc: Vec<C64>,
    h: CVec,
    objective: f64,
    history: Vec<f64>,
}

impl<'a> AoState<'a> {
    fn new(h_d: &'a CVec, d: &'a CMat, rc: Vec<C64>) -> Result<Self> {
        let h = composite(h_d, d, &rc)?;
        let objective = norm_sqr(&h);
        if !(objective > 0.0) {
            return Err(Error::DegenerateEstimate);
        }
        Ok(Self {
            h_d,
            d,
            rc,
            h,
            objective,
            history: vec![objective],
        })
    }

    /// Continuous phases aligning each reflected term with the direct term
    /// under MRT on the current channel.
    fn aligned_phases(&self) -> impl Iterator<Item = C64> + '_ {
        let w = self.h.unscale(self.objective.sqrt());
        let direct: C64 = self
            .h_d
            .iter()
            .zip(w.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let reference = if direct.norm() > 0.0 {
            direct.arg()
        } else {
            0.0
        };
        let terms = self.d * w;
        (0..terms.len()).map(move |i| C64::from_polar(1.0, reference - terms[i].arg()))
    }

    fn offer(&mut self, rc: Vec<C64>) -> Result<()> {
        let h = composite(self.h_d, self.d, &rc)?;
        let objective = norm_sqr(&h);
        if objective >= self.objective {
            self.rc = rc;
            self.h = h;
            self.objective = objective;
        }
        self.history.push(self.objective);
        Ok(())
    }
}

/// Element-wise passes, each element set to the alphabet value maximizing
/// `||h||^2` with the others held, until a pass changes nothing.
fn coordinate_pass(
    h_d: &CVec,
    d: &CMat,
    mut rc: Vec<C64>,
    alphabet: &PhaseAlphabet,
) -> Result<Vec<C64>> {
    let mut h = composite(h_d, d, &rc)?;
    let mut changed = true;
    while changed {
        changed = false;
        for n in 0..rc.len() {
            let row = d.row(n).transpose().map(|z| z.conj());
            let rest = &h - &row * rc[n].conj();
            let mut best = norm_sqr(&h);
            for v in alphabet.values() {
                let cand = &rest + &row * v.conj();
                let val = norm_sqr(&cand);
                if val > best {
                    best = val;
                    rc[n] = *v;
                    h = cand;
                    changed = true;
                }
            }
        }
    }
    Ok(rc)
}

/// Training patterns for cascaded estimation over `N + 1` slots: slot `t`
/// sets element `n` (1-based) to `exp(j 2 pi t n / (N + 1))`, i.e. columns
/// 1..=N of the (N+1)-point DFT matrix. Returned as (N+1) x N.
pub fn dft_training_patterns(n_elements: usize) -> CMat {
    let slots = n_elements + 1;
    CMat::from_fn(slots, n_elements, |t, n| {
        let k = (t * (n + 1)) % slots;
        C64::from_polar(1.0, TAU * k as f64 / slots as f64)
    })
}

/// LS estimator of `(h_d, D)` from per-slot pilots under fixed RC patterns.
///
/// Slot `t` observes `sqrt(p_u) x (h_d + D^H conj(phi_t)) + n`. Stacking
/// the unknowns per antenna as `u = [h_d[m]; conj(D[:, m])]` gives
/// `z_t = v_t^T u + e` with `v_t = [1, conj(phi_t)]`, so the per-slot LS
/// estimates are inverted through the (N+1) x (N+1) pattern matrix `V`.
#[derive(Debug, Clone)]
pub struct CascadedEstimator {
    patterns: CMat,
    v_inv: CMat,
}

impl CascadedEstimator {
    pub fn new(rc_patterns: CMat) -> Result<Self> {
        let (slots, n) = rc_patterns.shape();
        if slots != n + 1 {
            return Err(Error::Config(format!(
                "cascaded estimation needs N + 1 = {} slots, patterns have {slots}",
                n + 1
            )));
        }
        let mut v = CMat::from_element(slots, slots, C64::new(1.0, 0.0));
        v.view_mut((0, 1), (slots, n))
            .copy_from(&rc_patterns.map(|z| z.conj()));
        let v_inv = v
            .try_inverse()
            .ok_or_else(|| Error::Config("training pattern matrix is singular".into()))?;
        Ok(Self {
            patterns: rc_patterns,
            v_inv,
        })
    }

    pub fn dft(n_elements: usize) -> Self {
        Self::new(dft_training_patterns(n_elements)).expect("DFT patterns are unitary up to scale")
    }

    pub fn patterns(&self) -> &CMat {
        &self.patterns
    }

    pub fn slots(&self) -> usize {
        self.patterns.nrows()
    }

    /// Pilot observations for every training slot, in slot order.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        h_d: &CVec,
        d_cascade: &CMat,
        pilot: &PilotConfig,
        rng: &mut R,
    ) -> Result<Vec<CVec>> {
        (0..self.slots())
            .map(|t| {
                let rc: Vec<C64> = self.patterns.row(t).iter().copied().collect();
                let h = composite(h_d, d_cascade, &rc)?;
                Ok(uplink_receive(&h, pilot, rng))
            })
            .collect()
    }

    pub fn estimate(&self, observations: &[CVec], pilot: &PilotConfig) -> Result<(CVec, CMat)> {
        if observations.len() != self.slots() {
            return Err(Error::Dimension(format!(
                "{} observations for {} slots",
                observations.len(),
                self.slots()
            )));
        }
        let m = observations[0].len();
        let mut z = CMat::zeros(self.slots(), m);
        for (t, y) in observations.iter().enumerate() {
            if y.len() != m {
                return Err(Error::Dimension("observations differ in length".into()));
            }
            z.set_row(t, &ls_estimate(y, pilot).transpose());
        }
        let u = &self.v_inv * z;
        let h_d = u.row(0).transpose();
        let d = u.rows(1, self.slots() - 1).map(|v| v.conj());
        Ok((h_d, d))
    }
}

pub fn cascaded_ls_estimation(
    observations: &[CVec],
    rc_patterns: &CMat,
    pilot: &PilotConfig,
) -> Result<(CVec, CMat)> {
    CascadedEstimator::new(rc_patterns.clone())?.estimate(observations, pilot)
}

/// Single statistical-CSI word without a reference antenna: the BS
/// dimension is collapsed by the LoS matched product, so
/// `psi_n = arg(h_r[n]) - arg(sum_m g[n, m] conj(h_d[m]))`.
/// With the direct link blocked the BS dimension is summed with unit weights.
pub fn scsi_codeword(los: &LosComponents, alphabet: &PhaseAlphabet) -> RcVector {
    let m = los.m_antennas();
    let idx = (0..los.n_elements())
        .map(|n| {
            let collapsed: C64 = (0..m)
                .map(|j| {
                    let w = los.h_d.as_ref().map_or(C64::new(1.0, 0.0), |h| h[j].conj());
                    los.g[(n, j)] * w
                })
                .sum();
            alphabet.nearest(los.h_r[n].arg() - collapsed.arg())
        })
        .collect();
    RcVector(idx)
}

/// MRT on the direct link alone.
pub fn no_ris_rate(h_d: &CVec, budget: &LinkBudget) -> f64 {
    (1.0 + budget.snr_scale() * norm_sqr(h_d)).log2()
}

/// Real-multiplication counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub ao_estimation: u64,
    pub ao_optimization: u64,
    pub proposed_estimation: u64,
    pub proposed_optimization: u64,
}

/// AO: `2M(N+1)` for estimation and `N_iter (2^a N + 4MN + 4M)` for the
/// joint optimization. Proposed: `4MT` and `(6M + 8) T`.
pub fn complexity_model(
    m: u64,
    n: u64,
    t: u64,
    a_bits: u32,
    n_iter: u64,
) -> Result<ComplexityReport> {
    if m == 0 || n == 0 || t == 0 || a_bits == 0 || n_iter == 0 {
        return Err(Error::Domain("complexity inputs must be positive".into()));
    }
    let levels = 1u64
        .checked_shl(a_bits)
        .filter(|_| a_bits < 64)
        .ok_or_else(|| Error::Domain(format!("a = {a_bits} bits overflows")))?;
    let overflow = || Error::Domain("complexity count overflows u64".into());
    let per_iter = levels
        .checked_mul(n)
        .and_then(|x| x.checked_add(4 * m * n))
        .and_then(|x| x.checked_add(4 * m))
        .ok_or_else(overflow)?;
    Ok(ComplexityReport {
        ao_estimation: 2 * m * (n + 1),
        ao_optimization: n_iter.checked_mul(per_iter).ok_or_else(overflow)?,
        proposed_estimation: 4 * m * t,
        proposed_optimization: (6 * m + 8) * t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebooks::build_alphabet;
    use crate::geometry::SystemGeometry;
    use crate::numeric::{complex_gaussian, complex_gaussian_vec, stream_rng, StreamKind};
    use std::f64::consts::PI;

    fn budget() -> LinkBudget {
        LinkBudget::new(1.0, 1.0).unwrap()
    }

    fn exhaustive_best(h_d: &CVec, d: &CMat, alphabet: &PhaseAlphabet) -> f64 {
        let n = d.nrows();
        let levels = alphabet.len();
        let mut best = 0.0f64;
        let total = levels.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let rc: Vec<C64> = (0..n)
                .map(|_| {
                    let k = c % levels;
                    c /= levels;
                    alphabet.values()[k]
                })
                .collect();
            best = best.max(norm_sqr(&composite(h_d, d, &rc).unwrap()));
        }
        best
    }

    #[test]
    fn ao_single_element_matches_exhaustive() {
        let a = build_alphabet(1).unwrap();
        let mut rng = stream_rng(1, StreamKind::Misc, 0, 0);
        for _ in 0..200 {
            let h_d = complex_gaussian_vec(1, &mut rng);
            let d = CMat::from_fn(1, 1, |_, _| complex_gaussian(&mut rng));
            let out = ao_optimize(&h_d, &d, &AoConfig::discrete(3, a.clone()), &budget()).unwrap();
            let best = exhaustive_best(&h_d, &d, &a);
            assert!((out.objective_history.last().unwrap() - best).abs() <= 1e-12 * best);
        }
    }

    #[test]
    fn ao_small_instances_mostly_optimal() {
        let a = build_alphabet(1).unwrap();
        let mut rng = stream_rng(2, StreamKind::Misc, 0, 0);
        let trials = 1000;
        let mut hits = 0;
        for _ in 0..trials {
            let h_d = complex_gaussian_vec(2, &mut rng);
            let d = CMat::from_fn(4, 2, |_, _| complex_gaussian(&mut rng));
            let out = ao_optimize(&h_d, &d, &AoConfig::discrete(3, a.clone()), &budget()).unwrap();
            let best = exhaustive_best(&h_d, &d, &a);
            let got = *out.objective_history.last().unwrap();
            assert!(got <= best * (1.0 + 1e-12));
            // the returned RC is one of the enumerated words
            assert!(out
                .rc
                .iter()
                .all(|z| a.values().iter().any(|v| (v - z).norm() < 1e-15)));
            if (got - best).abs() <= 1e-12 * best {
                hits += 1;
            }
        }
        assert!(hits * 10 >= trials * 9, "AO optimal in {hits}/{trials}");
    }

    #[test]
    fn ao_without_reflection_is_miso_mrt() {
        let a = build_alphabet(1).unwrap();
        let mut rng = stream_rng(3, StreamKind::Misc, 0, 0);
        let h_d = complex_gaussian_vec(4, &mut rng);
        let out = ao_optimize(
            &h_d,
            &CMat::zeros(6, 4),
            &AoConfig::discrete(3, a),
            &budget(),
        )
        .unwrap();
        assert!((out.w - h_d.unscale(h_d.norm())).norm() < 1e-14);
        assert!((out.rate - no_ris_rate(&h_d, &budget())).abs() < 1e-12);
    }

    #[test]
    fn ao_objective_non_decreasing() {
        let a = build_alphabet(1).unwrap();
        let mut rng = stream_rng(4, StreamKind::Misc, 0, 0);
        for _ in 0..200 {
            let h_d = complex_gaussian_vec(3, &mut rng).map(|z| z * 0.1);
            let d = CMat::from_fn(16, 3, |_, _| complex_gaussian(&mut rng));
            let out = ao_optimize(&h_d, &d, &AoConfig::discrete(5, a.clone()), &budget()).unwrap();
            assert!(out.objective_history.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn continuous_ao_reaches_global_optimum_single_element() {
        // max over theta of ||h_d + e^{-j theta} d||^2 on a fine grid
        let mut rng = stream_rng(5, StreamKind::Misc, 0, 0);
        for _ in 0..20 {
            let h_d = complex_gaussian_vec(3, &mut rng);
            let d = CMat::from_fn(1, 3, |_, _| complex_gaussian(&mut rng));
            let out = ao_optimize(&h_d, &d, &AoConfig::continuous(200), &budget()).unwrap();
            let grid = 100_000;
            let best = (0..grid)
                .map(|i| {
                    let rc = [C64::from_polar(1.0, 2.0 * PI * i as f64 / grid as f64)];
                    norm_sqr(&composite(&h_d, &d, &rc).unwrap())
                })
                .fold(0.0, f64::max);
            let got = *out.objective_history.last().unwrap();
            assert!((got - best).abs() <= 1e-6 * best, "{got} vs {best}");
            // closed form: ||h_d||^2 + ||d||^2 + 2 |<h_d, d>|
            let dv = d.row(0).transpose().map(|z| z.conj());
            let closed =
                norm_sqr(&h_d) + norm_sqr(&dv) + 2.0 * crate::numeric::inner(&h_d, &dv).norm();
            assert!((got - closed).abs() <= 1e-9 * closed);
        }
    }

    #[test]
    fn cascaded_noiseless_recovery() {
        let mut rng = stream_rng(6, StreamKind::Misc, 0, 0);
        let est = CascadedEstimator::dft(12);
        let h_d = complex_gaussian_vec(3, &mut rng);
        let d = CMat::from_fn(12, 3, |_, _| complex_gaussian(&mut rng));
        let pilot = PilotConfig::new(0.5, 0.0).unwrap();
        let obs = est.observe(&h_d, &d, &pilot, &mut rng).unwrap();
        let (hd_hat, d_hat) = cascaded_ls_estimation(&obs, est.patterns(), &pilot).unwrap();
        assert!((hd_hat - &h_d).norm() < 1e-12);
        assert!((d_hat - &d).norm() < 1e-12);
        assert_eq!(CascadedEstimator::dft(100).slots(), 101);
    }

    #[test]
    fn cascaded_error_variance() {
        let n = 7;
        let est = CascadedEstimator::dft(n);
        let pilot = PilotConfig::new(0.5, 0.2).unwrap();
        let mut rng = stream_rng(7, StreamKind::Misc, 0, 0);
        let h_d = complex_gaussian_vec(2, &mut rng);
        let d = CMat::from_fn(n, 2, |_, _| complex_gaussian(&mut rng));
        let trials = 10_000;
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..trials {
            let obs = est.observe(&h_d, &d, &pilot, &mut rng).unwrap();
            let (hd_hat, d_hat) = est.estimate(&obs, &pilot).unwrap();
            acc += norm_sqr(&(hd_hat - &h_d)) + (d_hat - &d).norm_squared();
            count += 2 * (n + 1);
        }
        let var = acc / count as f64;
        let expect = pilot.inverse_snr() / (n + 1) as f64;
        assert!((var - expect).abs() < 0.1 * expect, "{var} vs {expect}");
    }

    #[test]
    fn singular_patterns_rejected() {
        let p = CMat::from_element(3, 2, C64::new(1.0, 0.0));
        assert!(matches!(CascadedEstimator::new(p), Err(Error::Config(_))));
        assert!(CascadedEstimator::new(CMat::from_element(2, 2, C64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn scsi_examples() {
        let a = build_alphabet(1).unwrap();
        let zero = LosComponents {
            h_d: Some(CVec::from_element(3, C64::new(1.0, 0.0))),
            h_r: CVec::from_element(5, C64::new(1.0, 0.0)),
            g: CMat::from_element(5, 3, C64::new(1.0, 0.0)),
        };
        assert_eq!(scsi_codeword(&zero, &a), RcVector::zeros(5));

        // M = 1 reduces to the K -> inf env-aware alignment with m_ref = 0
        let geom = SystemGeometry::default();
        let los1 = LosComponents::from_geometry(&geom, 1, 30).unwrap();
        let k_inf = crate::channels::RicianFactors {
            k_d: f64::INFINITY,
            k_r: f64::INFINITY,
            k_g: f64::INFINITY,
        };
        let cb = crate::codebooks::env_aware_codebook(
            &los1,
            &k_inf,
            1,
            0,
            &a,
            Default::default(),
            &mut stream_rng(0, StreamKind::Codebook, 0, 0),
        )
        .unwrap();
        assert_eq!(scsi_codeword(&los1, &a), cb.words()[0]);

        // default scene, M = 8: per-element hand computation
        let los = LosComponents::from_geometry(&geom, 8, 100).unwrap();
        let a2 = build_alphabet(2).unwrap();
        let word = scsi_codeword(&los, &a2);
        let h_d = los.h_d.as_ref().unwrap();
        for n in 0..100 {
            let mut re = 0.0;
            let mut im = 0.0;
            for m in 0..8 {
                let z = los.g[(n, m)] * h_d[m].conj();
                re += z.re;
                im += z.im;
            }
            let psi = los.h_r[n].arg() - im.atan2(re);
            let target = C64::from_polar(1.0, psi);
            let best = a2
                .values()
                .iter()
                .enumerate()
                .min_by(|x, y| (target - x.1).norm().total_cmp(&(target - y.1).norm()))
                .unwrap()
                .0;
            assert_eq!(word.0[n] as usize, best, "element {n}");
        }
    }

    #[test]
    fn no_ris_examples() {
        let b = LinkBudget::new(2.0, 0.5).unwrap();
        assert_eq!(no_ris_rate(&CVec::zeros(4), &b), 0.0);
        let mut rng = stream_rng(8, StreamKind::Misc, 0, 0);
        for _ in 0..20 {
            let h = complex_gaussian_vec(4, &mut rng);
            let e: f64 = h.iter().map(|z| z.re * z.re + z.im * z.im).sum();
            assert!((no_ris_rate(&h, &b) - (1.0 + 4.0 * e).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn complexity_examples() {
        let r = complexity_model(8, 100, 50, 1, 4).unwrap();
        assert_eq!(r.ao_estimation, 1616);
        assert_eq!(r.ao_optimization, 13728);
        assert_eq!(r.proposed_estimation, 1600);
        assert_eq!(r.proposed_optimization, 2800);
        assert!(complexity_model(0, 1, 1, 1, 1).is_err());
    }

    #[test]
    fn complexity_linear_in_iterations_and_words() {
        for k in 1..6u64 {
            let one = complexity_model(4, 30, 10, 2, 1).unwrap();
            let many = complexity_model(4, 30, 10 * k, 2, k).unwrap();
            assert_eq!(many.ao_optimization, k * one.ao_optimization);
            assert_eq!(many.proposed_estimation, k * one.proposed_estimation);
            assert_eq!(many.proposed_optimization, k * one.proposed_optimization);
            assert_eq!(many.ao_estimation, one.ao_estimation);
        }
    }
}
