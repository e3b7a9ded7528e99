//! Discrete phase alphabet and the reflection-coefficient codebooks:
//! environment-aware, random, DFT configurations and the single RPS word.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::channels::{LosComponents, RicianFactors};
use crate::error::{Error, Result};
use crate::numeric::{complex_gaussian, C64};

/// Largest supported quantization resolution.
pub const MAX_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAlphabet {
    bits: u32,
    values: Vec<C64>,
}

impl PhaseAlphabet {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::Domain(format!(
                "quantization bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        let levels = 1usize << bits;
        let step = TAU / levels as f64;
        let values = (0..levels)
            .map(|k| {
                if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, step * k as f64)
                }
            })
            .collect();
        Ok(Self { bits, values })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, index: u16) -> C64 {
        self.values[index as usize]
    }

    pub fn step(&self) -> f64 {
        TAU / self.len() as f64
    }

    /// Nearest alphabet index to the phase `theta` (radians).
    ///
    /// Chord length `|e^{ja} - e^{jb}| = 2 sin(|a - b| / 2)` is monotone in
    /// the wrapped angular gap, so the Euclidean argmin is found on angles.
    /// Gaps equal within 1e-12 count as ties and go to the lowest index.
    pub fn nearest(&self, theta: f64) -> u16 {
        let step = self.step();
        let mut best = 0usize;
        let mut best_gap = f64::INFINITY;
        for k in 0..self.len() {
            let diff = (theta - step * k as f64).rem_euclid(TAU);
            let gap = diff.min(TAU - diff);
            if gap < best_gap - 1e-12 {
                best = k;
                best_gap = gap;
            }
        }
        best as u16
    }

    /// Number of distinct words of length `n_elements`, saturating at
    /// `u128::MAX`.
    pub fn capacity(&self, n_elements: usize) -> u128 {
        let total_bits = self.bits as u128 * n_elements as u128;
        if total_bits >= 128 {
            u128::MAX
        } else {
            1u128 << total_bits
        }
    }

    pub fn check_capacity(&self, t_words: usize, n_elements: usize) -> Result<()> {
        let capacity = self.capacity(n_elements);
        if t_words as u128 > capacity {
            return Err(Error::Capacity {
                requested: t_words,
                capacity,
            });
        }
        Ok(())
    }
}

pub fn build_alphabet(bits: u32) -> Result<PhaseAlphabet> {
    PhaseAlphabet::new(bits)
}

/// Index of the alphabet value closest to the unit-modulus `value`.
pub fn quantize(value: C64, alphabet: &PhaseAlphabet) -> Result<u16> {
    if (value.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "quantize expects a unit-modulus value, got |z| = {}",
            value.norm()
        )));
    }
    Ok(alphabet.nearest(value.arg()))
}

/// One RC configuration as alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RcVector(pub Vec<u16>);

impl RcVector {
    pub fn zeros(n_elements: usize) -> Self {
        RcVector(vec![0; n_elements])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn phasors(&self, alphabet: &PhaseAlphabet) -> Vec<C64> {
        self.0.iter().map(|&k| alphabet.value(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookScheme {
    EnvironmentAware,
    Random,
    Dft,
    Rps,
    Scsi,
}

impl CodebookScheme {
    pub fn label(self) -> &'static str {
        match self {
            CodebookScheme::EnvironmentAware => "proposed",
            CodebookScheme::Random => "rand",
            CodebookScheme::Dft => "dft",
            CodebookScheme::Rps => "rps",
            CodebookScheme::Scsi => "scsi",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "proposed" => CodebookScheme::EnvironmentAware,
            "rand" => CodebookScheme::Random,
            "dft" => CodebookScheme::Dft,
            "rps" => CodebookScheme::Rps,
            "scsi" => CodebookScheme::Scsi,
            _ => return None,
        })
    }
}

impl fmt::Display for CodebookScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered list of pairwise distinct discrete RC vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    alphabet: PhaseAlphabet,
    words: Vec<RcVector>,
}

impl Codebook {
    /// Validates index range, common length and pairwise distinctness.
    pub fn new(alphabet: PhaseAlphabet, words: Vec<RcVector>) -> Result<Self> {
        if let Some(first) = words.first() {
            let n = first.len();
            let mut seen = HashSet::with_capacity(words.len());
            for w in &words {
                if w.len() != n {
                    return Err(Error::Dimension("codebook words differ in length".into()));
                }
                if w.0.iter().any(|&k| k as usize >= alphabet.len()) {
                    return Err(Error::Domain("codebook index outside the alphabet".into()));
                }
                if !seen.insert(w) {
                    return Err(Error::Domain(
                        "codebook words must be pairwise distinct".into(),
                    ));
                }
            }
        }
        Ok(Self { alphabet, words })
    }

    pub fn alphabet(&self) -> &PhaseAlphabet {
        &self.alphabet
    }

    pub fn words(&self) -> &[RcVector] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn n_elements(&self) -> usize {
        self.words.first().map_or(0, RcVector::len)
    }

    pub fn phasors(&self) -> Vec<Vec<C64>> {
        self.words
            .iter()
            .map(|w| w.phasors(&self.alphabet))
            .collect()
    }

    pub fn truncated(&self, t_words: usize) -> Codebook {
        Codebook {
            alphabet: self.alphabet.clone(),
            words: self.words[..t_words.min(self.words.len())].to_vec(),
        }
    }
}

/// Dedup loop limits shared by the randomized generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DedupPolicy {
    /// Total generation attempts before giving up; `None` means `1000 * T`.
    pub max_attempts: Option<usize>,
    /// Return the distinct words found so far instead of failing when the
    /// attempt cap is hit.
    pub allow_shortfall: bool,
}

impl DedupPolicy {
    pub fn lenient() -> Self {
        Self {
            max_attempts: None,
            allow_shortfall: true,
        }
    }

    fn cap(&self, t_words: usize) -> usize {
        self.max_attempts
            .unwrap_or_else(|| t_words.saturating_mul(1000))
            .max(1)
    }
}

fn collect_distinct(
    alphabet: &PhaseAlphabet,
    t_words: usize,
    policy: DedupPolicy,
    mut next_word: impl FnMut() -> RcVector,
) -> Result<Codebook> {
    let cap = policy.cap(t_words);
    let mut seen = HashSet::with_capacity(t_words);
    let mut words = Vec::with_capacity(t_words);
    let mut attempts = 0usize;
    while words.len() < t_words {
        if attempts == cap {
            if policy.allow_shortfall && !words.is_empty() {
                break;
            }
            return Err(Error::Convergence {
                requested: t_words,
                found: words.len(),
                attempts,
            });
        }
        attempts += 1;
        let w = next_word();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    Ok(Codebook {
        alphabet: alphabet.clone(),
        words,
    })
}

/// Phase of `sqrt(K) * los + nlos` with a fresh CN(0, 1) draw; the LoS
/// phase itself when K is infinite.
/// One LoS term of the alignment rule, pre-scaled by `sqrt(K)`. A pure-LoS
/// term is kept as its unit phasor and consumes no randomness.
#[derive(Clone, Copy)]
enum VirtualTerm {
    Fixed(C64),
    Faded(C64),
}

impl VirtualTerm {
    fn new(los: C64, k: f64) -> Self {
        if k.is_infinite() {
            VirtualTerm::Fixed(los / los.norm())
        } else {
            VirtualTerm::Faded(los * k.sqrt())
        }
    }

    /// A complex number whose phase is the virtual channel phase.
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> C64 {
        match self {
            VirtualTerm::Fixed(p) => p,
            VirtualTerm::Faded(l) => l + complex_gaussian(rng),
        }
    }
}

/// Environment-aware codebook.
///
/// Word `t` aligns every reflected path with the direct path of a virtual
/// channel seen from BS antenna `m_ref` (0-based):
///
/// ```text
/// psi[n] = arg(sqrt(K_r) h_r[n] + v_r) - arg(sqrt(K_d) h_d[m] + v_d) - arg(sqrt(K_g) g[n, m] + v_g)
/// ```
///
/// with the `v` terms fresh CN(0, 1) virtual NLoS draws per word. Each
/// `exp(j psi[n])` is quantized to the alphabet and words that repeat an
/// earlier one are redrawn. A blocked direct link drops the middle term.
pub fn env_aware_codebook<R: Rng + ?Sized>(
    los: &LosComponents,
    k: &RicianFactors,
    t_words: usize,
    m_ref: usize,
    alphabet: &PhaseAlphabet,
    policy: DedupPolicy,
    rng: &mut R,
) -> Result<Codebook> {
    let n = los.n_elements();
    let m = los.m_antennas();
    if m_ref >= m {
        return Err(Error::Domain(format!(
            "reference antenna {m_ref} out of range for M = {m}"
        )));
    }
    if t_words == 0 {
        return Err(Error::Domain("codebook needs at least one word".into()));
    }
    alphabet.check_capacity(t_words, n)?;
    for (name, v) in [("K_d", k.k_d), ("K_r", k.k_r), ("K_g", k.k_g)] {
        if !(v >= 0.0) {
            return Err(Error::Domain(format!("{name} must be >= 0")));
        }
    }
    let direct = los.h_d.as_ref().map(|h| VirtualTerm::new(h[m_ref], k.k_d));
    let terms: Vec<(VirtualTerm, VirtualTerm)> = (0..n)
        .map(|i| {
            (
                VirtualTerm::new(los.h_r[i], k.k_r),
                VirtualTerm::new(los.g[(i, m_ref)], k.k_g),
            )
        })
        .collect();
    collect_distinct(alphabet, t_words, policy, || {
        let direct = direct.map_or(C64::new(1.0, 0.0), |d| d.draw(rng));
        let idx = terms
            .iter()
            .map(|&(refl, bs_ris)| {
                // arg(a conj(b) conj(c)) = arg a - arg b - arg c (mod 2 pi)
                let refl = refl.draw(rng);
                let bs_ris = bs_ris.draw(rng);
                alphabet.nearest((refl * (direct * bs_ris).conj()).arg())
            })
            .collect();
        RcVector(idx)
    })
}

fn random_word<R: Rng + ?Sized>(
    n_elements: usize,
    alphabet: &PhaseAlphabet,
    rng: &mut R,
) -> RcVector {
    let levels = alphabet.len() as u16;
    RcVector(
        (0..n_elements)
            .map(|_| rng.random_range(0..levels))
            .collect(),
    )
}

/// Words with i.i.d. uniform entries, duplicates redrawn.
pub fn random_codebook<R: Rng + ?Sized>(
    t_words: usize,
    n_elements: usize,
    alphabet: &PhaseAlphabet,
    policy: DedupPolicy,
    rng: &mut R,
) -> Result<Codebook> {
    if t_words == 0 || n_elements == 0 {
        return Err(Error::Domain(
            "random codebook needs T >= 1 and N >= 1".into(),
        ));
    }
    alphabet.check_capacity(t_words, n_elements)?;
    collect_distinct(alphabet, t_words, policy, || {
        random_word(n_elements, alphabet, rng)
    })
}

/// Single uniformly random RC vector.
pub fn rps_vector<R: Rng + ?Sized>(
    n_elements: usize,
    alphabet: &PhaseAlphabet,
    rng: &mut R,
) -> RcVector {
    random_word(n_elements, alphabet, rng)
}

/// Columns of the N-point DFT matrix rescaled to unit modulus: word `t`
/// (0-based) has phases `2 pi n t / N`. Left unquantized.
pub fn dft_codebook(t_words: usize, n_elements: usize) -> Result<Vec<Vec<C64>>> {
    if t_words == 0 || t_words > n_elements {
        return Err(Error::UnsupportedSize(format!(
            "DFT codebook supports 1 <= T <= N, got T = {t_words}, N = {n_elements}"
        )));
    }
    Ok((0..t_words)
        .map(|t| {
            (0..n_elements)
                .map(|n| {
                    let k = (n * t) % n_elements;
                    if k == 0 {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::from_polar(1.0, TAU * k as f64 / n_elements as f64)
                    }
                })
                .collect()
        })
        .collect())
}

/// Provenance recorded in a codebook CSV header.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookHeader {
    pub scheme: String,
    /// Quantization bits; 0 for continuous DFT words.
    pub bits: u32,
    /// Number of phase levels the entries index into.
    pub levels: usize,
    pub n_elements: usize,
    pub t_words: usize,
    pub seed: u64,
}

/// Writes one row per word with entries as phase-level indices: a level `k`
/// means phase `2 pi k / levels`.
pub fn write_codebook_csv(
    path: &Path,
    header: &CodebookHeader,
    words: &[Vec<usize>],
) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# scheme={} bits={} levels={} n={} t={} seed={}",
        header.scheme, header.bits, header.levels, header.n_elements, header.t_words, header.seed
    );
    out.push_str("word");
    for n in 1..=header.n_elements {
        let _ = write!(out, ",e{n}");
    }
    out.push('\n');
    for (t, w) in words.iter().enumerate() {
        let _ = write!(out, "{}", t + 1);
        for k in w {
            let _ = write!(out, ",{k}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_codebook_csv(path: &Path) -> Result<(CodebookHeader, Vec<Vec<usize>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let meta = first
        .strip_prefix("# ")
        .ok_or_else(|| bad("missing header comment".into()))?;
    let field = |key: &str| -> Result<&str> {
        meta.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| bad(format!("header lacks `{key}`")))
    };
    let num =
        |key: &str| -> Result<u64> { field(key)?.parse().map_err(|_| bad(format!("bad `{key}`"))) };
    let header = CodebookHeader {
        scheme: field("scheme")?.to_string(),
        bits: num("bits")? as u32,
        levels: num("levels")? as usize,
        n_elements: num("n")? as usize,
        t_words: num("t")? as usize,
        seed: num("seed")?,
    };
    lines
        .next()
        .ok_or_else(|| bad("missing column header".into()))?;
    let mut words = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let w = line
            .split(',')
            .skip(1)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("bad entry `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if w.len() != header.n_elements {
            return Err(bad(format!(
                "row has {} entries, expected {}",
                w.len(),
                header.n_elements
            )));
        }
        words.push(w);
    }
    Ok((header, words))
}
