//! Channel direction quantizers and the CQI quantizer.
//!
//! Every direction quantizer returns a unit-norm `h^` together with the
//! achieved distortion `sin^2(angle(h, h^))`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{haar_orthonormal_set, ComplexVector, OrthonormalSet, RngStream};

/// Largest codebook the explicit RVQ path will scan (2^24 codewords).
pub const RVQ_EXPLICIT_MAX_BITS: u32 = 24;

/// Largest per-scalar resolution used by the scalar quantizer.
const SCALAR_MAX_BITS_PER_COMPONENT: u32 = 52;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantizerKind {
    /// Fresh isotropic codebook per user, scanned codeword by codeword.
    RvqExplicit,
    /// RVQ simulated through the law of its quantization error.
    RvqStatistical,
    /// Per-component phase / magnitude-angle quantization.
    Scalar,
    /// Statistical RVQ with distortion scaled by `(nt - 1) / nt`.
    Idealized,
    /// Common codebook of orthonormal sets (RBF / PU2RC).
    Orthosets,
    /// No quantization (`B = inf`).
    Perfect,
}

impl QuantizerKind {
    pub fn name(self) -> &'static str {
        match self {
            QuantizerKind::RvqExplicit => "rvq_explicit",
            QuantizerKind::RvqStatistical => "rvq_statistical",
            QuantizerKind::Scalar => "scalar",
            QuantizerKind::Idealized => "idealized",
            QuantizerKind::Orthosets => "orthosets",
            QuantizerKind::Perfect => "perfect",
        }
    }
}

impl fmt::Display for QuantizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rvq_explicit" => QuantizerKind::RvqExplicit,
            "rvq_statistical" | "rvq" => QuantizerKind::RvqStatistical,
            "scalar" => QuantizerKind::Scalar,
            "idealized" => QuantizerKind::Idealized,
            "orthosets" => QuantizerKind::Orthosets,
            "perfect" => QuantizerKind::Perfect,
            other => return Err(Error::Config(format!("unknown quantizer '{other}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerSpec {
    pub kind: QuantizerKind,
    pub bits: u32,
    pub nt: usize,
}

impl QuantizerSpec {
    pub fn new(kind: QuantizerKind, bits: u32, nt: usize) -> Result<Self> {
        let spec = Self { kind, bits, nt };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 {
            return Err(Error::InvalidDimension("quantizer needs nt >= 1".into()));
        }
        if self.kind == QuantizerKind::Perfect {
            return Ok(());
        }
        if self.bits == 0 {
            return Err(Error::Config("quantizer needs B >= 1".into()));
        }
        match self.kind {
            QuantizerKind::RvqExplicit if self.bits > RVQ_EXPLICIT_MAX_BITS => {
                Err(Error::Capacity {
                    bits: self.bits,
                    max: RVQ_EXPLICIT_MAX_BITS,
                })
            }
            QuantizerKind::Orthosets => orthoset_count(self.bits, self.nt).map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// Result of quantizing one channel direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionQuantization {
    pub direction: ComplexVector,
    pub sin2_error: f64,
    /// Orthoset codebooks only.
    pub set_index: Option<usize>,
    pub beam_index: Option<usize>,
}

impl DirectionQuantization {
    fn plain(direction: ComplexVector, sin2_error: f64) -> Self {
        Self {
            direction,
            sin2_error,
            set_index: None,
            beam_index: None,
        }
    }

    pub fn cos2(&self) -> f64 {
        1.0 - self.sin2_error
    }
}

fn require_nonzero(h: &ComplexVector) -> Result<()> {
    if h.is_empty() || h.norm_sqr() == 0.0 {
        return Err(Error::InvalidDimension(
            "cannot quantize a zero or empty channel".into(),
        ));
    }
    Ok(())
}

/// Index and `cos^2` of the codeword closest in angle to `h`. Ties keep the
/// lowest index.
pub fn nearest_codeword(h: &ComplexVector, codebook: &[ComplexVector]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in codebook.iter().enumerate() {
        let c = h.cos2(w);
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best
}

/// Quantizes against a freshly drawn codebook of `2^bits` isotropic unit
/// vectors. Codewords are generated and compared one at a time.
pub fn quantize_rvq_explicit(
    h: &ComplexVector,
    bits: u32,
    rng: &mut RngStream,
) -> Result<DirectionQuantization> {
    if bits > RVQ_EXPLICIT_MAX_BITS {
        return Err(Error::Capacity {
            bits,
            max: RVQ_EXPLICIT_MAX_BITS,
        });
    }
    require_nonzero(h)?;
    let nt = h.len();
    let h_norm2 = h.norm_sqr();
    let mut best_cos2 = -1.0;
    let mut best = ComplexVector::zeros(nt);
    for _ in 0..(1u64 << bits) {
        let w = ComplexVector::standard_normal(nt, rng);
        let w_norm2 = w.norm_sqr();
        if w_norm2 == 0.0 {
            continue;
        }
        let c = h.inner(&w).norm_sqr() / (h_norm2 * w_norm2);
        if c > best_cos2 {
            best_cos2 = c;
            best = w;
        }
    }
    let direction = best.normalized();
    let sin2 = (1.0 - h.cos2(&direction)).max(0.0);
    Ok(DirectionQuantization::plain(direction, sin2))
}

/// Inverse CDF of the RVQ quantization error: the minimum of `2^bits`
/// i.i.d. `Beta(nt - 1, 1)` variates, evaluated at `u in [0, 1)`.
///
/// `P(min > x) = (1 - x^{nt-1})^{2^B}`, so
/// `x = (1 - (1 - u)^{2^-B})^{1/(nt-1)}`.
pub fn rvq_sin2_inverse_cdf(nt: usize, bits: u32, u: f64) -> f64 {
    if nt <= 1 {
        return 0.0;
    }
    let inv_size = (-(bits as f64)).exp2();
    let base = -(inv_size * (-u).ln_1p()).exp_m1();
    base.clamp(0.0, 1.0).powf(1.0 / (nt - 1) as f64)
}

/// Unit vector at angle `theta` (with `sin^2 theta = sin2`) from `h`, whose
/// orthogonal component is isotropic in the complement of `h`.
fn direction_at_angle(h: &ComplexVector, sin2: f64, rng: &mut RngStream) -> ComplexVector {
    let nt = h.len();
    let u = h.normalized();
    if nt == 1 || sin2 <= 0.0 {
        return u;
    }
    let e = loop {
        let g = ComplexVector::standard_normal(nt, rng);
        let proj = u.inner(&g);
        let e: Vec<Complex64> = g
            .iter()
            .zip(u.iter())
            .map(|(gi, ui)| gi - proj * ui)
            .collect();
        let e = ComplexVector::new(e);
        if e.norm_sqr() > 1e-20 {
            break e.normalized();
        }
    };
    let sin = sin2.min(1.0).sqrt();
    let cos = (1.0 - sin2).max(0.0).sqrt();
    ComplexVector::new(
        u.iter()
            .zip(e.iter())
            .map(|(a, b)| a * cos + b * sin)
            .collect(),
    )
}

pub fn quantize_rvq_statistical(
    h: &ComplexVector,
    bits: u32,
    rng: &mut RngStream,
) -> Result<DirectionQuantization> {
    require_nonzero(h)?;
    let sin2 = rvq_sin2_inverse_cdf(h.len(), bits, rng.uniform());
    let direction = direction_at_angle(h, sin2, rng);
    Ok(DirectionQuantization::plain(direction, sin2))
}

/// Statistical RVQ whose sampled error is scaled by `(nt - 1) / nt`, the
/// expected-distortion gap between RVQ and the best achievable codebook.
pub fn quantize_idealized(
    h: &ComplexVector,
    bits: u32,
    rng: &mut RngStream,
) -> Result<DirectionQuantization> {
    require_nonzero(h)?;
    let nt = h.len();
    let scale = (nt as f64 - 1.0) / nt as f64;
    let sin2 = scale * rvq_sin2_inverse_cdf(nt, bits, rng.uniform());
    let direction = direction_at_angle(h, sin2, rng);
    Ok(DirectionQuantization::plain(direction, sin2))
}

/// Bits per `(phase, magnitude)` pair for components `2..=nt`.
///
/// One bit at a time, round robin over phase_2, mag_2, phase_3, mag_3, ...
pub fn scalar_bit_allocation(nt: usize, bits: u32) -> Vec<(u32, u32)> {
    let pairs = nt.saturating_sub(1);
    let mut alloc = vec![(0u32, 0u32); pairs];
    if pairs == 0 {
        return alloc;
    }
    for slot in 0..bits as usize {
        let pair = (slot / 2) % pairs;
        if slot % 2 == 0 {
            alloc[pair].0 += 1;
        } else {
            alloc[pair].1 += 1;
        }
    }
    alloc
}

/// Midpoint reconstruction of a uniform quantizer with `2^bits` cells on `[lo, hi]`.
pub fn uniform_midpoint(x: f64, lo: f64, hi: f64, bits: u32) -> f64 {
    let levels = (bits.min(SCALAR_MAX_BITS_PER_COMPONENT) as f64).exp2();
    let width = (hi - lo) / levels;
    let idx = ((x - lo) / width).floor().clamp(0.0, levels - 1.0);
    lo + (idx + 0.5) * width
}

/// Scalar quantization: entries are normalized by the first one, then each
/// relative phase is quantized on `[-pi, pi]` and each
/// `atan(|h_m| / |h_1|)` on `[0, pi/2]`.
///
/// The reconstruction has a real, nonnegative first entry.
pub fn quantize_scalar(h: &ComplexVector, bits: u32) -> Result<DirectionQuantization> {
    require_nonzero(h)?;
    let pivot = h[0];
    if pivot.norm_sqr() == 0.0 {
        return Err(Error::DegeneratePivot);
    }
    let nt = h.len();
    let alloc = scalar_bit_allocation(nt, bits);
    let mut rebuilt = Vec::with_capacity(nt);
    rebuilt.push(Complex64::new(1.0, 0.0));
    for (m, &(phase_bits, mag_bits)) in alloc.iter().enumerate() {
        let hm = h[m + 1];
        let phase = (hm * pivot.conj()).arg();
        let angle = hm.norm().atan2(pivot.norm());
        let phase_q = uniform_midpoint(phase, -PI, PI, phase_bits);
        let angle_q = uniform_midpoint(angle, 0.0, FRAC_PI_2, mag_bits);
        rebuilt.push(Complex64::from_polar(angle_q.tan(), phase_q));
    }
    let direction = ComplexVector::new(rebuilt).normalized();
    let sin2 = (1.0 - h.cos2(&direction)).max(0.0);
    Ok(DirectionQuantization::plain(direction, sin2))
}

fn orthoset_count(bits: u32, nt: usize) -> Result<usize> {
    if !nt.is_power_of_two() || bits >= 40 || !(1u64 << bits).is_multiple_of(nt as u64) {
        return Err(Error::Config(format!(
            "orthogonal-set codebook needs 2^B divisible by nt (B = {bits}, nt = {nt})"
        )));
    }
    Ok(((1u64 << bits) / nt as u64) as usize)
}

/// A codebook of `2^B / nt` orthonormal sets, common to all users of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthosetCodebook {
    sets: Vec<OrthonormalSet>,
}

impl OrthosetCodebook {
    pub fn from_sets(sets: Vec<OrthonormalSet>) -> Self {
        Self { sets }
    }

    pub fn sets(&self) -> &[OrthonormalSet] {
        &self.sets
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn num_vectors(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }
}

pub fn build_orthosets_codebook(
    bits: u32,
    nt: usize,
    rng: &mut RngStream,
) -> Result<OrthosetCodebook> {
    let count = orthoset_count(bits, nt)?;
    let sets = (0..count)
        .map(|_| haar_orthonormal_set(rng, nt))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthosetCodebook { sets })
}

/// Global nearest codeword over all sets of a common codebook.
pub fn quantize_to_orthosets(
    h: &ComplexVector,
    codebook: &OrthosetCodebook,
) -> Result<DirectionQuantization> {
    require_nonzero(h)?;
    let h_norm2 = h.norm_sqr();
    let mut best: Option<(usize, usize, f64)> = None;
    for (s, set) in codebook.sets.iter().enumerate() {
        for (b, w) in set.vectors().iter().enumerate() {
            let c = h.inner(w).norm_sqr() / h_norm2;
            if best.is_none_or(|(_, _, bc)| c > bc) {
                best = Some((s, b, c));
            }
        }
    }
    let (s, b, c) = best.ok_or_else(|| Error::Config("empty orthoset codebook".into()))?;
    Ok(DirectionQuantization {
        direction: codebook.sets[s].vectors()[b].clone(),
        sin2_error: (1.0 - c.min(1.0)).max(0.0),
        set_index: Some(s),
        beam_index: Some(b),
    })
}

/// Quantizes with any per-user quantizer. Orthoset codebooks are shared by
/// all users of a block and go through [`quantize_to_orthosets`] instead.
pub fn quantize_direction(
    h: &ComplexVector,
    spec: &QuantizerSpec,
    rng: &mut RngStream,
) -> Result<DirectionQuantization> {
    match spec.kind {
        QuantizerKind::RvqExplicit => quantize_rvq_explicit(h, spec.bits, rng),
        QuantizerKind::RvqStatistical => quantize_rvq_statistical(h, spec.bits, rng),
        QuantizerKind::Scalar => quantize_scalar(h, spec.bits),
        QuantizerKind::Idealized => quantize_idealized(h, spec.bits, rng),
        QuantizerKind::Perfect => {
            require_nonzero(h)?;
            Ok(DirectionQuantization::plain(h.normalized(), 0.0))
        }
        QuantizerKind::Orthosets => Err(Error::Config(
            "orthoset quantization needs a shared codebook; use quantize_to_orthosets".into(),
        )),
    }
}

/// Uniform quantizer for CQI values, in dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CqiQuantizerSpec {
    pub bits: u32,
    pub lo_db: f64,
    pub hi_db: f64,
}

impl CqiQuantizerSpec {
    /// Default range: -10 dB to +15 dB around `reference_db`.
    pub const DEFAULT_LO_DB: f64 = -10.0;
    pub const DEFAULT_HI_DB: f64 = 15.0;

    pub fn new(bits: u32, lo_db: f64, hi_db: f64) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return Err(Error::Config(format!(
                "CQI quantizer needs 1..=32 bits, got {bits}"
            )));
        }
        if !(lo_db < hi_db) {
            return Err(Error::Config(format!(
                "CQI range needs lo < hi, got [{lo_db}, {hi_db}]"
            )));
        }
        Ok(Self { bits, lo_db, hi_db })
    }

    pub fn around(bits: u32, reference_db: f64) -> Result<Self> {
        Self::new(
            bits,
            reference_db + Self::DEFAULT_LO_DB,
            reference_db + Self::DEFAULT_HI_DB,
        )
    }

    pub fn cell_width_db(&self) -> f64 {
        (self.hi_db - self.lo_db) / (self.bits as f64).exp2()
    }
}

/// Quantizes `10 log10(value)` uniformly over the spec's range (clamping
/// outside it) and returns the linear value of the cell midpoint.
pub fn quantize_cqi(value: f64, spec: &CqiQuantizerSpec) -> f64 {
    let db = if value > 0.0 {
        10.0 * value.log10()
    } else {
        spec.lo_db
    };
    let q = uniform_midpoint(db, spec.lo_db, spec.hi_db, spec.bits);
    10f64.powf(q / 10.0)
}
