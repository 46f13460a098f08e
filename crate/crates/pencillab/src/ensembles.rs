//! Seeded, reproducible samplers for every random object in the lab:
//! Kostlan binary/ternary forms, symmetric Gaussian matrices and the
//! quadric-chart proposal draws.
//!
//! Streams are value types derived from a `(seed, stream_id)` pair by a
//! counter-based construction, so a sample drawn for index `k` is identical
//! no matter how many workers participate or in which order samples run.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::forms::{BinaryForm, TernaryForm};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnsembleError {
    /// A pencil of constant sections is degenerate everywhere.
    #[error("degree must be at least 1, got {0}")]
    DegreeZero(u32),
}

/// Handle to a deterministic random stream. Same `(seed, stream_id)` always
/// yields the identical sample sequence; distinct stream ids give
/// statistically independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RngStream {
    /// Concrete generator for this stream. The ChaCha key is derived from
    /// `seed` and the stream id selects the ChaCha stream, so the mapping
    /// is a pure function of `(seed, stream_id)`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream for sample index `k`. The parent stream id is folded
    /// into the seed so `(seed, i).substream(k)` and `(seed, j).substream(k)`
    /// stay distinct.
    pub fn substream(&self, k: u64) -> RngStream {
        let mut state = self.seed ^ self.stream_id.wrapping_mul(0xd1342543de82ef95);
        let derived = splitmix64(&mut state);
        RngStream {
            seed: derived,
            stream_id: k,
        }
    }
}

/// Deterministic stream handle for `(seed, stream_id)`.
pub fn make_stream(seed: u64, stream_id: u64) -> RngStream {
    RngStream { seed, stream_id }
}

/// A pair of equal-degree real forms: the two sections spanning a pencil.
#[derive(Debug, Clone)]
pub struct PencilSample<F> {
    pub alpha: F,
    pub beta: F,
}

/// Kostlan-distributed real binary form of degree `d`: the coefficient of
/// `x^k y^(d-k)` is `g_k · sqrt(C(d,k))` with `g_k` iid standard normal.
pub fn sample_kostlan_binary(d: u32, rng: &mut impl Rng) -> Result<BinaryForm, EnsembleError> {
    if d == 0 {
        return Err(EnsembleError::DegreeZero(0));
    }
    let d = d as usize;
    let mut coeffs = vec![0.0; d + 1];
    let mut binom = 1.0f64; // C(d, k), updated incrementally
    for (k, c) in coeffs.iter_mut().enumerate() {
        let g: f64 = StandardNormal.sample(rng);
        *c = g * binom.sqrt();
        // divide before multiplying: C(1024, 512)·512 overflows f64
        binom = binom / (k + 1) as f64 * (d - k) as f64;
    }
    Ok(BinaryForm::new(coeffs))
}

/// Kostlan-distributed real ternary form of degree `d`: the coefficient of
/// `x^i y^j z^k` has variance `d!/(i! j! k!)`.
pub fn sample_kostlan_ternary(d: u32, rng: &mut impl Rng) -> Result<TernaryForm, EnsembleError> {
    if d == 0 {
        return Err(EnsembleError::DegreeZero(0));
    }
    let mut form = TernaryForm::zero(d);
    for (i, j, k) in TernaryForm::exponents(d) {
        let g: f64 = StandardNormal.sample(rng);
        let var = multinomial(d, i, j, k);
        form.set(i, j, g * var.sqrt());
        let _ = k;
    }
    Ok(form)
}

fn multinomial(d: u32, i: u32, j: u32, k: u32) -> f64 {
    debug_assert_eq!(i + j + k, d);
    // d! / (i! j! k!) built as a product of binomials to stay in range
    binom_f64(d, i) * binom_f64(d - i, j)
}

fn binom_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

/// Draw a pair of independent Kostlan binary forms of equal degree.
pub fn sample_pencil_binary(
    d: u32,
    rng: &mut impl Rng,
) -> Result<PencilSample<BinaryForm>, EnsembleError> {
    let alpha = sample_kostlan_binary(d, rng)?;
    let beta = sample_kostlan_binary(d, rng)?;
    Ok(PencilSample { alpha, beta })
}

/// Draw a pair of independent Kostlan ternary forms of equal degree.
pub fn sample_pencil_ternary(
    d: u32,
    rng: &mut impl Rng,
) -> Result<PencilSample<TernaryForm>, EnsembleError> {
    let alpha = sample_kostlan_ternary(d, rng)?;
    let beta = sample_kostlan_ternary(d, rng)?;
    Ok(PencilSample { alpha, beta })
}

/// An n×n real symmetric matrix drawn from the orthonormal-basis Gaussian:
/// every entry on or above the diagonal is an independent N(0,1) draw,
/// mirrored below.
#[derive(Debug, Clone)]
pub struct SymMatrixSample {
    pub n: usize,
    pub entries: DMatrix<f64>,
}

/// Sample from the symmetric Gaussian ensemble (coordinates in the basis of
/// elementary symmetric matrices are iid N(0,1)).
pub fn sample_sym_matrix(n: usize, rng: &mut impl Rng) -> SymMatrixSample {
    assert!(n >= 1);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(rng);
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    SymMatrixSample { n, entries: m }
}
