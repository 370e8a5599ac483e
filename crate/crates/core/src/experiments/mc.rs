//! Random point sets, submatrix singular values, Gaussian band measures and
//! greedy constant-weight codes.

use rand::seq::index;
use rand::Rng;

use super::rng::gaussian_vector;
use super::stats::binomial_se;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::linalg::{dot, min_singular_value, norm, Matrix, SpanProjector};
use crate::subsets::{binomial, Combinations};

/// Largest `C(n, d)` accepted by exact submatrix enumeration.
pub const EXACT_SUBSET_CAP: u128 = 2_000_000;
/// Largest number of spans tested per sample in [`band_union_volume`].
pub const BAND_SPAN_CAP: u128 = 100_000;
/// Largest number of weight-`w` words scanned by [`gv_code`].
pub const GV_WORD_CAP: u128 = 10_000_000;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// `n` independent draws `N(mu_i, sigma^2 I_d)`; with no means the draws are
/// centered. Supplied means must have norm at most 1.
pub fn gaussian_points<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    means: Option<&[Vec<f64>]>,
    sigma: f64,
    rng: &mut R,
) -> Result<PointSet> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if let Some(m) = means {
        if m.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.len(),
            });
        }
        for (i, mu) in m.iter().enumerate() {
            if mu.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: mu.len(),
                });
            }
            if norm(mu) > 1.0 + 1e-12 {
                return Err(Error::invalid(format!("mean {i} has norm {} > 1", norm(mu))));
            }
        }
    }
    let pts = (0..n)
        .map(|i| {
            let g = gaussian_vector(d, rng);
            match means {
                Some(m) => m[i].iter().zip(&g).map(|(mu, z)| mu + sigma * z).collect(),
                None => g.into_iter().map(|z| sigma * z).collect(),
            }
        })
        .collect();
    PointSet::new(pts)
}

/// Which `d`-column subsets [`min_submatrix_sigma`] visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetMode {
    Exact,
    /// This many uniformly random subsets; the result upper-bounds the
    /// exact minimum.
    Sampled(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSigma {
    pub value: f64,
    pub subsets: usize,
    pub exact: bool,
}

/// Minimum of `sigma_d(A_S)` over `d`-column subsets `S` of a `d x n` matrix.
pub fn min_submatrix_sigma<R: Rng + ?Sized>(
    a: &Matrix,
    mode: SubsetMode,
    rng: &mut R,
) -> Result<SubsetSigma> {
    let (d, n) = (a.rows(), a.cols());
    if d == 0 || n < d {
        return Err(Error::invalid(format!("need 0 < d <= n, got {d}x{n}")));
    }
    let sigma = |s: &[usize]| min_singular_value(&a.select_columns(s));
    match mode {
        SubsetMode::Exact => {
            let count = binomial(n as u64, d as u64);
            if count > EXACT_SUBSET_CAP {
                return Err(Error::cap("d-subsets for exact enumeration", count, EXACT_SUBSET_CAP));
            }
            let mut best = f64::INFINITY;
            for s in Combinations::new(n, d) {
                best = best.min(sigma(&s)?);
            }
            Ok(SubsetSigma {
                value: best,
                subsets: count as usize,
                exact: true,
            })
        }
        SubsetMode::Sampled(k) => {
            if k == 0 {
                return Err(Error::invalid("sampled mode needs at least one subset"));
            }
            let mut best = f64::INFINITY;
            for _ in 0..k {
                let mut s = index::sample(rng, n, d).into_vec();
                s.sort_unstable();
                best = best.min(sigma(&s)?);
            }
            Ok(SubsetSigma {
                value: best,
                subsets: k,
                exact: false,
            })
        }
    }
}

/// Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_hits(hits: usize, samples: usize) -> Self {
        let p = hits as f64 / samples as f64;
        McEstimate {
            estimate: p,
            std_error: binomial_se(p, samples),
            samples,
        }
    }
}

/// Gaussian measure of the points within distance `eps` of the span of some
/// `d - 1` columns of the `d x n` matrix `a`.
pub fn band_union_volume<R: Rng + ?Sized>(
    a: &Matrix,
    eps: f64,
    samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let (d, n) = (a.rows(), a.cols());
    if d == 0 || n + 1 < d {
        return Err(Error::invalid(format!("need n >= d - 1 columns, got {d}x{n}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) || samples == 0 {
        return Err(Error::invalid("need eps >= 0 and at least one sample"));
    }
    let count = binomial(n as u64, (d - 1) as u64);
    if count > BAND_SPAN_CAP {
        return Err(Error::cap("spans per sample", count, BAND_SPAN_CAP));
    }
    // Squared distance to a span is the squared norm of the projection on
    // an orthonormal basis of its complement.
    let cols = a.columns();
    let mut complements = Vec::with_capacity(count as usize);
    for s in Combinations::new(n, d - 1) {
        let basis: Vec<Vec<f64>> = s.iter().map(|&j| cols[j].clone()).collect();
        complements.push(SpanProjector::new(d, &basis)?.complement());
    }
    let eps2 = eps * eps;
    let mut hits = 0;
    for _ in 0..samples {
        let x = gaussian_vector(d, rng);
        let hit = complements.iter().any(|comp| {
            let mut acc = 0.0;
            for c in comp {
                acc += dot(c, &x).powi(2);
                if acc > eps2 {
                    return false;
                }
            }
            true
        });
        hits += hit as usize;
    }
    Ok(McEstimate::from_hits(hits, samples))
}

/// `(2 eps / sqrt(2 pi)) C(n, d - 1)`.
pub fn band_union_bound(d: usize, n: usize, eps: f64) -> f64 {
    2.0 * eps / SQRT_2PI * binomial(n as u64, d.saturating_sub(1) as u64) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairBandCheck {
    pub mc: McEstimate,
    pub bound: f64,
    pub pass: bool,
}

/// Gaussian measure of `{c_s <= <x,u> <= c_s + eps} ∩ {c_t <= <x,v> <= c_t + eps}`
/// against `eps^2 / sqrt(2 pi (1 - <u,v>^2))`. Passes when the estimate is at
/// most the bound plus three standard errors.
#[allow(clippy::too_many_arguments)]
pub fn band_pair_measure_check<R: Rng + ?Sized>(
    u: &[f64],
    v: &[f64],
    c_s: f64,
    c_t: f64,
    eps: f64,
    samples: usize,
    rng: &mut R,
) -> Result<PairBandCheck> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if (norm(u) - 1.0).abs() > 1e-9 || (norm(v) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("band normals must be unit vectors"));
    }
    let rho = dot(u, v);
    if rho.abs() >= 1.0 - 1e-12 {
        return Err(Error::invalid("band normals are parallel"));
    }
    if !(eps >= 0.0 && eps.is_finite()) || samples == 0 {
        return Err(Error::invalid("need eps >= 0 and at least one sample"));
    }
    let mut hits = 0;
    for _ in 0..samples {
        let x = gaussian_vector(u.len(), rng);
        let (a, b) = (dot(&x, u), dot(&x, v));
        hits += (a >= c_s && a <= c_s + eps && b >= c_t && b <= c_t + eps) as usize;
    }
    let mc = McEstimate::from_hits(hits, samples);
    let bound = eps * eps / (2.0 * std::f64::consts::PI * (1.0 - rho * rho)).sqrt();
    Ok(PairBandCheck {
        pass: mc.estimate <= bound + 3.0 * mc.std_error,
        mc,
        bound,
    })
}

/// Greedy constant-weight code: scans the weight-`w` words of length `n` in
/// lexicographic order and keeps each word at Hamming distance at least `t`
/// from every word kept so far.
///
/// Words are bit masks; coordinate `i` (0-based, read left to right) is bit
/// `n - 1 - i`, so increasing integers are increasing words.
pub fn gv_code(n: usize, t: usize, w: usize) -> Result<Vec<u64>> {
    if n == 0 || n > 63 || w == 0 || w > n || t == 0 || t > n {
        return Err(Error::invalid(format!(
            "need 0 < w <= n <= 63 and 0 < t <= n, got n={n} t={t} w={w}"
        )));
    }
    let count = binomial(n as u64, w as u64);
    if count > GV_WORD_CAP {
        return Err(Error::cap("weight-w words", count, GV_WORD_CAP));
    }
    let mut kept: Vec<u64> = Vec::new();
    let mut word: u64 = (1 << w) - 1;
    let limit: u64 = 1 << n;
    while word < limit {
        if kept.iter().all(|&k| (k ^ word).count_ones() as usize >= t) {
            kept.push(word);
        }
        // Next integer with the same popcount.
        let c = word & word.wrapping_neg();
        let r = word + c;
        word = (((r ^ word) >> 2) / c) | r;
    }
    Ok(kept)
}

/// `C(n, w) / B(n, t)` with `B(n, t) = sum_{k <= t} C(n, k)`.
pub fn gv_lower_bound(n: usize, t: usize, w: usize) -> f64 {
    let ball: f64 = (0..=t).map(|k| binomial(n as u64, k as u64) as f64).sum();
    binomial(n as u64, w as u64) as f64 / ball
}

/// Word as a 0/1 vector, coordinate 0 first.
pub fn word_bits(word: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((word >> (n - 1 - i)) & 1) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::rng::RngStream;

    #[test]
    fn tiny_sigma_returns_means() {
        let means = vec![vec![0.5, 0.0], vec![0.0, -1.0]];
        let ps = gaussian_points(2, 2, Some(&means), 1e-14, &mut RngStream::new(3).rng(0, 0))
            .unwrap();
        for (p, m) in ps.points().iter().zip(&means) {
            for (a, b) in p.iter().zip(m) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_points_validate() {
        let mut rng = RngStream::new(3).rng(0, 0);
        assert!(gaussian_points(2, 1, None, 0.0, &mut rng).is_err());
        assert!(gaussian_points(2, 1, Some(&[vec![2.0, 0.0]]), 1.0, &mut rng).is_err());
        assert!(gaussian_points(2, 2, Some(&[vec![0.0, 0.0]]), 1.0, &mut rng).is_err());
    }

    #[test]
    fn duplicated_identity_has_zero_submatrix() {
        let mut rng = RngStream::new(0).rng(0, 0);
        for d in 1..5 {
            let mut cols = Vec::new();
            for _ in 0..2 {
                for i in 0..d {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    cols.push(e);
                }
            }
            let a = Matrix::from_columns(&cols).unwrap();
            let r = min_submatrix_sigma(&a, SubsetMode::Exact, &mut rng).unwrap();
            let expect = if d == 1 { 1.0 } else { 0.0 };
            assert!((r.value - expect).abs() <= 1e-15, "d={d}: {}", r.value);
            let id = Matrix::identity(d);
            assert_eq!(min_submatrix_sigma(&id, SubsetMode::Exact, &mut rng).unwrap().value, 1.0);
        }
    }

    #[test]
    fn exact_mode_cap() {
        let a = Matrix::zeros(12, 26);
        let mut rng = RngStream::new(0).rng(0, 0);
        assert!(matches!(
            min_submatrix_sigma(&a, SubsetMode::Exact, &mut rng),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn zero_band_has_zero_measure() {
        let a = Matrix::from_columns(&[vec![1.0, 0.0]]).unwrap();
        let mut rng = RngStream::new(5).rng(0, 0);
        assert_eq!(band_union_volume(&a, 0.0, 1000, &mut rng).unwrap().estimate, 0.0);
        let check = band_pair_measure_check(&[1.0, 0.0], &[0.0, 1.0], 0.0, 0.0, 0.0, 1000, &mut rng)
            .unwrap();
        assert_eq!(check.mc.estimate, 0.0);
        assert_eq!(check.bound, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn parallel_normals_are_rejected() {
        let mut rng = RngStream::new(5).rng(0, 0);
        let r = band_pair_measure_check(&[1.0, 0.0], &[-1.0, 0.0], 0.0, 0.0, 0.1, 10, &mut rng);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn gv_small_examples() {
        assert_eq!(gv_code(4, 2, 2).unwrap().len(), 6);
        assert_eq!(gv_code(5, 1, 2).unwrap().len(), 10);
        // Lexicographic order puts 0011 first.
        assert_eq!(word_bits(gv_code(4, 4, 2).unwrap()[0], 4), vec![0, 0, 1, 1]);
        assert!(gv_code(4, 0, 2).is_err());
        assert!(gv_code(4, 2, 5).is_err());
    }
}
