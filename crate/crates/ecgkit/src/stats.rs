//! Statistical and entropy kernels shared by the time-domain and wavelet
//! feature extractors.
//!
//! Conventions: all moments are population (biased) moments; entropies use
//! base-2 logarithms unless noted; Chebyshev distance for template matching.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Parameters for the entropy and complexity estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams {
    /// Embedding dimension for ApEn/SampEn.
    pub m: usize,
    /// Tolerance as a fraction of the series standard deviation.
    pub r: f64,
    /// Ordinal pattern length for permutation entropy.
    pub k: usize,
    /// Maximum interval for the Higuchi fractal dimension.
    pub kmax: usize,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            m: 2,
            r: 0.2,
            k: 3,
            kmax: 8,
        }
    }
}

/// Value returned by [`sample_entropy`] when no template matches exist.
pub const SAMPEN_CLAMP: f64 = 10.0;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std_pop(x: &[f64]) -> f64 {
    let mu = mean(x);
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Mean absolute first difference: (1/n)·Σ|x_{i+1}−x_i| over the n pairs.
pub fn mean_abs_diff(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 2 });
    }
    let n = x.len() - 1;
    Ok(x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / n as f64)
}

/// Population (biased, non-excess) kurtosis. Normal data gives 3.0.
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    moment_ratio(x, 4)
}

/// Population skewness.
pub fn skewness(x: &[f64]) -> Result<f64> {
    moment_ratio(x, 3)
}

fn moment_ratio(x: &[f64], p: u32) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 2 });
    }
    let mu = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
    if m2 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mp = x.iter().map(|v| (v - mu).powi(p as i32)).sum::<f64>() / n;
    Ok(mp / m2.powf(p as f64 / 2.0))
}

fn chebyshev_within(x: &[f64], i: usize, j: usize, m: usize, r: f64) -> bool {
    for k in 0..m {
        if (x[i + k] - x[j + k]).abs() > r {
            return false;
        }
    }
    true
}

fn chebyshev_strictly_within(x: &[f64], i: usize, j: usize, m: usize, r: f64) -> bool {
    for k in 0..m {
        if (x[i + k] - x[j + k]).abs() >= r {
            return false;
        }
    }
    true
}

/// Approximate entropy: phi(m) − phi(m+1), Chebyshev distance, self matches
/// included, tolerance `params.r` times the series standard deviation.
pub fn approx_entropy(x: &[f64], params: &EntropyParams) -> Result<f64> {
    let m = params.m;
    if x.len() < m + 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: m + 2 });
    }
    let r = params.r * std_pop(x);
    Ok(apen_phi(x, m, r) - apen_phi(x, m + 1, r))
}

fn apen_phi(x: &[f64], m: usize, r: f64) -> f64 {
    let count = x.len() - m + 1;
    let mut sum = 0.0;
    for i in 0..count {
        let mut matches = 0usize;
        for j in 0..count {
            if chebyshev_within(x, i, j, m, r) {
                matches += 1;
            }
        }
        // self match guarantees matches >= 1
        sum += (matches as f64 / count as f64).ln();
    }
    sum / count as f64
}

/// Sample entropy: −ln(A/B) with self matches excluded and a strict
/// tolerance comparison, so a constant series (r = 0) has no matches and
/// takes the [`SAMPEN_CLAMP`] path. Returns [`SAMPEN_CLAMP`] when A or B
/// is zero.
pub fn sample_entropy(x: &[f64], params: &EntropyParams) -> Result<f64> {
    let m = params.m;
    if x.len() < m + 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: m + 2 });
    }
    let r = params.r * std_pop(x);
    let n = x.len();
    // both template lengths range over the same i in 0..n-m
    let count = n - m;
    let mut b = 0u64;
    let mut a = 0u64;
    for i in 0..count {
        for j in (i + 1)..count {
            if chebyshev_strictly_within(x, i, j, m, r) {
                b += 1;
                if (x[i + m] - x[j + m]).abs() < r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        return Ok(SAMPEN_CLAMP);
    }
    Ok(-((a as f64) / (b as f64)).ln())
}

/// Permutation entropy in bits over ordinal patterns of length `params.k`,
/// delay 1, ties broken by index order.
pub fn perm_entropy(x: &[f64], params: &EntropyParams) -> Result<f64> {
    let k = params.k;
    if x.len() < k + 1 {
        return Err(Error::SeriesTooShort { len: x.len(), min: k + 1 });
    }
    let windows = x.len() - k + 1;
    let mut counts: std::collections::HashMap<Vec<u8>, usize> = std::collections::HashMap::new();
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for start in 0..windows {
        order.clear();
        order.extend(0..k);
        // stable sort keeps index order on ties
        order.sort_by(|&a, &b| {
            x[start + a]
                .partial_cmp(&x[start + b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let pattern: Vec<u8> = order.iter().map(|&i| i as u8).collect();
        *counts.entry(pattern).or_insert(0) += 1;
    }
    let total = windows as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        let p = c as f64 / total;
        h -= p * p.log2();
    }
    Ok(h)
}

/// Shannon-style entropy of a positive series normalized by its maximum:
/// −Σ (x/max)·log2(x/max). Not a probability entropy; values with
/// x = max contribute zero.
pub fn shannon_entropy_norm(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    if max <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut h = 0.0;
    for &v in x {
        let norm = v / max;
        if norm > 0.0 {
            h -= norm * norm.log2();
        }
    }
    Ok(h)
}

/// Higuchi fractal dimension: −slope of log(mean curve length) vs log(k)
/// for k = 1..=kmax.
pub fn higuchi_fd(x: &[f64], params: &EntropyParams) -> Result<f64> {
    let kmax = params.kmax;
    let n = x.len();
    if n < kmax + 2 {
        return Err(Error::SeriesTooShort { len: n, min: kmax + 2 });
    }
    let mut log_k = Vec::with_capacity(kmax);
    let mut log_l = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut lengths = Vec::with_capacity(k);
        for m in 1..=k {
            let segments = (n - m) / k; // floor((N-m)/k), 1-based m
            if segments == 0 {
                continue;
            }
            let mut sum = 0.0;
            for i in 1..=segments {
                sum += (x[m - 1 + i * k] - x[m - 1 + (i - 1) * k]).abs();
            }
            let norm = (n as f64 - 1.0) / (segments as f64 * k as f64);
            lengths.push(sum * norm / k as f64);
        }
        if lengths.is_empty() {
            continue;
        }
        log_k.push((k as f64).ln());
        log_l.push(mean(&lengths).ln());
    }
    let slope = linfit_slope(&log_k, &log_l)?;
    Ok(-slope)
}

/// Least-squares slope of y against x.
pub fn linfit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::SeriesTooShort { len: x.len(), min: 2 });
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / sxx)
}

/// Hjorth mobility and complexity, derivatives taken as first differences.
pub fn hjorth(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 3 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 3 });
    }
    let sd0 = std_pop(x);
    if sd0 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let d1: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d2: Vec<f64> = d1.windows(2).map(|w| w[1] - w[0]).collect();
    let sd1 = std_pop(&d1);
    let sd2 = std_pop(&d2);
    if sd1 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mobility = sd1 / sd0;
    let complexity = (sd2 / sd1) / mobility;
    Ok((mobility, complexity))
}

/// Spectral entropy of the one-sided periodogram, zero-padded to the next
/// power of two and normalized to [0, 1] by log2 of the bin count.
pub fn spectral_entropy(x: &[f64]) -> Result<f64> {
    if x.len() < 8 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 8 });
    }
    let n = x.len().next_power_of_two();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let power: Vec<f64> = buf[..bins].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut h = 0.0;
    for p in &power {
        let p = p / total;
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    Ok(h / (bins as f64).log2())
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::SeriesTooShort { len: a.len().min(b.len()), min: 2 });
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (x, y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Linear-interpolation resample to `n` points over the same support.
pub fn resample_linear(x: &[f64], n: usize) -> Vec<f64> {
    assert!(n >= 2 && !x.is_empty());
    if x.len() == 1 {
        return vec![x[0]; n];
    }
    let last = (x.len() - 1) as f64;
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64 * last;
            let lo = t.floor() as usize;
            let hi = (lo + 1).min(x.len() - 1);
            let frac = t - lo as f64;
            x[lo] * (1.0 - frac) + x[hi] * frac
        })
        .collect()
}

/// Uniform subsample down to at most `max_len` points (keeps endpoints).
pub fn subsample(x: &[f64], max_len: usize) -> Vec<f64> {
    if x.len() <= max_len {
        return x.to_vec();
    }
    let last = (x.len() - 1) as f64;
    (0..max_len)
        .map(|i| x[(i as f64 / (max_len - 1) as f64 * last).round() as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_abs_diff_examples() {
        assert_eq!(mean_abs_diff(&[60.0, 70.0, 60.0]).unwrap(), 10.0);
        assert_eq!(mean_abs_diff(&[5.0; 10]).unwrap(), 0.0);
        assert_eq!(mean_abs_diff(&[1.0, 2.0, 4.0]).unwrap(), 1.5);
        assert!(mean_abs_diff(&[1.0]).is_err());
    }

    #[test]
    fn kurtosis_of_square_wave_is_one() {
        let x = [1.0, -1.0, 1.0, -1.0];
        assert!((kurtosis(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewness_of_symmetric_series_is_zero() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        assert!(skewness(&x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_variance_reported() {
        assert!(matches!(kurtosis(&[3.0; 5]), Err(Error::ZeroVariance)));
        assert!(matches!(hjorth(&[3.0; 5]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn approx_entropy_constant_is_zero() {
        let x = vec![4.2; 50];
        let v = approx_entropy(&x, &EntropyParams::default()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn perm_entropy_monotone_is_zero() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let v = perm_entropy(&x, &EntropyParams::default()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn perm_entropy_hand_enumeration_k2() {
        // patterns: up, down, up, down -> two patterns, p = 1/2 each
        let x = [1.0, 3.0, 2.0, 5.0, 4.0];
        let params = EntropyParams { k: 2, ..Default::default() };
        assert!((perm_entropy(&x, &params).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perm_entropy_bounded_by_log_k_factorial() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64).collect();
        let v = perm_entropy(&x, &EntropyParams::default()).unwrap();
        assert!(v <= (6.0f64).log2() + 1e-12); // 3! = 6
    }

    #[test]
    fn shannon_entropy_examples() {
        assert!(shannon_entropy_norm(&[60.0; 8]).unwrap().abs() < 1e-12);
        let v = shannon_entropy_norm(&[60.0, 120.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let pos = [10.0, 25.0, 40.0, 55.0];
        assert!(shannon_entropy_norm(&pos).unwrap() >= 0.0);
    }

    #[test]
    fn sample_entropy_constant_clamps() {
        // constant series: r = 0, strict comparison finds no matches
        let c = vec![1.0; 30];
        assert_eq!(
            sample_entropy(&c, &EntropyParams::default()).unwrap(),
            SAMPEN_CLAMP
        );
        // a slow sine has plenty of matches and a small finite SampEn
        let x: Vec<f64> = (0..100)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 50.0).sin())
            .collect();
        let v = sample_entropy(&x, &EntropyParams::default()).unwrap();
        assert!(v > 0.0 && v < SAMPEN_CLAMP);
    }

    #[test]
    fn spectral_entropy_bounds_and_ordering() {
        let n = 512;
        let sine: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 20.0 * i as f64 / n as f64).sin())
            .collect();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hs = spectral_entropy(&sine).unwrap();
        let hn = spectral_entropy(&noise).unwrap();
        assert!(hs < hn);
        for h in [hs, hn] {
            assert!((0.0..=1.0).contains(&h));
        }
    }

    #[test]
    fn higuchi_line_and_sine() {
        let line: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let params = EntropyParams::default();
        let d = higuchi_fd(&line, &params).unwrap();
        assert!((d - 1.0).abs() < 0.05, "line FD {d}");
        let sine: Vec<f64> = (0..1000)
            .map(|i| (2.0 * std::f64::consts::PI * 5.0 * i as f64 / 1000.0).sin())
            .collect();
        let ds = higuchi_fd(&sine, &params).unwrap();
        assert!(ds > 1.0 && ds < 1.5, "sine FD {ds}");
    }

    #[test]
    fn hjorth_alternating_mobility_two() {
        let x: Vec<f64> = (0..2000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (mobility, _) = hjorth(&x).unwrap();
        assert!((mobility - 2.0).abs() < 1e-6, "mobility {mobility}");
    }

    #[test]
    fn pearson_identity() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let b = [4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&a, &b).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn resample_preserves_endpoints() {
        let x = [0.0, 1.0, 4.0];
        let y = resample_linear(&x, 64);
        assert_eq!(y.len(), 64);
        assert_eq!(y[0], 0.0);
        assert_eq!(y[63], 4.0);
    }
}
