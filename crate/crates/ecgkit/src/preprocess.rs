//! Noise removal: zero-phase band-pass and powerline notch filtering, plus
//! length conditioning for the stationary wavelet transform.
//!
//! The band-pass is a 4th-order Butterworth (2nd-order low-pass prototype
//! transformed to band-pass, bilinear transform with prewarping). The notch
//! is a 2nd-order IIR with quality factor Q = 30. Both are applied
//! forward-backward with odd reflection padding and steady-state initial
//! conditions, so the output is zero phase and the same length as the input.

use num_complex::Complex64;

use crate::domain::EcgRecord;
use crate::error::{Error, Result};

pub const DEFAULT_LOW_HZ: f64 = 1.0;
pub const DEFAULT_HIGH_HZ: f64 = 150.0;
pub const DEFAULT_NOTCH_HZ: f64 = 50.0;
pub const NOTCH_Q: f64 = 30.0;

/// Digital IIR filter as transfer-function coefficients, `a[0] == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl FilterSpec {
    pub fn order(&self) -> usize {
        self.a.len().max(self.b.len()) - 1
    }

    /// Magnitude response at frequency `hz` for sampling rate `fs_hz`.
    pub fn magnitude_at(&self, hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * hz / fs_hz;
        let z = Complex64::new(w.cos(), -w.sin()); // z^-1
        let num: Complex64 = self
            .b
            .iter()
            .enumerate()
            .map(|(k, &c)| c * z.powu(k as u32))
            .sum();
        let den: Complex64 = self
            .a
            .iter()
            .enumerate()
            .map(|(k, &c)| c * z.powu(k as u32))
            .sum();
        (num / den).norm()
    }
}

/// Design the 4th-order Butterworth band-pass for `fs_hz`.
pub fn design_bandpass(low_hz: f64, high_hz: f64, fs_hz: f64) -> Result<FilterSpec> {
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < fs_hz / 2.0) {
        return Err(Error::SamplingRateTooLow {
            fs_hz,
            cutoff_hz: high_hz,
        });
    }
    let n = 4; // low-pass prototype order; band-pass doubles the pole count
    let fs2 = 2.0 * fs_hz;
    // prewarped edge frequencies
    let w1 = fs2 * (std::f64::consts::PI * low_hz / fs_hz).tan();
    let w2 = fs2 * (std::f64::consts::PI * high_hz / fs_hz).tan();
    let w0 = (w1 * w2).sqrt();
    let bw = w2 - w1;

    // Butterworth prototype poles on the unit circle, left half plane
    let mut poles: Vec<Complex64> = (1..=n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    // low-pass -> band-pass: s -> (s^2 + w0^2)/(bw*s)
    let mut bp_poles = Vec::with_capacity(2 * n);
    for p in poles.drain(..) {
        let half = p * (bw / 2.0);
        let disc = (half * half - Complex64::new(w0 * w0, 0.0)).sqrt();
        bp_poles.push(half + disc);
        bp_poles.push(half - disc);
    }
    let bp_zeros = vec![Complex64::new(0.0, 0.0); n];
    let gain = bw.powi(n as i32);

    // bilinear transform
    let mut z_poles = Vec::with_capacity(bp_poles.len());
    let mut z_zeros = Vec::with_capacity(bp_poles.len());
    let mut k_num = Complex64::new(1.0, 0.0);
    let mut k_den = Complex64::new(1.0, 0.0);
    for &s in &bp_zeros {
        z_zeros.push((Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s));
        k_num *= Complex64::new(fs2, 0.0) - s;
    }
    for &s in &bp_poles {
        z_poles.push((Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s));
        k_den *= Complex64::new(fs2, 0.0) - s;
    }
    // degree deficit becomes zeros at z = -1
    while z_zeros.len() < z_poles.len() {
        z_zeros.push(Complex64::new(-1.0, 0.0));
    }
    let k = gain * (k_num / k_den).re;

    let b: Vec<f64> = poly_from_roots(&z_zeros).iter().map(|c| c.re * k).collect();
    let a: Vec<f64> = poly_from_roots(&z_poles).iter().map(|c| c.re).collect();
    Ok(FilterSpec { b, a })
}

/// Design the 2nd-order notch at `center_hz` with quality factor `q`.
pub fn design_notch(center_hz: f64, q: f64, fs_hz: f64) -> Result<FilterSpec> {
    if center_hz <= 0.0 || center_hz >= fs_hz / 2.0 {
        return Err(Error::SamplingRateTooLow {
            fs_hz,
            cutoff_hz: center_hz,
        });
    }
    let w0 = 2.0 * std::f64::consts::PI * center_hz / fs_hz;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    Ok(FilterSpec {
        b: vec![1.0 / a0, -2.0 * w0.cos() / a0, 1.0 / a0],
        a: vec![1.0, -2.0 * w0.cos() / a0, (1.0 - alpha) / a0],
    })
}

/// Polynomial coefficients (ascending in z^-1) from roots.
fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        poly = next;
    }
    poly
}

/// Steady-state initial conditions so a step input starts in equilibrium.
fn lfilter_zi(b: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut bb = b.to_vec();
    let mut aa = a.to_vec();
    bb.resize(n, 0.0);
    aa.resize(n, 0.0);
    let m = n - 1;
    // I - companion(a)^T
    let mut mat = vec![vec![0.0; m]; m];
    for (i, row) in mat.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let companion_ji = if j == 0 {
                -aa[i + 1] / aa[0]
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            };
            *cell = if i == j { 1.0 } else { 0.0 } - companion_ji;
        }
    }
    let rhs: Vec<f64> = (0..m).map(|i| bb[i + 1] - aa[i + 1] * bb[0]).collect();
    solve_dense(mat, rhs)
}

/// Gaussian elimination with partial pivoting for the small zi system.
fn solve_dense(mut mat: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))
            .unwrap();
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let diag = mat[col][col];
        for row in (col + 1)..n {
            let factor = mat[row][col] / diag;
            for k in col..n {
                mat[row][k] -= factor * mat[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= mat[row][k] * x[k];
        }
        x[row] = acc / mat[row][row];
    }
    x
}

/// Direct-form II transposed single-pass filter with initial state `zi`.
fn lfilter(b: &[f64], a: &[f64], x: &[f64], zi: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut bb = b.to_vec();
    let mut aa = a.to_vec();
    bb.resize(n, 0.0);
    aa.resize(n, 0.0);
    let mut state = zi.to_vec();
    state.resize(n - 1, 0.0);
    let mut y = Vec::with_capacity(x.len());
    for &xv in x {
        let yv = bb[0] * xv + state.first().copied().unwrap_or(0.0);
        for i in 0..state.len() {
            let next = if i + 1 < state.len() { state[i + 1] } else { 0.0 };
            state[i] = bb[i + 1] * xv + next - aa[i + 1] * yv;
        }
        y.push(yv);
    }
    y
}

/// Zero-phase forward-backward filtering with odd reflection padding of
/// three filter lengths.
pub fn filtfilt(spec: &FilterSpec, x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let pad = 3 * spec.a.len().max(spec.b.len());
    if x.len() <= pad {
        return Err(Error::SignalTooShort {
            len: x.len(),
            min: pad + 1,
        });
    }
    let mut ext = Vec::with_capacity(x.len() + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    let last = *x.last().unwrap();
    for i in 1..=pad {
        ext.push(2.0 * last - x[x.len() - 1 - i]);
    }

    let zi = lfilter_zi(&spec.b, &spec.a);
    let zi_fwd: Vec<f64> = zi.iter().map(|z| z * ext[0]).collect();
    let mut y = lfilter(&spec.b, &spec.a, &ext, &zi_fwd);
    y.reverse();
    let zi_bwd: Vec<f64> = zi.iter().map(|z| z * y[0]).collect();
    let mut y = lfilter(&spec.b, &spec.a, &y, &zi_bwd);
    y.reverse();
    Ok(y[pad..pad + x.len()].to_vec())
}

/// Band-pass filter a record (zero phase, same length).
pub fn bandpass(record: &EcgRecord, low_hz: f64, high_hz: f64) -> Result<EcgRecord> {
    if record.fs_hz <= 2.0 * high_hz {
        return Err(Error::SamplingRateTooLow {
            fs_hz: record.fs_hz,
            cutoff_hz: high_hz,
        });
    }
    let spec = design_bandpass(low_hz, high_hz, record.fs_hz)?;
    let samples = filtfilt(&spec, &record.samples)?;
    Ok(EcgRecord {
        samples,
        ..record.clone()
    })
}

/// Powerline notch filter a record (zero phase, same length).
pub fn notch(record: &EcgRecord, center_hz: f64) -> Result<EcgRecord> {
    let spec = design_notch(center_hz, NOTCH_Q, record.fs_hz)?;
    let samples = filtfilt(&spec, &record.samples)?;
    Ok(EcgRecord {
        samples,
        ..record.clone()
    })
}

/// Zero-append to the next multiple of `block` (a power of two).
pub fn pad_to_multiple(samples: &[f64], block: usize) -> Result<Vec<f64>> {
    assert!(block.is_power_of_two(), "block must be a power of two");
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let target = samples.len().div_ceil(block) * block;
    let mut out = samples.to_vec();
    out.resize(target, 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(hz: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * hz * i as f64 / fs).sin())
            .collect()
    }

    fn peak_amplitude(x: &[f64], skip: usize) -> f64 {
        x[skip..x.len() - skip]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn bandpass_rejects_dc() {
        let record = EcgRecord::new("dc", 500.0, vec![5.0; 5000]);
        let out = bandpass(&record, 1.0, 150.0).unwrap();
        assert_eq!(out.samples.len(), 5000);
        let max = out.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 0.05, "DC leak {max}");
    }

    #[test]
    fn bandpass_passband_and_stopband() {
        let fs = 500.0;
        let spec = design_bandpass(1.0, 150.0, fs).unwrap();
        // response oracle straight from the designed coefficients
        assert!(spec.magnitude_at(0.0, fs) < 1e-6);
        let h10 = spec.magnitude_at(10.0, fs).powi(2); // filtfilt squares it
        assert!(20.0 * h10.log10() > -1.0 && 20.0 * h10.log10() < 1.0);
        let h200 = spec.magnitude_at(200.0, fs).powi(2);
        assert!(20.0 * h200.log10() < -20.0);

        // and measured on generated sinusoids
        let record = EcgRecord::new("s10", fs, sine(10.0, fs, 5000));
        let out = bandpass(&record, 1.0, 150.0).unwrap();
        let amp = peak_amplitude(&out.samples, 250); // discard 0.5 s edges
        let db = 20.0 * amp.log10();
        assert!(db.abs() <= 1.0, "10 Hz passband {db} dB");

        let record = EcgRecord::new("s200", fs, sine(200.0, fs, 5000));
        let out = bandpass(&record, 1.0, 150.0).unwrap();
        let amp = peak_amplitude(&out.samples, 250);
        assert!(amp <= 0.1, "200 Hz leak {amp}");
    }

    #[test]
    fn notch_kills_powerline_keeps_signal() {
        let fs = 500.0;
        let record = EcgRecord::new("n50", fs, sine(50.0, fs, 5000));
        let out = notch(&record, 50.0).unwrap();
        // Q = 30 rings for ~0.2 s; discard 1.5 s edges before measuring
        let amp = peak_amplitude(&out.samples, 750);
        assert!(amp <= 0.03, "50 Hz leak {amp}");

        let record = EcgRecord::new("n10", fs, sine(10.0, fs, 5000));
        let out = notch(&record, 50.0).unwrap();
        let amp = peak_amplitude(&out.samples, 250);
        let db = 20.0 * amp.log10();
        assert!(db.abs() <= 0.5, "10 Hz through notch {db} dB");
    }

    #[test]
    fn zero_in_zero_out() {
        let record = EcgRecord::new("z", 500.0, vec![0.0; 1000]);
        let out = notch(&record, 50.0).unwrap();
        assert!(out.samples.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn filtering_is_linear() {
        let fs = 500.0;
        let x = sine(7.0, fs, 2000);
        let y = sine(23.0, fs, 2000);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let spec = design_bandpass(1.0, 150.0, fs).unwrap();
        let fx = filtfilt(&spec, &x).unwrap();
        let fy = filtfilt(&spec, &y).unwrap();
        let fc = filtfilt(&spec, &combo).unwrap();
        let scale = fc.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1.0);
        for i in 0..fc.len() {
            let expect = 2.0 * fx[i] - 0.5 * fy[i];
            assert!((fc[i] - expect).abs() / scale < 1e-9);
        }
    }

    #[test]
    fn notch_magnitude_never_amplifies() {
        let fs = 500.0;
        let spec = design_notch(50.0, NOTCH_Q, fs).unwrap();
        for i in 0..=1000 {
            let hz = 250.0 * i as f64 / 1000.0;
            let mag = spec.magnitude_at(hz, fs);
            assert!(mag.powi(2) <= 1.0 + 1e-6, "notch gain {mag} at {hz} Hz");
        }
    }

    #[test]
    fn pad_examples() {
        let padded = pad_to_multiple(&vec![1.0; 5000], 128).unwrap();
        assert_eq!(padded.len(), 5120);
        assert!(padded[5000..].iter().all(|&v| v == 0.0));
        assert_eq!(padded[..5000], vec![1.0; 5000][..]);

        let unchanged = pad_to_multiple(&vec![2.0; 128], 128).unwrap();
        assert_eq!(unchanged.len(), 128);

        assert!(matches!(pad_to_multiple(&[], 128), Err(Error::EmptySignal)));
    }

    #[test]
    fn short_signal_rejected() {
        let record = EcgRecord::new("short", 500.0, vec![1.0; 10]);
        assert!(matches!(
            bandpass(&record, 1.0, 150.0),
            Err(Error::SignalTooShort { .. })
        ));
    }
}
