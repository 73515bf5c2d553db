//! RF-to-IQ demodulation, delayed-sample interpolation with analytic phase
//! rotation, and natural cubic spline upsampling.

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelData;
use crate::error::{Error, Result};

/// Complex baseband data with the same shape and time axis as its RF source.
#[derive(Debug, Clone, PartialEq)]
pub struct IqData {
    pub samples: Array3<Complex64>,
    pub sampling_rate: f64,
    pub start_time: f64,
    pub center_frequency: f64,
}

impl IqData {
    pub fn n_transmissions(&self) -> usize {
        self.samples.shape()[0]
    }

    pub fn n_receivers(&self) -> usize {
        self.samples.shape()[1]
    }

    pub fn n_samples(&self) -> usize {
        self.samples.shape()[2]
    }

    /// Contiguous trace for one (transmission, receiver) pair.
    #[inline]
    pub fn trace(&self, transmission: usize, receiver: usize) -> &[Complex64] {
        let n_t = self.n_samples();
        let flat = self.samples.as_slice().expect("iq stored contiguously");
        let base = (transmission * self.n_receivers() + receiver) * n_t;
        &flat[base..base + n_t]
    }
}

/// Number of taps used for the demodulation low-pass filter.
const DEMOD_TAPS: usize = 41;

/// Linear-phase Blackman-windowed sinc low-pass with unit DC gain.
fn lowpass_taps(n_taps: usize, cutoff: f64, sampling_rate: f64) -> Vec<f64> {
    debug_assert!(n_taps % 2 == 1);
    let mid = (n_taps / 2) as isize;
    let mut taps: Vec<f64> = (0..n_taps as isize)
        .map(|k| {
            let t = (k - mid) as f64 / sampling_rate;
            let sinc = if k == mid {
                2.0 * cutoff / sampling_rate
            } else {
                (2.0 * std::f64::consts::PI * cutoff * t).sin() / (std::f64::consts::PI * t * sampling_rate)
            };
            let phase = 2.0 * std::f64::consts::PI * k as f64 / (n_taps as f64 - 1.0);
            let w = 0.42 - 0.5 * phase.cos() + 0.08 * (2.0 * phase).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Demodulate RF to complex baseband: multiply by exp(-j 2 pi f0 t), then
/// low-pass filter at the carrier frequency with a group-delay-compensated
/// odd-length FIR. No decimation: the IQ keeps the RF sampling rate.
pub fn demodulate(rf: &ChannelData) -> Result<IqData> {
    let f0 = rf.center_frequency;
    let fs = rf.sampling_rate;
    if f0 >= fs / 2.0 {
        return Err(Error::Config(format!(
            "center frequency {f0} must be below Nyquist {}",
            fs / 2.0
        )));
    }
    let taps = lowpass_taps(DEMOD_TAPS, f0, fs);
    let half = DEMOD_TAPS / 2;
    let (n_tx, n_rx, n_t) = {
        let s = rf.samples.shape();
        (s[0], s[1], s[2])
    };
    // Phase factors depend only on the sample index.
    let mix: Vec<Complex64> = (0..n_t)
        .map(|n| {
            let t = rf.start_time + n as f64 / fs;
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f0 * t)
        })
        .collect();
    let rf_flat = rf.samples.as_slice().expect("rf stored contiguously");
    let mut iq_flat = vec![Complex64::new(0.0, 0.0); n_tx * n_rx * n_t];
    iq_flat
        .par_chunks_mut(n_t)
        .enumerate()
        .for_each(|(trace_idx, out)| {
            let rf_trace = &rf_flat[trace_idx * n_t..(trace_idx + 1) * n_t];
            let mixed: Vec<Complex64> = rf_trace
                .iter()
                .zip(&mix)
                .map(|(&v, &m)| m * v)
                .collect();
            // 'same' convolution, zero padded, group delay removed
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &tap) in taps.iter().enumerate() {
                    let j = i as isize + half as isize - k as isize;
                    if j >= 0 && (j as usize) < n_t {
                        acc += mixed[j as usize] * tap;
                    }
                }
                *o = acc;
            }
        });
    let samples = Array3::from_shape_vec((n_tx, n_rx, n_t), iq_flat)
        .map_err(|e| Error::Data(format!("iq shape: {e}")))?;
    Ok(IqData {
        samples,
        sampling_rate: fs,
        start_time: rf.start_time,
        center_frequency: f0,
    })
}

/// Sample one IQ trace at absolute time `tau` by linear interpolation and
/// rotate by exp(-j 2 pi f0 tau). Out-of-range delays contribute zero; the
/// zero is the documented sentinel, not an error.
#[inline]
pub fn sample_delayed(
    trace: &[Complex64],
    sampling_rate: f64,
    start_time: f64,
    tau: f64,
    center_frequency: f64,
) -> Complex64 {
    let pos = (tau - start_time) * sampling_rate;
    if !(pos >= 0.0) || pos > (trace.len() - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let i = pos as usize;
    let frac = pos - i as f64;
    let v = if frac == 0.0 {
        trace[i]
    } else {
        trace[i] * (1.0 - frac) + trace[i + 1] * frac
    };
    v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * center_frequency * tau)
}

/// Cubic spline upsampling with natural boundary conditions. The output has
/// `(n - 1) * factor + 1` points and passes exactly through the input knots.
pub fn spline_upsample(profile: &[f64], factor: usize) -> Result<Vec<f64>> {
    let n = profile.len();
    if n < 4 {
        return Err(Error::Config(format!(
            "spline interpolation needs at least 4 points, got {n}"
        )));
    }
    if factor == 0 {
        return Err(Error::Config("upsampling factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(profile.to_vec());
    }
    let m2 = natural_spline_second_derivatives(profile);
    let mut out = Vec::with_capacity((n - 1) * factor + 1);
    for seg in 0..n - 1 {
        for s in 0..factor {
            let t = s as f64 / factor as f64;
            // unit knot spacing; scale handled by the caller's axis
            let a = 1.0 - t;
            let v = a * profile[seg]
                + t * profile[seg + 1]
                + ((a * a * a - a) * m2[seg] + (t * t * t - t) * m2[seg + 1]) / 6.0;
            out.push(if s == 0 { profile[seg] } else { v });
        }
    }
    out.push(profile[n - 1]);
    Ok(out)
}

/// Second derivatives of the natural cubic spline on unit-spaced knots,
/// solved with the Thomas algorithm.
fn natural_spline_second_derivatives(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut m2 = vec![0.0f64; n];
    if n < 3 {
        return m2;
    }
    let interior = n - 2;
    let mut diag = vec![4.0f64; interior];
    let mut rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]))
        .collect();
    for i in 1..interior {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m2[n - 2] = rhs[interior - 1] / diag[interior - 1];
    for i in (0..interior - 1).rev() {
        m2[i + 1] = (rhs[i] - m2[i + 2]) / diag[i];
    }
    m2
}
