//! Iterative radix-2 FFT over f64.

use num_complex::Complex64;

use super::DspError;

/// Precomputed twiddles and bit-reversal table for one power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self, DspError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(DspError::NotPowerOfTwo(n));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform, `X[k] = sum_t x[t] exp(-2 pi i k t / n)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length must equal FFT size");
        for i in 0..self.n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.n {
            let stride = self.n / (2 * half);
            for start in (0..self.n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    /// In-place inverse transform including the `1/n` scale.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }

    /// Zero-pads `frame` to the transform size and returns bins `0..=n/2`.
    pub fn real_forward(&self, frame: &[f64]) -> Result<Vec<Complex64>, DspError> {
        if frame.len() > self.n {
            return Err(DspError::FrameTooLong {
                len: frame.len(),
                nfft: self.n,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (b, &x) in buf.iter_mut().zip(frame) {
            b.re = x;
        }
        self.forward(&mut buf);
        buf.truncate(self.n / 2 + 1);
        Ok(buf)
    }

    /// Inverse of [`Fft::real_forward`]: rebuilds the conjugate-symmetric
    /// spectrum from `n/2 + 1` bins and returns the real part.
    pub fn real_inverse(&self, half: &[Complex64]) -> Result<Vec<f64>, DspError> {
        if half.len() != self.n / 2 + 1 {
            return Err(DspError::ShapeMismatch(format!(
                "half spectrum has {} bins, expected {}",
                half.len(),
                self.n / 2 + 1
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        buf[..half.len()].copy_from_slice(half);
        for k in 1..self.n / 2 {
            buf[self.n - k] = half[k].conj();
        }
        self.inverse(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }
}

/// Half-spectrum of `frame` zero-padded to `nfft`.
pub fn fft_real(frame: &[f64], nfft: usize) -> Result<Vec<Complex64>, DspError> {
    Fft::new(nfft)?.real_forward(frame)
}

/// Smallest power of two that is at least `len` (1 for `len == 0`).
pub fn next_pow2(len: usize) -> usize {
    len.max(1).next_power_of_two()
}
