use num_complex::Complex64;
use rustfft::FftPlanner;

/// Linear (non-circular) convolution of `a` and `b`, of length
/// `a.len() + b.len() - 1`. Both sequences are zero-padded to the next
/// power of two before the transform.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let pad = |x: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (dst, &v) in buf.iter_mut().zip(x) {
            dst.re = v;
        }
        buf
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..out_len].iter().map(|z| z.re * scale).collect()
}

/// Linear convolution against a fixed sequence, with the transform of that
/// sequence and the FFT plans cached across calls.
#[derive(Clone)]
pub struct FixedConvolver {
    size: usize,
    kernel_len: usize,
    spectrum: Vec<Complex64>,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex64>,
}

impl FixedConvolver {
    /// Prepares convolution of `kernel` with sequences of length up to
    /// `max_len`.
    pub fn new(kernel: &[f64], max_len: usize) -> Self {
        let size = (kernel.len() + max_len.max(1) - 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); size];
        for (dst, &v) in spectrum.iter_mut().zip(kernel) {
            dst.re = v;
        }
        forward.process(&mut spectrum);
        FixedConvolver {
            size,
            kernel_len: kernel.len(),
            spectrum,
            forward,
            inverse,
            buf: vec![Complex64::new(0.0, 0.0); size],
        }
    }

    /// Writes the first `out.len()` entries of `kernel * b`.
    pub fn convolve_into(&mut self, b: &[f64], out: &mut [f64]) {
        assert!(self.kernel_len + b.len() - 1 <= self.size);
        self.buf.fill(Complex64::new(0.0, 0.0));
        for (dst, &v) in self.buf.iter_mut().zip(b) {
            dst.re = v;
        }
        self.forward.process(&mut self.buf);
        for (x, y) in self.buf.iter_mut().zip(&self.spectrum) {
            *x *= y;
        }
        self.inverse.process(&mut self.buf);
        let scale = 1.0 / self.size as f64;
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z.re * scale;
        }
    }
}

impl std::fmt::Debug for FixedConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedConvolver")
            .field("size", &self.size)
            .field("kernel_len", &self.kernel_len)
            .finish()
    }
}

/// Direct O(n·m) convolution.
pub fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_impulse_is_identity() {
        let b = [0.5, -1.25, 3.0, 7.0];
        let c = fft_convolve(&[1.0], &b);
        for (x, y) in c.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn binomial() {
        let c = fft_convolve(&[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(c.len(), 3);
        for (x, y) in c.iter().zip(&[1.0, 2.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
