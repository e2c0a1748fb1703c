//! Shared numerical kernels: banded LU with multiple right-hand sides,
//! banded products and FFT-based linear convolution.

mod banded;
mod fft;

pub use banded::{BandedLu, BandedMatrix};
pub use fft::{direct_convolve, fft_convolve, FixedConvolver};
