//! Discrete Fourier transform with averaged normalization.
//!
//! The forward transform is f^(a) = E_x f(x) e(-ax/N), so |f^| <= 1 for
//! 1-bounded input and Parseval reads sum_a |f^(a)|^2 = E_x |f(x)|^2. The
//! inverse uses the summed dual f(x) = sum_a f^(a) e(ax/N).
//!
//! The fast path works for arbitrary N (prime N included): radix-2 when N is
//! a power of two, Bluestein's chirp-z reduction to a power-of-two
//! convolution otherwise. A direct O(N^2) evaluation ships permanently as
//! the testing oracle.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::domain::{CyclicDomain, GroupFn};
use crate::error::{Error, Result};

/// Fourier coefficients of a function on Z_N.
#[derive(Debug, Clone)]
pub struct Spectrum {
    domain: CyclicDomain,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(domain: CyclicDomain, coeffs: Vec<Complex64>) -> Result<Self> {
        if domain.arity() != 1 {
            return Err(Error::UnsupportedDomain(
                "spectra are one-dimensional".into(),
            ));
        }
        if coeffs.len() != domain.points() {
            return Err(Error::Parameter("coefficient count != N".into()));
        }
        Ok(Spectrum { domain, coeffs })
    }

    pub fn domain(&self) -> &CyclicDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// sum_a |f^(a)|^2, the left side of Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// sum_a |f^(a)|^4; the U^2 norm is the fourth root of this.
    pub fn fourth_moment(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr().powi(2)).sum()
    }
}

fn bit_reverse(mut n: usize, bits: u32) -> usize {
    let mut r = 0usize;
    for _ in 0..bits {
        r = (r << 1) | (n & 1);
        n >>= 1;
    }
    r
}

/// In-place iterative radix-2 DIT FFT computing the unnormalized sum
/// X(a) = sum_x f(x) e(-ax/n) when `invert` is false, e(+ax/n) otherwise.
fn fft_pow2(data: &mut [Complex64], invert: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = bit_reverse(i, bits);
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if invert { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for j in 0..len / 2 {
                let u = data[i + j];
                let v = data[i + j + len / 2] * w;
                data[i + j] = u + v;
                data[i + j + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Reusable transform plan for a fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Pow2,
    Bluestein {
        m: usize,
        /// chirp[t] = exp(-i pi t^2 / n), with t^2 reduced mod 2n
        chirp: Vec<Complex64>,
        /// forward FFT of the wrapped conjugate-chirp kernel
        kernel_fft: Vec<Complex64>,
    },
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n.is_power_of_two() {
            return FftPlan {
                n,
                kind: PlanKind::Pow2,
            };
        }
        let m = (2 * n - 1).next_power_of_two();
        // half-angle chirp; reduce t^2 mod 2n before forming the angle so
        // large t lose no precision
        let chirp: Vec<Complex64> = (0..n)
            .map(|t| {
                let sq = ((t as u128 * t as u128) % (2 * n as u128)) as f64;
                let ang = -PI * sq / n as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        for t in 0..n {
            let v = chirp[t].conj();
            kernel[t] = v;
            if t > 0 {
                kernel[m - t] = v;
            }
        }
        fft_pow2(&mut kernel, false);
        FftPlan {
            n,
            kind: PlanKind::Bluestein { m, chirp, kernel_fft: kernel },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward sum X(a) = sum_x f(x) e(-ax/n).
    pub fn forward(&self, data: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(data.len(), self.n);
        match &self.kind {
            PlanKind::Pow2 => {
                let mut buf = data.to_vec();
                fft_pow2(&mut buf, false);
                buf
            }
            PlanKind::Bluestein { m, chirp, kernel_fft } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); *m];
                for x in 0..self.n {
                    buf[x] = data[x] * chirp[x];
                }
                fft_pow2(&mut buf, false);
                for (b, k) in buf.iter_mut().zip(kernel_fft.iter()) {
                    *b *= k;
                }
                fft_pow2(&mut buf, true);
                let scale = 1.0 / *m as f64;
                (0..self.n).map(|a| buf[a] * scale * chirp[a]).collect()
            }
        }
    }
}

/// Forward transform f^(a) = E_x f(x) e(-ax/N) by the fast path.
pub fn dft(f: &GroupFn) -> Result<Spectrum> {
    let d = *f.domain();
    if d.arity() != 1 {
        return Err(Error::UnsupportedDomain(
            "the transform runs over one coordinate; got arity > 1".into(),
        ));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let vals = f.complex_values()?;
    let plan = FftPlan::new(vals.len());
    Ok(dft_with_plan(&plan, d, vals))
}

/// Forward transform reusing a prepared plan (`plan.len() == N`).
pub fn dft_with_plan(plan: &FftPlan, domain: CyclicDomain, vals: &[Complex64]) -> Spectrum {
    let n = vals.len() as f64;
    let mut coeffs = plan.forward(vals);
    for c in coeffs.iter_mut() {
        *c /= n;
    }
    Spectrum {
        domain,
        coeffs,
    }
}

/// Direct O(N^2) evaluation of the forward transform; the permanent oracle.
pub fn dft_direct(f: &GroupFn) -> Result<Spectrum> {
    let d = *f.domain();
    if d.arity() != 1 {
        return Err(Error::UnsupportedDomain("direct transform needs d=1".into()));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let vals = f.complex_values()?;
    let n = vals.len();
    // twiddle table indexed by a*x mod n keeps angles small and exact
    let tw: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = -2.0 * PI * k as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect();
    let coeffs = (0..n)
        .map(|a| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &v) in vals.iter().enumerate() {
                acc += v * tw[a * x % n];
            }
            acc / n as f64
        })
        .collect();
    Ok(Spectrum { domain: d, coeffs })
}

/// Inverse transform f(x) = sum_a f^(a) e(ax/N) (summed dual).
pub fn idft(s: &Spectrum) -> GroupFn {
    let n = s.coeffs.len();
    let plan = FftPlan::new(n);
    // sum_a c_a e(+ax/n) = conj( sum_a conj(c_a) e(-ax/n) )
    let conj_in: Vec<Complex64> = s.coeffs.iter().map(|c| c.conj()).collect();
    let out = plan.forward(&conj_in);
    let vals = out.into_iter().map(|c| c.conj()).collect();
    GroupFn::complex(s.domain, vals).expect("length preserved")
}
