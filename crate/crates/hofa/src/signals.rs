//! Generator catalog for test signals and the CLI `gen` command.
//!
//! Every randomized generator takes an explicit seed and is deterministic
//! given it: same seed, same bytes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::domain::{CyclicDomain, GroupFn};
use crate::error::{Error, Result};

/// e(P(x)) for P(x) = (c_0 + c_1 x + ... + c_m x^m)/N, coefficients in
/// ascending degree order.
pub fn phase_poly(domain: CyclicDomain, coeffs: &[i64]) -> Result<GroupFn> {
    if domain.arity() != 1 {
        return Err(Error::UnsupportedDomain("phase signals live on Z_N".into()));
    }
    let n = domain.modulus() as i64;
    let vals = (0..n)
        .map(|x| {
            let mut acc = 0i64;
            let mut pw = 1i64;
            for &c in coeffs {
                acc = (acc + c.rem_euclid(n) * pw).rem_euclid(n);
                pw = pw * x % n;
            }
            Complex64::new(0.0, TAU * acc as f64 / n as f64).exp()
        })
        .collect();
    GroupFn::complex(domain, vals)
}

/// The phase numerator table of `phase_poly` as an exact rational function
/// x -> (P(x) mod N)/N.
pub fn phase_poly_rational(domain: CyclicDomain, coeffs: &[i64]) -> Result<GroupFn> {
    if domain.arity() != 1 {
        return Err(Error::UnsupportedDomain("phase signals live on Z_N".into()));
    }
    let n = domain.modulus() as i64;
    let num = (0..n)
        .map(|x| {
            let mut acc = 0i64;
            let mut pw = 1i64;
            for &c in coeffs {
                acc = (acc + c.rem_euclid(n) * pw).rem_euclid(n);
                pw = pw * x % n;
            }
            acc
        })
        .collect();
    GroupFn::rational(domain, num, n)
}

/// Bracket linear {ax/N} as an exact rational function (denominator N).
pub fn bracket_linear_fn(domain: CyclicDomain, a: i64) -> Result<GroupFn> {
    if domain.arity() != 1 {
        return Err(Error::UnsupportedDomain("bracket signals live on Z_N".into()));
    }
    let n = domain.modulus() as i64;
    let num = (0..n).map(|x| (a * x).rem_euclid(n)).collect();
    GroupFn::rational(domain, num, n)
}

/// Bracket quadratic {ax/N}{bx/N} as an exact rational function
/// (denominator N^2).
pub fn bracket_quadratic_fn(domain: CyclicDomain, a: i64, b: i64) -> Result<GroupFn> {
    if domain.arity() != 1 {
        return Err(Error::UnsupportedDomain("bracket signals live on Z_N".into()));
    }
    let n = domain.modulus() as i64;
    let num = (0..n)
        .map(|x| (a * x).rem_euclid(n) * (b * x).rem_euclid(n))
        .collect();
    GroupFn::rational(domain, num, n * n)
}

/// The unit-modulus phase e({ax/N}{bx/N}).
pub fn bracket_quadratic_phase(domain: CyclicDomain, a: i64, b: i64) -> Result<GroupFn> {
    let g = bracket_quadratic_fn(domain, a, b)?;
    let (num, den) = g.rational_values()?;
    let vals = num
        .iter()
        .map(|&k| Complex64::new(0.0, TAU * k as f64 / den as f64).exp())
        .collect();
    GroupFn::complex(domain, vals)
}

/// Seeded uniform unimodular values.
pub fn random_unimodular(domain: CyclicDomain, seed: u64) -> Result<GroupFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..domain.points())
        .map(|_| Complex64::new(0.0, TAU * rng.gen::<f64>()).exp())
        .collect();
    GroupFn::complex(domain, vals)
}

/// Seeded random signs (+1/-1).
pub fn random_signs(domain: CyclicDomain, seed: u64) -> Result<GroupFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..domain.points())
        .map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect();
    GroupFn::complex(domain, vals)
}

/// weight * base + (1 - weight) * seeded unimodular noise.
pub fn mix(base: &GroupFn, weight: f64, seed: u64) -> Result<GroupFn> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::Parameter("mixture weight must be in [0, 1]".into()));
    }
    let noise = random_unimodular(*base.domain(), seed)?;
    let b = base.complex_values()?;
    let nv = noise.complex_values()?;
    let vals = b
        .iter()
        .zip(nv)
        .map(|(x, y)| weight * x + (1.0 - weight) * y)
        .collect();
    GroupFn::complex(*base.domain(), vals)
}

/// Constant complex function.
pub fn constant(domain: CyclicDomain, value: Complex64) -> Result<GroupFn> {
    GroupFn::complex(domain, vec![value; domain.points()])
}
