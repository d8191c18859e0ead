//! Gowers uniformity norms by several independent routes.
//!
//! `gowers_naive` evaluates the defining average directly and is the
//! permanent ground-truth oracle. `gowers_recursive` peels one derivative at
//! a time down to a U^2 base computed from the spectrum, `gowers_via_ssf`
//! averages |E_x D_h f(x)|^2 over direction tuples, and `gowers_fast` is the
//! production path: the recursive route with the top-level average fanned
//! out across workers and reduced by a fixed pairwise tree, so results are
//! bit-stable across runs at any worker count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::domain::{CyclicDomain, GroupFn};
use crate::error::{Error, Result};
use crate::fourier::{dft_with_plan, FftPlan};
use crate::tolerances::NORM_IMAG;

/// Which route produced a norm value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Naive,
    Recursive,
    Ssf,
    Fast,
}

/// A computed uniformity norm: the U^{s+1} norm of the input.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    /// Degree: the report holds the U^{s+1} norm.
    pub s: u32,
    pub value: f64,
    pub method: NormMethod,
    /// Rough operation-count estimate for the route taken.
    pub cost: u128,
}

fn check_input(f: &GroupFn, s: u32) -> Result<()> {
    if s < 1 {
        return Err(Error::Parameter("degree s must be >= 1".into()));
    }
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain(
            "uniformity norms are computed on Z_N (arity 1)".into(),
        ));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    Ok(())
}

#[inline]
fn derive(vals: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = vals.len();
    (0..n).map(|x| vals[x] * vals[(x + h) % n].conj()).collect()
}

fn mean(vals: &[Complex64]) -> Complex64 {
    let s: Complex64 = vals.iter().sum();
    s / vals.len() as f64
}

/// Fixed pairwise tree reduction; independent of chunking and worker count.
fn tree_sum(vals: &[f64]) -> f64 {
    match vals.len() {
        0 => 0.0,
        1 => vals[0],
        n => {
            let mid = n / 2;
            tree_sum(&vals[..mid]) + tree_sum(&vals[mid..])
        }
    }
}

/// Take the 2^{s+1}-th root of the averaged derivative power, checking that
/// the average is real and nonnegative up to rounding. Tiny negatives are
/// clamped; anything beyond tolerance indicates a broken computation.
fn root_of_power(p: Complex64, s: u32) -> Result<f64> {
    if p.im.abs() > NORM_IMAG {
        return Err(Error::InternalConsistency(format!(
            "norm power has imaginary part {:.3e}",
            p.im
        )));
    }
    let mut re = p.re;
    if re < 0.0 {
        if re < -NORM_IMAG {
            return Err(Error::InternalConsistency(format!(
                "norm power is negative: {re:.3e}"
            )));
        }
        re = 0.0;
    }
    Ok(re.powf(1.0 / (1u64 << (s + 1)) as f64))
}

fn naive_mean(vals: &[Complex64], depth: u32) -> Complex64 {
    if depth == 0 {
        return mean(vals);
    }
    let n = vals.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for h in 0..n {
        acc += naive_mean(&derive(vals, h), depth - 1);
    }
    acc / n as f64
}

/// U^{s+1} norm straight from the definition:
/// (E_{h in Z_N^{s+1}} E_x D_h f(x))^{1/2^{s+1}}.
pub fn gowers_naive(f: &GroupFn, s: u32, budget: &Budget) -> Result<NormReport> {
    check_input(f, s)?;
    let n = f.domain().points();
    let cost = (n as u128).pow(s + 2);
    budget.check(cost, &format!("naive U^{} norm at N={n}", s + 1))?;
    let p = naive_mean(f.complex_values()?, s + 1);
    Ok(NormReport {
        s,
        value: root_of_power(p, s)?,
        method: NormMethod::Naive,
        cost,
    })
}

/// ||g||_{U^{s+1}}^{2^{s+1}} by recursion on the degree, with the U^2 base
/// read off the spectrum.
fn recursive_power(vals: &[Complex64], s: u32, domain: CyclicDomain, plan: &FftPlan) -> f64 {
    if s == 1 {
        return dft_with_plan(plan, domain, vals).fourth_moment();
    }
    let n = vals.len();
    let per_h: Vec<f64> = (0..n)
        .map(|h| recursive_power(&derive(vals, h), s - 1, domain, plan))
        .collect();
    tree_sum(&per_h) / n as f64
}

fn recursive_cost(n: usize, s: u32) -> u128 {
    // one transform per U^2 leaf, N^{s-1} leaves
    let fft = (n as u128) * (1 + n.ilog2() as u128);
    (n as u128).pow(s.saturating_sub(1)) * (fft + 4 * n as u128)
}

/// U^{s+1} norm via the recursion ||f||^{2^{s+1}} = E_h ||D_h f||^{2^s}.
pub fn gowers_recursive(f: &GroupFn, s: u32, budget: &Budget) -> Result<NormReport> {
    check_input(f, s)?;
    let n = f.domain().points();
    let cost = recursive_cost(n, s);
    budget.check(cost, &format!("recursive U^{} norm at N={n}", s + 1))?;
    let plan = FftPlan::new(n);
    let p = recursive_power(f.complex_values()?, s, *f.domain(), &plan);
    Ok(NormReport {
        s,
        value: root_of_power(Complex64::new(p, 0.0), s)?,
        method: NormMethod::Recursive,
        cost,
    })
}

/// Production path: the recursive route with the top-level average computed
/// in parallel. Deterministic: per-h values are collected into a fixed
/// array and reduced by a pairwise tree, so the result does not depend on
/// the worker count.
pub fn gowers_fast(f: &GroupFn, s: u32, budget: &Budget) -> Result<NormReport> {
    check_input(f, s)?;
    let n = f.domain().points();
    let cost = recursive_cost(n, s);
    budget.check(cost, &format!("fast U^{} norm at N={n}", s + 1))?;
    let vals = f.complex_values()?;
    let domain = *f.domain();
    let p = if s == 1 {
        let plan = FftPlan::new(n);
        dft_with_plan(&plan, domain, vals).fourth_moment()
    } else {
        let per_h: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(
                || FftPlan::new(n),
                |plan, h| recursive_power(&derive(vals, h), s - 1, domain, plan),
            )
            .collect();
        tree_sum(&per_h) / n as f64
    };
    Ok(NormReport {
        s,
        value: root_of_power(Complex64::new(p, 0.0), s)?,
        method: NormMethod::Fast,
        cost,
    })
}

/// U^2 norm from the fourth moment of the spectrum:
/// ||f||_{U^2}^4 = sum_a |f^(a)|^4.
pub fn u2_via_fourier(f: &GroupFn) -> Result<NormReport> {
    check_input(f, 1)?;
    let n = f.domain().points();
    let plan = FftPlan::new(n);
    let p = dft_with_plan(&plan, *f.domain(), f.complex_values()?).fourth_moment();
    Ok(NormReport {
        s: 1,
        value: root_of_power(Complex64::new(p, 0.0), 1)?,
        method: NormMethod::Fast,
        cost: recursive_cost(n, 1),
    })
}

/// S f(h) = E_x D_h f(x) for a direction tuple of any length.
pub fn ssf(f: &GroupFn, hs: &[usize]) -> Result<Complex64> {
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain("ssf runs on Z_N".into()));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let mut vals = f.complex_values()?.to_vec();
    for &h in hs {
        vals = derive(&vals, h);
    }
    Ok(mean(&vals))
}

fn ssf_power(vals: &[Complex64], remaining: u32) -> f64 {
    if remaining == 0 {
        return mean(vals).norm_sqr();
    }
    let n = vals.len();
    let per_h: Vec<f64> = (0..n)
        .map(|h| ssf_power(&derive(vals, h), remaining - 1))
        .collect();
    tree_sum(&per_h) / n as f64
}

/// U^{s+1} norm via the mean-square of S f over s-tuples:
/// ||f||_{U^{s+1}}^{2^{s+1}} = E_{h in Z_N^s} |S f(h)|^2.
pub fn gowers_via_ssf(f: &GroupFn, s: u32, budget: &Budget) -> Result<NormReport> {
    if s < 2 {
        return Err(Error::Parameter(
            "the S-function route needs degree s >= 2".into(),
        ));
    }
    check_input(f, s)?;
    let n = f.domain().points();
    let cost = (n as u128).pow(s + 1);
    budget.check(cost, &format!("S-function U^{} norm at N={n}", s + 1))?;
    let p = ssf_power(f.complex_values()?, s);
    Ok(NormReport {
        s,
        value: root_of_power(Complex64::new(p, 0.0), s)?,
        method: NormMethod::Ssf,
        cost,
    })
}
