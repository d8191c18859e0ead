//! Executable inverse theory: correlation, the exact U^2 inverse algorithm,
//! brute-force polynomial-phase search, the character-field construction,
//! and diagonal projection of multi-variable phases.
//!
//! The U^2 inverse is a one-liner off the spectrum: the largest Fourier
//! coefficient is the correlating character, and for 1-bounded input its
//! magnitude is at least the squared U^2 norm. Higher degrees get an
//! exhaustive desk-scale search over the polynomial phase family instead;
//! exhaustiveness is what makes the search usable as an oracle.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::budget::Budget;
use crate::domain::{CyclicDomain, GroupFn};
use crate::error::{Error, Result};
use crate::fourier::{dft_with_plan, FftPlan};
use crate::tolerances::ARGMAX_SLACK;

/// Witnessed correlation: the structured function g found, a human-readable
/// description, its defining integer parameters, and |E_x f(x) conj(g(x))|.
#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub label: String,
    pub params: Vec<i64>,
    pub correlation: f64,
    pub witness: GroupFn,
}

/// |E_x f(x) conj(g(x))| over a shared domain.
pub fn correlate(f: &GroupFn, g: &GroupFn) -> Result<f64> {
    if f.domain() != g.domain() {
        return Err(Error::DomainMismatch(format!(
            "Z_{}^{} vs Z_{}^{}",
            f.domain().modulus(),
            f.domain().arity(),
            g.domain().modulus(),
            g.domain().arity()
        )));
    }
    if !f.is_total() || !g.is_total() {
        return Err(Error::MaskedInput);
    }
    let fv = f.complex_values()?;
    let gv = g.complex_values()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in fv.iter().zip(gv) {
        acc += a * b.conj();
    }
    Ok((acc / fv.len() as f64).norm())
}

/// Scan for the maximal value with deterministic ties: a candidate replaces
/// the incumbent only when strictly larger by more than the argmax slack, so
/// equal magnitudes resolve to the smallest index regardless of rounding.
fn argmax_with_slack(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0usize;
    for (i, v) in values.enumerate() {
        if v > best + ARGMAX_SLACK {
            best = v;
            best_idx = i;
        }
    }
    (best_idx, best)
}

/// Materialize x -> e(a x / N).
fn character(domain: CyclicDomain, a: u32) -> GroupFn {
    let n = domain.modulus() as u64;
    let vals = (0..domain.points() as u64)
        .map(|x| {
            let t = (a as u64 * x % n) as f64 / n as f64;
            Complex64::new(0.0, TAU * t).exp()
        })
        .collect();
    GroupFn::complex(domain, vals).expect("sized")
}

/// U^2 inverse: the frequency with the largest Fourier coefficient and its
/// magnitude. For 1-bounded f the returned correlation is at least
/// ||f||_{U^2}^2.
pub fn u2_inverse(f: &GroupFn) -> Result<CorrelationResult> {
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain("u2 inverse runs on Z_N".into()));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let vals = f.complex_values()?;
    let plan = FftPlan::new(vals.len());
    let spec = dft_with_plan(&plan, *f.domain(), vals);
    let (alpha, corr) = argmax_with_slack(spec.coeffs().iter().map(|c| c.norm()));
    Ok(CorrelationResult {
        label: format!("character e({alpha}x/{})", f.domain().modulus()),
        params: vec![alpha as i64],
        correlation: corr,
        witness: character(*f.domain(), alpha as u32),
    })
}

/// Phase values e(P(x)) for P(x) = (sum_j a_j x^j)/N, a in ascending degree
/// order with no constant term.
fn poly_phase(domain: CyclicDomain, coeffs: &[u32]) -> GroupFn {
    let n = domain.modulus() as u64;
    let vals = (0..n)
        .map(|x| {
            let mut acc = 0u64;
            let mut pw = 1u64;
            for &a in coeffs {
                pw = pw * x % n;
                acc = (acc + a as u64 * pw) % n;
            }
            Complex64::new(0.0, TAU * acc as f64 / n as f64).exp()
        })
        .collect();
    GroupFn::complex(domain, vals).expect("sized")
}

/// Exhaustive correlation maximization over phases e((a_s x^s + ... + a_1 x)/N).
/// The constant term is omitted: it does not change the magnitude. Ties go
/// to the lexicographically smallest coefficient vector (a_1, ..., a_s).
pub fn poly_phase_search(f: &GroupFn, s: u32, budget: &Budget) -> Result<CorrelationResult> {
    if s < 1 {
        return Err(Error::Parameter("degree s must be >= 1".into()));
    }
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain("phase search runs on Z_N".into()));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let n = f.domain().modulus() as u64;
    let cardinality = (n as u128).pow(s);
    budget.check(
        cardinality * n as u128,
        &format!("phase search over {cardinality} candidates"),
    )?;
    let fv = f.complex_values()?;
    // twiddle table for e(k/N)
    let tw: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(0.0, TAU * k as f64 / n as f64).exp())
        .collect();
    let mut coeffs = vec![0u32; s as usize];
    let mut best = f64::NEG_INFINITY;
    let mut best_coeffs = coeffs.clone();
    'outer: loop {
        // |E_x f(x) conj(e(P(x)))|
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &v) in fv.iter().enumerate() {
            let x = x as u64;
            let mut p = 0u64;
            let mut pw = 1u64;
            for &a in &coeffs {
                pw = pw * x % n;
                p = (p + a as u64 * pw) % n;
            }
            acc += v * tw[p as usize].conj();
        }
        let corr = (acc / n as f64).norm();
        if corr > best + ARGMAX_SLACK {
            best = corr;
            best_coeffs = coeffs.clone();
        }
        // lexicographic odometer over (a_1, ..., a_s): a_s varies fastest
        let mut i = s as usize;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            coeffs[i] += 1;
            if (coeffs[i] as u64) < n {
                break;
            }
            coeffs[i] = 0;
        }
    }
    let witness = poly_phase(*f.domain(), &best_coeffs);
    Ok(CorrelationResult {
        label: format!(
            "phase e(({})/{})",
            best_coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| format!("{a}x^{}", j + 1))
                .collect::<Vec<_>>()
                .join("+"),
            f.domain().modulus()
        ),
        params: best_coeffs.iter().map(|&a| a as i64).collect(),
        correlation: best,
        witness,
    })
}

/// The selected-character table: for each tuple of fixed derivative
/// directions, the frequency where the transformed S-function peaks and the
/// magnitude it attains there.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterField {
    /// Domain of the table: (Z_N)^{s-2}.
    pub domain: CyclicDomain,
    pub s: u32,
    /// Peak frequency per tuple, in point-index order.
    pub frequencies: Vec<u32>,
    /// Peak magnitude per tuple.
    pub magnitudes: Vec<f64>,
}

impl CharacterField {
    /// The table as an exact function h -> Phi(h)/N, ready for the
    /// approximate-polynomial counter.
    pub fn as_rational_fn(&self) -> GroupFn {
        GroupFn::rational(
            self.domain,
            self.frequencies.iter().map(|&v| v as i64).collect(),
            self.domain.modulus() as i64,
        )
        .expect("sized")
    }
}

fn s_function_spectrum(
    base: &[Complex64],
    fixed: &[u32],
    domain: CyclicDomain,
    plan: &FftPlan,
) -> crate::fourier::Spectrum {
    let n = base.len();
    let mut g = base.to_vec();
    for &h in fixed {
        g = (0..n).map(|x| g[x] * g[(x + h as usize) % n].conj()).collect();
    }
    // S(fixed, h) = E_x D_h g(x)
    let s_table: Vec<Complex64> = (0..n)
        .map(|h| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..n {
                acc += g[x] * g[(x + h) % n].conj();
            }
            acc / n as f64
        })
        .collect();
    dft_with_plan(plan, domain, &s_table)
}

/// For each tuple of s-2 fixed directions, transform the remaining-direction
/// S-function h -> E_x D_(tuple, h) f(x) and record the argmax frequency
/// with its magnitude.
pub fn character_field(f: &GroupFn, s: u32, budget: &Budget) -> Result<CharacterField> {
    if s < 3 {
        return Err(Error::Parameter(
            "the character field needs degree s >= 3".into(),
        ));
    }
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain(
            "character field runs on Z_N".into(),
        ));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let n = f.domain().points();
    budget.check(
        (n as u128).pow(s - 1),
        &format!("character field over {} tuples", (n as u128).pow(s - 2)),
    )?;
    let table_domain = CyclicDomain::new(f.domain().modulus(), s - 2)?;
    let plan = FftPlan::new(n);
    let base = f.complex_values()?;
    let tuples = table_domain.points();
    let mut frequencies = Vec::with_capacity(tuples);
    let mut magnitudes = Vec::with_capacity(tuples);
    for t in 0..tuples {
        let hs = table_domain.point(t);
        let spec = s_function_spectrum(base, &hs, *f.domain(), &plan);
        let (alpha, mag) = argmax_with_slack(spec.coeffs().iter().map(|c| c.norm()));
        frequencies.push(alpha as u32);
        magnitudes.push(mag);
    }
    Ok(CharacterField {
        domain: table_domain,
        s,
        frequencies,
        magnitudes,
    })
}

/// Transform of one S-function slice, exposed so callers can check Parseval
/// against E_h |S(t, h)|^2.
pub fn character_field_slice(f: &GroupFn, fixed: &[u32]) -> Result<crate::fourier::Spectrum> {
    if f.domain().arity() != 1 {
        return Err(Error::UnsupportedDomain(
            "character field runs on Z_N".into(),
        ));
    }
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let plan = FftPlan::new(f.domain().points());
    Ok(s_function_spectrum(
        f.complex_values()?,
        fixed,
        *f.domain(),
        &plan,
    ))
}

/// A multi-variable phase polynomial with coefficients k/N: a formal sum of
/// monomials c * prod_j v_j^{e_j} evaluated modulo N.
#[derive(Debug, Clone, Serialize)]
pub struct PhasePoly {
    pub modulus: u32,
    pub vars: usize,
    /// (coefficient, exponent per variable)
    pub terms: Vec<(i64, Vec<u32>)>,
}

impl PhasePoly {
    /// Numerator of P(v) modulo N (the value is the numerator over N).
    pub fn eval_num(&self, v: &[i64]) -> i64 {
        let n = self.modulus as i64;
        let mut acc = 0i64;
        for (c, exps) in &self.terms {
            let mut t = c.rem_euclid(n);
            for (j, &e) in exps.iter().enumerate() {
                let base = v[j].rem_euclid(n);
                for _ in 0..e {
                    t = t * base % n;
                }
            }
            acc = (acc + t) % n;
        }
        acc
    }
}

/// Project a multi-variable phase to one variable along the diagonal:
/// x -> e(P(h_1 + x, ..., h_m + x)).
pub fn diagonal_project(p: &PhasePoly, base: &[u32], domain: CyclicDomain) -> Result<GroupFn> {
    if base.len() != p.vars {
        return Err(Error::Parameter("base point arity mismatch".into()));
    }
    if domain.modulus() != p.modulus || domain.arity() != 1 {
        return Err(Error::DomainMismatch(
            "diagonal projection lands on Z_N".into(),
        ));
    }
    let n = domain.modulus() as i64;
    let vals = (0..n)
        .map(|x| {
            let v: Vec<i64> = base.iter().map(|&h| (h as i64 + x) % n).collect();
            let num = p.eval_num(&v);
            Complex64::new(0.0, TAU * num as f64 / n as f64).exp()
        })
        .collect();
    GroupFn::complex(domain, vals)
}
