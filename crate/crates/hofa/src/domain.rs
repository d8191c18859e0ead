//! Cyclic-group arithmetic, function containers, discrete derivatives, and
//! cubes with faces, reflections, and permutations.
//!
//! The ambient group is H = (Z_N)^d. Points are addressed by their index in
//! lexicographic row-major order with coordinate 0 varying fastest; the
//! layout is fixed so files interchange byte-identically.
//!
//! Functions come in three value modes: complex doubles for analytic work,
//! real doubles for generic real functions, and exact integers over a fixed
//! denominator for bracket polynomials, where vanishing tests must be exact
//! set counts rather than tolerance checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ambient group (Z_N)^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicDomain {
    modulus: u32,
    arity: u32,
    prime: bool,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3u64;
    let n = n as u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

impl CyclicDomain {
    pub fn new(modulus: u32, arity: u32) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Parameter(format!("modulus {modulus} must be >= 2")));
        }
        if arity < 1 {
            return Err(Error::Parameter("arity must be >= 1".into()));
        }
        let size = (modulus as u128).pow(arity);
        if size > u64::MAX as u128 {
            return Err(Error::Parameter(format!(
                "domain size {modulus}^{arity} overflows"
            )));
        }
        Ok(CyclicDomain {
            modulus,
            arity,
            prime: is_prime(modulus),
        })
    }

    /// One-dimensional domain Z_N.
    pub fn line(modulus: u32) -> Result<Self> {
        Self::new(modulus, 1)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn is_prime(&self) -> bool {
        self.prime
    }

    /// |H| = N^d.
    pub fn size(&self) -> u64 {
        (self.modulus as u64).pow(self.arity)
    }

    pub fn points(&self) -> usize {
        self.size() as usize
    }

    /// Index of a coordinate tuple; coordinate 0 is fastest.
    pub fn index(&self, p: &[u32]) -> usize {
        debug_assert_eq!(p.len(), self.arity as usize);
        let n = self.modulus as usize;
        let mut idx = 0usize;
        for &c in p.iter().rev() {
            idx = idx * n + (c as usize % n);
        }
        idx
    }

    pub fn point(&self, mut idx: usize) -> Vec<u32> {
        let n = self.modulus as usize;
        let mut out = Vec::with_capacity(self.arity as usize);
        for _ in 0..self.arity {
            out.push((idx % n) as u32);
            idx /= n;
        }
        out
    }

    /// Componentwise sum of two point indices.
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        let n = self.modulus as usize;
        if self.arity == 1 {
            return (a + b) % n;
        }
        let (mut a, mut b) = (a, b);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.arity {
            idx += ((a % n) + (b % n)) % n * stride;
            a /= n;
            b /= n;
            stride *= n;
        }
        idx
    }

    /// Componentwise negation of a point index.
    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        let n = self.modulus as usize;
        if self.arity == 1 {
            return (n - a % n) % n;
        }
        let mut a = a;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.arity {
            idx += (n - a % n) % n * stride;
            a /= n;
            stride *= n;
        }
        idx
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Scalar multiple k.p of a point index.
    pub fn scale(&self, a: usize, k: u32) -> usize {
        let n = self.modulus as usize;
        let k = k as usize % n;
        let mut a = a;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.arity {
            idx += (a % n * k) % n * stride;
            a /= n;
            stride *= n;
        }
        idx
    }
}

/// Value mode of a function container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    Complex,
    Real,
    Rational,
}

#[derive(Debug, Clone)]
pub enum Values {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
    /// Exact values num[i]/den. The denominator is N for plain bracket
    /// functions and N^2 for bracket products; it is carried explicitly so
    /// equality tests stay exact.
    Rational { num: Vec<i64>, den: i64 },
}

/// Dense scalar function on (Z_N)^d, optionally partial via a mask.
#[derive(Debug, Clone)]
pub struct GroupFn {
    domain: CyclicDomain,
    values: Values,
    mask: Option<Vec<bool>>,
}

impl GroupFn {
    pub fn complex(domain: CyclicDomain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.points() {
            return Err(Error::Parameter(format!(
                "value count {} != domain size {}",
                values.len(),
                domain.points()
            )));
        }
        Ok(GroupFn {
            domain,
            values: Values::Complex(values),
            mask: None,
        })
    }

    pub fn real(domain: CyclicDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.points() {
            return Err(Error::Parameter("value count != domain size".into()));
        }
        Ok(GroupFn {
            domain,
            values: Values::Real(values),
            mask: None,
        })
    }

    pub fn rational(domain: CyclicDomain, num: Vec<i64>, den: i64) -> Result<Self> {
        if num.len() != domain.points() {
            return Err(Error::Parameter("value count != domain size".into()));
        }
        if den <= 0 {
            return Err(Error::Parameter("denominator must be positive".into()));
        }
        Ok(GroupFn {
            domain,
            values: Values::Rational { num, den },
            mask: None,
        })
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.domain.points() {
            return Err(Error::Parameter("mask length != domain size".into()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn domain(&self) -> &CyclicDomain {
        &self.domain
    }

    pub fn mode(&self) -> ValueMode {
        match self.values {
            Values::Complex(_) => ValueMode::Complex,
            Values::Real(_) => ValueMode::Real,
            Values::Rational { .. } => ValueMode::Rational,
        }
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_total(&self) -> bool {
        match &self.mask {
            None => true,
            Some(m) => m.iter().all(|&b| b),
        }
    }

    #[inline]
    pub fn defined(&self, idx: usize) -> bool {
        match &self.mask {
            None => true,
            Some(m) => m[idx],
        }
    }

    /// Number of points where the function is defined.
    pub fn support_size(&self) -> usize {
        match &self.mask {
            None => self.domain.points(),
            Some(m) => m.iter().filter(|&&b| b).count(),
        }
    }

    pub fn complex_values(&self) -> Result<&[Complex64]> {
        match &self.values {
            Values::Complex(v) => Ok(v),
            _ => Err(Error::Parameter("expected a complex-valued function".into())),
        }
    }

    pub fn real_values(&self) -> Result<&[f64]> {
        match &self.values {
            Values::Real(v) => Ok(v),
            _ => Err(Error::Parameter("expected a real-valued function".into())),
        }
    }

    pub fn rational_values(&self) -> Result<(&[i64], i64)> {
        match &self.values {
            Values::Rational { num, den } => Ok((num, *den)),
            _ => Err(Error::Parameter(
                "expected a rational-valued function".into(),
            )),
        }
    }

    /// Real value at a point, valid in both real and rational modes.
    pub fn real_at(&self, idx: usize) -> Result<f64> {
        match &self.values {
            Values::Real(v) => Ok(v[idx]),
            Values::Rational { num, den } => Ok(num[idx] as f64 / *den as f64),
            Values::Complex(_) => Err(Error::Parameter("expected a real-valued function".into())),
        }
    }
}

/// Dense vector-valued function on (Z_N)^d with a fixed width; the carrier
/// for hierarchy levels and inverted cocycles.
#[derive(Debug, Clone)]
pub struct VecFn {
    pub domain: CyclicDomain,
    pub width: usize,
    pub values: VecValues,
    pub mask: Option<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub enum VecValues {
    Real(Vec<f64>),
    Rational { num: Vec<i64>, den: i64 },
}

impl VecFn {
    pub fn real(domain: CyclicDomain, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.points() * width {
            return Err(Error::Parameter("vector value count mismatch".into()));
        }
        Ok(VecFn {
            domain,
            width,
            values: VecValues::Real(values),
            mask: None,
        })
    }

    pub fn rational(domain: CyclicDomain, width: usize, num: Vec<i64>, den: i64) -> Result<Self> {
        if num.len() != domain.points() * width {
            return Err(Error::Parameter("vector value count mismatch".into()));
        }
        if den <= 0 {
            return Err(Error::Parameter("denominator must be positive".into()));
        }
        Ok(VecFn {
            domain,
            width,
            values: VecValues::Rational { num, den },
            mask: None,
        })
    }

    /// Promote a scalar function to width 1.
    pub fn from_scalar(f: &GroupFn) -> Result<Self> {
        let mut v = match f.values() {
            Values::Real(v) => VecFn::real(*f.domain(), 1, v.clone())?,
            Values::Rational { num, den } => VecFn::rational(*f.domain(), 1, num.clone(), *den)?,
            Values::Complex(_) => {
                return Err(Error::Parameter(
                    "complex functions have no vector promotion".into(),
                ))
            }
        };
        v.mask = f.mask().map(|m| m.to_vec());
        Ok(v)
    }

    #[inline]
    pub fn defined(&self, idx: usize) -> bool {
        match &self.mask {
            None => true,
            Some(m) => m[idx],
        }
    }

    pub fn real_row(&self, idx: usize) -> Vec<f64> {
        match &self.values {
            VecValues::Real(v) => v[idx * self.width..(idx + 1) * self.width].to_vec(),
            VecValues::Rational { num, den } => num[idx * self.width..(idx + 1) * self.width]
                .iter()
                .map(|&k| k as f64 / *den as f64)
                .collect(),
        }
    }

    /// Max over points of the l1 norm of the value vector.
    pub fn max_l1(&self) -> f64 {
        let pts = self.domain.points();
        let mut best = 0.0f64;
        for idx in 0..pts {
            if !self.defined(idx) {
                continue;
            }
            let s: f64 = self.real_row(idx).iter().map(|v| v.abs()).sum();
            best = best.max(s);
        }
        best
    }
}

/// A k-dimensional cube: a basepoint plus k directions, all stored as point
/// indices of the ambient domain. A 0-dimensional cube is a bare point.
/// Repeated or zero directions are allowed; the cube space is all of H^{k+1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub base: usize,
    pub dirs: Vec<usize>,
}

impl Cube {
    pub fn new(base: usize, dirs: Vec<usize>) -> Self {
        Cube { base, dirs }
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    /// Vertex x + omega . h for a bitmask omega (bit i = direction i).
    pub fn vertex(&self, domain: &CyclicDomain, omega: u32) -> usize {
        let mut v = self.base;
        for (i, &h) in self.dirs.iter().enumerate() {
            if omega >> i & 1 == 1 {
                v = domain.add(v, h);
            }
        }
        v
    }

    /// Face keeping the listed directions (0-based, strictly increasing) and
    /// shifting the basepoint by the removed directions named in `offsets`.
    pub fn face(&self, domain: &CyclicDomain, kept: &[usize], offsets: &[usize]) -> Result<Cube> {
        let k = self.dim();
        for &i in kept.iter().chain(offsets) {
            if i >= k {
                return Err(Error::IndexOutOfRange(format!(
                    "direction {i} of a {k}-cube"
                )));
            }
        }
        if kept.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("kept indices must be increasing".into()));
        }
        if offsets.iter().any(|i| kept.contains(i)) {
            return Err(Error::Parameter(
                "offset indices must come from the removed directions".into(),
            ));
        }
        let mut base = self.base;
        for &i in offsets {
            base = domain.add(base, self.dirs[i]);
        }
        Ok(Cube {
            base,
            dirs: kept.iter().map(|&i| self.dirs[i]).collect(),
        })
    }

    /// Coordinate reflection in direction i: the basepoint moves to x + h_i
    /// and direction i becomes -h_i.
    pub fn reflect(&self, domain: &CyclicDomain, i: usize) -> Result<Cube> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "direction {i} of a {}-cube",
                self.dim()
            )));
        }
        let mut dirs = self.dirs.clone();
        let base = domain.add(self.base, dirs[i]);
        dirs[i] = domain.neg(dirs[i]);
        Ok(Cube { base, dirs })
    }

    /// Reorder directions: result direction i is the current direction
    /// sigma[i]. `sigma` must be a permutation of 0..k.
    pub fn permute(&self, sigma: &[usize]) -> Result<Cube> {
        let k = self.dim();
        if sigma.len() != k {
            return Err(Error::Parameter("permutation length mismatch".into()));
        }
        let mut seen = vec![false; k];
        for &s in sigma {
            if s >= k || seen[s] {
                return Err(Error::Parameter("not a permutation".into()));
            }
            seen[s] = true;
        }
        Ok(Cube {
            base: self.base,
            dirs: sigma.iter().map(|&s| self.dirs[s]).collect(),
        })
    }
}

/// Value of a cube derivative; exact in rational mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubeValue {
    Real(f64),
    Rational { num: i64, den: i64 },
}

impl CubeValue {
    pub fn to_f64(self) -> f64 {
        match self {
            CubeValue::Real(v) => v,
            CubeValue::Rational { num, den } => num as f64 / den as f64,
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        match self {
            CubeValue::Real(_) => false,
            CubeValue::Rational { num, .. } => *num == 0,
        }
    }
}

/// Multiplicative derivative D_h f(x) = f(x) conj(f(x+h)).
pub fn mult_derivative(f: &GroupFn, h: usize) -> Result<GroupFn> {
    if !f.is_total() {
        return Err(Error::MaskedInput);
    }
    let vals = f.complex_values()?;
    let d = *f.domain();
    let out = (0..d.points())
        .map(|x| vals[x] * vals[d.add(x, h)].conj())
        .collect();
    GroupFn::complex(d, out)
}

/// Iterated multiplicative derivative for a direction tuple.
pub fn mult_derivative_tuple(f: &GroupFn, hs: &[usize]) -> Result<GroupFn> {
    let mut g = f.clone();
    for &h in hs {
        g = mult_derivative(&g, h)?;
    }
    Ok(g)
}

/// Additive derivative d_h f(x) = f(x) - f(x+h), defined exactly where both
/// operands are; partiality propagates through the mask.
pub fn add_derivative(f: &GroupFn, h: usize) -> Result<GroupFn> {
    let d = *f.domain();
    let pts = d.points();
    let mask_out: Option<Vec<bool>> = f
        .mask()
        .map(|m| (0..pts).map(|x| m[x] && m[d.add(x, h)]).collect());
    let mut out = match f.values() {
        Values::Real(v) => {
            let vals = (0..pts).map(|x| v[x] - v[d.add(x, h)]).collect();
            GroupFn::real(d, vals)?
        }
        Values::Rational { num, den } => {
            let vals = (0..pts).map(|x| num[x] - num[d.add(x, h)]).collect();
            GroupFn::rational(d, vals, *den)?
        }
        Values::Complex(_) => {
            return Err(Error::Parameter(
                "additive derivative expects a real or rational function".into(),
            ))
        }
    };
    if let Some(m) = mask_out {
        out = out.with_mask(m)?;
    }
    Ok(out)
}

/// Alternating vertex sum of f over the cube: sum over omega of
/// (-1)^|omega| f(x + omega . h). Returns None if any vertex is masked out;
/// a 0-dimensional cube returns f(x).
pub fn cube_derivative(f: &GroupFn, c: &Cube) -> Result<Option<CubeValue>> {
    let d = f.domain();
    let k = c.dim();
    if k > 30 {
        return Err(Error::Parameter("cube dimension too large".into()));
    }
    match f.values() {
        Values::Complex(_) => Err(Error::Parameter(
            "cube derivative expects a real or rational function".into(),
        )),
        Values::Real(v) => {
            let mut acc = 0.0f64;
            for omega in 0..1u32 << k {
                let vx = c.vertex(d, omega);
                if !f.defined(vx) {
                    return Ok(None);
                }
                let sign = if omega.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * v[vx];
            }
            Ok(Some(CubeValue::Real(acc)))
        }
        Values::Rational { num, den } => {
            let mut acc = 0i64;
            for omega in 0..1u32 << k {
                let vx = c.vertex(d, omega);
                if !f.defined(vx) {
                    return Ok(None);
                }
                if omega.count_ones() % 2 == 0 {
                    acc += num[vx];
                } else {
                    acc -= num[vx];
                }
            }
            Ok(Some(CubeValue::Rational { num: acc, den: *den }))
        }
    }
}
