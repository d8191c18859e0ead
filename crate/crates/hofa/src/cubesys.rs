//! Cube sets, systems of cubes, approximate-polynomial measurement, and the
//! gluing/translation closure operations.
//!
//! A k-dimensional cube set lives inside H^{k+1} and is stored explicitly as
//! a dense membership bitmap (capped at 10^8 cubes); beyond that only the
//! sampled epsilon estimator is offered. Cube indices flatten the tuple
//! (base, h_1, ..., h_k) with the base fastest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::domain::{Cube, CyclicDomain, GroupFn, Values};
use crate::error::{Error, Result};
use crate::tolerances::FLOAT_ZERO;

const EXPLICIT_STORE_CAP: u128 = 100_000_000;

/// Explicit set of k-dimensional cubes over a fixed domain.
#[derive(Debug, Clone)]
pub struct CubeSet {
    domain: CyclicDomain,
    k: usize,
    bits: Vec<bool>,
    count: usize,
}

impl CubeSet {
    pub fn empty(domain: CyclicDomain, k: usize) -> Result<Self> {
        let total = (domain.points() as u128).pow(k as u32 + 1);
        if total > EXPLICIT_STORE_CAP {
            return Err(Error::BudgetExceeded {
                attempted: total,
                budget: EXPLICIT_STORE_CAP as u64,
                what: format!("explicit {k}-cube store"),
            });
        }
        Ok(CubeSet {
            domain,
            k,
            bits: vec![false; total as usize],
            count: 0,
        })
    }

    /// The full set H^{k+1}.
    pub fn full(domain: CyclicDomain, k: usize) -> Result<Self> {
        let mut s = Self::empty(domain, k)?;
        s.bits.iter_mut().for_each(|b| *b = true);
        s.count = s.bits.len();
        Ok(s)
    }

    pub fn domain(&self) -> &CyclicDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn total_slots(&self) -> usize {
        self.bits.len()
    }

    pub fn density(&self) -> f64 {
        self.count as f64 / self.bits.len() as f64
    }

    pub fn index_of(&self, c: &Cube) -> usize {
        debug_assert_eq!(c.dim(), self.k);
        let p = self.domain.points();
        let mut idx = 0usize;
        for &h in c.dirs.iter().rev() {
            idx = idx * p + h;
        }
        idx * p + c.base
    }

    pub fn cube_at(&self, mut idx: usize) -> Cube {
        let p = self.domain.points();
        let base = idx % p;
        idx /= p;
        let mut dirs = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            dirs.push(idx % p);
            idx /= p;
        }
        Cube::new(base, dirs)
    }

    pub fn contains(&self, c: &Cube) -> bool {
        self.bits[self.index_of(c)]
    }

    #[inline]
    pub fn contains_index(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn insert(&mut self, c: &Cube) -> bool {
        let idx = self.index_of(c);
        if !self.bits[idx] {
            self.bits[idx] = true;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, c: &Cube) -> bool {
        let idx = self.index_of(c);
        if self.bits[idx] {
            self.bits[idx] = false;
            self.count -= 1;
            true
        } else {
            false
        }
    }

    pub fn iter_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.cube_at(i))
    }

    pub fn is_subset_of(&self, other: &CubeSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Smallest superset closed under direction permutations and coordinate
    /// reflections.
    pub fn symmetrize(&self) -> CubeSet {
        let mut out = self.clone();
        let perms = permutations(self.k);
        for idx in 0..self.bits.len() {
            if !self.bits[idx] {
                continue;
            }
            let c = self.cube_at(idx);
            for image in symmetry_orbit(&c, &self.domain, &perms) {
                out.insert(&image);
            }
        }
        out
    }

    /// First orbit element missing from the set, if any: (source, image).
    pub fn symmetry_witness(&self) -> Option<(Cube, Cube)> {
        let perms = permutations(self.k);
        for idx in 0..self.bits.len() {
            if !self.bits[idx] {
                continue;
            }
            let c = self.cube_at(idx);
            for image in symmetry_orbit(&c, &self.domain, &perms) {
                if !self.bits[self.index_of(&image)] {
                    return Some((c, image));
                }
            }
        }
        None
    }
}

fn symmetry_orbit(c: &Cube, domain: &CyclicDomain, perms: &[Vec<usize>]) -> Vec<Cube> {
    let k = c.dim();
    let mut out = Vec::with_capacity(perms.len() << k);
    for sigma in perms {
        let pc = c.permute(sigma).expect("valid permutation");
        for refl in 0..1u32 << k {
            let mut rc = pc.clone();
            for i in 0..k {
                if refl >> i & 1 == 1 {
                    rc = rc.reflect(domain, i).expect("valid index");
                }
            }
            out.push(rc);
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, remaining: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            cur.push(v);
            rec(cur, remaining, out);
            cur.pop();
            remaining.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// Closure report for the gluing/translation fixpoints.
#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub before: usize,
    pub after: usize,
    pub density_before: f64,
    pub density_after: f64,
    pub passes: usize,
}

/// Fixpoint of the gluing rule: add c whenever, in some listed direction i
/// and for some u, both the cube with h_i stretched to h_i + u and the
/// companion based at x + h_i with direction u are present.
pub fn glue_closure(s: &CubeSet, directions: &[usize]) -> Result<(CubeSet, ClosureReport)> {
    let k = s.dim();
    for &i in directions {
        if i >= k {
            return Err(Error::IndexOutOfRange(format!("direction {i} of {k}")));
        }
    }
    let before = s.len();
    let mut cur = s.clone();
    let pts = cur.domain.points();
    let mut passes = 0usize;
    loop {
        passes += 1;
        let mut added = false;
        for idx in 0..cur.bits.len() {
            if cur.bits[idx] {
                continue;
            }
            let c = cur.cube_at(idx);
            'found: for &i in directions {
                for u in 0..pts {
                    let up = crate::cocycle::cube_up(&cur.domain, &c, u, i).expect("valid");
                    let down = crate::cocycle::cube_down(&cur.domain, &c, u, i).expect("valid");
                    if cur.contains(&up) && cur.contains(&down) {
                        cur.bits[idx] = true;
                        cur.count += 1;
                        added = true;
                        break 'found;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    let report = ClosureReport {
        before,
        after: cur.len(),
        density_before: before as f64 / cur.bits.len() as f64,
        density_after: cur.density(),
        passes,
    };
    Ok((cur, report))
}

/// Fixpoint of the translation rule: add (x+u, h) to S_k whenever (x, h) is
/// in S_k and (x, h, u) is in S_{k+1}.
pub fn translate_closure(sk: &CubeSet, sk1: &CubeSet) -> Result<(CubeSet, ClosureReport)> {
    if sk1.dim() != sk.dim() + 1 || sk.domain() != sk1.domain() {
        return Err(Error::Parameter(
            "translation closure needs consecutive levels over one domain".into(),
        ));
    }
    let before = sk.len();
    let mut cur = sk.clone();
    let pts = cur.domain.points();
    let mut passes = 0usize;
    loop {
        passes += 1;
        let mut added = false;
        for idx in 0..cur.bits.len() {
            if !cur.bits[idx] {
                continue;
            }
            let c = cur.cube_at(idx);
            for u in 0..pts {
                let mut ext = c.dirs.clone();
                ext.push(u);
                if sk1.contains(&Cube::new(c.base, ext)) {
                    let shifted = Cube::new(cur.domain.add(c.base, u), c.dirs.clone());
                    if cur.insert(&shifted) {
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    let report = ClosureReport {
        before,
        after: cur.len(),
        density_before: before as f64 / cur.bits.len() as f64,
        density_after: cur.density(),
        passes,
    };
    Ok((cur, report))
}

/// Smallest completion of the levels under taking faces: every face of
/// every cube is added to the level of its dimension.
pub fn face_closure(levels: &[CubeSet]) -> Result<Vec<CubeSet>> {
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let domain = *levels[0].domain();
    for (k, s) in levels.iter().enumerate() {
        if s.dim() != k || *s.domain() != domain {
            return Err(Error::Parameter(
                "levels must have dimensions 0..len-1 over one domain".into(),
            ));
        }
    }
    let mut out = levels.to_vec();
    // walk top-down: one-step facets cascade through the lower levels
    for k in (1..out.len()).rev() {
        let source = out[k].clone();
        for c in source.iter_cubes() {
            for removed in 0..k {
                let kept: Vec<usize> = (0..k).filter(|&i| i != removed).collect();
                for offs in [vec![], vec![removed]] {
                    let f = c.face(&domain, &kept, &offs).expect("valid face");
                    out[k - 1].insert(&f);
                }
            }
        }
    }
    Ok(out)
}

/// A leveled family S_0..S_{s+1} with its extension-density parameter.
#[derive(Debug, Clone)]
pub struct CubeSystem {
    pub levels: Vec<CubeSet>,
    pub delta: f64,
}

impl CubeSystem {
    /// The full system: every level is all of H^{k+1}, density 1.
    pub fn full(domain: CyclicDomain, s: u32) -> Result<Self> {
        let levels = (0..=s as usize + 1)
            .map(|k| CubeSet::full(domain, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(CubeSystem { levels, delta: 1.0 })
    }
}

/// Outcome of checking the three defining clauses of a system of cubes.
#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub pass: bool,
    pub symmetry_witness: Option<(usize, Cube, Cube)>,
    pub face_witness: Option<(usize, Cube, Cube)>,
    /// (level, cube, extension count) of the first under-extended cube.
    pub extension_witness: Option<(usize, Cube, usize)>,
    pub min_extension_density: f64,
}

/// Verify symmetry closure, face closure, and the per-cube extension counts
/// against delta |H|; the first witness of each failure kind is returned.
pub fn check_cube_system(levels: &[CubeSet], delta: f64) -> Result<SystemReport> {
    if levels.is_empty() {
        return Err(Error::Parameter("empty system".into()));
    }
    let domain = *levels[0].domain();
    let pts = domain.points();
    let mut symmetry_witness = None;
    let mut face_witness = None;
    let mut extension_witness = None;
    let mut min_ext = f64::INFINITY;
    for (k, s) in levels.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Parameter(format!("level {k} is empty")));
        }
        if symmetry_witness.is_none() {
            if let Some((c, missing)) = s.symmetry_witness() {
                symmetry_witness = Some((k, c, missing));
            }
        }
        if k >= 1 && face_witness.is_none() {
            'faces: for c in s.iter_cubes() {
                for removed in 0..k {
                    let kept: Vec<usize> = (0..k).filter(|&i| i != removed).collect();
                    for offs in [vec![], vec![removed]] {
                        let f = c.face(&domain, &kept, &offs).expect("valid face");
                        if !levels[k - 1].contains(&f) {
                            face_witness = Some((k, c.clone(), f));
                            break 'faces;
                        }
                    }
                }
            }
        }
        if k + 1 < levels.len() {
            let next = &levels[k + 1];
            for c in s.iter_cubes() {
                let mut ext = 0usize;
                for u in 0..pts {
                    let mut dirs = c.dirs.clone();
                    dirs.push(u);
                    if next.contains(&Cube::new(c.base, dirs)) {
                        ext += 1;
                    }
                }
                let dens = ext as f64 / pts as f64;
                if dens < min_ext {
                    min_ext = dens;
                }
                if (ext as f64) < delta * pts as f64 - 1e-12 && extension_witness.is_none() {
                    extension_witness = Some((k, c.clone(), ext));
                }
            }
        }
    }
    Ok(SystemReport {
        pass: symmetry_witness.is_none() && face_witness.is_none() && extension_witness.is_none(),
        symmetry_witness,
        face_witness,
        extension_witness,
        min_extension_density: if min_ext.is_finite() { min_ext } else { 1.0 },
    })
}

/// How zero was tested in an epsilon measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMode {
    Exact,
    Tolerance,
}

/// Approximate-polynomial measurement: the fraction of (x, h) in H^{s+2}
/// whose vertices are all defined and whose order-(s+1) derivative is zero.
#[derive(Debug, Clone, Serialize)]
pub struct EpsReport {
    pub s: u32,
    pub count: u64,
    pub total: u128,
    pub epsilon: f64,
    pub zero_mode: ZeroMode,
    pub sampled: bool,
    /// 95% confidence half-width when sampled.
    pub confidence_half_width: Option<f64>,
}

/// Exhaustive epsilon: exact count of vanishing derivative tuples over all
/// of H^{s+2}, normalized by |H|^{s+2}. Tuples with an undefined vertex
/// count in the denominator, never the numerator.
pub fn approx_poly_epsilon(f: &GroupFn, s: u32, budget: &Budget) -> Result<EpsReport> {
    let domain = *f.domain();
    let pts = domain.points();
    let k = s as usize + 1;
    if k > 7 {
        return Err(Error::Parameter("degree too large for the counter".into()));
    }
    let total = (pts as u128).pow(s + 2);
    budget.check(
        total * (1u128 << k),
        &format!("exhaustive epsilon over |H|^{} tuples", s + 2),
    )?;
    let zero_mode = match f.values() {
        Values::Rational { .. } => ZeroMode::Exact,
        Values::Real(_) => ZeroMode::Tolerance,
        Values::Complex(_) => {
            return Err(Error::Parameter(
                "epsilon measurement expects a real or rational function".into(),
            ))
        }
    };
    let dir_tuples = (pts as u64).pow(k as u32);
    let count: u64 = (0..dir_tuples)
        .into_par_iter()
        .map(|t| {
            // decode the direction tuple, then precompute vertex offsets by
            // peeling the lowest set bit of omega
            let mut dirs = [0usize; 8];
            let mut tt = t;
            for d in dirs.iter_mut().take(k) {
                *d = (tt % pts as u64) as usize;
                tt /= pts as u64;
            }
            let mut offsets = [0usize; 128];
            for omega in 1..1usize << k {
                let low = omega.trailing_zeros() as usize;
                offsets[omega] = domain.add(offsets[omega & (omega - 1)], dirs[low]);
            }
            let mut local = 0u64;
            match f.values() {
                Values::Rational { num, .. } => {
                    for x in 0..pts {
                        let mut acc = 0i64;
                        let mut ok = true;
                        for (omega, &off) in offsets.iter().enumerate().take(1 << k) {
                            let v = domain.add(x, off);
                            if !f.defined(v) {
                                ok = false;
                                break;
                            }
                            if (omega as u32).count_ones() % 2 == 0 {
                                acc += num[v];
                            } else {
                                acc -= num[v];
                            }
                        }
                        if ok && acc == 0 {
                            local += 1;
                        }
                    }
                }
                Values::Real(vals) => {
                    for x in 0..pts {
                        let mut acc = 0f64;
                        let mut ok = true;
                        for (omega, &off) in offsets.iter().enumerate().take(1 << k) {
                            let v = domain.add(x, off);
                            if !f.defined(v) {
                                ok = false;
                                break;
                            }
                            if (omega as u32).count_ones() % 2 == 0 {
                                acc += vals[v];
                            } else {
                                acc -= vals[v];
                            }
                        }
                        if ok && acc.abs() < FLOAT_ZERO {
                            local += 1;
                        }
                    }
                }
                Values::Complex(_) => unreachable!(),
            }
            local
        })
        .sum();
    Ok(EpsReport {
        s,
        count,
        total,
        epsilon: count as f64 / total as f64,
        zero_mode,
        sampled: false,
        confidence_half_width: None,
    })
}

/// Sampled epsilon: an unbiased estimate from seeded uniform tuples with a
/// 95% confidence half-width.
pub fn approx_poly_epsilon_sampled(
    f: &GroupFn,
    s: u32,
    samples: u64,
    seed: u64,
) -> Result<EpsReport> {
    if samples == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let domain = *f.domain();
    let pts = domain.points();
    let k = s as usize + 1;
    let zero_mode = match f.values() {
        Values::Rational { .. } => ZeroMode::Exact,
        Values::Real(_) => ZeroMode::Tolerance,
        Values::Complex(_) => {
            return Err(Error::Parameter(
                "epsilon measurement expects a real or rational function".into(),
            ))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = rng.gen_range(0..pts);
        let dirs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..pts)).collect();
        let c = Cube::new(x, dirs);
        if let Some(v) = crate::domain::cube_derivative(f, &c)? {
            let zero = match (zero_mode, v) {
                (ZeroMode::Exact, crate::domain::CubeValue::Rational { num, .. }) => num == 0,
                (_, val) => val.to_f64().abs() < FLOAT_ZERO,
            };
            if zero {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / samples as f64;
    let half = 1.96 * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(EpsReport {
        s,
        count: hits,
        total: samples as u128,
        epsilon: p,
        zero_mode,
        sampled: true,
        confidence_half_width: Some(half),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals;

    #[test]
    fn full_system_passes_with_density_one() {
        let d = CyclicDomain::line(5).unwrap();
        let sys = CubeSystem::full(d, 2).unwrap();
        let report = check_cube_system(&sys.levels, 1.0).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.min_extension_density, 1.0);
    }

    #[test]
    fn removing_a_top_cube_is_detected_via_extension_density() {
        let d = CyclicDomain::line(5).unwrap();
        let sys = CubeSystem::full(d, 1).unwrap();
        let mut levels = sys.levels.clone();
        let gone = Cube::new(2, vec![1, 3]);
        levels[2].remove(&gone);
        // face closure still holds; extension density for its faces drops
        let report = check_cube_system(&levels, 1.0).unwrap();
        assert!(!report.pass);
        assert!(report.face_witness.is_none());
        assert!(report.extension_witness.is_some());
        assert!(report.min_extension_density < 1.0);
    }

    #[test]
    fn non_reflection_closed_set_yields_symmetry_witness() {
        let d = CyclicDomain::line(5).unwrap();
        let mut s = CubeSet::empty(d, 1).unwrap();
        s.insert(&Cube::new(0, vec![1]));
        // the reflection (1; -1) is missing
        assert!(s.symmetry_witness().is_some());
        let levels = vec![CubeSet::full(d, 0).unwrap(), s];
        let report = check_cube_system(&levels, 0.1).unwrap();
        assert!(!report.pass);
        assert!(report.symmetry_witness.is_some());
    }

    #[test]
    fn symmetrize_orbit_of_a_single_cube() {
        let d = CyclicDomain::line(5).unwrap();
        let mut s = CubeSet::empty(d, 2).unwrap();
        s.insert(&Cube::new(0, vec![1, 2]));
        let closed = s.symmetrize();
        // orbit of (0;1,2): 2 permutations x 4 reflection patterns, <= 8
        assert!(closed.len() <= 8 && closed.len() >= 4, "{}", closed.len());
        assert!(closed.symmetry_witness().is_none());
        // idempotence
        assert_eq!(closed.symmetrize().len(), closed.len());
        // already-closed set unchanged
        let full = CubeSet::full(d, 2).unwrap();
        assert_eq!(full.symmetrize().len(), full.len());
    }

    #[test]
    fn face_closure_completes_lower_levels() {
        let d = CyclicDomain::line(5).unwrap();
        let mut top = CubeSet::empty(d, 2).unwrap();
        top.insert(&Cube::new(1, vec![2, 3]));
        let levels = vec![
            CubeSet::empty(d, 0).unwrap(),
            CubeSet::empty(d, 1).unwrap(),
            top,
        ];
        let closed = face_closure(&levels).unwrap();
        // 1-faces: keep one direction, offset or not: 4 distinct cubes
        assert_eq!(closed[1].len(), 4);
        // 0-faces: the 4 vertices
        assert_eq!(closed[0].len(), 4);
        // idempotent
        let again = face_closure(&closed).unwrap();
        assert_eq!(again[0].len(), closed[0].len());
        assert_eq!(again[1].len(), closed[1].len());
    }

    #[test]
    fn glue_closure_examples() {
        let d = CyclicDomain::line(5).unwrap();
        // the full set is already a fixed point
        let full = CubeSet::full(d, 2).unwrap();
        let (closed, rep) = glue_closure(&full, &[0, 1]).unwrap();
        assert_eq!(closed.len(), full.len());
        assert_eq!(rep.before, rep.after);
        // a singleton with no partners stays put
        let mut single = CubeSet::empty(d, 2).unwrap();
        single.insert(&Cube::new(0, vec![1, 2]));
        let (closed, rep) = glue_closure(&single, &[0, 1]).unwrap();
        assert_eq!(closed.len(), 1);
        assert_eq!(rep.after, 1);
    }

    #[test]
    fn closure_operators_are_monotone_idempotent_extensive() {
        let d = CyclicDomain::line(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut a = CubeSet::empty(d, 2).unwrap();
        for _ in 0..40 {
            a.insert(&Cube::new(
                rng.gen_range(0..5),
                vec![rng.gen_range(0..5), rng.gen_range(0..5)],
            ));
        }
        let mut b = a.clone();
        for _ in 0..20 {
            b.insert(&Cube::new(
                rng.gen_range(0..5),
                vec![rng.gen_range(0..5), rng.gen_range(0..5)],
            ));
        }
        let (ca, _) = glue_closure(&a, &[0, 1]).unwrap();
        let (cb, _) = glue_closure(&b, &[0, 1]).unwrap();
        assert!(a.is_subset_of(&ca), "extensive");
        assert!(ca.is_subset_of(&cb), "monotone");
        let (caa, _) = glue_closure(&ca, &[0, 1]).unwrap();
        assert_eq!(caa.len(), ca.len(), "idempotent");
        // same laws for symmetrize
        let sa = a.symmetrize();
        let sb = b.symmetrize();
        assert!(a.is_subset_of(&sa) && sa.is_subset_of(&sb));
        assert_eq!(sa.symmetrize().len(), sa.len());
    }

    #[test]
    fn vanishing_set_of_quadratic_grows_under_closure() {
        // Seeded experiment: the second derivative of {(3x+5x^2)/31} mod 1
        // vanishes exactly on the cubes with h1 h2 = 0 mod 31. Seed the
        // closure with a random 30% of that set; gluing can only add cubes
        // whose derivative also vanishes, so growth stays inside it.
        let d = CyclicDomain::line(31).unwrap();
        let f = signals::phase_poly_rational(d, &[0, 3, 5]).unwrap();
        let (num, _) = f.rational_values().unwrap();
        let mut truth = CubeSet::empty(d, 2).unwrap();
        let mut seeded = CubeSet::empty(d, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for idx in 0..truth.total_slots() {
            let c = truth.cube_at(idx);
            let mut acc = 0i64;
            for omega in 0..4u32 {
                let v = c.vertex(&d, omega);
                if omega.count_ones() % 2 == 0 {
                    acc += num[v];
                } else {
                    acc -= num[v];
                }
            }
            if acc % 31 == 0 {
                truth.insert(&c);
                if rng.gen::<f64>() < 0.3 {
                    seeded.insert(&c);
                }
            }
        }
        let (closed, rep) = glue_closure(&seeded, &[0, 1]).unwrap();
        assert!(rep.after >= rep.before, "monotone growth");
        assert!(seeded.is_subset_of(&closed));
        assert!(closed.is_subset_of(&truth), "closure is sound");
        // frozen densities for this seed
        assert_eq!(rep.before, 1755);
        assert_eq!(rep.after, 5891);
    }

    #[test]
    fn translate_closure_moves_basepoints() {
        let d = CyclicDomain::line(5).unwrap();
        let mut sk = CubeSet::empty(d, 1).unwrap();
        sk.insert(&Cube::new(0, vec![2]));
        let sk1 = CubeSet::full(d, 2).unwrap();
        let (closed, rep) = translate_closure(&sk, &sk1).unwrap();
        // every translate of the basepoint appears
        assert_eq!(closed.len(), 5);
        assert!(rep.after > rep.before);
        // full next level, full current level: fixed point
        let full = CubeSet::full(d, 1).unwrap();
        let (c2, rep2) = translate_closure(&full, &sk1).unwrap();
        assert_eq!(c2.len(), full.len());
        assert_eq!(rep2.before, rep2.after);
    }

    #[test]
    fn epsilon_of_zero_function_is_one() {
        let d = CyclicDomain::line(7).unwrap();
        let f = GroupFn::rational(d, vec![0; 7], 7).unwrap();
        let r = approx_poly_epsilon(&f, 1, &Budget::default()).unwrap();
        assert_eq!(r.count as u128, r.total);
        assert_eq!(r.epsilon, 1.0);
        assert_eq!(r.zero_mode, ZeroMode::Exact);
    }

    #[test]
    fn epsilon_of_genuine_polynomials_is_one() {
        // On a finite cyclic group the polynomials with exactly vanishing
        // higher derivatives are the constants (torsion kills the rest);
        // those measure epsilon = 1 at every degree.
        let d = CyclicDomain::line(7).unwrap();
        let f = GroupFn::rational(d, vec![3; 7], 7).unwrap();
        for s in [1u32, 2] {
            let r = approx_poly_epsilon(&f, s, &Budget::default()).unwrap();
            assert_eq!(r.epsilon, 1.0, "s={s}");
        }
        // and a float constant under the tolerance rule
        let g = GroupFn::real(d, vec![0.37; 7]).unwrap();
        let r = approx_poly_epsilon(&g, 1, &Budget::default()).unwrap();
        assert_eq!(r.epsilon, 1.0);
        assert_eq!(r.zero_mode, ZeroMode::Tolerance);
    }

    #[test]
    fn epsilon_bracket_linear_regression_constant() {
        // frozen exhaustive count at N=31: 19871/29791
        let d = CyclicDomain::line(31).unwrap();
        let f = signals::bracket_linear_fn(d, 3).unwrap();
        let r = approx_poly_epsilon(&f, 1, &Budget::default()).unwrap();
        assert_eq!(r.count, 19871);
        assert_eq!(r.total, 29791);
        assert!(r.epsilon >= 0.25, "eps {} >= 1/4", r.epsilon);
    }

    #[test]
    fn epsilon_bracket_quadratic_regression_constant() {
        // frozen exhaustive count at N=31: 204321/923521
        let d = CyclicDomain::line(31).unwrap();
        let f = signals::bracket_quadratic_fn(d, 1, 2).unwrap();
        let r = approx_poly_epsilon(&f, 2, &Budget::default()).unwrap();
        assert_eq!(r.count, 204321);
        assert_eq!(r.total, 923521);
        assert!(r.epsilon > 0.0);
    }

    #[test]
    fn sampled_epsilon_brackets_the_exhaustive_value() {
        let d = CyclicDomain::line(13).unwrap();
        let f = signals::bracket_linear_fn(d, 2).unwrap();
        for s in [1u32, 2] {
            let exact = approx_poly_epsilon(&f, s, &Budget::default()).unwrap();
            let est = approx_poly_epsilon_sampled(&f, s, 4000, 99).unwrap();
            let half = est.confidence_half_width.unwrap();
            assert!(
                (est.epsilon - exact.epsilon).abs() <= half,
                "s={s}: |{} - {}| > {half}",
                est.epsilon,
                exact.epsilon
            );
        }
    }

    #[test]
    fn epsilon_respects_masks() {
        // masked points drop tuples from the numerator but not denominator
        let d = CyclicDomain::line(5).unwrap();
        let f = GroupFn::rational(d, vec![0; 5], 5)
            .unwrap()
            .with_mask(vec![true, true, true, true, false])
            .unwrap();
        let r = approx_poly_epsilon(&f, 1, &Budget::default()).unwrap();
        assert!(r.epsilon < 1.0);
        assert_eq!(r.total, 125);
        // the count is exactly the tuples avoiding the masked point
        let mut manual = 0u64;
        for x in 0..5usize {
            for h1 in 0..5usize {
                for h2 in 0..5usize {
                    let c = Cube::new(x, vec![h1, h2]);
                    if (0..4u32).all(|w| c.vertex(&d, w) != 4) {
                        manual += 1;
                    }
                }
            }
        }
        assert_eq!(r.count, manual);
    }

    #[test]
    fn epsilon_budget_is_enforced() {
        let d = CyclicDomain::line(31).unwrap();
        let f = signals::bracket_linear_fn(d, 3).unwrap();
        assert!(matches!(
            approx_poly_epsilon(&f, 1, &Budget::new(100)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn explicit_store_cap_is_enforced() {
        let d = CyclicDomain::line(101).unwrap();
        // 101^5 > 10^8
        assert!(matches!(
            CubeSet::empty(d, 4),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
