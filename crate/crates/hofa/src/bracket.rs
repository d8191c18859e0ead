//! Bracket polynomial expressions, carry bits, and the derivative
//! coefficient identities for bracket linear and bracket quadratic
//! functions.
//!
//! All arithmetic here is exact: expression evaluation uses arbitrary
//! precision rationals, and the coefficient identities are verified over
//! integer numerators. No floating point enters this module.
//!
//! # The quadratic coefficient expansion
//!
//! Write A(v) = {av/N}, B(v) = {bv/N}, g = A.B, and fix a 3-cube
//! c = (x; h1, h2, h3) with vertices v_w = x + w.h over the integers. The
//! accumulated carry of A along w is
//!
//! ```text
//! C_A(w) = floor( {ax/N} + sum_{i in w} {a h_i / N} )  in {0, ..., |w|},
//! ```
//!
//! which satisfies A(v_w) = {ax/N} + sum_{i in w} {a h_i/N} - C_A(w): this
//! is the single-step carry identity {t+u} = {t} + {u} - carry applied
//! repeatedly. Expanding A(v) = av/N - floor(av/N) and cancelling the true
//! quadratic (ab v^2/N^2, killed by the alternating sum) together with every
//! term affine in w leaves
//!
//! ```text
//! d3 g(c) = -sum_w (-1)^{|w|} [ C^_B(w) A(v_w) + C^_A(w) B(v_w) + C^_A(w) C^_B(w) ],
//! ```
//!
//! where C^ is C re-gauged by its single-step carries,
//! C^(w) = C(w) - sum_{i in w} C(e_i); the gauge term is affine in w so the
//! identity is unaffected, and it pins |C^| <= 1 at |w| = 2 and |C^| <= 2 at
//! |w| = 3. The per-vertex coefficient vector against (1, A, B) is
//! therefore (-C^_A C^_B, -C^_B, -C^_A), with every component bounded by 2
//! after moving the one possible |C^_A C^_B| = 4 overflow at w = 111 onto
//! two weight-2 vertices (a pure constant shift that preserves the
//! alternating sum). This closed form is the existence proof; the shipped
//! coefficients are canonicalized per cube to the graded-lexicographically
//! smallest valid vector family with per-vertex l1 norm at most 2, and the
//! closed form plus an exact checker stand behind it as the safety net.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::domain::{Cube, CyclicDomain, GroupFn};
use crate::error::{Error, Result};

/// Expression tree over integer constants, constants-over-N, monomials
/// a.x_j/N, fractional part, floor, sum, and product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BracketExpr {
    /// Integer constant k.
    Int(i64),
    /// Constant k/N.
    ConstOverN(i64),
    /// Monomial a.x_j/N.
    Mono { coeff: i64, var: usize },
    /// Fractional part {e}, always in [0, 1).
    Frac(Box<BracketExpr>),
    /// Floor, always an integer.
    Floor(Box<BracketExpr>),
    Add(Box<BracketExpr>, Box<BracketExpr>),
    Mul(Box<BracketExpr>, Box<BracketExpr>),
}

fn big(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

fn frac_part(v: &BigRational) -> BigRational {
    v - v.floor()
}

/// Exact evaluation at an integer tuple.
pub fn eval(e: &BracketExpr, x: &[i64], n: u32) -> Result<BigRational> {
    Ok(match e {
        BracketExpr::Int(k) => big(*k),
        BracketExpr::ConstOverN(k) => big(*k) / big(n as i64),
        BracketExpr::Mono { coeff, var } => {
            let Some(&xv) = x.get(*var) else {
                return Err(Error::Parameter(format!(
                    "monomial references variable {var} but only {} given",
                    x.len()
                )));
            };
            big(*coeff) * big(xv) / big(n as i64)
        }
        BracketExpr::Frac(inner) => frac_part(&eval(inner, x, n)?),
        BracketExpr::Floor(inner) => eval(inner, x, n)?.floor(),
        BracketExpr::Add(a, b) => eval(a, x, n)? + eval(b, x, n)?,
        BracketExpr::Mul(a, b) => eval(a, x, n)? * eval(b, x, n)?,
    })
}

/// Evaluate over the whole domain and pack into a rational-mode function.
/// Fails if the least common denominator exceeds `max_den`.
pub fn materialize(e: &BracketExpr, domain: CyclicDomain, max_den: i64) -> Result<GroupFn> {
    use num_integer::Integer;
    let pts = domain.points();
    let mut vals = Vec::with_capacity(pts);
    let mut den = BigInt::one();
    for idx in 0..pts {
        let p: Vec<i64> = domain.point(idx).iter().map(|&c| c as i64).collect();
        let v = eval(e, &p, domain.modulus())?;
        den = den.lcm(v.denom());
        vals.push(v);
    }
    if den > BigInt::from(max_den) {
        return Err(Error::Parameter(format!(
            "common denominator {den} exceeds the bound {max_den}"
        )));
    }
    let den_i: i64 = den.try_into().expect("bounded above");
    let num = vals
        .into_iter()
        .map(|v| {
            let scaled = v * big(den_i);
            debug_assert!(scaled.is_integer());
            let n: BigInt = scaled.to_integer();
            n.try_into().map_err(|_| {
                Error::Parameter("materialized numerator exceeds i64".into())
            })
        })
        .collect::<Result<Vec<i64>>>()?;
    GroupFn::rational(domain, num, den_i)
}

/// Parse the prefix grammar:
///
/// ```text
/// expr := (add expr expr) | (mul expr expr) | (frac expr) | (floor expr)
///       | (mon A [V]) | (int K) | (cst K)
/// ```
///
/// `(mon A)` is A.x/N in the single variable x; `(mon A xJ)` selects
/// variable J (0-based). `(int K)` is the integer K and `(cst K)` is K/N.
pub fn parse(src: &str) -> Result<BracketExpr> {
    let mut tokens = tokenize(src);
    tokens.reverse();
    let e = parse_expr(&mut tokens)?;
    if !tokens.is_empty() {
        return Err(Error::Parse(format!(
            "trailing input after expression: {:?}",
            tokens.last()
        )));
    }
    Ok(e)
}

fn tokenize(src: &str) -> Vec<String> {
    src.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_expr(tokens: &mut Vec<String>) -> Result<BracketExpr> {
    let tok = tokens
        .pop()
        .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    if tok != "(" {
        return Err(Error::Parse(format!("expected '(', got {tok}")));
    }
    let head = tokens
        .pop()
        .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    let expr = match head.as_str() {
        "add" => {
            let a = parse_expr(tokens)?;
            let b = parse_expr(tokens)?;
            BracketExpr::Add(Box::new(a), Box::new(b))
        }
        "mul" => {
            let a = parse_expr(tokens)?;
            let b = parse_expr(tokens)?;
            BracketExpr::Mul(Box::new(a), Box::new(b))
        }
        "frac" => BracketExpr::Frac(Box::new(parse_expr(tokens)?)),
        "floor" => BracketExpr::Floor(Box::new(parse_expr(tokens)?)),
        "int" => BracketExpr::Int(parse_int(tokens)?),
        "cst" => BracketExpr::ConstOverN(parse_int(tokens)?),
        "mon" => {
            let coeff = parse_int(tokens)?;
            // optional variable token: x or xJ
            let var = match tokens.last().map(String::as_str) {
                Some(")") => 0,
                Some(_) => {
                    let v = tokens.pop().unwrap();
                    if v == "x" {
                        0
                    } else if let Some(stripped) = v.strip_prefix('x') {
                        stripped
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad variable {v}")))?
                    } else {
                        return Err(Error::Parse(format!("bad variable {v}")));
                    }
                }
                None => return Err(Error::Parse("unexpected end of input".into())),
            };
            BracketExpr::Mono { coeff, var }
        }
        other => return Err(Error::Parse(format!("unknown operator {other}"))),
    };
    match tokens.pop() {
        Some(t) if t == ")" => Ok(expr),
        other => Err(Error::Parse(format!("expected ')', got {other:?}"))),
    }
}

fn parse_int(tokens: &mut Vec<String>) -> Result<i64> {
    let t = tokens
        .pop()
        .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    t.parse::<i64>()
        .map_err(|_| Error::Parse(format!("expected integer, got {t}")))
}

/// The carry bit of {ax/N} + {ay/N}: 1 exactly when the sum reaches 1.
/// Computed over integers: (ax mod N) + (ay mod N) >= N.
pub fn carry_bit(a: i64, x: i64, y: i64, n: u32) -> u8 {
    let n = n as i64;
    let rx = (a * x).rem_euclid(n);
    let ry = (a * y).rem_euclid(n);
    u8::from(rx + ry >= n)
}

fn residue(a: i64, v: i64, n: u32) -> i64 {
    (a * v).rem_euclid(n as i64)
}

/// Second-derivative coefficient of the bracket linear function g = {ax/N}
/// on a 2-cube: b(c) = carry(a, x, h2) - carry(a, x+h1, h2), which equals
/// the cube derivative of g exactly and is bounded by 1.
///
/// The equality is re-verified on every call; a mismatch means the carry
/// algebra itself is broken and surfaces as an internal error.
pub fn bracket_linear_coeff(a: i64, n: u32, c: &Cube) -> Result<i64> {
    if c.dim() != 2 {
        return Err(Error::Parameter("bracket linear expects a 2-cube".into()));
    }
    let domain = CyclicDomain::line(n)?;
    let x = c.base as i64;
    let h1 = c.dirs[0] as i64;
    let h2 = c.dirs[1] as i64;
    let b = carry_bit(a, x, h2, n) as i64 - carry_bit(a, x + h1, h2, n) as i64;
    // exact check: N * dg(c) = sum of residues with cube signs
    let mut lhs = 0i64;
    for omega in 0..4u32 {
        let v = c.vertex(&domain, omega) as i64;
        let r = residue(a, v, n);
        if omega.count_ones() % 2 == 0 {
            lhs += r;
        } else {
            lhs -= r;
        }
    }
    if lhs != b * n as i64 {
        return Err(Error::InternalConsistency(format!(
            "bracket linear identity failed at cube {c:?}: derivative {lhs}/{n} vs coefficient {b}"
        )));
    }
    debug_assert!(b.abs() <= 1);
    Ok(b)
}

/// Per-vertex coefficient vectors (against the family 1, {ax/N}, {bx/N})
/// expressing the third derivative of {ax/N}{bx/N}. Index: bit i of the
/// omega position is direction i; each row is (b0, bA, bB).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadCoeffs {
    pub per_omega: [[i64; 3]; 8],
}

/// Accumulated carries C^ for one bracket factor, in the affine gauge that
/// zeroes them at |w| <= 1 (see the module docs).
fn gauged_carries(coef: i64, n: u32, x: i64, hs: [i64; 3]) -> [i64; 8] {
    let n64 = n as i64;
    let s0 = residue(coef, x, n);
    let s = [
        residue(coef, hs[0], n),
        residue(coef, hs[1], n),
        residue(coef, hs[2], n),
    ];
    let mut c = [0i64; 8];
    for (omega, slot) in c.iter_mut().enumerate() {
        let mut t = s0;
        for (i, &si) in s.iter().enumerate() {
            if omega >> i & 1 == 1 {
                t += si;
            }
        }
        *slot = t / n64; // floor of a nonnegative rational over n
    }
    let singles = [c[1], c[2], c[4]];
    let mut out = [0i64; 8];
    for omega in 0..8usize {
        let mut gauge = 0i64;
        for (i, &ci) in singles.iter().enumerate() {
            if omega >> i & 1 == 1 {
                gauge += ci;
            }
        }
        out[omega] = c[omega] - gauge;
    }
    out
}

/// Closed-form coefficients from the carry expansion; every component is
/// bounded by 2 and the identity is exact by construction.
fn quad_closed_form(a: i64, b: i64, n: u32, x: i64, hs: [i64; 3]) -> [[i64; 3]; 8] {
    let ca = gauged_carries(a, n, x, hs);
    let cb = gauged_carries(b, n, x, hs);
    let mut out = [[0i64; 3]; 8];
    for omega in 0..8usize {
        out[omega] = [-ca[omega] * cb[omega], -cb[omega], -ca[omega]];
    }
    // |C^_A C^_B| = 4 can only happen at w = 111; shift the excess constant
    // onto two weight-2 vertices, preserving the alternating sum
    if out[7][0].abs() > 2 {
        debug_assert_eq!(out[7][0].abs(), 4);
        let sg = -out[7][0].signum();
        out[7][0] += 2 * sg;
        out[6][0] += sg;
        out[5][0] += sg;
    }
    out
}

/// N^2-scaled third derivative of {ax/N}{bx/N} at the cube (integer).
fn quad_derivative_num(a: i64, b: i64, n: u32, domain: &CyclicDomain, c: &Cube) -> i64 {
    let mut acc = 0i64;
    for omega in 0..8u32 {
        let v = c.vertex(domain, omega) as i64;
        let t = residue(a, v, n) * residue(b, v, n);
        if omega.count_ones() % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// N^2-scaled value of the vector family sum for candidate coefficients.
fn quad_family_num(
    coeffs: &[[i64; 3]; 8],
    a: i64,
    b: i64,
    n: u32,
    domain: &CyclicDomain,
    c: &Cube,
) -> i64 {
    let n64 = n as i64;
    let mut acc = 0i64;
    for omega in 0..8u32 {
        let v = c.vertex(domain, omega) as i64;
        let [b0, ba, bb] = coeffs[omega as usize];
        let t = b0 * n64 * n64 + ba * residue(a, v, n) * n64 + bb * residue(b, v, n) * n64;
        if omega.count_ones() % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// Candidate vectors in Z^3 with l1 norm <= 2, graded by norm and then
/// ordered entrywise 0 < 1 < -1 < 2 < -2.
fn l1_candidates() -> Vec<[i64; 3]> {
    let order = [0i64, 1, -1, 2, -2];
    let mut out = Vec::new();
    for &i in &order {
        for &j in &order {
            for &k in &order {
                if i.abs() + j.abs() + k.abs() <= 2 {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out.sort_by_key(|v| {
        (
            v[0].abs() + v[1].abs() + v[2].abs(),
            v.map(|e| (e.abs(), u8::from(e < 0))),
        )
    });
    out
}

/// Third-derivative coefficient vectors for g = {ax/N}{bx/N} on a 3-cube:
/// the graded-lexicographically smallest family with per-vertex l1 norm at
/// most 2 satisfying
///
/// ```text
/// d3 g(c) = sum_w (-1)^{|w|} b(c,w) . (1, {a v_w/N}, {b v_w/N}).
/// ```
///
/// The carry-expansion closed form guarantees a valid family exists and is
/// checked first; if either the closed form or the bounded search fails the
/// derivation is broken and a structural error is raised.
pub fn bracket_quadratic_coeffs(a: i64, b: i64, n: u32, c: &Cube) -> Result<QuadCoeffs> {
    if c.dim() != 3 {
        return Err(Error::Parameter("bracket quadratic expects a 3-cube".into()));
    }
    let domain = CyclicDomain::line(n)?;
    let x = c.base as i64;
    let hs = [c.dirs[0] as i64, c.dirs[1] as i64, c.dirs[2] as i64];
    let closed = quad_closed_form(a, b, n, x, hs);
    let target = quad_derivative_num(a, b, n, &domain, c);
    if quad_family_num(&closed, a, b, n, &domain, c) != target {
        return Err(Error::InternalConsistency(format!(
            "carry expansion does not reproduce the third derivative at {c:?}"
        )));
    }
    // canonicalize: graded-lex DFS over per-vertex vectors with l1 <= 2
    let cands = l1_candidates();
    let n64 = n as i64;
    let mut vertex_vals = [[0i64; 2]; 8];
    for omega in 0..8usize {
        let v = c.vertex(&domain, omega as u32) as i64;
        vertex_vals[omega] = [residue(a, v, n), residue(b, v, n)];
    }
    let contrib = |omega: usize, cand: &[i64; 3]| -> i64 {
        let t = cand[0] * n64 * n64
            + cand[1] * vertex_vals[omega][0] * n64
            + cand[2] * vertex_vals[omega][1] * n64;
        if (omega as u32).count_ones() % 2 == 0 {
            t
        } else {
            -t
        }
    };
    // max |contribution| from the remaining slots, for pruning
    let max_contrib: Vec<i64> = (0..8)
        .map(|omega| cands.iter().map(|cd| contrib(omega, cd).abs()).max().unwrap())
        .collect();
    let mut suffix = [0i64; 9];
    for omega in (0..8).rev() {
        suffix[omega] = suffix[omega + 1] + max_contrib[omega];
    }
    fn dfs(
        omega: usize,
        acc: i64,
        target: i64,
        cands: &[[i64; 3]],
        contrib: &dyn Fn(usize, &[i64; 3]) -> i64,
        suffix: &[i64; 9],
        chosen: &mut [[i64; 3]; 8],
    ) -> bool {
        if omega == 8 {
            return acc == target;
        }
        if (acc - target).abs() > suffix[omega] {
            return false;
        }
        for cand in cands {
            chosen[omega] = *cand;
            if dfs(omega + 1, acc + contrib(omega, cand), target, cands, contrib, suffix, chosen) {
                return true;
            }
        }
        false
    }
    let mut chosen = [[0i64; 3]; 8];
    if !dfs(0, 0, target, &cands, &contrib, &suffix, &mut chosen) {
        return Err(Error::Structural(format!(
            "no coefficient family with l1 <= 2 at cube {c:?}"
        )));
    }
    Ok(QuadCoeffs { per_omega: chosen })
}

/// Exact check that a coefficient family reproduces the third derivative.
pub fn verify_quadratic_identity(
    coeffs: &QuadCoeffs,
    a: i64,
    b: i64,
    n: u32,
    c: &Cube,
) -> Result<bool> {
    if c.dim() != 3 {
        return Err(Error::Parameter("bracket quadratic expects a 3-cube".into()));
    }
    let domain = CyclicDomain::line(n)?;
    Ok(quad_family_num(&coeffs.per_omega, a, b, n, &domain, c)
        == quad_derivative_num(a, b, n, &domain, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, ToPrimitive, Zero};
    use proptest::prelude::*;

    #[test]
    fn eval_hand_examples() {
        // {0} = 0
        let z = BracketExpr::Frac(Box::new(BracketExpr::Int(0)));
        assert!(eval(&z, &[0], 5).unwrap().is_zero());
        // {2.3/5} = {6/5} = 1/5
        let e = BracketExpr::Frac(Box::new(BracketExpr::Mono { coeff: 2, var: 0 }));
        assert_eq!(eval(&e, &[3], 5).unwrap(), big(1) / big(5));
        // {2x/5} {3x/5} at x=4: (3/5)(2/5) = 6/25
        let p = BracketExpr::Mul(
            Box::new(BracketExpr::Frac(Box::new(BracketExpr::Mono {
                coeff: 2,
                var: 0,
            }))),
            Box::new(BracketExpr::Frac(Box::new(BracketExpr::Mono {
                coeff: 3,
                var: 0,
            }))),
        );
        assert_eq!(eval(&p, &[4], 5).unwrap(), big(6) / big(25));
    }

    #[test]
    fn parser_round_trips_the_quadratic() {
        let e = parse("(mul (frac (mon 2 x)) (frac (mon 3 x)))").unwrap();
        assert_eq!(eval(&e, &[4], 5).unwrap(), big(6) / big(25));
        assert!(parse("(mul (frac (mon 2 x))").is_err());
        assert!(parse("(bogus 1)").is_err());
        assert!(parse("(int 3) (int 4)").is_err());
    }

    #[test]
    fn materialize_bracket_product() {
        let d = CyclicDomain::line(5).unwrap();
        let e = parse("(mul (frac (mon 1 x)) (frac (mon 2 x)))").unwrap();
        let f = materialize(&e, d, 25).unwrap();
        let (num, den) = f.rational_values().unwrap();
        assert_eq!(den, 25);
        // x=4: {4/5}{8/5 mod 1} = (4/5)(3/5) = 12/25
        assert_eq!(num[4], 12);
        // too-small denominator bound errors out
        assert!(materialize(&e, d, 5).is_err());
    }

    #[test]
    fn carry_bit_examples() {
        // y = 0 never carries
        for x in 0..7 {
            assert_eq!(carry_bit(3, x, 0, 7), 0);
        }
        // {4/5} + {4/5} = 8/5 >= 1
        assert_eq!(carry_bit(2, 2, 2, 5), 1);
    }

    #[test]
    fn carry_identity_exhaustive() {
        // {a(x+y)/N} = {ax/N} + {ay/N} - carry, N=7, all a in 1..6
        for a in 1..7i64 {
            for x in 0..7i64 {
                for y in 0..7i64 {
                    let lhs = residue(a, x + y, 7);
                    let rhs = residue(a, x, 7) + residue(a, y, 7) - 7 * carry_bit(a, x, y, 7) as i64;
                    assert_eq!(lhs, rhs, "a={a} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn bracket_linear_identity_exhaustive() {
        // N=7, a=3: identity on 100% of 2-cubes with |b| <= 1
        for x in 0..7usize {
            for h1 in 0..7usize {
                for h2 in 0..7usize {
                    let c = Cube::new(x, vec![h1, h2]);
                    let b = bracket_linear_coeff(3, 7, &c).unwrap();
                    assert!(b.abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn bracket_linear_degenerate_directions() {
        // h2 = 0 forces b = 0; h1 = 0 cancels the two carries
        for x in 0..7usize {
            for h in 0..7usize {
                assert_eq!(
                    bracket_linear_coeff(3, 7, &Cube::new(x, vec![h, 0])).unwrap(),
                    0
                );
                assert_eq!(
                    bracket_linear_coeff(3, 7, &Cube::new(x, vec![0, h])).unwrap(),
                    0
                );
            }
        }
    }

    #[test]
    fn bracket_quadratic_exhaustive_n5() {
        // N=5, (a,b) = (1,2): identity on 100% of 3-cubes, components <= 2
        for x in 0..5usize {
            for h1 in 0..5usize {
                for h2 in 0..5usize {
                    for h3 in 0..5usize {
                        let c = Cube::new(x, vec![h1, h2, h3]);
                        let q = bracket_quadratic_coeffs(1, 2, 5, &c).unwrap();
                        assert!(verify_quadratic_identity(&q, 1, 2, 5, &c).unwrap());
                        for row in &q.per_omega {
                            assert!(row.iter().all(|v| v.abs() <= 2));
                            assert!(row.iter().map(|v| v.abs()).sum::<i64>() <= 2);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bracket_quadratic_zero_direction_cancels() {
        // any zero direction makes the derivative vanish and the zero
        // family valid
        let zero = QuadCoeffs {
            per_omega: [[0; 3]; 8],
        };
        for x in 0..5usize {
            for h in 0..5usize {
                for pos in 0..3usize {
                    let mut dirs = vec![h, 2, 3];
                    dirs[pos] = 0;
                    dirs[(pos + 1) % 3] = h;
                    let c = Cube::new(x, dirs);
                    assert!(verify_quadratic_identity(&zero, 1, 2, 5, &c).unwrap());
                }
            }
        }
    }

    #[test]
    fn closed_form_alone_verifies_on_larger_n() {
        // spot the raw carry expansion (pre-canonicalization) at N=11
        let d = CyclicDomain::line(11).unwrap();
        for x in 0..11usize {
            for h1 in [1usize, 3, 7] {
                for h2 in [2usize, 5, 10] {
                    for h3 in [4usize, 6, 9] {
                        let c = Cube::new(x, vec![h1, h2, h3]);
                        let cf = quad_closed_form(2, 3, 11, x as i64, [h1 as i64, h2 as i64, h3 as i64]);
                        assert_eq!(
                            quad_family_num(&cf, 2, 3, 11, &d, &c),
                            quad_derivative_num(2, 3, 11, &d, &c)
                        );
                        for row in &cf {
                            assert!(row.iter().all(|v| v.abs() <= 2), "{row:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_bracket_is_an_approximate_quadratic() {
        // the third derivative vanishes on a positive fraction of cubes;
        // frozen exhaustive count at N=31 lives in the cube-system tests
        let d = CyclicDomain::line(31).unwrap();
        let mut zero = 0u64;
        let mut total = 0u64;
        for x in 0..31usize {
            for h1 in 0..31usize {
                for h2 in [0usize, 3, 11] {
                    for h3 in [0usize, 7, 19] {
                        let c = Cube::new(x, vec![h1, h2, h3]);
                        total += 1;
                        if quad_derivative_num(1, 2, 31, &d, &c) == 0 {
                            zero += 1;
                        }
                    }
                }
            }
        }
        assert!(zero * 5 > total, "vanishing fraction {zero}/{total}");
    }

    proptest! {
        #[test]
        fn frac_always_in_unit_interval(coeff in -20i64..20, x in 0i64..13, n in 2u32..14) {
            let e = BracketExpr::Frac(Box::new(BracketExpr::Mono { coeff, var: 0 }));
            let v = eval(&e, &[x], n).unwrap();
            prop_assert!(!v.is_negative());
            prop_assert!(v < big(1));
        }

        #[test]
        fn frac_is_value_minus_floor(num in -50i64..50, den in 1i64..20) {
            let t = big(num) / big(den);
            let fr = frac_part(&t);
            prop_assert_eq!(fr, &t - t.floor());
            prop_assert!(t.floor().is_integer());
        }

        #[test]
        fn quadratic_family_has_denominator_n(x in 0usize..5, h1 in 0usize..5, h2 in 0usize..5, h3 in 0usize..5) {
            // the third derivative of the quadratic bracket has denominator
            // dividing N, not N^2: the N^2 parts cancel in the alternating sum
            let d = CyclicDomain::line(5).unwrap();
            let c = Cube::new(x, vec![h1, h2, h3]);
            let numer = quad_derivative_num(1, 2, 5, &d, &c);
            prop_assert_eq!(numer % 5, 0);
            let _ = numer.to_i64();
        }
    }
}
