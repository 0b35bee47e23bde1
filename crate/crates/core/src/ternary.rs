//! Forms of dimension at most three: binary forms, Legendre equations, norm
//! equations in quadratic fields and the ternary algorithm built on them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{self, rat_int, Rational};
use crate::error::{Error, Result};
use crate::places::{self, DiagonalForm};
use crate::quadfield::{QFElement, QuadField};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IsotropicVector {
    #[serde(serialize_with = "ser_rationals")]
    pub coords: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl IsotropicVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        IsotropicVector { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Whether `f(v) = 0` with `v ≠ 0`.
    pub fn is_isotropic_for(&self, f: &DiagonalForm) -> Result<bool> {
        Ok(!self.is_zero() && f.evaluate(&self.coords)?.is_zero())
    }

    /// Primitive integer multiple with first nonzero coordinate positive.
    pub fn primitive(&self) -> IsotropicVector {
        let lcm = self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coords
            .iter()
            .map(|c| (c * rat_int(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return self.clone();
        }
        let sign = ints.iter().find(|x| !x.is_zero()).map_or(1, |x| if x.is_negative() { -1 } else { 1 });
        IsotropicVector {
            coords: ints.into_iter().map(|x| rat_int(x * sign / &g)).collect(),
        }
    }
}

fn checked(f: &DiagonalForm, v: IsotropicVector) -> Result<IsotropicVector> {
    if !v.is_isotropic_for(f)? {
        return Err(Error::Internal(format!("vector is not isotropic for {f}")));
    }
    Ok(v)
}

fn anisotropic(f: &DiagonalForm) -> Error {
    match places::anisotropy_witness(f) {
        Some(p) => Error::Anisotropic(p),
        None => Error::Internal(format!("{f} has no local obstruction")),
    }
}

/// For `⟨a_1, a_2⟩` with `-a_1 a_2 = d²`: `(d, a_1)`.
pub fn solve_binary(f: &DiagonalForm) -> Result<IsotropicVector> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("binary solver got dimension {}", f.dim())));
    }
    let c = f.coeffs();
    let d = arith::sqrt_exact(&-(&c[0] * &c[1])).ok_or_else(|| anisotropic(f))?;
    checked(f, IsotropicVector::new(vec![d.abs(), c[0].clone()]))
}

/// Square roots of `a` modulo the squarefree `|m|`, via the prime factors.
fn sqrt_mod_squarefree(a: &BigInt, m: &BigInt) -> Result<Option<BigInt>> {
    let m = m.abs();
    if m.is_one() {
        return Ok(Some(BigInt::zero()));
    }
    let fac = arith::factor(&m)?;
    let mut parts = Vec::new();
    for (p, _) in &fac.factors {
        let r = a.mod_floor(p);
        let root = if r.is_zero() {
            BigInt::zero()
        } else if *p == BigInt::from(2) {
            r
        } else {
            match arith::sqrt_mod(&r, p, 1)? {
                Some(x) => x,
                None => return Ok(None),
            }
        };
        parts.push((root, p.clone()));
    }
    let mut r = arith::crt(&parts)?;
    let half = &m / 2;
    if r > half {
        r -= &m;
    }
    Ok(Some(r))
}

/// `(w, x, y)` with `w² = A x² + B y²`, not all zero, by Lagrange descent on
/// `max(|A|, |B|)`. `A` and `B` are squarefree.
const SMALL_BOX: i128 = 8;

fn descent(a: &BigInt, b: &BigInt, depth: usize) -> Result<Option<(BigInt, BigInt, BigInt)>> {
    if depth > 4096 {
        return Err(Error::Internal("descent did not terminate".into()));
    }
    if a.abs() > b.abs() {
        return Ok(descent(b, a, depth + 1)?.map(|(w, x, y)| (w, y, x)));
    }
    let one = BigInt::one();
    if a.is_one() {
        return Ok(Some((one.clone(), one, BigInt::zero())));
    }
    if b.is_one() {
        return Ok(Some((one.clone(), BigInt::zero(), one)));
    }
    if *b == -&one {
        // w² = a x² - y² with |a| = 1, a ≠ 1
        return Ok(None);
    }
    if *b == -a {
        return Ok(Some((BigInt::zero(), one.clone(), one)));
    }
    let Some(r) = sqrt_mod_squarefree(a, b)? else {
        return Ok(None);
    };
    let q = (&r * &r - a) / b;
    if q.is_zero() {
        // r² = a: a is a perfect square, impossible for squarefree a ≠ 1
        return Err(Error::Internal(format!("{a} is a square")));
    }
    let b0 = arith::squarefree_int(&q)?;
    let t = arith::isqrt_exact(&(&q / &b0)).ok_or_else(|| Error::Internal("square part is not a square".into()))?;
    let Some((w1, x1, y1)) = descent(a, &b0, depth + 1)? else {
        return Ok(None);
    };
    // (r + √a)(w1 + x1√a) has norm b·(b0 t y1)²
    let w = &r * &w1 + a * &x1;
    let x = &r * &x1 + &w1;
    let y = &b0 * &t * &y1;
    let g = w.gcd(&x).gcd(&y);
    if g.is_zero() {
        return Err(Error::Internal("descent produced the zero vector".into()));
    }
    Ok(Some((w / &g, x / &g, y / &g)))
}

/// Nonzero primitive `(x, y, z)` with `a x² + b y² + c z² = 0` for squarefree,
/// pairwise coprime `a, b, c`. Coordinates are returned nonnegative.
pub fn solve_legendre(a: &BigInt, b: &BigInt, c: &BigInt) -> Result<(BigInt, BigInt, BigInt)> {
    let f = DiagonalForm::from_bigints(&[a.clone(), b.clone(), c.clone()])?;
    for x in [a, b, c] {
        if !arith::is_squarefree(x)? {
            return Err(Error::Invalid(format!("{x} is not squarefree")));
        }
    }
    if !a.gcd(b).is_one() || !a.gcd(c).is_one() || !b.gcd(c).is_one() {
        return Err(Error::NotCoprime);
    }
    if let Some(v) = small_solution(a, b, c) {
        return Ok(v);
    }
    // (c z)² = (-ac) x² + (-bc) y²
    let (w, x, y) = descent(&(-(a * c)), &(-(b * c)), 0)?.ok_or_else(|| anisotropic(&f))?;
    let z = Rational::new(w, c.clone());
    let v = IsotropicVector::new(vec![rat_int(x), rat_int(y), z]).primitive();
    let v: Vec<BigInt> = v.coords.iter().map(|q| q.to_integer().abs()).collect();
    checked(&f, IsotropicVector::new(v.iter().cloned().map(rat_int).collect()))?;
    Ok((v[0].clone(), v[1].clone(), v[2].clone()))
}

/// Lexicographically first nonzero solution in `[0, SMALL_BOX]³`, which is
/// primitive since dividing by the gcd would give an earlier one.
fn small_solution(a: &BigInt, b: &BigInt, c: &BigInt) -> Option<(BigInt, BigInt, BigInt)> {
    let (a, b, c) = (i128::try_from(a).ok()?, i128::try_from(b).ok()?, i128::try_from(c).ok()?);
    if [a, b, c].iter().any(|x| x.abs() > 1 << 60) {
        return None;
    }
    for x in 0..=SMALL_BOX {
        for y in 0..=SMALL_BOX {
            for z in 0..=SMALL_BOX {
                if (x, y, z) != (0, 0, 0) && a * x * x + b * y * y + c * z * z == 0 {
                    return Some((x.into(), y.into(), z.into()));
                }
            }
        }
    }
    None
}

/// Reduces `a x² + b y² + c z²` (nonzero integers) to a Legendre equation,
/// returning the new coefficients and per-coordinate factors `s` such that a
/// solution `X` of the new equation gives `x_i = s_i X_i`.
fn legendre_normal_form(coeffs: [BigInt; 3]) -> Result<([BigInt; 3], [Rational; 3])> {
    let mut c = coeffs;
    let mut s: [Rational; 3] = [Rational::one(), Rational::one(), Rational::one()];
    loop {
        for i in 0..3 {
            let sf = arith::squarefree_int(&c[i])?;
            let t = arith::isqrt_exact(&(&c[i] / &sf)).ok_or_else(|| Error::Internal("square part".into()))?;
            // c x² = sf (t x)²
            s[i] /= rat_int(t);
            c[i] = sf;
        }
        let g = c[0].gcd(&c[1]).gcd(&c[2]);
        for x in c.iter_mut() {
            *x /= &g;
        }
        let mut changed = false;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let g = c[i].gcd(&c[j]);
            if !g.is_one() {
                // g·(c_k x_k² + c_i x_i² + c_j x_j²)
                //   = (g c_k) x_k² + (c_i/g)(g x_i)² + (c_j/g)(g x_j)²
                c[k] *= &g;
                c[i] /= &g;
                c[j] /= &g;
                let gr = rat_int(g);
                s[i] /= &gr;
                s[j] /= &gr;
                changed = true;
                break;
            }
        }
        if !changed {
            return Ok((c, s));
        }
    }
}

/// `ξ = x + y√d` with `N(ξ) = b`, or `None` if `b` is not a norm from `L`.
pub fn solve_norm_equation(l: &QuadField, b: &Rational) -> Result<Option<QFElement>> {
    if b.is_zero() {
        return Err(Error::ZeroInput);
    }
    let d = rat_int(l.d().clone());
    // y-coefficient first so that d = -1, b = 5 gives 2 + i
    let f = DiagonalForm::new(vec![-d.clone(), Rational::one(), -b.clone()])?;
    if !places::is_globally_isotropic(&f) {
        return Ok(None);
    }
    let den = b.denom().clone();
    let ints = [
        -l.d().clone(),
        BigInt::one(),
        -(b.numer() * &den),
    ];
    // b = (b·den²)/den²: z ↦ den·z
    let (c, s) = legendre_normal_form(ints)?;
    let (x, y, z) = solve_legendre(&c[0], &c[1], &c[2])?;
    let ycoef = rat_int(x) * &s[0];
    let xcoef = rat_int(y) * &s[1];
    let zc = rat_int(z) * &s[2] * rat_int(den);
    if zc.is_zero() {
        return Err(Error::Internal("norm equation solution at infinity".into()));
    }
    let xi = l.element(xcoef / &zc, ycoef / &zc);
    if xi.norm() != *b {
        return Err(Error::Internal(format!("N({xi}) != {b}")));
    }
    Ok(Some(xi))
}

/// The ternary algorithm: a closed form when some `-a_i a_j` is a square,
/// otherwise a norm equation in `ℚ(√(-a_2/a_1))`.
pub fn solve_dim3(f: &DiagonalForm) -> Result<IsotropicVector> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch(format!("ternary solver got dimension {}", f.dim())));
    }
    let a = f.coeffs();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if let Some(d) = arith::sqrt_exact(&-(&a[i] * &a[j])) {
            let mut v = vec![Rational::zero(); 3];
            v[i] = d.abs();
            v[j] = a[i].clone();
            return checked(f, IsotropicVector::new(v));
        }
    }
    if !places::is_globally_isotropic(f) {
        return Err(anisotropic(f));
    }
    let ratio = -(&a[1] / &a[0]);
    let (l, t) = QuadField::from_rational(&ratio)?;
    let target = -(&a[2] / &a[0]);
    let xi = solve_norm_equation(&l, &target)?
        .ok_or_else(|| Error::Internal(format!("{target} is not a norm although {f} is isotropic")))?;
    // ξ = x + y√d = v_1 + v_2 √(-a_2/a_1) with √(-a_2/a_1) = t√d
    let v = vec![xi.x.clone(), &xi.y / &t, Rational::one()];
    checked(f, IsotropicVector::new(v))
}
