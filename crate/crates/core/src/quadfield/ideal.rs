//! Ideals `scale·[a, (b + √D)/2]`, products, and reduction that keeps track
//! of the element relating an ideal to its reduced representative.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Zero};

use super::{PrimeIdeal, PrimeKind, QFElement, QuadField};
use crate::arith::{rat_int, Rational};
use crate::error::{Error, Result};

/// Fractional ideal `scale·[a, (b + √D)/2]` with `b² ≡ D (mod 4a)` and
/// `b ∈ (-a, a]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QFIdeal {
    pub scale: Rational,
    pub a: i128,
    pub b: i128,
}

impl QFIdeal {
    pub fn new(scale: Rational, a: i128, b: i128) -> QFIdeal {
        QFIdeal {
            scale,
            a,
            b: normalize_b(a, b),
        }
    }

    pub fn unit() -> QFIdeal {
        QFIdeal {
            scale: Rational::one(),
            a: 1,
            b: 0,
        }
    }

    pub fn is_valid(&self, disc: i128) -> bool {
        self.a > 0 && (self.b * self.b - disc).rem_euclid(4 * self.a) == 0 && !self.scale.is_zero()
    }

    pub fn norm(&self) -> Rational {
        &self.scale * &self.scale * rat_int(BigInt::from(self.a))
    }
}

/// Primitive integral ideal `[a, (b + √D)/2]`.
pub(crate) type Prim = (i128, i128);

pub(crate) fn normalize_b(a: i128, b: i128) -> i128 {
    let m = 2 * a;
    let mut r = b.rem_euclid(m);
    if r > a {
        r -= m;
    }
    r
}

fn unit_prim(disc: i128) -> Prim {
    (1, disc.rem_euclid(2))
}

fn gcd(a: i128, b: i128) -> i128 {
    a.abs().gcd(&b.abs())
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// `I·J = g·[A, (B + √D)/2]`, returned as `(g, (A, B))`.
pub(crate) fn mul_prim(disc: i128, i: Prim, j: Prim) -> Result<(i128, Prim)> {
    let gens_i = [(2 * i.0, 0i128), (i.1, 1i128)];
    let gens_j = [(2 * j.0, 0i128), (j.1, 1i128)];
    let mut vecs = Vec::with_capacity(4);
    for &(x1, y1) in &gens_i {
        for &(x2, y2) in &gens_j {
            let xx = x1
                .checked_mul(x2)
                .and_then(|v| disc.checked_mul(y1 * y2).and_then(|w| v.checked_add(w)))
                .ok_or_else(|| Error::Resource("ideal product overflow".into()))?;
            vecs.push((xx / 2, (x1 * y2 + x2 * y1) / 2));
        }
    }
    // Hermite form of the lattice spanned by the (X, Y) vectors.
    let mut g = 0i128;
    let mut xg = 0i128;
    for &(x, y) in &vecs {
        if y == 0 {
            continue;
        }
        if g == 0 {
            g = y.abs();
            xg = x * y.signum();
            continue;
        }
        let (ng, u, v) = ext_gcd(g, y);
        xg = u * xg + v * x;
        g = ng;
    }
    let mut xa = 0i128;
    for &(x, y) in &vecs {
        xa = gcd(xa, x - (y / g) * xg);
    }
    if xa == 0 || xa % (2 * g) != 0 || xg % g != 0 {
        return Err(Error::Internal("ideal product is not an ideal".into()));
    }
    let a = xa / (2 * g);
    let b = normalize_b(a, xg / g);
    if (b * b - disc).rem_euclid(4 * a) != 0 {
        return Err(Error::Internal("ideal product lost the ideal condition".into()));
    }
    Ok((g, (a, b)))
}

/// Element `(x + y√D) / den` expressed over `√d`.
fn disc_element(field: &QuadField, x: i128, y: i128, den: i128) -> QFElement {
    let f = field.disc_factor() as i128;
    field.element(
        Rational::new(BigInt::from(x), BigInt::from(den)),
        Rational::new(BigInt::from(y * f), BigInt::from(den)),
    )
}

fn isqrt(n: i128) -> i128 {
    (n as u128).sqrt() as i128
}

fn is_reduced_real(s: i128, p: i128, q: i128) -> bool {
    q > 0 && p <= s && s < p + q && q <= p + s
}

/// One continued-fraction step on `θ = (P + √D)/Q`. Returns the next state
/// and the multiplier μ with `[|Q|/2, (P+√D)/2] = μ·[|Q'|/2, (P'+√D)/2]`.
fn real_step(field: &QuadField, disc: i128, s: i128, p: i128, q: i128) -> (i128, i128, QFElement) {
    let fl = if q > 0 {
        (p + s).div_euclid(q)
    } else {
        -((p + s).div_euclid(-q) + 1)
    };
    let p2 = fl * q - p;
    let q2 = (disc - p2 * p2) / q;
    (p2, q2, disc_element(field, -p2, 1, q2.abs()))
}

/// Reduce `I` to a reduced ideal `R` with `I = μ·R`.
pub(crate) fn reduce(field: &QuadField, i: Prim) -> Result<(Prim, QFElement)> {
    let disc = field.disc_i128()?;
    let mut mu = field.from_int(1);
    if disc < 0 {
        let (mut a, mut b) = (i.0, normalize_b(i.0, i.1));
        loop {
            let c = (b * b - disc) / (4 * a);
            if a > c || (a == c && b < 0) {
                mu = &mu * &disc_element(field, b, 1, 2 * c);
                a = c;
                b = normalize_b(a, -b);
            } else {
                return Ok(((a, b), mu));
            }
        }
    } else {
        let s = isqrt(disc);
        let (mut p, mut q) = (i.1, 2 * i.0);
        let mut steps = 0usize;
        while !is_reduced_real(s, p, q) {
            let (p2, q2, m) = real_step(field, disc, s, p, q);
            mu = &mu * &m;
            p = p2;
            q = q2;
            steps += 1;
            if steps > field.period_cap() {
                return Err(Error::Resource("reduction did not terminate within the cap".into()));
            }
        }
        Ok(((q / 2, p), mu))
    }
}

/// Canonical label of the class of a reduced ideal.
pub(crate) fn class_key(field: &QuadField, r: Prim) -> Result<(i128, i128)> {
    let disc = field.disc_i128()?;
    if disc < 0 {
        return Ok(r);
    }
    if let Some(k) = field.cycle_cache().lock().unwrap().get(&r) {
        return Ok(*k);
    }
    let s = isqrt(disc);
    let start = (r.1, 2 * r.0);
    let mut cycle = vec![r];
    let (mut p, mut q) = start;
    loop {
        let (p2, q2, _) = real_step(field, disc, s, p, q);
        p = p2;
        q = q2;
        if (p, q) == start {
            break;
        }
        cycle.push((q / 2, p));
        if cycle.len() > field.period_cap() {
            return Err(Error::Resource("cycle exceeds the period cap".into()));
        }
    }
    let key = *cycle.iter().min().unwrap();
    let mut cache = field.cycle_cache().lock().unwrap();
    for c in cycle {
        cache.insert(c, key);
    }
    Ok(key)
}

/// Generator ρ of a reduced ideal `R = (ρ)`, if `R` is principal.
fn reduced_generator(field: &QuadField, r: Prim) -> Result<Option<QFElement>> {
    let disc = field.disc_i128()?;
    if disc < 0 {
        return Ok((r.0 == 1).then(|| field.from_int(1)));
    }
    let s = isqrt(disc);
    let start = (r.1, 2 * r.0);
    let (mut p, mut q) = start;
    let mut mu = field.from_int(1);
    let mut steps = 0usize;
    loop {
        if q == 2 {
            return Ok(Some(mu));
        }
        let (p2, q2, m) = real_step(field, disc, s, p, q);
        mu = &mu * &m;
        p = p2;
        q = q2;
        if (p, q) == start {
            return Ok(None);
        }
        steps += 1;
        if steps > field.period_cap() {
            return Err(Error::Resource("cycle exceeds the period cap".into()));
        }
    }
}

pub(crate) fn principal_generator(field: &QuadField, ideal: &QFIdeal) -> Result<Option<QFElement>> {
    let disc = field.disc_i128()?;
    if !ideal.is_valid(disc) {
        return Err(Error::Invalid("not an ideal of the maximal order".into()));
    }
    let (r, mu) = reduce(field, (ideal.a, ideal.b))?;
    Ok(reduced_generator(field, r)?.map(|rho| (&mu * &rho).scale(&ideal.scale)))
}

/// `∏ 𝔭^e` as `γ·R` with `R` primitive and reduced.
pub(crate) fn tracked_product(field: &QuadField, factors: &[(PrimeIdeal, i64)]) -> Result<(QFElement, Prim)> {
    let disc = field.disc_i128()?;
    let mut gamma = field.from_int(1);
    let mut r = unit_prim(disc);
    for (pr, e) in factors {
        if *e == 0 {
            continue;
        }
        let p = BigInt::from(pr.p);
        if pr.kind == PrimeKind::Inert {
            gamma = gamma.scale(&rat_int(p).pow(*e as i32));
            continue;
        }
        let base = if *e > 0 { pr.clone() } else { pr.conjugate() };
        if *e < 0 {
            gamma = gamma.scale(&Rational::new(BigInt::one(), p.pow(e.unsigned_abs() as u32)));
        }
        for _ in 0..e.unsigned_abs() {
            let (g, prod) = mul_prim(disc, r, (base.p, base.b))?;
            let (red, mu) = reduce(field, prod)?;
            gamma = (&gamma * &mu).scale(&rat_int(BigInt::from(g)));
            r = red;
        }
    }
    Ok((gamma, r))
}

pub(crate) fn generator_of_product(field: &QuadField, factors: &[(PrimeIdeal, i64)]) -> Result<Option<QFElement>> {
    let (gamma, r) = tracked_product(field, factors)?;
    Ok(reduced_generator(field, r)?.map(|rho| &gamma * &rho))
}

/// Reduced representative of `R·𝔭`.
pub(crate) fn mul_reduce(field: &QuadField, r: Prim, pr: &PrimeIdeal) -> Result<Prim> {
    if pr.kind == PrimeKind::Inert {
        return Ok(r);
    }
    let (_, prod) = mul_prim(field.disc_i128()?, r, (pr.p, pr.b))?;
    Ok(reduce(field, prod)?.0)
}

pub(crate) fn unit_reduced(field: &QuadField) -> Result<Prim> {
    Ok(reduce(field, unit_prim(field.disc_i128()?))?.0)
}

/// Nonnegative integer square root helper shared with the unit code.
pub(crate) fn disc_isqrt(disc: i128) -> i128 {
    isqrt(disc)
}

pub(crate) fn step_real(field: &QuadField, disc: i128, p: i128, q: i128) -> (i128, i128, QFElement) {
    real_step(field, disc, isqrt(disc), p, q)
}
