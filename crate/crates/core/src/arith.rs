//! Exact integer and rational primitives: factorization, squarefree parts,
//! modular square roots, the Chinese remainder theorem and Jacobi symbols.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Elements of ℚ. Always stored reduced with a positive denominator.
pub type Rational = BigRational;

const TRIAL_LIMIT: u32 = 10_000;

/// Bases for the Miller-Rabin test. The first twelve make the test
/// deterministic below 3.3 * 10^24; the rest strengthen it above that.
const MR_BASES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Limits that keep factorization predictable on large inputs.
#[derive(Debug, Clone, Copy)]
pub struct FactorConfig {
    /// Composite cofactors with more decimal digits than this are refused.
    pub max_composite_digits: usize,
    /// Iteration budget for a single rho attempt.
    pub rho_iterations: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            max_composite_digits: 40,
            rho_iterations: 4_000_000,
        }
    }
}

/// `unit_sign * prod(p^e)`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit_sign: i8,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::from(self.unit_sign);
        for (p, e) in &self.factors {
            v *= p.pow(*e);
        }
        v
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }
}

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES[..12] {
        let p = p as u64;
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &MR_BASES[..12] {
        let mut x = pow_mod_u64(a as u64, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality test: deterministic below 3.3 * 10^24, a strong-pseudoprime
/// battery over twenty bases above.
pub fn is_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_negative() {
        return false;
    }
    for &p in small_primes().iter().take(50) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'bases: for &a in MR_BASES.iter() {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime_u64(c) {
        c += 1;
    }
    c
}

fn rho_u64(n: u64, c: u64, budget: u64) -> Option<u64> {
    // Brent's cycle detection with batched gcds.
    let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    let m = 128u64;
    let mut spent = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
        spent += r;
        if spent > budget {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn rho_big(n: &BigInt, c: u64, budget: u64) -> Option<BigInt> {
    let c = BigInt::from(c);
    let f = |x: &BigInt| (x * x + &c) % n;
    let mut y = BigInt::from(2);
    let mut r = 1u64;
    let mut q = BigInt::one();
    let mut g = BigInt::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 128u64;
    let mut spent = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        spent += r;
        if spent > budget {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Split a composite into two nontrivial factors.
fn split(n: &BigInt, cfg: &FactorConfig) -> Result<BigInt> {
    let digits = n.to_string().len();
    if digits > cfg.max_composite_digits {
        return Err(Error::FactorBound {
            digits,
            bound: cfg.max_composite_digits,
        });
    }
    if let Some(r) = n.sqrt().pow(2).eq(n).then(|| n.sqrt()) {
        return Ok(r);
    }
    for c in 1..=20u64 {
        let found = match n.to_u64() {
            Some(small) => rho_u64(small, c, cfg.rho_iterations).map(BigInt::from),
            None => rho_big(n, c, cfg.rho_iterations),
        };
        if let Some(g) = found {
            return Ok(g);
        }
    }
    Err(Error::Resource(format!("could not split {n}")))
}

fn push_prime(out: &mut Vec<(BigInt, u32)>, p: BigInt, e: u32) {
    if let Some(slot) = out.iter_mut().find(|(q, _)| *q == p) {
        slot.1 += e;
    } else {
        out.push((p, e));
    }
}

/// Factor a nonzero integer with the default limits.
pub fn factor(n: &BigInt) -> Result<Factorization> {
    factor_with(n, &FactorConfig::default())
}

pub fn factor_with(n: &BigInt, cfg: &FactorConfig) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let unit_sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut factors = Vec::new();
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        while (&m % p).is_zero() {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((pb, e));
        }
    }
    let mut stack = Vec::new();
    if !m.is_one() {
        stack.push(m);
    }
    while let Some(c) = stack.pop() {
        let bound = BigInt::from(TRIAL_LIMIT) * BigInt::from(TRIAL_LIMIT);
        if c < bound || is_prime(&c) {
            push_prime(&mut factors, c, 1);
            continue;
        }
        let g = split(&c, cfg)?;
        let other = &c / &g;
        stack.push(g);
        stack.push(other);
    }
    factors.sort();
    Ok(Factorization { unit_sign, factors })
}

/// Write `q = s * t^2` with `s` a squarefree integer and `t > 0` rational.
pub fn squarefree_part(q: &Rational) -> Result<(BigInt, Rational)> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    let num = factor(q.numer())?;
    let den = factor(q.denom())?;
    let mut s = BigInt::from(num.unit_sign);
    let mut t_num = BigInt::one();
    let mut t_den = BigInt::one();
    for (p, e) in &num.factors {
        if e % 2 == 1 {
            s *= p;
        }
        t_num *= p.pow(e / 2);
    }
    for (p, e) in &den.factors {
        if e % 2 == 1 {
            s *= p;
        }
        t_den *= p.pow((*e).div_ceil(2));
    }
    Ok((s, Rational::new(t_num, t_den)))
}

/// Squarefree part of a nonzero integer.
pub fn squarefree_int(n: &BigInt) -> Result<BigInt> {
    Ok(squarefree_part(&rat_int(n.clone()))?.0)
}

pub fn is_squarefree(n: &BigInt) -> Result<bool> {
    Ok(factor(n)?.factors.iter().all(|(_, e)| *e == 1))
}

/// Integer square root when `n` is a perfect square.
pub fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Nonnegative rational square root, if `q` is a square in ℚ.
pub fn sqrt_exact(q: &Rational) -> Option<Rational> {
    let n = isqrt_exact(q.numer())?;
    let d = isqrt_exact(q.denom())?;
    Some(Rational::new(n, d))
}

pub fn is_rational_square(q: &Rational) -> bool {
    !q.is_zero() && sqrt_exact(q).is_some()
}

/// `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (g, x, _) = ext_gcd(&a.mod_floor(m), m);
    g.is_one().then(|| x.mod_floor(m))
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: &BigInt, n: &BigInt) -> Result<i8> {
    if n.is_even() || !n.is_positive() {
        return Err(Error::EvenModulus);
    }
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1i8;
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = (&n % 8u32).to_u32().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32) == BigInt::from(3) && (&n % 4u32) == BigInt::from(3) {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { result } else { 0 })
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
fn sqrt_mod_prime(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    if jacobi(&a, p).ok()? != 1 {
        return None;
    }
    let one = BigInt::one();
    let pm1: BigInt = p - &one;
    let mut q = pm1.clone();
    let mut s = 0u32;
    while q.is_even() {
        q >>= 1;
        s += 1;
    }
    if s == 1 {
        return Some(a.modpow(&((p + &one) >> 2), p));
    }
    let mut z = BigInt::from(2);
    while jacobi(&z, p).ok()? != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) >> 1), p);
    while !t.is_one() {
        let mut i = 0u32;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(BigInt::one() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (t * &c) % p;
        r = (r * b) % p;
    }
    Some(r)
}

/// Square root of `a` modulo `p^k` for an odd prime `p` not dividing `a`.
/// Returns the smaller of the two roots in `[0, p^k)`.
pub fn sqrt_mod(a: &BigInt, p: &BigInt, k: u32) -> Result<Option<BigInt>> {
    if p.is_even() {
        return Err(Error::EvenModulus);
    }
    if k == 0 {
        return Err(Error::Invalid("exponent must be positive".into()));
    }
    if (a % p).is_zero() {
        return Err(Error::Invalid(format!("{p} divides {a}")));
    }
    let Some(mut r) = sqrt_mod_prime(a, p) else {
        return Ok(None);
    };
    let mut modulus = p.clone();
    for _ in 1..k {
        // Hensel: r <- r - (r^2 - a) / (2r)
        modulus *= p;
        let inv = mod_inverse(&(BigInt::from(2) * &r), &modulus).expect("unit");
        r = (&r - (&r * &r - a) * inv).mod_floor(&modulus);
    }
    let other = &modulus - &r;
    Ok(Some(if other < r { other } else { r }))
}

/// Chinese remainder theorem for pairwise coprime moduli.
/// Returns the unique solution in `[0, prod m_i)`.
pub fn crt(pairs: &[(BigInt, BigInt)]) -> Result<BigInt> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in pairs {
        if !mi.is_positive() {
            return Err(Error::Invalid("moduli must be positive".into()));
        }
        let (g, inv, _) = ext_gcd(&m, mi);
        if !g.is_one() {
            return Err(Error::NotCoprime);
        }
        // x + m * t ≡ r (mod mi)
        let t = ((r - &x) * inv).mod_floor(mi);
        x += &m * t;
        m *= mi;
        x = x.mod_floor(&m);
    }
    Ok(x)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation_int(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    let mut v = 0;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Integer representative of the square class of a nonzero rational:
/// `num * den` differs from `num / den` by the square `den^2`.
pub fn square_class_int(q: &Rational) -> BigInt {
    q.numer() * q.denom()
}
