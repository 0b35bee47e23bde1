//! Quadratic fields ℚ(√d): elements, prime splitting, ideals, class groups,
//! units and S-units.

mod classgroup;
mod ideal;
mod units;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Neg};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, rat_int, Rational};
use crate::error::{Error, Result};

pub use classgroup::ClassGroup;
pub use ideal::QFIdeal;
pub use units::SUnitData;

/// Largest |disc| accepted by the class-group and unit routines.
pub const DISC_BOUND: i128 = 10_000_000_000;

/// Default cap on continued-fraction steps in a single cycle walk.
pub const PERIOD_CAP: usize = 1_000_000;

/// Reduced real ideal to the canonical key of its cycle.
type CycleCache = HashMap<(i128, i128), (i128, i128)>;

/// The field ℚ(√d) with its maximal order. Class data is computed on first
/// use and then shared.
pub struct QuadField {
    d: BigInt,
    disc: BigInt,
    class_group: OnceLock<std::result::Result<ClassGroup, Error>>,
    fundamental_unit: OnceLock<std::result::Result<QFElement, Error>>,
    cycle_keys: Mutex<CycleCache>,
    period_cap: usize,
}

impl fmt::Debug for QuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadField(d={})", self.d)
    }
}

impl QuadField {
    pub fn new(d: &BigInt) -> Result<Self> {
        Self::with_period_cap(d, PERIOD_CAP)
    }

    pub fn with_period_cap(d: &BigInt, period_cap: usize) -> Result<Self> {
        if d.is_zero() || d.is_one() {
            return Err(Error::Invalid(format!("d = {d} does not define a quadratic field")));
        }
        if !arith::is_squarefree(d)? {
            return Err(Error::Invalid(format!("d = {d} is not squarefree")));
        }
        let disc = if d.mod_floor(&BigInt::from(4)) == BigInt::one() {
            d.clone()
        } else {
            d * 4
        };
        Ok(QuadField {
            d: d.clone(),
            disc,
            class_group: OnceLock::new(),
            fundamental_unit: OnceLock::new(),
            cycle_keys: Mutex::new(HashMap::new()),
            period_cap,
        })
    }

    /// ℚ(√q) for a rational `q` that is not a square.
    pub fn from_rational(q: &Rational) -> Result<(Self, Rational)> {
        let (s, t) = arith::squarefree_part(q)?;
        Ok((Self::new(&s)?, t))
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn is_real(&self) -> bool {
        self.d.is_positive()
    }

    /// `f` with `√disc = f·√d`.
    fn disc_factor(&self) -> i64 {
        if self.disc == self.d {
            1
        } else {
            2
        }
    }

    pub(crate) fn disc_i128(&self) -> Result<i128> {
        match self.disc.to_i128() {
            Some(v) if v.abs() <= DISC_BOUND => Ok(v),
            _ => Err(Error::Resource(format!(
                "discriminant {} exceeds the class-group bound {DISC_BOUND}",
                self.disc
            ))),
        }
    }

    pub fn element(&self, x: Rational, y: Rational) -> QFElement {
        QFElement { d: self.d.clone(), x, y }
    }

    pub fn from_int(&self, n: i64) -> QFElement {
        self.element(arith::rat(n, 1), Rational::zero())
    }

    pub fn sqrt_d(&self) -> QFElement {
        self.element(Rational::zero(), Rational::one())
    }

    /// Splitting of the rational prime `p`.
    pub fn factor_prime(&self, p: &BigInt) -> Result<PrimeSplitting> {
        let disc = &self.disc;
        let two = BigInt::from(2);
        let kronecker = if *p == two {
            if disc.is_even() {
                0
            } else if disc.mod_floor(&BigInt::from(8)) == BigInt::one() {
                1
            } else {
                -1
            }
        } else {
            arith::jacobi(disc, p)?
        };
        let pi = p
            .to_i128()
            .ok_or_else(|| Error::Resource(format!("prime {p} too large for ideal arithmetic")))?;
        let dm = disc.mod_floor(&BigInt::from(4 * pi)).to_i128().unwrap();
        Ok(match kronecker {
            -1 => PrimeSplitting::Inert(PrimeIdeal {
                p: pi,
                b: dm % 2,
                kind: PrimeKind::Inert,
            }),
            0 => {
                let b = if *p == two {
                    dm % 8 / 4 * 2
                } else if dm % 2 == 0 {
                    0
                } else {
                    pi
                };
                PrimeSplitting::Ramified(PrimeIdeal {
                    p: pi,
                    b,
                    kind: PrimeKind::Ramified,
                })
            }
            _ => {
                let b = if *p == two {
                    1
                } else {
                    let r = arith::sqrt_mod(disc, p, 1)?
                        .ok_or_else(|| Error::Internal("split prime without a root".into()))?
                        .to_i128()
                        .unwrap();
                    if (r - dm).rem_euclid(2) == 0 {
                        r
                    } else {
                        r - pi
                    }
                };
                let first = PrimeIdeal {
                    p: pi,
                    b,
                    kind: PrimeKind::Split,
                };
                PrimeSplitting::Split(first.clone(), first.conjugate())
            }
        })
    }

    /// Every prime of the field above `p`.
    pub fn primes_above(&self, p: &BigInt) -> Result<Vec<PrimeIdeal>> {
        Ok(match self.factor_prime(p)? {
            PrimeSplitting::Split(a, b) => vec![a, b],
            PrimeSplitting::Inert(a) | PrimeSplitting::Ramified(a) => vec![a],
        })
    }

    /// `ord_𝔭(α)` for nonzero α.
    pub fn valuation(&self, alpha: &QFElement, prime: &PrimeIdeal) -> Result<i64> {
        if alpha.is_zero() {
            return Err(Error::ZeroInput);
        }
        let p = BigInt::from(prime.p);
        let n = alpha.norm();
        let vn = crate::places::valuation(&n, &p)?;
        match prime.kind {
            PrimeKind::Inert => Ok(vn / 2),
            PrimeKind::Ramified => Ok(vn),
            PrimeKind::Split => {
                // α = (X + Y√disc) / m with X, Y integers
                let f = self.disc_factor();
                let m = alpha.x.denom().lcm(alpha.y.denom());
                let x = alpha.x.numer() * (&m / alpha.x.denom());
                let y = alpha.y.numer() * (&m / alpha.y.denom());
                let (yd, yr) = y.div_rem(&BigInt::from(f));
                // Y = y / f is integral only if f | y; otherwise scale everything by f
                let (x, y, m) = if yr.is_zero() {
                    (x, yd, m)
                } else {
                    (x * f, y, m * f)
                };
                let vm = arith::valuation_int(&m, &p) as i64;
                let nb = &x * &x - &self.disc * &y * &y;
                let prec = arith::valuation_int(&nb, &p) + 1;
                let t = self.padic_sqrt_disc(prime, prec)?;
                let modulus = p.pow(prec);
                let val = (&x + &y * t).mod_floor(&modulus);
                let v = if val.is_zero() {
                    prec as i64
                } else {
                    arith::valuation_int(&val, &p) as i64
                };
                Ok(v - vm)
            }
        }
    }

    /// The image of √disc under the embedding attached to a split prime,
    /// modulo `p^prec`.
    fn padic_sqrt_disc(&self, prime: &PrimeIdeal, prec: u32) -> Result<BigInt> {
        let p = BigInt::from(prime.p);
        let b = BigInt::from(prime.b);
        if prime.p == 2 {
            let k = prec + 3;
            let mut t = BigInt::one();
            for j in 3..k {
                let m = BigInt::one() << (j + 1);
                if !((&t * &t - &self.disc).mod_floor(&m)).is_zero() {
                    t += BigInt::one() << (j - 1);
                }
            }
            let modulus = BigInt::one() << prec;
            if !(&t + &b).mod_floor(&BigInt::from(4)).is_zero() {
                t = -t;
            }
            Ok(t.mod_floor(&modulus))
        } else {
            let r = arith::sqrt_mod(&self.disc, &p, prec)?
                .ok_or_else(|| Error::Internal("split prime without a root".into()))?;
            let modulus = p.pow(prec);
            let t = if (&r + &b).mod_floor(&p).is_zero() {
                r
            } else {
                &modulus - r
            };
            Ok(t)
        }
    }

    pub fn class_group(&self) -> Result<&ClassGroup> {
        self.class_group
            .get_or_init(|| classgroup::compute(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn class_number(&self) -> Result<u64> {
        Ok(self.class_group()?.order)
    }

    /// Unit `u > 1` generating the units modulo ±1 (real fields only).
    pub fn fundamental_unit(&self) -> Result<QFElement> {
        if !self.is_real() {
            return Err(Error::Invalid("imaginary fields have no fundamental unit".into()));
        }
        self.fundamental_unit
            .get_or_init(|| units::fundamental_unit(self))
            .clone()
    }

    /// All roots of unity.
    pub fn torsion_units(&self) -> Vec<QFElement> {
        let one = Rational::one();
        let zero = Rational::zero();
        let half = arith::rat(1, 2);
        let mut out = vec![self.element(one.clone(), zero.clone())];
        if self.d == BigInt::from(-1) {
            out.push(self.element(zero.clone(), one.clone()));
        } else if self.d == BigInt::from(-3) {
            // ω = (-1 + √-3)/2 and ω² = (-1 - √-3)/2
            out.push(self.element(-&half, half.clone()));
            out.push(self.element(-&half, -&half));
        }
        let neg: Vec<_> = out.iter().map(|u| -u.clone()).collect();
        out.extend(neg);
        out
    }

    /// Generator of the roots of unity modulo squares.
    pub fn torsion_generator(&self) -> QFElement {
        if self.d == BigInt::from(-1) {
            self.element(Rational::zero(), Rational::one())
        } else {
            self.from_int(-1)
        }
    }

    pub fn is_principal(&self, ideal: &QFIdeal) -> Result<Option<QFElement>> {
        ideal::principal_generator(self, ideal)
    }

    pub fn s_unit_generators(&self, s: &[PrimeIdeal]) -> Result<SUnitData> {
        units::s_unit_generators(self, s)
    }

    /// Generator of `∏ 𝔭_i^{e_i}` when that ideal is principal.
    pub fn generator_of_product(&self, factors: &[(PrimeIdeal, i64)]) -> Result<Option<QFElement>> {
        ideal::generator_of_product(self, factors)
    }

    pub(crate) fn cycle_cache(&self) -> &Mutex<CycleCache> {
        &self.cycle_keys
    }

    pub(crate) fn period_cap(&self) -> usize {
        self.period_cap
    }
}

/// Element `x + y√d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QFElement {
    pub d: BigInt,
    pub x: Rational,
    pub y: Rational,
}

impl QFElement {
    pub fn norm(&self) -> Rational {
        &self.x * &self.x - rat_int(self.d.clone()) * &self.y * &self.y
    }

    pub fn trace(&self) -> Rational {
        &self.x * arith::rat(2, 1)
    }

    pub fn conj(&self) -> QFElement {
        QFElement {
            d: self.d.clone(),
            x: self.x.clone(),
            y: -&self.y,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn inv(&self) -> Result<QFElement> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        let n = self.norm();
        Ok(QFElement {
            d: self.d.clone(),
            x: &self.x / &n,
            y: -&self.y / &n,
        })
    }

    pub fn pow(&self, e: i64) -> Result<QFElement> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = QFElement {
            d: self.d.clone(),
            x: Rational::one(),
            y: Rational::zero(),
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, q: &Rational) -> QFElement {
        QFElement {
            d: self.d.clone(),
            x: &self.x * q,
            y: &self.y * q,
        }
    }

    /// Whether the element lies in the maximal order.
    pub fn is_integral(&self) -> bool {
        let two = BigInt::from(2);
        let x2 = &self.x * rat_int(two.clone());
        let y2 = &self.y * rat_int(two.clone());
        if !x2.is_integer() || !y2.is_integer() {
            return false;
        }
        if self.d.mod_floor(&BigInt::from(4)) == BigInt::one() {
            (x2.numer() - y2.numer()).is_even()
        } else {
            self.x.is_integer() && self.y.is_integer()
        }
    }

    /// Square root in the field, if one exists.
    pub fn sqrt(&self) -> Option<QFElement> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let d = rat_int(self.d.clone());
        if self.y.is_zero() {
            if let Some(r) = arith::sqrt_exact(&self.x) {
                return Some(QFElement {
                    d: self.d.clone(),
                    x: r,
                    y: Rational::zero(),
                });
            }
            // x = d·v² gives (v√d)² = x
            let v = arith::sqrt_exact(&(&self.x / &d))?;
            return Some(QFElement {
                d: self.d.clone(),
                x: Rational::zero(),
                y: v,
            });
        }
        // (u + v√d)² = x + y√d: u² + d v² = x, 2uv = y, u² - d v² = ±√N
        let n = arith::sqrt_exact(&self.norm())?;
        for s in [n.clone(), -n] {
            let u2 = (&self.x + &s) / arith::rat(2, 1);
            if let Some(u) = arith::sqrt_exact(&u2) {
                if u.is_zero() {
                    continue;
                }
                let v = &self.y / (arith::rat(2, 1) * &u);
                let cand = QFElement {
                    d: self.d.clone(),
                    x: u,
                    y: v,
                };
                if &(&cand * &cand) == self {
                    return Some(cand);
                }
            }
        }
        None
    }

    /// Divide out the largest rational square dividing the content, keeping
    /// the square class unchanged.
    pub fn reduce_square_content(&self) -> QFElement {
        if self.is_zero() {
            return self.clone();
        }
        let m = self.x.denom().lcm(self.y.denom());
        // multiplying by m² keeps the class: α m² = m (m α)
        let xi = self.x.numer() * (&m / self.x.denom()) * &m;
        let yi = self.y.numer() * (&m / self.y.denom()) * &m;
        let g = xi.gcd(&yi);
        let s = square_divisor(&g);
        let s2 = &s * &s;
        QFElement {
            d: self.d.clone(),
            x: Rational::from_integer(xi / &s2),
            y: Rational::from_integer(yi / &s2),
        }
    }
}

/// Largest `s` with `s²` dividing `g`, found by trial division of the small
/// primes and an exact square test on the cofactor.
fn square_divisor(g: &BigInt) -> BigInt {
    let mut g = g.abs();
    let mut s = BigInt::one();
    for &p in arith::small_primes().iter().take(200) {
        let pp = BigInt::from(p as u64 * p as u64);
        while (&g % &pp).is_zero() {
            g /= &pp;
            s *= p;
        }
    }
    if let Some(r) = arith::isqrt_exact(&g) {
        if !r.is_one() {
            s *= r;
        }
    }
    s
}

impl<'a> Mul<&'a QFElement> for &'a QFElement {
    type Output = QFElement;
    fn mul(self, rhs: &QFElement) -> QFElement {
        debug_assert_eq!(self.d, rhs.d);
        let d = rat_int(self.d.clone());
        QFElement {
            d: self.d.clone(),
            x: &self.x * &rhs.x + d * &self.y * &rhs.y,
            y: &self.x * &rhs.y + &self.y * &rhs.x,
        }
    }
}

impl Neg for QFElement {
    type Output = QFElement;
    fn neg(self) -> QFElement {
        QFElement {
            d: self.d,
            x: -self.x,
            y: -self.y,
        }
    }
}

impl fmt::Display for QFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

/// A prime ideal. Split and ramified primes are `[p, (b + √disc)/2]`;
/// an inert prime is `(p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeIdeal {
    pub p: i128,
    pub b: i128,
    pub kind: PrimeKind,
}

impl PrimeIdeal {
    pub fn conjugate(&self) -> PrimeIdeal {
        match self.kind {
            PrimeKind::Split => PrimeIdeal {
                p: self.p,
                b: -self.b,
                kind: PrimeKind::Split,
            },
            _ => self.clone(),
        }
    }

    pub fn norm(&self) -> BigInt {
        match self.kind {
            PrimeKind::Inert => BigInt::from(self.p * self.p),
            _ => BigInt::from(self.p),
        }
    }

    pub fn as_ideal(&self) -> QFIdeal {
        match self.kind {
            PrimeKind::Inert => QFIdeal::new(rat_int(BigInt::from(self.p)), 1, self.b),
            _ => QFIdeal::new(Rational::one(), self.p, self.b),
        }
    }

    /// Same prime ideal, possibly with a different `b`.
    pub fn same_as(&self, other: &PrimeIdeal) -> bool {
        self.p == other.p
            && self.kind == other.kind
            && (self.kind != PrimeKind::Split || (self.b - other.b).rem_euclid(2 * self.p) == 0)
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::Inert => write!(f, "({})", self.p),
            _ => write!(f, "[{}, ({} + sqrt(D))/2]", self.p, self.b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSplitting {
    Split(PrimeIdeal, PrimeIdeal),
    Inert(PrimeIdeal),
    Ramified(PrimeIdeal),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::oracle;

    fn field(d: i64) -> QuadField {
        QuadField::new(&int(d)).unwrap()
    }

    fn el(q: &QuadField, x: i64, y: i64) -> QFElement {
        q.element(rat(x, 1), rat(y, 1))
    }

    #[test]
    fn norm_examples() {
        assert_eq!(el(&field(2), 1, 1).norm(), rat(-1, 1));
        assert_eq!(el(&field(-1), 2, 1).norm(), rat(5, 1));
        assert_eq!(el(&field(7), 7, 0).norm(), rat(49, 1));
    }

    #[test]
    fn rejects_bad_d() {
        assert!(QuadField::new(&int(1)).is_err());
        assert!(QuadField::new(&int(0)).is_err());
        assert!(QuadField::new(&int(12)).is_err());
        assert_eq!(field(-5).disc(), &int(-20));
        assert_eq!(field(5).disc(), &int(5));
    }

    #[test]
    fn factor_prime_examples() {
        let g = field(-1);
        assert!(matches!(g.factor_prime(&int(5)).unwrap(), PrimeSplitting::Split(..)));
        assert!(matches!(g.factor_prime(&int(3)).unwrap(), PrimeSplitting::Inert(..)));
        assert!(matches!(g.factor_prime(&int(2)).unwrap(), PrimeSplitting::Ramified(..)));
        for d in [-1i64, -3, -5, 2, 3, 5, 7, 13, 17, -7, -15, 10, -23, 33] {
            let q = field(d);
            for p in [2i64, 3, 5, 7, 11, 13, 17, 19, 23] {
                let primes = q.primes_above(&int(p)).unwrap();
                let e = if matches!(primes[0].kind, PrimeKind::Ramified) { 2 } else { 1 };
                let total: BigInt = primes.iter().map(|pr| pr.norm().pow(e)).product();
                assert_eq!(total, int(p * p), "d={d} p={p}");
                for pr in &primes {
                    let id = pr.as_ideal();
                    assert!(id.is_valid(q.disc_i128().unwrap()), "{pr} in d={d}");
                    // norm of the ideal matches its splitting type
                    assert_eq!(id.norm(), rat_int(pr.norm()));
                }
                // product of the primes above p, with ramification, is (p)
                let fac: Vec<_> = primes.iter().map(|pr| (pr.clone(), e as i64)).collect();
                let g = q.generator_of_product(&fac).unwrap().unwrap();
                assert_eq!(g.norm().abs(), rat(p * p, 1));
                assert_eq!(g.scale(&rat(1, p)).norm().abs(), rat(1, 1));
            }
        }
    }

    #[test]
    fn valuations_at_split_primes() {
        let q = field(-1);
        let PrimeSplitting::Split(p1, p2) = q.factor_prime(&int(5)).unwrap() else {
            panic!()
        };
        let a = el(&q, 2, 1);
        let (v1, v2) = (q.valuation(&a, &p1).unwrap(), q.valuation(&a, &p2).unwrap());
        assert_eq!(v1 + v2, 1);
        let a3 = a.pow(3).unwrap();
        assert_eq!(q.valuation(&a3, &p1).unwrap(), 3 * v1);
        let five = q.from_int(5);
        assert_eq!(q.valuation(&five, &p1).unwrap(), 1);
        assert_eq!(q.valuation(&five.inv().unwrap(), &p2).unwrap(), -1);
        // generator of a prime has valuation one there
        let g = q.generator_of_product(&[(p1.clone(), 1)]).unwrap().unwrap();
        assert_eq!(q.valuation(&g, &p1).unwrap(), 1);
        assert_eq!(q.valuation(&g, &p2).unwrap(), 0);
        // dyadic split prime
        let q = field(17);
        let PrimeSplitting::Split(p1, p2) = q.factor_prime(&int(2)).unwrap() else {
            panic!()
        };
        let g = q.generator_of_product(&[(p1.clone(), 3)]).unwrap().unwrap();
        assert_eq!(q.valuation(&g, &p1).unwrap(), 3);
        assert_eq!(q.valuation(&g, &p2).unwrap(), 0);
    }

    #[test]
    fn class_group_examples() {
        assert_eq!(field(-1).class_number().unwrap(), 1);
        assert_eq!(field(-5).class_number().unwrap(), 2);
        assert_eq!(field(2).class_number().unwrap(), 1);
        assert_eq!(field(10).class_number().unwrap(), 2);
        assert_eq!(field(-23).class_number().unwrap(), 3);
        assert_eq!(field(79).class_number().unwrap(), 3);
        assert_eq!(field(-21).class_group().unwrap().invariants, vec![2, 2]);
        let k = field(-5);
        let cg = k.class_group().unwrap();
        for (g, ord) in &cg.generators {
            assert_eq!(*ord, 2);
            let fac = vec![(g.clone(), *ord as i64)];
            assert!(k.generator_of_product(&fac).unwrap().is_some());
        }
    }

    #[test]
    fn class_numbers_match_form_count() {
        for d in -300i64..=-1 {
            if !arith::is_squarefree(&int(d)).unwrap() {
                continue;
            }
            let q = field(d);
            let disc = q.disc().to_i64().unwrap();
            assert_eq!(q.class_number().unwrap(), oracle::bqf_class_group_oracle(disc).unwrap(), "d={d}");
        }
    }

    #[test]
    fn fundamental_unit_examples() {
        let half = rat(1, 2);
        assert_eq!(field(2).fundamental_unit().unwrap(), el(&field(2), 1, 1));
        assert_eq!(field(3).fundamental_unit().unwrap(), el(&field(3), 2, 1));
        assert_eq!(
            field(5).fundamental_unit().unwrap(),
            field(5).element(half.clone(), half)
        );
        assert!(field(-5).fundamental_unit().is_err());
        let u = field(94).fundamental_unit().unwrap();
        assert_eq!(u, el(&field(94), 2143295, 221064));
    }

    #[test]
    fn principal_examples() {
        let g = field(-1);
        let PrimeSplitting::Ramified(p2) = g.factor_prime(&int(2)).unwrap() else {
            panic!()
        };
        let gen = g.is_principal(&p2.as_ideal()).unwrap().unwrap();
        assert_eq!(gen.norm().abs(), rat(2, 1));
        let q = field(-5);
        let PrimeSplitting::Ramified(p2) = q.factor_prime(&int(2)).unwrap() else {
            panic!()
        };
        assert!(q.is_principal(&p2.as_ideal()).unwrap().is_none());
        let q = field(2);
        let seven = QFIdeal::new(rat(7, 1), 1, 0);
        let gen = q.is_principal(&seven).unwrap().unwrap();
        assert_eq!(gen.norm().abs(), rat(49, 1));
        assert!(gen.scale(&rat(1, 7)).is_integral());
        assert!(gen.scale(&rat(1, 7)).inv().unwrap().is_integral());
    }

    #[test]
    fn torsion_units_have_norm_one() {
        for d in [-1i64, -3, -7, 5] {
            let q = field(d);
            let t = q.torsion_units();
            assert_eq!(t.len(), match d { -1 => 4, -3 => 6, _ => 2 });
            for u in t {
                assert_eq!(u.norm(), rat(1, 1));
                assert!(u.is_integral());
            }
        }
    }

    #[test]
    fn sqrt_in_field() {
        let q = field(2);
        let a = q.element(rat(3, 2), rat(-5, 7));
        let sq = &a * &a;
        let r = sq.sqrt().unwrap();
        assert!(r == a || r == -a.clone());
        assert!(q.from_int(2).sqrt().is_some());
        assert!(q.from_int(3).sqrt().is_none());
        assert!(el(&q, 1, 1).sqrt().is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn norm_multiplicative(
                d in prop::sample::select(vec![-5i64, -1, -3, 2, 3, 5, 6, 7, 13, -11]),
                a in -50i64..50, b in -50i64..50, c in -50i64..50, e in -50i64..50, m in 1i64..9
            ) {
                let q = field(d);
                let x = q.element(rat(a, m), rat(b, 1));
                let y = q.element(rat(c, 1), rat(e, m));
                prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            }

            #[test]
            fn valuations_add(
                d in prop::sample::select(vec![-5i64, -1, 2, 3, 5, 7, 17, -15]),
                a in -60i64..60, b in -60i64..60, c in -60i64..60, e in -60i64..60,
                pi in 0usize..6
            ) {
                let x = field(d).element(rat(a, 1), rat(b, 1));
                let y = field(d).element(rat(c, 2), rat(e, 1));
                prop_assume!(!x.is_zero() && !y.is_zero());
                let q = field(d);
                let p = [2i64, 3, 5, 7, 11, 13][pi];
                for pr in q.primes_above(&int(p)).unwrap() {
                    prop_assert_eq!(
                        q.valuation(&(&x * &y), &pr).unwrap(),
                        q.valuation(&x, &pr).unwrap() + q.valuation(&y, &pr).unwrap()
                    );
                }
                // sum over primes above p recovers the norm valuation
                let total: i64 = q.primes_above(&int(p)).unwrap().iter().map(|pr| {
                    let f = if pr.kind == PrimeKind::Inert { 2 } else { 1 };
                    f * q.valuation(&x, pr).unwrap()
                }).sum();
                prop_assert_eq!(total, crate::places::valuation(&x.norm(), &int(p)).unwrap());
            }
        }
    }
}
