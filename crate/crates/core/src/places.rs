//! Places of ℚ and the local invariants of diagonal forms.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, jacobi, rat_int, sqrt_exact, Rational};
use crate::error::{Error, Result};

/// A place of ℚ. Finite places are ordered by their prime and sort before ∞.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(BigInt),
    Infinity,
}

impl Place {
    pub fn prime(p: u64) -> Place {
        Place::Finite(BigInt::from(p))
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, Place::Finite(p) if *p == BigInt::from(2))
    }

    pub fn as_prime(&self) -> Option<&BigInt> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// `a_1 x_1^2 + ... + a_n x_n^2` with every `a_i` nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalForm {
    coeffs: Vec<Rational>,
}

impl DiagonalForm {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DimensionMismatch("a form needs at least one coefficient".into()));
        }
        if let Some(i) = coeffs.iter().position(Zero::is_zero) {
            return Err(Error::Degenerate(i));
        }
        Ok(DiagonalForm { coeffs })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| rat_int(BigInt::from(c))).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Result<Self> {
        Self::new(coeffs.iter().cloned().map(rat_int).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn det(&self) -> Rational {
        self.coeffs.iter().fold(Rational::one(), |acc, c| acc * c)
    }

    /// The subform on the given coordinates, in the given order.
    pub fn sub(&self, idx: &[usize]) -> DiagonalForm {
        DiagonalForm {
            coeffs: idx.iter().map(|&i| self.coeffs[i].clone()).collect(),
        }
    }

    pub fn scaled(&self, lambda: &Rational) -> Result<DiagonalForm> {
        DiagonalForm::new(self.coeffs.iter().map(|c| c * lambda).collect())
    }

    pub fn negated(&self) -> DiagonalForm {
        DiagonalForm {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Orthogonal sum `self ⊥ other`.
    pub fn perp(&self, other: &DiagonalForm) -> DiagonalForm {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(other.coeffs.iter().cloned());
        DiagonalForm { coeffs }
    }

    /// `<c> ⊥ self`.
    pub fn prepend(&self, c: Rational) -> Result<DiagonalForm> {
        let mut coeffs = vec![c];
        coeffs.extend(self.coeffs.iter().cloned());
        DiagonalForm::new(coeffs)
    }

    pub fn evaluate(&self, v: &[Rational]) -> Result<Rational> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, form has dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(v)
            .fold(Rational::zero(), |acc, (a, x)| acc + a * x * x))
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

/// Finite primes of 𝔓(q): 2 together with every prime dividing some
/// coefficient to an odd power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pub primes: BTreeSet<BigInt>,
}

impl SupportSet {
    pub fn places_with_infinity(&self) -> Vec<Place> {
        let mut v: Vec<Place> = self.primes.iter().cloned().map(Place::Finite).collect();
        v.push(Place::Infinity);
        v
    }
}

pub fn valuation(q: &Rational, p: &BigInt) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(arith::valuation_int(q.numer(), p) as i64 - arith::valuation_int(q.denom(), p) as i64)
}

/// `(v_p(n), n / p^v)` for a nonzero integer.
fn split_p(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut n = n.clone();
    let mut v = 0;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    (v, n)
}

fn mod8(n: &BigInt) -> u32 {
    n.mod_floor(&BigInt::from(8)).to_u32().unwrap()
}

pub fn local_square(a: &Rational, v: &Place) -> bool {
    debug_assert!(!a.is_zero());
    let n = arith::square_class_int(a);
    match v {
        Place::Infinity => n.is_positive(),
        Place::Finite(p) => {
            let (e, u) = split_p(&n, p);
            if e % 2 == 1 {
                return false;
            }
            if *p == BigInt::from(2) {
                mod8(&u) == 1
            } else {
                jacobi(&u, p).expect("odd prime") == 1
            }
        }
    }
}

/// Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: &Place) -> i8 {
    debug_assert!(!a.is_zero() && !b.is_zero());
    let a = arith::square_class_int(a);
    let b = arith::square_class_int(b);
    match v {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(p) => {
            let (alpha, u) = split_p(&a, p);
            let (beta, w) = split_p(&b, p);
            if *p == BigInt::from(2) {
                let eps = |x: &BigInt| ((mod8(x) - 1) / 2) % 2;
                let omega = |x: &BigInt| {
                    let r = mod8(x);
                    ((r * r - 1) / 8) % 2
                };
                let e = eps(&u) * eps(&w) + alpha * omega(&w) + beta * omega(&u);
                if e % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                let half = ((p - 1u32) / 2u32).is_odd();
                let mut s: i8 = if half && alpha % 2 == 1 && beta % 2 == 1 {
                    -1
                } else {
                    1
                };
                if beta % 2 == 1 {
                    s *= jacobi(&u, p).expect("odd prime");
                }
                if alpha % 2 == 1 {
                    s *= jacobi(&w, p).expect("odd prime");
                }
                s
            }
        }
    }
}

pub fn hasse_invariant(f: &DiagonalForm, v: &Place) -> i8 {
    let c = f.coeffs();
    let mut s = 1;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            s *= hilbert_symbol(&c[i], &c[j], v);
        }
    }
    s
}

pub fn local_isotropy(f: &DiagonalForm, v: &Place) -> bool {
    let c = f.coeffs();
    let n = f.dim();
    if n == 1 {
        return false;
    }
    if let Place::Infinity = v {
        return c.iter().any(|x| x.is_positive()) && c.iter().any(|x| x.is_negative());
    }
    let m1 = -Rational::one();
    match n {
        2 => local_square(&-(&c[0] * &c[1]), v),
        3 => hasse_invariant(f, v) * hilbert_symbol(&m1, &-f.det(), v) == 1,
        4 => {
            let d = f.det();
            !local_square(&d, v) || hasse_invariant(f, v) == hilbert_symbol(&m1, &m1, v)
        }
        _ => true,
    }
}

pub fn support_set(f: &DiagonalForm) -> SupportSet {
    let mut primes = BTreeSet::new();
    primes.insert(BigInt::from(2));
    for c in f.coeffs() {
        let n = arith::square_class_int(c);
        let s = arith::squarefree_int(&n).expect("nonzero coefficient");
        for p in arith::factor(&s).expect("squarefree part factors").factors {
            primes.insert(p.0);
        }
    }
    SupportSet { primes }
}

/// First place (∞, then finite places ascending) at which `f` is anisotropic,
/// or `None` when `f` is isotropic over ℚ.
pub fn anisotropy_witness(f: &DiagonalForm) -> Option<Place> {
    let n = f.dim();
    if n == 1 {
        return Some(Place::Infinity);
    }
    if n >= 5 {
        return (!local_isotropy(f, &Place::Infinity)).then_some(Place::Infinity);
    }
    let mut places = support_set(f).places_with_infinity();
    places.rotate_right(1);
    let witness = places.into_iter().find(|v| !local_isotropy(f, v));
    if n == 2 && witness.is_none() {
        let e = -(&f.coeffs()[0] * &f.coeffs()[1]);
        debug_assert!(sqrt_exact(&e).is_some(), "binary local-global failure for {f}");
    }
    witness
}

pub fn is_globally_isotropic(f: &DiagonalForm) -> bool {
    match f.dim() {
        1 => false,
        2 => sqrt_exact(&-(&f.coeffs()[0] * &f.coeffs()[1])).is_some(),
        _ => anisotropy_witness(f).is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::oracle;

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    fn p(n: u64) -> Place {
        Place::prime(n)
    }

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_ints(c).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&r(18), &int(3)).unwrap(), 2);
        assert_eq!(valuation(&rat(5, 8), &int(2)).unwrap(), -3);
        assert_eq!(valuation(&r(7), &int(3)).unwrap(), 0);
        assert_eq!(valuation(&r(0), &int(3)), Err(Error::ZeroInput));
    }

    #[test]
    fn local_square_examples() {
        assert!(local_square(&r(17), &p(2)));
        // 17 has a square root modulo 2^k for every k
        for k in 3..12u32 {
            let m = 1i64 << k;
            assert!((0..m).any(|x| (x * x - 17).rem_euclid(m) == 0));
        }
        assert!(!local_square(&r(2), &p(3)));
        assert!(!local_square(&r(-4), &Place::Infinity));
        assert!(local_square(&rat(9, 4), &p(3)));
        assert!(!local_square(&r(3), &p(3)));
    }

    #[test]
    fn hilbert_examples() {
        let m1 = r(-1);
        assert_eq!(hilbert_symbol(&m1, &m1, &Place::Infinity), -1);
        assert_eq!(hilbert_symbol(&m1, &m1, &p(2)), -1);
        assert_eq!(oracle::local_solubility_scan(&int(-1), &int(-1), 2, 5).unwrap(), -1);
        assert_eq!(hilbert_symbol(&r(2), &r(3), &p(7)), 1);
        assert_eq!(oracle::local_solubility_scan(&int(2), &int(3), 7, 3).unwrap(), 1);
    }

    #[test]
    fn hasse_examples() {
        assert_eq!(hasse_invariant(&form(&[1, 1]), &p(5)), 1);
        assert_eq!(hasse_invariant(&form(&[-1, -1]), &p(2)), -1);
        assert_eq!(hasse_invariant(&form(&[-1, -1, -1]), &Place::Infinity), -1);
        assert_eq!(hasse_invariant(&form(&[7]), &p(7)), 1);
    }

    #[test]
    fn local_isotropy_examples() {
        assert!(!local_isotropy(&form(&[1, 1, 1, -7]), &p(2)));
        assert!(local_isotropy(&form(&[1, -2]), &p(7)));
        assert!(local_isotropy(&form(&[1, 1, 1, 1, 1]), &p(3)));
        assert!(!local_isotropy(&form(&[1, 1, 1, 1, 1]), &Place::Infinity));
        assert!(!local_isotropy(&form(&[3]), &p(3)));
    }

    #[test]
    fn support_examples() {
        let s = |c: &[i64]| -> Vec<BigInt> { support_set(&form(c)).primes.into_iter().collect() };
        assert_eq!(s(&[1, 1, 1]), vec![int(2)]);
        assert_eq!(s(&[3, 5]), vec![int(2), int(3), int(5)]);
        assert_eq!(s(&[4, 9]), vec![int(2)]);
        let f = DiagonalForm::new(vec![rat(5, 12), r(1)]).unwrap();
        assert_eq!(support_set(&f).primes.into_iter().collect::<Vec<_>>(), vec![int(2), int(3), int(5)]);
    }

    #[test]
    fn global_examples() {
        assert!(!is_globally_isotropic(&form(&[1, 1, 1, -7])));
        assert_eq!(anisotropy_witness(&form(&[1, 1, 1, -7])), Some(p(2)));
        assert!(is_globally_isotropic(&form(&[1, 1, 1, 1, -7])));
        assert!(!is_globally_isotropic(&form(&[1, 1])));
        assert_eq!(anisotropy_witness(&form(&[1, 1])), Some(Place::Infinity));
        assert!(is_globally_isotropic(&form(&[9, -1])));
        assert!(!is_globally_isotropic(&form(&[2])));
        assert!(!is_globally_isotropic(&form(&[1, -2])));
        assert_eq!(anisotropy_witness(&form(&[1, -2])), Some(p(2)));
    }

    #[test]
    fn zero_coefficient_rejected() {
        assert_eq!(DiagonalForm::from_ints(&[3, 0]), Err(Error::Degenerate(1)));
    }

    /// Square-class representatives at `p`: units `1, n` (or `±1, ±5` at 2)
    /// times `1, p`.
    fn class_reps(p: u64) -> Vec<i64> {
        let units: Vec<i64> = if p == 2 {
            vec![1, -1, 5, -5]
        } else {
            let n = (2..p as i64)
                .find(|x| (0..p as i64).all(|y| (y * y - x).rem_euclid(p as i64) != 0))
                .unwrap();
            vec![1, n]
        };
        units.iter().flat_map(|u| [*u, u * p as i64]).collect()
    }

    #[test]
    fn hilbert_matches_scan_on_class_reps() {
        for &q in &[2u64, 3, 5, 7, 11, 13] {
            let k = if q == 2 { 5 } else { 3 };
            for a in class_reps(q) {
                for b in class_reps(q) {
                    let scan = oracle::local_solubility_scan(&int(a), &int(b), q, k).unwrap();
                    assert_eq!(hilbert_symbol(&r(a), &r(b), &p(q)), scan, "({a},{b})_{q}");
                }
            }
        }
    }

    #[test]
    fn local_isotropy_matches_vector_scan() {
        let coeffs: Vec<i64> = (-10..=10).filter(|&c| c != 0).collect();
        for &q in &[2u64, 3, 5, 7] {
            let mut cases = Vec::new();
            for &a in &coeffs {
                for &b in &coeffs {
                    cases.push(vec![a, b]);
                    cases.push(vec![1, a, b]);
                    cases.push(vec![-1, a, b]);
                    cases.push(vec![1, 1, a, b]);
                    cases.push(vec![1, -(q as i64), a, b]);
                }
            }
            for c in cases {
                let f = form(&c);
                let vmax = c
                    .iter()
                    .map(|x| valuation(&r(*x), &int(q as i64)).unwrap())
                    .max()
                    .unwrap() as u32;
                let expect = oracle::local_isotropy_scan(&c, q, vmax);
                assert_eq!(local_isotropy(&f, &p(q)), expect, "{f} at {q}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn nz() -> impl Strategy<Value = Rational> {
            (-1000i64..=1000, 1i64..=1000)
                .prop_filter("nonzero", |(n, _)| *n != 0)
                .prop_map(|(n, d)| rat(n, d))
        }

        fn place() -> impl Strategy<Value = Place> {
            prop_oneof![
                Just(Place::Infinity),
                prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])
                    .prop_map(Place::prime),
            ]
        }

        proptest! {
            #[test]
            fn bilinear(a in nz(), b in nz(), c in nz(), v in place()) {
                prop_assert_eq!(
                    hilbert_symbol(&a, &(&b * &c), &v),
                    hilbert_symbol(&a, &b, &v) * hilbert_symbol(&a, &c, &v)
                );
            }

            #[test]
            fn symmetric_and_normalized(a in nz(), b in nz(), v in place()) {
                prop_assert_eq!(hilbert_symbol(&a, &b, &v), hilbert_symbol(&b, &a, &v));
                prop_assert_eq!(hilbert_symbol(&a, &-a.clone(), &v), 1);
            }

            #[test]
            fn reciprocity(a in nz(), b in nz()) {
                let n = arith::square_class_int(&a) * arith::square_class_int(&b) * 2;
                let mut prod = hilbert_symbol(&a, &b, &Place::Infinity);
                for q in arith::factor(&n).unwrap().factors {
                    prod *= hilbert_symbol(&a, &b, &Place::Finite(q.0));
                }
                prop_assert_eq!(prod, 1);
            }

            #[test]
            fn orthogonal_sum(f in prop::collection::vec(nz(), 1..4), g in prop::collection::vec(nz(), 1..4), v in place()) {
                let f = DiagonalForm::new(f).unwrap();
                let g = DiagonalForm::new(g).unwrap();
                prop_assert_eq!(
                    hasse_invariant(&f.perp(&g), &v),
                    hasse_invariant(&f, &v) * hasse_invariant(&g, &v) * hilbert_symbol(&f.det(), &g.det(), &v)
                );
            }
        }
    }
}
