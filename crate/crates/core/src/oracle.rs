//! Brute-force reference computations. Nothing here calls into the modules
//! these functions are used to check.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::places::DiagonalForm;
use crate::ternary::IsotropicVector;

#[derive(Debug, Clone)]
pub struct SearchBudget {
    pub height: u64,
    pub time_cap: Option<Duration>,
}

impl SearchBudget {
    pub fn new(height: u64) -> Self {
        SearchBudget {
            height: height.max(1),
            time_cap: None,
        }
    }

    pub fn with_time_cap(mut self, cap: Duration) -> Self {
        self.time_cap = Some(cap);
        self
    }
}

/// Largest number of second-half vectors kept in memory.
const TABLE_LIMIT: u64 = 1 << 22;

/// First isotropic vector with coordinates in `0..=H`, in lexicographic
/// order. Signs are irrelevant for a diagonal form, and the first nonzero
/// solution is automatically primitive.
pub fn brute_search(f: &DiagonalForm, budget: &SearchBudget) -> Option<IsotropicVector> {
    let lcm = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = f
        .coeffs()
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let h = budget.height;
    let deadline = budget.time_cap.map(|c| Instant::now() + c);
    let bound = ints.iter().map(|a| a.abs()).max().unwrap_or_default()
        * BigInt::from(h)
        * BigInt::from(h)
        * BigInt::from(ints.len());
    let found = if bound.bits() < 120 {
        let small: Vec<i128> = ints.iter().map(|a| a.to_i128().unwrap()).collect();
        search(&small, h, deadline)
    } else {
        search(&ints, h, deadline)
    };
    found.map(|v| IsotropicVector {
        coords: v.into_iter().map(|x| Rational::from_integer(BigInt::from(x))).collect(),
    })
}

fn search<K>(coeffs: &[K], h: u64, deadline: Option<Instant>) -> Option<Vec<u64>>
where
    K: Clone + Eq + Hash + Zero + Add<Output = K> + Mul<Output = K> + Neg<Output = K> + From<u64>,
{
    let n = coeffs.len();
    let n1 = n / 2;
    let (c1, c2) = coeffs.split_at(n1);
    let sum = |c: &[K], v: &[u64]| -> K {
        c.iter()
            .zip(v)
            .fold(K::zero(), |acc, (a, &x)| acc + a.clone() * K::from(x * x))
    };
    let width = h + 1;
    let table_size = width.checked_pow(c2.len() as u32);
    let mut ticks = 0u64;
    let mut expired = || {
        ticks += 1;
        ticks.is_multiple_of(4096) && deadline.is_some_and(|d| Instant::now() > d)
    };

    let table: Option<HashMap<K, Vec<Vec<u64>>>> = match table_size {
        Some(sz) if sz <= TABLE_LIMIT => {
            let mut t: HashMap<K, Vec<Vec<u64>>> = HashMap::new();
            for y in Lex::new(c2.len(), h) {
                t.entry(sum(c2, &y)).or_default().push(y);
            }
            Some(t)
        }
        _ => None,
    };

    for x in Lex::new(n1, h) {
        let target = -sum(c1, &x);
        let x_zero = x.iter().all(|&c| c == 0);
        match &table {
            Some(t) => {
                if let Some(ys) = t.get(&target) {
                    for y in ys {
                        if x_zero && y.iter().all(|&c| c == 0) {
                            continue;
                        }
                        let mut v = x.clone();
                        v.extend(y);
                        return Some(v);
                    }
                }
                if expired() {
                    return None;
                }
            }
            None => {
                for y in Lex::new(c2.len(), h) {
                    if sum(c2, &y) == target && !(x_zero && y.iter().all(|&c| c == 0)) {
                        let mut v = x.clone();
                        v.extend(y);
                        return Some(v);
                    }
                    if expired() {
                        return None;
                    }
                }
            }
        }
    }
    None
}

/// All vectors in `{0..=h}^n` in lexicographic order.
struct Lex {
    cur: Option<Vec<u64>>,
    h: u64,
}

impl Lex {
    fn new(n: usize, h: u64) -> Self {
        Lex {
            cur: Some(vec![0; n]),
            h,
        }
    }
}

impl Iterator for Lex {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if next[i] < self.h {
                next[i] += 1;
                for x in next.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                self.cur = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn ord(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut e = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        e += 1;
    }
    e
}

/// Minimal precision at which a primitive solution modulo `p^k` of a form
/// whose coefficients have valuation at most `vmax` lifts to `ℚ_p`.
fn hensel_precision(p: u64, vmax: u32) -> u32 {
    let o2 = if p == 2 { 1 } else { 0 };
    2 * (o2 + vmax) + 1
}

/// `+1` iff `z² = a x² + b y²` has a primitive solution modulo `p^k`.
pub fn local_solubility_scan(a: &BigInt, b: &BigInt, p: u64, k: u32) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput);
    }
    if p > 50 {
        return Err(Error::Invalid(format!("scan limited to p <= 50, got {p}")));
    }
    // p²-multiples of a coefficient can be absorbed into its variable
    let pp = BigInt::from(p * p);
    let strip = |x: &BigInt| {
        let mut x = x.clone();
        while (&x % &pp).is_zero() {
            x /= &pp;
        }
        x
    };
    let (a, b) = (strip(a), strip(b));
    let vmax = ord(&a, p).max(ord(&b, p));
    let o2 = if p == 2 { 1 } else { 0 };
    let need = (3 + 2 * o2).max(hensel_precision(p, vmax));
    if k < need {
        return Err(Error::Invalid(format!("precision {k} too small at {p}, need {need}")));
    }
    let coeffs = [BigInt::one(), -a, -b];
    Ok(if primitive_zero(&coeffs, p, k) { 1 } else { -1 })
}

/// Whether the diagonal form with the given integer coefficients is isotropic
/// over `ℚ_p`, decided by searching primitive zeros modulo a Hensel-safe
/// power of `p`.
pub fn local_isotropy_scan(coeffs: &[i64], p: u64, vmax: u32) -> bool {
    let c: Vec<BigInt> = coeffs.iter().map(|&x| BigInt::from(x)).collect();
    primitive_zero(&c, p, hensel_precision(p, vmax))
}

/// Some coordinate of a primitive zero is a unit; scaling makes it 1. So a
/// primitive zero exists iff for some `i` the other terms can sum to `-c_i`.
fn primitive_zero(coeffs: &[BigInt], p: u64, k: u32) -> bool {
    let n = p.pow(k) as usize;
    let nb = BigInt::from(n);
    let red: Vec<usize> = coeffs
        .iter()
        .map(|c| c.mod_floor(&nb).to_usize().unwrap())
        .collect();
    let sq: Vec<usize> = (0..n).map(|x| (x * x) % n).collect();
    let values: Vec<Bits> = red
        .iter()
        .map(|&c| {
            let mut b = Bits::new(n);
            for &s in &sq {
                b.set((c * s) % n);
            }
            b
        })
        .collect();
    (0..coeffs.len()).any(|i| {
        let mut reach = Bits::new(n);
        reach.set(0);
        for (j, v) in values.iter().enumerate() {
            if j != i {
                reach = reach.sumset(v);
            }
        }
        reach.get((n - red[i]) % n)
    })
}

/// Subset of `ℤ/n` as a bitset.
#[derive(Clone)]
struct Bits {
    n: usize,
    w: Vec<u64>,
}

impl Bits {
    fn new(n: usize) -> Self {
        Bits {
            n,
            w: vec![0; n.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.w[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.w[i / 64] >> (i % 64) & 1 == 1
    }

    fn ones(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(i)).collect()
    }

    /// `{x + y : x ∈ self, y ∈ other}`.
    fn sumset(&self, other: &Bits) -> Bits {
        let (small, big) = if self.ones().len() <= other.ones().len() {
            (self, other)
        } else {
            (other, self)
        };
        let n = self.n;
        // big repeated twice: rotation by s is the window starting at n - s
        let mut doubled = vec![0u64; (2 * n).div_ceil(64) + 1];
        for i in big.ones() {
            doubled[i / 64] |= 1 << (i % 64);
            doubled[(i + n) / 64] |= 1 << ((i + n) % 64);
        }
        let mut out = Bits::new(n);
        for s in small.ones() {
            let off = (n - s) % n;
            let (q, r) = (off / 64, off % 64);
            for (wi, w) in out.w.iter_mut().enumerate() {
                let lo = doubled[q + wi] >> r;
                let hi = if r == 0 {
                    0
                } else {
                    doubled.get(q + wi + 1).copied().unwrap_or(0) << (64 - r)
                };
                *w |= lo | hi;
            }
        }
        if !n.is_multiple_of(64) {
            let last = out.w.len() - 1;
            out.w[last] &= (1u64 << (n % 64)) - 1;
        }
        out
    }
}

/// Number of reduced primitive binary quadratic forms of discriminant `D`.
pub fn bqf_class_group_oracle(disc: i64) -> Result<u64> {
    if !(-10_000..0).contains(&disc) {
        return Err(Error::Invalid(format!("discriminant {disc} outside [-10000, -1]")));
    }
    if disc.rem_euclid(4) > 1 {
        return Err(Error::Invalid(format!("{disc} is not a discriminant")));
    }
    let mut count = 0;
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in (1 - a)..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            count += 1;
        }
        a += 1;
    }
    Ok(count)
}

/// Smallest unit `(x + y√d)/k > 1` of the maximal order of `ℚ(√d)` found by
/// scanning `y = 1, 2, ...` up to `max_y`, where `k = 2` if `d ≡ 1 (mod 4)`
/// and `k = 1` otherwise. Returns `(x, y, k, norm)`.
pub fn minimal_unit_search(d: u64, max_y: u64) -> Option<(BigInt, BigInt, u32, i8)> {
    let four = d % 4 == 1;
    let target = BigInt::from(if four { 4 } else { 1 });
    let dd = BigInt::from(d);
    for y in 1..=max_y {
        let y = BigInt::from(y);
        let base = &dd * &y * &y;
        for (sign, rhs) in [(-1i8, &base - &target), (1, &base + &target)] {
            if rhs.is_negative() {
                continue;
            }
            let x = rhs.sqrt();
            if &x * &x == rhs && x.is_positive() {
                return Some((x, y, if four { 2 } else { 1 }, sign));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_ints(c).unwrap()
    }

    #[test]
    fn brute_examples() {
        let v = brute_search(&form(&[1, 1, -2]), &SearchBudget::new(2)).unwrap();
        assert_eq!(v.coords, vec![rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert!(brute_search(&form(&[1, 1]), &SearchBudget::new(100)).is_none());
        assert!(brute_search(&form(&[1, 1, 1, -7]), &SearchBudget::new(50)).is_none());
        let v = brute_search(&form(&[1, 1, 1, 1, -7]), &SearchBudget::new(3)).unwrap();
        assert_eq!(form(&[1, 1, 1, 1, -7]).evaluate(&v.coords).unwrap(), rat(0, 1));
    }

    #[test]
    fn brute_rational_coefficients() {
        let f = DiagonalForm::new(vec![rat(1, 4), rat(-1, 1)]).unwrap();
        let v = brute_search(&f, &SearchBudget::new(5)).unwrap();
        assert_eq!(v.coords, vec![rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn scan_examples() {
        assert_eq!(local_solubility_scan(&int(-1), &int(-1), 2, 5).unwrap(), -1);
        assert_eq!(local_solubility_scan(&int(2), &int(7), 7, 3).unwrap(), 1);
        assert_eq!(local_solubility_scan(&int(1), &int(1), 3, 3).unwrap(), 1);
        assert!(local_solubility_scan(&int(-1), &int(-1), 2, 3).is_err());
        assert_eq!(local_solubility_scan(&int(3), &int(3), 3, 3).unwrap(), -1);
    }

    #[test]
    fn isotropy_scan_examples() {
        assert!(!local_isotropy_scan(&[1, 1, 1, -7], 2, 0));
        assert!(local_isotropy_scan(&[1, 1, 1, 1, 1], 3, 0));
        assert!(local_isotropy_scan(&[1, -2], 7, 0));
        assert!(!local_isotropy_scan(&[3], 3, 1));
        assert!(!local_isotropy_scan(&[1, 1, 1], 2, 0));
    }

    #[test]
    fn bqf_examples() {
        assert_eq!(bqf_class_group_oracle(-4).unwrap(), 1);
        assert_eq!(bqf_class_group_oracle(-3).unwrap(), 1);
        assert_eq!(bqf_class_group_oracle(-20).unwrap(), 2);
        assert_eq!(bqf_class_group_oracle(-23).unwrap(), 3);
        assert_eq!(bqf_class_group_oracle(-56).unwrap(), 4);
        assert!(bqf_class_group_oracle(-20_000).is_err());
        assert!(bqf_class_group_oracle(-6).is_err());
    }

    #[test]
    fn unit_search_examples() {
        assert_eq!(minimal_unit_search(2, 10), Some((int(1), int(1), 1, -1)));
        assert_eq!(minimal_unit_search(3, 10), Some((int(2), int(1), 1, 1)));
        assert_eq!(minimal_unit_search(5, 10), Some((int(1), int(1), 2, -1)));
    }

    #[test]
    fn sumset_wraps() {
        let mut a = Bits::new(10);
        a.set(7);
        let mut b = Bits::new(10);
        b.set(5);
        b.set(0);
        assert_eq!(a.sumset(&b).ones(), vec![2, 7]);
        let mut a = Bits::new(200);
        a.set(150);
        a.set(3);
        let mut b = Bits::new(200);
        b.set(120);
        assert_eq!(a.sumset(&b).ones(), vec![70, 123]);
    }
}
