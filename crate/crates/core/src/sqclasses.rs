//! Linear algebra over F₂ and bases of singular square classes over ℚ and
//! over quadratic fields.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::quadfield::{PrimeIdeal, PrimeKind, QFElement, QuadField};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vector {
    len: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Self {
        F2Vector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b & 1 == 1);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &F2Vector) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn dot(&self, other: &F2Vector) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &F2Vector) -> F2Vector {
        let mut bits = self.bits();
        bits.extend(other.bits());
        F2Vector::from_bits(&bits)
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits().iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        write!(f, "F2[{s}]")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<F2Vector>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows,
            cols,
            data: vec![F2Vector::zeros(cols); rows],
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<F2Vector>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("row length differs from column count".into()));
        }
        Ok(F2Matrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_bits(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows.iter().map(|r| F2Vector::from_bits(r)).collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[F2Vector]) -> Result<Self> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch("column length differs from row count".into()));
            }
            for i in c.ones() {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b);
    }

    pub fn row(&self, i: usize) -> &F2Vector {
        &self.data[i]
    }

    pub fn mul_vec(&self, x: &F2Vector) -> Result<F2Vector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch("vector length differs from column count".into()));
        }
        let mut out = F2Vector::zeros(self.rows);
        for (i, r) in self.data.iter().enumerate() {
            out.set(i, r.dot(x));
        }
        Ok(out)
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        F2Matrix::from_rows(self.cols, data)
    }

    /// Row echelon form with leftmost pivots; returns the pivot columns.
    fn echelon(&mut self, aug: Option<&mut F2Vector>) -> Vec<usize> {
        let mut aug = aug;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..self.rows).find(|&i| self.data[i].get(c)) else {
                continue;
            };
            self.data.swap(r, p);
            if let Some(b) = aug.as_deref_mut() {
                let (x, y) = (b.get(r), b.get(p));
                b.set(r, y);
                b.set(p, x);
            }
            let pivot_row = self.data[r].clone();
            let pivot_b = aug.as_deref().map(|b| b.get(r));
            for i in 0..self.rows {
                if i != r && self.data[i].get(c) {
                    self.data[i].xor_assign(&pivot_row);
                    if let (Some(b), Some(pb)) = (aug.as_deref_mut(), pivot_b) {
                        let v = b.get(i) ^ pb;
                        b.set(i, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelon(None).len()
    }

    /// Basis of `{x : A x = 0}`, one vector per free column in increasing order.
    pub fn nullspace(&self) -> Vec<F2Vector> {
        let mut m = self.clone();
        let pivots = m.echelon(None);
        let mut out = Vec::new();
        for f in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut x = F2Vector::zeros(self.cols);
            x.set(f, true);
            for (r, &pc) in pivots.iter().enumerate() {
                if m.data[r].get(f) {
                    x.set(pc, true);
                }
            }
            out.push(x);
        }
        out
    }
}

/// Solve `A x = b` over F₂, free variables set to zero.
pub fn f2_solve(a: &F2Matrix, b: &F2Vector) -> Result<Option<F2Vector>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let pivots = m.echelon(Some(&mut rhs));
    if (pivots.len()..a.rows).any(|i| rhs.get(i)) {
        return Ok(None);
    }
    let mut x = F2Vector::zeros(a.cols);
    for (r, &c) in pivots.iter().enumerate() {
        x.set(c, rhs.get(r));
    }
    Ok(Some(x))
}

/// Rank over F₂ of 0/1 rows of the given width.
pub fn rank_mod2(rows: &[Vec<u8>], width: usize) -> usize {
    let vecs = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.resize(width, 0);
            F2Vector::from_bits(&r)
        })
        .collect();
    F2Matrix::from_rows(width, vecs).map(|m| m.rank()).unwrap_or(0)
}

/// Square class of ℚ* as `sign·core` with `core` squarefree and positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    pub sign: i8,
    pub core: BigInt,
}

impl SquareClass {
    pub fn of(q: &Rational) -> Result<Self> {
        let (s, _) = arith::squarefree_part(q)?;
        Ok(SquareClass {
            sign: if s.is_negative() { -1 } else { 1 },
            core: s.abs(),
        })
    }

    pub fn value(&self) -> BigInt {
        &self.core * self.sign
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Basis `{-1} ∪ T` of the T-singular square classes of ℚ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingBasisQ {
    pub t: Vec<BigInt>,
    pub basis: Vec<SquareClass>,
}

pub fn sing_basis_q(t: &[BigInt]) -> SingBasisQ {
    let mut primes: Vec<BigInt> = t.to_vec();
    primes.sort();
    primes.dedup();
    let mut basis = vec![SquareClass {
        sign: -1,
        core: BigInt::one(),
    }];
    basis.extend(primes.iter().map(|p| SquareClass {
        sign: 1,
        core: p.clone(),
    }));
    SingBasisQ { t: primes, basis }
}

/// Exponents of `a` over the basis. Only the primes of `T` are divided out,
/// so no factorization of `a` is needed; the cofactor must be a square.
pub fn coords_q(a: &Rational, basis: &SingBasisQ) -> Result<F2Vector> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut v = F2Vector::zeros(basis.basis.len());
    v.set(0, a.is_negative());
    let mut num = a.numer().abs();
    let mut den = a.denom().clone();
    for (i, p) in basis.t.iter().enumerate() {
        let mut e = 0u32;
        for x in [&mut num, &mut den] {
            loop {
                let (q, r) = x.div_rem(p);
                if !r.is_zero() {
                    break;
                }
                *x = q;
                e += 1;
            }
        }
        v.set(i + 1, e % 2 == 1);
    }
    if arith::isqrt_exact(&num).is_none() || arith::isqrt_exact(&den).is_none() {
        return Err(Error::Invalid(format!("{a} is not singular outside the given primes")));
    }
    Ok(v)
}

use num_traits::Zero;

/// Product of the basis elements selected by `x`.
pub fn eval_q(basis: &SingBasisQ, x: &F2Vector) -> BigInt {
    x.ones().map(|i| basis.basis[i].value()).product()
}

/// Extend `ŝ` by primes above the smallest rational primes until the
/// T-class number is odd.
pub fn extend_to_odd_class_number(l: &QuadField, s_hat: &[PrimeIdeal]) -> Result<Vec<PrimeIdeal>> {
    let cg = l.class_group()?;
    let mut t: Vec<PrimeIdeal> = Vec::new();
    for pr in s_hat {
        if !t.iter().any(|q| q.same_as(pr)) {
            t.push(pr.clone());
        }
    }
    let mut dlogs = Vec::new();
    for pr in &t {
        dlogs.push(cg.dlog_prime(l, pr)?);
    }
    let mut p = 1u64;
    while cg.two_rank_mod(&dlogs) > 0 {
        p = arith::next_prime(p);
        for pr in l.primes_above(&BigInt::from(p))? {
            if pr.kind == PrimeKind::Inert || t.iter().any(|q| q.same_as(&pr)) {
                continue;
            }
            let x = cg.dlog_prime(l, &pr)?;
            let before = cg.two_rank_mod(&dlogs);
            dlogs.push(x);
            if cg.two_rank_mod(&dlogs) < before {
                t.push(pr);
            } else {
                dlogs.pop();
            }
        }
    }
    Ok(t)
}

/// Basis of the Ŝ-singular square classes of a quadratic field.
#[derive(Debug, Clone)]
pub struct SingBasisL {
    pub s_hat: Vec<PrimeIdeal>,
    /// `T ⊇ Ŝ` with odd T-class number.
    pub t: Vec<PrimeIdeal>,
    pub basis: Vec<QFElement>,
    /// F₂-dimension of the T-units modulo squares.
    pub units_t_dim: usize,
}

pub fn sing_basis_quad(l: &QuadField, s_hat: &[PrimeIdeal]) -> Result<SingBasisL> {
    let t = extend_to_odd_class_number(l, s_hat)?;
    let su = l.s_unit_generators(&t)?;
    let units = su.basis();
    let vals = su.valuation_vectors();
    // positions of T \ Ŝ inside su.primes
    let outside: Vec<usize> = su
        .primes
        .iter()
        .enumerate()
        .filter(|(_, pr)| !s_hat.iter().any(|q| q.same_as(pr)))
        .map(|(i, _)| i)
        .collect();
    let cols: Vec<F2Vector> = vals
        .iter()
        .map(|v| F2Vector::from_bits(&outside.iter().map(|&i| v[i].rem_euclid(2) as u8).collect::<Vec<_>>()))
        .collect();
    let m = F2Matrix::from_columns(outside.len(), &cols)?;
    let mut basis = Vec::new();
    for x in m.nullspace() {
        let mut e = l.from_int(1);
        for i in x.ones() {
            e = &e * &units[i];
        }
        basis.push(e.reduce_square_content());
    }
    let s_primes = su
        .primes
        .iter()
        .filter(|pr| s_hat.iter().any(|q| q.same_as(pr)))
        .cloned()
        .collect();
    Ok(SingBasisL {
        s_hat: s_primes,
        t: su.primes.clone(),
        basis,
        units_t_dim: units.len(),
    })
}
