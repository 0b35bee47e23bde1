//! Isotropic vectors of diagonal forms over ℚ in every dimension.
//!
//! Dimensions 2 and 3 are handled in [`crate::ternary`]. Dimension 4 reduces
//! to an F₂ system on norms of singular square classes of two quadratic
//! fields; dimension 5 splits the form as `⟨a₁,a₂,a₃⟩ ⊥ ⟨a₄,a₅⟩` and finds a
//! common value `c` from an F₂ system on Hilbert symbols; dimensions 6, 7 and
//! at least 8 find `c` from local conditions directly.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{self, rat_int, Rational};
use crate::error::{Error, Result};
use crate::places::{self, DiagonalForm, Place};
use crate::quadfield::{QFElement, QuadField};
use crate::sqclasses::{self, F2Matrix, F2Vector};
use crate::ternary::{self, IsotropicVector};

/// Default cap on primes appended by the search loops.
pub const MAX_PRIMES: usize = 64;

/// Largest nullspace dimension over which the dimension-5 system is scanned
/// for the solution with the smallest `|c|`.
const NULLSPACE_SCAN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub max_primes: usize,
    /// `Some` switches the prime search from ascending order to random picks.
    pub seed: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_primes: MAX_PRIMES,
            seed: None,
        }
    }
}

/// An F₂ system solved during a search loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemRecord {
    pub rows: usize,
    pub cols: usize,
    /// Solution bits, `None` when the system was inconsistent.
    pub solution: Option<String>,
}

/// The quantities entering the final square root of the dimension-4 route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dim4Record {
    /// Coordinates paired as `(a₁,a₂ | a₃,a₄)`.
    pub pairing: [usize; 4],
    pub a1: String,
    pub a3: String,
    pub norm_alpha: String,
    pub norm_beta: String,
    pub u: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub route: String,
    pub form: Vec<String>,
    pub vector: Vec<String>,
    pub primes_appended: Vec<String>,
    pub systems: Vec<SystemRecord>,
    /// The common value `c` of the two halves, when the route splits.
    pub c: Option<String>,
    /// `c` as first produced by the congruence construction, before it was
    /// replaced by a small representative of the same local classes.
    pub c_raw: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim4: Option<Dim4Record>,
    pub children: Vec<SolveTrace>,
}

impl SolveTrace {
    fn new(route: &str, f: &DiagonalForm) -> Self {
        SolveTrace {
            route: route.to_string(),
            form: f.coeffs().iter().map(|c| c.to_string()).collect(),
            vector: Vec::new(),
            primes_appended: Vec::new(),
            systems: Vec::new(),
            c: None,
            c_raw: None,
            dim4: None,
            children: Vec::new(),
        }
    }

    fn finish(mut self, v: &IsotropicVector) -> Self {
        self.vector = v.coords.iter().map(|c| c.to_string()).collect();
        self
    }

    /// Every appended prime in the tree, depth first.
    pub fn all_primes_appended(&self) -> Vec<String> {
        let mut out = self.primes_appended.clone();
        for c in &self.children {
            out.extend(c.all_primes_appended());
        }
        out
    }

    /// Routes in the tree, depth first.
    pub fn routes(&self) -> Vec<String> {
        let mut out = vec![self.route.clone()];
        for c in &self.children {
            out.extend(c.routes());
        }
        out
    }

    /// All nodes of the tree, depth first.
    pub fn nodes(&self) -> Vec<&SolveTrace> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }
}

/// A form with squarefree integer coefficients and the map back to the
/// original coordinates.
#[derive(Debug, Clone)]
pub struct NormalizedForm {
    pub original: DiagonalForm,
    pub reduced: DiagonalForm,
    /// `original_i = reduced_i · t_i²`.
    pub t: Vec<Rational>,
}

impl NormalizedForm {
    pub fn new(f: &DiagonalForm) -> Result<Self> {
        let mut red = Vec::with_capacity(f.dim());
        let mut t = Vec::with_capacity(f.dim());
        for c in f.coeffs() {
            let (s, ti) = arith::squarefree_part(c)?;
            red.push(rat_int(s));
            t.push(ti);
        }
        Ok(NormalizedForm {
            original: f.clone(),
            reduced: DiagonalForm::new(red)?,
            t,
        })
    }

    /// `v_i ↦ v_i / t_i`.
    pub fn pull_back(&self, v: &IsotropicVector) -> IsotropicVector {
        IsotropicVector::new(v.coords.iter().zip(&self.t).map(|(x, t)| x / t).collect())
    }
}

/// Exact check that `v` is a nonzero isotropic vector of `f`.
pub fn verify(f: &DiagonalForm, v: &[Rational]) -> Result<bool> {
    Ok(v.iter().any(|x| !x.is_zero()) && f.evaluate(v)?.is_zero())
}

fn assert_isotropic(f: &DiagonalForm, v: &IsotropicVector) -> Result<()> {
    if verify(f, &v.coords)? {
        Ok(())
    } else {
        Err(Error::Internal(format!("output vector is not isotropic for {f}")))
    }
}

fn witness(f: &DiagonalForm) -> Error {
    match places::anisotropy_witness(f) {
        Some(p) => Error::Anisotropic(p),
        None => Error::Internal(format!("{f} has no local obstruction")),
    }
}

fn rational_ints(f: &DiagonalForm) -> Result<Vec<BigInt>> {
    f.coeffs()
        .iter()
        .map(|c| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::Internal(format!("coefficient {c} is not normalized")))
            }
        })
        .collect()
}

fn sign(q: &Rational) -> i8 {
    if q.is_negative() {
        -1
    } else {
        1
    }
}

fn insert_zero(v: &IsotropicVector, at: usize) -> IsotropicVector {
    let mut c = v.coords.clone();
    c.insert(at, Rational::zero());
    IsotropicVector::new(c)
}

fn two_ord(p: &BigInt) -> u32 {
    if *p == BigInt::from(2) {
        1
    } else {
        0
    }
}

/// Generators of `ℚ_p*/ℚ_p*²`: the smallest non-residue and `p` for odd `p`,
/// `-1, 2, 5` for `p = 2`.
pub fn local_generators(p: &BigInt) -> Result<Vec<BigInt>> {
    if *p == BigInt::from(2) {
        return Ok(vec![BigInt::from(-1), BigInt::from(2), BigInt::from(5)]);
    }
    let mut u = BigInt::from(2);
    while arith::jacobi(&u, p)? != -1 {
        u += 1;
    }
    Ok(vec![u, p.clone()])
}

/// All products of subsets of the generators, the subset read from the bits
/// of a counter.
fn local_classes(p: &BigInt) -> Result<Vec<BigInt>> {
    let h = local_generators(p)?;
    Ok((0..1u32 << h.len())
        .map(|mask| {
            h.iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .fold(BigInt::one(), |acc, (_, x)| acc * x)
        })
        .collect())
}

/// Smallest positive `a` with `a ≡ c_i (mod p_i^{e_i})`.
pub fn totally_positive_crt(congruences: &[(BigInt, BigInt, u32)]) -> Result<BigInt> {
    let pairs: Vec<(BigInt, BigInt)> = congruences
        .iter()
        .map(|(c, p, e)| (c.clone(), p.pow(*e)))
        .collect();
    let m: BigInt = pairs.iter().map(|(_, m)| m.clone()).product();
    let a = arith::crt(&pairs)?;
    Ok(if a.is_zero() { m } else { a })
}

/// Smallest `|b|` with sign `sign` and `b ≡ 1` modulo `∏ p` (odd `p`) times
/// `8` (if `2 ∈ S`), hence a local square at every prime of `S`.
pub fn signed_local_square(sign: i8, s: &[BigInt]) -> BigInt {
    let m: BigInt = s
        .iter()
        .map(|p| if *p == BigInt::from(2) { BigInt::from(8) } else { p.clone() })
        .product();
    if sign > 0 {
        BigInt::one()
    } else if m.is_one() {
        BigInt::from(-1)
    } else {
        BigInt::one() - m
    }
}

/// Local square classes at `S` and the sign of `c`, kept while replacing `c`
/// by the squarefree integer of least absolute value with the same classes.
fn small_representative(c: &BigInt, s: &[BigInt], sign: Option<i8>) -> BigInt {
    let cq = rat_int(c.clone());
    let mut n = BigInt::one();
    loop {
        for cand in [n.clone(), -n.clone()] {
            if sign.is_some_and(|sg| sg != if cand.is_negative() { -1 } else { 1 }) {
                continue;
            }
            if !arith::is_squarefree(&cand).unwrap_or(false) {
                continue;
            }
            let ratio = rat_int(cand.clone()) / &cq;
            if s.iter().all(|p| places::local_square(&ratio, &Place::Finite(p.clone()))) {
                return cand;
            }
        }
        n += 1;
    }
}

/// Exponent vector of `n` over `{-1} ∪ T` when `n` is `T`-singular.
fn coords(n: &Rational, basis: &sqclasses::SingBasisQ) -> Result<F2Vector> {
    sqclasses::coords_q(n, basis)
}

fn product(elems: &[QFElement], x: &F2Vector, offset: usize, one: QFElement) -> QFElement {
    elems
        .iter()
        .enumerate()
        .filter(|(j, _)| x.get(offset + j))
        .fold(one, |acc, (_, e)| &acc * e)
}

fn bits_string(x: &F2Vector) -> String {
    x.bits().iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

pub struct Solver {
    cfg: SolverConfig,
    rng: Option<ChaCha8Rng>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Self {
        let rng = cfg.seed.map(ChaCha8Rng::seed_from_u64);
        Solver { cfg, rng }
    }

    /// A prime not in `used` accepted by `useful`: the next one above 2 in
    /// ascending order, or a random one below 2¹⁰ when seeded.
    fn new_prime(&mut self, used: &BTreeSet<BigInt>, useful: impl Fn(&BigInt) -> bool) -> BigInt {
        let fresh = |p: &BigInt| !used.contains(p) && useful(p);
        if let Some(rng) = self.rng.as_mut() {
            for _ in 0..1000 {
                let p = BigInt::from(arith::next_prime(rng.gen_range(2..1024)));
                if fresh(&p) {
                    return p;
                }
            }
        }
        let mut p = 2u64;
        loop {
            p = arith::next_prime(p);
            let bp = BigInt::from(p);
            if fresh(&bp) {
                return bp;
            }
        }
    }

    fn cap_reached(&self, appended: usize, route: &str) -> Result<()> {
        if appended >= self.cfg.max_primes {
            return Err(Error::Resource(format!(
                "{route}: no solution after appending {appended} primes"
            )));
        }
        Ok(())
    }

    /// Full pipeline: normalize, decide isotropy, route by dimension, pull
    /// back and return a primitive integer vector.
    pub fn dispatch(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        if f.dim() == 1 {
            return Err(Error::Unary);
        }
        let nf = NormalizedForm::new(f)?;
        if !places::is_globally_isotropic(&nf.reduced) {
            return Err(witness(&nf.reduced));
        }
        let (v, mut trace) = self.route(&nf.reduced)?;
        let v = nf.pull_back(&v).primitive();
        assert_isotropic(f, &v)?;
        trace.form = f.coeffs().iter().map(|c| c.to_string()).collect();
        let trace = trace.finish(&v);
        Ok((v, trace))
    }

    fn route(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        match g.dim() {
            0 | 1 => Err(Error::Unary),
            2 => {
                let v = ternary::solve_binary(g)?;
                Ok((v.clone(), SolveTrace::new("dim2", g).finish(&v)))
            }
            3 => {
                let v = ternary::solve_dim3(g)?;
                Ok((v.clone(), SolveTrace::new("dim3", g).finish(&v)))
            }
            4 => self.solve_dim4(g),
            5 => self.solve_dim5(g),
            6 => self.solve_dim6(g),
            7 => self.solve_dim7(g),
            _ => self.solve_dim_ge8(g),
        }
    }

    /// Runs `core` on the squarefree normalization of `f` and pulls back.
    fn normalized(
        &mut self,
        f: &DiagonalForm,
        dim: usize,
        core: fn(&mut Self, &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)>,
    ) -> Result<(IsotropicVector, SolveTrace)> {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected dimension {dim}, got {}",
                f.dim()
            )));
        }
        let nf = NormalizedForm::new(f)?;
        if !places::is_globally_isotropic(&nf.reduced) {
            return Err(witness(&nf.reduced));
        }
        let (v, mut trace) = core(self, &nf.reduced)?;
        let v = nf.pull_back(&v);
        assert_isotropic(f, &v)?;
        trace.form = f.coeffs().iter().map(|c| c.to_string()).collect();
        let trace = trace.finish(&v);
        Ok((v, trace))
    }

    pub fn solve_dim4(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        self.normalized(f, 4, Self::dim4_core)
    }

    pub fn solve_dim5(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        self.normalized(f, 5, Self::dim5_core)
    }

    pub fn solve_dim6(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        self.normalized(f, 6, Self::dim6_core)
    }

    pub fn solve_dim7(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        self.normalized(f, 7, Self::dim7_core)
    }

    pub fn solve_dim_ge8(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        if f.dim() < 8 {
            return Err(Error::DimensionMismatch(format!("expected dimension >= 8, got {}", f.dim())));
        }
        self.normalized(f, f.dim(), Self::dim_ge8_core)
    }

    fn dim3_child(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        let nf = NormalizedForm::new(g)?;
        let v = nf.pull_back(&ternary::solve_dim3(&nf.reduced)?);
        assert_isotropic(g, &v)?;
        Ok((v.clone(), SolveTrace::new("dim3", g).finish(&v)))
    }

    fn dim4_core(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        for omit in (0..4).rev() {
            let idx: Vec<usize> = (0..4).filter(|&i| i != omit).collect();
            let sub = g.sub(&idx);
            if places::is_globally_isotropic(&sub) {
                let (w, child) = self.dim3_child(&sub)?;
                let mut t = SolveTrace::new("dim4/pretest", g);
                t.children.push(child);
                return Ok((insert_zero(&w, omit), t));
            }
        }
        let a = rational_ints(g)?;
        // pair coordinates so that the two quadratic fields are small
        let pairings = [[0usize, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
        let cost = |p: &[usize; 4]| -> Result<BigInt> {
            let l = arith::squarefree_int(&-(&a[p[0]] * &a[p[1]]))?;
            let m = arith::squarefree_int(&-(&a[p[2]] * &a[p[3]]))?;
            Ok(l.abs() + m.abs())
        };
        let mut best = pairings[0];
        let mut best_cost = cost(&best)?;
        for p in &pairings[1..] {
            let c = cost(p)?;
            if c < best_cost {
                best = *p;
                best_cost = c;
            }
        }
        let b: Vec<Rational> = best.iter().map(|&i| rat_int(a[i].clone())).collect();
        let mut trace = SolveTrace::new("dim4", g);

        let (l, tl) = QuadField::from_rational(&-(&b[1] / &b[0]))?;
        let (m, tm) = QuadField::from_rational(&-(&b[3] / &b[2]))?;
        let mut s: BTreeSet<BigInt> = places::support_set(g).primes;
        for field in [&l, &m] {
            for (pr, _) in &field.class_group()?.generators {
                s.insert(BigInt::from(pr.p));
            }
        }

        let mut appended = 0usize;
        let (x, bl, bm) = loop {
            let basis_k = sqclasses::sing_basis_q(&s.iter().cloned().collect::<Vec<_>>());
            let above = |field: &QuadField| -> Result<Vec<_>> {
                let mut v = Vec::new();
                for p in &s {
                    v.extend(field.primes_above(p)?);
                }
                Ok(v)
            };
            let bl = sqclasses::sing_basis_quad(&l, &above(&l)?)?;
            let bm = sqclasses::sing_basis_quad(&m, &above(&m)?)?;
            let mut cols = Vec::new();
            for e in bl.basis.iter().chain(&bm.basis) {
                cols.push(coords(&e.norm(), &basis_k)?);
            }
            let k = basis_k.basis.len();
            let mat = F2Matrix::from_columns(k, &cols)?;
            let mut rhs = coords(&b[0], &basis_k)?;
            rhs.xor_assign(&coords(&-b[2].clone(), &basis_k)?);
            let sol = sqclasses::f2_solve(&mat, &rhs)?;
            trace.systems.push(SystemRecord {
                rows: k,
                cols: cols.len(),
                solution: sol.as_ref().map(bits_string),
            });
            if let Some(x) = sol {
                break (x, bl.basis, bm.basis);
            }
            self.cap_reached(appended, "dimension 4")?;
            let q = self.new_prime(&s, |_| true);
            trace.primes_appended.push(q.to_string());
            s.insert(q);
            appended += 1;
        };

        let alpha = product(&bl, &x, 0, l.from_int(1));
        let beta = product(&bm, &x, bl.len(), m.from_int(1));
        let (na, nb) = (alpha.norm(), beta.norm());
        let u2 = -(&b[0] * &na) / (&b[2] * &nb);
        let u = arith::sqrt_exact(&u2)
            .ok_or_else(|| Error::Internal(format!("{u2} is not a square")))?;
        let vp = [alpha.x.clone(), &alpha.y / &tl, &u * &beta.x, &u * &beta.y / &tm];
        let mut v = vec![Rational::zero(); 4];
        for (j, &i) in best.iter().enumerate() {
            v[i] = vp[j].clone();
        }
        trace.dim4 = Some(Dim4Record {
            pairing: best,
            a1: b[0].to_string(),
            a3: b[2].to_string(),
            norm_alpha: na.to_string(),
            norm_beta: nb.to_string(),
            u: u.to_string(),
        });
        let v = IsotropicVector::new(v);
        assert_isotropic(g, &v)?;
        Ok((v, trace))
    }

    fn dim5_core(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        for omit in 0..5 {
            let idx: Vec<usize> = (0..5).filter(|&i| i != omit).collect();
            let sub = g.sub(&idx);
            if places::is_globally_isotropic(&sub) {
                let (w, child) = self.solve_dim4(&sub)?;
                let mut t = SolveTrace::new("dim5/pretest", g);
                t.children.push(child);
                return Ok((insert_zero(&w, omit), t));
            }
        }
        let a = g.coeffs();
        let q1 = g.sub(&[0, 1, 2]);
        let q2 = g.sub(&[3, 4]);
        let alpha: Option<bool> = if !places::local_isotropy(&q1, &Place::Infinity) {
            Some(a[0].is_negative())
        } else if !places::local_isotropy(&q2, &Place::Infinity) {
            Some(a[3].is_positive())
        } else {
            None
        };
        let mut trace = SolveTrace::new("dim5", g);
        let mut t: BTreeSet<BigInt> = places::support_set(g).primes;
        let mut appended = 0usize;
        let (c, _) = loop {
            let basis = sqclasses::sing_basis_q(&t.iter().cloned().collect::<Vec<_>>());
            let kappa: Vec<Rational> = basis.basis.iter().map(|k| rat_int(k.value())).collect();
            let mut rows: Vec<F2Vector> = Vec::new();
            let mut rhs: Vec<u8> = Vec::new();
            if let Some(al) = alpha {
                rows.push(F2Vector::from_bits(
                    &kappa.iter().map(|k| k.is_negative() as u8).collect::<Vec<_>>(),
                ));
                rhs.push(al as u8);
            }
            for p in &t {
                let place = Place::Finite(p.clone());
                if places::local_isotropy(&q1, &place) && places::local_isotropy(&q2, &place) {
                    continue;
                }
                let h = local_generators(p)?;
                let ci = local_classes(p)?
                    .into_iter()
                    .map(rat_int)
                    .find(|ci| {
                        let f1 = q1.prepend(-ci.clone()).expect("nonzero");
                        let f2 = q2.prepend(ci.clone()).expect("nonzero");
                        places::local_isotropy(&f1, &place) && places::local_isotropy(&f2, &place)
                    })
                    .ok_or_else(|| Error::Internal(format!("no admissible local class at {place}")))?;
                for hl in &h {
                    let hl = rat_int(hl.clone());
                    rows.push(F2Vector::from_bits(
                        &kappa
                            .iter()
                            .map(|k| (places::hilbert_symbol(&hl, k, &place) == -1) as u8)
                            .collect::<Vec<_>>(),
                    ));
                    rhs.push((places::hilbert_symbol(&ci, &hl, &place) == -1) as u8);
                }
            }
            let mat = F2Matrix::from_rows(kappa.len(), rows)?;
            let rhs = F2Vector::from_bits(&rhs);
            let sol = sqclasses::f2_solve(&mat, &rhs)?;
            trace.systems.push(SystemRecord {
                rows: mat.rows(),
                cols: mat.cols(),
                solution: sol.as_ref().map(bits_string),
            });
            if let Some(x0) = sol {
                // every solution works; take the smallest |c|
                let ns = mat.nullspace();
                let mut best = x0.clone();
                if ns.len() <= NULLSPACE_SCAN {
                    let value = |x: &F2Vector| sqclasses::eval_q(&basis, x);
                    let mut best_val = value(&x0).abs();
                    for mask in 1u64..(1 << ns.len()) {
                        let mut x = x0.clone();
                        for (j, v) in ns.iter().enumerate() {
                            if mask >> j & 1 == 1 {
                                x.xor_assign(v);
                            }
                        }
                        let val = value(&x).abs();
                        if val < best_val {
                            best_val = val;
                            best = x;
                        }
                    }
                }
                break (sqclasses::eval_q(&basis, &best), best);
            }
            self.cap_reached(appended, "dimension 5")?;
            // at a prime outside the support where q2 is anisotropic c must
            // be a unit, so such a prime adds nothing
            let q = self.new_prime(&t, |p| places::local_isotropy(&q2, &Place::Finite(p.clone())));
            trace.primes_appended.push(q.to_string());
            t.insert(q);
            appended += 1;
        };
        trace.c = Some(c.to_string());
        let cq = rat_int(c);
        let (v, tv) = self.solve_dim4(&q1.prepend(-cq.clone())?)?;
        let (w, tw) = self.dim3_child(&q2.prepend(cq)?)?;
        trace.children.push(tv);
        trace.children.push(tw);
        let out = combine(&v, &w)?;
        assert_isotropic(g, &out)?;
        Ok((out, trace))
    }

    /// `c` with prescribed local classes at `S` and sign, from the
    /// congruence construction, then replaced by a small representative.
    fn common_value(
        &mut self,
        s: &[BigInt],
        classes: &[BigInt],
        eps: Option<i8>,
        trace: &mut SolveTrace,
    ) -> Result<BigInt> {
        let congr: Vec<(BigInt, BigInt, u32)> = s
            .iter()
            .zip(classes)
            .map(|(p, c)| (c.clone(), p.clone(), arith::valuation_int(c, p) + 1 + 2 * two_ord(p)))
            .collect();
        let a = totally_positive_crt(&congr)?;
        let b = signed_local_square(eps.unwrap_or(1), s);
        let c = a * b;
        let small = small_representative(&c, s, eps);
        trace.c_raw = Some(c.to_string());
        trace.c = Some(small.to_string());
        Ok(small)
    }

    fn dim6_core(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        let a = g.coeffs();
        let q1 = g.sub(&[0, 1, 2]);
        let q2 = g.sub(&[3, 4, 5]).negated();
        if let Some(r) = self.half_exit(g, &q1, &q2, "dim6")? {
            return Ok(r);
        }
        let mut s: Vec<BigInt> = vec![BigInt::from(2)];
        for p in places::support_set(g).primes {
            if p == BigInt::from(2) {
                continue;
            }
            let place = Place::Finite(p.clone());
            if !places::local_isotropy(&q1, &place) || !places::local_isotropy(&q2, &place) {
                s.push(p);
            }
        }
        let (d1, d2) = (q1.det(), q2.det());
        let mut classes = Vec::new();
        for p in &s {
            let place = Place::Finite(p.clone());
            let ci = local_classes(p)?
                .into_iter()
                .find(|c| {
                    let c = rat_int(c.clone());
                    !places::local_square(&(-&c * &d1), &place) && !places::local_square(&(-&c * &d2), &place)
                })
                .ok_or_else(|| Error::Internal(format!("no admissible local class at {place}")))?;
            classes.push(ci);
        }
        let eps = self.real_sign(&q1, &q2, &a[0], &a[3]);
        let mut trace = SolveTrace::new("dim6", g);
        let c = rat_int(self.common_value(&s, &classes, eps, &mut trace)?);
        let (v, tv) = self.solve_dim4(&q1.prepend(-c.clone())?)?;
        let (w, tw) = self.solve_dim4(&q2.prepend(-c)?)?;
        trace.children.push(tv);
        trace.children.push(tw);
        let out = combine(&v, &w)?;
        assert_isotropic(g, &out)?;
        Ok((out, trace))
    }

    fn dim7_core(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        let a = g.coeffs();
        let q1 = g.sub(&[0, 1, 2]);
        let q2 = g.sub(&[3, 4, 5, 6]).negated();
        if let Some(r) = self.half_exit(g, &q1, &q2, "dim7")? {
            return Ok(r);
        }
        let mut s = Vec::new();
        for p in places::support_set(&q1).primes {
            if !places::local_isotropy(&q1, &Place::Finite(p.clone())) {
                s.push(p);
            }
        }
        let d1 = q1.det();
        let mut classes = Vec::new();
        for p in &s {
            let place = Place::Finite(p.clone());
            let ci = local_classes(p)?
                .into_iter()
                .find(|c| !places::local_square(&(-rat_int(c.clone()) * &d1), &place))
                .ok_or_else(|| Error::Internal(format!("no admissible local class at {place}")))?;
            classes.push(ci);
        }
        let eps = self.real_sign(&q1, &q2, &a[0], &a[3]);
        let mut trace = SolveTrace::new("dim7", g);
        let c = rat_int(self.common_value(&s, &classes, eps, &mut trace)?);
        let (v, tv) = self.solve_dim4(&q1.prepend(-c.clone())?)?;
        let (w, tw) = self.solve_dim5(&q2.prepend(-c)?)?;
        trace.children.push(tv);
        trace.children.push(tw);
        let out = combine(&v, &w)?;
        assert_isotropic(g, &out)?;
        Ok((out, trace))
    }

    fn dim_ge8_core(&mut self, g: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        let n = g.dim();
        let k = n / 2;
        let a = g.coeffs();
        let q1 = g.sub(&(0..k).collect::<Vec<_>>());
        let q2 = g.sub(&(k..n).collect::<Vec<_>>()).negated();
        if let Some(r) = self.half_exit(g, &q1, &q2, "dim8+")? {
            return Ok(r);
        }
        // both halves plus <-c> have dimension at least 5, so only the sign
        // of c matters
        let eps = self.real_sign(&q1, &q2, &a[0], &a[k]).unwrap_or(1);
        let c = Rational::from_integer(BigInt::from(eps));
        let mut trace = SolveTrace::new("dim8+", g);
        trace.c = Some(c.to_string());
        let (v, tv) = self.solve_any(&q1.prepend(-c.clone())?)?;
        let (w, tw) = self.solve_any(&q2.prepend(-c)?)?;
        trace.children.push(tv);
        trace.children.push(tw);
        let out = combine(&v, &w)?;
        assert_isotropic(g, &out)?;
        Ok((out, trace))
    }

    /// Any dimension, without the final primitive rescaling.
    fn solve_any(&mut self, f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
        match f.dim() {
            2 | 3 => {
                let nf = NormalizedForm::new(f)?;
                let (v, t) = self.route(&nf.reduced)?;
                let v = nf.pull_back(&v);
                assert_isotropic(f, &v)?;
                Ok((v.clone(), SolveTrace { form: f.coeffs().iter().map(|c| c.to_string()).collect(), ..t }.finish(&v)))
            }
            4 => self.solve_dim4(f),
            5 => self.solve_dim5(f),
            6 => self.solve_dim6(f),
            7 => self.solve_dim7(f),
            _ => self.solve_dim_ge8(f),
        }
    }

    /// Early exits when `q1` or `q2` is isotropic on its own.
    fn half_exit(
        &mut self,
        g: &DiagonalForm,
        q1: &DiagonalForm,
        q2: &DiagonalForm,
        route: &str,
    ) -> Result<Option<(IsotropicVector, SolveTrace)>> {
        let n1 = q1.dim();
        if places::is_globally_isotropic(q1) {
            let (v, child) = self.solve_any(q1)?;
            let mut c = v.coords.clone();
            c.extend(std::iter::repeat_n(Rational::zero(), q2.dim()));
            let mut t = SolveTrace::new(&format!("{route}/first-half"), g);
            t.children.push(child);
            return Ok(Some((IsotropicVector::new(c), t)));
        }
        if places::is_globally_isotropic(q2) {
            let (w, child) = self.solve_any(q2)?;
            let mut c = vec![Rational::zero(); n1];
            c.extend(w.coords.iter().cloned());
            let mut t = SolveTrace::new(&format!("{route}/second-half"), g);
            t.children.push(child);
            return Ok(Some((IsotropicVector::new(c), t)));
        }
        Ok(None)
    }

    /// Required sign of `c` at the real place, if either half is definite
    /// there.
    fn real_sign(&self, q1: &DiagonalForm, q2: &DiagonalForm, a1: &Rational, a_first2: &Rational) -> Option<i8> {
        if !places::local_isotropy(q1, &Place::Infinity) {
            Some(sign(a1))
        } else if !places::local_isotropy(q2, &Place::Infinity) {
            Some(-sign(a_first2))
        } else {
            None
        }
    }
}

/// `(v₁/v₀, …, w₁/w₀, …)` from vectors of `⟨∓c⟩ ⊥ q₁` and `⟨∓c⟩ ⊥ q₂`.
fn combine(v: &IsotropicVector, w: &IsotropicVector) -> Result<IsotropicVector> {
    let (v0, w0) = (&v.coords[0], &w.coords[0]);
    if v0.is_zero() || w0.is_zero() {
        return Err(Error::Internal("sub-solution has zero first coordinate".into()));
    }
    let mut out: Vec<Rational> = v.coords[1..].iter().map(|x| x / v0).collect();
    out.extend(w.coords[1..].iter().map(|x| x / w0));
    Ok(IsotropicVector::new(out))
}

/// [`Solver::dispatch`] with the default configuration.
pub fn dispatch(f: &DiagonalForm) -> Result<(IsotropicVector, SolveTrace)> {
    Solver::default().dispatch(f)
}

pub fn solve_dim4(f: &DiagonalForm) -> Result<IsotropicVector> {
    Ok(Solver::default().solve_dim4(f)?.0)
}

pub fn solve_dim5(f: &DiagonalForm) -> Result<IsotropicVector> {
    Ok(Solver::default().solve_dim5(f)?.0)
}

pub fn solve_dim6(f: &DiagonalForm) -> Result<IsotropicVector> {
    Ok(Solver::default().solve_dim6(f)?.0)
}

pub fn solve_dim7(f: &DiagonalForm) -> Result<IsotropicVector> {
    Ok(Solver::default().solve_dim7(f)?.0)
}

pub fn solve_dim_ge8(f: &DiagonalForm) -> Result<IsotropicVector> {
    Ok(Solver::default().solve_dim_ge8(f)?.0)
}

/// Small integer helper for tests and the CLI.
pub fn to_i64_vec(v: &IsotropicVector) -> Option<Vec<i64>> {
    v.coords
        .iter()
        .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_ints(c).unwrap()
    }

    fn solves(c: &[i64]) -> IsotropicVector {
        let f = form(c);
        let (v, _) = dispatch(&f).unwrap();
        assert!(verify(&f, &v.coords).unwrap(), "{f}");
        v
    }

    #[test]
    fn crt_examples() {
        assert_eq!(totally_positive_crt(&[(int(2), int(3), 1)]).unwrap(), int(2));
        assert_eq!(totally_positive_crt(&[(int(-1), int(3), 1), (int(3), int(5), 1)]).unwrap(), int(8));
        assert_eq!(totally_positive_crt(&[(int(3), int(2), 3)]).unwrap(), int(3));
        assert_eq!(totally_positive_crt(&[(int(0), int(3), 1)]).unwrap(), int(3));
    }

    #[test]
    fn signed_square_examples() {
        assert_eq!(signed_local_square(1, &[int(3)]), int(1));
        assert_eq!(signed_local_square(-1, &[int(3)]), int(-2));
        assert_eq!(signed_local_square(-1, &[int(2)]), int(-7));
        assert_eq!(signed_local_square(-1, &[]), int(-1));
        let b = signed_local_square(-1, &[int(2), int(3), int(7)]);
        for p in [2, 3, 7] {
            assert!(places::local_square(&rat_int(b.clone()), &Place::prime(p)));
        }
    }

    #[test]
    fn verify_examples() {
        assert!(verify(&form(&[1, 1, -2]), &[rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap());
        assert!(!verify(&form(&[1, 1, -2]), &[rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap());
        assert!(verify(&form(&[1, -4]), &[rat(2, 1), rat(1, 1)]).unwrap());
        assert!(verify(&form(&[1, -4]), &[rat(2, 1)]).is_err());
    }

    #[test]
    fn dispatch_examples() {
        assert_eq!(dispatch(&form(&[2])).unwrap_err(), Error::Unary);
        assert_eq!(solves(&[9, -1]).coords, vec![rat(1, 1), rat(3, 1)]);
        assert_eq!(solves(&[1, 1, -2]).coords, vec![rat(1, 1); 3]);
        let (_, t) = dispatch(&form(&[1, 1, 1, 1, -7])).unwrap();
        assert!(t.route.starts_with("dim5"));
        assert_eq!(dispatch(&form(&[1, 1, 1, -7])).unwrap_err(), Error::Anisotropic(Place::prime(2)));
    }

    #[test]
    fn dim4_examples() {
        let f = form(&[1, 1, 1, -6]);
        let v = solve_dim4(&f).unwrap();
        assert!(verify(&f, &v.coords).unwrap());
        let v = solve_dim4(&form(&[1, 1, -1, -1])).unwrap();
        assert_eq!(to_i64_vec(&v.primitive()).unwrap(), vec![1, 0, 1, 0]);
        assert_eq!(solve_dim4(&form(&[1, 1, 1, -7])).unwrap_err(), Error::Anisotropic(Place::prime(2)));
    }

    #[test]
    fn dim4_main_route() {
        // no ternary subform is isotropic
        for c in [[1, 1, 1, -6], [1, 1, 1, -3], [2, 3, 5, -1], [1, 1, 1, -14], [3, 5, 7, -1]] {
            let f = form(&c);
            if !places::is_globally_isotropic(&f) {
                continue;
            }
            let (v, t) = Solver::default().solve_dim4(&f).unwrap();
            assert!(verify(&f, &v.coords).unwrap());
            if t.route == "dim4" {
                let d = t.dim4.unwrap();
                let a1: Rational = d.a1.parse().unwrap();
                let a3: Rational = d.a3.parse().unwrap();
                let na: Rational = d.norm_alpha.parse().unwrap();
                let nb: Rational = d.norm_beta.parse().unwrap();
                assert!((&a1 * &na * &a3 * &nb).is_negative());
                assert!(arith::is_rational_square(&(-(a1 * na) / (a3 * nb))));
            }
        }
    }

    #[test]
    fn dim5_examples() {
        let f = form(&[1, 1, 1, 1, -7]);
        assert!(verify(&f, &solve_dim5(&f).unwrap().coords).unwrap());
        let (_, t) = Solver::default().solve_dim5(&form(&[1, 1, 1, -1, 1])).unwrap();
        assert_eq!(t.route, "dim5/pretest");
        assert_eq!(solve_dim5(&form(&[1, 1, 1, 1, 1])).unwrap_err(), Error::Anisotropic(Place::Infinity));
    }

    #[test]
    fn dim6_examples() {
        let v = solves(&[1, 1, 1, -1, -1, -1]);
        assert_eq!(to_i64_vec(&v).unwrap(), vec![1, 0, 0, 1, 0, 0]);
        solves(&[2, 3, 5, -7, -11, -13]);
        assert_eq!(dispatch(&form(&[1, 2, 3, 4, 5, 6])).unwrap_err(), Error::Anisotropic(Place::Infinity));
    }

    #[test]
    fn dim7_examples() {
        solves(&[1, 1, 1, -1, -1, -1, -1]);
        solves(&[1, 1, 1, 1, 1, 1, -7]);
        solves(&[3, 5, 7, 11, 13, 17, -19]);
        assert_eq!(dispatch(&form(&[1; 7])).unwrap_err(), Error::Anisotropic(Place::Infinity));
    }

    #[test]
    fn dim8_examples() {
        solves(&[1, 1, 1, 1, 1, 1, 1, -1]);
        solves(&[1, 1, 1, 1, -3, -3, -3, -3]);
        solves(&[1, 1, 1, 1, 1, 1, 1, 1, -15, -15]);
        assert_eq!(dispatch(&form(&[1; 9])).unwrap_err(), Error::Anisotropic(Place::Infinity));
    }

    #[test]
    fn seeded_search_is_reproducible() {
        let f = form(&[1, 1, 1, 1, -7]);
        let cfg = SolverConfig {
            seed: Some(7),
            ..SolverConfig::default()
        };
        let a = Solver::new(cfg.clone()).dispatch(&f).unwrap();
        let b = Solver::new(cfg).dispatch(&f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rational_coefficients() {
        let f = DiagonalForm::new(vec![rat(1, 4), rat(3, 2), rat(-5, 9), rat(7, 1)]).unwrap();
        if places::is_globally_isotropic(&f) {
            let (v, _) = dispatch(&f).unwrap();
            assert!(verify(&f, &v.coords).unwrap());
        }
        let g = DiagonalForm::new(vec![rat(1, 2), rat(1, 3), rat(-5, 6)]).unwrap();
        let (v, _) = dispatch(&g).unwrap();
        assert!(verify(&g, &v.coords).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coeff() -> impl Strategy<Value = i64> {
            (-30i64..=30).prop_filter("nonzero", |c| *c != 0)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn scaling_invariance(c in prop::collection::vec(coeff(), 2..6), which in 0usize..4) {
                let f = form(&c);
                let lambda = [rat(-1, 1), rat(2, 1), rat(3, 1), rat(1, 4)][which].clone();
                let g = f.scaled(&lambda).unwrap();
                let rf = dispatch(&f);
                let rg = dispatch(&g);
                prop_assert_eq!(rf.is_ok(), rg.is_ok());
                if let Ok((v, _)) = rf {
                    prop_assert!(verify(&g, &v.coords).unwrap());
                }
            }

            #[test]
            fn pretest_vectors_have_a_zero(c in prop::collection::vec(coeff(), 4..6)) {
                let f = form(&c);
                if let Ok((v, t)) = dispatch(&f) {
                    prop_assert!(verify(&f, &v.coords).unwrap());
                    if t.route.ends_with("pretest") {
                        prop_assert!(v.coords.iter().any(|x| x.is_zero()));
                    }
                }
            }
        }
    }
}
