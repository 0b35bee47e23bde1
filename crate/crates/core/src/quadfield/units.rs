//! Fundamental units and S-unit generators.

use std::collections::HashMap;

use num_traits::{One, Signed};

use super::ideal;
use super::{PrimeIdeal, QFElement, QuadField};
use crate::arith::{rat_int, Rational};
use crate::error::{Error, Result};

/// Sign of the real number `x + y√d` for `d > 0`.
pub(crate) fn real_sign(e: &QFElement) -> i32 {
    let sx = sign(&e.x);
    let sy = sign(&e.y);
    if sx == sy || sy == 0 {
        return sx;
    }
    if sx == 0 {
        return sy;
    }
    // opposite signs: compare x² with d·y²
    let lhs = &e.x * &e.x;
    let rhs = rat_int(e.d.clone()) * &e.y * &e.y;
    if lhs > rhs {
        sx
    } else {
        sy
    }
}

fn sign(q: &Rational) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

pub(super) fn fundamental_unit(field: &QuadField) -> Result<QFElement> {
    let disc = field.disc_i128()?;
    let s = ideal::disc_isqrt(disc);
    let p0 = if (s - disc).rem_euclid(2) == 0 { s } else { s - 1 };
    let start = (p0, 2i128);
    let (mut p, mut q) = start;
    let mut eps = field.from_int(1);
    let mut steps = 0usize;
    loop {
        let (p2, q2, m) = ideal::step_real(field, disc, p, q);
        eps = &eps * &m;
        p = p2;
        q = q2;
        steps += 1;
        if (p, q) == start {
            break;
        }
        if steps > field.period_cap() {
            return Err(Error::Resource(format!(
                "continued fraction period of d = {} exceeds the cap {}",
                field.d(),
                field.period_cap()
            )));
        }
    }
    if real_sign(&eps) < 0 {
        eps = -eps;
    }
    let one = field.from_int(1);
    let diff = QFElement {
        d: eps.d.clone(),
        x: &eps.x - &one.x,
        y: eps.y.clone(),
    };
    if real_sign(&diff) < 0 {
        eps = eps.inv()?;
    }
    let n = eps.norm();
    if n != Rational::one() && n != -Rational::one() || !eps.is_integral() {
        return Err(Error::Internal(format!("period product {eps} is not a unit")));
    }
    Ok(eps)
}

/// Generators of the S-units modulo squares.
#[derive(Debug, Clone)]
pub struct SUnitData {
    pub torsion: QFElement,
    pub fundamental: Option<QFElement>,
    pub primes: Vec<PrimeIdeal>,
    /// ℤ-basis of the lattice of exponent vectors `e` with `∏ 𝔭^e` principal.
    pub relations: Vec<Vec<i64>>,
    /// `generators[j]` generates `∏ 𝔭_i^{relations[j][i]}`.
    pub generators: Vec<QFElement>,
}

impl SUnitData {
    /// Torsion generator, fundamental unit (if any), then the relation
    /// generators: a basis of the S-units modulo squares.
    pub fn basis(&self) -> Vec<QFElement> {
        let mut v = vec![self.torsion.clone()];
        v.extend(self.fundamental.iter().cloned());
        v.extend(self.generators.iter().cloned());
        v
    }

    /// Valuation vectors matching `basis()`.
    pub fn valuation_vectors(&self) -> Vec<Vec<i64>> {
        let n = self.primes.len();
        let mut v = vec![vec![0; n]];
        if self.fundamental.is_some() {
            v.push(vec![0; n]);
        }
        v.extend(self.relations.iter().cloned());
        v
    }
}

pub(super) fn s_unit_generators(field: &QuadField, s: &[PrimeIdeal]) -> Result<SUnitData> {
    let mut primes: Vec<PrimeIdeal> = Vec::new();
    for pr in s {
        if !primes.iter().any(|q| q.same_as(pr)) {
            primes.push(pr.clone());
        }
    }
    let cg = field.class_group()?;
    let n = primes.len();
    // subgroup of Cl generated so far: canonical class vector -> exponents
    let mut table: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
    let zero_class = cg.canonical(&[]);
    table.insert(zero_class.clone(), vec![0; n]);
    let mut members: Vec<(Vec<i64>, Vec<i64>)> = vec![(zero_class, vec![0; n])];
    let mut relations = Vec::with_capacity(n);
    for (j, pr) in primes.iter().enumerate() {
        let x = cg.dlog_prime(field, pr)?;
        let mut cur = cg.canonical(&x);
        let mut m = 1i64;
        let hit = loop {
            if let Some(v) = table.get(&cur) {
                break v.clone();
            }
            let sum: Vec<i64> = cur.iter().zip(&x).map(|(a, b)| a + b).collect();
            cur = cg.canonical(&sum);
            m += 1;
        };
        let mut rel: Vec<i64> = hit.iter().map(|c| -c).collect();
        rel[j] += m;
        relations.push(rel);
        let mut layer = members.clone();
        for _ in 1..m {
            let mut next = Vec::with_capacity(layer.len());
            for (cls, ex) in &layer {
                let sum: Vec<i64> = cls.iter().zip(&x).map(|(a, b)| a + b).collect();
                let c2 = cg.canonical(&sum);
                let mut e2 = ex.clone();
                e2[j] += 1;
                table.insert(c2.clone(), e2.clone());
                next.push((c2, e2));
            }
            members.extend(next.iter().cloned());
            layer = next;
        }
    }
    let mut generators = Vec::with_capacity(n);
    for rel in &relations {
        let factors: Vec<(PrimeIdeal, i64)> = primes.iter().cloned().zip(rel.iter().copied()).collect();
        let g = ideal::generator_of_product(field, &factors)?.ok_or_else(|| {
            Error::Internal(format!("relation {rel:?} does not give a principal ideal"))
        })?;
        generators.push(g);
    }
    Ok(SUnitData {
        torsion: field.torsion_generator(),
        fundamental: if field.is_real() {
            Some(field.fundamental_unit()?)
        } else {
            None
        },
        primes,
        relations,
        generators,
    })
}

/// `|N(𝔭)|^e` products, used to cross-check generator norms.
#[cfg(test)]
pub(crate) fn norm_of_factors(factors: &[(PrimeIdeal, i64)]) -> Rational {
    let mut n = Rational::one();
    for (pr, e) in factors {
        let base = match pr.kind {
            crate::quadfield::PrimeKind::Inert => num_bigint::BigInt::from(pr.p * pr.p),
            _ => num_bigint::BigInt::from(pr.p),
        };
        n *= rat_int(base).pow(*e as i32);
    }
    n
}
