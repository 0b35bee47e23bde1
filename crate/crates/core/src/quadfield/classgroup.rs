//! Class group by successive extension of the subgroup generated by small
//! prime ideals.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::ideal::{self, Prim};
use super::{PrimeIdeal, PrimeKind, QuadField};
use crate::arith;
use crate::error::{Error, Result};

/// `Cl(L)` presented by generators `g_j` and lower-triangular relations
/// `m_j·g_j = Σ_{i<j} c_{ji}·g_i`.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub order: u64,
    /// Generators paired with the order of their class.
    pub generators: Vec<(PrimeIdeal, u64)>,
    /// Elementary divisors greater than one, each dividing the next.
    pub invariants: Vec<u64>,
    relations: Vec<Vec<i64>>,
    table: HashMap<(i128, i128), Vec<i64>>,
}

impl ClassGroup {
    pub fn rank(&self) -> usize {
        self.relations.len()
    }

    /// Relation rows `m_j e_j - c_j`, padded to the full rank.
    pub fn relations(&self) -> &[Vec<i64>] {
        &self.relations
    }

    /// Unique representative of `v` modulo the relations, with
    /// `0 <= v_j < m_j`.
    pub fn canonical(&self, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        v.resize(self.rank(), 0);
        for j in (0..self.rank()).rev() {
            let rel = &self.relations[j];
            let q = v[j].div_euclid(rel[j]);
            if q != 0 {
                for (vi, ri) in v.iter_mut().zip(rel) {
                    *vi -= q * ri;
                }
            }
        }
        v
    }

    /// Coordinates of the class of a prime ideal over the generators.
    pub fn dlog_prime(&self, field: &QuadField, pr: &PrimeIdeal) -> Result<Vec<i64>> {
        if pr.kind == PrimeKind::Inert {
            return Ok(vec![0; self.rank()]);
        }
        let (r, _) = ideal::reduce(field, (pr.p, pr.b))?;
        self.dlog_reduced(field, r)
    }

    pub(crate) fn dlog_reduced(&self, field: &QuadField, r: Prim) -> Result<Vec<i64>> {
        let key = ideal::class_key(field, r)?;
        let mut v = self
            .table
            .get(&key)
            .cloned()
            .ok_or_else(|| Error::Internal("class missing from the class table".into()))?;
        v.resize(self.rank(), 0);
        Ok(v)
    }

    /// Dimension of `Cl/Cl²` after killing the classes in `extra`.
    pub fn two_rank_mod(&self, extra: &[Vec<i64>]) -> usize {
        let rows: Vec<Vec<u8>> = self
            .relations
            .iter()
            .chain(extra)
            .map(|r| r.iter().map(|x| x.rem_euclid(2) as u8).collect())
            .collect();
        self.rank() - crate::sqclasses::rank_mod2(&rows, self.rank())
    }
}

fn minkowski_bound(disc: i128) -> u64 {
    let root = (disc.unsigned_abs() as f64).sqrt();
    let b = if disc < 0 {
        2.0 / std::f64::consts::PI * root
    } else {
        root / 2.0
    };
    b.floor() as u64 + 1
}

pub(super) fn compute(field: &QuadField) -> Result<ClassGroup> {
    let disc = field.disc_i128()?;
    let unit = ideal::unit_reduced(field)?;
    let mut table: HashMap<(i128, i128), Vec<i64>> = HashMap::new();
    let mut members: Vec<(Prim, Vec<i64>)> = vec![(unit, vec![])];
    table.insert(ideal::class_key(field, unit)?, vec![]);
    let mut generators = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();

    let bound = minkowski_bound(disc);
    let mut p = 1u64;
    loop {
        p = arith::next_prime(p);
        if p > bound {
            break;
        }
        let pr = match field.factor_prime(&BigInt::from(p))? {
            super::PrimeSplitting::Inert(_) => continue,
            super::PrimeSplitting::Split(a, _) | super::PrimeSplitting::Ramified(a) => a,
        };
        let (mut cur, _) = ideal::reduce(field, (pr.p, pr.b))?;
        let mut m = 1i64;
        let hit = loop {
            let key = ideal::class_key(field, cur)?;
            if let Some(v) = table.get(&key) {
                break v.clone();
            }
            cur = ideal::mul_reduce(field, cur, &pr)?;
            m += 1;
        };
        if m == 1 {
            continue;
        }
        let g = relations.len();
        let mut rel: Vec<i64> = hit.iter().map(|c| -c).collect();
        rel.resize(g, 0);
        rel.push(m);
        for r in relations.iter_mut() {
            r.push(0);
        }
        relations.push(rel);
        let mut layer: Vec<(Prim, Vec<i64>)> = members.clone();
        for _ in 1..m {
            let mut next = Vec::with_capacity(layer.len());
            for (r, v) in &layer {
                let r2 = ideal::mul_reduce(field, *r, &pr)?;
                let mut v2 = v.clone();
                v2.resize(g + 1, 0);
                v2[g] += 1;
                table.insert(ideal::class_key(field, r2)?, v2.clone());
                next.push((r2, v2));
            }
            members.extend(next.iter().cloned());
            layer = next;
        }
        generators.push(pr);
    }

    let order = members.len() as u64;
    let mut cg = ClassGroup {
        order,
        generators: Vec::new(),
        invariants: Vec::new(),
        relations,
        table,
    };
    if cg.table.len() as u64 != order {
        return Err(Error::Internal("class table has duplicate entries".into()));
    }
    let mut gens = Vec::new();
    for (j, pr) in generators.into_iter().enumerate() {
        let mut e = vec![0i64; cg.rank()];
        let mut n = 0u64;
        loop {
            e[j] += 1;
            n += 1;
            if cg.canonical(&e).iter().all(|x| *x == 0) {
                break;
            }
        }
        // certify: 𝔭^n is principal
        if ideal::generator_of_product(field, &[(pr.clone(), n as i64)])?.is_none() {
            return Err(Error::Internal(format!("generator {pr} to the power {n} is not principal")));
        }
        gens.push((pr, n));
    }
    cg.generators = gens;
    cg.invariants = smith_invariants(&cg.relations);
    let prod: u64 = cg.invariants.iter().product();
    if prod != order {
        return Err(Error::Internal("elementary divisors disagree with the class number".into()));
    }
    Ok(cg)
}

/// Diagonal of the Smith normal form, entries greater than one.
#[allow(clippy::needless_range_loop)]
pub(crate) fn smith_invariants(rows: &[Vec<i64>]) -> Vec<u64> {
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut diag = Vec::new();
    for t in 0..n {
        // bring a nonzero entry of minimal absolute value to (t, t), then
        // clear its row and column; repeat until it divides everything left
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish(diag);
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let piv = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(piv);
                if q != 0 {
                    for j in t..n {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(piv);
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block
            let mut bad = None;
            'outer: for i in t + 1..n {
                for j in t + 1..n {
                    if a[i][j] % piv != 0 {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    for j in t..n {
                        a[t][j] += a[i][j];
                    }
                }
                None => {
                    diag.push(piv.unsigned_abs() as u64);
                    break;
                }
            }
        }
    }
    finish(diag)
}

fn finish(diag: Vec<u64>) -> Vec<u64> {
    let mut d: Vec<u64> = diag.into_iter().filter(|&x| x > 1).collect();
    d.sort();
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_examples() {
        assert_eq!(smith_invariants(&[vec![2, 0], vec![0, 2]]), vec![2, 2]);
        assert_eq!(smith_invariants(&[vec![2, 0], vec![-1, 2]]), vec![4]);
        assert_eq!(smith_invariants(&[vec![3]]), vec![3]);
        assert_eq!(smith_invariants(&[vec![2, 0], vec![0, 3]]), vec![6]);
        assert!(smith_invariants(&[]).is_empty());
    }

    #[test]
    fn canonical_is_reduced() {
        let q = QuadField::new(&BigInt::from(-105)).unwrap();
        let cg = q.class_group().unwrap();
        assert_eq!(cg.order, 8);
        assert_eq!(cg.invariants, vec![2, 2, 2]);
        for v in [vec![1, 1, 1], vec![3, -1, 5], vec![0, 0, 2]] {
            let c = cg.canonical(&v);
            assert_eq!(cg.canonical(&c), c);
        }
    }
}
