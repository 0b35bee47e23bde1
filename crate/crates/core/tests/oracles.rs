use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isovec::arith;
use isovec::oracle::{self, SearchBudget};
use isovec::places::{self, DiagonalForm};
use isovec::solver::{self, SolveTrace, Solver};
use isovec::ternary;
use isovec::Error;

fn form(c: &[i64]) -> DiagonalForm {
    DiagonalForm::from_ints(c).unwrap()
}

/// Any solvable Legendre equation with |a|, |b|, |c| <= 15 has a solution
/// of height at most 15, so an exhaustive search to height 100 decides it.
#[test]
fn legendre_matches_exhaustive_search() {
    let vals: Vec<i64> = (-15..=15)
        .filter(|&x| x != 0 && arith::is_squarefree(&BigInt::from(x)).unwrap())
        .collect();
    let mut checked = 0;
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                if a.gcd(&b) != 1 || a.gcd(&c) != 1 || b.gcd(&c) != 1 {
                    continue;
                }
                let f = form(&[a, b, c]);
                let brute = oracle::brute_search(&f, &SearchBudget::new(100)).is_some();
                let local = places::is_globally_isotropic(&f);
                let solved = match ternary::solve_legendre(&a.into(), &b.into(), &c.into()) {
                    Ok((x, y, z)) => {
                        assert!(x.gcd(&y).gcd(&z).is_one(), "{f}");
                        let v: Vec<_> = [x, y, z].into_iter().map(arith::rat_int).collect();
                        assert!(solver::verify(&f, &v).unwrap(), "{f}");
                        true
                    }
                    Err(Error::Anisotropic(_)) => false,
                    Err(e) => panic!("{f}: {e}"),
                };
                assert_eq!(solved, brute, "{f}");
                assert_eq!(solved, local, "{f}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn dispatch_solves_whatever_brute_force_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 2..=6usize {
        for _ in 0..120 {
            let c: Vec<i64> = (0..n)
                .map(|_| loop {
                    let x = rng.gen_range(-20i64..=20);
                    if x != 0 {
                        break x;
                    }
                })
                .collect();
            let f = form(&c);
            let brute = oracle::brute_search(&f, &SearchBudget::new(50));
            if let Some(w) = &brute {
                assert!(solver::verify(&f, &w.coords).unwrap());
            }
            match solver::dispatch(&f) {
                Ok((v, _)) => assert!(solver::verify(&f, &v.coords).unwrap(), "{f}"),
                Err(e) => assert!(brute.is_none(), "{f}: {e} but brute force found {:?}", brute),
            }
        }
    }
}

fn check_progress(t: &SolveTrace, support: &BTreeSet<BigInt>, cap: usize) {
    for node in t.nodes() {
        let appended: Vec<BigInt> = node.primes_appended.iter().map(|p| p.parse().unwrap()).collect();
        let distinct: BTreeSet<&BigInt> = appended.iter().collect();
        assert_eq!(distinct.len(), appended.len(), "{:?}", node.primes_appended);
        assert!(appended.len() <= cap);
        assert!(appended.iter().all(|p| arith::is_prime(p)));
        if node.route == "dim4" || node.route == "dim5" {
            // one system per iteration, the last one solvable
            assert_eq!(node.systems.len(), appended.len() + 1);
            assert!(node.systems.last().unwrap().solution.is_some());
            assert!(node.systems[..appended.len()].iter().all(|s| s.solution.is_none()));
        }
        if node.form == t.form {
            assert!(appended.iter().all(|p| !support.contains(p)));
        }
    }
}

#[test]
fn search_loops_only_add_new_primes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    while seen < 40 {
        let n = rng.gen_range(4..=7);
        let c: Vec<i64> = (0..n).map(|_| rng.gen_range(1i64..=40) * if rng.gen() { 1 } else { -1 }).collect();
        let f = form(&c);
        if !places::is_globally_isotropic(&f) {
            continue;
        }
        let support = places::support_set(&f).primes;
        let (v, t) = Solver::default().dispatch(&f).unwrap();
        assert!(solver::verify(&f, &v.coords).unwrap());
        check_progress(&t, &support, solver::MAX_PRIMES);
        seen += 1;
    }
}
