use latticekit::gauge::{sample_ball, Gauge, LpNorm};
use latticekit::lattice::{hnf_with_transform, Lattice};
use latticekit::linalg;
use latticekit::param::{check_perfect_code, pcvp, perfect_code_to_pcvp, support, Graph, ParamInstance};
use latticekit::rational::{qvec, Q};
use latticekit::rng::SeedStream;
use latticekit::sieve::sieve_round;
use latticekit::unique::{isolate_with, recover};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Full-rank integer lattices: an upper-triangular basis with rows mixed by a unimodular step.
fn lattice(n: usize) -> impl Strategy<Value = Lattice> {
    (prop::collection::vec(-4i64..=4, n * n), prop::collection::vec(1i64..=3, n)).prop_map(move |(entries, diag)| {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => diag[i],
                        std::cmp::Ordering::Greater => entries[i * n + j],
                    })
                    .collect()
            })
            .collect();
        let mixed: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let mut r = rows[i].clone();
                if i + 1 < n {
                    for (x, y) in r.iter_mut().zip(&rows[i + 1]) {
                        *x += entries[i] * y;
                    }
                }
                r
            })
            .collect();
        Lattice::from_integer_rows(&mixed).unwrap()
    })
}

fn norm() -> impl Strategy<Value = LpNorm> {
    prop_oneof![Just(LpNorm::Finite(1)), Just(LpNorm::Finite(2)), Just(LpNorm::Infinity)]
}

fn int_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, n)
}

fn graph() -> impl Strategy<Value = Graph> {
    (2usize..=6, any::<u32>()).prop_map(|(n, mask)| {
        let mut edges = Vec::new();
        let mut bit = 0;
        for u in 1..=n {
            for v in u + 1..=n {
                if mask >> bit & 1 == 1 {
                    edges.push((u, v));
                }
                bit += 1;
            }
        }
        Graph::new(n, &edges).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integer_combinations_are_members(l in lattice(3), c in int_vec(3)) {
        let v = l.vector_i64(&c);
        prop_assert!(l.contains(&v));
        let back = l.integer_coordinates(&v).unwrap();
        prop_assert_eq!(back, c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        let off: Vec<Q> = v.iter().enumerate().map(|(i, x)| if i == 0 { x + Q::new(1.into(), 97.into()) } else { x.clone() }).collect();
        prop_assert!(!l.contains(&off));
    }

    #[test]
    fn lll_generates_the_same_lattice(l in lattice(3)) {
        let r = l.lll();
        prop_assert_eq!(r.rank(), l.rank());
        for b in r.basis() {
            prop_assert!(l.contains(b));
        }
        for b in l.basis() {
            prop_assert!(r.contains(b));
        }
    }

    #[test]
    fn hnf_transform_is_consistent(rows in prop::collection::vec(int_vec(3), 1..5)) {
        let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let (h, u) = hnf_with_transform(&a);
        let ua: Vec<Vec<BigInt>> = u
            .iter()
            .map(|ur| (0..3).map(|j| ur.iter().zip(&a).map(|(c, r)| c * &r[j]).sum()).collect())
            .collect();
        for (i, row) in ua.iter().enumerate() {
            if i < h.len() {
                prop_assert_eq!(row, &h[i]);
            } else {
                prop_assert!(row.iter().all(Zero::is_zero));
            }
        }
        let mut last = None;
        for row in &h {
            let lead = row.iter().position(|x| !x.is_zero()).unwrap();
            prop_assert!(row[lead].is_positive());
            prop_assert!(last.is_none_or(|p| lead > p));
            last = Some(lead);
        }
    }

    #[test]
    fn gauge_triangle_and_homogeneity(x in int_vec(4), y in int_vec(4), lam in -5i64..=5, p in norm()) {
        let g = Gauge::lp(4, p);
        let (x, y) = (qvec(&x), qvec(&y));
        let (gx, gy, gs) = (g.eval(&x), g.eval(&y), g.eval(&linalg::add(&x, &y)));
        match (gx.rational(), gy.rational(), gs.rational()) {
            (Some(a), Some(b), Some(s)) if p != LpNorm::Finite(2) => prop_assert!(s <= a + b),
            _ => {
                let (a, b, s) = (gx.pth_power(), gy.pth_power(), gs.pth_power());
                let lhs = s - a - b;
                if lhs.is_positive() {
                    prop_assert!(&lhs * &lhs <= Q::from_integer(4.into()) * a * b);
                }
            }
        }
        let l = Q::from_integer(lam.into());
        let scaled = g.eval(&linalg::scale(&x, &l));
        let factor = (0..scaled.power()).fold(Q::one(), |acc, _| acc * l.abs());
        prop_assert_eq!(scaled.pth_power(), &(gx.pth_power() * factor));
    }

    #[test]
    fn sieve_round_separates_and_covers(seed in any::<u64>(), n in 2usize..=3, count in 1usize..80, p in norm()) {
        let g = Gauge::lp(n, p);
        let r = Q::from_integer(3.into());
        let mut rng = SeedStream::new(seed).rng();
        let points: Vec<_> = (0..count).map(|_| sample_ball(&g, &r, &mut rng).unwrap()).collect();
        let round = sieve_round(&points, &r, &g).unwrap();
        let half = &r / Q::from_integer(2.into());
        let reps = &round.representatives;
        prop_assert!(reps.len() as f64 <= 5f64.powi(n as i32));
        for (a, &i) in reps.iter().enumerate() {
            prop_assert!(round.map[i].is_none());
            for &j in &reps[..a] {
                prop_assert!(!g.within(&linalg::sub(&points[i], &points[j]), &half));
            }
        }
        for (i, m) in round.map.iter().enumerate() {
            if let Some(j) = *m {
                prop_assert!(reps.contains(&j));
                prop_assert!(g.within(&linalg::sub(&points[i], &points[j]), &half));
            } else {
                prop_assert!(reps.contains(&i));
            }
        }
    }

    #[test]
    fn isolation_weight_and_recovery(l in lattice(3), c in int_vec(3), v in int_vec(3), a in prop::collection::vec(0u64..=16, 3), k in 1i64..1000) {
        let target: Vec<Q> = v.iter().map(|&x| Q::new(x.into(), 2.into())).collect();
        let iso = isolate_with(&l, &target, a, 16, BigInt::from(k), LpNorm::Finite(2)).unwrap();
        let t = &iso.transform;
        let x = l.vector_i64(&c);
        let s = Q::from_integer(t.scale.clone());
        let mapped = t.apply(&linalg::scale(&x, &s));
        prop_assert!(iso.lattice.contains(&mapped));
        prop_assert_eq!(t.weight(&linalg::scale(&x, &s)), linalg::norm2_sq(&linalg::sub(&mapped, &iso.target)));
        prop_assert_eq!(recover(t, &mapped).unwrap(), x);
    }

    #[test]
    fn pcvp_respects_support_bound(l in lattice(3), v in int_vec(3), k in 1usize..=3, p in norm()) {
        let inst = ParamInstance::new(l.clone(), k, p).unwrap().with_target(qvec(&v)).unwrap();
        let sol = pcvp(&inst).unwrap();
        prop_assert!(support(&sol.coefficients) <= k);
        prop_assert_eq!(l.vector(&sol.coefficients), sol.witness);
    }

    #[test]
    fn perfect_code_reduction_is_equivalent(g in graph(), k in 1usize..=3) {
        prop_assume!(k <= g.vertices());
        let inst = perfect_code_to_pcvp(&g, k, None).unwrap();
        prop_assert_eq!(inst.decide().unwrap(), check_perfect_code(&g, k));
    }

    #[test]
    fn derived_streams_are_reproducible(seed in any::<u64>(), i in any::<u64>(), j in any::<u64>()) {
        let s = SeedStream::new(seed);
        prop_assert_eq!(s.derive(i), s.derive(i));
        if i != j {
            prop_assert_ne!(s.derive(i), s.derive(j));
        }
        prop_assert_eq!(s.derive_path(&[i, j]), s.derive(i).derive(j));
    }
}
