use super::*;
use crate::field_tower::{FqElement, ThetaPoly};

fn cfg() -> SolverConfig {
    SolverConfig {
        terms: 24,
        ..SolverConfig::default()
    }
}

fn base(p: u32) -> Arc<FieldDescriptor> {
    FieldDescriptor::canonical(p, 1).unwrap()
}

fn theta_pow(f: &Arc<FieldDescriptor>, k: usize) -> Puiseux {
    ThetaPoly::theta_pow(f, k).to_series()
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

#[test]
fn classify_examples() {
    let c = classify(2, Some(q(0, 1)), q(0, 1));
    assert_eq!(c.case, Case::A);
    assert_eq!(c.threshold, q(-2, 3));
    let c = classify(2, Some(q(-5, 1)), q(0, 1));
    assert_eq!((c.case, c.n), (Case::B, Some(2)));
    let c = classify(2, None, q(0, 1));
    assert_eq!(c.case, Case::A);
    // on the boundary (v_2 - q^2)/(q+1) = -4/3 itself: n stays 0
    let c = classify(2, Some(q(-4, 3)), q(0, 1));
    assert_eq!((c.case, c.n), (Case::B, Some(0)));
}

#[test]
fn classify_matches_the_defining_inequalities() {
    for qq in [2u64, 3, 4, 5] {
        for v2 in -3..3i64 {
            for v1n in -40..10i64 {
                let v1 = q(v1n, 3);
                let v2 = Q::from_integer(v2);
                let c = classify(qq, Some(v1), v2);
                let b = |j: u32| {
                    (v2 - Q::from_integer(qq.pow(j) as i64)) / Q::from_integer(qq as i64 + 1)
                };
                match c.case {
                    Case::A => assert!(v1 >= b(1)),
                    Case::B => {
                        let n = c.n.unwrap();
                        assert!(b(n + 2) <= v1 && v1 < b(n + 1), "q={qq} v1={v1} n={n}");
                    }
                }
            }
        }
    }
}

#[test]
fn degree_bounds_examples() {
    let a = degree_bounds(&classify(2, Some(q(0, 1)), q(0, 1)));
    assert_eq!(a.upper_divisor, 6);
    let b = degree_bounds(&classify(2, Some(q(-5, 1)), q(0, 1)));
    assert_eq!(b.upper_divisor, 8);
    assert_eq!(b.lower_divisor, Some(8));
    let even = degree_bounds(&classify(2, Some(q(-6, 1)), q(0, 1)));
    assert!(!even.prime_to_q);
    assert_eq!(even.lower_divisor, None);
    let frac = degree_bounds(&classify(2, Some(q(-11, 2)), q(0, 1)));
    assert!(frac.note.is_some());
}

#[test]
fn predicted_steep_closed_form() {
    let c = classify(2, Some(q(-5, 1)), q(0, 1));
    assert_eq!(
        predicted_valuations(&c, Branch::Steep, 4),
        vec![q(-5, 2), q(5, 4), q(25, 8), q(33, 8), q(41, 8)]
    );
    // oracle: v_0 from the segment (q, v_1)-(q^2, v_2) of phi_theta(X)/X, then
    // v_i = (v_(i-1) - v_1)/q from the segment (0, v_(i-1))-(q, v_1) of phi_theta(X) - e_(i-1)
    for (qq, v1, v2) in [
        (2u64, q(-5, 1), q(0, 1)),
        (3, q(-7, 1), q(1, 1)),
        (2, q(-13, 2), q(-1, 1)),
    ] {
        let c = classify(qq, Some(v1), v2);
        let n = c.n.unwrap() as usize;
        let got = predicted_valuations(&c, Branch::Steep, n as u32 + 2);
        let qf = Q::from_integer(qq as i64);
        let mut want = vec![(v1 - v2) / (qf * (qf - Q::from_integer(1)))];
        for i in 1..=n {
            want.push((want[i - 1] - v1) / qf);
        }
        assert_eq!(&got[..=n], &want[..]);
        assert_eq!(got[n + 1], got[n] + Q::from_integer(1));
    }
}

fn module(p: u32, a: Vec<Puiseux>) -> DrinfeldModule {
    DrinfeldModule::new(&base(p), a).unwrap()
}

#[test]
fn basis_of_example_two_is_one_and_omega() {
    let f = base(2);
    let d = module(2, vec![Puiseux::zero(&f), Puiseux::theta(&f).neg()]);
    let b = theta_torsion_basis(&d, &cfg()).unwrap();
    assert_eq!(b.len(), 2);
    let f4 = FieldDescriptor::canonical(2, 2).unwrap();
    assert!(b[0].eq_to_precision(&Puiseux::one(&f4)));
    assert!(b[1].eq_to_precision(&Puiseux::constant(&FqElement::new(f4, 2))));
}

#[test]
fn carlitz_tower_stabilizes_at_zero() {
    for p in [2u32, 3] {
        let d = DrinfeldModule::carlitz(&base(p));
        let towers = build_basis_towers(&d, 3, &cfg()).unwrap();
        let t = &towers[0];
        assert_eq!(t.report.branch, Branch::Rank1);
        let v0 = q(-1, p as i64 - 1);
        assert_eq!(
            t.report.measured(),
            (0..4).map(|i| v0 + Q::from_integer(i)).collect::<Vec<_>>()
        );
        assert_eq!(stabilization_check(&t.report).unwrap(), 0);
        assert!(t.report.levels.iter().all(|l| l.fiber_matches_polygon));
    }
}

#[test]
fn case_a_ramification_three_throughout() {
    let f = base(2);
    let d = module(2, vec![Puiseux::one(&f), Puiseux::one(&f)]);
    let towers = build_basis_towers(&d, 5, &cfg()).unwrap();
    for t in &towers {
        assert_eq!(t.report.branch, Branch::A);
        assert!(t.report.levels.iter().all(|l| l.ramification == 3));
        assert_eq!(stabilization_check(&t.report).unwrap(), 0);
    }
    let s = field_surrogate(&towers);
    assert_eq!(s.degree % 3, 0);
    assert_eq!(6 % s.degree, 0);
}

#[test]
fn steep_tower_theta_five() {
    let f = base(2);
    let d = module(2, vec![theta_pow(&f, 5), Puiseux::one(&f)]);
    let basis = theta_torsion_basis(&d, &cfg()).unwrap();
    let steep = basis
        .iter()
        .find(|b| b.valuation().finite() == Some(q(-5, 2)))
        .expect("steep basis element");
    let t = build_tower(&d, steep, 4, &cfg()).unwrap();
    assert_eq!(t.report.branch, Branch::Steep);
    assert_eq!(
        t.report.measured(),
        vec![q(-5, 2), q(5, 4), q(25, 8), q(33, 8), q(41, 8)]
    );
    assert_eq!(t.report.levels[2].ramification, 8);
    assert_eq!(stabilization_check(&t.report).unwrap(), 2);
    assert!(t.report.levels.iter().all(|l| l.fiber_matches_polygon));
}

#[test]
fn wrong_start_is_rejected() {
    let f = base(2);
    let d = module(2, vec![Puiseux::one(&f), Puiseux::one(&f)]);
    assert_eq!(
        build_tower(&d, &Puiseux::one(&f), 2, &cfg()).unwrap_err(),
        TowerError::NotTorsion
    );
}

#[test]
fn torsion_counts_grow_by_q_to_the_rank() {
    let f = base(2);
    let d = module(2, vec![Puiseux::one(&f), Puiseux::one(&f)]);
    assert_eq!(torsion_counts(&d, 2, &cfg()).unwrap(), vec![4, 16]);
    let c = DrinfeldModule::carlitz(&base(3));
    assert_eq!(torsion_counts(&c, 2, &cfg()).unwrap(), vec![3, 9]);
}
