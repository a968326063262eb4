use super::*;
use crate::field_tower::ThetaPoly;
use crate::newton_polygon::root_valuations;
use crate::skew::{to_additive, DrinfeldModule};
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig {
        terms: 24,
        ..SolverConfig::default()
    }
}

fn base(p: u32) -> Arc<FieldDescriptor> {
    FieldDescriptor::canonical(p, 1).unwrap()
}

fn mono(f: &Arc<FieldDescriptor>, c: u32, v: i64) -> Puiseux {
    Puiseux::monomial(&FqElement::new(f.clone(), c), Q::from_integer(v))
}

fn phi_theta(p: u32, a: Vec<Puiseux>) -> AdditivePoly {
    let f = base(p);
    let d = DrinfeldModule::new(&f, a).unwrap();
    to_additive(&d.phi_theta(), &Puiseux::zero(&f))
}

fn valuation_multiset(batches: &[RootBatch]) -> Vec<(Q, u64)> {
    batches
        .iter()
        .filter_map(|b| {
            b.segment
                .as_ref()
                .map(|s| (s.root_valuation(), b.roots.len() as u64))
        })
        .collect()
}

#[test]
fn case_a_theta_torsion() {
    let f = base(2);
    let g = phi_theta(2, vec![Puiseux::one(&f), Puiseux::one(&f)]);
    let batches = all_roots(&g, &cfg()).unwrap();
    assert_eq!(batches[0].roots.len(), 1);
    assert!(batches[0].segment.is_none());
    assert_eq!(valuation_multiset(&batches), vec![(Q::new(-1, 3), 3)]);
    assert_eq!(batches[1].ramification, 3);
    for b in &batches {
        for r in &b.roots {
            assert!(residual_ok(&g, r), "{r}");
        }
    }
}

#[test]
fn example_two_roots_are_the_finite_field() {
    for r in [2usize, 3] {
        let f = base(2);
        let mut a = vec![Puiseux::zero(&f); r];
        a[r - 1] = Puiseux::theta(&f).neg();
        let g = phi_theta(2, a);
        let batches = all_roots(&g, &cfg()).unwrap();
        let roots: Vec<&Puiseux> = batches.iter().flat_map(|b| &b.roots).collect();
        assert_eq!(roots.len(), 1 << r);
        let big = FieldDescriptor::canonical(2, r as u32).unwrap();
        for code in 0..big.size() {
            let c = Puiseux::constant(&FqElement::new(big.clone(), code));
            assert!(roots.iter().any(|x| x.is_exact() && x.eq_to_precision(&c)));
        }
        assert_eq!(batches[1].residue_degree, r as u32);
        let lead =
            initial_terms(&g, batches[1].segment.as_ref().unwrap(), Caps::default()).unwrap();
        assert_eq!(lead.len(), (1 << r) - 1);
        assert_eq!(lead[0].coeff.field().degree(), r as u32);
    }
}

#[test]
fn x_alone_has_only_zero() {
    let f = base(3);
    let g = AdditivePoly::new(3, vec![Puiseux::one(&f)], Puiseux::zero(&f));
    let batches = all_roots(&g, &cfg()).unwrap();
    assert_eq!(batches.len(), 1);
    assert!(batches[0].roots[0].is_exact_zero());
}

#[test]
fn carlitz_root_of_x_q_minus_one_equals_minus_theta() {
    for p in [2u32, 3, 5] {
        let f = base(p);
        let g = phi_theta(p, vec![Puiseux::one(&f)]);
        let kb = kernel_basis(&g, &cfg()).unwrap();
        assert_eq!(kb.len(), 1);
        let w = &kb[0].1[0];
        assert_eq!(w.valuation().finite(), Some(Q::new(-1, p as i64 - 1)));
        // w^(q-1) = -theta: check w^q = -theta w
        let lhs = w.frobenius(p as u64);
        let rhs = Puiseux::theta(&f).neg().mul(w);
        assert!(lhs.eq_to_precision(&rhs));
    }
}

#[test]
fn case_b_polygon_agreement() {
    let f = base(2);
    let theta5 = ThetaPoly::theta_pow(&f, 5).to_series();
    let g = phi_theta(2, vec![theta5, Puiseux::one(&f)]);
    let batches = all_roots(&g, &cfg()).unwrap();
    let mut got = valuation_multiset(&batches);
    let mut want = root_valuations(&polygon_of(&g, true).unwrap()).unwrap();
    got.sort();
    want.sort();
    assert_eq!(got, want);
    for b in &batches {
        for r in &b.roots {
            assert!(residual_ok(&g, r), "{r}");
        }
    }
}

#[test]
fn lifting_reaches_requested_precision() {
    let f = base(2);
    let g = phi_theta(2, vec![Puiseux::one(&f), Puiseux::one(&f)]);
    let c = SolverConfig {
        terms: 64,
        ..SolverConfig::default()
    };
    let root = &kernel_basis(&g, &c).unwrap()[0].1[0];
    let lead = root.leading_term().unwrap();
    let x0 = Puiseux::monomial(&lead.0, lead.1);
    // the leading terms of the three roots differ, so one term already separates
    assert!(lift_root(&g, &x0, &c)
        .unwrap()
        .agrees_to(root, Q::from_integer(5)));
    let bad = ThetaPoly::theta_pow(&f, 2).to_series();
    assert_eq!(
        lift_root(&g, &bad, &c).unwrap_err(),
        RootError::NonSeparated
    );
    // a good approximation is lifted to 64 slots
    let approx = root.truncate(lead.1 + Q::new(10, 1));
    let lifted = lift_root(&g, &approx, &c).unwrap();
    assert!(
        lifted.abs_precision().unwrap() >= Q::new(-1, 3) + Q::new(64, 3),
        "{lifted} {approx}"
    );
    assert!(residual_ok(&g, &lifted));
    assert!(lifted.agrees_to(
        root,
        root.abs_precision()
            .unwrap()
            .min(lifted.abs_precision().unwrap())
    ));
    // an exact root comes back unchanged
    let e2 = phi_theta(2, vec![Puiseux::zero(&f), Puiseux::theta(&f).neg()]);
    let one = Puiseux::one(&f);
    assert!(lift_root(&e2, &one, &c).unwrap().is_exact());
}

#[test]
fn inhomogeneous_roots_form_a_coset() {
    let f = base(3);
    let g = phi_theta(3, vec![mono(&f, 1, -1), mono(&f, 2, 0)]);
    let e = mono(&f, 1, 2);
    let inh = g.with_constant(e.neg());
    let batches = all_roots(&inh, &cfg()).unwrap();
    let roots: Vec<&Puiseux> = batches.iter().flat_map(|b| &b.roots).collect();
    assert_eq!(roots.len(), 9);
    for r in &roots {
        assert!(residual_ok(&inh, r));
    }
    for a in &roots {
        for b in &roots {
            assert!(residual_ok(&g, &a.sub(b)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_polygon(v1 in -8i64..3, v2 in -8i64..3, c1 in 1u32..3, c2 in 1u32..3, p in prop::sample::select(vec![2u32, 3])) {
        let f = base(p);
        let (c1, c2) = (c1 % p, c2 % p);
        prop_assume!(c2 != 0);
        let a1 = if c1 == 0 { Puiseux::zero(&f) } else { mono(&f, c1, v1) };
        let g = phi_theta(p, vec![a1, mono(&f, c2, v2)]);
        let batches = all_roots(&g, &cfg()).unwrap();
        let mut got = valuation_multiset(&batches);
        let mut want = root_valuations(&polygon_of(&g, true).unwrap()).unwrap();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
        let roots: Vec<&Puiseux> = batches.iter().flat_map(|b| &b.roots).collect();
        for r in &roots {
            prop_assert!(residual_ok(&g, r));
        }
        // closed under addition
        for a in roots.iter().take(4) {
            for b in roots.iter().take(4) {
                prop_assert!(residual_ok(&g, &a.add(b)));
            }
        }
    }
}
