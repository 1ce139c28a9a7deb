use weylwit::block_seq::enumerate_twisted;
use weylwit::twisted_witness::{
    build_twisted, build_twisted_randomized_with, isotropy_twisted, rescale_to_gamma_one, sl_class_label,
    sl_refinement, transport_twisted, twisted_sign_element,
};
use weylwit::GaussRational;

#[test]
fn build_validate_normalize_up_to_eleven() {
    let mut count = 0;
    for n in 0..=11 {
        for s in enumerate_twisted(n) {
            let w = build_twisted(&s).unwrap();
            let rep = w.validate();
            assert!(rep.passed(), "a={:?} b={:?}: {:?}", s.a, s.b, rep.failures().collect::<Vec<_>>());
            w.normalize().unwrap_or_else(|e| panic!("a={:?} b={:?}: {e}", s.a, s.b));
            count += 1;
        }
    }
    assert!(count > 50);
}

#[test]
fn transport_between_random_configurations() {
    for n in 1..=8 {
        for (k, s) in enumerate_twisted(n).into_iter().enumerate() {
            let w = build_twisted(&s).unwrap().normalize().unwrap();
            let (moved, rho) = build_twisted_randomized_with(&s, 100 + k as u64).unwrap();
            assert!(moved.validate().passed());
            let moved = moved.normalize().unwrap();
            let gamma = transport_twisted(&w, &moved).unwrap();
            assert_eq!(w.space.conjugate(&gamma).unwrap(), moved.space);
            let back = transport_twisted(&moved, &w).unwrap();
            assert!(back.dot_mat(&gamma).is_identity());
            let iso = isotropy_twisted(&w).unwrap();
            let delta = rho.inverse().unwrap().dot_mat(&gamma);
            assert!(iso.elements.iter().any(|e| e.gamma == delta), "a={:?} b={:?}", s.a, s.b);
        }
    }
}

#[test]
fn isotropy_matches_sign_group() {
    for n in 0..=9 {
        for s in enumerate_twisted(n) {
            let w = build_twisted(&s).unwrap().normalize().unwrap();
            let iso = isotropy_twisted(&w).unwrap();
            assert_eq!(iso.order() as u64, s.sign_group.order());
            assert_eq!(iso.order(), 1 << s.sign_group.rank());
            assert!(iso.report.passed(), "a={:?} b={:?}", s.a, s.b);
        }
    }
}

#[test]
fn special_linear_refinement() {
    let one = GaussRational::from_int(1);
    for n in 1..=8 {
        for (k, s) in enumerate_twisted(n).into_iter().enumerate() {
            let w = build_twisted(&s).unwrap().normalize().unwrap();
            let r = sl_refinement(&w).unwrap();
            assert!(r.report.passed());
            assert_eq!(r.star_square_det, one);
            if s.a_at(1) > 0 {
                assert_eq!(r.class_count, 1);
                let g0 = r.gamma0.unwrap();
                assert_eq!(g0.det().unwrap(), -one.clone());
            } else {
                assert_eq!(r.class_count, 2);
                assert!(r.gamma0.is_none());
                // every isotropy element has determinant one, so the label is
                // the determinant of the moving element
                let (moved, rho) = build_twisted_randomized_with(&s, 500 + k as u64).unwrap();
                let label = sl_class_label(&moved.normalize().unwrap()).unwrap();
                let expect = if rho.det().unwrap() == one { 0 } else { 1 };
                assert_eq!(label.label, expect, "a={:?} b={:?}", s.a, s.b);
            }
            if let Some(scaled) = rescale_to_gamma_one(&w).unwrap() {
                assert_eq!(scaled.space.g.det().unwrap(), one);
                assert!(scaled.validate().passed());
            }
        }
    }
}

#[test]
fn sign_elements_outside_group_rejected() {
    let s = weylwit::block_seq::derive_twisted(&[], &[4, 2]).unwrap();
    let w = build_twisted(&s).unwrap().normalize().unwrap();
    assert!(twisted_sign_element(&w, &[-1, 1]).is_err());
}
