use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weylwit::block_seq::enumerate_iso;
use weylwit::iso_witness::{
    build, build_randomized, isotropic_component, isotropy, negative_det_element, random_isometry, special_isotropy,
    transport,
};
use weylwit::GaussRational;

#[test]
fn build_validate_normalize_up_to_twelve() {
    let mut count = 0;
    for n in 0..=12 {
        for s in enumerate_iso(n) {
            let w = build(&s).unwrap();
            let rep = w.validate();
            assert!(rep.passed(), "{:?}/{:?}: {:?}", s.a, s.b, rep.failures().collect::<Vec<_>>());
            w.normalize().unwrap_or_else(|e| panic!("{:?}/{:?}: {e}", s.a, s.b));
            count += 1;
        }
    }
    assert!(count > 100);
}

#[test]
fn transport_between_random_configurations() {
    for n in 1..=8 {
        for (k, s) in enumerate_iso(n).into_iter().enumerate() {
            let w = build(&s).unwrap().normalize().unwrap();
            let seed = 1000 * n as u64 + k as u64;
            let other = build_randomized(&s, seed).unwrap();
            assert!(other.validate().passed());
            let other = other.normalize().unwrap();
            let gamma = transport(&w, &other).unwrap();
            let image = w.act(&gamma).unwrap();
            assert_eq!(image.g, other.g);
            assert_eq!(image.normalized, other.normalized);

            // moving by ρ and re-normalizing recovers ρ up to a sign element
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_isometry(&w.gram, s.epsilon, &mut rng, 2);
            let mut moved = w.act(&rho).unwrap();
            moved.normalized = None;
            let moved = moved.normalize().unwrap();
            let gamma = transport(&w, &moved).unwrap();
            let correction = rho.inverse().unwrap().dot_mat(&gamma);
            let iso = isotropy(&w).unwrap();
            assert!(iso.elements.iter().any(|e| e.gamma == correction), "{:?}/{:?}", s.a, s.b);
        }
    }
}

#[test]
fn isotropy_matches_sign_group() {
    for n in 0..=9 {
        for s in enumerate_iso(n) {
            let w = build(&s).unwrap().normalize().unwrap();
            let iso = isotropy(&w).unwrap();
            assert!(iso.report.passed(), "{:?}/{:?}: {:?}", s.a, s.b, iso.report.failures().collect::<Vec<_>>());
            assert_eq!(iso.order() as u64, s.sign_group.order());
            assert_eq!(iso.generators.len(), s.sign_group.rank());
            for e in &iso.elements {
                if n % 2 == 0 {
                    assert!(e.det == GaussRational::from_int(1));
                }
            }
        }
    }
}

#[test]
fn component_invariant_under_isotropy() {
    for n in [2, 4, 6, 8] {
        for s in enumerate_iso(n).into_iter().filter(|s| s.epsilon == 1) {
            let w = build(&s).unwrap().normalize().unwrap();
            assert_eq!(isotropic_component(&w).unwrap().label, 0);
            for e in isotropy(&w).unwrap().elements {
                assert_eq!(isotropic_component(&w.act(&e.gamma).unwrap()).unwrap().label, 0);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for steps in 1..=3 {
                let rho = random_isometry(&w.gram, 1, &mut rng, steps);
                let det_negative = rho.det().unwrap() == GaussRational::from_int(-1);
                let label = isotropic_component(&w.act(&rho).unwrap()).unwrap().label;
                assert_eq!(label == 1, det_negative);
            }
        }
    }
}

#[test]
fn refinements() {
    for n in 2..=9 {
        for s in enumerate_iso(n) {
            let w = build(&s).unwrap().normalize().unwrap();
            if s.epsilon == 1 && s.a_at(1) > 0 && s.b_at(1) > 0 {
                let nd = negative_det_element(&w).unwrap();
                let minus_one = GaussRational::from_int(-1);
                assert_eq!((nd.det_plus, nd.det_minus), (minus_one.clone(), minus_one));
            }
            if s.epsilon == 1 && n % 2 == 1 {
                let sp = special_isotropy(&w).unwrap();
                assert!(sp.det_matches);
                assert_eq!(2 * sp.subgroup.len(), sp.full_order);
            }
        }
    }
}
