//! Structural invariants over randomized configurations.

use beamcontact::beam_element::{ElementIntegrator, Material};
use beamcontact::checks::random_element;
use beamcontact::contact::broad_phase::{brute_force_pairs, candidate_pairs, PairRules, SearchElement};
use beamcontact::contact::point::bilateral_contact;
use beamcontact::contact::{line_contact, Candidate, LineSettings, LocalSystem, PenaltyLaw};
use beamcontact::geometry::ElementDofs;
use beamcontact::linalg::Vec3;
use beamcontact::projection::ProjectionSettings;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sum of the position components of a residual made of 12-entry element blocks,
/// together with the largest entry for scaling.
fn net_force(residual: &[f64]) -> (Vec3<f64>, f64) {
    let mut sum = Vec3::zero();
    for block in residual.chunks(12) {
        sum += Vec3::from_slice(&block[0..3]) + Vec3::from_slice(&block[6..9]);
    }
    (sum, residual.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn assert_balanced(sys: &LocalSystem<f64>) -> Result<(), TestCaseError> {
    let (sum, scale) = net_force(&sys.residual);
    prop_assert!(scale > 0.0);
    prop_assert!(sum.norm() < 1e-12 * scale, "net force {:e} vs scale {:e}", sum.norm(), scale);
    Ok(())
}

proptest! {
    #[test]
    fn internal_forces_are_self_equilibrated(seed in any::<u64>(), e_mod in 1.0..1e4f64, radius in 0.01..0.2f64, mcs in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_element(&mut rng, Vec3::zero(), Vec3::new(1.0, 0.2, -0.1), 0.3);
        let v = ElementIntegrator::new(4, mcs).internal(&e, &Material::new(e_mod, radius)).unwrap();
        let (sum, scale) = net_force(&v.residual);
        prop_assert!(sum.norm() < 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn internal_stiffness_is_symmetric(seed in any::<u64>(), e_mod in 1.0..1e4f64, radius in 0.01..0.2f64, mcs in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_element(&mut rng, Vec3::zero(), Vec3::new(0.3, 1.0, 0.2), 0.4);
        let k = ElementIntegrator::new(4, mcs).internal(&e, &Material::new(e_mod, radius)).unwrap().stiffness;
        prop_assert!(k.asymmetry() < 1e-10 * k.max_abs(), "asymmetry {:e}", k.asymmetry() / k.max_abs());
    }

    #[test]
    fn point_contact_obeys_action_reaction(seed in any::<u64>(), angle in 0.3..1.5f64, depth in 0.1..0.9f64, quadratic in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii = 0.02;
        let e1 = random_element(&mut rng, Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0), 0.05);
        let dir = Vec3::new(angle.cos(), angle.sin(), 0.0);
        let c = Vec3::new(0.05, 0.0, depth * radii);
        let e2 = random_element(&mut rng, c - dir.scale(0.5), c + dir.scale(0.5), 0.05);
        let law = if quadratic { PenaltyLaw::Quadratic { epsilon: 100.0, g_bar: 0.005 } } else { PenaltyLaw::Linear { epsilon: 100.0 } };
        let pc = bilateral_contact([0, 1], &e1, &e2, radii, &law, &ProjectionSettings::default()).unwrap();
        if let Some(sys) = pc.and_then(|p| p.system) {
            assert_balanced(&sys)?;
        }
    }

    #[test]
    fn line_contact_obeys_action_reaction(seed in any::<u64>(), start in -0.3..0.8f64, z in 0.01..0.019f64, segmentation in any::<bool>(), intervals in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slave = random_element(&mut rng, Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), 0.02);
        let m1 = random_element(&mut rng, Vec3::new(start, 0.0, z), Vec3::new(start + 0.5, 0.0, z), 0.02);
        let m2 = random_element(&mut rng, m1.nodal[2], m1.nodal[2] + Vec3::new(0.5, 0.0, 0.0), 0.02);
        let cands = [
            Candidate { element: 1, beam: 1, dofs: &m1, beam_start: true, beam_end: false },
            Candidate { element: 2, beam: 1, dofs: &m2, beam_start: false, beam_end: true },
        ];
        let settings = LineSettings { intervals, segmentation, ..LineSettings::default() };
        let res = line_contact(0, &slave, &cands, 0.02, &PenaltyLaw::Quadratic { epsilon: 1e3, g_bar: 0.002 }, &settings);
        if let Some(sys) = res.system {
            assert_balanced(&sys)?;
        }
    }
}

/// Hexagonal bundle of 37 perturbed fibers along z, four elements each.
fn bundle(seed: u64, spacing: f64) -> Vec<(usize, usize, ElementDofs<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::new();
    for q in -3i32..=3 {
        for r in -3i32..=3 {
            if (q + r).abs() <= 3 {
                centers.push((spacing * (q as f64 + 0.5 * r as f64), spacing * 0.75f64.sqrt() * r as f64));
            }
        }
    }
    assert_eq!(centers.len(), 37);
    let mut out = Vec::new();
    for (b, (x, y)) in centers.into_iter().enumerate() {
        for k in 0..4 {
            let a = Vec3::new(x, y, 0.25 * k as f64);
            let e = random_element(&mut rng, a, a + Vec3::new(0.0, 0.0, 0.25), 0.05);
            out.push((b, k, e));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn broad_phase_matches_brute_force_on_bundle(seed in any::<u64>(), spacing in 0.015..0.05f64, radius in 0.01..0.06f64) {
        let fibers = bundle(seed, spacing);
        let els: Vec<SearchElement<f64>> = fibers.iter().map(|(b, k, e)| SearchElement { beam: *b, index: *k, dofs: e }).collect();
        let rules = PairRules::default();
        let pairs = candidate_pairs(&els, radius, &rules);
        prop_assert_eq!(&pairs, &brute_force_pairs(&els, radius, &rules));
        // Every pair of different fibers whose sampled centerlines come closer than the
        // search radius must be a candidate.
        let samples: Vec<Vec<Vec3<f64>>> = fibers.iter().map(|(_, _, e)| (0..=10).map(|i| e.position(-1.0 + 0.2 * i as f64)).collect()).collect();
        for i in 0..els.len() {
            for j in i + 1..els.len() {
                if els[i].beam == els[j].beam {
                    continue;
                }
                let close = samples[i].iter().any(|p| samples[j].iter().any(|q| (*p - *q).norm() < radius));
                if close {
                    prop_assert!(pairs.binary_search(&(i, j)).is_ok(), "missing pair ({}, {})", i, j);
                }
            }
        }
    }
}
