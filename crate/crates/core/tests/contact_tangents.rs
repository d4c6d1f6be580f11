//! Finite-difference verification of the contact tangents.

use beamcontact::contact::line::{line_contact, Candidate, LineSettings};
use beamcontact::contact::point::{bilateral_contact, endpoint_to_endpoint, endpoint_to_line, LineTarget};
use beamcontact::contact::{LocalSystem, PenaltyLaw};
use beamcontact::geometry::ElementDofs;
use beamcontact::linalg::{DMatrix, Vec3};
use beamcontact::oracles::fd_tangent_check;
use beamcontact::projection::ProjectionSettings;

fn scatter(sys: Option<LocalSystem<f64>>, elements: &[usize], n_blocks: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = 12 * n_blocks;
    let mut r = vec![0.0; n];
    let mut k = DMatrix::zeros(n, n);
    if let Some(s) = sys {
        for (a, &ea) in elements.iter().enumerate() {
            for i in 0..12 {
                r[12 * ea + i] += s.residual[12 * a + i];
                for (b, &eb) in elements.iter().enumerate() {
                    for j in 0..12 {
                        k[(12 * ea + i, 12 * eb + j)] += s.stiffness[(12 * a + i, 12 * b + j)];
                    }
                }
            }
        }
    }
    (r, k)
}

fn curved(a: [f64; 3], ta: [f64; 3], b: [f64; 3], tb: [f64; 3], l: f64) -> ElementDofs<f64> {
    ElementDofs::new(Vec3(a), Vec3(ta), Vec3(b), Vec3(tb), l)
}

fn elem(x: &[f64], i: usize, l: f64) -> ElementDofs<f64> {
    ElementDofs::from_slice(&x[12 * i..12 * i + 12], l)
}

#[test]
fn line_contact_tangent_with_moving_boundary() {
    let slave = curved([0.0, 0.0, 0.0], [1.0, 0.02, 0.01], [1.0, 0.01, 0.0], [1.0, -0.03, 0.02], 1.0);
    // Master beam of two elements; its start lies above the slave interior.
    let m1 = curved([0.31, 0.003, 0.017], [0.999, 0.01, 0.03], [0.8, -0.002, 0.0185], [1.0, 0.0, -0.01], 0.49);
    let m2 = curved([0.8, -0.002, 0.0185], [1.0, 0.0, -0.01], [1.3, 0.004, 0.02], [1.0, 0.02, 0.0], 0.5);
    let mut x = slave.to_vec();
    x.extend(m1.to_vec());
    x.extend(m2.to_vec());
    for law in [PenaltyLaw::Linear { epsilon: 1e3 }, PenaltyLaw::Quadratic { epsilon: 1e3, g_bar: 0.002 }] {
        for segmentation in [false, true] {
            let settings = LineSettings { intervals: 2, gauss_points: 5, segmentation, ..LineSettings::default() };
            let eval = |x: &[f64]| -> Result<_, ()> {
                let (s, a, b) = (elem(x, 0, 1.0), elem(x, 1, 0.49), elem(x, 2, 0.5));
                let cands = [
                    Candidate { element: 1, beam: 1, dofs: &a, beam_start: true, beam_end: false },
                    Candidate { element: 2, beam: 1, dofs: &b, beam_start: false, beam_end: true },
                ];
                let res = line_contact(0, &s, &cands, 0.02, &law, &settings);
                Ok(scatter(res.system, &res.elements, 3))
            };
            let (r, _) = eval(&x).unwrap();
            assert!(r.iter().any(|v| v.abs() > 0.0));
            let rep = fd_tangent_check(&x, 1e-7, eval).unwrap();
            assert!(rep.passes(1e-6), "seg={segmentation} {law:?} {rep:?}");
        }
    }
}

#[test]
fn point_contact_tangents() {
    let e1 = curved([-0.5, 0.0, 0.0], [1.0, 0.1, 0.05], [0.5, 0.05, 0.0], [1.0, -0.1, 0.0], 1.0);
    let e2 = curved([0.05, -0.5, 0.017], [0.1, 1.0, 0.0], [0.0, 0.5, 0.016], [-0.05, 1.0, 0.02], 1.0);
    let mut x = e1.to_vec();
    x.extend(e2.to_vec());
    let law = PenaltyLaw::Quadratic { epsilon: 50.0, g_bar: 0.004 };
    let ps = ProjectionSettings::default();
    let eval = |x: &[f64]| -> Result<_, ()> {
        let pc = bilateral_contact([0, 1], &elem(x, 0, 1.0), &elem(x, 1, 1.0), 0.02, &law, &ps).unwrap().unwrap();
        Ok(scatter(pc.system, &[0, 1], 2))
    };
    let rep = fd_tangent_check(&x, 1e-7, eval).unwrap();
    assert!(rep.passes(1e-6), "{rep:?}");
}

#[test]
fn endpoint_tangents() {
    // Beam A ends near the side of beam B.
    let a = curved([-1.0, 0.0, 0.0], [1.0, 0.05, 0.1], [0.0, 0.0, 0.0], [1.0, 0.1, 0.2], 1.0);
    let b = curved([-0.04, -0.5, 0.012], [0.1, 1.0, 0.0], [0.0, 0.5, 0.018], [-0.1, 1.0, 0.05], 1.0);
    let mut x = a.to_vec();
    x.extend(b.to_vec());
    let law = PenaltyLaw::Linear { epsilon: 100.0 };
    let ps = ProjectionSettings::default();
    let eval = |x: &[f64]| -> Result<_, ()> {
        let (ea, eb) = (elem(x, 0, 1.0), elem(x, 1, 1.0));
        let t = [LineTarget { element: 1, dofs: &eb, physical_ends: [None, None] }];
        let pc = endpoint_to_line(0, &ea, 1.0, &t, 0.02, &law, &ps).unwrap();
        assert!(pc.force > 0.0);
        Ok(scatter(pc.system, &pc.elements, 2))
    };
    let rep = fd_tangent_check(&x, 1e-7, eval).unwrap();
    assert!(rep.passes(1e-6), "{rep:?}");

    let c = curved([0.005, 0.0, 0.015], [0.3, 0.1, 1.0], [0.1, 0.1, 1.0], [0.2, 0.0, 1.0], 1.0);
    let mut y = a.to_vec();
    y.extend(c.to_vec());
    let eval2 = |x: &[f64]| -> Result<_, ()> {
        let pc = endpoint_to_endpoint([0, 1], &elem(x, 0, 1.0), 1.0, &elem(x, 1, 1.0), -1.0, 0.02, &law);
        assert!(pc.force > 0.0);
        Ok(scatter(pc.system, &[0, 1], 2))
    };
    let rep = fd_tangent_check(&y, 1e-7, eval2).unwrap();
    assert!(rep.passes(1e-6), "{rep:?}");
}
