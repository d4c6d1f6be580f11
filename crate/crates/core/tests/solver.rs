//! Global assembly and Newton driver checks on small meshes.

use beamcontact::assembly::{assemble, dense_tangent};
use beamcontact::beam_element::Material;
use beamcontact::contact::PenaltyLaw;
use beamcontact::dirichlet::{Action, DirichletSchedule, Stage};
use beamcontact::linalg::Vec3;
use beamcontact::model::{ContactConfig, Formulation, Mesh, Model, NodalLoad, NodeRef};
use beamcontact::oracles::fd_tangent_check;
use beamcontact::solver::{newton, run, strain_energy, DriverSettings, Newmark, NewtonSettings, ReactionGroup};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cantilever(elements: usize, tip: Vec3<f64>) -> (Model<f64>, DirichletSchedule<f64>) {
    let mut mesh = Mesh::new();
    let mat = Material::new(2.0e5, 0.01);
    mesh.add_straight_beam(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), &vec![1.0; elements], mat).unwrap();
    let tip_node = mesh.node(0, NodeRef::End).unwrap();
    let mut model = Model::new(mesh);
    model.loads.nodal.push(NodalLoad { node: tip_node, force: tip, moment: Vec3::zero() });
    let mut schedule = DirichletSchedule::new();
    schedule.constrain(0, &[0, 1, 2, 3, 4, 5]);
    (model, schedule)
}

#[test]
fn undeformed_mesh_has_zero_residual() {
    let (mut model, _) = cantilever(3, Vec3::zero());
    model.loads.nodal.clear();
    let asm = assemble(&model, &model.mesh.reference, 1.0).unwrap();
    let max = asm.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max < 1e-14, "{max}");
}

#[test]
fn small_tip_load_matches_linear_beam_theory() {
    let p = 1e-4;
    let (model, schedule) = cantilever(4, Vec3::new(0.0, 0.0, -p));
    let mut state = model.mesh.reference.clone();
    let res = newton(&model, &schedule, &mut state, 0.0, 1.0, &NewtonSettings::default()).unwrap();
    let ei = model.mesh.beams[0].material.bending_stiffness();
    let expected = p / (3.0 * ei);
    let tip = model.mesh.node_position(model.mesh.node(0, NodeRef::End).unwrap(), &state);
    assert!((tip[2] + expected).abs() < 1e-3 * expected, "{} vs {}", tip[2], -expected);
    assert!(res.history.len() <= 4, "{:?}", res.history);
}

#[test]
fn newton_converges_quadratically() {
    let (model, schedule) = cantilever(6, Vec3::new(0.0, 0.3, -0.5));
    let mut state = model.mesh.reference.clone();
    let settings = NewtonSettings { residual_tolerance: 1e-11, increment_tolerance: 1e-11, ..NewtonSettings::default() };
    let res = newton(&model, &schedule, &mut state, 0.0, 1.0, &settings).unwrap();
    let r: Vec<f64> = res.history.iter().map(|h| h.residual).filter(|r| *r > 1e-12).collect();
    assert!(r.len() >= 3, "{r:?}");
    let n = r.len();
    let order = (r[n - 1] / r[n - 2]).ln() / (r[n - 2] / r[n - 3]).ln();
    assert!(order > 1.7, "order {order}, residuals {r:?}");
}

fn contact_pair() -> Model<f64> {
    let mut mesh = Mesh::new();
    let mat = Material::new(1.0e4, 0.01);
    mesh.add_straight_beam(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), &[1.0, 1.0], mat).unwrap();
    mesh.add_straight_beam(Vec3::new(0.3, 0.001, 0.0195), Vec3::new(1.3, -0.002, 0.0192), &[1.0, 1.2], mat).unwrap();
    let mut model = Model::new(mesh);
    model.contact = ContactConfig {
        formulation: Formulation::LineWithEndpoints,
        law: PenaltyLaw::Quadratic { epsilon: 1e3, g_bar: 0.002 },
        point_law: PenaltyLaw::Linear { epsilon: 10.0 },
        ..ContactConfig::none()
    };
    model
}

#[test]
fn global_tangent_matches_finite_differences() {
    let model = contact_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut x = model.mesh.reference.clone();
    for v in x.iter_mut() {
        *v += rng.random_range(-2e-4..2e-4);
    }
    let asm = assemble(&model, &x, 1.0).unwrap();
    assert!(asm.contact.active_line_points() > 0);
    let eval = |y: &[f64]| {
        let a = assemble(&model, y, 1.0)?;
        Ok::<_, beamcontact::error::SolverError>((a.residual.clone(), dense_tangent(&a)))
    };
    let rep = fd_tangent_check(&x, 1e-7, eval).unwrap();
    assert!(rep.passes(1e-5), "{rep:?}");
}

#[test]
fn assembly_is_identical_across_thread_counts() {
    let model = contact_pair();
    let go = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| assemble(&model, &model.mesh.reference, 1.0).unwrap())
    };
    let (a, b) = (go(1), go(4));
    assert_eq!(a.residual, b.residual);
    assert_eq!(dense_tangent(&a).as_slice(), dense_tangent(&b).as_slice());
}

#[test]
fn zero_increment_schedule_keeps_state() {
    let (model, mut schedule) = cantilever(2, Vec3::zero());
    schedule.stages.push(Stage { steps: 3, actions: vec![Action::Translate { nodes: vec![0], delta: Vec3::zero() }] });
    let mut state = model.mesh.reference.clone();
    let mut states = Vec::new();
    run(&model, &schedule, &DriverSettings::default(), &mut state, |_, s| states.push(s.to_vec())).unwrap();
    assert_eq!(states.len(), 4);
    assert!(states.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn reactions_balance_applied_load() {
    let load = Vec3::new(0.0, 1e-3, -2e-3);
    let (model, schedule) = cantilever(4, load);
    let settings = DriverSettings {
        reactions: vec![ReactionGroup { name: "root".into(), nodes: vec![0], center: Vec3::zero(), axis: Vec3::unit(0) }],
        ..DriverSettings::default()
    };
    let mut state = model.mesh.reference.clone();
    let recs = run(&model, &schedule, &settings, &mut state, |_, _| {}).unwrap();
    let r = &recs[0].reactions[0];
    for i in 0..3 {
        assert!((r.force[i] + load[i]).abs() < 1e-9, "{:?}", r.force);
    }
    // Moment balance about the root: the tip force acts at the deformed tip position.
    let tip = model.mesh.node_position(model.mesh.node(0, NodeRef::End).unwrap(), &state);
    let m_load = tip.cross(&load);
    for i in 0..3 {
        assert!((r.moment[i] + m_load[i]).abs() < 1e-8, "{:?} vs {:?}", r.moment, m_load);
    }
}

#[test]
fn newmark_conserves_energy_of_free_vibration() {
    let (mut model, schedule) = cantilever(4, Vec3::new(0.0, 0.0, -1e-3));
    model.mesh.beams[0].material.density = 1.0;
    let mut d0 = model.mesh.reference.clone();
    newton(&model, &schedule, &mut d0, 0.0, 1.0, &NewtonSettings::default()).unwrap();
    model.loads.nodal.clear();
    let v0 = vec![0.0; d0.len()];
    let e0 = strain_energy(&model, &d0).unwrap();
    let mut nm = Newmark::new(&model, &schedule, 2e-3, d0, v0).unwrap();
    let settings = NewtonSettings { residual_tolerance: 1e-12, increment_tolerance: 1e-12, ..NewtonSettings::default() };
    let mut moved = false;
    for _ in 0..40 {
        nm.step(&model, &schedule, &settings).unwrap();
        let e = strain_energy(&model, &nm.displacement).unwrap() + nm.kinetic_energy(&model);
        assert!((e - e0).abs() < 1e-2 * e0, "energy {e} vs {e0}");
        moved |= nm.kinetic_energy(&model) > 0.1 * e0;
    }
    assert!(moved);
}
