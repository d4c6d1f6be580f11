//! Benchmark scenario builders.
//!
//! The shipped JSON files under `scenarios/` are produced by these functions.

use crate::model::Formulation;
use crate::oracles::HelixReference;
use crate::scenario::{
    ActionSpec, BeamSpec, Component, ContactSpec, DirichletSpec, ElementSpec, FixedSpec, LawSpec, LineLoadSpec, LoadsSpec, NodalLoadSpec,
    NodeName, NodeSelector, NodeTarget, OutputSpec, ReactionSpec, ReferenceSpec, Scenario, SolverSpec, StageSpec,
};

const START: NodeSelector = NodeSelector::Named(NodeName::Start);
const END: NodeSelector = NodeSelector::Named(NodeName::End);
const ALL: NodeSelector = NodeSelector::Named(NodeName::All);

fn fix(beam: usize, node: NodeSelector, components: &[Component]) -> FixedSpec {
    FixedSpec { beam, node, components: components.to_vec() }
}

fn beam(start: [f64; 3], end: [f64; 3], elements: usize, youngs_modulus: f64, radius: f64) -> BeamSpec {
    BeamSpec { start, end, elements, element_lengths: None, youngs_modulus, radius, density: 0.0 }
}

fn blank(name: &str, description: &str, beams: Vec<BeamSpec>) -> Scenario {
    Scenario {
        name: name.into(),
        description: Some(description.into()),
        beams,
        element: ElementSpec::default(),
        contact: ContactSpec::default(),
        loads: LoadsSpec::default(),
        dirichlet: DirichletSpec::default(),
        solver: SolverSpec::default(),
        reactions: Vec::new(),
        reference: None,
        output: OutputSpec::default(),
    }
}

/// Line-load penalty and the resulting constant gap of the sliding patch test.
pub const PATCH_EPSILON: f64 = 500.0;
pub const PATCH_LOAD: f64 = 1.0;
pub const PATCH_RADIUS: f64 = 0.005;

/// A two-element beam pressed by a uniform line load onto a fixed three-element beam
/// and pulled along it; `gauss_points` per interval, three intervals per element.
pub fn patch_test(gauss_points: usize, segmentation: bool) -> Scenario {
    let r = PATCH_RADIUS;
    let z = 2.0 * r - PATCH_LOAD / PATCH_EPSILON;
    let mut rigid = beam([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], 3, 1.0e9, r);
    rigid.element_lengths = Some(vec![0.6, 0.9, 0.5]);
    let mut sc = blank(
        if segmentation { "patch_test" } else { "patch_test_unsegmented" },
        "Deformable beam sliding on a fixed beam under a uniform line load; constant-gap solution",
        vec![rigid, beam([0.1, 0.0, z], [0.9, 0.0, z], 2, 1.0e9, r)],
    );
    sc.contact = ContactSpec {
        formulation: Formulation::Line,
        law: Some(LawSpec::Linear { epsilon: PATCH_EPSILON }),
        intervals: 3,
        gauss_points,
        segmentation,
        ..ContactSpec::default()
    };
    sc.loads.line.push(LineLoadSpec { beam: 1, force: [0.0, 0.0, -PATCH_LOAD], moment: [0.0; 3] });
    sc.dirichlet.fixed = vec![fix(0, ALL, &Component::ALL), fix(1, START, &[Component::X, Component::Y, Component::Ty])];
    sc.dirichlet.stages.push(StageSpec {
        steps: 100,
        actions: vec![ActionSpec::Translate { targets: vec![NodeTarget::start(1)], delta: [1.001, 0.0, 0.0] }],
    });
    sc.reference = Some(ReferenceSpec::Patch { line_load: PATCH_LOAD, epsilon: PATCH_EPSILON });
    sc.output.every = 10;
    sc
}

/// Parameters of the analytically solvable twisted pair.
pub fn helix_parameters() -> HelixReference {
    HelixReference { radius: 0.01, length: 5.0, youngs_modulus: 1.0e9, gap: -0.001, strain: 0.01 }
}

fn twisting_pair(half_distance: f64, elements: usize, z_shift: f64) -> Vec<BeamSpec> {
    let h = helix_parameters();
    vec![
        beam([half_distance, 0.0, 0.0], [half_distance, 0.0, h.length], elements, h.youngs_modulus, h.radius),
        beam([-half_distance, 0.0, z_shift], [-half_distance, 0.0, h.length + z_shift], elements, h.youngs_modulus, h.radius),
    ]
}

fn twist_action(turns: f64) -> ActionSpec {
    ActionSpec::Rotate { targets: vec![NodeTarget::end(0), NodeTarget::end(1)], center: [0.0; 3], axis: [0.0, 0.0, 1.0], turns }
}

/// Two parallel beams pre-stretched and twisted by one turn into a double helix with
/// constant penetration; the exact solution is known.
pub fn twisting_helix(elements: usize, gauss_points: usize) -> Scenario {
    let h = helix_parameters();
    let mut sc = blank(
        "twisting_helix",
        "Two parallel beams twisted into a double helix with constant gap; analytical reference",
        twisting_pair(h.helix_radius(), elements, 0.0),
    );
    sc.contact = ContactSpec {
        formulation: Formulation::Line,
        law: Some(LawSpec::Linear { epsilon: h.penalty_parameter() }),
        gauss_points,
        ..ContactSpec::default()
    };
    let ends = [Component::X, Component::Y, Component::Z, Component::Tx];
    sc.dirichlet.fixed = (0..2).flat_map(|b| [fix(b, START, &ends), fix(b, END, &ends)]).collect();
    sc.dirichlet.stages = vec![
        StageSpec {
            steps: 1,
            actions: vec![ActionSpec::Translate {
                targets: vec![NodeTarget::end(0), NodeTarget::end(1)],
                delta: [0.0, 0.0, h.end_displacement()],
            }],
        },
        StageSpec { steps: 8, actions: vec![twist_action(1.0)] },
    ];
    // The initial penetration is only resolved together with the pre-stretch.
    sc.solver.initial_equilibrium = false;
    // Large trial increments otherwise pull the centerlines through each other mid-twist.
    sc.solver.max_position_increment = Some(0.1 * h.radius);
    sc.reference = Some(ReferenceSpec::Helix {
        radius: h.radius,
        length: h.length,
        youngs_modulus: h.youngs_modulus,
        gap: h.gap,
        strain: h.strain,
    });
    sc.output.every = 8;
    sc
}

/// Regularization gap of the smoothed law used by the separated twisting runs.
pub const SMOOTHING_GAP: f64 = 0.001;

fn clamped_twist(sc: &mut Scenario) {
    let ends = [Component::X, Component::Y, Component::Z, Component::Tx, Component::Ty];
    sc.dirichlet.fixed = (0..2).flat_map(|b| [fix(b, START, &ends), fix(b, END, &ends)]).collect();
    sc.solver.max_position_increment = Some(0.1 * helix_parameters().radius);
}

/// Two clamped beams at larger distance twisted by one turn; the gap changes sign
/// along the beams.
pub fn twisting_separated(elements: usize, smoothed: bool) -> Scenario {
    let law = if smoothed {
        LawSpec::Quadratic { epsilon: 1000.0, g_bar: SMOOTHING_GAP }
    } else {
        LawSpec::Linear { epsilon: 1000.0 }
    };
    let mut sc = blank(
        if smoothed { "twisting_separated_smoothed" } else { "twisting_separated_linear" },
        "Two clamped beams at distance 4R twisted by one turn; contact vanishes towards the ends",
        twisting_pair(0.02, elements, 0.0),
    );
    sc.contact = ContactSpec { formulation: Formulation::Line, law: Some(law), ..ContactSpec::default() };
    clamped_twist(&mut sc);
    sc.dirichlet.stages = vec![StageSpec { steps: 8, actions: vec![twist_action(1.0)] }];
    sc.output.every = 8;
    sc
}

/// Inward shift of the fixed ends; leaves a gap of -0.004 where the second beam ends.
pub const OFFSET_PUSH: f64 = 0.012;

/// Twisted pair with axially offset ends whose fixed ends are pushed across each other,
/// so the contact force jumps at the end of the second beam.
pub fn twisting_offset_ends(elements: usize, segmentation: bool, intervals: usize) -> Scenario {
    let mut sc = blank(
        if segmentation { "twisting_offset_ends" } else { "twisting_offset_ends_unsegmented" },
        "Twisted pair with axially offset ends; force jump where the second beam ends",
        twisting_pair(0.02, elements, 0.02),
    );
    sc.contact = ContactSpec {
        formulation: Formulation::Line,
        law: Some(LawSpec::Quadratic { epsilon: 1000.0, g_bar: SMOOTHING_GAP }),
        intervals,
        segmentation,
        ..ContactSpec::default()
    };
    clamped_twist(&mut sc);
    sc.dirichlet.stages = vec![StageSpec {
        steps: 8,
        actions: vec![
            ActionSpec::Translate { targets: vec![NodeTarget::start(0)], delta: [-OFFSET_PUSH, 0.0, 0.0] },
            ActionSpec::Translate { targets: vec![NodeTarget::start(1)], delta: [OFFSET_PUSH, 0.0, 0.0] },
            twist_action(1.0),
        ],
    }];
    sc.output.every = 8;
    sc
}

/// Fiber centers of a rope made of three sub-bundles of three fibers, returned per
/// sub-bundle together with the sub-bundle centers.
pub fn rope_layout(radius: f64, g_bar: f64) -> Vec<([f64; 2], Vec<[f64; 2]>)> {
    let pitch = 2.0 * radius + 0.5 * g_bar;
    let fiber_circle = pitch / 3f64.sqrt();
    let bundle_pitch = 2.0 * (fiber_circle + radius) + 0.5 * g_bar;
    let bundle_circle = bundle_pitch / 3f64.sqrt();
    let at = |r: f64, deg: f64| [r * deg.to_radians().cos(), r * deg.to_radians().sin()];
    (0..3)
        .map(|j| {
            let angle = 90.0 + 120.0 * j as f64;
            let c = at(bundle_circle, angle);
            let fibers = (0..3)
                .map(|k| {
                    let o = at(fiber_circle, angle + 180.0 + 120.0 * k as f64);
                    [c[0] + o[0], c[1] + o[1]]
                })
                .collect();
            (c, fibers)
        })
        .collect()
}

/// Reduced rope: three sub-bundles of three fibers, each sub-bundle twisted by one
/// turn, then the whole rope by one turn, under axial tension.
pub fn rope_reduced() -> Scenario {
    let (r, e, l, g_bar) = (0.01, 1.0e9, 5.0, 0.001);
    let layout = rope_layout(r, g_bar);
    let beams = layout.iter().flat_map(|(_, f)| f.iter().map(|p| beam([p[0], p[1], 0.0], [p[0], p[1], l], 10, e, r))).collect();
    let mut sc = blank("rope_reduced", "Three sub-bundles of three fibers twisted in two stages under axial tension", beams);
    let n = sc.beams.len();
    sc.contact = ContactSpec {
        formulation: Formulation::LineWithEndpoints,
        law: Some(LawSpec::Quadratic { epsilon: 5.0e5, g_bar }),
        intervals: 7,
        ..ContactSpec::default()
    };
    sc.dirichlet.fixed = (0..n).flat_map(|b| [fix(b, START, &Component::POSITION), fix(b, END, &[Component::X, Component::Y])]).collect();
    sc.loads.nodal = (0..n).map(|b| NodalLoadSpec { target: NodeTarget::end(b), force: [0.0, 0.0, 1000.0], moment: [0.0; 3] }).collect();
    let stage1 = layout
        .iter()
        .enumerate()
        .map(|(j, (c, _))| ActionSpec::Rotate {
            targets: (3 * j..3 * j + 3).map(NodeTarget::start).collect(),
            center: [c[0], c[1], 0.0],
            axis: [0.0, 0.0, 1.0],
            turns: 1.0,
        })
        .collect();
    let stage2 = vec![ActionSpec::Rotate {
        targets: (0..n).map(NodeTarget::start).collect(),
        center: [0.0; 3],
        axis: [0.0, 0.0, 1.0],
        turns: 1.0,
    }];
    sc.dirichlet.stages = vec![StageSpec { steps: 20, actions: stage1 }, StageSpec { steps: 20, actions: stage2 }];
    sc.solver.max_position_increment = Some(0.1 * r);
    sc.reactions.push(ReactionSpec { name: "front".into(), targets: (0..n).map(NodeTarget::start).collect(), center: [0.0; 3], axis: [0.0, 0.0, 1.0] });
    sc.output.every = 10;
    sc
}

/// Initial clearance and total push of the junction scene.
pub const JUNCTION_CLEARANCE: f64 = 0.002;
pub const JUNCTION_PUSH: f64 = 0.03;

/// The tip of a clamped single-element beam is pushed into the side of a compliant
/// clamped beam; only an end-cap contact can resist the tip.
pub fn endpoint_junction(endpoints: bool) -> Scenario {
    let r = 0.01;
    let tip = -(2.0 * r + JUNCTION_CLEARANCE);
    let mut sc = blank(
        if endpoints { "endpoint_junction" } else { "endpoint_junction_no_caps" },
        "Beam tip pushed into the side of a compliant beam",
        vec![beam([tip - 0.5, 0.0, 0.0], [tip, 0.0, 0.0], 1, 1.0e9, r), beam([0.0, -0.4, 0.0], [0.0, 0.6, 0.0], 3, 1.0e7, r)],
    );
    let law = LawSpec::Linear { epsilon: 1.0e4 };
    sc.contact = ContactSpec {
        formulation: if endpoints { Formulation::LineWithEndpoints } else { Formulation::Line },
        law: Some(law),
        endpoint_law: Some(law),
        ..ContactSpec::default()
    };
    sc.dirichlet.fixed = vec![fix(0, START, &Component::ALL), fix(1, START, &Component::ALL), fix(1, END, &Component::ALL)];
    sc.dirichlet.stages = vec![StageSpec {
        steps: 10,
        actions: vec![ActionSpec::Translate { targets: vec![NodeTarget::start(0)], delta: [JUNCTION_PUSH, 0.0, 0.0] }],
    }];
    sc
}

/// Overlap of the junction tip cap with the side of the second beam (positive when
/// penetrating), measured along the push direction.
pub fn junction_overlap(mesh: &crate::model::Mesh<f64>, state: &[f64]) -> f64 {
    let tip = mesh.node_position(mesh.node(0, crate::model::NodeRef::End).expect("junction beam"), state);
    let side = mesh.position(1, 0.4 + tip[1], state);
    let (ra, rb) = (mesh.beams[0].material.radius, mesh.beams[1].material.radius);
    tip[0] + ra - (side[0] - rb)
}

/// All shipped scenarios, by file stem.
pub fn shipped() -> Vec<(&'static str, Scenario)> {
    vec![
        ("patch_test", patch_test(5, true)),
        ("patch_test_unsegmented", patch_test(5, false)),
        ("twisting_helix", twisting_helix(16, 5)),
        ("twisting_separated_smoothed", twisting_separated(16, true)),
        ("twisting_separated_linear", twisting_separated(16, false)),
        ("twisting_offset_ends", twisting_offset_ends(16, true, 2)),
        ("twisting_offset_ends_unsegmented", twisting_offset_ends(16, false, 2)),
        ("rope_reduced", rope_reduced()),
        ("endpoint_junction", endpoint_junction(true)),
        ("endpoint_junction_no_caps", endpoint_junction(false)),
    ]
}

