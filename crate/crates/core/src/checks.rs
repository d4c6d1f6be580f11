//! Randomized verification suites: analytic tangents against central differences,
//! force balance and stiffness symmetry, bilateral projections against the brute-force
//! search, and Hermite shape identities.
//!
//! Every trial draws from its own ChaCha stream, so reports depend only on the seed.

use crate::beam_element::{ElementIntegrator, Material};
use crate::contact::point::{bilateral_contact, endpoint_to_endpoint, endpoint_to_line, LineTarget};
use crate::contact::{line_contact, Candidate, LineSettings, LocalSystem, PenaltyLaw};
use crate::geometry::{hermite_basis, ElementDofs};
use crate::linalg::{DMatrix, Vec3};
use crate::oracles::{fd_tangent_check, grid_closest_points, FdReport};
use crate::projection::{bilateral, ProjectionSettings};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TANGENT_TOLERANCE: f64 = 1e-4;
pub const PROJECTION_TOLERANCE: f64 = 1e-6;
pub const SHAPE_TOLERANCE: f64 = 1e-8;
/// Net force relative to the largest residual entry.
pub const BALANCE_TOLERANCE: f64 = 1e-12;
/// Asymmetry relative to the largest stiffness entry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Finite-difference step, scaled per unknown by `1 + |x_i|`.
pub const FD_STEP: f64 = 1e-6;

/// Outcome of one randomized trial: error measure and where it was largest.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub error: f64,
    pub location: String,
}

/// Summary of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// Trials whose random configuration was rejected (for example no active contact).
    pub skipped: usize,
    pub failures: usize,
    pub tolerance: f64,
    pub worst_error: f64,
    pub worst_trial: Option<usize>,
    pub worst_location: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.skipped < self.trials
    }

    pub fn evaluated(&self) -> usize {
        self.trials - self.skipped
    }
}

fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Run `trial` on `trials` independent random streams. `None` marks a rejected configuration.
pub fn run_suite(
    name: &str,
    trials: usize,
    seed: u64,
    tolerance: f64,
    trial: impl Fn(&mut ChaCha8Rng) -> Option<TrialOutcome> + Sync,
) -> CheckReport {
    let outcomes: Vec<Option<TrialOutcome>> = (0..trials).into_par_iter().map(|i| trial(&mut trial_rng(seed, i))).collect();
    let mut report = CheckReport {
        name: name.to_string(),
        trials,
        skipped: 0,
        failures: 0,
        tolerance,
        worst_error: 0.0,
        worst_trial: None,
        worst_location: None,
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        let Some(o) = o else {
            report.skipped += 1;
            continue;
        };
        // NaN counts as a failure.
        if !(o.error <= tolerance) {
            report.failures += 1;
        }
        if report.worst_trial.is_none() || !(o.error <= report.worst_error) {
            report.worst_error = o.error;
            report.worst_trial = Some(i);
            report.worst_location = Some(o.location);
        }
    }
    report
}

fn fd_outcome(rep: FdReport) -> TrialOutcome {
    TrialOutcome { error: rep.relative_error, location: format!("entry ({}, {})", rep.worst_entry.0, rep.worst_entry.1) }
}

fn jitter(rng: &mut ChaCha8Rng, amplitude: f64) -> Vec3<f64> {
    Vec3::new(
        rng.random_range(-amplitude..amplitude),
        rng.random_range(-amplitude..amplitude),
        rng.random_range(-amplitude..amplitude),
    )
}

/// Mildly curved element from `a` to `b` with perturbed nodal tangents.
pub fn random_element(rng: &mut ChaCha8Rng, a: Vec3<f64>, b: Vec3<f64>, wiggle: f64) -> ElementDofs<f64> {
    let chord = b - a;
    let length = chord.norm();
    let dir = chord.scale(1.0 / length);
    let stretch = 1.0 + rng.random_range(-0.01..0.01);
    let t1 = (dir + jitter(rng, wiggle)).scale(stretch);
    let t2 = (dir + jitter(rng, wiggle)).scale(stretch);
    ElementDofs::new(a, t1, b + jitter(rng, 0.1 * wiggle * length), t2, length)
}

fn random_law(rng: &mut ChaCha8Rng, epsilon: f64, g_bar: f64) -> PenaltyLaw<f64> {
    if rng.random_bool(0.5) {
        PenaltyLaw::Linear { epsilon }
    } else {
        PenaltyLaw::Quadratic { epsilon, g_bar }
    }
}

fn elem(x: &[f64], i: usize, lengths: &[f64]) -> ElementDofs<f64> {
    ElementDofs::from_slice(&x[12 * i..12 * i + 12], lengths[i])
}

fn stack(elements: &[ElementDofs<f64>]) -> Vec<f64> {
    elements.iter().flat_map(|e| e.to_vec()).collect()
}

/// Scatter a local contact system whose blocks belong to `elements` into `blocks` element slots.
fn scatter(sys: Option<&LocalSystem<f64>>, elements: &[usize], blocks: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = 12 * blocks;
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

/// Residual and tangent of a configuration stacked from 12-dof element blocks.
type Evaluator = Box<dyn Fn(&[f64]) -> Result<(Vec<f64>, DMatrix<f64>), ()> + Sync>;

/// Random configuration together with its residual/tangent evaluator.
pub struct Case {
    pub x: Vec<f64>,
    eval: Evaluator,
}

impl Case {
    pub fn evaluate(&self, x: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        (self.eval)(x).ok()
    }
}

/// Kinds of randomized configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Element,
    Point,
    Line,
    Endpoint(EndpointCase),
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [
        CaseKind::Element,
        CaseKind::Point,
        CaseKind::Line,
        CaseKind::Endpoint(EndpointCase::FirstEndToLine),
        CaseKind::Endpoint(EndpointCase::SecondEndToLine),
        CaseKind::Endpoint(EndpointCase::EndToEnd),
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Element => "element",
            CaseKind::Point => "point_contact",
            CaseKind::Line => "line_contact",
            CaseKind::Endpoint(EndpointCase::FirstEndToLine) => "endpoint_to_line_first",
            CaseKind::Endpoint(EndpointCase::SecondEndToLine) => "endpoint_to_line_second",
            CaseKind::Endpoint(EndpointCase::EndToEnd) => "endpoint_to_endpoint",
        }
    }

    pub fn draw(self, rng: &mut ChaCha8Rng) -> Case {
        match self {
            CaseKind::Element => element_case(rng),
            CaseKind::Point => point_case(rng),
            CaseKind::Line => line_case(rng),
            CaseKind::Endpoint(c) => endpoint_case(rng, c),
        }
    }
}

/// Internal forces of a single curved element, with and without strain re-interpolation.
pub fn element_case(rng: &mut ChaCha8Rng) -> Case {
    let a = jitter(rng, 0.1);
    let b = a + Vec3::new(1.0, 0.0, 0.0) + jitter(rng, 0.3);
    let e = random_element(rng, a, b, 0.3);
    let mat = Material::new(rng.random_range(1.0..100.0), rng.random_range(0.02..0.2));
    let integrator = ElementIntegrator::new(4, rng.random_bool(0.5));
    let l = e.length;
    let eval = move |x: &[f64]| integrator.internal(&ElementDofs::from_slice(x, l), &mat).map(|v| (v.residual, v.stiffness)).map_err(|_| ());
    Case { x: e.to_vec(), eval: Box::new(eval) }
}

/// Bilateral point contact of two crossing elements.
pub fn point_case(rng: &mut ChaCha8Rng) -> Case {
    let radii = 0.02;
    let e1 = random_element(rng, Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0), 0.05);
    let angle: f64 = rng.random_range(0.5..std::f64::consts::FRAC_PI_2);
    let dir = Vec3::new(angle.cos(), angle.sin(), 0.0);
    let center = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.05..0.05), rng.random_range(0.3..0.9) * radii);
    let e2 = random_element(rng, center - dir.scale(0.5), center + dir.scale(0.5), 0.05);
    let law = random_law(rng, 100.0, 0.005);
    let lengths = [e1.length, e2.length];
    let ps = ProjectionSettings::default();
    let eval = move |x: &[f64]| -> Result<_, ()> {
        let pc = bilateral_contact([0, 1], &elem(x, 0, &lengths), &elem(x, 1, &lengths), radii, &law, &ps).map_err(|_| ())?.ok_or(())?;
        pc.system.as_ref().ok_or(())?;
        Ok(scatter(pc.system.as_ref(), &[0, 1], 2))
    };
    Case { x: stack(&[e1, e2]), eval: Box::new(eval) }
}

/// Line contact of a slave element against a two-element master beam whose start may
/// project into the slave, exercising the segmentation chain.
pub fn line_case(rng: &mut ChaCha8Rng) -> Case {
    let radii = 0.02;
    let slave = random_element(rng, Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), 0.02);
    let z = |rng: &mut ChaCha8Rng| rng.random_range(0.012..0.018);
    let start = Vec3::new(rng.random_range(-0.3..0.8), rng.random_range(-0.003..0.003), z(rng));
    let mid = Vec3::new(start[0] + rng.random_range(0.3..0.6), rng.random_range(-0.003..0.003), z(rng));
    let end = Vec3::new(mid[0] + rng.random_range(0.3..0.6), rng.random_range(-0.003..0.003), z(rng));
    let m1 = random_element(rng, start, mid, 0.01);
    let mut m2 = random_element(rng, mid, end, 0.01);
    // Master beam stays C1 across its interior node.
    m2.nodal[0] = m1.nodal[2];
    m2.nodal[1] = m1.nodal[3];
    let law = random_law(rng, 1e3, 0.002);
    let settings = LineSettings {
        intervals: rng.random_range(1..4),
        gauss_points: 5,
        segmentation: rng.random_bool(0.8),
        ..LineSettings::default()
    };
    let lengths = [slave.length, m1.length, m2.length];
    let eval = move |x: &[f64]| -> Result<_, ()> {
        let (s, a, b) = (elem(x, 0, &lengths), elem(x, 1, &lengths), elem(x, 2, &lengths));
        let cands = [
            Candidate { element: 1, beam: 1, dofs: &a, beam_start: true, beam_end: false },
            Candidate { element: 2, beam: 1, dofs: &b, beam_start: false, beam_end: true },
        ];
        let res = line_contact(0, &s, &cands, radii, &law, &settings);
        res.system.as_ref().ok_or(())?;
        Ok(scatter(res.system.as_ref(), &res.elements, 3))
    };
    Case { x: stack(&[slave, m1, m2]), eval: Box::new(eval) }
}

/// Endpoint contact configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointCase {
    /// End (`xi = +1`) of the first element against the interior of the second.
    FirstEndToLine,
    /// Start (`xi = -1`) of the second element against the interior of the first.
    SecondEndToLine,
    EndToEnd,
}

pub fn endpoint_case(rng: &mut ChaCha8Rng, case: EndpointCase) -> Case {
    let radii = 0.02;
    let a = random_element(rng, Vec3::new(-1.0, 0.0, 0.0), Vec3::zero(), 0.1);
    let rho = rng.random_range(0.3..0.85) * radii;
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let law = random_law(rng, 100.0, 0.005);
    let ps = ProjectionSettings::default();
    let b = match case {
        EndpointCase::FirstEndToLine => {
            let c = Vec3::new(rho * phi.cos(), rng.random_range(-0.2..0.2), rho * phi.sin());
            random_element(rng, c - Vec3::new(0.0, 0.5, 0.0), c + Vec3::new(0.0, 0.5, 0.0), 0.1)
        }
        EndpointCase::SecondEndToLine => {
            let s = Vec3::new(rng.random_range(-0.7..-0.3), rho * phi.cos(), rho * phi.sin());
            let dir = Vec3::new(rng.random_range(-0.3..0.3), phi.cos(), phi.sin()).normalized();
            random_element(rng, s, s + dir, 0.1)
        }
        EndpointCase::EndToEnd => {
            let dir = Vec3::new(rng.random_range(0.2..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalized();
            let s = Vec3::new(rho * phi.cos(), rho * phi.sin(), rng.random_range(-0.005..0.005));
            random_element(rng, s, s + dir, 0.1)
        }
    };
    let lengths = [a.length, b.length];
    let eval = move |x: &[f64]| -> Result<_, ()> {
        let (ea, eb) = (elem(x, 0, &lengths), elem(x, 1, &lengths));
        let pc = match case {
            EndpointCase::FirstEndToLine => {
                let t = [LineTarget { element: 1, dofs: &eb, physical_ends: [None, None] }];
                endpoint_to_line(0, &ea, 1.0, &t, radii, &law, &ps).ok_or(())?
            }
            EndpointCase::SecondEndToLine => {
                let t = [LineTarget { element: 0, dofs: &ea, physical_ends: [None, None] }];
                endpoint_to_line(1, &eb, -1.0, &t, radii, &law, &ps).ok_or(())?
            }
            EndpointCase::EndToEnd => endpoint_to_endpoint([0, 1], &ea, 1.0, &eb, -1.0, radii, &law),
        };
        pc.system.as_ref().ok_or(())?;
        Ok(scatter(pc.system.as_ref(), &pc.elements, 2))
    };
    Case { x: stack(&[a, b]), eval: Box::new(eval) }
}

/// Analytic tangent against central differences.
pub fn tangent_outcome(case: &Case) -> Option<TrialOutcome> {
    fd_tangent_check(&case.x, FD_STEP, &case.eval).ok().map(fd_outcome)
}

/// Net force of the residual (sum of its position components) relative to its largest entry.
pub fn balance_outcome(case: &Case) -> Option<TrialOutcome> {
    let (r, _) = case.evaluate(&case.x)?;
    let mut net = Vec3::zero();
    for block in r.chunks(12) {
        net += Vec3::from_slice(&block[0..3]) + Vec3::from_slice(&block[6..9]);
    }
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (scale > 0.0).then(|| TrialOutcome {
        error: net.norm() / scale,
        location: format!("net force ({:.3e}, {:.3e}, {:.3e})", net[0], net[1], net[2]),
    })
}

/// Largest `|K_ij - K_ji|` relative to the largest entry.
pub fn symmetry_outcome(case: &Case) -> Option<TrialOutcome> {
    let (_, k) = case.evaluate(&case.x)?;
    let mut worst = (0.0f64, (0, 0));
    for i in 0..k.rows() {
        for j in i + 1..k.cols() {
            let d = (k[(i, j)] - k[(j, i)]).abs();
            if d > worst.0 {
                worst = (d, (i, j));
            }
        }
    }
    Some(TrialOutcome { error: worst.0 / k.max_abs(), location: format!("entry ({}, {})", worst.1 .0, worst.1 .1) })
}

pub fn element_trial(rng: &mut ChaCha8Rng) -> Option<TrialOutcome> {
    tangent_outcome(&element_case(rng))
}

pub fn point_trial(rng: &mut ChaCha8Rng) -> Option<TrialOutcome> {
    tangent_outcome(&point_case(rng))
}

pub fn line_trial(rng: &mut ChaCha8Rng) -> Option<TrialOutcome> {
    tangent_outcome(&line_case(rng))
}

pub fn endpoint_trial(rng: &mut ChaCha8Rng, case: EndpointCase) -> Option<TrialOutcome> {
    tangent_outcome(&endpoint_case(rng, case))
}

/// All tangent suites with `trials` configurations each.
pub fn tangent_suites(trials: usize, seed: u64) -> Vec<CheckReport> {
    CaseKind::ALL
        .iter()
        .map(|&kind| run_suite(kind.name(), trials, seed, TANGENT_TOLERANCE, |r| tangent_outcome(&kind.draw(r))))
        .collect()
}

/// Action and reaction: internal and contact residuals carry no net force.
pub fn balance_suites(trials: usize, seed: u64) -> Vec<CheckReport> {
    CaseKind::ALL
        .iter()
        .map(|&kind| {
            let name = format!("{}_balance", kind.name());
            run_suite(&name, trials, seed, BALANCE_TOLERANCE, |r| balance_outcome(&kind.draw(r)))
        })
        .collect()
}

/// Symmetry of the internal element stiffness without applied moments or contact.
pub fn symmetry_suite(trials: usize, seed: u64) -> CheckReport {
    run_suite("element_symmetry", trials, seed, SYMMETRY_TOLERANCE, |r| symmetry_outcome(&element_case(r)))
}

/// Newton bilateral projection against the brute-force minimum distance for crossing pairs
/// whose closest points lie inside both elements; boundary minima are redrawn.
pub fn projection_trial(rng: &mut ChaCha8Rng) -> Option<TrialOutcome> {
    for _ in 0..20 {
        let e1 = random_element(rng, Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0), 0.1);
        let angle: f64 = rng.random_range(0.5..std::f64::consts::FRAC_PI_2);
        let dir = Vec3::new(angle.cos(), angle.sin(), 0.0);
        let center = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(0.01..0.3));
        let e2 = random_element(rng, center - dir.scale(0.5), center + dir.scale(0.5), 0.1);
        let (xi, eta, distance) = grid_closest_points(&e1, &e2, 60);
        if xi.abs() > 0.99 || eta.abs() > 0.99 {
            continue;
        }
        let error = match bilateral(&e1, &e2, &ProjectionSettings::default()) {
            Ok(p) => (p.distance - distance).abs(),
            Err(_) => f64::INFINITY,
        };
        return Some(TrialOutcome { error, location: format!("xi {xi:.6}, eta {eta:.6}, distance {distance:.6e}") });
    }
    None
}

pub fn projection_suite(trials: usize, seed: u64) -> CheckReport {
    run_suite("bilateral_projection", trials, seed, PROJECTION_TOLERANCE, projection_trial)
}

/// Hermite identities at a random coordinate: partition of unity, derivative consistency,
/// nodal interpolation and exact reproduction of cubic curves.
pub fn shape_trial(rng: &mut ChaCha8Rng) -> Option<TrialOutcome> {
    let xi: f64 = rng.random_range(-1.0..1.0);
    let h = 1e-5;
    let (b, bp, bm) = (hermite_basis(xi), hermite_basis(xi + h), hermite_basis(xi - h));
    let mut worst = (0.0f64, String::new());
    let mut note = |e: f64, what: &str| {
        if !(e <= worst.0) {
            worst = (e, format!("{what} at xi {xi:.6}"));
        }
    };
    note((b.value[0] + b.value[2] - 1.0).abs(), "partition of unity");
    note((b.d1[0] + b.d1[2]).abs(), "derivative partition");
    for i in 0..4 {
        note(((bp.value[i] - bm.value[i]) / (2.0 * h) - b.d1[i]).abs(), "first derivative");
        note(((bp.d1[i] - bm.d1[i]) / (2.0 * h) - b.d2[i]).abs(), "second derivative");
    }
    // A random cubic p(s) on [0, l] is reproduced exactly from its end values and slopes.
    let l: f64 = rng.random_range(0.1..3.0);
    let c: Vec<Vec3<f64>> = (0..4).map(|_| jitter(rng, 1.0)).collect();
    let p = |s: f64| c[0] + c[1].scale(s) + c[2].scale(s * s) + c[3].scale(s * s * s);
    let dp = |s: f64| c[1] + c[2].scale(2.0 * s) + c[3].scale(3.0 * s * s);
    let e = ElementDofs::new(p(0.0), dp(0.0), p(l), dp(l), l);
    let s = 0.5 * l * (1.0 + xi);
    let pt = e.evaluate(xi);
    note((pt.r - p(s)).norm(), "cubic reproduction");
    note((pt.r_xi - dp(s).scale(0.5 * l)).norm(), "cubic slope reproduction");
    note((e.position(-1.0) - p(0.0)).norm() + (e.position(1.0) - p(l)).norm(), "nodal interpolation");
    Some(TrialOutcome { error: worst.0, location: worst.1 })
}

pub fn shape_suite(trials: usize, seed: u64) -> CheckReport {
    run_suite("hermite_shape", trials, seed, SHAPE_TOLERANCE, shape_trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_samples() {
        for rep in tangent_suites(8, 7) {
            assert!(rep.passed(), "{rep:?}");
        }
        assert!(projection_suite(20, 7).passed());
        assert!(shape_suite(20, 7).passed());
        for rep in balance_suites(8, 7) {
            assert!(rep.passed(), "{rep:?}");
        }
        assert!(symmetry_suite(8, 7).passed());
    }

    #[test]
    fn unbalanced_residual_is_detected() {
        let mut case = point_case(&mut trial_rng(5, 0));
        let inner = case.eval;
        case.eval = Box::new(move |x| {
            inner(x).map(|(mut r, k)| {
                r[0] += 1e-6 * r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (r, k)
            })
        });
        let out = balance_outcome(&case).unwrap();
        assert!(out.error > BALANCE_TOLERANCE);
    }

    #[test]
    fn broken_tangent_is_located() {
        let rep = run_suite("broken", 5, 1, TANGENT_TOLERANCE, |rng| {
            let e = random_element(rng, Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), 0.2);
            let mat = Material::new(10.0, 0.1);
            let integrator = ElementIntegrator::new(4, true);
            let eval = |x: &[f64]| {
                integrator.internal(&ElementDofs::from_slice(x, 1.0), &mat).map(|mut v| {
                    let m = v.stiffness.max_abs();
                    v.stiffness[(3, 7)] += 0.5 * m;
                    (v.residual, v.stiffness)
                })
            };
            fd_tangent_check(&e.to_vec(), FD_STEP, eval).ok().map(fd_outcome)
        });
        assert!(!rep.passed());
        assert_eq!(rep.failures, 5);
        assert_eq!(rep.worst_location.as_deref(), Some("entry (3, 7)"));
    }

    #[test]
    fn reports_are_seed_stable() {
        assert_eq!(projection_suite(10, 3), projection_suite(10, 3));
    }
}
