//! Load-stepped Newton-Raphson continuation with Dirichlet elimination and step halving.

use crate::assembly::{assemble, Assembly, ContactState};
use crate::dirichlet::DirichletSchedule;
use crate::error::SolverError;
use crate::linalg::{norm, Vec3};
use crate::model::{Formulation, Model, DOFS_PER_NODE};
use crate::projection::alpha_min;
use crate::scalar::Real;
use crate::sparse::{solve, CsrMatrix, TripletMatrix};
use log::{debug, info, warn};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings<T> {
    pub residual_tolerance: T,
    pub increment_tolerance: T,
    pub max_iterations: usize,
    /// Halvings allowed per load step.
    pub max_halvings: usize,
    /// Cap on the nodal position change of a single iteration; larger increments are scaled down.
    pub max_position_increment: Option<T>,
}

impl<T: Real> Default for NewtonSettings<T> {
    fn default() -> Self {
        Self { residual_tolerance: T::lit(1e-7), increment_tolerance: T::lit(1e-7), max_iterations: 50, max_halvings: 3, max_position_increment: None }
    }
}

/// Nodes whose support reactions are summed and reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionGroup<T> {
    pub name: String,
    pub nodes: Vec<usize>,
    /// Point on the torque axis.
    pub center: Vec3<T>,
    pub axis: Vec3<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverSettings<T> {
    pub newton: NewtonSettings<T>,
    /// External loads ramp linearly over this many steps; 0 applies them fully from the start.
    pub load_ramp_steps: usize,
    /// Solve for equilibrium before the first step; otherwise step 0 reports the
    /// initial configuration as given.
    pub initial_equilibrium: bool,
    /// Start each step from the linearized response to the prescribed increment
    /// instead of moving only the prescribed dofs.
    pub tangent_predictor: bool,
    pub reactions: Vec<ReactionGroup<T>>,
}

impl<T: Real> Default for DriverSettings<T> {
    fn default() -> Self {
        Self { newton: NewtonSettings::default(), load_ramp_steps: 0, initial_equilibrium: true, tangent_predictor: true, reactions: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub residual: T,
    pub increment: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction<T> {
    pub name: String,
    pub force: Vec3<T>,
    pub moment: Vec3<T>,
    /// Moment component along the group axis.
    pub torque: T,
}

/// Converged load step.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub step: usize,
    /// Newton histories of every converged sub-step, in order.
    pub iterations: Vec<Vec<IterationRecord<T>>>,
    pub halvings: usize,
    pub contact: ContactState<T>,
    pub reactions: Vec<Reaction<T>>,
    /// Smallest contact angle among active line-contact points.
    pub min_contact_angle: Option<T>,
    /// Lower bound on the angle for unique point contact, from the current maximum curvature.
    pub alpha_min: Option<T>,
}

impl<T: Real> StepRecord<T> {
    pub fn newton_iterations(&self) -> usize {
        self.iterations.iter().map(Vec::len).sum()
    }
}

/// Outcome of a converged Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonResult<T> {
    pub history: Vec<IterationRecord<T>>,
    pub assembly: Assembly<T>,
}

fn free_map(n: usize, schedule: &DirichletSchedule<impl Real>) -> (Vec<Option<usize>>, usize) {
    let mut map = vec![None; n];
    let mut k = 0;
    for (dof, slot) in map.iter_mut().enumerate() {
        if !schedule.is_constrained(dof) {
            *slot = Some(k);
            k += 1;
        }
    }
    (map, k)
}

/// Scale a free-dof increment so no node moves farther than `cap`.
fn limit_increment<T: Real>(map: &[Option<usize>], dx: &mut [T], cap: T) {
    let mut largest = T::zero();
    for node in map.chunks(DOFS_PER_NODE) {
        let d2 = node[..3].iter().flatten().map(|&j| dx[j] * dx[j]).fold(T::zero(), |a, b| a + b);
        largest = largest.max(d2.sqrt());
    }
    if largest > cap {
        let f = cap / largest;
        dx.iter_mut().for_each(|v| *v *= f);
    }
}

/// Newton iterations at step parameter `t`; prescribed dofs are set exactly before iterating.
pub fn newton<T: Real>(
    model: &Model<T>,
    schedule: &DirichletSchedule<T>,
    state: &mut [T],
    t: T,
    load_factor: T,
    settings: &NewtonSettings<T>,
) -> Result<NewtonResult<T>, SolverError> {
    schedule.apply(&model.mesh, t, state);
    let n = state.len();
    let (map, n_free) = free_map(n, schedule);
    let mut history = Vec::new();
    let mut last_increment: Option<T> = None;
    for _ in 0..=settings.max_iterations {
        let asm = assemble(model, state, load_factor)?;
        let rf: Vec<T> = (0..n).filter(|&i| map[i].is_some()).map(|i| asm.residual[i]).collect();
        let rnorm = norm(&rf);
        if !rnorm.is_finite() {
            return Err(SolverError::NonFinite);
        }
        if let Some(inc) = last_increment {
            history.push(IterationRecord { residual: rnorm, increment: inc });
            if rnorm < settings.residual_tolerance && inc < settings.increment_tolerance {
                return Ok(NewtonResult { history, assembly: asm });
            }
        }
        if history.len() >= settings.max_iterations {
            break;
        }
        let k: CsrMatrix<T> = asm.stiffness.to_csr().submatrix(&map, n_free);
        let rhs: Vec<T> = rf.iter().map(|&v| -v).collect();
        let mut dx = solve(&k, &rhs)?;
        if let Some(cap) = settings.max_position_increment {
            limit_increment(&map, &mut dx, cap);
        }
        for (i, m) in map.iter().enumerate() {
            if let Some(j) = m {
                state[i] += dx[*j];
            }
        }
        last_increment = Some(norm(&dx));
        debug!("t={:.4} |R|={:.3e} |dD|={:.3e}", t.to_f64_lossy(), rnorm.to_f64_lossy(), norm(&dx).to_f64_lossy());
    }
    let last = history.last().copied().unwrap_or(IterationRecord { residual: T::nan(), increment: T::nan() });
    Err(SolverError::NoConvergence {
        iterations: history.len(),
        residual: last.residual.to_f64_lossy(),
        increment: last.increment.to_f64_lossy(),
    })
}

/// Linearized predictor: `K_ff dD_f = -(R_f + K_fc dD_c)` at the current state, then
/// the prescribed dofs are set to their values at `t`.
pub fn tangent_predictor<T: Real>(
    model: &Model<T>,
    schedule: &DirichletSchedule<T>,
    state: &mut [T],
    t: T,
    load_factor: T,
) -> Result<(), SolverError> {
    let n = state.len();
    let (map, n_free) = free_map(n, schedule);
    let asm = assemble(model, state, load_factor)?;
    let target = schedule.values(&model.mesh, t);
    let mut delta = vec![T::zero(); n];
    for (&dof, v) in schedule.constrained.iter().zip(&target) {
        delta[dof] = *v - state[dof];
    }
    let csr = asm.stiffness.to_csr();
    let coupling = csr.mul_vec(&delta);
    let rhs: Vec<T> = (0..n).filter(|&i| map[i].is_some()).map(|i| -(asm.residual[i] + coupling[i])).collect();
    let dx = solve(&csr.submatrix(&map, n_free), &rhs)?;
    for (i, m) in map.iter().enumerate() {
        if let Some(j) = m {
            state[i] += dx[*j];
        }
    }
    schedule.apply(&model.mesh, t, state);
    Ok(())
}

fn load_factor<T: Real>(settings: &DriverSettings<T>, t: T) -> T {
    if settings.load_ramp_steps == 0 {
        T::one()
    } else {
        (t / T::from_usize(settings.load_ramp_steps).unwrap()).min(T::one())
    }
}

/// Sum of support reactions at the given nodes; the reaction equals the residual at
/// the constrained dofs of an equilibrium state.
pub fn reaction<T: Real>(group: &ReactionGroup<T>, residual: &[T], state: &[T]) -> Reaction<T> {
    let mut force = Vec3::zero();
    let mut moment = Vec3::zero();
    for &node in &group.nodes {
        let b = DOFS_PER_NODE * node;
        let f = Vec3::from_slice(&residual[b..b + 3]);
        let ft = Vec3::from_slice(&residual[b + 3..b + 6]);
        let x = Vec3::from_slice(&state[b..b + 3]);
        let tangent = Vec3::from_slice(&state[b + 3..b + 6]);
        force += f;
        moment += (x - group.center).cross(&f) + tangent.cross(&ft);
    }
    let torque = moment.dot(&group.axis.normalized());
    Reaction { name: group.name.clone(), force, moment, torque }
}

/// Largest `R * kappa` over all elements, sampled at five points per element.
pub fn max_curvature_ratio<T: Real>(model: &Model<T>, state: &[T]) -> T {
    let mesh = &model.mesh;
    let mut mu = T::zero();
    for (e, el) in mesh.elements.iter().enumerate() {
        let d = mesh.element_dofs(e, state);
        let r = mesh.beams[el.beam].material.radius;
        for k in 0..5 {
            let xi = T::lit(-1.0 + 0.5 * k as f64);
            if let Ok(q) = d.arc_quantities(xi) {
                mu = mu.max(r * q.frenet_curvature);
            }
        }
    }
    mu
}

fn record<T: Real>(
    model: &Model<T>,
    settings: &DriverSettings<T>,
    step: usize,
    iterations: Vec<Vec<IterationRecord<T>>>,
    halvings: usize,
    asm: Assembly<T>,
    state: &[T],
) -> StepRecord<T> {
    let reactions = settings.reactions.iter().map(|g| reaction(g, &asm.residual, state)).collect();
    let contact = asm.contact;
    let min_contact_angle =
        contact.line.iter().filter(|p| p.force > T::zero()).map(|p| p.angle).fold(None, |m: Option<T>, a| Some(m.map_or(a, |m| m.min(a))));
    let alpha = if model.contact.formulation == Formulation::None {
        None
    } else {
        alpha_min(max_curvature_ratio(model, state)).ok()
    };
    if let Some(a) = alpha {
        let bound = a * model.contact.angle_safety;
        let unsafe_points = contact.points.iter().filter(|p| p.force > T::zero() && p.angle < bound).count();
        if unsafe_points > 0 {
            warn!("step {step}: {unsafe_points} point contacts below the safe angle {:.4} rad", bound.to_f64_lossy());
        }
    }
    StepRecord { step, iterations, halvings, contact, reactions, min_contact_angle, alpha_min: alpha }
}

/// Drive the schedule step by step from `state`, calling `observer` after every
/// converged step (step 0 is the initial equilibrium).
pub fn run<T: Real>(
    model: &Model<T>,
    schedule: &DirichletSchedule<T>,
    settings: &DriverSettings<T>,
    state: &mut Vec<T>,
    mut observer: impl FnMut(&StepRecord<T>, &[T]),
) -> Result<Vec<StepRecord<T>>, SolverError> {
    let mut records = Vec::new();
    let lf0 = load_factor(settings, T::zero());
    let initial = if settings.initial_equilibrium {
        newton(model, schedule, state, T::zero(), lf0, &settings.newton)
            .map_err(|e| SolverError::StepFailed { step: 0, halvings: 0, reason: e.to_string() })?
    } else {
        schedule.apply(&model.mesh, T::zero(), state);
        NewtonResult { history: Vec::new(), assembly: assemble(model, state, lf0)? }
    };
    let rec = record(model, settings, 0, vec![initial.history], 0, initial.assembly, state);
    observer(&rec, state);
    records.push(rec);

    for step in 1..=schedule.total_steps() {
        let target = T::from_usize(step).unwrap();
        let mut t = target - T::one();
        let mut dt = T::one();
        let mut halvings = 0;
        let mut histories = Vec::new();
        let mut last = None;
        while t < target {
            let t_next = (t + dt).min(target);
            let mut trial = state.clone();
            let lf = load_factor(settings, t_next);
            let attempt = if settings.tangent_predictor {
                tangent_predictor(model, schedule, &mut trial, t_next, lf)
            } else {
                Ok(())
            };
            match attempt.and_then(|_| newton(model, schedule, &mut trial, t_next, lf, &settings.newton)) {
                Ok(res) => {
                    *state = trial;
                    t = t_next;
                    histories.push(res.history);
                    last = Some(res.assembly);
                }
                Err(e) if halvings < settings.newton.max_halvings => {
                    halvings += 1;
                    dt /= T::lit(2.0);
                    warn!("step {step}: halving to {:.4} after {e}", dt.to_f64_lossy());
                }
                Err(e) => return Err(SolverError::StepFailed { step, halvings, reason: e.to_string() }),
            }
        }
        let rec = record(model, settings, step, histories, halvings, last.expect("at least one sub-step"), state);
        info!(
            "step {step}: {} iterations, {} active line points, {} point contacts",
            rec.newton_iterations(),
            rec.contact.active_line_points(),
            rec.contact.active_point_contacts()
        );
        observer(&rec, state);
        records.push(rec);
    }
    Ok(records)
}

/// Global consistent mass matrix.
pub fn mass_matrix<T: Real>(model: &Model<T>, state: &[T]) -> TripletMatrix<T> {
    let mesh = &model.mesh;
    let mut m = TripletMatrix::new(mesh.n_dofs());
    for (e, el) in mesh.elements.iter().enumerate() {
        let me = model.integrator.mass(&mesh.element_dofs(e, state), &mesh.beams[el.beam].material);
        let idx = el.dof_indices();
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                m.push(gi, gj, me[(i, j)]);
            }
        }
    }
    m
}

/// Average-acceleration Newmark integrator (beta 1/4, gamma 1/2) with fixed prescribed dofs.
#[derive(Debug, Clone)]
pub struct Newmark<T> {
    pub dt: T,
    pub displacement: Vec<T>,
    pub velocity: Vec<T>,
    pub acceleration: Vec<T>,
}

impl<T: Real> Newmark<T> {
    const BETA: f64 = 0.25;
    const GAMMA: f64 = 0.5;

    /// Start at rest-consistent acceleration `M a0 = -R(d0)`.
    pub fn new(model: &Model<T>, schedule: &DirichletSchedule<T>, dt: T, d0: Vec<T>, v0: Vec<T>) -> Result<Self, SolverError> {
        let n = d0.len();
        let (map, n_free) = free_map(n, schedule);
        let asm = assemble(model, &d0, T::one())?;
        let m = mass_matrix(model, &d0).to_csr().submatrix(&map, n_free);
        let rhs: Vec<T> = (0..n).filter(|&i| map[i].is_some()).map(|i| -asm.residual[i]).collect();
        let af = solve(&m, &rhs)?;
        let mut a = vec![T::zero(); n];
        for (i, slot) in map.iter().enumerate() {
            if let Some(j) = slot {
                a[i] = af[*j];
            }
        }
        Ok(Self { dt, displacement: d0, velocity: v0, acceleration: a })
    }

    /// Advance one time step.
    pub fn step(&mut self, model: &Model<T>, schedule: &DirichletSchedule<T>, settings: &NewtonSettings<T>) -> Result<Vec<IterationRecord<T>>, SolverError> {
        let n = self.displacement.len();
        let (map, n_free) = free_map(n, schedule);
        let beta = T::lit(Self::BETA);
        let gamma = T::lit(Self::GAMMA);
        let dt = self.dt;
        let c0 = T::one() / (beta * dt * dt);
        let d_n = self.displacement.clone();
        let (v_n, a_n) = (self.velocity.clone(), self.acceleration.clone());
        let accel = |d: &[T], i: usize| c0 * (d[i] - d_n[i] - dt * v_n[i]) - (T::one() / (T::lit(2.0) * beta) - T::one()) * a_n[i];
        let mut d = d_n.clone();
        let mut history = Vec::new();
        let mut last_increment: Option<T> = None;
        let m_full = mass_matrix(model, &d_n).to_csr();
        for _ in 0..=settings.max_iterations {
            let asm = assemble(model, &d, T::one())?;
            let a: Vec<T> = (0..n).map(|i| if map[i].is_some() { accel(&d, i) } else { T::zero() }).collect();
            let ma = m_full.mul_vec(&a);
            let rf: Vec<T> = (0..n).filter(|&i| map[i].is_some()).map(|i| asm.residual[i] + ma[i]).collect();
            let rnorm = norm(&rf);
            if let Some(inc) = last_increment {
                history.push(IterationRecord { residual: rnorm, increment: inc });
                if rnorm < settings.residual_tolerance && inc < settings.increment_tolerance {
                    for i in 0..n {
                        if map[i].is_some() {
                            let a_new = accel(&d, i);
                            self.velocity[i] = v_n[i] + dt * ((T::one() - gamma) * a_n[i] + gamma * a_new);
                            self.acceleration[i] = a_new;
                        }
                    }
                    self.displacement = d;
                    return Ok(history);
                }
            }
            if history.len() >= settings.max_iterations {
                break;
            }
            let mut k = asm.stiffness;
            for i in 0..n {
                for (j, v) in m_full.row(i) {
                    k.push(i, j, c0 * v);
                }
            }
            let kf = k.to_csr().submatrix(&map, n_free);
            let rhs: Vec<T> = rf.iter().map(|&v| -v).collect();
            let dx = solve(&kf, &rhs)?;
            for (i, slot) in map.iter().enumerate() {
                if let Some(j) = slot {
                    d[i] += dx[*j];
                }
            }
            last_increment = Some(norm(&dx));
        }
        let last = history.last().copied().unwrap_or(IterationRecord { residual: T::nan(), increment: T::nan() });
        Err(SolverError::NoConvergence {
            iterations: history.len(),
            residual: last.residual.to_f64_lossy(),
            increment: last.increment.to_f64_lossy(),
        })
    }

    /// Kinetic energy `v^T M v / 2`.
    pub fn kinetic_energy(&self, model: &Model<T>) -> T {
        let mv = mass_matrix(model, &self.displacement).to_csr().mul_vec(&self.velocity);
        mv.iter().zip(&self.velocity).map(|(a, b)| *a * *b).sum::<T>() / T::lit(2.0)
    }
}

/// Total strain energy of the mesh.
pub fn strain_energy<T: Real>(model: &Model<T>, state: &[T]) -> Result<T, SolverError> {
    let mesh = &model.mesh;
    let mut total = T::zero();
    for (e, el) in mesh.elements.iter().enumerate() {
        total += model.integrator.energy(&mesh.element_dofs(e, state), &mesh.beams[el.beam].material)?;
    }
    Ok(total)
}
