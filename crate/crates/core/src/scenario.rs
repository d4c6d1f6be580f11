//! JSON scenario description, model construction, runs and reports.
//!
//! Scenarios use plain `f64` values and are unit-agnostic. Node targets refer to
//! beams and node selectors (`"start"`, `"end"`, `"all"` or a node index along the
//! beam), so a scenario stays valid when the element count is changed.

use crate::assembly::{ContactState, PointSample};
use crate::beam_element::{ElementIntegrator, Material};
use crate::contact::broad_phase::PairRules;
use crate::contact::{LineSettings, PenaltyLaw, PointKind};
use crate::dirichlet::{Action, DirichletSchedule, Stage};
use crate::error::ConfigError;
use crate::linalg::Vec3;
use crate::model::{ContactConfig, Formulation, LineLoad, Mesh, Model, NodalLoad, NodeRef};
use crate::oracles::{l2_error, HelixReference, PatchReference};
use crate::solver::{run as drive, DriverSettings, NewtonSettings, ReactionGroup, StepRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub beams: Vec<BeamSpec>,
    #[serde(default)]
    pub element: ElementSpec,
    #[serde(default)]
    pub contact: ContactSpec,
    #[serde(default)]
    pub loads: LoadsSpec,
    #[serde(default)]
    pub dirichlet: DirichletSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reactions: Vec<ReactionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Initially straight beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub elements: usize,
    /// Relative element lengths; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_lengths: Option<Vec<f64>>,
    pub youngs_modulus: f64,
    pub radius: f64,
    #[serde(default)]
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(default = "default_element_gauss")]
    pub gauss_points: usize,
    /// Interpolate the axial strain through three collocation points.
    #[serde(default = "yes")]
    pub smoothed_axial_strain: bool,
}

impl Default for ElementSpec {
    fn default() -> Self {
        Self { gauss_points: default_element_gauss(), smoothed_axial_strain: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Linear { epsilon: f64 },
    Quadratic { epsilon: f64, g_bar: f64 },
}

impl LawSpec {
    pub fn to_law(self) -> PenaltyLaw<f64> {
        match self {
            LawSpec::Linear { epsilon } => PenaltyLaw::Linear { epsilon },
            LawSpec::Quadratic { epsilon, g_bar } => PenaltyLaw::Quadratic { epsilon, g_bar },
        }
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let (eps, g) = match *self {
            LawSpec::Linear { epsilon } => (epsilon, None),
            LawSpec::Quadratic { epsilon, g_bar } => (epsilon, Some(g_bar)),
        };
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ConfigError::new(format!("{key}.epsilon"), "penalty parameter must be positive"));
        }
        if let Some(g) = g {
            if !(g > 0.0 && g.is_finite()) {
                return Err(ConfigError::new(format!("{key}.g_bar"), "regularization gap must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
    /// Law for point and end-cap contacts; defaults to `law`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_law: Option<LawSpec>,
    #[serde(default = "one")]
    pub intervals: usize,
    #[serde(default = "default_contact_gauss")]
    pub gauss_points: usize,
    #[serde(default = "yes")]
    pub segmentation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_radius: Option<f64>,
    #[serde(default = "default_safety")]
    pub angle_safety: f64,
    #[serde(default = "one")]
    pub neighbor_exclusion: usize,
    #[serde(default)]
    pub self_contact: bool,
}

impl Default for ContactSpec {
    fn default() -> Self {
        Self {
            formulation: Formulation::None,
            law: None,
            endpoint_law: None,
            intervals: 1,
            gauss_points: default_contact_gauss(),
            segmentation: true,
            pairs: None,
            search_radius: None,
            angle_safety: default_safety(),
            neighbor_exclusion: 1,
            self_contact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeName {
    Start,
    End,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSelector {
    Index(usize),
    Named(NodeName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTarget {
    pub beam: usize,
    pub node: NodeSelector,
}

impl NodeTarget {
    pub fn start(beam: usize) -> Self {
        Self { beam, node: NodeSelector::Named(NodeName::Start) }
    }

    pub fn end(beam: usize) -> Self {
        Self { beam, node: NodeSelector::Named(NodeName::End) }
    }

    pub fn all(beam: usize) -> Self {
        Self { beam, node: NodeSelector::Named(NodeName::All) }
    }

    fn resolve(&self, mesh: &Mesh<f64>, key: &str) -> Result<Vec<usize>, ConfigError> {
        let beam = mesh
            .beams
            .get(self.beam)
            .ok_or_else(|| ConfigError::new(format!("{key}.beam"), format!("beam {} does not exist", self.beam)))?;
        let which = match self.node {
            NodeSelector::Named(NodeName::All) => return Ok(beam.nodes.clone()),
            NodeSelector::Named(NodeName::Start) => NodeRef::Start,
            NodeSelector::Named(NodeName::End) => NodeRef::End,
            NodeSelector::Index(i) => NodeRef::Index(i),
        };
        mesh.node(self.beam, which).map(|n| vec![n]).map_err(|e| ConfigError::new(format!("{key}.node"), e.message))
    }
}

/// Nodal unknown: position or tangent component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Z,
    Tx,
    Ty,
    Tz,
}

impl Component {
    pub const POSITION: [Component; 3] = [Component::X, Component::Y, Component::Z];
    pub const ALL: [Component; 6] = [Component::X, Component::Y, Component::Z, Component::Tx, Component::Ty, Component::Tz];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSpec {
    pub beam: usize,
    pub node: NodeSelector,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpec {
    Translate { targets: Vec<NodeTarget>, delta: [f64; 3] },
    /// Rotation about the axis through `center`; `turns = 1` is a full revolution.
    Rotate { targets: Vec<NodeTarget>, center: [f64; 3], axis: [f64; 3], turns: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub steps: usize,
    #[serde(default)]
    pub actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    #[serde(default)]
    pub fixed: Vec<FixedSpec>,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineLoadSpec {
    pub beam: usize,
    pub force: [f64; 3],
    #[serde(default)]
    pub moment: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalLoadSpec {
    pub target: NodeTarget,
    pub force: [f64; 3],
    #[serde(default)]
    pub moment: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsSpec {
    #[serde(default)]
    pub line: Vec<LineLoadSpec>,
    #[serde(default)]
    pub nodal: Vec<NodalLoadSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub residual_tolerance: f64,
    #[serde(default = "default_tol")]
    pub increment_tolerance: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_halvings")]
    pub max_halvings: usize,
    #[serde(default)]
    pub load_ramp_steps: usize,
    /// Solve for equilibrium in the initial configuration before the first step.
    #[serde(default = "yes")]
    pub initial_equilibrium: bool,
    #[serde(default = "yes")]
    pub tangent_predictor: bool,
    /// Largest nodal position change allowed in one Newton iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_position_increment: Option<f64>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            residual_tolerance: default_tol(),
            increment_tolerance: default_tol(),
            max_iterations: default_iterations(),
            max_halvings: default_halvings(),
            load_ramp_steps: 0,
            initial_equilibrium: true,
            tangent_predictor: true,
            max_position_increment: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSpec {
    pub name: String,
    pub targets: Vec<NodeTarget>,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default = "z_axis")]
    pub axis: [f64; 3],
}

/// Known solution used for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Analytical double helix; the final state of beams 0 and 1 is compared.
    Helix { radius: f64, length: f64, youngs_modulus: f64, gap: f64, strain: f64 },
    /// Constant gap under a uniform line load; reported per step.
    Patch { line_load: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Record gap and force distributions.
    #[serde(default = "yes")]
    pub distributions: bool,
    /// Record distributions every n-th step (the last step is always recorded).
    #[serde(default = "one")]
    pub every: usize,
    #[serde(default)]
    pub final_state: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { distributions: true, every: 1, final_state: false }
    }
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_element_gauss() -> usize {
    4
}
fn default_contact_gauss() -> usize {
    5
}
fn default_safety() -> f64 {
    2.0
}
fn default_tol() -> f64 {
    1e-7
}
fn default_iterations() -> usize {
    50
}
fn default_halvings() -> usize {
    3
}
fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// Model, boundary conditions and driver settings built from a scenario.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: Model<f64>,
    pub schedule: DirichletSchedule<f64>,
    pub settings: DriverSettings<f64>,
}

fn positive(v: f64, key: String, what: &str) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("{what} must be positive")))
    }
}

impl Scenario {
    /// Parse JSON; errors name the offending key path.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path.is_empty() || path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Use `n` uniform elements on every beam.
    pub fn set_elements(&mut self, n: usize) {
        for b in &mut self.beams {
            b.elements = n;
            b.element_lengths = None;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.beams.is_empty() {
            return Err(ConfigError::new("beams", "at least one beam required"));
        }
        for (i, b) in self.beams.iter().enumerate() {
            if b.elements == 0 {
                return Err(ConfigError::new(format!("beams[{i}].elements"), "element count must be at least 1"));
            }
            if let Some(l) = &b.element_lengths {
                if l.len() != b.elements {
                    return Err(ConfigError::new(format!("beams[{i}].element_lengths"), "length list must match the element count"));
                }
            }
            positive(b.youngs_modulus, format!("beams[{i}].youngs_modulus"), "Young's modulus")?;
            positive(b.radius, format!("beams[{i}].radius"), "radius")?;
            if !(b.density >= 0.0) {
                return Err(ConfigError::new(format!("beams[{i}].density"), "density must be non-negative"));
            }
        }
        if self.element.gauss_points == 0 {
            return Err(ConfigError::new("element.gauss_points", "at least one Gauss point required"));
        }
        let c = &self.contact;
        if c.formulation != Formulation::None {
            let law = c.law.ok_or_else(|| ConfigError::new("contact.law", "a penalty law is required when contact is enabled"))?;
            law.validate("contact.law")?;
        }
        if let Some(l) = &c.endpoint_law {
            l.validate("contact.endpoint_law")?;
        }
        if c.intervals == 0 {
            return Err(ConfigError::new("contact.intervals", "at least one integration interval required"));
        }
        if c.gauss_points == 0 {
            return Err(ConfigError::new("contact.gauss_points", "at least one Gauss point required"));
        }
        if let Some(pairs) = &c.pairs {
            for (i, p) in pairs.iter().enumerate() {
                if p.iter().any(|&b| b >= self.beams.len()) {
                    return Err(ConfigError::new(format!("contact.pairs[{i}]"), "beam id does not exist"));
                }
            }
        }
        if let Some(r) = c.search_radius {
            positive(r, "contact.search_radius".into(), "search radius")?;
        }
        for (i, s) in self.dirichlet.stages.iter().enumerate() {
            if s.steps == 0 {
                return Err(ConfigError::new(format!("dirichlet.stages[{i}].steps"), "a stage needs at least one step"));
            }
        }
        positive(self.solver.residual_tolerance, "solver.residual_tolerance".into(), "tolerance")?;
        positive(self.solver.increment_tolerance, "solver.increment_tolerance".into(), "tolerance")?;
        if self.output.every == 0 {
            return Err(ConfigError::new("output.every", "must be at least 1"));
        }
        if let Some(ReferenceSpec::Helix { .. }) = self.reference {
            if self.beams.len() < 2 {
                return Err(ConfigError::new("reference", "the helix reference needs two beams"));
            }
        }
        // Node references are checked while building.
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Built, ConfigError> {
        let mut mesh = Mesh::new();
        for b in &self.beams {
            let mat = Material { youngs_modulus: b.youngs_modulus, radius: b.radius, density: b.density };
            let fractions = b.element_lengths.clone().unwrap_or_else(|| vec![1.0; b.elements]);
            mesh.add_straight_beam(Vec3(b.start), Vec3(b.end), &fractions, mat)?;
        }

        let mut loads = crate::model::Loads::default();
        for (i, l) in self.loads.line.iter().enumerate() {
            if l.beam >= mesh.beams.len() {
                return Err(ConfigError::new(format!("loads.line[{i}].beam"), format!("beam {} does not exist", l.beam)));
            }
            loads.line.push(LineLoad { beam: l.beam, force: Vec3(l.force), moment: Vec3(l.moment) });
        }
        for (i, l) in self.loads.nodal.iter().enumerate() {
            for node in l.target.resolve(&mesh, &format!("loads.nodal[{i}].target"))? {
                loads.nodal.push(NodalLoad { node, force: Vec3(l.force), moment: Vec3(l.moment) });
            }
        }

        let mut schedule = DirichletSchedule::new();
        for (i, f) in self.dirichlet.fixed.iter().enumerate() {
            let target = NodeTarget { beam: f.beam, node: f.node };
            let comps: Vec<usize> = f.components.iter().map(|c| c.index()).collect();
            for node in target.resolve(&mesh, &format!("dirichlet.fixed[{i}]"))? {
                schedule.constrain(node, &comps);
            }
        }
        for (i, s) in self.dirichlet.stages.iter().enumerate() {
            let mut actions = Vec::new();
            for (j, a) in s.actions.iter().enumerate() {
                let key = format!("dirichlet.stages[{i}].actions[{j}]");
                let resolve_all = |targets: &[NodeTarget]| -> Result<Vec<usize>, ConfigError> {
                    let mut nodes = Vec::new();
                    for (k, t) in targets.iter().enumerate() {
                        nodes.extend(t.resolve(&mesh, &format!("{key}.targets[{k}]"))?);
                    }
                    Ok(nodes)
                };
                actions.push(match a {
                    ActionSpec::Translate { targets, delta } => Action::Translate { nodes: resolve_all(targets)?, delta: Vec3(*delta) },
                    ActionSpec::Rotate { targets, center, axis, turns } => {
                        if !(Vec3(*axis).norm() > 0.0) {
                            return Err(ConfigError::new(format!("{key}.axis"), "rotation axis must be nonzero"));
                        }
                        Action::Rotate {
                            nodes: resolve_all(targets)?,
                            center: Vec3(*center),
                            axis: Vec3(*axis),
                            angle: turns * std::f64::consts::TAU,
                        }
                    }
                });
            }
            schedule.stages.push(Stage { steps: s.steps, actions });
        }
        schedule.validate(&mesh)?;

        let c = &self.contact;
        let law = c.law.map(LawSpec::to_law).unwrap_or(PenaltyLaw::Linear { epsilon: 1.0 });
        let contact = ContactConfig {
            formulation: c.formulation,
            law,
            point_law: c.endpoint_law.map(LawSpec::to_law).unwrap_or(law),
            line: LineSettings { intervals: c.intervals, gauss_points: c.gauss_points, segmentation: c.segmentation, ..LineSettings::default() },
            beam_pairs: c.pairs.as_ref().map(|p| p.iter().map(|&[a, b]| (a, b)).collect()),
            rules: PairRules { neighbor_exclusion: c.neighbor_exclusion, self_contact: c.self_contact },
            search_radius: c.search_radius,
            angle_safety: c.angle_safety,
        };

        let mut reactions = Vec::new();
        for (i, r) in self.reactions.iter().enumerate() {
            let mut nodes = Vec::new();
            for (k, t) in r.targets.iter().enumerate() {
                nodes.extend(t.resolve(&mesh, &format!("reactions[{i}].targets[{k}]"))?);
            }
            if !(Vec3(r.axis).norm() > 0.0) {
                return Err(ConfigError::new(format!("reactions[{i}].axis"), "axis must be nonzero"));
            }
            reactions.push(ReactionGroup { name: r.name.clone(), nodes, center: Vec3(r.center), axis: Vec3(r.axis) });
        }

        let settings = DriverSettings {
            newton: NewtonSettings {
                residual_tolerance: self.solver.residual_tolerance,
                increment_tolerance: self.solver.increment_tolerance,
                max_iterations: self.solver.max_iterations,
                max_halvings: self.solver.max_halvings,
                max_position_increment: self.solver.max_position_increment,
            },
            load_ramp_steps: self.solver.load_ramp_steps,
            initial_equilibrium: self.solver.initial_equilibrium,
            tangent_predictor: self.solver.tangent_predictor,
            reactions,
        };
        let mut model = Model::new(mesh);
        model.loads = loads;
        model.contact = contact;
        model.integrator = ElementIntegrator::new(self.element.gauss_points, self.element.smoothed_axial_strain);
        Ok(Built { model, schedule, settings })
    }

    /// Build and run; the report is returned also when a step fails.
    pub fn run(&self, mut on_step: impl FnMut(&StepReport)) -> Result<RunOutcome, ConfigError> {
        let built = self.build()?;
        let mut state = built.model.mesh.reference.clone();
        let mut steps = Vec::new();
        let mut distributions = Vec::new();
        let total = built.schedule.total_steps();
        let patch = match self.reference {
            Some(ReferenceSpec::Patch { line_load, epsilon }) => Some(PatchReference { line_load, epsilon }),
            _ => None,
        };
        let result = drive(&built.model, &built.schedule, &built.settings, &mut state, |rec, _| {
            let report = StepReport::new(rec, patch.as_ref());
            on_step(&report);
            steps.push(report);
            if self.output.distributions && (rec.step % self.output.every == 0 || rec.step == total) {
                distributions.push(Distribution::new(rec.step, &rec.contact));
            }
        });
        let failure = result.err().map(|e| e.to_string());
        let helix_error = match (self.reference, &failure) {
            (Some(ReferenceSpec::Helix { radius, length, youngs_modulus, gap, strain }), None) => {
                let h = HelixReference { radius, length, youngs_modulus, gap, strain };
                let errors = (0..2).map(|b| helix_l2_error(&built.model.mesh, &state, b, &h)).collect();
                Some(errors)
            }
            _ => None,
        };
        let report = RunReport {
            scenario: self.name.clone(),
            converged: failure.is_none(),
            failure,
            total_halvings: steps.iter().map(|s| s.halvings).sum(),
            steps,
            distributions,
            helix_l2_error: helix_error,
            final_state: self.output.final_state.then(|| state.clone()),
        };
        Ok(RunOutcome { report, state, built })
    }
}

/// Scenario result together with the final configuration.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub state: Vec<f64>,
    pub built: Built,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub total_halvings: usize,
    pub steps: Vec<StepReport>,
    pub distributions: Vec<Distribution>,
    /// Relative L2 error of each beam against the analytical helix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helix_l2_error: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionReport {
    pub name: String,
    pub force: [f64; 3],
    pub moment: [f64; 3],
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub iterations: usize,
    /// Residual norms of all Newton iterations of the step.
    pub residuals: Vec<f64>,
    pub halvings: usize,
    pub active_line_points: usize,
    pub point_contacts: usize,
    pub endpoint_line_contacts: usize,
    pub endpoint_endpoint_contacts: usize,
    pub failed_projections: usize,
    pub segmented_elements: usize,
    /// Largest penetration `-g` over all contact points.
    pub max_penetration: f64,
    pub reactions: Vec<ReactionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_contact_angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_min_deg: Option<f64>,
    /// Mean relative deviation of active Gauss-point gaps from the constant-gap solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_error: Option<f64>,
}

impl StepReport {
    pub fn new(rec: &StepRecord<f64>, patch: Option<&PatchReference>) -> Self {
        let c = &rec.contact;
        let count = |k: PointKind| c.points.iter().filter(|p| p.kind == k && p.force > 0.0).count();
        let max_penetration = c
            .line
            .iter()
            .map(|p| -p.gap)
            .chain(c.points.iter().map(|p| -p.gap))
            .fold(0.0f64, f64::max);
        let gap_error = patch.map(|p| {
            let gaps: Vec<f64> = c.line.iter().filter(|s| s.force > 0.0).map(|s| s.gap).collect();
            p.relative_error(&gaps)
        });
        Self {
            step: rec.step,
            iterations: rec.newton_iterations(),
            residuals: rec.iterations.iter().flatten().map(|i| i.residual).collect(),
            halvings: rec.halvings,
            active_line_points: c.active_line_points(),
            point_contacts: count(PointKind::Bilateral),
            endpoint_line_contacts: count(PointKind::EndpointToLine),
            endpoint_endpoint_contacts: count(PointKind::EndpointToEndpoint),
            failed_projections: c.failed_projections,
            segmented_elements: c.segmented_elements,
            max_penetration,
            reactions: rec
                .reactions
                .iter()
                .map(|r| ReactionReport { name: r.name.clone(), force: r.force.0, moment: r.moment.0, torque: r.torque })
                .collect(),
            min_contact_angle_deg: rec.min_contact_angle.map(f64::to_degrees),
            alpha_min_deg: rec.alpha_min.map(f64::to_degrees),
            gap_error,
        }
    }
}

/// Gap and force at every evaluated contact point of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub step: usize,
    pub line: Vec<LineSampleReport>,
    pub points: Vec<PointSampleReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSampleReport {
    pub slave_beam: usize,
    pub master_beam: usize,
    /// Slave reference arc length of the Gauss point.
    pub s: f64,
    pub gap: f64,
    pub force: f64,
    pub alpha_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSampleReport {
    pub kind: PointKind,
    pub beams: [usize; 2],
    pub s: [f64; 2],
    pub gap: f64,
    pub force: f64,
    pub alpha_deg: f64,
}

impl From<&PointSample<f64>> for PointSampleReport {
    fn from(p: &PointSample<f64>) -> Self {
        Self { kind: p.kind, beams: p.beams, s: p.s, gap: p.gap, force: p.force, alpha_deg: p.angle.to_degrees() }
    }
}

impl Distribution {
    pub fn new(step: usize, c: &ContactState<f64>) -> Self {
        let mut line: Vec<LineSampleReport> = c
            .line
            .iter()
            .map(|p| LineSampleReport {
                slave_beam: p.slave_beam,
                master_beam: p.master_beam,
                s: p.s,
                gap: p.gap,
                force: p.force,
                alpha_deg: p.angle.to_degrees(),
            })
            .collect();
        line.sort_by(|a, b| (a.slave_beam, a.master_beam).cmp(&(b.slave_beam, b.master_beam)).then(a.s.total_cmp(&b.s)));
        Self { step, line, points: c.points.iter().map(PointSampleReport::from).collect() }
    }
}

/// Reference arc-length breakpoints of a beam's elements.
pub fn element_breaks(mesh: &Mesh<f64>, beam: usize) -> Vec<f64> {
    let b = &mesh.beams[beam];
    let mut breaks: Vec<f64> = b.elements.iter().map(|&e| mesh.elements[e].s_start).collect();
    breaks.push(b.length);
    breaks
}

const L2_POINTS: usize = 10;
const DISPLACEMENT_SAMPLES: usize = 400;

/// Largest displacement of `deformed(s)` from the straight reference beam.
pub fn max_displacement(mesh: &Mesh<f64>, beam: usize, deformed: impl Fn(f64) -> Vec3<f64>) -> f64 {
    let l = mesh.beams[beam].length;
    (0..=DISPLACEMENT_SAMPLES)
        .map(|k| {
            let s = l * k as f64 / DISPLACEMENT_SAMPLES as f64;
            (deformed(s) - mesh.position(beam, s, &mesh.reference)).norm()
        })
        .fold(0.0, f64::max)
}

/// Relative L2 error of a beam against the analytical helix.
pub fn helix_l2_error(mesh: &Mesh<f64>, state: &[f64], beam: usize, h: &HelixReference) -> f64 {
    let reference = |s: f64| h.position(beam, s);
    let u_max = max_displacement(mesh, beam, reference);
    l2_error(|s| mesh.position(beam, s, state), reference, &element_breaks(mesh, beam), u_max, L2_POINTS)
}

/// Relative L2 error of a beam against a (finer) numerical solution of the same beam.
pub fn numerical_l2_error(mesh: &Mesh<f64>, state: &[f64], fine: &Mesh<f64>, fine_state: &[f64], beam: usize) -> f64 {
    let reference = |s: f64| fine.position(beam, s, fine_state);
    let u_max = max_displacement(fine, beam, reference);
    let mut breaks = element_breaks(mesh, beam);
    breaks.extend(element_breaks(fine, beam));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    l2_error(|s| mesh.position(beam, s, state), reference, &breaks, u_max, L2_POINTS)
}

/// One row of a mesh-convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
}

/// Relative L2 error of `beam` for each element count, against the analytical helix
/// when the scenario has one, otherwise against a run with `reference_factor` times
/// the finest element count.
/// Numerical reference used when the scenario has no closed-form solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    /// Refinement of the reference relative to the finest mesh of the series.
    pub factor: usize,
    /// Residual tolerance of the reference solve; fine meshes hit a round-off floor above the default.
    pub residual_tolerance: Option<f64>,
    /// Scenario solved for the reference instead of the base scenario.
    pub scenario: Option<Scenario>,
}

impl Default for ReferenceRun {
    fn default() -> Self {
        Self { factor: 4, residual_tolerance: Some(1e-6), scenario: None }
    }
}

/// Least-squares order of a convergence series.
pub fn fitted_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let counts: Vec<usize> = rows.iter().map(|r| r.elements).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    (rows.len() >= 2).then(|| crate::oracles::observed_order(&counts, &errors))
}

pub fn convergence(base: &Scenario, counts: &[usize], beam: usize, reference: &ReferenceRun) -> Result<Vec<ConvergenceRow>, ConvergenceError> {
    let solve_with = |sc: &Scenario, n: usize, tolerance: Option<f64>| -> Result<RunOutcome, ConvergenceError> {
        let mut sc = sc.clone();
        sc.set_elements(n);
        if let Some(tol) = tolerance {
            sc.solver.residual_tolerance = tol;
        }
        sc.output = OutputSpec { distributions: false, every: 1, final_state: false };
        let out = sc.run(|_| {})?;
        match &out.report.failure {
            Some(f) => Err(ConvergenceError::Failed { elements: n, reason: f.clone() }),
            None => Ok(out),
        }
    };
    let solve = |n: usize| solve_with(base, n, None);
    let helix = match base.reference {
        Some(ReferenceSpec::Helix { radius, length, youngs_modulus, gap, strain }) => Some(HelixReference { radius, length, youngs_modulus, gap, strain }),
        _ => None,
    };
    let fine = match helix {
        Some(_) => None,
        None => Some(solve_with(
            reference.scenario.as_ref().unwrap_or(base),
            counts.iter().copied().max().unwrap_or(1) * reference.factor,
            reference.residual_tolerance,
        )?),
    };
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in counts {
        let out = solve(n)?;
        let mesh = &out.built.model.mesh;
        let error = match (&helix, &fine) {
            (Some(h), _) => helix_l2_error(mesh, &out.state, beam, h),
            (None, Some(f)) => numerical_l2_error(mesh, &out.state, &f.built.model.mesh, &f.state, beam),
            _ => unreachable!(),
        };
        let order = rows.last().map(|p: &ConvergenceRow| (p.error / error).ln() / (n as f64 / p.elements as f64).ln());
        rows.push(ConvergenceRow { elements: n, error, order });
    }
    Ok(rows)
}

#[derive(Debug, thiserror::Error)]
pub enum ConvergenceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run with {elements} elements per beam failed: {reason}")]
    Failed { elements: usize, reason: String },
}
