//! Run configuration: TOML schema, validation and conversion into the core
//! types.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thermovisc_core::constitutive::{
    validate_material, MaterialReport, ThermalStress, ThermalStressKind, YieldFunction, YieldKind,
};
use thermovisc_core::fem::{build_box_mesh, FESpace, GivenData, Mesh};
use thermovisc_core::linalg::LinearSolver;
use thermovisc_core::solver::{OuterCoupling, SolverConfig};
use thermovisc_core::{ElasticModuli, MaterialModel, ModelError, SymTensor3};

use crate::error::ConfigError;
use crate::expr::{Expr, Point};
use crate::mesh_io;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_point: Option<MaterialPointSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub mu: f64,
    pub lambda: f64,
    #[serde(default = "default_r")]
    pub r_exp: f64,
    /// Truncation level; `inf` selects the untruncated system.
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_local_iter")]
    pub newton_max_iter: usize,
    #[serde(default)]
    pub thermal_stress: ThermalStressSection,
    #[serde(default, rename = "yield")]
    pub yield_fn: YieldSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThermalKind {
    #[default]
    Power,
    Zero,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalStressSection {
    #[serde(default)]
    pub kind: ThermalKind,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub b_neg: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

impl Default for ThermalStressSection {
    fn default() -> Self {
        ThermalStressSection {
            kind: ThermalKind::Power,
            a: 0.0,
            b: 1.0,
            b_neg: 1.0,
            alpha: default_alpha(),
            slope: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum YieldShape {
    #[default]
    SmoothClamp,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YieldSection {
    #[serde(default)]
    pub kind: YieldShape,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default = "one")]
    pub d_slope: f64,
}

impl Default for YieldSection {
    fn default() -> Self {
        YieldSection {
            kind: YieldShape::SmoothClamp,
            d: 1.0,
            d_slope: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[usize; 3]>,
    /// Path of a mesh in the plain-text format, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Boundary tags carrying the displacement constraint; all tags when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_tags: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_force: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_d: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_d_rate: Option<[String; 3]>,
    /// Normal heat flux; may use the outward normal `n1, n2, n3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<[String; 3]>,
    /// Components `xx, yy, zz, yz, xz, xy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress0: Option<[String; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<String>,
    /// One nodal value per vertex line, as an alternative to `theta0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_table: Option<String>,
    /// Solve for the homogenized unknowns with precomputed lifting fields.
    #[serde(default)]
    pub lifting: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    #[default]
    Staggered,
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Direct,
    #[default]
    ConjugateGradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_global_iter")]
    pub newton_max_iter: usize,
    #[serde(default)]
    pub outer_coupling: CouplingKind,
    #[serde(default = "default_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_fp_iter")]
    pub fixed_point_max_iter: usize,
    #[serde(default)]
    pub linear_solver: LinearKind,
    #[serde(default = "default_tol")]
    pub cg_tol: f64,
    #[serde(default = "default_cg_iter")]
    pub cg_max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: default_dt(),
            t_end: 1.0,
            newton_tol: default_tol(),
            newton_max_iter: default_global_iter(),
            outer_coupling: CouplingKind::Staggered,
            fixed_point_tol: default_tol(),
            fixed_point_max_iter: default_fp_iter(),
            linear_solver: LinearKind::ConjugateGradient,
            cg_tol: default_tol(),
            cg_max_iter: default_cg_iter(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Level `M` of the thermal test function; `k` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_level: Option<f64>,
    /// Relative balance tolerance; 1e-8 with the direct solver, 1e-6 with CG
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_tol: Option<f64>,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<f64>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            audit_level: None,
            audit_tol: None,
            q: default_q(),
            k_list: default_k_list(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "yes")]
    pub vtk: bool,
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            snapshot_stride: 1,
            vtk: true,
            csv: true,
        }
    }
}

/// Exact solution used by `study-mesh`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub u: [String; 3],
    pub theta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress: Option<[String; 6]>,
}

/// Prescribed strain-rate and temperature path for `material-point`, either
/// as expressions of `t` or as a table file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialPointSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Components `xx, yy, zz, yz, xz, xy` as functions of `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strain_rate: Option<[String; 6]>,
    #[serde(default = "zero_str")]
    pub theta: String,
    /// CSV file with columns `t, e_xx, e_yy, e_zz, e_yz, e_xz, e_xy, theta`.
    /// The first row gives the initial temperature; every later row is one
    /// step ending at `t` with the given strain rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn zero_str() -> String {
    "0".to_string()
}
fn default_r() -> f64 {
    2.0
}
fn default_k() -> f64 {
    f64::INFINITY
}
fn default_alpha() -> f64 {
    0.7
}
fn default_tol() -> f64 {
    1e-10
}
fn default_local_iter() -> usize {
    50
}
fn default_global_iter() -> usize {
    30
}
fn default_fp_iter() -> usize {
    50
}
fn default_cg_iter() -> usize {
    10_000
}
fn default_dt() -> f64 {
    0.05
}
fn default_q() -> f64 {
    1.2
}
fn default_k_list() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0, 32.0]
}
fn default_dir() -> String {
    "output".to_string()
}
fn default_stride() -> usize {
    1
}

/// Reads, parses and validates a configuration file. Relative paths inside
/// it are resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_str(&text, base)
}

pub fn parse_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| ConfigError::new("<toml>", e.to_string().trim_end().to_string()))?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        ConfigError::new(&key, e.into_inner().message().to_string())
    })?;
    let mut no_table = None;
    let tables = [
        &mut cfg.mesh.file,
        &mut cfg.data.theta0_table,
        cfg.material_point.as_mut().map_or(&mut no_table, |m| &mut m.table),
    ];
    for p in tables.into_iter().flatten() {
        let pb = PathBuf::from(&*p);
        if pb.is_relative() {
            *p = base.join(pb).to_string_lossy().into_owned();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration is always serializable")
}

fn model_error_key(e: &ModelError) -> &'static str {
    match e {
        ModelError::InvalidModuli { .. } => "material.mu",
        ModelError::InvalidExponent(_) => "material.r_exp",
        ModelError::InvalidTruncation(_) => "material.k",
        ModelError::InvalidThermalStress(_) => "material.thermal_stress",
        ModelError::InvalidYield(_) => "material.yield",
        ModelError::InvalidSolverConfig(_) => "solver",
    }
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        ConfigError::new(model_error_key(&e), e.to_string())
    }
}

fn compile(key: &str, src: &str) -> Result<Expr, ConfigError> {
    Expr::parse(src).map_err(|e| ConfigError::new(key, format!("expression '{src}': {e}")))
}

fn compile_n<const N: usize>(key: &str, src: &[String; N]) -> Result<[Expr; N], ConfigError> {
    let mut out = Vec::with_capacity(N);
    for (i, s) in src.iter().enumerate() {
        out.push(compile(&format!("{key}[{i}]"), s)?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

impl RunConfig {
    /// Cross-field checks; everything the core types would reject is caught
    /// here with the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        self.solver_config()?;
        let m = &self.mesh;
        match (&m.file, m.extent, m.resolution) {
            (Some(_), None, None) => {}
            (None, Some(e), Some(r)) => {
                if e.iter().any(|v| !(*v > 0.0)) {
                    return Err(ConfigError::new("mesh.extent", "box lengths must be positive"));
                }
                if r.iter().any(|v| *v == 0) {
                    return Err(ConfigError::new("mesh.resolution", "resolutions must be >= 1"));
                }
            }
            _ => {
                return Err(ConfigError::new(
                    "mesh",
                    "give either `file` or both `extent` and `resolution`",
                ))
            }
        }
        if self.data.theta0.is_some() && self.data.theta0_table.is_some() {
            return Err(ConfigError::new("data.theta0_table", "conflicts with data.theta0"));
        }
        self.compile_data()?;
        let d = &self.diagnostics;
        if !(d.q > 1.0 && d.q < 1.25) {
            return Err(ConfigError::new("diagnostics.q", format!("must lie in (1, 5/4), got {}", d.q)));
        }
        if let Some(m) = d.audit_level {
            if !(m > 0.0) {
                return Err(ConfigError::new("diagnostics.audit_level", "must be positive"));
            }
        }
        if let Some(t) = d.audit_tol {
            if !(t > 0.0) {
                return Err(ConfigError::new("diagnostics.audit_tol", "must be positive"));
            }
        }
        if self.output.snapshot_stride == 0 {
            return Err(ConfigError::new("output.snapshot_stride", "must be >= 1"));
        }
        if let Some(ex) = &self.exact {
            compile_n("exact.u", &ex.u)?;
            compile("exact.theta", &ex.theta)?;
            if let Some(s) = &ex.stress {
                compile_n("exact.stress", s)?;
            }
        }
        if self.material_point.is_some() {
            self.material_point_path()?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<MaterialModel, ConfigError> {
        let m = &self.material;
        let moduli = ElasticModuli::new(m.mu, m.lambda)?;
        let ts = &m.thermal_stress;
        let kind = match ts.kind {
            ThermalKind::Power => ThermalStressKind::Power,
            ThermalKind::Zero => ThermalStressKind::Zero,
            ThermalKind::Linear => ThermalStressKind::Linear {
                slope: ts.slope.ok_or_else(|| {
                    ConfigError::new("material.thermal_stress.slope", "required for kind = \"linear\"")
                })?,
            },
        };
        let thermal_stress = ThermalStress {
            kind,
            a: ts.a,
            b: ts.b,
            b_neg: ts.b_neg,
            alpha: ts.alpha,
        };
        thermal_stress
            .check()
            .map_err(|e| ConfigError::new("material.thermal_stress", e.to_string()))?;
        let y = &m.yield_fn;
        let yield_fn = YieldFunction {
            kind: match y.kind {
                YieldShape::SmoothClamp => YieldKind::SmoothClamp,
                YieldShape::Constant => YieldKind::Constant,
            },
            d: y.d,
            d_slope: y.d_slope,
        };
        let mut model = MaterialModel::new(moduli, m.r_exp, m.k, thermal_stress, yield_fn)?;
        model.newton_tol = m.newton_tol;
        model.newton_max_iter = m.newton_max_iter;
        model.check()?;
        Ok(model)
    }

    pub fn material_report(&self) -> Result<MaterialReport, ConfigError> {
        Ok(validate_material(&self.model()?, 400))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        let cfg = SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            newton_tol: s.newton_tol,
            newton_max_iter: s.newton_max_iter,
            outer_coupling: match s.outer_coupling {
                CouplingKind::Staggered => OuterCoupling::Staggered,
                CouplingKind::FixedPoint => OuterCoupling::FixedPoint,
            },
            fixed_point_tol: s.fixed_point_tol,
            fixed_point_max_iter: s.fixed_point_max_iter,
            linear_solver: match s.linear_solver {
                LinearKind::Direct => LinearSolver::Direct,
                LinearKind::ConjugateGradient => LinearSolver::ConjugateGradient {
                    tol: s.cg_tol,
                    max_iter: s.cg_max_iter,
                },
            },
            snapshot_stride: self.output.snapshot_stride,
            audit_level: self.diagnostics.audit_level,
        };
        cfg.check().map_err(|e| ConfigError::new("solver", e.to_string()))?;
        Ok(cfg)
    }

    pub fn audit_tol(&self) -> f64 {
        self.diagnostics.audit_tol.unwrap_or(match self.solver.linear_solver {
            LinearKind::Direct => 1e-8,
            LinearKind::ConjugateGradient => 1e-6,
        })
    }

    pub fn mesh(&self) -> Result<Mesh, ConfigError> {
        match (&self.mesh.file, self.mesh.extent, self.mesh.resolution) {
            (Some(f), _, _) => mesh_io::read_mesh(Path::new(f)).map_err(|e| ConfigError::new("mesh.file", e)),
            (None, Some(e), Some(r)) => build_box_mesh(e, r).map_err(|e| ConfigError::new("mesh", e.to_string())),
            _ => Err(ConfigError::new("mesh", "no mesh given")),
        }
    }

    pub fn space(&self) -> Result<FESpace, ConfigError> {
        let mesh = self.mesh()?;
        let res = match &self.mesh.dirichlet_tags {
            Some(t) => FESpace::with_dirichlet_tags(mesh, t.iter().copied().collect::<BTreeSet<_>>()),
            None => FESpace::new(mesh),
        };
        res.map_err(|e| ConfigError::new("mesh", e.to_string()))
    }

    fn compile_data(&self) -> Result<CompiledData, ConfigError> {
        let d = &self.data;
        Ok(CompiledData {
            body_force: d.body_force.as_ref().map(|v| compile_n("data.body_force", v)).transpose()?,
            g_d: d.g_d.as_ref().map(|v| compile_n("data.g_d", v)).transpose()?,
            g_d_rate: d.g_d_rate.as_ref().map(|v| compile_n("data.g_d_rate", v)).transpose()?,
            g_theta: d.g_theta.as_ref().map(|v| compile("data.g_theta", v)).transpose()?,
            heat_source: d.heat_source.as_ref().map(|v| compile("data.heat_source", v)).transpose()?,
            u0: d.u0.as_ref().map(|v| compile_n("data.u0", v)).transpose()?,
            stress0: d.stress0.as_ref().map(|v| compile_n("data.stress0", v)).transpose()?,
            theta0: d.theta0.as_ref().map(|v| compile("data.theta0", v)).transpose()?,
        })
    }

    /// Given data without lifting fields; `space` is needed for tabulated
    /// nodal input.
    pub fn given_data(&self, space: &FESpace) -> Result<GivenData, ConfigError> {
        let c = self.compile_data()?;
        let vec3 = |e: [Expr; 3]| -> thermovisc_core::fem::VectorField {
            Arc::new(move |x, t| {
                let p = Point { x, t, n: [0.0; 3] };
                [e[0].eval(&p), e[1].eval(&p), e[2].eval(&p)]
            })
        };
        let scalar = |e: Expr| -> thermovisc_core::fem::ScalarField { Arc::new(move |x, t| e.at(x, t)) };
        let mut data = GivenData {
            body_force: c.body_force.map(vec3),
            g_d: c.g_d.map(vec3),
            g_d_rate: c.g_d_rate.map(vec3),
            g_theta: c.g_theta.map(|e| -> thermovisc_core::fem::FluxField {
                Arc::new(move |x, n, t| e.eval(&Point { x, t, n }))
            }),
            heat_source: c.heat_source.map(scalar),
            u0: c.u0.map(vec3),
            stress0: c.stress0.map(|e| -> thermovisc_core::fem::TensorField {
                Arc::new(move |x| {
                    SymTensor3::from_components(core::array::from_fn(|i| e[i].at(x, 0.0)))
                })
            }),
            theta0: c.theta0.map(scalar),
            lifting: None,
        };
        if let Some(path) = &self.data.theta0_table {
            data.theta0 = Some(nodal_table(space, Path::new(path))?);
        }
        Ok(data)
    }

    pub fn exact_fields(&self) -> Result<Option<CompiledExact>, ConfigError> {
        let Some(ex) = &self.exact else {
            return Ok(None);
        };
        Ok(Some(CompiledExact {
            u: compile_n("exact.u", &ex.u)?,
            theta: compile("exact.theta", &ex.theta)?,
            stress: ex.stress.as_ref().map(|s| compile_n("exact.stress", s)).transpose()?,
        }))
    }

    pub fn material_point_path(&self) -> Result<Option<PointPath>, ConfigError> {
        let Some(mp) = &self.material_point else {
            return Ok(None);
        };
        if let Some(table) = &mp.table {
            if mp.strain_rate.is_some() || mp.dt.is_some() || mp.steps.is_some() {
                return Err(ConfigError::new(
                    "material_point.table",
                    "conflicts with dt, steps and strain_rate",
                ));
            }
            return read_point_table(Path::new(table)).map(Some);
        }
        let dt = mp
            .dt
            .ok_or_else(|| ConfigError::new("material_point.dt", "required without a table"))?;
        if !(dt > 0.0) {
            return Err(ConfigError::new("material_point.dt", "must be positive"));
        }
        let n = mp
            .steps
            .ok_or_else(|| ConfigError::new("material_point.steps", "required without a table"))?;
        if n == 0 {
            return Err(ConfigError::new("material_point.steps", "must be >= 1"));
        }
        let rate_src = mp
            .strain_rate
            .as_ref()
            .ok_or_else(|| ConfigError::new("material_point.strain_rate", "required without a table"))?;
        let rate = compile_n("material_point.strain_rate", rate_src)?;
        let theta = compile("material_point.theta", &mp.theta)?;
        let steps = (1..=n)
            .map(|i| {
                let t = i as f64 * dt;
                PathStep {
                    t,
                    dt,
                    strain_rate: SymTensor3::from_components(std::array::from_fn(|c| rate[c].at([0.0; 3], t))),
                    theta: theta.at([0.0; 3], t),
                }
            })
            .collect();
        Ok(Some(PointPath {
            theta0: theta.at([0.0; 3], 0.0),
            steps,
        }))
    }

    /// Logs every physical parameter with its unit.
    pub fn echo(&self) {
        let m = &self.material;
        let ts = &m.thermal_stress;
        let y = &m.yield_fn;
        let s = &self.solver;
        log::info!("material.mu = {} Pa", m.mu);
        log::info!("material.lambda = {} Pa", m.lambda);
        log::info!("material.r_exp = {} (dimensionless)", m.r_exp);
        log::info!("material.k = {} K (truncation level)", m.k);
        log::info!("material.thermal_stress.kind = {:?}", ts.kind);
        log::info!("material.thermal_stress.a = {} Pa", ts.a);
        log::info!("material.thermal_stress.b = {} Pa", ts.b);
        log::info!("material.thermal_stress.b_neg = {} Pa", ts.b_neg);
        log::info!("material.thermal_stress.alpha = {} (dimensionless)", ts.alpha);
        log::info!("material.yield.kind = {:?}", y.kind);
        log::info!("material.yield.d = {} Pa", y.d);
        log::info!("material.yield.d_slope = {} Pa/K", y.d_slope);
        match (&self.mesh.file, self.mesh.extent, self.mesh.resolution) {
            (Some(f), _, _) => log::info!("mesh.file = {f}"),
            (_, Some(e), Some(r)) => {
                log::info!("mesh.extent = {:?} m", e);
                log::info!("mesh.resolution = {:?} cells", r);
            }
            _ => {}
        }
        log::info!("solver.dt = {} s", s.dt);
        log::info!("solver.t_end = {} s", s.t_end);
        log::info!("solver.outer_coupling = {:?}", s.outer_coupling);
        log::info!("solver.linear_solver = {:?}", s.linear_solver);
        log::info!("solver.newton_tol = {} (relative)", s.newton_tol);
    }
}

struct CompiledData {
    body_force: Option<[Expr; 3]>,
    g_d: Option<[Expr; 3]>,
    g_d_rate: Option<[Expr; 3]>,
    g_theta: Option<Expr>,
    heat_source: Option<Expr>,
    u0: Option<[Expr; 3]>,
    stress0: Option<[Expr; 6]>,
    theta0: Option<Expr>,
}

pub struct CompiledExact {
    pub u: [Expr; 3],
    pub theta: Expr,
    pub stress: Option<[Expr; 6]>,
}

/// One backward-Euler step of the material-point driver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStep {
    /// End time of the step.
    pub t: f64,
    pub dt: f64,
    pub strain_rate: SymTensor3,
    /// Temperature at `t`.
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointPath {
    pub theta0: f64,
    pub steps: Vec<PathStep>,
}

fn read_point_table(path: &Path) -> Result<PointPath, ConfigError> {
    let key = "material_point.table";
    let err = |m: String| ConfigError::new(key, m);
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 8 {
            return Err(err(format!("row {}: expected 8 columns, found {}", i + 1, rec.len())));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| err(format!("row {}: invalid number '{w}'", i + 1))))
            .collect::<Result<_, _>>()?;
        rows.push(v);
    }
    if rows.len() < 2 {
        return Err(err("needs an initial row and at least one step".into()));
    }
    let mut steps = Vec::with_capacity(rows.len() - 1);
    for (i, w) in rows.windows(2).enumerate() {
        let dt = w[1][0] - w[0][0];
        if !(dt > 0.0) {
            return Err(err(format!("row {}: times must increase", i + 2)));
        }
        steps.push(PathStep {
            t: w[1][0],
            dt,
            strain_rate: SymTensor3::from_components(std::array::from_fn(|c| w[1][c + 1])),
            theta: w[1][7],
        });
    }
    Ok(PointPath {
        theta0: rows[0][7],
        steps,
    })
}

fn coord_key(x: [f64; 3]) -> [u64; 3] {
    x.map(f64::to_bits)
}

fn nodal_table(space: &FESpace, path: &Path) -> Result<thermovisc_core::fem::ScalarField, ConfigError> {
    let key = "data.theta0_table";
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(key, format!("cannot read {}: {e}", path.display())))?;
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|_| ConfigError::new(key, format!("invalid number '{w}'"))))
        .collect::<Result<_, _>>()?;
    let verts = space.mesh().vertices();
    if values.len() != verts.len() {
        return Err(ConfigError::new(
            key,
            format!("{} values for {} vertices", values.len(), verts.len()),
        ));
    }
    let map: HashMap<[u64; 3], f64> = verts.iter().map(|&x| coord_key(x)).zip(values).collect();
    Ok(Arc::new(move |x, _| map.get(&coord_key(x)).copied().unwrap_or(0.0)))
}
