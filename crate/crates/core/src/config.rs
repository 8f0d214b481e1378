//! Scenario configuration: a TOML document with nested sections.
//!
//! ```toml
//! name = "impact"
//!
//! [grid]
//! nx = 400          # ny / dy / origin_y make the grid 2D
//! dx = 1e-4
//! origin = 0.0
//!
//! [material]
//! model = "feng"    # or "linear"
//! rho0 = 2500.0
//! c1 = 7.0e10
//! lambda = 1.0
//! d1 = 6.6
//! d2 = 13.2
//! source_law = "logistic"   # or "linear-decay"
//! source_rate = 4.2e5
//! gamma_max = 1.0
//!
//! [time]
//! dt = 1e-9
//! t_end = 1e-5
//! damage_scheme = "crank-nicolson"   # or "explicit"
//!
//! [initial.gamma]
//! kind = "gaussian"   # zero | constant | sine | gaussian | step | table
//! amplitude = 1.0
//! center = 0.02
//! width = 1e-3
//!
//! [boundary.left]
//! kind = "traction"   # fixed | free | traction | velocity | periodic
//! value = -4.0e9
//! ramp = 2e-8
//!
//! [boundary.gamma_left]
//! kind = "dirichlet"  # dirichlet | zero-flux | periodic
//! value = 1.0
//!
//! [output]
//! snapshot_every = 100
//! gauges = [0.0045]
//!
//! [analysis]
//! front_level = 0.5
//! ```
//!
//! All quantities are SI. Omitted sections fall back to quiescent defaults:
//! zero initial data, free elastic ends, zero-flux damage ends.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::{Grid, Grid1D, Grid2D};
use crate::params::{MaterialParams, Model, SourceLaw};
use crate::solver::elastic;
use crate::state::FieldState;

/// Spatial profile used for initial data and body forces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · sin(modes · π · (X − X₀) / L)` over the `X` extent.
    Sine {
        amplitude: f64,
        modes: f64,
    },
    /// Gaussian with standard deviation `width`; 2D when `center_y` is set.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
        center_y: Option<f64>,
    },
    /// `left` for `X < at`, `right` otherwise.
    Step {
        left: f64,
        right: f64,
        at: f64,
    },
    Table {
        values: Vec<f64>,
    },
}

impl Profile {
    pub fn sample(&self, grid: &Grid, what: &str) -> Result<Vec<f64>> {
        let n = grid.len();
        if let Profile::Table { values } = self {
            if values.len() != n {
                return Err(Error::ShapeMismatch {
                    what: what.to_string(),
                    expected: n,
                    got: values.len(),
                });
            }
            return Ok(values.clone());
        }
        let mut out = Vec::with_capacity(n);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                out.push(self.eval(grid, grid.x(i), grid.y(j)));
            }
        }
        Ok(out)
    }

    fn eval(&self, grid: &Grid, x: f64, y: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => value,
            Profile::Sine { amplitude, modes } => {
                let s = (x - grid.origin_x()) / grid.length_x();
                amplitude * (modes * std::f64::consts::PI * s).sin()
            }
            Profile::Gaussian {
                amplitude,
                center,
                width,
                center_y,
            } => {
                let mut r2 = (x - center).powi(2);
                if let (Some(cy), true) = (center_y, grid.is_2d()) {
                    r2 += (y - cy).powi(2);
                }
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Profile::Step { left, right, at } => {
                if x < at {
                    left
                } else {
                    right
                }
            }
            Profile::Table { .. } => unreachable!("tables are sampled directly"),
        }
    }
}

/// Time history of a boundary load: linear ramp over `ramp` seconds, hold,
/// and release after `duration` when set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub value: f64,
    pub ramp: f64,
    pub duration: Option<f64>,
}

impl Loading {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            ramp: 0.0,
            duration: None,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        if let Some(d) = self.duration {
            if t > d {
                return 0.0;
            }
        }
        if self.ramp > 0.0 && t < self.ramp {
            self.value * t / self.ramp
        } else {
            self.value
        }
    }

    /// `∫₀ᵗ at(s) ds`, used to turn a velocity history into a displacement.
    pub fn integral(&self, t: f64) -> f64 {
        let t_hold_end = self.duration.map_or(t, |d| t.min(d));
        let r = self.ramp.max(0.0);
        if t_hold_end <= r {
            if r > 0.0 {
                0.5 * self.value * t_hold_end * t_hold_end / r
            } else {
                0.0
            }
        } else {
            0.5 * self.value * r + self.value * (t_hold_end - r)
        }
    }
}

/// Elastic boundary condition on one `X` end. Stress values are the first
/// Piola–Kirchhoff stress on that face (negative = compression).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ElasticBc {
    Fixed,
    Free,
    Traction(Loading),
    Velocity(Loading),
    Periodic,
}

/// Damage boundary condition on one `X` end. Transverse ends of 2D grids are
/// always zero-flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DamageBc {
    Dirichlet(f64),
    ZeroFlux,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: ElasticBc,
    pub right: ElasticBc,
    pub gamma_left: DamageBc,
    pub gamma_right: DamageBc,
}

impl Default for Boundaries {
    fn default() -> Self {
        Self {
            left: ElasticBc::Free,
            right: ElasticBc::Free,
            gamma_left: DamageBc::ZeroFlux,
            gamma_right: DamageBc::ZeroFlux,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DamageScheme {
    CrankNicolson,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u: Profile,
    pub v: Profile,
    pub gamma: Profile,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            u: Profile::Zero,
            v: Profile::Zero,
            gamma: Profile::Zero,
        }
    }
}

/// Embedded gauge at a material point. `y` is ignored on 1D grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    /// Snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    /// Front detection level as a fraction of the reference damage.
    pub front_level: f64,
    /// Crack-tip speed `v₀` (m/s) for the lateral-diffusion ratio diagnostic.
    pub crack_tip_speed: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            front_level: 0.5,
            crack_tip_speed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: Grid,
    pub material: MaterialParams,
    pub dt: f64,
    pub t_end: f64,
    pub damage_scheme: DamageScheme,
    pub ic: InitialData,
    pub bc: Boundaries,
    /// Specific body force `r(X)` (m/s²), constant in time.
    pub body_force: Profile,
    pub gauges: Vec<Gauge>,
    pub output: OutputSpec,
    pub analysis: AnalysisSpec,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.material.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidValue("time.dt".into(), "must be > 0".into()));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::InvalidValue("time.t_end".into(), "must be >= dt".into()));
        }
        let lp = matches!(self.bc.left, ElasticBc::Periodic);
        let rp = matches!(self.bc.right, ElasticBc::Periodic);
        if lp != rp {
            return Err(Error::InvalidValue(
                "boundary".into(),
                "periodic elastic ends must be paired".into(),
            ));
        }
        let lp = matches!(self.bc.gamma_left, DamageBc::Periodic);
        let rp = matches!(self.bc.gamma_right, DamageBc::Periodic);
        if lp != rp {
            return Err(Error::InvalidValue(
                "boundary".into(),
                "periodic damage ends must be paired".into(),
            ));
        }
        for l in [self.bc.left, self.bc.right] {
            if let ElasticBc::Traction(l) | ElasticBc::Velocity(l) = l {
                if !l.value.is_finite() || l.ramp < 0.0 || l.duration.is_some_and(|d| d < 0.0) {
                    return Err(Error::InvalidValue("boundary".into(), "bad loading history".into()));
                }
            }
        }
        for (k, g) in self.gauges.iter().enumerate() {
            if self.grid.locate(g.x, g.y).is_none() {
                return Err(Error::InvalidValue(
                    format!("output.gauges[{k}]"),
                    "gauge lies outside the grid".into(),
                ));
            }
        }
        let lvl = self.analysis.front_level;
        if !(lvl > 0.0 && lvl < 1.0) {
            return Err(Error::InvalidValue(
                "analysis.front_level".into(),
                "must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    /// Same scenario with spacing and time step divided by `factor`; gauge
    /// positions, profiles and loads are unchanged. Tabulated data cannot be
    /// refined.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let ic = &self.ic;
        for (name, p) in [("u", &ic.u), ("v", &ic.v), ("gamma", &ic.gamma), ("body_force", &self.body_force)] {
            if matches!(p, Profile::Table { .. }) {
                return Err(Error::ConfigConflict(format!(
                    "cannot refine tabulated profile `{name}`"
                )));
            }
        }
        let mut out = self.clone();
        out.grid = self.grid.refined(factor);
        out.dt = self.dt / factor as f64;
        out.output.snapshot_every = self.output.snapshot_every * factor;
        Ok(out)
    }

    /// Canonical TOML form; `build_scenario` on it reproduces `self`.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("name".into(), Value::String(self.name.clone()));

        let mut g = Table::new();
        match self.grid {
            Grid::D1(g1) => {
                g.insert("nx".into(), Value::Integer(g1.nx as i64));
                g.insert("dx".into(), Value::Float(g1.dx));
                g.insert("origin".into(), Value::Float(g1.origin));
            }
            Grid::D2(g2) => {
                g.insert("nx".into(), Value::Integer(g2.nx as i64));
                g.insert("ny".into(), Value::Integer(g2.ny as i64));
                g.insert("dx".into(), Value::Float(g2.dx));
                g.insert("dy".into(), Value::Float(g2.dy));
                g.insert("origin".into(), Value::Float(g2.origin[0]));
                g.insert("origin_y".into(), Value::Float(g2.origin[1]));
            }
        }
        root.insert("grid".into(), Value::Table(g));

        let p = &self.material;
        let mut m = Table::new();
        m.insert(
            "model".into(),
            Value::String(match p.model {
                Model::Feng => "feng",
                Model::Linear => "linear",
            }
            .into()),
        );
        for (k, v) in [
            ("rho0", p.rho0),
            ("theta0", p.theta0),
            ("c1", p.c1),
            ("c2", p.c2),
            ("c3", p.c3),
            ("lambda", p.lambda),
            ("d1", p.d1),
            ("d2", p.d2),
            ("b", p.b),
            ("sigma0", p.sigma0),
        ] {
            m.insert(k.into(), Value::Float(v));
        }
        match p.source_law {
            SourceLaw::LinearDecay => {
                m.insert("source_law".into(), Value::String("linear-decay".into()));
            }
            SourceLaw::Logistic { rate, gamma_max } => {
                m.insert("source_law".into(), Value::String("logistic".into()));
                m.insert("source_rate".into(), Value::Float(rate));
                m.insert("gamma_max".into(), Value::Float(gamma_max));
            }
        }
        root.insert("material".into(), Value::Table(m));

        let mut t = Table::new();
        t.insert("dt".into(), Value::Float(self.dt));
        t.insert("t_end".into(), Value::Float(self.t_end));
        t.insert(
            "damage_scheme".into(),
            Value::String(match self.damage_scheme {
                DamageScheme::CrankNicolson => "crank-nicolson",
                DamageScheme::Explicit => "explicit",
            }
            .into()),
        );
        root.insert("time".into(), Value::Table(t));

        let mut ic = Table::new();
        ic.insert("u".into(), Value::Table(profile_to_table(&self.ic.u)));
        ic.insert("v".into(), Value::Table(profile_to_table(&self.ic.v)));
        ic.insert("gamma".into(), Value::Table(profile_to_table(&self.ic.gamma)));
        root.insert("initial".into(), Value::Table(ic));

        let mut bc = Table::new();
        bc.insert("left".into(), Value::Table(elastic_bc_to_table(&self.bc.left)));
        bc.insert("right".into(), Value::Table(elastic_bc_to_table(&self.bc.right)));
        bc.insert("gamma_left".into(), Value::Table(damage_bc_to_table(&self.bc.gamma_left)));
        bc.insert("gamma_right".into(), Value::Table(damage_bc_to_table(&self.bc.gamma_right)));
        root.insert("boundary".into(), Value::Table(bc));

        root.insert("body_force".into(), Value::Table(profile_to_table(&self.body_force)));

        let mut o = Table::new();
        o.insert("snapshot_every".into(), Value::Integer(self.output.snapshot_every as i64));
        if let Some(d) = &self.output.dir {
            o.insert("dir".into(), Value::String(d.clone()));
        }
        let gauges = self
            .gauges
            .iter()
            .map(|g| {
                if self.grid.is_2d() {
                    Value::Array(vec![Value::Float(g.x), Value::Float(g.y)])
                } else {
                    Value::Float(g.x)
                }
            })
            .collect();
        o.insert("gauges".into(), Value::Array(gauges));
        root.insert("output".into(), Value::Table(o));

        let mut a = Table::new();
        a.insert("front_level".into(), Value::Float(self.analysis.front_level));
        if let Some(v0) = self.analysis.crack_tip_speed {
            a.insert("crack_tip_speed".into(), Value::Float(v0));
        }
        root.insert("analysis".into(), Value::Table(a));

        toml::to_string(&root).expect("config tables always serialize")
    }
}

fn profile_to_table(p: &Profile) -> Table {
    let mut t = Table::new();
    let mut put = |k: &str, v: f64| {
        t.insert(k.into(), Value::Float(v));
    };
    let kind = match p {
        Profile::Zero => "zero",
        Profile::Constant { value } => {
            put("value", *value);
            "constant"
        }
        Profile::Sine { amplitude, modes } => {
            put("amplitude", *amplitude);
            put("modes", *modes);
            "sine"
        }
        Profile::Gaussian {
            amplitude,
            center,
            width,
            center_y,
        } => {
            put("amplitude", *amplitude);
            put("center", *center);
            put("width", *width);
            if let Some(cy) = center_y {
                put("center_y", *cy);
            }
            "gaussian"
        }
        Profile::Step { left, right, at } => {
            put("left", *left);
            put("right", *right);
            put("at", *at);
            "step"
        }
        Profile::Table { values } => {
            t.insert(
                "values".into(),
                Value::Array(values.iter().map(|v| Value::Float(*v)).collect()),
            );
            "table"
        }
    };
    t.insert("kind".into(), Value::String(kind.into()));
    t
}

fn loading_to_table(t: &mut Table, l: &Loading) {
    t.insert("value".into(), Value::Float(l.value));
    t.insert("ramp".into(), Value::Float(l.ramp));
    if let Some(d) = l.duration {
        t.insert("duration".into(), Value::Float(d));
    }
}

fn elastic_bc_to_table(bc: &ElasticBc) -> Table {
    let mut t = Table::new();
    let kind = match bc {
        ElasticBc::Fixed => "fixed",
        ElasticBc::Free => "free",
        ElasticBc::Periodic => "periodic",
        ElasticBc::Traction(l) => {
            loading_to_table(&mut t, l);
            "traction"
        }
        ElasticBc::Velocity(l) => {
            loading_to_table(&mut t, l);
            "velocity"
        }
    };
    t.insert("kind".into(), Value::String(kind.into()));
    t
}

fn damage_bc_to_table(bc: &DamageBc) -> Table {
    let mut t = Table::new();
    let kind = match bc {
        DamageBc::Dirichlet(v) => {
            t.insert("value".into(), Value::Float(*v));
            "dirichlet"
        }
        DamageBc::ZeroFlux => "zero-flux",
        DamageBc::Periodic => "periodic",
    };
    t.insert("kind".into(), Value::String(kind.into()));
    t
}

/// Read-only view of one TOML table that remembers its dotted path.
struct Section<'a> {
    path: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{}", self.path, k)
        }
    }

    fn sub(&self, k: &str) -> Result<Option<Section<'a>>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section {
                path: self.key(k),
                table: t,
            })),
            Some(_) => Err(Error::InvalidValue(self.key(k), "expected a section".into())),
        }
    }

    fn req_sub(&self, k: &str) -> Result<Section<'a>> {
        self.sub(k)?.ok_or_else(|| Error::MissingKey(self.key(k)))
    }

    fn opt_f64(&self, k: &str) -> Result<Option<f64>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(v) => as_f64(v)
                .map(Some)
                .ok_or_else(|| Error::InvalidValue(self.key(k), "expected a number".into())),
        }
    }

    fn f64(&self, k: &str) -> Result<f64> {
        self.opt_f64(k)?.ok_or_else(|| Error::MissingKey(self.key(k)))
    }

    fn f64_or(&self, k: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(k)?.unwrap_or(default))
    }

    fn opt_usize(&self, k: &str) -> Result<Option<usize>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(Error::InvalidValue(
                self.key(k),
                "expected a non-negative integer".into(),
            )),
        }
    }

    fn usize(&self, k: &str) -> Result<usize> {
        self.opt_usize(k)?.ok_or_else(|| Error::MissingKey(self.key(k)))
    }

    fn opt_str(&self, k: &str) -> Result<Option<&'a str>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(Error::InvalidValue(self.key(k), "expected a string".into())),
        }
    }

    fn str(&self, k: &str) -> Result<&'a str> {
        self.opt_str(k)?.ok_or_else(|| Error::MissingKey(self.key(k)))
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn invalid(key: String, why: &str) -> Error {
    Error::InvalidValue(key, why.to_string())
}

fn parse_grid(s: &Section) -> Result<Grid> {
    let nx = s.usize("nx")?;
    let dx = s.f64("dx")?;
    let origin = s.f64_or("origin", 0.0)?;
    let grid = match s.opt_usize("ny")? {
        None => Grid::D1(Grid1D { nx, dx, origin }),
        Some(ny) => Grid::D2(Grid2D {
            nx,
            ny,
            dx,
            dy: s.f64("dy")?,
            origin: [origin, s.f64_or("origin_y", 0.0)?],
        }),
    };
    grid.validate()?;
    Ok(grid)
}

fn parse_material(s: &Section) -> Result<MaterialParams> {
    let model = match s.opt_str("model")?.unwrap_or("feng") {
        "feng" => Model::Feng,
        "linear" => Model::Linear,
        _ => return Err(invalid(s.key("model"), "expected `feng` or `linear`")),
    };
    let source_law = match s.opt_str("source_law")?.unwrap_or("linear-decay") {
        "linear-decay" => SourceLaw::LinearDecay,
        "logistic" => SourceLaw::Logistic {
            rate: s.f64("source_rate")?,
            gamma_max: s.f64_or("gamma_max", 1.0)?,
        },
        _ => {
            return Err(invalid(
                s.key("source_law"),
                "expected `linear-decay` or `logistic`",
            ))
        }
    };
    let p = MaterialParams {
        model,
        rho0: s.f64("rho0")?,
        theta0: s.f64_or("theta0", 300.0)?,
        c1: s.f64("c1")?,
        c2: s.f64_or("c2", 0.0)?,
        c3: s.f64_or("c3", 0.0)?,
        lambda: s.f64("lambda")?,
        d1: s.f64_or("d1", 0.0)?,
        d2: s.f64_or("d2", 0.0)?,
        b: s.f64_or("b", 0.0)?,
        sigma0: s.f64_or("sigma0", 0.0)?,
        source_law,
    };
    p.validate()?;
    Ok(p)
}

fn parse_profile(s: Option<Section>) -> Result<Profile> {
    let Some(s) = s else {
        return Ok(Profile::Zero);
    };
    Ok(match s.str("kind")? {
        "zero" => Profile::Zero,
        "constant" => Profile::Constant {
            value: s.f64("value")?,
        },
        "sine" => Profile::Sine {
            amplitude: s.f64("amplitude")?,
            modes: s.f64_or("modes", 1.0)?,
        },
        "gaussian" => {
            let width = s.f64("width")?;
            if !(width > 0.0) {
                return Err(invalid(s.key("width"), "must be > 0"));
            }
            Profile::Gaussian {
                amplitude: s.f64("amplitude")?,
                center: s.f64("center")?,
                width,
                center_y: s.opt_f64("center_y")?,
            }
        }
        "step" => Profile::Step {
            left: s.f64("left")?,
            right: s.f64("right")?,
            at: s.f64("at")?,
        },
        "table" => {
            let arr = match s.table.get("values") {
                Some(Value::Array(a)) => a,
                Some(_) => return Err(invalid(s.key("values"), "expected an array")),
                None => return Err(Error::MissingKey(s.key("values"))),
            };
            let values = arr
                .iter()
                .map(|v| as_f64(v).ok_or_else(|| invalid(s.key("values"), "expected numbers")))
                .collect::<Result<Vec<_>>>()?;
            Profile::Table { values }
        }
        _ => return Err(invalid(s.key("kind"), "unknown profile kind")),
    })
}

fn parse_loading(s: &Section) -> Result<Loading> {
    Ok(Loading {
        value: s.f64("value")?,
        ramp: s.f64_or("ramp", 0.0)?,
        duration: s.opt_f64("duration")?,
    })
}

fn parse_elastic_bc(s: Option<Section>) -> Result<ElasticBc> {
    let Some(s) = s else {
        return Ok(ElasticBc::Free);
    };
    Ok(match s.str("kind")? {
        "fixed" => ElasticBc::Fixed,
        "free" => ElasticBc::Free,
        "periodic" => ElasticBc::Periodic,
        "traction" => ElasticBc::Traction(parse_loading(&s)?),
        "velocity" => ElasticBc::Velocity(parse_loading(&s)?),
        _ => return Err(invalid(s.key("kind"), "unknown elastic boundary kind")),
    })
}

fn parse_damage_bc(s: Option<Section>) -> Result<DamageBc> {
    let Some(s) = s else {
        return Ok(DamageBc::ZeroFlux);
    };
    Ok(match s.str("kind")? {
        "dirichlet" => DamageBc::Dirichlet(s.f64("value")?),
        "zero-flux" => DamageBc::ZeroFlux,
        "periodic" => DamageBc::Periodic,
        _ => return Err(invalid(s.key("kind"), "unknown damage boundary kind")),
    })
}

fn parse_gauges(s: &Section) -> Result<Vec<Gauge>> {
    let key = s.key("gauges");
    let Some(v) = s.table.get("gauges") else {
        return Ok(Vec::new());
    };
    let Value::Array(arr) = v else {
        return Err(invalid(key, "expected an array"));
    };
    arr.iter()
        .map(|g| match g {
            Value::Array(xy) if xy.len() == 2 => match (as_f64(&xy[0]), as_f64(&xy[1])) {
                (Some(x), Some(y)) => Ok(Gauge { x, y }),
                _ => Err(invalid(key.clone(), "expected numbers")),
            },
            Value::Array(x) if x.len() == 1 => as_f64(&x[0])
                .map(|x| Gauge { x, y: 0.0 })
                .ok_or_else(|| invalid(key.clone(), "expected numbers")),
            other => as_f64(other)
                .map(|x| Gauge { x, y: 0.0 })
                .ok_or_else(|| invalid(key.clone(), "expected a position")),
        })
        .collect()
}

/// Parses and validates a scenario document.
pub fn build_scenario(raw: &str) -> Result<ScenarioConfig> {
    let table: Table = raw.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let root = Section {
        path: String::new(),
        table: &table,
    };
    let name = root.opt_str("name")?.unwrap_or("scenario").to_string();
    let grid = parse_grid(&root.req_sub("grid")?)?;
    let material = parse_material(&root.req_sub("material")?)?;

    let time = root.req_sub("time")?;
    let dt = time.f64("dt")?;
    let t_end = time.f64("t_end")?;
    let damage_scheme = match time.opt_str("damage_scheme")?.unwrap_or("crank-nicolson") {
        "crank-nicolson" => DamageScheme::CrankNicolson,
        "explicit" => DamageScheme::Explicit,
        _ => {
            return Err(invalid(
                time.key("damage_scheme"),
                "expected `crank-nicolson` or `explicit`",
            ))
        }
    };

    let ic = match root.sub("initial")? {
        None => InitialData::default(),
        Some(s) => InitialData {
            u: parse_profile(s.sub("u")?)?,
            v: parse_profile(s.sub("v")?)?,
            gamma: parse_profile(s.sub("gamma")?)?,
        },
    };
    let bc = match root.sub("boundary")? {
        None => Boundaries::default(),
        Some(s) => Boundaries {
            left: parse_elastic_bc(s.sub("left")?)?,
            right: parse_elastic_bc(s.sub("right")?)?,
            gamma_left: parse_damage_bc(s.sub("gamma_left")?)?,
            gamma_right: parse_damage_bc(s.sub("gamma_right")?)?,
        },
    };
    let body_force = parse_profile(root.sub("body_force")?)?;

    let (gauges, output) = match root.sub("output")? {
        None => (Vec::new(), OutputSpec::default()),
        Some(s) => (
            parse_gauges(&s)?,
            OutputSpec {
                snapshot_every: s.opt_usize("snapshot_every")?.unwrap_or(0),
                dir: s.opt_str("dir")?.map(str::to_string),
            },
        ),
    };
    let analysis = match root.sub("analysis")? {
        None => AnalysisSpec::default(),
        Some(s) => AnalysisSpec {
            front_level: s.f64_or("front_level", 0.5)?,
            crack_tip_speed: s.opt_f64("crack_tip_speed")?,
        },
    };

    let cfg = ScenarioConfig {
        name,
        grid,
        material,
        dt,
        t_end,
        damage_scheme,
        ic,
        bc,
        body_force,
        gauges,
        output,
        analysis,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Samples the initial data at cell centres and seeds the activation mask.
pub fn initialize_state(cfg: &ScenarioConfig) -> Result<FieldState> {
    let u = cfg.ic.u.sample(&cfg.grid, "initial.u")?;
    let v = cfg.ic.v.sample(&cfg.grid, "initial.v")?;
    let gamma = cfg.ic.gamma.sample(&cfg.grid, "initial.gamma")?;
    cfg.body_force.sample(&cfg.grid, "body_force")?;
    let stress = elastic::cell_stress(&cfg.grid, &u, &cfg.bc, &cfg.material, 0.0);
    let sigma0 = cfg.material.sigma0;
    let active = gamma
        .iter()
        .zip(&stress)
        .map(|(g, s)| *g > 0.0 || s.abs() >= sigma0)
        .collect();
    Ok(FieldState {
        time: 0.0,
        u,
        v,
        gamma,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "k8"
[grid]
nx = 101
dx = 1e-4
[material]
rho0 = 2500
c1 = 7.0e10
lambda = 1.0
d1 = 6.6
d2 = 13.2
sigma0 = 1.0e6
[time]
dt = 1e-9
t_end = 1e-6
"#;

    #[test]
    fn builds_k8_like_scenario() {
        let cfg = build_scenario(BASE).unwrap();
        assert_eq!(cfg.material.rho0, 2500.0);
        assert_eq!(cfg.material.d1, 6.6);
        assert_eq!(cfg.material.d2, 13.2);
        assert_eq!(cfg.bc, Boundaries::default());
        assert_eq!(cfg.steps(), 1000);
    }

    #[test]
    fn zero_dx_is_invalid() {
        let raw = BASE.replace("dx = 1e-4", "dx = 0");
        assert_eq!(
            build_scenario(&raw),
            Err(Error::InvalidValue("dx".into(), "must be > 0".into()))
        );
    }

    #[test]
    fn missing_density_reported_by_path() {
        let raw = BASE.replace("rho0 = 2500\n", "");
        assert_eq!(build_scenario(&raw), Err(Error::MissingKey("material.rho0".into())));
    }

    #[test]
    fn negative_lambda_rejected() {
        let raw = BASE.replace("lambda = 1.0", "lambda = -1.0");
        assert!(matches!(build_scenario(&raw), Err(Error::InvalidValue(k, _)) if k == "material.lambda"));
    }

    #[test]
    fn gauge_outside_grid_rejected() {
        let raw = format!("{BASE}\n[output]\ngauges = [0.5]\n");
        assert!(matches!(build_scenario(&raw), Err(Error::InvalidValue(k, _)) if k == "output.gauges[0]"));
    }

    #[test]
    fn quiescent_body_is_zero_and_inactive() {
        let cfg = build_scenario(BASE).unwrap();
        let s = initialize_state(&cfg).unwrap();
        assert!(s.u.iter().chain(&s.v).chain(&s.gamma).all(|x| *x == 0.0));
        assert!(s.active.iter().all(|a| !a));
        assert_eq!(s.time, 0.0);
    }

    #[test]
    fn gaussian_bump_sampled_at_centre() {
        let raw = format!(
            "{BASE}\n[initial.gamma]\nkind = \"gaussian\"\namplitude = 1.0\ncenter = 0.00505\nwidth = 5e-4\n"
        );
        let cfg = build_scenario(&raw).unwrap();
        let s = initialize_state(&cfg).unwrap();
        let (imax, gmax) = s
            .gamma
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, g)| if *g > acc.1 { (i, *g) } else { acc });
        assert_eq!(imax, 50);
        assert!((gmax - 1.0).abs() < 1e-12);
        for (g, a) in s.gamma.iter().zip(&s.active) {
            assert_eq!(*g > 0.0, *a);
        }
    }

    #[test]
    fn tabulated_profile_length_checked() {
        let raw = format!("{BASE}\n[initial.u]\nkind = \"table\"\nvalues = [0.0, 1.0]\n");
        let cfg = build_scenario(&raw).unwrap();
        assert_eq!(
            initialize_state(&cfg),
            Err(Error::ShapeMismatch {
                what: "initial.u".into(),
                expected: 101,
                got: 2
            })
        );
    }

    #[test]
    fn initialization_is_deterministic() {
        let raw = format!(
            "{BASE}\n[initial.u]\nkind = \"sine\"\namplitude = 1e-6\nmodes = 3\n[initial.gamma]\nkind = \"step\"\nleft = 1\nright = 0\nat = 0.003\n"
        );
        let cfg = build_scenario(&raw).unwrap();
        assert_eq!(initialize_state(&cfg).unwrap(), initialize_state(&cfg).unwrap());
    }

    #[test]
    fn loading_history() {
        let l = Loading {
            value: 2.0,
            ramp: 1.0,
            duration: Some(3.0),
        };
        assert_eq!(l.at(0.5), 1.0);
        assert_eq!(l.at(2.0), 2.0);
        assert_eq!(l.at(3.5), 0.0);
        assert!((l.integral(0.5) - 0.25).abs() < 1e-15);
        assert!((l.integral(2.0) - 3.0).abs() < 1e-15);
        assert!((l.integral(10.0) - 5.0).abs() < 1e-15);
    }
}
