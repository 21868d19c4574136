//! Scenario configuration: a flat `key = value` text format with dotted
//! section prefixes, full-line or trailing `#` comments, defaults for
//! everything except the mesh, the isotherm, the horizon, and the time
//! step. Parsing is strict: unknown keys, duplicates, type mismatches, and
//! constraint violations are reported with the key and line number.
//!
//! [`ScenarioConfig::to_text`] renders a canonical echo of the parsed
//! configuration (defaults included) that re-parses to an equal value, so
//! every report records exactly what was run.

use plume::assembly::{self, mat2, P0Field};
use plume::darcy::{DarcyMode, DarcyProblem};
use plume::dispersion::DispersionParams;
use plume::mesh::{Mesh, MeshError};
use plume::transport::{self, Isotherm, TransportMode, TransportParams};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, key `{key}`: {msg}")]
    Key { line: usize, key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSpec {
    /// `structured:<n>` — n-by-n squares on the domain rectangle, split
    /// into triangles.
    Structured(usize),
    /// `file:<path>` — plain-text mesh file (see the mesh format docs).
    File(String),
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Structured(n) => write!(f, "structured:{n}"),
            MeshSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

/// Uniform permeability: isotropic, diagonal, or full symmetric 2x2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaSpec {
    Iso(f64),
    Diag(f64, f64),
    /// `full:a,b,c` is the symmetric matrix [[a, b], [b, c]].
    Full(f64, f64, f64),
}

impl KappaSpec {
    pub fn tensor(&self) -> mat2::Mat2 {
        match *self {
            KappaSpec::Iso(a) => [[a, 0.0], [0.0, a]],
            KappaSpec::Diag(a, b) => [[a, 0.0], [0.0, b]],
            KappaSpec::Full(a, b, c) => [[a, b], [b, c]],
        }
    }
}

impl fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KappaSpec::Iso(a) => write!(f, "{a}"),
            KappaSpec::Diag(a, b) => write!(f, "diag:{a},{b}"),
            KappaSpec::Full(a, b, c) => write!(f, "full:{a},{b},{c}"),
        }
    }
}

/// Scalar field over the domain, used for sources, coefficients, and the
/// initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    /// `sinsin[:amp]` — `amp sin(pi x') sin(pi y')` in domain-normalized
    /// coordinates (vanishes on the boundary of the domain rectangle).
    SinSin { amp: f64 },
    /// `gaussian:cx,cy,sigma,amp` — isotropic bump `amp exp(-r^2/(2 sigma^2))`.
    Gaussian { cx: f64, cy: f64, sigma: f64, amp: f64 },
    /// `box:x0,y0,x1,y1,amp` — `amp` on cells whose centroid lies in the
    /// rectangle, 0 elsewhere (already cellwise-constant, no averaging).
    Box { x0: f64, y0: f64, x1: f64, y1: f64, amp: f64 },
}

impl FieldSpec {
    fn parse(s: &str) -> Result<FieldSpec, String> {
        if let Ok(v) = s.parse::<f64>() {
            if !v.is_finite() {
                return Err(format!("constant field must be finite, got {v}"));
            }
            return Ok(FieldSpec::Constant(v));
        }
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match head {
            "sinsin" => {
                let amp = match rest {
                    Some(r) => parse_numbers(r, 1)?[0],
                    None => 1.0,
                };
                Ok(FieldSpec::SinSin { amp })
            }
            "gaussian" => {
                let v = parse_numbers(rest.unwrap_or(""), 4)?;
                if v[2] <= 0.0 {
                    return Err(format!("gaussian width must be positive, got {}", v[2]));
                }
                Ok(FieldSpec::Gaussian { cx: v[0], cy: v[1], sigma: v[2], amp: v[3] })
            }
            "box" => {
                let v = parse_numbers(rest.unwrap_or(""), 5)?;
                if v[2] <= v[0] || v[3] <= v[1] {
                    return Err("box needs x1 > x0 and y1 > y0".into());
                }
                Ok(FieldSpec::Box { x0: v[0], y0: v[1], x1: v[2], y1: v[3], amp: v[4] })
            }
            _ => Err(format!(
                "expected a number, `sinsin[:amp]`, `gaussian:cx,cy,sigma,amp`, \
                 or `box:x0,y0,x1,y1,amp`; got `{s}`"
            )),
        }
    }

    /// Pointwise value; `domain` normalizes the sinsin coordinates.
    pub fn eval(&self, domain: [f64; 4], x: [f64; 2]) -> f64 {
        match *self {
            FieldSpec::Constant(v) => v,
            FieldSpec::SinSin { amp } => {
                let u = (x[0] - domain[0]) / (domain[2] - domain[0]);
                let v = (x[1] - domain[1]) / (domain[3] - domain[1]);
                amp * (std::f64::consts::PI * u).sin() * (std::f64::consts::PI * v).sin()
            }
            FieldSpec::Gaussian { cx, cy, sigma, amp } => {
                let r2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
                amp * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            FieldSpec::Box { x0, y0, x1, y1, amp } => {
                if x[0] >= x0 && x[0] <= x1 && x[1] >= y0 && x[1] <= y1 {
                    amp
                } else {
                    0.0
                }
            }
        }
    }

    /// Cellwise field: averaged for smooth shapes, centroid membership for
    /// the box indicator (which is meant to be cellwise sharp).
    pub fn materialize(&self, mesh: &Mesh, domain: [f64; 4]) -> P0Field {
        match self {
            FieldSpec::Box { .. } => P0Field {
                values: mesh.cells.iter().map(|c| self.eval(domain, c.centroid)).collect(),
            },
            _ => assembly::project_p0(mesh, |x| self.eval(domain, x)),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FieldSpec::Constant(v) => write!(f, "{v}"),
            FieldSpec::SinSin { amp } => write!(f, "sinsin:{amp}"),
            FieldSpec::Gaussian { cx, cy, sigma, amp } => {
                write!(f, "gaussian:{cx},{cy},{sigma},{amp}")
            }
            FieldSpec::Box { x0, y0, x1, y1, amp } => write!(f, "box:{x0},{y0},{x1},{y1},{amp}"),
        }
    }
}

/// Time step selection: explicit, or derived from the mesh size by the
/// step-size rule `tau = (c_cfl h^2)^(1/(1-epsilon))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeControl {
    Tau(f64),
    Cfl { epsilon: f64, c_cfl: f64 },
}

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_C_CFL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mesh: MeshSpec,
    /// Domain rectangle `x0,y0,x1,y1` (structured meshes are built on it;
    /// for file meshes it only normalizes `sinsin` fields and defaults to
    /// the mesh bounding box).
    pub domain: [f64; 4],
    pub darcy_mode: DarcyMode,
    pub kappa: KappaSpec,
    pub g: FieldSpec,
    /// Prescribed boundary head (Dirichlet flow mode only).
    pub boundary_head: Option<FieldSpec>,
    pub transport_mode: TransportMode,
    pub retardation: f64,
    pub porosity: FieldSpec,
    pub s_m: f64,
    pub alpha_l: f64,
    pub alpha_t: f64,
    pub isotherm: Isotherm,
    pub p: FieldSpec,
    pub c0: FieldSpec,
    pub time: TimeControl,
    pub t_final: f64,
    pub cadence: usize,
}

fn parse_numbers(s: &str, expected: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != expected {
        return Err(format!("expected {expected} comma-separated numbers, got {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(format!("`{p}` is not finite"))
                    }
                })
        })
        .collect()
}

fn parse_isotherm(s: &str) -> Result<Isotherm, String> {
    let (head, rest) = s.split_once(':').ok_or_else(|| {
        format!("expected `linear:k`, `freundlich:k,k2`, or `langmuir:k,k2`; got `{s}`")
    })?;
    match head {
        "linear" => Ok(Isotherm::Linear { k: parse_numbers(rest, 1)?[0] }),
        "freundlich" => {
            let v = parse_numbers(rest, 2)?;
            Ok(Isotherm::Freundlich { k: v[0], k2: v[1] })
        }
        "langmuir" => {
            let v = parse_numbers(rest, 2)?;
            Ok(Isotherm::Langmuir { k: v[0], k2: v[1] })
        }
        _ => Err(format!("unknown isotherm `{head}` (linear, freundlich, langmuir)")),
    }
}

fn isotherm_text(i: &Isotherm) -> String {
    match *i {
        Isotherm::Linear { k } => format!("linear:{k}"),
        Isotherm::Freundlich { k, k2 } => format!("freundlich:{k},{k2}"),
        Isotherm::Langmuir { k, k2 } => format!("langmuir:{k},{k2}"),
    }
}

fn parse_kappa(s: &str) -> Result<KappaSpec, String> {
    if let Ok(v) = s.parse::<f64>() {
        if !(v.is_finite() && v > 0.0) {
            return Err(format!("isotropic permeability must be positive, got {v}"));
        }
        return Ok(KappaSpec::Iso(v));
    }
    match s.split_once(':') {
        Some(("diag", r)) => {
            let v = parse_numbers(r, 2)?;
            Ok(KappaSpec::Diag(v[0], v[1]))
        }
        Some(("full", r)) => {
            let v = parse_numbers(r, 3)?;
            Ok(KappaSpec::Full(v[0], v[1], v[2]))
        }
        _ => Err(format!("expected a number, `diag:a,b`, or `full:a,b,c`; got `{s}`")),
    }
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ScenarioConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut seen: Vec<(String, usize)> = Vec::new();
        let mut mesh = None;
        let mut domain = None;
        let mut darcy_mode = None;
        let mut kappa = None;
        let mut g = None;
        let mut boundary_head = None;
        let mut transport_mode = None;
        let mut retardation = None;
        let mut porosity = None;
        let mut s_m = None;
        let mut alpha_l = None;
        let mut alpha_t = None;
        let mut isotherm = None;
        let mut p_field = None;
        let mut c0 = None;
        let mut tau = None;
        let mut cfl = None;
        let mut t_final = None;
        let mut cadence = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Key {
                line,
                key: content.to_string(),
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let err = |msg: String| ConfigError::Key { line, key: key.to_string(), msg };
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(err(format!("duplicate key (first set on line {first})")));
            }
            seen.push((key.to_string(), line));

            let f64_value = || -> Result<f64, ConfigError> {
                Ok(parse_numbers(value, 1).map_err(&err)?[0])
            };
            match key {
                "mesh" => {
                    mesh = Some(match value.split_once(':') {
                        Some(("structured", n)) => {
                            let n: usize = n
                                .trim()
                                .parse()
                                .map_err(|_| err(format!("`{n}` is not a cell count")))?;
                            if n == 0 {
                                return Err(err("structured mesh needs n >= 1".into()));
                            }
                            MeshSpec::Structured(n)
                        }
                        Some(("file", p)) => {
                            let p = p.trim();
                            if !Path::new(p).exists() {
                                return Err(err(format!("mesh file `{p}` does not exist")));
                            }
                            MeshSpec::File(p.to_string())
                        }
                        _ => {
                            return Err(err(format!(
                                "expected `structured:<n>` or `file:<path>`, got `{value}`"
                            )))
                        }
                    });
                }
                "domain" => {
                    let v = parse_numbers(value, 4).map_err(&err)?;
                    if v[2] <= v[0] || v[3] <= v[1] {
                        return Err(err("domain needs x1 > x0 and y1 > y0".into()));
                    }
                    domain = Some([v[0], v[1], v[2], v[3]]);
                }
                "darcy.mode" => {
                    darcy_mode = Some(match value {
                        "dirichlet" => DarcyMode::Dirichlet,
                        "neumann" => DarcyMode::Neumann,
                        _ => return Err(err(format!("expected dirichlet or neumann, got `{value}`"))),
                    });
                }
                "darcy.kappa" => kappa = Some(parse_kappa(value).map_err(&err)?),
                "darcy.g" => g = Some(FieldSpec::parse(value).map_err(&err)?),
                "darcy.boundary_head" => {
                    boundary_head = Some(FieldSpec::parse(value).map_err(&err)?)
                }
                "transport.mode" => {
                    transport_mode = Some(match value {
                        "dirichlet" => TransportMode::Dirichlet,
                        "neumann" => TransportMode::Neumann,
                        _ => return Err(err(format!("expected dirichlet or neumann, got `{value}`"))),
                    });
                }
                "transport.retardation" => retardation = Some(f64_value()?),
                "transport.porosity" => porosity = Some(FieldSpec::parse(value).map_err(&err)?),
                "transport.s_m" => s_m = Some(f64_value()?),
                "transport.alpha_l" => alpha_l = Some(f64_value()?),
                "transport.alpha_t" => alpha_t = Some(f64_value()?),
                "transport.isotherm" => isotherm = Some(parse_isotherm(value).map_err(&err)?),
                "transport.p" => p_field = Some(FieldSpec::parse(value).map_err(&err)?),
                "transport.c0" => c0 = Some(FieldSpec::parse(value).map_err(&err)?),
                "time.tau" => tau = Some(f64_value()?),
                "time.cfl" => {
                    cfl = Some(if value == "default" {
                        (DEFAULT_EPSILON, DEFAULT_C_CFL)
                    } else {
                        let v = parse_numbers(value, 2).map_err(&err)?;
                        (v[0], v[1])
                    });
                }
                "time.t_final" => t_final = Some(f64_value()?),
                "output.cadence" => {
                    cadence = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| err(format!("`{value}` is not a step count")))?,
                    );
                }
                _ => return Err(err("unknown key".into())),
            }
        }

        let mesh = mesh.ok_or_else(|| ConfigError::Invalid("missing required key `mesh`".into()))?;
        let isotherm = isotherm
            .ok_or_else(|| ConfigError::Invalid("missing required key `transport.isotherm`".into()))?;
        let t_final = t_final
            .ok_or_else(|| ConfigError::Invalid("missing required key `time.t_final`".into()))?;
        let time = match (tau, cfl) {
            (Some(t), None) => TimeControl::Tau(t),
            (None, Some((epsilon, c_cfl))) => TimeControl::Cfl { epsilon, c_cfl },
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "`time.tau` and `time.cfl` are mutually exclusive; give exactly one".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError::Invalid(
                    "give exactly one of `time.tau` and `time.cfl`".into(),
                ))
            }
        };

        let config = ScenarioConfig {
            mesh,
            domain: domain.unwrap_or([0.0, 0.0, 1.0, 1.0]),
            darcy_mode: darcy_mode.unwrap_or(DarcyMode::Dirichlet),
            kappa: kappa.unwrap_or(KappaSpec::Iso(1.0)),
            g: g.unwrap_or(FieldSpec::Constant(0.0)),
            boundary_head,
            transport_mode: transport_mode.unwrap_or(TransportMode::Neumann),
            retardation: retardation.unwrap_or(1.0),
            porosity: porosity.unwrap_or(FieldSpec::Constant(1.0)),
            s_m: s_m.unwrap_or(1.0),
            alpha_l: alpha_l.unwrap_or(1.0),
            alpha_t: alpha_t.unwrap_or(0.0),
            isotherm,
            p: p_field.unwrap_or(FieldSpec::Constant(0.0)),
            c0: c0.unwrap_or(FieldSpec::Constant(0.0)),
            time,
            t_final,
            cadence: cadence.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| ConfigError::Invalid(msg);
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid(format!(
                "`time.t_final` must be positive, got {}",
                self.t_final
            )));
        }
        match self.time {
            TimeControl::Tau(t) => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(invalid(format!("`time.tau` must be positive, got {t}")));
                }
            }
            TimeControl::Cfl { epsilon, c_cfl } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(invalid(format!(
                        "`time.cfl` epsilon must lie in (0, 1), got {epsilon}"
                    )));
                }
                if !(c_cfl.is_finite() && c_cfl > 0.0) {
                    return Err(invalid(format!(
                        "`time.cfl` constant must be positive, got {c_cfl}"
                    )));
                }
            }
        }
        if self.cadence == 0 {
            return Err(invalid("`output.cadence` must be at least 1".into()));
        }
        if !(self.retardation.is_finite() && self.retardation > 0.0) {
            return Err(invalid(format!(
                "`transport.retardation` must be positive, got {}",
                self.retardation
            )));
        }
        // Admissibility of the dispersion coefficients.
        DispersionParams::new(self.s_m, self.alpha_l, self.alpha_t)
            .map_err(|e| invalid(format!("`transport.alpha_l`/`transport.alpha_t`/`transport.s_m`: {e}")))?;
        self.isotherm
            .validate()
            .map_err(|e| invalid(format!("`transport.isotherm`: {e}")))?;
        if !mat2::is_spd(&self.kappa.tensor()) {
            return Err(invalid(format!(
                "`darcy.kappa` must be symmetric positive definite, got {}",
                self.kappa
            )));
        }
        if self.boundary_head.is_some() && self.darcy_mode == DarcyMode::Neumann {
            return Err(invalid(
                "`darcy.boundary_head` requires `darcy.mode = dirichlet`".into(),
            ));
        }
        Ok(())
    }

    /// Canonical echo: every key, defaults included, in a fixed order.
    /// Re-parsing the result reproduces this configuration exactly.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "mesh = {}", self.mesh);
        let _ = writeln!(
            s,
            "domain = {},{},{},{}",
            self.domain[0], self.domain[1], self.domain[2], self.domain[3]
        );
        let _ = writeln!(
            s,
            "darcy.mode = {}",
            match self.darcy_mode {
                DarcyMode::Dirichlet => "dirichlet",
                DarcyMode::Neumann => "neumann",
            }
        );
        let _ = writeln!(s, "darcy.kappa = {}", self.kappa);
        let _ = writeln!(s, "darcy.g = {}", self.g);
        if let Some(bh) = &self.boundary_head {
            let _ = writeln!(s, "darcy.boundary_head = {bh}");
        }
        let _ = writeln!(
            s,
            "transport.mode = {}",
            match self.transport_mode {
                TransportMode::Dirichlet => "dirichlet",
                TransportMode::Neumann => "neumann",
            }
        );
        let _ = writeln!(s, "transport.retardation = {}", self.retardation);
        let _ = writeln!(s, "transport.porosity = {}", self.porosity);
        let _ = writeln!(s, "transport.s_m = {}", self.s_m);
        let _ = writeln!(s, "transport.alpha_l = {}", self.alpha_l);
        let _ = writeln!(s, "transport.alpha_t = {}", self.alpha_t);
        let _ = writeln!(s, "transport.isotherm = {}", isotherm_text(&self.isotherm));
        let _ = writeln!(s, "transport.p = {}", self.p);
        let _ = writeln!(s, "transport.c0 = {}", self.c0);
        match self.time {
            TimeControl::Tau(t) => {
                let _ = writeln!(s, "time.tau = {t}");
            }
            TimeControl::Cfl { epsilon, c_cfl } => {
                let _ = writeln!(s, "time.cfl = {epsilon},{c_cfl}");
            }
        }
        let _ = writeln!(s, "time.t_final = {}", self.t_final);
        let _ = writeln!(s, "output.cadence = {}", self.cadence);
        s
    }

    /// Build the mesh and the solver inputs.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let mesh = match &self.mesh {
            MeshSpec::Structured(n) => Mesh::structured(*n, self.domain)?,
            MeshSpec::File(path) => Mesh::load(path)?,
        };
        // For file meshes, sinsin fields normalize over the bounding box.
        let domain = match &self.mesh {
            MeshSpec::Structured(_) => self.domain,
            MeshSpec::File(_) => {
                let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
                for v in &mesh.vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                [lo[0], lo[1], hi[0], hi[1]]
            }
        };

        let boundary_head = self.boundary_head.as_ref().map(|spec| {
            let mut bh = vec![0.0; mesh.edges.len()];
            for &e in &mesh.boundary_edges {
                bh[e] = assembly::edge_average(&mesh, e, |x| spec.eval(domain, x));
            }
            bh
        });
        let darcy = DarcyProblem {
            kappa: assembly::uniform_tensors(&mesh, self.kappa.tensor()),
            g: self.g.materialize(&mesh, domain),
            mode: self.darcy_mode,
            boundary_head,
        };
        let dispersion = DispersionParams::new(self.s_m, self.alpha_l, self.alpha_t)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let transport = TransportParams {
            retardation: self.retardation,
            porosity: self.porosity.materialize(&mesh, domain),
            dispersion,
            isotherm: self.isotherm,
            g: self.g.materialize(&mesh, domain),
            p: self.p.materialize(&mesh, domain),
            mode: self.transport_mode,
            c0: self.c0.materialize(&mesh, domain),
        };
        let tau = match self.time {
            TimeControl::Tau(t) => t,
            TimeControl::Cfl { epsilon, c_cfl } => {
                transport::cfl_timestep(mesh.h(), 2.0, epsilon, c_cfl)
            }
        };
        Ok(Scenario {
            mesh,
            domain,
            darcy,
            transport,
            tau,
            t_final: self.t_final,
            cadence: self.cadence,
        })
    }
}

/// Materialized scenario: everything the solver needs.
pub struct Scenario {
    pub mesh: Mesh,
    pub domain: [f64; 4],
    pub darcy: DarcyProblem,
    pub transport: TransportParams,
    /// Requested step (the run shrinks it to divide `t_final` exactly).
    pub tau: f64,
    pub t_final: f64,
    pub cadence: usize,
}
