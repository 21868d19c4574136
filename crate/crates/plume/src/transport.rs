//! Semi-implicit mixed scheme for reactive transport: one linear saddle
//! solve per step for the concentration `c` and the total flux
//! `v_c = -S(v) psi grad(c) + v c`.
//!
//! With `M` the retardation-porosity-weighted cell mass matrix, `D` the
//! `S^{1/2}`-weighted divergence, `A` the `S^{-1/2} psi^{-1}`-weighted flux
//! mass matrix, `B` the divergence, and `G` the advective coupling built
//! from `q = S^{-1} psi^{-1} v`, each step solves
//!
//! ```text
//! [ M          tau D ] [ c^n  ]   [ M c^{n-1} - tau M r(c^{n-1}) + tau M p ]
//! [ -(B^T + G)  A    ] [ vc^n ] = [ 0                                      ]
//! ```
//!
//! Reaction and sources enter explicitly at `c^{n-1}`, so the matrix does
//! not depend on the state: it is factored once per run and reused. The
//! dispersion tensors are frozen per cell at the centroid value of the flow
//! velocity. In no-flow (Neumann) mode the flux unknowns are restricted to
//! the zero-trace subspace; in Dirichlet mode a zero boundary concentration
//! is the natural condition and all edge unknowns stay active.
//!
//! Solvability requires the time step to stay below a computable threshold
//! `tau* = R psi_min^3 / (2 C_disp^2 (1 + sqrt(vmax))^2 psi_max)`; the
//! stepper refuses larger steps up front, before factorization.

use crate::assembly::{
    self, assemble_div, assemble_rt0_weighted_mass, assemble_vector_coupling,
    assemble_weighted_div, mat2::Mat2, P0Field, RT0Field, SparseMatrix,
};
use crate::darcy::DarcySolution;
use crate::dispersion::{self, DispersionParams};
use crate::mesh::Mesh;
use crate::solver::{self, Factorization, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Assembly(#[from] assembly::AssemblyError),
    #[error(transparent)]
    Dispersion(#[from] dispersion::DispersionError),
    #[error("invalid transport parameter: {0}")]
    InvalidParam(String),
    #[error(
        "time step {tau:e} is at or above the solvability threshold {threshold:e}; \
         refusing to assemble"
    )]
    TimestepAboveThreshold { tau: f64, threshold: f64 },
    #[error("step system factorization failed (tau = {tau:e}, threshold = {threshold:e}): {source}")]
    Factorization {
        tau: f64,
        threshold: f64,
        source: SolverError,
    },
    #[error("linear solve failed: {0}")]
    Solver(#[from] SolverError),
}

/// Sorption reaction term `r(c)`. Negative concentrations are clamped to
/// zero before evaluation (the models are undefined or nonphysical there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isotherm {
    /// `r(c) = k c`.
    Linear { k: f64 },
    /// `r(c) = k c^k2`.
    Freundlich { k: f64, k2: f64 },
    /// `r(c) = k c / (1 + k2 c)`.
    Langmuir { k: f64, k2: f64 },
}

impl Isotherm {
    pub fn validate(&self) -> Result<(), TransportError> {
        let ok = match *self {
            Isotherm::Linear { k } => k.is_finite() && k >= 0.0,
            Isotherm::Freundlich { k, k2 } | Isotherm::Langmuir { k, k2 } => {
                k.is_finite() && k >= 0.0 && k2.is_finite() && k2 >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TransportError::InvalidParam(format!(
                "isotherm constants must be finite and nonnegative: {self:?}"
            )))
        }
    }

    pub fn eval(&self, c: f64) -> f64 {
        let c = c.max(0.0);
        match *self {
            Isotherm::Linear { k } => k * c,
            Isotherm::Freundlich { k, k2 } => k * c.powf(k2),
            Isotherm::Langmuir { k, k2 } => k * c / (1.0 + k2 * c),
        }
    }

    /// Supremum of `|r'|` on `[0, c_max]`. Infinite for the Freundlich model
    /// with exponent below one (the derivative blows up at zero).
    pub fn lipschitz(&self, c_max: f64) -> f64 {
        match *self {
            Isotherm::Linear { k } => k,
            Isotherm::Freundlich { k, k2 } => {
                if k2 > 1.0 {
                    k * k2 * c_max.powf(k2 - 1.0)
                } else if k2 == 1.0 {
                    k
                } else {
                    f64::INFINITY
                }
            }
            // Derivative k / (1 + k2 c)^2 is maximal at c = 0.
            Isotherm::Langmuir { k, .. } => k,
        }
    }

    /// False when the model violates the bounded-derivative assumption the
    /// scheme's analysis rests on (Freundlich with exponent below one).
    pub fn has_bounded_derivative(&self) -> bool {
        !matches!(*self, Isotherm::Freundlich { k2, .. } if k2 < 1.0)
    }
}

/// Boundary condition on the transport problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMode {
    /// Zero concentration on the boundary (natural; all flux unknowns active).
    Dirichlet,
    /// No total flux through the boundary (flux space restricted).
    Neumann,
}

#[derive(Debug, Clone)]
pub struct TransportParams {
    /// Retardation factor `R > 0`.
    pub retardation: f64,
    /// Cellwise porosity, strictly positive.
    pub porosity: P0Field,
    pub dispersion: DispersionParams,
    pub isotherm: Isotherm,
    /// Flow source `div v = g`. Carried for completeness of the scenario
    /// description; the flux-form scheme consumes only the velocity itself.
    pub g: P0Field,
    /// Pollutant source.
    pub p: P0Field,
    pub mode: TransportMode,
    /// Initial concentration, in `[0, 1]` cellwise.
    pub c0: P0Field,
}

impl TransportParams {
    pub fn validate(&self, mesh: &Mesh) -> Result<(), TransportError> {
        let nc = mesh.cells.len();
        for (name, len) in [
            ("porosity", self.porosity.values.len()),
            ("g", self.g.values.len()),
            ("p", self.p.values.len()),
            ("c0", self.c0.values.len()),
        ] {
            if len != nc {
                return Err(TransportError::InvalidParam(format!(
                    "{name} has {len} entries, mesh has {nc} cells"
                )));
            }
        }
        if !(self.retardation.is_finite() && self.retardation > 0.0) {
            return Err(TransportError::InvalidParam(format!(
                "retardation must be positive, got {}",
                self.retardation
            )));
        }
        if !self.porosity.values.iter().all(|&v| v.is_finite() && v > 0.0) {
            return Err(TransportError::InvalidParam(
                "porosity must be strictly positive cellwise".into(),
            ));
        }
        if !self.c0.values.iter().all(|&v| (0.0..=1.0).contains(&v)) {
            return Err(TransportError::InvalidParam(
                "initial concentration must lie in [0, 1] cellwise".into(),
            ));
        }
        self.dispersion.validate()?;
        self.isotherm.validate()?;
        if !self.isotherm.has_bounded_derivative() {
            log::warn!(
                "isotherm {:?} has an unbounded derivative near zero; \
                 the scheme's stability guarantees do not cover it",
                self.isotherm
            );
        }
        Ok(())
    }

    /// Cellwise porosity bounds `(psi_min, psi_max)`.
    pub fn porosity_bounds(&self) -> (f64, f64) {
        (self.porosity.min(), self.porosity.max())
    }
}

/// Largest time step with `tau^(1-epsilon) / h^dim <= c_cfl`, i.e.
/// `tau = (c_cfl h^dim)^(1/(1-epsilon))` nudged down by at most a few ulps
/// so the realized ratio ([`cfl_constant`]) never exceeds `c_cfl`.
pub fn cfl_timestep(h: f64, dim: f64, epsilon: f64, c_cfl: f64) -> f64 {
    assert!(h > 0.0 && c_cfl > 0.0 && epsilon > 0.0 && epsilon < 1.0);
    let mut tau = (c_cfl * h.powf(dim)).powf(1.0 / (1.0 - epsilon));
    while tau > 0.0 && cfl_constant(tau, h, dim, epsilon) > c_cfl {
        tau = tau.next_down();
    }
    tau
}

/// The realized ratio `tau^(1-epsilon) / h^dim`; stepping with `tau` is
/// compliant when this does not exceed the configured constant.
pub fn cfl_constant(tau: f64, h: f64, dim: f64, epsilon: f64) -> f64 {
    assert!(h > 0.0 && tau > 0.0 && epsilon > 0.0 && epsilon < 1.0);
    tau.powf(1.0 - epsilon) / h.powf(dim)
}

/// Solvability threshold `tau*`: steps must satisfy `tau < tau*`. Infinite
/// when the velocity vanishes (`C_disp = 0`).
pub fn solvability_threshold(params: &TransportParams, vmax: f64) -> f64 {
    let (psi_min, psi_max) = params.porosity_bounds();
    let bc = dispersion::bound_constants(&params.dispersion, vmax);
    let denom = 2.0 * bc.c_disp * bc.c_disp * (1.0 + vmax.sqrt()).powi(2) * psi_max;
    if denom == 0.0 {
        f64::INFINITY
    } else {
        params.retardation * psi_min.powi(3) / denom
    }
}

#[derive(Debug, Clone)]
pub struct TransportState {
    pub step: usize,
    pub time: f64,
    pub c: P0Field,
    /// Total flux; boundary coefficients are zero in no-flow mode.
    pub vc: RT0Field,
}

/// Scalar diagnostics recorded every step.
#[derive(Debug, Clone, Copy)]
pub struct LedgerRow {
    pub step: usize,
    pub time: f64,
    pub c_l2: f64,
    pub vc_l2: f64,
    /// Most negative cell value (0 when the state is nonnegative); the
    /// scheme does not guarantee positivity, so violations are reported.
    pub min_c: f64,
}

/// Running sums behind the scheme's a-priori energy estimates. All sums are
/// nonnegative and nondecreasing in the step count.
#[derive(Debug, Clone)]
pub struct StabilityLedger {
    /// `(1/tau) sum_n ||c^n - c^{n-1}||^2`.
    pub time_increment_energy: f64,
    /// `sup_k ||vc^k||^2`, including the initial flux.
    pub sup_flux_energy: f64,
    /// `sum_n ||vc^n - vc^{n-1}||^2`.
    pub flux_increment_energy: f64,
    /// `tau sum_n ||div(S^{1/2} vc^n)||^2` with the cell-frozen tensors.
    pub divergence_energy: f64,
    /// Per-step history (step 0 is the initial state).
    pub rows: Vec<LedgerRow>,
    /// `1 + vmax + vmax^2`: the growth rate the energy bounds scale with.
    pub bound_surrogate: f64,
}

impl StabilityLedger {
    fn new(vmax: f64) -> Self {
        StabilityLedger {
            time_increment_energy: 0.0,
            sup_flux_energy: 0.0,
            flux_increment_energy: 0.0,
            divergence_energy: 0.0,
            rows: Vec::new(),
            bound_surrogate: 1.0 + vmax + vmax * vmax,
        }
    }

    /// The three-term sum the first energy estimate bounds uniformly in `tau`.
    pub fn increment_total(&self) -> f64 {
        self.time_increment_energy + self.sup_flux_energy + self.flux_increment_energy
    }
}

/// Factored step operator: build once, advance many times.
pub struct Stepper {
    tau: f64,
    threshold: f64,
    nc: usize,
    /// Active flux unknown index -> edge index.
    active: Vec<usize>,
    /// `R psi_T |T|` per cell.
    mass_diag: Vec<f64>,
    /// `S^{1/2}`-weighted divergence over all edges (ledger and balance).
    d: SparseMatrix,
    factorization: Factorization,
    isotherm: Isotherm,
    p: Vec<f64>,
    areas: Vec<f64>,
}

fn active_edges(mesh: &Mesh, mode: TransportMode) -> (Vec<usize>, Vec<usize>) {
    let active: Vec<usize> = match mode {
        TransportMode::Dirichlet => (0..mesh.edges.len()).collect(),
        TransportMode::Neumann => (0..mesh.edges.len())
            .filter(|&e| !mesh.edges[e].is_boundary())
            .collect(),
    };
    let mut index = vec![usize::MAX; mesh.edges.len()];
    for (i, &e) in active.iter().enumerate() {
        index[e] = i;
    }
    (active, index)
}

/// Per-cell frozen tensors: `S^{1/2}`, `S^{-1/2}/psi`, and `q = S^{-1} v / psi`.
fn frozen_tensors(
    params: &TransportParams,
    velocity: &[[f64; 2]],
) -> (Vec<Mat2>, Vec<Mat2>, Vec<[f64; 2]>) {
    let mut sqrt = Vec::with_capacity(velocity.len());
    let mut inv_sqrt_psi = Vec::with_capacity(velocity.len());
    let mut q = Vec::with_capacity(velocity.len());
    for (ci, &v) in velocity.iter().enumerate() {
        let psi = params.porosity.values[ci];
        sqrt.push(dispersion::tensor_sqrt(&params.dispersion, v));
        let mut w = dispersion::tensor_inv_sqrt(&params.dispersion, v);
        for row in &mut w {
            for x in row {
                *x /= psi;
            }
        }
        inv_sqrt_psi.push(w);
        let qv = dispersion::tensor_inv_times_v(&params.dispersion, v);
        q.push([qv[0] / psi, qv[1] / psi]);
    }
    (sqrt, inv_sqrt_psi, q)
}

impl Stepper {
    pub fn new(
        mesh: &Mesh,
        params: &TransportParams,
        flow: &DarcySolution,
        tau: f64,
    ) -> Result<Self, TransportError> {
        params.validate(mesh)?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(TransportError::InvalidParam(format!(
                "time step must be positive, got {tau}"
            )));
        }
        if flow.cell_velocity.len() != mesh.cells.len() {
            return Err(TransportError::InvalidParam(format!(
                "flow velocity has {} cells, mesh has {}",
                flow.cell_velocity.len(),
                mesh.cells.len()
            )));
        }
        let threshold = solvability_threshold(params, flow.vmax);
        if tau >= threshold {
            return Err(TransportError::TimestepAboveThreshold { tau, threshold });
        }

        let (sqrt, inv_sqrt_psi, q) = frozen_tensors(params, &flow.cell_velocity);
        let a = assemble_rt0_weighted_mass(mesh, &inv_sqrt_psi)?;
        let b = assemble_div(mesh);
        let g = assemble_vector_coupling(mesh, &q)?;
        let d = assemble_weighted_div(mesh, &sqrt)?;

        let (active, active_index) = active_edges(mesh, params.mode);
        let nc = mesh.cells.len();
        let n = nc + active.len();
        let mass_diag: Vec<f64> = mesh
            .cells
            .iter()
            .zip(&params.porosity.values)
            .map(|(cell, psi)| params.retardation * psi * cell.area)
            .collect();

        let mut sys = SparseMatrix::new(n, n);
        for (t, &m) in mass_diag.iter().enumerate() {
            sys.push(t, t, m);
        }
        for &(t, e, v) in d.triplets() {
            if active_index[e] != usize::MAX {
                sys.push(t, nc + active_index[e], tau * v);
            }
        }
        for &(t, e, v) in b.triplets() {
            if active_index[e] != usize::MAX {
                sys.push(nc + active_index[e], t, -v);
            }
        }
        for &(e, t, v) in g.triplets() {
            if active_index[e] != usize::MAX {
                sys.push(nc + active_index[e], t, -v);
            }
        }
        for &(e, f, v) in a.triplets() {
            let (ia, ib) = (active_index[e], active_index[f]);
            if ia != usize::MAX && ib != usize::MAX {
                sys.push(nc + ia, nc + ib, v);
            }
        }

        let factorization = Factorization::new(&sys)
            .map_err(|source| TransportError::Factorization { tau, threshold, source })?;

        Ok(Stepper {
            tau,
            threshold,
            nc,
            active,
            mass_diag,
            d,
            factorization,
            isotherm: params.isotherm,
            p: params.p.values.clone(),
            areas: mesh.cells.iter().map(|c| c.area).collect(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The solvability threshold the step was checked against.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Advance one step from `state`.
    pub fn advance(
        &self,
        mesh: &Mesh,
        state: &TransportState,
    ) -> Result<TransportState, TransportError> {
        let n = self.nc + self.active.len();
        let mut rhs = vec![0.0; n];
        for t in 0..self.nc {
            let c_prev = state.c.values[t];
            rhs[t] = self.mass_diag[t] * c_prev
                + self.tau * self.areas[t] * (self.p[t] - self.isotherm.eval(c_prev));
        }
        let x = self.factorization.solve(&rhs)?;
        let c = P0Field { values: x[..self.nc].to_vec() };
        let mut vc = RT0Field::zeros(mesh);
        for (i, &e) in self.active.iter().enumerate() {
            vc.coeffs[e] = x[self.nc + i];
        }
        Ok(TransportState { step: state.step + 1, time: state.time + self.tau, c, vc })
    }

    /// Cellwise `div(S^{1/2} vc)` with the frozen tensors: `(D vc)_T / |T|`.
    pub fn weighted_divergence(&self, vc: &RT0Field) -> P0Field {
        let dv = self.d.matvec(&vc.coeffs);
        P0Field {
            values: dv.iter().zip(&self.areas).map(|(v, a)| v / a).collect(),
        }
    }

    /// Residual of the step equation tested with the constant 1 — the
    /// discrete mass balance — normalized by the mass scale. Zero to solver
    /// accuracy for any solved step.
    pub fn mass_balance_residual(&self, prev: &TransportState, next: &TransportState) -> f64 {
        let dv = self.d.matvec(&next.vc.coeffs);
        let mut residual = 0.0;
        let mut scale: f64 = 1.0;
        for t in 0..self.nc {
            let mass_change = self.mass_diag[t] * (next.c.values[t] - prev.c.values[t]);
            residual += mass_change
                + self.tau * dv[t]
                + self.tau * self.areas[t] * self.isotherm.eval(prev.c.values[t])
                - self.tau * self.areas[t] * self.p[t];
            scale = scale.max((self.mass_diag[t] * next.c.values[t]).abs());
        }
        residual.abs() / scale
    }
}

/// The state at `t = 0`: the given concentration plus the flux that solves
/// the constitutive equation for it (the scheme's second block). This makes
/// the initial flux consistent, so the energy sums start from meaningful
/// values instead of an artificial zero.
pub fn initial_state(
    mesh: &Mesh,
    params: &TransportParams,
    flow: &DarcySolution,
) -> Result<TransportState, TransportError> {
    params.validate(mesh)?;
    let (_, inv_sqrt_psi, q) = frozen_tensors(params, &flow.cell_velocity);
    let a = assemble_rt0_weighted_mass(mesh, &inv_sqrt_psi)?;
    let b = assemble_div(mesh);
    let g = assemble_vector_coupling(mesh, &q)?;
    let (active, active_index) = active_edges(mesh, params.mode);

    let mut a_act = SparseMatrix::new(active.len(), active.len());
    for &(e, f, v) in a.triplets() {
        let (ia, ib) = (active_index[e], active_index[f]);
        if ia != usize::MAX && ib != usize::MAX {
            a_act.push(ia, ib, v);
        }
    }
    let mut rhs = vec![0.0; active.len()];
    for &(t, e, v) in b.triplets() {
        if active_index[e] != usize::MAX {
            rhs[active_index[e]] += v * params.c0.values[t];
        }
    }
    for &(e, t, v) in g.triplets() {
        if active_index[e] != usize::MAX {
            rhs[active_index[e]] += v * params.c0.values[t];
        }
    }
    let x = solver::solve(&a_act, &rhs)?;
    let mut vc = RT0Field::zeros(mesh);
    for (i, &e) in active.iter().enumerate() {
        vc.coeffs[e] = x[i];
    }
    Ok(TransportState { step: 0, time: 0.0, c: params.c0.clone(), vc })
}

/// One-shot step (assembles and factors; prefer [`Stepper`] for many steps).
pub fn step(
    mesh: &Mesh,
    state: &TransportState,
    params: &TransportParams,
    flow: &DarcySolution,
    tau: f64,
) -> Result<TransportState, TransportError> {
    Stepper::new(mesh, params, flow, tau)?.advance(mesh, state)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Kept states: step 0, every `cadence`-th step, and the final step.
    pub states: Vec<TransportState>,
    pub ledger: StabilityLedger,
    /// The uniform step actually taken (input `tau` shrunk to divide `t_final`).
    pub tau_used: f64,
    pub steps: usize,
    pub threshold: f64,
}

/// March from `t = 0` to `t_final` with a uniform step. The requested `tau`
/// is shrunk to `t_final / ceil(t_final / tau)` so the horizon is hit
/// exactly. Full fields are kept every `cadence` steps; the ledger records
/// every step.
pub fn run(
    mesh: &Mesh,
    params: &TransportParams,
    flow: &DarcySolution,
    tau: f64,
    t_final: f64,
    cadence: usize,
) -> Result<RunResult, TransportError> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(TransportError::InvalidParam(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(TransportError::InvalidParam(format!(
            "time step must be positive, got {tau}"
        )));
    }
    if cadence == 0 {
        return Err(TransportError::InvalidParam("cadence must be at least 1".into()));
    }
    let steps = (t_final / tau).ceil().max(1.0) as usize;
    let tau_used = t_final / steps as f64;
    let stepper = Stepper::new(mesh, params, flow, tau_used)?;

    let mut state = initial_state(mesh, params, flow)?;
    let mut ledger = StabilityLedger::new(flow.vmax);
    let record = |ledger: &mut StabilityLedger, s: &TransportState| {
        let vc_l2 = s.vc.l2_norm(mesh);
        ledger.sup_flux_energy = ledger.sup_flux_energy.max(vc_l2 * vc_l2);
        ledger.rows.push(LedgerRow {
            step: s.step,
            time: s.time,
            c_l2: s.c.l2_norm(mesh),
            vc_l2,
            min_c: s.c.min().min(0.0),
        });
    };
    record(&mut ledger, &state);
    let mut states = vec![state.clone()];

    for n in 1..=steps {
        let next = stepper.advance(mesh, &state)?;

        let dc2: f64 = state
            .c
            .values
            .iter()
            .zip(&next.c.values)
            .zip(&stepper.areas)
            .map(|((a, b), area)| area * (b - a) * (b - a))
            .sum();
        ledger.time_increment_energy += dc2 / tau_used;
        let dvc = RT0Field {
            coeffs: state
                .vc
                .coeffs
                .iter()
                .zip(&next.vc.coeffs)
                .map(|(a, b)| b - a)
                .collect(),
        };
        let dvc_l2 = dvc.l2_norm(mesh);
        ledger.flux_increment_energy += dvc_l2 * dvc_l2;
        let wdiv = stepper.weighted_divergence(&next.vc);
        let wdiv_l2 = wdiv.l2_norm(mesh);
        ledger.divergence_energy += tau_used * wdiv_l2 * wdiv_l2;
        record(&mut ledger, &next);

        state = next;
        if n % cadence == 0 || n == steps {
            states.push(state.clone());
        }
    }

    Ok(RunResult { states, ledger, tau_used, steps, threshold: stepper.threshold })
}
