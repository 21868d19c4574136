//! Self-contained, seeded property suites — one per solver module — for the
//! command-line `verify` entry point. Each suite re-checks the module's
//! strongest invariants with randomized data and reports one pass/fail line.
//!
//! These suites complement the unit tests: they are shipped in the library
//! so an installed binary can re-certify the numerics on the target machine.

use crate::analysis;
use crate::assembly::{self, mat2, P0Field};
use crate::darcy::{self, DarcyMode, DarcyProblem, DarcySolution, ManufacturedCase};
use crate::dispersion::{self, DispersionParams};
use crate::mesh::{v2, Mesh};
use crate::quadrature::{integrate_tri, TRI_DEGREE5};
use crate::transport::{self, Isotherm, TransportMode, TransportParams, TransportState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// "N checks passed" or "<check>: <first failure>".
    pub detail: String,
}

type Check = (&'static str, fn(&mut ChaCha8Rng) -> Result<(), String>);

fn fail(msg: impl Into<String>) -> Result<(), String> {
    Err(msg.into())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        fail(msg)
    }
}

/// Run the property suites whose names contain `filter` (all when `None`),
/// with reproducible per-suite randomness derived from `seed`.
pub fn run_suites(seed: u64, filter: Option<&str>) -> Vec<SuiteResult> {
    let suites: [(&'static str, &[Check]); 6] = [
        ("mesh", MESH_CHECKS),
        ("dispersion", DISPERSION_CHECKS),
        ("assembly", ASSEMBLY_CHECKS),
        ("darcy", DARCY_CHECKS),
        ("transport", TRANSPORT_CHECKS),
        ("analysis", ANALYSIS_CHECKS),
    ];
    suites
        .iter()
        .enumerate()
        .filter(|(_, (name, _))| filter.is_none_or(|f| name.contains(f)))
        .map(|(k, (name, checks))| {
            // Independent, filter-stable stream per suite.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64 + 1) << 32));
            for (check, f) in *checks {
                if let Err(msg) = f(&mut rng) {
                    return SuiteResult {
                        name,
                        passed: false,
                        detail: format!("{check}: {msg}"),
                    };
                }
            }
            SuiteResult {
                name,
                passed: true,
                detail: format!("{} checks passed", checks.len()),
            }
        })
        .collect()
}

// ---------------------------------------------------------------- mesh ----

const MESH_CHECKS: &[Check] = &[
    ("euler_formula_and_area", mesh_euler_and_area),
    ("cell_edge_closure", mesh_cell_closure),
    ("text_round_trip", mesh_round_trip),
];

fn random_rect(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let x0 = rng.random_range(-2.0..2.0);
    let y0 = rng.random_range(-2.0..2.0);
    [x0, y0, x0 + rng.random_range(0.5..3.0), y0 + rng.random_range(0.5..3.0)]
}

fn mesh_euler_and_area(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for n in 2..=5 {
        let rect = random_rect(rng);
        let mesh = Mesh::structured(n, rect).map_err(|e| e.to_string())?;
        let (v, e, c) =
            (mesh.vertices.len() as i64, mesh.edges.len() as i64, mesh.cells.len() as i64);
        ensure(v - e + c == 1, format!("Euler characteristic {v} - {e} + {c} != 1"))?;
        let area = (rect[2] - rect[0]) * (rect[3] - rect[1]);
        let total = mesh.metrics().total_area;
        ensure(
            (total - area).abs() <= 1e-12 * area,
            format!("area {total} != rectangle area {area}"),
        )?;
        ensure(
            mesh.boundary_edges.len() == 4 * n,
            format!("{} boundary edges on an n={n} grid", mesh.boundary_edges.len()),
        )?;
    }
    Ok(())
}

fn mesh_cell_closure(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..6);
    let mesh = Mesh::structured(n, random_rect(rng)).map_err(|e| e.to_string())?;
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let mut sum = [0.0, 0.0];
        for k in 0..3 {
            let e = &mesh.edges[cell.edges[k]];
            sum[0] += cell.signs[k] * e.length * e.normal[0];
            sum[1] += cell.signs[k] * e.length * e.normal[1];
        }
        ensure(
            v2::norm(sum) <= 1e-12,
            format!("cell {ci}: signed outward normals sum to {sum:?}"),
        )?;
    }
    Ok(())
}

fn mesh_round_trip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(1..5);
    let mesh = Mesh::structured(n, random_rect(rng)).map_err(|e| e.to_string())?;
    let parsed = Mesh::parse(&mesh.to_text()).map_err(|e| e.to_string())?;
    ensure(parsed == mesh, "parse(to_text(mesh)) differs from mesh")
}

// ---------------------------------------------------------- dispersion ----

const DISPERSION_CHECKS: &[Check] = &[
    ("spectral_product_identities", dispersion_products),
    ("form_and_velocity_bounds", dispersion_bounds),
    ("still_water_isotropy", dispersion_zero_branch),
];

fn random_dispersion(rng: &mut ChaCha8Rng) -> DispersionParams {
    let alpha_t = rng.random_range(0.0..1.0);
    DispersionParams::new(
        rng.random_range(0.01..2.0),
        alpha_t + rng.random_range(0.01..2.0),
        alpha_t,
    )
    .expect("generated parameters are valid")
}

fn dispersion_products(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..200 {
        let p = random_dispersion(rng);
        let v = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let s = dispersion::tensor(&p, v);
        let half = dispersion::tensor_sqrt(&p, v);
        let inv = dispersion::tensor_inv(&p, v);
        for i in 0..2 {
            for j in 0..2 {
                let sq: f64 = (0..2).map(|k| half[i][k] * half[k][j]).sum();
                ensure(
                    (sq - s[i][j]).abs() <= 1e-12 * (1.0 + s[i][j].abs()),
                    format!("sqrt(S)^2 != S at ({i},{j}) for v={v:?}"),
                )?;
                let id: f64 = (0..2).map(|k| inv[i][k] * s[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                ensure(
                    (id - expect).abs() <= 1e-12,
                    format!("S^-1 S != I at ({i},{j}) for v={v:?}"),
                )?;
            }
        }
    }
    Ok(())
}

fn dispersion_bounds(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..500 {
        let p = random_dispersion(rng);
        let vmax = rng.random_range(0.1..4.0);
        let bc = dispersion::bound_constants(&p, vmax);
        let speed = rng.random_range(0.0..vmax);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let v = [speed * angle.cos(), speed * angle.sin()];
        let s = dispersion::tensor(&p, v);
        let xi_angle = rng.random_range(0.0..std::f64::consts::TAU);
        let xi = [xi_angle.cos(), xi_angle.sin()];
        let form = xi[0] * (s[0][0] * xi[0] + s[0][1] * xi[1])
            + xi[1] * (s[1][0] * xi[0] + s[1][1] * xi[1]);
        ensure(
            form >= bc.lambda_min - 1e-12 && form <= bc.lambda_max + 1e-12,
            format!("unit form {form} outside [{}, {}]", bc.lambda_min, bc.lambda_max),
        )?;
        let siv = dispersion::tensor_inv_times_v(&p, v);
        ensure(
            v2::norm(siv) <= 1.0 / p.alpha_l + 1e-12,
            format!("|S^-1 v| = {} exceeds 1/alpha_l = {}", v2::norm(siv), 1.0 / p.alpha_l),
        )?;
    }
    Ok(())
}

fn dispersion_zero_branch(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..50 {
        let p = random_dispersion(rng);
        let s = dispersion::tensor(&p, [0.0, 0.0]);
        ensure(
            s[0][0] == p.s_m && s[1][1] == p.s_m && s[0][1] == 0.0 && s[1][0] == 0.0,
            format!("S(0) = {s:?} is not s_m I"),
        )?;
    }
    Ok(())
}

// ------------------------------------------------------------ assembly ----

const ASSEMBLY_CHECKS: &[Check] = &[
    ("midpoint_rule_matches_degree5", assembly_quadrature_oracle),
    ("divergence_commutes_with_interpolation", assembly_commuting),
    ("projections_reproduce_constants", assembly_constants),
];

fn random_spd(rng: &mut ChaCha8Rng) -> mat2::Mat2 {
    let (l1, l2) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (c, s) = (t.cos(), t.sin());
    // R diag(l1,l2) R^T.
    [
        [c * c * l1 + s * s * l2, c * s * (l1 - l2)],
        [c * s * (l1 - l2), s * s * l1 + c * c * l2],
    ]
}

fn assembly_quadrature_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    // The assembled weighted flux mass matrix (built with the 3-point
    // midpoint rule, exact for this quadratic integrand) must agree with an
    // independent degree-5 evaluation of every entry.
    let mesh = Mesh::structured_unit(3).map_err(|e| e.to_string())?;
    let tensors: Vec<mat2::Mat2> = (0..mesh.cells.len()).map(|_| random_spd(rng)).collect();
    let a = assembly::assemble_rt0_weighted_mass(&mesh, &tensors).map_err(|e| e.to_string())?;
    let ne = mesh.edges.len();
    let mut assembled = vec![vec![0.0; ne]; ne];
    for &(r, c, v) in a.triplets() {
        assembled[r][c] += v;
    }
    let mut exact = vec![vec![0.0; ne]; ne];
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let (pa, pb, pc) =
            (mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], mesh.vertices[cell.v[2]]);
        for i in 0..3 {
            for j in 0..3 {
                exact[cell.edges[i]][cell.edges[j]] +=
                    integrate_tri(&TRI_DEGREE5, pa, pb, pc, |x| {
                        let a = basis_value(&mesh, ci, i, x);
                        let b = basis_value(&mesh, ci, j, x);
                        v2::dot(a, mat2::mul_vec(&tensors[ci], b))
                    });
            }
        }
    }
    for r in 0..ne {
        for c in 0..ne {
            if (assembled[r][c] - exact[r][c]).abs() > 1e-12 * (1.0 + exact[r][c].abs()) {
                return fail(format!(
                    "entry ({r},{c}): assembled {} vs degree-5 {}",
                    assembled[r][c], exact[r][c]
                ));
            }
        }
    }
    Ok(())
}

/// Value of the local flux basis function `k` of `cell` at `x`.
fn basis_value(mesh: &Mesh, ci: usize, k: usize, x: [f64; 2]) -> [f64; 2] {
    let cell = &mesh.cells[ci];
    let e = &mesh.edges[cell.edges[k]];
    let p = mesh.vertices[cell.v[k]];
    let scale = cell.signs[k] * e.length / (2.0 * cell.area);
    [scale * (x[0] - p[0]), scale * (x[1] - p[1])]
}

fn assembly_commuting(rng: &mut ChaCha8Rng) -> Result<(), String> {
    // For a smooth field, edge-interpolating then taking the discrete
    // divergence equals integrating div v over each cell.
    let mesh = Mesh::structured_unit(4).map_err(|e| e.to_string())?;
    let coef: [f64; 12] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let field = move |x: [f64; 2]| {
        [
            coef[0] + coef[1] * x[0] + coef[2] * x[1] + coef[3] * x[0] * x[0] + coef[4] * x[0] * x[1],
            coef[5] + coef[6] * x[0] + coef[7] * x[1] + coef[8] * x[1] * x[1] + coef[9] * x[0] * x[1],
        ]
    };
    let div = move |x: [f64; 2]| {
        coef[1] + 2.0 * coef[3] * x[0] + coef[4] * x[1] + coef[7] + 2.0 * coef[8] * x[1]
            + coef[9] * x[0]
    };
    let interp = assembly::project_rt0(&mesh, field);
    let b = assembly::assemble_div(&mesh);
    let bv = b.matvec(&interp.coeffs);
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let (pa, pb, pc) =
            (mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], mesh.vertices[cell.v[2]]);
        let exact = integrate_tri(&TRI_DEGREE5, pa, pb, pc, div);
        ensure(
            (bv[ci] - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
            format!("cell {ci}: B Pi v = {} vs integral of div v = {}", bv[ci], exact),
        )?;
    }
    Ok(())
}

fn assembly_constants(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(3).map_err(|e| e.to_string())?;
    let value = rng.random_range(-2.0..2.0);
    let p0 = assembly::project_p0(&mesh, |_| value);
    ensure(
        p0.values.iter().all(|v| (v - value).abs() <= 1e-13),
        "cell averaging does not reproduce constants",
    )?;
    let vec = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
    let rt = assembly::project_rt0(&mesh, |_| vec);
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let got = rt.value_in_cell(&mesh, ci, cell.centroid);
        ensure(
            v2::norm(v2::sub(got, vec)) <= 1e-12,
            format!("flux interpolation of a constant drifts in cell {ci}"),
        )?;
    }
    Ok(())
}

// --------------------------------------------------------------- darcy ----

const DARCY_CHECKS: &[Check] = &[
    ("affine_patch_recovery", darcy_patch),
    ("conservation_and_energy", darcy_conservation_energy),
];

fn darcy_patch(rng: &mut ChaCha8Rng) -> Result<(), String> {
    // Affine heads lie in the discrete spaces and must be recovered exactly.
    let mesh = Mesh::structured_unit(3).map_err(|e| e.to_string())?;
    let (a, b, c) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    let head = move |x: [f64; 2]| a + b * x[0] + c * x[1];
    let mut boundary_head = vec![0.0; mesh.edges.len()];
    for &e in &mesh.boundary_edges {
        boundary_head[e] = assembly::edge_average(&mesh, e, head);
    }
    let problem = DarcyProblem {
        kappa: assembly::uniform_tensors(&mesh, mat2::identity()),
        g: P0Field::zeros(&mesh),
        mode: DarcyMode::Dirichlet,
        boundary_head: Some(boundary_head),
    };
    let sol = darcy::solve(&mesh, &problem).map_err(|e| e.to_string())?;
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let v = sol.flux.value_in_cell(&mesh, ci, cell.centroid);
        ensure(
            v2::norm(v2::sub(v, [-b, -c])) <= 1e-10,
            format!("cell {ci}: velocity {v:?} != {:?}", [-b, -c]),
        )?;
        ensure(
            (sol.head.values[ci] - head(cell.centroid)).abs() <= 1e-10,
            format!("cell {ci}: head {} != affine average", sol.head.values[ci]),
        )?;
    }
    Ok(())
}

fn darcy_conservation_energy(_rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(6).map_err(|e| e.to_string())?;
    let case = ManufacturedCase::sin_sin_identity();
    let problem = case.problem(&mesh);
    let sol = darcy::solve(&mesh, &problem).map_err(|e| e.to_string())?;
    let b = assembly::assemble_div(&mesh);
    let bv = b.matvec(&sol.flux.coeffs);
    for (t, cell) in mesh.cells.iter().enumerate() {
        let rhs = cell.area * problem.g.values[t];
        ensure(
            (bv[t] - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()),
            format!("cell {t}: local balance {} vs {rhs}", bv[t]),
        )?;
    }
    let kappa_inv: Vec<mat2::Mat2> = problem.kappa.iter().map(mat2::inv).collect();
    let a = assembly::assemble_rt0_weighted_mass(&mesh, &kappa_inv).map_err(|e| e.to_string())?;
    let av = a.matvec(&sol.flux.coeffs);
    let lhs: f64 = av.iter().zip(&sol.flux.coeffs).map(|(x, y)| x * y).sum();
    let rhs: f64 = mesh
        .cells
        .iter()
        .zip(problem.g.values.iter().zip(&sol.head.values))
        .map(|(cell, (g, phi))| cell.area * g * phi)
        .sum();
    ensure(
        (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
        format!("energy identity violated: {lhs} vs {rhs}"),
    )
}

// ----------------------------------------------------------- transport ----

const TRANSPORT_CHECKS: &[Check] = &[
    ("still_water_ode_reduction", transport_ode),
    ("per_step_mass_balance", transport_mass_balance),
    ("bitwise_determinism", transport_determinism),
    ("solvability_guard", transport_guard),
    ("zero_data_fixed_point", transport_zero),
];

fn base_params(mesh: &Mesh, mode: TransportMode) -> TransportParams {
    TransportParams {
        retardation: 1.0,
        porosity: P0Field::constant(mesh, 1.0),
        dispersion: DispersionParams::new(1.0, 1.0, 0.0).expect("valid"),
        isotherm: Isotherm::Linear { k: 0.0 },
        g: P0Field::zeros(mesh),
        p: P0Field::zeros(mesh),
        mode,
        c0: P0Field::zeros(mesh),
    }
}

fn transport_ode(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(3).map_err(|e| e.to_string())?;
    let mut params = base_params(&mesh, TransportMode::Neumann);
    params.retardation = rng.random_range(0.5..3.0);
    let psi = rng.random_range(0.2..1.0);
    params.porosity = P0Field::constant(&mesh, psi);
    let k = rng.random_range(0.05..0.5);
    params.isotherm = Isotherm::Linear { k };
    let c0 = rng.random_range(0.1..1.0);
    params.c0 = P0Field::constant(&mesh, c0);
    let tau = 0.02;
    let result = transport::run(&mesh, &params, &DarcySolution::zero(&mesh), tau, 6.0 * tau, 1)
        .map_err(|e| e.to_string())?;
    let factor = 1.0 - tau * k / (params.retardation * psi);
    for (n, state) in result.states.iter().enumerate() {
        let expected = c0 * factor.powi(n as i32);
        for &v in &state.c.values {
            ensure(
                (v - expected).abs() <= 1e-12,
                format!("step {n}: {v} != uniform decay {expected}"),
            )?;
        }
    }
    Ok(())
}

fn transport_mass_balance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(6).map_err(|e| e.to_string())?;
    let flow = darcy::solve(&mesh, &ManufacturedCase::sin_sin_identity().problem(&mesh))
        .map_err(|e| e.to_string())?;
    let mut params = base_params(&mesh, TransportMode::Neumann);
    let (cx, cy) = (rng.random_range(0.3..0.7), rng.random_range(0.3..0.7));
    params.c0 = assembly::project_p0(&mesh, |x| {
        (-25.0 * ((x[0] - cx).powi(2) + (x[1] - cy).powi(2))).exp()
    });
    params.isotherm = Isotherm::Langmuir { k: 0.3, k2: 1.0 };
    let stepper =
        transport::Stepper::new(&mesh, &params, &flow, 0.01).map_err(|e| e.to_string())?;
    let mut state = transport::initial_state(&mesh, &params, &flow).map_err(|e| e.to_string())?;
    for n in 0..4 {
        let next = stepper.advance(&mesh, &state).map_err(|e| e.to_string())?;
        let residual = stepper.mass_balance_residual(&state, &next);
        ensure(residual <= 1e-10, format!("step {n}: balance residual {residual}"))?;
        state = next;
    }
    Ok(())
}

fn transport_determinism(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(5).map_err(|e| e.to_string())?;
    let flow = darcy::solve(&mesh, &ManufacturedCase::sin_sin_anisotropic().problem(&mesh))
        .map_err(|e| e.to_string())?;
    let mut params = base_params(&mesh, TransportMode::Neumann);
    let cx = rng.random_range(0.3..0.7);
    params.c0 =
        assembly::project_p0(&mesh, |x| (-20.0 * ((x[0] - cx).powi(2) + (x[1] - 0.5).powi(2))).exp());
    let a = transport::run(&mesh, &params, &flow, 0.01, 0.04, 1).map_err(|e| e.to_string())?;
    let b = transport::run(&mesh, &params, &flow, 0.01, 0.04, 1).map_err(|e| e.to_string())?;
    let (fa, fb) = (a.states.last().unwrap(), b.states.last().unwrap());
    ensure(
        fa.c.values == fb.c.values && fa.vc.coeffs == fb.vc.coeffs,
        "identical runs produced different states",
    )
}

fn transport_guard(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(3).map_err(|e| e.to_string())?;
    let speed = rng.random_range(2.0..5.0);
    let flux = assembly::project_rt0(&mesh, |_| [speed, 0.0]);
    let flow = DarcySolution {
        cell_velocity: flux.centroid_values(&mesh),
        vmax: flux.max_norm(&mesh),
        flux,
        head: P0Field::zeros(&mesh),
    };
    let mut params = base_params(&mesh, TransportMode::Neumann);
    params.dispersion = DispersionParams::new(0.05, 0.2, 0.05).expect("valid");
    let threshold = transport::solvability_threshold(&params, flow.vmax);
    ensure(threshold.is_finite() && threshold > 0.0, format!("threshold {threshold}"))?;
    match transport::Stepper::new(&mesh, &params, &flow, threshold * 1.5) {
        Err(transport::TransportError::TimestepAboveThreshold { .. }) => {}
        Err(e) => return fail(format!("wrong refusal: {e}")),
        Ok(_) => return fail("step above threshold was accepted"),
    }
    transport::Stepper::new(&mesh, &params, &flow, threshold * 0.5)
        .map(|_| ())
        .map_err(|e| format!("step below threshold refused: {e}"))
}

fn transport_zero(_rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(4).map_err(|e| e.to_string())?;
    let flow = darcy::solve(&mesh, &ManufacturedCase::sin_sin_identity().problem(&mesh))
        .map_err(|e| e.to_string())?;
    let params = base_params(&mesh, TransportMode::Dirichlet);
    let result =
        transport::run(&mesh, &params, &flow, 0.01, 0.05, 1).map_err(|e| e.to_string())?;
    for state in &result.states {
        ensure(
            state.c.l2_norm(&mesh) <= 1e-13 && state.vc.l2_norm(&mesh) <= 1e-13,
            format!("zero data drifted at step {}", state.step),
        )?;
    }
    ensure(result.ledger.increment_total() <= 1e-13, "ledger sums nonzero for zero data")
}

// ------------------------------------------------------------ analysis ----

const ANALYSIS_CHECKS: &[Check] = &[
    ("frozen_jump_norms", analysis_frozen_norms),
    ("interpolant_linearity", analysis_interpolant),
    ("restriction_preserves_mass", analysis_restriction),
];

fn analysis_frozen_norms(_rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(1).map_err(|e| e.to_string())?;
    let c = P0Field { values: vec![1.0, 0.0] };
    let neumann = analysis::discrete_h1_norm(&mesh, &c, TransportMode::Neumann);
    let dirichlet = analysis::discrete_h1_norm(&mesh, &c, TransportMode::Dirichlet);
    ensure(
        (neumann - 3.0f64.sqrt()).abs() <= 1e-13,
        format!("interior-only jump norm {neumann} != sqrt(3)"),
    )?;
    ensure(
        (dirichlet - 7.0f64.sqrt()).abs() <= 1e-13,
        format!("zero-boundary jump norm {dirichlet} != sqrt(7)"),
    )
}

fn analysis_interpolant(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mesh = Mesh::structured_unit(2).map_err(|e| e.to_string())?;
    let times = [0.0, rng.random_range(0.05..0.2), 0.3];
    let slope: Vec<f64> = (0..mesh.cells.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let states: Vec<TransportState> = times
        .iter()
        .enumerate()
        .map(|(n, &t)| TransportState {
            step: n,
            time: t,
            c: P0Field { values: slope.iter().map(|s| s * t).collect() },
            vc: assembly::RT0Field::zeros(&mesh),
        })
        .collect();
    for _ in 0..20 {
        let t = rng.random_range(0.0..0.3);
        let (c, _) = analysis::time_interpolant(&states, t).map_err(|e| e.to_string())?;
        for (v, s) in c.values.iter().zip(&slope) {
            ensure(
                (v - s * t).abs() <= 1e-13,
                format!("interpolant at t={t} is not linear in time"),
            )?;
        }
    }
    Ok(())
}

fn analysis_restriction(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let fine = Mesh::structured_unit(8).map_err(|e| e.to_string())?;
    let coarse = Mesh::structured_unit(4).map_err(|e| e.to_string())?;
    let field = P0Field {
        values: (0..fine.cells.len()).map(|_| rng.random_range(0.0..1.0)).collect(),
    };
    let restricted =
        analysis::restrict_p0(&fine, &field, &coarse).map_err(|e| e.to_string())?;
    let fine_mass: f64 = fine.cells.iter().zip(&field.values).map(|(c, v)| c.area * v).sum();
    let coarse_mass: f64 =
        coarse.cells.iter().zip(&restricted.values).map(|(c, v)| c.area * v).sum();
    ensure(
        (fine_mass - coarse_mass).abs() <= 1e-12 * fine_mass.abs().max(1.0),
        format!("restriction changed total mass: {fine_mass} vs {coarse_mass}"),
    )
}
