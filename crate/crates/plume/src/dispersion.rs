//! Velocity-dependent hydrodynamic dispersion.
//!
//! For a velocity `v` the tensor is
//!
//! ```text
//! S(v) = S_m I + |v| ( alpha_L P_v + alpha_T (I - P_v) ),   P_v = v v^T / |v|^2,
//! ```
//!
//! i.e. molecular diffusion `S_m` plus longitudinal spreading `alpha_L |v|`
//! along the flow and transverse spreading `alpha_T |v|` across it. Since
//! `S(v)` is a rank-one perturbation of the identity, its eigenstructure is
//! explicit: eigenvalue `S_m + alpha_L |v|` along `v` and `S_m + alpha_T |v|`
//! on the orthogonal complement. All functional calculus (square root,
//! inverse) uses that closed form; no iterative factorization is involved.
//!
//! The admissible parameter range is `S_m > 0`, `alpha_L > alpha_T >= 0`,
//! which makes every `S(v)` symmetric positive definite with
//!
//! ```text
//! (S(v) xi, xi) >= (S_m + alpha_T |v|) |xi|^2,   |S(v) xi| <= (S_m + alpha_L |v|) |xi|.
//! ```

use thiserror::Error;

/// Velocities below this magnitude take the `v = 0` branch `S = S_m I`.
pub const V_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum DispersionError {
    #[error("invalid dispersion parameters: need s_m > 0, alpha_l > alpha_t >= 0; got s_m = {s_m}, alpha_l = {alpha_l}, alpha_t = {alpha_t}")]
    InvalidParams { s_m: f64, alpha_l: f64, alpha_t: f64 },
}

/// Scheidegger dispersion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionParams {
    /// Molecular diffusion, `> 0`.
    pub s_m: f64,
    /// Longitudinal dispersivity, `> alpha_t`.
    pub alpha_l: f64,
    /// Transverse dispersivity, `>= 0`.
    pub alpha_t: f64,
}

impl DispersionParams {
    pub fn new(s_m: f64, alpha_l: f64, alpha_t: f64) -> Result<Self, DispersionError> {
        let p = DispersionParams { s_m, alpha_l, alpha_t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        let ok = self.s_m.is_finite()
            && self.alpha_l.is_finite()
            && self.alpha_t.is_finite()
            && self.s_m > 0.0
            && self.alpha_l > self.alpha_t
            && self.alpha_t >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DispersionError::InvalidParams {
                s_m: self.s_m,
                alpha_l: self.alpha_l,
                alpha_t: self.alpha_t,
            })
        }
    }

    /// Longitudinal eigenvalue `S_m + alpha_L s` at speed `s`.
    pub fn lambda_long(&self, speed: f64) -> f64 {
        self.s_m + self.alpha_l * speed
    }

    /// Transverse eigenvalue `S_m + alpha_T s` at speed `s` (multiplicity N-1).
    pub fn lambda_trans(&self, speed: f64) -> f64 {
        self.s_m + self.alpha_t * speed
    }
}

/// `f(S(v))` via the spectral decomposition `S = lt I + (ll - lt) P_v`.
fn spectral<const N: usize>(
    p: &DispersionParams,
    v: [f64; N],
    f: impl Fn(f64) -> f64,
) -> [[f64; N]; N] {
    let speed = norm(v);
    let ft = f(p.lambda_trans(speed));
    let mut m = [[0.0; N]; N];
    if speed < V_ZERO_TOL {
        // S(0) = S_m I exactly; f(S) = f(S_m) I.
        let fs = f(p.s_m);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = fs;
        }
        return m;
    }
    let fl = f(p.lambda_long(speed));
    let coupling = (fl - ft) / (speed * speed);
    for i in 0..N {
        for j in 0..N {
            m[i][j] = coupling * v[i] * v[j];
        }
        m[i][i] += ft;
    }
    m
}

/// The dispersion tensor `S(v)`.
pub fn tensor<const N: usize>(p: &DispersionParams, v: [f64; N]) -> [[f64; N]; N] {
    spectral(p, v, |l| l)
}

/// `S(v)^{1/2}` (the SPD square root).
pub fn tensor_sqrt<const N: usize>(p: &DispersionParams, v: [f64; N]) -> [[f64; N]; N] {
    spectral(p, v, f64::sqrt)
}

/// `S(v)^{-1}`.
pub fn tensor_inv<const N: usize>(p: &DispersionParams, v: [f64; N]) -> [[f64; N]; N] {
    spectral(p, v, f64::recip)
}

/// `S(v)^{-1/2}`.
pub fn tensor_inv_sqrt<const N: usize>(p: &DispersionParams, v: [f64; N]) -> [[f64; N]; N] {
    spectral(p, v, |l| l.sqrt().recip())
}

/// `S(v)^{-1} v = v / (S_m + alpha_L |v|)`: `v` is the longitudinal eigenvector.
pub fn tensor_inv_times_v<const N: usize>(p: &DispersionParams, v: [f64; N]) -> [f64; N] {
    let ll = p.lambda_long(norm(v));
    let mut out = v;
    for x in &mut out {
        *x /= ll;
    }
    out
}

/// Constants controlling the transport scheme's guards, all taken as suprema
/// or infima over the velocity cap `|v| <= v_max`:
///
/// - `lambda_min = S_m`: uniform lower spectral bound of `S(v)`.
/// - `lambda_max = S_m + alpha_L v_max`: uniform upper spectral bound.
/// - `m_minus = 1 / lambda_max`: uniform lower spectral bound of `S(v)^{-1}`.
/// - `m_plus = sup |S(v)^{-1} v| = v_max / (S_m + alpha_L v_max) <= 1/alpha_L`.
/// - `c_half`: smallest `C` with `|S(v)^{1/2} xi| <= C (1 + |v|^{1/2}) |xi|`.
/// - `c_disp = m_plus * c_half`, the constant in the mixed coupling bound
///   `|(S^{-1} v u, S^{1/2} w)| <= c_disp (1 + |v|^{1/2}) |u| |w|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub c_half: f64,
    pub c_disp: f64,
}

/// Compute [`BoundConstants`] for the cap `|v| <= v_max`.
///
/// `c_half` has a closed form: `g(s) = (S_m + alpha_L s) / (1 + sqrt s)^2`
/// has derivative sign `alpha_L sqrt(s) - S_m`, so it is minimized inside and
/// its supremum on `[0, v_max]` sits at an endpoint.
pub fn bound_constants(p: &DispersionParams, v_max: f64) -> BoundConstants {
    assert!(v_max >= 0.0 && v_max.is_finite(), "v_max must be finite and nonnegative");
    let lambda_max = p.lambda_long(v_max);
    let g_end = lambda_max / (1.0 + v_max.sqrt()).powi(2);
    let c_half = p.s_m.max(g_end).sqrt();
    let m_plus = (v_max / lambda_max).min(1.0 / p.alpha_l);
    BoundConstants {
        lambda_min: p.s_m,
        lambda_max,
        m_minus: 1.0 / lambda_max,
        m_plus,
        c_half,
        c_disp: m_plus * c_half,
    }
}

fn norm<const N: usize>(v: [f64; N]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
