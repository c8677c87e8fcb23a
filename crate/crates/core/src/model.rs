//! Ambient data, geodesic states and the exact reference solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension-dependent constants of the Angenent metric on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientConfig {
    pub n: u32,
    pub sphere_radius: f64,
    pub cylinder_radius: f64,
    /// Conservative lower search bracket.
    pub m1: f64,
    /// Conservative upper search bracket, `cylinder_radius + 2`.
    #[serde(rename = "M1")]
    pub big_m1: f64,
}

impl AmbientConfig {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
        }
        let nf = f64::from(n);
        let sphere_radius = (2.0 * nf).sqrt();
        let cylinder_radius = (2.0 * (nf - 1.0)).sqrt();
        Ok(Self { n, sphere_radius, cylinder_radius, m1: lower_bracket(n), big_m1: cylinder_radius + 2.0 })
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }
}

// Solve ∫_m^1 t^{-(n-1)} dt = 1/c with c = (√(2(n-1)) - 1)/2, then halve.
fn lower_bracket(n: u32) -> f64 {
    let nf = f64::from(n);
    let c = ((2.0 * (nf - 1.0)).sqrt() - 1.0) / 2.0;
    let m = if n == 2 {
        (-1.0 / c).exp()
    } else {
        // (m^{2-n} - 1)/(n-2) = 1/c
        (1.0 + (nf - 2.0) / c).powf(-1.0 / (nf - 2.0))
    };
    0.5 * m
}

/// A point of a profile curve with its unwrapped tangent angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub s: f64,
    pub x: f64,
    pub r: f64,
    pub alpha: f64,
}

impl GeodesicState {
    pub fn new(s: f64, x: f64, r: f64, alpha: f64) -> Self {
        Self { s, x, r, alpha }
    }

    pub fn tangent(&self) -> (f64, f64) {
        (self.alpha.cos(), self.alpha.sin())
    }
}

/// Initial value problems: Γ[x0, r0, α0] or the axis start Q[x0].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    Interior { x0: f64, r0: f64, alpha0: f64 },
    AxisStart { x0: f64 },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialData::Interior { x0, r0, alpha0 } => {
                if !(x0.is_finite() && r0.is_finite() && alpha0.is_finite()) {
                    return Err(Error::Domain("non-finite initial data".into()));
                }
                if r0 <= 0.0 {
                    return Err(Error::Domain(format!("interior start needs r0 > 0, got {r0}")));
                }
            }
            InitialData::AxisStart { x0 } => {
                if !(x0.is_finite() && x0 > 0.0) {
                    return Err(Error::Domain(format!("axis start needs x0 > 0, got {x0}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    Sphere,
    Plane,
    Cylinder,
}

/// Exact arclength parametrizations of the sphere, plane and cylinder profiles.
pub fn exact_solution(config: &AmbientConfig, which: Reference, s: f64) -> Result<GeodesicState> {
    match which {
        Reference::Sphere => {
            let rho = config.sphere_radius;
            let s_max = std::f64::consts::PI * rho;
            if !(0.0..=s_max).contains(&s) {
                return Err(Error::Range(format!("sphere arclength {s} outside [0, {s_max}]")));
            }
            let theta = s / rho;
            Ok(GeodesicState::new(s, rho * theta.cos(), rho * theta.sin(), theta + std::f64::consts::FRAC_PI_2))
        }
        Reference::Plane => Ok(GeodesicState::new(s, 0.0, s, std::f64::consts::FRAC_PI_2)),
        Reference::Cylinder => Ok(GeodesicState::new(s, s, config.cylinder_radius, 0.0)),
    }
}

/// Right-hand side of the angle equation, `(x/2) sin α + ((n-1)/r - r/2) cos α`.
///
/// The second coefficient is evaluated as `(R - r)(R + r)/(2r)` with `R` the
/// stored cylinder radius, so the cylinder is an exact fixed line in floating
/// point.
pub fn alpha_rate(config: &AmbientConfig, x: f64, r: f64, alpha: f64) -> f64 {
    let (sa, ca) = alpha.sin_cos();
    let rc = config.cylinder_radius;
    0.5 * x * sa + (rc - r) * (rc + r) / (2.0 * r) * ca
}

pub fn residual(config: &AmbientConfig, state: &GeodesicState, alpha_dot: f64) -> Result<f64> {
    if !(state.r > 0.0) {
        return Err(Error::Domain(format!("residual needs r > 0, got {}", state.r)));
    }
    Ok(alpha_dot - alpha_rate(config, state.x, state.r, state.alpha))
}

/// Curvature `dα/ds` including the axis limit, where it equals `x sin α / (2n)`.
pub fn curvature(config: &AmbientConfig, state: &GeodesicState) -> f64 {
    if state.r > 0.0 {
        alpha_rate(config, state.x, state.r, state.alpha)
    } else {
        state.x * state.alpha.sin() / (2.0 * config.nf())
    }
}
