//! Numerical checks of the identities and propositions the constructions rest on.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, Direction, EventKind, IntegratorSettings, ProfileCurve};
use crate::model::{alpha_rate, exact_solution, AmbientConfig, GeodesicState, InitialData, Reference};
use crate::rk::solve_to;
use crate::segment::{decompose, height_extrema, HalfEntireKind, Sign};
use crate::shooting::find_angenent_torus;

const GAUSS_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GAUSS_WEIGHTS: [f64; 5] =
    [0.236_926_885_056_189_08, 0.478_628_670_499_366_47, 0.568_888_888_888_888_9, 0.478_628_670_499_366_47, 0.236_926_885_056_189_08];

/// Largest closure gap accepted for a closed boundary.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Samples dropped at each end of a graphical piece before differencing.
const END_MARGIN: usize = 10;
/// Step used for curves whose third derivatives are differenced.
pub const DENSE_STEP: f64 = 2.5e-3;
const HALF: usize = 3;
const STENCIL: usize = 2 * HALF + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    Value { value: f64 },
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: Expected,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn value(name: impl Into<String>, measured: f64, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: (measured - value).abs() <= tolerance, measured, expected: Expected::Value { value }, tolerance }
    }

    pub fn interval(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), passed: lo <= measured && measured <= hi, measured, expected: Expected::Interval { lo, hi }, tolerance: 0.0 }
    }
}

// Gauss-Bonnet

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn proper_intersection(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// First pair of crossing edges of the closed polyline, if any.
fn self_intersection(pts: &[(f64, f64)]) -> Option<(usize, usize)> {
    let m = pts.len();
    let bbox = |i: usize| {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        (a.0.min(b.0), a.0.max(b.0), a.1.min(b.1), a.1.max(b.1))
    };
    let boxes: Vec<_> = (0..m).map(bbox).collect();
    for i in 0..m {
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (a, b) = (boxes[i], boxes[j]);
            if a.1 < b.0 || b.1 < a.0 || a.3 < b.2 || b.3 < a.2 {
                continue;
            }
            if proper_intersection(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m]) {
                return Some((i, j));
            }
        }
    }
    None
}

// ∫ -(r - (n-1)/r) dx along a cubic Hermite edge built from positions and unit tangents.
fn edge_integral(config: &AmbientConfig, p: &GeodesicState, q: &GeodesicState, h: f64) -> f64 {
    let nm1 = config.nf() - 1.0;
    let (t0x, t0y) = (h * p.alpha.cos(), h * p.alpha.sin());
    let (t1x, t1y) = (h * q.alpha.cos(), h * q.alpha.sin());
    let mut acc = 0.0;
    for (node, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
        let t = 0.5 * (1.0 + node);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let r = h00 * p.r + h10 * t0y + h01 * q.r + h11 * t1y;
        let dx = (6.0 * t2 - 6.0 * t) * p.x + (3.0 * t2 - 4.0 * t + 1.0) * t0x + (-6.0 * t2 + 6.0 * t) * q.x + (3.0 * t2 - 2.0 * t) * t1x;
        acc += 0.5 * w * (-(r - nm1 / r) * dx);
    }
    acc
}

/// Area integral of `1 + (n-1)/r²` over the region bounded by a closed
/// sample loop, evaluated as a boundary integral. Samples carry the tangent
/// of the direction of travel; corners appear as repeated points with
/// different angles. The result does not depend on the orientation.
pub fn gauss_bonnet_boundary(config: &AmbientConfig, boundary: &[GeodesicState]) -> Result<f64> {
    if boundary.len() < 4 {
        return Err(Error::TooShort(boundary.len()));
    }
    if let Some(p) = boundary.iter().find(|p| !(p.r > 0.0) || !p.x.is_finite()) {
        return Err(Error::Verify(format!("boundary leaves the half-plane at (x, r) = ({}, {})", p.x, p.r)));
    }
    let (first, last) = (boundary[0], boundary[boundary.len() - 1]);
    let gap = (last.x - first.x).hypot(last.r - first.r);
    if gap > CLOSURE_TOL {
        return Err(Error::Verify(format!("boundary is not closed: gap {gap:.3e}")));
    }
    // drop zero-length edges (corner duplicates and the closing point)
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(boundary.len());
    for p in &boundary[..boundary.len() - 1] {
        if pts.last().is_none_or(|q: &(f64, f64)| (q.0 - p.x).hypot(q.1 - p.r) > 1e-13) {
            pts.push((p.x, p.r));
        }
    }
    if let Some((i, j)) = self_intersection(&pts) {
        return Err(Error::Verify(format!("boundary crosses itself (edges {i} and {j})")));
    }
    let mut integral = 0.0;
    let mut area = 0.0;
    for w in boundary.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let chord = (q.x - p.x).hypot(q.r - p.r);
        if chord <= 1e-13 {
            continue;
        }
        let h = (q.s - p.s).abs();
        if h < chord * (1.0 - 1e-9) - 1e-12 {
            return Err(Error::Verify(format!("arclength step {h} shorter than chord {chord}")));
        }
        integral += edge_integral(config, p, q, h);
        area += p.x * q.r - q.x * p.r;
    }
    Ok(if area < 0.0 { -integral } else { integral })
}

/// Gauss-Bonnet integral over the region enclosed by a smooth closed curve.
pub fn gauss_bonnet_closed(config: &AmbientConfig, curve: &ProfileCurve) -> Result<f64> {
    let (p0, p1) = (curve.first(), curve.last());
    let da = p1.alpha - p0.alpha;
    let wrapped = da - TAU * (da / TAU).round();
    let defect = (p1.x - p0.x).abs() + (p1.r - p0.r).abs() + wrapped.abs();
    if defect > CLOSURE_TOL {
        return Err(Error::Verify(format!("closure defect {defect:.3e} exceeds {CLOSURE_TOL:e}")));
    }
    gauss_bonnet_boundary(config, &curve.samples)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

// Legendre linearization

/// Derivatives `w^(m)(1)`, m = 0..=4, of the regular solution of
/// `(1-ξ²)w'' = nξw' - 2nw` with `w(1) = 1`.
pub fn legendre_start_derivatives(n: u32) -> [f64; 5] {
    let n = f64::from(n);
    let mut d = [0.0; 5];
    d[0] = 1.0;
    for m in 0..4 {
        let mf = m as f64;
        d[m + 1] = (2.0 * n - mf * (mf - 1.0) - n * mf) / (2.0 * mf + n) * d[m];
    }
    d
}

/// Offset from the singular point at which the Taylor start hands over.
pub const LEGENDRE_START: f64 = 1e-3;

/// `(w, dw/dξ)` at `ξ = 1 - δ` from the quartic Taylor polynomial.
pub fn legendre_taylor_start(n: u32, delta: f64) -> (f64, f64) {
    let d = legendre_start_derivatives(n);
    let h = -delta;
    let w = d[0] + d[1] * h + d[2] * h * h / 2.0 + d[3] * h.powi(3) / 6.0 + d[4] * h.powi(4) / 24.0;
    let dw = d[1] + d[2] * h + d[3] * h * h / 2.0 + d[4] * h.powi(3) / 6.0;
    (w, dw)
}

/// `(w(0), dw/dξ(0))` of the linearized polar equation at the sphere.
pub fn legendre_linearization(config: &AmbientConfig) -> Result<(f64, f64)> {
    let n = config.nf();
    let (w, dw) = legendre_taylor_start(config.n, LEGENDRE_START);
    // y = (ξ, w, w'), integrated in τ = (1 - δ) - ξ
    let f = |y: &[f64; 3]| {
        let xi = y[0];
        let q = 1.0 - xi * xi;
        if q <= 0.0 {
            return None;
        }
        Some([-1.0, -y[2], -(n * xi * y[2] - 2.0 * n * y[1]) / q])
    };
    let y = solve_to(&f, [1.0 - LEGENDRE_START, w, dw], 1.0 - LEGENDRE_START, 1e-13, 1e-15, 0.01)?;
    Ok((y[1], y[2]))
}

/// `(r_sig(Q[√(2n)+ε]) - √(2n))/ε` for each ε.
pub fn linearization_quotients(config: &AmbientConfig, settings: &IntegratorSettings, eps: &[f64]) -> Result<Vec<f64>> {
    eps.iter()
        .map(|&e| {
            let rep = quarter_sphere_intersections(config, settings, config.sphere_radius + e)?;
            Ok((rep.r_sig - config.sphere_radius) / e)
        })
        .collect()
}

// Quarter spheres

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterSphereReport {
    pub x0: f64,
    pub sphere_crossings: usize,
    pub r_sig: f64,
    pub alpha_sig: f64,
    /// Signature inequalities of the inner or outer quarter sphere.
    pub consistent: bool,
}

/// Sphere crossings of Λ[0](Q[x0]) before its first r-axis crossing.
pub fn quarter_sphere_intersections(config: &AmbientConfig, settings: &IntegratorSettings, x0: f64) -> Result<QuarterSphereReport> {
    if (x0 - config.sphere_radius).abs() <= 1e-12 * config.sphere_radius {
        return Err(Error::Domain("Q[√(2n)] is the sphere itself".into()));
    }
    let st = IntegratorSettings { reflect_axis: false, stop_after_vertical_tangents: None, stop_after_r_axis_crossings: Some(1), ..*settings };
    let curve = integrate(config, &st, InitialData::AxisStart { x0 }, Direction::Forward)?;
    let crossing = curve
        .events_of(EventKind::RAxisCrossing)
        .next()
        .ok_or_else(|| Error::Verify(format!("Q[{x0}] ended with {:?} before the r-axis", curve.termination)))?
        .index;
    if curve.events_of(EventKind::VerticalTangent).any(|e| e.index < crossing) {
        return Err(Error::Verify(format!("Λ[0](Q[{x0}]) ends before the r-axis")));
    }
    let sphere_crossings = curve.events_of(EventKind::SphereCrossing).filter(|e| e.index <= crossing).count();
    let p = curve.samples[crossing];
    let alpha_sig = p.alpha.tan().atan();
    let kind = if x0 < config.sphere_radius { HalfEntireKind::InnerQuarterSphere(Sign::Plus) } else { HalfEntireKind::OuterQuarterSphere(Sign::Plus) };
    Ok(QuarterSphereReport { x0, sphere_crossings, r_sig: p.r, alpha_sig, consistent: kind.signature_consistent(config, p.r, alpha_sig) })
}

/// `count` starting points evenly spread inside `(0, √(2n))` and inside
/// `(√(2n), M₁ + 2)`.
pub fn quarter_sphere_samples(config: &AmbientConfig, count: usize) -> Vec<f64> {
    let rs = config.sphere_radius;
    let hi = config.big_m1 + 2.0;
    let m = (count + 1) as f64;
    let inner = (1..=count).map(|j| rs * j as f64 / m);
    let outer = (1..=count).map(|j| rs + (hi - rs) * j as f64 / m);
    inner.chain(outer).collect()
}

// Mean convexity

/// Largest value of `Ψ = x u' - u` over a curve that is one graph over the
/// x-axis.
pub fn mean_convexity_margin(curve: &ProfileCurve) -> Result<f64> {
    let len = curve.samples.len();
    if curve.events_of(EventKind::VerticalTangent).any(|e| e.index > 0 && e.index + 1 < len) {
        return Err(Error::Verify("curve has an interior vertical tangent".into()));
    }
    let mut orientation = 0.0;
    let mut best = f64::NEG_INFINITY;
    for p in &curve.samples {
        if !(p.r > 0.0) {
            continue;
        }
        let c = p.alpha.cos();
        if c.abs() < 1e-9 {
            continue;
        }
        if orientation * c < 0.0 {
            return Err(Error::Verify(format!("curve turns back at x = {}", p.x)));
        }
        orientation = c.signum();
        best = best.max(p.x * p.alpha.tan() - p.r);
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Verify("no graphical samples".into()));
    }
    Ok(best)
}

// Graph and polar residuals

// Fornberg weights for derivatives 0..=2 at z from nodes xs.
fn fd_weights(z: f64, xs: &[f64]) -> [[f64; STENCIL]; 3] {
    let n = xs.len();
    let mut c = [[0.0; STENCIL]; 3];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Per-equation maxima of the graph-equation residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphResiduals {
    pub x_graph: f64,
    pub x_graph_differentiated: f64,
    pub r_graph: f64,
    pub r_graph_differentiated: f64,
    pub checked: usize,
    /// Pieces too short to difference.
    pub skipped: usize,
}

impl GraphResiduals {
    pub fn max(&self) -> f64 {
        self.x_graph.max(self.x_graph_differentiated).max(self.r_graph).max(self.r_graph_differentiated)
    }
}

/// Thinned samples with `(s, x, r, α, κ, κ_s)`; κ is the recorded `dα/ds`
/// and κ_s its seven-point difference.
fn differentiated(curve: &ProfileCurve, min_gap: f64, min_r: f64) -> Vec<Vec<[f64; 6]>> {
    let synthetic: Vec<usize> = curve.events_of(EventKind::AxisBounce).map(|e| e.index).collect();
    let mut runs: Vec<Vec<(GeodesicState, f64)>> = vec![Vec::new()];
    for (i, p) in curve.samples.iter().enumerate() {
        if p.r < min_r || synthetic.contains(&i) {
            if !runs.last().expect("non-empty").is_empty() {
                runs.push(Vec::new());
            }
            continue;
        }
        let run = runs.last_mut().expect("non-empty");
        if run.last().is_none_or(|q| p.s - q.0.s >= min_gap) {
            run.push((*p, curve.curvature[i]));
        }
    }
    runs.into_iter()
        .filter(|r| r.len() >= STENCIL)
        .map(|run| {
            (HALF..run.len() - HALF)
                .map(|i| {
                    let w = &run[i - HALF..=i + HALF];
                    let xs: Vec<f64> = w.iter().map(|p| p.0.s).collect();
                    let c = fd_weights(run[i].0.s, &xs);
                    let ks: f64 = (0..STENCIL).map(|j| c[1][j] * w[j].1).sum();
                    let (p, k) = run[i];
                    [p.s, p.x, p.r, p.alpha, k, ks]
                })
                .collect()
        })
        .collect()
}

/// Residuals of the x-graph and r-graph equations and their derivatives,
/// reconstructed from the angle data.
pub fn graph_ode_residuals(config: &AmbientConfig, curve: &ProfileCurve) -> GraphResiduals {
    let nm1 = config.nf() - 1.0;
    let mut out = GraphResiduals::default();
    for run in differentiated(curve, 2e-3, 0.05) {
        // split into x-graph and r-graph pieces
        for is_x in [true, false] {
            let ok = |v: &[f64; 6]| if is_x { v[3].cos().abs() >= 0.3 } else { v[3].sin().abs() >= 0.3 };
            let mut piece: Vec<[f64; 6]> = Vec::new();
            let flush = |piece: &mut Vec<[f64; 6]>, out: &mut GraphResiduals| {
                if piece.len() <= 2 * END_MARGIN {
                    if !piece.is_empty() {
                        out.skipped += 1;
                    }
                    piece.clear();
                    return;
                }
                for v in &piece[END_MARGIN..piece.len() - END_MARGIN] {
                    let [_, x, r, a, k, ks] = *v;
                    let (sa, ca) = a.sin_cos();
                    if is_x {
                        let (u, up) = (r, sa / ca);
                        let upp = k / ca.powi(3);
                        let uppp = (ks + 3.0 * k * k * up) / ca.powi(4);
                        let g = 1.0 + up * up;
                        let r1 = upp / g - (x * up / 2.0 - u / 2.0 + nm1 / u);
                        let r2 = uppp / g - (2.0 * up * upp * upp / (g * g) + x * upp / 2.0 - nm1 * up / (u * u));
                        out.x_graph = out.x_graph.max(r1.abs());
                        out.x_graph_differentiated = out.x_graph_differentiated.max(r2.abs());
                    } else {
                        let (f, fp) = (x, ca / sa);
                        let fpp = -k / sa.powi(3);
                        let fppp = (-ks + 3.0 * k * k * fp) / sa.powi(4);
                        let g = 1.0 + fp * fp;
                        let c = r / 2.0 - nm1 / r;
                        let r3 = fpp / g - (c * fp - f / 2.0);
                        let r4 = fppp / g - (2.0 * fp * fpp * fpp / (g * g) + c * fpp + nm1 * fp / (r * r));
                        out.r_graph = out.r_graph.max(r3.abs());
                        out.r_graph_differentiated = out.r_graph_differentiated.max(r4.abs());
                    }
                    out.checked += 1;
                }
                piece.clear();
            };
            for v in &run {
                if ok(v) {
                    piece.push(*v);
                } else {
                    flush(&mut piece, &mut out);
                }
            }
            flush(&mut piece, &mut out);
        }
    }
    out
}

/// Largest residual of the polar form `ρ'' = F(φ, ρ, ρ')` along a curve,
/// away from the poles and from radial tangents.
pub fn polar_residual(config: &AmbientConfig, curve: &ProfileCurve) -> f64 {
    let n = config.nf();
    let mut worst: f64 = 0.0;
    for p in &curve.samples {
        if !(p.r > 0.0) {
            continue;
        }
        let rho = p.x.hypot(p.r);
        let phi = p.r.atan2(p.x);
        if !(0.1..=PI - 0.1).contains(&phi) {
            continue;
        }
        let (sa, ca) = p.alpha.sin_cos();
        let a = p.x * ca + p.r * sa;
        let b = p.x * sa - p.r * ca;
        if b.abs() < 0.05 * rho {
            continue;
        }
        let kappa = alpha_rate(config, p.x, p.r, p.alpha);
        let rp = rho * a / b;
        let drp_ds = a * a / (rho * b) + rho * (1.0 - kappa * b) / b - rho * kappa * a * a / (b * b);
        let rpp = drp_ds * rho * rho / b;
        let rhs = (rp * rp + (rho * rho + rp * rp) * (n - rho * rho / 2.0 - (n - 1.0) * rp / (rho * phi.tan()))) / rho;
        worst = worst.max((rpp - rhs).abs() / (1.0 + rhs.abs()));
    }
    worst
}

// Shape properties

/// Largest `|α̇ - rhs|` over `points` equally spaced samples of the exact
/// sphere, plane and cylinder.
pub fn exact_solution_residual(config: &AmbientConfig, which: Reference, points: usize) -> Result<f64> {
    let (lo, hi, rate) = match which {
        Reference::Sphere => (0.0, PI * config.sphere_radius, 1.0 / config.sphere_radius),
        Reference::Plane => (0.05, 10.0, 0.0),
        Reference::Cylinder => (-10.0, 10.0, 0.0),
    };
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let s = lo + (hi - lo) * (i as f64 + 0.5) / points as f64;
        let st = exact_solution(config, which, s)?;
        worst = worst.max(crate::model::residual(config, &st, rate)?.abs());
    }
    Ok(worst)
}

/// Degree and level checks over one geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub maximal_segments: usize,
    pub max_degree: u32,
    /// Degree-2 segments whose right sign is not `+`.
    pub degree_two_violations: usize,
    /// Worst `√(2(n-1)) - r` over interior maxima (positive means a violation).
    pub max_below_cylinder: f64,
    /// Worst `r - √(2(n-1))` over interior minima.
    pub min_above_cylinder: f64,
}

/// Segment degrees, types and interior extremum heights of Γ[0, r0, α0],
/// followed in both directions through at most `vt` vertical tangents each.
pub fn shape_summary(config: &AmbientConfig, settings: &IntegratorSettings, r0: f64, alpha0: f64, vt: usize) -> Result<ShapeSummary> {
    let st = IntegratorSettings {
        reflect_axis: false,
        stop_after_vertical_tangents: Some(vt),
        stop_after_r_axis_crossings: None,
        x_escape: settings.x_escape.min(10.0),
        ..*settings
    };
    let init = InitialData::Interior { x0: 0.0, r0, alpha0 };
    let mut out = ShapeSummary { max_below_cylinder: f64::NEG_INFINITY, min_above_cylinder: f64::NEG_INFINITY, ..Default::default() };
    let rc = config.cylinder_radius;
    for dir in [Direction::Forward, Direction::Backward] {
        let curve = integrate(config, &st, init, dir)?;
        for seg in decompose(&curve)? {
            if !seg.is_maximal() {
                continue;
            }
            out.maximal_segments += 1;
            out.max_degree = out.max_degree.max(seg.degree);
            if seg.degree == 2 && seg.right_sign != Sign::Plus {
                out.degree_two_violations += 1;
            }
            for (is_max, _, r) in height_extrema(&curve, &seg) {
                if is_max {
                    out.max_below_cylinder = out.max_below_cylinder.max(rc - r);
                } else {
                    out.min_above_cylinder = out.min_above_cylinder.max(r - rc);
                }
            }
        }
    }
    Ok(out)
}

/// The `(r0, α0)` grid of the degree-bound sweep: 20 heights in `[0.2, 4]`
/// times 10 angles in `(-π/2, π/2)`.
pub fn degree_sweep_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(200);
    for i in 0..20 {
        let r0 = 0.2 + 3.8 * i as f64 / 19.0;
        for j in 0..10 {
            let a0 = -PI / 2.0 + PI * (j as f64 + 0.5) / 10.0;
            g.push((r0, a0));
        }
    }
    g
}

// Suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    GaussBonnet,
    Legendre,
    QuarterSpheres,
    Residuals,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "gauss-bonnet" => Suite::GaussBonnet,
            "legendre" => Suite::Legendre,
            "quarter-spheres" => Suite::QuarterSpheres,
            "residuals" => Suite::Residuals,
            other => return Err(Error::Parse(format!("unknown suite '{other}'"))),
        })
    }
}

fn circle(center: (f64, f64), radius: f64, points: usize) -> Vec<GeodesicState> {
    (0..=points)
        .map(|k| {
            let th = TAU * k as f64 / points as f64;
            GeodesicState::new(radius * th, center.0 + radius * th.cos(), center.1 + radius * th.sin(), th + PI / 2.0)
        })
        .collect()
}

/// `∫ (1 + (n-1)/r²)` over the disk of radius `rho` centred at height `h`.
pub fn disk_integral(config: &AmbientConfig, h: f64, rho: f64) -> f64 {
    PI * rho * rho + (config.nf() - 1.0) * TAU * (h / (h * h - rho * rho).sqrt() - 1.0)
}

fn gauss_bonnet_suite(config: &AmbientConfig, settings: &IntegratorSettings) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let (_, lp) = find_angenent_torus(config, settings)?;
    out.push(CheckReport::value("gauss-bonnet/angenent-torus", gauss_bonnet_closed(config, &lp.curve)?, TAU, 1e-3));
    out.push(CheckReport::value("gauss-bonnet/torus-closure", lp.defect, 0.0, CLOSURE_TOL));
    let c = (0.0, config.cylinder_radius);
    let rho = 0.1;
    let exact = disk_integral(config, c.1, rho);
    let gb = gauss_bonnet_boundary(config, &circle(c, rho, 400))?;
    out.push(CheckReport::value("gauss-bonnet/circle", gb, exact, 1e-9));
    Ok(out)
}

fn legendre_suite(config: &AmbientConfig, settings: &IntegratorSettings) -> Result<Vec<CheckReport>> {
    let n = f64::from(config.n);
    let d = legendre_start_derivatives(config.n);
    let (w0, dw0) = legendre_linearization(config)?;
    let mut out = vec![
        CheckReport::value("legendre/w''(1)", d[2], 2.0 * n / (n + 2.0), 1e-12),
        CheckReport::value("legendre/w'''(1)", d[3], -4.0 * n / ((n + 2.0) * (n + 4.0)), 1e-12),
        CheckReport::interval("legendre/w(0)", w0, f64::NEG_INFINITY, 0.0),
        CheckReport::interval("legendre/dw(0)", dw0, 0.0, f64::INFINITY),
    ];
    let eps = [4e-3, 2e-3, 1e-3];
    let q = linearization_quotients(config, settings, &eps)?;
    let errs: Vec<f64> = q.iter().map(|v| (v - w0).abs()).collect();
    out.push(CheckReport::value("legendre/linearization", q[2], w0, 10.0 * eps[2]));
    let order = (errs[0] / errs[2]).log2() / 2.0;
    out.push(CheckReport::value("legendre/linearization-order", order, 1.0, 0.3));
    Ok(out)
}

fn quarter_sphere_suite(config: &AmbientConfig, settings: &IntegratorSettings) -> Result<Vec<CheckReport>> {
    let samples = quarter_sphere_samples(config, 50);
    let reports: Vec<Result<QuarterSphereReport>> = {
        let one = |x0: &f64| quarter_sphere_intersections(config, settings, *x0);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            samples.par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            samples.iter().map(one).collect()
        }
    };
    let mut out = Vec::new();
    for rep in reports {
        let rep = rep?;
        let name = format!("quarter-sphere/x0={:.6}", rep.x0);
        let mut c = CheckReport::value(name, rep.sphere_crossings as f64, 1.0, 0.0);
        c.passed &= rep.consistent;
        out.push(c);
    }
    Ok(out)
}

fn residual_suite(config: &AmbientConfig, settings: &IntegratorSettings) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, which) in [("sphere", Reference::Sphere), ("plane", Reference::Plane), ("cylinder", Reference::Cylinder)] {
        out.push(CheckReport::value(format!("residuals/exact-{name}"), exact_solution_residual(config, which, 1000)?, 0.0, 1e-10));
    }
    let sphere = integrate(config, settings, InitialData::AxisStart { x0: config.sphere_radius }, Direction::Forward)?;
    out.push(CheckReport::value("residuals/sphere-graph", graph_ode_residuals(config, &sphere).max(), 0.0, 1e-7));
    out.push(CheckReport::value("residuals/sphere-polar", polar_residual(config, &sphere), 0.0, 1e-8));
    out.push(CheckReport::value("residuals/sphere-mean-convexity", mean_convexity_margin(&sphere)?, -config.sphere_radius, 1e-6));
    // the differentiated equations need a dense sampling
    let st = IntegratorSettings { stop_after_vertical_tangents: Some(4), x_escape: 10.0, max_step: settings.max_step.min(DENSE_STEP), ..*settings };
    let gamma = integrate(config, &st, InitialData::Interior { x0: 0.0, r0: 1.7, alpha0: 0.3 }, Direction::Forward)?;
    out.push(CheckReport::value("residuals/gamma-graph", graph_ode_residuals(config, &gamma).max(), 0.0, 1e-6));
    out.push(CheckReport::value("residuals/gamma-polar", polar_residual(config, &gamma), 0.0, 1e-6));
    Ok(out)
}

/// Runs a verification suite and returns one report per check.
pub fn run_suite(config: &AmbientConfig, settings: &IntegratorSettings, suite: Suite) -> Result<Vec<CheckReport>> {
    Ok(match suite {
        Suite::GaussBonnet => gauss_bonnet_suite(config, settings)?,
        Suite::Legendre => legendre_suite(config, settings)?,
        Suite::QuarterSpheres => quarter_sphere_suite(config, settings)?,
        Suite::Residuals => residual_suite(config, settings)?,
        Suite::All => {
            let mut v = residual_suite(config, settings)?;
            v.extend(legendre_suite(config, settings)?);
            v.extend(quarter_sphere_suite(config, settings)?);
            v.extend(gauss_bonnet_suite(config, settings)?);
            v
        }
    })
}
