//! Event-driven integration of the geodesic equation in arclength form.
//!
//! The state is `(x, r, α)` with `ẋ = cos α`, `ṙ = sin α` and
//! `α̇ = (x/2) sin α + ((n-1)/r - r/2) cos α`. The axis `r = 0` is singular;
//! curves leave it through the sixth-order series and arrive at it through a
//! series match at height `approach_height`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{alpha_rate, curvature, AmbientConfig, GeodesicState, InitialData};
use crate::rk::{dp5_step, error_norm, next_step_factor};

/// Largest tangent rotation allowed in one step.
const MAX_TURN: f64 = 0.05;
const MAX_STEPS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Heights below this count as touching the axis.
    pub axis_eps: f64,
    /// Height of the hand-off between the axis series and the integrator.
    pub series_step: f64,
    /// Height at which an approach to the axis is matched against the series.
    pub approach_height: f64,
    pub max_arclength: f64,
    pub x_escape: f64,
    pub max_step: f64,
    /// Tolerance on `|cos α|` for a perpendicular axis hit.
    pub perp_tol: f64,
    /// Continue through near-axis passages by reflecting off the axis
    /// instead of stopping at a hit.
    pub reflect_axis: bool,
    pub stop_after_vertical_tangents: Option<usize>,
    pub stop_after_r_axis_crossings: Option<usize>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            axis_eps: 1e-8,
            series_step: 1e-3,
            approach_height: 5e-2,
            max_arclength: 200.0,
            x_escape: 50.0,
            max_step: 0.01,
            perp_tol: 1e-6,
            reflect_axis: false,
            stop_after_vertical_tangents: None,
            stop_after_r_axis_crossings: None,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("axis_eps", self.axis_eps),
            ("series_step", self.series_step),
            ("approach_height", self.approach_height),
            ("max_arclength", self.max_arclength),
            ("x_escape", self.x_escape),
            ("max_step", self.max_step),
            ("perp_tol", self.perp_tol),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("setting {name} must be positive, got {v}")));
            }
        }
        if self.series_step <= self.axis_eps {
            return Err(Error::Domain("series_step must exceed axis_eps".into()));
        }
        if self.approach_height <= self.axis_eps {
            return Err(Error::Domain("approach_height must exceed axis_eps".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    VerticalTangent,
    /// `sin α` crosses zero: an interior extremum of the height.
    HorizontalTangent,
    AxisHit,
    /// Synthetic reflection off the axis (reflect mode only).
    AxisBounce,
    RAxisCrossing,
    CylinderCrossing,
    SphereCrossing,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub index: usize,
    pub kind: EventKind,
}

/// Series match against the regular solution through `(x_axis, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisContact {
    pub index: usize,
    pub x_axis: f64,
    /// Slope defect `dx/dr - f'(h)` at the matching height.
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    AxisHit,
    /// Reached `axis_eps` without a perpendicular match.
    AxisGrazing,
    Escape,
    ArclengthLimit,
    StopRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub config: AmbientConfig,
    pub samples: Vec<GeodesicState>,
    /// `dα/ds` at each sample; synthetic axis samples carry a large signed value.
    pub curvature: Vec<f64>,
    pub events: Vec<Event>,
    pub contacts: Vec<AxisContact>,
    pub termination: Termination,
    /// How the first sample was reached when the curve was assembled from a
    /// reversed run (backward integration or a mirror image); `None` when it
    /// is the initial data.
    #[serde(default)]
    pub head: Option<Termination>,
}

impl ProfileCurve {
    pub fn first(&self) -> &GeodesicState {
        &self.samples[0]
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples.last().expect("curves are never empty")
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Builds a curve from bare samples (e.g. read back from CSV); curvature
    /// is recomputed and events are rediscovered from sign changes.
    pub fn from_samples(config: AmbientConfig, samples: Vec<GeodesicState>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooShort(samples.len()));
        }
        let curvature = samples.iter().map(|p| curvature(&config, p)).collect();
        let mut events = Vec::new();
        for (i, w) in samples.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            if a.alpha.cos() * b.alpha.cos() < 0.0 {
                events.push(Event { index: i + 1, kind: EventKind::VerticalTangent });
            }
            if a.alpha.sin() * b.alpha.sin() < 0.0 {
                events.push(Event { index: i + 1, kind: EventKind::HorizontalTangent });
            }
            if a.x * b.x < 0.0 || (b.x == 0.0 && a.x != 0.0) {
                events.push(Event { index: i + 1, kind: EventKind::RAxisCrossing });
            }
        }
        let last = samples.len() - 1;
        let termination = if samples[last].r == 0.0 {
            events.push(Event { index: last, kind: EventKind::AxisHit });
            Termination::AxisHit
        } else {
            Termination::ArclengthLimit
        };
        Ok(Self { config, samples, curvature, events, contacts: Vec::new(), termination, head: None })
    }
}

/// Right-hand side `(cos α, sin α, α̇)`.
pub fn step_rhs(config: &AmbientConfig, state: &GeodesicState) -> Result<(f64, f64, f64)> {
    if !(state.r > 0.0) {
        return Err(Error::Domain(format!("step_rhs needs r > 0, got {}", state.r)));
    }
    let (sa, ca) = state.alpha.sin_cos();
    Ok((ca, sa, alpha_rate(config, state.x, state.r, state.alpha)))
}

fn rhs(config: &AmbientConfig, y: &[f64; 3]) -> Option<[f64; 3]> {
    if !(y[1] > 0.0) {
        return None;
    }
    let (sa, ca) = y[2].sin_cos();
    Some([ca, sa, alpha_rate(config, y[0], y[1], y[2])])
}

/// Taylor coefficients `(f''(0), f''''(0))` of the regular solution `x = f(r)`
/// through `(x0, 0)`.
pub fn axis_coefficients(config: &AmbientConfig, x0: f64) -> (f64, f64) {
    let n = config.nf();
    let f2 = -x0 / (2.0 * n);
    let f4 = -3.0 / (4.0 * n * (n + 2.0)) * (x0.powi(3) / (n * n) + x0);
    (f2, f4)
}

fn sixth_coefficient(n: f64, x0: f64) -> f64 {
    let x2 = x0 * x0;
    15.0 * x0 * (-3.0 * n.powi(4) - 13.0 * n * n * x2 + (2.0 * n - 6.0) * x2 * x2) / (8.0 * n.powi(5) * (n + 2.0) * (n + 4.0))
}

struct AxisSeries {
    f2: f64,
    f4: f64,
    f6: f64,
    x0: f64,
}

impl AxisSeries {
    fn new(config: &AmbientConfig, x0: f64) -> Self {
        let (f2, f4) = axis_coefficients(config, x0);
        Self { f2, f4, f6: sixth_coefficient(config.nf(), x0), x0 }
    }

    fn value(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.x0 + self.f2 * r2 / 2.0 + self.f4 * r2 * r2 / 24.0 + self.f6 * r2 * r2 * r2 / 720.0
    }

    fn slope(&self, r: f64) -> f64 {
        self.f2 * r + self.f4 * r.powi(3) / 6.0 + self.f6 * r.powi(5) / 120.0
    }

    fn arclength(&self, h: f64) -> f64 {
        // 5-point Gauss-Legendre on [0, h]
        const NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
        const WEIGHTS: [f64; 5] =
            [0.236_926_885_056_189_08, 0.478_628_670_499_366_47, 0.568_888_888_888_888_9, 0.478_628_670_499_366_47, 0.236_926_885_056_189_08];
        let half = 0.5 * h;
        NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(t, w)| {
                let p = self.slope(half * (1.0 + t));
                w * (1.0 + p * p).sqrt()
            })
            .sum::<f64>()
            * half
    }
}

fn series_state(config: &AmbientConfig, x0: f64, h: f64) -> GeodesicState {
    let ser = AxisSeries::new(config, x0);
    GeodesicState::new(ser.arclength(h), ser.value(h), h, FRAC_PI_2 - ser.slope(h).atan())
}

/// State at height `h` on Q[x0] from the axis series.
pub fn axis_series_start(config: &AmbientConfig, x0: f64, h: f64) -> Result<GeodesicState> {
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::Domain(format!("axis start needs x0 > 0, got {x0}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("series height must be positive, got {h}")));
    }
    Ok(series_state(config, x0, h))
}

/// Axis point of the regular solution through `(x, r)` at small height `r`.
fn match_axis_point(config: &AmbientConfig, x: f64, r: f64) -> f64 {
    let n = config.nf();
    let mut x0 = x;
    for _ in 0..8 {
        let ser = AxisSeries::new(config, x0);
        let g = ser.value(r) - x;
        let x2 = x0 * x0;
        let d4 = -3.0 * (n * n + 3.0 * x2) / (4.0 * n.powi(3) * (n + 2.0));
        let d6 = 15.0 * (-3.0 * n.powi(4) - 39.0 * n * n * x2 + (10.0 * n - 30.0) * x2 * x2) / (8.0 * n.powi(5) * (n + 2.0) * (n + 4.0));
        let dg = 1.0 - r * r / (4.0 * n) + d4 * r.powi(4) / 24.0 + d6 * r.powi(6) / 720.0;
        let dx = g / dg;
        x0 -= dx;
        if dx.abs() <= 1e-17 * (1.0 + x0.abs()) {
            break;
        }
    }
    x0
}

// Representative of `target` mod 2π nearest to `near`.
fn nearest_branch(target: f64, near: f64) -> f64 {
    target + TAU * ((near - target) / TAU).round()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Trigger {
    VerticalTangent,
    HorizontalTangent,
    RAxis,
    Cylinder,
    Sphere,
    AxisApproach,
    AxisEps,
    Escape,
}

struct Builder<'a> {
    config: &'a AmbientConfig,
    settings: &'a IntegratorSettings,
    samples: Vec<GeodesicState>,
    curvature: Vec<f64>,
    events: Vec<Event>,
    contacts: Vec<AxisContact>,
    vertical_tangents: usize,
    r_axis_crossings: usize,
}

impl<'a> Builder<'a> {
    fn push(&mut self, st: GeodesicState, kappa: f64) -> usize {
        if let Some(last) = self.samples.last() {
            if st.s <= last.s {
                return self.samples.len() - 1;
            }
        }
        self.samples.push(st);
        self.curvature.push(kappa);
        self.samples.len() - 1
    }

    fn push_regular(&mut self, s: f64, y: &[f64; 3]) -> usize {
        let st = GeodesicState::new(s, y[0], y[1], y[2]);
        let k = alpha_rate(self.config, y[0], y[1], y[2]);
        self.push(st, k)
    }

    fn event(&mut self, index: usize, kind: EventKind) {
        self.events.push(Event { index, kind });
        match kind {
            EventKind::VerticalTangent => self.vertical_tangents += 1,
            EventKind::RAxisCrossing => self.r_axis_crossings += 1,
            _ => {}
        }
    }

    fn stop_reached(&self) -> bool {
        self.settings.stop_after_vertical_tangents.is_some_and(|k| self.vertical_tangents >= k)
            || self.settings.stop_after_r_axis_crossings.is_some_and(|k| self.r_axis_crossings >= k)
    }

    fn finish(self, termination: Termination) -> ProfileCurve {
        ProfileCurve {
            config: *self.config,
            samples: self.samples,
            curvature: self.curvature,
            events: self.events,
            contacts: self.contacts,
            termination,
            head: None,
        }
    }
}

enum AxisOutcome {
    Hit,
    Restart { s: f64, y: [f64; 3] },
    Continue,
}

/// Integrates one geodesic. Backward integration follows the reversed
/// tangent and returns the curve re-parametrized with `s ≤ 0`, keeping the
/// original orientation.
pub fn integrate(config: &AmbientConfig, settings: &IntegratorSettings, init: InitialData, direction: Direction) -> Result<ProfileCurve> {
    settings.validate()?;
    init.validate()?;
    match direction {
        Direction::Forward => run(config, settings, init),
        Direction::Backward => match init {
            InitialData::Interior { x0, r0, alpha0 } => {
                let c = run(config, settings, InitialData::Interior { x0, r0, alpha0: alpha0 + PI })?;
                Ok(reverse(c))
            }
            InitialData::AxisStart { .. } => Err(Error::Domain("backward integration from the axis leaves the half-plane".into())),
        },
    }
}

fn reverse(c: ProfileCurve) -> ProfileCurve {
    let len = c.samples.len();
    let samples = c.samples.iter().rev().map(|p| GeodesicState::new(-p.s, p.x, p.r, p.alpha - PI)).collect();
    let curvature = c.curvature.iter().rev().map(|k| -k).collect();
    let events = c.events.iter().rev().map(|e| Event { index: len - 1 - e.index, kind: e.kind }).collect();
    let contacts = c.contacts.iter().rev().map(|a| AxisContact { index: len - 1 - a.index, ..*a }).collect();
    ProfileCurve { config: c.config, samples, curvature, events, contacts, termination: Termination::StopRule, head: Some(c.termination) }
}

fn run(config: &AmbientConfig, settings: &IntegratorSettings, init: InitialData) -> Result<ProfileCurve> {
    let mut b = Builder {
        config,
        settings,
        samples: Vec::new(),
        curvature: Vec::new(),
        events: Vec::new(),
        contacts: Vec::new(),
        vertical_tangents: 0,
        r_axis_crossings: 0,
    };
    let (mut s, mut y) = match init {
        InitialData::Interior { x0, r0, alpha0 } => {
            let y = [x0, r0, alpha0];
            b.push_regular(0.0, &y);
            (0.0, y)
        }
        InitialData::AxisStart { x0 } => {
            let start = GeodesicState::new(0.0, x0, 0.0, FRAC_PI_2);
            b.push(start, curvature(config, &start));
            let st = series_state(config, x0, settings.series_step);
            let y = [st.x, st.r, st.alpha];
            b.push_regular(st.s, &y);
            (st.s, y)
        }
    };
    let f = |v: &[f64; 3]| rhs(config, v);
    let mut k1 = f(&y).ok_or_else(|| Error::Domain("initial state outside r > 0".into()))?;
    let mut h = settings.max_step.min(0.25 * y[1]);
    let mut steps = 0usize;

    loop {
        steps += 1;
        let last_state = GeodesicState::new(s, y[0], y[1], y[2]);
        if steps > MAX_STEPS {
            return Err(Error::StepBudget { last: last_state });
        }
        let remaining = settings.max_arclength - s;
        if remaining <= 1e-12 * (1.0 + s.abs()) {
            let idx = b.samples.len() - 1;
            b.event(idx, EventKind::Truncated);
            return Ok(b.finish(Termination::ArclengthLimit));
        }
        let kappa = k1[2].abs();
        let mut cap = settings.max_step.min(0.25 * y[1]).min(remaining);
        if kappa > 0.0 {
            cap = cap.min(MAX_TURN / kappa);
        }
        let hh = h.min(cap);
        if hh < 1e-14 * (1.0 + s.abs()) {
            return Err(Error::StepUnderflow { last: last_state });
        }
        let Some(step) = dp5_step(&f, &y, &k1, hh) else {
            h = hh * 0.25;
            continue;
        };
        let e = error_norm(&y, &step.y, &step.err, settings.rel_tol, settings.abs_tol);
        if e > 1.0 {
            h = hh * next_step_factor(e).min(0.9);
            continue;
        }
        let y1 = step.y;
        let s1 = if hh >= remaining { settings.max_arclength } else { s + hh };

        let triggers = detect(config, settings, &y, &y1);
        let mut located: Vec<(f64, Trigger, [f64; 3])> = triggers
            .into_iter()
            .map(|tr| {
                let (theta, st) = refine(config, settings, &f, &y, &k1, hh, tr);
                (theta, tr, st)
            })
            .collect();
        located.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut restarted = None;
        for (theta, tr, yt) in located {
            let st_s = if theta >= 1.0 { s1 } else { s + theta * hh };
            match tr {
                Trigger::VerticalTangent | Trigger::HorizontalTangent | Trigger::RAxis | Trigger::Cylinder | Trigger::Sphere => {
                    let idx = b.push_regular(st_s, &yt);
                    let kind = match tr {
                        Trigger::VerticalTangent => EventKind::VerticalTangent,
                        Trigger::HorizontalTangent => EventKind::HorizontalTangent,
                        Trigger::RAxis => EventKind::RAxisCrossing,
                        Trigger::Cylinder => EventKind::CylinderCrossing,
                        _ => EventKind::SphereCrossing,
                    };
                    b.event(idx, kind);
                    if b.stop_reached() {
                        return Ok(b.finish(Termination::StopRule));
                    }
                }
                Trigger::AxisApproach => match axis_approach(&mut b, st_s, &yt) {
                    AxisOutcome::Hit => return Ok(b.finish(Termination::AxisHit)),
                    AxisOutcome::Restart { s: s_new, y: y_new } => {
                        restarted = Some((s_new, y_new));
                        break;
                    }
                    AxisOutcome::Continue => {}
                },
                Trigger::AxisEps => {
                    b.push_regular(st_s, &yt);
                    return Ok(b.finish(Termination::AxisGrazing));
                }
                Trigger::Escape => {
                    let idx = b.push_regular(st_s, &yt);
                    b.event(idx, EventKind::Truncated);
                    return Ok(b.finish(Termination::Escape));
                }
            }
            if b.stop_reached() {
                return Ok(b.finish(Termination::StopRule));
            }
        }
        if let Some((s_new, y_new)) = restarted {
            s = s_new;
            y = y_new;
            k1 = f(&y).ok_or_else(|| Error::Domain("restart state outside r > 0".into()))?;
            h = settings.max_step.min(0.25 * y[1]);
            if b.stop_reached() {
                return Ok(b.finish(Termination::StopRule));
            }
            continue;
        }
        b.push_regular(s1, &y1);
        s = s1;
        y = y1;
        k1 = step.k_end;
        h = hh * next_step_factor(e);
    }
}

fn event_values(config: &AmbientConfig, settings: &IntegratorSettings, y: &[f64; 3]) -> [f64; 8] {
    [
        y[2].cos(),
        y[2].sin(),
        y[0],
        y[1] - config.cylinder_radius,
        y[0] * y[0] + y[1] * y[1] - config.sphere_radius * config.sphere_radius,
        y[1] - settings.approach_height,
        y[1] - settings.axis_eps,
        settings.x_escape - y[0].abs().max(y[1]),
    ]
}

const TRIGGERS: [Trigger; 8] = [
    Trigger::VerticalTangent,
    Trigger::HorizontalTangent,
    Trigger::RAxis,
    Trigger::Cylinder,
    Trigger::Sphere,
    Trigger::AxisApproach,
    Trigger::AxisEps,
    Trigger::Escape,
];

fn detect(config: &AmbientConfig, settings: &IntegratorSettings, y0: &[f64; 3], y1: &[f64; 3]) -> Vec<Trigger> {
    let g0 = event_values(config, settings, y0);
    let g1 = event_values(config, settings, y1);
    let mut out = Vec::new();
    for (i, tr) in TRIGGERS.iter().enumerate() {
        let hit = match tr {
            // one-sided: only descending / outward crossings matter
            Trigger::AxisApproach | Trigger::AxisEps | Trigger::Escape => g0[i] > 0.0 && g1[i] <= 0.0,
            _ => (g0[i] < 0.0 && g1[i] >= 0.0) || (g0[i] > 0.0 && g1[i] <= 0.0),
        };
        if hit {
            out.push(*tr);
        }
    }
    out
}

// Bisection on the sub-step length; returns the first point past the root.
fn refine<F>(config: &AmbientConfig, settings: &IntegratorSettings, f: &F, y: &[f64; 3], k1: &[f64; 3], h: f64, tr: Trigger) -> (f64, [f64; 3])
where
    F: Fn(&[f64; 3]) -> Option<[f64; 3]>,
{
    let idx = TRIGGERS.iter().position(|t| *t == tr).expect("known trigger");
    let g = |v: &[f64; 3]| event_values(config, settings, v)[idx];
    let sign0 = g(y) > 0.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut hi_state = dp5_step(f, y, k1, h).map(|st| st.y).expect("accepted step is evaluable");
    let mut iters = 0;
    while (hi - lo) * h > 1e-15 * (1.0 + y[0].abs().max(y[1])) || iters < 12 {
        iters += 1;
        if iters > 80 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match dp5_step(f, y, k1, mid * h) {
            Some(st) => {
                if (g(&st.y) > 0.0) == sign0 {
                    lo = mid;
                } else {
                    hi = mid;
                    hi_state = st.y;
                }
            }
            None => hi = mid,
        }
    }
    (hi, hi_state)
}

fn axis_approach(b: &mut Builder<'_>, s_p: f64, yp: &[f64; 3]) -> AxisOutcome {
    let config = b.config;
    let settings = b.settings;
    let (x_p, r_p, a_p) = (yp[0], yp[1], yp[2]);
    let x_axis = match_axis_point(config, x_p, r_p);
    let ser = AxisSeries::new(config, x_axis);
    let slope = a_p.cos() / a_p.sin();
    let defect = slope - ser.slope(r_p);
    let len = ser.arclength(r_p);
    let alpha_v = nearest_branch(-FRAC_PI_2, a_p);
    let big = 1.0 / settings.axis_eps;

    if !settings.reflect_axis {
        if defect.abs() > settings.perp_tol {
            return AxisOutcome::Continue;
        }
        b.push_regular(s_p, yp);
        let hit = GeodesicState::new(s_p + len, x_axis, 0.0, alpha_v - defect.atan());
        let k = curvature(config, &hit);
        let idx = b.push(hit, k);
        b.event(idx, EventKind::AxisHit);
        b.contacts.push(AxisContact { index: idx, x_axis, defect });
        return AxisOutcome::Hit;
    }

    // Reflection: the singular part of the slope flips sign across the
    // passage while the regular part is unchanged.
    b.push_regular(s_p, yp);
    let d_in = a_p.cos().signum();
    let d = if defect != 0.0 { -defect.signum() } else { d_in };
    let p_out = ser.slope(r_p) - defect;
    let alpha_out = nearest_branch(f64::atan2(1.0, p_out), alpha_v + d * PI);
    let d_out = alpha_out.cos().signum();
    let tiny = settings.axis_eps;
    let mut s_cur = s_p + len;
    if d_in != d {
        let idx = b.push(GeodesicState::new(s_cur, x_axis, 0.0, alpha_v), d * big);
        b.event(idx, EventKind::VerticalTangent);
        s_cur += tiny;
    }
    let idx = b.push(GeodesicState::new(s_cur, x_axis, 0.0, alpha_v + d * FRAC_PI_2), d * big);
    b.event(idx, EventKind::AxisBounce);
    b.contacts.push(AxisContact { index: idx, x_axis, defect });
    s_cur += tiny;
    if d_out != d {
        let idx = b.push(GeodesicState::new(s_cur, x_axis, 0.0, alpha_v + d * PI), d * big);
        b.event(idx, EventKind::VerticalTangent);
        s_cur += tiny;
    }
    let y_new = [x_p, r_p, alpha_out];
    let s_new = s_cur + len;
    b.push_regular(s_new, &y_new);
    AxisOutcome::Restart { s: s_new, y: y_new }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn cfg(n: u32) -> AmbientConfig {
        AmbientConfig::new(n).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let c = cfg(2);
        let (a, b, k) = step_rhs(&c, &GeodesicState::new(0.0, 0.0, SQRT_2, 0.0)).unwrap();
        assert_abs_diff_eq!(a, 1.0);
        assert_abs_diff_eq!(b, 0.0);
        assert_abs_diff_eq!(k, 0.0, epsilon = 1e-15);
        let (a, b, k) = step_rhs(&c, &GeodesicState::new(0.0, 2.0, 0.001, FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0);
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);
        let (_, _, k) = step_rhs(&cfg(3), &GeodesicState::new(0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(k, 1.5);
        assert!(step_rhs(&c, &GeodesicState::new(0.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn series_coefficients() {
        let (f2, f4) = axis_coefficients(&cfg(2), 2.0);
        assert_abs_diff_eq!(f2, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f4, -0.375, epsilon = 1e-15);
        let (f2, f4) = axis_coefficients(&cfg(3), 1.0);
        assert_abs_diff_eq!(f2, -1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f4, -1.0 / 18.0, epsilon = 1e-15);
    }

    #[test]
    fn series_start_on_sphere() {
        let st = axis_series_start(&cfg(2), 2.0, 0.01).unwrap();
        assert_abs_diff_eq!(st.x, (4.0f64 - 1e-4).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(st.r, 0.01);
        // tangent of the circle at polar angle θ is θ + π/2
        let theta = (0.01f64 / 2.0).asin();
        assert_abs_diff_eq!(st.alpha, theta + FRAC_PI_2, epsilon = 1e-10);
        assert_abs_diff_eq!(st.s, 2.0 * theta, epsilon = 1e-12);
        assert!(axis_series_start(&cfg(2), 0.0, 0.01).is_err());
    }

    #[test]
    fn series_follows_sphere_to_sixth_order() {
        for n in 2..=6 {
            let c = cfg(n);
            let rho = c.sphere_radius;
            assert_abs_diff_eq!(sixth_coefficient(c.nf(), rho), -45.0 / rho.powi(5), epsilon = 1e-14);
            let ser = AxisSeries::new(&c, rho);
            for r in [0.02f64, 0.05, 0.1] {
                // first omitted term is -5 r⁸ / (128 ρ⁷)
                let bound = 6.0 * r.powi(8) / (128.0 * rho.powi(7));
                assert!((ser.value(r) - (rho * rho - r * r).sqrt()).abs() < bound + 1e-15);
            }
        }
    }

    #[test]
    fn axis_match_inverts_series() {
        let c = cfg(3);
        for x0 in [-3.0, -0.4, 0.7, 2.5] {
            let x = AxisSeries::new(&c, x0).value(1e-3);
            assert_abs_diff_eq!(match_axis_point(&c, x, 1e-3), x0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sphere_closes_on_axis() {
        let c = cfg(2);
        let curve = integrate(&c, &IntegratorSettings::default(), InitialData::AxisStart { x0: 2.0 }, Direction::Forward).unwrap();
        assert_eq!(curve.termination, Termination::AxisHit);
        let end = curve.last();
        assert!(end.r < 1e-8);
        assert!((end.x + 2.0).abs() < 1e-6);
        assert!(end.alpha.cos().abs() < 1e-6);
        let worst = curve.samples.iter().map(|p| (p.x * p.x + p.r * p.r - 4.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "sphere drift {worst}");
        assert_eq!(curve.events_of(EventKind::VerticalTangent).count(), 0);
        assert_eq!(curve.events_of(EventKind::RAxisCrossing).count(), 1);
    }

    #[test]
    fn higher_dimensional_spheres_close() {
        for n in 3..=6 {
            let c = cfg(n);
            let curve = integrate(&c, &IntegratorSettings::default(), InitialData::AxisStart { x0: c.sphere_radius }, Direction::Forward).unwrap();
            assert_eq!(curve.termination, Termination::AxisHit, "n = {n}");
            assert!((curve.last().x + c.sphere_radius).abs() < 1e-6);
            assert!(curve.contacts[0].defect.abs() < 1e-6);
        }
    }

    #[test]
    fn cylinder_runs_straight() {
        let c = cfg(2);
        let curve = integrate(&c, &IntegratorSettings::default(), InitialData::Interior { x0: 0.0, r0: SQRT_2, alpha0: 0.0 }, Direction::Forward).unwrap();
        assert_eq!(curve.termination, Termination::Escape);
        assert!((curve.last().x - 50.0).abs() < 1e-9);
        assert_eq!(curve.events_of(EventKind::VerticalTangent).count(), 0);
        assert!(curve.events_of(EventKind::Truncated).count() == 1);
    }

    #[test]
    fn backward_reverses_orientation() {
        let c = cfg(2);
        let st = IntegratorSettings { max_arclength: 3.0, ..Default::default() };
        let init = InitialData::Interior { x0: 0.0, r0: 1.2, alpha0: 0.3 };
        let fwd = integrate(&c, &st, init, Direction::Forward).unwrap();
        let bwd = integrate(&c, &st, init, Direction::Backward).unwrap();
        assert!(bwd.samples.windows(2).all(|w| w[0].s < w[1].s));
        let end = bwd.last();
        assert_eq!((end.s, end.x, end.r), (0.0, 0.0, 1.2));
        assert_abs_diff_eq!(end.alpha, 0.3, epsilon = 1e-15);
        // the two pieces join smoothly at s = 0
        let k_b = *bwd.curvature.last().unwrap();
        assert_abs_diff_eq!(k_b, fwd.curvature[0], epsilon = 1e-12);
        assert!(integrate(&c, &st, InitialData::AxisStart { x0: 1.0 }, Direction::Backward).is_err());
    }

    #[test]
    fn stop_rule_counts_vertical_tangents() {
        let c = cfg(2);
        let st = IntegratorSettings { stop_after_vertical_tangents: Some(2), ..Default::default() };
        let curve = integrate(&c, &st, InitialData::Interior { x0: 0.0, r0: 1.0, alpha0: 0.0 }, Direction::Forward).unwrap();
        assert_eq!(curve.termination, Termination::StopRule);
        assert_eq!(curve.events_of(EventKind::VerticalTangent).count(), 2);
        assert_eq!(curve.events.last().unwrap().kind, EventKind::VerticalTangent);
    }

    #[test]
    fn invalid_settings_rejected() {
        let st = IntegratorSettings { series_step: 1e-9, ..Default::default() };
        assert!(st.validate().is_err());
        let st = IntegratorSettings { rel_tol: -1.0, ..Default::default() };
        assert!(st.validate().is_err());
    }
}
