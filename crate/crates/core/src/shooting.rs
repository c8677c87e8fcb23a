//! Shooting from the axes, type-change brackets and the three theorem families.
//!
//! Type probes run in reflect mode so that segment indices stay continuous in
//! the shooting parameter when a segment passes close to the axis; output
//! curves are integrated without reflection and stop at the axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, AxisContact, Direction, Event, EventKind, IntegratorSettings, ProfileCurve, Termination};
use crate::model::{AmbientConfig, GeodesicState, InitialData};
use crate::segment::{decompose, EndpointKind, HalfEntireKind, Segment, Sign, TypeTag};

/// Γ[0,t,0] runs along the cylinder this close to it; probes are not attempted.
const CYLINDER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Q[t], shot perpendicularly from (t, 0).
    FromXAxis(f64),
    /// Γ[0,t,0], shot horizontally from (0, t).
    FromRAxis(f64),
}

impl Family {
    pub fn t(&self) -> f64 {
        match *self {
            Family::FromXAxis(t) | Family::FromRAxis(t) => t,
        }
    }

    pub fn at(&self, t: f64) -> Family {
        match self {
            Family::FromXAxis(_) => Family::FromXAxis(t),
            Family::FromRAxis(_) => Family::FromRAxis(t),
        }
    }

    fn init(&self) -> InitialData {
        match *self {
            Family::FromXAxis(t) => InitialData::AxisStart { x0: t },
            Family::FromRAxis(t) => InitialData::Interior { x0: 0.0, r0: t, alpha0: 0.0 },
        }
    }

    fn validate(&self) -> Result<()> {
        let t = self.t();
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!("shooting parameter must be positive, got {t}")));
        }
        Ok(())
    }
}

/// Parameters of the grid-scan and bisection searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub t_tol: f64,
    pub grid_resolution: f64,
    /// `x_escape` used for curves that leave along a trumpet.
    pub trumpet_escape: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { t_tol: 1e-12, grid_resolution: 1e-3, trumpet_escape: 7.0 }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_tol", self.t_tol), ("grid_resolution", self.grid_resolution), ("trumpet_escape", self.trumpet_escape)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("search setting {name} must be positive, got {v}")));
            }
        }
        if self.t_tol >= self.grid_resolution {
            return Err(Error::Domain("t_tol must be finer than the grid resolution".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    HalfEntire { kind: HalfEntireKind, index: i64 },
    ClosedPerpendicular { index: i64 },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub t: f64,
    pub segments: Vec<Segment>,
    pub terminal: Terminal,
    pub curve: ProfileCurve,
}

/// Mirror image of a curve that starts perpendicular to the r-axis, glued in
/// front of it so the result runs over `[-S, S]`.
pub fn mirror_r_axis(fwd: &ProfileCurve) -> Result<ProfileCurve> {
    let p0 = *fwd.first();
    if p0.x.abs() > 1e-12 || p0.alpha.sin().abs() > 1e-12 || p0.s != 0.0 {
        return Err(Error::Domain("mirror needs a start on the r-axis with a horizontal tangent at s = 0".into()));
    }
    let len = fwd.samples.len();
    let off = len - 1;
    let a0 = p0.alpha;
    let mut samples = Vec::with_capacity(2 * len - 1);
    let mut curvature = Vec::with_capacity(2 * len - 1);
    for i in (1..len).rev() {
        let p = &fwd.samples[i];
        samples.push(GeodesicState::new(-p.s, -p.x, p.r, 2.0 * a0 - p.alpha));
        curvature.push(fwd.curvature[i]);
    }
    samples.extend_from_slice(&fwd.samples);
    curvature.extend_from_slice(&fwd.curvature);

    let mut events: Vec<Event> = fwd.events.iter().filter(|e| e.index > 0).map(|e| Event { index: off - e.index, kind: e.kind }).collect();
    events.push(Event { index: off, kind: EventKind::RAxisCrossing });
    events.extend(fwd.events.iter().map(|e| Event { index: e.index + off, kind: e.kind }));
    events.sort_by_key(|e| e.index);
    let mut contacts: Vec<AxisContact> =
        fwd.contacts.iter().rev().map(|c| AxisContact { index: off - c.index, x_axis: -c.x_axis, defect: -c.defect }).collect();
    contacts.extend(fwd.contacts.iter().map(|c| AxisContact { index: c.index + off, ..*c }));

    Ok(ProfileCurve { config: fwd.config, samples, curvature, events, contacts, termination: fwd.termination, head: Some(fwd.termination) })
}

fn far_end(seg: &Segment) -> (EndpointKind, f64) {
    if seg.reversed {
        (seg.left_end, seg.samples[0].x)
    } else {
        (seg.right_end, seg.samples.last().expect("segments are non-empty").x)
    }
}

/// Half-entire kind read off the end a segment reaches last in the
/// parametrization.
pub fn terminal_kind(config: &AmbientConfig, seg: &Segment) -> Option<HalfEntireKind> {
    let (end, x) = far_end(seg);
    match end {
        EndpointKind::AxisExit { x } => {
            let (r, _) = seg.signature?;
            let q = Sign::of(x);
            Some(if r < config.sphere_radius { HalfEntireKind::OuterQuarterSphere(q) } else { HalfEntireKind::InnerQuarterSphere(q) })
        }
        EndpointKind::TrumpetEscape { sigma } => Some(HalfEntireKind::Trumpet(Sign::of(x), sigma)),
        _ => None,
    }
}

/// Shoots one member of a family and reports Λ[0..=k_max] with the first
/// terminal condition.
pub fn shoot(config: &AmbientConfig, settings: &IntegratorSettings, family: Family, k_max: usize) -> Result<ShotOutcome> {
    family.validate()?;
    let st = IntegratorSettings { stop_after_vertical_tangents: Some(k_max + 1), ..*settings };
    let fwd = integrate(config, &st, family.init(), Direction::Forward)?;
    let curve = match family {
        Family::FromXAxis(_) => fwd,
        Family::FromRAxis(_) => mirror_r_axis(&fwd)?,
    };
    let segments: Vec<Segment> = decompose(&curve)?.into_iter().filter(|s| s.index >= 0 && s.index <= k_max as i64).collect();
    let mut terminal = Terminal::Exhausted;
    for seg in &segments {
        let closed_on_axis = matches!(family, Family::FromXAxis(_))
            && seg.index == 0
            && matches!(seg.left_end, EndpointKind::AxisExit { .. })
            && matches!(seg.right_end, EndpointKind::AxisExit { .. });
        if closed_on_axis {
            terminal = Terminal::ClosedPerpendicular { index: 0 };
            break;
        }
        if let Some(kind) = terminal_kind(config, seg) {
            terminal = Terminal::HalfEntire { kind, index: seg.index };
            break;
        }
        let trivial = matches!(family, Family::FromRAxis(_)) && seg.index == 0;
        if let Some((_, a)) = seg.signature {
            if !trivial && a.abs() < settings.perp_tol {
                terminal = Terminal::ClosedPerpendicular { index: seg.index };
                break;
            }
        }
    }
    Ok(ShotOutcome { t: family.t(), segments, terminal, curve })
}

/// Types of Λ[0..=k] and the signature angle of Λ[k], from a reflect-mode shot.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeProbe {
    pub t: f64,
    pub tags: Vec<TypeTag>,
    pub alpha_sig: Option<f64>,
    pub r_sig: Option<f64>,
}

impl TypeProbe {
    pub fn tag(&self) -> TypeTag {
        *self.tags.last().expect("probes carry k + 1 tags")
    }

    fn same_lower(&self, other: &TypeProbe) -> bool {
        let k = self.tags.len() - 1;
        self.tags[..k] == other.tags[..k]
    }
}

/// Returns `None` when Λ[k] is not reached or is cut off before its end.
pub fn probe(config: &AmbientConfig, settings: &IntegratorSettings, family: Family, k: usize) -> Result<Option<TypeProbe>> {
    family.validate()?;
    if let Family::FromRAxis(t) = family {
        if (t - config.cylinder_radius).abs() < CYLINDER_GAP {
            return Ok(None);
        }
    }
    let st = IntegratorSettings { reflect_axis: true, stop_after_vertical_tangents: Some(k + 1), ..*settings };
    let curve = integrate(config, &st, family.init(), Direction::Forward)?;
    let segs = decompose(&curve)?;
    let mut tags = Vec::with_capacity(k + 1);
    for i in 0..=k as i64 {
        match segs.iter().find(|s| s.index == i) {
            Some(s) => tags.push(s.type_tag()),
            None => return Ok(None),
        }
    }
    let last = segs.iter().find(|s| s.index == k as i64).expect("checked above");
    if !far_end(last).0.is_resolved() {
        return Ok(None);
    }
    let crossing = curve.events_of(EventKind::RAxisCrossing).find(|e| last.range.0 <= e.index && e.index <= last.range.1).map(|e| curve.samples[e.index]);
    Ok(Some(TypeProbe { t: family.t(), tags, alpha_sig: crossing.map(|p| p.alpha.tan().atan()), r_sig: crossing.map(|p| p.r) }))
}

fn probe_many(config: &AmbientConfig, settings: &IntegratorSettings, family: Family, k: usize, ts: &[f64]) -> Vec<Option<TypeProbe>> {
    let one = |t: &f64| probe(config, settings, family.at(*t), k).ok().flatten();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ts.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ts.iter().map(one).collect()
    }
}

/// Grid points strictly between `from` and `to`, starting next to `from`.
fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let dir = (to - from).signum();
    let n = ((to - from).abs() / step).ceil() as usize;
    (1..n).map(|j| from + dir * step * j as f64).collect()
}

/// A type change of Λ[k] between two neighbouring grid points with Λ[0..k)
/// unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Flip {
    pub near: TypeProbe,
    pub far: TypeProbe,
}

/// Scans from `from` toward `to` and returns the flips of Λ[k] in scan order.
/// With `first_only` the scan stops at the first one.
#[allow(clippy::too_many_arguments)]
pub fn scan_flips(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
    from: f64,
    to: f64,
    first_only: bool,
) -> Result<Vec<Flip>> {
    search.validate()?;
    let ts = grid(from, to, search.grid_resolution);
    let mut flips = Vec::new();
    let mut prev: Option<TypeProbe> = None;
    for chunk in ts.chunks(64) {
        for p in probe_many(config, settings, family, k, chunk).into_iter().flatten() {
            if let Some(q) = &prev {
                if q.same_lower(&p) && q.tag() != p.tag() {
                    flips.push(Flip { near: q.clone(), far: p.clone() });
                    if first_only {
                        return Ok(flips);
                    }
                }
            }
            prev = Some(p);
        }
    }
    Ok(flips)
}

/// The admissible limit kinds for a family of type `tag`, as letters I, O, T.
pub fn admissible_kinds(tag: TypeTag) -> &'static [char] {
    match (tag.degree, tag.sign) {
        (0, Sign::Plus) => &['T'],
        (0, Sign::Minus) => &['I'],
        (1, Sign::Plus) => &['O', 'T'],
        (1, Sign::Minus) => &['I'],
        (2, Sign::Plus) => &['O'],
        _ => &[],
    }
}

fn letter(kind: &HalfEntireKind) -> char {
    match kind {
        HalfEntireKind::InnerQuarterSphere(_) => 'I',
        HalfEntireKind::OuterQuarterSphere(_) => 'O',
        HalfEntireKind::Trumpet(..) => 'T',
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub t: f64,
    /// Final bracket, ordered as (start side, far side).
    pub bracket: (f64, f64),
    pub tags: (TypeTag, TypeTag),
    pub kind: Option<HalfEntireKind>,
    /// Whether the kind is allowed by the boundary table for the bracketing types.
    pub admissible: bool,
}

/// Bisects a type change of Λ[k] between `t_a` and `t_b`, keeping the
/// change nearest to `t_a` when the midpoint shows a third type.
pub fn bracket_bisect(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
    t_a: f64,
    t_b: f64,
) -> Result<Boundary> {
    search.validate()?;
    let get = |t: f64| probe(config, settings, family.at(t), k)?.ok_or(Error::Depth { depth: k as i64, t });
    let (mut a, mut b) = (get(t_a)?, get(t_b)?);
    if a.tag() == b.tag() {
        return Err(Error::Bracket(format!("Λ[{k}] has type {} at both {t_a} and {t_b}", a.tag())));
    }
    while (b.t - a.t).abs() > search.t_tol {
        let mid = get(0.5 * (a.t + b.t))?;
        if mid.tag() == a.tag() && mid.same_lower(&a) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let t = 0.5 * (a.t + b.t);
    let kind = limit_kind(config, settings, search, family, k, &[a.t, b.t, t]);
    let allowed: Vec<char> = admissible_kinds(a.tag()).iter().chain(admissible_kinds(b.tag())).copied().collect();
    let admissible = kind.as_ref().is_some_and(|kd| allowed.contains(&letter(kd)));
    Ok(Boundary { t, bracket: (a.t, b.t), tags: (a.tag(), b.tag()), kind, admissible })
}

fn output_settings(settings: &IntegratorSettings, search: &SearchSettings, k: usize) -> IntegratorSettings {
    IntegratorSettings {
        reflect_axis: false,
        x_escape: settings.x_escape.min(search.trumpet_escape),
        stop_after_vertical_tangents: Some(k + 1),
        stop_after_r_axis_crossings: None,
        ..*settings
    }
}

// Geometric classification of Λ[k] at the bisection limit from plain shots
// at the given parameters; the first classifiable one wins.
fn limit_kind(config: &AmbientConfig, settings: &IntegratorSettings, search: &SearchSettings, family: Family, k: usize, ts: &[f64]) -> Option<HalfEntireKind> {
    let st = output_settings(settings, search, k);
    ts.iter().find_map(|&t| {
        let out = shoot(config, &st, family.at(t), k).ok()?;
        let seg = out.segments.iter().find(|s| s.index == k as i64)?;
        terminal_kind(config, seg)
    })
}

/// Bisects a sign change of the signature angle of Λ[k] between `t_a` and `t_b`.
pub fn perpendicular_bisect(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
    t_a: f64,
    t_b: f64,
) -> Result<f64> {
    search.validate()?;
    let sig = |t: f64| -> Result<f64> {
        probe(config, settings, family.at(t), k)?.ok_or(Error::Depth { depth: k as i64, t })?.alpha_sig.ok_or(Error::MissingSignature(k as i64))
    };
    let (mut a, mut b) = (t_a, t_b);
    let sa = sig(a)?;
    if sa * sig(b)? > 0.0 {
        return Err(Error::Bracket(format!("signature angle of Λ[{k}] has one sign on [{t_a}, {t_b}]")));
    }
    while (b - a).abs() > search.t_tol {
        let m = 0.5 * (a + b);
        if sig(m)? * sa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// First grid interval from `from` toward `to` on which the signature angle
/// of Λ[k] changes sign.
pub fn scan_perpendicular(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
    from: f64,
    to: f64,
) -> Result<(f64, f64)> {
    let ts = grid(from, to, search.grid_resolution);
    let mut prev: Option<(f64, f64)> = None;
    for chunk in ts.chunks(64) {
        for p in probe_many(config, settings, family, k, chunk).into_iter().flatten() {
            let Some(a) = p.alpha_sig else { continue };
            if let Some((tp, ap)) = prev {
                if ap * a <= 0.0 {
                    return Ok((tp, p.t));
                }
            }
            prev = Some((p.t, a));
        }
    }
    Err(Error::Bracket(format!("no perpendicular crossing of Λ[{k}] between {from} and {to}")))
}

/// Result of a full-loop integration of Γ[0,t,0].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    pub curve: ProfileCurve,
    /// `|x| + |Δr| + |Δα mod 2π|` between the last and first samples.
    pub defect: f64,
    /// Net tangent rotation divided by 2π.
    pub turning: f64,
}

/// Integrates Γ[0,t,0] through `2m` r-axis crossings, which closes the curve
/// when the m-th crossing is perpendicular.
pub fn closed_loop(config: &AmbientConfig, settings: &IntegratorSettings, t: f64, m: usize) -> Result<ClosedLoop> {
    let st = IntegratorSettings { reflect_axis: false, stop_after_vertical_tangents: None, stop_after_r_axis_crossings: Some(2 * m), ..*settings };
    let curve = integrate(config, &st, Family::FromRAxis(t).init(), Direction::Forward)?;
    if curve.termination != Termination::StopRule {
        return Err(Error::Verify(format!("loop from r = {t} ended with {:?}", curve.termination)));
    }
    let (p0, p1) = (curve.first(), curve.last());
    let da = p1.alpha - p0.alpha;
    let wrapped = da - 2.0 * PI * (da / (2.0 * PI)).round();
    let defect = p1.x.abs() + (p1.r - p0.r).abs() + wrapped.abs();
    Ok(ClosedLoop { turning: da / (2.0 * PI), defect, curve })
}

/// Angenent's torus: bisection on the quadrant of the maximum of Λ[1](Γ_t).
pub fn find_angenent_torus(config: &AmbientConfig, settings: &IntegratorSettings) -> Result<(f64, ClosedLoop)> {
    let search = SearchSettings::default();
    let hi = config.cylinder_radius - 1e-3;
    let lo = config.m1;
    let r_ang = perpendicular_bisect(config, settings, &search, Family::FromRAxis(lo), 1, lo, hi)?;
    let lp = closed_loop(config, settings, r_ang, 1)?;
    Ok((r_ang, lp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Near {
    Plane,
    Cylinder,
    AngenentTorus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Sphere,
    PlaneTop,
    CylinderTop,
    Torus,
}

impl Near {
    pub fn expected_topology(&self, k: usize) -> Topology {
        let even = k.is_multiple_of(2);
        match self {
            Near::Plane if even => Topology::Sphere,
            Near::Plane => Topology::PlaneTop,
            Near::Cylinder if even => Topology::Torus,
            Near::Cylinder => Topology::Sphere,
            Near::AngenentTorus if even => Topology::CylinderTop,
            Near::AngenentTorus => Topology::Sphere,
        }
    }

    pub fn expected_segments(&self, k: usize) -> usize {
        match self {
            Near::Plane => k + 1,
            Near::Cylinder => k + 2,
            Near::AngenentTorus => 2 * k + 1,
        }
    }

    /// +1 when t_k increases with k.
    pub fn direction(&self) -> f64 {
        match self {
            Near::Cylinder => 1.0,
            Near::Plane | Near::AngenentTorus => -1.0,
        }
    }

    pub fn family(&self, t: f64) -> Family {
        match self {
            Near::Plane => Family::FromXAxis(t),
            Near::Cylinder | Near::AngenentTorus => Family::FromRAxis(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyEntry {
    pub k: usize,
    pub t: f64,
    pub curve: ProfileCurve,
    pub topology: Topology,
    pub terminal: Option<HalfEntireKind>,
    pub segment_count: usize,
    /// Bisection bracket and types on its two sides, when t_k came from one.
    pub boundary: Option<Boundary>,
    /// Closure defect for torus outputs.
    pub closure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkerFamily {
    pub near: Near,
    pub entries: Vec<FamilyEntry>,
    pub r_ang: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl ShrinkerFamily {
    pub fn monotone(&self) -> bool {
        let d = self.near.direction();
        self.entries.windows(2).all(|w| (w[1].t - w[0].t) * d > 0.0)
    }

    pub fn segment_counts_ok(&self) -> bool {
        self.entries.iter().all(|e| e.segment_count == self.near.expected_segments(e.k))
    }

    pub fn topology_ok(&self) -> bool {
        self.entries.iter().all(|e| e.topology == self.near.expected_topology(e.k))
    }
}

/// Plain output curve of a family member whose Λ[k] is half-entire; Γ
/// curves are completed by their mirror image.
pub fn half_entire_curve(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
) -> Result<(ProfileCurve, Option<HalfEntireKind>, usize)> {
    let st = output_settings(settings, search, k);
    let out = shoot(config, &st, family, k)?;
    let kind = match out.terminal {
        Terminal::HalfEntire { kind, .. } => Some(kind),
        _ => None,
    };
    let count = decompose(&out.curve)?.len();
    Ok((out.curve, kind, count))
}

fn count_loop_segments(lp: &ClosedLoop) -> usize {
    // a closed curve has as many graphical pieces as vertical tangents
    lp.curve.events_of(EventKind::VerticalTangent).count()
}

fn topology_of(near: Near, kind: Option<&HalfEntireKind>) -> Topology {
    match (near, kind) {
        (Near::Plane, Some(HalfEntireKind::Trumpet(..))) => Topology::PlaneTop,
        (_, Some(HalfEntireKind::Trumpet(..))) => Topology::CylinderTop,
        (Near::Cylinder, None) => Topology::Torus,
        _ => Topology::Sphere,
    }
}

fn entry_from_boundary(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    near: Near,
    k: usize,
    seg: usize,
    b: Boundary,
) -> Result<FamilyEntry> {
    let (curve, kind, segment_count) = half_entire_curve(config, settings, search, near.family(b.t), seg)?;
    let kind = kind.or(b.kind);
    Ok(FamilyEntry { k, t: b.t, curve, topology: topology_of(near, kind.as_ref()), terminal: kind, segment_count, boundary: Some(b), closure: None })
}

/// Λ[k] first becomes half-entire scanning from `from` toward `to`.
fn first_half_entire(
    config: &AmbientConfig,
    settings: &IntegratorSettings,
    search: &SearchSettings,
    family: Family,
    k: usize,
    from: f64,
    to: f64,
) -> Result<Boundary> {
    let flips = scan_flips(config, settings, search, family, k, from, to, true)?;
    let f = flips.first().ok_or_else(|| Error::Bracket(format!("no type change of Λ[{k}] between {from} and {to}")))?;
    bracket_bisect(config, settings, search, family, k, f.near.t, f.far.t)
}

/// Runs the inductive construction of the requested theorem family.
pub fn build_family(config: &AmbientConfig, settings: &IntegratorSettings, search: &SearchSettings, near: Near, count: usize) -> Result<ShrinkerFamily> {
    if count == 0 {
        return Err(Error::Domain("family count must be at least 1".into()));
    }
    search.validate()?;
    let mut fam = ShrinkerFamily { near, entries: Vec::new(), r_ang: None, diagnostics: Vec::new() };
    let rc = config.cylinder_radius;
    match near {
        Near::Plane => {
            let t0 = config.sphere_radius;
            let (curve, kind, n) = half_entire_curve(config, settings, search, Family::FromXAxis(t0), 0)?;
            fam.entries.push(FamilyEntry { k: 0, t: t0, curve, topology: Topology::Sphere, terminal: kind, segment_count: n, boundary: None, closure: None });
            for k in 1..count {
                let upper = fam.entries.last().expect("t_0 pushed").t;
                let step = first_half_entire(config, settings, search, Family::FromXAxis(upper), k, 0.0, upper)
                    .and_then(|b| entry_from_boundary(config, settings, search, near, k, k, b));
                if !push_step(&mut fam, k, step) {
                    break;
                }
            }
        }
        Near::AngenentTorus => {
            let (r_ang, _) = find_angenent_torus(config, settings)?;
            fam.r_ang = Some(r_ang);
            let cyl = half_entire_curve(config, settings, search, Family::FromRAxis(rc), 0)?;
            fam.entries.push(FamilyEntry {
                k: 0,
                t: rc,
                curve: cyl.0,
                topology: Topology::CylinderTop,
                terminal: None,
                segment_count: cyl.2,
                boundary: None,
                closure: None,
            });
            for k in 1..count {
                let step = first_half_entire(config, settings, search, Family::FromRAxis(rc), k, r_ang, rc)
                    .and_then(|b| entry_from_boundary(config, settings, search, near, k, k, b));
                if !push_step(&mut fam, k, step) {
                    break;
                }
            }
        }
        Near::Cylinder => {
            let (r_ang, lp) = find_angenent_torus(config, settings)?;
            fam.r_ang = Some(r_ang);
            fam.entries.push(FamilyEntry {
                k: 0,
                t: r_ang,
                segment_count: count_loop_segments(&lp),
                closure: Some(lp.defect),
                curve: lp.curve,
                topology: Topology::Torus,
                terminal: None,
                boundary: None,
            });
            // boundaries of Λ[j] found while bounding an even step, reused by the next odd one
            let mut found: Vec<Option<Boundary>> = vec![None; count + 2];
            let mut odd_boundary = |j: usize, lower: f64| -> Result<Boundary> {
                if let Some(b) = found[j].clone() {
                    return Ok(b);
                }
                let b = first_half_entire(config, settings, search, Family::FromRAxis(rc), j, rc, lower)?;
                found[j] = Some(b.clone());
                Ok(b)
            };
            for k in 1..count {
                let prev = fam.entries.last().expect("t_0 pushed").t;
                let step = if k % 2 == 1 {
                    let j = k.div_ceil(2);
                    odd_boundary(j, prev).and_then(|b| entry_from_boundary(config, settings, search, near, k, j, b))
                } else {
                    let j = k / 2 + 1;
                    odd_boundary(j, prev).and_then(|b| {
                        let fam_r = Family::FromRAxis(prev);
                        let (a, c) = scan_perpendicular(config, settings, search, fam_r, j, prev, b.t)?;
                        let t = perpendicular_bisect(config, settings, search, fam_r, j, a, c)?;
                        let m = crossings_through(config, settings, t, j)?;
                        let lp = closed_loop(config, settings, t, m)?;
                        Ok(FamilyEntry {
                            k,
                            t,
                            segment_count: count_loop_segments(&lp),
                            closure: Some(lp.defect),
                            curve: lp.curve,
                            topology: Topology::Torus,
                            terminal: None,
                            boundary: None,
                        })
                    })
                };
                if !push_step(&mut fam, k, step) {
                    break;
                }
            }
        }
    }
    if !fam.monotone() {
        let ts: Vec<String> = fam.entries.iter().map(|e| format!("{:.12}", e.t)).collect();
        fam.diagnostics.push(format!("t_k not monotone in the expected direction: [{}]", ts.join(", ")));
    }
    for e in &fam.entries {
        if e.segment_count != near.expected_segments(e.k) {
            fam.diagnostics.push(format!("k = {}: {} segments, expected {}", e.k, e.segment_count, near.expected_segments(e.k)));
        }
        if e.topology != near.expected_topology(e.k) {
            fam.diagnostics.push(format!("k = {}: topology {:?}, expected {:?}", e.k, e.topology, near.expected_topology(e.k)));
        }
        if let Some(b) = &e.boundary {
            if !b.admissible {
                fam.diagnostics.push(format!("k = {}: limit kind {:?} not admissible for {} / {}", e.k, b.kind, b.tags.0, b.tags.1));
            }
        }
    }
    Ok(fam)
}

fn push_step(fam: &mut ShrinkerFamily, k: usize, step: Result<FamilyEntry>) -> bool {
    match step {
        Ok(e) => {
            fam.entries.push(e);
            true
        }
        Err(err) => {
            fam.diagnostics.push(format!("step k = {k} failed: {err}"));
            false
        }
    }
}

// Number of r-axis crossings of Γ[0,t,0] up to and including the one on Λ[k].
fn crossings_through(config: &AmbientConfig, settings: &IntegratorSettings, t: f64, k: usize) -> Result<usize> {
    let st = IntegratorSettings { reflect_axis: false, stop_after_vertical_tangents: Some(k + 1), ..*settings };
    let curve = integrate(config, &st, Family::FromRAxis(t).init(), Direction::Forward)?;
    let segs = decompose(&curve)?;
    let seg = segs.iter().find(|s| s.index == k as i64).ok_or(Error::Depth { depth: k as i64, t })?;
    Ok(curve.events_of(EventKind::RAxisCrossing).filter(|e| e.index <= seg.range.1).count())
}

/// The immersed sphere of the torus construction: the largest t below the
/// cylinder where Λ[1](Γ_t) is half-entire.
pub fn immersed_sphere(config: &AmbientConfig, settings: &IntegratorSettings, search: &SearchSettings, r_ang: f64) -> Result<FamilyEntry> {
    let rc = config.cylinder_radius;
    let b = first_half_entire(config, settings, search, Family::FromRAxis(rc), 1, rc, r_ang)?;
    entry_from_boundary(config, settings, search, Near::Cylinder, 1, 1, b)
}
