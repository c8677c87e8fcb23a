//! Deterministic text formats: CSV curves, JSON sidecars and manifests, SVG
//! figures and OBJ surfaces of revolution.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{AxisContact, Event, ProfileCurve, Termination};
use crate::model::{AmbientConfig, GeodesicState};
use crate::segment::{decompose, half_entire_kind, EndpointKind, Segment};
use crate::shooting::{Near, ShrinkerFamily, Topology};

pub const CSV_HEADER: &str = "s,x,r,alpha";

/// CSV with 17 significant digits per value, which round-trips every f64.
pub fn curve_to_csv(samples: &[GeodesicState]) -> String {
    let mut out = String::with_capacity(samples.len() * 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in samples {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", p.s, p.x, p.r, p.alpha);
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<Vec<GeodesicState>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("expected header '{CSV_HEADER}', found {other:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
        if vals.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 columns, found {}", i + 2, vals.len())));
        }
        out.push(GeodesicState::new(vals[0], vals[1], vals[2], vals[3]));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub index: i64,
    pub range: (usize, usize),
    pub degree: u32,
    /// `(k,±)` notation.
    pub type_tag: String,
    pub signature: Option<(f64, f64)>,
    pub left_end: EndpointKind,
    pub right_end: EndpointKind,
    pub half_entire: Option<String>,
    pub ambiguous: bool,
}

impl SegmentRecord {
    pub fn new(config: &AmbientConfig, seg: &Segment) -> Self {
        Self {
            index: seg.index,
            range: seg.range,
            degree: seg.degree,
            type_tag: seg.type_tag().to_string(),
            signature: seg.signature,
            left_end: seg.left_end,
            right_end: seg.right_end,
            half_entire: half_entire_kind(config, seg).map(|k| k.to_string()),
            ambiguous: seg.ambiguous,
        }
    }
}

/// JSON companion of a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSidecar {
    pub n: u32,
    pub samples: usize,
    pub termination: Termination,
    pub head: Option<Termination>,
    pub events: Vec<Event>,
    pub contacts: Vec<AxisContact>,
    pub segments: Vec<SegmentRecord>,
}

impl CurveSidecar {
    pub fn new(curve: &ProfileCurve) -> Result<Self> {
        let segments = decompose(curve)?.iter().map(|s| SegmentRecord::new(&curve.config, s)).collect();
        Ok(Self {
            n: curve.config.n,
            samples: curve.samples.len(),
            termination: curve.termination,
            head: curve.head,
            events: curve.events.clone(),
            contacts: curve.contacts.clone(),
            segments,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub k: usize,
    pub t_k: f64,
    pub topology: Topology,
    pub segment_count: usize,
    pub terminal: Option<String>,
    /// Bisection bracket and the types on its two sides.
    pub bracket: Option<(f64, f64)>,
    pub tags: Option<(String, String)>,
    pub closure: Option<f64>,
    pub curve_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub n: u32,
    pub near: Near,
    pub requested: usize,
    pub r_ang: Option<f64>,
    pub entries: Vec<ManifestEntry>,
    pub diagnostics: Vec<String>,
}

impl FamilyManifest {
    /// `curve_file(k)` names the CSV written for entry k.
    pub fn new(config: &AmbientConfig, family: &ShrinkerFamily, requested: usize, curve_file: impl Fn(usize) -> String) -> Self {
        let entries = family
            .entries
            .iter()
            .map(|e| ManifestEntry {
                k: e.k,
                t_k: e.t,
                topology: e.topology,
                segment_count: e.segment_count,
                terminal: e.terminal.map(|k| k.to_string()),
                bracket: e.boundary.as_ref().map(|b| b.bracket),
                tags: e.boundary.as_ref().map(|b| (b.tags.0.to_string(), b.tags.1.to_string())),
                closure: e.closure,
                curve_file: curve_file(e.k),
            })
            .collect();
        Self { n: config.n, near: family.near, requested, r_ang: family.r_ang, entries, diagnostics: family.diagnostics.clone() }
    }

    pub fn complete(&self) -> bool {
        self.entries.len() == self.requested
    }
}

// SVG

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvgStyle {
    pub width: u32,
    pub height: u32,
    /// Half-width of the x-range; `None` fits the curve.
    pub x_extent: Option<f64>,
    /// Top of the r-range; `None` fits the curve.
    pub r_extent: Option<f64>,
    pub curve_stroke: f64,
    pub axis_stroke: f64,
    pub reference_stroke: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 800, height: 420, x_extent: None, r_extent: None, curve_stroke: 2.0, axis_stroke: 1.0, reference_stroke: 1.0 }
    }
}

/// Upper half-plane figure with axes, the dashed sphere and cylinder and
/// the curve.
pub fn render_svg(config: &AmbientConfig, samples: &[GeodesicState], style: &SvgStyle) -> String {
    let rs = config.sphere_radius;
    let fit_x = samples.iter().fold(rs, |m, p| m.max(p.x.abs())) * 1.1;
    let fit_r = samples.iter().fold(rs, |m, p| m.max(p.r)) * 1.1;
    let xe = style.x_extent.unwrap_or(fit_x);
    let re = style.r_extent.unwrap_or(fit_r);
    let (w, h) = (f64::from(style.width), f64::from(style.height));
    let margin = 10.0;
    let scale = ((w - 2.0 * margin) / (2.0 * xe)).min((h - 2.0 * margin) / re);
    let cx = w / 2.0;
    let base = h - margin;
    let px = |x: f64| cx + scale * x;
    let py = |r: f64| base - scale * r;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, style.width, style.height);
    let _ = writeln!(
        s,
        r##"<g stroke="#444" stroke-width="{:.2}"><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/></g>"##,
        style.axis_stroke,
        px(-xe),
        py(0.0),
        px(xe),
        py(0.0),
        px(0.0),
        py(0.0),
        px(0.0),
        py(re)
    );
    let rc = config.cylinder_radius;
    let _ = writeln!(
        s,
        r##"<g fill="none" stroke="#888" stroke-width="{:.2}" stroke-dasharray="6 4"><path d="M {:.3} {:.3} A {:.3} {:.3} 0 0 1 {:.3} {:.3}"/><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/></g>"##,
        style.reference_stroke,
        px(-rs),
        py(0.0),
        scale * rs,
        scale * rs,
        px(rs),
        py(0.0),
        px(-xe),
        py(rc),
        px(xe),
        py(rc)
    );
    let mut pts = String::with_capacity(samples.len() * 20);
    for (i, p) in samples.iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.3},{:.3}", px(p.x), py(p.r));
    }
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#c03" stroke-width="{:.2}" stroke-linejoin="round" points="{}"/>"##, style.curve_stroke, pts);
    s.push_str("</svg>\n");
    s
}

// OBJ

/// Heights below this are merged into a single axis vertex.
pub const AXIS_MERGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// One-based triangle indices.
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::with_capacity(self.vertices.len() * 60 + self.faces.len() * 24);
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0], f[1], f[2]);
        }
        s
    }
}

enum Ring {
    Axis(usize),
    Full(usize),
}

/// Surface of revolution about the x-axis with `m` azimuthal samples. Only
/// n = 2 profiles embed in R³. Closed profiles are joined periodically.
pub fn surface_of_revolution(config: &AmbientConfig, samples: &[GeodesicState], m: usize) -> Result<Mesh> {
    if config.n != 2 {
        return Err(Error::Domain(format!("surfaces of revolution need n = 2, got n = {}", config.n)));
    }
    if m < 3 {
        return Err(Error::Domain(format!("need at least 3 azimuthal samples, got {m}")));
    }
    if samples.len() < 2 {
        return Err(Error::TooShort(samples.len()));
    }
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    let closed = first.r > AXIS_MERGE && (first.x - last.x).hypot(first.r - last.r) < 1e-6;
    let profile = if closed { &samples[..samples.len() - 1] } else { samples };

    let mut vertices = Vec::new();
    let mut rings = Vec::with_capacity(profile.len());
    for p in profile {
        if p.r < AXIS_MERGE {
            rings.push(Ring::Axis(vertices.len() + 1));
            vertices.push([p.x, 0.0, 0.0]);
        } else {
            rings.push(Ring::Full(vertices.len() + 1));
            for j in 0..m {
                let th = TAU * j as f64 / m as f64;
                vertices.push([p.x, p.r * th.cos(), p.r * th.sin()]);
            }
        }
    }
    let mut faces = Vec::new();
    let pairs = if closed { rings.len() } else { rings.len() - 1 };
    for i in 0..pairs {
        let (a, b) = (&rings[i], &rings[(i + 1) % rings.len()]);
        for j in 0..m {
            let jn = (j + 1) % m;
            match (a, b) {
                (Ring::Full(p), Ring::Full(q)) => {
                    faces.push([p + j, q + j, q + jn]);
                    faces.push([p + j, q + jn, p + jn]);
                }
                (Ring::Axis(p), Ring::Full(q)) => faces.push([*p, q + j, q + jn]),
                (Ring::Full(p), Ring::Axis(q)) => faces.push([p + j, *q, p + jn]),
                (Ring::Axis(_), Ring::Axis(_)) => {}
            }
        }
    }
    Ok(Mesh { vertices, faces })
}

/// Profile sampled every `spacing` in arclength, keeping the endpoints.
pub fn thin_profile(samples: &[GeodesicState], spacing: f64) -> Vec<GeodesicState> {
    let mut out: Vec<GeodesicState> = Vec::new();
    for (i, p) in samples.iter().enumerate() {
        let keep = i == 0 || i + 1 == samples.len() || out.last().is_none_or(|q| (p.s - q.s).abs() >= spacing);
        if keep {
            out.push(*p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, Direction, IntegratorSettings};
    use crate::model::InitialData;
    use crate::shooting::closed_loop;

    fn sphere(n: u32) -> ProfileCurve {
        let c = AmbientConfig::new(n).unwrap();
        integrate(&c, &IntegratorSettings::default(), InitialData::AxisStart { x0: c.sphere_radius }, Direction::Forward).unwrap()
    }

    #[test]
    fn csv_round_trips_bits() {
        let curve = sphere(2);
        let text = curve_to_csv(&curve.samples);
        assert!(text.starts_with("s,x,r,alpha\n"));
        let back = curve_from_csv(&text).unwrap();
        assert_eq!(back.len(), curve.samples.len());
        for (a, b) in back.iter().zip(&curve.samples) {
            assert_eq!(a.s.to_bits(), b.s.to_bits());
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.r.to_bits(), b.r.to_bits());
            assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
        }
        let last = back.last().unwrap();
        assert!(last.r < 1e-8 && (last.x + 2.0).abs() < 1e-6);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(curve_from_csv("a,b\n1,2\n").is_err());
        assert!(curve_from_csv("s,x,r,alpha\n1,2,3\n").is_err());
        assert!(curve_from_csv("s,x,r,alpha\n1,2,3,zz\n").is_err());
        assert_eq!(curve_from_csv("s,x,r,alpha\n").unwrap().len(), 0);
    }

    #[test]
    fn sidecar_lists_segments() {
        let curve = sphere(2);
        let side = CurveSidecar::new(&curve).unwrap();
        assert_eq!(side.segments.len(), 1);
        assert_eq!(side.segments[0].type_tag, "(0,-)");
        let json = serde_json::to_string(&side).unwrap();
        let back: CurveSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, side);
    }

    #[test]
    fn svg_is_deterministic_and_survives_csv() {
        let curve = sphere(2);
        let style = SvgStyle::default();
        let a = render_svg(&curve.config, &curve.samples, &style);
        let b = render_svg(&curve.config, &curve_from_csv(&curve_to_csv(&curve.samples)).unwrap(), &style);
        assert_eq!(a, b);
        assert!(a.contains("stroke-dasharray") && a.contains("<polyline"));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn sphere_mesh_is_a_sphere() {
        let curve = sphere(2);
        let mesh = surface_of_revolution(&curve.config, &thin_profile(&curve.samples, 0.05), 24).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
        let axis: Vec<_> = mesh.vertices.iter().filter(|v| v[1] == 0.0 && v[2] == 0.0).collect();
        assert_eq!(axis.len(), 2);
    }

    #[test]
    fn torus_mesh_is_a_torus() {
        let c = AmbientConfig::new(2).unwrap();
        let lp = closed_loop(&c, &IntegratorSettings::default(), 0.43712396709580714, 1).unwrap();
        let mesh = surface_of_revolution(&c, &lp.curve.samples, 16).unwrap();
        assert_eq!(mesh.euler_characteristic(), 0);
    }

    #[test]
    fn obj_needs_n_two() {
        let curve = sphere(3);
        assert!(surface_of_revolution(&curve.config, &curve.samples, 16).is_err());
        let c2 = AmbientConfig::new(2).unwrap();
        assert!(surface_of_revolution(&c2, &curve.samples, 2).is_err());
    }

    #[test]
    fn obj_text_indices_are_one_based() {
        let curve = sphere(2);
        let mesh = surface_of_revolution(&curve.config, &thin_profile(&curve.samples, 0.5), 8).unwrap();
        let text = mesh.to_obj();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), mesh.vertices.len());
        let max = mesh.faces.iter().flatten().max().unwrap();
        assert_eq!(*max, mesh.vertices.len());
        assert!(mesh.faces.iter().flatten().all(|&i| i >= 1));
    }
}
