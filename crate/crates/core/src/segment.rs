//! Maximal graphical segments Λ[k], their degree, type and signature.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{EventKind, ProfileCurve, Termination};
use crate::model::{AmbientConfig, GeodesicState};

/// Curvature values below this are treated as zero when counting sign changes.
pub const CURVATURE_DEAD_BAND: f64 = 1e-9;
/// Vertical tangents with curvature below this are flagged ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// The type (k, ±) of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeTag {
    pub degree: u32,
    pub sign: Sign,
}

impl TypeTag {
    pub const fn new(degree: u32, sign: Sign) -> Self {
        Self { degree, sign }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.degree, self.sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EndpointKind {
    VerticalTangent {
        x: f64,
        r: f64,
    },
    AxisExit {
        x: f64,
    },
    TrumpetEscape {
        sigma: f64,
    },
    /// The curve was cut before the segment ended.
    RAxisTruncation,
    /// Straight run along the cylinder line.
    Degenerate,
}

impl EndpointKind {
    pub fn is_resolved(&self) -> bool {
        !matches!(self, EndpointKind::RAxisTruncation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: i64,
    /// Sub-curve in increasing-x orientation.
    pub samples: Vec<GeodesicState>,
    /// Curvature signed as `u''` in increasing-x orientation.
    pub graph_curvature: Vec<f64>,
    /// First and last sample index in the parent curve (parametrization order).
    pub range: (usize, usize),
    /// Whether the parametrization runs toward decreasing x.
    pub reversed: bool,
    pub signature: Option<(f64, f64)>,
    pub r_axis_crossings: usize,
    pub degree: u32,
    pub right_sign: Sign,
    pub left_end: EndpointKind,
    pub right_end: EndpointKind,
    pub ambiguous: bool,
}

impl Segment {
    pub fn type_tag(&self) -> TypeTag {
        TypeTag::new(self.degree, self.right_sign)
    }

    pub fn is_maximal(&self) -> bool {
        self.left_end.is_resolved() && self.right_end.is_resolved()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HalfEntireKind {
    InnerQuarterSphere(Sign),
    OuterQuarterSphere(Sign),
    Trumpet(Sign, f64),
}

impl HalfEntireKind {
    pub fn quadrant(&self) -> Sign {
        match *self {
            HalfEntireKind::InnerQuarterSphere(q) | HalfEntireKind::OuterQuarterSphere(q) | HalfEntireKind::Trumpet(q, _) => q,
        }
    }

    /// Signature inequalities of the first-quadrant representatives, applied
    /// after reflecting second-quadrant graphs across the r-axis.
    pub fn signature_consistent(&self, config: &AmbientConfig, r_sig: f64, alpha_sig: f64) -> bool {
        let a = match self.quadrant() {
            Sign::Plus => alpha_sig,
            Sign::Minus => -alpha_sig,
        };
        match self {
            HalfEntireKind::InnerQuarterSphere(_) => r_sig > config.sphere_radius && a < 0.0,
            HalfEntireKind::OuterQuarterSphere(_) => r_sig < config.sphere_radius && a > 0.0,
            HalfEntireKind::Trumpet(..) => r_sig < config.cylinder_radius && a > 0.0,
        }
    }
}

impl fmt::Display for HalfEntireKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfEntireKind::InnerQuarterSphere(q) => write!(f, "I{q}"),
            HalfEntireKind::OuterQuarterSphere(q) => write!(f, "O{q}"),
            HalfEntireKind::Trumpet(q, s) => write!(f, "T{q}(sigma={s:.6})"),
        }
    }
}

/// Splits a curve at its vertical tangents into graphs over the x-axis.
pub fn decompose(curve: &ProfileCurve) -> Result<Vec<Segment>> {
    let len = curve.samples.len();
    if len < 2 {
        return Err(Error::TooShort(len));
    }
    let mut cuts: Vec<usize> = vec![0];
    cuts.extend(curve.events_of(EventKind::VerticalTangent).map(|e| e.index));
    cuts.push(len - 1);
    cuts.sort_unstable();
    cuts.dedup();
    let pieces: Vec<(usize, usize)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();

    let origin = curve.samples.iter().enumerate().min_by(|a, b| a.1.s.abs().total_cmp(&b.1.s.abs())).map(|(i, _)| i).unwrap_or(0);
    let zero_piece = pieces.iter().position(|&(a, b)| a <= origin && origin < b).unwrap_or(pieces.len() - 1);

    let crossings: Vec<usize> = curve.events_of(EventKind::RAxisCrossing).map(|e| e.index).collect();
    Ok(pieces.iter().enumerate().map(|(p, &(a, b))| build_segment(curve, p as i64 - zero_piece as i64, a, b, &crossings)).collect())
}

fn build_segment(curve: &ProfileCurve, index: i64, a: usize, b: usize, crossings: &[usize]) -> Segment {
    let slice = &curve.samples[a..=b];
    let cos_sum: f64 = slice.iter().map(|p| p.alpha.cos()).sum();
    let reversed = cos_sum < 0.0;
    let dir = if reversed { -1.0 } else { 1.0 };
    let mut samples = slice.to_vec();
    let mut c: Vec<f64> = curve.curvature[a..=b].iter().map(|k| k * dir).collect();
    if reversed {
        samples.reverse();
        c.reverse();
    }

    let interior: Vec<f64> = if c.len() > 2 { c[1..c.len() - 1].to_vec() } else { c.clone() };
    let signs: Vec<f64> = interior.iter().copied().filter(|v| v.abs() > CURVATURE_DEAD_BAND).collect();
    let degree = signs.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as u32;
    let right_sign = Sign::of(*signs.last().unwrap_or(c.last().unwrap_or(&0.0)));

    let start_end = classify_end(curve, a);
    let finish_end = classify_end(curve, b);
    let (left_end, right_end) = if reversed { (finish_end, start_end) } else { (start_end, finish_end) };

    let mut ambiguous = signs.is_empty();
    for idx in [a, b] {
        let is_vt = curve.events.iter().any(|e| e.index == idx && e.kind == EventKind::VerticalTangent);
        if is_vt && curve.samples[idx].r > 0.0 && curve.curvature[idx].abs() < AMBIGUITY_TOL {
            ambiguous = true;
        }
    }

    let inside: Vec<usize> = crossings.iter().copied().filter(|&i| a <= i && i <= b).collect();
    let maximal = left_end.is_resolved() && right_end.is_resolved();
    let signature = if maximal && inside.len() == 1 {
        let p = &curve.samples[inside[0]];
        Some((p.r, (p.alpha.sin() / p.alpha.cos()).atan()))
    } else {
        None
    };

    Segment {
        index,
        samples,
        graph_curvature: c,
        range: (a, b),
        reversed,
        signature,
        r_axis_crossings: inside.len(),
        degree,
        right_sign,
        left_end,
        right_end,
        ambiguous,
    }
}

/// Classifies the segment boundary at sample `idx` of `curve`.
pub fn classify_end(curve: &ProfileCurve, idx: usize) -> EndpointKind {
    let p = &curve.samples[idx];
    let last = curve.samples.len() - 1;
    let is_vt = curve.events.iter().any(|e| e.index == idx && e.kind == EventKind::VerticalTangent);
    if is_vt {
        return EndpointKind::VerticalTangent { x: p.x, r: p.r };
    }
    let exit = |t: Option<Termination>, at_head: bool| match t {
        Some(Termination::AxisHit) => EndpointKind::AxisExit { x: p.x },
        Some(Termination::Escape) => trumpet_end(curve, at_head),
        _ if p.r == 0.0 => EndpointKind::AxisExit { x: p.x },
        _ => EndpointKind::RAxisTruncation,
    };
    if idx == 0 {
        return exit(curve.head, true);
    }
    if idx == last {
        return exit(Some(curve.termination), false);
    }
    EndpointKind::VerticalTangent { x: p.x, r: p.r }
}

// Trumpet test on the run next to an escaping end: convex, monotone slope
// of the escaping sign, and Ψ = x u' - u of constant sign.
fn trumpet_end(curve: &ProfileCurve, at_head: bool) -> EndpointKind {
    let n = curve.samples.len();
    let (end, other) = if at_head {
        let vt = curve.events_of(EventKind::VerticalTangent).next().map_or(n - 1, |e| e.index);
        (0, vt)
    } else {
        let vt = curve.events_of(EventKind::VerticalTangent).last().map_or(0, |e| e.index);
        (n - 1, vt)
    };
    let x_end = curve.samples[end].x;
    let x_other = curve.samples[other].x;
    let e = (x_end - x_other).signum();
    let cut = x_end - 0.2 * (x_end - x_other);
    let (lo, hi) = if at_head { (0, other) } else { (other, n - 1) };
    // ordered toward the escaping end, in the coordinate ξ = e x
    let mut tail: Vec<usize> = (lo..=hi).filter(|&i| (curve.samples[i].x - cut) * e >= 0.0).collect();
    if at_head {
        tail.reverse();
    }
    if tail.len() < 3 {
        return EndpointKind::RAxisTruncation;
    }
    let max_k = tail.iter().map(|&i| curve.curvature[i].abs()).fold(0.0, f64::max);
    if max_k < CURVATURE_DEAD_BAND {
        return EndpointKind::Degenerate;
    }
    let pts: Vec<&GeodesicState> = tail.iter().map(|&i| &curve.samples[i]).collect();
    let slopes: Vec<f64> = pts.iter().map(|p| e * p.alpha.tan()).collect();
    let convex = tail.iter().all(|&i| curve.curvature[i] * curve.samples[i].alpha.cos().signum() > 0.0);
    let monotone = slopes.windows(2).all(|w| w[1] >= w[0]);
    let positive = slopes.iter().all(|&u| u > 0.0 && u.is_finite());
    let psi: Vec<f64> = pts.iter().map(|p| p.x * p.alpha.tan() - p.r).collect();
    let psi_sign = psi.iter().all(|&v| v < 0.0) || psi.iter().all(|&v| v > 0.0);
    if convex && monotone && positive && psi_sign {
        EndpointKind::TrumpetEscape { sigma: *slopes.last().expect("tail non-empty") }
    } else {
        EndpointKind::RAxisTruncation
    }
}

/// `|Δr| + |Δα|` between segment signatures.
pub fn segment_distance(a: &Segment, b: &Segment) -> Result<f64> {
    let (ra, aa) = a.signature.ok_or(Error::MissingSignature(a.index))?;
    let (rb, ab) = b.signature.ok_or(Error::MissingSignature(b.index))?;
    Ok((rb - ra).abs() + (ab - aa).abs())
}

/// Half-entire classification of a segment, if it exits through the axis or infinity.
pub fn half_entire_kind(config: &AmbientConfig, seg: &Segment) -> Option<HalfEntireKind> {
    let quarter = |x: f64| {
        let q = Sign::of(x);
        match seg.signature {
            Some((r, _)) if r < config.sphere_radius => Some(HalfEntireKind::OuterQuarterSphere(q)),
            Some(_) => Some(HalfEntireKind::InnerQuarterSphere(q)),
            None => None,
        }
    };
    match (seg.left_end, seg.right_end) {
        (EndpointKind::AxisExit { x: xl }, EndpointKind::AxisExit { x: xr }) => {
            // whole sphere-like graph: report by the larger-|x| side
            quarter(if xl.abs() > xr.abs() { xl } else { xr })
        }
        (EndpointKind::AxisExit { x }, _) | (_, EndpointKind::AxisExit { x }) => quarter(x),
        (_, EndpointKind::TrumpetEscape { sigma }) => Some(HalfEntireKind::Trumpet(Sign::Plus, sigma)),
        (EndpointKind::TrumpetEscape { sigma }, _) => Some(HalfEntireKind::Trumpet(Sign::Minus, sigma)),
        _ => None,
    }
}

/// Interior extrema of the height along a segment as `(is_max, x, r)`.
pub fn height_extrema(curve: &ProfileCurve, seg: &Segment) -> Vec<(bool, f64, f64)> {
    let (a, b) = seg.range;
    let dir = if seg.reversed { -1.0 } else { 1.0 };
    curve
        .events_of(EventKind::HorizontalTangent)
        .filter(|e| a < e.index && e.index < b)
        .map(|e| {
            let p = &curve.samples[e.index];
            (curve.curvature[e.index] * dir < 0.0, p.x, p.r)
        })
        .collect()
}
