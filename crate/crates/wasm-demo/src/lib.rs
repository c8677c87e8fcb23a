//! Browser bindings: each operation returns a JSON document for `www/app.js`.

use serde::Serialize;
use shrinker_core::export::SegmentRecord;
use shrinker_core::segment::decompose;
use shrinker_core::shooting::{build_family, find_angenent_torus, Near, SearchSettings};
use shrinker_core::verify::gauss_bonnet_closed;
use shrinker_core::{integrate, AmbientConfig, Direction, InitialData, IntegratorSettings, ProfileCurve, Termination};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Reference {
    sphere_radius: f64,
    cylinder_radius: f64,
}

#[derive(Serialize)]
struct Branch {
    termination: Termination,
    points: Vec<[f64; 2]>,
    segments: Vec<SegmentRecord>,
}

#[derive(Serialize)]
struct Traced {
    reference: Reference,
    branches: Vec<Branch>,
}

#[derive(Serialize)]
struct Torus {
    reference: Reference,
    r_ang: f64,
    defect: f64,
    gauss_bonnet: f64,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Member {
    k: usize,
    t: f64,
    topology: String,
    segments: usize,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Family {
    reference: Reference,
    members: Vec<Member>,
    diagnostics: Vec<String>,
}

fn config(n: u32) -> Result<AmbientConfig, String> {
    AmbientConfig::new(n).map_err(|e| e.to_string())
}

fn reference(c: &AmbientConfig) -> Reference {
    Reference { sphere_radius: c.sphere_radius, cylinder_radius: c.cylinder_radius }
}

fn points(curve: &ProfileCurve) -> Vec<[f64; 2]> {
    curve.samples.iter().map(|p| [p.x, p.r]).collect()
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn branch(c: &AmbientConfig, curve: ProfileCurve) -> Result<Branch, String> {
    let segments = decompose(&curve).map_err(|e| e.to_string())?;
    Ok(Branch { termination: curve.termination, points: points(&curve), segments: segments.iter().map(|s| SegmentRecord::new(c, s)).collect() })
}

/// Traces Γ[x0, r0, α0] in both directions, or Q[x0] when `r0` is not positive.
pub fn trace_json(n: u32, x0: f64, r0: f64, alpha0: f64, vertical_tangents: usize) -> Result<String, String> {
    let c = config(n)?;
    let st = IntegratorSettings { stop_after_vertical_tangents: Some(vertical_tangents), x_escape: 12.0, ..Default::default() };
    let run = |init, dir| integrate(&c, &st, init, dir).map_err(|e| e.to_string());
    let curves = if r0 > 0.0 {
        let init = InitialData::Interior { x0, r0, alpha0 };
        vec![run(init, Direction::Forward)?, run(init, Direction::Backward)?]
    } else {
        vec![run(InitialData::AxisStart { x0 }, Direction::Forward)?]
    };
    let branches = curves.into_iter().map(|cv| branch(&c, cv)).collect::<Result<_, _>>()?;
    json(&Traced { reference: reference(&c), branches })
}

pub fn torus_json(n: u32) -> Result<String, String> {
    let c = config(n)?;
    let (r_ang, lp) = find_angenent_torus(&c, &IntegratorSettings::default()).map_err(|e| e.to_string())?;
    let gauss_bonnet = gauss_bonnet_closed(&c, &lp.curve).map_err(|e| e.to_string())?;
    json(&Torus { reference: reference(&c), r_ang, defect: lp.defect, gauss_bonnet, points: points(&lp.curve) })
}

pub fn family_json(n: u32, near: &str, count: usize) -> Result<String, String> {
    let c = config(n)?;
    let near = match near {
        "plane" => Near::Plane,
        "cylinder" => Near::Cylinder,
        "torus" => Near::AngenentTorus,
        other => return Err(format!("unknown family {other:?}")),
    };
    let fam = build_family(&c, &IntegratorSettings::default(), &SearchSettings::default(), near, count).map_err(|e| e.to_string())?;
    json(&Family {
        reference: reference(&c),
        members: fam
            .entries
            .iter()
            .map(|e| Member { k: e.k, t: e.t, topology: format!("{:?}", e.topology), segments: e.segment_count, points: points(&e.curve) })
            .collect(),
        diagnostics: fam.diagnostics,
    })
}

#[wasm_bindgen]
pub fn trace(n: u32, x0: f64, r0: f64, alpha0: f64, vertical_tangents: usize) -> Result<String, JsError> {
    trace_json(n, x0, r0, alpha0, vertical_tangents).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn angenent_torus(n: u32) -> Result<String, JsError> {
    torus_json(n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn family(n: u32, near: &str, count: usize) -> Result<String, JsError> {
    family_json(n, near, count).map_err(|e| JsError::new(&e))
}
