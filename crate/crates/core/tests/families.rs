use shrinker_core::shooting::{build_family, immersed_sphere, Near, SearchSettings, ShrinkerFamily, Topology};
use shrinker_core::{AmbientConfig, GeodesicState, IntegratorSettings};

fn cfg() -> AmbientConfig {
    AmbientConfig::new(3).unwrap()
}

fn family(near: Near, count: usize) -> ShrinkerFamily {
    build_family(&cfg(), &IntegratorSettings::default(), &SearchSettings::default(), near, count).unwrap()
}

fn on_axis_perpendicular(p: &GeodesicState) -> bool {
    p.r < 1e-12 && p.alpha.cos().abs() < 1e-6
}

fn check_outputs(fam: &ShrinkerFamily) {
    for e in &fam.entries {
        let (first, last) = (e.curve.first(), e.curve.last());
        match e.topology {
            Topology::Sphere => assert!(on_axis_perpendicular(first) && on_axis_perpendicular(last), "k = {}", e.k),
            Topology::Torus => {
                assert!(e.closure.unwrap() < 1e-6);
                assert!(e.curve.samples.iter().all(|p| p.r > 0.0));
            }
            Topology::PlaneTop => assert!(on_axis_perpendicular(first) ^ on_axis_perpendicular(last), "k = {}", e.k),
            Topology::CylinderTop => assert!(e.curve.samples.iter().all(|p| p.r > 0.0)),
        }
    }
}

fn ts(fam: &ShrinkerFamily) -> Vec<f64> {
    fam.entries.iter().map(|e| e.t).collect()
}

#[test]
fn plane_family_n3() {
    let fam = family(Near::Plane, 4);
    assert_eq!(fam.entries.len(), 4);
    assert!(fam.monotone() && fam.segment_counts_ok() && fam.topology_ok(), "{:?}", fam.diagnostics);
    assert!(fam.entries.iter().filter_map(|e| e.boundary.as_ref()).all(|b| b.admissible));
    for (t, want) in ts(&fam).iter().zip([2.449_489_742_783_178, 0.998_770_002_061, 0.426_781_821_244, 0.004_109_593_917]) {
        assert!((t - want).abs() < 1e-9, "{t} vs {want}");
    }
    check_outputs(&fam);
}

#[test]
fn cylinder_family_n3() {
    let fam = family(Near::Cylinder, 3);
    assert_eq!(fam.entries.len(), 3);
    assert!(fam.monotone() && fam.segment_counts_ok() && fam.topology_ok(), "{:?}", fam.diagnostics);
    assert_eq!(fam.r_ang, Some(fam.entries[0].t));
    for (t, want) in ts(&fam).iter().zip([0.922_366_569_948_657_2, 1.394_838_517_090, 1.552_716_599_914]) {
        assert!((t - want).abs() < 1e-9, "{t} vs {want}");
    }
    check_outputs(&fam);
}

// The torus family only checks what its outputs are; the ordering and
// topology of its members are part of the acceptance target.
#[test]
fn torus_family_outputs_n3() {
    let fam = family(Near::AngenentTorus, 4);
    assert_eq!(fam.entries.len(), 4);
    assert!(fam.segment_counts_ok(), "{:?}", fam.diagnostics);
    let rc = cfg().cylinder_radius;
    assert_eq!(fam.entries[0].t, rc);
    assert!(fam.entries[1..].iter().all(|e| e.t > fam.r_ang.unwrap() && e.t < rc));
    check_outputs(&fam);
}

#[test]
fn first_sphere_agrees_across_constructions() {
    let c = cfg();
    let st = IntegratorSettings::default();
    let search = SearchSettings::default();
    let cyl = family(Near::Cylinder, 2);
    let tor = family(Near::AngenentTorus, 2);
    let imm = immersed_sphere(&c, &st, &search, cyl.r_ang.unwrap()).unwrap();
    for t in [tor.entries[1].t, imm.t] {
        assert!((cyl.entries[1].t - t).abs() <= 10.0 * search.t_tol, "{} vs {t}", cyl.entries[1].t);
    }
    assert_eq!(imm.segment_count, 3);
    assert_eq!(imm.topology, Topology::Sphere);
}
