use std::f64::consts::PI;

use polycap::capacity::{capacity_dual, capacity_primal_check, equilibrium, product_capacity};
use polycap::setspec::{arc_line, SetFile};
use polycap::{GridSet, TorusGrid};

fn arc(m: usize, start: f64, end: f64) -> GridSet {
    GridSet::from_mask(TorusGrid::new(1, m).unwrap(), arc_line(m, start, end)).unwrap()
}

#[test]
fn arc_capacity_stable_under_refinement() {
    let coarse = capacity_dual(&arc(256, 0.0, 1.5), 1e-4, 100_000).unwrap();
    let fine = capacity_dual(&arc(512, 0.0, 1.5), 1e-4, 100_000).unwrap();
    assert!((coarse - fine).abs() <= 0.05 * fine, "{coarse} vs {fine}");
}

#[test]
fn arcs_grow_with_length() {
    let caps: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 6.0]
        .iter()
        .map(|&l| capacity_dual(&arc(256, 0.0, l), 1e-3, 50_000).unwrap())
        .collect();
    assert!(caps.windows(2).all(|w| w[0] < w[1]), "{caps:?}");
    assert!(caps[4] < 1.0 / 9.0 + 1e-6);
}

#[test]
fn three_factor_product_law() {
    let m = 32;
    let factors = [arc(m, 0.0, 2.0), arc(m, 1.0, 4.0), arc(m, 0.0, 6.0)];
    let rep = product_capacity(&factors, 1e-4, 100_000).unwrap();
    assert!(rep.relative_gap.unwrap() <= 0.05, "{rep:?}");
}

#[test]
fn primal_check_on_union_and_cylinder() {
    let union = arc(256, 0.0, 1.0).union(&arc(256, 2.0, 2.5)).unwrap();
    let r = equilibrium(&union, 1e-3, 50_000).unwrap();
    let p = capacity_primal_check(&union, &r, 1e-3).unwrap();
    assert!((0.95..=1.05).contains(&p.ratio) && p.violation_fraction <= 0.02, "{p:?}");

    let cyl = SetFile::parse(r#"{"n":2,"m":64,"set":{"type":"arc","dim":0,"start":0,"end":3}}"#)
        .unwrap()
        .build()
        .unwrap();
    let r = equilibrium(&cyl, 1e-3, 50_000).unwrap();
    let p = capacity_primal_check(&cyl, &r, 1e-3).unwrap();
    assert!((0.95..=1.05).contains(&p.ratio) && p.violation_fraction <= 0.02, "{p:?}");
    // a cylinder over an arc is the product of the arc with the full circle
    let direct = capacity_dual(&arc(64, 0.0, 3.0), 1e-3, 50_000).unwrap();
    assert!((r.capacity - direct / 9.0).abs() <= 0.05 * r.capacity);
}

#[test]
fn cantor_sets_shrink_with_level() {
    let caps: Vec<f64> = (1..=4)
        .map(|levels| {
            let ratios = vec!["0.3"; levels].join(",");
            let text = format!(r#"{{"n":1,"m":1024,"set":{{"type":"cantor","dim":0,"levels":{levels},"ratios":[{ratios}]}}}}"#);
            capacity_dual(&SetFile::parse(&text).unwrap().build().unwrap(), 1e-3, 50_000).unwrap()
        })
        .collect();
    assert!(caps.windows(2).all(|w| w[1] < w[0]), "{caps:?}");
}

#[test]
fn half_circle_below_full() {
    let half = capacity_dual(&arc(512, 0.0, PI), 1e-3, 50_000).unwrap();
    assert!(half > 0.0 && half < 1.0 / 9.0);
}
