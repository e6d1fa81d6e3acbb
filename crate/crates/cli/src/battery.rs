//! The full per-group check battery behind `catalog run-all`: character
//! counts against flat-section dimensions for every catalog gerbe, full
//! faithfulness across the catalog, the extraction class split, fusion double
//! spot checks, circle crossings, and the spherical-structure count of the
//! group ring.

use std::sync::Arc;
use std::time::Instant;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use gerbecat_core::bundle::{
    flat_section_dim, irreducible_bundles, section_inner, twisted_character,
    DEFAULT_ALGEBRA_BOUND,
};
use gerbecat_core::catalog::CatalogEntry;
use gerbecat_core::cochain::{cohomologous, klein_pairing_cocycle, transgress, Cochain};
use gerbecat_core::double::{
    center_check, hexagon_residuals, simples, total_dim, yang_baxter_residual, MAX_CENTER_GROUP,
    MAX_DOUBLE_GROUP,
};
use gerbecat_core::geochar::{validate_gbundle, verify_fully_faithful};
use gerbecat_core::grp::{build_group, FiniteGroup, GroupSpec};
use gerbecat_core::gspace::{build_gset, loop_groupoid, GSetSpec};
use gerbecat_core::pivotal::{group_ring, grouplike_counts, solve_twisted, PivotalSymbols};
use gerbecat_core::tqft::{torus_fields, torus_partition, verify_crossing, MAX_TRIPLE_GROUP};

use crate::report::{json_f64, rat_value, Report};

fn timed(timings: bool, f: impl FnOnce() -> Report) -> Report {
    let start = Instant::now();
    let mut r = f();
    if timings {
        r.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    r
}

fn is_klein(group: &FiniteGroup) -> bool {
    let klein = build_group(&GroupSpec::Product(
        Box::new(GroupSpec::Cyclic(2)),
        Box::new(GroupSpec::Cyclic(2)),
    ))
    .expect("builtin");
    group.mult == klein.mult
}

/// Character count vs flat-section dimension, with the Gram matrix of the
/// irreducible characters; falls back to the three-way flat dimension alone
/// when the twisted algebra would be too large.
fn characters_check(entry: &CatalogEntry, seed: u64, tol: f64) -> Report {
    let name = format!("characters {}", entry.name);
    let gerbe = &entry.gerbe;
    let lam = match loop_groupoid(&gerbe.gset, 1) {
        Ok(l) => l,
        Err(e) => return Report::new(name).error(e.to_string()),
    };
    let tau = match transgress(&gerbe.cocycle, &lam) {
        Ok(t) => t,
        Err(e) => return Report::new(name).error(e.to_string()),
    };
    let dim = match flat_section_dim(&lam, &tau) {
        Ok(d) => d,
        Err(e) => return Report::new(name).error(e.to_string()),
    };
    if gerbe.size() * gerbe.group().order > DEFAULT_ALGEBRA_BOUND {
        return Report::new(format!("flat-dim {}", entry.name))
            .lhs(json!(dim))
            .residual(0.0);
    }
    let list = match irreducible_bundles(gerbe, seed, tol) {
        Ok(l) => l,
        Err(e) => return Report::new(name).error(e.to_string()),
    };
    let chars: Result<Vec<Vec<_>>, _> =
        list.iter().map(|e| twisted_character(e, &lam, false)).collect();
    let chars = match chars {
        Ok(c) => c,
        Err(e) => return Report::new(name).error(e.to_string()),
    };
    let mut gram = 0.0f64;
    for (i, a) in chars.iter().enumerate() {
        for (j, b) in chars.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((section_inner(&lam, a, b) - expect).norm());
        }
    }
    Report::new(name)
        .lhs(json!(list.len()))
        .rhs(json!(dim))
        .residual(gram)
        .pass(list.len() == dim && gram <= tol)
}

fn faithful_check(entries: &[CatalogEntry]) -> Report {
    let refs: Vec<&gerbecat_core::gerbe::Gerbe> =
        entries.iter().map(|e| e.gerbe.as_ref()).collect();
    match verify_fully_faithful(&refs) {
        Ok(rep) => {
            let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
            Report::new("faithful")
                .lhs(json!(rep.pairs.len()))
                .residual(0.0)
                .witness(json!({
                    "entries": names,
                    "pairs": rep.pairs,
                }))
                .pass(rep.pass)
        }
        Err(e) => Report::new("faithful").error(e.to_string()),
    }
}

fn extraction_classes_check(entries: &[CatalogEntry]) -> Option<Report> {
    let find = |n: &str| entries.iter().find(|e| e.name == n).map(|e| &e.gerbe);
    let (sign, triv, schur) =
        (find("extract-sign")?, find("extract-triv")?, find("schur-pt")?);
    let verdict = |a: &Cochain, b: &Cochain| cohomologous(a, b).map(|v| v.is_witness());
    let zero = Cochain::zero(triv.gset.clone(), 2);
    let report = Report::new("extraction-classes");
    let triv_ok = match verdict(&triv.cocycle, &zero) {
        Ok(v) => v,
        Err(e) => return Some(report.error(e.to_string())),
    };
    let sign_schur = match verdict(&sign.cocycle, &schur.cocycle) {
        Ok(v) => v,
        Err(e) => return Some(report.error(e.to_string())),
    };
    let zero = Cochain::zero(sign.gset.clone(), 2);
    let sign_zero = match verdict(&sign.cocycle, &zero) {
        Ok(v) => v,
        Err(e) => return Some(report.error(e.to_string())),
    };
    Some(
        report
            .residual(0.0)
            .witness(json!({
                "trivial_component_is_trivial": triv_ok,
                "sign_component_is_nontrivial": !sign_zero,
                "sign_component_matches_pairing": sign_schur,
            }))
            .pass(triv_ok && !sign_zero && sign_schur),
    )
}

pub fn simples_check(group: &Arc<FiniteGroup>, seed: u64, tol: f64) -> Report {
    match simples(group, seed) {
        Ok(list) => {
            let mut worst = 0.0f64;
            let mut ok = true;
            for v in &list {
                let rep = validate_gbundle(v, tol);
                worst = worst
                    .max(rep.identity_residual)
                    .max(rep.unitarity_residual)
                    .max(rep.composition_residual);
                ok &= rep.pass;
            }
            let dims: Vec<usize> = list.iter().map(total_dim).collect();
            Report::new("simples")
                .lhs(json!(list.len()))
                .residual(worst)
                .witness(json!({ "dims": dims }))
                .pass(ok)
        }
        Err(e) => Report::new("simples").error(e.to_string()),
    }
}

pub fn torus_partition_check(group: &Arc<FiniteGroup>, seed: u64) -> Report {
    let count = match simples(group, seed) {
        Ok(list) => list.len(),
        Err(e) => return Report::new("torus-partition").error(e.to_string()),
    };
    match torus_partition(group.clone(), 3) {
        Ok(z) => Report::new("torus-partition")
            .lhs(rat_value(z))
            .rhs(json!(count))
            .residual(0.0)
            .pass(z == Rational64::from_integer(count as i64)),
        Err(e) => Report::new("torus-partition").error(e.to_string()),
    }
}

pub fn braid_check(group: &Arc<FiniteGroup>, seed: u64, tol: f64, rounds: usize) -> Report {
    let list = match simples(group, seed) {
        Ok(l) => l,
        Err(e) => return Report::new("braid").error(e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_yb = 0.0f64;
    let mut worst_hex = 0.0f64;
    for _ in 0..rounds {
        let v = &list[rng.random_range(0..list.len())];
        let w = &list[rng.random_range(0..list.len())];
        let u = &list[rng.random_range(0..list.len())];
        let yb = match yang_baxter_residual(v, w, u) {
            Ok(r) => r,
            Err(e) => return Report::new("braid").error(e.to_string()),
        };
        let (h1, h2) = match hexagon_residuals(v, w, u) {
            Ok(r) => r,
            Err(e) => return Report::new("braid").error(e.to_string()),
        };
        worst_yb = worst_yb.max(yb);
        worst_hex = worst_hex.max(h1).max(h2);
    }
    let worst = worst_yb.max(worst_hex);
    Report::new("braid")
        .residual(worst)
        .witness(json!({
            "rounds": rounds,
            "worst_yang_baxter": json_f64(worst_yb),
            "worst_hexagon": json_f64(worst_hex),
        }))
        .pass(worst <= tol)
}

pub fn center_report(group: &Arc<FiniteGroup>, seed: u64) -> Report {
    match center_check(group, seed) {
        Ok(rep) => Report::new("center")
            .lhs(json!(rep.class_count))
            .rhs(json!(rep.center_dim))
            .residual(rep.seeded_residual)
            .witness(serde_json::to_value(&rep).expect("report serializes"))
            .pass(rep.pass),
        Err(e) => Report::new("center").error(e.to_string()),
    }
}

fn crossing_check(
    name: &str,
    fields: &Arc<gerbecat_core::gspace::GSet>,
    omega: &Cochain,
    seed: u64,
) -> Report {
    match verify_crossing(fields, omega, seed) {
        Ok(rep) => Report::new(name)
            .lhs(rat_value(rep.lhs))
            .rhs(rat_value(rep.rhs))
            .residual(0.0)
            .pass(rep.pass),
        Err(e) => Report::new(name).error(e.to_string()),
    }
}

fn spherical_check(group: &Arc<FiniteGroup>) -> Report {
    let ring = match group_ring(group) {
        Ok(r) => r,
        Err(e) => return Report::new("spherical-structures").error(e.to_string()),
    };
    let eps = PivotalSymbols::all_plus(&ring);
    let sol = match solve_twisted(&ring, &eps, true) {
        Ok(s) => s,
        Err(e) => return Report::new("spherical-structures").error(e.to_string()),
    };
    let expect = grouplike_counts(group).1;
    Report::new("spherical-structures")
        .lhs(json!(sol.torsor.map(|t| t as u64)))
        .rhs(json!(expect as u64))
        .residual(0.0)
        .pass(sol.exists && sol.torsor == Some(expect))
}

pub fn run_all(
    group: &Arc<FiniteGroup>,
    entries: &[CatalogEntry],
    seed: u64,
    tol: f64,
    timings: bool,
) -> Vec<Report> {
    let mut out = Vec::new();
    for entry in entries {
        out.push(timed(timings, || characters_check(entry, seed, tol)));
    }
    out.push(timed(timings, || faithful_check(entries)));
    if let Some(r) = extraction_classes_check(entries) {
        out.push(r);
    }
    if group.order <= MAX_DOUBLE_GROUP {
        out.push(timed(timings, || simples_check(group, seed, tol)));
        out.push(timed(timings, || braid_check(group, seed, tol, 5)));
        if group.order <= MAX_TRIPLE_GROUP {
            out.push(timed(timings, || torus_partition_check(group, seed)));
        }
    }
    if group.order <= MAX_CENTER_GROUP {
        out.push(timed(timings, || center_report(group, seed)));
    }
    match torus_fields(group.clone(), 1) {
        Ok(fields) => {
            let zero1 = Cochain::zero(fields.points.clone(), 1);
            out.push(timed(timings, || crossing_check("crossing-1", &fields.points, &zero1, seed)));
            if fields.points.size * group.order <= DEFAULT_ALGEBRA_BOUND {
                let zero2 = Cochain::zero(fields.points.clone(), 2);
                out.push(timed(timings, || {
                    crossing_check("crossing-2", &fields.points, &zero2, seed)
                }));
            }
        }
        Err(e) => out.push(Report::new("crossing-1").error(e.to_string())),
    }
    if is_klein(group) {
        match build_gset(group.clone(), &GSetSpec::Point) {
            Ok(pt) => {
                let pt = Arc::new(pt);
                let pairing = klein_pairing_cocycle(pt.clone());
                out.push(timed(timings, || {
                    crossing_check("crossing-2-twisted", &pt, &pairing, seed)
                }));
            }
            Err(e) => out.push(Report::new("crossing-2-twisted").error(e.to_string())),
        }
    }
    if group.order <= 24 {
        out.push(timed(timings, || spherical_check(group)));
    }
    out
}
