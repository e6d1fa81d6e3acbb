//! gerbecat: drive the equivariant-gerbe checks from the command line.
//! Every subcommand emits one report per check as a JSON line (or TSV row)
//! and the process exits 0 only if every check passed; malformed input exits
//! with 2 instead.

mod battery;
mod report;
mod resolve;

use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use num_rational::Rational64;
use serde_json::{json, Value};

use gerbecat_core::bundle::{
    bundle_from_json, flat_section_dim, irreducible_bundles, section_inner, twisted_character,
    validate_bundle,
};
use gerbecat_core::catalog::orbit_component;
use gerbecat_core::cochain::{
    check_cocycle, coboundary, cohomologous, double_transgress, transgress, Cochain,
    CohomologyVerdict, Phase,
};
use gerbecat_core::double::{decompose, fuse, simples, total_dim};
use gerbecat_core::extract::{extension_from_json, extract_gerbe, irr_system};
use gerbecat_core::geochar::{
    double_character, geometric_character, hom_dimension, validate_gbundle,
};
use gerbecat_core::gerbe::{isometric_equivalent, tensor, verify_equiv_witness, Gerbe};
use gerbecat_core::grp::analyze;
use gerbecat_core::gspace::{loop_groupoid, LoopPoint};
use gerbecat_core::pivotal::{
    builtin_ring, frobenius_perron, fusion_ring_from_json, pivotal_cohomology, pivotal_from_json,
    semisimple_dagger_check, semisimple_dagger_check_perturbed, solve_twisted, symbol_class,
    FusionRing, PivotalSymbols,
};
use gerbecat_core::tqft::{torus_fields, verify_crossing};

use report::{complex_value, emit, json_f64, rat_value, Format, Report};
use resolve::{fail, load_cochain, load_gerbe, load_group, load_gset, InputError};

#[derive(Parser)]
#[command(name = "gerbecat", version, about = "equivariant gerbe check driver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for every randomized construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance for numeric checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record per-check wall time (omitted by default so equal inputs give
    /// byte-identical output).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure of a group reference.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Structure of a G-set reference.
    Gset {
        #[command(subcommand)]
        cmd: GsetCmd,
    },
    /// Cocycle validation, transgression, and class comparison.
    Cocycle {
        #[command(subcommand)]
        cmd: CocycleCmd,
    },
    /// Gerbe loading, equivalence, and geometric characters.
    Gerbe {
        #[command(subcommand)]
        cmd: GerbeCmd,
    },
    /// Twisted bundle validation, splitting, and characters.
    Bundle {
        #[command(subcommand)]
        cmd: BundleCmd,
    },
    /// Morphism space dimensions between gerbes.
    Hom {
        #[command(subcommand)]
        cmd: HomCmd,
    },
    /// Fusion double of a group: simples, fusion, braiding, center.
    Double {
        #[command(subcommand)]
        cmd: DoubleCmd,
    },
    /// Pivotal structures on fusion rings.
    Pivotal {
        #[command(subcommand)]
        cmd: PivotalCmd,
    },
    /// Gerbes induced by group extensions.
    Extract {
        #[command(subcommand)]
        cmd: ExtractCmd,
    },
    /// Circle-crossing dimension counts.
    Tqft {
        #[command(subcommand)]
        cmd: TqftCmd,
    },
    /// The standard named gerbes and the full check battery.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Info {
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand)]
enum GsetCmd {
    Info {
        /// point, regular, coset:<elements>, or a gset.json path.
        #[arg(long)]
        gset: String,
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Subcommand)]
enum CocycleCmd {
    /// Cocycle law and normalization.
    Check {
        #[arg(long)]
        cocycle: String,
    },
    /// Transgression to the loop groupoid.
    Transgress {
        #[arg(long)]
        cocycle: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
    },
    /// Decide whether two cocycles differ by a coboundary.
    Cohomologous {
        #[arg(long)]
        cocycle: String,
        #[arg(long)]
        other: String,
    },
}

#[derive(Subcommand)]
enum GerbeCmd {
    /// Load and validate a gerbe reference.
    Make {
        #[arg(long)]
        gerbe: String,
        #[arg(long)]
        group: Option<String>,
    },
    /// Search for an isometric equivalence and verify its witness.
    Equiv {
        #[arg(long)]
        gerbe: String,
        #[arg(long)]
        other: String,
        #[arg(long)]
        group: Option<String>,
    },
    /// Geometric character as a conjugation-equivariant bundle.
    Char {
        #[arg(long)]
        gerbe: String,
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Subcommand)]
enum BundleCmd {
    /// Equivariance, unitarity, and twisted functoriality of a bundle file.
    Validate {
        #[arg(long)]
        bundle: String,
    },
    /// Split the twisted groupoid algebra and count irreducibles.
    Irreducibles {
        #[arg(long)]
        gerbe: String,
        #[arg(long)]
        group: Option<String>,
    },
    /// Twisted character of a bundle over the loop groupoid.
    Character {
        #[arg(long)]
        bundle: String,
    },
}

#[derive(Subcommand)]
enum HomCmd {
    /// dim Hom(X, Y) two ways: character integral and flat sections.
    Dim {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand)]
enum DoubleCmd {
    /// Simple objects, validated fiberwise.
    Simples {
        #[arg(long)]
        group: String,
    },
    /// Fuse two simples and decompose the result.
    Fuse {
        #[arg(long)]
        group: String,
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
    },
    /// Yang-Baxter and hexagon residuals on seeded triples.
    BraidCheck {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
    /// Exact and seeded checks on the center of the group algebra.
    CenterCheck {
        #[arg(long)]
        group: String,
    },
    /// Commuting-triple count against the number of simples.
    DimCheck {
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand)]
enum PivotalCmd {
    /// Order and generators of the sign-rescaling class group.
    Hpiv {
        #[arg(long, conflicts_with = "ring", required_unless_present = "ring")]
        builtin: Option<String>,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Solve for unit-circle or sign spherical structures.
    Solve {
        #[arg(long, conflicts_with = "ring", required_unless_present = "ring")]
        builtin: Option<String>,
        #[arg(long)]
        ring: Option<String>,
        /// Pivotal symbol table (defaults to all +1).
        #[arg(long)]
        symbols: Option<String>,
        /// Flip the symmetry orbit through this triple, e.g. --flip 1,2,2.
        #[arg(long)]
        flip: Vec<String>,
        #[arg(long)]
        spherical: bool,
    },
    /// Perron dimension vector of the fusion ring.
    Fpdim {
        #[arg(long, conflicts_with = "ring", required_unless_present = "ring")]
        builtin: Option<String>,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Two-sided adjoint transposes agree for shared block weights.
    DaggerCheck {
        /// Comma-separated positive weights, e.g. 1,2,3 or 1/2,1.
        #[arg(long, default_value = "1,2,3")]
        weights_a: String,
        #[arg(long, default_value = "1,1")]
        weights_b: String,
        #[arg(long, default_value_t = 5)]
        rounds: u64,
        /// Negative control: independently rescaled legs must show a gap.
        #[arg(long)]
        perturb: bool,
    },
}

#[derive(Subcommand)]
enum ExtractCmd {
    /// Gerbe induced on the kernel characters of an extension file.
    Gerbe {
        #[arg(long)]
        extension: String,
    },
}

#[derive(Subcommand)]
enum TqftCmd {
    /// Loop-integral dimension count against flat sections or irreducibles.
    CircleCheck {
        #[arg(long)]
        group: String,
        /// Twist cochain; its carrier replaces the conjugation fields.
        #[arg(long)]
        cocycle: Option<String>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        degree: u8,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Run the full battery over one group's catalog.
    RunAll {
        #[arg(long)]
        group: String,
    },
}

fn big_value(x: u128) -> Value {
    u64::try_from(x).map(Value::from).unwrap_or_else(|_| Value::String(x.to_string()))
}

fn phase_strings(c: &Cochain) -> Vec<String> {
    c.values.iter().map(Phase::to_string).collect()
}

fn element_order(group: &gerbecat_core::grp::FiniteGroup, g: usize) -> usize {
    let mut k = 1;
    let mut p = g;
    while p != group.identity {
        p = group.mul(p, g);
        k += 1;
    }
    k
}

fn parse_weights(s: &str) -> Result<Vec<f64>, InputError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let parsed = match t.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p.parse().map_err(|_| ())?;
                    let q: f64 = q.parse().map_err(|_| ())?;
                    p / q
                }
                None => t.parse().map_err(|_| ())?,
            };
            Ok(parsed)
        })
        .collect::<Result<Vec<f64>, ()>>()
        .map_err(|()| InputError(format!("bad weight list {s:?}")))
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize), InputError> {
    let parts: Vec<usize> =
        s.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>().map_err(|_| {
            InputError(format!("bad triple {s:?}; expected i,j,k"))
        })?;
    match parts[..] {
        [i, j, k] => Ok((i, j, k)),
        _ => fail(format!("bad triple {s:?}; expected i,j,k")),
    }
}

fn ring_from_args(
    builtin: &Option<String>,
    ring: &Option<String>,
) -> Result<FusionRing, InputError> {
    if let Some(name) = builtin {
        return builtin_ring(name).map_err(|e| InputError(e.to_string()));
    }
    let Some(path) = ring else {
        return fail("need --builtin or --ring");
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {path}: {e}")))?;
    fusion_ring_from_json(&text).map_err(|e| InputError(format!("{path}: {e}")))
}

fn equation_residual(ring: &FusionRing, eps: &PivotalSymbols, vals: &[Complex64]) -> f64 {
    ring.admissible_triples()
        .into_iter()
        .map(|(i, j, k)| {
            let s = f64::from(eps.sign(i, j, k).unwrap_or(0));
            (vals[j] * vals[k] - vals[i] * s).norm()
        })
        .fold(0.0, f64::max)
}

fn loop_label(p: &LoopPoint) -> Value {
    match *p {
        LoopPoint::One { x, g } => json!([x, g]),
        LoopPoint::Two { x, g, h } => json!([x, g, h]),
    }
}

fn group_info(r: &str) -> Result<Vec<Report>, InputError> {
    let group = load_group(r)?;
    let a = analyze(&group);
    let mut orders = std::collections::BTreeMap::<usize, usize>::new();
    for g in 0..group.order {
        *orders.entry(element_order(&group, g)).or_insert(0) += 1;
    }
    Ok(vec![Report::new("group info").lhs(json!(group.order)).witness(json!({
        "name": group.name,
        "order": group.order,
        "abelian": a.center.len() == group.order,
        "class_count": a.classes.len(),
        "center_order": a.center.len(),
        "commuting_pairs": a.commuting_pairs,
        "commuting_triples": a.commuting_triples,
        "element_orders": orders,
    }))])
}

fn gset_info(r: &str, group: Option<&str>) -> Result<Vec<Report>, InputError> {
    let group = group.map(load_group).transpose()?;
    let gs = load_gset(r, group.as_ref())?;
    let lam = loop_groupoid(&gs, 1).map_err(|e| InputError(e.to_string()))?;
    let average = Rational64::new(lam.points.size as i64, gs.group.order as i64);
    let orbit_sizes: Vec<usize> = gs.orbits.iter().map(Vec::len).collect();
    let stabilizer_orders: Vec<usize> =
        gs.orbits.iter().map(|o| gs.stabilizers[o[0]].len()).collect();
    Ok(vec![Report::new("gset info")
        .lhs(rat_value(average))
        .rhs(json!(gs.orbits.len()))
        .residual(0.0)
        .witness(json!({
            "size": gs.size,
            "orbit_sizes": orbit_sizes,
            "stabilizer_orders": stabilizer_orders,
        }))
        .pass(average == Rational64::from_integer(gs.orbits.len() as i64))])
}

fn cocycle_cmd(cmd: &CocycleCmd) -> Result<Vec<Report>, InputError> {
    match cmd {
        CocycleCmd::Check { cocycle } => {
            let c = load_cochain(cocycle)?;
            let report = Report::new("cocycle check");
            Ok(vec![match check_cocycle(&c) {
                Ok(()) => report
                    .residual(0.0)
                    .witness(json!({"degree": c.degree, "carrier_size": c.carrier.size})),
                Err(v) => report
                    .witness(serde_json::to_value(v).expect("witness serializes"))
                    .pass(false),
            }])
        }
        CocycleCmd::Transgress { cocycle, level } => {
            let c = load_cochain(cocycle)?;
            let lam = loop_groupoid(&c.carrier, *level)
                .map_err(|e| InputError(e.to_string()))?;
            let tau = if *level == 1 {
                transgress(&c, &lam)
            } else {
                double_transgress(&c, &lam)
            }
            .map_err(|e| InputError(e.to_string()))?;
            let closed = tau.degree == 0 || check_cocycle(&tau).is_ok();
            Ok(vec![Report::new("cocycle transgress")
                .residual(0.0)
                .witness(json!({
                    "level": level,
                    "degree": tau.degree,
                    "objects": lam.object_count(),
                    "labels": lam.labels.iter().map(loop_label).collect::<Vec<_>>(),
                    "entries": phase_strings(&tau),
                }))
                .pass(closed)])
        }
        CocycleCmd::Cohomologous { cocycle, other } => {
            let a = load_cochain(cocycle)?;
            let b = load_cochain(other)?;
            let verdict = cohomologous(&a, &b).map_err(|e| InputError(e.to_string()))?;
            let report = Report::new("cocycle cohomologous");
            Ok(vec![match verdict {
                CohomologyVerdict::Witness(gamma) => {
                    let d = coboundary(&gamma).map_err(|e| InputError(e.to_string()))?;
                    let diff: Vec<Phase> =
                        b.values.iter().zip(&a.values).map(|(x, y)| *x - *y).collect();
                    let exact = d.values == diff;
                    report
                        .residual(0.0)
                        .witness(json!({
                            "cohomologous": true,
                            "gamma": phase_strings(&gamma),
                            "coboundary_verified": exact,
                        }))
                        .pass(exact)
                }
                CohomologyVerdict::Distinct(cert) => report
                    .witness(json!({
                        "cohomologous": false,
                        "modulus": cert.modulus,
                        "pairing": cert.pairing,
                        "functional": cert.functional,
                    }))
                    .pass(false),
            }])
        }
    }
}

fn gerbe_summary(x: &Gerbe) -> Value {
    json!({
        "size": x.size(),
        "group_order": x.group().order,
        "orbit_count": x.gset.orbits.len(),
        "metric": x.metric.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
    })
}

fn gerbe_cmd(cmd: &GerbeCmd, seed: u64, tol: f64) -> Result<Vec<Report>, InputError> {
    match cmd {
        GerbeCmd::Make { gerbe, group } => {
            let group = group.as_deref().map(load_group).transpose()?;
            let x = load_gerbe(gerbe, group.as_ref(), seed)?;
            Ok(vec![Report::new("gerbe make").residual(0.0).witness(gerbe_summary(&x))])
        }
        GerbeCmd::Equiv { gerbe, other, group } => {
            let group = group.as_deref().map(load_group).transpose()?;
            let x = load_gerbe(gerbe, group.as_ref(), seed)?;
            let y = load_gerbe(other, group.as_ref(), seed)?;
            let found =
                isometric_equivalent(&x, &y).map_err(|e| InputError(e.to_string()))?;
            let report = Report::new("gerbe equiv");
            Ok(vec![match found {
                Some(w) => {
                    let verified = verify_equiv_witness(&x, &y, &w);
                    report
                        .residual(0.0)
                        .witness(json!({
                            "equivalent": true,
                            "point_map": w.point_map,
                            "gamma": phase_strings(&w.gamma),
                            "verified": verified,
                        }))
                        .pass(verified)
                }
                None => report.witness(json!({"equivalent": false})).pass(false),
            }])
        }
        GerbeCmd::Char { gerbe, group } => {
            let group = group.as_deref().map(load_group).transpose()?;
            let x = load_gerbe(gerbe, group.as_ref(), seed)?;
            let v = geometric_character(&x);
            let rep = validate_gbundle(&v, tol);
            let chi = double_character(&v);
            let table: Vec<Value> = chi
                .table
                .iter()
                .map(|(&(g, h), z)| json!([g, h, complex_value(*z)]))
                .collect();
            let worst = rep
                .identity_residual
                .max(rep.unitarity_residual)
                .max(rep.composition_residual);
            Ok(vec![Report::new("gerbe char")
                .residual(worst)
                .witness(json!({
                    "dims": v.dims,
                    "bundle": serde_json::to_value(rep).expect("report serializes"),
                    "character": table,
                }))
                .pass(rep.pass)])
        }
    }
}

fn bundle_cmd(cmd: &BundleCmd, seed: u64, tol: f64) -> Result<Vec<Report>, InputError> {
    match cmd {
        BundleCmd::Validate { bundle } => {
            let text = std::fs::read_to_string(bundle)
                .map_err(|e| InputError(format!("cannot read {bundle}: {e}")))?;
            let e = bundle_from_json(&text).map_err(|e| InputError(format!("{bundle}: {e}")))?;
            let rep = validate_bundle(&e, tol).map_err(|e| InputError(e.to_string()))?;
            let worst = rep
                .identity_residual
                .max(rep.unitarity_residual)
                .max(rep.functoriality_residual);
            Ok(vec![Report::new("bundle validate")
                .residual(worst)
                .witness(serde_json::to_value(rep).expect("report serializes"))
                .pass(rep.pass)])
        }
        BundleCmd::Irreducibles { gerbe, group } => {
            let group = group.as_deref().map(load_group).transpose()?;
            let x = load_gerbe(gerbe, group.as_ref(), seed)?;
            let report = Report::new("bundle irreducibles");
            let lam = loop_groupoid(&x.gset, 1).map_err(|e| InputError(e.to_string()))?;
            let tau =
                transgress(&x.cocycle, &lam).map_err(|e| InputError(e.to_string()))?;
            let (list, dim) = match (irreducible_bundles(&x, seed, tol), flat_section_dim(&lam, &tau))
            {
                (Ok(l), Ok(d)) => (l, d),
                (Err(e), _) => return Ok(vec![report.error(e.to_string())]),
                (_, Err(e)) => return Ok(vec![report.error(e.to_string())]),
            };
            let chars: Result<Vec<Vec<_>>, _> =
                list.iter().map(|e| twisted_character(e, &lam, false)).collect();
            let chars = match chars {
                Ok(c) => c,
                Err(e) => return Ok(vec![report.error(e.to_string())]),
            };
            let mut gram = 0.0f64;
            for (i, a) in chars.iter().enumerate() {
                for (j, b) in chars.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    gram = gram.max((section_inner(&lam, a, b) - expect).norm());
                }
            }
            let dims: Vec<usize> = list.iter().map(|e| e.dims.iter().sum()).collect();
            Ok(vec![report
                .lhs(json!(list.len()))
                .rhs(json!(dim))
                .residual(gram)
                .witness(json!({"dims": dims}))
                .pass(list.len() == dim && gram <= tol)])
        }
        BundleCmd::Character { bundle } => {
            let text = std::fs::read_to_string(bundle)
                .map_err(|e| InputError(format!("cannot read {bundle}: {e}")))?;
            let e = bundle_from_json(&text).map_err(|e| InputError(format!("{bundle}: {e}")))?;
            let lam =
                loop_groupoid(&e.gerbe.gset, 1).map_err(|e| InputError(e.to_string()))?;
            let chi =
                twisted_character(&e, &lam, false).map_err(|e| InputError(e.to_string()))?;
            let norm = section_inner(&lam, &chi, &chi);
            Ok(vec![Report::new("bundle character").residual(0.0).witness(json!({
                "labels": lam.labels.iter().map(loop_label).collect::<Vec<_>>(),
                "values": chi.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
                "norm": complex_value(norm),
            }))])
        }
    }
}

fn hom_dim(x: &str, y: &str, group: &str, seed: u64) -> Result<Vec<Report>, InputError> {
    let group = load_group(group)?;
    let x = load_gerbe(x, Some(&group), seed)?;
    let y = load_gerbe(y, Some(&group), seed)?;
    let report = Report::new("hom dim");
    let by_characters = match hom_dimension(&x, &y) {
        Ok(d) => d,
        Err(e) => return Ok(vec![report.error(e.to_string())]),
    };
    let by_sections = (|| {
        let t = tensor(&y, &x, true).map_err(|e| e.to_string())?;
        let lam = loop_groupoid(&t.gset, 1).map_err(|e| e.to_string())?;
        let tau = transgress(&t.cocycle, &lam).map_err(|e| e.to_string())?;
        flat_section_dim(&lam, &tau).map_err(|e| e.to_string())
    })();
    let by_sections = match by_sections {
        Ok(d) => d,
        Err(e) => return Ok(vec![report.error(e)]),
    };
    Ok(vec![report
        .lhs(rat_value(by_characters))
        .rhs(json!(by_sections))
        .residual(0.0)
        .pass(by_characters == Rational64::from_integer(by_sections as i64))])
}

fn double_cmd(cmd: &DoubleCmd, seed: u64, tol: f64) -> Result<Vec<Report>, InputError> {
    match cmd {
        DoubleCmd::Simples { group } => {
            let group = load_group(group)?;
            Ok(vec![battery::simples_check(&group, seed, tol)])
        }
        DoubleCmd::Fuse { group, left, right } => {
            let group = load_group(group)?;
            let list = simples(&group, seed).map_err(|e| InputError(e.to_string()))?;
            if *left >= list.len() || *right >= list.len() {
                return fail(format!(
                    "simple index out of range; the double of this group has {} simples",
                    list.len()
                ));
            }
            let f = fuse(&list[*left], &list[*right]).map_err(|e| InputError(e.to_string()))?;
            let report = Report::new("double fuse");
            Ok(vec![match decompose(&f, &list) {
                Ok(mults) => {
                    let resum: usize =
                        mults.iter().zip(&list).map(|(m, s)| m * total_dim(s)).sum();
                    report
                        .lhs(json!(total_dim(&f)))
                        .rhs(json!(resum))
                        .residual(0.0)
                        .witness(json!({"multiplicities": mults}))
                        .pass(total_dim(&f) == resum)
                }
                Err(e) => report.witness(json!(e.to_string())).pass(false),
            }])
        }
        DoubleCmd::BraidCheck { group, rounds } => {
            let group = load_group(group)?;
            Ok(vec![battery::braid_report(&group, seed, tol, *rounds)])
        }
        DoubleCmd::CenterCheck { group } => {
            let group = load_group(group)?;
            Ok(vec![battery::center_report(&group, seed)])
        }
        DoubleCmd::DimCheck { group } => {
            let group = load_group(group)?;
            let _ = timings;
            Ok(vec![battery::torus_partition_report(&group, seed)])
        }
    }
}

fn pivotal_cmd(cmd: &PivotalCmd, seed: u64, tol: f64) -> Result<Vec<Report>, InputError> {
    match cmd {
        PivotalCmd::Hpiv { builtin, ring } => {
            let ring = ring_from_args(builtin, ring)?;
            let h = pivotal_cohomology(&ring);
            Ok(vec![Report::new("pivotal hpiv")
                .lhs(h.order().map(big_value).unwrap_or(Value::Null))
                .residual(0.0)
                .witness(json!({
                    "ring": ring.name,
                    "rank": h.rank,
                    "generators": h.generators,
                }))
                .pass(h.order().is_some())])
        }
        PivotalCmd::Solve { builtin, ring, symbols, flip, spherical } => {
            let ring = ring_from_args(builtin, ring)?;
            let eps = match symbols {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| InputError(format!("cannot read {path}: {e}")))?;
                    pivotal_from_json(&ring, &text)
                        .map_err(|e| InputError(format!("{path}: {e}")))?
                }
                None => {
                    let seeds: Vec<(usize, usize, usize)> =
                        flip.iter().map(|s| parse_triple(s)).collect::<Result<_, _>>()?;
                    PivotalSymbols::flip_orbits(&ring, &seeds)
                        .map_err(|e| InputError(e.to_string()))?
                }
            };
            let report = Report::new("pivotal solve");
            let sol = match solve_twisted(&ring, &eps, *spherical) {
                Ok(s) => s,
                Err(e) => return Ok(vec![report.error(e.to_string())]),
            };
            Ok(vec![if sol.exists {
                let vals = sol.values.expect("existing solution carries values");
                let residual = equation_residual(&ring, &eps, &vals);
                report
                    .residual(residual)
                    .witness(json!({
                        "ring": ring.name,
                        "spherical": spherical,
                        "values": vals.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
                        "torsor": sol.torsor.map(big_value),
                    }))
                    .pass(residual <= tol)
            } else {
                let class = symbol_class(&ring, &eps).map_err(|e| InputError(e.to_string()))?;
                report
                    .witness(json!({
                        "ring": ring.name,
                        "spherical": spherical,
                        "solvable": false,
                        "class_components": class.components,
                    }))
                    .pass(false)
            }])
        }
        PivotalCmd::Fpdim { builtin, ring } => {
            let ring = ring_from_args(builtin, ring)?;
            let report = Report::new("pivotal fpdim");
            Ok(vec![match frobenius_perron(&ring) {
                Ok(fp) => {
                    let global: f64 = fp.dims.iter().map(|d| d * d).sum();
                    report
                        .lhs(json!(fp.dims.iter().map(|&d| json_f64(d)).collect::<Vec<_>>()))
                        .residual(fp.residual)
                        .witness(json!({"ring": ring.name, "global": json_f64(global)}))
                        .pass(fp.residual <= tol)
                }
                Err(e) => report.error(e.to_string()),
            }])
        }
        PivotalCmd::DaggerCheck { weights_a, weights_b, rounds, perturb } => {
            let wa = parse_weights(weights_a)?;
            let wb = parse_weights(weights_b)?;
            let mut worst = 0.0f64;
            for s in 0..*rounds {
                let gap = if *perturb {
                    semisimple_dagger_check_perturbed(&wa, &wb, seed + s)
                } else {
                    semisimple_dagger_check(&wa, &wb, seed + s)
                }
                .map_err(|e| InputError(e.to_string()))?;
                worst = worst.max(gap);
            }
            let report = Report::new("pivotal dagger-check")
                .lhs(json_f64(worst))
                .witness(json!({"rounds": rounds, "perturbed": perturb}));
            Ok(vec![if *perturb {
                report.rhs(json_f64(tol)).pass(worst > tol)
            } else {
                report.residual(worst).pass(worst <= tol)
            }])
        }
    }
}

fn extract_cmd(extension: &str, seed: u64) -> Result<Vec<Report>, InputError> {
    let text = std::fs::read_to_string(extension)
        .map_err(|e| InputError(format!("cannot read {extension}: {e}")))?;
    let ext = extension_from_json(&text).map_err(|e| InputError(format!("{extension}: {e}")))?;
    let irr =
        irr_system(&ext.kernel_group, seed).map_err(|e| InputError(e.to_string()))?;
    let mut reports = Vec::new();
    let x = match extract_gerbe(&ext, &irr, seed) {
        Ok(x) => x,
        Err(e) => return Ok(vec![Report::new("extract gerbe").error(e.to_string())]),
    };
    reports.push(Report::new("extract gerbe").residual(0.0).witness(json!({
        "quotient_order": ext.quotient.order,
        "kernel_order": ext.kernel.len(),
        "summary": gerbe_summary(&x),
    })));
    for orbit in 0..x.gset.orbits.len() {
        let name = format!("extract class {orbit}");
        let component = match orbit_component(&x, orbit) {
            Ok(c) => c,
            Err(e) => {
                reports.push(Report::new(name).error(e.to_string()));
                continue;
            }
        };
        let zero = Cochain::zero(component.gset.clone(), 2);
        match cohomologous(&component.cocycle, &zero) {
            Ok(v) => reports.push(
                Report::new(name)
                    .residual(0.0)
                    .witness(json!({
                        "points": x.gset.orbits[orbit],
                        "class": if v.is_witness() { "trivial" } else { "nontrivial" },
                    })),
            ),
            Err(e) => reports.push(Report::new(name).error(e.to_string())),
        }
    }
    Ok(reports)
}

fn tqft_cmd(
    group: &str,
    cocycle: &Option<String>,
    degree: u8,
    seed: u64,
) -> Result<Vec<Report>, InputError> {
    let group = load_group(group)?;
    let (fields, omega) = match cocycle {
        Some(path) => {
            let c = load_cochain(path)?;
            if c.degree != degree {
                return fail(format!(
                    "cocycle has degree {}, but --degree {degree} was requested",
                    c.degree
                ));
            }
            if c.carrier.group.mult != group.mult {
                return fail("cocycle carrier lives over a different group");
            }
            (c.carrier.clone(), c)
        }
        None => {
            let fields =
                torus_fields(group.clone(), 1).map_err(|e| InputError(e.to_string()))?;
            let omega = Cochain::zero(fields.points.clone(), degree);
            (fields.points, omega)
        }
    };
    let report = Report::new("tqft circle-check");
    Ok(vec![match verify_crossing(&fields, &omega, seed) {
        Ok(rep) => report
            .lhs(rat_value(rep.lhs))
            .rhs(rat_value(rep.rhs))
            .residual(0.0)
            .witness(json!({"degree": degree, "field_count": fields.size}))
            .pass(rep.pass),
        Err(e) => report.error(e.to_string()),
    }])
}

fn run(cli: &Cli) -> Result<Vec<Report>, InputError> {
    match &cli.cmd {
        Cmd::Group { cmd: GroupCmd::Info { group } } => group_info(group),
        Cmd::Gset { cmd: GsetCmd::Info { gset, group } } => gset_info(gset, group.as_deref()),
        Cmd::Cocycle { cmd } => cocycle_cmd(cmd),
        Cmd::Gerbe { cmd } => gerbe_cmd(cmd, cli.seed, cli.tol),
        Cmd::Bundle { cmd } => bundle_cmd(cmd, cli.seed, cli.tol),
        Cmd::Hom { cmd: HomCmd::Dim { x, y, group } } => hom_dim(x, y, group, cli.seed),
        Cmd::Double { cmd } => double_cmd(cmd, cli.seed, cli.tol, cli.timings),
        Cmd::Pivotal { cmd } => pivotal_cmd(cmd, cli.seed, cli.tol),
        Cmd::Extract { cmd: ExtractCmd::Gerbe { extension } } => extract_cmd(extension, cli.seed),
        Cmd::Tqft { cmd: TqftCmd::CircleCheck { group, cocycle, degree } } => {
            tqft_cmd(group, cocycle, *degree, cli.seed)
        }
        Cmd::Catalog { cmd: CatalogCmd::RunAll { group } } => {
            let group = load_group(group)?;
            let entries = resolve::catalog_entries(&group, cli.seed)?;
            Ok(battery::run_all(&group, &entries, cli.seed, cli.tol, cli.timings))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut reports) => {
            if cli.timings {
                let total = start.elapsed().as_millis() as u64;
                for r in &mut reports {
                    if r.timing_ms.is_none() {
                        r.timing_ms = Some(total);
                    }
                }
            }
            emit(&reports, cli.format);
            let ok = reports.iter().all(|r| r.status == report::Status::Pass);
            std::process::exit(if ok { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
