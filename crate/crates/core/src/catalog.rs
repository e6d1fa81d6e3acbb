//! Named benchmark gerbes over the standard test groups: the untwisted point
//! and regular gerbes, one coset gerbe per element order, and over the Klein
//! group the pairing-twisted point plus the two single-character components
//! of the quaternion-by-center extraction.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

use crate::cochain::{klein_pairing_cocycle, Cochain, CochainError};
use crate::extract::{extension_data, extract_gerbe, irr_system, ExtractError};
use crate::gerbe::{make_gerbe, regular_gerbe, trivial_point_gerbe, Gerbe, GerbeError};
use crate::grp::{build_group, FiniteGroup, GroupError, GroupSpec};
use crate::gspace::{build_gset, validate_gset, GSetSpec, GSpaceError};

/// Groups the full battery is expected to cover.
pub const CATALOG_GROUPS: [&str; 5] = ["Z4", "Z2xZ2", "S3", "D4", "Q8"];

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown group name {0:?}")]
    UnknownGroup(String),
    #[error("no catalog entry named {0:?}")]
    UnknownEntry(String),
    #[error("carrier has no orbit {0}")]
    BadOrbit(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Space(#[from] GSpaceError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// A named gerbe in the standard battery.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub gerbe: Arc<Gerbe>,
}

fn atom_spec(name: &str) -> Option<GroupSpec> {
    if name == "Q8" {
        return Some(GroupSpec::Quaternion);
    }
    let (head, tail) = name.split_at(name.len().min(1));
    let n: usize = tail.parse().ok()?;
    match head {
        "Z" | "C" => Some(GroupSpec::Cyclic(n)),
        "D" => Some(GroupSpec::Dihedral(n)),
        "S" => Some(GroupSpec::Symmetric(n)),
        _ => None,
    }
}

/// Resolve a group name: Zn/Cn cyclic, Dn dihedral of order 2n, Sn symmetric,
/// Q8, and x-separated products such as Z2xZ2.
pub fn group_by_name(name: &str) -> Result<FiniteGroup, CatalogError> {
    let mut spec: Option<GroupSpec> = None;
    for part in name.split('x') {
        let atom =
            atom_spec(part).ok_or_else(|| CatalogError::UnknownGroup(name.to_string()))?;
        spec = Some(match spec {
            None => atom,
            Some(s) => GroupSpec::Product(Box::new(s), Box::new(atom)),
        });
    }
    let spec = spec.ok_or_else(|| CatalogError::UnknownGroup(name.to_string()))?;
    Ok(build_group(&spec)?)
}

fn element_order(group: &FiniteGroup, g: usize) -> usize {
    let mut k = 1;
    let mut p = g;
    while p != group.identity {
        p = group.mul(p, g);
        k += 1;
    }
    k
}

fn cyclic_subgroup(group: &FiniteGroup, g: usize) -> Vec<usize> {
    let mut elems = vec![group.identity];
    let mut p = g;
    while p != group.identity {
        elems.push(p);
        p = group.mul(p, g);
    }
    elems.sort_unstable();
    elems
}

/// Restriction of a gerbe to one orbit of its carrier.
pub fn orbit_component(x: &Gerbe, orbit: usize) -> Result<Gerbe, CatalogError> {
    let points = x.gset.orbits.get(orbit).ok_or(CatalogError::BadOrbit(orbit))?;
    let group = x.group().clone();
    let pos = |p: usize| points.binary_search(&p).expect("orbit is closed under the action");
    let act: Vec<Vec<usize>> = (0..group.order)
        .map(|g| points.iter().map(|&p| pos(x.gset.apply(g, p))).collect())
        .collect();
    let sub = Arc::new(validate_gset(group, act)?);
    let cocycle =
        Cochain::from_fn_deg2(sub.clone(), |i, g2, g1| x.cocycle.at2(points[i], g2, g1));
    let metric = points.iter().map(|&p| x.metric[p]).collect();
    Ok(make_gerbe(sub, cocycle, metric)?)
}

/// The two single-character components of the gerbe the quaternion group
/// induces on the characters of its center, rebuilt over the given copy of
/// the quotient. The component names record which central character carries
/// the nontrivial twist.
fn quaternion_extraction_components(
    quotient: &Arc<FiniteGroup>,
    seed: u64,
) -> Result<Vec<(String, Gerbe)>, CatalogError> {
    let q8 = Arc::new(build_group(&GroupSpec::Quaternion)?);
    let center: Vec<usize> = (0..q8.order)
        .filter(|&g| (0..q8.order).all(|h| q8.mul(g, h) == q8.mul(h, g)))
        .collect();
    let ext = extension_data(q8, &center, None)?;
    let irr = irr_system(&ext.kernel_group, seed)?;
    let big = extract_gerbe(&ext, &irr, seed)?;
    // An order-4 table of exponent two with identity 0 is unique, so the
    // computed quotient coincides with the supplied encoding.
    assert_eq!(ext.quotient.mult, quotient.mult);
    let carrier = Arc::new(validate_gset(quotient.clone(), big.gset.act.clone())?);
    let cocycle = Cochain::from_values(carrier.clone(), 2, big.cocycle.values.clone())?;
    let rebuilt = make_gerbe(carrier, cocycle, big.metric.clone())?;
    let mut out = Vec::new();
    for (oi, orbit) in rebuilt.gset.orbits.iter().enumerate() {
        let sign = irr.reps[orbit[0]][1][(0, 0)].re < 0.0;
        let name = if sign { "extract-sign" } else { "extract-triv" };
        out.push((name.to_string(), orbit_component(&rebuilt, oi)?));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// The named battery over one group. Coset entries take the subgroup
/// generated by the smallest element of each order; the Klein-only entries
/// carry the two nontrivially twisted points the rest of the battery is
/// measured against.
pub fn standard_catalog(
    group: &Arc<FiniteGroup>,
    seed: u64,
) -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut entries: Vec<(String, Gerbe)> = vec![
        ("trivial-pt".to_string(), trivial_point_gerbe(group.clone())),
        ("regular".to_string(), regular_gerbe(group.clone())),
    ];
    let mut generators: BTreeMap<usize, usize> = BTreeMap::new();
    for g in 1..group.order {
        generators.entry(element_order(group, g)).or_insert(g);
    }
    for (o, g) in generators {
        let sub = cyclic_subgroup(group, g);
        if sub.len() == group.order {
            continue;
        }
        let gs = Arc::new(build_gset(group.clone(), &GSetSpec::Coset(sub))?);
        let metric = vec![Rational64::from_integer(1); gs.size];
        let zero = Cochain::zero(gs.clone(), 2);
        entries.push((format!("coset-o{o}"), make_gerbe(gs, zero, metric)?));
    }
    let klein = build_group(&GroupSpec::Product(
        Box::new(GroupSpec::Cyclic(2)),
        Box::new(GroupSpec::Cyclic(2)),
    ))?;
    if group.mult == klein.mult {
        let pt = Arc::new(build_gset(group.clone(), &GSetSpec::Point)?);
        let pairing = klein_pairing_cocycle(pt.clone());
        let metric = vec![Rational64::from_integer(1)];
        entries.push(("schur-pt".to_string(), make_gerbe(pt, pairing, metric)?));
        entries.extend(quaternion_extraction_components(group, seed)?);
    }
    Ok(entries
        .into_iter()
        .map(|(name, gerbe)| CatalogEntry { name, gerbe: Arc::new(gerbe) })
        .collect())
}

/// Look up one battery entry by name.
pub fn catalog_entry(
    group: &Arc<FiniteGroup>,
    name: &str,
    seed: u64,
) -> Result<Arc<Gerbe>, CatalogError> {
    standard_catalog(group, seed)?
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.gerbe)
        .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))
}
