//! Finite G-sets, their action groupoids, and iterated loop groupoids.
//!
//! `act[g][x]` is the point g·x. The action groupoid has the points as
//! objects and one arrow per group element out of every object, so the
//! groupoid measure weights each object by 1/|G|.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grp::{build_group_from_json, FiniteGroup};

/// Loop-groupoid objects are materialized eagerly; this caps the blow-up.
const MAX_LOOP_OBJECTS: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GSpaceError {
    #[error("action table is not |G| x size")]
    BadTableShape,
    #[error("act[{g}][{x}] = {value} is out of range")]
    EntryOutOfRange { g: usize, x: usize, value: usize },
    #[error("identity does not fix point {x}")]
    IdentityMoves { x: usize },
    #[error("action axiom fails at g={g}, h={h}, x={x}")]
    NotAnAction { g: usize, h: usize, x: usize },
    #[error("supplied element set is not a subgroup")]
    NotASubgroup,
    #[error("combined G-sets live over different groups")]
    GroupMismatch,
    #[error("loop groupoid would exceed {MAX_LOOP_OBJECTS} objects")]
    TooManyObjects,
}

/// Recipe for `build_gset`.
#[derive(Debug, Clone)]
pub enum GSetSpec {
    Point,
    /// Left-regular action of G on itself.
    Regular,
    /// Left cosets G/H for the subgroup with the given element set.
    Coset(Vec<usize>),
    Union(Box<GSetSpec>, Box<GSetSpec>),
    Product(Box<GSetSpec>, Box<GSetSpec>),
    Table(Vec<Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct GSet {
    pub group: Arc<FiniteGroup>,
    pub size: usize,
    pub act: Vec<Vec<usize>>,
    /// Orbits ordered by minimal point, each sorted.
    pub orbits: Vec<Vec<usize>>,
    /// orbit_of[x] = index into orbits.
    pub orbit_of: Vec<usize>,
    pub stabilizers: Vec<Vec<usize>>,
}

impl GSet {
    #[inline]
    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.act[g][x]
    }

    /// Σ_x f(x) / |G|.
    pub fn integrate_rational(&self, mut f: impl FnMut(usize) -> Rational64) -> Rational64 {
        let total: Rational64 = (0..self.size).map(&mut f).sum();
        total / Rational64::from_integer(self.group.order as i64)
    }

    pub fn integrate_complex(&self, mut f: impl FnMut(usize) -> Complex64) -> Complex64 {
        let total: Complex64 = (0..self.size).map(&mut f).sum();
        total / self.group.order as f64
    }
}

/// Object label of an iterated loop groupoid over an action groupoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopPoint {
    /// (x, g) with g·x = x.
    One { x: usize, g: usize },
    /// (x, g, h) with g·x = h·x = x and gh = hg.
    Two { x: usize, g: usize, h: usize },
}

impl LoopPoint {
    pub fn x(&self) -> usize {
        match *self {
            LoopPoint::One { x, .. } | LoopPoint::Two { x, .. } => x,
        }
    }
}

/// The objects form a G-set in their own right (conjugation arrows), so a
/// loop groupoid is carried by `points` plus the tuple labels.
#[derive(Debug, Clone)]
pub struct LoopGroupoid {
    pub level: u8,
    pub base: Arc<GSet>,
    pub points: Arc<GSet>,
    /// labels[i] is the tuple for point i, in lexicographic order.
    pub labels: Vec<LoopPoint>,
}

impl LoopGroupoid {
    pub fn object_count(&self) -> usize {
        self.points.size
    }

    pub fn integrate_rational(&self, f: impl FnMut(usize) -> Rational64) -> Rational64 {
        self.points.integrate_rational(f)
    }

    pub fn integrate_complex(&self, f: impl FnMut(usize) -> Complex64) -> Complex64 {
        self.points.integrate_complex(f)
    }

    pub fn index_of(&self, label: &LoopPoint) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }
}

pub fn build_gset(group: Arc<FiniteGroup>, spec: &GSetSpec) -> Result<GSet, GSpaceError> {
    let act = match spec {
        GSetSpec::Point => vec![vec![0usize]; group.order],
        GSetSpec::Regular => group.mult.clone(),
        GSetSpec::Coset(h) => coset_action(&group, h)?,
        GSetSpec::Union(a, b) => {
            let ga = build_gset(group.clone(), a)?;
            let gb = build_gset(group.clone(), b)?;
            return union_gsets(&ga, &gb);
        }
        GSetSpec::Product(a, b) => {
            let ga = build_gset(group.clone(), a)?;
            let gb = build_gset(group.clone(), b)?;
            return product_gsets(&ga, &gb);
        }
        GSetSpec::Table(act) => act.clone(),
    };
    validate_gset(group, act)
}

pub fn validate_gset(group: Arc<FiniteGroup>, act: Vec<Vec<usize>>) -> Result<GSet, GSpaceError> {
    if act.len() != group.order {
        return Err(GSpaceError::BadTableShape);
    }
    let size = act.first().map_or(0, |row| row.len());
    if act.iter().any(|row| row.len() != size) {
        return Err(GSpaceError::BadTableShape);
    }
    for (g, row) in act.iter().enumerate() {
        for (x, &value) in row.iter().enumerate() {
            if value >= size {
                return Err(GSpaceError::EntryOutOfRange { g, x, value });
            }
        }
    }
    for x in 0..size {
        if act[0][x] != x {
            return Err(GSpaceError::IdentityMoves { x });
        }
    }
    for g in 0..group.order {
        for h in 0..group.order {
            let gh = group.mul(g, h);
            for x in 0..size {
                if act[g][act[h][x]] != act[gh][x] {
                    return Err(GSpaceError::NotAnAction { g, h, x });
                }
            }
        }
    }
    let mut orbit_of = vec![usize::MAX; size];
    let mut orbits = Vec::new();
    for x in 0..size {
        if orbit_of[x] != usize::MAX {
            continue;
        }
        let mut orbit: Vec<usize> = (0..group.order).map(|g| act[g][x]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        let idx = orbits.len();
        for &y in &orbit {
            orbit_of[y] = idx;
        }
        orbits.push(orbit);
    }
    let stabilizers: Vec<Vec<usize>> = (0..size)
        .map(|x| (0..group.order).filter(|&g| act[g][x] == x).collect())
        .collect();
    Ok(GSet {
        group,
        size,
        act,
        orbits,
        orbit_of,
        stabilizers,
    })
}

fn coset_action(group: &FiniteGroup, h: &[usize]) -> Result<Vec<Vec<usize>>, GSpaceError> {
    if !group.is_subgroup(h) {
        return Err(GSpaceError::NotASubgroup);
    }
    // Cosets gH as sorted element lists, ordered by minimal element.
    let mut coset_of = vec![usize::MAX; group.order];
    let mut reps = Vec::new();
    for g in 0..group.order {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        for &k in h {
            coset_of[group.mul(g, k)] = idx;
        }
        reps.push(g);
    }
    Ok((0..group.order)
        .map(|g| reps.iter().map(|&r| coset_of[group.mul(g, r)]).collect())
        .collect())
}

fn same_group(a: &GSet, b: &GSet) -> bool {
    Arc::ptr_eq(&a.group, &b.group) || a.group.mult == b.group.mult
}

pub fn union_gsets(a: &GSet, b: &GSet) -> Result<GSet, GSpaceError> {
    if !same_group(a, b) {
        return Err(GSpaceError::GroupMismatch);
    }
    let act = (0..a.group.order)
        .map(|g| {
            a.act[g]
                .iter()
                .copied()
                .chain(b.act[g].iter().map(|&y| y + a.size))
                .collect()
        })
        .collect();
    validate_gset(a.group.clone(), act)
}

/// Diagonal action on pairs; (x,y) gets index x·|Y| + y.
pub fn product_gsets(a: &GSet, b: &GSet) -> Result<GSet, GSpaceError> {
    if !same_group(a, b) {
        return Err(GSpaceError::GroupMismatch);
    }
    let act = (0..a.group.order)
        .map(|g| {
            (0..a.size * b.size)
                .map(|p| a.act[g][p / b.size] * b.size + b.act[g][p % b.size])
                .collect()
        })
        .collect();
    validate_gset(a.group.clone(), act)
}

pub fn loop_groupoid(base: &Arc<GSet>, level: u8) -> Result<LoopGroupoid, GSpaceError> {
    assert!(level == 1 || level == 2, "level must be 1 or 2");
    let group = &base.group;
    let mut labels = Vec::new();
    for x in 0..base.size {
        for &g in &base.stabilizers[x] {
            match level {
                1 => labels.push(LoopPoint::One { x, g }),
                _ => {
                    for &h in &base.stabilizers[x] {
                        if group.commute(g, h) {
                            labels.push(LoopPoint::Two { x, g, h });
                        }
                    }
                }
            }
            if labels.len() > MAX_LOOP_OBJECTS {
                return Err(GSpaceError::TooManyObjects);
            }
        }
    }
    debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
    let act: Vec<Vec<usize>> = (0..group.order)
        .map(|k| {
            labels
                .iter()
                .map(|label| {
                    let image = match *label {
                        LoopPoint::One { x, g } => LoopPoint::One {
                            x: base.apply(k, x),
                            g: group.conj(k, g),
                        },
                        LoopPoint::Two { x, g, h } => LoopPoint::Two {
                            x: base.apply(k, x),
                            g: group.conj(k, g),
                            h: group.conj(k, h),
                        },
                    };
                    labels.binary_search(&image).expect("conjugation permutes loop objects")
                })
                .collect()
        })
        .collect();
    let points = Arc::new(validate_gset(group.clone(), act)?);
    Ok(LoopGroupoid {
        level,
        base: base.clone(),
        points,
        labels,
    })
}

/// Structural identity of carriers, used to guard cross-cochain operations.
pub fn same_gset(a: &GSet, b: &GSet) -> bool {
    (Arc::ptr_eq(&a.group, &b.group) || a.group.mult == b.group.mult) && a.act == b.act
}

/// gset.json payload.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GSetFile {
    Builtin {
        builtin: String,
        group: serde_json::Value,
        #[serde(default)]
        subgroup: Option<Vec<usize>>,
        #[serde(default)]
        parts: Option<Vec<serde_json::Value>>,
    },
    Table {
        group: serde_json::Value,
        size: usize,
        act: Vec<Vec<usize>>,
    },
}

pub fn build_gset_from_json(text: &str) -> Result<GSet, String> {
    let file: GSetFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    gset_from_file(&file)
}

fn gset_from_file(file: &GSetFile) -> Result<GSet, String> {
    match file {
        GSetFile::Table { group, size, act } => {
            let group = Arc::new(build_group_from_json(&group.to_string())?);
            if act.first().map_or(0, |r| r.len()) != *size {
                return Err("size field does not match act table".to_string());
            }
            validate_gset(group, act.clone()).map_err(|e| e.to_string())
        }
        GSetFile::Builtin {
            builtin,
            group,
            subgroup,
            parts,
        } => {
            let group = Arc::new(build_group_from_json(&group.to_string())?);
            match builtin.as_str() {
                "point" => build_gset(group, &GSetSpec::Point).map_err(|e| e.to_string()),
                "regular" => build_gset(group, &GSetSpec::Regular).map_err(|e| e.to_string()),
                "coset" => {
                    let h = subgroup.clone().ok_or("coset needs a subgroup field")?;
                    build_gset(group, &GSetSpec::Coset(h)).map_err(|e| e.to_string())
                }
                "union" | "product" => {
                    let parts = parts.as_ref().ok_or("union/product needs parts")?;
                    if parts.len() != 2 {
                        return Err("union/product needs exactly two parts".to_string());
                    }
                    let parse = |v: &serde_json::Value| -> Result<GSet, String> {
                        let nested: GSetFile =
                            serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
                        gset_from_file(&nested)
                    };
                    let a = parse(&parts[0])?;
                    let b = parse(&parts[1])?;
                    let combined = if builtin == "union" {
                        union_gsets(&a, &b)
                    } else {
                        product_gsets(&a, &b)
                    };
                    combined.map_err(|e| e.to_string())
                }
                other => Err(format!("unknown builtin {other:?}")),
            }
        }
    }
}
