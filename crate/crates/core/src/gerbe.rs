//! Equivariant gerbes: a G-set carrying a normalized 2-cocycle and a
//! G-invariant positive rational metric.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cochain::{
    check_cocycle, coboundary, cohomologous, Cochain, CochainError, CocycleViolation,
    CohomologyVerdict,
};
use crate::grp::FiniteGroup;
use crate::gspace::{build_gset, product_gsets, same_gset, GSet, GSetSpec, GSpaceError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GerbeError {
    #[error("cocycle must have degree 2")]
    BadDegree,
    #[error("cocycle carrier differs from the supplied G-set")]
    CarrierMismatch,
    #[error("cocycle fails: {0:?}")]
    Cocycle(CocycleViolation),
    #[error("metric must list one value per point")]
    BadMetricLength,
    #[error("metric at point {x} is not positive")]
    NonPositiveMetric { x: usize },
    #[error("metric is not G-invariant: k_{{{g}·{x}}} ≠ k_{x}")]
    NonInvariantMetric { x: usize, g: usize },
    #[error("gerbes live over different groups")]
    GroupMismatch,
    #[error(transparent)]
    Space(#[from] GSpaceError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

#[derive(Debug, Clone)]
pub struct Gerbe {
    pub gset: Arc<GSet>,
    pub cocycle: Cochain,
    /// k_x per point; positive and constant on orbits.
    pub metric: Vec<Rational64>,
}

impl Gerbe {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.gset.group
    }

    pub fn size(&self) -> usize {
        self.gset.size
    }
}

pub fn make_gerbe(
    gset: Arc<GSet>,
    cocycle: Cochain,
    metric: Vec<Rational64>,
) -> Result<Gerbe, GerbeError> {
    if cocycle.degree != 2 {
        return Err(GerbeError::BadDegree);
    }
    if !same_gset(&gset, &cocycle.carrier) {
        return Err(GerbeError::CarrierMismatch);
    }
    check_cocycle(&cocycle).map_err(GerbeError::Cocycle)?;
    if metric.len() != gset.size {
        return Err(GerbeError::BadMetricLength);
    }
    for (x, k) in metric.iter().enumerate() {
        if !k.is_positive() {
            return Err(GerbeError::NonPositiveMetric { x });
        }
    }
    for g in 0..gset.group.order {
        for x in 0..gset.size {
            if metric[gset.apply(g, x)] != metric[x] {
                return Err(GerbeError::NonInvariantMetric { x, g });
            }
        }
    }
    Ok(Gerbe {
        gset,
        cocycle,
        metric,
    })
}

/// Free G-set underlying the group itself, zero cocycle, unit metric.
pub fn regular_gerbe(group: Arc<FiniteGroup>) -> Gerbe {
    let gset = Arc::new(build_gset(group, &GSetSpec::Regular).expect("regular action is valid"));
    let cocycle = Cochain::zero(gset.clone(), 2);
    let metric = vec![Rational64::from_integer(1); gset.size];
    Gerbe {
        gset,
        cocycle,
        metric,
    }
}

/// One-point G-set, zero cocycle, unit metric.
pub fn trivial_point_gerbe(group: Arc<FiniteGroup>) -> Gerbe {
    let gset = Arc::new(build_gset(group, &GSetSpec::Point).expect("point action is valid"));
    let cocycle = Cochain::zero(gset.clone(), 2);
    Gerbe {
        gset,
        cocycle,
        metric: vec![Rational64::from_integer(1)],
    }
}

/// Product gerbe over Y×X with the diagonal action: cocycle c_Y ± c_X,
/// metric k_y·k_x. `conjugate_second` negates the second cocycle, giving
/// the carrier on which morphisms X → Y live.
pub fn tensor(y: &Gerbe, x: &Gerbe, conjugate_second: bool) -> Result<Gerbe, GerbeError> {
    let gset = Arc::new(product_gsets(&y.gset, &x.gset)?);
    let xs = x.gset.size;
    let cocycle = Cochain::from_fn_deg2(gset.clone(), |p, g2, g1| {
        let cy = y.cocycle.at2(p / xs, g2, g1);
        let cx = x.cocycle.at2(p % xs, g2, g1);
        if conjugate_second {
            cy - cx
        } else {
            cy + cx
        }
    });
    let metric = (0..gset.size)
        .map(|p| y.metric[p / xs] * x.metric[p % xs])
        .collect();
    Ok(Gerbe {
        gset,
        cocycle,
        metric,
    })
}

/// Equivalence data: an equivariant metric-preserving bijection f: X → Y
/// together with γ on X satisfying dγ = f*c_Y − c_X.
#[derive(Debug, Clone)]
pub struct EquivWitness {
    pub point_map: Vec<usize>,
    pub gamma: Cochain,
}

pub fn verify_equiv_witness(x: &Gerbe, y: &Gerbe, w: &EquivWitness) -> bool {
    let f = &w.point_map;
    if f.len() != x.size() || y.size() != x.size() {
        return false;
    }
    let mut seen = vec![false; y.size()];
    for &img in f {
        if img >= y.size() || seen[img] {
            return false;
        }
        seen[img] = true;
    }
    let equivariant = (0..x.gset.group.order)
        .all(|g| (0..x.size()).all(|p| f[x.gset.apply(g, p)] == y.gset.apply(g, f[p])));
    let isometric = (0..x.size()).all(|p| y.metric[f[p]] == x.metric[p]);
    let pulled = pullback(x, y, f);
    let diff = match pulled.sub(&x.cocycle) {
        Ok(d) => d,
        Err(_) => return false,
    };
    let db = match coboundary(&w.gamma) {
        Ok(d) => d,
        Err(_) => return false,
    };
    equivariant && isometric && db.sub(&diff).map(|z| z.is_zero()).unwrap_or(false)
}

fn pullback(x: &Gerbe, y: &Gerbe, f: &[usize]) -> Cochain {
    Cochain::from_fn_deg2(x.gset.clone(), |p, g2, g1| y.cocycle.at2(f[p], g2, g1))
}

/// Search for an isometric equivalence. Candidate maps are generated by
/// matching orbits (backtracking in index order, orbit representatives to
/// smallest-index compatible images first), so the first success is
/// canonical; each candidate is then tested with `cohomologous`.
pub fn isometric_equivalent(x: &Gerbe, y: &Gerbe) -> Result<Option<EquivWitness>, GerbeError> {
    if x.gset.group.mult != y.gset.group.mult {
        return Err(GerbeError::GroupMismatch);
    }
    if x.size() != y.size() || x.gset.orbits.len() != y.gset.orbits.len() {
        return Ok(None);
    }
    let mut used = vec![false; y.gset.orbits.len()];
    let mut point_map = vec![usize::MAX; x.size()];
    let mut found: Option<EquivWitness> = None;
    search_orbit(x, y, 0, &mut used, &mut point_map, &mut found)?;
    Ok(found)
}

fn search_orbit(
    x: &Gerbe,
    y: &Gerbe,
    orbit_idx: usize,
    used: &mut Vec<bool>,
    point_map: &mut Vec<usize>,
    found: &mut Option<EquivWitness>,
) -> Result<(), GerbeError> {
    if found.is_some() {
        return Ok(());
    }
    if orbit_idx == x.gset.orbits.len() {
        let f: Vec<usize> = point_map.clone();
        let pulled = pullback(x, y, &f);
        if let CohomologyVerdict::Witness(gamma) = cohomologous(&x.cocycle, &pulled)? {
            *found = Some(EquivWitness {
                point_map: f,
                gamma,
            });
        }
        return Ok(());
    }
    let orbit = &x.gset.orbits[orbit_idx];
    let rep = orbit[0];
    let rep_stab = &x.gset.stabilizers[rep];
    for (yo_idx, yo) in y.gset.orbits.iter().enumerate() {
        if used[yo_idx] || yo.len() != orbit.len() {
            continue;
        }
        for &target in yo {
            if y.metric[target] != x.metric[rep] {
                continue;
            }
            // f(g·rep) = g·target is well defined iff stab(rep) fixes target.
            if !rep_stab.iter().all(|&s| y.gset.apply(s, target) == target) {
                continue;
            }
            for g in 0..x.gset.group.order {
                point_map[x.gset.apply(g, rep)] = y.gset.apply(g, target);
            }
            used[yo_idx] = true;
            search_orbit(x, y, orbit_idx + 1, used, point_map, found)?;
            used[yo_idx] = false;
            if found.is_some() {
                return Ok(());
            }
        }
    }
    for &p in orbit {
        point_map[p] = usize::MAX;
    }
    Ok(())
}

/// gerbe.json payload. The cocycle may be a full cocycle object (its gset is
/// then checked against this one), a bare {degree, entries} table, or
/// omitted for the zero cocycle.
#[derive(Debug, Serialize, Deserialize)]
pub struct GerbeFile {
    pub gset: serde_json::Value,
    #[serde(default)]
    pub cocycle: Option<serde_json::Value>,
    pub metric: Vec<String>,
}

pub fn gerbe_from_json(text: &str) -> Result<Gerbe, String> {
    let file: GerbeFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let gset = Arc::new(crate::gspace::build_gset_from_json(&file.gset.to_string())?);
    let cocycle = match &file.cocycle {
        None => Cochain::zero(gset.clone(), 2),
        Some(value) => {
            let obj = value.as_object().ok_or("cocycle must be an object")?;
            if obj.contains_key("gset") {
                let c = crate::cochain::cochain_from_json(&value.to_string())?;
                if !same_gset(&c.carrier, &gset) {
                    return Err("cocycle gset differs from gerbe gset".to_string());
                }
                c
            } else {
                let degree = obj
                    .get("degree")
                    .and_then(|d| d.as_u64())
                    .ok_or("cocycle needs a degree")? as u8;
                let entries = obj
                    .get("entries")
                    .and_then(|e| e.as_array())
                    .ok_or("cocycle needs entries")?;
                let values = entries
                    .iter()
                    .map(|e| {
                        e.as_str()
                            .ok_or_else(|| "entries must be strings".to_string())
                            .and_then(crate::cochain::Phase::parse)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Cochain::from_values(gset.clone(), degree, values).map_err(|e| e.to_string())?
            }
        }
    };
    let metric = file
        .metric
        .iter()
        .map(|s| s.parse::<Rational64>().map_err(|e| format!("bad metric {s:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    make_gerbe(gset, cocycle, metric).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{klein_pairing_cocycle, Phase};
    use crate::grp::{build_group, GroupSpec};
    use rand::{Rng, SeedableRng};

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(build_group(&GroupSpec::Symmetric(3)).unwrap())
    }

    fn klein() -> Arc<FiniteGroup> {
        Arc::new(
            build_group(&GroupSpec::Product(
                Box::new(GroupSpec::Cyclic(2)),
                Box::new(GroupSpec::Cyclic(2)),
            ))
            .unwrap(),
        )
    }

    fn klein_gerbe() -> Gerbe {
        let gset = Arc::new(build_gset(klein(), &GSetSpec::Point).unwrap());
        let c = klein_pairing_cocycle(gset.clone());
        make_gerbe(gset, c, vec![Rational64::from_integer(1)]).unwrap()
    }

    fn one(n: usize) -> Vec<Rational64> {
        vec![Rational64::from_integer(1); n]
    }

    #[test]
    fn regular_gerbe_shape() {
        let g = regular_gerbe(s3());
        assert_eq!(g.size(), 6);
        assert!(g.cocycle.is_zero());
        assert!(g.metric.iter().all(|k| *k == Rational64::from_integer(1)));
    }

    #[test]
    fn klein_point_gerbe_is_valid() {
        let g = klein_gerbe();
        assert_eq!(g.size(), 1);
    }

    #[test]
    fn non_invariant_metric_rejected() {
        let gset = Arc::new(build_gset(s3(), &GSetSpec::Coset(vec![0, 3, 4])).unwrap());
        let c = Cochain::zero(gset.clone(), 2);
        let err = make_gerbe(
            gset,
            c,
            vec![Rational64::from_integer(1), Rational64::from_integer(2)],
        )
        .unwrap_err();
        assert!(matches!(err, GerbeError::NonInvariantMetric { .. }));
    }

    #[test]
    fn non_positive_metric_rejected() {
        let gset = Arc::new(build_gset(s3(), &GSetSpec::Point).unwrap());
        let c = Cochain::zero(gset.clone(), 2);
        let err = make_gerbe(gset, c, vec![Rational64::from_integer(0)]).unwrap_err();
        assert_eq!(err, GerbeError::NonPositiveMetric { x: 0 });
    }

    #[test]
    fn tensor_metrics_multiply() {
        let gset = Arc::new(build_gset(s3(), &GSetSpec::Coset(vec![0, 3, 4])).unwrap());
        let c = Cochain::zero(gset.clone(), 2);
        let x = make_gerbe(gset, c, vec![Rational64::new(2, 3), Rational64::new(2, 3)]).unwrap();
        let t = tensor(&x, &x, false).unwrap();
        assert!(t.metric.iter().all(|k| *k == Rational64::new(4, 9)));
    }

    #[test]
    fn tensor_with_regular_trivializes_cocycle() {
        let x = klein_gerbe();
        let reg = regular_gerbe(klein());
        let t = tensor(&x, &reg, false).unwrap();
        // The product action is free, so the class must die.
        let zero = Cochain::zero(t.gset.clone(), 2);
        let verdict = cohomologous(&zero, &t.cocycle).unwrap();
        assert!(verdict.is_witness());
    }

    #[test]
    fn conjugate_tensor_cancels_on_diagonal() {
        let x = klein_gerbe();
        let t = tensor(&x, &x, true).unwrap();
        assert!(t.cocycle.is_zero());
    }

    #[test]
    fn self_equivalence_identity_witness() {
        let x = klein_gerbe();
        let w = isometric_equivalent(&x, &x).unwrap().expect("X ~ X");
        assert_eq!(w.point_map, vec![0]);
        assert!(verify_equiv_witness(&x, &x, &w));
    }

    #[test]
    fn twist_by_coboundary_is_equivalent() {
        let x = klein_gerbe();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut gamma = Cochain::from_fn_deg1(x.gset.clone(), |_, _| {
            Phase::from_frac(rng.random_range(0..4), 4)
        });
        gamma.values[0] = Phase::ZERO;
        let twisted_c = x.cocycle.add(&coboundary(&gamma).unwrap()).unwrap();
        let y = make_gerbe(x.gset.clone(), twisted_c, x.metric.clone()).unwrap();
        let w = isometric_equivalent(&x, &y).unwrap().expect("X ~ X+dγ");
        assert!(verify_equiv_witness(&x, &y, &w));
        let back = isometric_equivalent(&y, &x).unwrap().expect("symmetry");
        assert!(verify_equiv_witness(&y, &x, &back));
    }

    #[test]
    fn schur_point_vs_trivial_point_distinct() {
        let x = klein_gerbe();
        let y = trivial_point_gerbe(klein());
        assert!(isometric_equivalent(&x, &y).unwrap().is_none());
    }

    #[test]
    fn tensor_with_point_is_identity_up_to_relabel() {
        let x = klein_gerbe();
        let pt = trivial_point_gerbe(klein());
        let t = tensor(&x, &pt, false).unwrap();
        let w = isometric_equivalent(&t, &x).unwrap().expect("X⊗pt ~ X");
        assert!(verify_equiv_witness(&t, &x, &w));
    }

    #[test]
    fn different_metrics_are_inequivalent() {
        let gset = Arc::new(build_gset(s3(), &GSetSpec::Point).unwrap());
        let a = make_gerbe(gset.clone(), Cochain::zero(gset.clone(), 2), one(1)).unwrap();
        let b = make_gerbe(
            gset.clone(),
            Cochain::zero(gset.clone(), 2),
            vec![Rational64::new(1, 2)],
        )
        .unwrap();
        assert!(isometric_equivalent(&a, &b).unwrap().is_none());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "gset": {"builtin":"point","group":{"builtin":"product","params":[{"builtin":"cyclic","params":[2]},{"builtin":"cyclic","params":[2]}]}},
            "cocycle": {"degree":2,"entries":[
                "0","0","0","0",
                "0","0","0","0",
                "0","1/2","0","1/2",
                "0","1/2","0","1/2"]},
            "metric": ["1"]
        }"#;
        let g = gerbe_from_json(text).unwrap();
        assert_eq!(g.size(), 1);
        assert_eq!(g.cocycle.at2(0, 2, 1), Phase::from_frac(1, 2));
    }
}
