//! Field groupoids for torus backgrounds: commuting tuples of group elements
//! under simultaneous conjugation, packaged as G-sets.  Crossing with the
//! circle is verified by comparing two independently computed sides: in
//! degree 1 the exact integral of the transgressed twist over the loop
//! groupoid against the flat-section dimension downstairs, in degree 2 the
//! flat-section dimension over the loop groupoid against the number of
//! irreducible twisted bundles.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

use crate::bundle::{flat_section_dim, irreducible_bundles, BundleError, DEFAULT_TOL};
use crate::cochain::{check_cocycle, transgress, Cochain, CochainError};
use crate::cyclotomic::weighted_phase_sum_integer;
use crate::gerbe::{make_gerbe, GerbeError};
use crate::grp::FiniteGroup;
use crate::gspace::{loop_groupoid, same_gset, validate_gset, GSet, GSpaceError};

/// Commuting-triple enumeration is cubic in the order; larger groups belong
/// to the catalog of smaller tori.
pub const MAX_TRIPLE_GROUP: usize = 24;

#[derive(Debug, Error)]
pub enum TqftError {
    #[error("torus dimension must be 1, 2, or 3, got {0}")]
    BadTorusDim(u8),
    #[error("group order {0} exceeds {MAX_TRIPLE_GROUP}, too large for commuting triples")]
    GroupTooLarge(usize),
    #[error("twist degree must be 1 or 2, got {0}")]
    BadDegree(u8),
    #[error("twist must live on the action groupoid of the given fields")]
    CarrierMismatch,
    #[error("transgression integral is not an integer")]
    IrrationalIntegral,
    #[error(transparent)]
    Space(#[from] GSpaceError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
}

/// Fields on an n-torus valued in a finite group: n-tuples of pairwise
/// commuting elements, carried by the simultaneous-conjugation G-set.
#[derive(Debug, Clone)]
pub struct FieldGroupoid {
    pub n: u8,
    pub points: Arc<GSet>,
    /// labels[i] is the tuple at point i, lexicographically ordered.
    pub labels: Vec<Vec<usize>>,
}

pub fn torus_fields(group: Arc<FiniteGroup>, n: u8) -> Result<FieldGroupoid, TqftError> {
    if !(1..=3).contains(&n) {
        return Err(TqftError::BadTorusDim(n));
    }
    if n == 3 && group.order > MAX_TRIPLE_GROUP {
        return Err(TqftError::GroupTooLarge(group.order));
    }
    let mut labels: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for tuple in &labels {
            for g in 0..group.order {
                if tuple.iter().all(|&h| group.commute(h, g)) {
                    let mut longer = tuple.clone();
                    longer.push(g);
                    next.push(longer);
                }
            }
        }
        labels = next;
    }
    let act: Vec<Vec<usize>> = (0..group.order)
        .map(|k| {
            labels
                .iter()
                .map(|tuple| {
                    let image: Vec<usize> = tuple.iter().map(|&g| group.conj(k, g)).collect();
                    labels
                        .binary_search(&image)
                        .expect("conjugation permutes commuting tuples")
                })
                .collect()
        })
        .collect();
    let points = Arc::new(validate_gset(group.clone(), act)?);
    Ok(FieldGroupoid { n, points, labels })
}

/// Groupoid cardinality of the fields on the n-torus: commuting n-tuples
/// divided by the group order.  For n = 3 this counts the simple objects
/// of the fusion double.
pub fn torus_partition(group: Arc<FiniteGroup>, n: u8) -> Result<Rational64, TqftError> {
    let fields = torus_fields(group, n)?;
    Ok(Rational64::new(
        fields.points.size as i64,
        fields.points.group.order as i64,
    ))
}

/// Two-sided comparison for one circle crossing.  In degree 1, `lhs` is the
/// exact integral of the transgressed twist over the loop groupoid and
/// `rhs` the flat-section dimension downstairs; in degree 2, `lhs` is the
/// flat-section dimension over the loop groupoid and `rhs` the number of
/// irreducible twisted bundles.
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub degree: u8,
    pub lhs: Rational64,
    pub rhs: Rational64,
    pub pass: bool,
}

pub fn verify_crossing(
    fields: &Arc<GSet>,
    omega: &Cochain,
    seed: u64,
) -> Result<CrossingReport, TqftError> {
    if !same_gset(&omega.carrier, fields) {
        return Err(TqftError::CarrierMismatch);
    }
    check_cocycle(omega).map_err(CochainError::NotACocycle)?;
    match omega.degree {
        1 => {
            let lam = loop_groupoid(fields, 1)?;
            let tau = transgress(omega, &lam)?;
            let mut counts: BTreeMap<_, i64> = BTreeMap::new();
            for i in 0..lam.points.size {
                *counts.entry(tau.at0(i)).or_insert(0) += 1;
            }
            let total =
                weighted_phase_sum_integer(&counts).ok_or(TqftError::IrrationalIntegral)?;
            let lhs = Rational64::new(total, fields.group.order as i64);

            // An orbit contributes a flat section iff the twist restricts
            // trivially to the automorphisms of its representative.
            let flat = fields
                .orbits
                .iter()
                .filter(|orbit| {
                    let rep = orbit[0];
                    fields.stabilizers[rep].iter().all(|&h| omega.at1(rep, h).is_zero())
                })
                .count();
            let rhs = Rational64::from_integer(flat as i64);
            Ok(CrossingReport { degree: 1, lhs, rhs, pass: lhs == rhs })
        }
        2 => {
            let lam = loop_groupoid(fields, 1)?;
            let tau = transgress(omega, &lam)?;
            let lhs = flat_section_dim(&lam, &tau)?;

            let metric = vec![Rational64::from_integer(1); fields.size];
            let gerbe = Arc::new(make_gerbe(fields.clone(), omega.clone(), metric)?);
            let rhs = irreducible_bundles(&gerbe, seed, DEFAULT_TOL)?.len();
            Ok(CrossingReport {
                degree: 2,
                lhs: Rational64::from_integer(lhs as i64),
                rhs: Rational64::from_integer(rhs as i64),
                pass: lhs == rhs,
            })
        }
        d => Err(TqftError::BadDegree(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{coboundary, klein_pairing_cocycle, Phase};
    use crate::double::simples;
    use crate::grp::{build_group, GroupSpec};
    use crate::gspace::{build_gset, GSetSpec};

    fn arc_group(spec: &GroupSpec) -> Arc<FiniteGroup> {
        Arc::new(build_group(spec).unwrap())
    }

    fn s3() -> Arc<FiniteGroup> {
        arc_group(&GroupSpec::Symmetric(3))
    }

    fn klein() -> Arc<FiniteGroup> {
        arc_group(&GroupSpec::Product(
            Box::new(GroupSpec::Cyclic(2)),
            Box::new(GroupSpec::Cyclic(2)),
        ))
    }

    #[test]
    fn commuting_tuple_counts_match() {
        for (n, count) in [(1, 6), (2, 18), (3, 48)] {
            assert_eq!(torus_fields(s3(), n).unwrap().points.size, count);
        }
        let z4 = arc_group(&GroupSpec::Cyclic(4));
        for (n, count) in [(1, 4), (2, 16), (3, 64)] {
            assert_eq!(torus_fields(z4.clone(), n).unwrap().points.size, count);
        }
        let q8 = arc_group(&GroupSpec::Quaternion);
        assert_eq!(torus_fields(q8, 3).unwrap().points.size, 176);
    }

    #[test]
    fn labels_are_sorted_commuting_tuples() {
        let fields = torus_fields(s3(), 3).unwrap();
        assert!(fields.labels.windows(2).all(|w| w[0] < w[1]));
        let group = &fields.points.group;
        for tuple in &fields.labels {
            for a in 0..tuple.len() {
                for b in a + 1..tuple.len() {
                    assert!(group.commute(tuple[a], tuple[b]));
                }
            }
        }
    }

    #[test]
    fn loops_of_fields_count_the_next_torus() {
        for spec in [GroupSpec::Symmetric(3), GroupSpec::Dihedral(4)] {
            let group = arc_group(&spec);
            for n in 1..=2u8 {
                let here = torus_fields(group.clone(), n).unwrap();
                let lam = loop_groupoid(&here.points, 1).unwrap();
                let next = torus_fields(group.clone(), n + 1).unwrap();
                assert_eq!(lam.object_count(), next.points.size);
            }
        }
    }

    #[test]
    fn untwisted_degree_one_counts_classes() {
        let fields = torus_fields(s3(), 1).unwrap();
        let omega = Cochain::zero(fields.points.clone(), 1);
        let report = verify_crossing(&fields.points, &omega, 0).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, Rational64::from_integer(3));
        assert_eq!(report.rhs, Rational64::from_integer(3));
    }

    /// Parity character of a permutation group read off element orders.
    fn parity_twist(points: &Arc<GSet>) -> Cochain {
        let group = points.group.clone();
        let odd: Vec<bool> = (0..group.order)
            .map(|g| {
                let mut k = 1;
                let mut p = g;
                while p != 0 {
                    p = group.mul(g, p);
                    k += 1;
                }
                k == 2
            })
            .collect();
        Cochain::from_fn_deg1(points.clone(), |_, g| Phase::from_frac(i64::from(odd[g]), 2))
    }

    #[test]
    fn sign_twist_degree_one_keeps_only_even_stabilizers() {
        let fields = torus_fields(s3(), 1).unwrap();
        let omega = parity_twist(&fields.points);
        let report = verify_crossing(&fields.points, &omega, 0).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, Rational64::from_integer(1));
        assert_eq!(report.rhs, Rational64::from_integer(1));

        // Shifting by a coboundary moves neither side.
        let gamma = Cochain::from_values(
            fields.points.clone(),
            0,
            (0..fields.points.size).map(|x| Phase::from_frac(x as i64, 8)).collect(),
        )
        .unwrap();
        let shifted = omega.add(&coboundary(&gamma).unwrap()).unwrap();
        let again = verify_crossing(&fields.points, &shifted, 0).unwrap();
        assert!(again.pass);
        assert_eq!(again.lhs, report.lhs);
        assert_eq!(again.rhs, report.rhs);
    }

    #[test]
    fn degree_two_point_cases_match_bundle_counts() {
        let pt = Arc::new(build_gset(klein(), &GSetSpec::Point).unwrap());
        let zero = Cochain::zero(pt.clone(), 2);
        let plain = verify_crossing(&pt, &zero, 0).unwrap();
        assert!(plain.pass);
        assert_eq!(plain.lhs, Rational64::from_integer(4));

        let schur = klein_pairing_cocycle(pt.clone());
        let twisted = verify_crossing(&pt, &schur, 0).unwrap();
        assert!(twisted.pass);
        assert_eq!(twisted.lhs, Rational64::from_integer(1));
        assert_eq!(twisted.rhs, Rational64::from_integer(1));

        let gamma = Cochain::from_fn_deg1(pt.clone(), |_, g| Phase::from_frac(g as i64, 4));
        let shifted = schur.add(&coboundary(&gamma).unwrap()).unwrap();
        let again = verify_crossing(&pt, &shifted, 0).unwrap();
        assert!(again.pass);
        assert_eq!(again.lhs, twisted.lhs);
        assert_eq!(again.rhs, twisted.rhs);
    }

    #[test]
    fn degree_two_over_conjugation_fields_counts_double_simples() {
        let fields = torus_fields(s3(), 1).unwrap();
        let zero = Cochain::zero(fields.points.clone(), 2);
        let report = verify_crossing(&fields.points, &zero, 0).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, Rational64::from_integer(8));
        assert_eq!(report.rhs, Rational64::from_integer(8));
    }

    #[test]
    fn torus_partition_counts_double_simples() {
        assert_eq!(torus_partition(s3(), 3).unwrap(), Rational64::from_integer(8));
        assert_eq!(simples(&s3(), 0).unwrap().len(), 8);
        let z2 = arc_group(&GroupSpec::Cyclic(2));
        assert_eq!(torus_partition(z2, 3).unwrap(), Rational64::from_integer(4));
        let q8 = arc_group(&GroupSpec::Quaternion);
        assert_eq!(torus_partition(q8.clone(), 3).unwrap(), Rational64::from_integer(22));
        assert_eq!(simples(&q8, 0).unwrap().len(), 22);
    }

    #[test]
    fn bounds_and_degrees_are_enforced() {
        assert!(matches!(torus_fields(s3(), 0), Err(TqftError::BadTorusDim(0))));
        assert!(matches!(torus_fields(s3(), 4), Err(TqftError::BadTorusDim(4))));
        let big = arc_group(&GroupSpec::Product(
            Box::new(GroupSpec::Quaternion),
            Box::new(GroupSpec::Cyclic(4)),
        ));
        assert!(matches!(torus_fields(big, 3), Err(TqftError::GroupTooLarge(32))));

        let fields = torus_fields(s3(), 1).unwrap();
        let zero0 = Cochain::zero(fields.points.clone(), 0);
        assert!(matches!(
            verify_crossing(&fields.points, &zero0, 0),
            Err(TqftError::BadDegree(0))
        ));
        let other = Arc::new(build_gset(s3(), &GSetSpec::Point).unwrap());
        let mismatched = Cochain::zero(other, 1);
        assert!(matches!(
            verify_crossing(&fields.points, &mismatched, 0),
            Err(TqftError::CarrierMismatch)
        ));
    }
}
