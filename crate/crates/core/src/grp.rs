//! Finite groups as multiplication tables.
//!
//! Elements are dense indices `0..order`, the identity is always index 0.
//! Multiplication `mult[g][h]` means "g after h": for permutation groups
//! `(g * h)(x) = g(h(x))`.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exhaustive associativity scan is affordable up to this order; larger
/// tables get a seeded sample of the same size.
const EXHAUSTIVE_ASSOC_LIMIT: usize = 64;
const SAMPLED_ASSOC_TRIPLES: usize = 1 << 18;
const ASSOC_SAMPLE_SEED: u64 = 0x67657262;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("order must be positive")]
    EmptyGroup,
    #[error("multiplication table is not {order}x{order}")]
    BadTableShape { order: usize },
    #[error("table entry mult[{g}][{h}] = {value} is out of range")]
    EntryOutOfRange { g: usize, h: usize, value: usize },
    #[error("index 0 is not a two-sided identity: witness element {witness}")]
    BadIdentity { witness: usize },
    #[error("element {g} has no two-sided inverse")]
    MissingInverse { g: usize },
    #[error("associativity fails at ({g1}, {g2}, {g3})")]
    NotAssociative { g1: usize, g2: usize, g3: usize },
    #[error("symmetric groups are only built up to degree 5, got {0}")]
    SymmetricDegreeTooLarge(usize),
    #[error("builtin parameter must be positive")]
    BadParameter,
}

/// Recipe for `build_group`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    /// Dihedral group of order 2n (n rotations).
    Dihedral(usize),
    /// Symmetric group on n letters, n <= 5.
    Symmetric(usize),
    Quaternion,
    Product(Box<GroupSpec>, Box<GroupSpec>),
    Table {
        name: Option<String>,
        mult: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub order: usize,
    pub mult: Vec<Vec<usize>>,
    /// Always 0; kept as a field so serialized groups are self-describing.
    pub identity: usize,
    pub inv: Vec<usize>,
    pub name: Option<String>,
}

impl FiniteGroup {
    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// g h g^-1.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv[g])
    }

    pub fn commute(&self, g: usize, h: usize) -> bool {
        self.mul(g, h) == self.mul(h, g)
    }

    /// Order of the cyclic subgroup generated by g.
    pub fn element_order(&self, g: usize) -> usize {
        let mut n = 1;
        let mut p = g;
        while p != self.identity {
            p = self.mul(p, g);
            n += 1;
        }
        n
    }

    /// True when the element set is closed under product and inverse and
    /// contains the identity.
    pub fn is_subgroup(&self, elements: &[usize]) -> bool {
        let mut member = vec![false; self.order];
        for &h in elements {
            if h >= self.order {
                return false;
            }
            member[h] = true;
        }
        if !member[self.identity] {
            return false;
        }
        elements.iter().all(|&a| {
            member[self.inv[a]] && elements.iter().all(|&b| member[self.mul(a, b)])
        })
    }
}

/// Validated analysis data; everything is computed by exact enumeration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupAnalysis {
    /// Partition of 0..order; classes ordered by minimal element, each sorted.
    pub classes: Vec<Vec<usize>>,
    /// Index of the class containing each element.
    pub class_of: Vec<usize>,
    pub centralizers: Vec<Vec<usize>>,
    pub center: Vec<usize>,
    pub commuting_pairs: u64,
    pub commuting_triples: u64,
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
    let (name, mult) = match spec {
        GroupSpec::Cyclic(n) => {
            if *n == 0 {
                return Err(GroupError::BadParameter);
            }
            (Some(format!("C{n}")), cyclic_table(*n))
        }
        GroupSpec::Dihedral(n) => {
            if *n == 0 {
                return Err(GroupError::BadParameter);
            }
            (Some(format!("D{n}")), dihedral_table(*n))
        }
        GroupSpec::Symmetric(n) => {
            if *n == 0 {
                return Err(GroupError::BadParameter);
            }
            if *n > 5 {
                return Err(GroupError::SymmetricDegreeTooLarge(*n));
            }
            (Some(format!("S{n}")), symmetric_table(*n))
        }
        GroupSpec::Quaternion => (Some("Q8".to_string()), quaternion_table()),
        GroupSpec::Product(a, b) => {
            let ga = build_group(a)?;
            let gb = build_group(b)?;
            let name = match (&ga.name, &gb.name) {
                (Some(x), Some(y)) => Some(format!("{x}x{y}")),
                _ => None,
            };
            (name, product_table(&ga, &gb))
        }
        GroupSpec::Table { name, mult } => (name.clone(), mult.clone()),
    };
    validate_table(mult, name)
}

fn validate_table(mult: Vec<Vec<usize>>, name: Option<String>) -> Result<FiniteGroup, GroupError> {
    let order = mult.len();
    if order == 0 {
        return Err(GroupError::EmptyGroup);
    }
    if mult.iter().any(|row| row.len() != order) {
        return Err(GroupError::BadTableShape { order });
    }
    for (g, row) in mult.iter().enumerate() {
        for (h, &value) in row.iter().enumerate() {
            if value >= order {
                return Err(GroupError::EntryOutOfRange { g, h, value });
            }
        }
    }
    for g in 0..order {
        if mult[0][g] != g || mult[g][0] != g {
            return Err(GroupError::BadIdentity { witness: g });
        }
    }
    let mut inv = vec![usize::MAX; order];
    for g in 0..order {
        match (0..order).find(|&h| mult[g][h] == 0 && mult[h][g] == 0) {
            Some(h) => inv[g] = h,
            None => return Err(GroupError::MissingInverse { g }),
        }
    }
    check_associativity(&mult)?;
    Ok(FiniteGroup {
        order,
        mult,
        identity: 0,
        inv,
        name,
    })
}

fn check_associativity(mult: &[Vec<usize>]) -> Result<(), GroupError> {
    let order = mult.len();
    if order <= EXHAUSTIVE_ASSOC_LIMIT {
        for g1 in 0..order {
            for g2 in 0..order {
                for g3 in 0..order {
                    if mult[mult[g1][g2]][g3] != mult[g1][mult[g2][g3]] {
                        return Err(GroupError::NotAssociative { g1, g2, g3 });
                    }
                }
            }
        }
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ASSOC_SAMPLE_SEED);
        for _ in 0..SAMPLED_ASSOC_TRIPLES {
            let g1 = rng.random_range(0..order);
            let g2 = rng.random_range(0..order);
            let g3 = rng.random_range(0..order);
            if mult[mult[g1][g2]][g3] != mult[g1][mult[g2][g3]] {
                return Err(GroupError::NotAssociative { g1, g2, g3 });
            }
        }
    }
    Ok(())
}

pub fn analyze(group: &FiniteGroup) -> GroupAnalysis {
    let n = group.order;
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for g in 0..n {
        if class_of[g] != usize::MAX {
            continue;
        }
        let mut class: Vec<usize> = (0..n).map(|h| group.conj(h, g)).collect();
        class.sort_unstable();
        class.dedup();
        let idx = classes.len();
        for &m in &class {
            class_of[m] = idx;
        }
        classes.push(class);
    }
    let centralizers: Vec<Vec<usize>> = (0..n)
        .map(|g| (0..n).filter(|&h| group.commute(g, h)).collect())
        .collect();
    let center: Vec<usize> = (0..n)
        .filter(|&g| centralizers[g].len() == n)
        .collect();
    let commuting_pairs: u64 = centralizers.iter().map(|c| c.len() as u64).sum();
    let mut commuting_triples = 0u64;
    for g in 0..n {
        for &h in &centralizers[g] {
            for &k in &centralizers[g] {
                if group.commute(h, k) {
                    commuting_triples += 1;
                }
            }
        }
    }
    GroupAnalysis {
        classes,
        class_of,
        centralizers,
        center,
        commuting_pairs,
        commuting_triples,
    }
}

fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
}

/// Order 2n. Index k < n is the rotation r^k, index n+k is the reflection
/// s r^k, with relations r^n = s^2 = e and s r = r^-1 s.
fn dihedral_table(n: usize) -> Vec<Vec<usize>> {
    let order = 2 * n;
    let mut mult = vec![vec![0usize; order]; order];
    for a in 0..order {
        for b in 0..order {
            let (ra, sa) = (a % n, a / n);
            let (rb, sb) = (b % n, b / n);
            // (s^sa r^ra)(s^sb r^rb) = s^(sa+sb) r^(rb +- ra)
            let rot = if sb == 0 { (ra + rb) % n } else { (n + rb - ra) % n };
            mult[a][b] = ((sa + sb) % 2) * n + rot;
        }
    }
    mult
}

/// Elements are the permutations of 0..n in lexicographic one-line order,
/// so the identity is index 0. Product is composition: (g*h)(x) = g(h(x)).
fn symmetric_table(n: usize) -> Vec<Vec<usize>> {
    let perms = permutations(n);
    let index_of = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
    perms
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|h| {
                    let composed: Vec<usize> = (0..n).map(|x| g[h[x]]).collect();
                    index_of(&composed)
                })
                .collect()
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next_permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Element order 1, -1, i, -i, j, -j, k, -k.
fn quaternion_table() -> Vec<Vec<usize>> {
    // (sign, axis) with axis 0 = 1, 1 = i, 2 = j, 3 = k.
    let decode = |g: usize| (g % 2, g / 2);
    let encode = |sign: usize, axis: usize| axis * 2 + sign;
    let unit_mul = |a: usize, b: usize| -> (usize, usize) {
        // returns (sign, axis) of the product of basis units
        match (a, b) {
            (0, x) => (0, x),
            (x, 0) => (0, x),
            (x, y) if x == y => (1, 0),
            (1, 2) => (0, 3),
            (2, 1) => (1, 3),
            (2, 3) => (0, 1),
            (3, 2) => (1, 1),
            (3, 1) => (0, 2),
            (1, 3) => (1, 2),
            _ => unreachable!(),
        }
    };
    (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (sa, xa) = decode(a);
                    let (sb, xb) = decode(b);
                    let (sp, xp) = unit_mul(xa, xb);
                    encode((sa + sb + sp) % 2, xp)
                })
                .collect()
        })
        .collect()
}

/// Pair (a,b) gets index a * |B| + b; identity (0,0) stays at 0.
fn product_table(ga: &FiniteGroup, gb: &FiniteGroup) -> Vec<Vec<usize>> {
    let (na, nb) = (ga.order, gb.order);
    let order = na * nb;
    (0..order)
        .map(|p| {
            (0..order)
                .map(|q| {
                    let (pa, pb) = (p / nb, p % nb);
                    let (qa, qb) = (q / nb, q % nb);
                    ga.mul(pa, qa) * nb + gb.mul(pb, qb)
                })
                .collect()
        })
        .collect()
}

/// group.json payload: either an explicit table or a builtin reference.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupFile {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: Vec<serde_json::Value>,
    },
    Table {
        #[serde(default)]
        name: Option<String>,
        order: usize,
        mult: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Error)]
pub enum GroupFileError {
    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),
    #[error("builtin {0:?} expects {1}")]
    BadParams(String, &'static str),
    #[error("order field is {order} but table has {actual} rows")]
    OrderMismatch { order: usize, actual: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub fn group_spec_from_file(file: &GroupFile) -> Result<GroupSpec, GroupFileError> {
    match file {
        GroupFile::Table { name, order, mult } => {
            if mult.len() != *order {
                return Err(GroupFileError::OrderMismatch {
                    order: *order,
                    actual: mult.len(),
                });
            }
            Ok(GroupSpec::Table {
                name: name.clone(),
                mult: mult.clone(),
            })
        }
        GroupFile::Builtin { builtin, params } => {
            let int_param = || -> Option<usize> {
                params.first().and_then(|v| v.as_u64()).map(|v| v as usize)
            };
            match builtin.as_str() {
                "cyclic" => int_param()
                    .map(GroupSpec::Cyclic)
                    .ok_or(GroupFileError::BadParams(builtin.clone(), "one integer")),
                "dihedral" => int_param()
                    .map(GroupSpec::Dihedral)
                    .ok_or(GroupFileError::BadParams(builtin.clone(), "one integer")),
                "symmetric" => int_param()
                    .map(GroupSpec::Symmetric)
                    .ok_or(GroupFileError::BadParams(builtin.clone(), "one integer")),
                "quaternion" => match int_param() {
                    None | Some(8) => Ok(GroupSpec::Quaternion),
                    Some(_) => Err(GroupFileError::BadParams(builtin.clone(), "nothing or 8")),
                },
                "product" => {
                    if params.len() != 2 {
                        return Err(GroupFileError::BadParams(
                            builtin.clone(),
                            "two nested group specs",
                        ));
                    }
                    let parse = |v: &serde_json::Value| -> Result<GroupSpec, GroupFileError> {
                        let nested: GroupFile = serde_json::from_value(v.clone())
                            .map_err(|_| GroupFileError::BadParams(builtin.clone(), "two nested group specs"))?;
                        group_spec_from_file(&nested)
                    };
                    Ok(GroupSpec::Product(
                        Box::new(parse(&params[0])?),
                        Box::new(parse(&params[1])?),
                    ))
                }
                other => Err(GroupFileError::UnknownBuiltin(other.to_string())),
            }
        }
    }
}

pub fn build_group_from_json(text: &str) -> Result<FiniteGroup, String> {
    let file: GroupFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let spec = group_spec_from_file(&file).map_err(|e| e.to_string())?;
    build_group(&spec).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        build_group(&GroupSpec::Symmetric(3)).unwrap()
    }

    #[test]
    fn cyclic_3_law() {
        let g = build_group(&GroupSpec::Cyclic(3)).unwrap();
        assert_eq!(g.order, 3);
        for a in g.elements() {
            assert_eq!(g.mul(g.mul(a, a), a), 0);
        }
    }

    #[test]
    fn symmetric_3_order() {
        assert_eq!(s3().order, 6);
    }

    #[test]
    fn quaternion_center_has_two_elements() {
        let q8 = build_group(&GroupSpec::Quaternion).unwrap();
        let a = analyze(&q8);
        assert_eq!(a.center, vec![0, 1]);
    }

    #[test]
    fn z4_classes_are_singletons() {
        let g = build_group(&GroupSpec::Cyclic(4)).unwrap();
        let a = analyze(&g);
        assert_eq!(a.classes.len(), 4);
        assert!(a.classes.iter().all(|c| c.len() == 1));
        assert_eq!(a.commuting_pairs, 16);
    }

    #[test]
    fn s3_analysis_oracle() {
        let a = analyze(&s3());
        let mut sizes: Vec<usize> = a.classes.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(a.commuting_pairs, 18);
        assert_eq!(a.commuting_triples, 48);
    }

    #[test]
    fn burnside_pairs_over_order_is_class_count() {
        let specs = [
            GroupSpec::Cyclic(4),
            GroupSpec::Product(Box::new(GroupSpec::Cyclic(2)), Box::new(GroupSpec::Cyclic(2))),
            GroupSpec::Symmetric(3),
            GroupSpec::Symmetric(4),
            GroupSpec::Dihedral(4),
            GroupSpec::Quaternion,
        ];
        for spec in &specs {
            let g = build_group(spec).unwrap();
            let a = analyze(&g);
            assert_eq!(
                a.commuting_pairs as usize,
                g.order * a.classes.len(),
                "{:?}",
                g.name
            );
        }
    }

    #[test]
    fn dihedral_relations() {
        let d4 = build_group(&GroupSpec::Dihedral(4)).unwrap();
        assert_eq!(d4.order, 8);
        let (r, s) = (1, 4);
        // s r s^-1 = r^-1
        assert_eq!(d4.conj(s, r), d4.inv(r));
        assert_eq!(analyze(&d4).classes.len(), 5);
    }

    #[test]
    fn product_orders_multiply() {
        let g = build_group(&GroupSpec::Product(
            Box::new(GroupSpec::Cyclic(2)),
            Box::new(GroupSpec::Symmetric(3)),
        ))
        .unwrap();
        assert_eq!(g.order, 12);
    }

    #[test]
    fn bad_table_rejected_with_witness() {
        // Swap two entries of C3 to break associativity but keep identity row/col.
        let mut mult = cyclic_table(3);
        mult[1][1] = 1;
        mult[1][2] = 2;
        let err = build_group(&GroupSpec::Table { name: None, mult }).unwrap_err();
        match err {
            GroupError::MissingInverse { .. } | GroupError::NotAssociative { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn element_orders_in_q8() {
        let q8 = build_group(&GroupSpec::Quaternion).unwrap();
        let orders: Vec<usize> = q8.elements().map(|g| q8.element_order(g)).collect();
        assert_eq!(orders, vec![1, 2, 4, 4, 4, 4, 4, 4]);
    }

    #[test]
    fn json_round_trips() {
        let g = build_group_from_json(r#"{"builtin":"symmetric","params":[3]}"#).unwrap();
        assert_eq!(g.order, 6);
        let g2 = build_group_from_json(
            r#"{"builtin":"product","params":[{"builtin":"cyclic","params":[2]},{"builtin":"cyclic","params":[2]}]}"#,
        )
        .unwrap();
        assert_eq!(g2.order, 4);
        let table = serde_json::json!({
            "order": 2,
            "mult": [[0,1],[1,0]],
        });
        let g3 = build_group_from_json(&table.to_string()).unwrap();
        assert_eq!(g3.order, 2);
    }
}
