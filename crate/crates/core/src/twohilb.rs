//! Weighted semisimple skeletons: finite index sets carrying positive
//! rational scale factors, nonnegative-integer dimension matrices between
//! them, the weighted inner product on transformation components, and the
//! commutative Frobenius algebra spanned by a weighted space.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Signed;
use thiserror::Error;

use crate::bundle::CMat;

#[derive(Debug, Error, PartialEq)]
pub enum TwoHilbError {
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// A finite index set with one positive scale factor per index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    pub weights: Vec<Rational64>,
}

impl WeightedSpace {
    pub fn size(&self) -> usize {
        self.weights.len()
    }
}

pub fn weighted_space(weights: Vec<Rational64>) -> Result<WeightedSpace, TwoHilbError> {
    if let Some(index) = weights.iter().position(|w| !w.is_positive()) {
        return Err(TwoHilbError::NonPositiveWeight { index });
    }
    Ok(WeightedSpace { weights })
}

/// A 1-morphism skeleton: dims[μ][i] counts the block between source index i
/// and target index μ. Complex block data is optional and carried inertly;
/// consumers that need matrices supply their own.
#[derive(Debug, Clone)]
pub struct WeightedMatrix {
    pub source: WeightedSpace,
    pub target: WeightedSpace,
    pub dims: Vec<Vec<usize>>,
    pub blocks: Option<Vec<Vec<CMat>>>,
    /// Weights of the space a composite was composed through; each middle
    /// index y contributes its block with a 1/k_y factor to inner products
    /// of composite components.
    pub middle: Option<WeightedSpace>,
}

pub fn weighted_matrix(
    source: WeightedSpace,
    target: WeightedSpace,
    dims: Vec<Vec<usize>>,
) -> Result<WeightedMatrix, TwoHilbError> {
    if dims.len() != target.size() || dims.iter().any(|row| row.len() != source.size()) {
        return Err(TwoHilbError::ShapeMismatch(format!(
            "dims must be {}×{}",
            target.size(),
            source.size()
        )));
    }
    Ok(WeightedMatrix {
        source,
        target,
        dims,
        blocks: None,
        middle: None,
    })
}

/// Composite of F after E; dimension matrices multiply, and the middle
/// space's weights are kept for inner-product normalization downstream.
pub fn compose_weighted(
    f: &WeightedMatrix,
    e: &WeightedMatrix,
) -> Result<WeightedMatrix, TwoHilbError> {
    if e.target != f.source {
        return Err(TwoHilbError::ShapeMismatch(
            "inner spaces disagree".to_string(),
        ));
    }
    let dims: Vec<Vec<usize>> = (0..f.target.size())
        .map(|mu| {
            (0..e.source.size())
                .map(|i| {
                    (0..f.source.size())
                        .map(|y| f.dims[mu][y] * e.dims[y][i])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(WeightedMatrix {
        source: e.source.clone(),
        target: f.target.clone(),
        dims,
        blocks: None,
        middle: Some(f.source.clone()),
    })
}

/// ⟨θ,θ′⟩ = Σ_i k_i·Tr(θ_i†·θ′_i), conjugate-linear in the first slot.
pub fn nat_inner_product(
    theta: &[CMat],
    theta_p: &[CMat],
    source: &WeightedSpace,
) -> Result<Complex64, TwoHilbError> {
    if theta.len() != source.size() || theta_p.len() != source.size() {
        return Err(TwoHilbError::ShapeMismatch(
            "one component per source index".to_string(),
        ));
    }
    let mut total = Complex64::ZERO;
    for (i, k) in source.weights.iter().enumerate() {
        let (a, b) = (&theta[i], &theta_p[i]);
        if a.shape() != b.shape() {
            return Err(TwoHilbError::ShapeMismatch(format!(
                "component {i} shapes differ"
            )));
        }
        let tr: Complex64 = (a.adjoint() * b).diagonal().iter().sum();
        total += Complex64::from(*k.numer() as f64 / *k.denom() as f64) * tr;
    }
    Ok(total)
}

/// The commutative algebra on the orthogonal idempotents of a weighted
/// space. The counit is k_i² on the i-th idempotent; multiplying by the
/// element representing the counit in the idempotent basis (the handle
/// element) therefore has eigenvalues k_i², which is the complete
/// classifying data of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusAlgebra {
    pub weights: Vec<Rational64>,
    /// counit[i] = ε(id_i) = weights[i]².
    pub counit: Vec<Rational64>,
}

impl FrobeniusAlgebra {
    pub fn rank(&self) -> usize {
        self.counit.len()
    }

    /// Pointwise product in the idempotent basis.
    pub fn multiply(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }

    pub fn form(&self, a: &[Complex64]) -> Complex64 {
        a.iter()
            .zip(&self.counit)
            .map(|(x, e)| x * Complex64::from(*e.numer() as f64 / *e.denom() as f64))
            .sum()
    }

    /// Matrix of multiplication by the handle element Σ ε(id_i)·id_i.
    pub fn handle_operator(&self) -> DMatrix<Rational64> {
        DMatrix::from_fn(self.rank(), self.rank(), |r, c| {
            if r == c {
                self.counit[r]
            } else {
                Rational64::from_integer(0)
            }
        })
    }
}

pub fn frobenius_algebra(h: &WeightedSpace) -> FrobeniusAlgebra {
    FrobeniusAlgebra {
        weights: h.weights.clone(),
        counit: h.weights.iter().map(|k| k * k).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn space(ks: &[(i64, i64)]) -> WeightedSpace {
        weighted_space(ks.iter().map(|&(p, q)| Rational64::new(p, q)).collect()).unwrap()
    }

    fn random_space(rng: &mut rand_chacha::ChaCha8Rng, size: usize) -> WeightedSpace {
        weighted_space(
            (0..size)
                .map(|_| Rational64::new(rng.random_range(1..8), rng.random_range(1..8)))
                .collect(),
        )
        .unwrap()
    }

    fn random_dims(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<usize>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(0..4)).collect())
            .collect()
    }

    #[test]
    fn weights_must_be_positive() {
        assert_eq!(
            weighted_space(vec![Rational64::new(1, 2), Rational64::new(0, 1)]),
            Err(TwoHilbError::NonPositiveWeight { index: 1 })
        );
    }

    #[test]
    fn identity_composes_neutrally() {
        let a = space(&[(1, 2), (3, 1)]);
        let id = weighted_matrix(a.clone(), a.clone(), vec![vec![1, 0], vec![0, 1]]).unwrap();
        let f = weighted_matrix(a.clone(), space(&[(1, 1)]), vec![vec![2, 3]]).unwrap();
        assert_eq!(compose_weighted(&f, &id).unwrap().dims, f.dims);
        let g = weighted_matrix(space(&[(1, 1)]), a, vec![vec![4], vec![5]]).unwrap();
        assert_eq!(compose_weighted(&id, &g).unwrap().dims, g.dims);
    }

    #[test]
    fn scalars_multiply() {
        let pt = space(&[(1, 1)]);
        let two = weighted_matrix(pt.clone(), pt.clone(), vec![vec![2]]).unwrap();
        let three = weighted_matrix(pt.clone(), pt, vec![vec![3]]).unwrap();
        let c = compose_weighted(&two, &three).unwrap();
        assert_eq!(c.dims, vec![vec![6]]);
        assert_eq!(c.middle.unwrap().weights.len(), 1);
    }

    #[test]
    fn composition_is_associative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let na = rng.random_range(1..4);
            let a = random_space(&mut rng, na);
            let nb = rng.random_range(1..4);
            let b = random_space(&mut rng, nb);
            let nc = rng.random_range(1..4);
            let c = random_space(&mut rng, nc);
            let nd = rng.random_range(1..4);
            let d = random_space(&mut rng, nd);
            let e = weighted_matrix(a.clone(), b.clone(), random_dims(&mut rng, b.size(), a.size()))
                .unwrap();
            let f = weighted_matrix(b.clone(), c.clone(), random_dims(&mut rng, c.size(), b.size()))
                .unwrap();
            let g = weighted_matrix(c.clone(), d.clone(), random_dims(&mut rng, d.size(), c.size()))
                .unwrap();
            let lhs = compose_weighted(&compose_weighted(&g, &f).unwrap(), &e).unwrap();
            let rhs = compose_weighted(&g, &compose_weighted(&f, &e).unwrap()).unwrap();
            assert_eq!(lhs.dims, rhs.dims);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = space(&[(1, 1), (2, 1)]);
        let b = space(&[(1, 1)]);
        assert!(weighted_matrix(a.clone(), b.clone(), vec![vec![1]]).is_err());
        let f = weighted_matrix(b.clone(), b.clone(), vec![vec![1]]).unwrap();
        let g = weighted_matrix(a.clone(), a, vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert!(compose_weighted(&f, &g).is_err());
    }

    #[test]
    fn inner_product_on_a_weighted_point() {
        let h = space(&[(2, 1)]);
        let id = vec![CMat::identity(1, 1)];
        let ip = nat_inner_product(&id, &id, &h).unwrap();
        assert!((ip - Complex64::from(2.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_product_is_sesquilinear_and_positive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let h = random_space(&mut rng, 3);
        let rand_cmp = |rng: &mut rand_chacha::ChaCha8Rng| {
            (0..3)
                .map(|_| {
                    CMat::from_fn(2, 2, |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                })
                .collect::<Vec<_>>()
        };
        let theta = rand_cmp(&mut rng);
        let eta = rand_cmp(&mut rng);
        let alpha = Complex64::new(0.3, -1.2);

        let norm = nat_inner_product(&theta, &theta, &h).unwrap();
        assert!(norm.re > 0.0 && norm.im.abs() < 1e-12);

        let scaled: Vec<CMat> = theta.iter().map(|m| m * alpha).collect();
        let lhs = nat_inner_product(&scaled, &eta, &h).unwrap();
        let rhs = alpha.conj() * nat_inner_product(&theta, &eta, &h).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);

        let lhs = nat_inner_product(&eta, &scaled, &h).unwrap();
        let rhs = alpha * nat_inner_product(&eta, &theta, &h).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);

        let sym = nat_inner_product(&eta, &theta, &h).unwrap();
        assert!((sym - nat_inner_product(&theta, &eta, &h).unwrap().conj()).norm() < 1e-12);
    }

    #[test]
    fn representation_weights_of_s3() {
        let h = space(&[(1, 6), (1, 6), (2, 6)]);
        let alg = frobenius_algebra(&h);
        assert_eq!(
            alg.counit,
            vec![
                Rational64::new(1, 36),
                Rational64::new(1, 36),
                Rational64::new(4, 36)
            ]
        );
    }

    #[test]
    fn trivial_algebra() {
        let alg = frobenius_algebra(&space(&[(1, 1)]));
        assert_eq!(alg.counit, vec![Rational64::from_integer(1)]);
        assert!((alg.form(&[Complex64::ONE]) - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn counit_is_the_square_of_the_weight() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.random_range(1..6);
            let h = random_space(&mut rng, n);
            let alg = frobenius_algebra(&h);
            for (k, e) in h.weights.iter().zip(&alg.counit) {
                assert_eq!(*e, k * k);
            }
        }
    }

    #[test]
    fn idempotents_are_orthogonal() {
        let alg = frobenius_algebra(&space(&[(1, 2), (3, 4), (5, 1)]));
        let basis = |i: usize| {
            let mut v = vec![Complex64::ZERO; 3];
            v[i] = Complex64::ONE;
            v
        };
        for i in 0..3 {
            for j in 0..3 {
                let prod = alg.multiply(&basis(i), &basis(j));
                let expect = if i == j { basis(i) } else { vec![Complex64::ZERO; 3] };
                assert_eq!(prod, expect);
                let back = alg.multiply(&basis(j), &basis(i));
                assert_eq!(prod, back);
            }
        }
    }

    #[test]
    fn handle_eigenvalues_are_squared_weights() {
        let h = space(&[(1, 6), (1, 6), (2, 6)]);
        let alg = frobenius_algebra(&h);
        let op = alg.handle_operator();
        for (i, k) in h.weights.iter().enumerate() {
            assert_eq!(op[(i, i)], k * k);
            for j in 0..3 {
                if j != i {
                    assert_eq!(op[(i, j)], Rational64::from_integer(0));
                }
            }
        }
    }
}
