//! Finite-dimensional C*-algebras as direct sums of complex matrix blocks.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{self, cr, CMat, C64, ONE};
use crate::{Error, Result};

/// A finite direct sum of full complex matrix algebras.
#[derive(Debug, PartialEq, Eq)]
pub struct MatrixCStarAlgebra {
    block_dims: Vec<usize>,
    label: String,
}

impl MatrixCStarAlgebra {
    pub fn new(block_dims: Vec<usize>, label: impl Into<String>) -> Arc<Self> {
        assert!(!block_dims.is_empty() && block_dims.iter().all(|&d| d > 0));
        Arc::new(Self {
            block_dims,
            label: label.into(),
        })
    }

    /// Full matrix algebra M_d.
    pub fn full_matrix(d: usize, label: impl Into<String>) -> Arc<Self> {
        Self::new(vec![d], label)
    }

    /// Commutative algebra with m one-dimensional blocks.
    pub fn commutative(m: usize, label: impl Into<String>) -> Arc<Self> {
        Self::new(vec![1; m], label)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Vector-space dimension, the sum of the squared block sizes.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.block_dims == other.block_dims && self.label == other.label
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraElement {
        AlgebraElement {
            parent: self.clone(),
            blocks: self.block_dims.iter().map(|&d| CMat::zeros(d, d)).collect(),
        }
    }

    pub fn unit(self: &Arc<Self>) -> AlgebraElement {
        AlgebraElement {
            parent: self.clone(),
            blocks: self.block_dims.iter().map(|&d| CMat::identity(d, d)).collect(),
        }
    }

    /// Matrix unit e_{ij} inside block `b`.
    pub fn matrix_unit(self: &Arc<Self>, b: usize, i: usize, j: usize) -> AlgebraElement {
        let mut x = self.zero();
        x.blocks[b][(i, j)] = ONE;
        x
    }

    /// Central projection onto block `b`.
    pub fn block_unit(self: &Arc<Self>, b: usize) -> AlgebraElement {
        let mut x = self.zero();
        let d = self.block_dims[b];
        x.blocks[b] = CMat::identity(d, d);
        x
    }

    /// Matrix units in a fixed flat order: the canonical vector-space basis.
    pub fn basis_units(self: &Arc<Self>) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (b, &d) in self.block_dims.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out.push(self.matrix_unit(b, i, j));
                }
            }
        }
        out
    }

    /// Flat index of the matrix unit (b, i, j) in `basis_units` order.
    pub fn unit_index(&self, b: usize, i: usize, j: usize) -> usize {
        let offset: usize = self.block_dims[..b].iter().map(|d| d * d).sum();
        offset + i * self.block_dims[b] + j
    }

    pub fn from_blocks(self: &Arc<Self>, blocks: Vec<CMat>) -> AlgebraElement {
        assert_eq!(blocks.len(), self.block_dims.len());
        for (m, &d) in blocks.iter().zip(&self.block_dims) {
            assert_eq!((m.nrows(), m.ncols()), (d, d));
        }
        AlgebraElement {
            parent: self.clone(),
            blocks,
        }
    }

    /// Element with independent complex Gaussian-ish entries.
    pub fn random_element(self: &Arc<Self>, rng: &mut impl rand::Rng) -> AlgebraElement {
        let blocks = self
            .block_dims
            .iter()
            .map(|&d| CMat::from_fn(d, d, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        self.from_blocks(blocks)
    }

    pub fn random_selfadjoint(self: &Arc<Self>, rng: &mut impl rand::Rng) -> AlgebraElement {
        let x = self.random_element(rng);
        (&x + &x.adjoint()).scale(cr(0.5))
    }

    /// Haar-ish random unitary, blockwise QR of a random element.
    pub fn random_unitary(self: &Arc<Self>, rng: &mut impl rand::Rng) -> AlgebraElement {
        let x = self.random_element(rng);
        let blocks = x
            .blocks
            .iter()
            .map(|m| {
                let q = linalg::gram_schmidt(m, 1e-12);
                debug_assert_eq!(q.ncols(), m.ncols());
                q
            })
            .collect();
        self.from_blocks(blocks)
    }

    /// Dimension of the center, computed from a randomized two-element
    /// commutant certificate per block rather than read off the block count.
    pub fn center_dimension(self: &Arc<Self>) -> usize {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let mut total = 0;
        for &d in &self.block_dims {
            if d == 1 {
                total += 1;
                continue;
            }
            let h1 = random_herm(d, &mut rng);
            let h2 = random_herm(d, &mut rng);
            // commutant of h1: spanned by its spectral projections (generic
            // spectrum); then intersect with the commutant of h2.
            let (_, v) = linalg::herm_eigen(&h1);
            // candidate x = v diag(c) v^*; constraint [x, h2] = 0.
            let mut sys = CMat::zeros(d * d, d);
            for k in 0..d {
                let p = v.column(k) * v.column(k).adjoint();
                let comm = &p * &h2 - &h2 * &p;
                for r in 0..d {
                    for c in 0..d {
                        sys[(r * d + c, k)] = comm[(r, c)];
                    }
                }
            }
            let ns = linalg::nullspace_onb(&sys, 1e-9);
            total += ns.ncols();
        }
        total
    }
}

fn random_herm(d: usize, rng: &mut impl rand::Rng) -> CMat {
    let m = CMat::from_fn(d, d, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    (&m + m.adjoint()) * cr(0.5)
}

impl fmt::Display for MatrixCStarAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = ", self.label)?;
        let parts: Vec<String> = self.block_dims.iter().map(|d| format!("M{d}")).collect();
        write!(f, "{}", parts.join(" (+) "))
    }
}

/// An element of a [`MatrixCStarAlgebra`], one complex matrix per block.
/// Values are immutable; all operations return fresh elements.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    parent: Arc<MatrixCStarAlgebra>,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn parent(&self) -> &Arc<MatrixCStarAlgebra> {
        &self.parent
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMat {
        &self.blocks[b]
    }

    fn check_parent(&self, other: &Self) -> Result<()> {
        if !self.parent.same_as(&other.parent) {
            return Err(Error::AlgebraMismatch(format!(
                "'{}' vs '{}'",
                self.parent.label, other.parent.label
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_parent(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            parent: self.parent.clone(),
            blocks,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            parent: self.parent.clone(),
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            parent: self.parent.clone(),
            blocks: self.blocks.iter().map(|m| m * z).collect(),
        }
    }

    /// Operator norm: the largest singular value over the blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Unnormalized trace summed over blocks.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .map(|m| (0..m.nrows()).map(|i| m[(i, i)]).sum::<C64>())
            .sum()
    }

    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::hs_inner(a, b))
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).re.max(0.0).sqrt()
    }

    /// True iff self-adjoint within `tol` and all eigenvalues >= -tol.
    pub fn is_positive(&self, tol: f64) -> bool {
        let sa_defect = (self - &self.adjoint()).operator_norm();
        if sa_defect > tol {
            return false;
        }
        for m in &self.blocks {
            let h = (m + m.adjoint()) * cr(0.5);
            let (vals, _) = linalg::herm_eigen(&h);
            if let Some(min) = vals.first() {
                if *min < -tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        (self - &self.adjoint()).operator_norm() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        let sq = self.mul(self).expect("same parent");
        self.is_selfadjoint(tol) && (&sq - self).operator_norm() <= tol
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.parent.same_as(&other.parent) && (self - other).operator_norm() <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.operator_norm() <= tol
    }

    /// Square root of a positive element (eigenvalues clamped at 0).
    pub fn positive_sqrt(&self) -> Self {
        Self {
            parent: self.parent.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|m| {
                    let h = (m + m.adjoint()) * cr(0.5);
                    linalg::herm_apply(&h, |x| x.max(0.0).sqrt())
                })
                .collect(),
        }
    }

    /// Commutes with every matrix unit within `tol`.
    pub fn is_central(&self, tol: f64) -> bool {
        for u in self.parent.basis_units() {
            let lhs = self.mul(&u).unwrap();
            let rhs = u.mul(self).unwrap();
            if (&lhs - &rhs).operator_norm() > tol {
                return false;
            }
        }
        true
    }

    /// Coefficients in the `basis_units` order.
    pub fn coords(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.parent.dim());
        for m in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(m[(i, j)]);
                }
            }
        }
        out
    }

    pub fn from_coords(parent: &Arc<MatrixCStarAlgebra>, coords: &[C64]) -> Self {
        assert_eq!(coords.len(), parent.dim());
        let mut blocks = Vec::new();
        let mut k = 0;
        for &d in parent.block_dims() {
            let m = CMat::from_fn(d, d, |i, j| coords[k + i * d + j]);
            k += d * d;
            blocks.push(m);
        }
        parent.from_blocks(blocks)
    }
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert!(self.parent.same_as(&rhs.parent));
        AlgebraElement {
            parent: self.parent.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert!(self.parent.same_as(&rhs.parent));
        AlgebraElement {
            parent: self.parent.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "element of {} (norm {:.4})", self.parent.label, self.operator_norm())
    }
}

/// Convenience: scalar multiple of the unit.
pub fn scalar(parent: &Arc<MatrixCStarAlgebra>, z: C64) -> AlgebraElement {
    parent.unit().scale(z)
}

pub use crate::linalg::cr as real;

#[allow(unused_imports)]


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use rand::SeedableRng;

    fn test_algebra() -> Arc<MatrixCStarAlgebra> {
        MatrixCStarAlgebra::new(vec![3, 2], "M3+M2")
    }

    #[test]
    fn unit_is_identity_for_mul() {
        let a = test_algebra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = a.random_element(&mut rng);
        let one = a.unit();
        assert!(x.mul(&one).unwrap().approx_eq(&x, 1e-12));
        assert!(one.mul(&x).unwrap().approx_eq(&x, 1e-12));
    }

    #[test]
    fn matrix_units_multiply() {
        let a = MatrixCStarAlgebra::full_matrix(2, "M2");
        let e12 = a.matrix_unit(0, 0, 1);
        let e21 = a.matrix_unit(0, 1, 0);
        let e11 = a.matrix_unit(0, 0, 0);
        assert!(e12.mul(&e21).unwrap().approx_eq(&e11, 1e-15));
    }

    #[test]
    fn involution_is_antimultiplicative() {
        let a = test_algebra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = a.random_element(&mut rng);
            let y = a.random_element(&mut rng);
            let lhs = x.mul(&y).unwrap().adjoint();
            let rhs = y.adjoint().mul(&x.adjoint()).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
            assert!(x.adjoint().adjoint().approx_eq(&x, 1e-15));
        }
    }

    #[test]
    fn cstar_identity() {
        let a = test_algebra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = a.random_element(&mut rng);
            let n2 = x.operator_norm().powi(2);
            let nxx = x.adjoint().mul(&x).unwrap().operator_norm();
            assert!((n2 - nxx).abs() <= 1e-10 * n2.max(1.0));
        }
    }

    #[test]
    fn positivity_basics() {
        let a = test_algebra();
        assert!(a.unit().is_positive(1e-12));
        assert!(!a.unit().scale(cr(-1.0)).is_positive(1e-12));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = a.random_element(&mut rng);
            assert!(x.adjoint().mul(&x).unwrap().is_positive(1e-10));
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = MatrixCStarAlgebra::full_matrix(2, "M2");
        let x = a.from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[cr(3.0), ZERO, ZERO, cr(-4.0)],
        )]);
        assert!((x.operator_norm() - 4.0).abs() < 1e-12);
        assert!((a.unit().operator_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn center_dimension_counts_blocks() {
        assert_eq!(test_algebra().center_dimension(), 2);
        assert_eq!(MatrixCStarAlgebra::full_matrix(4, "M4").center_dimension(), 1);
        assert_eq!(MatrixCStarAlgebra::commutative(5, "C5").center_dimension(), 5);
    }

    #[test]
    fn parent_mismatch_rejected() {
        let a = MatrixCStarAlgebra::full_matrix(2, "A");
        let b = MatrixCStarAlgebra::full_matrix(2, "B");
        assert!(a.unit().mul(&b.unit()).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let a = test_algebra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = a.random_unitary(&mut rng);
        let uu = u.adjoint().mul(&u).unwrap();
        assert!(uu.approx_eq(&a.unit(), 1e-10));
    }
}
