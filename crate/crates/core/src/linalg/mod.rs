//! Dense Hermitian matrix calculus plus the fermionic and bosonic operator
//! builders used by the physics modules.

mod boson;
mod fermion;
mod gibbs;

pub use boson::{BosonMode, TruncatedBosonSpace};
pub use fermion::{fock_annihilator, FermionSector, Spin};
pub use gibbs::{gibbs, GibbsState};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

pub const HERMITICITY_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn anticommutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b + b * a
}

/// `A (x) B` with `A` indexing the slow (outer) factor.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn trace(m: &Matrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// A dense matrix checked to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix,
}

impl HermitianOperator {
    /// Accepts `m` if `max|m - m^dagger| <= 1e-12 max|m|` and stores its
    /// Hermitian part.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::contract(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let scale = max_abs(&m);
        let skew = max_abs(&(&m - m.adjoint()));
        if skew > HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE) && skew > 0.0 {
            return Err(Error::contract(format!(
                "operator is not Hermitian: max|A - A^dagger| = {skew:.3e}, max|A| = {scale:.3e}"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Stores `(m + m^dagger)/2` without checking.
    pub fn symmetrized(m: Matrix) -> Self {
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        Self { matrix: h }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        Self { matrix: m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: Matrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: Matrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * c(s, 0.0) }
    }

    /// `A (x) I_n`.
    pub fn tensor_identity_right(&self, n: usize) -> Self {
        Self { matrix: kron(&self.matrix, &Matrix::identity(n, n)) }
    }

    /// `I_n (x) A`.
    pub fn tensor_identity_left(&self, n: usize) -> Self {
        Self { matrix: kron(&Matrix::identity(n, n), &self.matrix) }
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == c(0.0, 0.0)))
    }

    /// Eigendecomposition, diagonalizing each connected block of the
    /// sparsity pattern separately.
    pub fn eigh(&self) -> Eigh {
        Eigh::new(&self.matrix)
    }

    /// `e^{i t A}`.
    pub fn exp_i(&self, t: f64) -> Matrix {
        self.eigh().apply(|x| Complex64::from_polar(1.0, t * x))
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// One diagonal block of an eigendecomposition.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    /// Global basis indices spanned by this block.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are eigenvectors in the block's local coordinates.
    pub vectors: Matrix,
}

/// Eigendecomposition of a Hermitian matrix, stored block by block.
#[derive(Debug, Clone)]
pub struct Eigh {
    dim: usize,
    pub blocks: Vec<EigenBlock>,
}

impl Eigh {
    fn new(m: &Matrix) -> Self {
        let n = m.nrows();
        let components = connected_components(m);
        let blocks = components
            .into_iter()
            .map(|indices| {
                let k = indices.len();
                if k == 1 {
                    let i = indices[0];
                    return EigenBlock {
                        values: vec![m[(i, i)].re],
                        vectors: Matrix::identity(1, 1),
                        indices,
                    };
                }
                let sub = Matrix::from_fn(k, k, |a, b| m[(indices[a], indices[b])]);
                let eig = sub.symmetric_eigen();
                EigenBlock {
                    values: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                    indices,
                }
            })
            .collect();
        Self { dim: n, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All eigenvalues in ascending order.
    pub fn values_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_value(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// `f(A)` as a dense matrix.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for block in &self.blocks {
            let k = block.indices.len();
            let mut scaled = block.vectors.clone();
            for (col, &lambda) in block.values.iter().enumerate() {
                let w = f(lambda);
                for row in 0..k {
                    scaled[(row, col)] *= w;
                }
            }
            let local = scaled * block.vectors.adjoint();
            for (a, &i) in block.indices.iter().enumerate() {
                for (b, &j) in block.indices.iter().enumerate() {
                    out[(i, j)] = local[(a, b)];
                }
            }
        }
        out
    }

    /// `sum_i w(lambda_i) <v_i| X |v_i>`, i.e. `Tr[X w(A)]`, without forming `w(A)`.
    pub fn weighted_trace(&self, x: &Matrix, w: impl Fn(f64) -> f64) -> Complex64 {
        let mut total = c(0.0, 0.0);
        for block in &self.blocks {
            let k = block.indices.len();
            let sub = Matrix::from_fn(k, k, |a, b| x[(block.indices[a], block.indices[b])]);
            let xv = &sub * &block.vectors;
            for (col, &lambda) in block.values.iter().enumerate() {
                let weight = w(lambda);
                if weight == 0.0 {
                    continue;
                }
                let mut diag = c(0.0, 0.0);
                for row in 0..k {
                    diag += block.vectors[(row, col)].conj() * xv[(row, col)];
                }
                total += diag * weight;
            }
        }
        total
    }
}

/// Groups basis indices into connected components of the graph with an edge
/// wherever `m[(i, j)] != 0`.
fn connected_components(m: &Matrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != c(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&m + m.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(Error::Contract(_))));
    }

    #[test]
    fn block_eigh_reconstructs() {
        // Two decoupled blocks interleaved in the basis.
        let dense = random_hermitian(6, 3);
        let mut m = Matrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                if i % 2 == j % 2 {
                    m[(i, j)] = dense[(i, j)];
                }
            }
        }
        let op = HermitianOperator::new(m.clone()).unwrap();
        let eig = op.eigh();
        assert_eq!(eig.blocks.len(), 2);
        let back = eig.apply(|x| c(x, 0.0));
        assert!(max_abs(&(back - &m)) < 1e-13);
        let full = m.symmetric_eigen();
        let mut want: Vec<f64> = full.eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.values_sorted().iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn exp_i_is_unitary() {
        let op = HermitianOperator::new(random_hermitian(8, 11)).unwrap();
        let u = op.exp_i(0.7);
        let err = max_abs(&(u.adjoint() * &u - Matrix::identity(8, 8)));
        assert!(err < 1e-13);
    }

    #[test]
    fn weighted_trace_matches_dense() {
        let h = HermitianOperator::new(random_hermitian(7, 5)).unwrap();
        let x = random_hermitian(7, 9);
        let eig = h.eigh();
        let w = eig.apply(|l| c((-l).exp(), 0.0));
        let dense = trace(&(&x * &w));
        let fast = eig.weighted_trace(&x, |l| (-l).exp());
        assert!((dense - fast).norm() < 1e-12);
    }

    #[test]
    fn kron_orders_outer_factor_first() {
        let a = Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let b = Matrix::identity(3, 3);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(3, 3)], c(2.0, 0.0));
    }
}
