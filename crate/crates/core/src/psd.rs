//! Symmetric-matrix kernel.
//!
//! Every covariance, information matrix and weight in the crate is carried by
//! [`SymMatrix`]. The Loewner (positive semi-definite) partial order is decided
//! numerically by the smallest eigenvalue of the difference, with a tolerance
//! relative to the magnitude of the operands.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for PSD queries unless the caller picks one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative ridge added before simultaneous diagonalization.
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// Dense real symmetric matrix.
///
/// Construction symmetrizes the input as `(A + Aᵀ) / 2`, so
/// `m[(i, j)] == m[(j, i)]` holds bit-for-bit.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Symmetrizes a square matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidScenario("empty matrix".into()));
        }
        Ok(Self::from_square(m))
    }

    // Caller guarantees `m` is square and non-empty.
    pub(crate) fn from_square(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Self(m)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn scalar(value: f64) -> Self {
        Self(DMatrix::from_element(1, 1, value))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.dim() == 1 {
            vec![self.0[(0, 0)]]
        } else {
            self.0.symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// `X · self · Xᵀ`, symmetrized.
    pub fn congruence(&self, x: &DMatrix<f64>) -> SymMatrix {
        Self::from_square(x * &self.0 * x.transpose())
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        Self(&self.0 * factor)
    }

    pub fn add_diagonal(&self, shift: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        Self(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymMatrix").field(&self.to_rows()).finish()
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let slices: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        SymMatrix::from_rows(&slices).map_err(serde::de::Error::custom)
    }
}

/// Outcome of comparing two matrices in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsdOrder {
    /// `A ⪯ B`
    LessEq,
    /// `A ⪰ B`
    GreaterEq,
    Equal,
    Incomparable,
}

impl PsdOrder {
    /// True for `GreaterEq` and `Equal`.
    pub fn is_ge(self) -> bool {
        matches!(self, PsdOrder::GreaterEq | PsdOrder::Equal)
    }

    /// True for `LessEq` and `Equal`.
    pub fn is_le(self) -> bool {
        matches!(self, PsdOrder::LessEq | PsdOrder::Equal)
    }
}

fn order_scale(a: &SymMatrix, b: &SymMatrix) -> f64 {
    1f64.max(a.inf_norm()).max(b.inf_norm())
}

/// Compares `a` and `b` in the PSD order.
///
/// `a ⪯ b` is accepted when the smallest eigenvalue of `b − a` is at least
/// `−tol · max(1, ‖a‖∞, ‖b‖∞)`.
pub fn psd_compare(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<PsdOrder> {
    a.check_dim(b)?;
    let ev = (b - a).eigenvalues();
    let slack = tol * order_scale(a, b);
    let le = ev[0] >= -slack;
    let ge = ev[ev.len() - 1] <= slack;
    Ok(match (le, ge) {
        (true, true) => PsdOrder::Equal,
        (true, false) => PsdOrder::LessEq,
        (false, true) => PsdOrder::GreaterEq,
        (false, false) => PsdOrder::Incomparable,
    })
}

pub fn is_psd(a: &SymMatrix, tol: f64) -> bool {
    a.min_eigenvalue() >= -tol * 1f64.max(a.inf_norm())
}

/// Symmetrizes a square matrix as `(A + Aᵀ) / 2`.
pub fn symmetrize(a: DMatrix<f64>) -> Result<SymMatrix> {
    SymMatrix::new(a)
}

/// Simultaneous diagonalization of a PSD pair.
#[derive(Debug, Clone)]
pub struct SimDiag {
    /// Columns are generalized eigenvectors, scaled so `vᵀ M2' v = 1`.
    pub eigvecs: DMatrix<f64>,
    /// Generalized eigenvalues in descending order, clamped at zero.
    pub eigvals: DVector<f64>,
    /// Ridge `δ` that was added to both inputs.
    pub shift: f64,
}

/// Solves `|M1' − λ M2'| = 0` with `Mi' = Mi + δI` and
/// `δ = ridge · max(1, tr M1, tr M2)`.
///
/// Returns `V` with `Vᵀ M2' V = I` and `Vᵀ M1' V = diag(λ)`. The problem is
/// reduced to a standard symmetric eigenproblem through the Cholesky factor of
/// `M2'`. Columns are ordered by descending eigenvalue and signed so their
/// largest-magnitude component is positive.
pub fn sim_diagonalize(m1: &SymMatrix, m2: &SymMatrix, ridge: f64) -> Result<SimDiag> {
    m1.check_dim(m2)?;
    for m in [m1, m2] {
        if !is_psd(m, DEFAULT_TOL) {
            return Err(Error::NotPsd {
                min_eigenvalue: m.min_eigenvalue(),
            });
        }
    }
    let shift = ridge * 1f64.max(m1.trace()).max(m2.trace());
    let m1r = m1.add_diagonal(shift);
    let m2r = m2.add_diagonal(shift);

    let chol = m2r
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::Decomposition("second matrix is not positive definite"))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(m1r.as_matrix())
        .ok_or(Error::Decomposition("triangular solve"))?;
    let reduced = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::Decomposition("triangular solve"))?;
    let reduced = SymMatrix::from_square(reduced);

    let eig = SymmetricEigen::try_new(reduced.into_matrix(), f64::EPSILON, 0)
        .ok_or(Error::Decomposition("symmetric eigensolver did not converge"))?;
    let u = eig.eigenvectors;
    let v = l
        .tr_solve_lower_triangular(&u)
        .ok_or(Error::Decomposition("triangular solve"))?;

    let n = m1.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut eigvecs = DMatrix::zeros(n, n);
    let mut eigvals = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        eigvecs.set_column(dst, &col);
        eigvals[dst] = eig.eigenvalues[src].max(0.0);
    }
    Ok(SimDiag {
        eigvecs,
        eigvals,
        shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(d: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(d)
    }

    #[test]
    fn compare_scaled_identity() {
        let a = SymMatrix::identity(2);
        let b = a.scale(2.0);
        assert_eq!(psd_compare(&a, &b, 1e-9).unwrap(), PsdOrder::LessEq);
        assert_eq!(psd_compare(&b, &a, 1e-9).unwrap(), PsdOrder::GreaterEq);
    }

    #[test]
    fn compare_indefinite_difference() {
        let ord = psd_compare(&diag(&[2.0, 1.0]), &diag(&[1.0, 2.0]), 1e-9).unwrap();
        assert_eq!(ord, PsdOrder::Incomparable);
    }

    #[test]
    fn compare_reflexive() {
        let m = SymMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap();
        assert_eq!(psd_compare(&m, &m, 1e-9).unwrap(), PsdOrder::Equal);
    }

    #[test]
    fn compare_dimension_mismatch() {
        let err = psd_compare(&SymMatrix::identity(2), &SymMatrix::identity(3), 1e-9);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn psd_queries() {
        assert!(is_psd(&diag(&[1.0, 0.0]), 1e-9));
        assert!(!is_psd(&diag(&[1.0, -1.0]), 1e-9));
        assert!(is_psd(&SymMatrix::zeros(3), 1e-9));
    }

    #[test]
    fn symmetrize_examples() {
        let s = symmetrize(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.to_rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let sym = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]);
        assert_eq!(symmetrize(sym.clone()).unwrap().into_matrix(), sym);
        assert_eq!(symmetrize(DMatrix::from_element(1, 1, 5.0)).unwrap()[(0, 0)], 5.0);
        assert!(matches!(
            symmetrize(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn sim_diag_hand_solved_pair() {
        // |diag(4,1) − λ diag(1,4)| = 0 gives λ ∈ {4, 1/4}; eigenvectors e1
        // and e2 normalized against diag(1,4).
        let m1 = diag(&[4.0, 1.0]);
        let m2 = diag(&[1.0, 4.0]);
        let sd = sim_diagonalize(&m1, &m2, 0.0).unwrap();
        let expected_v = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!((&sd.eigvecs - &expected_v).norm() < 1e-12);
        assert!((sd.eigvals[0] - 4.0).abs() < 1e-12);
        assert!((sd.eigvals[1] - 0.25).abs() < 1e-12);

        let vt = sd.eigvecs.transpose();
        let d2 = &vt * m2.as_matrix() * &sd.eigvecs;
        let d1 = &vt * m1.as_matrix() * &sd.eigvecs;
        assert!((d2 - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
        assert!((d1 - DMatrix::from_diagonal(&sd.eigvals)).norm() < 1e-12);
    }

    #[test]
    fn sim_diag_identical_and_zero() {
        let i3 = SymMatrix::identity(3);
        let sd = sim_diagonalize(&i3, &i3, 0.0).unwrap();
        assert!(sd.eigvals.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        let sd = sim_diagonalize(&SymMatrix::zeros(3), &i3, 0.0).unwrap();
        assert!(sd.eigvals.iter().all(|&l| l.abs() < 1e-12));
    }

    #[test]
    fn sim_diag_rejects_indefinite_and_singular() {
        let bad = diag(&[1.0, -1.0]);
        assert!(matches!(
            sim_diagonalize(&bad, &SymMatrix::identity(2), 0.0),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            sim_diagonalize(&SymMatrix::identity(2), &diag(&[1.0, 0.0]), 0.0),
            Err(Error::Decomposition(_))
        ));
        // the ridge makes the same singular pair solvable
        assert!(sim_diagonalize(&SymMatrix::identity(2), &diag(&[1.0, 0.0]), 1e-10).is_ok());
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-2.0f64..2.0, n * n)
            .prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
    }

    proptest! {
        #[test]
        fn symmetrize_is_idempotent(m in arb_matrix(4)) {
            let once = symmetrize(m).unwrap();
            let twice = symmetrize(once.as_matrix().clone()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn compare_antisymmetric(a in arb_matrix(3), b in arb_matrix(3)) {
            let a = SymMatrix::new(&a * a.transpose()).unwrap();
            let b = SymMatrix::new(&b * b.transpose()).unwrap();
            let ab = psd_compare(&a, &b, 1e-9).unwrap();
            let ba = psd_compare(&b, &a, 1e-9).unwrap();
            let flipped = match ab {
                PsdOrder::LessEq => PsdOrder::GreaterEq,
                PsdOrder::GreaterEq => PsdOrder::LessEq,
                other => other,
            };
            prop_assert_eq!(ba, flipped);
            prop_assert_eq!(psd_compare(&a, &a, 1e-9).unwrap(), PsdOrder::Equal);
        }
    }
}
