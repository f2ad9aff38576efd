//! Small dense symmetric eigenproblems (n is expected to be 2..10).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
///
/// `values` are sorted in descending order and `vectors` holds the matching
/// unit eigenvectors as columns, each with its first non-negligible
/// component positive.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Largest `|m_ij - m_ji|` relative to the largest entry (absolute when the matrix is tiny).
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// `A + Aᵀ`, computed entrywise as `a_ij + a_ji`.
pub fn sym_sum(a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + a[(j, i)])
}

pub fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_sum(a) * 0.5
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape { expected: n, found: m.ncols() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::Domain(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }

    let mut a = symmetric_part(m);
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = max_abs(&a);

    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale * 1e-2 {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::Convergence { what: "Jacobi eigensolver", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));

    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut column = v.column(src).into_owned();
        if let Some(first) = column.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                column.neg_mut();
            }
        }
        vectors.set_column(col, &column);
    }
    Ok(SymmetricEigen { values, vectors })
}

// Annihilate a[p][q] with a plane rotation; accumulate it into v.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let eig = symmetric_eigen(&m).unwrap();
        assert_eq!(eig.values.as_slice(), &[3.0, 1.0]);
        assert_eq!(eig.vectors, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(symmetric_eigen(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_one_update() {
        let u = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let m = DMatrix::identity(3, 3) * 0.25 + &u * u.transpose() * 2.0;
        let eig = symmetric_eigen(&m).unwrap();
        assert!((eig.values[0] - 2.25).abs() < 1e-14);
        assert!((eig.values[1] - 0.25).abs() < 1e-14);
        assert!((eig.values[2] - 0.25).abs() < 1e-14);
        let v0 = eig.vectors.column(0);
        assert!((v0 - &u).norm() < 1e-13);
    }

    #[test]
    fn signs_are_fixed() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let eig = symmetric_eigen(&m).unwrap();
        for c in eig.vectors.column_iter() {
            let first = c.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn zero_matrix() {
        let eig = symmetric_eigen(&DMatrix::zeros(3, 3)).unwrap();
        assert!(eig.values.iter().all(|&v| v == 0.0));
    }
}
