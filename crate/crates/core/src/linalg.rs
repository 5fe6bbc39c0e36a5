//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Relative jitter levels tried, in order, when a factorization fails.
const JITTER_LEVELS: [f64; 7] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5];
const MAX_JITTER: f64 = 1e-4;

/// Cholesky factor of a symmetric positive-definite matrix, plus the
/// diagonal jitter that had to be added to obtain it.
pub struct SpdFactor {
    pub chol: Cholesky<f64, Dyn>,
    pub jitter: f64,
}

impl SpdFactor {
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }

    /// `v^T A^{-1} v` through a single triangular solve.
    pub fn quadform(&self, v: &DVector<f64>) -> f64 {
        let l = self.chol.l_dirty();
        let w = l
            .solve_lower_triangular(v)
            .expect("cholesky factor has a nonzero diagonal");
        w.norm_squared()
    }

    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

/// Factorizes `m`, escalating a diagonal jitter of `level * scale` from
/// 1e-10 up to 1e-4 when the plain factorization fails.
pub fn spd_factor(m: &DMatrix<f64>, scale: f64) -> Option<SpdFactor> {
    let scale = if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    };
    let levels = JITTER_LEVELS.iter().copied().chain(std::iter::once(MAX_JITTER));
    for level in levels {
        let jitter = level * scale;
        let mut a = m.clone();
        if jitter > 0.0 {
            for i in 0..a.nrows() {
                a[(i, i)] += jitter;
            }
        }
        if let Some(chol) = Cholesky::new(a) {
            if chol.l_dirty().diagonal().iter().all(|d| d.is_finite() && *d > 0.0) {
                return Some(SpdFactor { chol, jitter });
            }
        }
    }
    None
}

/// Symmetrizes in place: `(A + A^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Greedy diagonal-pivoted Cholesky of a positive-semidefinite matrix given
/// implicitly by its diagonal and a column oracle.
///
/// Returns `L` (n x r) with `L L^T` reproducing the matrix up to a trace
/// residual below `tol`. Returns `None` when a pivot is negative beyond
/// `-tol`, i.e. the matrix is not positive semidefinite.
pub fn pivoted_cholesky<F>(diag: &[f64], mut column: F, tol: f64) -> Option<DMatrix<f64>>
where
    F: FnMut(usize) -> Vec<f64>,
{
    let n = diag.len();
    let mut residual = diag.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];

    for _ in 0..n {
        let (piv, &dmax) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        if dmax <= tol {
            break;
        }
        if !dmax.is_finite() {
            return None;
        }
        used[piv] = true;
        let raw = column(piv);
        let root = dmax.sqrt();
        let mut l = vec![0.0; n];
        for i in 0..n {
            if used[i] && i != piv {
                continue;
            }
            let mut v = raw[i];
            for c in &cols {
                v -= c[i] * c[piv];
            }
            l[i] = v / root;
        }
        l[piv] = root;
        for i in 0..n {
            if !used[i] {
                residual[i] -= l[i] * l[i];
                if residual[i] < -tol {
                    return None;
                }
            }
        }
        residual[piv] = 0.0;
        cols.push(l);
    }

    let r = cols.len();
    Some(DMatrix::from_fn(n, r, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_rescues_rank_deficient_matrix() {
        let m = DMatrix::from_element(3, 3, 1.0);
        let f = spd_factor(&m, 1.0).expect("jitter should rescue a PSD matrix");
        assert!(f.jitter > 0.0 && f.jitter <= MAX_JITTER);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(spd_factor(&m, 1.0).is_none());
    }

    #[test]
    fn quadform_matches_solve() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let v = DVector::from_vec(vec![1.0, -2.0]);
        let f = spd_factor(&m, 1.0).unwrap();
        let direct = v.dot(&f.solve(&v));
        assert!((f.quadform(&v) - direct).abs() < 1e-14);
    }

    #[test]
    fn pivoted_cholesky_reconstructs_low_rank() {
        // rank-2 matrix u u^T + w w^T
        let u = [1.0, 2.0, 3.0, 4.0];
        let w = [0.5, -1.0, 0.0, 2.0];
        let m = DMatrix::from_fn(4, 4, |i, j| u[i] * u[j] + w[i] * w[j]);
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)]).collect();
        let l = pivoted_cholesky(&diag, |j| m.column(j).iter().copied().collect(), 1e-12).unwrap();
        assert_eq!(l.ncols(), 2);
        let rec = &l * l.transpose();
        assert!((rec - m).abs().max() < 1e-10);
    }
}
