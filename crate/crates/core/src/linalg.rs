//! Small dense linear algebra: Gaussian elimination and a Jacobi
//! eigensolver. Everything here operates on matrices of dimension <= 8,
//! which covers the rate-equation systems and the fit normal equations.

use crate::error::{Error, Result};
use crate::real::Real;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major, `n x n`. Returns the solution vector or
/// [`Error::SingularSystem`] when a pivot falls below `n * eps * max|a|`.
pub fn solve_linear<R: Real>(a: &mut [Vec<R>], b: &mut [R]) -> Result<Vec<R>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n) && b.len() == n);

    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(R::zero(), |m, &v| m.max(v.abs()))
        .max(R::one());
    let tiny = R::lit(n as f64) * R::epsilon() * scale;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot_row][col].abs() <= tiny {
            return Err(Error::SingularSystem { pivot: col });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        let pivot = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor == R::zero() {
                continue;
            }
            for k in col..n {
                let upper = a[col][k];
                a[row][k] = a[row][k] - factor * upper;
            }
            let rhs = b[col];
            b[row] = b[row] - factor * rhs;
        }
    }

    let mut x = vec![R::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Inverse of a small square matrix via column-wise elimination.
pub fn invert<R: Real>(matrix: &[Vec<R>]) -> Result<Vec<Vec<R>>> {
    let n = matrix.len();
    let mut inverse = vec![vec![R::zero(); n]; n];
    for col in 0..n {
        let mut a: Vec<Vec<R>> = matrix.to_vec();
        let mut e = vec![R::zero(); n];
        e[col] = R::one();
        let x = solve_linear(&mut a, &mut e)?;
        for row in 0..n {
            inverse[row][col] = x[row];
        }
    }
    Ok(inverse)
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenpairs sorted by ascending eigenvalue; eigenvectors are unit
/// norm. Converges quadratically; 50 sweeps is far more than dimension 8
/// ever needs.
pub fn symmetric_eigen<R: Real>(matrix: &[Vec<R>]) -> Vec<(R, Vec<R>)> {
    let n = matrix.len();
    let mut a: Vec<Vec<R>> = matrix.to_vec();
    let mut v: Vec<Vec<R>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { R::one() } else { R::zero() })
                .collect()
        })
        .collect();

    let norm = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(R::zero(), |m, &x| m.max(x.abs()))
        .max(R::one());
    let tol = R::epsilon() * norm;

    for _sweep in 0..50 {
        let mut off = R::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p][q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= tol {
                    continue;
                }
                // Classic 2x2 Jacobi rotation annihilating a[p][q].
                let theta = (a[q][q] - a[p][p]) / (R::lit(2.0) * a[p][q]);
                let t = {
                    let sign = if theta >= R::zero() { R::one() } else { -R::one() };
                    sign / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut pairs: Vec<(R, Vec<R>)> = (0..n)
        .map(|i| (a[i][i], (0..n).map(|k| v[k][i]).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    pairs
}

/// Eigendecomposition of a 3x3 Hermitian matrix `H = re + i*im`
/// (`re` symmetric, `im` antisymmetric).
///
/// Implemented by embedding into the real symmetric 6x6 block matrix
/// `[[re, -im], [im, re]]`, whose spectrum is that of `H` doubled. Returns
/// the three eigenvalues ascending together with the basis populations
/// `|<k|psi_i>|^2` of each eigenvector (`populations[i][k]`).
pub fn hermitian3_eigen<R: Real>(re: &[[R; 3]; 3], im: &[[R; 3]; 3]) -> ([R; 3], [[R; 3]; 3]) {
    let mut m = vec![vec![R::zero(); 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = re[i][j];
            m[i + 3][j + 3] = re[i][j];
            m[i][j + 3] = -im[i][j];
            m[i + 3][j] = im[i][j];
        }
    }
    let pairs = symmetric_eigen(&m);

    let mut values = [R::zero(); 3];
    let mut populations = [[R::zero(); 3]; 3];
    for i in 0..3 {
        // Each eigenvalue of H appears twice in the embedding; take one
        // representative per consecutive pair.
        let (value, ref vector) = pairs[2 * i];
        values[i] = value;
        for k in 0..3 {
            populations[i][k] = vector[k] * vector[k] + vector[k + 3] * vector[k + 3];
        }
        // Normalize against rounding in the embedded eigenvector.
        let total: R = populations[i].iter().copied().sum();
        if total > R::zero() {
            for k in 0..3 {
                populations[i][k] = populations[i][k] / total;
            }
        }
    }
    (values, populations)
}
