//! Dense linear algebra kernels used throughout the crate.
//!
//! Everything here is sized for operators up to a few thousand rows, which
//! is what the tensor memory budget admits.  The symmetric eigensolver is
//! the classic Householder reduction followed by implicit-shift QL; the
//! tridiagonal path uses Sturm sequence bisection so the radial oracle can
//! extract a handful of low eigenvalues from grids with tens of thousands
//! of points without forming dense factors.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Machine epsilon guard used by the QL sweep and the Sturm recurrence.
const EPS: f64 = 2.220446049250313e-16;

#[must_use]
pub fn identity(n: usize) -> Array2<f64> {
    Array2::eye(n)
}

#[must_use]
pub fn identity_c(n: usize) -> Array2<Complex64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[(i, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

#[must_use]
pub fn to_complex(a: &Array2<f64>) -> Array2<Complex64> {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Largest absolute entry; the residual norm used by every check suite.
#[must_use]
pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

#[must_use]
pub fn max_abs_c(a: &Array2<Complex64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.norm()))
}

#[must_use]
pub fn commutator(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.dot(b) - b.dot(a)
}

#[must_use]
pub fn commutator_c(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b) - b.dot(a)
}

/// `a^p` by repeated squaring.
#[must_use]
pub fn matrix_power_c(a: &Array2<Complex64>, p: usize) -> Array2<Complex64> {
    let n = a.nrows();
    let mut result = identity_c(n);
    let mut base = a.clone();
    let mut exp = p;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.dot(&base);
        }
        exp >>= 1;
        if exp > 0 {
            base = base.dot(&base);
        }
    }
    result
}

/// Kronecker product `a (x) b` in row-major layout.
#[must_use]
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let av = a[(i, j)];
            if av == 0.0 {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = av * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix.  Symmetry is the caller's responsibility; only the
/// full matrix is read.
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

pub fn symmetric_eigen(a: &Array2<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            n,
            a.ncols()
        )));
    }
    let mut v = a.clone();
    let mut d = vec![0.0_f64; n];
    let mut e = vec![0.0_f64; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok(SymmetricEigen {
        values: Array1::from(d),
        vectors: v,
    })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Array1<f64>> {
    Ok(symmetric_eigen(a)?.values)
}

/// Householder reduction of `v` to tridiagonal form, accumulating the
/// orthogonal transformation in `v`.
fn tred2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let delta = f * e[k] + g * d[k];
                    v[(k, j)] -= delta;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let delta = g * d[k];
                    v[(k, j)] -= delta;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL sweeps on the tridiagonal (d, e), rotations applied
/// to the columns of `v`.  Sorts ascending on exit.
fn tql2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= EPS * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence(format!(
                        "QL sweep stalled at row {l} after {iter} iterations"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
            d[l] += f;
            e[l] = 0.0;
        } else {
            d[l] += f;
            e[l] = 0.0;
        }
    }

    // Selection sort ascending, carrying eigenvector columns along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                let tmp = v[(row, i)];
                v[(row, i)] = v[(row, k)];
                v[(row, k)] = tmp;
            }
        }
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x` by the Sturm LDL^T count.
#[must_use]
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if q == 0.0 {
            q = EPS * (off[i - 1].abs() + EPS);
        }
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `m` eigenvalues of a symmetric tridiagonal matrix (`off` has
/// length `n-1`), ascending, via bisection on the Sturm count.
pub fn tridiagonal_lowest_eigenvalues(diag: &[f64], off: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || m == 0 || m > n || off.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "tridiagonal solve: n = {n}, off = {}, m = {m}",
            off.len()
        )));
    }
    // Gershgorin interval containing the whole spectrum.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i < n - 1 {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let span = (hi - lo).max(EPS);
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut a = lo;
        let mut b = hi;
        // count(x) >= j+1  <=>  the j-th smallest eigenvalue is < x.
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) >= j + 1 {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= EPS * span + f64::MIN_POSITIVE {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Eigenvector of a symmetric tridiagonal matrix for an approximate
/// eigenvalue, by inverse iteration with a partially pivoted solve.
pub fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    if off.len() + 1 != n || n < 2 {
        return Err(Error::InvalidArgument(
            "tridiagonal eigenvector: bad sizes".into(),
        ));
    }
    let scale = diag.iter().fold(0.0_f64, |m, &x| m.max(x.abs())).max(1.0);
    let shift = lambda + 1e-12 * scale;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 / ((i as f64) + 1.0).sqrt()).collect();
    normalize(&mut v);
    for _ in 0..4 {
        let mut w = solve_shifted_tridiagonal(diag, off, shift, &v)?;
        normalize(&mut w);
        v = w;
    }
    // Fix an overall sign so output is deterministic.
    let pivot = v
        .iter()
        .cloned()
        .fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    Ok(v)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Solves `(T - shift) x = b` by banded LU with partial pivoting; the
/// factor carries one fill-in superdiagonal.
fn solve_shifted_tridiagonal(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut dl = off.to_vec(); // subdiagonal, overwritten with multipliers
    let mut d: Vec<f64> = diag.iter().map(|&v| v - shift).collect();
    let mut du = off.to_vec(); // first superdiagonal
    let mut du2 = vec![0.0_f64; n.saturating_sub(2)]; // fill-in
    let mut swapped = vec![false; n.saturating_sub(1)];
    let mut x = b.to_vec();

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let pivot = if d[i] != 0.0 { d[i] } else { f64::MIN_POSITIVE };
            let fact = dl[i] / pivot;
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i < n - 2 {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }

    for i in 0..n - 1 {
        if swapped[i] {
            let temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - dl[i] * x[i];
        } else {
            x[i + 1] -= dl[i] * x[i];
        }
    }

    let safe = |v: f64| if v != 0.0 { v } else { f64::MIN_POSITIVE };
    x[n - 1] /= safe(d[n - 1]);
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / safe(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / safe(d[i]);
    }
    Ok(x)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite(i));
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Inverse of a lower triangular matrix by forward substitution.
pub fn lower_triangular_inverse(l: &Array2<f64>) -> Result<Array2<f64>> {
    let n = l.nrows();
    let mut inv: Array2<f64> = Array2::zeros((n, n));
    for col in 0..n {
        for i in col..n {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                sum -= l[(i, k)] * inv[(k, col)];
            }
            if l[(i, i)] == 0.0 {
                return Err(Error::NotPositiveDefinite(i));
            }
            inv[(i, col)] = sum / l[(i, i)];
        }
    }
    Ok(inv)
}

/// Solves `A x = b` for symmetric positive definite `A` via its Cholesky
/// factor computed once by the caller.
#[must_use]
pub fn cholesky_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    x
}

/// Number of eigenvalues with `|lambda| > threshold`.
#[must_use]
pub fn rank_from_eigenvalues(values: &Array1<f64>, threshold: f64) -> usize {
    values.iter().filter(|v| v.abs() > threshold).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reconstruct(eig: &SymmetricEigen) -> Array2<f64> {
        let n = eig.values.len();
        let mut d = Array2::zeros((n, n));
        for i in 0..n {
            d[(i, i)] = eig.values[i];
        }
        eig.vectors.dot(&d).dot(&eig.vectors.t())
    }

    #[test]
    fn eigen_of_diag_is_sorted_diagonal() {
        let mut a = Array2::zeros((3, 3));
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 1.0;
        a[(2, 2)] = 2.0;
        let eig = symmetric_eigen(&a).unwrap();
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[2], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let a = ndarray::arr2(&[[2.0, 1.0], [1.0, 2.0]]);
        let eig = symmetric_eigen(&a).unwrap();
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn tridiagonal_matches_dense_eigensolver() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64) * 0.1).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.01 * (i as f64)).collect();
        let mut dense = Array2::zeros((n, n));
        for i in 0..n {
            dense[(i, i)] = diag[i];
            if i < n - 1 {
                dense[(i, i + 1)] = off[i];
                dense[(i + 1, i)] = off[i];
            }
        }
        let all = symmetric_eigenvalues(&dense).unwrap();
        let lowest = tridiagonal_lowest_eigenvalues(&diag, &off, 5).unwrap();
        for j in 0..5 {
            assert_abs_diff_eq!(lowest[j], all[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn tridiagonal_eigenvector_has_small_residual() {
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64) * 0.3 + 1.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| 0.4).collect();
        let lam = tridiagonal_lowest_eigenvalues(&diag, &off, 1).unwrap()[0];
        let v = tridiagonal_eigenvector(&diag, &off, lam).unwrap();
        let mut res = 0.0_f64;
        for i in 0..n {
            let mut t = (diag[i] - lam) * v[i];
            if i > 0 {
                t += off[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                t += off[i] * v[i + 1];
            }
            res = res.max(t.abs());
        }
        assert!(res < 1e-9, "residual {res}");
    }

    #[test]
    fn cholesky_and_solve_roundtrip() {
        let a = ndarray::arr2(&[[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]);
        let l = cholesky_lower(&a).unwrap();
        assert!(max_abs(&(l.dot(&l.t()) - &a)) < 1e-14);
        let b = ndarray::arr1(&[1.0, -2.0, 0.5]);
        let x = cholesky_solve(&l, &b);
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-13));
        let linv = lower_triangular_inverse(&l).unwrap();
        assert!(max_abs(&(linv.dot(&l) - identity(3))) < 1e-13);
    }

    #[test]
    fn kron_shape_and_values() {
        let a = ndarray::arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_abs_diff_eq!(k[(0, 1)], 1.0);
        assert_abs_diff_eq!(k[(1, 2)], 2.0);
        assert_abs_diff_eq!(k[(3, 0)], 3.0);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let a = to_complex(&ndarray::arr2(&[[0.0, 1.0], [-1.0, 0.0]]));
        let p5 = matrix_power_c(&a, 5);
        let mut direct = identity_c(2);
        for _ in 0..5 {
            direct = direct.dot(&a);
        }
        assert!(max_abs_c(&(p5 - direct)) < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigen_reconstructs_random_symmetric(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed as usize % 12);
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            let eig = symmetric_eigen(&a).unwrap();
            prop_assert!(max_abs(&(reconstruct(&eig) - &a)) < 1e-11);
            let vtv = eig.vectors.t().dot(&eig.vectors);
            prop_assert!(max_abs(&(vtv - identity(n))) < 1e-11);
        }

        #[test]
        fn sturm_count_is_monotone(shift in -5.0f64..5.0) {
            let diag = [1.0, -0.5, 2.0, 0.3, 1.7];
            let off = [0.2, 0.9, -0.4, 0.1];
            let a = sturm_count(&diag, &off, shift);
            let b = sturm_count(&diag, &off, shift + 0.5);
            prop_assert!(b >= a);
        }
    }
}
