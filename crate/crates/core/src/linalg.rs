//! Dense complex linear-algebra kernels shared by the module layers.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest singular value. Zero-sized matrices have norm 0.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    if m.nrows() == 0 {
        return (Vec::new(), m.clone());
    }
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Orthonormal basis for the range of a Hermitian positive semidefinite
/// matrix, columns of the result. `tol` is the eigenvalue cutoff.
pub fn psd_range_onb(m: &CMat, tol: f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol).collect();
    let mut out = CMat::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// Orthonormal basis of the range of an arbitrary matrix (columns), via the
/// Gram operator m m^*.
pub fn range_onb(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let gram = m * m.adjoint();
    psd_range_onb(&gram, tol)
}

/// Orthonormal basis of the kernel (columns), via the Gram operator m^* m.
pub fn nullspace_onb(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(m.ncols(), m.ncols());
    }
    let gram = m.adjoint() * m;
    let (vals, vecs) = herm_eigen(&gram);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= tol).collect();
    let mut out = CMat::zeros(m.ncols(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// Numerical rank with an integer-rounding guard: every eigenvalue of the
/// Gram operator must sit within `guard` of 0 or above `tol`, otherwise the
/// rank is ambiguous and we report an error.
pub fn rank_guarded(m: &CMat, tol: f64, guard: f64) -> crate::Result<usize> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(0);
    }
    let gram = m.adjoint() * m;
    let (vals, _) = herm_eigen(&gram);
    let mut rank = 0;
    for v in &vals {
        if *v > tol {
            rank += 1;
        } else if *v > guard {
            return Err(crate::Error::Numerical(format!(
                "ambiguous numerical rank: Gram eigenvalue {v:.3e} between guard {guard:.1e} and cutoff {tol:.1e}"
            )));
        }
    }
    Ok(rank)
}

/// Hermitian functional calculus: f applied to the eigenvalues.
pub fn herm_apply(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let d = CMat::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            cr(f(vals[i]))
        } else {
            ZERO
        }
    });
    &vecs * d * vecs.adjoint()
}

/// Modified Gram-Schmidt on the columns of `m`, dropping columns whose
/// residual norm falls below `tol`. Deterministic given the column order.
pub fn gram_schmidt(m: &CMat, tol: f64) -> CMat {
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for u in &cols {
                let c = u.dotc(&v);
                v -= u * c;
            }
        }
        let n = v.norm();
        if n > tol {
            cols.push(v / cr(n));
        }
    }
    let mut out = CMat::zeros(m.nrows(), cols.len());
    for (k, v) in cols.iter().enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Multiply a column-stacked vector through, fixing the global phase so the
/// largest-magnitude entry is real positive. Used to make solver output
/// reproducible across runs.
pub fn canonical_phase(m: &CMat) -> CMat {
    let mut best = ZERO;
    let mut best_norm = 0.0;
    for z in m.iter() {
        if z.norm() > best_norm + 1e-14 {
            best_norm = z.norm();
            best = *z;
        }
    }
    if best_norm < 1e-300 {
        return m.clone();
    }
    let phase = best.conj() / cr(best_norm);
    m * phase
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_mat(n: usize, m: usize, seed: u64) -> CMat {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, m, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn op_norm_matches_sv() {
        let m = rand_mat(5, 3, 1);
        let n1 = op_norm(&m);
        // power iteration cross-check on m^* m
        let g = m.adjoint() * &m;
        let (vals, _) = herm_eigen(&g);
        assert!((n1 * n1 - vals.last().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn nullspace_is_kernel() {
        let a = rand_mat(3, 5, 2);
        let ns = nullspace_onb(&a, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!(op_norm(&(&a * &ns)) < 1e-8);
        let gram = ns.adjoint() * &ns;
        assert!(op_norm(&(gram - CMat::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn herm_apply_sqrt() {
        let m = rand_mat(4, 4, 3);
        let h = &m * m.adjoint();
        let s = herm_apply(&h, |x| x.max(0.0).sqrt());
        assert!(op_norm(&(&s * &s - &h)) < 1e-8);
    }

    #[test]
    fn gram_schmidt_rank_reveals() {
        let a = rand_mat(6, 2, 4);
        let mut cols = CMat::zeros(6, 3);
        cols.set_column(0, &a.column(0));
        cols.set_column(1, &a.column(1));
        let dep = a.column(0) * cr(2.0) + a.column(1) * cr(-1.0);
        cols.set_column(2, &dep);
        let q = gram_schmidt(&cols, 1e-9);
        assert_eq!(q.ncols(), 2);
    }
}
