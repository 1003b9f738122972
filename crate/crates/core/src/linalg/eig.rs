//! General complex eigensolver for small dense matrices: balancing,
//! Householder reduction to Hessenberg form, shifted complex QR to Schur
//! form, back-substitution for eigenvectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_DIM: usize = 16;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;
const MAX_INVERSE_ENTRY: f64 = 1e10;

/// Right eigenvectors are unit-norm columns of `right`. Columns of `left`
/// satisfy `left_k^H A = lambda_k left_k^H` and `left_k^H right_j = delta_kj`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    pub right: DMatrix<C64>,
    pub left: DMatrix<C64>,
}

/// Eigenvalues only. Works for defective matrices too.
pub fn eigenvalues_dense(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur = Schur::compute(a, false)?;
    Ok(schur.eigenvalues())
}

pub fn eig_dense(a: &DMatrix<C64>) -> Result<EigenDecomposition> {
    let schur = Schur::compute(a, true)?;
    let n = a.nrows();
    let eigenvalues = schur.eigenvalues();
    let mut right = schur.eigenvectors();
    schur.balance.back_transform(&mut right);
    for k in 0..n {
        let norm = right.column(k).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical(format!("eigenvector {k} has norm {norm}")));
        }
        right.column_mut(k).unscale_mut(norm);
    }
    let inv = right.clone().try_inverse().ok_or_else(|| {
        Error::Numerical("eigenvector matrix is singular; the matrix may be defective".into())
    })?;
    // Columns have unit norm, so a huge inverse means nearly parallel
    // eigenvectors: the matrix is defective to working precision.
    let inv_max = inv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(inv_max < MAX_INVERSE_ENTRY) {
        return Err(Error::Numerical(format!(
            "eigenvector matrix is ill-conditioned (inverse entry {inv_max:e})"
        )));
    }
    let left = inv.adjoint();
    Ok(EigenDecomposition {
        eigenvalues,
        right,
        left,
    })
}

fn check_input(a: &DMatrix<C64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Usage(format!(
            "eigensolver expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 || a.nrows() > MAX_DIM {
        return Err(Error::Usage(format!(
            "eigensolver supports dimensions 1..={MAX_DIM}, got {}",
            a.nrows()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

struct Balance {
    lo: usize,
    hi: usize,
    /// Row/column swaps in the order they were applied.
    swaps: Vec<(usize, usize)>,
    scale: Vec<f64>,
}

impl Balance {
    /// Permutes rows and columns to isolate eigenvalues, then scales the
    /// remaining block by powers of two to equalise row and column norms.
    fn apply(a: &mut DMatrix<C64>) -> Self {
        let n = a.nrows();
        let mut swaps = Vec::new();
        let mut lo = 0;
        let mut hi = n - 1;
        let zero = C64::new(0.0, 0.0);

        let swap = |a: &mut DMatrix<C64>, i: usize, j: usize| {
            if i != j {
                a.swap_rows(i, j);
                a.swap_columns(i, j);
            }
        };

        loop {
            let mut changed = false;
            while lo < hi {
                let row = (lo..=hi)
                    .rev()
                    .find(|&j| (lo..=hi).all(|i| i == j || a[(j, i)] == zero));
                match row {
                    Some(j) => {
                        swap(a, j, hi);
                        swaps.push((j, hi));
                        hi -= 1;
                        changed = true;
                    }
                    None => break,
                }
            }
            while lo < hi {
                let col = (lo..=hi).find(|&j| (lo..=hi).all(|i| i == j || a[(i, j)] == zero));
                match col {
                    Some(j) => {
                        swap(a, j, lo);
                        swaps.push((j, lo));
                        lo += 1;
                        changed = true;
                    }
                    None => break,
                }
            }
            if !changed || lo >= hi {
                break;
            }
        }

        let mut scale = vec![1.0; n];
        if lo < hi {
            loop {
                let mut converged = true;
                for i in lo..=hi {
                    let mut c = 0.0;
                    let mut r = 0.0;
                    for j in lo..=hi {
                        if j != i {
                            c += a[(j, i)].l1_norm();
                            r += a[(i, j)].l1_norm();
                        }
                    }
                    if c == 0.0 || r == 0.0 {
                        continue;
                    }
                    let s = c + r;
                    let mut f = 1.0;
                    while c < r / 2.0 {
                        c *= 2.0;
                        r /= 2.0;
                        f *= 2.0;
                    }
                    while c >= r * 2.0 {
                        c /= 2.0;
                        r *= 2.0;
                        f /= 2.0;
                    }
                    if c + r < 0.95 * s {
                        converged = false;
                        scale[i] *= f;
                        for j in 0..n {
                            a[(j, i)] *= f;
                            a[(i, j)] /= f;
                        }
                    }
                }
                if converged {
                    break;
                }
            }
        }
        Balance {
            lo,
            hi,
            swaps,
            scale,
        }
    }

    /// Maps eigenvectors of the balanced matrix back to the original one.
    fn back_transform(&self, v: &mut DMatrix<C64>) {
        for (i, &s) in self.scale.iter().enumerate() {
            if s != 1.0 {
                v.row_mut(i).scale_mut(s);
            }
        }
        for &(i, j) in self.swaps.iter().rev() {
            if i != j {
                v.swap_rows(i, j);
            }
        }
    }
}

struct Schur {
    t: DMatrix<C64>,
    z: Option<DMatrix<C64>>,
    balance: Balance,
}

impl Schur {
    fn compute(a: &DMatrix<C64>, want_vectors: bool) -> Result<Self> {
        check_input(a)?;
        let n = a.nrows();
        let mut h = a.clone();
        let balance = Balance::apply(&mut h);
        let mut z = want_vectors.then(|| DMatrix::<C64>::identity(n, n));
        if balance.lo < balance.hi {
            hessenberg(&mut h, z.as_mut(), balance.lo, balance.hi);
            qr_iterate(&mut h, z.as_mut(), balance.lo, balance.hi)?;
        }
        Ok(Schur { t: h, z, balance })
    }

    fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Eigenvectors of the balanced matrix (columns, unnormalised).
    fn eigenvectors(&self) -> DMatrix<C64> {
        let t = &self.t;
        let n = t.nrows();
        let t_norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let small = (f64::EPSILON * t_norm).max(f64::MIN_POSITIVE);
        let mut x = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            x[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut sum = C64::new(0.0, 0.0);
                for j in i + 1..=k {
                    sum += t[(i, j)] * x[(j, k)];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() < small {
                    d = C64::new(small, 0.0);
                }
                x[(i, k)] = -sum / d;
            }
            let norm = x.column(k).norm();
            if norm > 1e100 {
                x.column_mut(k).unscale_mut(norm);
            }
        }
        match &self.z {
            Some(z) => z * x,
            None => x,
        }
    }
}

/// Householder reduction of rows/columns `lo..=hi` to upper Hessenberg form.
fn hessenberg(h: &mut DMatrix<C64>, mut z: Option<&mut DMatrix<C64>>, lo: usize, hi: usize) {
    let n = h.nrows();
    for col in lo..hi.saturating_sub(1) {
        let len = hi - col;
        let x: DVector<C64> = DVector::from_fn(len, |i, _| h[(col + 1 + i, col)]);
        let tail: f64 = x.iter().skip(1).map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = x[0];
        let xnorm = x.norm();
        let phase = if alpha.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        let mut v = x;
        v[0] -= beta;
        let vnorm = v.norm();
        v.unscale_mut(vnorm);

        // H = I - 2 v v^H applied on the left to rows col+1..=hi.
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..len {
                s += v[i].conj() * h[(col + 1 + i, j)];
            }
            s *= 2.0;
            for i in 0..len {
                h[(col + 1 + i, j)] -= v[i] * s;
            }
        }
        // ... and on the right to columns col+1..=hi.
        let apply_right = |m: &mut DMatrix<C64>| {
            for r in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..len {
                    s += m[(r, col + 1 + i)] * v[i];
                }
                s *= 2.0;
                for i in 0..len {
                    m[(r, col + 1 + i)] -= s * v[i].conj();
                }
            }
        };
        apply_right(h);
        if let Some(z) = z.as_deref_mut() {
            apply_right(z);
        }
        h[(col + 1, col)] = beta;
        for i in col + 2..=hi {
            h[(i, col)] = C64::new(0.0, 0.0);
        }
    }
}

/// Real `c` and complex `s` with `[[c, s], [-conj(s), c]] [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let an = a.norm();
    let norm = an.hypot(b.norm());
    (an / norm, (a / an) * b.conj() / norm)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let den_plus = p + disc;
    let den_minus = p - disc;
    let den = if den_plus.norm() >= den_minus.norm() {
        den_plus
    } else {
        den_minus
    };
    if den.norm() == 0.0 {
        d
    } else {
        d - bc / den
    }
}

fn qr_iterate(
    h: &mut DMatrix<C64>,
    mut z: Option<&mut DMatrix<C64>>,
    lo: usize,
    hi_start: usize,
) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let mut hi = hi_start;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * (hi_start - lo + 1);

    while hi > lo {
        let window_norm = {
            let mut m = 0.0f64;
            for i in lo..=hi {
                for j in lo..=hi {
                    m = m.max(h[(i, j)].norm());
                }
            }
            m
        };
        let mut m = hi;
        while m > lo {
            let mut s = h[(m - 1, m - 1)].l1_norm() + h[(m, m)].l1_norm();
            if s == 0.0 {
                s = window_norm;
            }
            if h[(m, m - 1)].l1_norm() <= eps * s {
                h[(m, m - 1)] = C64::new(0.0, 0.0);
                break;
            }
            m -= 1;
        }
        if m == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > budget {
            return Err(Error::Numerical("QR iteration did not converge".into()));
        }
        let sigma = if iter % 10 == 0 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in m..=hi {
            h[(i, i)] -= sigma;
        }
        let mut rotations = Vec::with_capacity(hi - m);
        for i in m..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            for j in 0..n {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = x * c + s * y;
                h[(i + 1, j)] = -s.conj() * x + y * c;
            }
            h[(i + 1, i)] = C64::new(0.0, 0.0);
            rotations.push((i, c, s));
        }
        let rotate_columns = |m: &mut DMatrix<C64>, i: usize, c: f64, s: C64| {
            for r in 0..n {
                let x = m[(r, i)];
                let y = m[(r, i + 1)];
                m[(r, i)] = x * c + y * s.conj();
                m[(r, i + 1)] = -x * s + y * c;
            }
        };
        for &(i, c, s) in &rotations {
            rotate_columns(h, i, c, s);
            if let Some(z) = z.as_deref_mut() {
                rotate_columns(z, i, c, s);
            }
        }
        for i in m..=hi {
            h[(i, i)] += sigma;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn norm_inf(a: &DMatrix<C64>) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_decomposition(a: &DMatrix<C64>, tol: f64) {
        let dec = eig_dense(a).unwrap();
        let n = a.nrows();
        let scale = norm_inf(a).max(1.0);
        for k in 0..n {
            let v = dec.right.column(k);
            let res = a * v - v * dec.eigenvalues[k];
            assert!(res.norm() <= tol * scale, "right residual {} for k={k}", res.norm());
            let u = dec.left.column(k);
            let res = u.adjoint() * a - u.adjoint() * dec.eigenvalues[k];
            assert!(
                res.norm() <= tol * scale * u.norm(),
                "left residual {} for k={k}",
                res.norm()
            );
        }
        let overlap = dec.left.adjoint() * &dec.right;
        let err = norm_inf(&(overlap - DMatrix::identity(n, n)));
        assert!(err < 1e-10, "biorthonormality error {err}");
    }

    #[test]
    fn random_matrices_all_sizes() {
        for n in 1..=16 {
            for seed in 0..5 {
                check_decomposition(&random_matrix(n, 100 * n as u64 + seed), 1e-11);
            }
        }
    }

    #[test]
    fn badly_scaled_matrix() {
        let mut a = random_matrix(8, 7);
        for i in 0..8 {
            for j in 0..8 {
                a[(i, j)] *= 10f64.powi(i as i32 - j as i32);
            }
        }
        let dec = eig_dense(&a).unwrap();
        let mut reference = eigenvalues_dense(&a).unwrap();
        let mut got = dec.eigenvalues.clone();
        let key = |z: &C64| (z.re, z.im);
        reference.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        got.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        assert_eq!(reference, got);
        let trace: C64 = (0..8).map(|i| a[(i, i)]).sum();
        let sum: C64 = got.iter().sum();
        assert!((trace - sum).norm() < 1e-9 * norm_inf(&a));
    }

    #[test]
    fn triangular_input_is_exact() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[c(-1.0, 2.0), c(0.3, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(-0.5, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -7.0)],
        );
        let mut ev = eigenvalues_dense(&a).unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert_eq!(ev, vec![c(-1.0, 2.0), c(-0.5, 0.0), c(0.0, -7.0)]);
        check_decomposition(&a, 1e-14);
    }

    #[test]
    fn permuted_triangular_input_is_exact() {
        // P^T U P with a cyclic permutation: isolation must recover U exactly.
        let u = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 2.0, 3.0, 4.0, 0.0, 5.0, 6.0, 7.0, 0.0, 0.0, 8.0, 9.0, 0.0, 0.0, 0.0, 10.0].map(|x| c(x, 0.1 * x)),
        );
        let perm = [2usize, 0, 3, 1];
        let a = DMatrix::from_fn(4, 4, |i, j| u[(perm[i], perm[j])]);
        let mut ev: Vec<f64> = eigenvalues_dense(&a).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![1.0, 5.0, 8.0, 10.0]);
    }

    #[test]
    fn hermitian_matrix_has_real_spectrum() {
        let b = random_matrix(6, 3);
        let a = &b + b.adjoint();
        let ev = eigenvalues_dense(&a).unwrap();
        for z in &ev {
            assert!(z.im.abs() < 1e-12);
        }
        let mut ours: Vec<f64> = ev.iter().map(|z| z.re).collect();
        ours.sort_by(f64::total_cmp);
        let mut reference: Vec<f64> = nalgebra::SymmetricEigen::new(a).eigenvalues.iter().cloned().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonalizable_with_repeated_eigenvalues() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.5), c(-2.0, 0.5)]));
        let s = random_matrix(4, 11) + DMatrix::identity(4, 4) * c(3.0, 0.0);
        let a = &s * d * s.clone().try_inverse().unwrap();
        let ev = eigenvalues_dense(&a).unwrap();
        for z in &ev {
            let near = (z - c(1.0, 0.0)).norm().min((z - c(-2.0, 0.5)).norm());
            assert!(near < 1e-7, "{z}");
        }
    }

    #[test]
    fn defective_matrix_eigenvalues_only() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(eigenvalues_dense(&a).unwrap(), vec![c(1.0, 0.0); 2]);
        assert!(matches!(eig_dense(&a), Err(Error::Numerical(_))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(eig_dense(&DMatrix::zeros(2, 3)), Err(Error::Usage(_))));
        assert!(matches!(eig_dense(&DMatrix::zeros(17, 17)), Err(Error::Usage(_))));
        let mut a = DMatrix::zeros(2, 2);
        a[(1, 0)] = c(f64::INFINITY, 0.0);
        assert!(matches!(eig_dense(&a), Err(Error::Domain(_))));
    }

    #[test]
    fn givens_zeroes_second_component() {
        for (a, b) in [(c(1.0, 2.0), c(-0.5, 0.25)), (c(0.0, 0.0), c(0.0, 3.0)), (c(2.0, 0.0), c(0.0, 0.0))] {
            let (cs, s) = givens(a, b);
            let second = -s.conj() * a + b * cs;
            assert!(second.norm() < 1e-15);
            assert!((cs * cs + s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }
}
