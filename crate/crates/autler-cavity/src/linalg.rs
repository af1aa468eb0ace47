//! Thin safe wrappers over dense complex LAPACK (LU solve, condition
//! estimate, eigenvalues), linked from the system OpenBLAS.
//!
//! Everything here takes column-major buffers because that is what LAPACK
//! expects; [`to_col_major`] converts from `ndarray`'s default layout. Sizes
//! in this crate range from 2x2 resolvents to bordered systems with a few
//! thousand unknowns, so dense direct methods are always appropriate.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

// Netlib documentation for the routines used here:
// zgemm:  https://www.netlib.org/lapack/explore-html/db/def/zgemm_8f.html
// zgetrf: https://www.netlib.org/lapack/explore-html/dd/dd1/zgetrf_8f.html
// zgetrs: https://www.netlib.org/lapack/explore-html/d3/d01/zgetrs_8f.html
// zgecon: https://www.netlib.org/lapack/explore-html/db/dc0/zgecon_8f.html
// zgeev:  https://www.netlib.org/lapack/explore-html/db/d55/zgeev_8f.html
// zheev:  https://www.netlib.org/lapack/explore-html/df/d9a/zheev_8f.html
#[link(name = "openblas")]
extern "C" {
    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const Complex64,
        a: *const Complex64,
        lda: *const i32,
        b: *const Complex64,
        ldb: *const i32,
        beta: *const Complex64,
        c: *mut Complex64,
        ldc: *const i32,
    );
    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );
    fn zgetrs_(
        trans: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *const Complex64,
        lda: *const i32,
        ipiv: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgecon_(
        norm: *const u8,
        n: *const i32,
        a: *const Complex64,
        lda: *const i32,
        anorm: *const f64,
        rcond: *mut f64,
        work: *mut Complex64,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut f64,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Dense matrix product A * B through BLAS. Both inputs must be in
/// `ndarray`'s standard (row-major) layout; the column-major expectation of
/// BLAS is met by computing the transposed product with swapped operands.
pub fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    assert_eq!(ca, rb, "inner dimensions must agree");
    let a_s = a.as_slice().expect("standard layout");
    let b_s = b.as_slice().expect("standard layout");
    let mut c = Array2::<Complex64>::zeros((ra, cb));
    let c_s = c.as_slice_mut().expect("standard layout");
    let (m, n, k) = (cb as i32, ra as i32, rb as i32);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    unsafe {
        zgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &m,
            &n,
            &k,
            &one,
            b_s.as_ptr(),
            &m,
            a_s.as_ptr(),
            &k,
            &zero,
            c_s.as_mut_ptr(),
            &m,
        );
    }
    c
}

/// Copies a square `ndarray` matrix into a column-major buffer.
pub fn to_col_major(a: &Array2<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix expected");
    let mut out = vec![Complex64::default(); n * n];
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = a[(i, j)];
        }
    }
    out
}

fn norm1_cm(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| a[j * n..(j + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization of a square matrix, retaining what zgecon and zgetrs
/// need for condition estimates and repeated solves.
#[derive(Debug)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    ipiv: Vec<i32>,
    anorm1: f64,
}

/// Factorizes a column-major square matrix in place. `info > 0` (exact
/// singularity) is reported as a LAPACK error for the caller to classify.
pub fn lu_factor_cm(mut a_cm: Vec<Complex64>, n: usize) -> Result<LuFactors> {
    assert_eq!(a_cm.len(), n * n);
    let anorm1 = norm1_cm(&a_cm, n);
    let ni = n as i32;
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgetrf_(
            &ni,
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zgetrf",
            info,
        });
    }
    Ok(LuFactors {
        n,
        lu: a_cm,
        ipiv,
        anorm1,
    })
}

impl LuFactors {
    /// Solves A x = b, overwriting `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let ni = self.n as i32;
        let one = 1i32;
        let mut info = 0i32;
        unsafe {
            zgetrs_(
                b"N".as_ptr(),
                &ni,
                &one,
                self.lu.as_ptr(),
                &ni,
                self.ipiv.as_ptr(),
                b.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack {
                routine: "zgetrs",
                info,
            });
        }
        Ok(())
    }

    /// Reciprocal condition number estimate in the 1-norm.
    pub fn rcond(&self) -> Result<f64> {
        let ni = self.n as i32;
        let mut rcond = 0.0f64;
        let mut work = vec![Complex64::default(); 2 * self.n];
        let mut rwork = vec![0.0f64; 2 * self.n];
        let mut info = 0i32;
        unsafe {
            zgecon_(
                b"1".as_ptr(),
                &ni,
                self.lu.as_ptr(),
                &ni,
                &self.anorm1,
                &mut rcond,
                work.as_mut_ptr(),
                rwork.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack {
                routine: "zgecon",
                info,
            });
        }
        Ok(rcond)
    }
}

/// Direct dense solve of A x = b for square A.
pub fn solve_dense(a: &Array2<Complex64>, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let lu = lu_factor_cm(to_col_major(a), a.nrows())?;
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x)?;
    Ok(x)
}

/// Eigenvalues of a general square complex matrix (no eigenvectors).
pub fn eigenvalues(a: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut a_cm = to_col_major(a);
    let mut w = vec![Complex64::default(); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    // Workspace query, then the real call.
    let mut query = Complex64::default();
    let m1 = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            &mut query,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zgeev",
            info,
        });
    }
    let lwork = query.re as i32;
    let mut work = vec![Complex64::default(); lwork.max(1) as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zgeev",
            info,
        });
    }
    Ok(w)
}

/// Eigenvalues of a Hermitian matrix, ascending. Used for positivity checks
/// of density matrices.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut a_cm = to_col_major(a);
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    let mut info = 0i32;
    let mut query = Complex64::default();
    let m1 = -1i32;
    unsafe {
        zheev_(
            b"N".as_ptr(),
            b"U".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut query,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheev",
            info,
        });
    }
    let lwork = query.re as i32;
    let mut work = vec![Complex64::default(); lwork.max(1) as usize];
    unsafe {
        zheev_(
            b"N".as_ptr(),
            b"U".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheev",
            info,
        });
    }
    Ok(w)
}
