//! Hermitian eigenvalues through LAPACK (the system OpenBLAS).

use std::os::raw::{c_char, c_int};
use std::sync::Once;

use lapack_sys::__BindgenComplex;
use spiked_core::Complex64;

use crate::{Error, Result};

extern "C" {
    fn openblas_set_num_threads(n: c_int);
}

/// Trials already run in parallel; threaded BLAS inside each would only
/// oversubscribe the cores.
pub(crate) fn single_threaded_blas() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| unsafe { openblas_set_num_threads(1) });
}

/// From this size on the two-stage tridiagonal reduction is faster.
pub const TWO_STAGE_MIN: usize = 256;

/// Reusable workspace for eigenvalues-only `zheevd`.
pub(crate) struct HermitianSolver {
    n: usize,
    two_stage: bool,
    work: Vec<Complex64>,
    rwork: Vec<f64>,
    iwork: Vec<c_int>,
    w: Vec<f64>,
}

type Zheevd = unsafe extern "C" fn(
    *const c_char,
    *const c_char,
    *const c_int,
    *mut __BindgenComplex<f64>,
    *const c_int,
    *mut f64,
    *mut __BindgenComplex<f64>,
    *const c_int,
    *mut f64,
    *const c_int,
    *mut c_int,
    *const c_int,
    *mut c_int,
);

impl HermitianSolver {
    pub fn new(n: usize) -> Result<Self> {
        single_threaded_blas();
        let mut s = HermitianSolver {
            n,
            two_stage: n >= TWO_STAGE_MIN,
            work: vec![Complex64::new(0.0, 0.0); 1],
            rwork: vec![0.0; 1],
            iwork: vec![0; 1],
            w: vec![0.0; n],
        };
        // workspace query
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        s.call(&mut a, -1)?;
        let lwork = (s.work[0].re as usize).max(1);
        let lrwork = (s.rwork[0] as usize).max(1);
        let liwork = (s.iwork[0] as usize).max(1);
        s.work = vec![Complex64::new(0.0, 0.0); lwork];
        s.rwork = vec![0.0; lrwork];
        s.iwork = vec![0; liwork];
        Ok(s)
    }

    fn call(&mut self, a: &mut [Complex64], query: c_int) -> Result<()> {
        let n = self.n as c_int;
        let (lwork, lrwork, liwork) = if query < 0 {
            (-1, -1, -1)
        } else {
            (self.work.len() as c_int, self.rwork.len() as c_int, self.iwork.len() as c_int)
        };
        let f: Zheevd = if self.two_stage { lapack_sys::zheevd_2stage_ } else { lapack_sys::zheevd_ };
        let mut info: c_int = 0;
        // Complex64 is repr(C) {re, im}, the same layout as the bindgen type.
        unsafe {
            f(
                b"N".as_ptr() as *const c_char,
                b"U".as_ptr() as *const c_char,
                &n,
                a.as_mut_ptr() as *mut __BindgenComplex<f64>,
                &n.max(1),
                self.w.as_mut_ptr(),
                self.work.as_mut_ptr() as *mut __BindgenComplex<f64>,
                &lwork,
                self.rwork.as_mut_ptr(),
                &lrwork,
                self.iwork.as_mut_ptr(),
                &liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack(info));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order. Only the upper triangle of the
    /// column-major `a` is read, and `a` is overwritten.
    pub fn eigenvalues(&mut self, a: &mut [Complex64]) -> Result<&[f64]> {
        assert_eq!(a.len(), self.n * self.n);
        self.call(a, 0)?;
        Ok(&self.w)
    }
}

