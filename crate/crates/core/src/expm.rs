//! Matrix exponentials for the small qubit-cavity blocks.
//!
//! Two independent routes: scaling-and-squaring with a degree-13 Padé
//! approximant (general matrices), and spectral decomposition (Hermitian
//! generators only). The spectral route is exactly unitary up to
//! eigenvector orthogonality, which matters when the generator norm is
//! large (lab-frame optical phases of order 1e7 rad) and squaring would
//! amplify roundoff.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpmMethod {
    Pade,
    #[default]
    Eigen,
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring.
pub fn expm_pade(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm_pade needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::from(0.5f64.powi(s));
    let b = |i: usize| Complex64::from(PADE13[i]);
    let eye = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &eye * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `exp(-i h)` for Hermitian `h` via its eigendecomposition.
pub fn unitary_eigen(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|lambda| Complex64::from_polar(1.0, -lambda)),
    );
    v * phases * v.adjoint()
}

/// `exp(-i h)` for Hermitian `h`.
pub fn unitary_from_hermitian(h: &DMatrix<Complex64>, method: ExpmMethod) -> DMatrix<Complex64> {
    match method {
        ExpmMethod::Pade => expm_pade(&(h * Complex64::new(0.0, -1.0))),
        ExpmMethod::Eigen => unitary_eigen(h),
    }
}
