//! Dense complex matrix kernels.

mod eigen;
mod matrix;
mod ops;

pub use eigen::{eigenvalues, hermitian_eigen, hessenberg, singular_values, HermitianEigen};
pub use matrix::{Matrix, DEFAULT_DIM_CAP};
pub use ops::{
    check_invertible, hermitian_min_eig, int_power, inverse, operator_norm, pinv_apply, pinv_psd, psd_eigen,
    range_projector, sqrt_psd, Tolerances,
};
