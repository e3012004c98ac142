//! Nonnegative trigonometric kernels.

mod fejer;
mod kahane;
pub mod poly;

pub use fejer::{
    cap_admissible, fejer_coeff, fejer_coeff_direct, fejer_coeffs_direct, fejer_eval,
    first_coeff_closed, lower_bound_eq3_factor, max_cap, FejerKernel,
};
pub use kahane::{
    degree_scan, derive_phi_bound, first_coeff_scan, kahane_nonneg_check, kahane_phi, kahane_poly,
    phi_normalization, phi_pieces, phi_second_derivative_at_zero, triangle_self_convolution,
    KahanePoly, NonnegReport, PhiBound,
};
