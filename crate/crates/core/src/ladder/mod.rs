//! Exact-rational machinery for ladder operators of `J²`, plus numerical
//! ladder checks.

mod alpha;
mod checks;
mod jpoly;

pub use alpha::{
    determinant, extract_coefficients, poly_operator, sigma_next_to_last_closed_form, right_functions,
    solve_sigma, AlphaMatrix, ExtractedColumn, Family, RightFunction, SigmaVector,
};
pub use checks::{check_power_identity, check_rlo, check_rlo_compose};
pub use jpoly::{rational, JPoly};
