//! Forward operators on M_{n,m} and on the plane cylinder V_{n,n-k} × M_{n-k,m}.

pub mod cwt;
pub mod radon;
pub mod ridgelet;
pub mod riesz;
pub mod semyanistyi;

pub use cwt::{check_radial, convolve, wavelet_transform, wavelet_transform_spectral};
pub use radon::{
    canonical_frame, dual_radon, dual_radon_grid, duality_check, fuglede_check, projection_slice_check, projection_slice_check_grid, radon_transform, Duality,
    FrameSet, FugledePoint, MatrixPlane, ProjectionSlice, RadonField, Slice,
};
pub use ridgelet::{dual_ridgelet, intertwining_w, ridgelet_transform};
pub use riesz::{riesz_multiplier_array, riesz_multiplier_at, riesz_potential_integer, riesz_potential_kernel, riesz_potential_multiplier, RieszMultiplier};
pub use semyanistyi::{semyanistyi, semyanistyi_kernel_at};
