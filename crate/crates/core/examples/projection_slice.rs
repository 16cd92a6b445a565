//! Fourier transform of a Radon slice against the Fourier transform of the
//! function, in closed form for a shifted Gaussian and on a lattice.

use matwave::field::{GaussianMixtureField, GridSpec};
use matwave::linalg::rect;
use matwave::sampling::{sample_stiefel, RngStream};
use matwave::transforms::radon::{projection_slice_check, projection_slice_check_grid};

fn main() -> matwave::Result<()> {
    let mut rng = RngStream::new(3, 0).rng();

    let f = GaussianMixtureField::shifted_gaussian(rect(4, 2, &[0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4, 0.2]), 1.0);
    for _ in 0..4 {
        let xi = sample_stiefel(4, 3, &mut rng);
        let b = rect(3, 2, &[0.4, -0.1, 0.2, 0.3, -0.5, 0.1]);
        let r = projection_slice_check(&f, &xi, &b)?;
        println!("(4,2,1) closed form: {:.6e} vs {:.6e}  rel {:.1e}", r.lhs, r.rhs, r.rel_err);
    }

    let g = GaussianMixtureField::gaussian(2, 1, 1.0).to_grid(GridSpec::new(2, 1, 64, 8.0)?)?;
    for _ in 0..3 {
        let xi = sample_stiefel(2, 1, &mut rng);
        let b = rect(1, 1, &[0.35]);
        let r = projection_slice_check_grid(&g, &xi, &b)?;
        println!("(2,1,1) lattice:     {:.6e} vs {:.6e}  rel {:.1e}", r.lhs, r.rhs, r.rel_err);
    }
    Ok(())
}
