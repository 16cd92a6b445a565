//! Continuous wavelet transform on M_{2,1} at a few scales, in closed form for
//! a mixture and on a lattice, plus the scale-one case against plain convolution.

use matwave::field::{Field, GaussianMixtureField, GridSpec};
use matwave::linalg::SpdMatrix;
use matwave::transforms::cwt::{convolve, wavelet_transform};

fn main() -> matwave::Result<()> {
    let (n, m) = (2, 1);
    let spec = GridSpec::new(n, m, 64, 8.0)?;
    let f = GaussianMixtureField::gaussian(n, m, 1.0);
    let w = GaussianMixtureField::dog(n, m, 0.5);
    let fg = Field::Grid(f.to_grid(spec)?);

    for c in [0.25, 1.0, 4.0] {
        let a = SpdMatrix::scalar(m, c)?;
        let Field::Mixture(exact) = wavelet_transform(&Field::Mixture(f.clone()), &Field::Mixture(w.clone()), &a)? else { unreachable!() };
        let Field::Grid(grid) = wavelet_transform(&fg, &Field::Mixture(w.clone()), &a)? else { unreachable!() };
        let reference = exact.to_grid(spec)?;
        let gap = grid.sub(&reference)?.l2_norm() / reference.l2_norm();
        println!("a = {c:<5} |W_a f| = {:.6e}  lattice vs closed form {gap:.1e}", reference.l2_norm());
    }

    let Field::Grid(at_one) = wavelet_transform(&fg, &Field::Mixture(w.clone()), &SpdMatrix::identity(m))? else { unreachable!() };
    let Field::Grid(plain) = convolve(&fg, &Field::Mixture(w))? else { unreachable!() };
    println!("a = I matches f * w bytewise: {}", at_one.to_bytes() == plain.to_bytes());
    Ok(())
}
