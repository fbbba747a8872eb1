//! Hilbert-Schmidt defect of multiplication operators.

use loopnet::fock;
use loopnet::lie;
use loopnet::linalg::{self, c};
use loopnet::loops::{FourierLoopElement, GridLoop, ScalarField};

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let winding = GridLoop::from_fn(alg.tag(), 64, |th| {
        let mut m = linalg::identity(2);
        m[(0, 0)] = c(th.cos(), th.sin());
        m[(1, 1)] = c(th.cos(), -th.sin());
        m
    })?;
    let r = fock::hs_defect(&winding.fourier()?, 2);
    println!("diag(z, 1/z): fourier {:.12} truncated {:.12}", r.fourier_value, r.truncated_value);

    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 0.8], &[0.0, 0.0, 0.4]), &alg.element(0));
    let smooth = GridLoop::exp(&x, 1024)?;
    for k in [4, 16, 256] {
        let r = fock::hs_defect(&smooth.fourier()?, k);
        println!("smooth K={k}: gap {:.3e} {}", r.relative_gap, r.warning.unwrap_or_default());
    }
    Ok(())
}
