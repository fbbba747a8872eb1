//! Loops in su(2): Sobolev norms, the central term B, the group cocycle and splitting.

use std::f64::consts::PI;

use loopnet::lie;
use loopnet::linalg::c;
use loopnet::loops::{self, FourierLoopElement, GridLoop, ScalarField, SobolevNorm};

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let t = alg.tag();
    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 1.0], &[0.0, 0.5]), &alg.element(0));
    let y = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 0.0], &[0.0, 1.0]), &alg.element(0));
    println!("|X|_(1,2) = {:.6}", x.sobolev_norm(1.0, 2.0)?);
    println!("|X|_(3/2) = {:.6}", x.sobolev_t(1.5)?);
    println!("B(X, Y) = {:.6}", loops::central_term_b(&x, &y)?);

    let gamma = GridLoop::exp(&y, 256)?;
    println!("c(gamma, X) = {:.6}", loops::cocycle_c(&gamma, &x, 1.0)?);
    println!("b(gamma, X) = {:.6}", loops::cocycle_b(&gamma, &x, 1.0)?);
    println!("c(gamma, 1) = {:.6}", loops::cocycle_c_field(&gamma, &ScalarField::constant(1.0), 1.0)?);

    let mc = loops::maurer_cartan(&gamma, loops::Side::Left)?;
    println!("gamma^-1 dgamma has {} Fourier modes", mc.pruned(1e-12).coefficients.len());

    // supported near theta = pi/2 and 3pi/2, identity with zero derivative at 0 and pi
    let bump = |th: f64| (th.sin() * (2.0 * th).sin()).powi(2);
    let h = alg.element(2).matrix.clone();
    let local = GridLoop::from_fn(t, 256, |th| loopnet::linalg::exp_anti_hermitian(&(&h * c(bump(th), 0.0))).unwrap())?;
    let pair = loops::split_loop(&local, 0.0, PI)?;
    let back = pair.left.mul(&pair.right)?;
    println!("split residual {:.3e}", back.sup_distance(&local));
    match loops::split_loop(&gamma, 0.0, PI) {
        Ok(_) => println!("unexpected split"),
        Err(e) => println!("not splittable: {e}"),
    }
    Ok(())
}
