//! Exponential in the semidirect product of the loop group with rotations.

use loopnet::lie;
use loopnet::loops::{self, FourierLoopElement, ScalarField};

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.2, 1.0], &[0.0, 0.5]), &alg.element(0))
        .add(&FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0], &[0.0, 0.7]), &alg.element(1)));
    let one = ScalarField::constant(1.0);
    for alpha in [0.0, 0.5, 1.0] {
        let r = loops::semidirect_exp_report(&x, alpha, &one, 1.0, 256)?;
        let ode = loops::semidirect_ode(&x, alpha, &one, 1.0, 256, loops::SEMIDIRECT_DT)?;
        let flow = loops::semidirect_flow(&x, alpha, 1.0, 256)?;
        println!(
            "alpha {alpha}: closed form vs ODE {:.3e}, characteristics vs ODE {:.3e}",
            r.ode_residual,
            flow.sup_distance(&ode)
        );
    }
    let violations = (0..=100)
        .flat_map(|e| (-8..=8).flat_map(move |n| (0..=32).map(move |k| (e as f64 * 0.1, n, k))))
        .filter(|&(e, n, k)| !loops::kernel_bound_check(e, n, k))
        .count();
    println!("kernel bound violations: {violations}");
    Ok(())
}
