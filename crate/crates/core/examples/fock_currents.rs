//! Level-one currents on the truncated fermionic Fock space of su(2).

use loopnet::fock::{self, FockOperator};
use loopnet::lie;
use loopnet::linalg::c;
use loopnet::loops::{self, FourierLoopElement, ScalarField};

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let space = fock::build_fock(2, 4)?;
    println!("cutoff {} dim {} sectors {}", space.cutoff(), space.dim(), space.sectors().len());

    let (x, y) = (alg.element(0), alg.element(1));
    let lhs = fock::current(&space, &x, 1)?.commutator(&fock::current(&space, &y, -1)?);
    let xy = lie::bracket(&x, &y)?;
    let rhs = fock::current(&space, &xy, 0)?
        .add(&FockOperator::identity(&space).scale(lie::basic_form(&x, &y)?));
    println!("[x(1), y(-1)] - [x,y](0) - <x,y>: {:.3e}", lhs.sub(&rhs).protected_max_abs(&space));

    let u = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 1.0], &[]), &x);
    let v = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[], &[0.0, 1.0]), &x);
    let vac = fock::vacuum_cocycle_check(&space, &u, &v)?;
    println!("vacuum cocycle {vac:.6} vs i B {:.6}", c(0.0, 1.0) * loops::central_term_b(&u, &v)?);

    let w = u.scale(c(0.3, 0.0));
    let imp = fock::implement_exponential(&space, &w)?;
    println!("e^pi(X) unitarity defect {:.3e}", imp.unitarity_defect);
    let z = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[], &[0.0, 1.0]), &y);
    let r = fock::adjoint_first_order(&space, &w, &z, [1e-2, 5e-3], 1)?;
    println!("second-order remainder ratio {:.4} (expect 4)", r.ratio);
    Ok(())
}
