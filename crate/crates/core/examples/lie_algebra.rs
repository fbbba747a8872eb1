//! Gell-Mann basis of su(3), structure constants and the simple-type table.

use loopnet::lie::{self, SimpleTypeRecord};
use loopnet::linalg;

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(3)?;
    println!("su(3): dim {} rank {} g {}", alg.dimension(), alg.rank(), alg.dual_coxeter());

    let x = alg.element(0);
    let y = alg.element(1);
    let z = lie::bracket(&x, &y)?;
    println!("[x0, x1] coordinates {:?}", alg.coordinates(&z));
    println!("f_(6,0,1) = {:.6}", alg.structure_constant(6, 0, 1));
    println!("<x0, x0> = {:.6}", lie::basic_form(&x, &x)?.re);

    let y = &alg.basis()[4];
    let cy = alg.casimir_action(y);
    println!("adjoint Casimir: |C(Y) - 6 Y| = {:.3e}", linalg::max_abs_diff(&cy, &(y * linalg::c(6.0, 0.0))));

    for (k, h) in lie::center_elements(3)?.iter().enumerate() {
        println!("center element {k}: index {:?}", lie::center_index(h, 1e-12));
    }
    for r in lie::simple_type_table(4) {
        println!("{:?}", r);
    }
    println!("{:?}", SimpleTypeRecord::su(5));
    Ok(())
}
