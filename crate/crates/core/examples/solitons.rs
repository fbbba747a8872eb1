//! Solitons with central and non-central jumps.

use loopnet::lie;
use loopnet::linalg::{self, c, CMatrix};
use loopnet::soliton::{self, SolitonPath};

fn diag(a: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = c(0.0, a);
    m[(1, 1)] = c(0.0, -a);
    m
}

fn main() -> loopnet::Result<()> {
    let t = lie::build_su(2)?.tag();
    for a in [0.5, 0.25] {
        let zeta = SolitonPath::linear(t, diag(a))?;
        let v = soliton::extendability(&zeta);
        println!("A = diag(i{a}, -i{a}): {:?}", v);
        let r = soliton::rotation_cocycle_2pi(&zeta, 64);
        match r {
            Ok(g) => println!("  zeta_2pi constancy defect {:.3e}, value {:.6}", g.constancy_defect(), g.samples[0][(0, 0)]),
            Err(e) => println!("  {e}"),
        }
    }
    let z1 = SolitonPath::linear(t, diag(0.25))?;
    let z2 = SolitonPath::linear(t, diag(0.125))?;
    let z = soliton::compose(&z1, &z2)?;
    println!("jump product residual {:.3e}", linalg::max_abs_diff(z.jump(), &(z1.jump() * z2.jump())));
    let g = linalg::exp_anti_hermitian(&lie::build_su(2)?.element(0).matrix)?;
    let conj = soliton::conjugate(&z1, &g)?;
    println!("conjugate class equal: {}", soliton::conjugacy_class_equal(z1.jump(), conj.jump(), 1e-10));
    println!("one-parameter residual {:.3e}", soliton::one_parameter_residual(&z1, 0.7, 1.1, 64));
    Ok(())
}
