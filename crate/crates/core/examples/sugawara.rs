//! Sugawara Virasoro operators, central charge and conformal weights.

use loopnet::fock;
use loopnet::lie;

fn main() -> loopnet::Result<()> {
    for (n, cutoff) in [(2, 6), (3, 4)] {
        let alg = lie::build_su(n)?;
        let space = fock::build_fock(n, cutoff)?;
        println!("su({n}) cutoff {cutoff}: dim {}", space.dim());
        for r in fock::verification_suite(&space, &alg, 2)? {
            println!("  {:<32} {:<12} {:.3e} {}", r.identity, r.block, r.residual_max, if r.pass { "ok" } else { "FAIL" });
        }
        let l0 = fock::sugawara(&space, &alg, 0)?;
        for (q, h) in fock::lowest_eigenvalue_per_charge(&space, &l0) {
            println!("  charge {q}: lowest L0 {h:.12}");
        }
    }
    Ok(())
}
