//! Half-line entropy of a coherent state, QNEC, sum rule and Bekenstein bound.

use loopnet::entropy::{self, GridSpec, LineFactor, LinePath, Profile};
use loopnet::lie;

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let path = LinePath::new(
        alg.tag(),
        vec![
            LineFactor { generator: alg.element(0).matrix.clone(), profile: Profile::gaussian(0.0, 1.0, 1.0) },
            LineFactor { generator: alg.element(1).matrix.clone(), profile: Profile::bump(0.5, 2.0, 0.7) },
        ],
        1.0,
    )?;
    let e = entropy::total_energy(&path)?;
    println!("E = {e:.10}");
    let profile = entropy::qnec_profile(&path, &GridSpec::new(-3.0, 3.0, 13))?;
    for i in 0..profile.t.len() {
        println!("t {:+.2} S {:.8} S'' {:.8} fd {:.8}", profile.t[i], profile.s[i], profile.s_dd_analytic[i], profile.s_dd_fd[i]);
    }
    println!("fd relative error {:.3e}", profile.fd_relative_error().0);
    println!("sum rule residual {:.3e}", entropy::sum_rule_residual(&path, -1.0, 2.0)?);
    for r in [0.5, 1.0, 5.0] {
        let b = entropy::bekenstein_check(&path, r)?;
        println!("r {r}: S = {:.6} <= pi r E = {:.6}: {}", b.s_interval, b.pi_r_e, b.holds);
    }
    Ok(())
}
