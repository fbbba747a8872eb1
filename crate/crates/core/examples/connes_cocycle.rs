//! Loop-level Connes cocycle of a split path and its chain rule.

use loopnet::entropy::{self, LineFactor, LinePath, Profile};
use loopnet::lie;

fn main() -> loopnet::Result<()> {
    let alg = lie::build_su(2)?;
    let x = alg.element(0).matrix.clone();
    // opposite bumps on the positive half-line: identity at 0 and at both ends
    let path = LinePath::new(
        alg.tag(),
        vec![
            LineFactor { generator: x.clone(), profile: Profile::bump(2.5, 2.0, 1.0) },
            LineFactor { generator: x.clone(), profile: Profile::bump(7.0, 2.0, -1.0) },
        ],
        1.0,
    )?;
    let u = entropy::connes_cocycle_path(&path, 0.1)?;
    println!("u_0.1 has {} factors", u.result.factors.len());
    let grid: Vec<f64> = (0..64).map(|i| -4.0 + 8.0 * i as f64 / 63.0).collect();
    for (t, s) in [(0.1, 0.2), (-0.3, 0.05), (0.25, -0.5)] {
        println!("t {t} s {s}: chain residual {:.3e}", entropy::cocycle_chain_residual(&path, t, s, &grid)?);
    }
    let circle = entropy::line_to_circle(&path, 256)?;
    let back = entropy::cayley_transfer(&circle)?;
    println!("Cayley round trip at {} points", back.samples.len());
    Ok(())
}
