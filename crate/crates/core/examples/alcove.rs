//! Level-l alcoves, conformal weights and the central-charge bounds.

use loopnet::affine_data::{self, LevelData};

fn main() -> loopnet::Result<()> {
    for level in 1..=3 {
        let data = LevelData::su(3, level)?;
        println!("su(3) level {level}: c = {}", data.central_charge);
        for w in affine_data::alcove(&data)? {
            println!("  {:?} h = {}", w.weight, w.conformal_weight);
        }
        let r = affine_data::lemma1_bounds(&data);
        println!("  c >= 1: {} h bound {:?} norm bound {:?}", r.c_ge_1, r.h_within_bound, r.norm_within_bound);
    }
    let table: Vec<LevelData> = (1..=2).map(|l| LevelData::su(2, l)).collect::<Result<_, _>>()?;
    print!("{}", affine_data::alcove_csv(&table)?);
    Ok(())
}
