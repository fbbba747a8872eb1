use loopnet::affine_data::{self, LevelData};
use loopnet::lie::{Family, SimpleTypeRecord};
use num_rational::Rational64;

fn gram(n: usize, i: usize, j: usize) -> Rational64 {
    Rational64::new((i.min(j) * (n - i.max(j))) as i64, n as i64)
}

fn pairing(n: usize, a: &[u32], b: &[u32]) -> Rational64 {
    let mut acc = Rational64::from_integer(0);
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            acc += gram(n, i + 1, j + 1) * Rational64::from_integer(x as i64 * y as i64);
        }
    }
    acc
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Dominant weights of `su(n)` with `sum lambda_i <= level`, by plain counting.
fn brute_force(n: usize, level: u32) -> Vec<Vec<u32>> {
    let rank = n - 1;
    let base = level as usize + 1;
    let mut out = Vec::new();
    for code in 0..base.pow(rank as u32) {
        let w: Vec<u32> = (0..rank).map(|i| ((code / base.pow(i as u32)) % base) as u32).collect();
        if w.iter().sum::<u32>() <= level {
            out.push(w);
        }
    }
    out
}

#[test]
fn central_charge_is_exact_and_at_least_one() {
    for f in Family::ALL {
        for r in 1..=8 {
            let Some(rec) = SimpleTypeRecord::lookup(f, r) else { continue };
            for level in 1..=10u32 {
                let c = affine_data::central_charge(&rec, level);
                let oracle = Rational64::new(
                    level as i64 * rec.complex_dimension as i64,
                    level as i64 + rec.dual_coxeter as i64,
                );
                assert_eq!(c, oracle);
                assert!(c >= Rational64::from_integer(1), "{f:?}{r} level {level}");
            }
        }
    }
}

#[test]
fn alcoves_match_brute_force() {
    for n in 2..=5 {
        for level in 1..=5 {
            let data = LevelData::su(n, level).unwrap();
            let mut got: Vec<Vec<u32>> = affine_data::alcove(&data).unwrap().into_iter().map(|w| w.weight).collect();
            let mut expected = brute_force(n, level);
            got.sort();
            expected.sort();
            assert_eq!(got, expected, "su({n}) level {level}");
        }
    }
}

#[test]
fn conformal_weights_match_rational_oracle() {
    for n in 2..=4 {
        for level in 1..=4u32 {
            let data = LevelData::su(n, level).unwrap();
            for w in affine_data::alcove(&data).unwrap() {
                let shifted: Vec<u32> = w.weight.iter().map(|&l| l + 2).collect();
                let casimir = pairing(n, &w.weight, &shifted);
                assert_eq!(w.casimir, casimir);
                let h = casimir / Rational64::from_integer(2 * (level as i64 + n as i64));
                assert_eq!(w.conformal_weight, h);
                assert!(h >= Rational64::from_integer(0));
            }
        }
    }
}

/// The bound with `<lambda, lambda>` in place of the Casimir holds on every
/// alcove; with the Casimir it already fails for the spin-1/2 weight of
/// `su(2)` at level one, where `h = 1/4` and the bound is `1/12`.
#[test]
fn weight_bound_holds_for_norm_and_fails_for_casimir() {
    for n in 2..=4 {
        for level in 1..=6u32 {
            let rep = affine_data::lemma1_bounds(&LevelData::su(n, level).unwrap());
            let m = (1..n).map(|i| 1.0 / (2.0 * to_f64(gram(n, i, i))).sqrt()).fold(f64::INFINITY, f64::min);
            assert!((rep.m.unwrap() - m).abs() < 1e-14);
            let l = level as f64;
            let bound = l * l / (4.0 * m * m * (l + n as f64));
            assert!((rep.h_max_bound.unwrap() - bound).abs() < 1e-14);
            for w in affine_data::alcove(&LevelData::su(n, level).unwrap()).unwrap() {
                let h_norm = to_f64(pairing(n, &w.weight, &w.weight)) / (2.0 * (l + n as f64));
                assert!(h_norm <= bound + 1e-12, "su({n}) level {level} {:?}", w.weight);
            }
            assert_eq!(rep.norm_within_bound, Some(true));
        }
    }
    let rep = affine_data::lemma1_bounds(&LevelData::su(2, 1).unwrap());
    assert_eq!(rep.h_max, Some(Rational64::new(1, 4)));
    assert!((rep.h_max_bound.unwrap() - 1.0 / 12.0).abs() < 1e-15);
    assert_eq!(rep.h_within_bound, Some(false));
}
