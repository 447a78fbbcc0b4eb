//! Monte Carlo rank sets against exact enumeration on small instances.

use humble_core::{estimate_rank_set, EmpiricalScoreDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact rank probabilities: enumerate every combination of equiprobable
/// sample choices; within a group of tied scores every position is equally
/// likely for each member.
fn exact_rank_probs(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = samples.len();
    let mut probs = vec![vec![0.0; n]; n];
    let total: usize = samples.iter().map(Vec::len).product();
    let weight = 1.0 / total as f64;
    for mut code in 0..total {
        let scores: Vec<f64> = samples
            .iter()
            .map(|s| {
                let v = s[code % s.len()];
                code /= s.len();
                v
            })
            .collect();
        for i in 0..n {
            let better = scores.iter().filter(|&&z| z > scores[i]).count();
            let tied = scores.iter().filter(|&&z| z == scores[i]).count();
            for slot in &mut probs[i][better..better + tied] {
                *slot += weight / tied as f64;
            }
        }
    }
    probs
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

fn random_instance(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rng.random_range(2..=4);
    (0..n)
        .map(|_| {
            let s = rng.random_range(1..=3);
            // small integer support forces frequent ties
            (0..s).map(|_| f64::from(rng.random_range(0..4u8))).collect()
        })
        .collect()
}

fn dists(samples: &[Vec<f64>]) -> Vec<EmpiricalScoreDistribution> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| EmpiricalScoreDistribution::new(format!("c{i}"), s.clone()).unwrap())
        .collect()
}

#[test]
fn oracle_matches_hand_example() {
    let exact = exact_rank_probs(&[vec![1.0, 3.0], vec![2.0], vec![0.0]]);
    assert_eq!(exact, vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]]);
    let ties = exact_rank_probs(&[vec![5.0], vec![5.0]]);
    assert_eq!(ties, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
}

#[test]
fn monte_carlo_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..40 {
        let samples = random_instance(&mut rng);
        let exact = exact_rank_probs(&samples);
        let rs = estimate_rank_set(&dists(&samples), 100_000, case).unwrap();
        for (i, row) in rs.dense().iter().enumerate() {
            let d = tv(row, &exact[i]);
            assert!(d < 0.02, "case {case} row {i}: tv {d} for {samples:?}");
        }
    }
}

#[test]
fn error_shrinks_with_more_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut coarse, mut fine) = (0.0, 0.0);
    for case in 0..20 {
        let samples = random_instance(&mut rng);
        let exact = exact_rank_probs(&samples);
        for (draws, acc) in [(100, &mut coarse), (100_000, &mut fine)] {
            let rs = estimate_rank_set(&dists(&samples), draws, case).unwrap();
            *acc += rs
                .dense()
                .iter()
                .zip(&exact)
                .map(|(r, e)| tv(r, e))
                .sum::<f64>();
        }
    }
    assert!(fine < coarse, "fine {fine} coarse {coarse}");
}
