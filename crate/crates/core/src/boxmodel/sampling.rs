//! Negative tail sampling.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::kgraph::EntityId;

/// Draws `k` tails from `class` excluding the sorted `answers`, which must
/// be a subset of `class`. Sampling is without
/// replacement when the pool is large enough, with replacement otherwise.
/// Returns `None` when the pool is empty.
pub fn negative_sample(
    class: &[EntityId],
    answers: &[EntityId],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<EntityId>> {
    let excluded = |e: &EntityId| answers.binary_search(e).is_ok();
    let pool_size = class.len().saturating_sub(answers.len());
    if pool_size == 0 {
        return None;
    }
    if pool_size < k || pool_size < 4 * k {
        let pool: Vec<EntityId> = class.iter().copied().filter(|e| !excluded(e)).collect();
        if pool.len() < k {
            return Some((0..k).map(|_| *pool.choose(rng).unwrap()).collect());
        }
        return Some(pool.choose_multiple(rng, k).copied().collect());
    }
    // rejection sampling for large pools
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let e = class[rng.random_range(0..class.len())];
        if !excluded(&e) && !out.contains(&e) {
            out.push(e);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn forced_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = negative_sample(&[10, 11, 12, 13], &[11], 3, &mut rng).unwrap();
        s.sort();
        assert_eq!(s, vec![10, 12, 13]);
    }

    #[test]
    fn exclusion_and_determinism() {
        let class: Vec<EntityId> = (0..500).collect();
        let answers: Vec<EntityId> = (0..500).step_by(3).collect();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let s = negative_sample(&class, &answers, 8, &mut a).unwrap();
            assert_eq!(s, negative_sample(&class, &answers, 8, &mut b).unwrap());
            assert!(s.iter().all(|e| answers.binary_search(e).is_err()));
            let mut u = s.clone();
            u.sort();
            u.dedup();
            assert_eq!(u.len(), 8);
        }
    }

    #[test]
    fn small_pool_uses_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = negative_sample(&[0, 1, 2, 3], &[0, 1], 8, &mut rng).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|&e| e == 2 || e == 3));
        assert!(negative_sample(&[0, 1], &[0, 1], 8, &mut rng).is_none());
    }
}
