//! Random batches: partitions (sampling without replacement) and
//! independent subsets (sampling with replacement across calls).

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};

/// A random partition of `0..N` into batches of size `p`.
///
/// When `p` does not divide `N`, the leftover `N mod p` particles form one
/// extra smaller batch if there are at least two of them; a single leftover
/// particle joins the last full batch. Members of each batch are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchDivision {
    assignment: Vec<usize>,
    batches: Vec<Vec<usize>>,
    batch_size: usize,
}

impl BatchDivision {
    /// Build a division from explicit batches (used for enumeration and tests).
    pub fn from_batches(n: usize, batches: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        let mut batches = batches;
        for (b, members) in batches.iter_mut().enumerate() {
            if members.len() < 2 && n >= 2 {
                return Err(Error::BatchTooSmall(members.len()));
            }
            members.sort_unstable();
            for &i in members.iter() {
                if i >= n || assignment[i] != usize::MAX {
                    return Err(Error::Shape(format!("particle {i} is not covered exactly once")));
                }
                assignment[i] = b;
            }
        }
        if assignment.contains(&usize::MAX) {
            return Err(Error::Shape("batches do not cover every particle".into()));
        }
        let batch_size = batches.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            assignment,
            batches,
            batch_size,
        })
    }

    /// Batch index of every particle.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    /// The nominal batch size `p`.
    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    /// Members of the batch containing particle `i`.
    pub fn batch_of(&self, i: usize) -> &[usize] {
        &self.batches[self.assignment[i]]
    }
}

fn check_batch_size(n: usize, p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::BatchTooSmall(p));
    }
    if p > n {
        return Err(Error::BatchTooLarge { p, n });
    }
    Ok(())
}

/// Uniformly random division of `0..n` into batches of size `p`, in O(N)
/// via a Fisher–Yates shuffle of the index set.
pub fn random_division<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<BatchDivision> {
    check_batch_size(n, p)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);

    let full = n / p;
    let rem = n % p;
    let mut batches: Vec<Vec<usize>> = perm.chunks(p).map(<[usize]>::to_vec).collect();
    if rem == 1 {
        let last = batches.pop().expect("remainder batch");
        batches[full - 1].extend(last);
    }
    let mut assignment = vec![0; n];
    for (b, members) in batches.iter_mut().enumerate() {
        members.sort_unstable();
        for &i in members.iter() {
            assignment[i] = b;
        }
    }
    Ok(BatchDivision {
        assignment,
        batches,
        batch_size: p,
    })
}

/// `p` distinct indices from `0..n`, sorted. Successive calls are independent,
/// so a particle may be drawn again by the next call.
pub fn sample_batch_with_replacement<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_batch_size(n, p)?;
    let mut picked = index::sample(rng, n, p).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn identity_case_is_single_batch() {
        let mut rng = RngStream::new(1, 0).rng();
        let d = random_division(4, 4, &mut rng).unwrap();
        assert_eq!(d.batches(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn two_pairs_cover_four_particles() {
        let mut rng = RngStream::new(2, 0).rng();
        let d = random_division(4, 2, &mut rng).unwrap();
        assert_eq!(d.num_batches(), 2);
        let mut all: Vec<usize> = d.batches().concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_bad_batch_sizes() {
        let mut rng = RngStream::new(0, 0).rng();
        assert_eq!(random_division(4, 1, &mut rng), Err(Error::BatchTooSmall(1)));
        assert_eq!(
            random_division(4, 5, &mut rng),
            Err(Error::BatchTooLarge { p: 5, n: 4 })
        );
        assert!(sample_batch_with_replacement(3, 4, &mut rng).is_err());
    }

    #[test]
    fn remainder_of_one_joins_last_batch() {
        let mut rng = RngStream::new(3, 0).rng();
        let d = random_division(7, 3, &mut rng).unwrap();
        let sizes: Vec<usize> = d.batches().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 4]);
    }

    #[test]
    fn remainder_of_two_forms_own_batch() {
        let mut rng = RngStream::new(3, 0).rng();
        let d = random_division(8, 3, &mut rng).unwrap();
        let sizes: Vec<usize> = d.batches().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 2]);
    }

    #[test]
    fn pair_sharing_frequency_is_one_third() {
        // 3 perfect pairings of {0,1,2,3}; exactly one puts 0 and 1 together.
        let trials = 300_000;
        let mut rng = RngStream::new(11, 0).rng();
        let mut together = 0usize;
        for _ in 0..trials {
            let d = random_division(4, 2, &mut rng).unwrap();
            if d.assignment()[0] == d.assignment()[1] {
                together += 1;
            }
        }
        let f = together as f64 / trials as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.005, "{f}");
    }

    #[test]
    fn with_replacement_full_set() {
        let mut rng = RngStream::new(5, 0).rng();
        assert_eq!(
            sample_batch_with_replacement(6, 6, &mut rng).unwrap(),
            vec![0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn with_replacement_pairs_are_uniform() {
        let mut rng = RngStream::new(9, 0).rng();
        let mut counts = [[0usize; 4]; 4];
        let draws = 100_000;
        for _ in 0..draws {
            let s = sample_batch_with_replacement(4, 2, &mut rng).unwrap();
            counts[s[0]][s[1]] += 1;
        }
        for a in 0..4 {
            for b in (a + 1)..4 {
                let f = counts[a][b] as f64 / draws as f64;
                assert!((f - 1.0 / 6.0).abs() < 0.01, "pair ({a},{b}) {f}");
            }
        }
    }

    #[test]
    fn from_batches_rejects_overlap() {
        assert!(BatchDivision::from_batches(4, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(BatchDivision::from_batches(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(BatchDivision::from_batches(4, vec![vec![3, 1], vec![2, 0]]).is_ok());
    }

    proptest! {
        #[test]
        fn division_is_a_partition(n in 2usize..200, p in 2usize..12, seed in any::<u64>()) {
            prop_assume!(p <= n);
            let mut rng = RngStream::new(seed, 0).rng();
            let d = random_division(n, p, &mut rng).unwrap();
            let mut seen = vec![0u32; n];
            for (b, members) in d.batches().iter().enumerate() {
                prop_assert!(members.len() >= 2);
                prop_assert!(members.windows(2).all(|w| w[0] < w[1]));
                for &i in members {
                    seen[i] += 1;
                    prop_assert_eq!(d.assignment()[i], b);
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            if n % p == 0 {
                prop_assert!(d.batches().iter().all(|b| b.len() == p));
            }
        }

        #[test]
        fn division_is_deterministic(seed in any::<u64>()) {
            let a = random_division(50, 5, &mut RngStream::new(seed, 2).rng()).unwrap();
            let b = random_division(50, 5, &mut RngStream::new(seed, 2).rng()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn subset_is_distinct_and_in_range(n in 2usize..100, p in 2usize..10, seed in any::<u64>()) {
            prop_assume!(p <= n);
            let mut rng = RngStream::new(seed, 0).rng();
            let s = sample_batch_with_replacement(n, p, &mut rng).unwrap();
            prop_assert_eq!(s.len(), p);
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.iter().all(|&i| i < n));
        }
    }
}
