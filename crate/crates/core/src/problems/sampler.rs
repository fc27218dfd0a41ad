use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Batch;
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// `batch_size` indices drawn uniformly with replacement.
    WithReplacement { batch_size: usize },
    /// Uniform singleton batches. Expectations over the draw can be taken
    /// exactly by enumerating all `N` singletons with weight `1/N`.
    SingletonEnumerable,
}

impl SamplingMode {
    pub fn batch_size(&self) -> usize {
        match *self {
            SamplingMode::WithReplacement { batch_size } => batch_size,
            SamplingMode::SingletonEnumerable => 1,
        }
    }
}

/// Deterministic batch stream for a fixed seed. Single owner.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    mode: SamplingMode,
    num_components: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(mode: SamplingMode, num_components: usize, seed: u64) -> Result<Self> {
        if num_components == 0 {
            return Err(Error::InvalidParameter("no components to sample".into()));
        }
        if mode.batch_size() == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        Ok(Self {
            mode,
            num_components,
            rng: rng::stream(seed, rng::streams::SAMPLER),
        })
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn next_batch(&mut self) -> Batch {
        let n = self.num_components;
        let indices = (0..self.mode.batch_size())
            .map(|_| self.rng.random_range(0..n))
            .collect();
        Batch(indices)
    }

    /// All singleton batches, each carrying weight `1/N`.
    pub fn enumerate_singletons(&self) -> Result<impl Iterator<Item = Batch>> {
        match self.mode {
            SamplingMode::SingletonEnumerable => Ok((0..self.num_components).map(Batch::singleton)),
            SamplingMode::WithReplacement { .. } => Err(Error::Unsupported(
                "exact enumeration needs singleton_enumerable sampling".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_batches() {
        let mut a = BatchSampler::new(SamplingMode::WithReplacement { batch_size: 3 }, 17, 9).unwrap();
        let mut b = a.clone();
        for _ in 0..50 {
            assert_eq!(a.next_batch(), b.next_batch());
        }
        let mut c = BatchSampler::new(SamplingMode::WithReplacement { batch_size: 3 }, 17, 10).unwrap();
        let differs = (0..50).any(|_| a.next_batch() != c.next_batch());
        assert!(differs);
    }

    #[test]
    fn indices_in_range_and_sized() {
        let mut s = BatchSampler::new(SamplingMode::WithReplacement { batch_size: 4 }, 5, 1).unwrap();
        for _ in 0..200 {
            let b = s.next_batch();
            assert_eq!(b.len(), 4);
            assert!(b.indices().iter().all(|&i| i < 5));
        }
    }

    #[test]
    fn singleton_enumeration_covers_all() {
        let s = BatchSampler::new(SamplingMode::SingletonEnumerable, 6, 0).unwrap();
        let all: Vec<_> = s.enumerate_singletons().unwrap().collect();
        assert_eq!(all.len(), 6);
        for (i, b) in all.iter().enumerate() {
            assert_eq!(b.indices(), &[i]);
        }
        let r = BatchSampler::new(SamplingMode::WithReplacement { batch_size: 1 }, 6, 0).unwrap();
        assert!(r.enumerate_singletons().is_err());
    }

    #[test]
    fn rejects_degenerate_config() {
        assert!(BatchSampler::new(SamplingMode::SingletonEnumerable, 0, 0).is_err());
        assert!(BatchSampler::new(SamplingMode::WithReplacement { batch_size: 0 }, 3, 0).is_err());
    }
}
