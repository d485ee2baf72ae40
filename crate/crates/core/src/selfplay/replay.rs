use std::collections::VecDeque;
use std::sync::Mutex;

use rand::seq::index;
use rand::Rng;

use super::ReplaySample;

pub const DEFAULT_CAPACITY: usize = 60_000;

/// Bounded FIFO of training samples. Appends may come from several episode
/// workers; batch draws take the lock once.
#[derive(Debug)]
pub struct ReplayMemory {
    capacity: usize,
    slots: Mutex<VecDeque<ReplaySample>>,
}

/// Returned when the memory holds fewer samples than a batch needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotReady {
    pub have: usize,
    pub need: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            slots: Mutex::new(VecDeque::with_capacity(capacity.min(1 << 16))),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("replay lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&self, sample: ReplaySample) {
        self.extend(std::iter::once(sample));
    }

    /// Appends samples, evicting the oldest beyond capacity.
    pub fn extend(&self, samples: impl IntoIterator<Item = ReplaySample>) {
        let mut slots = self.slots.lock().expect("replay lock");
        for sample in samples {
            if slots.len() == self.capacity {
                slots.pop_front();
            }
            slots.push_back(sample);
        }
    }

    /// Uniform draw of `batch` distinct slots.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<ReplaySample>, NotReady> {
        let slots = self.slots.lock().expect("replay lock");
        self.sample_indices(slots.len(), batch, rng)
            .map(|idx| idx.into_iter().map(|i| slots[i].clone()).collect())
    }

    fn sample_indices<R: Rng + ?Sized>(
        &self,
        have: usize,
        batch: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>, NotReady> {
        if have < batch || batch == 0 {
            return Err(NotReady { have, need: batch });
        }
        Ok(index::sample(rng, have, batch).into_vec())
    }

    /// Slot positions a draw would use, oldest slot is 0. For statistics.
    pub fn sample_positions<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>, NotReady> {
        let have = self.len();
        self.sample_indices(have, batch, rng)
    }

    /// Rewards in slot order, oldest first.
    pub fn rewards(&self) -> Vec<f64> {
        self.slots
            .lock()
            .expect("replay lock")
            .iter()
            .map(|s| s.reward)
            .collect()
    }
}
