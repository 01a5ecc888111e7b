//! Tower of Hanoi. The state vector holds the peg of each disk, smallest
//! disk first; every assignment of disks to pegs is reachable, so the space
//! has exactly 3^disks states. When the smallest disk sits on top of the
//! tower only one other disk is movable, which makes the frontier narrow
//! and load balancing hard.

use super::{Model, ModelError};

pub struct Hanoi {
    disks: usize,
}

impl Hanoi {
    pub fn new(disks: usize) -> Result<Self, ModelError> {
        if !(1..=12).contains(&disks) {
            return Err(ModelError::BadParameter(format!(
                "hanoi takes 1..=12 disks, got {disks}"
            )));
        }
        Ok(Hanoi { disks })
    }

    /// Smallest disk currently on `peg`, if any.
    fn top(state: &[u32], peg: u32) -> Option<usize> {
        state.iter().position(|&p| p == peg)
    }
}

impl Model for Hanoi {
    fn vector_len(&self) -> usize {
        self.disks
    }

    fn initial_state(&self) -> Vec<u32> {
        vec![0; self.disks]
    }

    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32])) {
        let mut scratch = state.to_vec();
        // Moves ordered lexicographically by (from, to).
        for from in 0..3u32 {
            for to in 0..3u32 {
                if from == to {
                    continue;
                }
                let Some(disk) = Self::top(state, from) else {
                    continue;
                };
                match Self::top(state, to) {
                    Some(target_top) if target_top < disk => continue,
                    _ => {}
                }
                scratch[disk] = to;
                f(&scratch);
                scratch[disk] = from;
            }
        }
    }

    fn name(&self) -> String {
        format!("hanoi:{}", self.disks)
    }
}
