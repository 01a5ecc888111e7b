//! Dining philosophers with single-fork acquisition steps. Philosopher `i`
//! is `0` (thinking), `1` (holds left fork) or `2` (eating, holds both).
//! Fork `i` sits between philosophers `i-1` and `i`; it is philosopher
//! `i`'s left fork and philosopher `i-1`'s right fork. The all-ones state
//! (everyone holding their left fork) is a reachable deadlock.

use super::{Model, ModelError};

pub struct Philosophers {
    n: usize,
}

impl Philosophers {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if !(2..=16).contains(&n) {
            return Err(ModelError::BadParameter(format!(
                "phils takes 2..=16 philosophers, got {n}"
            )));
        }
        Ok(Philosophers { n })
    }
}

impl Model for Philosophers {
    fn vector_len(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> Vec<u32> {
        vec![0; self.n]
    }

    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32])) {
        let n = self.n;
        let mut scratch = state.to_vec();
        for i in 0..n {
            let left_neighbor = (i + n - 1) % n;
            let right_neighbor = (i + 1) % n;
            match state[i] {
                // Take the left fork: free unless the left neighbor is
                // eating (holding it as their right fork).
                0 if state[left_neighbor] != 2 => {
                    scratch[i] = 1;
                    f(&scratch);
                    scratch[i] = 0;
                }
                // Take the right fork: free unless the right neighbor
                // holds it as their left fork.
                1 if state[right_neighbor] == 0 => {
                    scratch[i] = 2;
                    f(&scratch);
                    scratch[i] = 1;
                }
                // Finish eating, put both forks down.
                2 => {
                    scratch[i] = 0;
                    f(&scratch);
                    scratch[i] = 2;
                }
                _ => {}
            }
        }
    }

    fn name(&self) -> String {
        format!("phils:{}", self.n)
    }
}
