//! Synthetic layered state spaces for exercising load balancing. States are
//! `[level, position]` pairs.
//!
//! `Diamond` fans out by a factor of `width` per level up to the middle,
//! then fans back in; frontiers get exponentially wide, so even static
//! balancing keeps every worker busy.
//!
//! `Helix` is flat: every `width` levels the space converges to a single
//! state, then fans out to `width` parallel strands again. Workers starve
//! at each convergence point, which is exactly what dynamic balancing has
//! to recover from. `helix:1` degenerates to a plain chain.

use super::{Model, ModelError};

pub struct Diamond {
    width: u32,
    depth: u32,
}

impl Diamond {
    pub fn new(width: u32, depth: u32) -> Result<Self, ModelError> {
        if width < 1 || depth < 1 {
            return Err(ModelError::BadParameter(
                "diamond needs width >= 1 and depth >= 1".into(),
            ));
        }
        let d = Diamond { width, depth };
        // The widest level must stay addressable by a u32 position.
        if d.level_width(depth / 2).is_none() {
            return Err(ModelError::TooLarge(format!(
                "diamond:{width},{depth} middle level exceeds 2^31 states"
            )));
        }
        Ok(d)
    }

    /// Width of level `l`: width^min(l, depth - l), or None on overflow.
    fn level_width(&self, l: u32) -> Option<u32> {
        let e = l.min(self.depth - l);
        let w = self.width as u64;
        let mut out: u64 = 1;
        for _ in 0..e {
            out = out.checked_mul(w)?;
            if out > 1 << 31 {
                return None;
            }
        }
        Some(out as u32)
    }

    /// Closed-form state count: the sum over levels of the level width.
    pub fn state_count(&self) -> u64 {
        (0..=self.depth)
            .map(|l| self.level_width(l).expect("validated at construction") as u64)
            .sum()
    }
}

impl Model for Diamond {
    fn vector_len(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<u32> {
        vec![0, 0]
    }

    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32])) {
        let (level, pos) = (state[0], state[1]);
        if level >= self.depth {
            return;
        }
        let here = self.level_width(level).unwrap();
        let next = self.level_width(level + 1).unwrap();
        if next > here {
            // Fan out: `width` children per state.
            for j in 0..self.width {
                f(&[level + 1, pos * self.width + j]);
            }
        } else if next == here {
            f(&[level + 1, pos]);
        } else {
            // Fan in: `width` siblings merge into one.
            f(&[level + 1, pos / self.width]);
        }
    }

    fn name(&self) -> String {
        format!("diamond:{},{}", self.width, self.depth)
    }
}

pub struct Helix {
    width: u32,
    depth: u32,
}

impl Helix {
    pub fn new(width: u32, depth: u32) -> Result<Self, ModelError> {
        if width < 1 || depth < 1 {
            return Err(ModelError::BadParameter(
                "helix needs width >= 1 and depth >= 1".into(),
            ));
        }
        Ok(Helix { width, depth })
    }

    /// Levels cycle through widths 1, 1, w, w, ..., w with period `width`.
    fn level_width(&self, l: u32) -> u32 {
        if self.width <= 2 || l % self.width < 2 {
            1
        } else {
            self.width
        }
    }

    pub fn state_count(&self) -> u64 {
        (0..=self.depth).map(|l| self.level_width(l) as u64).sum()
    }

    /// Fan-in targets: single states a wider level converged into.
    pub fn is_convergence(&self, state: &[u32]) -> bool {
        let l = state[0];
        self.level_width(l) == 1 && l > 0 && self.level_width(l - 1) > 1
    }
}

impl Model for Helix {
    fn vector_len(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<u32> {
        vec![0, 0]
    }

    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32])) {
        let (level, pos) = (state[0], state[1]);
        if level >= self.depth {
            return;
        }
        let next = self.level_width(level + 1);
        if next == 1 {
            f(&[level + 1, 0]);
        } else if self.level_width(level) == 1 {
            for j in 0..next {
                f(&[level + 1, j]);
            }
        } else {
            f(&[level + 1, pos]);
        }
    }

    fn name(&self) -> String {
        format!("helix:{},{}", self.width, self.depth)
    }
}
