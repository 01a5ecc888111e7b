//! Per-worker frontier: one double-ended sequence used as a queue for
//! pseudo-BFS or a stack for pseudo-DFS. Strict global order is sacrificed
//! for contention-free local sequences; a frontier only ever holds vectors
//! already committed to storage.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Bfs,
    Dfs,
}

impl Order {
    pub fn label(&self) -> &'static str {
        match self {
            Order::Bfs => "bfs",
            Order::Dfs => "dfs",
        }
    }
}

#[derive(Debug)]
pub struct Frontier {
    deque: VecDeque<Vec<u32>>,
    order: Order,
}

impl Frontier {
    pub fn new(order: Order) -> Self {
        Frontier {
            deque: VecDeque::new(),
            order,
        }
    }

    pub fn from_states<I: IntoIterator<Item = Vec<u32>>>(states: I, order: Order) -> Self {
        Frontier {
            deque: states.into_iter().collect(),
            order,
        }
    }

    pub fn order(&self) -> Order {
        self.order
    }

    #[inline]
    pub fn push(&mut self, state: Vec<u32>) {
        self.deque.push_back(state);
    }

    #[inline]
    pub fn pop(&mut self) -> Option<Vec<u32>> {
        match self.order {
            Order::Bfs => self.deque.pop_front(),
            Order::Dfs => self.deque.pop_back(),
        }
    }

    pub fn len(&self) -> usize {
        self.deque.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deque.is_empty()
    }

    pub fn extend<I: IntoIterator<Item = Vec<u32>>>(&mut self, states: I) {
        self.deque.extend(states);
    }

    /// Remove every element at an odd position (the second, fourth, ...),
    /// preserving relative order of both halves. Mixes shallow and deep
    /// states between giver and receiver.
    pub fn split_alternating(&mut self) -> Vec<Vec<u32>> {
        let n = self.deque.len();
        let mut kept = VecDeque::with_capacity(n - n / 2);
        let mut given = Vec::with_capacity(n / 2);
        for (i, state) in self.deque.drain(..).enumerate() {
            if i % 2 == 1 {
                given.push(state);
            } else {
                kept.push_back(state);
            }
        }
        self.deque = kept;
        given
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.deque.iter()
    }
}
