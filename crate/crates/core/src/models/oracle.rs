//! Sequential brute-force reachability: a plain BFS over a growable hash
//! set. Storage-agnostic ground truth for every parallel run, at desk scale
//! (state spaces up to roughly 10^7).

use std::collections::{HashSet, VecDeque};

use super::Model;

#[derive(Debug)]
pub struct OracleReach {
    pub states: u64,
    pub transitions: u64,
    pub deadlocks: u64,
    pub members: HashSet<Vec<u32>>,
}

pub fn oracle_reach(model: &dyn Model) -> OracleReach {
    let init = model.initial_state();
    let mut members = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([init]);
    let mut transitions = 0u64;
    let mut deadlocks = 0u64;
    while let Some(state) = queue.pop_front() {
        let mut out_degree = 0u64;
        model.for_each_successor(&state, &mut |succ| {
            out_degree += 1;
            if !members.contains(succ) {
                members.insert(succ.to_vec());
                queue.push_back(succ.to_vec());
            }
        });
        transitions += out_degree;
        if out_degree == 0 {
            deadlocks += 1;
        }
    }
    OracleReach {
        states: members.len() as u64,
        transitions,
        deadlocks,
        members,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{parse_ets, Hanoi};

    #[test]
    fn hanoi_3_is_27() {
        let r = oracle_reach(&Hanoi::new(3).unwrap());
        assert_eq!(r.states, 27);
    }

    #[test]
    fn chain_of_length_5() {
        let text = "ets 1\nveclen 1\ninit 0\nedge 0 -> 1\nedge 1 -> 2\nedge 2 -> 3\nedge 3 -> 4\nedge 4 -> 5\n";
        let m = parse_ets(text, "chain5").unwrap();
        let r = oracle_reach(&m);
        assert_eq!(r.states, 6);
        assert_eq!(r.transitions, 5);
        assert_eq!(r.deadlocks, 1);
    }
}
