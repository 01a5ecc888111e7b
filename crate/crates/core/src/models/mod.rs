//! Model abstraction: an initial state plus a pure successor function over
//! fixed-length `u32` vectors, with built-in parametric generators, an
//! explicit-transition-system file format, and the sequential brute-force
//! oracle that all parallel runs are checked against.

mod ets;
mod hanoi;
mod oracle;
mod philosophers;
mod synthetic;

pub use ets::{export_ets, load_ets, parse_ets, ExplicitTs};
pub use hanoi::Hanoi;
pub use oracle::{oracle_reach, OracleReach};
pub use philosophers::Philosophers;
pub use synthetic::{Diamond, Helix};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    BadParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("model too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A state space: initial vector plus a deterministic, pure successor
/// function. Implementations are immutable after construction and callable
/// from any number of workers.
pub trait Model: Sync {
    fn vector_len(&self) -> usize;

    fn initial_state(&self) -> Vec<u32>;

    /// Invoke `f` once per successor, in the model's defined order.
    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32]));

    /// Display name used in reports.
    fn name(&self) -> String;

    /// Successors as owned vectors, in order.
    fn successors(&self, state: &[u32]) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        self.for_each_successor(state, &mut |s| out.push(s.to_vec()));
        out
    }
}

/// Parse a model spec of the form `hanoi:N`, `phils:N`, `diamond:W,D`,
/// `helix:W,D`, or `ets:PATH`.
pub fn from_spec(spec: &str) -> Result<Box<dyn Model>, ModelError> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| ModelError::BadParameter(format!("model spec `{spec}` needs KIND:ARGS")))?;
    let parse_num = |s: &str| -> Result<u32, ModelError> {
        s.trim()
            .parse()
            .map_err(|_| ModelError::BadParameter(format!("bad number `{s}` in model spec")))
    };
    let parse_pair = |s: &str| -> Result<(u32, u32), ModelError> {
        let (a, b) = s.split_once(',').ok_or_else(|| {
            ModelError::BadParameter(format!("`{kind}` takes two arguments, got `{s}`"))
        })?;
        Ok((parse_num(a)?, parse_num(b)?))
    };
    match kind {
        "hanoi" => Ok(Box::new(Hanoi::new(parse_num(args)? as usize)?)),
        "phils" => Ok(Box::new(Philosophers::new(parse_num(args)? as usize)?)),
        "diamond" => {
            let (w, d) = parse_pair(args)?;
            Ok(Box::new(Diamond::new(w, d)?))
        }
        "helix" => {
            let (w, d) = parse_pair(args)?;
            Ok(Box::new(Helix::new(w, d)?))
        }
        "ets" => Ok(Box::new(load_ets(Path::new(args))?)),
        other => Err(ModelError::BadParameter(format!(
            "unknown model kind `{other}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing_dispatches() {
        assert_eq!(from_spec("hanoi:3").unwrap().vector_len(), 3);
        assert_eq!(from_spec("phils:4").unwrap().vector_len(), 4);
        assert_eq!(from_spec("diamond:2,6").unwrap().name(), "diamond:2,6");
        assert_eq!(from_spec("helix:4,100").unwrap().name(), "helix:4,100");
        assert!(from_spec("nope:1").is_err());
        assert!(from_spec("hanoi").is_err());
        assert!(from_spec("diamond:5").is_err());
    }

    #[test]
    fn successor_function_is_pure() {
        for spec in ["hanoi:4", "phils:3", "diamond:2,6", "helix:4,20"] {
            let m = from_spec(spec).unwrap();
            let init = m.initial_state();
            let a = m.successors(&init);
            let b = m.successors(&init);
            assert_eq!(a, b, "{spec} successors must be deterministic");
            for s in &a {
                assert_eq!(s.len(), m.vector_len());
                assert_eq!(m.successors(s), m.successors(s));
            }
        }
    }
}
