//! Explicit transition system files: a line-oriented text format holding an
//! initial vector and an edge list, standing in for full modeling-language
//! front-ends.
//!
//! ```text
//! ets 1
//! veclen K
//! init v1 ... vK
//! edge s1 ... sK -> t1 ... tK
//! ```
//!
//! Numbers are decimal and whitespace-separated; `#` starts a comment.
//! Unknown source states have zero successors.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::{oracle_reach, Model, ModelError};

#[derive(Debug)]
pub struct ExplicitTs {
    label: String,
    vector_len: usize,
    init: Vec<u32>,
    edges: HashMap<Vec<u32>, Vec<Vec<u32>>>,
}

impl ExplicitTs {
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }
}

impl Model for ExplicitTs {
    fn vector_len(&self) -> usize {
        self.vector_len
    }

    fn initial_state(&self) -> Vec<u32> {
        self.init.clone()
    }

    fn for_each_successor(&self, state: &[u32], f: &mut dyn FnMut(&[u32])) {
        if let Some(succs) = self.edges.get(state) {
            for s in succs {
                f(s);
            }
        }
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

fn parse_vector(line: usize, fields: &[&str], veclen: usize) -> Result<Vec<u32>, ModelError> {
    if fields.len() != veclen {
        return Err(ModelError::Parse {
            line,
            msg: format!("expected {veclen} numbers, got {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse().map_err(|_| ModelError::Parse {
                line,
                msg: format!("`{f}` is not a decimal u32"),
            })
        })
        .collect()
}

/// Parse ETS text. `label` names the model in reports.
pub fn parse_ets(text: &str, label: &str) -> Result<ExplicitTs, ModelError> {
    let mut veclen: Option<usize> = None;
    let mut init: Option<Vec<u32>> = None;
    let mut edges: HashMap<Vec<u32>, Vec<Vec<u32>>> = HashMap::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "ets" => {
                if fields[1..] != ["1"] {
                    return Err(ModelError::Parse {
                        line,
                        msg: "expected header `ets 1`".into(),
                    });
                }
                saw_header = true;
            }
            "veclen" => {
                let k: usize = fields
                    .get(1)
                    .and_then(|f| f.parse().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| ModelError::Parse {
                        line,
                        msg: "veclen needs one positive number".into(),
                    })?;
                veclen = Some(k);
            }
            "init" => {
                let k = veclen.ok_or_else(|| ModelError::Parse {
                    line,
                    msg: "init before veclen".into(),
                })?;
                init = Some(parse_vector(line, &fields[1..], k)?);
            }
            "edge" => {
                let k = veclen.ok_or_else(|| ModelError::Parse {
                    line,
                    msg: "edge before veclen".into(),
                })?;
                let arrow = fields.iter().position(|&f| f == "->").ok_or_else(|| {
                    ModelError::Parse {
                        line,
                        msg: "edge line needs `->`".into(),
                    }
                })?;
                let src = parse_vector(line, &fields[1..arrow], k)?;
                let dst = parse_vector(line, &fields[arrow + 1..], k)?;
                edges.entry(src).or_default().push(dst);
            }
            other => {
                return Err(ModelError::Parse {
                    line,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    if !saw_header {
        return Err(ModelError::Parse {
            line: 1,
            msg: "missing `ets 1` header".into(),
        });
    }
    let vector_len = veclen.ok_or(ModelError::Parse {
        line: 1,
        msg: "missing veclen".into(),
    })?;
    let init = init.ok_or(ModelError::Parse {
        line: 1,
        msg: "missing init".into(),
    })?;
    Ok(ExplicitTs {
        label: label.to_string(),
        vector_len,
        init,
        edges,
    })
}

pub fn load_ets(path: &Path) -> Result<ExplicitTs, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let label = format!("ets:{}", path.display());
    parse_ets(&text, &label)
}

/// Write a model's reachable fragment as an ETS file, edges in BFS order.
pub fn export_ets<W: Write>(model: &dyn Model, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "ets 1")?;
    writeln!(out, "veclen {}", model.vector_len())?;
    let fmt = |v: &[u32]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "init {}", fmt(&model.initial_state()))?;
    let reach = oracle_reach(model);
    let mut queue = std::collections::VecDeque::from([model.initial_state()]);
    let mut seen = std::collections::HashSet::from([model.initial_state()]);
    while let Some(state) = queue.pop_front() {
        for succ in model.successors(&state) {
            writeln!(out, "edge {} -> {}", fmt(&state), fmt(&succ))?;
            if seen.insert(succ.clone()) {
                queue.push_back(succ);
            }
        }
    }
    debug_assert_eq!(seen.len() as u64, reach.states);
    Ok(())
}
