//! Deterministic breadth-first closure under finitary operations.
//!
//! Shared by subalgebra generation, free-algebra construction, and the
//! Kalicki membership test. Rounds proceed by term depth; within a round,
//! operations are applied in signature order and argument tuples in
//! lexicographic order over discovery indices, so the discovery order (and
//! hence every witness term) is deterministic and depth-minimal.

use std::collections::HashMap;
use std::hash::Hash;

use crate::algebra::{Signature, Term};

/// How an item entered the closure.
#[derive(Debug, Clone)]
pub(crate) enum Provenance {
    Seed(usize),
    App { op: usize, args: Vec<usize> },
}

pub(crate) struct ClosureResult<P> {
    /// Items in discovery order. Seeds come first (deduplicated, first
    /// occurrence wins).
    pub items: Vec<P>,
    pub provenance: Vec<Provenance>,
    /// False when the cap stopped the closure early.
    pub complete: bool,
}

impl<P> ClosureResult<P> {
    /// Reconstructs the witness term of an item. Seeds map to variables by
    /// seed position.
    pub fn term(&self, sig: &Signature, idx: usize) -> Term {
        match &self.provenance[idx] {
            Provenance::Seed(i) => Term::Var(*i),
            Provenance::App { op, args } => {
                let (name, _) = &sig.symbols()[*op];
                Term::App(
                    name.clone(),
                    args.iter().map(|&a| self.term(sig, a)).collect(),
                )
            }
        }
    }
}

/// Closes `seeds` under the operations described by `arities`, where
/// `apply(op, arg_indices, items)` evaluates operation `op` on the items at
/// `arg_indices`. Stops (incomplete) once more than `cap` items would be
/// needed.
pub(crate) fn bfs_closure<P, F>(
    seeds: &[P],
    arities: &[usize],
    mut apply: F,
    cap: usize,
) -> ClosureResult<P>
where
    P: Clone + Eq + Hash,
    F: FnMut(usize, &[usize], &[P]) -> P,
{
    let mut items: Vec<P> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut index: HashMap<P, usize> = HashMap::new();

    for (i, s) in seeds.iter().enumerate() {
        if !index.contains_key(s) {
            if items.len() >= cap {
                return ClosureResult {
                    items,
                    provenance,
                    complete: false,
                };
            }
            index.insert(s.clone(), items.len());
            items.push(s.clone());
            provenance.push(Provenance::Seed(i));
        }
    }

    let mut frontier_start = 0usize;
    let mut first_round = true;
    loop {
        let round_start = items.len();
        for (op, &k) in arities.iter().enumerate() {
            if k == 0 {
                // Nullary operations contribute exactly once.
                if first_round {
                    let value = apply(op, &[], &items);
                    if !index.contains_key(&value) {
                        if items.len() >= cap {
                            return ClosureResult {
                                items,
                                provenance,
                                complete: false,
                            };
                        }
                        index.insert(value.clone(), items.len());
                        items.push(value);
                        provenance.push(Provenance::App {
                            op,
                            args: Vec::new(),
                        });
                    }
                }
                continue;
            }
            // Enumerate argument tuples over items known at the start of the
            // round, skipping tuples whose arguments were all available
            // before the previous round (those were enumerated already).
            let mut tuple = vec![0usize; k];
            'tuples: loop {
                if tuple.iter().any(|&i| i >= frontier_start) {
                    let value = apply(op, &tuple, &items);
                    if !index.contains_key(&value) {
                        if items.len() >= cap {
                            return ClosureResult {
                                items,
                                provenance,
                                complete: false,
                            };
                        }
                        index.insert(value.clone(), items.len());
                        items.push(value);
                        provenance.push(Provenance::App {
                            op,
                            args: tuple.clone(),
                        });
                    }
                }
                // Advance the tuple lexicographically below `round_start`.
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break 'tuples;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < round_start {
                        break;
                    }
                    tuple[pos] = 0;
                }
            }
        }
        if items.len() == round_start {
            return ClosureResult {
                items,
                provenance,
                complete: true,
            };
        }
        frontier_start = round_start;
        first_round = false;
    }
}
