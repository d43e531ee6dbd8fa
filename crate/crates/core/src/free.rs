//! Free algebras on finitely many generators, realized inside `A^(A^n)`:
//! each element is the vector of values of a term over all assignments of
//! the generators into `A`. Also the free spectrum and the Kalicki
//! membership test for `B ∈ HSP(A)`.

use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::{decode_tuple, FiniteAlgebra, Identity, Term};
use crate::closure::{bfs_closure, ClosureResult, Provenance};
use crate::{Error, Result, COLUMN_CAP, TABLE_ENTRY_CAP};

/// The free algebra of `HSP(base)` on `generator_count` generators.
///
/// Elements are stored in deterministic discovery order; element `i` of
/// vector form `v` satisfies `v[j] = value of its representative term under
/// the j-th assignment`, where assignments are enumerated row-major with
/// the leftmost generator most significant. Representative terms are
/// depth-minimal under the breadth-first order.
pub struct FreeAlgebra {
    base: FiniteAlgebra,
    generator_count: usize,
    columns: usize,
    closure: ClosureResult<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    generator_indices: Vec<usize>,
}

impl FreeAlgebra {
    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn size(&self) -> usize {
        self.closure.items.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.closure.items
    }

    /// Positions of the generator (projection) vectors in the element list.
    pub fn generator_indices(&self) -> &[usize] {
        &self.generator_indices
    }

    /// Depth-minimal representative term of an element.
    pub fn representative(&self, idx: usize) -> Term {
        self.closure.term(self.base.signature(), idx)
    }

    pub fn index_of_vector(&self, v: &[usize]) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// The assignment (one base element per generator) named by a column.
    pub fn column_assignment(&self, column: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.generator_count];
        decode_tuple(column, self.base.size(), &mut out);
        out
    }

    /// Materializes the free algebra as an operation-table algebra. The
    /// element order is the discovery order.
    pub fn to_algebra(&self, table_cap: usize) -> Result<FiniteAlgebra> {
        let size = self.size();
        for op in 0..self.base.signature().len() {
            let arity = self.base.signature().arity(op) as u32;
            let entries = (size as u128).pow(arity);
            if entries > table_cap as u128 || entries > TABLE_ENTRY_CAP as u128 {
                return Err(Error::cap(
                    format!(
                        "materializing table for '{}' over {} free elements",
                        self.base.signature().name(op),
                        size
                    ),
                    entries,
                    table_cap.min(TABLE_ENTRY_CAP),
                ));
            }
        }
        FiniteAlgebra::from_functions(
            format!("F{}_{}", self.generator_count, self.base.name()),
            size,
            self.base.signature().symbols().to_vec(),
            |op, args| {
                let value = self.apply_coordinatewise(op, args);
                *self.index.get(&value).expect("closure is closed")
            },
        )
    }

    fn apply_coordinatewise(&self, op: usize, args: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.columns);
        let mut coord = vec![0usize; args.len()];
        for j in 0..self.columns {
            for (slot, &a) in coord.iter_mut().zip(args.iter()) {
                *slot = self.closure.items[a][j];
            }
            out.push(self.base.apply(op, &coord));
        }
        out
    }
}

/// Outcome of building a free algebra under an element cap.
pub enum FreeBuild {
    Built(FreeAlgebra),
    /// The cap stopped the closure; `elements_found` is a lower bound on
    /// the true size.
    CapExceeded {
        elements_found: usize,
        detail: String,
    },
}

impl FreeBuild {
    pub fn built(self) -> Result<FreeAlgebra> {
        match self {
            FreeBuild::Built(f) => Ok(f),
            FreeBuild::CapExceeded {
                elements_found,
                detail,
            } => Err(Error::cap(detail, format!(">= {elements_found}"), 0)),
        }
    }
}

/// Builds the free algebra of `HSP(algebra)` on `n` generators, stopping
/// (with a size lower bound) once more than `cap` elements appear.
pub fn build_free(algebra: &FiniteAlgebra, n: usize, cap: usize) -> Result<FreeBuild> {
    if n == 0 {
        return Err(Error::invalid("generator count must be positive"));
    }
    let columns = match algebra.size().checked_pow(n as u32) {
        Some(c) if c <= COLUMN_CAP => c,
        _ => {
            return Ok(FreeBuild::CapExceeded {
                elements_found: 0,
                detail: format!(
                    "vector representation needs {}^{} columns (cap {})",
                    algebra.size(),
                    n,
                    COLUMN_CAP
                ),
            })
        }
    };
    let mut seeds = Vec::with_capacity(n);
    let mut scratch = vec![0usize; n];
    for i in 0..n {
        let mut v = Vec::with_capacity(columns);
        for j in 0..columns {
            decode_tuple(j, algebra.size(), &mut scratch);
            v.push(scratch[i]);
        }
        seeds.push(v);
    }
    let arities = algebra.signature().arities();
    let closure = bfs_closure(
        &seeds,
        &arities,
        |op, arg_idx, items: &[Vec<usize>]| {
            let mut out = Vec::with_capacity(columns);
            let mut coord = vec![0usize; arg_idx.len()];
            for j in 0..columns {
                for (slot, &a) in coord.iter_mut().zip(arg_idx.iter()) {
                    *slot = items[a][j];
                }
                out.push(algebra.apply(op, &coord));
            }
            out
        },
        cap,
    );
    if !closure.complete {
        return Ok(FreeBuild::CapExceeded {
            elements_found: closure.items.len(),
            detail: format!(
                "free algebra of {} on {} generators exceeds {} elements",
                algebra.name(),
                n,
                cap
            ),
        });
    }
    let mut index = HashMap::with_capacity(closure.items.len());
    for (i, v) in closure.items.iter().enumerate() {
        index.insert(v.clone(), i);
    }
    let generator_indices = seeds
        .iter()
        .map(|v| *index.get(v).expect("seed present"))
        .collect();
    Ok(FreeBuild::Built(FreeAlgebra {
        base: algebra.clone(),
        generator_count: n,
        columns,
        closure,
        index,
        generator_indices,
    }))
}

/// Outcome of a free-spectrum query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SpectrumOutcome {
    Size(usize),
    CapExceeded { lower_bound: usize },
}

/// `f(n)`: the cardinality of the free algebra on `n` generators.
pub fn free_spectrum(algebra: &FiniteAlgebra, n: usize, cap: usize) -> Result<SpectrumOutcome> {
    match build_free(algebra, n, cap)? {
        FreeBuild::Built(f) => Ok(SpectrumOutcome::Size(f.size())),
        FreeBuild::CapExceeded { elements_found, .. } => Ok(SpectrumOutcome::CapExceeded {
            lower_bound: elements_found,
        }),
    }
}

/// Verdict of the membership test `B ∈ HSP(A)`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub member: bool,
    /// When not a member: an identity over `A`'s signature that holds in
    /// `A` and fails in `B`.
    pub witness: Option<Identity>,
}

/// Kalicki's membership test: closes the pairs `(i-th projection, i-th
/// element of B)` inside `A^(A^|B|) × B`; `B` is a member exactly when no
/// two generated pairs share the vector component while disagreeing on the
/// `B` component. The first conflict (in discovery order) yields the
/// separating identity.
pub fn hsp_member(b: &FiniteAlgebra, a: &FiniteAlgebra, cap: usize) -> Result<MembershipVerdict> {
    if !b.signature().compatible(a.signature()) {
        return Err(Error::SignatureMismatch(format!(
            "{} and {} do not list the same arities",
            b.name(),
            a.name()
        )));
    }
    let k = b.size();
    let columns = match a.size().checked_pow(k as u32) {
        Some(c) if c <= COLUMN_CAP => c,
        _ => {
            return Err(Error::cap(
                format!("membership test columns {}^{}", a.size(), k),
                format!("{}^{}", a.size(), k),
                COLUMN_CAP,
            ))
        }
    };

    type Pair = (Vec<usize>, usize);
    let mut items: Vec<Pair> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut pair_index: HashMap<Pair, usize> = HashMap::new();
    let mut vector_index: HashMap<Vec<usize>, usize> = HashMap::new();

    let mut scratch = vec![0usize; k];
    for i in 0..k {
        let mut v = Vec::with_capacity(columns);
        for j in 0..columns {
            decode_tuple(j, a.size(), &mut scratch);
            v.push(scratch[i]);
        }
        let pair = (v, i);
        if pair_index.contains_key(&pair) {
            continue;
        }
        if let Some(&other) = vector_index.get(&pair.0) {
            // Two generators share a vector but differ in B: a two-variable
            // separating identity.
            let witness = Identity::new(pair_term(a, &provenance, other), Term::Var(i), k)?;
            return Ok(MembershipVerdict {
                member: false,
                witness: Some(witness),
            });
        }
        vector_index.insert(pair.0.clone(), items.len());
        pair_index.insert(pair.clone(), items.len());
        items.push(pair);
        provenance.push(Provenance::Seed(i));
    }

    let arities = a.signature().arities();
    let mut frontier_start = 0usize;
    let mut first_round = true;
    loop {
        let round_start = items.len();
        for (op, &arity) in arities.iter().enumerate() {
            if arity == 0 {
                if !first_round {
                    continue;
                }
                let value = apply_pair(a, b, op, &[], &items, columns);
                match classify(&mut pair_index, &mut vector_index, &value, items.len()) {
                    PairClass::Known => {}
                    PairClass::Fresh => {
                        items.push(value);
                        provenance.push(Provenance::App {
                            op,
                            args: Vec::new(),
                        });
                    }
                    PairClass::Conflict(other) => {
                        let witness = Identity::new(
                            pair_term(a, &provenance, other),
                            app_term(a, &provenance, op, &[]),
                            k,
                        )?;
                        return Ok(MembershipVerdict {
                            member: false,
                            witness: Some(witness),
                        });
                    }
                }
                continue;
            }
            let mut tuple = vec![0usize; arity];
            'tuples: loop {
                if tuple.iter().any(|&i| i >= frontier_start) {
                    if items.len() > cap {
                        return Err(Error::cap("membership closure", items.len(), cap));
                    }
                    let value = apply_pair(a, b, op, &tuple, &items, columns);
                    match classify(&mut pair_index, &mut vector_index, &value, items.len()) {
                        PairClass::Known => {}
                        PairClass::Fresh => {
                            items.push(value);
                            provenance.push(Provenance::App {
                                op,
                                args: tuple.clone(),
                            });
                        }
                        PairClass::Conflict(other) => {
                            let witness = Identity::new(
                                pair_term(a, &provenance, other),
                                app_term(a, &provenance, op, &tuple),
                                k,
                            )?;
                            return Ok(MembershipVerdict {
                                member: false,
                                witness: Some(witness),
                            });
                        }
                    }
                }
                let mut pos = arity;
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
            return Ok(MembershipVerdict {
                member: true,
                witness: None,
            });
        }
        frontier_start = round_start;
        first_round = false;
    }
}

enum PairClass {
    Known,
    Fresh,
    Conflict(usize),
}

fn classify(
    pair_index: &mut HashMap<(Vec<usize>, usize), usize>,
    vector_index: &mut HashMap<Vec<usize>, usize>,
    value: &(Vec<usize>, usize),
    next_idx: usize,
) -> PairClass {
    if pair_index.contains_key(value) {
        return PairClass::Known;
    }
    if let Some(&other) = vector_index.get(&value.0) {
        return PairClass::Conflict(other);
    }
    vector_index.insert(value.0.clone(), next_idx);
    pair_index.insert(value.clone(), next_idx);
    PairClass::Fresh
}

fn apply_pair(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    op: usize,
    arg_idx: &[usize],
    items: &[(Vec<usize>, usize)],
    columns: usize,
) -> (Vec<usize>, usize) {
    let mut vec_out = Vec::with_capacity(columns);
    let mut coord = vec![0usize; arg_idx.len()];
    for j in 0..columns {
        for (slot, &i) in coord.iter_mut().zip(arg_idx.iter()) {
            *slot = items[i].0[j];
        }
        vec_out.push(a.apply(op, &coord));
    }
    let b_args: Vec<usize> = arg_idx.iter().map(|&i| items[i].1).collect();
    (vec_out, b.apply(op, &b_args))
}

fn pair_term(a: &FiniteAlgebra, provenance: &[Provenance], idx: usize) -> Term {
    match &provenance[idx] {
        Provenance::Seed(i) => Term::Var(*i),
        Provenance::App { op, args } => app_term(a, provenance, *op, args),
    }
}

fn app_term(a: &FiniteAlgebra, provenance: &[Provenance], op: usize, args: &[usize]) -> Term {
    Term::App(
        a.signature().name(op).to_string(),
        args.iter()
            .map(|&x| pair_term(a, provenance, x))
            .collect(),
    )
}
