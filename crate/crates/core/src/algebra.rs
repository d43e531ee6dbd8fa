//! Finite algebras presented by operation tables: terms, evaluation,
//! identity checking, and the derived constructions (generated subalgebras,
//! direct powers, quotients).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closure::{bfs_closure, ClosureResult};
use crate::partition::Partition;
use crate::{Error, Result, TABLE_ENTRY_CAP};

/// An ordered list of operation symbols with arities. Order is significant
/// and preserved by serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    symbols: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(symbols: Vec<(String, usize)>) -> Result<Self> {
        for (i, (name, _)) in symbols.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::invalid("empty operation symbol"));
            }
            if symbols[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::invalid(format!("duplicate symbol '{name}'")));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|(n, _)| n == name)
    }

    pub fn arity(&self, index: usize) -> usize {
        self.symbols[index].1
    }

    pub fn name(&self, index: usize) -> &str {
        &self.symbols[index].0
    }

    pub fn arities(&self) -> Vec<usize> {
        self.symbols.iter().map(|&(_, k)| k).collect()
    }

    /// Signatures are compatible when they list the same arities in the same
    /// order; symbol names are presentation-level and do not have to agree.
    pub fn compatible(&self, other: &Signature) -> bool {
        self.arities() == other.arities()
    }

    /// Picks a fresh symbol name not present in the signature.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.index_of(base).is_none() {
            return base.to_string();
        }
        let mut i = 2usize;
        loop {
            let candidate = format!("{base}_{i}");
            if self.index_of(&candidate).is_none() {
                return candidate;
            }
            i += 1;
        }
    }
}

/// A term over a signature: a variable `x<i>` or an application of a symbol
/// to argument terms. Serializes as its prefix text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Term::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Term {
    pub fn app(symbol: &str, args: Vec<Term>) -> Term {
        Term::App(symbol.to_string(), args)
    }

    /// Largest variable index occurring in the term, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    /// Checks that every applied symbol occurs in `sig` with the right arity.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(name, args) => {
                let idx = sig
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                let arity = sig.arity(idx);
                if arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        arity,
                        given: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(sig))
            }
        }
    }

    /// Replaces variable `i` by `Var(map[i])`. Variables beyond the map are
    /// left unchanged.
    pub fn rename_vars(&self, map: &[usize]) -> Term {
        match self {
            Term::Var(i) => Term::Var(map.get(*i).copied().unwrap_or(*i)),
            Term::App(name, args) => Term::App(
                name.clone(),
                args.iter().map(|a| a.rename_vars(map)).collect(),
            ),
        }
    }

    /// Rewrites symbol names positionally from one signature to a
    /// compatible one.
    pub fn rename_symbols(&self, from: &Signature, to: &Signature) -> Result<Term> {
        match self {
            Term::Var(i) => Ok(Term::Var(*i)),
            Term::App(name, args) => {
                let idx = from
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                let new_args = args
                    .iter()
                    .map(|a| a.rename_symbols(from, to))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Term::App(to.name(idx).to_string(), new_args))
            }
        }
    }

    /// Parses the parenthesized prefix syntax, e.g. `(m x0 (m x1 x2))`.
    pub fn parse(text: &str) -> Result<Term> {
        let tokens = tokenize_term(text);
        let mut pos = 0;
        let term = parse_term_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::invalid(format!(
                "trailing input after term: '{}'",
                tokens[pos..].join(" ")
            )));
        }
        Ok(term)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(name, args) => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub(crate) fn tokenize_term(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub(crate) fn parse_term_tokens(tokens: &[String], pos: &mut usize) -> Result<Term> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::invalid("unexpected end of term"))?;
    *pos += 1;
    if tok == "(" {
        let head = tokens
            .get(*pos)
            .ok_or_else(|| Error::invalid("missing symbol after '('"))?;
        if head == "(" || head == ")" {
            return Err(Error::invalid("expected a symbol after '('"));
        }
        let name = head.clone();
        *pos += 1;
        let mut args = Vec::new();
        loop {
            let next = tokens
                .get(*pos)
                .ok_or_else(|| Error::invalid("unbalanced '(' in term"))?;
            if next == ")" {
                *pos += 1;
                return Ok(Term::App(name, args));
            }
            args.push(parse_term_tokens(tokens, pos)?);
        }
    } else if tok == ")" {
        Err(Error::invalid("unexpected ')' in term"))
    } else if let Some(rest) = tok.strip_prefix('x') {
        let idx: usize = rest
            .parse()
            .map_err(|_| Error::invalid(format!("bad variable '{tok}'")))?;
        Ok(Term::Var(idx))
    } else {
        Err(Error::invalid(format!(
            "bad term token '{tok}' (variables are x0, x1, ...; applications are parenthesized)"
        )))
    }
}

/// An equation between two terms, quantified over `variable_count`
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub left: Term,
    pub right: Term,
    pub variable_count: usize,
}

impl Identity {
    pub fn new(left: Term, right: Term, variable_count: usize) -> Result<Self> {
        let max = left.max_var().max(right.max_var());
        if let Some(m) = max {
            if m >= variable_count {
                return Err(Error::VariableOutOfRange {
                    index: m,
                    bound: variable_count,
                });
            }
        }
        Ok(Identity {
            left,
            right,
            variable_count,
        })
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.left.validate(sig)?;
        self.right.validate(sig)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

/// A two-element subset of the universe, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnorderedPair {
    lo: usize,
    hi: usize,
}

impl UnorderedPair {
    /// Returns `None` when the two elements coincide.
    pub fn new(a: usize, b: usize) -> Option<UnorderedPair> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(UnorderedPair { lo: a, hi: b }),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(UnorderedPair { lo: b, hi: a }),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn contains(&self, x: usize) -> bool {
        self.lo == x || self.hi == x
    }

    /// The unordered image of the pair under `f`, or `None` if it collapses.
    pub fn map(&self, mut f: impl FnMut(usize) -> usize) -> Option<UnorderedPair> {
        UnorderedPair::new(f(self.lo), f(self.hi))
    }
}

impl fmt::Display for UnorderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// Outcome of checking an identity against all assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityVerdict {
    Holds,
    /// The lexicographically least failing assignment.
    Counterexample(Vec<usize>),
}

impl IdentityVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityVerdict::Holds)
    }
}

/// The subuniverse generated by a set of seed elements, in deterministic
/// discovery order, optionally with a witness term per element. Witness
/// terms evaluate to their element when variable `x<i>` is assigned the
/// `i`-th seed.
#[derive(Debug, Clone)]
pub struct GeneratedSubuniverse {
    pub elements: Vec<usize>,
    pub witnesses: Option<Vec<Term>>,
}

impl GeneratedSubuniverse {
    /// The subuniverse as a sorted set.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.elements.clone();
        v.sort_unstable();
        v
    }
}

/// A finite algebra: a universe `{0, .., size-1}` and one total operation
/// table per symbol, row-major with the leftmost argument most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    signature: Signature,
    tables: Vec<Vec<usize>>,
}

impl FiniteAlgebra {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        signature: Signature,
        tables: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("universe must be nonempty"));
        }
        if tables.len() != signature.len() {
            return Err(Error::invalid(format!(
                "{} tables for {} symbols",
                tables.len(),
                signature.len()
            )));
        }
        for (i, table) in tables.iter().enumerate() {
            let arity = signature.arity(i);
            let expected = size
                .checked_pow(arity as u32)
                .ok_or_else(|| Error::cap("operation table", "overflow", TABLE_ENTRY_CAP))?;
            if table.len() != expected {
                return Err(Error::invalid(format!(
                    "table for '{}' expects {} entries, found {}",
                    signature.name(i),
                    expected,
                    table.len()
                )));
            }
            if let Some(&bad) = table.iter().find(|&&v| v >= size) {
                return Err(Error::ElementOutOfRange { value: bad, size });
            }
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            signature,
            tables,
        })
    }

    /// Builds an algebra by evaluating `f` on every argument tuple.
    pub fn from_functions(
        name: impl Into<String>,
        size: usize,
        symbols: Vec<(String, usize)>,
        f: impl Fn(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let signature = Signature::new(symbols)?;
        let mut tables = Vec::with_capacity(signature.len());
        for op in 0..signature.len() {
            let arity = signature.arity(op);
            let entries = size
                .checked_pow(arity as u32)
                .ok_or_else(|| Error::cap("operation table", "overflow", TABLE_ENTRY_CAP))?;
            let mut table = Vec::with_capacity(entries);
            let mut args = vec![0usize; arity];
            for idx in 0..entries {
                decode_tuple(idx, size, &mut args);
                table.push(f(op, &args));
            }
            tables.push(table);
        }
        FiniteAlgebra::new(name, size, signature, tables)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn table(&self, op: usize) -> &[usize] {
        &self.tables[op]
    }

    pub fn universe(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// All two-element subsets of the universe in lexicographic order.
    pub fn pairs(&self) -> Vec<UnorderedPair> {
        let mut out = Vec::new();
        for a in 0..self.size {
            for b in (a + 1)..self.size {
                out.push(UnorderedPair::new(a, b).unwrap());
            }
        }
        out
    }

    /// Applies operation `op` (by index) to the argument tuple.
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.signature.arity(op));
        let mut idx = 0usize;
        for &a in args {
            idx = idx * self.size + a;
        }
        self.tables[op][idx]
    }

    /// Evaluates a term under an assignment of universe elements to
    /// variables.
    pub fn eval(&self, term: &Term, assignment: &[usize]) -> Result<usize> {
        match term {
            Term::Var(i) => assignment
                .get(*i)
                .copied()
                .ok_or(Error::VariableOutOfRange {
                    index: *i,
                    bound: assignment.len(),
                }),
            Term::App(name, args) => {
                let op = self
                    .signature
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                let arity = self.signature.arity(op);
                if arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        arity,
                        given: args.len(),
                    });
                }
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a, assignment)?);
                }
                Ok(self.apply(op, &values))
            }
        }
    }

    /// Checks an identity against all `size^variable_count` assignments,
    /// enumerated lexicographically with the leftmost variable most
    /// significant.
    pub fn check_identity(&self, identity: &Identity) -> Result<IdentityVerdict> {
        identity.validate(&self.signature)?;
        let vc = identity.variable_count;
        let total = self
            .size
            .checked_pow(vc as u32)
            .ok_or_else(|| Error::cap("identity check", "overflow", usize::MAX))?;
        let mut assignment = vec![0usize; vc];
        for idx in 0..total {
            decode_tuple(idx, self.size, &mut assignment);
            if self.eval(&identity.left, &assignment)? != self.eval(&identity.right, &assignment)? {
                return Ok(IdentityVerdict::Counterexample(assignment));
            }
        }
        Ok(IdentityVerdict::Holds)
    }

    /// Least subuniverse containing `seeds`, closed under all operations.
    /// Elements appear in deterministic breadth-first discovery order, so
    /// witness terms are depth-minimal.
    pub fn generate_subalgebra(&self, seeds: &[usize], witnesses: bool) -> Result<GeneratedSubuniverse> {
        for &s in seeds {
            if s >= self.size {
                return Err(Error::ElementOutOfRange {
                    value: s,
                    size: self.size,
                });
            }
        }
        let arities = self.signature.arities();
        let result: ClosureResult<usize> = bfs_closure(
            seeds,
            &arities,
            |op, arg_idx, items| {
                let args: Vec<usize> = arg_idx.iter().map(|&i| items[i]).collect();
                self.apply(op, &args)
            },
            self.size,
        );
        debug_assert!(result.complete);
        let witnesses = witnesses.then(|| {
            (0..result.items.len())
                .map(|i| result.term(&self.signature, i))
                .collect()
        });
        Ok(GeneratedSubuniverse {
            elements: result.items,
            witnesses,
        })
    }

    /// The algebra induced on a subuniverse (which must be closed), with
    /// elements renamed to `{0, .., k-1}` in ascending order of the original
    /// elements. Returns the renaming as a map from new to old elements.
    pub fn induced_subalgebra(&self, subuniverse: &[usize]) -> Result<(FiniteAlgebra, Vec<usize>)> {
        let mut sub: Vec<usize> = subuniverse.to_vec();
        sub.sort_unstable();
        sub.dedup();
        if sub.is_empty() {
            return Err(Error::invalid("subuniverse must be nonempty"));
        }
        if let Some(&bad) = sub.iter().find(|&&v| v >= self.size) {
            return Err(Error::ElementOutOfRange {
                value: bad,
                size: self.size,
            });
        }
        let mut old_to_new = vec![usize::MAX; self.size];
        for (new, &old) in sub.iter().enumerate() {
            old_to_new[old] = new;
        }
        let algebra = FiniteAlgebra::from_functions(
            format!("{}_sub", self.name),
            sub.len(),
            self.signature.symbols().to_vec(),
            |op, args| {
                let orig: Vec<usize> = args.iter().map(|&a| sub[a]).collect();
                let value = self.apply(op, &orig);
                if old_to_new[value] == usize::MAX {
                    // Caller passed a set that is not closed; surface it as
                    // a panic-free error below by marking with MAX.
                    usize::MAX
                } else {
                    old_to_new[value]
                }
            },
        );
        match algebra {
            Ok(a) => Ok((a, sub)),
            Err(Error::ElementOutOfRange { .. }) => Err(Error::invalid(
                "subuniverse is not closed under the operations",
            )),
            Err(e) => Err(e),
        }
    }

    /// The direct power `A^j`: universe `{0, .., size^j - 1}` encoding
    /// tuples row-major (leftmost coordinate most significant), operations
    /// acting coordinatewise.
    pub fn direct_power(&self, j: u32, cap: usize) -> Result<FiniteAlgebra> {
        if j == 0 {
            return Err(Error::invalid("power exponent must be positive"));
        }
        let new_size = self
            .size
            .checked_pow(j)
            .filter(|&s| s <= cap)
            .ok_or_else(|| {
                Error::cap(
                    format!("direct power {}^{}", self.name, j),
                    format!("{}^{}", self.size, j),
                    cap,
                )
            })?;
        for op in 0..self.signature.len() {
            let arity = self.signature.arity(op) as u32;
            let entries = (new_size as u128).pow(arity);
            if entries > TABLE_ENTRY_CAP as u128 {
                return Err(Error::cap(
                    format!("table for '{}' in power", self.signature.name(op)),
                    entries,
                    TABLE_ENTRY_CAP,
                ));
            }
        }
        let base = self.size;
        let j = j as usize;
        FiniteAlgebra::from_functions(
            format!("{}_pow{}", self.name, j),
            new_size,
            self.signature.symbols().to_vec(),
            |op, args| {
                let arity = args.len();
                let mut coords = vec![vec![0usize; arity]; j];
                let mut scratch = vec![0usize; j];
                for (pos, &a) in args.iter().enumerate() {
                    decode_tuple(a, base, &mut scratch);
                    for c in 0..j {
                        coords[c][pos] = scratch[c];
                    }
                }
                let mut value = 0usize;
                for c in 0..j {
                    value = value * base + self.apply(op, &coords[c]);
                }
                value
            },
        )
    }

    /// Encodes a tuple as an element of the direct power.
    pub fn encode_tuple(&self, tuple: &[usize]) -> usize {
        let mut idx = 0usize;
        for &t in tuple {
            idx = idx * self.size + t;
        }
        idx
    }

    /// Decodes a direct-power element back into a tuple of length `j`.
    pub fn decode_tuple(&self, element: usize, j: usize) -> Vec<usize> {
        let mut out = vec![0usize; j];
        decode_tuple(element, self.size, &mut out);
        out
    }

    /// Returns the first incompatibility between the partition and some
    /// operation, if any. A `None` result certifies that the partition is a
    /// congruence.
    pub fn congruence_violation(&self, theta: &Partition) -> Option<String> {
        if theta.universe_size() != self.size {
            return Some(format!(
                "partition is over {} elements, algebra has {}",
                theta.universe_size(),
                self.size
            ));
        }
        // It suffices to check compatibility with all basic translations.
        for op in 0..self.signature.len() {
            let arity = self.signature.arity(op);
            if arity == 0 {
                continue;
            }
            for position in 0..arity {
                let param_count = self.size.pow((arity - 1) as u32);
                let mut params = vec![0usize; arity - 1];
                for p in 0..param_count {
                    decode_tuple(p, self.size, &mut params);
                    let mut args = vec![0usize; arity];
                    for a in 0..self.size {
                        for b in (a + 1)..self.size {
                            if !theta.related(a, b) {
                                continue;
                            }
                            fill_args(&mut args, position, &params, a);
                            let va = self.apply(op, &args);
                            fill_args(&mut args, position, &params, b);
                            let vb = self.apply(op, &args);
                            if !theta.related(va, vb) {
                                fill_args(&mut args, position, &params, a);
                                let tuple_a = args.clone();
                                fill_args(&mut args, position, &params, b);
                                return Some(format!(
                                    "operation '{}' maps related tuples {:?} and {:?} to unrelated {} and {}",
                                    self.signature.name(op),
                                    tuple_a,
                                    args,
                                    va,
                                    vb
                                ));
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// The quotient algebra by a congruence, with blocks renamed to
    /// `{0, .., k-1}` in ascending order of their least elements. Returns
    /// the block map (element to block index).
    pub fn quotient(&self, theta: &Partition) -> Result<(FiniteAlgebra, Vec<usize>)> {
        if let Some(violation) = self.congruence_violation(theta) {
            return Err(Error::NotCongruence(violation));
        }
        let blocks = theta.blocks();
        let mut block_of = vec![0usize; self.size];
        for (bi, block) in blocks.iter().enumerate() {
            for &x in block {
                block_of[x] = bi;
            }
        }
        let reps: Vec<usize> = blocks.iter().map(|b| b[0]).collect();
        let algebra = FiniteAlgebra::from_functions(
            format!("{}_mod", self.name),
            blocks.len(),
            self.signature.symbols().to_vec(),
            |op, args| {
                let orig: Vec<usize> = args.iter().map(|&a| reps[a]).collect();
                block_of[self.apply(op, &orig)]
            },
        )?;
        Ok((algebra, block_of))
    }

    /// Parses the `.alg` text format.
    pub fn parse(text: &str) -> Result<FiniteAlgebra> {
        parse_alg(text)
    }

    /// Serializes to the canonical `.alg` text format. Parsing the result
    /// reproduces the algebra exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("algebra {}\n", self.name));
        out.push_str(&format!("size {}\n", self.size));
        for (op, (name, arity)) in self.signature.symbols().iter().enumerate() {
            out.push_str(&format!("op {name} {arity}\n"));
            let table = &self.tables[op];
            if *arity == 0 {
                out.push_str(&format!("{}\n", table[0]));
            } else {
                for row in table.chunks(self.size) {
                    let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }
}

pub(crate) fn decode_tuple(mut idx: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
}

fn fill_args(args: &mut [usize], position: usize, params: &[usize], value: usize) {
    let mut pi = 0;
    for (i, slot) in args.iter_mut().enumerate() {
        if i == position {
            *slot = value;
        } else {
            *slot = params[pi];
            pi += 1;
        }
    }
}

fn parse_alg(text: &str) -> Result<FiniteAlgebra> {
    // Tokenize with line tracking; '#' starts a comment that runs to the
    // end of the line.
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let effective = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        for tok in effective.split_whitespace() {
            tokens.push((lineno + 1, tok));
        }
    }
    let mut pos = 0usize;
    let expect = |tokens: &[(usize, &str)], pos: &mut usize, want: &str| -> Result<()> {
        match tokens.get(*pos) {
            Some(&(_, tok)) if tok == want => {
                *pos += 1;
                Ok(())
            }
            Some(&(line, tok)) => Err(Error::Parse {
                line,
                message: format!("expected '{want}', found '{tok}'"),
            }),
            None => Err(Error::Parse {
                line: text.lines().count(),
                message: format!("expected '{want}', found end of input"),
            }),
        }
    };
    let take = |tokens: &[(usize, &str)], pos: &mut usize, what: &str| -> Result<(usize, String)> {
        match tokens.get(*pos) {
            Some(&(line, tok)) => {
                *pos += 1;
                Ok((line, tok.to_string()))
            }
            None => Err(Error::Parse {
                line: text.lines().count(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    };

    expect(&tokens, &mut pos, "algebra")?;
    let (_, name) = take(&tokens, &mut pos, "an algebra name")?;
    expect(&tokens, &mut pos, "size")?;
    let (line, size_tok) = take(&tokens, &mut pos, "a size")?;
    let size: usize = size_tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad size '{size_tok}'"),
    })?;
    if size == 0 {
        return Err(Error::Parse {
            line,
            message: "size must be positive".to_string(),
        });
    }

    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut tables: Vec<Vec<usize>> = Vec::new();
    while pos < tokens.len() {
        expect(&tokens, &mut pos, "op")?;
        let (_, op_name) = take(&tokens, &mut pos, "an operation name")?;
        let (line, arity_tok) = take(&tokens, &mut pos, "an arity")?;
        let arity: usize = arity_tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad arity '{arity_tok}'"),
        })?;
        let expected = size.checked_pow(arity as u32).ok_or(Error::Parse {
            line,
            message: format!("table for '{op_name}' would overflow"),
        })?;
        let mut table = Vec::with_capacity(expected);
        let mut last_line = line;
        while table.len() < expected {
            match tokens.get(pos) {
                Some(&(l, tok)) if tok != "op" => {
                    let value: usize = tok.parse().map_err(|_| Error::Parse {
                        line: l,
                        message: format!("bad table entry '{tok}'"),
                    })?;
                    if value >= size {
                        return Err(Error::Parse {
                            line: l,
                            message: format!("entry {value} out of range for size {size}"),
                        });
                    }
                    table.push(value);
                    last_line = l;
                    pos += 1;
                }
                _ => {
                    return Err(Error::Parse {
                        line: last_line,
                        message: format!(
                            "table for '{op_name}' expected {expected} entries, found {}",
                            table.len()
                        ),
                    });
                }
            }
        }
        symbols.push((op_name, arity));
        tables.push(table);
    }

    let signature = Signature::new(symbols).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    FiniteAlgebra::new(name, size, signature, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parse_s2_source() {
        let text = "algebra S2\nsize 2\nop m 2\n0 0\n0 1\n";
        let a = FiniteAlgebra::parse(text).unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.table(0), &[0, 0, 0, 1]);
        assert_eq!(a, fixtures::s2());
    }

    #[test]
    fn parse_rejects_short_table() {
        let text = "algebra bad\nsize 2\nop m 2\n0 0 0\n";
        let err = FiniteAlgebra::parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected 4 entries"), "got: {msg}");
    }

    #[test]
    fn parse_rejects_out_of_range_entry() {
        let text = "algebra bad\nsize 2\nop m 2\n0 0 0 2\n";
        let err = FiniteAlgebra::parse(text).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn parse_d3_and_spot_check_entries() {
        let d3 = fixtures::d3();
        let reparsed = FiniteAlgebra::parse(&d3.to_text()).unwrap();
        assert_eq!(reparsed, d3);
        // Dual discriminator: first argument if the first two agree,
        // otherwise the third.
        assert_eq!(d3.apply(0, &[0, 1, 2]), 2);
        assert_eq!(d3.apply(0, &[1, 1, 0]), 1);
    }

    #[test]
    fn round_trip_fixtures() {
        for a in [
            fixtures::s2(),
            fixtures::z2(),
            fixtures::c3(),
            fixtures::d3x(),
            fixtures::s2x(),
        ] {
            let text = a.to_text();
            let b = FiniteAlgebra::parse(&text).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let text = "# a comment\nalgebra S2 # trailing\nsize 2\nop m 2\n 0 0 0\n1\n";
        let a = FiniteAlgebra::parse(text).unwrap();
        assert_eq!(a.table(0), &[0, 0, 0, 1]);
    }

    #[test]
    fn eval_table_lookup() {
        let s2 = fixtures::s2();
        let t = Term::app("m", vec![Term::Var(0), Term::Var(1)]);
        assert_eq!(s2.eval(&t, &[1, 1]).unwrap(), 1);
        assert_eq!(s2.eval(&t, &[1, 0]).unwrap(), 0);
    }

    #[test]
    fn eval_expanded_symbol() {
        let s2x = fixtures::s2x();
        let t = Term::app("s1", vec![Term::Var(0), Term::Var(1), Term::Var(2)]);
        assert_eq!(s2x.eval(&t, &[1, 0, 1]).unwrap(), 0);
    }

    #[test]
    fn eval_dual_discriminator() {
        let d3 = fixtures::d3();
        let t = Term::app("d", vec![Term::Var(0), Term::Var(1), Term::Var(2)]);
        assert_eq!(d3.eval(&t, &[0, 1, 2]).unwrap(), 2);
    }

    #[test]
    fn eval_reports_unknown_symbol_and_arity() {
        let s2 = fixtures::s2();
        let t = Term::app("q", vec![Term::Var(0)]);
        assert!(matches!(s2.eval(&t, &[0]), Err(Error::UnknownSymbol(_))));
        let t = Term::app("m", vec![Term::Var(0)]);
        assert!(matches!(s2.eval(&t, &[0]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn identity_idempotence_in_s2() {
        let s2 = fixtures::s2();
        let e = Identity::new(
            Term::app("m", vec![Term::Var(0), Term::Var(0)]),
            Term::Var(0),
            1,
        )
        .unwrap();
        assert!(s2.check_identity(&e).unwrap().holds());
    }

    #[test]
    fn identity_fails_in_z2_with_least_counterexample() {
        let z2 = fixtures::z2();
        let e = Identity::new(
            Term::app("p", vec![Term::Var(0), Term::Var(0)]),
            Term::Var(0),
            1,
        )
        .unwrap();
        assert_eq!(
            z2.check_identity(&e).unwrap(),
            IdentityVerdict::Counterexample(vec![1])
        );
    }

    #[test]
    fn identity_t2_in_s2x() {
        let s2x = fixtures::s2x();
        // t2(x, x, y) = y
        let e = Identity::new(
            Term::app("t2", vec![Term::Var(0), Term::Var(0), Term::Var(1)]),
            Term::Var(1),
            2,
        )
        .unwrap();
        assert!(s2x.check_identity(&e).unwrap().holds());
    }

    #[test]
    fn subalgebra_generation() {
        let s2 = fixtures::s2();
        let gen = s2.generate_subalgebra(&[1], true).unwrap();
        assert_eq!(gen.sorted(), vec![1]);
        let gen = s2.generate_subalgebra(&[0, 1], false).unwrap();
        assert_eq!(gen.sorted(), vec![0, 1]);
        let c3 = fixtures::c3();
        let gen = c3.generate_subalgebra(&[1, 2], true).unwrap();
        assert_eq!(gen.sorted(), vec![1, 2]);
        // Witness terms replay to their elements.
        for (i, w) in gen.witnesses.as_ref().unwrap().iter().enumerate() {
            assert_eq!(c3.eval(w, &[1, 2]).unwrap(), gen.elements[i]);
        }
    }

    #[test]
    fn subalgebra_monotone_and_idempotent() {
        let c3 = fixtures::c3();
        let small = c3.generate_subalgebra(&[1], false).unwrap().sorted();
        let big = c3.generate_subalgebra(&[1, 0], false).unwrap().sorted();
        assert!(small.iter().all(|x| big.contains(x)));
        let again = c3.generate_subalgebra(&big, false).unwrap().sorted();
        assert_eq!(big, again);
    }

    #[test]
    fn direct_power_of_z2_is_coordinatewise() {
        let z2 = fixtures::z2();
        let sq = z2.direct_power(2, crate::DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(sq.size(), 4);
        // p((1,0),(0,1)) = (1,1)
        let a = sq.encode_tuple(&[1, 0]);
        let b = sq.encode_tuple(&[0, 1]);
        assert_eq!(sq.apply(0, &[a, b]), sq.encode_tuple(&[1, 1]));
    }

    #[test]
    fn direct_power_of_s2_is_the_square_semilattice() {
        let s2 = fixtures::s2();
        let sq = s2.direct_power(2, crate::DEFAULT_SIZE_CAP).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let ta = sq.decode_tuple(a, 2);
                let tb = sq.decode_tuple(b, 2);
                let expect = sq.encode_tuple(&[ta[0].min(tb[0]), ta[1].min(tb[1])]);
                assert_eq!(sq.apply(0, &[a, b]), expect);
            }
        }
    }

    #[test]
    fn direct_power_respects_cap() {
        let s2 = fixtures::s2();
        let err = s2.direct_power(10, 100).unwrap_err();
        assert!(err.is_cap());
    }

    #[test]
    fn quotient_of_c3_collapsing_bottom_pair_is_s2() {
        let c3 = fixtures::c3();
        let theta = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let (q, block_of) = c3.quotient(&theta).unwrap();
        assert_eq!(q.size(), 2);
        assert_eq!(q.table(0), fixtures::s2().table(0));
        assert_eq!(block_of, vec![0, 0, 1]);
    }

    #[test]
    fn quotient_by_identity_and_one_block() {
        let z2 = fixtures::z2();
        let (q, _) = z2.quotient(&Partition::identity(2)).unwrap();
        assert_eq!(q.table(0), z2.table(0));
        let (q, _) = z2.quotient(&Partition::one_block(2)).unwrap();
        assert_eq!(q.size(), 1);
    }

    #[test]
    fn quotient_rejects_non_congruence() {
        let c3 = fixtures::c3();
        // {0,2 | 1} is not compatible with min: m(0,1)=0 but m(2,1)=1.
        let theta = Partition::from_blocks(3, &[vec![0, 2], vec![1]]).unwrap();
        let err = c3.quotient(&theta).unwrap_err();
        assert!(matches!(err, Error::NotCongruence(_)));
    }

    #[test]
    fn term_parse_and_display_round_trip() {
        let t = Term::parse("(m x0 (m x1 x2))").unwrap();
        assert_eq!(t.to_string(), "(m x0 (m x1 x2))");
        let v = Term::parse("x7").unwrap();
        assert_eq!(v, Term::Var(7));
        assert!(Term::parse("(m x0").is_err());
        assert!(Term::parse(")").is_err());
    }
}
