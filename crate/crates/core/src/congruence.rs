//! Congruence generation and lattice arithmetic: principal congruences,
//! full congruence lattices, the meet-semidistributive law, subdirect
//! irreducibility, maximal congruences omitting a pair, alternating join
//! chains, and the beta-omega fixpoint iteration.

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::partition::{PairCloser, Partition};
use crate::{Error, Result};

/// Least congruence identifying `a` and `b`, computed by closing the pair
/// under all basic translations and transitivity.
pub fn principal_congruence(algebra: &FiniteAlgebra, a: usize, b: usize) -> Partition {
    generated_congruence(algebra, &[(a, b)])
}

/// Least congruence containing all listed pairs.
pub fn generated_congruence(algebra: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Partition {
    let n = algebra.size();
    let mut closer = PairCloser::new(n);
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for &(x, y) in pairs {
        if closer.union(x, y) {
            queue.push((x, y));
        }
    }
    while let Some((x, y)) = queue.pop() {
        for_each_basic_translation(algebra, |alg, op, position, params| {
            let fx = apply_translation_step(alg, op, position, params, x);
            let fy = apply_translation_step(alg, op, position, params, y);
            if closer.union(fx, fy) {
                queue.push((fx, fy));
            }
        });
    }
    closer.finish()
}

/// Invokes `f(algebra, op, position, params)` once per basic translation:
/// one argument slot of one operation left open, all other slots filled
/// with concrete parameters.
pub(crate) fn for_each_basic_translation<F>(algebra: &FiniteAlgebra, mut f: F)
where
    F: FnMut(&FiniteAlgebra, usize, usize, &[usize]),
{
    let n = algebra.size();
    for op in 0..algebra.signature().len() {
        let arity = algebra.signature().arity(op);
        if arity == 0 {
            continue;
        }
        let param_count = n.pow((arity - 1) as u32);
        let mut params = vec![0usize; arity - 1];
        for position in 0..arity {
            for p in 0..param_count {
                crate::algebra::decode_tuple(p, n, &mut params);
                f(algebra, op, position, &params);
            }
        }
    }
}

pub(crate) fn apply_translation_step(
    algebra: &FiniteAlgebra,
    op: usize,
    position: usize,
    params: &[usize],
    x: usize,
) -> usize {
    let arity = algebra.signature().arity(op);
    let mut args = vec![0usize; arity];
    let mut pi = 0;
    for (i, slot) in args.iter_mut().enumerate() {
        if i == position {
            *slot = x;
        } else {
            *slot = params[pi];
            pi += 1;
        }
    }
    algebra.apply(op, &args)
}

/// The full congruence lattice of an algebra, as a canonically sorted list
/// closed under meet and join.
#[derive(Debug, Clone, Serialize)]
pub struct CongruenceLattice {
    congruences: Vec<Partition>,
}

/// Outcome of enumerating all congruences under a cap.
#[derive(Debug, Clone)]
pub enum CongruencesResult {
    Complete(CongruenceLattice),
    CapExceeded { found: usize },
}

impl CongruenceLattice {
    pub fn congruences(&self) -> &[Partition] {
        &self.congruences
    }

    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn contains(&self, p: &Partition) -> bool {
        self.congruences.binary_search(p).is_ok()
    }

    /// Covering pairs `(i, j)` (by index) of the refinement order.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.congruences.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.congruences[i].leq(&self.congruences[j]) {
                    continue;
                }
                let covered = (0..n).any(|k| {
                    k != i
                        && k != j
                        && self.congruences[i].leq(&self.congruences[k])
                        && self.congruences[k].leq(&self.congruences[j])
                });
                if !covered {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

/// All congruences, as the join-closure of the principal congruences
/// together with the identity. Complete only while the count stays within
/// `cap`.
pub fn all_congruences(algebra: &FiniteAlgebra, cap: usize) -> CongruencesResult {
    let n = algebra.size();
    let mut found: Vec<Partition> = vec![Partition::identity(n)];
    let mut seen: std::collections::HashSet<Partition> = found.iter().cloned().collect();
    let mut queue: Vec<Partition> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let cg = principal_congruence(algebra, a, b);
            if seen.insert(cg.clone()) {
                found.push(cg.clone());
                queue.push(cg);
            }
        }
    }
    while let Some(theta) = queue.pop() {
        if found.len() > cap {
            return CongruencesResult::CapExceeded { found: found.len() };
        }
        let snapshot = found.len();
        for i in 0..snapshot {
            let join = theta.join(&found[i]).expect("same universe");
            if seen.insert(join.clone()) {
                found.push(join.clone());
                queue.push(join);
            }
        }
    }
    if found.len() > cap {
        return CongruencesResult::CapExceeded { found: found.len() };
    }
    found.sort();
    CongruencesResult::Complete(CongruenceLattice { congruences: found })
}

/// Verdict of the meet-semidistributive law over a lattice.
#[derive(Debug, Clone)]
pub enum SdMeetLawVerdict {
    Holds,
    /// First violating triple in enumeration order (indices into the sorted
    /// congruence list, plus the partitions themselves).
    Violation {
        indices: (usize, usize, usize),
        alpha: Partition,
        beta: Partition,
        gamma: Partition,
    },
}

impl SdMeetLawVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SdMeetLawVerdict::Holds)
    }
}

/// Checks `x ∧ y = x ∧ z  implies  x ∧ y = x ∧ (y ∨ z)` over all triples.
pub fn sd_meet_law(lattice: &CongruenceLattice) -> SdMeetLawVerdict {
    let cs = lattice.congruences();
    for (i, alpha) in cs.iter().enumerate() {
        for (j, beta) in cs.iter().enumerate() {
            let ab = alpha.meet(beta).expect("same universe");
            for (k, gamma) in cs.iter().enumerate() {
                let ag = alpha.meet(gamma).expect("same universe");
                if ab != ag {
                    continue;
                }
                let join = beta.join(gamma).expect("same universe");
                if ab != alpha.meet(&join).expect("same universe") {
                    return SdMeetLawVerdict::Violation {
                        indices: (i, j, k),
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        gamma: gamma.clone(),
                    };
                }
            }
        }
    }
    SdMeetLawVerdict::Holds
}

/// The monolith (intersection of all principal congruences on distinct
/// pairs) together with the subdirect-irreducibility verdict.
#[derive(Debug, Clone, Serialize)]
pub struct MonolithReport {
    pub monolith: Partition,
    pub subdirectly_irreducible: bool,
}

pub fn monolith(algebra: &FiniteAlgebra) -> Result<MonolithReport> {
    let n = algebra.size();
    if n < 2 {
        return Err(Error::invalid(
            "one-element algebra: not subdirectly irreducible by convention",
        ));
    }
    let mut meet = Partition::one_block(n);
    for a in 0..n {
        for b in (a + 1)..n {
            meet = meet.meet(&principal_congruence(algebra, a, b))?;
        }
    }
    let si = !meet.is_identity();
    Ok(MonolithReport {
        monolith: meet,
        subdirectly_irreducible: si,
    })
}

/// True iff `x != y`, `z != w`, and the principal congruences on the two
/// pairs intersect nontrivially.
pub fn meet_relation_m(algebra: &FiniteAlgebra, x: usize, y: usize, z: usize, w: usize) -> bool {
    if x == y || z == w {
        return false;
    }
    let cg1 = principal_congruence(algebra, x, y);
    let cg2 = principal_congruence(algebra, z, w);
    !cg1.meet(&cg2).expect("same universe").is_identity()
}

/// Finite subdirect irreducibility: any two nontrivial principal
/// congruences intersect nontrivially.
pub fn is_fsi(algebra: &FiniteAlgebra) -> bool {
    let pairs = algebra.pairs();
    for p in &pairs {
        for q in &pairs {
            if !meet_relation_m(algebra, p.lo(), p.hi(), q.lo(), q.hi()) {
                return false;
            }
        }
    }
    true
}

/// A congruence above `base` that omits `(u, v)` and is maximal with that
/// property: joining the principal congruence of any pair outside it pulls
/// `(u, v)` in. Computed by a greedy pass over pairs in lexicographic
/// order, so the result is deterministic.
pub fn max_omitting(
    algebra: &FiniteAlgebra,
    base: &Partition,
    u: usize,
    v: usize,
) -> Result<Partition> {
    if u == v {
        return Err(Error::invalid("omitted pair must be two distinct elements"));
    }
    if base.related(u, v) {
        return Err(Error::invalid(format!(
            "base already identifies the omitted pair ({u}, {v})"
        )));
    }
    if let Some(violation) = algebra.congruence_violation(base) {
        return Err(Error::NotCongruence(violation));
    }
    let n = algebra.size();
    let mut theta = base.clone();
    for a in 0..n {
        for b in (a + 1)..n {
            if theta.related(a, b) {
                continue;
            }
            let candidate = theta.join(&principal_congruence(algebra, a, b))?;
            if !candidate.related(u, v) {
                theta = candidate;
            }
        }
    }
    Ok(theta)
}

/// Which of the two input congruences labels a chain step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainSide {
    First,
    Second,
}

/// An alternating chain `s = e_0, .., e_r = t` where each consecutive pair
/// lies in the congruence named by its label and consecutive labels differ.
#[derive(Debug, Clone, Serialize)]
pub struct AlternatingChain {
    pub nodes: Vec<usize>,
    pub labels: Vec<ChainSide>,
}

/// Shortest alternating chain from `s` to `t` through `d1 ∨ d2`, with
/// deterministic tie-breaking (steps through `d1` preferred, then smaller
/// elements).
pub fn join_chain(d1: &Partition, d2: &Partition, s: usize, t: usize) -> Result<AlternatingChain> {
    let n = d1.universe_size();
    if d2.universe_size() != n {
        return Err(Error::UniverseMismatch(n, d2.universe_size()));
    }
    if s >= n || t >= n {
        return Err(Error::ElementOutOfRange {
            value: s.max(t),
            size: n,
        });
    }
    if s == t {
        return Ok(AlternatingChain {
            nodes: vec![s],
            labels: Vec::new(),
        });
    }
    let rels = [d1, d2];
    // back[label][x]: fewest steps from x to t when the step arriving at x
    // used `label` (the next step must switch congruences).
    let mut back = [vec![usize::MAX; n], vec![usize::MAX; n]];
    back[0][t] = 0;
    back[1][t] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back((t, 0usize));
    queue.push_back((t, 1usize));
    while let Some((y, arrived)) = queue.pop_front() {
        let d = back[arrived][y];
        // A step x -> y through rels[arrived] means the state before the
        // step was (x, other); from x the next step uses `arrived`.
        let other = 1 - arrived;
        for x in 0..n {
            if x != y && rels[arrived].related(x, y) && back[other][x] == usize::MAX {
                back[other][x] = d + 1;
                queue.push_back((x, other));
            }
        }
    }
    // First step has no alternation constraint.
    let mut best = usize::MAX;
    for label in 0..2 {
        for y in 0..n {
            if y != s && rels[label].related(s, y) && back[label][y] != usize::MAX {
                best = best.min(1 + back[label][y]);
            }
        }
    }
    if best == usize::MAX {
        return Err(Error::invalid(format!(
            "({s}, {t}) is not in the join of the two congruences"
        )));
    }
    let mut nodes = vec![s];
    let mut labels = Vec::new();
    let mut current = s;
    let mut prev: Option<usize> = None;
    let mut remaining = best;
    while remaining > 0 {
        let mut stepped = false;
        'search: for label in 0..2 {
            if prev == Some(label) {
                continue;
            }
            for y in 0..n {
                if y == current || !rels[label].related(current, y) {
                    continue;
                }
                let tail = if remaining == 1 {
                    // Last step must land on t exactly.
                    if y == t {
                        0
                    } else {
                        continue;
                    }
                } else {
                    back[label][y]
                };
                if tail == remaining - 1 {
                    nodes.push(y);
                    labels.push(if label == 0 {
                        ChainSide::First
                    } else {
                        ChainSide::Second
                    });
                    current = y;
                    prev = Some(label);
                    remaining -= 1;
                    stepped = true;
                    break 'search;
                }
            }
        }
        debug_assert!(stepped, "shortest-path reconstruction got stuck");
        if !stepped {
            return Err(Error::invalid("internal: chain reconstruction failed"));
        }
    }
    Ok(AlternatingChain { nodes, labels })
}

/// Stages of the joint iteration `β_{n+1} = β ∨ (α ∩ γ_n)`,
/// `γ_{n+1} = γ ∨ (α ∩ β_n)`, run in lockstep to simultaneous
/// stabilization.
#[derive(Debug, Clone, Serialize)]
pub struct BetaOmegaResult {
    pub beta_omega: Partition,
    pub gamma_omega: Partition,
    pub stabilization_index: usize,
    pub beta_stages: Vec<Partition>,
    pub gamma_stages: Vec<Partition>,
}

pub fn beta_omega(
    algebra: &FiniteAlgebra,
    alpha: &Partition,
    beta: &Partition,
    gamma: &Partition,
) -> Result<BetaOmegaResult> {
    for (name, p) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if let Some(violation) = algebra.congruence_violation(p) {
            return Err(Error::NotCongruence(format!("{name}: {violation}")));
        }
    }
    let mut beta_stages = vec![beta.clone()];
    let mut gamma_stages = vec![gamma.clone()];
    loop {
        let beta_last = beta_stages.last().unwrap();
        let gamma_last = gamma_stages.last().unwrap();
        let beta_next = beta.join(&alpha.meet(gamma_last)?)?;
        let gamma_next = gamma.join(&alpha.meet(beta_last)?)?;
        if &beta_next == beta_last && &gamma_next == gamma_last {
            let index = beta_stages.len() - 1;
            return Ok(BetaOmegaResult {
                beta_omega: beta_next,
                gamma_omega: gamma_next,
                stabilization_index: index,
                beta_stages,
                gamma_stages,
            });
        }
        beta_stages.push(beta_next);
        gamma_stages.push(gamma_next);
    }
}

/// Verdict of one alternating-composition inclusion instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CkVerdict {
    Holds,
    /// A pair in `α ∩ (β∘γ∘β∘..)` that is missing from `β_ω`.
    Witness(usize, usize),
}

/// Checks the inclusion `α ∩ (β∘γ∘β∘..) ⊆ β_ω` with `k - 1` composition
/// signs (so `k` alternating factors starting with β).
pub fn alternating_composition_check(
    algebra: &FiniteAlgebra,
    alpha: &Partition,
    beta: &Partition,
    gamma: &Partition,
    k: usize,
) -> Result<CkVerdict> {
    if k < 2 {
        return Err(Error::invalid("composition length must be at least 2"));
    }
    let n = algebra.size();
    let bw = beta_omega(algebra, alpha, beta, gamma)?;
    let rel_of = |p: &Partition| -> Vec<bool> {
        let mut m = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                m[a * n + b] = p.related(a, b);
            }
        }
        m
    };
    let compose = |r1: &[bool], r2: &[bool]| -> Vec<bool> {
        let mut out = vec![false; n * n];
        for a in 0..n {
            for mid in 0..n {
                if r1[a * n + mid] {
                    for b in 0..n {
                        if r2[mid * n + b] {
                            out[a * n + b] = true;
                        }
                    }
                }
            }
        }
        out
    };
    let rb = rel_of(beta);
    let rg = rel_of(gamma);
    let mut acc = rb.clone();
    for i in 1..k {
        acc = compose(&acc, if i % 2 == 1 { &rg } else { &rb });
    }
    for a in 0..n {
        for b in 0..n {
            if acc[a * n + b] && alpha.related(a, b) && !bw.beta_omega.related(a, b) {
                return Ok(CkVerdict::Witness(a, b));
            }
        }
    }
    Ok(CkVerdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn principal_congruences_of_fixtures() {
        let s2 = fixtures::s2();
        assert!(principal_congruence(&s2, 0, 1).is_one_block());

        let c3 = fixtures::c3();
        assert_eq!(
            principal_congruence(&c3, 1, 2),
            Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap()
        );
        assert_eq!(
            principal_congruence(&c3, 0, 1),
            Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap()
        );
    }

    #[test]
    fn generated_congruence_examples() {
        let c3 = fixtures::c3();
        assert!(generated_congruence(&c3, &[(0, 1), (1, 2)]).is_one_block());
        assert!(generated_congruence(&c3, &[]).is_identity());

        let z2sq = fixtures::z2().direct_power(2, crate::DEFAULT_SIZE_CAP).unwrap();
        let a = z2sq.encode_tuple(&[0, 0]);
        let b = z2sq.encode_tuple(&[1, 1]);
        let diag = generated_congruence(&z2sq, &[(a, b)]);
        let c = z2sq.encode_tuple(&[0, 1]);
        let d = z2sq.encode_tuple(&[1, 0]);
        assert_eq!(
            diag,
            Partition::from_blocks(4, &[vec![a, b], vec![c, d]]).unwrap()
        );
    }

    #[test]
    fn congruence_counts() {
        match all_congruences(&fixtures::s2(), 100) {
            CongruencesResult::Complete(l) => assert_eq!(l.len(), 2),
            _ => panic!("cap hit"),
        }
        match all_congruences(&fixtures::c3(), 100) {
            CongruencesResult::Complete(l) => {
                assert_eq!(l.len(), 4);
                assert!(l.contains(&Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap()));
                assert!(l.contains(&Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap()));
            }
            _ => panic!("cap hit"),
        }
        let z2sq = fixtures::z2().direct_power(2, crate::DEFAULT_SIZE_CAP).unwrap();
        match all_congruences(&z2sq, 100) {
            CongruencesResult::Complete(l) => assert_eq!(l.len(), 5),
            _ => panic!("cap hit"),
        }
    }

    #[test]
    fn sd_meet_law_verdicts() {
        let con_c3 = match all_congruences(&fixtures::c3(), 100) {
            CongruencesResult::Complete(l) => l,
            _ => panic!(),
        };
        assert!(sd_meet_law(&con_c3).holds());

        let con_s2 = match all_congruences(&fixtures::s2(), 100) {
            CongruencesResult::Complete(l) => l,
            _ => panic!(),
        };
        assert!(sd_meet_law(&con_s2).holds());

        let z2sq = fixtures::z2().direct_power(2, crate::DEFAULT_SIZE_CAP).unwrap();
        let con = match all_congruences(&z2sq, 100) {
            CongruencesResult::Complete(l) => l,
            _ => panic!(),
        };
        match sd_meet_law(&con) {
            SdMeetLawVerdict::Violation {
                alpha, beta, gamma, ..
            } => {
                // The violating triple consists of the three atoms.
                for p in [&alpha, &beta, &gamma] {
                    assert_eq!(p.block_count(), 2);
                    assert!(!p.is_one_block() && !p.is_identity());
                }
                assert_ne!(alpha, beta);
                assert_ne!(beta, gamma);
                assert_ne!(alpha, gamma);
            }
            SdMeetLawVerdict::Holds => panic!("expected a violation"),
        }
    }

    #[test]
    fn monolith_and_si() {
        let s2 = monolith(&fixtures::s2()).unwrap();
        assert!(s2.subdirectly_irreducible);
        assert!(s2.monolith.is_one_block());

        let c3 = monolith(&fixtures::c3()).unwrap();
        assert!(!c3.subdirectly_irreducible);
        assert!(c3.monolith.is_identity());

        let d3 = monolith(&fixtures::d3()).unwrap();
        assert!(d3.subdirectly_irreducible);
        assert!(d3.monolith.is_one_block());
    }

    #[test]
    fn meet_relation_and_fsi() {
        let c3 = fixtures::c3();
        assert!(!meet_relation_m(&c3, 0, 1, 1, 2));
        assert!(meet_relation_m(&fixtures::s2(), 0, 1, 0, 1));
        let d3 = fixtures::d3();
        for p in d3.pairs() {
            for q in d3.pairs() {
                assert!(meet_relation_m(&d3, p.lo(), p.hi(), q.lo(), q.hi()));
            }
        }
        assert!(is_fsi(&fixtures::s2()));
        assert!(!is_fsi(&c3));
        assert!(is_fsi(&d3));
    }

    #[test]
    fn max_omitting_examples() {
        let c3 = fixtures::c3();
        let theta = max_omitting(&c3, &Partition::identity(3), 0, 2).unwrap();
        assert_eq!(theta, Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap());

        let s2 = fixtures::s2();
        assert!(max_omitting(&s2, &Partition::identity(2), 0, 1)
            .unwrap()
            .is_identity());

        let d3 = fixtures::d3();
        for p in d3.pairs() {
            assert!(max_omitting(&d3, &Partition::identity(3), p.lo(), p.hi())
                .unwrap()
                .is_identity());
        }
    }

    #[test]
    fn max_omitting_is_maximal() {
        // For every pair outside theta, joining its principal congruence
        // captures the omitted pair.
        for (algebra, u, v) in [
            (fixtures::c3(), 0, 2),
            (fixtures::c3(), 0, 1),
            (fixtures::d3(), 1, 2),
        ] {
            let theta = max_omitting(&algebra, &Partition::identity(algebra.size()), u, v).unwrap();
            assert!(!theta.related(u, v));
            for a in 0..algebra.size() {
                for b in (a + 1)..algebra.size() {
                    if theta.related(a, b) {
                        continue;
                    }
                    let join = theta
                        .join(&principal_congruence(&algebra, a, b))
                        .unwrap();
                    assert!(join.related(u, v), "not maximal at ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn join_chain_examples() {
        let d1 = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let d2 = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        let chain = join_chain(&d1, &d2, 0, 2).unwrap();
        assert_eq!(chain.nodes, vec![0, 1, 2]);
        assert_eq!(chain.labels, vec![ChainSide::First, ChainSide::Second]);

        // Single-step chain when the pair is already in d1.
        let chain = join_chain(&d1, &d2, 0, 1).unwrap();
        assert_eq!(chain.nodes, vec![0, 1]);
        assert_eq!(chain.labels, vec![ChainSide::First]);

        // Empty chain for equal endpoints.
        let chain = join_chain(&d1, &d2, 2, 2).unwrap();
        assert_eq!(chain.nodes, vec![2]);
        assert!(chain.labels.is_empty());

        // Unreachable pairs are an error.
        let tiny = Partition::identity(3);
        assert!(join_chain(&tiny, &tiny, 0, 2).is_err());
    }

    #[test]
    fn join_chain_steps_lie_in_their_labels() {
        let d1 = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let d2 = Partition::from_blocks(4, &[vec![0], vec![1, 2], vec![3]]).unwrap();
        let chain = join_chain(&d1, &d2, 0, 3).unwrap();
        assert_eq!(*chain.nodes.first().unwrap(), 0);
        assert_eq!(*chain.nodes.last().unwrap(), 3);
        for (i, label) in chain.labels.iter().enumerate() {
            let (a, b) = (chain.nodes[i], chain.nodes[i + 1]);
            match label {
                ChainSide::First => assert!(d1.related(a, b)),
                ChainSide::Second => assert!(d2.related(a, b)),
            }
        }
        // Labels alternate.
        for w in chain.labels.windows(2) {
            assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn beta_omega_on_the_xor_cube() {
        let cube = fixtures::z2().direct_power(3, crate::DEFAULT_SIZE_CAP).unwrap();
        // Subgroup congruences generated by identifying 0 with a vector.
        let alpha = generated_congruence(&cube, &[(0, 0b101)]);
        let beta = generated_congruence(&cube, &[(0, 0b110)]);
        let gamma = generated_congruence(&cube, &[(0, 0b011)]);
        assert!(alpha.meet(&beta).unwrap().is_identity());
        assert!(alpha.meet(&gamma).unwrap().is_identity());
        let result = beta_omega(&cube, &alpha, &beta, &gamma).unwrap();
        assert_eq!(result.stabilization_index, 0);
        assert_eq!(result.beta_omega, beta);
        assert_eq!(result.gamma_omega, gamma);
    }

    #[test]
    fn beta_omega_with_trivial_gamma() {
        let c3 = fixtures::c3();
        let alpha = principal_congruence(&c3, 0, 2);
        let beta = principal_congruence(&c3, 0, 1);
        let gamma = Partition::identity(3);
        let result = beta_omega(&c3, &alpha, &beta, &gamma).unwrap();
        assert_eq!(result.beta_omega, beta);
        assert_eq!(
            result.gamma_omega,
            gamma.join(&alpha.meet(&beta).unwrap()).unwrap()
        );
    }

    #[test]
    fn beta_omega_invariants() {
        let cube = fixtures::z2().direct_power(3, crate::DEFAULT_SIZE_CAP).unwrap();
        let alpha = generated_congruence(&cube, &[(0, 0b101)]);
        let beta = generated_congruence(&cube, &[(0, 0b110)]);
        let gamma = generated_congruence(&cube, &[(0, 0b011)]);
        let r = beta_omega(&cube, &alpha, &beta, &gamma).unwrap();
        assert!(beta.leq(&r.beta_omega));
        assert!(gamma.leq(&r.gamma_omega));
        assert_eq!(
            alpha.meet(&r.beta_omega).unwrap(),
            alpha.meet(&r.gamma_omega).unwrap()
        );
    }

    #[test]
    fn least_pair_property_on_small_lattices() {
        // No congruence pair strictly below (beta_omega, gamma_omega)
        // satisfies the defining fixpoint equations.
        let c3 = fixtures::c3();
        let lattice = match all_congruences(&c3, 100) {
            CongruencesResult::Complete(l) => l,
            _ => panic!(),
        };
        let alpha = principal_congruence(&c3, 0, 2);
        let beta = principal_congruence(&c3, 0, 1);
        let gamma = principal_congruence(&c3, 1, 2);
        let r = beta_omega(&c3, &alpha, &beta, &gamma).unwrap();
        for delta in lattice.congruences() {
            for eps in lattice.congruences() {
                if !beta.leq(delta) || !gamma.leq(eps) {
                    continue;
                }
                let fix1 = *delta == beta.join(&alpha.meet(eps).unwrap()).unwrap();
                let fix2 = *eps == gamma.join(&alpha.meet(delta).unwrap()).unwrap();
                if fix1 && fix2 {
                    let below = delta.leq(&r.beta_omega) && eps.leq(&r.gamma_omega);
                    let strictly = *delta != r.beta_omega || *eps != r.gamma_omega;
                    assert!(!(below && strictly), "found a smaller fixpoint pair");
                }
            }
        }
    }

    #[test]
    fn alternating_composition_witness_on_the_cube() {
        let cube = fixtures::z2().direct_power(3, crate::DEFAULT_SIZE_CAP).unwrap();
        let alpha = generated_congruence(&cube, &[(0, 0b101)]);
        let beta = generated_congruence(&cube, &[(0, 0b110)]);
        let gamma = generated_congruence(&cube, &[(0, 0b011)]);
        match alternating_composition_check(&cube, &alpha, &beta, &gamma, 2).unwrap() {
            CkVerdict::Witness(a, b) => {
                // The witness is alpha-related, in beta then gamma steps,
                // and outside beta_omega = beta.
                assert!(alpha.related(a, b));
                assert!(!beta.related(a, b));
                let mid = (0..8).find(|&m| beta.related(a, m) && gamma.related(m, b));
                assert!(mid.is_some());
            }
            CkVerdict::Holds => panic!("expected a witness"),
        }
        // The generators x=(1,0,0), z=(0,0,1) themselves witness failure.
        let (x, z) = (0b100, 0b001);
        assert!(alpha.related(x, z));
        assert!((0..8).any(|m| beta.related(x, m) && gamma.related(m, z)));
        let bw = beta_omega(&cube, &alpha, &beta, &gamma).unwrap();
        assert!(!bw.beta_omega.related(x, z));
    }

    #[test]
    fn alternating_composition_with_equal_sides_always_holds() {
        let c3 = fixtures::c3();
        let alpha = principal_congruence(&c3, 0, 2);
        let beta = principal_congruence(&c3, 0, 1);
        assert_eq!(
            alternating_composition_check(&c3, &alpha, &beta, &beta, 2).unwrap(),
            CkVerdict::Holds
        );
    }
}
