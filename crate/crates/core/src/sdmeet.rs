//! Deciding congruence meet-semidistributivity of `HSP(A)` with
//! machine-checkable certificates.
//!
//! A positive answer is certified by a coloured ordered tree together with
//! a family of ternary term pairs whose induced identities all hold in `A`;
//! a negative answer is certified by a triple of congruences of the free
//! algebra on three generators that violates the meet-semidistributive law,
//! witnessed by the generator pair `(x, z)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    parse_term_tokens, tokenize_term, FiniteAlgebra, Identity, IdentityVerdict, Term,
};
use crate::congruence::{beta_omega, join_chain, principal_congruence, ChainSide};
use crate::free::{build_free, FreeAlgebra, FreeBuild};
use crate::partition::Partition;
use crate::{Error, Result, TABLE_ENTRY_CAP};

/// Node colour of the certificate tree. `B` tracks the first congruence of
/// the alternating iteration, `G` the second; children always carry the
/// colour opposite to their parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Colour {
    #[serde(rename = "b")]
    B,
    #[serde(rename = "g")]
    G,
}

impl Colour {
    pub fn opposite(self) -> Colour {
        match self {
            Colour::B => Colour::G,
            Colour::G => Colour::B,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Colour::B => 'b',
            Colour::G => 'g',
        }
    }

    pub fn from_letter(c: &str) -> Result<Colour> {
        match c {
            "b" => Ok(Colour::B),
            "g" => Ok(Colour::G),
            other => Err(Error::invalid(format!("bad colour '{other}'"))),
        }
    }
}

/// A finite rooted ordered tree with alternating two-colouring. Node 0 is
/// the root; every other node's parent precedes it, so sibling order is the
/// id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct ColouredTree {
    parent: Vec<Option<usize>>,
    colour: Vec<Colour>,
}

#[derive(Serialize, Deserialize, Clone)]
struct TreeRepr {
    parent: Vec<Option<usize>>,
    colour: Vec<Colour>,
}

impl From<ColouredTree> for TreeRepr {
    fn from(t: ColouredTree) -> TreeRepr {
        TreeRepr {
            parent: t.parent,
            colour: t.colour,
        }
    }
}

impl TryFrom<TreeRepr> for ColouredTree {
    type Error = Error;
    fn try_from(r: TreeRepr) -> Result<ColouredTree> {
        ColouredTree::new(r.parent, r.colour)
    }
}

impl ColouredTree {
    pub fn new(parent: Vec<Option<usize>>, colour: Vec<Colour>) -> Result<ColouredTree> {
        if parent.is_empty() {
            return Err(Error::invalid("tree must have at least the root"));
        }
        if parent[0].is_some() {
            return Err(Error::invalid("node 0 must be the root"));
        }
        for (i, p) in parent.iter().enumerate().skip(1) {
            match p {
                None => return Err(Error::invalid(format!("node {i} is a second root"))),
                Some(p) if *p >= i => {
                    return Err(Error::invalid(format!(
                        "node {i} must come after its parent {p}"
                    )))
                }
                Some(_) => {}
            }
        }
        if colour.len() != parent.len() {
            return Err(Error::invalid("one colour per node required"));
        }
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                if colour[i] != colour[*p].opposite() {
                    return Err(Error::invalid(format!(
                        "node {i} must have the colour opposite to its parent"
                    )));
                }
            }
        }
        Ok(ColouredTree { parent, colour })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn colour(&self, node: usize) -> Colour {
        self.colour[node]
    }

    /// Ordered children (sibling order is id order).
    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.parent[i] == Some(node))
            .collect()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children(node).is_empty()
    }
}

/// One ternary term pair per tree node; index 0 belongs to the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermPairFamily {
    pairs: Vec<(Term, Term)>,
}

impl TermPairFamily {
    pub fn new(pairs: Vec<(Term, Term)>) -> TermPairFamily {
        TermPairFamily { pairs }
    }

    pub fn pairs(&self) -> &[(Term, Term)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks that every term is ternary (variables among x0, x1, x2) and
    /// well-formed over the signature.
    pub fn validate(&self, algebra: &FiniteAlgebra) -> Result<()> {
        for (s, t) in &self.pairs {
            for term in [s, t] {
                term.validate(algebra.signature())?;
                if let Some(v) = term.max_var() {
                    if v >= 3 {
                        return Err(Error::invalid(format!(
                            "family terms must be ternary, found {term}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the term family `(s(x0,x1,x2), t(x0,x1,x2))` from pairs of
/// fundamental ternary symbols.
pub fn family_from_symbol_pairs(
    algebra: &FiniteAlgebra,
    pairs: &[(String, String)],
) -> Result<Vec<(Term, Term)>> {
    let vars = vec![Term::Var(0), Term::Var(1), Term::Var(2)];
    let mut out = Vec::with_capacity(pairs.len());
    for (s, t) in pairs {
        for name in [s, t] {
            let idx = algebra
                .signature()
                .index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            if algebra.signature().arity(idx) != 3 {
                return Err(Error::ArityMismatch {
                    symbol: name.clone(),
                    arity: algebra.signature().arity(idx),
                    given: 3,
                });
            }
        }
        out.push((
            Term::App(s.clone(), vars.clone()),
            Term::App(t.clone(), vars.clone()),
        ));
    }
    Ok(out)
}

/// One identity induced by the tree shape, with a short label describing
/// which rule produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelledIdentity {
    pub label: String,
    pub identity: Identity,
}

/// Materializes every identity required by the tree and colouring:
/// root terms are the outer projections; every pair agrees on `(x, y, x)`;
/// first/last children and consecutive siblings agree on the one-sided
/// substitutions; leaves have the one-sided agreement of their colour.
pub fn tree_identities(tree: &ColouredTree, family: &TermPairFamily) -> Result<Vec<LabelledIdentity>> {
    if tree.len() != family.len() {
        return Err(Error::invalid(format!(
            "tree has {} nodes but the family has {} pairs",
            tree.len(),
            family.len()
        )));
    }
    let pairs = family.pairs();
    let mut out = Vec::new();
    let mut push = |label: String, left: Term, right: Term, vc: usize| -> Result<()> {
        out.push(LabelledIdentity {
            label,
            identity: Identity::new(left, right, vc)?,
        });
        Ok(())
    };
    // xyx: identify the last variable with the first; xxy / xyy: one-sided
    // substitutions into two variables.
    let xyx = [0usize, 1, 0];
    let xxy = [0usize, 0, 1];
    let xyy = [0usize, 1, 1];

    let (s0, t0) = &pairs[0];
    push("root-s".into(), s0.clone(), Term::Var(0), 3)?;
    push("root-t".into(), t0.clone(), Term::Var(2), 3)?;

    for p in 0..tree.len() {
        let (sp, tp) = &pairs[p];
        push(
            format!("agree-xyx({p})"),
            sp.rename_vars(&xyx),
            tp.rename_vars(&xyx),
            2,
        )?;
    }

    for p in 0..tree.len() {
        let children = tree.children(p);
        let (sp, tp) = &pairs[p];
        let side = match tree.colour(p) {
            Colour::B => &xxy,
            Colour::G => &xyy,
        };
        let tag = tree.colour(p).letter();
        if let (Some(&first), Some(&last)) = (children.first(), children.last()) {
            push(
                format!("first-child-{tag}({p},{first})"),
                sp.rename_vars(side),
                pairs[first].0.rename_vars(side),
                2,
            )?;
            push(
                format!("last-child-{tag}({p},{last})"),
                tp.rename_vars(side),
                pairs[last].1.rename_vars(side),
                2,
            )?;
            for w in children.windows(2) {
                let (p1, q1) = (w[0], w[1]);
                push(
                    format!("siblings-{tag}({p1},{q1})"),
                    pairs[p1].1.rename_vars(side),
                    pairs[q1].0.rename_vars(side),
                    2,
                )?;
            }
        } else {
            push(
                format!("leaf-{tag}({p})"),
                sp.rename_vars(side),
                tp.rename_vars(side),
                2,
            )?;
        }
    }
    Ok(out)
}

/// Verdict of checking the tree identities in a concrete algebra.
#[derive(Debug, Clone, Serialize)]
pub enum TreeIdentitiesVerdict {
    Holds { checked: Vec<LabelledIdentity> },
    Fails {
        failing: LabelledIdentity,
        assignment: Vec<usize>,
    },
}

impl TreeIdentitiesVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, TreeIdentitiesVerdict::Holds { .. })
    }
}

/// Checks every identity induced by the tree and family in `algebra`.
pub fn verify_tree_identities(
    algebra: &FiniteAlgebra,
    tree: &ColouredTree,
    family: &TermPairFamily,
) -> Result<TreeIdentitiesVerdict> {
    family.validate(algebra)?;
    let identities = tree_identities(tree, family)?;
    for li in &identities {
        if let IdentityVerdict::Counterexample(assignment) = algebra.check_identity(&li.identity)? {
            return Ok(TreeIdentitiesVerdict::Fails {
                failing: li.clone(),
                assignment,
            });
        }
    }
    Ok(TreeIdentitiesVerdict::Holds {
        checked: identities,
    })
}

/// Verdict of the separating-family check: the identities `s(x,y,x) =
/// t(x,y,x)` must hold, and the conjunction of per-pair biconditionals must
/// define equality.
#[derive(Debug, Clone, Serialize)]
pub enum SeparationVerdict {
    Holds,
    IdentityFails {
        pair_index: usize,
        identity: Identity,
        assignment: Vec<usize>,
    },
    /// Distinct elements that the biconditional conjunction fails to
    /// separate.
    Witness { a: usize, b: usize },
}

impl SeparationVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SeparationVerdict::Holds)
    }
}

/// Checks, on `algebra` itself, that the family separates equality:
/// `x = y` iff every pair satisfies `s(x,x,y) = t(x,x,y) <-> s(x,y,y) =
/// t(x,y,y)`. A yes certifies the sentence for this algebra only.
pub fn check_separating_family(
    algebra: &FiniteAlgebra,
    family: &[(Term, Term)],
) -> Result<SeparationVerdict> {
    let xyx = [0usize, 1, 0];
    for (i, (s, t)) in family.iter().enumerate() {
        for term in [s, t] {
            term.validate(algebra.signature())?;
            if term.max_var().unwrap_or(0) >= 3 {
                return Err(Error::invalid(format!("family terms must be ternary: {term}")));
            }
        }
        let identity = Identity::new(s.rename_vars(&xyx), t.rename_vars(&xyx), 2)?;
        if let IdentityVerdict::Counterexample(assignment) = algebra.check_identity(&identity)? {
            return Ok(SeparationVerdict::IdentityFails {
                pair_index: i,
                identity,
                assignment,
            });
        }
    }
    for a in algebra.universe() {
        for b in algebra.universe() {
            if a == b {
                continue;
            }
            let mut conjunction = true;
            for (s, t) in family {
                let sxxy = algebra.eval(s, &[a, a, b])?;
                let txxy = algebra.eval(t, &[a, a, b])?;
                let sxyy = algebra.eval(s, &[a, b, b])?;
                let txyy = algebra.eval(t, &[a, b, b])?;
                if (sxxy == txxy) != (sxyy == txyy) {
                    conjunction = false;
                    break;
                }
            }
            if conjunction {
                return Ok(SeparationVerdict::Witness { a, b });
            }
        }
    }
    Ok(SeparationVerdict::Holds)
}

/// Expands an algebra with fundamental ternary symbols realizing the family
/// terms. A leading root pair `(x0, x2)` stays realized by the projections;
/// terms that already are a fundamental symbol applied to `(x0, x1, x2)`
/// are reused. Returns the expanded algebra together with the family as
/// symbol-name pairs (root excluded).
pub fn expand_algebra(
    algebra: &FiniteAlgebra,
    family: &[(Term, Term)],
) -> Result<(FiniteAlgebra, Vec<(String, String)>)> {
    for (s, t) in family {
        for term in [s, t] {
            term.validate(algebra.signature())?;
            if term.max_var().unwrap_or(0) >= 3 {
                return Err(Error::invalid(format!("family terms must be ternary: {term}")));
            }
        }
    }
    let n = algebra.size();
    let mut symbols = algebra.signature().symbols().to_vec();
    let mut tables: Vec<Vec<usize>> = (0..algebra.signature().len())
        .map(|op| algebra.table(op).to_vec())
        .collect();
    let mut symbol_pairs = Vec::new();

    let fundamental_form = |term: &Term| -> Option<String> {
        if let Term::App(name, args) = term {
            if args.len() == 3
                && *args == vec![Term::Var(0), Term::Var(1), Term::Var(2)]
                && algebra
                    .signature()
                    .index_of(name)
                    .is_some_and(|i| algebra.signature().arity(i) == 3)
            {
                return Some(name.clone());
            }
        }
        None
    };

    for (idx, (s, t)) in family.iter().enumerate() {
        if idx == 0 && *s == Term::Var(0) && *t == Term::Var(2) {
            continue;
        }
        let mut names = Vec::with_capacity(2);
        for (term, prefix) in [(s, "s"), (t, "t")] {
            if let Some(existing) = fundamental_form(term) {
                names.push(existing);
                continue;
            }
            let base = format!("{prefix}{idx}");
            let mut name = base.clone();
            let mut suffix = 2usize;
            while symbols.iter().any(|(n2, _)| *n2 == name) {
                name = format!("{base}_{suffix}");
                suffix += 1;
            }
            let mut table = Vec::with_capacity(n * n * n);
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        table.push(algebra.eval(term, &[x, y, z])?);
                    }
                }
            }
            symbols.push((name.clone(), 3));
            tables.push(table);
            names.push(name);
        }
        symbol_pairs.push((names[0].clone(), names[1].clone()));
    }
    let expanded = FiniteAlgebra::new(
        format!("{}x", algebra.name()),
        n,
        crate::algebra::Signature::new(symbols)?,
        tables,
    )?;
    Ok((expanded, symbol_pairs))
}

/// The decision certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SdMeetCertificate {
    /// The variety is congruence meet-semidistributive: the tree identities
    /// all hold in the generating algebra.
    Yes {
        tree: ColouredTree,
        family: TermPairFamily,
    },
    /// It is not: the triple violates the meet-semidistributive law in the
    /// congruence lattice of the free algebra on three generators, at the
    /// witness pair (the first and third generators).
    No {
        free_size: usize,
        witness: (usize, usize),
        alpha: Partition,
        beta_omega: Partition,
        gamma_omega: Partition,
    },
    /// The free algebra on three generators exceeded the resource caps.
    ResourceExceeded { reason: String },
}

impl SdMeetCertificate {
    pub fn is_yes(&self) -> bool {
        matches!(self, SdMeetCertificate::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, SdMeetCertificate::No { .. })
    }
}

/// Decides whether `HSP(algebra)` is congruence meet-semidistributive.
///
/// Builds the free algebra `F` on three generators, computes the principal
/// congruences `alpha = Cg(x, z)`, `beta = Cg(x, y)`, `gamma = Cg(y, z)`,
/// and runs the alternating iteration. If `(x, z)` lands in the limit of
/// the beta side, a tree/term certificate is extracted from the join chains
/// and re-verified in `algebra`; otherwise the three congruences themselves
/// certify the failure.
pub fn decide_sd_meet(algebra: &FiniteAlgebra, cap: usize) -> Result<SdMeetCertificate> {
    let free = match build_free(algebra, 3, cap)? {
        FreeBuild::Built(f) => f,
        FreeBuild::CapExceeded {
            elements_found,
            detail,
        } => {
            return Ok(SdMeetCertificate::ResourceExceeded {
                reason: format!("{detail} (found {elements_found})"),
            })
        }
    };
    let falg = match free.to_algebra(TABLE_ENTRY_CAP) {
        Ok(f) => f,
        Err(e) if e.is_cap() => {
            return Ok(SdMeetCertificate::ResourceExceeded {
                reason: e.to_string(),
            })
        }
        Err(e) => return Err(e),
    };
    let x = free.generator_indices()[0];
    let y = free.generator_indices()[1];
    let z = free.generator_indices()[2];
    let alpha = principal_congruence(&falg, x, z);
    let beta = principal_congruence(&falg, x, y);
    let gamma = principal_congruence(&falg, y, z);
    let iteration = beta_omega(&falg, &alpha, &beta, &gamma)?;

    if !iteration.beta_omega.related(x, z) {
        return Ok(SdMeetCertificate::No {
            free_size: falg.size(),
            witness: (x, z),
            alpha,
            beta_omega: iteration.beta_omega,
            gamma_omega: iteration.gamma_omega,
        });
    }

    let mut extractor = Extractor {
        free: &free,
        alpha: &alpha,
        beta: &beta,
        gamma: &gamma,
        beta_stages: &iteration.beta_stages,
        gamma_stages: &iteration.gamma_stages,
        parent: Vec::new(),
        colour: Vec::new(),
        pairs: Vec::new(),
    };
    extractor.visit(Colour::B, x, z, None)?;
    let mut pairs = extractor.pairs;
    // The root pair is the generator pair (x, z): name it by the outer
    // projections even when generators collapse.
    pairs[0] = (Term::Var(0), Term::Var(2));
    let tree = ColouredTree::new(extractor.parent, extractor.colour)?;
    let family = TermPairFamily::new(pairs);

    match verify_tree_identities(algebra, &tree, &family)? {
        TreeIdentitiesVerdict::Holds { .. } => Ok(SdMeetCertificate::Yes { tree, family }),
        TreeIdentitiesVerdict::Fails { failing, .. } => Err(Error::invalid(format!(
            "internal: extracted certificate failed verification at {} ({})",
            failing.label, failing.identity
        ))),
    }
}

struct Extractor<'a> {
    free: &'a FreeAlgebra,
    alpha: &'a Partition,
    beta: &'a Partition,
    gamma: &'a Partition,
    beta_stages: &'a [Partition],
    gamma_stages: &'a [Partition],
    parent: Vec<Option<usize>>,
    colour: Vec<Colour>,
    pairs: Vec<(Term, Term)>,
}

impl Extractor<'_> {
    /// Builds the subtree for a pair lying in the `colour`-side limit,
    /// decomposing through the join chain of the defining stage. Nodes are
    /// allocated in preorder, so sibling order is id order.
    fn visit(&mut self, colour: Colour, s: usize, t: usize, parent: Option<usize>) -> Result<usize> {
        let id = self.parent.len();
        self.parent.push(parent);
        self.colour.push(colour);
        self.pairs.push((
            self.free.representative(s),
            self.free.representative(t),
        ));

        let stages = match colour {
            Colour::B => self.beta_stages,
            Colour::G => self.gamma_stages,
        };
        let stage = stages
            .iter()
            .position(|p| p.related(s, t))
            .ok_or_else(|| Error::invalid("internal: pair not in the iterated limit"))?;
        if stage == 0 {
            return Ok(id);
        }
        let base = match colour {
            Colour::B => self.beta,
            Colour::G => self.gamma,
        };
        let other_stage = match colour {
            Colour::B => &self.gamma_stages[stage - 1],
            Colour::G => &self.beta_stages[stage - 1],
        };
        let delta = self.alpha.meet(other_stage)?;
        let chain = join_chain(base, &delta, s, t)?;
        for (i, label) in chain.labels.iter().enumerate() {
            if *label == ChainSide::Second {
                self.visit(colour.opposite(), chain.nodes[i], chain.nodes[i + 1], Some(id))?;
            }
        }
        Ok(id)
    }
}

/// Re-checks a certificate against the algebra it was issued for.
///
/// Yes-certificates replay all tree identities. No-certificates rebuild the
/// free algebra on three generators and check by direct partition
/// arithmetic that the triple genuinely violates the meet-semidistributive
/// law at the witness pair.
pub fn verify_certificate(
    algebra: &FiniteAlgebra,
    certificate: &SdMeetCertificate,
    cap: usize,
) -> Result<bool> {
    match certificate {
        SdMeetCertificate::Yes { tree, family } => {
            Ok(verify_tree_identities(algebra, tree, family)?.holds())
        }
        SdMeetCertificate::No {
            free_size,
            witness,
            alpha,
            beta_omega,
            gamma_omega,
        } => {
            let free = build_free(algebra, 3, cap)?.built()?;
            if free.size() != *free_size {
                return Ok(false);
            }
            let falg = free.to_algebra(TABLE_ENTRY_CAP)?;
            let (x, z) = *witness;
            if x >= falg.size() || z >= falg.size() {
                return Ok(false);
            }
            for p in [alpha, beta_omega, gamma_omega] {
                if algebra_violation(&falg, p) {
                    return Ok(false);
                }
            }
            let meet_b = alpha.meet(beta_omega)?;
            let meet_g = alpha.meet(gamma_omega)?;
            let join = beta_omega.join(gamma_omega)?;
            Ok(meet_b == meet_g
                && alpha.related(x, z)
                && join.related(x, z)
                && !beta_omega.related(x, z))
        }
        SdMeetCertificate::ResourceExceeded { .. } => Ok(true),
    }
}

fn algebra_violation(algebra: &FiniteAlgebra, p: &Partition) -> bool {
    algebra.congruence_violation(p).is_some()
}

/// Text form of a certificate: a verdict header, then one line per tree
/// node (children order is line order) or the three partitions in block
/// syntax.
pub fn certificate_to_text(cert: &SdMeetCertificate) -> String {
    match cert {
        SdMeetCertificate::Yes { tree, family } => {
            let mut out = String::from("verdict yes\n");
            for i in 0..tree.len() {
                let parent = match tree.parent(i) {
                    Some(p) => p.to_string(),
                    None => "-".to_string(),
                };
                let (s, t) = &family.pairs()[i];
                out.push_str(&format!(
                    "node {} parent {} colour {} s {} t {}\n",
                    i,
                    parent,
                    tree.colour(i).letter(),
                    s,
                    t
                ));
            }
            out
        }
        SdMeetCertificate::No {
            free_size,
            witness,
            alpha,
            beta_omega,
            gamma_omega,
        } => {
            format!(
                "verdict no\nfree-size {}\nwitness {} {}\nalpha {}\nbeta_omega {}\ngamma_omega {}\n",
                free_size,
                witness.0,
                witness.1,
                alpha.block_notation(),
                beta_omega.block_notation(),
                gamma_omega.block_notation()
            )
        }
        SdMeetCertificate::ResourceExceeded { reason } => {
            format!("verdict resource-exceeded\nreason {reason}\n")
        }
    }
}

/// Parses the text form produced by [`certificate_to_text`].
pub fn certificate_from_text(text: &str) -> Result<SdMeetCertificate> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("empty certificate"))?;
    let verdict = header
        .strip_prefix("verdict ")
        .ok_or_else(|| Error::invalid("certificate must start with a verdict line"))?
        .trim();
    match verdict {
        "yes" => {
            let mut parent = Vec::new();
            let mut colour = Vec::new();
            let mut pairs = Vec::new();
            for (i, line) in lines.enumerate() {
                let tokens = tokenize_term(line);
                let mut pos = 0usize;
                let word = |tokens: &[String], pos: &mut usize, what: &str| -> Result<String> {
                    let t = tokens
                        .get(*pos)
                        .ok_or_else(|| Error::invalid(format!("node line missing {what}")))?;
                    *pos += 1;
                    Ok(t.clone())
                };
                let expect = |tokens: &[String], pos: &mut usize, want: &str| -> Result<()> {
                    let got = word(tokens, pos, want)?;
                    if got != want {
                        return Err(Error::invalid(format!("expected '{want}', found '{got}'")));
                    }
                    Ok(())
                };
                expect(&tokens, &mut pos, "node")?;
                let id: usize = word(&tokens, &mut pos, "node id")?
                    .parse()
                    .map_err(|_| Error::invalid("bad node id"))?;
                if id != i {
                    return Err(Error::invalid(format!(
                        "node lines must be in id order: expected {i}, found {id}"
                    )));
                }
                expect(&tokens, &mut pos, "parent")?;
                let ptok = word(&tokens, &mut pos, "parent id")?;
                parent.push(if ptok == "-" {
                    None
                } else {
                    Some(
                        ptok.parse::<usize>()
                            .map_err(|_| Error::invalid("bad parent id"))?,
                    )
                });
                expect(&tokens, &mut pos, "colour")?;
                colour.push(Colour::from_letter(&word(&tokens, &mut pos, "colour")?)?);
                expect(&tokens, &mut pos, "s")?;
                let s = parse_term_tokens(&tokens, &mut pos)?;
                expect(&tokens, &mut pos, "t")?;
                let t = parse_term_tokens(&tokens, &mut pos)?;
                if pos != tokens.len() {
                    return Err(Error::invalid("trailing tokens on node line"));
                }
                pairs.push((s, t));
            }
            let tree = ColouredTree::new(parent, colour)?;
            Ok(SdMeetCertificate::Yes {
                tree,
                family: TermPairFamily::new(pairs),
            })
        }
        "no" => {
            let mut free_size = None;
            let mut witness = None;
            let mut alpha = None;
            let mut beta_omega = None;
            let mut gamma_omega = None;
            for line in lines {
                let mut parts = line.splitn(2, ' ');
                let key = parts.next().unwrap_or_default();
                let value = parts.next().unwrap_or_default().trim();
                match key {
                    "free-size" => {
                        free_size =
                            Some(value.parse::<usize>().map_err(|_| {
                                Error::invalid("bad free-size")
                            })?)
                    }
                    "witness" => {
                        let nums: Vec<&str> = value.split_whitespace().collect();
                        if nums.len() != 2 {
                            return Err(Error::invalid("witness line needs two elements"));
                        }
                        witness = Some((
                            nums[0].parse().map_err(|_| Error::invalid("bad witness"))?,
                            nums[1].parse().map_err(|_| Error::invalid("bad witness"))?,
                        ));
                    }
                    "alpha" => alpha = Some(Partition::parse_blocks(value)?),
                    "beta_omega" => beta_omega = Some(Partition::parse_blocks(value)?),
                    "gamma_omega" => gamma_omega = Some(Partition::parse_blocks(value)?),
                    other => {
                        return Err(Error::invalid(format!("unknown certificate line '{other}'")))
                    }
                }
            }
            Ok(SdMeetCertificate::No {
                free_size: free_size.ok_or_else(|| Error::invalid("missing free-size"))?,
                witness: witness.ok_or_else(|| Error::invalid("missing witness"))?,
                alpha: alpha.ok_or_else(|| Error::invalid("missing alpha"))?,
                beta_omega: beta_omega.ok_or_else(|| Error::invalid("missing beta_omega"))?,
                gamma_omega: gamma_omega.ok_or_else(|| Error::invalid("missing gamma_omega"))?,
            })
        }
        "resource-exceeded" => {
            let reason = lines
                .next()
                .and_then(|l| l.strip_prefix("reason "))
                .unwrap_or("")
                .to_string();
            Ok(SdMeetCertificate::ResourceExceeded { reason })
        }
        other => Err(Error::invalid(format!("unknown verdict '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::DEFAULT_FREE_CAP;

    #[test]
    fn paper_family_passes_on_s2() {
        let s2 = fixtures::s2();
        let tree = fixtures::semilattice_tree();
        let family = fixtures::semilattice_family();
        let verdict = verify_tree_identities(&s2, &tree, &family).unwrap();
        match &verdict {
            TreeIdentitiesVerdict::Holds { checked } => {
                // 2 root identities + 4 xyx identities + structural ones.
                assert!(checked.len() >= 10);
            }
            TreeIdentitiesVerdict::Fails { failing, .. } => {
                panic!("failed at {}: {}", failing.label, failing.identity)
            }
        }
    }

    #[test]
    fn damaged_family_fails_with_assignment() {
        let s2 = fixtures::s2();
        let tree = fixtures::semilattice_tree();
        let mut pairs = fixtures::semilattice_family().pairs().to_vec();
        // Replace t2 (the third projection) by x.
        pairs[2].1 = Term::Var(0);
        let family = TermPairFamily::new(pairs);
        match verify_tree_identities(&s2, &tree, &family).unwrap() {
            TreeIdentitiesVerdict::Fails { failing, assignment } => {
                assert_eq!(assignment, vec![0, 1]);
                assert!(failing.label.contains("last-child-b"));
            }
            TreeIdentitiesVerdict::Holds { .. } => panic!("expected failure"),
        }
    }

    #[test]
    fn one_node_projection_tree_fails_off_trivial_algebras() {
        let tree = ColouredTree::new(vec![None], vec![Colour::B]).unwrap();
        let family = TermPairFamily::new(vec![(Term::Var(0), Term::Var(2))]);
        let s2 = fixtures::s2();
        match verify_tree_identities(&s2, &tree, &family).unwrap() {
            TreeIdentitiesVerdict::Fails { failing, .. } => {
                assert!(failing.label.contains("leaf-b"));
            }
            _ => panic!("expected failure"),
        }
        let trivial =
            FiniteAlgebra::from_functions("T1", 1, vec![("f".into(), 2)], |_, _| 0).unwrap();
        assert!(verify_tree_identities(&trivial, &tree, &family)
            .unwrap()
            .holds());
    }

    #[test]
    fn tree_constructor_validates() {
        assert!(ColouredTree::new(vec![None, Some(0)], vec![Colour::B, Colour::B]).is_err());
        assert!(ColouredTree::new(vec![Some(0)], vec![Colour::B]).is_err());
        assert!(ColouredTree::new(vec![None, None], vec![Colour::B, Colour::G]).is_err());
        let t = fixtures::semilattice_tree();
        assert_eq!(t.children(0), vec![1, 2]);
        assert_eq!(t.children(2), vec![3]);
        assert!(t.is_leaf(1) && t.is_leaf(3));
    }

    #[test]
    fn decide_yes_on_s2_with_verified_extraction() {
        let s2 = fixtures::s2();
        let cert = decide_sd_meet(&s2, DEFAULT_FREE_CAP).unwrap();
        match &cert {
            SdMeetCertificate::Yes { tree, family } => {
                assert!(verify_tree_identities(&s2, tree, family).unwrap().holds());
                assert!(check_separating_family(&s2, family.pairs())
                    .unwrap()
                    .holds());
                assert_eq!(family.pairs()[0], (Term::Var(0), Term::Var(2)));
            }
            other => panic!("expected yes, got {other:?}"),
        }
        assert!(verify_certificate(&s2, &cert, DEFAULT_FREE_CAP).unwrap());
    }

    #[test]
    fn decide_is_deterministic() {
        let s2 = fixtures::s2();
        let a = decide_sd_meet(&s2, DEFAULT_FREE_CAP).unwrap();
        let b = decide_sd_meet(&s2, DEFAULT_FREE_CAP).unwrap();
        assert_eq!(certificate_to_text(&a), certificate_to_text(&b));
    }

    #[test]
    fn decide_no_on_z2_with_verified_triple() {
        let z2 = fixtures::z2();
        let cert = decide_sd_meet(&z2, DEFAULT_FREE_CAP).unwrap();
        match &cert {
            SdMeetCertificate::No {
                free_size,
                witness,
                alpha,
                beta_omega,
                gamma_omega,
            } => {
                assert_eq!(*free_size, 8);
                let (x, z) = *witness;
                assert!(alpha.related(x, z));
                assert_eq!(
                    alpha.meet(beta_omega).unwrap(),
                    alpha.meet(gamma_omega).unwrap()
                );
                assert!(alpha.meet(beta_omega).unwrap().is_identity());
                assert!(beta_omega.join(gamma_omega).unwrap().related(x, z));
                assert!(!beta_omega.related(x, z));
            }
            other => panic!("expected no, got {other:?}"),
        }
        assert!(verify_certificate(&z2, &cert, DEFAULT_FREE_CAP).unwrap());
    }

    #[test]
    fn decide_yes_on_trivial_algebra() {
        let trivial =
            FiniteAlgebra::from_functions("T1", 1, vec![("f".into(), 2)], |_, _| 0).unwrap();
        let cert = decide_sd_meet(&trivial, DEFAULT_FREE_CAP).unwrap();
        match &cert {
            SdMeetCertificate::Yes { tree, family } => {
                assert_eq!(tree.len(), 1);
                assert_eq!(family.pairs()[0], (Term::Var(0), Term::Var(2)));
            }
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn decide_yes_on_c3() {
        let c3 = fixtures::c3();
        let cert = decide_sd_meet(&c3, DEFAULT_FREE_CAP).unwrap();
        assert!(cert.is_yes());
    }

    #[test]
    fn separating_family_fixture_verdicts() {
        let d3x = fixtures::d3x();
        let fam = family_from_symbol_pairs(&d3x, &fixtures::d3x_symbol_pairs()).unwrap();
        assert!(check_separating_family(&d3x, &fam).unwrap().holds());

        let s2 = fixtures::s2();
        assert!(
            check_separating_family(&s2, fixtures::semilattice_family().pairs())
                .unwrap()
                .holds()
        );

        let z2 = fixtures::z2();
        let bad = vec![(
            Term::app("p", vec![Term::Var(0), Term::Var(1)]),
            Term::Var(2),
        )];
        match check_separating_family(&z2, &bad).unwrap() {
            SeparationVerdict::IdentityFails { assignment, .. } => {
                assert_eq!(assignment, vec![0, 1]);
            }
            other => panic!("expected identity failure, got {other:?}"),
        }
    }

    #[test]
    fn expansion_builds_the_fixture_tables() {
        let s2 = fixtures::s2();
        let (s2x, pairs) = expand_algebra(&s2, fixtures::semilattice_family().pairs()).unwrap();
        let expected = fixtures::s2x();
        assert_eq!(s2x.signature().arities(), expected.signature().arities());
        for op in 0..s2x.signature().len() {
            assert_eq!(s2x.table(op), expected.table(op));
        }
        assert_eq!(
            pairs,
            vec![
                ("s1".to_string(), "t1".to_string()),
                ("s2".to_string(), "t2".to_string()),
                ("s3".to_string(), "t3".to_string())
            ]
        );

        // d3 + (d, third projection): d is reused, the projection is added.
        let d3 = fixtures::d3();
        let fam = vec![(
            Term::app("d", vec![Term::Var(0), Term::Var(1), Term::Var(2)]),
            Term::Var(2),
        )];
        let (d3x, pairs) = expand_algebra(&d3, &fam).unwrap();
        let expected = fixtures::d3x();
        assert_eq!(d3x.signature().arities(), expected.signature().arities());
        for op in 0..d3x.signature().len() {
            assert_eq!(d3x.table(op), expected.table(op));
        }
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, "d");

        // Empty family: unchanged.
        let (same, pairs) = expand_algebra(&s2, &[]).unwrap();
        assert_eq!(same.signature().len(), s2.signature().len());
        assert!(pairs.is_empty());
    }

    #[test]
    fn certificate_text_round_trip() {
        let s2 = fixtures::s2();
        let cert = decide_sd_meet(&s2, DEFAULT_FREE_CAP).unwrap();
        let text = certificate_to_text(&cert);
        let parsed = certificate_from_text(&text).unwrap();
        assert_eq!(certificate_to_text(&parsed), text);
        assert!(verify_certificate(&s2, &parsed, DEFAULT_FREE_CAP).unwrap());

        let z2 = fixtures::z2();
        let cert = decide_sd_meet(&z2, DEFAULT_FREE_CAP).unwrap();
        let text = certificate_to_text(&cert);
        let parsed = certificate_from_text(&text).unwrap();
        assert_eq!(certificate_to_text(&parsed), text);
        assert!(verify_certificate(&z2, &parsed, DEFAULT_FREE_CAP).unwrap());
    }

    #[test]
    fn certificate_json_round_trip() {
        let z2 = fixtures::z2();
        let cert = decide_sd_meet(&z2, DEFAULT_FREE_CAP).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let parsed: SdMeetCertificate = serde_json::from_str(&json).unwrap();
        assert!(verify_certificate(&z2, &parsed, DEFAULT_FREE_CAP).unwrap());
    }

    #[test]
    fn cross_checks_with_the_congruence_lattice() {
        // Where the decision is yes, the congruence lattices of the algebra
        // and its square satisfy the law directly.
        use crate::congruence::{all_congruences, sd_meet_law, CongruencesResult};
        for algebra in [fixtures::s2(), fixtures::c3()] {
            assert!(decide_sd_meet(&algebra, DEFAULT_FREE_CAP).unwrap().is_yes());
            for j in 1..=2 {
                let power = algebra.direct_power(j, crate::DEFAULT_SIZE_CAP).unwrap();
                match all_congruences(&power, 1000) {
                    CongruencesResult::Complete(l) => assert!(sd_meet_law(&l).holds()),
                    _ => panic!("lattice cap"),
                }
            }
        }
    }
}
