//! Canonical small algebras used throughout the tests, benchmarks, and
//! documentation examples.

use crate::algebra::{FiniteAlgebra, Signature, Term};
use crate::sdmeet::{Colour, ColouredTree, TermPairFamily};

/// Two-element meet-semilattice with bottom 0 (one binary symbol `m`).
pub fn s2() -> FiniteAlgebra {
    FiniteAlgebra::new(
        "S2",
        2,
        Signature::new(vec![("m".into(), 2)]).unwrap(),
        vec![vec![0, 0, 0, 1]],
    )
    .unwrap()
}

/// Three-element chain semilattice: `m(x, y) = min(x, y)`.
pub fn c3() -> FiniteAlgebra {
    FiniteAlgebra::from_functions("C3", 3, vec![("m".into(), 2)], |_, args| {
        args[0].min(args[1])
    })
    .unwrap()
}

/// Two-element group reduct: `p` is exclusive-or.
pub fn z2() -> FiniteAlgebra {
    FiniteAlgebra::new(
        "Z2",
        2,
        Signature::new(vec![("p".into(), 2)]).unwrap(),
        vec![vec![0, 1, 1, 0]],
    )
    .unwrap()
}

/// Three-element dual discriminator: `d(x, y, z) = x` if `x = y`, else `z`.
pub fn d3() -> FiniteAlgebra {
    FiniteAlgebra::from_functions("D3", 3, vec![("d".into(), 3)], |_, args| {
        if args[0] == args[1] {
            args[0]
        } else {
            args[2]
        }
    })
    .unwrap()
}

/// `d3` expanded with the third projection as a fundamental symbol.
pub fn d3x() -> FiniteAlgebra {
    FiniteAlgebra::from_functions(
        "D3x",
        3,
        vec![("d".into(), 3), ("thrd".into(), 3)],
        |op, args| {
            if op == 0 {
                if args[0] == args[1] {
                    args[0]
                } else {
                    args[2]
                }
            } else {
                args[2]
            }
        },
    )
    .unwrap()
}

fn semilattice_expansion(name: &str, size: usize) -> FiniteAlgebra {
    let min3 = |a: usize, b: usize, c: usize| a.min(b).min(c);
    FiniteAlgebra::from_functions(
        name,
        size,
        vec![
            ("m".into(), 2),
            ("s1".into(), 3),
            ("t1".into(), 3),
            ("s2".into(), 3),
            ("t2".into(), 3),
            ("s3".into(), 3),
            ("t3".into(), 3),
        ],
        move |op, args| match op {
            0 => args[0].min(args[1]),
            1 => args[0].min(args[1]),            // s1 = xy
            2 => min3(args[0], args[1], args[2]), // t1 = xyz
            3 => args[0].min(args[2]),            // s2 = xz
            4 => args[2],                         // t2 = z
            5 => min3(args[0], args[1], args[2]), // s3 = xyz
            6 => args[1].min(args[2]),            // t3 = yz
            _ => unreachable!(),
        },
    )
    .unwrap()
}

/// `s2` expanded with the six semilattice witness terms as fundamental
/// ternary symbols.
pub fn s2x() -> FiniteAlgebra {
    semilattice_expansion("S2x", 2)
}

/// `c3` expanded the same way.
pub fn c3x() -> FiniteAlgebra {
    semilattice_expansion("C3x", 3)
}

/// The four-node coloured tree whose identities the semilattice family
/// satisfies: root 0 (blue) with ordered children 1, 2; node 3 is the only
/// child of node 2; nodes 1 and 2 are green, node 3 blue.
pub fn semilattice_tree() -> ColouredTree {
    ColouredTree::new(
        vec![None, Some(0), Some(0), Some(2)],
        vec![Colour::B, Colour::G, Colour::G, Colour::B],
    )
    .unwrap()
}

fn m(a: Term, b: Term) -> Term {
    Term::app("m", vec![a, b])
}

/// The semilattice witness family over the plain semilattice signature
/// (`s1 = xy`, `t1 = xyz`, `s2 = xz`, `t2 = z`, `s3 = xyz`, `t3 = yz`),
/// with the root pair being the outer projections.
pub fn semilattice_family() -> TermPairFamily {
    let x = Term::Var(0);
    let y = Term::Var(1);
    let z = Term::Var(2);
    TermPairFamily::new(vec![
        (x.clone(), z.clone()),
        (
            m(x.clone(), y.clone()),
            m(m(x.clone(), y.clone()), z.clone()),
        ),
        (m(x.clone(), z.clone()), z.clone()),
        (m(m(x.clone(), y.clone()), z.clone()), m(y, z)),
    ])
}

/// The same family as pairs of fundamental symbols of `s2x` / `c3x`.
pub fn semilattice_symbol_pairs() -> Vec<(String, String)> {
    vec![
        ("s1".into(), "t1".into()),
        ("s2".into(), "t2".into()),
        ("s3".into(), "t3".into()),
    ]
}

/// The separating family of `d3x`.
pub fn d3x_symbol_pairs() -> Vec<(String, String)> {
    vec![("d".into(), "thrd".into())]
}
