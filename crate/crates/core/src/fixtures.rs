//! Small reference nets used throughout the tests and documentation.

use crate::net::{Cpn, Marking};
use crate::rational::Rational;

/// Three places, three transitions:
///
/// ```text
/// t1: 2 p1 -> p2
/// t2:   p2 -> p1
/// t3:   p1 -> 10 p3
/// ```
///
/// Initially marked with `p1 = 1`.
pub fn fig1() -> (Cpn, Marking) {
    let net = Cpn::builder("fig1")
        .places(["p1", "p2", "p3"])
        .transition("t1", &[("p1", 2)], &[("p2", 1)])
        .transition("t2", &[("p2", 1)], &[("p1", 1)])
        .transition("t3", &[("p1", 1)], &[("p3", 10)])
        .build()
        .expect("fixture is well formed");
    let m0 = net.marking(&[("p1", Rational::one())]).expect("fixture marking");
    (net, m0)
}

/// A net whose matrix equation allows one unit of mass on `pg`, although no
/// transition can ever fire: `t1` needs mass on `pb`, which only `t2` can
/// produce, and `t2` needs mass on `p2`, which only `t1` can produce.
///
/// ```text
/// t1: p1 + pb -> pg + p2
/// t2: p2      -> pb
/// ```
///
/// The arc structure is reconstructed from a prose description (mass is
/// "borrowed" from `pb` by `t1` and given back by `t2`), so treat it as a
/// faithful model of that behaviour rather than of a published drawing.
pub fn fig2() -> (Cpn, Marking) {
    let net = Cpn::builder("fig2")
        .places(["p1", "p2", "pb", "pg"])
        .transition("t1", &[("p1", 1), ("pb", 1)], &[("pg", 1), ("p2", 1)])
        .transition("t2", &[("p2", 1)], &[("pb", 1)])
        .build()
        .expect("fixture is well formed");
    let m0 = net.marking(&[("p1", Rational::one())]).expect("fixture marking");
    (net, m0)
}
