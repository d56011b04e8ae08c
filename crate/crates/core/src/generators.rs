//! Seeded instance generators: lattice nets and random nets.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, so
//! instances are reproducible across platforms.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CpnError, Result};
use crate::net::{Cpn, Marking};
use crate::rational::Rational;

/// Name of the PRNG, recorded in emitted instance headers.
pub const PRNG: &str = "chacha8";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator description for instance file headers.
pub fn provenance(kind: &str, seed: u64) -> String {
    format!("{kind} {PRNG} seed={seed}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub net: Cpn,
    pub m0: Marking,
    pub goal: usize,
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(2)
}

/// The `rows x cols` lattice with one unit transition per east and south
/// edge. Identifiers are zero-padded so sorted order equals index order.
pub fn lattice_net(rows: usize, cols: usize) -> Result<Cpn> {
    if rows == 0 || cols == 0 {
        return Err(CpnError::Input(format!(
            "lattice must be at least 1x1, got {rows}x{cols}"
        )));
    }
    let (wr, wc) = (width(rows), width(cols));
    let node = |r: usize, c: usize| format!("n{r:0wr$}_{c:0wc$}");
    let places: Vec<String> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| node(r, c))
        .collect();
    let np = places.len();
    let mut names = Vec::new();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            names.push(format!("e{r:0wr$}_{c:0wc$}"));
            edges.push((r * cols + c, r * cols + c + 1));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            names.push(format!("s{r:0wr$}_{c:0wc$}"));
            edges.push((r * cols + c, (r + 1) * cols + c));
        }
    }
    let nt = names.len();
    let mut input = vec![vec![0; nt]; np];
    let mut output = vec![vec![0; nt]; np];
    for (t, &(from, to)) in edges.iter().enumerate() {
        input[from][t] = 1;
        output[to][t] = 1;
    }
    Cpn::new(format!("lattice_{rows}x{cols}"), places, names, input, output)
}

/// Marks a random `ceil(fraction * |P|)` places with mass 1 and picks a
/// uniformly random goal place (which may be one of the marked places).
pub fn sample_start(net: &Cpn, fraction: &Rational, rng: &mut impl Rng) -> Result<(Marking, usize)> {
    let np = net.num_places();
    if np == 0 {
        return Err(CpnError::Input("net has no places".into()));
    }
    if !fraction.is_positive() || *fraction > Rational::one() {
        return Err(CpnError::Input(format!(
            "resource fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let k = (fraction * &Rational::from(np)).ceil();
    let k: usize = k.to_string().parse().expect("count fits usize");
    let mut mass = vec![Rational::zero(); np];
    for p in sample(rng, np, k) {
        mass[p] = Rational::one();
    }
    let goal = rng.random_range(0..np);
    Ok((Marking::new(mass)?, goal))
}

/// A lattice with a random start per [`sample_start`].
pub fn gen_lattice(rows: usize, cols: usize, seed: u64, fraction: &Rational) -> Result<Instance> {
    let net = lattice_net(rows, cols)?;
    let (m0, goal) = sample_start(&net, fraction, &mut rng(seed))?;
    Ok(Instance { net, m0, goal })
}

/// A random net. Every `(place, transition, direction)` arc is present with
/// probability `density` and weight uniform in `1..=max_weight`; a
/// transition without output arcs is re-rolled.
pub fn gen_random(num_places: usize, num_transitions: usize, max_weight: u32, density: Rational, seed: u64) -> Cpn {
    try_gen_random(num_places, num_transitions, max_weight, &density, seed).expect("valid random net parameters")
}

pub fn try_gen_random(
    num_places: usize,
    num_transitions: usize,
    max_weight: u32,
    density: &Rational,
    seed: u64,
) -> Result<Cpn> {
    if num_places == 0 {
        return Err(CpnError::Input("a random net needs at least one place".into()));
    }
    if max_weight == 0 {
        return Err(CpnError::Input("max_weight must be at least 1".into()));
    }
    if !density.is_positive() || *density > Rational::one() {
        return Err(CpnError::Input(format!("density must lie in (0, 1], got {density}")));
    }
    // Exact Bernoulli trials: draw below the denominator.
    let (num, den) = (density.numer(), density.denom());
    let den_u: u64 = den
        .to_string()
        .parse()
        .map_err(|_| CpnError::Input("density denominator too large".into()))?;
    let num_u: u64 = num.to_string().parse().expect("numerator <= denominator");
    let mut rng = rng(seed);
    let coin = |rng: &mut ChaCha8Rng| rng.random_range(0..den_u) < num_u;

    let mut input = vec![vec![0u32; num_transitions]; num_places];
    let mut output = vec![vec![0u32; num_transitions]; num_places];
    for t in 0..num_transitions {
        for row in input.iter_mut() {
            if coin(&mut rng) {
                row[t] = rng.random_range(1..=max_weight);
            }
        }
        loop {
            for row in output.iter_mut() {
                row[t] = if coin(&mut rng) {
                    rng.random_range(1..=max_weight)
                } else {
                    0
                };
            }
            if output.iter().any(|row| row[t] > 0) {
                break;
            }
        }
    }
    let (wp, wt) = (width(num_places), width(num_transitions));
    let places = (0..num_places).map(|i| format!("p{i:0wp$}")).collect();
    let transitions = (0..num_transitions).map(|i| format!("t{i:0wt$}")).collect();
    Cpn::new(
        format!("random_{num_places}x{num_transitions}_{seed}"),
        places,
        transitions,
        input,
        output,
    )
}
