use super::{FGElement, Generator, GroupError, TriangularMatrix};
use crate::arith::{BigRational, PrimeSet};
use std::collections::HashSet;

type Key = Vec<Vec<BigRational>>;

/// An element of the Cayley-graph ball with its exact word length.
#[derive(Debug, Clone)]
pub struct BallElement {
    pub matrix: TriangularMatrix,
    pub length: usize,
}

/// Breadth-first layers from the identity; `visit` sees each new element once and may stop the search.
fn bfs_layers(n: usize, primes: &PrimeSet, radius: usize, mut visit: impl FnMut(&Key, usize) -> bool) -> bool {
    let gens = Generator::all(n, primes);
    let start = TriangularMatrix::identity(n).into_entries();
    let mut seen: HashSet<Key> = HashSet::new();
    seen.insert(start.clone());
    if visit(&start, 0) {
        return true;
    }
    let mut frontier = vec![start];
    for depth in 1..=radius {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                let mut c = m.clone();
                g.apply_right(&mut c);
                if seen.contains(&c) {
                    continue;
                }
                if visit(&c, depth) {
                    return true;
                }
                seen.insert(c.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    false
}

/// Every element of word length ≤ radius, in BFS order.
pub fn enumerate_ball(n: usize, primes: &PrimeSet, radius: usize) -> Vec<BallElement> {
    let mut out = Vec::new();
    bfs_layers(n, primes, radius, |m, d| {
        out.push(BallElement {
            matrix: TriangularMatrix::from_raw(m.clone()),
            length: d,
        });
        false
    });
    out
}

/// Exact word length of `f` if it is at most `radius`.
pub fn bfs_word_length(f: &FGElement, radius: usize) -> Result<usize, GroupError> {
    let target = f.matrix().entries().to_vec();
    let mut found = None;
    bfs_layers(f.n(), f.prime_set(), radius, |m, d| {
        if *m == target {
            found = Some(d);
            true
        } else {
            false
        }
    });
    found.ok_or(GroupError::NotWithinRadius(radius))
}
