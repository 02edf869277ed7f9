//! Graded-lexicographic monomial tables shared by all jets of a given
//! `(dim, order)`.
//!
//! Within each total degree, exponents are ordered lexicographically with
//! the first variable most significant, so the table for order `q` is a
//! prefix of the table for any order `p >= q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub type Exponents = Vec<u8>;

#[derive(Debug)]
pub struct MonomialTable {
    pub dim: usize,
    pub order: usize,
    pub exps: Vec<Exponents>,
    pub degrees: Vec<usize>,
    index: HashMap<Exponents, usize>,
    /// `(i, j, k)` with `exps[i] + exps[j] == exps[k]` and total degree <= order.
    pub products: Vec<(u32, u32, u32)>,
    /// For every non-constant monomial: `(parent, axis)` with
    /// `exps[parent] + e_axis == exps[self]`, `axis` the first nonzero entry.
    pub parents: Vec<(usize, usize)>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of monomials of total degree <= `order` in `dim` variables.
pub fn monomial_count(dim: usize, order: usize) -> usize {
    binomial(dim + order, order)
}

fn exponents_of_degree(dim: usize, degree: usize) -> Vec<Exponents> {
    if dim == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in exponents_of_degree(dim - 1, degree - first) {
            let mut e = Vec::with_capacity(dim);
            e.push(first as u8);
            e.append(&mut rest);
            out.push(e);
        }
    }
    out
}

impl MonomialTable {
    fn build(dim: usize, order: usize) -> Self {
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..=order {
            for e in exponents_of_degree(dim, d) {
                exps.push(e);
                degrees.push(d);
            }
        }
        let index: HashMap<Exponents, usize> =
            exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();

        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Exponents = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }

        let parents = exps
            .iter()
            .map(|e| match e.iter().position(|&v| v > 0) {
                None => (usize::MAX, usize::MAX),
                Some(axis) => {
                    let mut p = e.clone();
                    p[axis] -= 1;
                    (index[&p], axis)
                }
            })
            .collect();

        MonomialTable { dim, order, exps, degrees, index, products, parents }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn position(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

/// Shared table for `(dim, order)`; built once and cached for the process.
pub fn table(dim: usize, order: usize) -> Arc<MonomialTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("monomial cache poisoned");
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(MonomialTable::build(dim, order)))
        .clone()
}

pub fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// `α!` for a multi-index.
pub fn multi_factorial(exps: &[u8]) -> i64 {
    exps.iter().map(|&e| factorial(e as usize)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomials() {
        for dim in 1..=6 {
            for order in 0..=5 {
                assert_eq!(table(dim, order).len(), monomial_count(dim, order));
            }
        }
        assert_eq!(monomial_count(6, 4), 210);
    }

    #[test]
    fn lower_orders_are_prefixes() {
        let big = table(3, 4);
        for q in 0..4 {
            let small = table(3, q);
            assert_eq!(&big.exps[..small.len()], &small.exps[..]);
        }
    }

    #[test]
    fn graded_lex_layout() {
        let t = table(2, 2);
        let expected: Vec<Exponents> =
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(t.exps, expected);
    }
}
