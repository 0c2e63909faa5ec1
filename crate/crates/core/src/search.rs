//! Shared engine for the two rank-constrained rank minimizations.
//!
//! Both problems have the same shape: pick one matrix per slot (parity node
//! or user), subject to the useful stack having full rank, minimizing either
//! the sum or the maximum of the harmful-stack ranks. Candidates range over
//! canonical column-space representatives, since every rank involved depends
//! only on the column space of each pick.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    SumOfRanks,
    MaxRank,
}

/// One rank-constrained minimization instance. `useful[j]` multiplies the
/// slot-j candidate in the constraint stack; `harmful[h][j]` in harmful
/// stack h. All matrices are square of side `m`; candidates are `m x dim`.
pub struct RankProblem<'a> {
    pub useful: Vec<&'a Matrix>,
    pub harmful: Vec<Vec<&'a Matrix>>,
    pub m: usize,
    pub dim: usize,
}

#[derive(Debug)]
pub struct SearchOutcome {
    /// Minimum objective over feasible tuples.
    pub objective: usize,
    /// Every optimal tuple of canonical representatives, in lexicographic
    /// order of the flattened representatives.
    pub optima: Vec<Vec<Matrix>>,
}

/// Exhaustive search over all tuples of column-space representatives.
///
/// The budget guards the raw candidate count p^(slots * m * dim) before any
/// enumeration happens.
pub fn exhaustive(problem: &RankProblem<'_>, objective: Objective, budget: u64) -> Result<SearchOutcome> {
    let slots = problem.useful.len();
    let domain = problem.useful[0].domain().clone();
    let crate::domain::ScalarDomain::PrimeField { p } = domain else {
        return Err(Error::InvalidParameter(
            "exhaustive search requires a prime field".into(),
        ));
    };

    let raw = subspace::pow_u128_sat(p, (slots * problem.m * problem.dim) as u64);
    if raw > budget as u128 {
        return Err(Error::BudgetExceeded { candidates: raw, budget });
    }

    let reps = subspace::enumerate_reps(&domain, problem.m, problem.dim)?;
    let per_slot = reps.len() as u64;
    let total = per_slot
        .checked_pow(slots as u32)
        .ok_or(Error::BudgetExceeded { candidates: raw, budget })?;

    // tuple index is mixed-radix over the sorted reps, so ascending index
    // order is lexicographic order of the representatives
    let evaluate = |idx: u64| -> Option<usize> {
        let tuple = decode_tuple(idx, slots, per_slot);
        let picks: Vec<&Matrix> = tuple.iter().map(|&t| &reps[t as usize]).collect();
        if stacked_rank(&problem.useful, &picks) != problem.m {
            return None;
        }
        let ranks = problem.harmful.iter().map(|h| stacked_rank(h, &picks));
        Some(match objective {
            Objective::SumOfRanks => ranks.sum(),
            Objective::MaxRank => ranks.max().unwrap_or(0),
        })
    };

    let best = (0..total)
        .into_par_iter()
        .fold(
            || None::<(usize, Vec<u64>)>,
            |acc, idx| match evaluate(idx) {
                None => acc,
                Some(value) => Some(merge(acc, value, vec![idx])),
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some((va, ia)), Some((vb, ib))) => {
                    if va < vb {
                        Some((va, ia))
                    } else if vb < va {
                        Some((vb, ib))
                    } else {
                        let mut merged = ia;
                        merged.extend(ib);
                        Some((va, merged))
                    }
                }
            },
        );

    let Some((objective_value, mut idxs)) = best else {
        return Err(Error::NoFeasibleStrategy);
    };
    idxs.sort_unstable();
    let optima: Vec<Vec<Matrix>> = idxs
        .iter()
        .map(|&idx| {
            decode_tuple(idx, slots, per_slot)
                .into_iter()
                .map(|t| reps[t as usize].clone())
                .collect()
        })
        .collect();
    Ok(SearchOutcome { objective: objective_value, optima })
}

fn merge(acc: Option<(usize, Vec<u64>)>, value: usize, idxs: Vec<u64>) -> (usize, Vec<u64>) {
    match acc {
        None => (value, idxs),
        Some((best, mut list)) => {
            if value < best {
                (value, idxs)
            } else if value == best {
                list.extend(idxs);
                (best, list)
            } else {
                (best, list)
            }
        }
    }
}

fn decode_tuple(mut idx: u64, slots: usize, per_slot: u64) -> Vec<u64> {
    let mut tuple = vec![0u64; slots];
    for t in tuple.iter_mut().rev() {
        *t = idx % per_slot;
        idx /= per_slot;
    }
    tuple
}

fn stacked_rank(coeffs: &[&Matrix], picks: &[&Matrix]) -> usize {
    let products: Vec<Matrix> = coeffs
        .iter()
        .zip(picks)
        .map(|(a, c)| a.mul(c).expect("validated shapes"))
        .collect();
    let refs: Vec<&Matrix> = products.iter().collect();
    Matrix::hstack(&refs).expect("validated shapes").rank()
}
