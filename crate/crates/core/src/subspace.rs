//! Canonical representatives of column spaces over prime fields.
//!
//! Search enumerations range over subspaces rather than raw matrices: both
//! the repair feasibility constraint and every interference/eavesdropper
//! rank depend only on the column space of each candidate, so one canonical
//! full-column-rank matrix per Grassmannian point suffices.

use crate::domain::{Scalar, ScalarDomain};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Canonical basis matrix of the column space of `mat`: the transpose of the
/// reduced row-echelon basis of the transposed matrix. Two matrices have the
/// same column space iff their canonical representatives are equal.
pub fn canonical_rep(mat: &Matrix) -> Matrix {
    mat.transpose().row_space_basis().transpose()
}

/// All canonical representatives of `dim`-dimensional subspaces of F^m over
/// the given prime field, sorted by flattened-entry order.
pub fn enumerate_reps(domain: &ScalarDomain, m: usize, dim: usize) -> Result<Vec<Matrix>> {
    let ScalarDomain::PrimeField { p } = *domain else {
        return Err(Error::InvalidParameter(
            "subspace enumeration requires a prime field".into(),
        ));
    };
    if dim > m {
        return Err(Error::InvalidParameter(format!(
            "no {dim}-dimensional subspaces of F^{m}"
        )));
    }
    let mut reps = Vec::new();
    let mut pivots: Vec<usize> = (0..dim).collect();
    loop {
        emit_for_pivots(domain, p, m, dim, &pivots, &mut reps);
        if !advance_combination(&mut pivots, m) {
            break;
        }
    }
    reps.sort_by(|a, b| a.entry_cmp(b));
    Ok(reps)
}

/// Number of `dim`-dimensional subspaces of F^m over GF(p): the Gaussian
/// binomial coefficient, saturating at `u128::MAX`.
pub fn count_subspaces(p: u64, m: usize, dim: usize) -> u128 {
    if dim > m {
        return 0;
    }
    // recurrence [m d] = [m-1 d-1] + p^d [m-1 d]
    let mut table = vec![vec![0u128; dim + 1]; m + 1];
    for row in table.iter_mut() {
        row[0] = 1;
    }
    for mm in 1..=m {
        for dd in 1..=dim.min(mm) {
            let shift = pow_sat(p, dd as u32);
            let carry = table[mm - 1][dd].saturating_mul(shift);
            table[mm][dd] = table[mm - 1][dd - 1].saturating_add(carry);
        }
    }
    table[m][dim]
}

fn emit_for_pivots(
    domain: &ScalarDomain,
    p: u64,
    m: usize,
    dim: usize,
    pivots: &[usize],
    out: &mut Vec<Matrix>,
) {
    // free positions: (row, col) with row below col's pivot and not a pivot row
    let mut free = Vec::new();
    for (col, &pr) in pivots.iter().enumerate() {
        for row in pr + 1..m {
            if !pivots.contains(&row) {
                free.push((row, col));
            }
        }
    }
    let mut assignment = vec![0u64; free.len()];
    loop {
        let mut mat = Matrix::zeros(domain.clone(), m, dim);
        for (col, &pr) in pivots.iter().enumerate() {
            mat.set(pr, col, domain.one());
        }
        for (slot, &(row, col)) in free.iter().enumerate() {
            mat.set(row, col, Scalar::Fp(assignment[slot]));
        }
        out.push(mat);
        // odometer over the free slots
        let mut slot = 0;
        loop {
            if slot == assignment.len() {
                return;
            }
            assignment[slot] += 1;
            if assignment[slot] < p {
                break;
            }
            assignment[slot] = 0;
            slot += 1;
        }
    }
}

fn advance_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < m - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn pow_sat(base: u64, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// `base^exp` saturating at `u128::MAX`; used by search budget guards.
pub fn pow_u128_sat(base: u64, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
