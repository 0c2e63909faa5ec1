//! Independent oracles for cross-checking the elimination-based kernels:
//! determinants by cofactor expansion and rank by exhaustive minor search.
//! Nothing here goes through the row-reduction code under test.

use repair_align_core::{Matrix, Scalar, ScalarDomain};

/// Determinant by cofactor expansion along the first row.
#[allow(dead_code)]
pub fn cofactor_det(m: &Matrix) -> Scalar {
    assert!(m.is_square());
    let n = m.rows();
    let dom = m.domain().clone();
    if n == 0 {
        return dom.one();
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = dom.zero();
    for c in 0..n {
        let minor = m.submatrix(
            &(1..n).collect::<Vec<_>>(),
            &(0..n).filter(|&x| x != c).collect::<Vec<_>>(),
        );
        let mut term = dom.mul(m.get(0, c), &cofactor_det(&minor));
        if c % 2 == 1 {
            term = dom.neg(&term);
        }
        acc = dom.add(&acc, &term);
    }
    acc
}

/// Rank as the largest r such that some r x r minor has nonzero determinant.
#[allow(dead_code)]
pub fn minor_rank(m: &Matrix) -> usize {
    let dom = m.domain().clone();
    let max = m.rows().min(m.cols());
    for size in (1..=max).rev() {
        for rows in combinations(m.rows(), size) {
            for cols in combinations(m.cols(), size) {
                let det = cofactor_det(&m.submatrix(&rows, &cols));
                if !dom.is_zero(&det) {
                    return size;
                }
            }
        }
    }
    0
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return vec![];
    }
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        let mut i = k;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if combo[i] < n - (k - i) {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return out;
        }
    }
}

#[allow(dead_code)]
pub fn gf(p: u64) -> ScalarDomain {
    ScalarDomain::prime_field(p).unwrap()
}

#[allow(dead_code)]
pub fn rational() -> ScalarDomain {
    ScalarDomain::rational()
}
