//! Systematic (n, k)_beta MDS storage codes in block-matrix form.
//!
//! A code is the k x (n-k) grid of square coding blocks; systematic node i
//! stores file piece f_i and parity node p stores the mixture
//! sum_i (A_i^(p))^T f_i. Any k of the n nodes must determine the file.

use serde::{Deserialize, Serialize};

use crate::domain::ScalarDomain;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sample::{Sampler, RESAMPLE_RETRY_BOUND};

/// A systematic (n, k)_beta MDS code. `blocks[i][p]` is the coding block of
/// file piece `i+1` at parity `p+1`, square of side `(n-k)*beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdsCode {
    n: usize,
    k: usize,
    beta: usize,
    domain: ScalarDomain,
    blocks: Vec<Vec<Matrix>>,
}

impl MdsCode {
    pub fn new(
        n: usize,
        k: usize,
        beta: usize,
        domain: ScalarDomain,
        blocks: Vec<Vec<Matrix>>,
    ) -> Result<Self> {
        domain.validate()?;
        if k < 1 || k >= n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k < n, got n={n}, k={k}"
            )));
        }
        if beta < 1 {
            return Err(Error::InvalidParameter("beta must be >= 1".into()));
        }
        let side = (n - k) * beta;
        if blocks.len() != k {
            return Err(Error::DimensionMismatch {
                expected: format!("{k} block rows"),
                got: format!("{}", blocks.len()),
            });
        }
        for row in &blocks {
            if row.len() != n - k {
                return Err(Error::DimensionMismatch {
                    expected: format!("{} block columns", n - k),
                    got: format!("{}", row.len()),
                });
            }
            for b in row {
                if b.rows() != side || b.cols() != side {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{side}x{side} blocks"),
                        got: format!("{}x{}", b.rows(), b.cols()),
                    });
                }
                if b.domain() != &domain {
                    return Err(Error::DomainMismatch(domain.clone(), b.domain().clone()));
                }
            }
        }
        Ok(MdsCode { n, k, beta, domain, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn domain(&self) -> &ScalarDomain {
        &self.domain
    }

    /// Side of each coding block: the per-node storage `(n-k)*beta`.
    pub fn block_side(&self) -> usize {
        (self.n - self.k) * self.beta
    }

    /// Filesize M = k(n-k)beta, never stored.
    pub fn filesize(&self) -> usize {
        self.k * self.block_side()
    }

    /// Coding block of piece `i` at parity `p`, both 1-based.
    pub fn block(&self, i: usize, p: usize) -> &Matrix {
        &self.blocks[i - 1][p - 1]
    }

    pub fn blocks(&self) -> &[Vec<Matrix>] {
        &self.blocks
    }

    pub fn has_diagonal_blocks(&self) -> bool {
        self.blocks.iter().flatten().all(Matrix::is_diagonal)
    }

    fn check_systematic_index(&self, i: usize) -> Result<()> {
        if i < 1 || i > self.k {
            return Err(Error::IndexOutOfRange(format!(
                "systematic node {i} of a code with k={}",
                self.k
            )));
        }
        Ok(())
    }
}

/// A file split in k pieces of length `(n-k)*beta`, each a column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FileVector {
    pieces: Vec<Matrix>,
}

impl FileVector {
    pub fn for_code(code: &MdsCode, pieces: Vec<Matrix>) -> Result<Self> {
        if pieces.len() != code.k() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pieces", code.k()),
                got: format!("{}", pieces.len()),
            });
        }
        for p in &pieces {
            if p.rows() != code.block_side() || p.cols() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: format!("{}x1 pieces", code.block_side()),
                    got: format!("{}x{}", p.rows(), p.cols()),
                });
            }
            if p.domain() != code.domain() {
                return Err(Error::DomainMismatch(
                    code.domain().clone(),
                    p.domain().clone(),
                ));
            }
        }
        Ok(FileVector { pieces })
    }

    pub fn zero(code: &MdsCode) -> Self {
        let pieces = (0..code.k())
            .map(|_| Matrix::zeros(code.domain().clone(), code.block_side(), 1))
            .collect();
        FileVector { pieces }
    }

    pub fn random(code: &MdsCode, sampler: &mut Sampler) -> Self {
        let pieces = (0..code.k())
            .map(|_| sampler.matrix(code.block_side(), 1))
            .collect();
        FileVector { pieces }
    }

    /// Piece `i`, 1-based.
    pub fn piece(&self, i: usize) -> &Matrix {
        &self.pieces[i - 1]
    }

    pub fn pieces(&self) -> &[Matrix] {
        &self.pieces
    }

    /// The full column vector f = [f_1; ...; f_k].
    pub fn stacked(&self) -> Matrix {
        let refs: Vec<&Matrix> = self.pieces.iter().collect();
        Matrix::vstack(&refs).expect("pieces share shape by construction")
    }
}

/// Identity of a storage node, 1-based on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "role", content = "index")]
pub enum NodeId {
    Systematic(usize),
    Parity(usize),
}

/// What one node stores after encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeContent {
    pub id: NodeId,
    pub data: Matrix,
}

/// Draws a code with i.i.d. blocks until it verifies as MDS.
pub fn generate_random_code(
    n: usize,
    k: usize,
    beta: usize,
    domain: &ScalarDomain,
    seed: u64,
) -> Result<MdsCode> {
    generate_code(n, k, beta, domain, seed, false)
}

/// Draws a code whose blocks are all diagonal with i.i.d. nonzero diagonal
/// entries, resampling until it verifies as MDS.
pub fn generate_diagonal_code(
    n: usize,
    k: usize,
    beta: usize,
    domain: &ScalarDomain,
    seed: u64,
) -> Result<MdsCode> {
    generate_code(n, k, beta, domain, seed, true)
}

fn generate_code(
    n: usize,
    k: usize,
    beta: usize,
    domain: &ScalarDomain,
    seed: u64,
    diagonal: bool,
) -> Result<MdsCode> {
    if k < 1 || k >= n || beta < 1 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k < n and beta >= 1, got n={n}, k={k}, beta={beta}"
        )));
    }
    if !domain.is_exact() {
        return Err(Error::InvalidParameter(
            "code generation requires an exact domain".into(),
        ));
    }
    if let ScalarDomain::PrimeField { p } = domain {
        if (*p as u128) < n as u128 {
            log::warn!("field GF({p}) is small for n={n}; MDS generation may fail");
        }
    }
    let side = (n - k) * beta;
    let mut sampler = Sampler::new(domain.clone(), seed);
    for _ in 0..RESAMPLE_RETRY_BOUND {
        let blocks: Vec<Vec<Matrix>> = (0..k)
            .map(|_| {
                (0..n - k)
                    .map(|_| {
                        if diagonal {
                            sampler.diagonal_matrix(side)
                        } else {
                            sampler.matrix(side, side)
                        }
                    })
                    .collect()
            })
            .collect();
        let code = MdsCode::new(n, k, beta, domain.clone(), blocks)?;
        if is_mds(&code) {
            return Ok(code);
        }
    }
    Err(Error::GenerationFailed(RESAMPLE_RETRY_BOUND))
}

/// Encodes a file: systematic node i stores f_i, parity node p stores
/// sum_i (A_i^(p))^T f_i.
pub fn encode(code: &MdsCode, file: &FileVector) -> Result<Vec<NodeContent>> {
    FileVector::for_code(code, file.pieces().to_vec())?;
    let mut out = Vec::with_capacity(code.n());
    for i in 1..=code.k() {
        out.push(NodeContent {
            id: NodeId::Systematic(i),
            data: file.piece(i).clone(),
        });
    }
    for p in 1..=code.n() - code.k() {
        let mut acc = Matrix::zeros(code.domain().clone(), code.block_side(), 1);
        for i in 1..=code.k() {
            let term = code.block(i, p).transpose().mul(file.piece(i))?;
            acc = acc.add(&term)?;
        }
        out.push(NodeContent {
            id: NodeId::Parity(p),
            data: acc,
        });
    }
    Ok(out)
}

/// Coefficient rows that a node's stored data applies to the stacked file
/// vector f: a selector block for a systematic node, the transposed block
/// row for a parity node.
pub fn node_coefficients(code: &MdsCode, id: NodeId) -> Result<Matrix> {
    let m = code.block_side();
    match id {
        NodeId::Systematic(i) => {
            code.check_systematic_index(i)?;
            let mut sel = Matrix::zeros(code.domain().clone(), m, code.k() * m);
            for r in 0..m {
                sel.set(r, (i - 1) * m + r, code.domain().one());
            }
            Ok(sel)
        }
        NodeId::Parity(p) => {
            if p < 1 || p > code.n() - code.k() {
                return Err(Error::IndexOutOfRange(format!(
                    "parity node {p} of a code with n-k={}",
                    code.n() - code.k()
                )));
            }
            let transposed: Vec<Matrix> = (1..=code.k())
                .map(|i| code.block(i, p).transpose())
                .collect();
            let refs: Vec<&Matrix> = transposed.iter().collect();
            Matrix::hstack(&refs)
        }
    }
}

/// True iff every k-subset of nodes yields an invertible stacked system.
pub fn is_mds(code: &MdsCode) -> bool {
    let ids: Vec<NodeId> = (1..=code.k())
        .map(NodeId::Systematic)
        .chain((1..=code.n() - code.k()).map(NodeId::Parity))
        .collect();
    let mut subset: Vec<usize> = (0..code.k()).collect();
    loop {
        let picked: Vec<NodeId> = subset.iter().map(|&j| ids[j]).collect();
        let stacked = subset_coefficients(code, &picked).expect("ids are valid");
        if stacked.rank() != code.filesize() {
            return false;
        }
        if !advance(&mut subset, code.n()) {
            return true;
        }
    }
}

/// Stacked coefficient matrix of a set of nodes (rows in the given order).
pub fn subset_coefficients(code: &MdsCode, nodes: &[NodeId]) -> Result<Matrix> {
    let parts: Vec<Matrix> = nodes
        .iter()
        .map(|&id| node_coefficients(code, id))
        .collect::<Result<_>>()?;
    let refs: Vec<&Matrix> = parts.iter().collect();
    Matrix::vstack(&refs)
}

/// Recovers the file from the contents of exactly k nodes of an MDS code.
pub fn decode_from_nodes(code: &MdsCode, contents: &[NodeContent]) -> Result<FileVector> {
    if contents.len() != code.k() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} node contents", code.k()),
            got: format!("{}", contents.len()),
        });
    }
    let ids: Vec<NodeId> = contents.iter().map(|c| c.id).collect();
    let coeff = subset_coefficients(code, &ids)?;
    let data: Vec<&Matrix> = contents.iter().map(|c| &c.data).collect();
    let rhs = Matrix::vstack(&data)?;
    let f = coeff.solve(&rhs)?;
    let m = code.block_side();
    let pieces = (0..code.k())
        .map(|i| f.submatrix(&((i * m)..((i + 1) * m)).collect::<Vec<_>>(), &[0]))
        .collect();
    FileVector::for_code(code, pieces)
}

/// The block permutation P_i moving piece i's coding blocks to the first
/// block row; square of side k(n-k)beta.
pub fn node_permutation(code: &MdsCode, i: usize) -> Result<Matrix> {
    code.check_systematic_index(i)?;
    let m = code.block_side();
    let selector = |j: usize| -> Matrix {
        // E_j^T where E_j = e_j (x) I_m
        let mut e = Matrix::zeros(code.domain().clone(), code.k(), 1);
        e.set(j - 1, 0, code.domain().one());
        e.kron(&Matrix::identity(code.domain().clone(), m))
            .expect("shared domain")
            .transpose()
    };
    let order = permuted_piece_order(code.k(), i);
    let parts: Vec<Matrix> = order.into_iter().map(selector).collect();
    let refs: Vec<&Matrix> = parts.iter().collect();
    Matrix::vstack(&refs)
}

/// Piece order after applying P_i: (i, 1, ..., i-1, i+1, ..., k).
pub fn permuted_piece_order(k: usize, i: usize) -> Vec<usize> {
    std::iter::once(i)
        .chain((1..=k).filter(move |&j| j != i))
        .collect()
}

/// Block grid of P_i * A: same columns, block rows reordered by
/// [`permuted_piece_order`].
pub fn permuted_block_grid(code: &MdsCode, i: usize) -> Result<Vec<Vec<Matrix>>> {
    code.check_systematic_index(i)?;
    Ok(permuted_piece_order(code.k(), i)
        .into_iter()
        .map(|j| code.blocks[j - 1].clone())
        .collect())
}

fn advance(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Serialize, Deserialize)]
struct MdsCodeRepr {
    n: usize,
    k: usize,
    beta: usize,
    index_base: usize,
    domain: ScalarDomain,
    blocks: Vec<Vec<Matrix>>,
}

impl Serialize for MdsCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MdsCodeRepr {
            n: self.n,
            k: self.k,
            beta: self.beta,
            index_base: 1,
            domain: self.domain.clone(),
            blocks: self.blocks.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MdsCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MdsCodeRepr::deserialize(d)?;
        if repr.index_base != 1 {
            return Err(D::Error::custom("index_base must be 1"));
        }
        MdsCode::new(repr.n, repr.k, repr.beta, repr.domain, repr.blocks)
            .map_err(D::Error::custom)
    }
}
