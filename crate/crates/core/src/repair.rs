//! Exact repair of a single failed systematic node: transmissions,
//! feasibility, overhead, reconstruction, and optimal-strategy search.
//!
//! The newcomer downloads `beta` mixed equations from every parity node and
//! a row-space basis of each interference space from the surviving
//! systematic nodes; the overhead is the total download divided by the size
//! of the lost piece.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::domain::opt_rat_str;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mds::{encode, MdsCode, NodeContent, NodeId};
use crate::sample::Sampler;
use crate::search::{self, Objective, RankProblem};
use crate::subspace;
use crate::Provenance;

/// Default cap on the raw candidate count of exhaustive searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000_000;

/// The n-k repair matrices for regenerating one systematic node. Each is
/// `(n-k)beta x beta` and full column rank: a rank-deficient repair matrix
/// would waste parity downloads, so it is rejected at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairStrategy {
    failed_node: usize,
    matrices: Vec<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl RepairStrategy {
    pub fn new(failed_node: usize, matrices: Vec<Matrix>) -> Result<Self> {
        if failed_node < 1 {
            return Err(Error::IndexOutOfRange("failed_node must be >= 1".into()));
        }
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("no repair matrices".into()));
        }
        let (rows, cols) = (matrices[0].rows(), matrices[0].cols());
        for m in &matrices {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::DimensionMismatch {
                    expected: format!("{rows}x{cols}"),
                    got: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if m.domain() != matrices[0].domain() {
                return Err(Error::DomainMismatch(
                    matrices[0].domain().clone(),
                    m.domain().clone(),
                ));
            }
            if m.rank() != m.cols() {
                return Err(Error::RankDeficient);
            }
        }
        Ok(RepairStrategy { failed_node, matrices, provenance: None })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn failed_node(&self) -> usize {
        self.failed_node
    }

    /// Repair matrix for parity `p`, 1-based.
    pub fn matrix(&self, p: usize) -> &Matrix {
        &self.matrices[p - 1]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    fn check_against(&self, code: &MdsCode) -> Result<()> {
        if self.failed_node > code.k() {
            return Err(Error::IndexOutOfRange(format!(
                "failed node {} of a code with k={}",
                self.failed_node,
                code.k()
            )));
        }
        let parities = code.n() - code.k();
        if self.matrices.len() != parities {
            return Err(Error::DimensionMismatch {
                expected: format!("{parities} repair matrices"),
                got: format!("{}", self.matrices.len()),
            });
        }
        let m = code.block_side();
        for r in &self.matrices {
            if r.rows() != m || r.cols() != code.beta() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{m}x{} repair matrices", code.beta()),
                    got: format!("{}x{}", r.rows(), r.cols()),
                });
            }
            if r.domain() != code.domain() {
                return Err(Error::DomainMismatch(
                    code.domain().clone(),
                    r.domain().clone(),
                ));
            }
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for RepairStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            failed_node: usize,
            matrices: Vec<Matrix>,
            #[serde(default)]
            provenance: Option<Provenance>,
        }
        let repr = Repr::deserialize(d)?;
        let mut s =
            RepairStrategy::new(repr.failed_node, repr.matrices).map_err(D::Error::custom)?;
        if let Some(p) = repr.provenance {
            s = s.with_provenance(p);
        }
        Ok(s)
    }
}

/// Everything measured about one repair strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub feasible: bool,
    /// Ranks of the interference spaces, over u != i in ascending u.
    pub interference_ranks: Vec<usize>,
    /// Overhead delta = 1 + (sum of interference ranks)/((n-k)beta); absent
    /// when infeasible.
    #[serde(with = "opt_rat_str")]
    pub overhead: Option<BigRational>,
    /// Equations downloaded from parity nodes: (n-k)beta.
    pub parity_download: usize,
    /// Per surviving systematic node, the basis size fetched from it.
    pub systematic_downloads: Vec<usize>,
}

impl RepairReport {
    /// Total downloaded equations when feasible.
    pub fn total_download(&self) -> usize {
        self.parity_download + self.systematic_downloads.iter().sum::<usize>()
    }
}

/// The useful-data matrix [A_i^(1) R^(1) ... A_i^(n-k) R^(n-k)].
pub fn useful_matrix(code: &MdsCode, strategy: &RepairStrategy) -> Result<Matrix> {
    strategy.check_against(code)?;
    stacked_products(code, strategy, strategy.failed_node())
}

/// The interference matrix of piece u: [A_u^(1) R^(1) ... A_u^(n-k) R^(n-k)].
pub fn interference_matrix(code: &MdsCode, strategy: &RepairStrategy, u: usize) -> Result<Matrix> {
    strategy.check_against(code)?;
    if u == strategy.failed_node() {
        return Err(Error::InvalidParameter(
            "interference index must differ from the failed node".into(),
        ));
    }
    if u < 1 || u > code.k() {
        return Err(Error::IndexOutOfRange(format!("piece {u}")));
    }
    stacked_products(code, strategy, u)
}

fn stacked_products(code: &MdsCode, strategy: &RepairStrategy, u: usize) -> Result<Matrix> {
    let products: Vec<Matrix> = (1..=code.n() - code.k())
        .map(|p| code.block(u, p).mul(strategy.matrix(p)))
        .collect::<Result<_>>()?;
    let refs: Vec<&Matrix> = products.iter().collect();
    Matrix::hstack(&refs)
}

/// Per parity node, the `beta x k(n-k)beta` coefficient matrix its
/// transmission applies to the stacked file vector.
pub fn parity_transmissions(code: &MdsCode, strategy: &RepairStrategy) -> Result<Vec<Matrix>> {
    strategy.check_against(code)?;
    (1..=code.n() - code.k())
        .map(|p| {
            let parts: Vec<Matrix> = (1..=code.k())
                .map(|u| {
                    code.block(u, p)
                        .mul(strategy.matrix(p))
                        .map(|prod| prod.transpose())
                })
                .collect::<Result<_>>()?;
            let refs: Vec<&Matrix> = parts.iter().collect();
            Matrix::hstack(&refs)
        })
        .collect()
}

/// The full-rank condition on the useful-data matrix.
pub fn repair_feasible(code: &MdsCode, strategy: &RepairStrategy) -> Result<bool> {
    Ok(useful_matrix(code, strategy)?.rank() == code.block_side())
}

/// Rank of the interference space of piece u != i.
pub fn interference_rank(code: &MdsCode, strategy: &RepairStrategy, u: usize) -> Result<usize> {
    Ok(interference_matrix(code, strategy, u)?.rank())
}

/// Measures a strategy without insisting on feasibility.
pub fn evaluate(code: &MdsCode, strategy: &RepairStrategy) -> Result<RepairReport> {
    let feasible = repair_feasible(code, strategy)?;
    let mut ranks = Vec::new();
    for u in 1..=code.k() {
        if u == strategy.failed_node() {
            continue;
        }
        ranks.push(interference_rank(code, strategy, u)?);
    }
    let m = code.block_side();
    let overhead = feasible.then(|| {
        let sum: usize = ranks.iter().sum();
        BigRational::new(BigInt::from(m + sum), BigInt::from(m))
    });
    Ok(RepairReport {
        feasible,
        interference_ranks: ranks.clone(),
        overhead,
        parity_download: m,
        systematic_downloads: ranks,
    })
}

/// Overhead of a feasible strategy, with its report.
pub fn repair_overhead(
    code: &MdsCode,
    strategy: &RepairStrategy,
) -> Result<(BigRational, RepairReport)> {
    let report = evaluate(code, strategy)?;
    match report.overhead.clone() {
        Some(delta) => Ok((delta, report)),
        None => Err(Error::InfeasibleStrategy),
    }
}

/// Output of a reconstruction: the regenerated piece and how many equations
/// were downloaded in total.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub piece: Matrix,
    pub downloaded_symbols: usize,
}

/// Regenerates piece i from the n-1 surviving node contents: mixes the
/// parity transmissions, fetches a row-space basis of each interference
/// space from the surviving systematic nodes, cancels the interference and
/// inverts the useful system.
pub fn reconstruct(
    code: &MdsCode,
    strategy: &RepairStrategy,
    surviving: &[NodeContent],
) -> Result<Reconstruction> {
    strategy.check_against(code)?;
    let i = strategy.failed_node();
    let m = code.block_side();
    let parities = code.n() - code.k();

    if !repair_feasible(code, strategy)? {
        return Err(Error::InfeasibleStrategy);
    }

    let mut systematic: Vec<Option<&Matrix>> = vec![None; code.k() + 1];
    let mut parity: Vec<Option<&Matrix>> = vec![None; parities + 1];
    for c in surviving {
        if c.data.rows() != m || c.data.cols() != 1 || c.data.domain() != code.domain() {
            return Err(Error::DimensionMismatch {
                expected: format!("{m}x1 contents over {}", code.domain()),
                got: format!("{}x{}", c.data.rows(), c.data.cols()),
            });
        }
        match c.id {
            NodeId::Systematic(u) if u == i => {
                return Err(Error::InvalidParameter(format!(
                    "contents of failed node {i} supplied as survivor"
                )))
            }
            NodeId::Systematic(u) if u >= 1 && u <= code.k() => systematic[u] = Some(&c.data),
            NodeId::Parity(p) if p >= 1 && p <= parities => parity[p] = Some(&c.data),
            _ => return Err(Error::IndexOutOfRange(format!("{:?}", c.id))),
        }
    }
    for u in 1..=code.k() {
        if u != i && systematic[u].is_none() {
            return Err(Error::InvalidParameter(format!(
                "missing contents of systematic node {u}"
            )));
        }
    }
    for p in 1..=parities {
        if parity[p].is_none() {
            return Err(Error::InvalidParameter(format!(
                "missing contents of parity node {p}"
            )));
        }
    }

    // what the parity nodes send: y_p = (R^(p))^T c_p
    let y_parts: Vec<Matrix> = (1..=parities)
        .map(|p| strategy.matrix(p).transpose().mul(parity[p].unwrap()))
        .collect::<Result<_>>()?;
    let refs: Vec<&Matrix> = y_parts.iter().collect();
    let y = Matrix::vstack(&refs)?;
    let mut downloaded = m;

    // cancel each interference term from basis-sized systematic downloads
    let mut z = y;
    for u in 1..=code.k() {
        if u == i {
            continue;
        }
        // the stacked interference block acting on f_u
        let t_u = interference_matrix(code, strategy, u)?.transpose();
        let basis = t_u.row_space_basis();
        let pivots = t_u.pivot_columns();
        let fetched = basis.mul(systematic[u].unwrap())?;
        downloaded += basis.rows();
        // each row of t_u reads its basis coordinates off the pivot columns
        let coords = Matrix::from_fn(
            code.domain().clone(),
            t_u.rows(),
            basis.rows(),
            |r, j| t_u.get(r, pivots[j]).clone(),
        );
        let term = coords.mul(&fetched)?;
        z = z.sub(&term)?;
    }

    let useful_t = useful_matrix(code, strategy)?.transpose();
    let piece = useful_t.solve(&z)?;

    // verify the provided contents actually satisfy the code
    let mut pieces = Vec::with_capacity(code.k());
    for u in 1..=code.k() {
        if u == i {
            pieces.push(piece.clone());
        } else {
            pieces.push(systematic[u].unwrap().clone());
        }
    }
    let file = crate::mds::FileVector::for_code(code, pieces)?;
    let reencoded = encode(code, &file)?;
    for c in &reencoded {
        if let NodeId::Parity(p) = c.id {
            if &c.data != parity[p].unwrap() {
                return Err(Error::InconsistentContents);
            }
        }
    }

    Ok(Reconstruction { piece, downloaded_symbols: downloaded })
}

/// How [`search_optimal_repair`] explores the strategy space.
#[derive(Debug, Clone, Copy)]
pub enum SearchMode {
    /// Enumerate all tuples of column-space representatives (prime fields
    /// only), guarded by the raw candidate budget.
    Exhaustive { budget: u64 },
    /// Sample full-column-rank strategies from a seeded stream.
    Randomized { trials: u64, seed: u64 },
}

/// Full outcome of an exhaustive repair search, for equivalence checking.
pub struct RepairSearchOutcome {
    pub min_sum_rank: usize,
    /// All optimal strategies as canonical representative tuples, in
    /// lexicographic order.
    pub optima: Vec<Vec<Matrix>>,
}

/// Minimizes the total interference rank subject to the full-rank repair
/// condition. Ties are broken by lexicographic order of the canonical
/// representatives.
pub fn search_optimal_repair(
    code: &MdsCode,
    i: usize,
    mode: SearchMode,
) -> Result<(RepairStrategy, RepairReport)> {
    let tuple = match mode {
        SearchMode::Exhaustive { budget } => {
            let outcome = exhaustive_repair_search(code, i, budget)?;
            outcome.optima.into_iter().next().expect("nonempty optima")
        }
        SearchMode::Randomized { trials, seed } => randomized_repair_search(code, i, trials, seed)?,
    };
    let strategy = RepairStrategy::new(i, tuple)?;
    let report = evaluate(code, &strategy)?;
    Ok((strategy, report))
}

/// Exhaustive search keeping every optimal representative tuple.
pub fn exhaustive_repair_search(
    code: &MdsCode,
    i: usize,
    budget: u64,
) -> Result<RepairSearchOutcome> {
    if i < 1 || i > code.k() {
        return Err(Error::IndexOutOfRange(format!("systematic node {i}")));
    }
    let useful: Vec<&Matrix> = (1..=code.n() - code.k())
        .map(|p| code.block(i, p))
        .collect();
    let harmful: Vec<Vec<&Matrix>> = (1..=code.k())
        .filter(|&u| u != i)
        .map(|u| {
            (1..=code.n() - code.k())
                .map(|p| code.block(u, p))
                .collect()
        })
        .collect();
    let problem = RankProblem {
        useful,
        harmful,
        m: code.block_side(),
        dim: code.beta(),
    };
    let out = search::exhaustive(&problem, Objective::SumOfRanks, budget)?;
    Ok(RepairSearchOutcome { min_sum_rank: out.objective, optima: out.optima })
}

fn randomized_repair_search(
    code: &MdsCode,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<Matrix>> {
    if i < 1 || i > code.k() {
        return Err(Error::IndexOutOfRange(format!("systematic node {i}")));
    }
    let m = code.block_side();
    let parities = code.n() - code.k();
    let mut sampler = Sampler::new(code.domain().clone(), seed);
    let mut best: Option<(usize, Vec<Matrix>)> = None;
    for _ in 0..trials {
        let Ok(mats) = (0..parities)
            .map(|_| sampler.full_column_rank(m, code.beta()))
            .collect::<Result<Vec<_>>>()
        else {
            continue;
        };
        let canonical: Vec<Matrix> = mats.iter().map(subspace::canonical_rep).collect();
        let strategy = RepairStrategy::new(i, canonical.clone())?;
        if !repair_feasible(code, &strategy)? {
            continue;
        }
        let mut sum = 0;
        for u in 1..=code.k() {
            if u != i {
                sum += interference_rank(code, &strategy, u)?;
            }
        }
        let better = match &best {
            None => true,
            Some((value, tuple)) => {
                sum < *value || (sum == *value && tuple_cmp(&canonical, tuple).is_lt())
            }
        };
        if better {
            best = Some((sum, canonical));
        }
    }
    best.map(|(_, tuple)| tuple).ok_or(Error::NoFeasibleStrategy)
}

fn tuple_cmp(a: &[Matrix], b: &[Matrix]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.entry_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ScalarDomain;
    use crate::mds::{generate_random_code, FileVector};

    fn rat() -> ScalarDomain {
        ScalarDomain::rational()
    }

    fn gf(p: u64) -> ScalarDomain {
        ScalarDomain::prime_field(p).unwrap()
    }

    /// Inverse-based aligned strategy for k = 2 codes, built inline.
    fn aligned_strategy(code: &MdsCode, i: usize, seed: u64) -> RepairStrategy {
        let u = if i == 1 { 2 } else { 1 };
        let mut s = Sampler::new(code.domain().clone(), seed);
        let w = s.full_column_rank(code.block_side(), code.beta()).unwrap();
        let mats: Vec<Matrix> = (1..=code.n() - code.k())
            .map(|p| code.block(u, p).inverse().unwrap().mul(&w).unwrap())
            .collect();
        RepairStrategy::new(i, mats).unwrap()
    }

    #[test]
    fn rank_deficient_repair_matrix_rejected() {
        let zero = Matrix::zeros(rat(), 2, 1);
        assert!(matches!(
            RepairStrategy::new(1, vec![zero.clone(), zero]),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn parity_transmission_shapes_and_selector_case() {
        // identity-block code: transmissions select rows of the blocks
        let blocks = vec![
            vec![Matrix::identity(rat(), 2), Matrix::identity(rat(), 2)],
            vec![Matrix::identity(rat(), 2), Matrix::identity(rat(), 2)],
        ];
        let code = MdsCode::new(4, 2, 1, rat(), blocks).unwrap();
        let first_col = Matrix::from_i64(rat(), 2, 1, &[1, 0]).unwrap();
        let strategy = RepairStrategy::new(1, vec![first_col.clone(), first_col]).unwrap();
        let tx = parity_transmissions(&code, &strategy).unwrap();
        assert_eq!(tx.len(), 2);
        for t in &tx {
            assert_eq!((t.rows(), t.cols()), (1, 4));
            // selects the first row of each identity block
            assert_eq!(t, &Matrix::from_i64(rat(), 1, 4, &[1, 0, 1, 0]).unwrap());
        }
    }

    #[test]
    fn aligned_strategy_stacks_copies_of_w() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 21);
        // interference columns of the stacked system equal [W^T; W^T]
        let w = code.block(2, 1).mul(strategy.matrix(1)).unwrap();
        for p in 1..=2 {
            assert_eq!(code.block(2, p).mul(strategy.matrix(p)).unwrap(), w);
        }
        let tx = parity_transmissions(&code, &strategy).unwrap();
        let interference_cols: Vec<Matrix> = tx
            .iter()
            .map(|t| t.submatrix(&[0], &[2, 3]))
            .collect();
        assert_eq!(interference_cols[0], interference_cols[1]);
        assert_eq!(interference_rank(&code, &strategy, 2).unwrap(), 1);
    }

    #[test]
    fn repeated_blocks_make_repair_infeasible() {
        // all A equal, all R equal: useful columns repeat, rank <= beta
        let mut s = Sampler::new(rat(), 3);
        let a = s.matrix(2, 2);
        let blocks = vec![vec![a.clone(), a.clone()], vec![a.clone(), a.clone()]];
        let code = MdsCode::new(4, 2, 1, rat(), blocks).unwrap();
        let r = s.full_column_rank(2, 1).unwrap();
        let strategy = RepairStrategy::new(1, vec![r.clone(), r]).unwrap();
        assert!(!repair_feasible(&code, &strategy).unwrap());
        assert!(matches!(
            repair_overhead(&code, &strategy),
            Err(Error::InfeasibleStrategy)
        ));
    }

    #[test]
    fn single_parity_feasibility_is_invertibility() {
        // n-k = 1: feasible iff A_i^(1) R^(1) is invertible
        let code = generate_random_code(3, 2, 1, &rat(), 5).unwrap();
        let r = Matrix::identity(rat(), 1);
        let strategy = RepairStrategy::new(1, vec![r]).unwrap();
        let expected = code.block(1, 1).rank() == 1;
        assert_eq!(repair_feasible(&code, &strategy).unwrap(), expected);
    }

    #[test]
    fn aligned_overhead_4_2_1_is_three_halves() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        assert!(repair_feasible(&code, &strategy).unwrap());
        let (delta, report) = repair_overhead(&code, &strategy).unwrap();
        assert_eq!(delta, BigRational::new(3.into(), 2.into()));
        assert_eq!(report.interference_ranks, vec![1]);
        assert_eq!(report.total_download(), 3);
    }

    #[test]
    fn aligned_overhead_5_2_1_is_four_thirds() {
        let code = generate_random_code(5, 2, 1, &rat(), 11).unwrap();
        let strategy = aligned_strategy(&code, 2, 17);
        let (delta, _) = repair_overhead(&code, &strategy).unwrap();
        assert_eq!(delta, BigRational::new(4.into(), 3.into()));
    }

    #[test]
    fn random_strategy_hits_max_overhead_generically() {
        // unaligned strategies almost surely have full interference rank,
        // so delta = k
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let mut full_rank_count = 0;
        for seed in 0..20 {
            let mut s = Sampler::new(rat(), 1000 + seed);
            let mats = vec![
                s.full_column_rank(2, 1).unwrap(),
                s.full_column_rank(2, 1).unwrap(),
            ];
            let strategy = RepairStrategy::new(1, mats).unwrap();
            if interference_rank(&code, &strategy, 2).unwrap() == 2 {
                full_rank_count += 1;
            }
        }
        assert!(full_rank_count >= 15, "only {full_rank_count}/20 unaligned");
    }

    #[test]
    fn reconstruct_zero_file_gives_zero_piece() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        let nodes = encode(&code, &FileVector::zero(&code)).unwrap();
        let surviving: Vec<NodeContent> =
            nodes.into_iter().filter(|c| c.id != NodeId::Systematic(1)).collect();
        let rec = reconstruct(&code, &strategy, &surviving).unwrap();
        assert!(rec.piece.is_zero());
    }

    #[test]
    fn reconstruct_round_trip_and_download_count() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        let mut s = Sampler::new(rat(), 77);
        let file = FileVector::random(&code, &mut s);
        let nodes = encode(&code, &file).unwrap();
        let surviving: Vec<NodeContent> =
            nodes.into_iter().filter(|c| c.id != NodeId::Systematic(1)).collect();
        let rec = reconstruct(&code, &strategy, &surviving).unwrap();
        assert_eq!(&rec.piece, file.piece(1));
        // delta * (n-k)beta = 3/2 * 2 = 3 downloaded equations
        assert_eq!(rec.downloaded_symbols, 3);
    }

    #[test]
    fn reconstruct_rejects_infeasible_strategy() {
        let mut s = Sampler::new(rat(), 3);
        let a = s.matrix(2, 2);
        let blocks = vec![vec![a.clone(), a.clone()], vec![a.clone(), a.clone()]];
        let code = MdsCode::new(4, 2, 1, rat(), blocks).unwrap();
        let r = s.full_column_rank(2, 1).unwrap();
        let strategy = RepairStrategy::new(1, vec![r.clone(), r]).unwrap();
        let nodes = encode(&code, &FileVector::zero(&code)).unwrap();
        let surviving: Vec<NodeContent> =
            nodes.into_iter().filter(|c| c.id != NodeId::Systematic(1)).collect();
        assert!(matches!(
            reconstruct(&code, &strategy, &surviving),
            Err(Error::InfeasibleStrategy)
        ));
    }

    #[test]
    fn reconstruct_detects_corrupted_contents() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        let mut s = Sampler::new(rat(), 78);
        let file = FileVector::random(&code, &mut s);
        let nodes = encode(&code, &file).unwrap();
        let mut surviving: Vec<NodeContent> =
            nodes.into_iter().filter(|c| c.id != NodeId::Systematic(1)).collect();
        // corrupt the first parity entry
        let corrupted = surviving
            .iter_mut()
            .find(|c| c.id == NodeId::Parity(1))
            .unwrap();
        let bumped = corrupted
            .data
            .add(&Matrix::from_i64(rat(), 2, 1, &[1, 0]).unwrap())
            .unwrap();
        corrupted.data = bumped;
        assert!(matches!(
            reconstruct(&code, &strategy, &surviving),
            Err(Error::InconsistentContents)
        ));
    }

    #[test]
    fn exhaustive_search_4_2_1_gf5() {
        let code = generate_random_code(4, 2, 1, &gf(5), 7).unwrap();
        let (strategy, report) = search_optimal_repair(
            &code,
            1,
            SearchMode::Exhaustive { budget: DEFAULT_SEARCH_BUDGET },
        )
        .unwrap();
        assert!(report.feasible);
        assert_eq!(report.interference_ranks.iter().sum::<usize>(), 1);
        assert_eq!(
            report.overhead,
            Some(BigRational::new(3.into(), 2.into()))
        );
        assert!(repair_feasible(&code, &strategy).unwrap());
    }

    #[test]
    fn single_parity_search_has_overhead_k() {
        // n-k = 1: no alignment possible, delta = k
        let code = generate_random_code(3, 2, 1, &gf(3), 2).unwrap();
        let (_, report) = search_optimal_repair(
            &code,
            1,
            SearchMode::Exhaustive { budget: DEFAULT_SEARCH_BUDGET },
        )
        .unwrap();
        assert_eq!(report.overhead, Some(BigRational::from_integer(2.into())));
    }

    #[test]
    fn search_budget_guard() {
        let code = generate_random_code(6, 3, 2, &gf(7), 1).unwrap();
        let err = search_optimal_repair(
            &code,
            1,
            SearchMode::Exhaustive { budget: DEFAULT_SEARCH_BUDGET },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn randomized_search_matches_exhaustive_on_small_field() {
        let code = generate_random_code(4, 2, 1, &gf(5), 9).unwrap();
        let (_, exhaustive) = search_optimal_repair(
            &code,
            1,
            SearchMode::Exhaustive { budget: DEFAULT_SEARCH_BUDGET },
        )
        .unwrap();
        let (_, randomized) = search_optimal_repair(
            &code,
            1,
            SearchMode::Randomized { trials: 200, seed: 5 },
        )
        .unwrap();
        assert_eq!(exhaustive.overhead, randomized.overhead);
    }

    #[test]
    fn overhead_identity_and_bounds_for_random_feasible_strategies() {
        let code = generate_random_code(5, 3, 1, &rat(), 19).unwrap();
        let m = code.block_side();
        let mut found = 0;
        for seed in 0..30 {
            let mut s = Sampler::new(rat(), 400 + seed);
            let mats: Vec<Matrix> = (0..2).map(|_| s.full_column_rank(m, 1).unwrap()).collect();
            let strategy = RepairStrategy::new(2, mats).unwrap();
            let Ok((delta, report)) = repair_overhead(&code, &strategy) else {
                continue;
            };
            found += 1;
            let sum: usize = report.interference_ranks.iter().sum();
            // delta * m = m + sum exactly
            assert_eq!(
                delta.clone() * BigRational::from_integer(m.into()),
                BigRational::from_integer((m + sum).into())
            );
            assert!(delta >= BigRational::from_integer(1.into()));
            assert!(delta <= BigRational::from_integer((code.k() as i64).into()));
            for &r in &report.interference_ranks {
                assert!(r <= m);
            }
        }
        assert!(found >= 20);
    }

    #[test]
    fn overhead_invariant_under_column_basis_change() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        let (delta, _) = repair_overhead(&code, &strategy).unwrap();
        // right-multiply every R^(p) by the same invertible 1x1
        let twist = Matrix::from_i64(rat(), 1, 1, &[5]).unwrap();
        let twisted: Vec<Matrix> = strategy
            .matrices()
            .iter()
            .map(|r| r.mul(&twist).unwrap())
            .collect();
        let twisted = RepairStrategy::new(1, twisted).unwrap();
        let (delta2, _) = repair_overhead(&code, &twisted).unwrap();
        assert_eq!(delta, delta2);
    }

    #[test]
    fn overhead_invariant_under_parity_relabeling() {
        // swapping the two parities in both the code and the strategy
        // leaves every measured rank unchanged
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13);
        let (delta, _) = repair_overhead(&code, &strategy).unwrap();

        let swapped_blocks: Vec<Vec<Matrix>> = code
            .blocks()
            .iter()
            .map(|row| vec![row[1].clone(), row[0].clone()])
            .collect();
        let swapped_code = MdsCode::new(4, 2, 1, rat(), swapped_blocks).unwrap();
        let swapped_strategy = RepairStrategy::new(
            1,
            vec![strategy.matrix(2).clone(), strategy.matrix(1).clone()],
        )
        .unwrap();
        let (delta2, _) = repair_overhead(&swapped_code, &swapped_strategy).unwrap();
        assert_eq!(delta, delta2);
    }

    #[test]
    fn strategy_json_round_trip() {
        let code = generate_random_code(4, 2, 1, &gf(5), 7).unwrap();
        let strategy = aligned_strategy(&code, 1, 13).with_provenance(Provenance {
            construction: "inverse-alignment".into(),
            seed: 13,
            delta: None,
        });
        let text = serde_json::to_string(&strategy).unwrap();
        let back: RepairStrategy = serde_json::from_str(&text).unwrap();
        assert_eq!(strategy, back);
    }
}
