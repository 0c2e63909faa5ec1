//! Explicit alignment constructions: inverse-based repair and beamforming
//! for the two-piece / single-eavesdropper cases, and symbol-extension
//! beamforming where the aligned directions are products of powers of the
//! eavesdropper (or interference) blocks applied to one random vector.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::domain::{clamp_nonneg, ScalarDomain};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mds::{permuted_piece_order, MdsCode};
use crate::repair::{repair_overhead, RepairReport, RepairStrategy};
use crate::sample::{Sampler, RESAMPLE_RETRY_BOUND};
use crate::wiretap::{legit_stack, BeamformingSet, ChannelInstance, Structure};
use crate::Provenance;

/// Repair of one of two systematic pieces by routing a shared random block
/// through the inverses of the other piece's coding blocks:
/// R_i^(p) = (A_u^(p))^-1 W. The interference space collapses to the column
/// space of W, so its rank is exactly beta.
pub fn inverse_alignment_repair(code: &MdsCode, i: usize, seed: u64) -> Result<RepairStrategy> {
    if code.k() != 2 {
        return Err(Error::InvalidParameter(format!(
            "inverse-alignment repair needs k = 2, got k = {}",
            code.k()
        )));
    }
    if i < 1 || i > 2 {
        return Err(Error::IndexOutOfRange(format!("systematic node {i}")));
    }
    let u = if i == 1 { 2 } else { 1 };
    let parities = code.n() - code.k();
    let mut inverses = Vec::with_capacity(parities);
    for p in 1..=parities {
        let inv = code
            .block(u, p)
            .inverse()
            .map_err(|_| Error::SingularBlock { piece: u, parity: p })?;
        inverses.push(inv);
    }

    let mut sampler = Sampler::new(code.domain().clone(), seed);
    for _ in 0..RESAMPLE_RETRY_BOUND {
        let w = sampler.full_column_rank(code.block_side(), code.beta())?;
        let mats: Vec<Matrix> = inverses
            .iter()
            .map(|inv| inv.mul(&w))
            .collect::<Result<_>>()?;
        let strategy = RepairStrategy::new(i, mats)?.with_provenance(Provenance {
            construction: "inverse-alignment".into(),
            seed,
            delta: None,
        });
        if crate::repair::repair_feasible(code, &strategy)? {
            return Ok(strategy);
        }
    }
    Err(Error::GenerationFailed(RESAMPLE_RETRY_BOUND))
}

/// Beamforming against a single eavesdropper: V^(l) = (H_e1^(l))^-1 W makes
/// every eavesdropper observation equal to W, rank N, while the legitimate
/// stack stays full rank generically.
pub fn inverse_alignment_beamforming(chan: &ChannelInstance, seed: u64) -> Result<BeamformingSet> {
    if chan.receivers() != 2 {
        return Err(Error::InvalidParameter(format!(
            "inverse-alignment beamforming needs K = 2, got K = {}",
            chan.receivers()
        )));
    }
    let mut inverses = Vec::with_capacity(chan.users());
    for l in 1..=chan.users() {
        let inv = chan
            .eave(1, l)
            .inverse()
            .map_err(|_| Error::SingularChannel { user: l })?;
        inverses.push(inv);
    }

    let mut sampler = Sampler::new(chan.domain().clone(), seed);
    for _ in 0..RESAMPLE_RETRY_BOUND {
        let w = sampler.full_column_rank(chan.side(), chan.symbols())?;
        let mats: Vec<Matrix> = inverses
            .iter()
            .map(|inv| inv.mul(&w))
            .collect::<Result<_>>()?;
        let set = BeamformingSet::new(mats)?.with_provenance(Provenance {
            construction: "inverse-alignment".into(),
            seed,
            delta: None,
        });
        if legit_stack(chan, &set)?.rank() == chan.side() {
            return Ok(set);
        }
    }
    Err(Error::GenerationFailed(RESAMPLE_RETRY_BOUND))
}

/// Dimensions of a symbol-extension construction: N = Delta^((K-1)L)
/// aligned directions out of L*N extended channel uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolExtensionPlan {
    pub users: usize,
    pub receivers: usize,
    pub delta: u32,
    /// Columns of the shared beamforming matrix: Delta^((K-1)L).
    pub directions: usize,
    /// Extended block side: L * Delta^((K-1)L).
    pub side: usize,
}

impl SymbolExtensionPlan {
    pub fn new(users: usize, receivers: usize, delta: u32) -> Result<Self> {
        if users < 1 || receivers < 2 || delta < 1 {
            return Err(Error::InvalidParameter(format!(
                "need L >= 1, K >= 2, delta >= 1; got L={users}, K={receivers}, delta={delta}"
            )));
        }
        let exponents = (receivers - 1) * users;
        let directions = (delta as usize)
            .checked_pow(exponents as u32)
            .filter(|d| users.checked_mul(*d).is_some())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "delta^((K-1)L) = {delta}^{exponents} overflows"
                ))
            })?;
        Ok(SymbolExtensionPlan {
            users,
            receivers,
            delta,
            directions,
            side: users * directions,
        })
    }

    /// Exponent tuples, one per column, indexed by (slot, eavesdropper)
    /// pairs with the slot index outer. Columns are enumerated in odometer
    /// order: the last exponent varies fastest.
    pub fn exponent_grid(&self) -> Vec<Vec<u32>> {
        let positions = (self.receivers - 1) * self.users;
        let mut grid = Vec::with_capacity(self.directions);
        let mut current = vec![1u32; positions];
        loop {
            grid.push(current.clone());
            let mut pos = positions;
            loop {
                if pos == 0 {
                    return grid;
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] <= self.delta {
                    break;
                }
                current[pos] = 1;
            }
        }
    }
}

/// Builds the shared aligned matrix: columns are
/// (prod over slots and harmful rows of block^exponent) * w.
/// `blocks[slot][row]` must be square, commuting (diagonal) matrices.
fn aligned_directions(
    plan: &SymbolExtensionPlan,
    blocks: &[Vec<&Matrix>],
    w: &Matrix,
) -> Result<Matrix> {
    let mut columns = Vec::with_capacity(plan.directions);
    for exponents in plan.exponent_grid() {
        let mut col = w.clone();
        let mut pos = 0;
        for slot_blocks in blocks {
            for block in slot_blocks {
                col = block.pow(exponents[pos])?.mul(&col)?;
                pos += 1;
            }
        }
        columns.push(col);
    }
    let refs: Vec<&Matrix> = columns.iter().collect();
    Matrix::hstack(&refs)
}

/// Symbol-extension beamforming on a diagonal channel: every user transmits
/// along the same Delta^((K-1)L) product directions, which the eavesdropper
/// observations only shift to higher powers.
pub fn symbol_extension_beamforming(
    chan: &ChannelInstance,
    delta: u32,
    seed: u64,
) -> Result<BeamformingSet> {
    if chan.structure() != Structure::Diagonal {
        return Err(Error::InvalidParameter(
            "symbol extension needs a diagonal channel".into(),
        ));
    }
    let plan = SymbolExtensionPlan::new(chan.users(), chan.receivers(), delta)?;
    if chan.symbols() != plan.directions {
        return Err(Error::DimensionMismatch {
            expected: format!("N = delta^((K-1)L) = {}", plan.directions),
            got: format!("N = {}", chan.symbols()),
        });
    }
    warn_if_small_field(chan.domain(), &plan);

    // blocks[l'][v] = H_ev^(l'), matching the exponent grid layout
    let blocks: Vec<Vec<&Matrix>> = (1..=chan.users())
        .map(|l| (1..=chan.eavesdroppers()).map(|v| chan.eave(v, l)).collect())
        .collect();

    let mut sampler = Sampler::new(chan.domain().clone(), seed);
    for _ in 0..RESAMPLE_RETRY_BOUND {
        let w = sampler.vector(chan.side());
        let shared = aligned_directions(&plan, &blocks, &w)?;
        if shared.rank() == plan.directions {
            let mats = vec![shared; chan.users()];
            return Ok(BeamformingSet::new(mats)?.with_provenance(Provenance {
                construction: "symbol-extension".into(),
                seed,
                delta: Some(delta),
            }));
        }
    }
    Err(Error::RankDeficient)
}

/// The guaranteed achievable S-DoF of the symbol-extension construction:
/// [L delta^((K-1)L) - (delta+1)^((K-1)L)]+ / (L delta^((K-1)L)),
/// monotone in delta toward (L-1)/L.
pub fn eq13_guarantee(users: usize, receivers: usize, delta: u32) -> Result<BigRational> {
    if users < 1 || receivers < 2 || delta < 1 {
        return Err(Error::InvalidParameter(format!(
            "need L >= 1, K >= 2, delta >= 1; got L={users}, K={receivers}, delta={delta}"
        )));
    }
    let exponents = ((receivers - 1) * users) as u32;
    let aligned = BigInt::from(delta).pow(exponents);
    let spread = BigInt::from(delta + 1).pow(exponents);
    let total = BigInt::from(users) * &aligned;
    Ok(clamp_nonneg(BigRational::new(&total - spread, total)))
}

/// The same product construction on the storage side: all parities share
/// R_i^(p) built from powers of the interference blocks A_u^(p), u != i.
/// Requires a diagonal-block code with beta = delta^((k-1)(n-k)).
pub fn symbol_extension_repair(
    code: &MdsCode,
    i: usize,
    delta: u32,
    seed: u64,
) -> Result<(RepairStrategy, RepairReport)> {
    if !code.has_diagonal_blocks() {
        return Err(Error::InvalidParameter(
            "symbol extension needs a diagonal-block code".into(),
        ));
    }
    if i < 1 || i > code.k() {
        return Err(Error::IndexOutOfRange(format!("systematic node {i}")));
    }
    let plan = SymbolExtensionPlan::new(code.n() - code.k(), code.k(), delta)?;
    if code.beta() != plan.directions {
        return Err(Error::DimensionMismatch {
            expected: format!("beta = delta^((k-1)(n-k)) = {}", plan.directions),
            got: format!("beta = {}", code.beta()),
        });
    }
    warn_if_small_field(code.domain(), &plan);

    // blocks[p'][u] = A_u^(p') for u != i, in the block order of P_i
    let interference: Vec<usize> = permuted_piece_order(code.k(), i)
        .into_iter()
        .skip(1)
        .collect();
    let blocks: Vec<Vec<&Matrix>> = (1..=code.n() - code.k())
        .map(|p| interference.iter().map(|&u| code.block(u, p)).collect())
        .collect();

    let mut sampler = Sampler::new(code.domain().clone(), seed);
    for _ in 0..RESAMPLE_RETRY_BOUND {
        let w = sampler.vector(code.block_side());
        let shared = aligned_directions(&plan, &blocks, &w)?;
        if shared.rank() == plan.directions {
            let mats = vec![shared; code.n() - code.k()];
            let strategy = RepairStrategy::new(i, mats)?.with_provenance(Provenance {
                construction: "symbol-extension".into(),
                seed,
                delta: Some(delta),
            });
            let (_, report) = repair_overhead(code, &strategy)?;
            return Ok((strategy, report));
        }
    }
    Err(Error::RankDeficient)
}

fn warn_if_small_field(domain: &ScalarDomain, plan: &SymbolExtensionPlan) {
    if let ScalarDomain::PrimeField { p } = domain {
        let spread = (plan.delta as u128 + 1)
            .checked_pow(((plan.receivers - 1) * plan.users) as u32)
            .unwrap_or(u128::MAX);
        let wanted = 2u128.saturating_mul(spread).saturating_mul(plan.side as u128);
        if (*p as u128) < wanted {
            log::warn!(
                "GF({p}) is small for a delta={} symbol extension (general position wants p >= {wanted})",
                plan.delta
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::{generate_diagonal_code, generate_random_code};
    use crate::repair::interference_matrix;
    use crate::wiretap::{eaves_stack, generate_random_channel, sdof};
    use num_traits::Zero;

    fn rat() -> ScalarDomain {
        ScalarDomain::rational()
    }

    #[test]
    fn inverse_repair_4_2_1_reaches_cut_set() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let strategy = inverse_alignment_repair(&code, 1, 70).unwrap();
        // all interference products equal the same W
        let w = code.block(2, 1).mul(strategy.matrix(1)).unwrap();
        for p in 1..=2 {
            assert_eq!(code.block(2, p).mul(strategy.matrix(p)).unwrap(), w);
        }
        assert_eq!(interference_matrix(&code, &strategy, 2).unwrap().rank(), 1);
        let (delta, _) = repair_overhead(&code, &strategy).unwrap();
        assert_eq!(delta, BigRational::new(3.into(), 2.into()));
    }

    #[test]
    fn inverse_repair_6_2_2_reaches_cut_set() {
        let code = generate_random_code(6, 2, 2, &rat(), 8).unwrap();
        let strategy = inverse_alignment_repair(&code, 2, 71).unwrap();
        assert_eq!(interference_matrix(&code, &strategy, 1).unwrap().rank(), 2);
        let (delta, _) = repair_overhead(&code, &strategy).unwrap();
        // (n-1)/(n-k) = 5/4
        assert_eq!(delta, BigRational::new(5.into(), 4.into()));
    }

    #[test]
    fn inverse_repair_rejects_singular_block() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        let mut blocks = code.blocks().to_vec();
        blocks[1][0] = Matrix::from_i64(rat(), 2, 2, &[1, 2, 2, 4]).unwrap();
        let planted = MdsCode::new(4, 2, 1, rat(), blocks).unwrap();
        assert!(matches!(
            inverse_alignment_repair(&planted, 1, 70),
            Err(Error::SingularBlock { piece: 2, parity: 1 })
        ));
    }

    #[test]
    fn inverse_repair_requires_two_pieces() {
        let code = generate_random_code(5, 3, 1, &rat(), 7).unwrap();
        assert!(inverse_alignment_repair(&code, 1, 70).is_err());
    }

    #[test]
    fn inverse_beamforming_3_1_2() {
        let chan = generate_random_channel(3, 1, 2, &rat(), 72, Structure::Generic).unwrap();
        let set = inverse_alignment_beamforming(&chan, 73).unwrap();
        let report = sdof(&chan, &set).unwrap();
        assert_eq!(report.eta, BigRational::new(2.into(), 3.into()));
        assert!(report.meets_outer_bound);
    }

    #[test]
    fn inverse_beamforming_2_3_2() {
        let chan = generate_random_channel(2, 3, 2, &rat(), 74, Structure::Generic).unwrap();
        let set = inverse_alignment_beamforming(&chan, 75).unwrap();
        let report = sdof(&chan, &set).unwrap();
        assert_eq!(report.legit_rank, 6);
        assert_eq!(report.eaves_ranks, vec![3]);
        assert_eq!(report.eta, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn inverse_beamforming_rejects_singular_channel() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 76, Structure::Generic).unwrap();
        let mut eaves = chan.eave_rows().to_vec();
        eaves[0][0] = Matrix::from_i64(rat(), 2, 2, &[1, 1, 1, 1]).unwrap();
        let planted = ChannelInstance::new(
            2,
            1,
            2,
            rat(),
            chan.legit_blocks().to_vec(),
            eaves,
            Structure::Generic,
        )
        .unwrap();
        assert!(matches!(
            inverse_alignment_beamforming(&planted, 77),
            Err(Error::SingularChannel { user: 1 })
        ));
    }

    #[test]
    fn plan_dimensions_and_grid() {
        let plan = SymbolExtensionPlan::new(2, 2, 3).unwrap();
        assert_eq!(plan.directions, 9);
        assert_eq!(plan.side, 18);
        let grid = plan.exponent_grid();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], vec![1, 1]);
        assert_eq!(grid[1], vec![1, 2]);
        assert_eq!(grid[8], vec![3, 3]);
    }

    #[test]
    fn symbol_extension_delta_one_is_single_product_column() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 80, Structure::Diagonal).unwrap();
        let set = symbol_extension_beamforming(&chan, 1, 81).unwrap();
        assert_eq!(set.matrix(1), set.matrix(2));
        // the lone column is H_e1^(1) H_e1^(2) w
        let mut s = Sampler::new(rat(), 81);
        let w = s.vector(2);
        let expected = chan
            .eave(1, 2)
            .mul(&chan.eave(1, 1).mul(&w).unwrap())
            .unwrap();
        assert_eq!(set.matrix(1), &expected);
    }

    #[test]
    fn symbol_extension_delta_two_ranks() {
        // L=2, K=2, delta=2: N=4, LN=8
        let chan = generate_random_channel(2, 4, 2, &rat(), 82, Structure::Diagonal).unwrap();
        let set = symbol_extension_beamforming(&chan, 2, 83).unwrap();
        let report = sdof(&chan, &set).unwrap();
        assert_eq!(report.legit_rank, 8);
        assert!(report.max_eaves_rank() <= 9);
        assert!(report.eta >= eq13_guarantee(2, 2, 2).unwrap());
        // the eavesdropper stack spans shifted power products
        let stack = eaves_stack(&chan, &set, 1).unwrap();
        assert!(stack.rank() >= 4);
    }

    #[test]
    fn symbol_extension_requires_diagonal_channel() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 84, Structure::Generic).unwrap();
        assert!(matches!(
            symbol_extension_beamforming(&chan, 1, 85),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn symbol_extension_dimension_check() {
        // N = 2 but delta=2 needs N = 4
        let chan = generate_random_channel(2, 2, 2, &rat(), 86, Structure::Diagonal).unwrap();
        assert!(matches!(
            symbol_extension_beamforming(&chan, 2, 87),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eq13_values() {
        assert_eq!(
            eq13_guarantee(2, 2, 3).unwrap(),
            BigRational::new(1.into(), 9.into())
        );
        assert!(eq13_guarantee(1, 2, 5).unwrap().is_zero());
        // monotone toward (L-1)/L
        let g10 = eq13_guarantee(2, 2, 10).unwrap();
        let g100 = eq13_guarantee(2, 2, 100).unwrap();
        let bound = BigRational::new(1.into(), 2.into());
        assert!(g10 < g100);
        assert!(g100 < bound);
        assert!(bound.clone() - g100 < bound - g10);
    }

    #[test]
    fn symbol_extension_repair_delta_one() {
        let code = generate_diagonal_code(4, 2, 1, &rat(), 88).unwrap();
        let (strategy, report) = symbol_extension_repair(&code, 1, 1, 89).unwrap();
        assert_eq!(strategy.matrices().len(), 2);
        assert!(report.feasible);
        let delta = report.overhead.clone().unwrap();
        assert!(delta <= BigRational::from_integer(2.into()));
    }

    #[test]
    fn symbol_extension_repair_delta_two_bound() {
        // (4,2) with beta = 4: delta <= 1 + 9/8
        let code = generate_diagonal_code(4, 2, 4, &rat(), 90).unwrap();
        let (_, report) = symbol_extension_repair(&code, 1, 2, 91).unwrap();
        let delta = report.overhead.clone().unwrap();
        assert!(delta <= BigRational::new(17.into(), 8.into()));
        assert!(report.interference_ranks[0] <= 9);
        // guarantee mirrors the channel-side formula
        let eta_min = eq13_guarantee(2, 2, 2).unwrap();
        let eta_measured = BigRational::new(
            BigInt::from(8 - report.interference_ranks[0] as i64),
            BigInt::from(8),
        );
        assert!(eta_measured >= eta_min);
    }

    #[test]
    fn symbol_extension_repair_rejects_generic_code() {
        let code = generate_random_code(4, 2, 1, &rat(), 7).unwrap();
        assert!(matches!(
            symbol_extension_repair(&code, 1, 1, 92),
            Err(Error::InvalidParameter(_))
        ));
    }
}
