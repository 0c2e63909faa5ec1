//! The code/channel dictionary: a code with a failed node reads as a
//! compound wiretap channel (interference pieces become eavesdroppers) and
//! vice versa, with repair strategies transporting verbatim to beamforming
//! sets. Includes the bound calculators relating overhead and S-DoF, and
//! executable equivalence checks for the two optimization problems.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{clamp_nonneg, rat_str};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mds::{self, MdsCode};
use crate::repair::{self, RepairStrategy};
use crate::wiretap::{self, BeamformingSet, ChannelInstance, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingDirection {
    CodeToChannel,
    ChannelToCode,
}

/// Book-keeping for one mapping: the parameter identification
/// (n, k, beta) <-> (L, N, K) with L = n-k, N = beta, K = k, the node the
/// mapping pivots on, and the MDS status of a mapped code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRecord {
    pub direction: MappingDirection,
    pub n: usize,
    pub k: usize,
    pub beta: usize,
    #[serde(rename = "L")]
    pub users: usize,
    #[serde(rename = "N")]
    pub symbols: usize,
    #[serde(rename = "K")]
    pub receivers: usize,
    /// Failed node the mapping is anchored at (always 1 for channel-to-code).
    pub node: usize,
    /// Outcome of the MDS check on a mapped code; absent in the
    /// code-to-channel direction.
    pub mds_verified: Option<bool>,
}

/// Reads the code as the channel seen when repairing node i: the permuted
/// block grid P_i A provides the legitimate blocks (piece i's row) and one
/// eavesdropper per interference piece, ordered v = u for u < i and
/// v = u - 1 for u > i.
pub fn code_to_channel(code: &MdsCode, i: usize) -> Result<(ChannelInstance, MappingRecord)> {
    if code.k() < 2 {
        return Err(Error::InvalidParameter(
            "code-to-channel mapping needs k >= 2 (at least one interference piece)".into(),
        ));
    }
    let grid = mds::permuted_block_grid(code, i)?;
    let legit = grid[0].clone();
    let eaves: Vec<Vec<Matrix>> = grid[1..].to_vec();
    let structure = if code.has_diagonal_blocks() {
        Structure::Diagonal
    } else {
        Structure::Generic
    };
    let chan = ChannelInstance::new(
        code.n() - code.k(),
        code.beta(),
        code.k(),
        code.domain().clone(),
        legit,
        eaves,
        structure,
    )?;
    let record = MappingRecord {
        direction: MappingDirection::CodeToChannel,
        n: code.n(),
        k: code.k(),
        beta: code.beta(),
        users: code.n() - code.k(),
        symbols: code.beta(),
        receivers: code.k(),
        node: i,
        mds_verified: None,
    };
    Ok((chan, record))
}

/// Reads the channel as an (L+K, K)_N code: the legitimate blocks become
/// piece 1 (the node to repair), each eavesdropper an interference piece.
/// The MDS property is checked and reported, not assumed.
pub fn channel_to_code(chan: &ChannelInstance) -> Result<(MdsCode, MappingRecord)> {
    if !chan.domain().is_exact() {
        return Err(Error::InvalidParameter(
            "channel-to-code mapping needs an exact domain".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(chan.receivers());
    blocks.push(chan.legit_blocks().to_vec());
    for row in chan.eave_rows() {
        blocks.push(row.clone());
    }
    let code = MdsCode::new(
        chan.users() + chan.receivers(),
        chan.receivers(),
        chan.symbols(),
        chan.domain().clone(),
        blocks,
    )?;
    let mds_ok = mds::is_mds(&code);
    if !mds_ok {
        log::warn!("mapped code is not MDS; downstream repair guarantees do not apply");
    }
    let record = MappingRecord {
        direction: MappingDirection::ChannelToCode,
        n: chan.users() + chan.receivers(),
        k: chan.receivers(),
        beta: chan.symbols(),
        users: chan.users(),
        symbols: chan.symbols(),
        receivers: chan.receivers(),
        node: 1,
        mds_verified: Some(mds_ok),
    };
    Ok((code, record))
}

/// Transports a repair strategy onto the mapped channel: V^(l) = R_i^(l).
pub fn strategy_to_beamforming(strategy: &RepairStrategy) -> Result<BeamformingSet> {
    BeamformingSet::new(strategy.matrices().to_vec())
}

/// Transports a beamforming set onto the mapped code: R_1^(l) = V^(l).
pub fn beamforming_to_strategy(set: &BeamformingSet) -> Result<RepairStrategy> {
    RepairStrategy::new(1, set.matrices().to_vec())
}

/// S-DoF achievable on the channel mapped from a code repaired with
/// overhead delta: at least [2 - delta]+ and at most (k - delta)/(k - 1).
pub fn lemma3_bounds(k: usize, delta: &BigRational) -> Result<(BigRational, BigRational)> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "bounds need k >= 2 (the mapped channel has k - 1 eavesdroppers)".into(),
        ));
    }
    let two = BigRational::from_integer(2.into());
    let low = clamp_nonneg(two - delta);
    let high = (BigRational::from_integer(BigInt::from(k)) - delta)
        / BigRational::from_integer(BigInt::from(k - 1));
    Ok((low, high))
}

/// Overhead of repairing node 1 of the code mapped from a channel with
/// S-DoF eta: at least 2 - eta and at most 1 + (K-1)(1-eta).
pub fn lemma5_bounds(receivers: usize, eta: &BigRational) -> Result<(BigRational, BigRational)> {
    if receivers < 2 {
        return Err(Error::InvalidParameter("bounds need K >= 2".into()));
    }
    if eta < &BigRational::zero() || eta > &BigRational::one() {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
    }
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let low = two - eta;
    let high = &one + BigRational::from_integer(BigInt::from(receivers - 1)) * (&one - eta);
    Ok((low, high))
}

/// Outcome of running both exhaustive searches on a mapped pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// Minimum total interference rank of the repair problem.
    pub min_sum_rank: usize,
    /// Minimum worst-eavesdropper rank of the beamforming problem.
    pub min_max_rank: usize,
    /// Whether min_sum_rank = (k-1) * min_max_rank.
    pub objectives_match: bool,
    /// Whether the optimal representative sets coincide under transport.
    pub optimal_sets_coincide: bool,
    /// Whether the instance meets the theorem's hypothesis: a code whose
    /// exhaustive optimum reaches (k-1)*beta, or a channel achieving
    /// (L-1)/L (worst rank N).
    pub hypothesis_met: bool,
    /// Whether both optima sit at the alignment bound ((k-1)*beta and beta).
    pub optima_at_bound: bool,
    /// Transported-strategy consistency: the S-DoF / overhead of the first
    /// optimum agrees with the rank arithmetic on the other side.
    pub transport_consistent: bool,
    pub repair_optima_count: usize,
    pub beamforming_optima_count: usize,
    /// delta* = 1 + min_sum_rank/((n-k)beta).
    #[serde(with = "rat_str")]
    pub optimal_overhead: BigRational,
    /// eta* = [(n-k)beta - min_max_rank]+/((n-k)beta).
    #[serde(with = "rat_str")]
    pub optimal_sdof: BigRational,
}

/// Runs the exhaustive repair search on (code, i) and the exhaustive
/// beamforming search on the mapped channel, then compares objectives and
/// optimal sets. Exact equality throughout.
pub fn verify_theorem1(code: &MdsCode, i: usize, budget: u64) -> Result<TheoremReport> {
    let repair_out = repair::exhaustive_repair_search(code, i, budget)?;
    let (chan, _) = code_to_channel(code, i)?;
    let beam_out = wiretap::exhaustive_beamforming_search(&chan, budget)?;

    let k = code.k();
    let m = code.block_side();
    let hypothesis_met = repair_out.min_sum_rank == (k - 1) * code.beta();

    // Lemma-4 style consistency of the first repair optimum under transport
    let strategy = RepairStrategy::new(i, repair_out.optima[0].clone())?;
    let report = repair::evaluate(code, &strategy)?;
    let transported = strategy_to_beamforming(&strategy)?;
    let sdof_report = wiretap::sdof(&chan, &transported)?;
    let max_rank = report.interference_ranks.iter().copied().max().unwrap_or(0);
    let expected_eta = clamp_nonneg(BigRational::new(
        BigInt::from(m as i64 - max_rank as i64),
        BigInt::from(m),
    ));
    let transport_consistent = report.feasible && sdof_report.eta == expected_eta;

    Ok(assemble_report(
        repair_out.min_sum_rank,
        beam_out.min_max_rank,
        repair_out.optima,
        beam_out.optima,
        k,
        code.beta(),
        m,
        hypothesis_met,
        transport_consistent,
    ))
}

/// Mirror of [`verify_theorem1`]: beamforming search on the channel, repair
/// search at node 1 of the mapped code.
pub fn verify_theorem2(chan: &ChannelInstance, budget: u64) -> Result<TheoremReport> {
    let beam_out = wiretap::exhaustive_beamforming_search(chan, budget)?;
    let (code, _) = channel_to_code(chan)?;
    let repair_out = repair::exhaustive_repair_search(&code, 1, budget)?;

    let k = chan.receivers();
    let m = chan.side();
    let hypothesis_met = beam_out.min_max_rank == chan.symbols();

    // Lemma-6 style consistency of the first beamforming optimum
    let set = BeamformingSet::new(beam_out.optima[0].clone())?;
    let sdof_report = wiretap::sdof(chan, &set)?;
    let transported = beamforming_to_strategy(&set)?;
    let (delta, _) = repair::repair_overhead(&code, &transported)?;
    let rank_sum: usize = sdof_report.eaves_ranks.iter().sum();
    let expected_delta = BigRational::one()
        + BigRational::new(BigInt::from(rank_sum), BigInt::from(m));
    let transport_consistent =
        sdof_report.legit_rank == m && delta == expected_delta;

    Ok(assemble_report(
        repair_out.min_sum_rank,
        beam_out.min_max_rank,
        repair_out.optima,
        beam_out.optima,
        k,
        chan.symbols(),
        m,
        hypothesis_met,
        transport_consistent,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    min_sum_rank: usize,
    min_max_rank: usize,
    repair_optima: Vec<Vec<Matrix>>,
    beam_optima: Vec<Vec<Matrix>>,
    k: usize,
    beta: usize,
    m: usize,
    hypothesis_met: bool,
    transport_consistent: bool,
) -> TheoremReport {
    let objectives_match = min_sum_rank == (k - 1) * min_max_rank;
    let optimal_sets_coincide = repair_optima == beam_optima;
    let optima_at_bound =
        min_sum_rank == (k - 1) * beta && min_max_rank == beta;
    let optimal_overhead = BigRational::one()
        + BigRational::new(BigInt::from(min_sum_rank), BigInt::from(m));
    let optimal_sdof = clamp_nonneg(BigRational::new(
        BigInt::from(m as i64 - min_max_rank as i64),
        BigInt::from(m),
    ));
    TheoremReport {
        min_sum_rank,
        min_max_rank,
        objectives_match,
        optimal_sets_coincide,
        hypothesis_met,
        optima_at_bound,
        transport_consistent,
        repair_optima_count: repair_optima.len(),
        beamforming_optima_count: beam_optima.len(),
        optimal_overhead,
        optimal_sdof,
    }
}
