//! Multiple-access compound wiretap channels at desk scale: S-DoF as a
//! normalized rank difference, the (L-1)/L outer bound, exhaustive
//! beamforming search, and finite-SNR secrecy rates from log-determinants.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::domain::{clamp_nonneg, rat_str, Scalar, ScalarDomain};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sample::Sampler;
use crate::search::{self, Objective, RankProblem};
use crate::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Generic,
    Diagonal,
}

/// An (L, N)^(K-1) multiple-access compound wiretap channel: L users send N
/// symbols each towards one legitimate receiver while K-1 eavesdroppers
/// listen. All channel blocks are square of side L*N.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    users: usize,
    symbols: usize,
    receivers: usize,
    domain: ScalarDomain,
    legit: Vec<Matrix>,
    eaves: Vec<Vec<Matrix>>,
    structure: Structure,
}

impl ChannelInstance {
    pub fn new(
        users: usize,
        symbols: usize,
        receivers: usize,
        domain: ScalarDomain,
        legit: Vec<Matrix>,
        eaves: Vec<Vec<Matrix>>,
        structure: Structure,
    ) -> Result<Self> {
        domain.validate()?;
        if users < 1 || symbols < 1 || receivers < 2 {
            return Err(Error::InvalidParameter(format!(
                "need L >= 1, N >= 1, K >= 2; got L={users}, N={symbols}, K={receivers}"
            )));
        }
        let side = users * symbols;
        if legit.len() != users {
            return Err(Error::DimensionMismatch {
                expected: format!("{users} legitimate blocks"),
                got: format!("{}", legit.len()),
            });
        }
        if eaves.len() != receivers - 1 {
            return Err(Error::DimensionMismatch {
                expected: format!("{} eavesdropper rows", receivers - 1),
                got: format!("{}", eaves.len()),
            });
        }
        let mut all: Vec<&Matrix> = legit.iter().collect();
        for row in &eaves {
            if row.len() != users {
                return Err(Error::DimensionMismatch {
                    expected: format!("{users} blocks per eavesdropper"),
                    got: format!("{}", row.len()),
                });
            }
            all.extend(row.iter());
        }
        for m in all {
            if m.rows() != side || m.cols() != side {
                return Err(Error::DimensionMismatch {
                    expected: format!("{side}x{side} channel blocks"),
                    got: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if m.domain() != &domain {
                return Err(Error::DomainMismatch(domain.clone(), m.domain().clone()));
            }
            if structure == Structure::Diagonal && !m.is_diagonal() {
                return Err(Error::InvalidParameter(
                    "diagonal structure tag on a non-diagonal block".into(),
                ));
            }
        }
        Ok(ChannelInstance { users, symbols, receivers, domain, legit, eaves, structure })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn eavesdroppers(&self) -> usize {
        self.receivers - 1
    }

    /// Side of every channel block: L*N.
    pub fn side(&self) -> usize {
        self.users * self.symbols
    }

    pub fn domain(&self) -> &ScalarDomain {
        &self.domain
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Legitimate block of user `l`, 1-based.
    pub fn legit(&self, l: usize) -> &Matrix {
        &self.legit[l - 1]
    }

    /// Block between user `l` and eavesdropper `v`, both 1-based.
    pub fn eave(&self, v: usize, l: usize) -> &Matrix {
        &self.eaves[v - 1][l - 1]
    }

    pub fn legit_blocks(&self) -> &[Matrix] {
        &self.legit
    }

    pub fn eave_rows(&self) -> &[Vec<Matrix>] {
        &self.eaves
    }

    pub fn to_float(&self, tolerance: f64) -> Result<ChannelInstance> {
        let legit = self
            .legit
            .iter()
            .map(|m| m.to_float(tolerance))
            .collect::<Result<_>>()?;
        let eaves = self
            .eaves
            .iter()
            .map(|row| row.iter().map(|m| m.to_float(tolerance)).collect())
            .collect::<Result<_>>()?;
        ChannelInstance::new(
            self.users,
            self.symbols,
            self.receivers,
            ScalarDomain::float(tolerance)?,
            legit,
            eaves,
            self.structure,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    #[serde(rename = "L")]
    users: usize,
    #[serde(rename = "N")]
    symbols: usize,
    #[serde(rename = "K")]
    receivers: usize,
    structure: Structure,
    domain: ScalarDomain,
    legit: Vec<Matrix>,
    eaves: Vec<Vec<Matrix>>,
}

impl Serialize for ChannelInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelRepr {
            users: self.users,
            symbols: self.symbols,
            receivers: self.receivers,
            structure: self.structure,
            domain: self.domain.clone(),
            legit: self.legit.clone(),
            eaves: self.eaves.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChannelInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ChannelRepr::deserialize(d)?;
        ChannelInstance::new(
            r.users, r.symbols, r.receivers, r.domain, r.legit, r.eaves, r.structure,
        )
        .map_err(D::Error::custom)
    }
}

/// The L beamforming matrices, each L*N x N with full column rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamformingSet {
    mats: Vec<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl BeamformingSet {
    pub fn new(mats: Vec<Matrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidParameter("no beamforming matrices".into()));
        }
        let (rows, cols) = (mats[0].rows(), mats[0].cols());
        for m in &mats {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::DimensionMismatch {
                    expected: format!("{rows}x{cols}"),
                    got: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if m.domain() != mats[0].domain() {
                return Err(Error::DomainMismatch(
                    mats[0].domain().clone(),
                    m.domain().clone(),
                ));
            }
            if m.rank() != m.cols() {
                return Err(Error::RankDeficient);
            }
        }
        Ok(BeamformingSet { mats, provenance: None })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Beamforming matrix of user `l`, 1-based.
    pub fn matrix(&self, l: usize) -> &Matrix {
        &self.mats[l - 1]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn to_float(&self, tolerance: f64) -> Result<BeamformingSet> {
        let mats = self
            .mats
            .iter()
            .map(|m| m.to_float(tolerance))
            .collect::<Result<_>>()?;
        BeamformingSet::new(mats)
    }

    fn check_against(&self, chan: &ChannelInstance) -> Result<()> {
        if self.mats.len() != chan.users() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} beamforming matrices", chan.users()),
                got: format!("{}", self.mats.len()),
            });
        }
        for m in &self.mats {
            if m.rows() != chan.side() || m.cols() != chan.symbols() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{}x{} beamforming matrices", chan.side(), chan.symbols()),
                    got: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if m.domain() != chan.domain() {
                return Err(Error::DomainMismatch(
                    chan.domain().clone(),
                    m.domain().clone(),
                ));
            }
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for BeamformingSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            mats: Vec<Matrix>,
            #[serde(default)]
            provenance: Option<Provenance>,
        }
        let r = Repr::deserialize(d)?;
        let mut b = BeamformingSet::new(r.mats).map_err(D::Error::custom)?;
        if let Some(p) = r.provenance {
            b = b.with_provenance(p);
        }
        Ok(b)
    }
}

/// Ranks and the resulting total S-DoF of one beamforming choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdofReport {
    pub legit_rank: usize,
    pub eaves_ranks: Vec<usize>,
    #[serde(with = "rat_str")]
    pub eta: BigRational,
    #[serde(with = "rat_str")]
    pub outer_bound: BigRational,
    pub meets_outer_bound: bool,
}

impl SdofReport {
    pub fn max_eaves_rank(&self) -> usize {
        self.eaves_ranks.iter().copied().max().unwrap_or(0)
    }
}

/// Draws a channel with i.i.d. blocks (all entries for generic structure,
/// diagonals only for diagonal structure).
pub fn generate_random_channel(
    users: usize,
    symbols: usize,
    receivers: usize,
    domain: &ScalarDomain,
    seed: u64,
    structure: Structure,
) -> Result<ChannelInstance> {
    if users < 1 || symbols < 1 || receivers < 2 {
        return Err(Error::InvalidParameter(format!(
            "need L >= 1, N >= 1, K >= 2; got L={users}, N={symbols}, K={receivers}"
        )));
    }
    let side = users * symbols;
    let mut sampler = Sampler::new(domain.clone(), seed);
    let draw = |sampler: &mut Sampler| match structure {
        Structure::Generic => sampler.matrix(side, side),
        Structure::Diagonal => sampler.diagonal_matrix(side),
    };
    let legit: Vec<Matrix> = (0..users).map(|_| draw(&mut sampler)).collect();
    let eaves: Vec<Vec<Matrix>> = (0..receivers - 1)
        .map(|_| (0..users).map(|_| draw(&mut sampler)).collect())
        .collect();
    ChannelInstance::new(users, symbols, receivers, domain.clone(), legit, eaves, structure)
}

/// The stacked legitimate signal space [H^(1)V^(1) ... H^(L)V^(L)].
pub fn legit_stack(chan: &ChannelInstance, v: &BeamformingSet) -> Result<Matrix> {
    v.check_against(chan)?;
    stack(chan.legit_blocks(), v)
}

/// The stacked observation space of eavesdropper `ev`, 1-based.
pub fn eaves_stack(chan: &ChannelInstance, v: &BeamformingSet, ev: usize) -> Result<Matrix> {
    v.check_against(chan)?;
    if ev < 1 || ev > chan.eavesdroppers() {
        return Err(Error::IndexOutOfRange(format!("eavesdropper {ev}")));
    }
    stack(&chan.eave_rows()[ev - 1], v)
}

fn stack(blocks: &[Matrix], v: &BeamformingSet) -> Result<Matrix> {
    let products: Vec<Matrix> = blocks
        .iter()
        .zip(v.matrices())
        .map(|(h, b)| h.mul(b))
        .collect::<Result<_>>()?;
    let refs: Vec<&Matrix> = products.iter().collect();
    Matrix::hstack(&refs)
}

/// Total S-DoF of a beamforming choice:
/// eta = [legit_rank - max_v eaves_rank]+ / (L*N).
pub fn sdof(chan: &ChannelInstance, v: &BeamformingSet) -> Result<SdofReport> {
    let legit_rank = legit_stack(chan, v)?.rank();
    let eaves_ranks: Vec<usize> = (1..=chan.eavesdroppers())
        .map(|ev| eaves_stack(chan, v, ev).map(|m| m.rank()))
        .collect::<Result<_>>()?;
    let max_eaves = eaves_ranks.iter().copied().max().unwrap_or(0);
    let diff = BigInt::from(legit_rank) - BigInt::from(max_eaves);
    let eta = clamp_nonneg(BigRational::new(diff, BigInt::from(chan.side())));
    let bound = outer_bound(chan.users())?;
    Ok(SdofReport {
        legit_rank,
        eaves_ranks,
        meets_outer_bound: eta == bound,
        eta,
        outer_bound: bound,
    })
}

/// The universal S-DoF cap (L-1)/L.
pub fn outer_bound(users: usize) -> Result<BigRational> {
    if users < 1 {
        return Err(Error::InvalidParameter("need L >= 1".into()));
    }
    Ok(BigRational::new(
        BigInt::from(users as i64 - 1),
        BigInt::from(users),
    ))
}

/// Full outcome of an exhaustive beamforming search.
pub struct BeamformingSearchOutcome {
    pub min_max_rank: usize,
    /// All optimal beamforming tuples as canonical representatives.
    pub optima: Vec<Vec<Matrix>>,
}

/// Minimizes the worst eavesdropper rank subject to the legitimate stack
/// spanning all L*N dimensions; prime fields only.
pub fn search_optimal_beamforming(
    chan: &ChannelInstance,
    budget: u64,
) -> Result<(BeamformingSet, SdofReport)> {
    let outcome = exhaustive_beamforming_search(chan, budget)?;
    let mats = outcome.optima.into_iter().next().expect("nonempty optima");
    let set = BeamformingSet::new(mats)?;
    let report = sdof(chan, &set)?;
    Ok((set, report))
}

/// Exhaustive beamforming search keeping every optimal tuple.
pub fn exhaustive_beamforming_search(
    chan: &ChannelInstance,
    budget: u64,
) -> Result<BeamformingSearchOutcome> {
    let useful: Vec<&Matrix> = chan.legit_blocks().iter().collect();
    let harmful: Vec<Vec<&Matrix>> = chan
        .eave_rows()
        .iter()
        .map(|row| row.iter().collect())
        .collect();
    let problem = RankProblem {
        useful,
        harmful,
        m: chan.side(),
        dim: chan.symbols(),
    };
    match search::exhaustive(&problem, Objective::MaxRank, budget) {
        Ok(out) => Ok(BeamformingSearchOutcome { min_max_rank: out.objective, optima: out.optima }),
        Err(Error::NoFeasibleStrategy) => Err(Error::NoFeasibleBeamforming),
        Err(e) => Err(e),
    }
}

/// Perfect-secrecy rate in bits per channel use at finite SNR: the clamped
/// difference of the legitimate log-det term and the worst eavesdropper
/// log-det term. Beamforming columns are orthonormalized and scaled to meet
/// the per-user power constraint before evaluation.
pub fn secrecy_rate(
    chan: &ChannelInstance,
    v: &BeamformingSet,
    power: f64,
    noise_var: f64,
) -> Result<f64> {
    if !(power > 0.0) || !(noise_var > 0.0) {
        return Err(Error::InvalidParameter(
            "power and noise variance must be positive".into(),
        ));
    }
    let ScalarDomain::Float { tolerance } = *chan.domain() else {
        return Err(Error::InvalidParameter(
            "secrecy_rate requires the float domain".into(),
        ));
    };
    v.check_against(chan)?;

    let scale = (power / chan.symbols() as f64).sqrt();
    let normalized: Vec<Matrix> = v
        .matrices()
        .iter()
        .map(|m| orthonormal_columns(m, tolerance).map(|q| scale_matrix(&q, scale)))
        .collect::<Result<_>>()?;
    let v_norm = BeamformingSet::new(normalized)?;

    let legit = half_logdet_bits(&legit_stack(chan, &v_norm)?, noise_var)?;
    let mut worst = f64::NEG_INFINITY;
    for ev in 1..=chan.eavesdroppers() {
        let rate = half_logdet_bits(&eaves_stack(chan, &v_norm, ev)?, noise_var)?;
        worst = worst.max(rate);
    }
    Ok((legit - worst).max(0.0))
}

/// Secrecy rate normalized by (1/2) log2(P/sigma^2): converges to the rank
/// difference behind the S-DoF as the power grows.
pub fn empirical_dof(
    chan: &ChannelInstance,
    v: &BeamformingSet,
    power: f64,
    noise_var: f64,
) -> Result<f64> {
    let prelog = 0.5 * (power / noise_var).log2();
    if prelog <= 0.0 {
        return Err(Error::InvalidParameter(
            "empirical dof needs P > sigma^2".into(),
        ));
    }
    Ok(secrecy_rate(chan, v, power, noise_var)? / prelog)
}

/// (1/2) log2 det(I + (1/sigma^2) G G^T) via Cholesky.
fn half_logdet_bits(g: &Matrix, noise_var: f64) -> Result<f64> {
    let n = g.rows();
    let mut gram = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for k in 0..g.cols() {
                acc += g.get(r, k).as_f64() * g.get(c, k).as_f64();
            }
            gram[r * n + c] = acc / noise_var;
            if r == c {
                gram[r * n + c] += 1.0;
            }
        }
    }
    let mut acc_bits = 0.0;
    // in-place Cholesky; the matrix is I + PSD, failure means corrupt input
    for j in 0..n {
        let mut d = gram[j * n + j];
        for k in 0..j {
            d -= gram[j * n + k] * gram[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let root = d.sqrt();
        gram[j * n + j] = root;
        acc_bits += root.log2();
        for i in j + 1..n {
            let mut v = gram[i * n + j];
            for k in 0..j {
                v -= gram[i * n + k] * gram[j * n + k];
            }
            gram[i * n + j] = v / root;
        }
    }
    Ok(acc_bits)
}

fn orthonormal_columns(m: &Matrix, tolerance: f64) -> Result<Matrix> {
    let rows = m.rows();
    let cols = m.cols();
    let mut col_data: Vec<Vec<f64>> = (0..cols)
        .map(|c| (0..rows).map(|r| m.get(r, c).as_f64()).collect())
        .collect();
    let scale = m.max_abs().max(1.0);
    for c in 0..cols {
        for prev in 0..c {
            let dot: f64 = (0..rows).map(|r| col_data[c][r] * col_data[prev][r]).sum();
            for r in 0..rows {
                col_data[c][r] -= dot * col_data[prev][r];
            }
        }
        let norm: f64 = (0..rows)
            .map(|r| col_data[c][r] * col_data[c][r])
            .sum::<f64>()
            .sqrt();
        if norm <= tolerance * scale {
            return Err(Error::RankDeficient);
        }
        for r in 0..rows {
            col_data[c][r] /= norm;
        }
    }
    Ok(Matrix::from_fn(m.domain().clone(), rows, cols, |r, c| {
        Scalar::Float(col_data[c][r])
    }))
}

fn scale_matrix(m: &Matrix, s: f64) -> Matrix {
    Matrix::from_fn(m.domain().clone(), m.rows(), m.cols(), |r, c| {
        Scalar::Float(m.get(r, c).as_f64() * s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_FLOAT_TOLERANCE;
    use num_traits::Zero;

    fn rat() -> ScalarDomain {
        ScalarDomain::rational()
    }

    fn gf(p: u64) -> ScalarDomain {
        ScalarDomain::prime_field(p).unwrap()
    }

    /// Shared-seed beamforming through the first eavesdropper's inverses:
    /// V^(l) = (H_e1^(l))^-1 W.
    fn inverse_beamforming(chan: &ChannelInstance, seed: u64) -> BeamformingSet {
        let mut s = Sampler::new(chan.domain().clone(), seed);
        let w = s.full_column_rank(chan.side(), chan.symbols()).unwrap();
        let mats: Vec<Matrix> = (1..=chan.users())
            .map(|l| chan.eave(1, l).inverse().unwrap().mul(&w).unwrap())
            .collect();
        BeamformingSet::new(mats).unwrap()
    }

    #[test]
    fn generate_shapes_2_1_2() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 4, Structure::Generic).unwrap();
        assert_eq!(chan.legit_blocks().len(), 2);
        assert_eq!(chan.eave_rows().len(), 1);
        assert_eq!(chan.side(), 2);
        assert_eq!(chan.legit(1).rows(), 2);
    }

    #[test]
    fn generate_diagonal_2_4_2() {
        let chan = generate_random_channel(2, 4, 2, &rat(), 4, Structure::Diagonal).unwrap();
        assert_eq!(chan.side(), 8);
        for l in 1..=2 {
            assert!(chan.legit(l).is_diagonal());
            assert!(chan.eave(1, l).is_diagonal());
        }
    }

    #[test]
    fn generate_is_seed_reproducible() {
        let a = generate_random_channel(2, 2, 3, &rat(), 9, Structure::Generic).unwrap();
        let b = generate_random_channel(2, 2, 3, &rat(), 9, Structure::Generic).unwrap();
        assert_eq!(a, b);
        let c = generate_random_channel(2, 2, 3, &rat(), 10, Structure::Generic).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn identity_beamforming_leaks_everything() {
        // V = first N columns of I: the eavesdropper stack is generically
        // full rank, so eta clamps to 0
        let chan = generate_random_channel(2, 2, 2, &rat(), 21, Structure::Generic).unwrap();
        let sel = Matrix::from_fn(rat(), 4, 2, |r, c| {
            if r == c {
                rat().one()
            } else {
                rat().zero()
            }
        });
        let v = BeamformingSet::new(vec![sel.clone(), sel]).unwrap();
        let report = sdof(&chan, &v).unwrap();
        assert_eq!(report.max_eaves_rank(), 4);
        assert!(report.eta.is_zero());
    }

    #[test]
    fn inverse_beamforming_meets_outer_bound() {
        // (L, 1)^1: eavesdropper sees [w ... w], rank 1
        let chan = generate_random_channel(3, 1, 2, &rat(), 30, Structure::Generic).unwrap();
        let v = inverse_beamforming(&chan, 31);
        let w = chan.eave(1, 1).mul(v.matrix(1)).unwrap();
        for l in 1..=3 {
            assert_eq!(chan.eave(1, l).mul(v.matrix(l)).unwrap(), w);
        }
        let report = sdof(&chan, &v).unwrap();
        assert_eq!(report.legit_rank, 3);
        assert_eq!(report.eaves_ranks, vec![1]);
        assert_eq!(report.eta, BigRational::new(2.into(), 3.into()));
        assert!(report.meets_outer_bound);
    }

    #[test]
    fn inverse_beamforming_matrix_case() {
        // (2, 3)^1: eaves rank N = 3, legit rank 6, eta = 1/2
        let chan = generate_random_channel(2, 3, 2, &rat(), 32, Structure::Generic).unwrap();
        let v = inverse_beamforming(&chan, 33);
        let report = sdof(&chan, &v).unwrap();
        assert_eq!(report.legit_rank, 6);
        assert_eq!(report.eaves_ranks, vec![3]);
        assert_eq!(report.eta, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn outer_bound_values() {
        assert_eq!(outer_bound(2).unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(outer_bound(1).unwrap().is_zero());
        assert_eq!(outer_bound(4).unwrap(), BigRational::new(3.into(), 4.into()));
        assert!(outer_bound(0).is_err());
    }

    #[test]
    fn single_user_eaves_block_has_full_symbol_rank() {
        // each H_ev^(l) V^(l) alone already has rank N, so the bound
        // eta <= (L-1)/L follows for full-column-rank beamforming
        let chan = generate_random_channel(2, 2, 3, &rat(), 40, Structure::Generic).unwrap();
        for seed in 0..5 {
            let mut s = Sampler::new(rat(), 500 + seed);
            let mats = vec![
                s.full_column_rank(4, 2).unwrap(),
                s.full_column_rank(4, 2).unwrap(),
            ];
            let v = BeamformingSet::new(mats).unwrap();
            for ev in 1..=2 {
                for l in 1..=2 {
                    let single = chan.eave(ev, l).mul(v.matrix(l)).unwrap();
                    assert_eq!(single.rank(), 2);
                }
            }
            let report = sdof(&chan, &v).unwrap();
            assert!(report.eta <= report.outer_bound);
        }
    }

    #[test]
    fn eta_invariant_under_basis_changes() {
        let chan = generate_random_channel(2, 2, 2, &rat(), 41, Structure::Generic).unwrap();
        let v = inverse_beamforming(&chan, 42);
        let base = sdof(&chan, &v).unwrap();

        // right-multiply each V^(l) by an invertible N x N matrix
        let t = Matrix::from_i64(rat(), 2, 2, &[1, 2, 1, 3]).unwrap();
        assert_eq!(t.rank(), 2);
        let twisted: Vec<Matrix> =
            v.matrices().iter().map(|m| m.mul(&t).unwrap()).collect();
        let v2 = BeamformingSet::new(twisted).unwrap();
        assert_eq!(sdof(&chan, &v2).unwrap().eta, base.eta);

        // left-multiply all blocks of one receiver by a shared invertible
        let mut s = Sampler::new(rat(), 43);
        let g = s.full_column_rank(4, 4).unwrap();
        let legit: Vec<Matrix> = chan
            .legit_blocks()
            .iter()
            .map(|h| g.mul(h).unwrap())
            .collect();
        let chan2 = ChannelInstance::new(
            2,
            2,
            2,
            rat(),
            legit,
            chan.eave_rows().to_vec(),
            Structure::Generic,
        )
        .unwrap();
        assert_eq!(sdof(&chan2, &v).unwrap().eta, base.eta);
    }

    #[test]
    fn search_small_gf5_channel() {
        let chan = generate_random_channel(2, 1, 2, &gf(5), 8, Structure::Generic).unwrap();
        let (set, report) = search_optimal_beamforming(&chan, 100_000_000).unwrap();
        assert_eq!(report.legit_rank, 2);
        assert!(report.max_eaves_rank() >= 1);
        assert_eq!(set.matrices().len(), 2);
    }

    #[test]
    fn shared_legit_eaves_block_floors_the_optimum() {
        // one user's eavesdropper block equals its legitimate block, so any
        // feasible beamforming leaks at least N dimensions
        let chan = generate_random_channel(2, 1, 2, &gf(5), 8, Structure::Generic).unwrap();
        let mut eaves = chan.eave_rows().to_vec();
        eaves[0][0] = chan.legit(1).clone();
        let planted = ChannelInstance::new(
            2,
            1,
            2,
            gf(5),
            chan.legit_blocks().to_vec(),
            eaves,
            Structure::Generic,
        )
        .unwrap();
        let (_, report) = search_optimal_beamforming(&planted, 100_000_000).unwrap();
        assert!(report.max_eaves_rank() >= 1);
    }

    #[test]
    fn search_budget_guard_on_large_instance() {
        let chan = generate_random_channel(2, 4, 2, &gf(7), 8, Structure::Generic).unwrap();
        assert!(matches!(
            search_optimal_beamforming(&chan, 100_000_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn secrecy_rate_zero_for_identical_observations() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 50, Structure::Generic).unwrap();
        let identical = ChannelInstance::new(
            2,
            1,
            2,
            rat(),
            chan.legit_blocks().to_vec(),
            vec![chan.legit_blocks().to_vec()],
            Structure::Generic,
        )
        .unwrap()
        .to_float(DEFAULT_FLOAT_TOLERANCE)
        .unwrap();
        let v = inverse_beamforming(&chan, 51)
            .to_float(DEFAULT_FLOAT_TOLERANCE)
            .unwrap();
        let rate = secrecy_rate(&identical, &v, 100.0, 1.0).unwrap();
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn secrecy_rate_unit_snr_sanity_bound() {
        let chan = generate_random_channel(2, 1, 2, &rat(), 52, Structure::Generic)
            .unwrap()
            .to_float(DEFAULT_FLOAT_TOLERANCE)
            .unwrap();
        let mut s = Sampler::new(ScalarDomain::float(DEFAULT_FLOAT_TOLERANCE).unwrap(), 53);
        let v = BeamformingSet::new(vec![
            s.full_column_rank(2, 1).unwrap(),
            s.full_column_rank(2, 1).unwrap(),
        ])
        .unwrap();
        let p = 1.0;
        let rate = secrecy_rate(&chan, &v, p, 1.0).unwrap();
        assert!(rate.is_finite());
        // Hadamard-style cap: rate <= (LN/2) log2(1 + P c / sigma^2)
        let stack = legit_stack(&chan, &v).unwrap();
        let frob2: f64 = (0..stack.rows())
            .flat_map(|r| (0..stack.cols()).map(move |c| (r, c)))
            .map(|(r, c)| stack.get(r, c).as_f64().powi(2))
            .sum();
        let cap = (chan.side() as f64 / 2.0) * (1.0 + p * frob2).log2();
        assert!(rate <= cap + 1e-9);
    }

    #[test]
    fn empirical_dof_scale_invariance_and_convergence() {
        let chan_rat = generate_random_channel(3, 1, 2, &rat(), 54, Structure::Generic).unwrap();
        let v_rat = inverse_beamforming(&chan_rat, 55);
        let report = sdof(&chan_rat, &v_rat).unwrap();
        assert_eq!(report.eta, BigRational::new(2.into(), 3.into()));

        let chan = chan_rat.to_float(DEFAULT_FLOAT_TOLERANCE).unwrap();
        let v = v_rat.to_float(DEFAULT_FLOAT_TOLERANCE).unwrap();
        let target = (report.legit_rank - report.max_eaves_rank()) as f64;

        let d1 = empirical_dof(&chan, &v, 1e6, 1.0).unwrap();
        let d2 = empirical_dof(&chan, &v, 1e9, 1.0).unwrap();
        let d3 = empirical_dof(&chan, &v, 1e12, 1.0).unwrap();
        assert!((d2 - target).abs() <= (d1 - target).abs());
        assert!((d3 - target).abs() <= (d2 - target).abs());

        // doubling both P and sigma^2 leaves the normalized rate unchanged
        let a = empirical_dof(&chan, &v, 2e6, 2.0).unwrap();
        assert!((a - d1).abs() < 1e-9);
    }

    #[test]
    fn sdof_agrees_between_rational_and_float_on_integer_instances() {
        // LN = 16: integer-entried blocks, exact and tolerance ranks match
        let int_matrix = |sampler: &mut Sampler, n: usize| {
            let ints = sampler.matrix(n, n);
            Matrix::from_fn(rat(), n, n, |r, c| {
                let Scalar::Rational(v) = ints.get(r, c) else { unreachable!() };
                Scalar::Rational(num_rational::BigRational::from_integer(v.numer().clone()))
            })
        };
        let mut s = Sampler::with_bound(rat(), 70, 10);
        let legit: Vec<Matrix> = (0..4).map(|_| int_matrix(&mut s, 16)).collect();
        let eaves = vec![(0..4).map(|_| int_matrix(&mut s, 16)).collect::<Vec<_>>()];
        let chan =
            ChannelInstance::new(4, 4, 2, rat(), legit, eaves, Structure::Generic).unwrap();
        let mats: Vec<Matrix> = (0..4)
            .map(|_| {
                let m = s.full_column_rank(16, 4).unwrap();
                Matrix::from_fn(rat(), 16, 4, |r, c| {
                    let Scalar::Rational(v) = m.get(r, c) else { unreachable!() };
                    Scalar::Rational(num_rational::BigRational::from_integer(v.numer().clone()))
                })
            })
            .collect();
        let v = BeamformingSet::new(mats).unwrap();
        let exact = sdof(&chan, &v).unwrap();
        let float = sdof(
            &chan.to_float(DEFAULT_FLOAT_TOLERANCE).unwrap(),
            &v.to_float(DEFAULT_FLOAT_TOLERANCE).unwrap(),
        )
        .unwrap();
        assert_eq!(exact.legit_rank, float.legit_rank);
        assert_eq!(exact.eaves_ranks, float.eaves_ranks);
        assert_eq!(exact.eta, float.eta);
    }

    #[test]
    fn channel_json_round_trip() {
        let chan = generate_random_channel(2, 1, 3, &gf(5), 60, Structure::Generic).unwrap();
        let text = serde_json::to_string(&chan).unwrap();
        assert!(text.contains("\"L\":2"));
        assert!(text.contains("\"K\":3"));
        let back: ChannelInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(chan, back);
    }
}
