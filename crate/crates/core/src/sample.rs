//! Seeded, reproducible sampling of scalars and matrices.
//!
//! Rationals are drawn with numerator in `[-B, B]` and denominator in
//! `[1, B]`; prime-field elements uniformly. The same seed always yields the
//! same stream.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{Scalar, ScalarDomain};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default bound B for rational sampling.
pub const DEFAULT_RATIONAL_BOUND: u32 = 97;

/// How many times generators re-draw before giving up.
pub const RESAMPLE_RETRY_BOUND: u32 = 64;

pub struct Sampler {
    rng: ChaCha8Rng,
    domain: ScalarDomain,
    bound: i64,
}

impl Sampler {
    pub fn new(domain: ScalarDomain, seed: u64) -> Self {
        Self::with_bound(domain, seed, DEFAULT_RATIONAL_BOUND)
    }

    pub fn with_bound(domain: ScalarDomain, seed: u64, bound: u32) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            domain,
            bound: bound.max(1) as i64,
        }
    }

    pub fn domain(&self) -> &ScalarDomain {
        &self.domain
    }

    pub fn scalar(&mut self) -> Scalar {
        match self.domain {
            ScalarDomain::PrimeField { p } => Scalar::Fp(self.rng.gen_range(0..p)),
            ScalarDomain::Rational => Scalar::Rational(self.rational()),
            ScalarDomain::Float { .. } => {
                let numer = self.rng.gen_range(-self.bound..=self.bound);
                let denom = self.rng.gen_range(1..=self.bound);
                Scalar::Float(numer as f64 / denom as f64)
            }
        }
    }

    pub fn nonzero_scalar(&mut self) -> Scalar {
        loop {
            let s = self.scalar();
            if !self.domain.is_zero(&s) {
                return s;
            }
        }
    }

    fn rational(&mut self) -> BigRational {
        let numer = self.rng.gen_range(-self.bound..=self.bound);
        let denom = self.rng.gen_range(1..=self.bound);
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let entries = (0..rows * cols).map(|_| self.scalar()).collect();
        Matrix::new(self.domain.clone(), rows, cols, entries)
            .expect("sampled entries are canonical")
    }

    /// Square diagonal matrix with nonzero diagonal entries.
    pub fn diagonal_matrix(&mut self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(self.domain.clone(), n, n);
        for i in 0..n {
            let v = self.nonzero_scalar();
            m.set(i, i, v);
        }
        m
    }

    /// Column vector of length `len`.
    pub fn vector(&mut self, len: usize) -> Matrix {
        self.matrix(len, 1)
    }

    /// Random matrix re-drawn until it has full column rank.
    pub fn full_column_rank(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        for _ in 0..RESAMPLE_RETRY_BOUND {
            let m = self.matrix(rows, cols);
            if m.rank() == cols {
                return Ok(m);
            }
        }
        Err(Error::GenerationFailed(RESAMPLE_RETRY_BOUND))
    }
}
