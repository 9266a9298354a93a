//! Seeded generation of the data model `x ~ N(0, I_d)`, `y = <x, beta> + N(0, sigma^2)`.
//!
//! The streams are fully specified so any implementation can reproduce them:
//!
//! * Seeding: the four xoshiro256** state words are successive SplitMix64
//!   outputs starting from the 64-bit seed.
//! * Uniform stream: xoshiro256** (`rotl(s1 * 5, 7) * 9`).
//! * `u in (0, 1]` is `((next >> 11) + 1) * 2^-53`, `v in [0, 1)` is
//!   `(next >> 11) * 2^-53`.
//! * Normals: Box–Muller on `(u, v)`; `sqrt(-2 ln u) cos(2 pi v)` is returned
//!   first and `sqrt(-2 ln u) sin(2 pi v)` second.
//! * Matrices are filled row by row, so row `i` is sample `x_i`.
//!
//! Per-trial seeds come from [`derive_seed`], which depends only on
//! `(base_seed, n, trial)` and never on execution order.

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Tag used in place of `n` when deriving the seed that draws `beta`.
pub const BETA_STREAM: u64 = u64::MAX;

/// SplitMix64 output function applied to `z + GOLDEN_GAMMA`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `seed_trial = splitmix64(splitmix64(splitmix64(base) ^ n) ^ trial)`.
pub fn derive_seed(base_seed: u64, n: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ n) ^ trial)
}

/// xoshiro256** generator with a Box–Muller normal cache.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    s: [u64; 4],
    spare: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        let mut z = seed;
        let mut s = [0u64; 4];
        for word in &mut s {
            *word = splitmix64(z);
            z = z.wrapping_add(GOLDEN_GAMMA);
        }
        Self { seed, s, spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * f64::EPSILON / 2.0
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * f64::EPSILON / 2.0
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u = self.next_open_f64();
        let v = self.next_f64();
        let r = (-2.0 * u.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * v;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    /// `beta = beta_norm * e_1`.
    #[default]
    FirstAxis,
    /// `beta = beta_norm * u` for a uniformly random unit vector `u`.
    RandomUnit,
}

impl std::str::FromStr for BetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-axis" => Ok(Self::FirstAxis),
            "random-unit" => Ok(Self::RandomUnit),
            other => Err(Error::InvalidConfig(format!(
                "unknown beta mode `{other}` (expected first-axis or random-unit)"
            ))),
        }
    }
}

impl std::fmt::Display for BetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FirstAxis => "first-axis",
            Self::RandomUnit => "random-unit",
        })
    }
}

/// Parameters of the ground-truth distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub sigma: f64,
    pub beta_norm: f64,
    pub beta_mode: BetaMode,
}

impl ModelSpec {
    pub fn new(d: usize, sigma: f64, beta_norm: f64, beta_mode: BetaMode) -> Result<Self> {
        let spec = Self {
            d,
            sigma,
            beta_norm,
            beta_mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if !(self.beta_norm >= 0.0 && self.beta_norm.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta_norm must be finite and non-negative, got {}",
                self.beta_norm
            )));
        }
        Ok(())
    }
}

/// One sampled training set.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub x: Matrix,
    pub y: Vector,
    pub eta: Option<Vector>,
}

impl DataSet {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }
}

pub fn make_beta(spec: &ModelSpec, rng: &mut RngState) -> Vector {
    let d = spec.d;
    match spec.beta_mode {
        BetaMode::FirstAxis => {
            let mut beta = Vector::zeros(d);
            beta[0] = spec.beta_norm;
            beta
        }
        BetaMode::RandomUnit => loop {
            let dir = Vector::from_fn(d, |_, _| rng.next_normal());
            let norm = dir.norm();
            if norm > 0.0 {
                break dir * (spec.beta_norm / norm);
            }
        },
    }
}

/// `beta` for a whole experiment, drawn from the stream reserved by [`BETA_STREAM`].
pub fn experiment_beta(spec: &ModelSpec, base_seed: u64) -> Vector {
    let mut rng = RngState::new(derive_seed(base_seed, BETA_STREAM, 0));
    make_beta(spec, &mut rng)
}

pub fn sample_gaussian_matrix(rng: &mut RngState, n: usize, d: usize) -> Matrix {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        data.push(rng.next_normal());
    }
    Matrix::from_row_slice(n, d, &data)
}

pub fn sample_gaussian_vector(rng: &mut RngState, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.next_normal())
}

/// Draws `eta ~ N(0, sigma^2 I_n)` and returns `(X beta + eta, eta)`.
pub fn sample_response(
    rng: &mut RngState,
    x: &Matrix,
    beta: &Vector,
    sigma: f64,
) -> Result<(Vector, Vector)> {
    if x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch {
            what: "beta length vs columns of X",
            expected: x.ncols(),
            got: beta.len(),
        });
    }
    let eta = Vector::from_fn(x.nrows(), |_, _| sigma * rng.next_normal());
    let y = x * beta + &eta;
    Ok((y, eta))
}

/// Draws `X` then `eta` from `rng` in that order.
pub fn sample_dataset(rng: &mut RngState, spec: &ModelSpec, beta: &Vector, n: usize) -> Result<DataSet> {
    let x = sample_gaussian_matrix(rng, n, spec.d);
    let (y, eta) = sample_response(rng, &x, beta, spec.sigma)?;
    Ok(DataSet { x, y, eta: Some(eta) })
}
