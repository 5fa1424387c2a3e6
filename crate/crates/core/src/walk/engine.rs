use super::{MeasureSpec, WalkError};
use crate::arith::{BigRational, PAdicTrunc, ZInvP};
use crate::group::{SemiDirectElement, TriangularMatrix};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// Name of the generator behind every sampled trajectory.
pub const RNG_IDENTITY: &str = "ChaCha20Rng (rand_chacha 0.3, seed_from_u64)";

pub const DEFAULT_AUDIT_EVERY: u64 = 500;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkConfig {
    pub steps: u64,
    pub seed: u64,
    /// Steps at which a state is recorded, in addition to audits and the final step.
    pub checkpoints: Vec<u64>,
    /// Exact snapshots are kept at multiples of this and at the final step.
    pub audit_every: u64,
    pub padic_precision: u32,
}

impl WalkConfig {
    pub fn new(steps: u64, seed: u64) -> Self {
        WalkConfig {
            steps,
            seed,
            checkpoints: Vec::new(),
            audit_every: DEFAULT_AUDIT_EVERY,
            padic_precision: PAdicTrunc::DEFAULT_PRECISION,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_audit_every(mut self, every: u64) -> Self {
        self.audit_every = every;
        self
    }

    fn records(&self, m: u64) -> bool {
        self.is_audit(m) || self.checkpoints.binary_search(&m).is_ok()
    }

    fn is_audit(&self, m: u64) -> bool {
        m == self.steps || (self.audit_every > 0 && m % self.audit_every == 0)
    }
}

/// (y^(m), φ^(m)) at a recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub m: u64,
    pub y: Vec<i64>,
    /// Exact φ^(m), present at audit steps.
    pub phi: Option<TriangularMatrix>,
    pub phi_shadow: Vec<Vec<f64>>,
    pub padic_shadow: Vec<Vec<PAdicTrunc>>,
}

impl WalkState {
    pub fn element(&self, p: u64) -> Option<SemiDirectElement> {
        let phi = self.phi.clone()?;
        Some(SemiDirectElement::from_parts_unchecked(p, self.y.clone(), phi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub p: u64,
    pub seed: u64,
    pub states: Vec<WalkState>,
}

impl Trajectory {
    pub fn state_at(&self, m: u64) -> Option<&WalkState> {
        self.states
            .binary_search_by_key(&m, |s| s.m)
            .ok()
            .map(|k| &self.states[k])
    }

    pub fn last(&self) -> &WalkState {
        self.states.last().expect("trajectories always record the final step")
    }
}

/// Inverse-CDF sampler over the support, thresholds ⌊F_k · 2^64⌋ against a uniform u64.
#[derive(Debug, Clone)]
pub struct Sampler {
    thresholds: Vec<u128>,
}

impl Sampler {
    pub fn new(mu: &MeasureSpec) -> Self {
        let mut cum = BigRational::zero();
        let scale = BigInt::one() << 64;
        let thresholds = mu
            .support()
            .iter()
            .map(|(_, w)| {
                cum += w;
                let t: BigInt = (cum.numer() * &scale) / cum.denom();
                t.to_u128().expect("cumulative mass ≤ 1")
            })
            .collect();
        Sampler { thresholds }
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> usize {
        let u = rng.next_u64() as u128;
        self.thresholds.partition_point(|&t| t <= u)
    }
}

/// The support indices drawn by a walk with this seed, in order.
pub fn sample_indices(mu: &MeasureSpec, steps: u64, seed: u64) -> Vec<usize> {
    let sampler = Sampler::new(mu);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..steps).map(|_| sampler.sample(&mut rng)).collect()
}

struct Increment {
    x: Vec<i64>,
    f: Vec<Vec<ZInvP>>,
    f_shadow: Vec<Vec<f64>>,
    f_padic: Vec<Vec<PAdicTrunc>>,
}

struct Engine {
    n: usize,
    p: u64,
    y: Vec<i64>,
    phi: Vec<Vec<ZInvP>>,
    shadow: Vec<Vec<f64>>,
    padic: Vec<Vec<PAdicTrunc>>,
}

impl Engine {
    fn new(start: &SemiDirectElement, precision: u32) -> Self {
        let (n, p) = (start.n(), start.prime());
        let f = start.f();
        let phi = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| ZInvP::from_rational(f.get(i, j), p).expect("Z[1/p]"))
                    .collect()
            })
            .collect();
        let shadow = (0..n)
            .map(|i| (0..n).map(|j| crate::arith::q_to_f64(f.get(i, j))).collect())
            .collect();
        let padic = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| PAdicTrunc::from_rational(f.get(i, j), p, precision))
                    .collect()
            })
            .collect();
        Engine {
            n,
            p,
            y: start.x().to_vec(),
            phi,
            shadow,
            padic,
        }
    }

    /// φ ← φ ζ_y(f), y ← y + x. Columns are updated right to left so every
    /// φ_ik read for column j is still the previous step's value.
    fn step(&mut self, g: &Increment) {
        let (n, p) = (self.n, self.p);
        for j in (1..n).rev() {
            for i in 0..j {
                let mut acc = self.phi[i][j].clone();
                let mut acc_f = self.shadow[i][j];
                let mut acc_p = self.padic[i][j].clone();
                for k in i..j {
                    if g.f[k][j].is_zero() || self.phi[i][k].is_zero() {
                        continue;
                    }
                    let s = self.y[k] - self.y[j];
                    acc = acc.add(&self.phi[i][k].mul(&g.f[k][j]).shift(s), p);
                    acc_f += self.shadow[i][k] * g.f_shadow[k][j] * (p as f64).powf(s as f64);
                    let term = crate::arith::trunc_mul(&self.padic[i][k], &g.f_padic[k][j])
                        .expect("same prime")
                        .shift(s);
                    acc_p = acc_p.add_lossy(&term);
                }
                self.phi[i][j] = acc;
                self.shadow[i][j] = acc_f;
                self.padic[i][j] = acc_p;
            }
        }
        for (a, b) in self.y.iter_mut().zip(&g.x) {
            *a += b;
        }
    }

    fn snapshot(&self, m: u64, exact: bool) -> WalkState {
        let phi = exact.then(|| {
            TriangularMatrix::from_raw(
                self.phi
                    .iter()
                    .map(|row| row.iter().map(|z| z.to_rational(self.p)).collect())
                    .collect(),
            )
        });
        WalkState {
            m,
            y: self.y.clone(),
            phi,
            phi_shadow: self.shadow.clone(),
            padic_shadow: self.padic.clone(),
        }
    }
}

fn increments(mu: &MeasureSpec, precision: u32) -> Vec<Increment> {
    let p = mu.prime();
    mu.support()
        .iter()
        .map(|(g, _)| {
            let n = g.n();
            let entry = |i: usize, j: usize| g.f().get(i, j);
            Increment {
                x: g.x().to_vec(),
                f: (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| ZInvP::from_rational(entry(i, j), p).expect("Z[1/p]"))
                            .collect()
                    })
                    .collect(),
                f_shadow: (0..n)
                    .map(|i| (0..n).map(|j| crate::arith::q_to_f64(entry(i, j))).collect())
                    .collect(),
                f_padic: (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| PAdicTrunc::from_rational(entry(i, j), p, precision))
                            .collect()
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Right random walk started at the identity.
pub fn run_walk(mu: &MeasureSpec, cfg: &WalkConfig) -> Result<Trajectory, WalkError> {
    run_walk_from(&SemiDirectElement::identity(mu.n(), mu.prime()), mu, cfg)
}

/// Right random walk started at `start`: X_m = start · g_1 ⋯ g_m.
pub fn run_walk_from(start: &SemiDirectElement, mu: &MeasureSpec, cfg: &WalkConfig) -> Result<Trajectory, WalkError> {
    if cfg.steps == 0 {
        return Err(WalkError::BadArgument("steps must be at least 1".into()));
    }
    if start.n() != mu.n() || start.prime() != mu.prime() {
        return Err(WalkError::BadArgument(
            "start element and measure disagree on n or p".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.checkpoints.sort_unstable();
    cfg.checkpoints.dedup();
    if let Some(&c) = cfg.checkpoints.last() {
        if c > cfg.steps {
            return Err(WalkError::BadArgument(format!(
                "checkpoint {c} exceeds {} steps",
                cfg.steps
            )));
        }
    }
    let incs = increments(mu, cfg.padic_precision);
    let sampler = Sampler::new(mu);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut engine = Engine::new(start, cfg.padic_precision);
    let mut states = Vec::new();
    if cfg.records(0) {
        states.push(engine.snapshot(0, cfg.is_audit(0)));
    }
    for m in 1..=cfg.steps {
        engine.step(&incs[sampler.sample(&mut rng)]);
        if cfg.records(m) {
            states.push(engine.snapshot(m, cfg.is_audit(m)));
        }
    }
    Ok(Trajectory {
        n: mu.n(),
        p: mu.prime(),
        seed: cfg.seed,
        states,
    })
}

/// One independent walk per seed, fanned out over the rayon pool.
pub fn run_seeds(mu: &MeasureSpec, base: &WalkConfig, seeds: &[u64]) -> Result<Vec<Trajectory>, WalkError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = WalkConfig { seed, ..base.clone() };
            run_walk(mu, &cfg)
        })
        .collect()
}

/// |y^(m)_i / m − mean_i| for each coordinate at the final recorded step.
pub fn drift_deviation(traj: &Trajectory, mu: &MeasureSpec) -> Vec<f64> {
    let last = traj.last();
    let m = last.m as f64;
    last.y
        .iter()
        .zip(mu.means())
        .map(|(&y, mean)| (y as f64 / m - crate::arith::q_to_f64(&mean)).abs())
        .collect()
}
