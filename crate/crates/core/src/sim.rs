//! Monte Carlo simulation of a planar martingale `X` driven by a conformal
//! `Y`.
//!
//! `Y` is planar Brownian motion, `dY = dW`, so `d<Y_1> = d<Y_2> = dt` and
//! `d<Y_1, Y_2> = 0`. `X` moves by `dX = M dW`, where the rows of the control
//! matrix `M` are `grad X_1` and `grad X_2`. Every strategy except `Frozen`
//! keeps `|M|_F = 1`, which meets both the right-side constraint
//! `d<X> <= d<Y_1>` and the left-side constraint `d<Y_1> <= d<X>` with
//! equality.
//!
//! Each path draws from its own ChaCha stream selected by the path index,
//! and aggregation is an ordered sequential reduction, so results do not
//! depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::{BellmanProfile, Side};
use crate::error::{Error, Result};
use crate::laguerre::Order;

/// States whose norm exceeds this are treated as overflow.
const STATE_CAP: f64 = 1e30;
/// Path-level batches used for the standard error of the ratio.
const RATIO_BATCHES: usize = 100;

type Matrix = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Strategy {
    /// `M` uniform on the unit Frobenius sphere, independent of the state.
    RandomAdmissible,
    /// `dX = -x_hat (y_hat . dW)`: `|X|` moves against the radial part of
    /// `Y`. This is the control that makes `U(X, Y)` driftless on the
    /// Laguerre branch.
    ZeroDrift,
    /// Among `n_candidates` random controls plus the zero-drift control,
    /// pick the one maximizing the Ito drift of `V_c(X, Y)`.
    GreedyAdversarial { c: f64, n_candidates: usize },
    /// `M = 0`. Only admissible on the right side.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartPoint {
    pub x0: [f64; 2],
    pub y0: [f64; 2],
}

impl StartPoint {
    /// `y0 = (y_norm, 0)` and `x0 = (x_norm, 0)` with `|y0| / (|x0| + |y0|) = s`.
    pub fn on_section(s: f64, y_norm: f64) -> Self {
        StartPoint {
            x0: [y_norm * (1.0 - s) / s, 0.0],
            y0: [y_norm, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub p: f64,
    pub side: Side,
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub start: StartPoint,
    /// Step indices at which `U(X, Y)` is recorded.
    pub checkpoints: Vec<usize>,
}

impl SimConfig {
    /// Defaults: 10^4 paths, 10^3 steps of 10^-3, seed 0, random controls,
    /// start on the section `s = z_p` with `|y0| = 1` (so `U(x0, y0) = 0`),
    /// eleven evenly spaced checkpoints.
    pub fn new(p: f64) -> Result<Self> {
        let profile = BellmanProfile::new(p)?;
        let n_steps = 1000;
        Ok(SimConfig {
            p,
            side: profile.side,
            n_paths: 10_000,
            n_steps,
            dt: 1e-3,
            seed: 0,
            strategy: Strategy::RandomAdmissible,
            start: StartPoint::on_section(profile.z_p(), 1.0),
            checkpoints: even_checkpoints(n_steps, 10),
        })
    }

    pub fn validate(&self) -> Result<()> {
        Order::new(self.p)?;
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.side != Side::for_order(self.p) {
            return bad(format!("side {:?} does not match p = {}", self.side, self.p));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        let norm = |v: [f64; 2]| v[0].hypot(v[1]);
        if norm(self.start.x0) == 0.0 && norm(self.start.y0) == 0.0 {
            return bad("start point must not be the origin".into());
        }
        if self.checkpoints.iter().any(|&c| c > self.n_steps) {
            return bad("checkpoint beyond the last step".into());
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing".into());
        }
        match self.strategy {
            Strategy::Frozen if self.side == Side::LeftConformal => {
                bad("frozen controls violate d<Y_1> <= d<X>".into())
            }
            Strategy::GreedyAdversarial { c, .. } if !(c > 0.0) => bad(format!("greedy constant must be positive, got {c}")),
            _ => Ok(()),
        }
    }
}

/// `count + 1` checkpoints evenly spread over `[0, n_steps]`.
pub fn even_checkpoints(n_steps: usize, count: usize) -> Vec<usize> {
    let count = count.max(1);
    let mut out: Vec<usize> = (0..=count).map(|i| i * n_steps / count).collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub time: f64,
    pub mean_u: f64,
    pub se: f64,
}

/// Mean and standard error of the per-path change of `U` between two
/// consecutive checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncrementStat {
    pub from_step: usize,
    pub to_step: usize,
    pub mean: f64,
    pub se: f64,
}

/// Realized quadratic-variation defects of `Y`, per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalityStats {
    /// Mean over paths of `(sum dY_1^2 - sum dY_2^2) / T`.
    pub mean_diag: f64,
    pub se_diag: f64,
    /// Mean over paths of `sum dY_1 dY_2 / T`.
    pub mean_cross: f64,
    pub se_cross: f64,
    /// Fraction of paths whose diagonal defect exceeds `3 * 2 / sqrt(n_steps)`.
    pub diag_outlier_fraction: f64,
    /// Fraction of paths whose cross defect exceeds `3 / sqrt(n_steps)`.
    pub cross_outlier_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Estimate of `E|X_T|^p`.
    pub moment_x: f64,
    /// Estimate of `E|Y_T|^p`.
    pub moment_y: f64,
    /// `(moment_x / moment_y)^(1/p)` on the right side, the inverse on the left.
    pub ratio: f64,
    pub se_ratio: f64,
    pub u_trajectory: Vec<TrajectoryPoint>,
    pub u_increments: Vec<IncrementStat>,
    pub conformality: ConformalityStats,
    /// Largest `| |M|_F^2 - target |` over all steps.
    pub max_constraint_defect: f64,
    /// Fraction of paths that reached `s > z_p` at some step.
    pub left_laguerre_region: f64,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

struct PathOutput {
    x_p: f64,
    y_p: f64,
    u: Vec<f64>,
    qv_diag: f64,
    qv_cross: f64,
    constraint_defect: f64,
    left_region: bool,
}

#[inline]
fn unit_or_axis(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > 0.0 {
        [v[0] / n, v[1] / n]
    } else {
        [1.0, 0.0]
    }
}

fn zero_drift_control(x: [f64; 2], y: [f64; 2]) -> Matrix {
    let xh = unit_or_axis(x);
    let yh = unit_or_axis(y);
    [[-xh[0] * yh[0], -xh[0] * yh[1]], [-xh[1] * yh[0], -xh[1] * yh[1]]]
}

fn random_control(rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = [0.0f64; 4];
    for v in m.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    let n = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    [[m[0] / n, m[1] / n], [m[2] / n, m[3] / n]]
}

/// Control-dependent part of the Ito drift of `V_c` at state `x`:
/// `1/2 tr(M M^T Hess_x)` where the Hessian of `+-|x|^p` is
/// `p |x|^(p-2) ((p-1) x_hat x_hat^T + (I - x_hat x_hat^T))`.
fn greedy_objective(m: &Matrix, x: [f64; 2], p: f64, weight: f64) -> f64 {
    let r = x[0].hypot(x[1]);
    let xh = unit_or_axis(x);
    // |M^T x_hat|^2: squared radial component of dX per unit time
    let radial = (m[0][0] * xh[0] + m[1][0] * xh[1]).powi(2) + (m[0][1] * xh[0] + m[1][1] * xh[1]).powi(2);
    let total = m.iter().flatten().map(|v| v * v).sum::<f64>();
    0.5 * weight * p * r.powf(p - 2.0) * ((p - 1.0) * radial + (total - radial))
}

fn simulate_path(config: &SimConfig, profile: &BellmanProfile, path: usize) -> Result<PathOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(path as u64);
    let p = config.p;
    let sqrt_dt = config.dt.sqrt();
    let target = if config.strategy == Strategy::Frozen { 0.0 } else { 1.0 };
    // sign of the |x|^p term in V_c
    let greedy_weight = match (config.strategy, config.side) {
        (Strategy::GreedyAdversarial { .. }, Side::RightConformal) => 1.0,
        (Strategy::GreedyAdversarial { c, .. }, Side::LeftConformal) => -c.powf(p),
        _ => 0.0,
    };

    let mut x = config.start.x0;
    let mut y = config.start.y0;
    let mut u = Vec::with_capacity(config.checkpoints.len());
    let mut next_checkpoint = config.checkpoints.iter().copied().peekable();
    let (mut q11, mut q22, mut q12) = (0.0, 0.0, 0.0);
    let mut constraint_defect: f64 = 0.0;
    let mut left_region = false;
    let z = profile.z_p();

    let u_at = |x: [f64; 2], y: [f64; 2]| {
        let (xn, yn) = (x[0].hypot(x[1]), y[0].hypot(y[1]));
        if xn + yn == 0.0 {
            0.0
        } else {
            profile.lift_value(xn, yn).unwrap_or(f64::NAN)
        }
    };

    for step in 0..=config.n_steps {
        while next_checkpoint.peek() == Some(&step) {
            u.push(u_at(x, y));
            next_checkpoint.next();
        }
        if step == config.n_steps {
            break;
        }

        let m = match config.strategy {
            Strategy::RandomAdmissible => random_control(&mut rng),
            Strategy::ZeroDrift => zero_drift_control(x, y),
            Strategy::Frozen => [[0.0; 2]; 2],
            Strategy::GreedyAdversarial { n_candidates, .. } => {
                let mut best = zero_drift_control(x, y);
                let mut best_score = greedy_objective(&best, x, p, greedy_weight);
                for _ in 0..n_candidates {
                    let cand = random_control(&mut rng);
                    let score = greedy_objective(&cand, x, p, greedy_weight);
                    if score > best_score {
                        best = cand;
                        best_score = score;
                    }
                }
                best
            }
        };
        let frob: f64 = m.iter().flatten().map(|v| v * v).sum();
        constraint_defect = constraint_defect.max((frob - target).abs());

        let w1: f64 = StandardNormal.sample(&mut rng);
        let w2: f64 = StandardNormal.sample(&mut rng);
        let (dw1, dw2) = (w1 * sqrt_dt, w2 * sqrt_dt);
        x = [x[0] + m[0][0] * dw1 + m[0][1] * dw2, x[1] + m[1][0] * dw1 + m[1][1] * dw2];
        y = [y[0] + dw1, y[1] + dw2];
        q11 += dw1 * dw1;
        q22 += dw2 * dw2;
        q12 += dw1 * dw2;

        let (xn, yn) = (x[0].hypot(x[1]), y[0].hypot(y[1]));
        if !(xn <= STATE_CAP && yn <= STATE_CAP) {
            return Err(Error::NonFiniteState { path, step });
        }
        if yn > z * (xn + yn) {
            left_region = true;
        }
    }

    let horizon = config.n_steps as f64 * config.dt;
    let (qv_diag, qv_cross) = if horizon > 0.0 { ((q11 - q22) / horizon, q12 / horizon) } else { (0.0, 0.0) };
    Ok(PathOutput {
        x_p: x[0].hypot(x[1]).powf(p),
        y_p: y[0].hypot(y[1]).powf(p),
        u,
        qv_diag,
        qv_cross,
        constraint_defect,
        left_region,
    })
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let profile = BellmanProfile::new(config.p)?;
    let paths: Vec<PathOutput> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(config, &profile, i))
        .collect::<Result<Vec<_>>>()?;
    let n = paths.len();
    let p = config.p;

    let moment_x = paths.iter().map(|o| o.x_p).sum::<f64>() / n as f64;
    let moment_y = paths.iter().map(|o| o.y_p).sum::<f64>() / n as f64;
    let ratio = match config.side {
        Side::RightConformal => (moment_x / moment_y).powf(1.0 / p),
        Side::LeftConformal => (moment_y / moment_x).powf(1.0 / p),
    };

    // delta method on batch means: var(log ratio) = var(bx/mx - by/my) / p^2
    let batches = RATIO_BATCHES.min(n);
    let se_ratio = if batches >= 2 && moment_x > 0.0 && moment_y > 0.0 {
        let rel: Vec<f64> = (0..batches)
            .map(|b| {
                let chunk = &paths[b * n / batches..(b + 1) * n / batches];
                let k = chunk.len() as f64;
                let bx = chunk.iter().map(|o| o.x_p).sum::<f64>() / k;
                let by = chunk.iter().map(|o| o.y_p).sum::<f64>() / k;
                bx / moment_x - by / moment_y
            })
            .collect();
        ratio / p * mean_se(rel.iter().copied()).1
    } else {
        0.0
    };

    let u_trajectory = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &step)| {
            let (mean_u, se) = mean_se(paths.iter().map(|o| o.u[k]));
            TrajectoryPoint {
                step,
                time: step as f64 * config.dt,
                mean_u,
                se,
            }
        })
        .collect();
    let u_increments = config
        .checkpoints
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (mean, se) = mean_se(paths.iter().map(|o| o.u[k + 1] - o.u[k]));
            IncrementStat {
                from_step: w[0],
                to_step: w[1],
                mean,
                se,
            }
        })
        .collect();

    let (mean_diag, se_diag) = mean_se(paths.iter().map(|o| o.qv_diag));
    let (mean_cross, se_cross) = mean_se(paths.iter().map(|o| o.qv_cross));
    let root_n = (config.n_steps.max(1) as f64).sqrt();
    let frac = |pred: &dyn Fn(&PathOutput) -> bool| paths.iter().filter(|o| pred(o)).count() as f64 / n as f64;
    let conformality = ConformalityStats {
        mean_diag,
        se_diag,
        mean_cross,
        se_cross,
        diag_outlier_fraction: frac(&|o| o.qv_diag.abs() > 3.0 * 2.0 / root_n),
        cross_outlier_fraction: frac(&|o| o.qv_cross.abs() > 3.0 / root_n),
    };

    Ok(SimResult {
        n_paths: n,
        n_steps: config.n_steps,
        seed: config.seed,
        moment_x,
        moment_y,
        ratio,
        se_ratio,
        u_trajectory,
        u_increments,
        conformality,
        max_constraint_defect: paths.iter().map(|o| o.constraint_defect).fold(0.0, f64::max),
        left_laguerre_region: frac(&|o| o.left_region),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleReport {
    pub passed: bool,
    /// Largest `mean increment / se` over consecutive checkpoints.
    pub worst_z_score: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub increments: Vec<IncrementStat>,
}

/// Mean `U(X_t, Y_t)` must not increase between consecutive checkpoints by
/// more than three standard errors of the path-level increment.
pub fn supermartingale_check(config: &SimConfig) -> Result<SupermartingaleReport> {
    let result = simulate(config)?;
    Ok(supermartingale_verdict(&result))
}

pub fn supermartingale_verdict(result: &SimResult) -> SupermartingaleReport {
    let mut passed = true;
    let mut worst_z = f64::NEG_INFINITY;
    for inc in &result.u_increments {
        let slack = 3.0 * inc.se + 1e-12 * inc.mean.abs().max(1.0);
        if !(inc.mean <= slack) {
            passed = false;
        }
        if inc.se > 0.0 {
            worst_z = worst_z.max(inc.mean / inc.se);
        }
    }
    SupermartingaleReport {
        passed,
        worst_z_score: worst_z,
        trajectory: result.u_trajectory.clone(),
        increments: result.u_increments.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeParams {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub n_candidates: usize,
    /// Multiplier on `c_p` used in the greedy objective.
    pub greedy_c_factor: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            n_paths: 20_000,
            n_steps: 1000,
            dt: 1e-3,
            seed: 0,
            n_candidates: 8,
            greedy_c_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub c_normalized: f64,
    pub zero_drift_ratio: f64,
    pub zero_drift_se: f64,
    pub greedy_ratio: f64,
    pub greedy_se: f64,
    pub best_ratio: f64,
    pub best_se: f64,
}

/// Runs the zero-drift and greedy strategies from the touching section and
/// reports the larger terminal ratio.
pub fn extremal_probe(p: f64, params: &ProbeParams) -> Result<ProbeResult> {
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!("extremal probe is for the right side, got p = {p}")));
    }
    let base = SimConfig {
        n_paths: params.n_paths,
        n_steps: params.n_steps,
        dt: params.dt,
        seed: params.seed,
        checkpoints: vec![],
        ..SimConfig::new(p)?
    };
    let c_p = BellmanProfile::new(p)?.constants.c_normalized;
    let zero_drift = simulate(&SimConfig {
        strategy: Strategy::ZeroDrift,
        ..base.clone()
    })?;
    let greedy = simulate(&SimConfig {
        strategy: Strategy::GreedyAdversarial {
            c: params.greedy_c_factor * c_p,
            n_candidates: params.n_candidates,
        },
        ..base
    })?;
    let (best_ratio, best_se) = if greedy.ratio > zero_drift.ratio {
        (greedy.ratio, greedy.se_ratio)
    } else {
        (zero_drift.ratio, zero_drift.se_ratio)
    };
    Ok(ProbeResult {
        c_normalized: c_p,
        zero_drift_ratio: zero_drift.ratio,
        zero_drift_se: zero_drift.se_ratio,
        greedy_ratio: greedy.ratio,
        greedy_se: greedy.se_ratio,
        best_ratio,
        best_se,
    })
}
