//! Grid certification of the conditions that make `U` a valid majorant.
//!
//! Every condition is written as "quantity <= 0". Each grid point yields a
//! normalized slack `quantity / scale`, where `scale` is the sum of the
//! magnitudes of the terms making up the quantity, and a condition passes
//! when the worst slack is at most [`TOLERANCE`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::{h_operator_laguerre, BellmanProfile, Side, UPartials};
use crate::error::{Error, Result};

/// Scale-aware slack allowed for "<= 0" conditions.
pub const TOLERANCE: f64 = 1e-8;
/// Slack allowed for the majorization `g >= obstacle`.
pub const MAJORIZATION_TOLERANCE: f64 = 1e-12;
/// Relative slope mismatch allowed at the gluing point.
pub const C1_TOLERANCE: f64 = 1e-9;
/// Grid points closer than this to 0, `z_p` or 1 are skipped.
pub const EXCLUSION: f64 = 1e-6;
/// Half-width of the refined zones around 0, `z_p` and 1.
pub const REFINE_ZONE: f64 = 1e-3;
/// Upper end of the `beta` grid in the left-side check.
pub const DEFAULT_BETA_MAX: f64 = 10.0;

/// Points `s` in `(0, 1)` at which conditions are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub points: Vec<f64>,
    pub description: String,
}

impl Grid {
    /// `n` uniform points plus geometrically spaced points within 1e-3 of
    /// `{0, z, 1}` at ten times the uniform density; points within 1e-6 of
    /// those three are dropped.
    pub fn standard(n: usize, z: f64) -> Grid {
        let specials = [0.0, z, 1.0];
        let mut points: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let refine = ((10.0 * REFINE_ZONE * n as f64).ceil() as usize).max(10);
        let ratio = (REFINE_ZONE / EXCLUSION).ln();
        for &a in &specials {
            for k in 0..refine {
                let d = EXCLUSION * (ratio * (k as f64 + 0.5) / refine as f64).exp();
                points.push(a - d);
                points.push(a + d);
            }
        }
        points.retain(|&s| s > 0.0 && s < 1.0 && specials.iter().all(|&a| (s - a).abs() >= EXCLUSION));
        points.sort_by(f64::total_cmp);
        points.dedup();
        Grid {
            description: format!("uniform {n} + geometric x{refine} near {{0, z_p={z:.6}, 1}}"),
            points,
        }
    }

    /// `n` uniform points strictly inside `(lo, hi)`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Grid {
        Grid {
            points: (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect(),
            description: format!("uniform {n} in ({lo}, {hi})"),
        }
    }

    pub fn restrict(&self, lo: f64, hi: f64) -> Grid {
        Grid {
            points: self.points.iter().copied().filter(|&s| s > lo && s < hi).collect(),
            description: format!("{} restricted to ({lo:.6}, {hi:.6})", self.description),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstPoint {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl WorstPoint {
    fn on_section(s: f64) -> Self {
        WorstPoint { s, x: 1.0 - s, y: s, beta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub condition_id: String,
    pub grid: String,
    pub worst_slack: f64,
    pub worst_point: WorstPoint,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn normalized(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

/// Evaluates `slack_at` on every grid point (in parallel) and reduces by
/// maximum, ties going to the lowest index.
fn certify<F>(condition_id: &str, grid: &Grid, tolerance: f64, slack_at: F) -> VerificationReport
where
    F: Fn(f64) -> (f64, WorstPoint) + Sync,
{
    let evaluated: Vec<(f64, WorstPoint)> = grid.points.par_iter().map(|&s| slack_at(s)).collect();
    let mut worst = (f64::NEG_INFINITY, WorstPoint::on_section(f64::NAN));
    for item in evaluated {
        // NaN slack counts as a failure
        if item.0.is_nan() || item.0 > worst.0 {
            worst = item;
            if item.0.is_nan() {
                break;
            }
        }
    }
    VerificationReport {
        condition_id: condition_id.to_string(),
        grid: grid.description.clone(),
        worst_slack: worst.0,
        worst_point: worst.1,
        passed: worst.0 <= tolerance,
    }
}

fn section(profile: &BellmanProfile, s: f64) -> Option<UPartials> {
    profile.lift(1.0 - s, s).ok()
}

/// Quadratic-form coefficients of `U` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormCoefficients {
    /// `U_xx - U_x / x`
    pub a: f64,
    /// `U_yy + U_y / y`
    pub b: f64,
    pub u_xy: f64,
    pub u_x_over_x: f64,
    pub u_xx: f64,
    /// Magnitude scale of the coefficients, for normalizing slacks.
    pub scale: f64,
}

impl FormCoefficients {
    pub fn at(profile: &BellmanProfile, x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::InvalidArgument(format!("form needs x, y > 0, got ({x}, {y})")));
        }
        let u = profile.lift(x, y)?;
        let u_x_over_x = u.u_x / x;
        let u_y_over_y = u.u_y / y;
        Ok(FormCoefficients {
            a: u.u_xx - u_x_over_x,
            b: u.u_yy + u_y_over_y,
            u_xy: u.u_xy,
            u_x_over_x,
            u_xx: u.u_xx,
            scale: u.u_xx.abs() + u_x_over_x.abs() + 2.0 * u.u_xy.abs() + u.u_yy.abs() + u_y_over_y.abs(),
        })
    }
}

/// `g >= obstacle` on the grid.
pub fn check_majorization(profile: &BellmanProfile, grid: &Grid) -> VerificationReport {
    certify("majorization", grid, MAJORIZATION_TOLERANCE, |s| {
        let g = profile.eval(s).g;
        let v = profile.obstacle.value(s);
        (normalized(v - g, (g.abs() + v.abs()).max(1.0)), WorstPoint::on_section(s))
    })
}

/// Value and slope continuity of `g` at `z_p`.
pub fn check_c1_matching(profile: &BellmanProfile) -> VerificationReport {
    let z = profile.z_p();
    let left = profile.laguerre_branch(z);
    let right = profile.obstacle_branch(z);
    let scale = left.d1.abs().max(f64::MIN_POSITIVE);
    let value_gap = (left.g - right.g).abs() / scale;
    let slope_gap = (left.d1 - right.d1).abs() / scale;
    let worst = value_gap.max(slope_gap);
    VerificationReport {
        condition_id: "c1_matching".into(),
        grid: format!("gluing point z_p={z}"),
        worst_slack: worst,
        worst_point: WorstPoint::on_section(z),
        passed: worst <= C1_TOLERANCE,
    }
}

/// `U_xx +- 2 U_xy + U_yy + U_y / y <= 0`, checked through the equivalent
/// one-variable forms `L_p g + 4 s H_p g <= 0` and `L_p g <= 0`.
pub fn check_simple_conditions(profile: &BellmanProfile, grid: &Grid) -> (VerificationReport, VerificationReport) {
    let plus = certify("simple_plus", grid, TOLERANCE, |s| {
        let slack = match profile.operator_values(s) {
            Ok(op) => normalized(op.l_op + 4.0 * s * op.h_op, op.l_scale + 4.0 * s * op.h_scale),
            Err(_) => f64::NAN,
        };
        (slack, WorstPoint::on_section(s))
    });
    let minus = certify("simple_minus", grid, TOLERANCE, |s| {
        let slack = match profile.operator_values(s) {
            Ok(op) => normalized(op.l_op, op.l_scale),
            Err(_) => f64::NAN,
        };
        (slack, WorstPoint::on_section(s))
    });
    (plus, minus)
}

/// Sign of `H_p L_p` on `(0, z_p]`: negative for `p > 2`, positive for
/// `1 < p < 2`. Not meaningful at `p = 2`, where `H_2 L_2` vanishes.
pub fn check_h_sign(profile: &BellmanProfile, grid: &Grid) -> VerificationReport {
    let p = profile.p();
    let sign = if p > 2.0 { 1.0 } else { -1.0 };
    let region = grid.restrict(0.0, profile.z_p() + EXCLUSION);
    certify("h_laguerre_sign", &region, 0.0, |s| {
        let h = h_operator_laguerre(p, s);
        // strict sign: slack must be negative, zero is a failure
        let slack = normalized(sign * h.h_op, h.h_scale);
        (if slack < 0.0 { slack } else { slack.max(f64::MIN_POSITIVE) }, WorstPoint::on_section(s))
    })
}

/// General right-side conditions: `U_x > 0` and
/// `U_x/x - U_xx - |U_xy| < 0`. On the Laguerre branch this is the form
/// `(H_p g + (p-2)(s g' - p g)) / (1 - s) < 0`; on the obstacle branch
/// `U_xy` vanishes and the second inequality reads `-p(p-2) x^(p-2) < 0`.
pub fn check_general_right(profile: &BellmanProfile, grid: &Grid) -> VerificationReport {
    certify("general_right", grid, TOLERANCE, |s| {
        let slack = match section(profile, s) {
            Some(u) => {
                let x = 1.0 - s;
                let g = profile.eval(s);
                let positivity = normalized(-u.u_x, profile.p() * g.g.abs() + s * g.d1.abs());
                let ux_x = u.u_x / x;
                let dominance = normalized(ux_x - u.u_xx - u.u_xy.abs(), ux_x.abs() + u.u_xx.abs() + u.u_xy.abs());
                positivity.max(dominance)
            }
            None => f64::NAN,
        };
        (slack, WorstPoint::on_section(s))
    })
}

/// Largest value of `alpha a^2 + 2 gamma a + delta` over `a` in `[lo, hi]`.
fn quadratic_max(alpha: f64, gamma: f64, delta: f64, lo: f64, hi: f64) -> (f64, f64) {
    let f = |a: f64| alpha * a * a + 2.0 * gamma * a + delta;
    let mut best = (f(lo), lo);
    let fh = f(hi);
    if fh > best.0 {
        best = (fh, hi);
    }
    if alpha < 0.0 {
        let v = -gamma / alpha;
        if v > lo && v < hi && f(v) > best.0 {
            best = (f(v), v);
        }
    }
    best
}

/// Full left-side control inequality
/// `-(U_x/x - U_xx) a^2 + 2|U_xy| a + (U_x/x) beta^2 + U_yy + U_y/y <= 0`
/// for `a` in `[0, beta]` and each `beta` in `beta_grid`, together with the
/// side conditions `U_x < 0` and `a* >= 1` where `U_x/x - U_xx > 0`.
pub fn check_general_left(profile: &BellmanProfile, grid: &Grid, beta_grid: &[f64]) -> VerificationReport {
    let evaluated: Vec<(f64, WorstPoint)> = grid
        .points
        .par_iter()
        .map(|&s| {
            let x = 1.0 - s;
            let Some(u) = section(profile, s) else {
                return (f64::NAN, WorstPoint::on_section(s));
            };
            let ux_x = u.u_x / x;
            let d = ux_x - u.u_xx;
            let b = u.u_yy + u.u_y / s;
            let b_scale = u.u_yy.abs() + (u.u_y / s).abs();
            let mut worst = (normalized(u.u_x, u.u_x.abs().max(f64::MIN_POSITIVE)), WorstPoint::on_section(s));
            if d > 0.0 {
                let a_star = u.u_xy.abs() / d;
                let slack = 1.0 - a_star;
                if slack > worst.0 {
                    worst = (slack, WorstPoint::on_section(s));
                }
            }
            for &beta in beta_grid {
                let (value, a) = quadratic_max(-d, u.u_xy.abs(), ux_x * beta * beta + b, 0.0, beta);
                let scale = d.abs() * a * a + 2.0 * u.u_xy.abs() * a + ux_x.abs() * beta * beta + b_scale;
                let slack = normalized(value, scale);
                if slack > worst.0 {
                    worst = (slack, WorstPoint { beta: Some(beta), ..WorstPoint::on_section(s) });
                }
            }
            worst
        })
        .collect();
    let mut worst = (f64::NEG_INFINITY, WorstPoint::on_section(f64::NAN));
    for item in evaluated {
        if item.0.is_nan() || item.0 > worst.0 {
            worst = item;
            if item.0.is_nan() {
                break;
            }
        }
    }
    VerificationReport {
        condition_id: "general_left".into(),
        grid: format!("{}; beta: {} points in [{}, {}]", grid.description, beta_grid.len(),
            beta_grid.first().copied().unwrap_or(f64::NAN), beta_grid.last().copied().unwrap_or(f64::NAN)),
        worst_slack: worst.0,
        worst_point: worst.1,
        passed: worst.0 <= TOLERANCE,
    }
}

/// `count` uniform values of `beta` in `[1, beta_max]`.
pub fn beta_grid(beta_max: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![1.0];
    }
    (0..count).map(|i| 1.0 + (beta_max - 1.0) * i as f64 / (count - 1) as f64).collect()
}

/// Options for the full certification suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub grid_points: usize,
    pub beta_max: f64,
    pub beta_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            grid_points: 10_000,
            beta_max: DEFAULT_BETA_MAX,
            beta_points: 46,
        }
    }
}

/// Runs every check that applies to the profile's side.
pub fn run_suite(profile: &BellmanProfile, options: &SuiteOptions) -> Vec<VerificationReport> {
    let grid = Grid::standard(options.grid_points, profile.z_p());
    let mut reports = vec![check_majorization(profile, &grid), check_c1_matching(profile)];
    let (plus, minus) = check_simple_conditions(profile, &grid);
    reports.push(plus);
    reports.push(minus);
    if profile.p() != 2.0 {
        reports.push(check_h_sign(profile, &grid));
    }
    match profile.side {
        Side::RightConformal => reports.push(check_general_right(profile, &grid)),
        Side::LeftConformal => {
            let betas = beta_grid(options.beta_max, options.beta_points);
            reports.push(check_general_left(profile, &grid, &betas));
        }
    }
    reports
}

/// The three-way classification of a point by the sign of `A` and
/// `beta_0 = |U_xy / A|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FormCase {
    /// `A < 0`, `beta_0 <= 1`
    NegativeAWithinCone,
    /// `A < 0`, `beta_0 > 1`
    NegativeAOutsideCone,
    /// `A >= 0`
    NonNegativeA,
}

/// Outcome of one implication: whether its hypothesis holds and, if so, the
/// normalized value of its conclusion (required `<= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Implication {
    pub fires: bool,
    pub slack: Option<f64>,
}

impl Implication {
    fn vacuous() -> Self {
        Implication { fires: false, slack: None }
    }

    fn fired(slack: f64) -> Self {
        Implication { fires: true, slack: Some(slack) }
    }

    fn holds(&self) -> bool {
        self.slack.is_none_or(|s| s <= TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseSplitRecord {
    pub x: f64,
    pub y: f64,
    pub case: FormCase,
    pub coefficients: FormCoefficients,
    /// `(U_x > 0, |U_xy| <= U_x/x - U_xx) => U_xy^2 + (U_x/x + B)(U_x/x - U_xx) <= 0`
    pub cond_positive_ux: Implication,
    /// `U_xx >= 0 or -|U_xy| < U_xx < 0 => U_xx +- 2 U_xy + B <= 0`
    pub cond_simple: Implication,
    /// `U_xx <= -|U_xy| => U_xy^2 - U_xx B <= 0`
    pub cond_concave: Implication,
    /// Neither `cond_positive_ux` nor `cond_concave` fires.
    pub vacuous: bool,
    /// Supremum of the quadratic form over admissible controls with `|k| = 1`.
    pub analytic_max: f64,
    pub holds: bool,
}

/// Right-side case analysis of the quadratic form at `(x, y)`.
pub fn check_case_split(profile: &BellmanProfile, x: f64, y: f64) -> Result<CaseSplitRecord> {
    if profile.side != Side::RightConformal {
        return Err(Error::InvalidArgument("case split applies to the right-conformal side".into()));
    }
    let f = FormCoefficients::at(profile, x, y)?;
    let scale = f.scale.max(f64::MIN_POSITIVE);
    let case = if f.a >= 0.0 {
        FormCase::NonNegativeA
    } else if f.u_xy.abs() <= -f.a {
        FormCase::NegativeAWithinCone
    } else {
        FormCase::NegativeAOutsideCone
    };
    let d = -f.a;
    let u_x = f.u_x_over_x * x;

    let cond_positive_ux = if u_x > 0.0 && f.u_xy.abs() <= d {
        Implication::fired((f.u_xy * f.u_xy + (f.u_x_over_x + f.b) * d) / (scale * scale))
    } else {
        Implication::vacuous()
    };
    let cond_simple = if f.u_xx >= 0.0 || (-f.u_xy.abs() < f.u_xx && f.u_xx < 0.0) {
        Implication::fired((f.u_xx + 2.0 * f.u_xy.abs() + f.b) / scale)
    } else {
        Implication::vacuous()
    };
    let cond_concave = if f.u_xx <= -f.u_xy.abs() {
        Implication::fired((f.u_xy * f.u_xy - f.u_xx * f.b) / (scale * scale))
    } else {
        Implication::vacuous()
    };
    let analytic_max = analytic_form_max(profile, x, y, DEFAULT_BETA_MAX)?;
    Ok(CaseSplitRecord {
        x,
        y,
        case,
        coefficients: f,
        vacuous: !cond_positive_ux.fires && !cond_concave.fires,
        holds: cond_positive_ux.holds() && cond_simple.holds() && cond_concave.holds(),
        cond_positive_ux,
        cond_simple,
        cond_concave,
        analytic_max,
    })
}

/// Supremum of `U_xx |h1|^2 + (U_x/x)|h2|^2 + 2 U_xy (h1.k) + B |k|^2` with
/// `|k| = 1` over `|h1|^2 + |h2|^2 <= 1` (right side) or
/// `1 <= |h1|^2 + |h2|^2 <= beta_max^2` (left side).
pub fn analytic_form_max(profile: &BellmanProfile, x: f64, y: f64, beta_max: f64) -> Result<f64> {
    let f = FormCoefficients::at(profile, x, y)?;
    let g = f.u_xy.abs();
    Ok(match profile.side {
        Side::RightConformal => {
            if f.u_x_over_x > 0.0 {
                quadratic_max(f.a, g, f.u_x_over_x + f.b, 0.0, 1.0).0
            } else {
                quadratic_max(f.u_xx, g, f.b, 0.0, 1.0).0
            }
        }
        Side::LeftConformal => {
            let d = -f.a;
            if f.u_x_over_x > 0.0 {
                quadratic_max(-d, g, f.u_x_over_x * beta_max * beta_max + f.b, 0.0, beta_max).0
            } else {
                let inner = quadratic_max(-d, g, f.u_x_over_x + f.b, 0.0, 1.0).0;
                let outer = quadratic_max(f.u_xx, g, f.b, 1.0, beta_max).0;
                inner.max(outer)
            }
        }
    })
}

/// Largest sampled value of the quadratic form over `n_controls` random
/// admissible controls with `|k| = 1`. Half the samples lie on the boundary
/// of the admissible set. An oracle for [`analytic_form_max`].
pub fn brute_force_form(profile: &BellmanProfile, x: f64, y: f64, n_controls: usize, seed: u64) -> Result<f64> {
    let f = FormCoefficients::at(profile, x, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for i in 0..n_controls {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let k = [theta.cos(), theta.sin()];
        let mut h = [0.0f64; 4];
        for c in h.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let norm = h.iter().map(|c| c * c).sum::<f64>().sqrt();
        let radius = match profile.side {
            Side::RightConformal => {
                if i % 2 == 0 {
                    1.0
                } else {
                    rng.random::<f64>().powf(0.25)
                }
            }
            Side::LeftConformal => {
                if i % 2 == 0 {
                    1.0
                } else {
                    rng.random_range(1.0..=DEFAULT_BETA_MAX)
                }
            }
        };
        for c in h.iter_mut() {
            *c *= radius / norm;
        }
        let h1_sq = h[0] * h[0] + h[1] * h[1];
        let h2_sq = h[2] * h[2] + h[3] * h[3];
        let h1_dot_k = h[0] * k[0] + h[1] * k[1];
        let value = f.u_xx * h1_sq + f.u_x_over_x * h2_sq + 2.0 * f.u_xy * h1_dot_k + f.b;
        best = best.max(value);
    }
    Ok(best)
}
