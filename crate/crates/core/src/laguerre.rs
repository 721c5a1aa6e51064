//! The bounded Laguerre function `L_p`, its smallest zero, and the Bessel
//! and series constants that describe `z_p` for large `p`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Precision loss is flagged once the largest series term exceeds the
/// (unit-floored) sum by this factor.
const CANCELLATION_LIMIT: f64 = 1e6;

/// Below this abscissa the second derivative comes from the term-wise series;
/// above it from the Laguerre equation itself.
const SERIES_D2_CUTOFF: f64 = 0.01;

/// Inner tolerance used while searching for zeros.
const ZERO_SEARCH_REL_TOL: f64 = 1e-15;

/// Width below which bisection is considered finished before polishing.
const BISECTION_WIDTH: f64 = 1e-12;

/// An exponent `p > 1`. The dual exponent `p' = p / (p - 1)` is computed on
/// demand.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Order(f64);

impl Order {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Order(p))
        } else {
            Err(Error::InvalidOrder(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn dual(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }

    pub fn dual_order(self) -> Order {
        Order(self.dual())
    }

    /// `max(p, p')`.
    pub fn star(self) -> f64 {
        self.0.max(self.dual())
    }
}

/// Value and first two derivatives of `L_p` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaguerreEval {
    pub value: f64,
    pub d1: f64,
    /// Preferred second derivative: from the Laguerre equation when the
    /// abscissa is at least 0.01, otherwise the term-wise series.
    pub d2: f64,
    /// Second derivative from the term-wise differentiated series.
    pub d2_series: f64,
    /// Largest absolute term of the value series.
    pub max_term: f64,
    pub terms_used: usize,
    pub precision_ok: bool,
}

/// Evaluates `L_p(x) = sum_n (-1)^n p(p-1)...(p-n+1) / (n!)^2 x^n` together
/// with its first and second derivatives.
///
/// Summation stops once `n > p + 2` and two consecutive terms of each of the
/// three series fall below `rel_tol` relative to their partial sums, or when
/// the series terminates exactly (integer `p`, or underflow).
pub fn laguerre_eval(p: f64, x: f64, rel_tol: f64) -> LaguerreEval {
    debug_assert!(p > 0.0, "laguerre_eval needs p > 0, got {p}");
    debug_assert!((0.0..=1.0).contains(&x), "laguerre_eval needs x in [0, 1], got {x}");
    debug_assert!(rel_tol > 0.0);

    if x == 0.0 {
        let d2 = 0.5 * p * (p - 1.0);
        return LaguerreEval {
            value: 1.0,
            d1: -p,
            d2,
            d2_series: d2,
            max_term: 1.0,
            terms_used: 1,
            precision_ok: true,
        };
    }

    let mut value = 1.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut max_term = 1.0_f64;
    let mut max_d1 = 0.0_f64;
    let mut max_d2 = 0.0_f64;
    // t_n = c_n x^n, built by the running product.
    let mut term = 1.0_f64;
    let mut quiet = 0usize;
    let mut n = 0usize;

    let negligible = |t: f64, sum: f64, scale: f64| t.abs() <= rel_tol * sum.abs().max(f64::EPSILON * scale);

    loop {
        n += 1;
        let nf = n as f64;
        term *= -(p - (nf - 1.0)) * x / (nf * nf);
        if term == 0.0 {
            break;
        }
        let t1 = nf * term / x;
        let t2 = nf * (nf - 1.0) * term / x / x;
        value += term;
        d1 += t1;
        d2 += t2;
        max_term = max_term.max(term.abs());
        max_d1 = max_d1.max(t1.abs());
        max_d2 = max_d2.max(t2.abs());

        if nf > p + 2.0
            && negligible(term, value, max_term)
            && negligible(t1, d1, max_d1)
            && negligible(t2, d2, max_d2)
        {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let d2_preferred = if x < SERIES_D2_CUTOFF {
        d2
    } else {
        ((x - 1.0) * d1 - p * value) / x
    };

    LaguerreEval {
        value,
        d1,
        d2: d2_preferred,
        d2_series: d2,
        max_term,
        terms_used: n + 1,
        precision_ok: max_term / value.abs().max(1.0) <= CANCELLATION_LIMIT,
    }
}

/// Smallest zero of `L_p` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroResult {
    pub z: f64,
    pub residual: f64,
    pub bracket_width: f64,
}

/// Locates `z_p` by bisection on `[0, 2/(p+1)]`, followed by a secant polish.
///
/// `L_p(0) = 1`, and `L_p(2/(p+1)) <= 0` for every `p > 1`; should the upper
/// end still be positive the bracket is pushed right in steps of 0.05 up to 1.
pub fn smallest_zero(p: f64, abs_tol: f64) -> Result<ZeroResult> {
    Order::new(p)?;
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("abs_tol must be positive, got {abs_tol}")));
    }
    let f = |x: f64| laguerre_eval(p, x, ZERO_SEARCH_REL_TOL).value;

    let mut lo = 0.0;
    let mut f_lo = 1.0;
    let mut hi = 2.0 / (p + 1.0);
    let mut f_hi = f(hi);
    while f_hi > 0.0 {
        if hi >= 1.0 {
            return Err(Error::NoSignChange { p });
        }
        lo = hi;
        f_lo = f_hi;
        hi = (hi + 0.05).min(1.0);
        f_hi = f(hi);
    }

    let width_goal = abs_tol.min(BISECTION_WIDTH);
    loop {
        let width_ok = hi - lo <= width_goal;
        let residual_ok = f_lo.abs().min(f_hi.abs()) <= abs_tol;
        if width_ok && residual_ok {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    let (mut z, mut residual) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo.abs()) } else { (hi, f_hi.abs()) };
    if f_hi != f_lo {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if secant > lo && secant < hi {
            let r = f(secant).abs();
            if r < residual {
                z = secant;
                residual = r;
            }
        }
    }

    if residual > abs_tol {
        return Err(Error::ToleranceNotMet { p, tol: abs_tol, residual });
    }
    Ok(ZeroResult {
        z,
        residual,
        bracket_width: hi - lo,
    })
}

/// Worst residual of one Laguerre identity over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    /// Largest absolute residual.
    pub abs: f64,
    /// Largest residual divided by the sum of the magnitudes of its terms.
    pub rel: f64,
}

pub const IDENTITY_RECURRENCE: &str = "s*L_p' = p*(L_p - L_{p-1})";
pub const IDENTITY_ODE: &str = "s*L_p'' + (1-s)*L_p' + p*L_p = 0";
pub const IDENTITY_PRODUCT: &str = "(s*L_p')' = -p*L_{p-1}";

/// Residuals of the recurrence, ODE and product-rule identities linking
/// `L_p` and `L_{p-1}`. The ODE residual uses the series second derivative so
/// that it is not satisfied by construction.
pub fn laguerre_identity_residuals(p: f64, s_grid: &[f64]) -> Result<BTreeMap<&'static str, IdentityResidual>> {
    Order::new(p)?;
    let mut worst = BTreeMap::new();
    for name in [IDENTITY_RECURRENCE, IDENTITY_ODE, IDENTITY_PRODUCT] {
        worst.insert(name, IdentityResidual { abs: 0.0, rel: 0.0 });
    }
    let mut bump = |name: &'static str, residual: f64, scale: f64| {
        let entry = worst.get_mut(name).expect("known identity");
        entry.abs = entry.abs.max(residual.abs());
        if scale > 0.0 {
            entry.rel = entry.rel.max(residual.abs() / scale);
        }
    };
    for &s in s_grid {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("grid point {s} outside [0, 1]")));
        }
        let lp = laguerre_eval(p, s, ZERO_SEARCH_REL_TOL);
        let lq = laguerre_eval(p - 1.0, s, ZERO_SEARCH_REL_TOL);

        let rec = s * lp.d1 - p * (lp.value - lq.value);
        bump(IDENTITY_RECURRENCE, rec, (s * lp.d1).abs() + p * lp.value.abs() + p * lq.value.abs());

        let ode = s * lp.d2_series + (1.0 - s) * lp.d1 + p * lp.value;
        bump(
            IDENTITY_ODE,
            ode,
            (s * lp.d2_series).abs() + ((1.0 - s) * lp.d1).abs() + p * lp.value.abs(),
        );

        let prod = lp.d1 + s * lp.d2_series + p * lq.value;
        bump(
            IDENTITY_PRODUCT,
            prod,
            lp.d1.abs() + (s * lp.d2_series).abs() + p * lq.value.abs(),
        );
    }
    Ok(worst)
}

/// `J_0(x)` from its even power series. Accurate to near machine precision
/// for `0 <= x <= 8`; cancellation grows like `e^x` beyond that.
pub fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -q / (n * n);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && n * n > q {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// First positive zero `j_0` of `J_0`, by bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    static J0_ZERO: OnceLock<f64> = OnceLock::new();
    *J0_ZERO.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        debug_assert!(bessel_j0(lo) > 0.0 && bessel_j0(hi) < 0.0);
        while hi - lo > BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if bessel_j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// `Q = 1 - sum_{n >= 2} (n-2)! / (n!)^2`, summed until a term drops below
/// `rel_tol`.
pub fn constant_q(rel_tol: f64) -> f64 {
    let mut term = 0.25;
    let mut n = 2.0_f64;
    let mut sum = 0.0;
    loop {
        sum += term;
        if term < rel_tol {
            break;
        }
        term *= (n - 1.0) / ((n + 1.0) * (n + 1.0));
        n += 1.0;
    }
    1.0 - sum
}

/// `1 - sum` over the first `n_terms` terms of the `Q` series.
pub fn constant_q_partial(n_terms: usize) -> f64 {
    let mut term = 0.25;
    let mut sum = 0.0;
    for k in 0..n_terms {
        sum += term;
        let n = (k + 2) as f64;
        term *= (n - 1.0) / ((n + 1.0) * (n + 1.0));
    }
    1.0 - sum
}

/// `Q` evaluated once at tolerance 1e-12.
pub fn cached_q() -> f64 {
    static Q: OnceLock<f64> = OnceLock::new();
    *Q.get_or_init(|| constant_q(1e-12))
}

/// `max_x |L_n(x/n) - J_0(2 sqrt(x))|` over `grid_count` uniform points of
/// `[0, x_max]`.
pub fn mehler_heine_gap(n: u32, x_max: f64, grid_count: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InvalidArgument(format!("Mehler-Heine gap needs n >= 10, got {n}")));
    }
    if !(0.0..=4.0).contains(&x_max) || grid_count < 2 {
        return Err(Error::InvalidArgument("need 0 <= x_max <= 4 and at least two grid points".into()));
    }
    let nf = f64::from(n);
    let gap = (0..grid_count)
        .map(|i| {
            let x = x_max * i as f64 / (grid_count - 1) as f64;
            let lag = laguerre_eval(nf, x / nf, ZERO_SEARCH_REL_TOL).value;
            (lag - bessel_j0(2.0 * x.sqrt())).abs()
        })
        .fold(0.0, f64::max);
    Ok(gap)
}
