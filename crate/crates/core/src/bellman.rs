//! Sharp constants, obstacles and the piecewise Bellman majorant.
//!
//! On the section `x + y = 1`, `s = y / (x + y)`, the majorant is
//! `g = a_p L_p` on `[0, z_p]` and the obstacle on `(z_p, 1]`. The two
//! branches meet with matching value and slope at `z_p`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laguerre::{laguerre_eval, smallest_zero, Order};
use crate::{DEFAULT_REL_TOL, DEFAULT_ZERO_TOL};

/// Distance from a singular endpoint inside which the obstacle's second
/// derivative is not reported for `p < 2`.
const SINGULAR_GUARD: f64 = 1e-9;

/// Which process carries the conformality assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    /// `p >= 2`, `Y` conformal, `d<X> <= d<Y_1>`; bound on `||X||_p`.
    RightConformal,
    /// `1 < p < 2`, `Y` conformal, `d<Y_1> <= d<X>`; bound on `||Y||_p`.
    LeftConformal,
}

impl Side {
    pub fn for_order(p: f64) -> Side {
        if p >= 2.0 {
            Side::RightConformal
        } else {
            Side::LeftConformal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpConstants {
    pub p: f64,
    pub side: Side,
    pub z_p: f64,
    /// `(1 - z_p) / z_p` for `p >= 2`, `z_p / (1 - z_p)` for `1 < p < 2`.
    pub c_p: f64,
    /// Best constant when `d<X> <= d<Y_1>` (or the reverse); equal to `c_p`.
    pub c_normalized: f64,
    /// Best constant in the `d<X> <= d<Y>` normalization.
    pub c_theorem: f64,
}

pub fn sharp_constants(p: f64) -> Result<SharpConstants> {
    Order::new(p)?;
    let z = smallest_zero(p, DEFAULT_ZERO_TOL)?.z;
    let side = Side::for_order(p);
    let (c_p, c_theorem) = match side {
        Side::RightConformal => {
            let c = (1.0 - z) / z;
            (c, SQRT_2 * c)
        }
        Side::LeftConformal => {
            let c = z / (1.0 - z);
            (c, c / SQRT_2)
        }
    };
    Ok(SharpConstants {
        p,
        side,
        z_p: z,
        c_p,
        c_normalized: c_p,
        c_theorem,
    })
}

/// `C_{p'} / C_p`: the left-side constant at the dual exponent over the
/// right-side constant at `p`, for `p >= 2`.
pub fn dual_constant_ratio(p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!("dual ratio needs p >= 2, got {p}")));
    }
    let right = sharp_constants(p)?;
    let dual = Order::new(p)?.dual();
    let z_dual = smallest_zero(dual, DEFAULT_ZERO_TOL)?.z;
    let left = z_dual / (SQRT_2 * (1.0 - z_dual));
    Ok(left / right.c_theorem)
}

/// The obstacle `v_c(s) = (1-s)^p - c^p s^p` (right side) or
/// `v*_c(s) = s^p - c^p (1-s)^p` (left side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstacle {
    pub p: f64,
    pub c: f64,
    pub side: Side,
}

impl Obstacle {
    pub fn new(p: f64, c: f64, side: Side) -> Self {
        Obstacle { p, c, side }
    }

    pub fn value(&self, s: f64) -> f64 {
        let p = self.p;
        match self.side {
            Side::RightConformal => (1.0 - s).powf(p) - (self.c * s).powf(p),
            Side::LeftConformal => s.powf(p) - (self.c * (1.0 - s)).powf(p),
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        let p = self.p;
        let cp = self.c.powf(p);
        match self.side {
            Side::RightConformal => -p * (1.0 - s).powf(p - 1.0) - p * cp * s.powf(p - 1.0),
            Side::LeftConformal => p * s.powf(p - 1.0) + p * cp * (1.0 - s).powf(p - 1.0),
        }
    }

    /// `None` within 1e-9 of an endpoint where `(.)^(p-2)` blows up.
    pub fn d2(&self, s: f64) -> Option<f64> {
        let p = self.p;
        if p < 2.0 && (s < SINGULAR_GUARD || 1.0 - s < SINGULAR_GUARD) {
            return None;
        }
        let cp = self.c.powf(p);
        let k = p * (p - 1.0);
        Some(match self.side {
            Side::RightConformal => k * (1.0 - s).powf(p - 2.0) - k * cp * s.powf(p - 2.0),
            Side::LeftConformal => k * s.powf(p - 2.0) - k * cp * (1.0 - s).powf(p - 2.0),
        })
    }

    pub fn eval(&self, s: f64) -> GValues {
        GValues {
            g: self.value(s),
            d1: self.d1(s),
            d2: self.d2(s),
        }
    }
}

/// `g`, `g'` and (when defined) `g''` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GValues {
    pub g: f64,
    pub d1: f64,
    pub d2: Option<f64>,
}

/// `L_p g` and `H_p g` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorValues {
    /// `s g'' + (1-s) g' + p g`
    pub l_op: f64,
    /// `-s(1-s) g'' + (p-1)(1-2s) g' + p(p-1) g`
    pub h_op: f64,
    /// Sum of the magnitudes of the terms of `l_op`.
    pub l_scale: f64,
    /// Sum of the magnitudes of the terms of `h_op`.
    pub h_scale: f64,
}

impl OperatorValues {
    pub fn from_values(p: f64, s: f64, g: f64, d1: f64, d2: f64) -> Self {
        let l_terms = [s * d2, (1.0 - s) * d1, p * g];
        let h_terms = [-s * (1.0 - s) * d2, (p - 1.0) * (1.0 - 2.0 * s) * d1, p * (p - 1.0) * g];
        OperatorValues {
            l_op: l_terms.iter().sum(),
            h_op: h_terms.iter().sum(),
            l_scale: l_terms.iter().map(|t| t.abs()).sum(),
            h_scale: h_terms.iter().map(|t| t.abs()).sum(),
        }
    }
}

/// `H_p L_p(s)` for the bare Laguerre function.
pub fn h_operator_laguerre(p: f64, s: f64) -> OperatorValues {
    let e = laguerre_eval(p, s, DEFAULT_REL_TOL);
    OperatorValues::from_values(p, s, e.value, e.d1, e.d2)
}

/// `a = v'(z) / L_p'(z)`: the factor that makes `a L_p` meet the obstacle
/// with matching slope at `z`, where both vanish.
pub fn touch_coefficient(p: f64, z: f64, obstacle: &Obstacle) -> Result<f64> {
    let lag = laguerre_eval(p, z, DEFAULT_REL_TOL);
    if lag.d1.abs() < 1e-12 {
        return Err(Error::DegenerateDerivative(lag.d1));
    }
    Ok(obstacle.d1(z) / lag.d1)
}

/// The majorant profile `g` for one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellmanProfile {
    pub constants: SharpConstants,
    pub a_p: f64,
    pub side: Side,
    pub obstacle: Obstacle,
}

impl BellmanProfile {
    pub fn new(p: f64) -> Result<Self> {
        let constants = sharp_constants(p)?;
        let obstacle = Obstacle::new(p, constants.c_p, constants.side);
        let a_p = touch_coefficient(p, constants.z_p, &obstacle)?;
        Ok(BellmanProfile {
            constants,
            a_p,
            side: constants.side,
            obstacle,
        })
    }

    /// A deliberately wrong profile: obstacle built with constant `c`, still
    /// glued to `a L_p` at `z_p` with slope matching. For `c != c_p` the
    /// obstacle does not vanish at `z_p`, so `g` is discontinuous there and
    /// fails to majorize.
    pub fn with_constant(p: f64, c: f64) -> Result<Self> {
        let mut profile = BellmanProfile::new(p)?;
        profile.obstacle = Obstacle::new(p, c, profile.side);
        profile.a_p = touch_coefficient(p, profile.constants.z_p, &profile.obstacle)?;
        Ok(profile)
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.constants.p
    }

    #[inline]
    pub fn z_p(&self) -> f64 {
        self.constants.z_p
    }

    pub fn laguerre_branch(&self, s: f64) -> GValues {
        let e = laguerre_eval(self.p(), s, DEFAULT_REL_TOL);
        GValues {
            g: self.a_p * e.value,
            d1: self.a_p * e.d1,
            d2: Some(self.a_p * e.d2),
        }
    }

    pub fn obstacle_branch(&self, s: f64) -> GValues {
        self.obstacle.eval(s)
    }

    /// `g` on `[0, 1]`; the Laguerre branch is used at `s = z_p`.
    pub fn eval(&self, s: f64) -> GValues {
        if s <= self.z_p() {
            self.laguerre_branch(s)
        } else {
            self.obstacle_branch(s)
        }
    }

    pub fn operator_values(&self, s: f64) -> Result<OperatorValues> {
        let g = self.eval(s);
        let d2 = g.d2.ok_or(Error::SecondDerivativeUnavailable(s))?;
        Ok(OperatorValues::from_values(self.p(), s, g.g, g.d1, d2))
    }

    /// `U(x, y) = (x + y)^p g(y / (x + y))`.
    pub fn lift_value(&self, x: f64, y: f64) -> Result<f64> {
        let r = x + y;
        if r <= 0.0 {
            return Err(Error::OriginUndefined);
        }
        Ok(r.powf(self.p()) * self.eval(y / r).g)
    }

    /// `U` and its partial derivatives up to second order at `(x, y)`.
    pub fn lift(&self, x: f64, y: f64) -> Result<UPartials> {
        let r = x + y;
        if r <= 0.0 {
            return Err(Error::OriginUndefined);
        }
        let s = y / r;
        if s > self.z_p() {
            // direct form: the section formula cancels catastrophically
            // for large p where c^p s^p dominates
            return UPartials::from_obstacle(&self.obstacle, x, y).ok_or(Error::SecondDerivativeUnavailable(s));
        }
        let g = self.eval(s);
        let d2 = g.d2.ok_or(Error::SecondDerivativeUnavailable(s))?;
        Ok(UPartials::from_section(self.p(), r, s, g.g, g.d1, d2))
    }
}

/// `U` and its partials. Derived from the section values by homogeneity:
/// first derivatives scale as `r^(p-1)`, second as `r^(p-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UPartials {
    pub u: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_xx: f64,
    pub u_xy: f64,
    pub u_yy: f64,
}

impl UPartials {
    pub fn from_section(p: f64, r: f64, s: f64, g: f64, g1: f64, g2: f64) -> Self {
        let k = p * (p - 1.0);
        let r1 = r.powf(p - 1.0);
        let r2 = r.powf(p - 2.0);
        UPartials {
            u: r * r1 * g,
            u_x: r1 * (p * g - s * g1),
            u_y: r1 * (p * g + (1.0 - s) * g1),
            u_xx: r2 * (k * g - 2.0 * (p - 1.0) * s * g1 + s * s * g2),
            u_xy: r2 * (k * g + (p - 1.0) * (1.0 - 2.0 * s) * g1 - s * (1.0 - s) * g2),
            u_yy: r2 * (k * g + 2.0 * (p - 1.0) * (1.0 - s) * g1 + (1.0 - s) * (1.0 - s) * g2),
        }
    }

    /// Partials of `x^p - c^p y^p` (right side) or `y^p - c^p x^p` (left
    /// side) for `x, y >= 0`. `None` where a second derivative is singular.
    pub fn from_obstacle(obstacle: &Obstacle, x: f64, y: f64) -> Option<Self> {
        let p = obstacle.p;
        let r = x + y;
        if p < 2.0 && (x < SINGULAR_GUARD * r || y < SINGULAR_GUARD * r) {
            return None;
        }
        let cp = obstacle.c.powf(p);
        let k = p * (p - 1.0);
        // (plain, penalized) coordinates
        let (a, b) = match obstacle.side {
            Side::RightConformal => (x, y),
            Side::LeftConformal => (y, x),
        };
        let u = a.powf(p) - cp * b.powf(p);
        let (da, db) = (p * a.powf(p - 1.0), -p * cp * b.powf(p - 1.0));
        let (daa, dbb) = (k * a.powf(p - 2.0), -k * cp * b.powf(p - 2.0));
        Some(match obstacle.side {
            Side::RightConformal => UPartials { u, u_x: da, u_y: db, u_xx: daa, u_xy: 0.0, u_yy: dbb },
            Side::LeftConformal => UPartials { u, u_x: db, u_y: da, u_xx: dbb, u_xy: 0.0, u_yy: daa },
        })
    }
}

/// The equation defining the crossover `s_p` where `L_p v_{c}` changes sign:
/// `((1 - s)/s)^(p-2) = p/(p-1) c^p`, solved in closed form in log space.
pub fn s_p_threshold(p: f64, c: f64) -> Result<f64> {
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("s_p needs p > 2, got {p}")));
    }
    let log_rhs = (p / (p - 1.0)).ln() + p * c.ln();
    let log_t = log_rhs / (p - 2.0);
    Ok(1.0 / (1.0 + log_t.exp()))
}

/// The touching curve `F(s)` on `(0, z_p)` and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TouchingCurve {
    pub f: f64,
    /// `p (1-s)^(p-2) / s^p * L_p H_p L_p / (s L_p' - p L_p)^2`
    pub df: f64,
}

pub fn touching_curve_f(p: f64, s: f64) -> TouchingCurve {
    let e = laguerre_eval(p, s, DEFAULT_REL_TOL);
    let (l, l1) = (e.value, e.d1);
    let num = (1.0 - s).powf(p) * l1 + p * (1.0 - s).powf(p - 1.0) * l;
    let den = s.powf(p) * l1 - p * s.powf(p - 1.0) * l;
    let h = OperatorValues::from_values(p, s, l, l1, e.d2).h_op;
    let q = s * l1 - p * l;
    TouchingCurve {
        f: num / den,
        df: p * (1.0 - s).powf(p - 2.0) / s.powf(p) * l * h / (q * q),
    }
}

/// Whether the obstacle with constant `c` is strictly positive at `z_p`.
/// When it is, no Laguerre supersolution can majorize it.
pub fn sharpness_witness(p: f64, c: f64) -> Result<bool> {
    let z = smallest_zero(p, DEFAULT_ZERO_TOL)?.z;
    Ok(Obstacle::new(p, c, Side::for_order(p)).value(z) > 0.0)
}
