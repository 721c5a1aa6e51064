use laguerre_bellman::bellman::{
    h_operator_laguerre, s_p_threshold, touching_curve_f, Obstacle,
};
use laguerre_bellman::{dual_constant_ratio, sharp_constants, sharpness_witness, BellmanProfile, Error, Side};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

#[test]
fn constants_at_two_collapse_to_one() {
    let c = sharp_constants(2.0).unwrap();
    assert_eq!(c.side, Side::RightConformal);
    close(c.c_theorem, 1.0, 1e-12);
    close(c.c_p, std::f64::consts::FRAC_1_SQRT_2, 1e-12);
    // the left-side formula agrees at p = 2
    close(c.z_p / (1.0 - c.z_p) / std::f64::consts::SQRT_2, 1.0, 1e-12);
    close(BellmanProfile::new(2.0).unwrap().a_p, 1.0, 1e-12);
}

#[test]
fn side_selection() {
    assert_eq!(sharp_constants(1.5).unwrap().side, Side::LeftConformal);
    assert_eq!(sharp_constants(2.0).unwrap().side, Side::RightConformal);
    assert_eq!(sharp_constants(0.9).unwrap_err(), Error::InvalidOrder(0.9));
}

#[test]
fn touching_coefficient_signs() {
    for p in [2.1, 3.0, 7.0] {
        assert!(BellmanProfile::new(p).unwrap().a_p > 1.0);
    }
    for p in [1.1, 1.5, 1.9] {
        assert!(BellmanProfile::new(p).unwrap().a_p < 0.0);
    }
}

#[test]
fn majorant_glues_c1_at_zero() {
    for p in [1.2, 1.5, 2.0, 3.0, 10.0] {
        let prof = BellmanProfile::new(p).unwrap();
        let z = prof.z_p();
        let l = prof.laguerre_branch(z);
        let r = prof.obstacle_branch(z);
        close(l.g, 0.0, 1e-12);
        close(r.g, 0.0, 1e-12 * r.d1.abs());
        close(l.d1, r.d1, 1e-9 * r.d1.abs());
    }
}

#[test]
fn lift_is_homogeneous() {
    let prof = BellmanProfile::new(3.0).unwrap();
    for (x, y) in [(0.7, 0.2), (0.3, 0.6), (1.0, 0.0)] {
        let u = prof.lift_value(x, y).unwrap();
        let u2 = prof.lift_value(2.5 * x, 2.5 * y).unwrap();
        close(u2, 2.5f64.powi(3) * u, 1e-12 * u.abs().max(1.0));
    }
    assert_eq!(prof.lift_value(0.0, 0.0).unwrap_err(), Error::OriginUndefined);
}

#[test]
fn obstacle_branch_equals_v() {
    let prof = BellmanProfile::new(4.0).unwrap();
    let c = prof.constants.c_p;
    let (x, y) = (0.2, 0.9);
    close(prof.lift_value(x, y).unwrap(), x.powi(4) - c.powi(4) * y.powi(4), 1e-12);
}

#[test]
fn partials_match_finite_differences() {
    for p in [1.5, 2.5, 3.0] {
        let prof = BellmanProfile::new(p).unwrap();
        for (x, y) in [(0.8, 0.15), (0.6, 0.3), (0.2, 0.7)] {
            let u = prof.lift(x, y).unwrap();
            let h = 1e-5;
            let f = |a: f64, b: f64| prof.lift_value(a, b).unwrap();
            let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
            let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
            close(u.u_x, fx, 1e-6 * fx.abs().max(1.0));
            close(u.u_y, fy, 1e-6 * fy.abs().max(1.0));
            close(u.u_xx, fxx, 1e-4 * fxx.abs().max(1.0));
            close(u.u_yy, fyy, 1e-4 * fyy.abs().max(1.0));
            close(u.u_xy, fxy, 1e-4 * fxy.abs().max(1.0));
        }
    }
}

#[test]
fn laguerre_branch_solves_the_ode() {
    let prof = BellmanProfile::new(3.0).unwrap();
    for i in 1..40 {
        let s = prof.z_p() * i as f64 / 40.0;
        let op = prof.operator_values(s).unwrap();
        assert!(op.l_op.abs() <= 1e-12 * op.l_scale, "s={s}: {op:?}");
    }
}

#[test]
fn h_operator_signs() {
    let z2 = 2.0 - 2f64.sqrt();
    for i in 1..=50 {
        let s = z2 * i as f64 / 50.0;
        let h = h_operator_laguerre(2.0, s);
        assert!(h.h_op.abs() <= 1e-13 * h.h_scale.max(1.0));
    }
    for (p, sign) in [(3.0, -1.0), (5.0, -1.0), (1.5, 1.0), (1.2, 1.0)] {
        let z = sharp_constants(p).unwrap().z_p;
        for i in 1..=50 {
            let s = z * i as f64 / 50.0;
            assert!(sign * h_operator_laguerre(p, s).h_op > 0.0, "p={p} s={s}");
        }
    }
}

#[test]
fn crossover_precedes_zero() {
    for p in [2.1, 2.5, 3.0, 5.0, 10.0, 50.0] {
        let c = sharp_constants(p).unwrap();
        let sp = s_p_threshold(p, c.c_p).unwrap();
        assert!(sp > 0.0 && sp < c.z_p, "p={p}: s_p={sp} z_p={}", c.z_p);
        // the obstacle's Laguerre operator changes sign at s_p
        let obstacle = Obstacle::new(p, c.c_p, Side::RightConformal);
        let l = |s: f64| {
            let g = obstacle.eval(s);
            s * g.d2.unwrap() + (1.0 - s) * g.d1 + p * g.g
        };
        assert!(l(0.9 * sp) * l(1.1 * sp) < 0.0 || (sp > 0.5 && l(1.1 * sp) <= 0.0));
    }
    assert!(s_p_threshold(2.0, 1.0).is_err());
}

#[test]
fn touching_curve_direction() {
    for (p, sign) in [(3.0, -1.0), (5.0, -1.0), (1.5, 1.0)] {
        let c = sharp_constants(p).unwrap();
        let mut prev = f64::NAN;
        for i in 1..200 {
            let s = c.z_p * i as f64 / 200.0;
            let t = touching_curve_f(p, s);
            assert!(sign * t.df > 0.0, "p={p} s={s} df={}", t.df);
            if i > 1 {
                assert!(sign * (t.f - prev) > 0.0, "p={p} s={s}");
            }
            prev = t.f;
        }
        // F tends to ((1 - z) / z)^p at the zero
        let near = touching_curve_f(p, c.z_p * (1.0 - 1e-9)).f;
        let target = ((1.0 - c.z_p) / c.z_p).powf(p);
        close(near, target, 1e-6 * target);
    }
}

#[test]
fn crossover_solves_its_defining_equation() {
    for p in [2.1, 3.0, 6.0] {
        let c = sharp_constants(p).unwrap();
        let s = s_p_threshold(p, c.c_p).unwrap();
        let lhs = ((1.0 - s) / s).powf(p - 2.0) * (p - 1.0) / p * (c.z_p / (1.0 - c.z_p)).powf(p);
        close(lhs, 1.0, 1e-10);
    }
}

#[test]
fn smaller_constant_fails_majorization() {
    for p in [1.5, 3.0] {
        let c = sharp_constants(p).unwrap().c_p;
        assert!(sharpness_witness(p, 0.9 * c).unwrap());
        assert!(!sharpness_witness(p, c).unwrap());
    }
}

#[test]
fn dual_ratio_oracle() {
    close(dual_constant_ratio(1e4).unwrap(), 1.0064243, 2e-6);
    close(dual_constant_ratio(100.0).unwrap(), 1.0061583, 2e-6);
    assert!(dual_constant_ratio(1.5).is_err());
}
