//! Universal constants bounding G_{p,d} over all domains with λ₁ > 0.
//!
//! Every quantity that involves `C_d = e^{d/4} √2 (8d)^{-d/4} √(Γ(d)/Γ(d/2))`
//! is assembled in log space so that dimensions up to 10⁶ stay finite.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    find_root, integrate, ln_gamma_pos, ln_upper_incomplete_gamma, minimize_1d,
    scaled_upper_incomplete_gamma, RealFn1D, Upper,
};

/// `c = ¼ √(5 (1 + ¼ ln 2))`.
pub fn c_const() -> f64 {
    0.25 * (5.0 * (1.0 + 0.25 * std::f64::consts::LN_2)).sqrt()
}

fn check_d(d: u64) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("moment order must be finite and > 0, got {p}")));
    }
    Ok(())
}

/// 2^p Γ(p+1), the universal floor of G_{p,d}.
pub fn lower_bound(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((p * std::f64::consts::LN_2 + ln_gamma_pos(p + 1.0)).exp())
}

/// ln C_d.
pub fn log_cd(d: u64) -> Result<f64> {
    check_d(d)?;
    let df = d as f64;
    Ok(df / 4.0 + 0.5 * std::f64::consts::LN_2 - df / 4.0 * (8.0 * df).ln()
        + 0.5 * (ln_gamma_pos(df) - ln_gamma_pos(df / 2.0)))
}

/// ln [C_d (1 + 1/√ε)^{d/2}].
fn ln_k(d: u64, eps: f64) -> Result<f64> {
    Ok(log_cd(d)? + d as f64 / 2.0 * (1.0 / eps.sqrt()).ln_1p())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The two-variable objective whose infimum over a > 0, ε ∈ (0,1) is C₁(d,p):
///
/// ```text
/// a^p / (2^p Γ(p+1)) + C_d (1 + 1/√ε)^{d/2} Γ(p, (1−ε)a/2) / (Γ(p) (1−ε)^p)
/// ```
pub fn c1_objective(d: u64, p: f64, a: f64, eps: f64) -> Result<f64> {
    check_p(p)?;
    check_eps(eps)?;
    if !(a >= 0.0) {
        return Err(Error::domain(format!("a must be >= 0, got {a}")));
    }
    let lk = ln_k(d, eps)?;
    let first = (p * (a.ln() - std::f64::consts::LN_2) - ln_gamma_pos(p + 1.0)).exp();
    let z = (1.0 - eps) * a / 2.0;
    let second = (lk - ln_gamma_pos(p) - p * (-eps).ln_1p() + ln_upper_incomplete_gamma(p, z)?).exp();
    Ok(if a == 0.0 { second } else { first + second })
}

/// Stationary point in `a` of [`c1_objective`] for fixed ε (independent of p):
/// `a_ε = 2 ln[C_d (1 + 1/√ε)^{d/2}] / (1−ε)`, clamped at 0.
pub fn critical_a(d: u64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok((2.0 * ln_k(d, eps)? / (1.0 - eps)).max(0.0))
}

/// [`c1_objective`] with `a` eliminated through [`critical_a`].
pub fn reduced_c1_objective(d: u64, p: f64, eps: f64) -> Result<f64> {
    check_p(p)?;
    check_eps(eps)?;
    let z = ln_k(d, eps)?;
    let lnw = -p * (-eps).ln_1p();
    if z <= 0.0 {
        // a = 0: the whole mass sits in the tail term, Γ(p,0)/Γ(p) = 1
        return Ok((z + lnw).exp());
    }
    let s = scaled_upper_incomplete_gamma(p, z)?;
    let bracket = (-ln_gamma_pos(p + 1.0)).exp() + s * (-ln_gamma_pos(p)).exp();
    Ok((p * z.ln() + lnw).exp() * bracket)
}

/// C₁(d,p) together with its minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C1Constant {
    pub c1: f64,
    pub a_star: f64,
    pub eps_star: f64,
    /// More than one local minimum was seen on the ε grid.
    pub multimodal: bool,
}

/// Grid over (0,1), log-spaced towards both ends, 64 points per end.
fn eps_grid() -> Vec<f64> {
    let n = 64;
    let mut g = Vec::with_capacity(2 * n);
    for i in 0..n {
        // ε from 1e-8 up to 0.5
        let t = i as f64 / (n - 1) as f64;
        g.push(10f64.powf(-8.0 + t * (0.5f64.log10() + 8.0)));
    }
    for i in (0..n - 1).rev() {
        // 1 − ε from 0.5 down to 1e-10
        let t = i as f64 / (n - 1) as f64;
        g.push(1.0 - 10f64.powf(-10.0 + t * (0.5f64.log10() + 10.0)));
    }
    g
}

pub fn c1_constant(d: u64, p: f64) -> Result<C1Constant> {
    check_d(d)?;
    check_p(p)?;
    let grid = eps_grid();
    let vals = grid
        .iter()
        .map(|&e| reduced_c1_objective(d, p, e))
        .collect::<Result<Vec<_>>>()?;
    let local_minima: Vec<usize> = (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i] < vals[i - 1];
            let right = i + 1 == vals.len() || vals[i] <= vals[i + 1];
            left && right
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for &i in &local_minima {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let mut f = RealFn1D::new(|e: f64| reduced_c1_objective(d, p, e).unwrap_or(f64::INFINITY));
        let m = if lo < hi {
            let m = minimize_1d(&mut f, lo, hi, 1e-13 * hi.max(1e-3))?;
            (m.argmin, m.min)
        } else {
            (grid[i], vals[i])
        };
        if best.is_none_or(|b| m.1 < b.1) {
            best = Some(m);
        }
    }
    let (eps_star, c1) = best.ok_or_else(|| Error::Convergence {
        what: "C1 minimization (no grid minimum)".into(),
        iterations: grid.len(),
        residual: f64::NAN,
    })?;
    if !c1.is_finite() || !(c1 > 0.0) {
        return Err(Error::Convergence { what: "C1 minimization".into(), iterations: grid.len(), residual: c1 });
    }
    Ok(C1Constant { c1, a_star: critical_a(d, eps_star)?, eps_star, multimodal: local_minima.len() > 1 })
}

/// 2^p Γ(p+1) C₁(d,p).
pub fn upper_bound_c1(d: u64, p: f64) -> Result<f64> {
    Ok(lower_bound(p)? * c1_constant(d, p)?.c1)
}

/// A_d = ln[2^{d/2} C_d].
fn a_d(d: u64) -> Result<f64> {
    Ok(d as f64 / 2.0 * std::f64::consts::LN_2 + log_cd(d)?)
}

/// F_d(y) = −d/4 + d√y/4 + y(1+A_d) + (d/2) y ln((1+1/√y)/2).
pub fn corollary_equation(d: u64, y: f64) -> Result<f64> {
    let df = d as f64;
    let sy = y.sqrt();
    // (1 + 1/√y)/2 = 1 + (1−√y)/(2√y)
    let log_term = ((1.0 - sy) / (2.0 * sy)).ln_1p();
    Ok(-df / 4.0 + df * sy / 4.0 + y * (1.0 + a_d(d)?) + df / 2.0 * y * log_term)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryBound {
    pub y_d: f64,
    pub bound: f64,
}

/// The p = 1 bound `(d/2) / (y_d (1 + √y_d))` with y_d the root of F_d on (0,1).
pub fn corollary_bound(d: u64) -> Result<CorollaryBound> {
    check_d(d)?;
    let a = a_d(d)?;
    let mut f = RealFn1D::new(|y: f64| corollary_equation(d, y).unwrap_or(f64::NAN));
    let lo = 1e-300;
    let y_d = match find_root(&mut f, lo, 1.0, 1e-15) {
        Ok(y) => y,
        Err(Error::Bracket { f_lo, f_hi, .. }) => {
            return Err(Error::Internal(format!(
                "F_{d} has no sign change on (0,1): F(0+)={f_lo}, F(1)={f_hi}, 1+A_d={}",
                1.0 + a
            )))
        }
        Err(e) => return Err(e),
    };
    let df = d as f64;
    Ok(CorollaryBound { y_d, bound: df / 2.0 / (y_d * (1.0 + y_d.sqrt())) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpUpper {
    pub c: f64,
    pub y_d: f64,
    pub kappa: f64,
    pub c2: f64,
    pub bound: f64,
}

/// y_d = (1 + 16c/(5√d))^{-2}, returned as (y_d, 1 − y_d) with the
/// complement formed without cancellation.
fn closed_y(d: u64) -> (f64, f64) {
    let t = 16.0 * c_const() / (5.0 * (d as f64).sqrt());
    let s = (1.0 + t) * (1.0 + t);
    (1.0 / s, t * (2.0 + t) / s)
}

fn sharp_base(d: u64) -> f64 {
    let df = d as f64;
    df / 8.0 + c_const() * df.sqrt() + 1.0
}

/// `2^p (d/8 + c√d + 1 − 1/(1−y_d))^p C₂(d,p)` with
/// `C₂ = 1 + p ∫_1^∞ u^{p−1} e^{(1−u)κ} du` evaluated as `1 + p e^κ κ^{−p} Γ(p,κ)`.
pub fn sharp_upper_bound(d: u64, p: f64) -> Result<SharpUpper> {
    check_d(d)?;
    check_p(p)?;
    let (y_d, one_minus_y) = closed_y(d);
    let base = sharp_base(d);
    let kappa = one_minus_y * base - 1.0;
    if !(kappa > 0.0) {
        return Err(Error::Internal(format!("kappa = {kappa} <= 0 at d = {d}")));
    }
    let c2 = 1.0 + p * scaled_upper_incomplete_gamma(p, kappa)?;
    let inner = base - 1.0 / one_minus_y;
    let bound = (p * (2.0 * inner).ln()).exp() * c2;
    Ok(SharpUpper { c: c_const(), y_d, kappa, c2, bound })
}

/// C₂(d,p) by direct quadrature of its defining tail integral.
pub fn c2_by_quadrature(d: u64, p: f64) -> Result<f64> {
    let kappa = sharp_upper_bound(d, p)?.kappa;
    let mut f = RealFn1D::new(move |u: f64| ((p - 1.0) * u.ln() + (1.0 - u) * kappa).exp());
    let r = integrate(&mut f, 1.0, Upper::Infinity, 1e-13)?;
    Ok(1.0 + p * r.value_checked()?)
}

/// The earlier general-domain bound d/4 + (√d/2)√(5(1+¼ln2)) + 2 (p = 1).
pub fn vogt_bound(d: u64) -> Result<f64> {
    check_d(d)?;
    let df = d as f64;
    Ok(df / 4.0 + df.sqrt() / 2.0 * (5.0 * (1.0 + 0.25 * std::f64::consts::LN_2)).sqrt() + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalBoundParams {
    pub d: u64,
    pub lambda1: f64,
    pub eps: f64,
    pub t: f64,
}

/// Upper envelope for sup_x P_x(τ_D > t):
/// `C_d (1 + 1/√ε)^{d/2} e^{−(1−ε) λ₁ t / 2}`. Not clamped to 1.
pub fn survival_upper(params: SurvivalBoundParams) -> Result<f64> {
    let SurvivalBoundParams { d, lambda1, eps, t } = params;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(t >= 0.0) || !(lambda1 > 0.0) {
        return Err(Error::domain("survival bound needs t >= 0 and lambda1 > 0"));
    }
    Ok((ln_k(d, eps)? - (1.0 - eps) * lambda1 * t / 2.0).exp())
}

/// ln[2^{1/4−d/2} (1+1/√y_d)^{d/2}] + 1 ≤ (1−y_d)(d/8 + c√d + 1) with the
/// closed-form y_d.
pub fn check_log_cd_inequality(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let df = d as f64;
    let (_, one_minus_y) = closed_y(d);
    // (1 + 1/√y_d)/2 = 1 + 8c/(5√d)
    let lhs = 0.25 * std::f64::consts::LN_2 + df / 2.0 * (8.0 * c_const() / (5.0 * df.sqrt())).ln_1p() + 1.0;
    lhs <= one_minus_y * sharp_base(d)
}

/// Every universal constant for one (d, p).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub d: u64,
    pub p: f64,
    pub lower: f64,
    pub c1: f64,
    pub a_star: f64,
    pub eps_star: f64,
    pub c1_multimodal: bool,
    pub upper_c1: f64,
    pub y_d_root: f64,
    pub corollary_bound: Option<f64>,
    pub c_const: f64,
    pub y_d_closed: f64,
    pub kappa: f64,
    pub c2: f64,
    pub sharp_upper: f64,
    pub vogt: Option<f64>,
    /// sharp_upper / d^p
    pub sharp_upper_scaled: f64,
    /// 4^{-p}
    pub asymptotic_limit: f64,
}

impl BoundReport {
    pub fn compute(d: u64, p: f64) -> Result<Self> {
        let lower = lower_bound(p)?;
        let c1 = c1_constant(d, p)?;
        let cor = corollary_bound(d)?;
        let sharp = sharp_upper_bound(d, p)?;
        let is_p1 = p == 1.0;
        Ok(BoundReport {
            d,
            p,
            lower,
            c1: c1.c1,
            a_star: c1.a_star,
            eps_star: c1.eps_star,
            c1_multimodal: c1.multimodal,
            upper_c1: lower * c1.c1,
            y_d_root: cor.y_d,
            corollary_bound: is_p1.then_some(cor.bound),
            c_const: sharp.c,
            y_d_closed: sharp.y_d,
            kappa: sharp.kappa,
            c2: sharp.c2,
            sharp_upper: sharp.bound,
            vogt: if is_p1 { Some(vogt_bound(d)?) } else { None },
            sharp_upper_scaled: (sharp.bound.ln() - p * (d as f64).ln()).exp(),
            asymptotic_limit: 4f64.powf(-p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_gamma;

    #[test]
    fn lower_bound_examples() {
        assert!((lower_bound(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((lower_bound(2.0).unwrap() - 8.0).abs() < 1e-13);
        let half = (2.0 * std::f64::consts::PI).sqrt() / 2.0;
        assert!((lower_bound(0.5).unwrap() - half).abs() < 1e-13);
        assert!(lower_bound(0.0).is_err());
        assert!(lower_bound(-1.0).is_err());
    }

    #[test]
    fn log_cd_small_d() {
        // C_2 = e^{1/2} √2 / 16^{1/2} · √(Γ(2)/Γ(1))
        let direct = (0.5f64.exp() * 2f64.sqrt() / 4.0).ln();
        assert!((log_cd(2).unwrap() - direct).abs() < 1e-14);
        assert!((log_cd(2).unwrap() + 0.539_720_2).abs() < 1e-6);
        for d in 2..=40u64 {
            let df = d as f64;
            let direct = (df / 4.0).exp() * 2f64.sqrt() / (8.0 * df).powf(df / 4.0)
                * (log_gamma(df).unwrap().exp() / log_gamma(df / 2.0).unwrap().exp()).sqrt();
            assert!((log_cd(d).unwrap() - direct.ln()).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn log_cd_upper_inequality() {
        for d in (2..=2000u64).chain([10_000, 1_000_000]) {
            let cap = (0.25 - d as f64 / 2.0) * std::f64::consts::LN_2;
            assert!(log_cd(d).unwrap() <= cap + 1e-12, "d={d}");
        }
    }

    #[test]
    fn log_cd_large_d_is_finite() {
        let d = 100u64;
        let df = d as f64;
        // Stirling with 1/(12x) − 1/(360x³) correction, independent of log_gamma
        let st = |x: f64| (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5));
        let oracle = df / 4.0 + 0.5 * std::f64::consts::LN_2 - df / 4.0 * (8.0 * df).ln() + 0.5 * (st(df) - st(df / 2.0));
        assert!((log_cd(d).unwrap() - oracle).abs() < 1e-8);
        assert!(log_cd(1_000_000).unwrap().is_finite());
    }

    #[test]
    fn c1_reference_point() {
        let v = c1_objective(2, 1.0, 1.65659, 0.173247).unwrap();
        assert!(v <= 2.03785, "{v}");
        let c = c1_constant(2, 1.0).unwrap();
        assert!(c.c1 <= 2.03785 + 1e-4);
        assert!(c.c1 <= v + 1e-12);
        assert!((c.eps_star - 0.173247).abs() < 1e-4);
        assert!((c.a_star - 1.65659).abs() < 1e-3);
        assert!(!c.multimodal);
    }

    #[test]
    fn reduced_objective_matches_two_variable_form() {
        for &(d, p) in &[(2u64, 1.0), (3, 0.5), (5, 2.0), (10, 3.0), (50, 1.5)] {
            for &e in &[0.05, 0.2, 0.5, 0.8] {
                let a = critical_a(d, e).unwrap();
                let two = c1_objective(d, p, a, e).unwrap();
                let one = reduced_c1_objective(d, p, e).unwrap();
                assert!(((two - one) / one).abs() < 1e-10, "d={d} p={p} e={e}: {two} {one}");
                // a is a stationary point: nudging it never helps
                for da in [-1e-3, 1e-3] {
                    if a + da > 0.0 {
                        assert!(c1_objective(d, p, a + da, e).unwrap() >= two - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn c1_positive_and_consistent_with_corollary() {
        for d in [2u64, 3, 5, 10] {
            let two_c1 = 2.0 * c1_constant(d, 1.0).unwrap().c1;
            let cor = corollary_bound(d).unwrap();
            assert!(((two_c1 - cor.bound) / cor.bound).abs() < 1e-3, "d={d}");
        }
        for &p in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            assert!(c1_constant(4, p).unwrap().c1 > 0.0);
        }
    }

    #[test]
    fn corollary_root_d2() {
        // bisection oracle on F_2
        let (mut lo, mut hi) = (1e-12f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if corollary_equation(2, m).unwrap() < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        let cor = corollary_bound(2).unwrap();
        assert!((cor.y_d - lo).abs() < 1e-12);
        assert!((cor.y_d - 0.17325).abs() < 1e-4);
        assert!((cor.bound - 4.077).abs() < 2e-3);
    }

    #[test]
    fn corollary_root_monotone_in_d() {
        let ys: Vec<f64> = [10u64, 100, 1000, 10_000].iter().map(|&d| corollary_bound(d).unwrap().y_d).collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
        assert!(ys.iter().all(|&y| y > 0.0 && y < 1.0));
    }

    #[test]
    fn sharp_upper_examples() {
        assert!((c_const() - 0.605_517_6).abs() < 1e-6);
        let s = sharp_upper_bound(1_000_000, 1.0).unwrap();
        let r = s.bound / 1e6;
        assert!((0.25..=0.2525).contains(&r), "{r}");
        assert!(sharp_upper_bound(2, 1.0).unwrap().kappa > 0.0);
    }

    #[test]
    fn c2_closed_form_matches_quadrature() {
        for &d in &[2u64, 10, 100, 10_000] {
            for &p in &[0.5, 1.0, 2.0, 3.0] {
                let closed = sharp_upper_bound(d, p).unwrap().c2;
                let quad = c2_by_quadrature(d, p).unwrap();
                assert!((closed - quad).abs() < 1e-8, "d={d} p={p}: {closed} {quad}");
            }
        }
    }

    #[test]
    fn c2_decreases_towards_one() {
        for &p in &[1.0, 2.0] {
            let c: Vec<f64> = [100u64, 10_000, 1_000_000].iter().map(|&d| sharp_upper_bound(d, p).unwrap().c2).collect();
            assert!(c.windows(2).all(|w| w[1] < w[0]));
            assert!(c.iter().all(|&v| v > 1.0));
        }
    }

    #[test]
    fn vogt_examples() {
        let d2 = vogt_bound(2).unwrap();
        assert!((d2 - 4.2127).abs() < 1e-3, "{d2}");
        assert!((vogt_bound(4).unwrap() - 5.4221).abs() < 1e-4);
        assert!(((vogt_bound(1_000_000).unwrap() / 1e6) - 0.25).abs() < 3e-3);
        assert!(upper_bound_c1(2, 1.0).unwrap() < d2);
    }

    #[test]
    fn survival_upper_examples() {
        let v = survival_upper(SurvivalBoundParams { d: 2, lambda1: 1.0, eps: 1.0, t: 0.0 }).unwrap();
        assert!((v - 0.5f64.exp() * 2f64.sqrt() / 4.0 * 2.0).abs() < 1e-12);
        assert!((v - 1.1658).abs() < 1e-4);
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let v = survival_upper(SurvivalBoundParams { d: 3, lambda1: 2.0, eps: 0.3, t: i as f64 * 0.2 }).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(survival_upper(SurvivalBoundParams { d: 2, lambda1: 1.0, eps: 0.0, t: 1.0 }).is_err());
    }

    #[test]
    fn log_cd_lemma_holds() {
        assert!(check_log_cd_inequality(2));
        assert!(check_log_cd_inequality(100));
        assert!(!check_log_cd_inequality(1));
    }

    #[test]
    fn sandwich() {
        for d in [2u64, 3, 5, 10, 100, 1000] {
            for &p in &[0.5, 1.0, 2.0, 3.0] {
                let r = BoundReport::compute(d, p).unwrap();
                assert!(r.lower <= r.upper_c1, "d={d} p={p}");
                assert!(r.lower <= r.sharp_upper, "d={d} p={p}");
                assert!(r.y_d_closed > 0.0 && r.y_d_closed < 1.0);
                assert!(r.y_d_root > 0.0 && r.y_d_root < 1.0);
                assert!(r.c2 >= 1.0);
                if p >= 1.0 {
                    // ball floor (d/4)^p
                    assert!(r.sharp_upper >= (d as f64 / 4.0).powf(p));
                }
            }
        }
    }
}
