//! Closed forms and series for λ₁, exit-time moments and G_{p,d} on the
//! canonical domains.

use std::f64::consts::PI;

use serde::Serialize;

use super::spec::{norm, DomainSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate, j0_zero, log_gamma, normal_sf, RealFn1D};

/// Series stop once a term falls below this.
pub const SERIES_TOL: f64 = 1e-14;
/// Hard cap on series terms for the closed-form evaluators.
pub const SERIES_CAP: usize = 200;

const QUAD_TOL: f64 = 1e-13;
const QUAD_BUDGET: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactKind {
    ExactClosedForm,
    SeriesTruncated,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactValue {
    /// Midpoint for intervals.
    pub value: f64,
    pub kind: ExactKind,
    pub interval: Option<(f64, f64)>,
    pub series_terms: Option<usize>,
}

impl ExactValue {
    pub fn exact(value: f64) -> Self {
        ExactValue { value, kind: ExactKind::ExactClosedForm, interval: None, series_terms: None }
    }

    pub fn series(value: f64, terms: Option<usize>) -> Self {
        ExactValue { value, kind: ExactKind::SeriesTruncated, interval: None, series_terms: terms }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        ExactValue { value: 0.5 * (lo + hi), kind: ExactKind::Interval, interval: Some((lo, hi)), series_terms: None }
    }

    /// (lo, hi); a point value gives a degenerate interval.
    pub fn bounds(&self) -> (f64, f64) {
        self.interval.unwrap_or((self.value, self.value))
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        ExactValue { value: f(self.value), interval: self.interval.map(|(lo, hi)| (f(lo), f(hi))), ..self }
    }

    fn combine(self, other: ExactValue) -> Self {
        let kind = match (self.kind, other.kind) {
            (ExactKind::Interval, _) | (_, ExactKind::Interval) => ExactKind::Interval,
            (ExactKind::SeriesTruncated, _) | (_, ExactKind::SeriesTruncated) => ExactKind::SeriesTruncated,
            _ => ExactKind::ExactClosedForm,
        };
        let (a, b) = (self.bounds(), other.bounds());
        let interval = (kind == ExactKind::Interval).then_some((a.0 * b.0, a.1 * b.1));
        ExactValue {
            value: interval.map_or(self.value * other.value, |(lo, hi)| 0.5 * (lo + hi)),
            kind,
            interval,
            series_terms: match (self.series_terms, other.series_terms) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }
}

fn not_available(what: &str, spec: &DomainSpec) -> Error {
    Error::NotAvailable(format!("{what} has no closed form for `{spec}`; {}", match what {
        "lambda1" => "use the finite-difference solver (eigen)",
        _ => "use Monte Carlo (mc)",
    }))
}

/// Principal Dirichlet eigenvalue of −Δ.
pub fn lambda1_exact(spec: &DomainSpec) -> Result<ExactValue> {
    match spec {
        DomainSpec::Box { half_widths } => {
            Ok(ExactValue::exact(PI * PI / 4.0 * half_widths.iter().map(|a| 1.0 / (a * a)).sum::<f64>()))
        }
        DomainSpec::Slab { half_width, .. } => Ok(ExactValue::exact(PI * PI / (4.0 * half_width * half_width))),
        DomainSpec::EquilateralTriangle { inradius } => Ok(ExactValue::exact(4.0 * PI * PI / (9.0 * inradius * inradius))),
        DomainSpec::Ball { d: 2, radius } => Ok(ExactValue::exact(j0_zero().powi(2) / (radius * radius))),
        DomainSpec::Ellipse { a, b } => {
            let s = (a * a + b * b) / (a * a * b * b);
            Ok(ExactValue::interval(PI * PI / 4.0 * s, j0_zero().powi(2) / 2.0 * s))
        }
        _ => Err(not_available("lambda1", spec)),
    }
}

fn check_inside(spec: &DomainSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.dim() {
        return Err(Error::domain(format!("point has {} coordinates, domain is {}-dimensional", x.len(), spec.dim())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("point must be finite"));
    }
    let sd = spec.signed_distance(x);
    let scale = spec.inradius();
    if sd > 1e-12 * scale {
        return Err(Error::domain(format!("point lies outside `{spec}`")));
    }
    Ok(sd)
}

fn on_boundary(sd: f64, spec: &DomainSpec) -> bool {
    sd >= -1e-15 * spec.inradius()
}

/// E_x[τ] for Brownian motion with generator ½Δ.
pub fn mean_exit(spec: &DomainSpec, x: &[f64]) -> Result<f64> {
    let sd = check_inside(spec, x)?;
    if on_boundary(sd, spec) {
        return Ok(0.0);
    }
    let v = match spec {
        DomainSpec::Ball { d, radius } => (radius * radius - norm(x).powi(2)) / *d as f64,
        DomainSpec::Ellipse { a, b } => {
            let (a2, b2) = (a * a, b * b);
            (a2 * b2 - b2 * x[0] * x[0] - a2 * x[1] * x[1]) / (a2 + b2)
        }
        DomainSpec::EquilateralTriangle { inradius } => {
            let faces = spec.faces().expect("triangle faces");
            2.0 / (3.0 * inradius) * faces.iter().map(|f| -f.excess(x)).product::<f64>()
        }
        DomainSpec::Slab { d, half_width } => half_width * half_width - x[d - 1] * x[d - 1],
        DomainSpec::Box { half_widths } => match half_widths.len() {
            1 => half_widths[0].powi(2) - x[0] * x[0],
            2 => match rectangle_mean_exit_series(half_widths[0], half_widths[1], x[0], x[1]) {
                Some((v, _)) => v,
                None => box_moment_quadrature(half_widths, x, 1.0)?,
            },
            _ => box_moment_quadrature(half_widths, x, 1.0)?,
        },
        _ => return Err(not_available("mean exit time", spec)),
    };
    Ok(v.max(0.0))
}

/// E_x[τ] on the rectangle (−a1,a1)×(−a2,a2) as a one-dimensional torsion
/// profile plus a cosh-ratio correction series. The expansion axis is
/// chosen for the fastest decay; `None` if [`SERIES_CAP`] terms do not
/// reach [`SERIES_TOL`].
pub fn rectangle_mean_exit_series(a1: f64, a2: f64, x1: f64, x2: f64) -> Option<(f64, usize)> {
    // expand along axis i; decay per odd index is exp(−π(a_j − |x_j|)/(2a_i))
    let rate1 = (a2 - x2.abs()) / a1;
    let rate2 = (a1 - x1.abs()) / a2;
    let (ai, aj, xi, xj) = if rate1 >= rate2 { (a1, a2, x1, x2) } else { (a2, a1, x2, x1) };
    let mut sum = 0.0;
    for n in 0..SERIES_CAP {
        let m = (2 * n + 1) as f64;
        let k = m * PI / (2.0 * ai);
        // cosh(k xj)/cosh(k aj) without overflow
        let ratio = (k * (xj.abs() - aj)).exp() * (1.0 + (-2.0 * k * xj.abs()).exp()) / (1.0 + (-2.0 * k * aj).exp());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (k * xi).cos() * ratio / (m * m * m);
        sum += term;
        if term.abs() * ai * ai < SERIES_TOL && ratio / (m * m * m) < SERIES_TOL {
            let v = ai * ai - xi * xi - 32.0 * ai * ai / PI.powi(3) * sum;
            return Some((v, n + 1));
        }
    }
    None
}

/// Σ_{n≥0} (−1)ⁿ(2n+1)^{−3} sech((n+½)π·ratio), stopping at the first term
/// below [`SERIES_TOL`] or after `cap` terms. Returns (sum, terms used,
/// converged).
pub fn sech_series(ratio: f64, cap: usize) -> (f64, usize, bool) {
    let mut sum = 0.0;
    for n in 0..cap {
        let m = (2 * n + 1) as f64;
        let x = (n as f64 + 0.5) * PI * ratio;
        let sech = 2.0 * (-x).exp() / (1.0 + (-2.0 * x).exp());
        let term = sech / (m * m * m);
        sum += if n % 2 == 0 { term } else { -term };
        if term < SERIES_TOL {
            return (sum, n + 1, true);
        }
    }
    (sum, cap, false)
}

/// E₀[τ] on the unit square, 1 − (32/π³)Σ(−1)ⁿ(2n+1)^{−3}sech((n+½)π).
pub fn square_center_mean_exit() -> ExactValue {
    let (s, terms, _) = sech_series(1.0, SERIES_CAP);
    ExactValue::series(1.0 - 32.0 / PI.powi(3) * s, Some(terms))
}

/// (1+a²)[1 − (32/π³)Σ(−1)ⁿ(2n+1)^{−3}sech((n+½)π/a)], the rectangle form
/// equal to G_{1,2} of an a:1 rectangle divided by π²/4.
///
/// This series converges slowly for large `a`, so `cap` is left to the caller.
pub fn rectangle_display(a: f64, cap: usize) -> Result<ExactValue> {
    if !(a > 0.0) {
        return Err(Error::domain("aspect ratio must be > 0"));
    }
    let (s, terms, ok) = sech_series(1.0 / a, cap);
    if !ok {
        return Err(Error::Convergence { what: format!("sech series at a={a}"), iterations: terms, residual: f64::NAN });
    }
    Ok(ExactValue::series((1.0 + a * a) * (1.0 - 32.0 / PI.powi(3) * s), Some(terms)))
}

/// P_x(τ > t) for the interval (−1, 1).
///
/// Eigenfunction series for t ≥ 0.05, Gaussian images below.
pub fn survival_interval_at(t: f64, x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return 1.0;
    }
    if t < 0.05 {
        let st = t.sqrt();
        let xp = x + 1.0;
        let l = 2.0;
        let mut s = 0.0;
        for k in -2i32..=2 {
            let o = 2.0 * k as f64 * l;
            s += normal_sf((-xp + o) / st) - normal_sf((l - xp + o) / st) - normal_sf((xp + o) / st)
                + normal_sf((l + xp + o) / st);
        }
        return s.clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for n in 0..SERIES_CAP {
        let m = (2 * n + 1) as f64;
        let decay = (-m * m * PI * PI * t / 8.0).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += sign / m * (m * PI * x / 2.0).cos() * decay;
        if decay / m < SERIES_TOL {
            break;
        }
    }
    (4.0 / PI * s).clamp(0.0, 1.0)
}

/// P₀(τ > t) for the interval (−1, 1).
pub fn survival_interval(t: f64) -> f64 {
    survival_interval_at(t, 0.0)
}

/// P_x(τ > t) on the box with the given half-widths (product of intervals).
pub fn box_survival(half_widths: &[f64], x: &[f64], t: f64) -> f64 {
    half_widths.iter().zip(x).map(|(a, xi)| survival_interval_at(t / (a * a), xi / a)).product()
}

/// E_x[τᵖ] on a box by quadrature of p·t^{p−1}·P_x(τ > t).
pub fn box_moment_quadrature(half_widths: &[f64], x: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain("moment order must be > 0"));
    }
    // time in units of the slowest decay rate
    let rate = PI * PI / 8.0 * half_widths.iter().map(|a| 1.0 / (a * a)).sum::<f64>();
    let surv = |tau: f64| box_survival(half_widths, x, tau / rate);
    let value = if p >= 1.0 {
        let mut f = RealFn1D::with_budget(|tau: f64| p * tau.powf(p - 1.0) * surv(tau), QUAD_BUDGET);
        integrate(&mut f, 0.0, f64::INFINITY, QUAD_TOL * log_gamma(p + 1.0)?.exp())?.value_checked()?
    } else {
        // σ = τᵖ removes the integrable singularity at 0
        let mut f = RealFn1D::with_budget(|sigma: f64| surv(sigma.powf(1.0 / p)), QUAD_BUDGET);
        integrate(&mut f, 0.0, f64::INFINITY, QUAD_TOL)?.value_checked()?
    };
    Ok(value / rate.powf(p))
}

/// Coefficients of u_k(ρ), ρ = |x|²/r², on a ball in R^d for k = 1..=k_max,
/// lowest power first. E_x[τᵏ] = 2ᵏk!·r^{2k}·u_k(ρ).
pub fn ball_torsion_polynomials(d: usize, k_max: usize) -> Vec<Vec<f64>> {
    let half_d = d as f64 / 2.0;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    let mut prev = vec![1.0];
    for _ in 0..k_max {
        // Δρʲ⁺¹ = 4(j+1)(j+d/2)ρʲ in unscaled coordinates
        let mut c = vec![0.0; prev.len() + 1];
        for (j, b) in prev.iter().enumerate() {
            c[j + 1] = -b / (4.0 * (j as f64 + 1.0) * (j as f64 + half_d));
        }
        c[0] = -c[1..].iter().sum::<f64>();
        out.push(c.clone());
        prev = c;
    }
    out
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn integer_order(p: f64) -> Option<usize> {
    ((1.0..=64.0).contains(&p) && p.fract() == 0.0).then_some(p as usize)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// E_x[τᵖ] where a closed form, series or one-dimensional quadrature exists.
pub fn moment_at(spec: &DomainSpec, x: &[f64], p: f64) -> Result<ExactValue> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::domain("moment order must be finite and >= 0"));
    }
    let sd = check_inside(spec, x)?;
    if p == 0.0 {
        return Ok(ExactValue::exact(1.0));
    }
    if on_boundary(sd, spec) {
        return Ok(ExactValue::exact(0.0));
    }
    match spec {
        DomainSpec::Box { half_widths } => {
            if p == 1.0 && half_widths.len() == 1 {
                return Ok(ExactValue::exact(mean_exit(spec, x)?));
            }
            if p == 1.0 && half_widths.len() == 2 {
                if let Some((v, terms)) = rectangle_mean_exit_series(half_widths[0], half_widths[1], x[0], x[1]) {
                    return Ok(ExactValue::series(v.max(0.0), Some(terms)));
                }
            }
            Ok(ExactValue::series(box_moment_quadrature(half_widths, x, p)?, None))
        }
        DomainSpec::Slab { d, half_width } => {
            if p == 1.0 {
                return Ok(ExactValue::exact(mean_exit(spec, x)?));
            }
            Ok(ExactValue::series(box_moment_quadrature(&[*half_width], &[x[d - 1]], p)?, None))
        }
        DomainSpec::Ball { d, radius } => match integer_order(p) {
            Some(k) => {
                let u = ball_torsion_polynomials(*d, k);
                let rho = (norm(x) / radius).powi(2);
                let v = 2f64.powi(k as i32) * factorial(k) * radius.powi(2 * k as i32) * poly_eval(&u[k - 1], rho);
                Ok(ExactValue::exact(v.max(0.0)))
            }
            None => Err(not_available("non-integer moment", spec)),
        },
        DomainSpec::Ellipse { .. } | DomainSpec::EquilateralTriangle { .. } if p == 1.0 => {
            Ok(ExactValue::exact(mean_exit(spec, x)?))
        }
        _ => Err(not_available(&format!("E[τ^{p}]"), spec)),
    }
}

/// E_c[τᵖ] at the natural center c.
pub fn moment_exit_center(spec: &DomainSpec, p: f64) -> Result<ExactValue> {
    if let (DomainSpec::Box { half_widths }, true) = (spec, p == 1.0) {
        if half_widths.len() == 2 {
            // centered rectangle: a pure sech series along the short axis
            let (short, long) = if half_widths[0] <= half_widths[1] {
                (half_widths[0], half_widths[1])
            } else {
                (half_widths[1], half_widths[0])
            };
            let (s, terms, ok) = sech_series(long / short, SERIES_CAP);
            if ok {
                return Ok(ExactValue::series(short * short * (1.0 - 32.0 / PI.powi(3) * s), Some(terms)));
            }
        }
    }
    moment_at(spec, &spec.center(), p)
}

/// G_{p,d} = λ₁ᵖ · sup_x E_x[τᵖ], with the supremum taken at the center.
pub fn shape_functional(spec: &DomainSpec, p: f64) -> Result<ExactValue> {
    if !spec.is_bounded() {
        return Err(Error::domain("the shape functional needs a bounded domain"));
    }
    let lambda = lambda1_exact(spec)?;
    let moment = moment_exit_center(spec, p)?;
    Ok(lambda.map(|l| l.powf(p)).combine(moment))
}

/// u_p(x) = E_x[τᵖ] / (2ᵖΓ(p+1)).
pub fn torsion_moment(spec: &DomainSpec, x: &[f64], p: f64) -> Result<f64> {
    let m = moment_at(spec, x, p)?;
    Ok(m.value / (p * std::f64::consts::LN_2 + log_gamma(p + 1.0)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{find_root, RealFn1D};

    const SQUARE_E0: f64 = 0.589_370_83;
    const SQUARE_G: f64 = 2.908_43;

    #[test]
    fn lambda_examples() {
        assert!((lambda1_exact(&DomainSpec::cube(2)).unwrap().value - PI * PI / 2.0).abs() < 1e-14);
        let t = lambda1_exact(&DomainSpec::equilateral(1.0).unwrap()).unwrap();
        assert!((t.value - 4.0 * PI * PI / 9.0).abs() < 1e-14);
        let e = lambda1_exact(&DomainSpec::ellipse(1.0, 1.0).unwrap()).unwrap();
        let (lo, hi) = e.interval.unwrap();
        assert_eq!(e.kind, ExactKind::Interval);
        assert!((lo - PI * PI / 2.0).abs() < 1e-14 && (hi - j0_zero().powi(2)).abs() < 1e-14);
        let disc = lambda1_exact(&DomainSpec::unit_disc()).unwrap().value;
        assert!(lo <= disc && disc <= hi);
        assert!(matches!(lambda1_exact(&DomainSpec::ball(3, 1.0).unwrap()), Err(Error::NotAvailable(_))));
        let tri = DomainSpec::triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(lambda1_exact(&tri), Err(Error::NotAvailable(_))));
    }

    #[test]
    fn mean_exit_examples() {
        assert_eq!(mean_exit(&DomainSpec::unit_disc(), &[0.0, 0.0]).unwrap(), 0.5);
        assert!((mean_exit(&DomainSpec::ellipse(2.0, 1.0).unwrap(), &[0.0, 0.0]).unwrap() - 0.8).abs() < 1e-15);
        let r = 1.7;
        let t = DomainSpec::equilateral(r).unwrap();
        assert!((mean_exit(&t, &[0.0, 0.0]).unwrap() - 2.0 / 3.0 * r * r).abs() < 1e-14);
        assert_eq!(mean_exit(&t, &[0.0, 2.0 * r]).unwrap(), 0.0);
        assert!(mean_exit(&DomainSpec::unit_disc(), &[1.0, 1.0]).is_err());
        assert!(mean_exit(&DomainSpec::unit_disc(), &[0.0]).is_err());
    }

    /// (1/2)Δu = −1 checked by central differences.
    fn assert_solves_poisson(spec: &DomainSpec, pts: &[[f64; 2]]) {
        let h = 1e-3;
        for x in pts {
            let u = |dx: f64, dy: f64| mean_exit(spec, &[x[0] + dx, x[1] + dy]).unwrap();
            let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
            assert!((0.5 * lap + 1.0).abs() < 1e-5, "{spec} at {x:?}: {}", 0.5 * lap);
        }
    }

    #[test]
    fn mean_exit_solves_poisson() {
        let pts = [[0.1, 0.2], [-0.3, 0.05], [0.0, -0.4]];
        assert_solves_poisson(&DomainSpec::equilateral(1.0).unwrap(), &pts);
        assert_solves_poisson(&DomainSpec::ellipse(2.0, 1.0).unwrap(), &pts);
        assert_solves_poisson(&DomainSpec::boxed(vec![1.0, 3.0]).unwrap(), &pts);
        assert_solves_poisson(&DomainSpec::boxed(vec![2.0, 0.7]).unwrap(), &pts);
    }

    #[test]
    fn rectangle_series_matches_quadrature() {
        let hw = [1.0, 3.0];
        for x in [[0.0, 0.0], [0.5, 0.2], [0.9, 2.9], [-0.99, 0.0], [0.2, -2.5]] {
            let (series, _) = rectangle_mean_exit_series(hw[0], hw[1], x[0], x[1]).unwrap();
            let quad = box_moment_quadrature(&hw, &x, 1.0).unwrap();
            assert!((series - quad).abs() < 1e-10, "{x:?}: {series} vs {quad}");
        }
    }

    #[test]
    fn square_golden_values() {
        let e0 = square_center_mean_exit();
        assert!((e0.value - SQUARE_E0).abs() < 1e-8);
        let g = shape_functional(&DomainSpec::cube(2), 1.0).unwrap();
        assert!((g.value - SQUARE_G).abs() < 5e-6);
        let quad = box_moment_quadrature(&[1.0, 1.0], &[0.0, 0.0], 1.0).unwrap();
        assert!((quad - e0.value).abs() < 1e-7);
        let u = torsion_moment(&DomainSpec::cube(2), &[0.0, 0.0], 1.0).unwrap();
        assert!((u - e0.value / 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_shape_functionals() {
        let disc = shape_functional(&DomainSpec::unit_disc(), 1.0).unwrap().value;
        assert!((disc - 2.8916).abs() < 1e-4);
        let tri = shape_functional(&DomainSpec::equilateral(1.0).unwrap(), 1.0).unwrap().value;
        assert!((tri - 8.0 * PI * PI / 27.0).abs() < 1e-13);
    }

    #[test]
    fn interval_checks() {
        assert!((box_moment_quadrature(&[1.0], &[0.0], 1.0).unwrap() - 1.0).abs() < 1e-12);
        // E_x[τ²] on (−1,1) is (5 − 6x² + x⁴)/3
        assert!((box_moment_quadrature(&[1.0], &[0.0], 2.0).unwrap() - 5.0 / 3.0).abs() < 1e-11);
        assert!((box_moment_quadrature(&[1.0], &[0.5], 2.0).unwrap() - (5.0 - 1.5 + 0.0625) / 3.0).abs() < 1e-11);
        assert!((survival_interval(0.0) - 1.0).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..400 {
            let s = survival_interval(i as f64 * 0.01);
            assert!(s <= prev + 1e-15);
            prev = s;
        }
    }

    #[test]
    fn survival_forms_agree_at_switch() {
        for x in [0.0, 0.3, -0.8, 0.97] {
            for t in [0.03f64, 0.05, 0.08] {
                let st = t.sqrt();
                let xp: f64 = x + 1.0;
                let mut images = 0.0;
                for k in -2i32..=2 {
                    let o = 4.0 * k as f64;
                    images += normal_sf((-xp + o) / st) - normal_sf((2.0 - xp + o) / st) - normal_sf((xp + o) / st)
                        + normal_sf((2.0 + xp + o) / st);
                }
                let mut series = 0.0;
                for n in 0..2000 {
                    let m = (2 * n + 1) as f64;
                    series += if n % 2 == 0 { 1.0 } else { -1.0 } / m
                        * (m * PI * x / 2.0).cos()
                        * (-m * m * PI * PI * t / 8.0).exp();
                }
                assert!((images - 4.0 / PI * series).abs() < 1e-13, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn ball_hierarchy() {
        let u = ball_torsion_polynomials(2, 3);
        assert_eq!(u[0], vec![0.25, -0.25]);
        let expect = [3.0 / 64.0, -4.0 / 64.0, 1.0 / 64.0];
        for (c, e) in u[1].iter().zip(expect) {
            assert!((c - e).abs() < 1e-16);
        }
        let disc = DomainSpec::unit_disc();
        assert!((moment_at(&disc, &[0.0, 0.0], 2.0).unwrap().value - 0.375).abs() < 1e-15);
        assert!((moment_at(&disc, &[0.0, 0.0], 3.0).unwrap().value - 19.0 / 48.0).abs() < 1e-15);
        // d = 3, k = 1: (1 − ρ)/3
        let b3 = DomainSpec::ball(3, 2.0).unwrap();
        assert!((moment_at(&b3, &[1.0, 0.0, 0.0], 1.0).unwrap().value - 1.0).abs() < 1e-15);
        assert!(matches!(moment_at(&disc, &[0.0, 0.0], 1.5), Err(Error::NotAvailable(_))));
    }

    #[test]
    fn p_zero_and_boundary() {
        for spec in [DomainSpec::unit_disc(), DomainSpec::cube(2), DomainSpec::equilateral(1.0).unwrap()] {
            assert_eq!(moment_at(&spec, &spec.center(), 0.0).unwrap().value, 1.0);
        }
        assert_eq!(torsion_moment(&DomainSpec::cube(2), &[1.0, 0.3], 1.0).unwrap(), 0.0);
        assert_eq!(torsion_moment(&DomainSpec::unit_disc(), &[0.6, 0.8], 1.0).unwrap(), 0.0);
        assert!((torsion_moment(&DomainSpec::unit_disc(), &[0.0, 0.0], 1.0).unwrap() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn scale_invariance() {
        let specs = [
            DomainSpec::unit_disc(),
            DomainSpec::boxed(vec![1.0, 2.5]).unwrap(),
            DomainSpec::boxed(vec![1.0, 2.0, 0.5]).unwrap(),
            DomainSpec::equilateral(1.0).unwrap(),
            DomainSpec::ellipse(2.0, 1.0).unwrap(),
        ];
        for spec in &specs {
            for p in [1.0, 2.0] {
                let Ok(g) = shape_functional(spec, p) else { continue };
                for c in [0.5, 2.0] {
                    let gc = shape_functional(&spec.scaled(c).unwrap(), p).unwrap();
                    assert!((gc.value - g.value).abs() < 1e-10 * g.value, "{spec} p={p} c={c}");
                }
            }
        }
    }

    #[test]
    fn floors_and_brackets() {
        let specs = [
            DomainSpec::unit_disc(),
            DomainSpec::cube(2),
            DomainSpec::cube(3),
            DomainSpec::boxed(vec![1.0, 4.0]).unwrap(),
            DomainSpec::equilateral(1.0).unwrap(),
            DomainSpec::ellipse(3.0, 1.0).unwrap(),
            DomainSpec::boxed(vec![1.0]).unwrap(),
        ];
        for spec in &specs {
            let g1 = shape_functional(spec, 1.0).unwrap();
            assert!(g1.bounds().0 >= PI * PI / 4.0 - 1e-12, "Payne floor {spec}");
            for p in [0.5, 1.0, 2.0, 3.0] {
                if let Ok(g) = shape_functional(spec, p) {
                    let floor = 2f64.powf(p) * log_gamma(p + 1.0).unwrap().exp();
                    assert!(g.bounds().0 >= floor - 1e-12, "{spec} p={p}");
                }
            }
            if spec.dim() == 2 {
                let r = spec.inradius();
                let e = moment_exit_center(spec, 1.0).unwrap().value;
                assert!(0.5 * r * r <= e && e <= r * r, "inradius bracket {spec}");
            }
        }
    }

    #[test]
    fn ellipse_sandwich() {
        for a in [1.0, 1.5, 2.0, 5.0] {
            for b in [0.3, 1.0, 2.0] {
                let (lo, hi) = shape_functional(&DomainSpec::ellipse(a, b).unwrap(), 1.0).unwrap().interval.unwrap();
                assert!(lo >= PI * PI / 4.0 - 1e-12 && hi <= j0_zero().powi(2) / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn slab_limit() {
        let mut prev = f64::INFINITY;
        for l in [1.0, 2.0, 5.0, 10.0, 100.0] {
            let g = shape_functional(&DomainSpec::boxed(vec![1.0, l]).unwrap(), 1.0).unwrap().value;
            assert!(g < prev && g > PI * PI / 4.0);
            prev = g;
        }
        assert!((prev - PI * PI / 4.0).abs() < 1e-3);
    }

    #[test]
    fn rectangle_display_is_shape_functional() {
        for a in [1.0, 1.1, 2.0, 3.7, 10.0] {
            let disp = rectangle_display(a, 100_000).unwrap().value;
            let quad = box_moment_quadrature(&[a, 1.0], &[0.0, 0.0], 1.0).unwrap();
            let g = lambda1_exact(&DomainSpec::boxed(vec![a, 1.0]).unwrap()).unwrap().value * quad;
            assert!((disp - g / (PI * PI / 4.0)).abs() < 1e-9, "a={a}");
        }
        assert!(rectangle_display(100.0, SERIES_CAP).is_err());
        assert!(rectangle_display(100.0, 100_000).is_ok());
    }

    #[test]
    fn j0_root_cross_check() {
        // the disc value rests on j₀; re-derive it from the series definition
        let mut f = RealFn1D::new(|x: f64| {
            (0..40).fold((0.0, 1.0), |(s, t), k| (s + t, -t * x * x / (4.0 * ((k + 1) * (k + 1)) as f64))).0
        });
        let z = find_root(&mut f, 2.0, 3.0, 1e-15).unwrap();
        assert!((z - j0_zero()).abs() < 1e-13);
    }
}
