//! Bracketed root finding and golden-section minimization.

use super::func::RealFn1D;
use crate::error::{Error, Result};

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
///
/// Requires a sign change on `[lo, hi]`. Terminates once the bracket is no
/// wider than `tol` (or an exact zero is hit).
pub fn find_root<F: FnMut(f64) -> f64>(f: &mut RealFn1D<F>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::domain(format!("find_root needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f.eval(a)?;
    let mut fb = f.eval(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    loop {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            // b and c bracket the root; report the better end
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f.eval(b)?;
    }
}

/// Result of [`minimize_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
    /// Set when the unimodality check failed and a grid scan was used.
    pub multimodal_suspect: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[lo, hi]`.
///
/// Before searching, three interior probes are compared against the
/// endpoints; if the samples are not consistent with a single valley the
/// interval is scanned on a 33-point grid and the search restarts around the
/// best grid point.
pub fn minimize_1d<F: FnMut(f64) -> f64>(f: &mut RealFn1D<F>, lo: f64, hi: f64, tol: f64) -> Result<Minimum> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::domain(format!("minimize_1d needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})")));
    }
    let xs: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let mut ys = Vec::with_capacity(5);
    for &x in &xs {
        ys.push(f.eval(x)?);
    }
    let (mut a, mut b) = (lo, hi);
    let mut suspect = !is_unimodal(&ys);
    if suspect {
        let n = 33;
        let mut best = (0, f64::INFINITY);
        let mut grid = Vec::with_capacity(n);
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let y = f.eval(x)?;
            grid.push(y);
            if y < best.1 {
                best = (i, y);
            }
        }
        let step = (hi - lo) / (n - 1) as f64;
        a = (lo + step * best.0.saturating_sub(1) as f64).max(lo);
        b = (lo + step * (best.0 + 1) as f64).min(hi);
        // a single strict interior valley after all: not really multimodal
        suspect = !is_unimodal(&grid);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f.eval(x1)?;
    let mut f2 = f.eval(x2)?;
    while (b - a) > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f.eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f.eval(x2)?;
        }
    }
    let (argmin, min) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    // endpoint minima of monotone functions
    let (ea, eb) = (f.eval(lo)?, f.eval(hi)?);
    let best = [(argmin, min), (lo, ea), (hi, eb)]
        .into_iter()
        .fold((argmin, min), |acc, p| if p.1 < acc.1 { p } else { acc });
    Ok(Minimum { argmin: best.0, min: best.1, multimodal_suspect: suspect })
}

/// Samples decrease then increase (ties allowed).
fn is_unimodal(ys: &[f64]) -> bool {
    let mut rising = false;
    for w in ys.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if rising && w[1] < w[0] {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let mut f = RealFn1D::new(|y: f64| y - 0.5);
        let r = find_root(&mut f, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn no_sign_change_is_bracket_error() {
        let mut f = RealFn1D::new(|y: f64| y * y + 1.0);
        assert!(matches!(find_root(&mut f, -1.0, 1.0, 1e-10), Err(Error::Bracket { .. })));
    }

    #[test]
    fn budget_exhaustion_is_convergence_error() {
        let mut f = RealFn1D::with_budget(|y: f64| y.powi(3) - 0.3, 4);
        assert!(matches!(find_root(&mut f, 0.0, 1.0, 1e-15), Err(Error::Convergence { .. })));
    }

    #[test]
    fn root_matches_bisection() {
        let g = |x: f64| x.exp() - 3.0 * x;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(lo) * g(m) <= 0.0 {
                hi = m
            } else {
                lo = m
            }
        }
        let mut f = RealFn1D::new(g);
        let r = find_root(&mut f, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - lo).abs() < 1e-13);
        assert!(f.evaluations() < 30);
    }

    #[test]
    fn golden_quadratic() {
        let mut f = RealFn1D::new(|x: f64| (x - 2.0).powi(2));
        let m = minimize_1d(&mut f, 0.0, 5.0, 1e-9).unwrap();
        assert!((m.argmin - 2.0).abs() < 1e-8);
        assert!(m.min < 1e-15);
        assert!(!m.multimodal_suspect);
    }

    #[test]
    fn golden_cosh() {
        let mut f = RealFn1D::new(|x: f64| (x - 1.0).cosh());
        let m = minimize_1d(&mut f, -3.0, 3.0, 1e-9).unwrap();
        assert!((m.argmin - 1.0).abs() < 1e-7); // flat bottom: sqrt(eps) resolution
        assert!((m.min - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_monotone_hits_endpoint() {
        let mut f = RealFn1D::new(|x: f64| x);
        let m = minimize_1d(&mut f, 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(m.argmin, 0.0);
    }

    #[test]
    fn golden_flags_two_valleys() {
        // deeper well near 0.85, shallower near 0.15
        let mut f = RealFn1D::new(|x: f64| -(-(x - 0.15f64).powi(2) * 400.0).exp() - 2.0 * (-(x - 0.85f64).powi(2) * 400.0).exp());
        let m = minimize_1d(&mut f, 0.0, 1.0, 1e-10).unwrap();
        assert!(m.multimodal_suspect);
        assert!((m.argmin - 0.85).abs() < 1e-6);
    }
}
