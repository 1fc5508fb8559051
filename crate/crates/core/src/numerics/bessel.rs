//! J₀ and its first positive zero.

use super::func::RealFn1D;
use super::roots::find_root;

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| ≤ 8, Miller's backward recurrence up to 25, Hankel
/// asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 8.0 {
        series(x)
    } else if x < 25.0 {
        miller(x)
    } else {
        hankel(x)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-3) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // start well above x so J_n(x) is negligible; normalise with
    // 1 = J0 + 2 Σ J_{2k}
    let start = (2 * ((x as usize + 40) / 2)) + 20;
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-300; // J_n
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let prev = 2.0 * n as f64 / x * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
        }
        let m = n - 1;
        if m == 0 {
            j0 = cur;
        } else if m % 2 == 0 {
            norm += 2.0 * cur;
        }
    }
    j0 / (norm + j0)
}

fn hankel(x: f64) -> f64 {
    // P ~ Σ (-1)^k a_{2k} / x^{2k}, Q ~ Σ (-1)^{k+1} a_{2k+1} / x^{2k+1},
    // a_k = Π_{j=1..k} (2j-1)^2 / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut xpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60usize {
        if k > 0 {
            let m = (2 * k - 1) as f64;
            a *= m * m / (k as f64 * 8.0);
            xpow *= x;
        }
        let term = a / xpow;
        if term > last {
            break; // asymptotic series started diverging
        }
        last = term;
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            q += if k.div_ceil(2) % 2 == 0 { term } else { -term };
        }
        if term < 1e-18 {
            break;
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// First positive zero j₀ of J₀.
pub fn first_bessel_zero() -> f64 {
    let mut f = RealFn1D::new(bessel_j0);
    // J0(2) > 0 > J0(3), so the bracket is valid by construction
    find_root(&mut f, 2.0, 3.0, 1e-15).expect("J0 changes sign on [2, 3]")
}
