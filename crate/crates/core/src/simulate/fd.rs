//! Five-point finite differences on planar domains with Shortley–Weller
//! arms at the boundary.

use serde::Serialize;

use crate::domains::DomainSpec;
use crate::error::{Error, Result};

/// Nodes closer than this fraction of h to the boundary are dropped.
const THETA: f64 = 1e-3;
const MIN_NODES: usize = 100;

/// Node values on a uniform grid; entries outside the mask are 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Coordinates of node (0, 0).
    pub origin: [f64; 2],
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Grid2D {
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear interpolation; 0 outside the grid.
    pub fn interpolate(&self, x: [f64; 2]) -> f64 {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        if !(fx >= 0.0 && fy >= 0.0) || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return 0.0;
        }
        let i = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let j = (fy.floor() as usize).min(self.ny.saturating_sub(2));
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let g = |a: usize, b: usize| self.values.get(b * self.nx + a).copied().unwrap_or(0.0);
        (1.0 - tx) * (1.0 - ty) * g(i, j) + tx * (1.0 - ty) * g(i + 1, j) + (1.0 - tx) * ty * g(i, j + 1) + tx * ty * g(i + 1, j + 1)
    }

    /// Largest node value and its location.
    pub fn max(&self) -> (f64, [f64; 2]) {
        let mut best = (f64::NEG_INFINITY, [f64::NAN; 2]);
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.mask[j * self.nx + i] && self.get(i, j) > best.0 {
                    best = (self.get(i, j), self.point(i, j));
                }
            }
        }
        best
    }

    pub fn interior_nodes(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

const NONE: u32 = u32::MAX;

/// Sparse −Δ_h restricted to interior nodes.
struct Operator {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    /// Grid index of each unknown.
    node: Vec<usize>,
    diag: Vec<f64>,
    links: Vec<[(u32, f64); 4]>,
    symmetric: bool,
}

impl Operator {
    fn build(spec: &DomainSpec, h: f64) -> Result<Operator> {
        if spec.dim() != 2 || !spec.is_bounded() {
            return Err(Error::domain("finite differences need a bounded planar domain"));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("grid spacing must be > 0, got {h}")));
        }
        let c = spec.center();
        let bbox = spec.bounding_box();
        let lo: Vec<i64> = (0..2).map(|k| ((bbox[k].0 - c[k]) / h).floor() as i64).collect();
        let hi: Vec<i64> = (0..2).map(|k| ((bbox[k].1 - c[k]) / h).ceil() as i64).collect();
        let nx = (hi[0] - lo[0] + 1) as usize;
        let ny = (hi[1] - lo[1] + 1) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(Error::domain(format!("grid of {nx}x{ny} nodes is too large")));
        }
        let origin = [c[0] + lo[0] as f64 * h, c[1] + lo[1] as f64 * h];
        let at = |i: usize, j: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
        let mut unknown = vec![NONE; nx * ny];
        let mut node = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if spec.signed_distance(&at(i, j)) < -THETA * h {
                    unknown[j * nx + i] = node.len() as u32;
                    node.push(j * nx + i);
                }
            }
        }
        if node.len() < MIN_NODES {
            return Err(Error::domain(format!("only {} interior nodes at h={h}; need {MIN_NODES}", node.len())));
        }
        let mut diag = Vec::with_capacity(node.len());
        let mut links = Vec::with_capacity(node.len());
        let mut symmetric = true;
        for &g in &node {
            let (i, j) = (g % nx, g / nx);
            let x = at(i, j);
            let mut row = [(NONE, 0.0); 4];
            let mut dsum = 0.0;
            for axis in 0..2 {
                let mut arm = [(NONE, h); 2];
                for (s, sign) in [1.0f64, -1.0].into_iter().enumerate() {
                    let (ni, nj) = match (axis, s) {
                        (0, 0) => (i as i64 + 1, j as i64),
                        (0, _) => (i as i64 - 1, j as i64),
                        (_, 0) => (i as i64, j as i64 + 1),
                        _ => (i as i64, j as i64 - 1),
                    };
                    let inside = ni >= 0 && nj >= 0 && (ni as usize) < nx && (nj as usize) < ny;
                    let k = if inside { unknown[nj as usize * nx + ni as usize] } else { NONE };
                    arm[s] = if k != NONE {
                        (k, h)
                    } else {
                        let dist = spec.ray_exit(&x, axis, sign).min(h).max(THETA * h);
                        if (dist - h).abs() > 1e-12 * h {
                            symmetric = false;
                        }
                        (NONE, dist)
                    };
                }
                let (hp, hm) = (arm[0].1, arm[1].1);
                dsum += 2.0 / (hp * hm);
                row[2 * axis] = (arm[0].0, -2.0 / (hp * (hp + hm)));
                row[2 * axis + 1] = (arm[1].0, -2.0 / (hm * (hp + hm)));
            }
            diag.push(dsum);
            links.push(row);
        }
        Ok(Operator { nx, ny, h, origin, node, diag, links, symmetric })
    }

    fn n(&self) -> usize {
        self.node.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (k, (d, row)) in self.diag.iter().zip(&self.links).enumerate() {
            let mut s = d * x[k];
            for &(m, c) in row {
                if m != NONE {
                    s += c * x[m as usize];
                }
            }
            y[k] = s;
        }
    }

    /// Solve A x = b from the initial guess in `x`.
    fn solve(&self, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        if self.symmetric {
            self.cg(b, x, tol)
        } else {
            self.bicgstab(b, x, tol)
        }
    }

    fn max_iter(&self) -> usize {
        20 * self.n() + 1000
    }

    fn cg(&self, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let n = self.n();
        let bnorm = norm(b).max(f64::MIN_POSITIVE);
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 0..self.max_iter() {
            if norm(&r) <= tol * bnorm {
                return Ok(it);
            }
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
                z[k] = r[k] / self.diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::Convergence { what: "conjugate gradient".into(), iterations: self.max_iter(), residual: norm(&r) / bnorm })
    }

    /// Jacobi-preconditioned BiCGSTAB, for grids with cut-cell arms.
    fn bicgstab(&self, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let n = self.n();
        let bnorm = norm(b).max(f64::MIN_POSITIVE);
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut zz = vec![0.0; n];
        let mut t = vec![0.0; n];
        for it in 0..self.max_iter() {
            let res = norm(&r);
            if res <= tol * bnorm {
                return Ok(it);
            }
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 || !rho_new.is_finite() {
                return Err(Error::Convergence { what: "BiCGSTAB breakdown".into(), iterations: it, residual: res / bnorm });
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
                y[k] = p[k] / self.diag[k];
            }
            self.apply(&y, &mut v);
            alpha = rho / dot(&r0, &v);
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) <= tol * bnorm {
                for k in 0..n {
                    x[k] += alpha * y[k];
                }
                return Ok(it + 1);
            }
            for k in 0..n {
                zz[k] = s[k] / self.diag[k];
            }
            self.apply(&zz, &mut t);
            omega = dot(&t, &s) / dot(&t, &t);
            for k in 0..n {
                x[k] += alpha * y[k] + omega * zz[k];
                r[k] = s[k] - omega * t[k];
            }
        }
        Err(Error::Convergence { what: "BiCGSTAB".into(), iterations: self.max_iter(), residual: norm(&r) / bnorm })
    }

    fn to_grid(&self, u: &[f64]) -> Grid2D {
        let mut values = vec![0.0; self.nx * self.ny];
        let mut mask = vec![false; self.nx * self.ny];
        for (k, &g) in self.node.iter().enumerate() {
            values[g] = u[k];
            mask[g] = true;
        }
        Grid2D { nx: self.nx, ny: self.ny, h: self.h, origin: self.origin, values, mask }
    }

    /// Smallest eigenvalue by inverse power iteration.
    fn lambda1(&self) -> Result<(f64, usize)> {
        let n = self.n();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut w = vec![0.0; n];
        let mut lambda = f64::NAN;
        let mut solves = 0;
        for it in 0..500 {
            // warm start from the previous iterate scaled by 1/λ
            let guess = if lambda.is_finite() { 1.0 / lambda } else { 0.0 };
            for k in 0..n {
                w[k] = guess * v[k];
            }
            solves += self.solve(&v, &mut w, 1e-11)?;
            let est = dot(&v, &v) / dot(&v, &w);
            let wn = norm(&w);
            for k in 0..n {
                v[k] = w[k] / wn;
            }
            if (est - lambda).abs() <= 1e-12 * est {
                return Ok((est, solves));
            }
            lambda = est;
            if it > 0 && !lambda.is_finite() {
                break;
            }
        }
        Err(Error::Convergence { what: "inverse power iteration".into(), iterations: 500, residual: f64::NAN })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdEigen {
    /// Richardson combination (4λ_{h/2} − λ_h)/3.
    pub lambda: f64,
    pub lambda_h: f64,
    pub lambda_h2: f64,
    pub h: f64,
    pub nodes_h: usize,
    pub nodes_h2: usize,
    /// Inner Krylov iterations over both levels.
    pub iterations: usize,
    pub symmetric: bool,
}

/// λ₁ of −Δ on a planar domain, extrapolated from spacings h and h/2.
pub fn fd_lambda1(spec: &DomainSpec, h: f64) -> Result<FdEigen> {
    let coarse = Operator::build(spec, h)?;
    let fine = Operator::build(spec, h / 2.0)?;
    let (lh, it1) = coarse.lambda1()?;
    let (lh2, it2) = fine.lambda1()?;
    Ok(FdEigen {
        lambda: (4.0 * lh2 - lh) / 3.0,
        lambda_h: lh,
        lambda_h2: lh2,
        h,
        nodes_h: coarse.n(),
        nodes_h2: fine.n(),
        iterations: it1 + it2,
        symmetric: coarse.symmetric && fine.symmetric,
    })
}

/// Grids u₁..u_k with −Δu₁ = 1 and −Δu_j = u_{j−1}; E_x[τᵏ] = 2ᵏk!·u_k(x).
pub fn fd_torsion_hierarchy(spec: &DomainSpec, k: usize, h: f64) -> Result<Vec<Grid2D>> {
    if k < 1 {
        return Err(Error::domain("hierarchy depth must be >= 1"));
    }
    let op = Operator::build(spec, h)?;
    let mut rhs = vec![1.0; op.n()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut u = vec![0.0; op.n()];
        op.solve(&rhs, &mut u, 1e-12)?;
        out.push(op.to_grid(&u));
        rhs = u;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSup {
    /// Richardson combination of the two levels.
    pub value: f64,
    pub value_h: f64,
    pub value_h2: f64,
    pub argmax: [f64; 2],
}

/// sup_x E_x[τ] from the grid maximum of 2u₁, extrapolated over h and h/2.
pub fn fd_sup_mean_exit(spec: &DomainSpec, h: f64) -> Result<FdSup> {
    let coarse = fd_torsion_hierarchy(spec, 1, h)?[0].max();
    let fine = fd_torsion_hierarchy(spec, 1, h / 2.0)?[0].max();
    let (mh, mh2) = (2.0 * coarse.0, 2.0 * fine.0);
    Ok(FdSup { value: (4.0 * mh2 - mh) / 3.0, value_h: mh, value_h2: mh2, argmax: fine.1 })
}
