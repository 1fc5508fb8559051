//! Euler Brownian paths with a per-step Brownian-bridge crossing test.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

/// Paths longer than this are treated as a misuse (e.g. a runaway walk).
pub const MAX_STEPS: u64 = 1_000_000_000;

/// Bridge factors with 2δ₁δ₂/h above this are exactly 1 in f64.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub step: f64,
    pub seed: u64,
    pub start: Vec<f64>,
}

impl MomentEstimate {
    /// Mean and standard error of `τᵖ` over the given exit times.
    pub fn from_exit_times(times: &[f64], p: f64, step: f64, seed: u64, start: &[f64]) -> Self {
        let vals: Vec<f64> = times.iter().map(|t| if p == 0.0 { 1.0 } else { t.powf(p) }).collect();
        let n = vals.len();
        let mean = pairwise_sum(&vals) / n as f64;
        let dev: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        MomentEstimate { p, mean, std_error: (var / n as f64).sqrt(), n_samples: n, step, seed, start: start.to_vec() }
    }
}

/// Survival estimate P_x(τ > t) at one t.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub t: f64,
    pub probability: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Default Euler step, (inradius/50)².
pub fn default_step(spec: &DomainSpec) -> f64 {
    (spec.inradius() / 50.0).powi(2)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for sample `index` of the run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    let words = [
        splitmix(seed),
        splitmix(index ^ 0x6a09_e667_f3bc_c908),
        splitmix(seed ^ 0xbb67_ae85_84ca_a73b),
        splitmix(index.wrapping_add(0x3c6e_f372_fe94_f82b)),
    ];
    let mut bytes = [0u8; 32];
    for (chunk, w) in bytes.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    Xoshiro256PlusPlus::from_seed(bytes)
}

/// Boundary distances, positive inside, specialised per domain.
#[derive(Debug, Clone)]
enum Geometry {
    Ball { r: f64 },
    Box { a: Vec<f64> },
    Slab { axis: usize, w: f64 },
    Faces { d: usize, normals: Vec<f64>, offsets: Vec<f64> },
    Ellipse { spec: DomainSpec, a: f64, b: f64, minor: f64 },
}

impl Geometry {
    fn new(spec: &DomainSpec) -> Self {
        match spec {
            DomainSpec::Ball { radius, .. } => Geometry::Ball { r: *radius },
            DomainSpec::Box { half_widths } => Geometry::Box { a: half_widths.clone() },
            DomainSpec::Slab { d, half_width } => Geometry::Slab { axis: d - 1, w: *half_width },
            DomainSpec::Ellipse { a, b } => Geometry::Ellipse { spec: spec.clone(), a: *a, b: *b, minor: a.min(*b) },
            _ => {
                let faces = spec.faces().expect("polygonal spec");
                Geometry::Faces {
                    d: spec.dim(),
                    normals: faces.iter().flat_map(|f| f.normal.iter().copied()).collect(),
                    offsets: faces.iter().map(|f| f.offset).collect(),
                }
            }
        }
    }

    fn n_dist(&self) -> usize {
        match self {
            Geometry::Ball { .. } | Geometry::Ellipse { .. } => 1,
            Geometry::Box { a } => 2 * a.len(),
            Geometry::Slab { .. } => 2,
            Geometry::Faces { offsets, .. } => offsets.len(),
        }
    }

    /// Distances to each face (or to the curved boundary); exact wherever
    /// the bridge factor can differ from 1.
    #[inline]
    fn distances(&self, x: &[f64], h: f64, out: &mut [f64]) {
        match self {
            Geometry::Ball { r } => out[0] = r - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Geometry::Box { a } => {
                for (k, (ak, xk)) in a.iter().zip(x).enumerate() {
                    out[2 * k] = ak - xk;
                    out[2 * k + 1] = ak + xk;
                }
            }
            Geometry::Slab { axis, w } => {
                out[0] = w - x[*axis];
                out[1] = w + x[*axis];
            }
            Geometry::Faces { d, normals, offsets } => {
                for (i, (c, n)) in offsets.iter().zip(normals.chunks_exact(*d)).enumerate() {
                    out[i] = c - n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            Geometry::Ellipse { spec, a, b, minor } => {
                let q = (x[0] / a).powi(2) + (x[1] / b).powi(2);
                if q >= 1.0 {
                    out[0] = -1.0;
                    return;
                }
                // (1 − √q)·min(a,b) is a lower bound on the distance
                let lb = (1.0 - q.sqrt()) * minor;
                out[0] = if lb > 6.0 * h.sqrt() { lb } else { -spec.signed_distance(x) };
            }
        }
    }
}

/// Outcome of one path.
enum PathEnd {
    Exited(f64),
    /// Still inside at the horizon.
    Survived,
}

fn run_path<R: Rng>(geom: &Geometry, x: &[f64], h: f64, horizon: f64, rng: &mut R) -> Result<PathEnd> {
    let m = geom.n_dist();
    let mut pos = x.to_vec();
    let mut d0 = vec![0.0; m];
    let mut d1 = vec![0.0; m];
    geom.distances(&pos, h, &mut d0);
    if d0.iter().any(|&v| v <= 0.0) {
        return Ok(PathEnd::Exited(0.0));
    }
    let sh = h.sqrt();
    let mut steps: u64 = 0;
    loop {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Runaway { steps: MAX_STEPS });
        }
        let t = steps as f64 * h;
        if t - 0.5 * h > horizon {
            return Ok(PathEnd::Survived);
        }
        for v in pos.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += sh * z;
        }
        geom.distances(&pos, h, &mut d1);
        // crossing inside (t − h, t]: reported at the midpoint
        let exit_time = t - 0.5 * h;
        if d1.iter().any(|&v| v <= 0.0) {
            return Ok(PathEnd::Exited(exit_time));
        }
        let mut stay = 1.0;
        for (a, b) in d0.iter().zip(&d1) {
            let z = 2.0 * a * b / h;
            if z < BRIDGE_CUTOFF {
                stay *= -(-z).exp_m1();
            }
        }
        if stay < 1.0 && rng.random::<f64>() >= stay {
            return Ok(PathEnd::Exited(exit_time));
        }
        std::mem::swap(&mut d0, &mut d1);
    }
}

/// Exit times of the same Brownian paths observed at several step sizes.
///
/// `steps` must each be an integer multiple of the smallest; the path is
/// built from increments at the finest step and summed for the coarser
/// ones, so differences between levels reflect discretisation rather than
/// sampling noise. Returns one vector of exit times per entry of `steps`.
pub fn coupled_exit_times(
    spec: &DomainSpec,
    x: &[f64],
    n: usize,
    steps: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let fine = steps.iter().cloned().fold(f64::INFINITY, f64::min);
    if steps.is_empty() {
        return Err(Error::domain("need at least one step"));
    }
    let ratios = steps
        .iter()
        .map(|h| {
            let r = (h / fine).round();
            if (h / fine - r).abs() > 1e-9 * r {
                Err(Error::domain(format!("step {h} is not a multiple of {fine}")))
            } else {
                Ok(r as u64)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    if check_start(spec, x, fine)? {
        return Ok(vec![vec![0.0; n]; steps.len()]);
    }
    let geom = Geometry::new(spec);
    let m = geom.n_dist();
    let per_sample: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut path_rng = sample_rng(seed, i);
            let mut bridge_rngs: Vec<_> = (0..steps.len()).map(|l| sample_rng(splitmix(seed ^ splitmix(l as u64 + 1)), i)).collect();
            let d = x.len();
            let mut pos = x.to_vec();
            let mut last: Vec<Vec<f64>> = vec![x.to_vec(); steps.len()];
            let mut dist: Vec<Vec<f64>> = vec![vec![0.0; m]; steps.len()];
            for (l, h) in steps.iter().enumerate() {
                geom.distances(x, *h, &mut dist[l]);
            }
            let mut out = vec![f64::NAN; steps.len()];
            let mut live = steps.len();
            let mut d1 = vec![0.0; m];
            let sf = fine.sqrt();
            let mut k: u64 = 0;
            while live > 0 {
                k += 1;
                if k > MAX_STEPS {
                    return Err(Error::Runaway { steps: MAX_STEPS });
                }
                for v in pos.iter_mut() {
                    let z: f64 = path_rng.sample(StandardNormal);
                    *v += sf * z;
                }
                for (l, (&r, &h)) in ratios.iter().zip(steps).enumerate() {
                    if !out[l].is_nan() || !k.is_multiple_of(r) {
                        continue;
                    }
                    last[l][..d].copy_from_slice(&pos);
                    geom.distances(&last[l], h, &mut d1);
                    let t = k as f64 * fine - 0.5 * h;
                    let mut exited = d1.iter().any(|&v| v <= 0.0);
                    if !exited {
                        let mut stay = 1.0;
                        for (a, b) in dist[l].iter().zip(&d1) {
                            let z = 2.0 * a * b / h;
                            if z < BRIDGE_CUTOFF {
                                stay *= -(-z).exp_m1();
                            }
                        }
                        exited = stay < 1.0 && bridge_rngs[l].random::<f64>() >= stay;
                    }
                    if exited {
                        out[l] = t;
                        live -= 1;
                    } else {
                        dist[l].copy_from_slice(&d1);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok((0..steps.len()).map(|l| per_sample.iter().map(|s| s[l]).collect()).collect())
}

fn check_start(spec: &DomainSpec, x: &[f64], step: f64) -> Result<bool> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("step must be finite and > 0, got {step}")));
    }
    if x.len() != spec.dim() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("start point must have {} finite coordinates", spec.dim())));
    }
    let sd = spec.signed_distance(x);
    if sd > 0.0 {
        return Err(Error::domain(format!("start point lies outside `{spec}`")));
    }
    Ok(sd == 0.0)
}

/// One exit time from `x`.
pub fn sample_exit_time<R: Rng>(spec: &DomainSpec, x: &[f64], step: f64, rng: &mut R) -> Result<f64> {
    if check_start(spec, x, step)? {
        return Err(Error::domain("start point lies on the boundary"));
    }
    match run_path(&Geometry::new(spec), x, step, f64::INFINITY, rng)? {
        PathEnd::Exited(t) => Ok(t),
        PathEnd::Survived => unreachable!("infinite horizon"),
    }
}

/// `n` exit times, sample `i` driven by [`sample_rng`]`(seed, i)`.
/// Boundary starts give all zeros.
pub fn sample_exit_times(spec: &DomainSpec, x: &[f64], n: usize, step: f64, seed: u64) -> Result<Vec<f64>> {
    if check_start(spec, x, step)? {
        return Ok(vec![0.0; n]);
    }
    let geom = Geometry::new(spec);
    (0..n as u64)
        .into_par_iter()
        .map(|i| match run_path(&geom, x, step, f64::INFINITY, &mut sample_rng(seed, i))? {
            PathEnd::Exited(t) => Ok(t),
            PathEnd::Survived => unreachable!("infinite horizon"),
        })
        .collect()
}

fn check_n(n: usize) -> Result<()> {
    if n < 100 {
        return Err(Error::domain(format!("need at least 100 samples, got {n}")));
    }
    Ok(())
}

/// Monte Carlo E_x[τᵖ].
pub fn estimate_moment(spec: &DomainSpec, x: &[f64], p: f64, n: usize, step: f64, seed: u64) -> Result<MomentEstimate> {
    Ok(estimate_moments(spec, x, &[p], n, step, seed)?.remove(0))
}

/// Several moments from one set of paths.
pub fn estimate_moments(
    spec: &DomainSpec,
    x: &[f64],
    ps: &[f64],
    n: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_n(n)?;
    if ps.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::domain("moment orders must be finite and >= 0"));
    }
    if ps.iter().all(|&p| p == 0.0) {
        check_start(spec, x, step)?;
        let one = |p| MomentEstimate { p, mean: 1.0, std_error: 0.0, n_samples: n, step, seed, start: x.to_vec() };
        return Ok(ps.iter().map(|&p| one(p)).collect());
    }
    let times = sample_exit_times(spec, x, n, step, seed)?;
    Ok(ps.iter().map(|&p| MomentEstimate::from_exit_times(&times, p, step, seed, x)).collect())
}

/// Monte Carlo P_x(τ > t) for each t in `ts`; paths stop at max(ts).
pub fn estimate_survival(
    spec: &DomainSpec,
    x: &[f64],
    ts: &[f64],
    n: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<SurvivalEstimate>> {
    check_n(n)?;
    if ts.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::domain("survival times must be finite and >= 0"));
    }
    let horizon = ts.iter().cloned().fold(0.0, f64::max);
    let times: Vec<f64> = if check_start(spec, x, step)? {
        vec![0.0; n]
    } else {
        let geom = Geometry::new(spec);
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                Ok(match run_path(&geom, x, step, horizon, &mut sample_rng(seed, i))? {
                    PathEnd::Exited(t) => t,
                    PathEnd::Survived => f64::INFINITY,
                })
            })
            .collect::<Result<_>>()?
    };
    Ok(ts
        .iter()
        .map(|&t| {
            let alive = times.iter().filter(|&&s| s > t).count();
            let prob = alive as f64 / n as f64;
            SurvivalEstimate { t, probability: prob, std_error: (prob * (1.0 - prob) / n as f64).sqrt(), n_samples: n }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupMomentEstimate {
    /// Largest estimate over the grid and the center.
    pub best: MomentEstimate,
    pub center: MomentEstimate,
    /// True when `best` beats the center by more than 3 combined SEs.
    pub center_beaten: bool,
    pub points: usize,
}

/// Interior grid points (cell centers of the bounding box) plus the center.
pub fn interior_grid(spec: &DomainSpec, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if !spec.is_bounded() {
        return Err(Error::domain("grid search needs a bounded domain"));
    }
    let bbox = spec.bounding_box();
    let d = bbox.len();
    let total = resolution.checked_pow(d as u32).filter(|&t| t <= 1_000_000).ok_or_else(|| {
        Error::domain(format!("grid of {resolution}^{d} points is too large"))
    })?;
    let mut pts = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<f64> = bbox
            .iter()
            .map(|(lo, hi)| {
                let i = rem % resolution;
                rem /= resolution;
                lo + (hi - lo) * (i as f64 + 0.5) / resolution as f64
            })
            .collect();
        if spec.signed_distance(&x) < 0.0 {
            pts.push(x);
        }
    }
    Ok(pts)
}

/// Grid search for sup_x E_x[τᵖ]; each point gets its own seed stream.
pub fn estimate_sup_moment(
    spec: &DomainSpec,
    p: f64,
    resolution: usize,
    n: usize,
    step: f64,
    seed: u64,
) -> Result<SupMomentEstimate> {
    let center = spec.center();
    let mut pts = vec![center];
    pts.extend(interior_grid(spec, resolution)?);
    let estimates = pts
        .iter()
        .enumerate()
        .map(|(i, x)| estimate_moment(spec, x, p, n, step, splitmix(seed ^ splitmix(i as u64))))
        .collect::<Result<Vec<_>>>()?;
    let center = estimates[0].clone();
    let best = estimates
        .iter()
        .fold(&estimates[0], |b, e| if e.mean > b.mean { e } else { b })
        .clone();
    let combined = (best.std_error.powi(2) + center.std_error.powi(2)).sqrt();
    Ok(SupMomentEstimate { center_beaten: best.mean - center.mean > 3.0 * combined, best, center, points: pts.len() })
}
