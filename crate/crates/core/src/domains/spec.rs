//! Domain descriptions, their text grammar, and geometry queries.

use std::fmt;
use std::str::FromStr;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

/// Grammar echoed back on parse failures.
pub const SPEC_GRAMMAR: &str = "\
domain spec grammar:
  ball [d=<int>] r=<len>          ball of radius r in R^d (d defaults to 2)
  box <a1> <a2> ... <ad>          rectangle with half-widths a_k
  slab d=<int> w=<len>            R^(d-1) x (-w, w)
  triangle-eq r=<len>             equilateral triangle with inradius r, incenter at 0
  ellipse a=<len> b=<len>         x^2/a^2 + y^2/b^2 < 1
  triangle x1,y1 x2,y2 x3,y3      triangle by vertices
  polytope file=<path>            half-space file, one `n1 ... nd c` row per face
  polytope n1,..,nd,c ...         half-spaces inline, n.x <= c";

/// A face `normal · x ≤ offset` with unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Face {
    fn new(normal: Vec<f64>, offset: f64) -> Result<Face> {
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() || !offset.is_finite() {
            return Err(Error::domain("half-space with zero or non-finite normal"));
        }
        if (len - 1.0).abs() <= 4.0 * f64::EPSILON {
            // already unit: keep the text form stable under re-parsing
            return Ok(Face { normal, offset });
        }
        Ok(Face { normal: normal.iter().map(|v| v / len).collect(), offset: offset / len })
    }

    /// n·x − c: negative inside.
    #[inline]
    pub fn excess(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(n, v)| n * v).sum::<f64>() - self.offset
    }
}

/// Bounded convex polytope with precomputed Chebyshev center.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    faces: Vec<Face>,
    center: Vec<f64>,
    inradius: f64,
    bbox: Vec<(f64, f64)>,
}

impl Polytope {
    /// Rows are `(normal, offset)` for `normal · x ≤ offset`.
    pub fn new(rows: Vec<(Vec<f64>, f64)>) -> Result<Polytope> {
        let dim = rows.first().map(|r| r.0.len()).ok_or_else(|| Error::domain("polytope has no faces"))?;
        if dim == 0 || rows.iter().any(|r| r.0.len() != dim) {
            return Err(Error::domain("polytope faces must share one nonzero dimension"));
        }
        let faces = rows.into_iter().map(|(n, c)| Face::new(n, c)).collect::<Result<Vec<_>>>()?;
        if faces.len() <= dim {
            return Err(Error::domain(format!("a bounded polytope in R^{dim} needs more than {dim} faces")));
        }
        Self::check_recession_cone(&faces, dim)?;
        let mut bbox = Vec::with_capacity(dim);
        for k in 0..dim {
            let lo = Self::extent(&faces, k, OptimizationDirection::Minimize)?;
            let hi = Self::extent(&faces, k, OptimizationDirection::Maximize)?;
            bbox.push((lo, hi));
        }
        let (center, inradius) = Self::chebyshev(&faces)?;
        let width = bbox.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        // below this the inscribed ball is within the solver's tolerance of nothing
        if !(inradius > 1e-7 * width.max(1e-3)) || !inradius.is_finite() {
            return Err(Error::domain("polytope has empty interior"));
        }
        // the solver works with absolute tolerances; reject answers that do not check out
        let size = center.iter().fold(inradius, |m, c| m.max(c.abs()));
        let worst = faces.iter().map(|f| f.excess(&center) + inradius).fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-7 * size;
        if !(worst <= slack.min(0.5 * inradius)) || center.iter().zip(&bbox).any(|(c, (lo, hi))| !(*lo - slack <= *c && *c <= *hi + slack)) {
            return Err(Error::domain("polytope is too badly scaled for a reliable Chebyshev center"));
        }
        Ok(Polytope { faces, center, inradius, bbox })
    }

    /// Bounded iff no nonzero v has n·v ≤ 0 for every face. Scale-free, so
    /// it is reliable where the offset-dependent LPs are not.
    fn check_recession_cone(faces: &[Face], dim: usize) -> Result<()> {
        for k in 0..dim {
            for dir in [OptimizationDirection::Maximize, OptimizationDirection::Minimize] {
                let mut lp = Problem::new(dir);
                let vars: Vec<_> = (0..dim).map(|j| lp.add_var(if j == k { 1.0 } else { 0.0 }, (-1.0, 1.0))).collect();
                for f in faces {
                    let expr: Vec<_> = vars.iter().zip(&f.normal).map(|(v, n)| (*v, *n)).collect();
                    lp.add_constraint(&expr[..], ComparisonOp::Le, 0.0);
                }
                // v = 0 is always feasible, so the solve cannot fail in exact arithmetic
                let extreme = lp.solve().map(|s| s.objective().abs()).unwrap_or(0.0);
                if extreme > 1e-9 {
                    return Err(Error::domain(format!("polytope unbounded along coordinate {k}")));
                }
            }
        }
        Ok(())
    }

    fn extent(faces: &[Face], k: usize, dir: OptimizationDirection) -> Result<f64> {
        let dim = faces[0].normal.len();
        let mut lp = Problem::new(dir);
        let vars: Vec<_> = (0..dim)
            .map(|j| lp.add_var(if j == k { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        for f in faces {
            let expr: Vec<_> = vars.iter().zip(&f.normal).map(|(v, n)| (*v, *n)).collect();
            lp.add_constraint(&expr[..], ComparisonOp::Le, f.offset);
        }
        match lp.solve() {
            Ok(sol) => Ok(sol.objective()),
            Err(minilp::Error::Unbounded) => Err(Error::domain(format!("polytope unbounded along coordinate {k}"))),
            Err(minilp::Error::Infeasible) => Err(Error::domain("polytope is empty")),
        }
    }

    /// Largest inscribed ball. Its center is often not unique (a long
    /// rectangle has a segment of them), so the returned center is taken
    /// from the middle of the near-optimal set.
    fn chebyshev(faces: &[Face]) -> Result<(Vec<f64>, f64)> {
        let dim = faces[0].normal.len();
        let solve = |dir: OptimizationDirection, objective: Option<usize>, radius: Option<f64>| {
            let mut lp = Problem::new(dir);
            let vars: Vec<_> = (0..dim)
                .map(|j| lp.add_var(if objective == Some(j) { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect();
            let r = lp.add_var(if objective.is_none() { 1.0 } else { 0.0 }, (0.0, f64::INFINITY));
            for f in faces {
                let mut expr: Vec<_> = vars.iter().zip(&f.normal).map(|(v, n)| (*v, *n)).collect();
                match radius {
                    Some(rad) => lp.add_constraint(&expr[..], ComparisonOp::Le, f.offset - rad),
                    None => {
                        expr.push((r, 1.0));
                        lp.add_constraint(&expr[..], ComparisonOp::Le, f.offset);
                    }
                }
            }
            let sol = lp.solve().map_err(|e| Error::domain(format!("Chebyshev center LP failed: {e}")))?;
            Ok::<_, Error>((vars.iter().map(|v| *sol.var_value(*v)).collect::<Vec<f64>>(), *sol.var_value(r)))
        };
        let (first, r) = solve(OptimizationDirection::Maximize, None, None)?;
        let shrunk = r * (1.0 - 1e-9);
        let mut extremes = Vec::with_capacity(2 * dim);
        let mut mid = vec![0.0; dim];
        for k in 0..dim {
            for dir in [OptimizationDirection::Minimize, OptimizationDirection::Maximize] {
                // fall back to the first optimum if the restricted problem misbehaves
                let p = solve(dir, Some(k), Some(shrunk)).map(|s| s.0).unwrap_or_else(|_| first.clone());
                mid[k] += p[k] / 2.0;
                extremes.push(p);
            }
        }
        // the middle of the center set's bounding box, unless it falls outside the set
        if faces.iter().all(|f| f.excess(&mid) + shrunk <= 1e-12 * r) {
            return Ok((mid, r));
        }
        let n = extremes.len() as f64;
        let avg = (0..dim).map(|j| extremes.iter().map(|p| p[j]).sum::<f64>() / n).collect();
        Ok((avg, r))
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// A canonical or polytope domain in R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ball { d: usize, radius: f64 },
    /// Rectangle with the given half-widths, centered at the origin.
    Box { half_widths: Vec<f64> },
    /// R^{d−1} × (−w, w); the bounded direction is the last coordinate.
    Slab { d: usize, half_width: f64 },
    /// Incenter at the origin, one vertex on the positive y-axis.
    EquilateralTriangle { inradius: f64 },
    Ellipse { a: f64, b: f64 },
    Triangle2D { vertices: [[f64; 2]; 3] },
    Polytope(Polytope),
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl DomainSpec {
    pub fn ball(d: usize, radius: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain("ball dimension must be >= 2; use a one-dimensional box for an interval"));
        }
        Ok(DomainSpec::Ball { d, radius: positive("radius", radius)? })
    }

    pub fn unit_disc() -> Self {
        DomainSpec::Ball { d: 2, radius: 1.0 }
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::domain("box needs at least one half-width"));
        }
        for &a in &half_widths {
            positive("half-width", a)?;
        }
        Ok(DomainSpec::Box { half_widths })
    }

    /// Q_d = (−1,1)^d.
    pub fn cube(d: usize) -> Self {
        DomainSpec::Box { half_widths: vec![1.0; d] }
    }

    pub fn slab(d: usize, half_width: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("slab dimension must be >= 1"));
        }
        Ok(DomainSpec::Slab { d, half_width: positive("half-width", half_width)? })
    }

    pub fn equilateral(inradius: f64) -> Result<Self> {
        Ok(DomainSpec::EquilateralTriangle { inradius: positive("inradius", inradius)? })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Ok(DomainSpec::Ellipse { a: positive("a", a)?, b: positive("b", b)? })
    }

    pub fn triangle(vertices: [[f64; 2]; 3]) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("triangle vertices must be finite"));
        }
        let area = signed_area(&vertices);
        let scale = vertices.iter().flatten().fold(0f64, |m, v| m.max(v.abs())).max(1e-300);
        if !(area.abs() > 1e-12 * scale * scale) {
            return Err(Error::domain("triangle vertices are collinear"));
        }
        Ok(DomainSpec::Triangle2D { vertices })
    }

    pub fn polytope(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Ok(DomainSpec::Polytope(Polytope::new(rows)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { d, .. } | DomainSpec::Slab { d, .. } => *d,
            DomainSpec::Box { half_widths } => half_widths.len(),
            DomainSpec::EquilateralTriangle { .. } | DomainSpec::Ellipse { .. } | DomainSpec::Triangle2D { .. } => 2,
            DomainSpec::Polytope(p) => p.dim(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, DomainSpec::Slab { .. })
    }

    /// Every spec here is convex.
    pub fn is_convex(&self) -> bool {
        true
    }

    /// Symmetric under every coordinate reflection (class 𝒮𝒞 when bounded).
    pub fn is_doubly_symmetric(&self) -> bool {
        matches!(self, DomainSpec::Ball { .. } | DomainSpec::Box { .. } | DomainSpec::Slab { .. } | DomainSpec::Ellipse { .. })
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => *radius,
            DomainSpec::Box { half_widths } => half_widths.iter().cloned().fold(f64::INFINITY, f64::min),
            DomainSpec::Slab { half_width, .. } => *half_width,
            DomainSpec::EquilateralTriangle { inradius } => *inradius,
            DomainSpec::Ellipse { a, b } => a.min(*b),
            DomainSpec::Triangle2D { vertices } => {
                let (_, r) = incircle(vertices);
                r
            }
            DomainSpec::Polytope(p) => p.inradius,
        }
    }

    /// Natural center: origin for the symmetric specs, incenter for
    /// triangles, Chebyshev center for polytopes.
    pub fn center(&self) -> Vec<f64> {
        match self {
            DomainSpec::Triangle2D { vertices } => incircle(vertices).0.to_vec(),
            DomainSpec::Polytope(p) => p.center.clone(),
            _ => vec![0.0; self.dim()],
        }
    }

    /// Axis-aligned bounding box (infinite along the slab's free directions).
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            DomainSpec::Ball { d, radius } => vec![(-radius, *radius); *d],
            DomainSpec::Box { half_widths } => half_widths.iter().map(|a| (-a, *a)).collect(),
            DomainSpec::Slab { d, half_width } => {
                let mut b = vec![(f64::NEG_INFINITY, f64::INFINITY); *d];
                b[d - 1] = (-half_width, *half_width);
                b
            }
            DomainSpec::EquilateralTriangle { inradius: r } => {
                let s = 3f64.sqrt() * r;
                vec![(-s, s), (-r, 2.0 * r)]
            }
            DomainSpec::Ellipse { a, b } => vec![(-a, *a), (-b, *b)],
            DomainSpec::Triangle2D { vertices } => (0..2)
                .map(|k| {
                    let vals = vertices.iter().map(|v| v[k]);
                    (vals.clone().fold(f64::INFINITY, f64::min), vals.fold(f64::NEG_INFINITY, f64::max))
                })
                .collect(),
            DomainSpec::Polytope(p) => p.bbox.clone(),
        }
    }

    /// Faces of the polygonal/polyhedral specs (box, slab, triangles, polytope).
    pub fn faces(&self) -> Option<Vec<Face>> {
        let unit = |n: Vec<f64>, c: f64| Face { normal: n, offset: c };
        match self {
            DomainSpec::Box { half_widths } => {
                let d = half_widths.len();
                let mut out = Vec::with_capacity(2 * d);
                for (k, a) in half_widths.iter().enumerate() {
                    for s in [1.0, -1.0] {
                        let mut n = vec![0.0; d];
                        n[k] = s;
                        out.push(unit(n, *a));
                    }
                }
                Some(out)
            }
            DomainSpec::Slab { d, half_width } => {
                let mut up = vec![0.0; *d];
                up[d - 1] = 1.0;
                let down = up.iter().map(|v| -v).collect();
                Some(vec![unit(up, *half_width), unit(down, *half_width)])
            }
            DomainSpec::EquilateralTriangle { inradius: r } => {
                let h = 3f64.sqrt() / 2.0;
                Some(vec![unit(vec![0.0, -1.0], *r), unit(vec![h, 0.5], *r), unit(vec![-h, 0.5], *r)])
            }
            DomainSpec::Triangle2D { vertices } => {
                let v = ccw(vertices);
                Some(
                    (0..3)
                        .map(|i| {
                            let (p, q) = (v[i], v[(i + 1) % 3]);
                            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                            let len = dx.hypot(dy);
                            let n = vec![dy / len, -dx / len];
                            let c = n[0] * p[0] + n[1] * p[1];
                            unit(n, c)
                        })
                        .collect(),
                )
            }
            DomainSpec::Polytope(p) => Some(p.faces.clone()),
            DomainSpec::Ball { .. } | DomainSpec::Ellipse { .. } => None,
        }
    }

    /// Negative inside, zero on the boundary, positive outside.
    ///
    /// Exact for balls, boxes, slabs and ellipses, and inside the polygonal
    /// specs. Outside a triangle or polytope the largest face excess is
    /// returned, which under-estimates the true distance near vertices.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => norm(x) - radius,
            DomainSpec::Box { half_widths } => {
                let ex: Vec<f64> = x.iter().zip(half_widths).map(|(v, a)| v.abs() - a).collect();
                let inside = ex.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if inside <= 0.0 {
                    inside
                } else {
                    ex.iter().map(|e| e.max(0.0).powi(2)).sum::<f64>().sqrt()
                }
            }
            DomainSpec::Slab { d, half_width } => x[d - 1].abs() - half_width,
            DomainSpec::Ellipse { a, b } => ellipse_signed_distance(*a, *b, x[0], x[1]),
            _ => {
                let faces = self.faces().expect("polygonal spec");
                faces.iter().map(|f| f.excess(x)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Distance from interior point `x` to the boundary along the unit
    /// coordinate direction `sign · e_axis`; infinite if the ray never exits.
    pub fn ray_exit(&self, x: &[f64], axis: usize, sign: f64) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => {
                // |x + s e|² = r²
                let xe = sign * x[axis];
                let c = x.iter().map(|v| v * v).sum::<f64>() - radius * radius;
                (-xe + (xe * xe - c).max(0.0).sqrt()).max(0.0)
            }
            DomainSpec::Ellipse { a, b } => {
                let (x0, y0) = (x[0], x[1]);
                if axis == 0 {
                    let half = a * (1.0 - (y0 / b).powi(2)).max(0.0).sqrt();
                    (half - sign * x0).max(0.0)
                } else {
                    let half = b * (1.0 - (x0 / a).powi(2)).max(0.0).sqrt();
                    (half - sign * y0).max(0.0)
                }
            }
            _ => {
                let faces = self.faces().expect("polygonal spec");
                faces
                    .iter()
                    .filter(|f| sign * f.normal[axis] > 0.0)
                    .map(|f| (-f.excess(x) / (sign * f.normal[axis])).max(0.0))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Homothetic copy scaled by `c` about the origin.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        positive("scale", c)?;
        Ok(match self {
            DomainSpec::Ball { d, radius } => DomainSpec::Ball { d: *d, radius: radius * c },
            DomainSpec::Box { half_widths } => DomainSpec::Box { half_widths: half_widths.iter().map(|a| a * c).collect() },
            DomainSpec::Slab { d, half_width } => DomainSpec::Slab { d: *d, half_width: half_width * c },
            DomainSpec::EquilateralTriangle { inradius } => DomainSpec::EquilateralTriangle { inradius: inradius * c },
            DomainSpec::Ellipse { a, b } => DomainSpec::Ellipse { a: a * c, b: b * c },
            DomainSpec::Triangle2D { vertices } => {
                DomainSpec::Triangle2D { vertices: vertices.map(|v| [v[0] * c, v[1] * c]) }
            }
            DomainSpec::Polytope(p) => {
                DomainSpec::polytope(p.faces.iter().map(|f| (f.normal.clone(), f.offset * c)).collect())?
            }
        })
    }

    /// Area (d = 2) or volume of the bounded specs where it is elementary.
    pub fn area(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match self {
            DomainSpec::Ball { d: 2, radius } => Some(PI * radius * radius),
            DomainSpec::Box { half_widths } => Some(half_widths.iter().map(|a| 2.0 * a).product()),
            DomainSpec::EquilateralTriangle { inradius } => Some(3.0 * 3f64.sqrt() * inradius * inradius),
            DomainSpec::Ellipse { a, b } => Some(PI * a * b),
            DomainSpec::Triangle2D { vertices } => Some(signed_area(vertices).abs()),
            _ => None,
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn signed_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

fn ccw(v: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    if signed_area(v) >= 0.0 {
        *v
    } else {
        [v[0], v[2], v[1]]
    }
}

fn incircle(v: &[[f64; 2]; 3]) -> ([f64; 2], f64) {
    let side = |i: usize, j: usize| (v[i][0] - v[j][0]).hypot(v[i][1] - v[j][1]);
    // side opposite each vertex
    let (a, b, c) = (side(1, 2), side(0, 2), side(0, 1));
    let per = a + b + c;
    let center = [(a * v[0][0] + b * v[1][0] + c * v[2][0]) / per, (a * v[0][1] + b * v[1][1] + c * v[2][1]) / per];
    (center, 2.0 * signed_area(v).abs() / per)
}

/// Signed Euclidean distance to the ellipse x²/a² + y²/b² = 1 (robust
/// bisection on the closest-point parameter).
fn ellipse_signed_distance(a: f64, b: f64, x: f64, y: f64) -> f64 {
    // reduce to the first quadrant with e0 >= e1
    let (e0, e1, y0, y1) = if a >= b { (a, b, x.abs(), y.abs()) } else { (b, a, y.abs(), x.abs()) };
    let q = (y0 / e0).powi(2) + (y1 / e1).powi(2);
    let sign = if q < 1.0 { -1.0 } else { 1.0 };
    let dist = if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1).powi(2);
                let sbar = bisect_root(r0, z0, z1, g);
                let x0 = r0 * y0 / (sbar + r0);
                let x1 = y1 / (sbar + 1.0);
                (x0 - y0).hypot(x1 - y1)
            } else {
                0.0
            }
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    };
    sign * dist
}

fn bisect_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

// ---------------------------------------------------------------------------
// text format

fn parse_num(tok: &str) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse(format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not a finite number: {tok:?}")));
    }
    Ok(v)
}

fn parse_dim(tok: &str) -> Result<usize> {
    let d: usize = tok.trim().parse().map_err(|_| Error::Parse(format!("not a dimension: {tok:?}")))?;
    if d == 0 || d > 1024 {
        return Err(Error::Parse(format!("dimension out of range: {d}")));
    }
    Ok(d)
}

fn key_values<'a>(toks: &[&'a str], allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    for t in toks {
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {t:?}")))?;
        if !allowed.contains(&k) {
            return Err(Error::Parse(format!("unknown key {k:?}; expected one of {allowed:?}")));
        }
        if out.iter().any(|(kk, _)| *kk == k) {
            return Err(Error::Parse(format!("duplicate key {k:?}")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn lookup<'a>(kv: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn require<'a>(kv: &[(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    lookup(kv, key).ok_or_else(|| Error::Parse(format!("missing {key}=")))
}

fn to_parse(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Parse(m),
        other => other,
    }
}

/// Half-space file: one `n1 n2 ... nd c` row per face; blank lines and
/// `#` comments are ignored.
pub fn parse_halfspaces(text: &str) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(parse_num)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if vals.len() < 2 {
            return Err(Error::Parse(format!("line {}: need at least one normal component and an offset", lineno + 1)));
        }
        let (n, c) = vals.split_at(vals.len() - 1);
        rows.push((n.to_vec(), c[0]));
    }
    if rows.is_empty() {
        return Err(Error::Parse("half-space file has no rows".into()));
    }
    Ok(rows)
}

/// Parse the flat text form, resolving `polytope file=...` through `load`.
pub fn parse_spec_with(text: &str, load: impl Fn(&str) -> Result<String>) -> Result<DomainSpec> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let (&head, rest) = toks.split_first().ok_or_else(|| Error::Parse("empty domain spec".into()))?;
    let spec = match head {
        "ball" => {
            let kv = key_values(rest, &["d", "r"])?;
            let d = lookup(&kv, "d").map(parse_dim).transpose()?.unwrap_or(2);
            DomainSpec::ball(d, parse_num(require(&kv, "r")?)?)
        }
        "box" => {
            if rest.is_empty() || rest.len() > 1024 {
                return Err(Error::Parse("box needs 1..=1024 half-widths".into()));
            }
            DomainSpec::boxed(rest.iter().map(|t| parse_num(t)).collect::<Result<_>>()?)
        }
        "slab" => {
            let kv = key_values(rest, &["d", "w"])?;
            DomainSpec::slab(parse_dim(require(&kv, "d")?)?, parse_num(require(&kv, "w")?)?)
        }
        "triangle-eq" => {
            let kv = key_values(rest, &["r"])?;
            DomainSpec::equilateral(parse_num(require(&kv, "r")?)?)
        }
        "ellipse" => {
            let kv = key_values(rest, &["a", "b"])?;
            DomainSpec::ellipse(parse_num(require(&kv, "a")?)?, parse_num(require(&kv, "b")?)?)
        }
        "triangle" => {
            if rest.len() != 3 {
                return Err(Error::Parse("triangle needs three x,y vertices".into()));
            }
            let mut v = [[0.0; 2]; 3];
            for (slot, t) in v.iter_mut().zip(rest) {
                let (x, y) = t.split_once(',').ok_or_else(|| Error::Parse(format!("vertex must be x,y: {t:?}")))?;
                *slot = [parse_num(x)?, parse_num(y)?];
            }
            DomainSpec::triangle(v)
        }
        "polytope" => {
            let rows = match rest {
                [one] if one.starts_with("file=") => parse_halfspaces(&load(&one["file=".len()..])?)?,
                [] => return Err(Error::Parse("polytope needs file=<path> or inline faces".into())),
                faces => faces
                    .iter()
                    .map(|t| {
                        let vals = t.split(',').map(parse_num).collect::<Result<Vec<_>>>()?;
                        if vals.len() < 2 {
                            return Err(Error::Parse(format!("face needs n1,..,nd,c: {t:?}")));
                        }
                        let (n, c) = vals.split_at(vals.len() - 1);
                        Ok((n.to_vec(), c[0]))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            DomainSpec::polytope(rows)
        }
        other => return Err(Error::Parse(format!("unknown domain kind {other:?}"))),
    };
    spec.map_err(to_parse)
}

/// Parse the flat text form; `polytope file=` reads from the filesystem.
pub fn parse_spec(text: &str) -> Result<DomainSpec> {
    parse_spec_with(text, |path| std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}"))))
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s)
    }
}

/// Shortest representation that parses back to the same f64.
struct G(f64);

impl fmt::Display for G {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Ball { d, radius } => write!(f, "ball d={d} r={}", G(*radius)),
            DomainSpec::Box { half_widths } => {
                write!(f, "box")?;
                for a in half_widths {
                    write!(f, " {}", G(*a))?;
                }
                Ok(())
            }
            DomainSpec::Slab { d, half_width } => write!(f, "slab d={d} w={}", G(*half_width)),
            DomainSpec::EquilateralTriangle { inradius } => write!(f, "triangle-eq r={}", G(*inradius)),
            DomainSpec::Ellipse { a, b } => write!(f, "ellipse a={} b={}", G(*a), G(*b)),
            DomainSpec::Triangle2D { vertices } => {
                write!(f, "triangle")?;
                for v in vertices {
                    write!(f, " {},{}", G(v[0]), G(v[1]))?;
                }
                Ok(())
            }
            DomainSpec::Polytope(p) => {
                write!(f, "polytope")?;
                for face in &p.faces {
                    write!(f, " ")?;
                    for n in &face.normal {
                        write!(f, "{},", G(*n))?;
                    }
                    write!(f, "{}", G(face.offset))?;
                }
                Ok(())
            }
        }
    }
}
