//! Exact geometry kernel: rational points, directions, hyperplanes and
//! convex polytopes in dimension 1 or 2.
//!
//! Conventions:
//! - points are coordinate vectors of exact rationals ([`Point`]),
//! - a polytope in dimension 1 is an interval stored as `[lo, hi]`, and in
//!   dimension 2 a strictly convex polygon stored counterclockwise with the
//!   lexicographically smallest vertex first (the canonical form),
//! - directions are primitive integer vectors with the first nonzero
//!   component positive, so every line direction has exactly one
//!   representation,
//! - a hyperplane is `{x : <normal, x> = offset}` with a canonical normal.
//!
//! All predicates and constructions here are exact. Splitting a polytope
//! with a hyperplane produces children whose measures sum to the parent's
//! measure as an identity of rationals, which the simulator and the
//! verification suites rely on.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scalar::{format_scalar, Scalar};

/// Coordinate vector; length equals the ambient dimension.
pub type Point = Vec<Scalar>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(u8),
    #[error("coordinate count {got} does not match dimension {dim}")]
    DimensionMismatch { dim: u8, got: usize },
    #[error("direction must be a nonzero vector")]
    ZeroDirection,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("vertex loop is not strictly convex")]
    NotConvex,
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("window must contain the origin strictly in its interior")]
    OriginNotInterior,
}

fn check_dim(dim: u8) -> Result<(), GeometryError> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(GeometryError::BadDimension(dim))
    }
}

/// Direction of a hyperplane normal: a primitive integer vector whose first
/// nonzero component is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    dim: u8,
    components: Vec<BigInt>,
}

impl Direction {
    /// Canonicalizes an arbitrary nonzero rational vector.
    pub fn new(dim: u8, components: &[Scalar]) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if components.len() != dim as usize {
            return Err(GeometryError::DimensionMismatch {
                dim,
                got: components.len(),
            });
        }
        if components.iter().all(|c| c.is_zero()) {
            return Err(GeometryError::ZeroDirection);
        }
        // Clear denominators, then divide by the gcd and fix the sign.
        let mut denom_lcm = BigInt::one();
        for c in components {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut ints: Vec<BigInt> = components
            .iter()
            .map(|c| c.numer() * (&denom_lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        for v in &mut ints {
            *v /= &g;
        }
        let first_nonzero_negative = ints
            .iter()
            .find(|v| !v.is_zero())
            .map(|v| v.is_negative())
            .unwrap_or(false);
        if first_nonzero_negative {
            for v in &mut ints {
                *v = -std::mem::take(v);
            }
        }
        Ok(Direction {
            dim,
            components: ints,
        })
    }

    pub fn from_ints(dim: u8, components: &[i64]) -> Result<Self, GeometryError> {
        let rats: Vec<Scalar> = components
            .iter()
            .map(|&c| Scalar::from_integer(BigInt::from(c)))
            .collect();
        Self::new(dim, &rats)
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn components(&self) -> &[BigInt] {
        &self.components
    }

    /// `<u, p>` as an exact rational.
    ///
    /// Zero and unit components short-circuit: for the common axis
    /// directions the dot product is a coordinate lookup, not arithmetic.
    pub fn dot(&self, p: &[Scalar]) -> Scalar {
        debug_assert_eq!(p.len(), self.dim as usize);
        let mut acc: Option<Scalar> = None;
        for (c, x) in self.components.iter().zip(p) {
            if c.is_zero() {
                continue;
            }
            let term = if c.magnitude().is_one() {
                if c.is_negative() {
                    -x.clone()
                } else {
                    x.clone()
                }
            } else {
                x * Scalar::from_integer(c.clone())
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or_else(Scalar::zero)
    }

    /// Index of the coordinate axis this direction is, if it is one.
    ///
    /// Canonical components make an axis direction exactly one `1` among
    /// zeros, so axis-aligned splits can be detected without arithmetic.
    pub fn axis_index(&self) -> Option<usize> {
        let mut axis = None;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if axis.is_some() || !c.is_one() {
                return None;
            }
            axis = Some(i);
        }
        axis
    }

    /// Euclidean norm, for float-precision law computations only.
    pub fn norm_f64(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let v = Scalar::from_integer(c.clone());
                let f = crate::scalar::to_f64(&v);
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Hyperplane `{x : <normal, x> = offset}` with canonical normal.
///
/// Canonicalizing the normal rescales the offset accordingly, so the
/// represented point set is preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    normal: Direction,
    offset: Scalar,
}

impl Hyperplane {
    pub fn new(dim: u8, normal: &[Scalar], offset: Scalar) -> Result<Self, GeometryError> {
        // Find the rescaling that Direction::new applies, to carry the
        // offset along: if u_canon = u / s then c_canon = c / s.
        let dir = Direction::new(dim, normal)?;
        let idx = normal
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero vector");
        let s = &normal[idx] / Scalar::from_integer(dir.components[idx].clone());
        Ok(Hyperplane {
            normal: dir,
            offset: offset / s,
        })
    }

    pub fn from_direction(normal: Direction, offset: Scalar) -> Self {
        Hyperplane { normal, offset }
    }

    pub fn normal(&self) -> &Direction {
        &self.normal
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    /// Signed side value `<normal, p> - offset`.
    pub fn eval(&self, p: &[Scalar]) -> Scalar {
        self.normal.dot(p) - &self.offset
    }
}

/// Canonical identity of a polytope: a deterministic serialization of its
/// canonical vertex list in exact rational form.
///
/// Equal polytopes have equal keys and distinct polytopes distinct keys; the
/// byte order of keys is the canonical cell order used by tessellation
/// enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey(String);

impl CellKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub(crate) fn from_string(s: String) -> Self {
        CellKey(s)
    }

    /// Short hex digest for labels and logs.
    pub fn short_hex(&self) -> String {
        let digest = Sha256::digest(self.0.as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.short_hex())
    }
}

/// Convex polytope with nonempty interior, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolytope {
    dim: u8,
    vertices: Vec<Point>,
}

/// Exact sign of the turn `(a - o) x (b - o)`.
///
/// Works on cross-multiplied integers without reducing any intermediate
/// rational; in deep tessellations (coordinates with hundreds of bits)
/// this is several times cheaper than forming the `Scalar` cross product,
/// and sign tests dominate the clipping hot path.
fn cross_sign(o: &Point, a: &Point, b: &Point) -> Ordering {
    // Each difference as an unreduced (numer, denom) pair, denom > 0: the
    // `Ratio` invariant keeps denominators positive.
    fn diff(x: &Scalar, y: &Scalar) -> (BigInt, BigInt) {
        (
            x.numer() * y.denom() - y.numer() * x.denom(),
            x.denom() * y.denom(),
        )
    }
    let (n1, d1) = diff(&a[0], &o[0]);
    let (n2, d2) = diff(&b[1], &o[1]);
    let (n3, d3) = diff(&a[1], &o[1]);
    let (n4, d4) = diff(&b[0], &o[0]);
    (n1 * n2 * d3 * d4).cmp(&(n3 * n4 * d1 * d2))
}

fn twice_signed_area(loop_pts: &[Point]) -> Scalar {
    let n = loop_pts.len();
    let mut acc = Scalar::zero();
    for i in 0..n {
        let a = &loop_pts[i];
        let b = &loop_pts[(i + 1) % n];
        acc += &a[0] * &b[1] - &a[1] * &b[0];
    }
    acc
}

/// Drops consecutive duplicate vertices, cyclically.
fn dedup_consecutive(pts: &mut Vec<Point>) {
    let mut i = 0;
    while i < pts.len() && pts.len() > 1 {
        let j = (i + 1) % pts.len();
        if pts[i] == pts[j] {
            pts.remove(j);
        } else {
            i += 1;
        }
    }
}

/// Drops collinear middle vertices until stable.
fn drop_collinear(pts: &mut Vec<Point>) {
    loop {
        let mut removed = false;
        let mut k = 0;
        while k < pts.len() && pts.len() >= 3 {
            let n = pts.len();
            let prev = &pts[(k + n - 1) % n];
            let cur = &pts[k];
            let next = &pts[(k + 1) % n];
            if cross_sign(prev, cur, next) == Ordering::Equal {
                pts.remove(k);
                removed = true;
            } else {
                k += 1;
            }
        }
        if !removed || pts.len() < 3 {
            break;
        }
    }
}

/// Rotates the lexicographically smallest vertex to the front.
fn rotate_lex_min(pts: &mut Vec<Point>) {
    let min_idx = (0..pts.len())
        .min_by(|&a, &b| {
            pts[a][0]
                .cmp(&pts[b][0])
                .then_with(|| pts[a][1].cmp(&pts[b][1]))
        })
        .unwrap();
    pts.rotate_left(min_idx);
}

/// Canonicalizes a polygon vertex loop.
///
/// Returns `Ok(None)` when the loop has empty interior (fewer than three
/// distinct points or zero area), `Err` when it is a genuine non-convex
/// loop, and the canonical vertex list otherwise.
fn canonical_loop(mut pts: Vec<Point>) -> Result<Option<Vec<Point>>, GeometryError> {
    dedup_consecutive(&mut pts);
    if pts.len() < 3 {
        return Ok(None);
    }
    let area2 = twice_signed_area(&pts);
    if area2.is_zero() {
        return Ok(None);
    }
    if area2.is_negative() {
        pts.reverse();
    }
    drop_collinear(&mut pts);
    if pts.len() < 3 {
        return Ok(None);
    }
    // Strict convexity check.
    let n = pts.len();
    for k in 0..n {
        if cross_sign(&pts[k], &pts[(k + 1) % n], &pts[(k + 2) % n]) != Ordering::Greater {
            return Err(GeometryError::NotConvex);
        }
    }
    rotate_lex_min(&mut pts);
    Ok(Some(pts))
}

/// Canonicalization fast path for loops that are convex and
/// counterclockwise by construction — the outputs of clipping a canonical
/// polygon. Skips the area-orientation pass and the convexity check;
/// duplicate and collinear vertices (cuts through a vertex) are still
/// removed, and flat outputs collapse to `None`.
fn canonical_loop_convex(mut pts: Vec<Point>) -> Option<Vec<Point>> {
    dedup_consecutive(&mut pts);
    drop_collinear(&mut pts);
    if pts.len() < 3 {
        return None;
    }
    rotate_lex_min(&mut pts);
    debug_assert!((0..pts.len()).all(|k| {
        cross_sign(&pts[k], &pts[(k + 1) % pts.len()], &pts[(k + 2) % pts.len()])
            == Ordering::Greater
    }));
    Some(pts)
}

impl ConvexPolytope {
    /// Builds a polytope from vertices, canonicalizing their cyclic order.
    ///
    /// Dimension 1 expects exactly two endpoints; dimension 2 accepts a
    /// polygon loop in either orientation, tolerates duplicate or collinear
    /// vertices, and rejects non-convex input and input with empty interior.
    pub fn new(dim: u8, vertices: Vec<Point>) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        for v in &vertices {
            if v.len() != dim as usize {
                return Err(GeometryError::DimensionMismatch { dim, got: v.len() });
            }
        }
        match dim {
            1 => {
                if vertices.len() != 2 {
                    return Err(GeometryError::EmptyInterior);
                }
                let (a, b) = (vertices[0][0].clone(), vertices[1][0].clone());
                if a == b {
                    return Err(GeometryError::EmptyInterior);
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                Ok(ConvexPolytope {
                    dim,
                    vertices: vec![vec![lo], vec![hi]],
                })
            }
            _ => match canonical_loop(vertices)? {
                None => Err(GeometryError::EmptyInterior),
                Some(pts) => Ok(ConvexPolytope {
                    dim,
                    vertices: pts,
                }),
            },
        }
    }

    /// Interval `[lo, hi]`, the dimension-1 polytope.
    pub fn interval(lo: Scalar, hi: Scalar) -> Result<Self, GeometryError> {
        Self::new(1, vec![vec![lo], vec![hi]])
    }

    /// Axis-aligned rectangle, a dimension-2 convenience constructor.
    pub fn rect(x0: Scalar, y0: Scalar, x1: Scalar, y1: Scalar) -> Result<Self, GeometryError> {
        Self::new(
            2,
            vec![
                vec![x0.clone(), y0.clone()],
                vec![x1.clone(), y0],
                vec![x1, y1.clone()],
                vec![x0, y1],
            ],
        )
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Lebesgue measure: length in dimension 1, area in dimension 2. Exact.
    pub fn measure(&self) -> Scalar {
        match self.dim {
            1 => &self.vertices[1][0] - &self.vertices[0][0],
            _ => twice_signed_area(&self.vertices) / Scalar::from_integer(BigInt::from(2)),
        }
    }

    /// `[min, max]` of `<u, x>` over the polytope. Exact.
    pub fn support_interval(&self, u: &Direction) -> (Scalar, Scalar) {
        let mut vals = self.vertices.iter().map(|v| u.dot(v));
        let first = vals.next().expect("polytope has vertices");
        let mut lo = first.clone();
        let mut hi = first;
        for v in vals {
            if v < lo {
                lo = v.clone();
            }
            if v > hi {
                hi = v;
            }
        }
        (lo, hi)
    }

    /// Image under `x -> c x`, `c != 0`. Exact; canonical form is restored.
    pub fn scale(&self, c: &Scalar) -> Result<Self, GeometryError> {
        if c.is_zero() {
            return Err(GeometryError::ZeroScale);
        }
        let verts: Vec<Point> = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * c).collect())
            .collect();
        if c.is_positive() {
            // Positive scaling preserves the canonical form verbatim:
            // cyclic order, orientation and the lex-min front vertex.
            return Ok(ConvexPolytope {
                dim: self.dim,
                vertices: verts,
            });
        }
        ConvexPolytope::new(self.dim, verts)
    }

    /// Corner coordinates `(x0, y0, x1, y1)` when this polygon is an
    /// axis-aligned rectangle.
    ///
    /// Canonical vertex order for such a rectangle is
    /// `(x0,y0), (x1,y0), (x1,y1), (x0,y1)`; axis driving measures keep
    /// every cell in this family, so rectangle splits and intersections
    /// reduce to coordinate comparisons.
    fn axis_rect(&self) -> Option<(&Scalar, &Scalar, &Scalar, &Scalar)> {
        if self.dim != 2 || self.vertices.len() != 4 {
            return None;
        }
        let (a, b, c, d) = (
            &self.vertices[0],
            &self.vertices[1],
            &self.vertices[2],
            &self.vertices[3],
        );
        if a[1] == b[1] && b[0] == c[0] && c[1] == d[1] && d[0] == a[0] {
            Some((&a[0], &a[1], &c[0], &c[1]))
        } else {
            None
        }
    }

    /// Already-canonical constructor for `x0 < x1`, `y0 < y1`.
    fn from_axis_rect(x0: &Scalar, y0: &Scalar, x1: &Scalar, y1: &Scalar) -> Self {
        ConvexPolytope {
            dim: 2,
            vertices: vec![
                vec![x0.clone(), y0.clone()],
                vec![x1.clone(), y0.clone()],
                vec![x1.clone(), y1.clone()],
                vec![x0.clone(), y1.clone()],
            ],
        }
    }

    /// Splits by a hyperplane into the `<=` side and the `>=` side.
    ///
    /// A side with empty interior is absent. When both sides are present
    /// their measures sum to the parent's measure exactly.
    pub fn clip(&self, h: &Hyperplane) -> (Option<Self>, Option<Self>) {
        match self.dim {
            1 => {
                // Canonical 1-d normal is (1), so eval is x - offset.
                let (lo, hi) = (&self.vertices[0][0], &self.vertices[1][0]);
                let c = h.offset();
                if c <= lo {
                    (None, Some(self.clone()))
                } else if c >= hi {
                    (Some(self.clone()), None)
                } else {
                    let le = ConvexPolytope::interval(lo.clone(), c.clone()).ok();
                    let ge = ConvexPolytope::interval(c.clone(), hi.clone()).ok();
                    (le, ge)
                }
            }
            _ => {
                if let (Some((x0, y0, x1, y1)), Some(axis)) =
                    (self.axis_rect(), h.normal().axis_index())
                {
                    // Axis cut through a rectangle: substitute the offset
                    // for one coordinate instead of running the general
                    // polygon clip.
                    let c = h.offset();
                    let (lo, hi) = if axis == 0 { (x0, x1) } else { (y0, y1) };
                    if c <= lo {
                        return (None, Some(self.clone()));
                    }
                    if c >= hi {
                        return (Some(self.clone()), None);
                    }
                    let (le, ge) = if axis == 0 {
                        (
                            Self::from_axis_rect(x0, y0, c, y1),
                            Self::from_axis_rect(c, y0, x1, y1),
                        )
                    } else {
                        (
                            Self::from_axis_rect(x0, y0, x1, c),
                            Self::from_axis_rect(x0, c, x1, y1),
                        )
                    };
                    return (Some(le), Some(ge));
                }
                let n = self.vertices.len();
                let side: Vec<Scalar> = self.vertices.iter().map(|v| h.eval(v)).collect();
                let mut le: Vec<Point> = Vec::with_capacity(n + 2);
                let mut ge: Vec<Point> = Vec::with_capacity(n + 2);
                for i in 0..n {
                    let j = (i + 1) % n;
                    let (si, sj) = (&side[i], &side[j]);
                    if !si.is_positive() {
                        le.push(self.vertices[i].clone());
                    }
                    if !si.is_negative() {
                        ge.push(self.vertices[i].clone());
                    }
                    if (si.is_positive() && sj.is_negative())
                        || (si.is_negative() && sj.is_positive())
                    {
                        let t = si / (si - sj);
                        let x: Point = self.vertices[i]
                            .iter()
                            .zip(&self.vertices[j])
                            .map(|(a, b)| a + &t * (b - a))
                            .collect();
                        le.push(x.clone());
                        ge.push(x);
                    }
                }
                let build = |pts: Vec<Point>| -> Option<ConvexPolytope> {
                    // Clipping a canonical (CCW) polygon yields a convex
                    // CCW loop, so the fast canonicalization applies.
                    canonical_loop_convex(pts).map(|v| ConvexPolytope { dim: 2, vertices: v })
                };
                (build(le), build(ge))
            }
        }
    }

    /// Intersection with another convex polytope; absent when the
    /// intersection has empty interior. Exact.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.dim, other.dim);
        match self.dim {
            1 => {
                let lo = std::cmp::max(&self.vertices[0][0], &other.vertices[0][0]).clone();
                let hi = std::cmp::min(&self.vertices[1][0], &other.vertices[1][0]).clone();
                if lo < hi {
                    ConvexPolytope::interval(lo, hi).ok()
                } else {
                    None
                }
            }
            _ => {
                if let (Some((ax0, ay0, ax1, ay1)), Some((bx0, by0, bx1, by1))) =
                    (self.axis_rect(), other.axis_rect())
                {
                    let x0 = std::cmp::max(ax0, bx0);
                    let y0 = std::cmp::max(ay0, by0);
                    let x1 = std::cmp::min(ax1, bx1);
                    let y1 = std::cmp::min(ay1, by1);
                    if x0 < x1 && y0 < y1 {
                        return Some(Self::from_axis_rect(x0, y0, x1, y1));
                    }
                    return None;
                }
                // Clip self against each inward edge halfplane of other.
                let mut pts = self.vertices.clone();
                let m = other.vertices.len();
                for i in 0..m {
                    if pts.len() < 3 {
                        return None;
                    }
                    let a = &other.vertices[i];
                    let b = &other.vertices[(i + 1) % m];
                    // Interior of a CCW polygon is left of each edge, i.e.
                    // <n, x> <= c with n = (e_y, -e_x), c = <n, a>.
                    let nx = &b[1] - &a[1];
                    let ny = &a[0] - &b[0];
                    let c = &nx * &a[0] + &ny * &a[1];
                    pts = halfplane_keep_le(&pts, &nx, &ny, &c);
                }
                canonical_loop_convex(pts).map(|v| ConvexPolytope { dim: 2, vertices: v })
            }
        }
    }

    /// Point membership; `strict` tests the open interior.
    pub fn contains_point(&self, p: &[Scalar], strict: bool) -> bool {
        debug_assert_eq!(p.len(), self.dim as usize);
        match self.dim {
            1 => {
                let (lo, hi) = (&self.vertices[0][0], &self.vertices[1][0]);
                if strict {
                    lo < &p[0] && &p[0] < hi
                } else {
                    lo <= &p[0] && &p[0] <= hi
                }
            }
            _ => {
                if let Some((x0, y0, x1, y1)) = self.axis_rect() {
                    return if strict {
                        x0 < &p[0] && &p[0] < x1 && y0 < &p[1] && &p[1] < y1
                    } else {
                        x0 <= &p[0] && &p[0] <= x1 && y0 <= &p[1] && &p[1] <= y1
                    };
                }
                let n = self.vertices.len();
                let pt = p.to_vec();
                for i in 0..n {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    match cross_sign(a, b, &pt) {
                        Ordering::Less => return false,
                        Ordering::Equal if strict => return false,
                        _ => {}
                    }
                }
                true
            }
        }
    }

    /// True if `other` is contained in the closure of `self`.
    pub fn contains_poly(&self, other: &Self) -> bool {
        if let (Some((ax0, ay0, ax1, ay1)), Some((bx0, by0, bx1, by1))) =
            (self.axis_rect(), other.axis_rect())
        {
            return ax0 <= bx0 && ay0 <= by0 && bx1 <= ax1 && by1 <= ay1;
        }
        other
            .vertices
            .iter()
            .all(|v| self.contains_point(v, false))
    }

    /// Canonical identity; see [`CellKey`].
    pub fn canonical_key(&self) -> CellKey {
        let mut s = String::with_capacity(self.vertices.len() * 12);
        s.push_str(&self.dim.to_string());
        s.push('|');
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            for (j, x) in v.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&format_scalar(x));
            }
        }
        CellKey(s)
    }

    /// Boundary length in dimension 2 (0 in dimension 1), float precision.
    pub fn perimeter_f64(&self) -> f64 {
        if self.dim == 1 {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let dx = crate::scalar::to_f64(&(&b[0] - &a[0]));
            let dy = crate::scalar::to_f64(&(&b[1] - &a[1]));
            acc += (dx * dx + dy * dy).sqrt();
        }
        acc
    }

    /// Largest pairwise vertex distance, float precision.
    pub fn diameter_f64(&self) -> f64 {
        let pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v.iter().map(crate::scalar::to_f64).collect())
            .collect();
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d: f64 = pts[i]
                    .iter()
                    .zip(&pts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.max(d);
            }
        }
        best
    }

    /// `[min, max]` of a float direction's support values, for the
    /// isotropic sampler's rejection step.
    pub fn support_f64(&self, u: &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            let mut d = 0.0;
            for (c, x) in u.iter().zip(v) {
                d += c * crate::scalar::to_f64(x);
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }
}

/// Sutherland-Hodgman step keeping `<n, x> <= c`; raw loop in, raw loop out.
fn halfplane_keep_le(pts: &[Point], nx: &Scalar, ny: &Scalar, c: &Scalar) -> Vec<Point> {
    let n = pts.len();
    let side: Vec<Scalar> = pts
        .iter()
        .map(|v| nx * &v[0] + ny * &v[1] - c)
        .collect();
    let mut out: Vec<Point> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let j = (i + 1) % n;
        let (si, sj) = (&side[i], &side[j]);
        if !si.is_positive() {
            out.push(pts[i].clone());
        }
        if (si.is_positive() && sj.is_negative()) || (si.is_negative() && sj.is_positive()) {
            let t = si / (si - sj);
            let x: Point = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| a + &t * (b - a))
                .collect();
            out.push(x);
        }
    }
    out
}

/// Observation window: a convex polytope with the origin strictly interior.
///
/// The origin condition is what the rescale-and-restrict constructions need
/// (`W` must be covered by `a W` for `a > 1`); plain simulation accepts any
/// [`ConvexPolytope`] as its window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window(ConvexPolytope);

impl Window {
    pub fn new(poly: ConvexPolytope) -> Result<Self, GeometryError> {
        let origin = vec![Scalar::zero(); poly.dim() as usize];
        if !poly.contains_point(&origin, true) {
            return Err(GeometryError::OriginNotInterior);
        }
        Ok(Window(poly))
    }

    pub fn as_poly(&self) -> &ConvexPolytope {
        &self.0
    }

    pub fn into_poly(self) -> ConvexPolytope {
        self.0
    }
}

impl std::ops::Deref for Window {
    type Target = ConvexPolytope;

    fn deref(&self) -> &ConvexPolytope {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn unit_square() -> ConvexPolytope {
        ConvexPolytope::rect(int(0), int(0), int(1), int(1)).unwrap()
    }

    #[test]
    fn canonical_form_is_order_independent() {
        let a = ConvexPolytope::new(
            2,
            vec![
                vec![int(1), int(1)],
                vec![int(0), int(1)],
                vec![int(0), int(0)],
                vec![int(1), int(0)],
            ],
        )
        .unwrap();
        assert_eq!(a, unit_square());
        assert_eq!(a.canonical_key(), unit_square().canonical_key());
    }

    #[test]
    fn canonical_key_is_frozen() {
        // Cross-run and cross-platform stability contract: this exact byte
        // string identifies the unit square.
        assert_eq!(
            unit_square().canonical_key().as_str(),
            "2|0/1,0/1;1/1,0/1;1/1,1/1;0/1,1/1"
        );
        let seg = ConvexPolytope::interval(ratio(-1, 2), ratio(1, 2)).unwrap();
        assert_eq!(seg.canonical_key().as_str(), "1|-1/2;1/2");
    }

    #[test]
    fn degenerate_and_nonconvex_inputs_are_rejected() {
        let collinear = ConvexPolytope::new(
            2,
            vec![vec![int(0), int(0)], vec![int(1), int(1)], vec![int(2), int(2)]],
        );
        assert_eq!(collinear.unwrap_err(), GeometryError::EmptyInterior);
        let nonconvex = ConvexPolytope::new(
            2,
            vec![
                vec![int(0), int(0)],
                vec![int(2), int(0)],
                vec![int(2), int(2)],
                vec![int(1), ratio(1, 2)],
                vec![int(0), int(2)],
            ],
        );
        assert_eq!(nonconvex.unwrap_err(), GeometryError::NotConvex);
        assert!(ConvexPolytope::interval(int(1), int(1)).is_err());
    }

    #[test]
    fn collinear_redundant_vertices_are_dropped() {
        let p = ConvexPolytope::new(
            2,
            vec![
                vec![int(0), int(0)],
                vec![ratio(1, 2), int(0)],
                vec![int(1), int(0)],
                vec![int(1), int(1)],
                vec![int(0), int(1)],
            ],
        )
        .unwrap();
        assert_eq!(p, unit_square());
    }

    #[test]
    fn direction_canonicalization() {
        let d = Direction::new(2, &[ratio(-2, 3), ratio(4, 3)]).unwrap();
        assert_eq!(d.components(), &[BigInt::from(1), BigInt::from(-2)]);
        let e = Direction::new(2, &[int(3), int(-6)]).unwrap();
        assert_eq!(d, e);
        assert!(Direction::new(2, &[int(0), int(0)]).is_err());
    }

    #[test]
    fn hyperplane_canonicalization_preserves_point_set() {
        let h1 = Hyperplane::new(2, &[int(2), int(0)], int(1)).unwrap();
        let h2 = Hyperplane::new(2, &[int(-4), int(0)], int(-2)).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.offset(), &ratio(1, 2));
        let p = vec![ratio(1, 2), int(7)];
        assert!(h1.eval(&p).is_zero());
    }

    #[test]
    fn clip_partitions_measure_exactly() {
        let p = unit_square();
        let h = Hyperplane::new(2, &[int(1), int(1)], ratio(3, 4)).unwrap();
        let (le, ge) = p.clip(&h);
        let (le, ge) = (le.unwrap(), ge.unwrap());
        assert_eq!(le.measure() + ge.measure(), p.measure());
        assert_eq!(le.measure(), ratio(9, 32));
    }

    #[test]
    fn clip_misses_are_reported_as_absence() {
        let p = unit_square();
        let h = Hyperplane::new(2, &[int(1), int(0)], int(2)).unwrap();
        let (le, ge) = p.clip(&h);
        assert_eq!(le, Some(p.clone()));
        assert!(ge.is_none());
        // Tangent at a vertex: still no split.
        let h = Hyperplane::new(2, &[int(1), int(1)], int(0)).unwrap();
        let (le, ge) = p.clip(&h);
        assert!(le.is_none());
        assert_eq!(ge, Some(p));
    }

    #[test]
    fn clip_through_vertex_still_splits() {
        let p = unit_square();
        let h = Hyperplane::new(2, &[int(1), int(-1)], int(0)).unwrap();
        let (le, ge) = p.clip(&h);
        let (le, ge) = (le.unwrap(), ge.unwrap());
        assert_eq!(le.measure(), ratio(1, 2));
        assert_eq!(ge.measure(), ratio(1, 2));
        assert_eq!(le.measure() + ge.measure(), p.measure());
    }

    #[test]
    fn one_dimensional_clip() {
        let p = ConvexPolytope::interval(int(0), int(3)).unwrap();
        let h = Hyperplane::new(1, &[int(1)], int(1)).unwrap();
        let (le, ge) = p.clip(&h);
        assert_eq!(le.unwrap().measure(), int(1));
        assert_eq!(ge.unwrap().measure(), int(2));
    }

    #[test]
    fn support_interval_is_exact_and_scales() {
        let p = unit_square();
        let d = Direction::from_ints(2, &[1, 2]).unwrap();
        let (lo, hi) = p.support_interval(&d);
        assert_eq!((lo, hi), (int(0), int(3)));
        let q = p.scale(&ratio(3, 2)).unwrap();
        let (lo, hi) = q.support_interval(&d);
        assert_eq!((lo, hi), (int(0), ratio(9, 2)));
    }

    #[test]
    fn scaling_by_negative_factor_recanonicalizes() {
        let p = unit_square();
        let q = p.scale(&int(-1)).unwrap();
        assert_eq!(q.measure(), p.measure());
        assert!(q.contains_point(&[ratio(-1, 2), ratio(-1, 2)], true));
        assert!(p.scale(&int(0)).is_err());
    }

    #[test]
    fn intersection_agrees_with_clip() {
        let p = unit_square();
        let q = ConvexPolytope::rect(ratio(1, 2), ratio(-1, 2), int(2), ratio(1, 2)).unwrap();
        let r = p.intersect(&q).unwrap();
        assert_eq!(
            r,
            ConvexPolytope::rect(ratio(1, 2), int(0), int(1), ratio(1, 2)).unwrap()
        );
        let far = ConvexPolytope::rect(int(5), int(5), int(6), int(6)).unwrap();
        assert!(p.intersect(&far).is_none());
        // Touching along an edge has empty interior.
        let touch = ConvexPolytope::rect(int(1), int(0), int(2), int(1)).unwrap();
        assert!(p.intersect(&touch).is_none());
    }

    #[test]
    fn window_requires_interior_origin() {
        assert!(Window::new(unit_square()).is_err());
        let centered =
            ConvexPolytope::rect(ratio(-1, 2), ratio(-1, 2), ratio(1, 2), ratio(1, 2)).unwrap();
        assert!(Window::new(centered).is_ok());
    }

    #[test]
    fn containment_predicates() {
        let p = unit_square();
        assert!(p.contains_point(&[ratio(1, 2), ratio(1, 2)], true));
        assert!(p.contains_point(&[int(0), int(0)], false));
        assert!(!p.contains_point(&[int(0), int(0)], true));
        let inner = ConvexPolytope::rect(ratio(1, 4), ratio(1, 4), ratio(3, 4), int(1)).unwrap();
        assert!(p.contains_poly(&inner));
        let outer = ConvexPolytope::rect(ratio(1, 4), ratio(1, 4), ratio(3, 4), int(2)).unwrap();
        assert!(!p.contains_poly(&outer));
    }
}
