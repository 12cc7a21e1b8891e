//! Tessellations of a convex window into convex cells.
//!
//! A tessellation stores its window and its cells in a canonical
//! enumeration: the cell containing the origin comes first (when the origin
//! lies on a cell boundary, the smallest key among the cells whose closure
//! contains it; when no cell contains it, this rank is vacuous), the rest
//! follow in ascending canonical-key order. Two tessellations are equal iff
//! their windows and enumerated cell lists are equal, which by key
//! canonicality is exact geometric equality.

use num_traits::Zero;
use thiserror::Error;

use crate::geometry::{CellKey, ConvexPolytope};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TessError {
    #[error("tessellation needs at least one cell")]
    NoCells,
    #[error("cell dimension differs from window dimension")]
    DimensionMismatch,
    #[error("cell reaches outside the window")]
    CellOutsideWindow,
    #[error("cell measures do not sum to the window measure")]
    NotAPartition,
    #[error("restriction window is not contained in the tessellation window")]
    NotContained,
}

/// One cell: canonical polytope plus its cached canonical key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TessCell {
    pub poly: ConvexPolytope,
    pub key: CellKey,
}

impl TessCell {
    fn new(poly: ConvexPolytope) -> Self {
        let key = poly.canonical_key();
        TessCell { poly, key }
    }
}

/// Partition of a window into convex cells, canonically enumerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tessellation {
    window: ConvexPolytope,
    cells: Vec<TessCell>,
}

impl Tessellation {
    /// The one-cell tessellation `{W}`.
    pub fn trivial(window: ConvexPolytope) -> Self {
        let cell = TessCell::new(window.clone());
        Tessellation {
            window,
            cells: vec![cell],
        }
    }

    /// Builds a tessellation from cells, validating the partition cheaply:
    /// every cell must lie in the window and the cell measures must sum to
    /// the window measure exactly. Pairwise interior disjointness is the
    /// caller's obligation (all constructions in this crate produce it).
    pub fn new(window: ConvexPolytope, cells: Vec<ConvexPolytope>) -> Result<Self, TessError> {
        if cells.is_empty() {
            return Err(TessError::NoCells);
        }
        let mut total = Scalar::zero();
        for c in &cells {
            if c.dim() != window.dim() {
                return Err(TessError::DimensionMismatch);
            }
            if !window.contains_poly(c) {
                return Err(TessError::CellOutsideWindow);
            }
            total += c.measure();
        }
        if total != window.measure() {
            return Err(TessError::NotAPartition);
        }
        let mut cells: Vec<TessCell> = cells.into_iter().map(TessCell::new).collect();
        sort_canonical(&mut cells, window.dim());
        Ok(Tessellation { window, cells })
    }

    /// Constructor for cells that partition the window by construction
    /// (splitting, restriction, scaling, refinement by covering
    /// components). Skips the partition validation on release builds; the
    /// invariant is still asserted on debug builds.
    pub(crate) fn from_parts(window: ConvexPolytope, cells: Vec<ConvexPolytope>) -> Tessellation {
        #[cfg(debug_assertions)]
        {
            // Same invariant `new` validates, without the throwaway
            // construction (cell keys are expensive to derive twice).
            let mut total = Scalar::zero();
            for c in &cells {
                debug_assert!(c.dim() == window.dim() && window.contains_poly(c));
                total += c.measure();
            }
            debug_assert!(
                total == window.measure(),
                "internal construction must produce a partition"
            );
        }
        let mut cells: Vec<TessCell> = cells.into_iter().map(TessCell::new).collect();
        sort_canonical(&mut cells, window.dim());
        Tessellation { window, cells }
    }

    pub fn window(&self) -> &ConvexPolytope {
        &self.window
    }

    pub fn cells(&self) -> &[TessCell] {
        &self.cells
    }

    pub fn cell_count(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn is_trivial(&self) -> bool {
        self.cells.len() == 1
    }

    /// First cell of the canonical enumeration; the origin cell whenever
    /// the window contains the origin.
    pub fn first_cell(&self) -> &TessCell {
        &self.cells[0]
    }

    /// Number of interior cuts in dimension 1.
    pub fn cut_count(&self) -> u64 {
        self.cells.len() as u64 - 1
    }

    /// Restriction to a sub-window `v`: cells are intersections with `v`
    /// that keep a nonempty interior.
    pub fn restrict(&self, v: &ConvexPolytope) -> Result<Tessellation, TessError> {
        if !self.window.contains_poly(v) {
            return Err(TessError::NotContained);
        }
        let parts: Vec<ConvexPolytope> = self
            .cells
            .iter()
            .filter_map(|c| c.poly.intersect(v))
            .collect();
        Ok(Tessellation::from_parts(v.clone(), parts))
    }

    /// Image under `x -> c x`, `c != 0`.
    pub fn scale(&self, c: &Scalar) -> Tessellation {
        let window = self.window.scale(c).expect("nonzero scale");
        let cells: Vec<ConvexPolytope> = self
            .cells
            .iter()
            .map(|cell| cell.poly.scale(c).expect("nonzero scale"))
            .collect();
        Tessellation::from_parts(window, cells)
    }

    /// True if some cell contains `v`, i.e. the tessellation's boundary
    /// does not meet the interior of `v`. Exact.
    pub fn boundary_free_in(&self, v: &ConvexPolytope) -> bool {
        self.cells.iter().any(|c| c.poly.contains_poly(v))
    }

    /// Total length of interior cell boundaries in dimension 2 (each
    /// interior facet counted once); cut count in dimension 1.
    pub fn interior_boundary_length_f64(&self) -> f64 {
        if self.window.dim() == 1 {
            return self.cut_count() as f64;
        }
        let cells_sum: f64 = self.cells.iter().map(|c| c.poly.perimeter_f64()).sum();
        (cells_sum - self.window.perimeter_f64()) / 2.0
    }

    pub fn find(&self, key: &CellKey) -> Option<&TessCell> {
        self.cells.iter().find(|c| &c.key == key)
    }

    /// The canonical enumeration as explicit `(index, cell)` pairs,
    /// indexed from 1 (index 1 = the origin cell).
    pub fn enumerate_cells(&self) -> impl Iterator<Item = (u64, &TessCell)> {
        self.cells.iter().enumerate().map(|(i, c)| (i as u64 + 1, c))
    }
}

/// Canonical enumeration order; see the module docs.
fn sort_canonical(cells: &mut [TessCell], dim: u8) {
    let origin = vec![Scalar::zero(); dim as usize];
    let mut origin_key: Option<CellKey> = None;
    // Prefer the cell holding the origin strictly; fall back to the
    // smallest key among closures containing it.
    for c in cells.iter() {
        if c.poly.contains_point(&origin, true) {
            origin_key = Some(c.key.clone());
            break;
        }
    }
    if origin_key.is_none() {
        origin_key = cells
            .iter()
            .filter(|c| c.poly.contains_point(&origin, false))
            .map(|c| c.key.clone())
            .min();
    }
    cells.sort_by(|a, b| {
        let ra = Some(&a.key) != origin_key.as_ref();
        let rb = Some(&b.key) != origin_key.as_ref();
        ra.cmp(&rb).then_with(|| a.key.cmp(&b.key))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn centered_square() -> ConvexPolytope {
        ConvexPolytope::rect(int(-1), int(-1), int(1), int(1)).unwrap()
    }

    fn quadrants() -> Vec<ConvexPolytope> {
        let z = int(0);
        vec![
            ConvexPolytope::rect(int(-1), int(-1), z.clone(), z.clone()).unwrap(),
            ConvexPolytope::rect(z.clone(), int(-1), int(1), z.clone()).unwrap(),
            ConvexPolytope::rect(z.clone(), z.clone(), int(1), int(1)).unwrap(),
            ConvexPolytope::rect(int(-1), z.clone(), z, int(1)).unwrap(),
        ]
    }

    #[test]
    fn partition_validation() {
        let w = centered_square();
        assert!(Tessellation::new(w.clone(), quadrants()).is_ok());
        let mut missing = quadrants();
        missing.pop();
        assert_eq!(
            Tessellation::new(w.clone(), missing).unwrap_err(),
            TessError::NotAPartition
        );
        let outside = vec![ConvexPolytope::rect(int(-1), int(-1), int(2), int(1)).unwrap()];
        assert_eq!(
            Tessellation::new(w, outside).unwrap_err(),
            TessError::CellOutsideWindow
        );
    }

    #[test]
    fn enumeration_puts_origin_cell_first() {
        // Origin sits on all four quadrant corners; the smallest key wins.
        let t = Tessellation::new(centered_square(), quadrants()).unwrap();
        let expected = quadrants()
            .iter()
            .map(|p| p.canonical_key())
            .min()
            .unwrap();
        assert_eq!(t.first_cell().key, expected);
        // With a strictly containing cell there is no ambiguity.
        let w = centered_square();
        let h = crate::geometry::Hyperplane::new(2, &[int(1), int(0)], ratio(1, 2)).unwrap();
        let (le, ge) = w.clip(&h);
        let t = Tessellation::new(w, vec![le.unwrap(), ge.unwrap()]).unwrap();
        assert!(t.first_cell().poly.contains_point(&[int(0), int(0)], true));
    }

    #[test]
    fn restriction_partitions_the_subwindow() {
        let t = Tessellation::new(centered_square(), quadrants()).unwrap();
        let v = ConvexPolytope::rect(ratio(-1, 2), ratio(-1, 2), ratio(1, 2), ratio(1, 2)).unwrap();
        let r = t.restrict(&v).unwrap();
        assert_eq!(r.cell_count(), 4);
        assert_eq!(r.window(), &v);
        // Off-center restriction drops cells it only touches.
        let v = ConvexPolytope::rect(int(0), int(0), int(1), int(1)).unwrap();
        let r = t.restrict(&v).unwrap();
        assert_eq!(r.cell_count(), 1);
        assert!(r.is_trivial());
        let too_big = ConvexPolytope::rect(int(0), int(0), int(2), int(1)).unwrap();
        assert_eq!(t.restrict(&too_big).unwrap_err(), TessError::NotContained);
    }

    #[test]
    fn scaling_and_boundary_free_predicate() {
        let t = Tessellation::new(centered_square(), quadrants()).unwrap();
        let s = t.scale(&int(2));
        assert_eq!(s.window().measure(), int(16));
        assert_eq!(s.cell_count(), 4);
        let small = ConvexPolytope::rect(ratio(1, 4), ratio(1, 4), ratio(1, 2), ratio(1, 2)).unwrap();
        assert!(t.boundary_free_in(&small));
        let across = ConvexPolytope::rect(ratio(-1, 4), ratio(-1, 4), ratio(1, 2), ratio(1, 2)).unwrap();
        assert!(!t.boundary_free_in(&across));
    }

    #[test]
    fn interior_boundary_length() {
        let t = Tessellation::new(centered_square(), quadrants()).unwrap();
        // Two full chords of length 2 each.
        assert!((t.interior_boundary_length_f64() - 4.0).abs() < 1e-12);
        let w1 = ConvexPolytope::interval(int(0), int(4)).unwrap();
        let cells = vec![
            ConvexPolytope::interval(int(0), int(1)).unwrap(),
            ConvexPolytope::interval(int(1), int(4)).unwrap(),
        ];
        let t1 = Tessellation::new(w1, cells).unwrap();
        assert_eq!(t1.cut_count(), 1);
        assert_eq!(t1.interior_boundary_length_f64(), 1.0);
    }

    #[test]
    fn equality_is_exact_structural_equality() {
        let a = Tessellation::new(centered_square(), quadrants()).unwrap();
        let mut shuffled = quadrants();
        shuffled.reverse();
        let b = Tessellation::new(centered_square(), shuffled).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Tessellation::trivial(centered_square()));
    }
}
