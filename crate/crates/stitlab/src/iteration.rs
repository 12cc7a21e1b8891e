//! Iteration (nesting) of tessellations.
//!
//! `iterate(T, R)` refines each cell of `T` by an independent component of
//! the vector `R = (R(1), R(2), ...)`: cell number `m` of the canonical
//! enumeration is subdivided by `T ∩ R(m)`-pieces. The operation is *not*
//! associative; repeated iteration is always the left-nested fold
//! `((T ⊞ R1) ⊞ R2) ⊞ ...`, which `nested_iterate` implements.
//!
//! All geometry is exact, so identities such as the partition property and
//! scale-coverage preconditions are checked, not assumed.

use thiserror::Error;

use crate::geometry::ConvexPolytope;
use crate::scalar::Scalar;
use crate::tess::{TessError, Tessellation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IterationError {
    #[error("tessellation and vector windows differ")]
    WindowMismatch,
    #[error("component {index} lives in the wrong window")]
    ComponentWindowMismatch { index: u64 },
    #[error("scaled tessellation does not cover the target window")]
    NotCovered,
    #[error("scale factor must be positive")]
    BadScale,
    #[error(transparent)]
    Tess(#[from] TessError),
}

/// A sequence `(R(1), R(2), ...)` of tessellations of a common window,
/// indexed from 1: finitely many explicit entries followed by a generator
/// for the (lazily sampled) tail. Iteration only ever reads finitely many
/// components, so the generator is consulted once per index it needs.
pub struct TessellationVector {
    window: ConvexPolytope,
    head: Vec<Tessellation>,
    tail: Box<dyn Fn(u64) -> Tessellation>,
}

impl TessellationVector {
    pub fn new(
        window: ConvexPolytope,
        head: Vec<Tessellation>,
        tail: impl Fn(u64) -> Tessellation + 'static,
    ) -> Result<Self, IterationError> {
        for (i, t) in head.iter().enumerate() {
            if t.window() != &window {
                return Err(IterationError::ComponentWindowMismatch {
                    index: i as u64 + 1,
                });
            }
        }
        Ok(TessellationVector {
            window,
            head,
            tail: Box::new(tail),
        })
    }

    /// Vector with every component generated on demand.
    pub fn from_generator(
        window: ConvexPolytope,
        generator: impl Fn(u64) -> Tessellation + 'static,
    ) -> Self {
        TessellationVector {
            window,
            head: Vec::new(),
            tail: Box::new(generator),
        }
    }

    /// Vector whose every component is the trivial tessellation; iterating
    /// with it is the identity.
    pub fn trivial(window: ConvexPolytope) -> Self {
        let w = window.clone();
        TessellationVector::from_generator(window, move |_| Tessellation::trivial(w.clone()))
    }

    pub fn window(&self) -> &ConvexPolytope {
        &self.window
    }

    /// Component `m`, `m >= 1`.
    pub fn component(&self, m: u64) -> Tessellation {
        assert!(m >= 1, "components are indexed from 1");
        let i = (m - 1) as usize;
        let t = match self.head.get(i) {
            Some(t) => t.clone(),
            None => (self.tail)(m),
        };
        assert!(
            t.window() == &self.window,
            "generated component must tessellate the vector's window"
        );
        t
    }
}

/// `T ⊞ R`: refine cell `m` of `T` by component `R(m)`.
pub fn iterate(t: &Tessellation, r: &TessellationVector) -> Result<Tessellation, IterationError> {
    if t.window() != r.window() {
        return Err(IterationError::WindowMismatch);
    }
    let mut parts: Vec<ConvexPolytope> = Vec::with_capacity(t.cells().len());
    for (i, cell) in t.cells().iter().enumerate() {
        let comp = r.component(i as u64 + 1);
        if comp.is_trivial() {
            parts.push(cell.poly.clone());
            continue;
        }
        for d in comp.cells() {
            if let Some(piece) = cell.poly.intersect(&d.poly) {
                parts.push(piece);
            }
        }
    }
    Ok(Tessellation::new(t.window().clone(), parts)?)
}

/// Left-nested repeated iteration `((T ⊞ R_1) ⊞ R_2) ⊞ ... ⊞ R_k`.
pub fn nested_iterate(
    t: &Tessellation,
    vectors: &[TessellationVector],
) -> Result<Tessellation, IterationError> {
    let mut acc = t.clone();
    for r in vectors {
        acc = iterate(&acc, r)?;
    }
    Ok(acc)
}

/// `(c T) ∧ w`: scales `T` by `c > 0` and restricts to `w`, after checking
/// exactly that the scaled window covers `w`.
pub fn rescale_restrict(
    t: &Tessellation,
    c: &Scalar,
    w: &ConvexPolytope,
) -> Result<Tessellation, IterationError> {
    if !crate::scalar::is_positive(c) {
        return Err(IterationError::BadScale);
    }
    let scaled = t.scale(c);
    if !scaled.window().contains_poly(w) {
        return Err(IterationError::NotCovered);
    }
    Ok(scaled.restrict(w)?)
}
