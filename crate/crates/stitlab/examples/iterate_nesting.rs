//! The iteration operation `T ⊞ R` on tessellations of a fixed window,
//! demonstrated with exact rational geometry: a hand-built refinement, the
//! trivial vector as the identity, random nested iteration, and
//! rescale-restrict.
//!
//!     cargo run --release --example iterate_nesting

use stitlab::geometry::ConvexPolytope;
use stitlab::iteration::{iterate, nested_iterate, rescale_restrict, TessellationVector};
use stitlab::measure::DrivingMeasure;
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::scalar::{format_scalar, int, ratio};
use stitlab::sim::run;
use stitlab::tess::Tessellation;

fn main() {
    let window = ConvexPolytope::rect(int(-1), int(-1), int(1), int(1)).unwrap();

    // Host: the square split by the vertical line x = 0.
    let host = Tessellation::new(
        window.clone(),
        vec![
            ConvexPolytope::rect(int(-1), int(-1), int(0), int(1)).unwrap(),
            ConvexPolytope::rect(int(0), int(-1), int(1), int(1)).unwrap(),
        ],
    )
    .unwrap();

    // Vector: component 1 splits by y = 1/3, every other component trivial.
    // Components tessellate the whole window; iteration restricts component
    // m to cell m of the host.
    let split_y = Tessellation::new(
        window.clone(),
        vec![
            ConvexPolytope::rect(int(-1), int(-1), int(1), ratio(1, 3)).unwrap(),
            ConvexPolytope::rect(int(-1), ratio(1, 3), int(1), int(1)).unwrap(),
        ],
    )
    .unwrap();
    let w = window.clone();
    let r = TessellationVector::new(window.clone(), vec![split_y], move |_| {
        Tessellation::trivial(w.clone())
    })
    .unwrap();

    let refined = iterate(&host, &r).unwrap();
    println!("host has {} cells; host ⊞ R has {}:", host.cell_count(), refined.cell_count());
    for (i, c) in refined.cells().iter().enumerate() {
        println!("  cell {i}: measure {}", format_scalar(&c.poly.measure()));
    }
    let total = refined
        .cells()
        .iter()
        .fold(int(0), |acc, c| acc + c.poly.measure());
    println!(
        "measures sum to window measure exactly: {}",
        total == window.measure()
    );
    let refines = refined.cells().iter().all(|c| {
        host.cells()
            .iter()
            .filter(|h| h.poly.contains_poly(&c.poly))
            .count()
            == 1
    });
    println!("each refined cell lies in exactly one host cell: {refines}");

    // The trivial vector is the identity for ⊞, as an exact equality.
    let id = iterate(&host, &TessellationVector::trivial(window.clone())).unwrap();
    println!("host ⊞ trivial == host exactly: {}", id == host);

    // Random nesting: iterate with vectors of independent simulated
    // tessellations, generated on demand per component index.
    let measure = DrivingMeasure::axis2();
    let vectors: Vec<TessellationVector> = (0..3)
        .map(|round| {
            let w = window.clone();
            let m = measure.clone();
            TessellationVector::from_generator(window.clone(), move |comp| {
                let mut rng = derive_stream(
                    23,
                    &[
                        StreamPart::Tag("example-nest"),
                        StreamPart::Int(round),
                        StreamPart::Int(comp as i64),
                    ],
                );
                run(&w, &m, 0.4, &mut rng).unwrap().final_tess().clone()
            })
        })
        .collect();
    let mut counts = vec![host.cell_count()];
    let mut acc = host.clone();
    for v in &vectors {
        acc = iterate(&acc, v).unwrap();
        counts.push(acc.cell_count());
    }
    let deep = nested_iterate(&host, &vectors).unwrap();
    println!(
        "random nesting grows cells {:?}; nested_iterate reproduces it exactly: {}",
        counts,
        deep == acc
    );
    let total = deep
        .cells()
        .iter()
        .fold(int(0), |acc, c| acc + c.poly.measure());
    println!(
        "after 3 rounds, measures still sum exactly: {}",
        total == window.measure()
    );

    // Rescale-restrict: blow the host up by 2 and restrict back to the
    // window. The cut at x = 0 survives; cells are clipped exactly.
    let blown = rescale_restrict(&host, &int(2), &window).unwrap();
    println!(
        "(2 * host) ∧ W has {} cells of measures {}",
        blown.cell_count(),
        blown
            .cells()
            .iter()
            .map(|c| format_scalar(&c.poly.measure()))
            .collect::<Vec<_>>()
            .join(", ")
    );
}
