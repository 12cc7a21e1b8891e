//! The geometry kernel is exact: clipping splits measures with rational
//! equality, no epsilons anywhere. This example clips a polygon by a
//! cascade of hyperplanes and verifies conservation after every cut.
//!
//!     cargo run --release --example exact_geometry

use stitlab::geometry::{ConvexPolytope, Direction, Hyperplane};
use stitlab::scalar::{format_scalar, ratio, Scalar};

fn main() {
    // A pentagon with awkward rational vertices.
    let pentagon = ConvexPolytope::new(
        2,
        vec![
            vec![ratio(-7, 3), ratio(-1, 2)],
            vec![ratio(1, 5), ratio(-5, 4)],
            vec![ratio(9, 4), ratio(1, 3)],
            vec![ratio(1, 2), ratio(13, 6)],
            vec![ratio(-3, 2), ratio(3, 2)],
        ],
    )
    .unwrap();
    println!("pentagon measure = {}", format_scalar(&pentagon.measure()));

    let cuts = [
        Hyperplane::from_direction(Direction::from_ints(2, &[3, 1]).unwrap(), ratio(1, 7)),
        Hyperplane::from_direction(Direction::from_ints(2, &[1, 4]).unwrap(), ratio(2, 3)),
        Hyperplane::from_direction(Direction::from_ints(2, &[1, -1]).unwrap(), ratio(-1, 6)),
        Hyperplane::from_direction(Direction::from_ints(2, &[0, 1]).unwrap(), ratio(1, 9)),
    ];

    let mut pieces = vec![pentagon.clone()];
    for (i, h) in cuts.iter().enumerate() {
        let mut next = Vec::new();
        for p in &pieces {
            let (le, ge) = p.clip(h);
            next.extend(le);
            next.extend(ge);
        }
        pieces = next;
        let total: Scalar = pieces.iter().map(ConvexPolytope::measure).sum();
        let exact = total == pentagon.measure();
        println!(
            "after cut {}: {} pieces, total measure {} (exact: {exact})",
            i + 1,
            pieces.len(),
            format_scalar(&total),
        );
        assert!(exact);
    }

    // Canonical keys are injective on distinct cells.
    let mut keys: Vec<String> = pieces
        .iter()
        .map(|p| p.canonical_key().as_str().to_string())
        .collect();
    keys.sort();
    keys.dedup();
    println!(
        "{} pieces carry {} distinct canonical keys",
        pieces.len(),
        keys.len()
    );

    // Scaling is exact too: measure scales by c^dim.
    let c = ratio(-3, 5);
    let scaled = pentagon.scale(&c).unwrap();
    println!(
        "scale by -3/5: measure {} = (9/25) * {} is {}",
        format_scalar(&scaled.measure()),
        format_scalar(&pentagon.measure()),
        scaled.measure() == pentagon.measure() * c.clone() * c,
    );
}
