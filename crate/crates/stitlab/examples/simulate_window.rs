//! Simulate the cell-division process on a square window, print the event
//! timeline, and write the result as a tessellation file plus an SVG.
//!
//!     cargo run --release --example simulate_window -- [SEED] [TIME]

use stitlab::geometry::ConvexPolytope;
use stitlab::io::{self, Meta};
use stitlab::measure::DrivingMeasure;
use stitlab::render::{render_svg, RenderOptions};
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::scalar::{format_scalar, int};
use stitlab::sim::run;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let time: f64 = args.next().map_or(1.5, |s| s.parse().expect("time"));

    let window = ConvexPolytope::rect(int(-1), int(-1), int(1), int(1)).unwrap();
    let measure = DrivingMeasure::axis2();
    let mut rng = derive_stream(seed, &[StreamPart::Tag("example-simulate")]);
    let sim = run(&window, &measure, time, &mut rng).unwrap();

    println!("window [-1,1]^2, axis measure, t = {time}, seed = {seed}");
    println!("{} splits:", sim.events().len());
    for e in sim.events() {
        println!(
            "  t={:.4}  normal=({})  cell {} -> two children",
            e.time,
            e.hyperplane
                .normal()
                .components()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
            e.parent_key,
        );
    }

    // Exact conservation: cell measures sum to the window's measure.
    let total = sim
        .final_tess()
        .cells()
        .iter()
        .fold(int(0), |acc, c| acc + c.poly.measure());
    println!(
        "final cells: {} (cell measures sum to {}; equals window measure exactly: {})",
        sim.final_tess().cell_count(),
        format_scalar(&total),
        total == window.measure(),
    );

    let dir = std::env::temp_dir();
    let json = dir.join("stitlab-simulate.json");
    let svg = dir.join("stitlab-simulate.svg");
    io::write_tessellation(
        &json,
        sim.final_tess(),
        Meta {
            time,
            seed,
            measure: measure.kind_label(),
            config_hash: String::new(),
        },
    )
    .unwrap();
    std::fs::write(
        &svg,
        render_svg(
            sim.final_tess(),
            &RenderOptions {
                origin_marker: true,
                ..RenderOptions::default()
            },
        ),
    )
    .unwrap();
    println!("wrote {} and {}", json.display(), svg.display());
}
