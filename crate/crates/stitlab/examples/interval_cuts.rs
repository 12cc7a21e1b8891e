//! One-dimensional process: at time `t` the cut points laid down in an
//! interval of length `L` form a Poisson process of intensity `t`, so the
//! number of cuts is Poisson(t*L). This example tabulates the empirical law
//! of the cut count against the Poisson probabilities and checks the
//! sequential-nesting property on a single run.
//!
//!     cargo run --release --example interval_cuts -- [RUNS]

use stitlab::geometry::ConvexPolytope;
use stitlab::measure::DrivingMeasure;
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::scalar::int;
use stitlab::sim::run;

fn main() {
    let runs: u64 = std::env::args()
        .nth(1)
        .map_or(4000, |s| s.parse().expect("runs"));
    let t = 1.25;
    let window = ConvexPolytope::interval(int(-1), int(1)).unwrap();
    let measure = DrivingMeasure::lebesgue_points();
    let lambda = t * 2.0; // t * |W|

    let mut hist = vec![0u64; 14];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for i in 0..runs {
        let mut rng = derive_stream(
            11,
            &[StreamPart::Tag("example-interval"), StreamPart::Int(i as i64)],
        );
        let cuts = run(&window, &measure, t, &mut rng)
            .unwrap()
            .final_tess()
            .cut_count();
        let k = (cuts as usize).min(hist.len() - 1);
        hist[k] += 1;
        sum += cuts as f64;
        sum_sq += (cuts * cuts) as f64;
    }

    println!("window [-1,1], Lebesgue measure, t = {t}: cuts ~ Poisson({lambda})");
    println!("{:>5} {:>10} {:>10}", "k", "empirical", "poisson");
    let mut pmf = (-lambda).exp();
    for (k, &cnt) in hist.iter().enumerate() {
        let emp = cnt as f64 / runs as f64;
        if k + 1 == hist.len() {
            let tail = 1.0 - poisson_cdf(lambda, k as u64 - 1);
            println!("{:>4}+ {emp:>10.4} {tail:>10.4}", k);
        } else {
            println!("{k:>5} {emp:>10.4} {pmf:>10.4}");
            pmf *= lambda / (k as f64 + 1.0);
        }
    }
    let mean = sum / runs as f64;
    let var = sum_sq / runs as f64 - mean * mean;
    println!("mean {mean:.3} (theory {lambda}), variance {var:.3} (theory {lambda})");

    // Sequential nesting: the state at an earlier time coarsens the final
    // one, so every final cell sits inside exactly one earlier cell.
    let mut rng = derive_stream(11, &[StreamPart::Tag("example-interval-nest")]);
    let sim = run(&window, &measure, t, &mut rng).unwrap();
    let early = sim.snapshot(t / 2.0).unwrap();
    let fine = sim.final_tess();
    let nested = fine.cells().iter().all(|c| {
        early
            .cells()
            .iter()
            .filter(|e| e.poly.contains_poly(&c.poly))
            .count()
            == 1
    });
    println!(
        "one run: {} cell(s) at t/2, {} at t; every late cell inside exactly one early cell: {nested}",
        early.cell_count(),
        fine.cell_count(),
    );
}

fn poisson_cdf(lambda: f64, k: u64) -> f64 {
    let mut term = (-lambda).exp();
    let mut acc = term;
    for i in 0..k {
        term *= lambda / (i as f64 + 1.0);
        acc += term;
    }
    acc
}
