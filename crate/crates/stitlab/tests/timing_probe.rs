use std::time::Instant;
use stitlab::geometry::ConvexPolytope;
use stitlab::measure::DrivingMeasure;
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::scalar::ratio;
use stitlab::sim::run;

#[test]
fn probe() {
    let m = DrivingMeasure::axis2();
    for (label, num, den, t_reps) in [("lam04", 1i64, 10i64, 100_000u64), ("lam2", 1, 2, 100_000)] {
        let half = ratio(num, den);
        let w = ConvexPolytope::rect(
            -half.clone(), -half.clone(), half.clone(), half.clone(),
        ).unwrap();
        let small = w.scale(&ratio(1, 2)).unwrap();
        let t0 = Instant::now();
        let mut acc = 0u64;
        let mut rng = derive_stream(1, &[StreamPart::Tag(label)]);
        for _ in 0..t_reps {
            let out = run(&w, &m, 1.0, &mut rng).unwrap();
            acc += out.final_tess().boundary_free_in(&small) as u64;
        }
        println!("{label}: {t_reps} runs in {:.1}s (frees {acc})", t0.elapsed().as_secs_f64());
    }
}
