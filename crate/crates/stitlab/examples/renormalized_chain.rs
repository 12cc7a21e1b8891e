//! The renormalized discrete-time chain: geometric time sampling plus
//! rescaling turns the continuous-time process into a stationary Markov
//! chain on tessellations of the window. This example prints a short
//! trajectory with its atom events (steps where no component cuts
//! anything, so the state is exactly the blown-up previous one) and checks
//! the empirical atom frequency in one dimension, where the conditional
//! atom probability is the same in every state.
//!
//!     cargo run --release --example renormalized_chain -- [STEPS]

use stitlab::geometry::{ConvexPolytope, Window};
use stitlab::iteration::rescale_restrict;
use stitlab::measure::DrivingMeasure;
use stitlab::renorm::{atom_repeat_probability, sample_z0, z_step, z_trajectory, RenormConfig};
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::scalar::{int, ratio};

fn main() {
    let steps: u32 = std::env::args()
        .nth(1)
        .map_or(12, |s| s.parse().expect("steps"));

    // Two-dimensional chain with the axis measure, a = 2. A small window
    // keeps states coarse enough that atom steps actually show up.
    let q = ratio(1, 4);
    let w2 = Window::new(
        ConvexPolytope::rect(-q.clone(), -q.clone(), q.clone(), q.clone()).unwrap(),
    )
    .unwrap();
    let cfg2 = RenormConfig::new(w2, DrivingMeasure::axis2(), int(2)).unwrap();
    let mut rng = derive_stream(31, &[StreamPart::Tag("example-chain")]);
    let traj = z_trajectory(&cfg2, steps, &mut rng).unwrap();

    println!("Z_0, ..., Z_{steps} on [-1/4,1/4]^2 (axis measure, a = 2):");
    for (n, state) in traj.states.iter().enumerate() {
        let atom = if n == 0 {
            String::new()
        } else {
            let prev = &traj.states[n - 1];
            let blown = rescale_restrict(prev, cfg2.factor(), cfg2.window().as_poly()).unwrap();
            if *state == blown {
                format!("  <- atom (P = {:.3} given Z_{})", atom_repeat_probability(&cfg2, prev), n - 1)
            } else {
                String::new()
            }
        };
        println!("  Z_{n:<2} {:>3} cells{atom}", state.cell_count());
    }

    // One-dimensional chain: the conditional atom probability telescopes
    // to exp(-(1 - 1/a) * |W|) regardless of the state, so a long run's
    // empirical repeat frequency must match it.
    let w1 = Window::new(ConvexPolytope::interval(int(-1), int(1)).unwrap()).unwrap();
    let cfg1 = RenormConfig::new(w1, DrivingMeasure::lebesgue_points(), int(2)).unwrap();
    let n_long = 4000u32;
    let mut rng = derive_stream(31, &[StreamPart::Tag("example-chain-1d")]);
    let mut state = sample_z0(&cfg1, &mut rng).unwrap();
    let p_theory = atom_repeat_probability(&cfg1, &state);
    let mut repeats = 0u64;
    for _ in 0..n_long {
        let blown = rescale_restrict(&state, cfg1.factor(), cfg1.window().as_poly()).unwrap();
        let next = z_step(&state, &cfg1, &mut rng).unwrap();
        repeats += (next == blown) as u64;
        state = next;
    }
    println!(
        "1-d chain on [-1,1]: atom frequency over {n_long} steps = {:.4} (theory {:.4})",
        repeats as f64 / n_long as f64,
        p_theory
    );
}
