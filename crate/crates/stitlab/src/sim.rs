//! Markov jump-process construction of a STIT tessellation in a window.
//!
//! Every cell `C` alive at time `t` carries an independent exponential
//! clock of rate `Λ([C])`; when it rings, a hyperplane drawn from the
//! normalized hitting distribution splits `C` into two children, which
//! start fresh clocks. The process is simulated exactly (no time
//! discretization): cell lifetimes are drawn at birth and scheduled in an
//! event queue keyed by absolute death time.
//!
//! Geometry stays exact; times and rates are `f64`. Random draws happen in
//! a fixed order (lifetime at birth; hyperplane at split; then the two
//! child lifetimes, lower side first), so a run is a pure function of its
//! input stream.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::RngCore;
use thiserror::Error;

use crate::geometry::{CellKey, ConvexPolytope, Hyperplane};
use crate::measure::DrivingMeasure;
use crate::rng::exp_std;
use crate::tess::Tessellation;

/// Default cap on the number of split events in one run.
pub const DEFAULT_EVENT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("window and driving measure dimensions differ")]
    DimensionMismatch,
    #[error("duration must be finite and nonnegative, got {0}")]
    BadDuration(f64),
    #[error("event budget of {budget} split events exhausted at time {time}")]
    BudgetExceeded { budget: u64, time: f64 },
    #[error("snapshot time {t} outside simulated range [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },
}

/// One split: at `time`, `parent_key` was cut by `hyperplane` into the two
/// children (lower side first).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub parent_key: CellKey,
    pub hyperplane: Hyperplane,
    pub child_keys: (CellKey, CellKey),
}

/// Queue entry: a live cell and its scheduled death time. Ordered so that
/// `BinaryHeap` pops the earliest death; `seq` (birth order) breaks ties
/// deterministically.
struct Scheduled {
    death: f64,
    seq: u64,
    poly: ConvexPolytope,
    key: CellKey,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: the heap is a max-heap and we want the earliest death.
        other
            .death
            .total_cmp(&self.death)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// A completed run: full event history, final state, and enough residual
/// state (scheduled death times of surviving cells) to continue the run.
#[derive(Debug, Clone)]
pub struct SimRun {
    window: ConvexPolytope,
    measure: DrivingMeasure,
    t_end: f64,
    events: Vec<JumpEvent>,
    final_tess: Tessellation,
    /// Survivors with their already-drawn death times (all `> t_end`),
    /// in final-tessellation enumeration order.
    survivors: Vec<(ConvexPolytope, f64)>,
}

struct Engine {
    heap: BinaryHeap<Scheduled>,
    events: Vec<JumpEvent>,
    next_seq: u64,
    budget: u64,
    /// Sum of `Λ([C])` over live cells, maintained incrementally.
    total_rate: f64,
}

impl Engine {
    fn start(
        window: &ConvexPolytope,
        measure: &DrivingMeasure,
        rng: &mut impl RngCore,
    ) -> Result<Self, SimError> {
        if window.dim() != measure.dim() {
            return Err(SimError::DimensionMismatch);
        }
        let mut eng = Engine {
            heap: BinaryHeap::new(),
            events: Vec::new(),
            next_seq: 0,
            budget: DEFAULT_EVENT_BUDGET,
            total_rate: 0.0,
        };
        eng.schedule(window.clone(), 0.0, measure, rng);
        Ok(eng)
    }

    fn resume(
        survivors: &[(ConvexPolytope, f64)],
        measure: &DrivingMeasure,
    ) -> Self {
        let mut eng = Engine {
            heap: BinaryHeap::new(),
            events: Vec::new(),
            next_seq: 0,
            budget: DEFAULT_EVENT_BUDGET,
            total_rate: 0.0,
        };
        for (poly, death) in survivors {
            let rate = measure.lambda_of(poly).to_f64();
            eng.total_rate += rate;
            let seq = eng.next_seq;
            eng.next_seq += 1;
            eng.heap.push(Scheduled {
                death: *death,
                seq,
                key: poly.canonical_key(),
                poly: poly.clone(),
            });
        }
        eng
    }

    fn schedule(
        &mut self,
        poly: ConvexPolytope,
        birth: f64,
        measure: &DrivingMeasure,
        rng: &mut impl RngCore,
    ) {
        let rate = measure.lambda_of(&poly).to_f64();
        let death = birth + exp_std(rng) / rate;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.total_rate += rate;
        self.heap.push(Scheduled {
            death,
            seq,
            key: poly.canonical_key(),
            poly,
        });
    }

    /// Splits the next scheduled cell regardless of horizon; returns the
    /// event time, or `None` if the queue is empty.
    fn step(
        &mut self,
        measure: &DrivingMeasure,
        rng: &mut impl RngCore,
    ) -> Result<Option<f64>, SimError> {
        let Some(cell) = self.heap.pop() else {
            return Ok(None);
        };
        if self.events.len() as u64 >= self.budget {
            return Err(SimError::BudgetExceeded {
                budget: self.budget,
                time: cell.death,
            });
        }
        self.total_rate -= measure.lambda_of(&cell.poly).to_f64();
        let h = measure.sample_hitting(&cell.poly, rng);
        let (le, ge) = cell.poly.clip(&h);
        let le = le.expect("hitting hyperplane splits the cell");
        let ge = ge.expect("hitting hyperplane splits the cell");
        self.events.push(JumpEvent {
            time: cell.death,
            parent_key: cell.key,
            hyperplane: h,
            child_keys: (le.canonical_key(), ge.canonical_key()),
        });
        let t = cell.death;
        self.schedule(le, t, measure, rng);
        self.schedule(ge, t, measure, rng);
        Ok(Some(t))
    }

    fn next_death(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.death)
    }

    /// Runs until every scheduled death exceeds `t_end`.
    fn run_until(
        &mut self,
        t_end: f64,
        measure: &DrivingMeasure,
        rng: &mut impl RngCore,
    ) -> Result<(), SimError> {
        while let Some(d) = self.next_death() {
            if d > t_end {
                break;
            }
            self.step(measure, rng)?;
        }
        Ok(())
    }

    fn into_survivors(self) -> (Vec<JumpEvent>, Vec<(ConvexPolytope, f64)>) {
        let mut alive: Vec<Scheduled> = self.heap.into_vec();
        alive.sort_by(|a, b| a.key.cmp(&b.key));
        (
            self.events,
            alive.into_iter().map(|s| (s.poly, s.death)).collect(),
        )
    }
}

/// Simulates the process in `window` from the trivial state up to time
/// `t_end`, with the default event budget.
pub fn run(
    window: &ConvexPolytope,
    measure: &DrivingMeasure,
    t_end: f64,
    rng: &mut impl RngCore,
) -> Result<SimRun, SimError> {
    run_with_budget(window, measure, t_end, DEFAULT_EVENT_BUDGET, rng)
}

pub fn run_with_budget(
    window: &ConvexPolytope,
    measure: &DrivingMeasure,
    t_end: f64,
    budget: u64,
    rng: &mut impl RngCore,
) -> Result<SimRun, SimError> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(SimError::BadDuration(t_end));
    }
    let mut eng = Engine::start(window, measure, rng)?;
    eng.budget = budget;
    eng.run_until(t_end, measure, rng)?;
    let (events, survivors) = eng.into_survivors();
    finish(window.clone(), measure.clone(), t_end, events, survivors)
}

fn finish(
    window: ConvexPolytope,
    measure: DrivingMeasure,
    t_end: f64,
    events: Vec<JumpEvent>,
    survivors: Vec<(ConvexPolytope, f64)>,
) -> Result<SimRun, SimError> {
    let cells: Vec<ConvexPolytope> = survivors.iter().map(|(p, _)| p.clone()).collect();
    let final_tess = Tessellation::from_parts(window.clone(), cells);
    Ok(SimRun {
        window,
        measure,
        t_end,
        events,
        final_tess,
        survivors,
    })
}

impl SimRun {
    pub fn window(&self) -> &ConvexPolytope {
        &self.window
    }
    pub fn measure(&self) -> &DrivingMeasure {
        &self.measure
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }
    pub fn final_tess(&self) -> &Tessellation {
        &self.final_tess
    }

    /// State at time `t`, reconstructed by replaying the event log.
    pub fn snapshot(&self, t: f64) -> Result<Tessellation, SimError> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(SimError::TimeOutOfRange { t, t_end: self.t_end });
        }
        let mut alive: Vec<(CellKey, ConvexPolytope)> =
            vec![(self.window.canonical_key(), self.window.clone())];
        for ev in &self.events {
            if ev.time > t {
                break;
            }
            let pos = alive
                .iter()
                .position(|(k, _)| k == &ev.parent_key)
                .expect("event log replays consistently");
            let (_, parent) = alive.swap_remove(pos);
            let (le, ge) = parent.clip(&ev.hyperplane);
            let le = le.expect("logged split stays valid");
            let ge = ge.expect("logged split stays valid");
            debug_assert_eq!(
                (le.canonical_key(), ge.canonical_key()),
                ev.child_keys.clone()
            );
            alive.push((le.canonical_key(), le));
            alive.push((ge.canonical_key(), ge));
        }
        let cells = alive.into_iter().map(|(_, p)| p).collect();
        Ok(Tessellation::from_parts(self.window.clone(), cells))
    }

    /// Extends the run by `t_more`, reusing the surviving cells' scheduled
    /// death times (valid by memorylessness) and drawing everything new
    /// from `rng`. The result is distributed like a single run to
    /// `t_end + t_more`.
    pub fn continue_run(
        &self,
        t_more: f64,
        rng: &mut impl RngCore,
    ) -> Result<SimRun, SimError> {
        if !t_more.is_finite() || t_more < 0.0 {
            return Err(SimError::BadDuration(t_more));
        }
        let new_end = self.t_end + t_more;
        let mut eng = Engine::resume(&self.survivors, &self.measure);
        eng.run_until(new_end, &self.measure, rng)?;
        let (mut events, survivors) = eng.into_survivors();
        let mut all = self.events.clone();
        all.append(&mut events);
        finish(
            self.window.clone(),
            self.measure.clone(),
            new_end,
            all,
            survivors,
        )
    }
}

/// Runs the process for exactly `n_events` splits (no time horizon) and
/// returns, for each split, the total jump rate of the state before it and
/// the waiting time since the previous split. Used to test the exponential
/// law of holding times without censoring.
pub fn inter_event_gaps(
    window: &ConvexPolytope,
    measure: &DrivingMeasure,
    n_events: usize,
    budget: u64,
    rng: &mut impl RngCore,
) -> Result<Vec<(f64, f64)>, SimError> {
    let mut eng = Engine::start(window, measure, rng)?;
    eng.budget = budget;
    let mut out = Vec::with_capacity(n_events);
    let mut last = 0.0f64;
    for _ in 0..n_events {
        let rate = eng.total_rate;
        let t = eng
            .step(measure, rng)?
            .expect("queue never empties: splits create live children");
        out.push((rate, t - last));
        last = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DrivingMeasure;
    use crate::rng::{derive_stream, StreamPart};
    use crate::scalar::int;

    fn unit_square() -> ConvexPolytope {
        ConvexPolytope::rect(int(0), int(0), int(1), int(1)).unwrap()
    }

    fn rng(label: &str) -> impl RngCore {
        derive_stream(7, &[StreamPart::Tag("sim-test"), StreamPart::Tag(label)])
    }

    #[test]
    fn run_is_a_pure_function_of_the_stream() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let a = run(&w, &m, 2.0, &mut rng("pure")).unwrap();
        let b = run(&w, &m, 2.0, &mut rng("pure")).unwrap();
        assert_eq!(a.events(), b.events());
        assert_eq!(a.final_tess(), b.final_tess());
        let c = run(&w, &m, 2.0, &mut rng("other")).unwrap();
        assert_ne!(a.events(), c.events());
    }

    #[test]
    fn event_times_increase_and_children_partition_parents() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let r = run(&w, &m, 3.0, &mut rng("events")).unwrap();
        assert!(!r.events().is_empty());
        let mut prev = 0.0;
        for ev in r.events() {
            assert!(ev.time > prev);
            prev = ev.time;
            assert!(ev.time <= r.t_end());
        }
        assert_eq!(r.final_tess().cell_count(), r.events().len() as u64 + 1);
    }

    #[test]
    fn snapshot_replays_the_log() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let r = run(&w, &m, 3.0, &mut rng("snap")).unwrap();
        assert!(r.snapshot(0.0).unwrap().is_trivial());
        assert_eq!(&r.snapshot(3.0).unwrap(), r.final_tess());
        // A snapshot strictly between two event times has exactly the
        // cells alive then.
        let k = r.events().len() / 2;
        let mid = (r.events()[k].time + r.events()[k + 1].time) / 2.0;
        let snap = r.snapshot(mid).unwrap();
        assert_eq!(snap.cell_count(), k as u64 + 2);
        assert!(r.snapshot(3.5).is_err());
        assert!(r.snapshot(-0.1).is_err());
    }

    #[test]
    fn continuation_extends_the_event_log() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let r = run(&w, &m, 1.0, &mut rng("cont-a")).unwrap();
        let r2 = r.continue_run(1.5, &mut rng("cont-b")).unwrap();
        assert_eq!(r2.t_end(), 2.5);
        assert_eq!(&r2.events()[..r.events().len()], r.events());
        for ev in &r2.events()[r.events().len()..] {
            assert!(ev.time > 1.0 && ev.time <= 2.5);
        }
        assert_eq!(&r2.snapshot(1.0).unwrap(), r.final_tess());
    }

    #[test]
    fn budget_is_enforced() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let err = run_with_budget(&w, &m, 50.0, 100, &mut rng("budget")).unwrap_err();
        assert!(matches!(err, SimError::BudgetExceeded { budget: 100, .. }));
    }

    #[test]
    fn one_dimensional_runs_split_intervals() {
        let w = ConvexPolytope::interval(int(0), int(10)).unwrap();
        let m = DrivingMeasure::lebesgue_points();
        let r = run(&w, &m, 1.0, &mut rng("dim1")).unwrap();
        assert!(r.final_tess().cut_count() > 0);
        assert_eq!(r.final_tess().window(), &w);
    }

    #[test]
    fn gaps_report_pre_split_rates() {
        let w = unit_square();
        let m = DrivingMeasure::axis2();
        let gaps = inter_event_gaps(&w, &m, 20, 10_000, &mut rng("gaps")).unwrap();
        assert_eq!(gaps.len(), 20);
        // First state is the bare window: rate Λ([W]) = 2 for the axis measure.
        assert!((gaps[0].0 - 2.0).abs() < 1e-12);
        // Rates never decrease: children hitting masses overshoot the parent's.
        for w in gaps.windows(2) {
            assert!(w[1].0 >= w[0].0);
        }
        assert!(gaps.iter().all(|(r, g)| *r > 0.0 && *g > 0.0));
    }
}
