//! Exact star discrepancy over the critical grid.
//!
//! The supremum of `|#(P ∩ [0,x))/N - vol([0,x))|` is attained, in the limit,
//! at corners of the grid `Γ = Π_k ({x_ik} ∪ {1})`. At each corner two
//! candidates are evaluated: `closed/N - vol` with `closed = #{X ≤ x}` (the
//! limit of boxes shrinking onto points from above) and `vol - open/N` with
//! `open = #{X < x}`.
//!
//! Enumeration fixes the first `d - 1` coordinates of the corner recursively,
//! filtering the points that remain inside the box, and sweeps the last
//! coordinate over points pre-sorted along it. A subtree is skipped when
//! neither candidate can beat the best value found so far. The first axis is
//! split into slabs evaluated in parallel.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiscrepancyReport, Measure};
use crate::{seed, Error, PointSet, Result, Scalar};

/// Default limit on the number of critical-grid corners.
pub const DEFAULT_STAR_BUDGET: f64 = 1e9;

/// Which candidate attained the supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSide {
    /// Closed box `[0, x]` holds too many points.
    Closed,
    /// Open box `[0, x)` holds too few points.
    Open,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarDiscrepancy<T> {
    pub value: T,
    pub witness: Vec<T>,
    pub side: BoxSide,
}

impl<T: Scalar> StarDiscrepancy<T> {
    pub fn report(&self) -> DiscrepancyReport {
        DiscrepancyReport {
            measure: Measure::Star,
            value: self.value.as_f64(),
            witness: Some(self.witness.iter().map(|c| c.as_f64()).collect()),
            subsets: None,
            exact: true,
        }
    }
}

#[inline]
fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("coordinates are not NaN")
}

/// `(closed/N - vol, vol - open/N)` for the anchored box with upper corner `corner`.
pub fn local_discrepancy_at<T: Scalar>(points: &PointSet<T>, corner: &[T]) -> Result<(T, T)> {
    if corner.len() != points.dim() {
        return Err(Error::DimensionMismatch { expected: points.dim(), got: corner.len() });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let closed = points.rows().filter(|r| r.iter().zip(corner).all(|(x, c)| x <= c)).count();
    let open = points.rows().filter(|r| r.iter().zip(corner).all(|(x, c)| x < c)).count();
    let vol = corner.iter().fold(T::one(), |acc, &c| acc * c);
    let n = T::from_count(points.n_points());
    Ok((T::from_count(closed) / n - vol, vol - T::from_count(open) / n))
}

struct Best<T> {
    value: T,
    corner: Vec<usize>,
    side: BoxSide,
}

struct Grid<'a, T> {
    points: &'a PointSet<T>,
    axes: Vec<Vec<T>>,
    n: T,
    shared_best: &'a AtomicU64,
}

impl<T: Scalar> Grid<'_, T> {
    fn bound_beats_best(&self, bound: T) -> bool {
        bound.as_f64() >= f64::from_bits(self.shared_best.load(AtomicOrdering::Relaxed))
    }

    fn publish(&self, v: T) {
        // Non-negative f64 bit patterns are ordered like the values.
        self.shared_best.fetch_max(v.as_f64().max(0.0).to_bits(), AtomicOrdering::Relaxed);
    }

    /// Enumerates corners with `corner[..level]` fixed. `closed` / `open` are
    /// point indices still inside the closed / open box, sorted along the last axis.
    fn descend(
        &self,
        level: usize,
        closed: &[usize],
        open: &[usize],
        vol: T,
        corner: &mut Vec<usize>,
        best: &mut Option<Best<T>>,
    ) {
        let d = self.points.dim();
        if level + 1 == d {
            self.sweep_last(closed, open, vol, corner, best);
            return;
        }
        let mut next_closed = Vec::with_capacity(closed.len());
        let mut next_open = Vec::with_capacity(open.len());
        for (gi, &g) in self.axes[level].iter().enumerate() {
            next_closed.clear();
            next_open.clear();
            next_closed.extend(closed.iter().copied().filter(|&i| self.points.get(i, level) <= g));
            next_open.extend(open.iter().copied().filter(|&i| self.points.get(i, level) < g));
            let next_vol = vol * g;
            let bound = (T::from_count(next_closed.len()) / self.n).max(next_vol);
            if !self.bound_beats_best(bound) {
                continue;
            }
            corner.push(gi);
            self.descend(level + 1, &next_closed, &next_open, next_vol, corner, best);
            corner.pop();
        }
    }

    fn sweep_last(
        &self,
        closed: &[usize],
        open: &[usize],
        vol: T,
        corner: &[usize],
        best: &mut Option<Best<T>>,
    ) {
        let last = self.points.dim() - 1;
        let (mut ci, mut oi) = (0, 0);
        let mut improved = false;
        for (gi, &g) in self.axes[last].iter().enumerate() {
            while ci < closed.len() && self.points.get(closed[ci], last) <= g {
                ci += 1;
            }
            while oi < open.len() && self.points.get(open[oi], last) < g {
                oi += 1;
            }
            let v = vol * g;
            for (value, side) in [
                (T::from_count(ci) / self.n - v, BoxSide::Closed),
                (v - T::from_count(oi) / self.n, BoxSide::Open),
            ] {
                if best.as_ref().is_none_or(|b| value > b.value) {
                    let mut c = corner.to_vec();
                    c.push(gi);
                    *best = Some(Best { value, corner: c, side });
                    improved = true;
                }
            }
        }
        if improved {
            if let Some(b) = best {
                self.publish(b.value);
            }
        }
    }
}

/// Sorted distinct coordinates of each axis, with 1 appended when absent.
fn grid_axes<T: Scalar>(points: &PointSet<T>) -> Vec<Vec<T>> {
    (0..points.dim())
        .map(|k| {
            let mut axis = points.column(k);
            axis.sort_by(cmp);
            axis.dedup();
            if axis.last().is_none_or(|&x| x < T::one()) {
                axis.push(T::one());
            }
            axis
        })
        .collect()
}

/// Exact star discrepancy with the default corner budget.
pub fn star_discrepancy<T: Scalar>(points: &PointSet<T>) -> Result<StarDiscrepancy<T>> {
    star_discrepancy_with_budget(points, DEFAULT_STAR_BUDGET)
}

/// Exact star discrepancy; fails with `ComplexityBudgetExceeded` when the
/// critical grid has more than `budget` corners.
///
/// Ties between corners resolve to the first corner in lexicographic grid
/// order (closed candidate before open), independent of the thread count.
pub fn star_discrepancy_with_budget<T: Scalar>(
    points: &PointSet<T>,
    budget: f64,
) -> Result<StarDiscrepancy<T>> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let axes = grid_axes(points);
    let corners: f64 = axes.iter().map(|a| a.len() as f64).product();
    if corners > budget {
        return Err(Error::ComplexityBudgetExceeded { required: corners, budget });
    }
    let d = points.dim();
    let last = d - 1;
    let mut order: Vec<usize> = (0..points.n_points()).collect();
    order.sort_by(|&a, &b| cmp(&points.get(a, last), &points.get(b, last)));

    let shared_best = AtomicU64::new(0f64.to_bits());
    let grid = Grid { points, axes, n: T::from_count(points.n_points()), shared_best: &shared_best };

    let best = if d == 1 {
        let mut best = None;
        grid.sweep_last(&order, &order, T::one(), &[], &mut best);
        best
    } else {
        let slab = |gi: usize| {
            let g = grid.axes[0][gi];
            let closed: Vec<usize> = order.iter().copied().filter(|&i| points.get(i, 0) <= g).collect();
            let open: Vec<usize> = order.iter().copied().filter(|&i| points.get(i, 0) < g).collect();
            let mut best = None;
            let bound = (T::from_count(closed.len()) / grid.n).max(g);
            if grid.bound_beats_best(bound) {
                grid.descend(1, &closed, &open, g, &mut vec![gi], &mut best);
            }
            best
        };
        let n_slabs = grid.axes[0].len();
        let slabs: Vec<Option<Best<T>>> = if corners > 4096.0 {
            (0..n_slabs).into_par_iter().map(slab).collect()
        } else {
            (0..n_slabs).map(slab).collect()
        };
        slabs.into_iter().flatten().fold(None, |acc: Option<Best<T>>, b| match acc {
            Some(a) if a.value >= b.value => Some(a),
            _ => Some(b),
        })
    };

    let best = best.expect("the grid always contains the corner (1, ..., 1)");
    let witness = best.corner.iter().enumerate().map(|(k, &gi)| grid.axes[k][gi]).collect();
    Ok(StarDiscrepancy { value: best.value.min(T::one()), witness, side: best.side })
}

/// Lower bound on the star discrepancy from `samples` random grid corners;
/// for sets whose critical grid exceeds the exact budget.
pub fn star_lower_bound<T: Scalar>(points: &PointSet<T>, samples: usize, seed: u64) -> Result<DiscrepancyReport> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let axes = grid_axes(points);
    let mut rng = seed::rng(seed);
    let mut best = T::zero();
    let mut witness = vec![T::one(); points.dim()];
    for _ in 0..samples.max(1) {
        let corner: Vec<T> = axes.iter().map(|a| a[rng.random_range(0..a.len())]).collect();
        let (c, o) = local_discrepancy_at(points, &corner)?;
        let v = c.max(o);
        if v > best {
            best = v;
            witness = corner;
        }
    }
    Ok(DiscrepancyReport {
        measure: Measure::Star,
        value: best.as_f64(),
        witness: Some(witness.iter().map(|c| c.as_f64()).collect()),
        subsets: None,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn single_point_examples() {
        let p = PointSet::new(1, 1, vec![0.5]).unwrap();
        assert_eq!(star_discrepancy(&p).unwrap().value, 0.5);
        let p = PointSet::new(1, 2, vec![0.5, 0.5]).unwrap();
        let s = star_discrepancy(&p).unwrap();
        assert_eq!(s.value, 0.75);
        assert_eq!(s.side, BoxSide::Closed);
        assert_eq!(s.witness, vec![0.5, 0.5]);
    }

    #[test]
    fn origin_point_has_discrepancy_one() {
        let p: PointSet = generators::fibonacci_set(1).unwrap();
        let s = star_discrepancy(&p).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.side, BoxSide::Closed);
    }

    #[test]
    fn fibonacci_table_values() {
        let f5: PointSet = generators::fibonacci_set(5).unwrap();
        assert!((star_discrepancy(&f5).unwrap().value - 0.3528).abs() < 5e-5);
        let f20: PointSet = generators::fibonacci_set(20).unwrap();
        assert!((star_discrepancy(&f20).unwrap().value - 0.11885).abs() < 5e-6);
    }

    #[test]
    fn witness_reproduces_value() {
        let p: PointSet = generators::uniform_random(30, 3, 9).unwrap();
        let s = star_discrepancy(&p).unwrap();
        let (c, o) = local_discrepancy_at(&p, &s.witness).unwrap();
        let v = match s.side {
            BoxSide::Closed => c,
            BoxSide::Open => o,
        };
        assert_eq!(v, s.value);
    }

    #[test]
    fn budget_guard() {
        let p: PointSet = generators::uniform_random(100, 6, 1).unwrap();
        assert!(matches!(star_discrepancy(&p), Err(Error::ComplexityBudgetExceeded { .. })));
        let lb = star_lower_bound(&p, 200, 3).unwrap();
        assert!(!lb.exact && lb.value > 0.0 && lb.value <= 1.0);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let p: PointSet = generators::uniform_random(200, 2, 4).unwrap();
        let a = star_discrepancy(&p).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| star_discrepancy(&p).unwrap());
        assert_eq!(a, b);
    }
}
