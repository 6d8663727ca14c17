//! Finite unions of intervals on a bounded time window.
//!
//! Contact sets of exact paths are closed, but the ladder set is only closed
//! from the right, so every interval carries its own endpoint flags. A set is
//! kept normalized: intervals sorted, disjoint and non-touching.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Observation window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInput(alloc::format!("bad window [{lo}, {hi}]")))
        }
    }

    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    /// Slack used when comparing endpoints that went through floating-point
    /// root solving.
    pub fn slack(&self) -> f64 {
        1e-9 * self.lo.abs().max(self.hi.abs()).max(1.0)
    }
}

/// An interval with independently open or closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn point(t: f64) -> Self {
        Self::closed(t, t)
    }

    /// `[lo, hi)`.
    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi && !self.is_empty()
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }

    // Whether `self` and `next` (with next.lo >= self.lo) overlap or touch
    // so that their union is a single interval.
    fn joins(&self, next: &Interval) -> bool {
        next.lo < self.hi || (next.lo == self.hi && (self.hi_closed || next.lo_closed))
    }
}

/// Sorted union of maximal disjoint intervals inside a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSet {
    window: Window,
    intervals: Vec<Interval>,
}

/// Answer of [`set_ops`].
#[derive(Debug, Clone, PartialEq)]
pub struct SetComparison {
    /// `a ⊆ b`.
    pub subset: bool,
    /// Topological closure of `a`.
    pub closure: ClosedSet,
    /// Points of `a` with an empty right neighbourhood in `a`.
    pub isolated_right_points: Vec<f64>,
    /// `a \ b`.
    pub difference: ClosedSet,
}

impl ClosedSet {
    pub fn empty(window: Window) -> Self {
        Self { window, intervals: Vec::new() }
    }

    pub fn full(window: Window) -> Self {
        Self { window, intervals: alloc::vec![Interval::closed(window.lo, window.hi)] }
    }

    /// Normalize arbitrary intervals: clip to the window, drop empties, sort
    /// and merge overlapping or touching pieces.
    pub fn from_intervals(window: Window, intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut items: Vec<Interval> = intervals
            .into_iter()
            .filter_map(|iv| clip(iv, &window))
            .collect();
        items.sort_by(|a, b| {
            a.lo.total_cmp(&b.lo).then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match out.last_mut() {
                Some(last) if last.joins(&iv) => {
                    if iv.lo == last.lo {
                        last.lo_closed |= iv.lo_closed;
                    }
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed |= iv.hi_closed;
                    }
                }
                _ => out.push(iv),
            }
        }
        Self { window, intervals: out }
    }

    pub fn from_points(window: Window, points: impl IntoIterator<Item = f64>) -> Self {
        Self::from_intervals(window, points.into_iter().map(Interval::point))
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, t: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.hi < t);
        self.intervals.get(i).is_some_and(|iv| iv.contains(t))
    }

    /// Every endpoint is included.
    pub fn is_closed(&self) -> bool {
        self.intervals.iter().all(|iv| iv.lo_closed && iv.hi_closed)
    }

    /// Contains the limit of every decreasing sequence of its points.
    pub fn is_right_closed(&self) -> bool {
        self.intervals.iter().all(|iv| iv.lo_closed)
    }

    pub fn lebesgue_measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn closure(&self) -> Self {
        Self::from_intervals(
            self.window,
            self.intervals.iter().map(|iv| Interval::closed(iv.lo, iv.hi)),
        )
    }

    pub fn complement(&self) -> Self {
        let w = self.window;
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = w.lo;
        let mut cursor_closed = true;
        for iv in &self.intervals {
            out.push(Interval { lo: cursor, hi: iv.lo, lo_closed: cursor_closed, hi_closed: !iv.lo_closed });
            cursor = iv.hi;
            cursor_closed = !iv.hi_closed;
        }
        out.push(Interval { lo: cursor, hi: w.hi, lo_closed: cursor_closed, hi_closed: true });
        Self::from_intervals(w, out)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let (a, b) = (&self.intervals, &other.intervals);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let (x, y) = (a[i], b[j]);
            let (lo, lo_closed) = match x.lo.total_cmp(&y.lo) {
                core::cmp::Ordering::Less => (y.lo, y.lo_closed),
                core::cmp::Ordering::Greater => (x.lo, x.lo_closed),
                core::cmp::Ordering::Equal => (x.lo, x.lo_closed && y.lo_closed),
            };
            let (hi, hi_closed) = match x.hi.total_cmp(&y.hi) {
                core::cmp::Ordering::Less => (x.hi, x.hi_closed),
                core::cmp::Ordering::Greater => (y.hi, y.hi_closed),
                core::cmp::Ordering::Equal => (x.hi, x.hi_closed && y.hi_closed),
            };
            let piece = Interval { lo, hi, lo_closed, hi_closed };
            if !piece.is_empty() {
                out.push(piece);
            }
            let x_first = x.hi < y.hi || (x.hi == y.hi && !x.hi_closed);
            if x_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(Self::from_intervals(self.window, out))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        Ok(Self::from_intervals(
            self.window,
            self.intervals.iter().chain(&other.intervals).copied(),
        ))
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.intersection(&other.complement())
    }

    /// `self ⊆ other`, allowing endpoints to disagree by the window slack.
    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        self.check_window(other)?;
        let eps = self.window.slack();
        let b = &other.intervals;
        for iv in &self.intervals {
            let k = b.partition_point(|c| c.hi < iv.lo - eps);
            let Some(c) = b.get(k) else { return Ok(false) };
            let lo_ok = c.lo < iv.lo - eps
                || ((c.lo - iv.lo).abs() <= eps && (c.lo_closed || !iv.lo_closed));
            let hi_ok = c.hi > iv.hi + eps
                || ((c.hi - iv.hi).abs() <= eps && (c.hi_closed || !iv.hi_closed));
            if !(lo_ok && hi_ok) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Points `p` of the set such that `(p, p + ε)` misses the set for some
    /// `ε > 0`; the right window edge is excluded.
    pub fn isolated_right_points(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .filter(|iv| iv.hi_closed && iv.hi < self.window.hi)
            .map(|iv| iv.hi)
            .collect()
    }

    /// `sup (set ∩ (-∞, t))`, or `None` when that part is empty.
    pub fn last_point_before(&self, t: f64) -> Option<f64> {
        let k = self.intervals.partition_point(|iv| iv.lo < t);
        let iv = self.intervals[..k].last()?;
        Some(iv.hi.min(t))
    }

    /// `inf (set ∩ (t, ∞))`, or `None` when that part is empty.
    pub fn next_point_after(&self, t: f64) -> Option<f64> {
        let k = self.intervals.partition_point(|iv| iv.hi <= t);
        let iv = self.intervals.get(k)?;
        Some(iv.lo.max(t))
    }

    /// Image under `t ↦ -t`.
    pub fn mirrored(&self) -> Self {
        let w = Window { lo: -self.window.hi, hi: -self.window.lo };
        Self::from_intervals(
            w,
            self.intervals.iter().rev().map(|iv| Interval {
                lo: -iv.hi,
                hi: -iv.lo,
                lo_closed: iv.hi_closed,
                hi_closed: iv.lo_closed,
            }),
        )
    }

    /// Restriction to a sub-window.
    pub fn restricted(&self, window: Window) -> Self {
        Self::from_intervals(window, self.intervals.iter().copied())
    }

    fn check_window(&self, other: &Self) -> Result<()> {
        let eps = self.window.slack();
        if (self.window.lo - other.window.lo).abs() > eps
            || (self.window.hi - other.window.hi).abs() > eps
        {
            Err(Error::WindowMismatch)
        } else {
            Ok(())
        }
    }
}

fn clip(iv: Interval, w: &Window) -> Option<Interval> {
    let mut out = iv;
    if out.lo < w.lo {
        out.lo = w.lo;
        out.lo_closed = true;
    }
    if out.hi > w.hi {
        out.hi = w.hi;
        out.hi_closed = true;
    }
    (!out.is_empty()).then_some(out)
}

/// Compare two sets on the same window.
pub fn set_ops(a: &ClosedSet, b: &ClosedSet) -> Result<SetComparison> {
    Ok(SetComparison {
        subset: a.is_subset_of(b)?,
        closure: a.closure(),
        isolated_right_points: a.isolated_right_points(),
        difference: a.difference(b)?,
    })
}
