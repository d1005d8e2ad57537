use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

/// Bandwidth as a multiple of the larger knot spacing when none is given.
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 1.5;

/// Evenly spaced space-time knots with a shared bisquare bandwidth.
///
/// When `standardize` is set, knots and bandwidth live in coordinates where
/// each spatial axis and the time axis are rescaled to `[0, 1]` over
/// `space_bounds` / `time_bounds`; [`KnotGrid::to_unit`] maps raw inputs there.
/// Otherwise everything is in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotGrid<T> {
    pub spatial: Vec<Point<T>>,
    pub temporal: Vec<T>,
    pub bandwidth: T,
    pub standardize: bool,
    pub space_bounds: (Point<T>, Point<T>),
    pub time_bounds: (T, T),
}

fn layout(r_s: usize) -> (usize, usize) {
    let cols = (r_s as f64).sqrt().ceil() as usize;
    (cols, r_s.div_ceil(cols))
}

fn even<T: Real>(k: usize, count: usize, lo: T, hi: T) -> T {
    if count == 1 {
        (lo + hi) * T::of(0.5)
    } else {
        lo + (hi - lo) * T::of(k as f64 / (count - 1) as f64)
    }
}

impl<T: Real> KnotGrid<T> {
    /// `r_s` spatial knots on a near-square grid (`ceil(sqrt(r_s))` columns,
    /// rows filled in order, last row possibly partial) crossed with `r_t`
    /// evenly spaced temporal knots.
    pub fn regular(
        r_s: usize,
        r_t: usize,
        space_bounds: (Point<T>, Point<T>),
        time_bounds: (T, T),
        bandwidth: Option<T>,
        standardize: bool,
    ) -> Result<Self> {
        if r_s == 0 || r_t == 0 {
            return Err(Error::InvalidParameter("knot counts r_s and r_t must be >= 1".into()));
        }
        let (lo, hi) = space_bounds;
        if hi[0] < lo[0] || hi[1] < lo[1] || time_bounds.1 < time_bounds.0 {
            return Err(Error::InvalidParameter("knot bounds must satisfy min <= max".into()));
        }
        let (cols, rows) = layout(r_s);
        let (klo, khi, tlo, thi) = if standardize {
            ([T::zero(); 2], [T::one(); 2], T::zero(), T::one())
        } else {
            (lo, hi, time_bounds.0, time_bounds.1)
        };
        let spatial: Vec<Point<T>> = (0..r_s)
            .map(|k| [even(k % cols, cols, klo[0], khi[0]), even(k / cols, rows, klo[1], khi[1])])
            .collect();
        let temporal: Vec<T> = (0..r_t).map(|k| even(k, r_t, tlo, thi)).collect();

        let step = |count: usize, lo: T, hi: T| if count > 1 { (hi - lo) / T::of((count - 1) as f64) } else { T::zero() };
        let mut spacing = step(cols, klo[0], khi[0]).max(step(rows, klo[1], khi[1])).max(step(r_t, tlo, thi));
        // A single knot on every axis has no spacing; fall back to the widest extent.
        if spacing == T::zero() {
            spacing = (khi[0] - klo[0]).max(khi[1] - klo[1]).max(thi - tlo);
        }
        if spacing == T::zero() {
            spacing = T::one();
        }
        let bandwidth = match bandwidth {
            Some(b) => b,
            None => T::of(DEFAULT_BANDWIDTH_FACTOR) * spacing,
        };
        if !(bandwidth > T::zero()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        Ok(KnotGrid { spatial, temporal, bandwidth, standardize, space_bounds, time_bounds })
    }

    pub fn r_s(&self) -> usize {
        self.spatial.len()
    }

    pub fn r_t(&self) -> usize {
        self.temporal.len()
    }

    pub fn r(&self) -> usize {
        self.r_s() * self.r_t()
    }

    /// Column of the (spatial `js`, temporal `jt`) knot pair.
    #[inline]
    pub fn column(&self, js: usize, jt: usize) -> usize {
        js * self.r_t() + jt
    }

    /// Maps a raw location and time into knot coordinates.
    pub fn to_unit(&self, s: Point<T>, t: T) -> (Point<T>, T) {
        if !self.standardize {
            return (s, t);
        }
        let scale = |x: T, lo: T, hi: T| if hi > lo { (x - lo) / (hi - lo) } else { T::of(0.5) };
        let (lo, hi) = self.space_bounds;
        (
            [scale(s[0], lo[0], hi[0]), scale(s[1], lo[1], hi[1])],
            scale(t, self.time_bounds.0, self.time_bounds.1),
        )
    }

    pub fn covers_time(&self, t: T) -> bool {
        t >= self.time_bounds.0 && t <= self.time_bounds.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_default_bandwidth() {
        let g = KnotGrid::<f64>::regular(97, 4, ([0.0, 0.0], [9.0, 9.0]), (1.0, 4.0), None, true).unwrap();
        assert_eq!(g.r(), 388);
        assert_eq!(g.spatial[96], [0.6666666666666666, 1.0]);
        assert!((g.bandwidth - 1.5 / 3.0).abs() < 1e-15);
        assert_eq!(g.column(2, 3), 11);
    }

    #[test]
    fn raw_units_when_not_standardized() {
        let g = KnotGrid::<f64>::regular(4, 1, ([0.0, 0.0], [2.0, 4.0]), (0.0, 0.0), Some(3.0), false).unwrap();
        assert_eq!(g.spatial, vec![[0.0, 0.0], [2.0, 0.0], [0.0, 4.0], [2.0, 4.0]]);
        assert_eq!(g.temporal, vec![0.0]);
        assert_eq!(g.to_unit([1.0, 1.0], 5.0), ([1.0, 1.0], 5.0));
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(KnotGrid::<f64>::regular(0, 1, ([0.0; 2], [1.0; 2]), (0.0, 1.0), None, true).is_err());
    }

    #[test]
    fn single_knot_uses_extent() {
        let g = KnotGrid::<f64>::regular(1, 1, ([0.0; 2], [1.0; 2]), (0.0, 1.0), None, true).unwrap();
        assert_eq!(g.bandwidth, 1.5);
        let g = KnotGrid::<f64>::regular(1, 1, ([2.0; 2], [2.0; 2]), (3.0, 3.0), None, false).unwrap();
        assert_eq!(g.bandwidth, 1.5);
    }
}
