//! Planar polygon geometry for areal units: area, containment, centroids and
//! uniform point sampling.

use rand::Rng;


use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point<T> = [T; 2];

/// Attempts allowed for bounding-box rejection sampling before giving up.
pub const MAX_REJECTION_ATTEMPTS: u64 = 10_000_000;

/// One polygon: an exterior ring plus optional holes. Rings are closed
/// (first vertex repeated at the end); self-intersection is not checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    pub exterior: Vec<Point<T>>,
    pub holes: Vec<Vec<Point<T>>>,
}

/// An areal unit (county, cell, ...) made of one or more polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaUnit<T> {
    pub id: String,
    pub polygons: Vec<Polygon<T>>,
}

fn check_ring<T: Real>(id: &str, ring: &[Point<T>]) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::Geometry(format!(
            "{id}: ring needs at least 4 vertices (closed triangle), got {}",
            ring.len()
        )));
    }
    if ring.first() != ring.last() {
        return Err(Error::Geometry(format!("{id}: ring is not closed")));
    }
    Ok(())
}

/// Shoelace area, positive for counter-clockwise rings.
pub fn signed_ring_area<T: Real>(ring: &[Point<T>]) -> T {
    let mut acc = T::zero();
    for w in ring.windows(2) {
        acc += w[0][0] * w[1][1] - w[1][0] * w[0][1];
    }
    acc * T::of(0.5)
}

fn ring_centroid_moment<T: Real>(ring: &[Point<T>]) -> (T, T) {
    let (mut cx, mut cy) = (T::zero(), T::zero());
    for w in ring.windows(2) {
        let cross = w[0][0] * w[1][1] - w[1][0] * w[0][1];
        cx += (w[0][0] + w[1][0]) * cross;
        cy += (w[0][1] + w[1][1]) * cross;
    }
    let sixth = T::of(1.0 / 6.0);
    (cx * sixth, cy * sixth)
}

/// Even-odd crossing test against a single ring.
fn ring_crossings<T: Real>(ring: &[Point<T>], p: Point<T>) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl<T: Real> Polygon<T> {
    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point<T>>> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }

    /// Exterior area minus hole areas, independent of ring orientation.
    pub fn area(&self) -> T {
        let holes = self.holes.iter().fold(T::zero(), |a, h| a + signed_ring_area(h).abs());
        signed_ring_area(&self.exterior).abs() - holes
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        self.rings().fold(false, |acc, r| acc ^ ring_crossings(r, p))
    }

    pub fn reversed(&self) -> Self {
        let rev = |r: &Vec<Point<T>>| r.iter().rev().copied().collect::<Vec<_>>();
        Polygon {
            exterior: rev(&self.exterior),
            holes: self.holes.iter().map(rev).collect(),
        }
    }
}

impl<T: Real> AreaUnit<T> {
    pub fn new(id: impl Into<String>, polygons: Vec<Polygon<T>>) -> Result<Self> {
        let id = id.into();
        if polygons.is_empty() {
            return Err(Error::Geometry(format!("{id}: no polygons")));
        }
        for poly in &polygons {
            for ring in poly.rings() {
                check_ring(&id, ring)?;
            }
        }
        Ok(AreaUnit { id, polygons })
    }

    /// Single square of side `side` centred on `center`.
    pub fn square(id: impl Into<String>, center: Point<T>, side: T) -> Self {
        let h = side * T::of(0.5);
        let [cx, cy] = center;
        let ring = vec![
            [cx - h, cy - h],
            [cx + h, cy - h],
            [cx + h, cy + h],
            [cx - h, cy + h],
            [cx - h, cy - h],
        ];
        AreaUnit {
            id: id.into(),
            polygons: vec![Polygon { exterior: ring, holes: vec![] }],
        }
    }

    pub fn area(&self) -> T {
        self.polygons.iter().fold(T::zero(), |a, p| a + p.area())
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bbox(&self) -> (Point<T>, Point<T>) {
        let mut lo = [T::max_value().unwrap(); 2];
        let mut hi = [T::min_value().unwrap(); 2];
        for poly in &self.polygons {
            for v in &poly.exterior {
                for d in 0..2 {
                    lo[d] = lo[d].min(v[d]);
                    hi[d] = hi[d].max(v[d]);
                }
            }
        }
        (lo, hi)
    }

    /// Area-weighted centroid; holes subtract their moment.
    pub fn centroid(&self) -> Point<T> {
        let (mut mx, mut my, mut total) = (T::zero(), T::zero(), T::zero());
        for poly in &self.polygons {
            for (k, ring) in poly.rings().enumerate() {
                let a = signed_ring_area(ring);
                if a == T::zero() {
                    continue;
                }
                let (cx, cy) = ring_centroid_moment(ring);
                // Normalise orientation: exterior counts positive, holes negative.
                let sign = if (k == 0) == (a > T::zero()) { T::one() } else { -T::one() };
                mx += sign * cx;
                my += sign * cy;
                total += sign * a;
            }
        }
        if total == T::zero() {
            let (lo, hi) = self.bbox();
            return [(lo[0] + hi[0]) * T::of(0.5), (lo[1] + hi[1]) * T::of(0.5)];
        }
        [mx / total, my / total]
    }

    pub fn reversed(&self) -> Self {
        AreaUnit {
            id: self.id.clone(),
            polygons: self.polygons.iter().map(Polygon::reversed).collect(),
        }
    }

    /// Errors unless the unit has area well above rounding noise.
    pub fn ensure_non_degenerate(&self) -> Result<()> {
        let (lo, hi) = self.bbox();
        let diag2 = (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2);
        let area = self.area();
        if !(diag2 > T::zero()) || area <= T::of(1e-12) * diag2 {
            return Err(Error::DegeneratePolygon {
                id: self.id.clone(),
                area: area.as_f64(),
            });
        }
        Ok(())
    }

    /// `n` points uniform in the unit by bounding-box rejection.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Point<T>>> {
        self.ensure_non_degenerate()?;
        let (lo, hi) = self.bbox();
        let (lo, hi) = ([lo[0].as_f64(), lo[1].as_f64()], [hi[0].as_f64(), hi[1].as_f64()]);
        let mut out = Vec::with_capacity(n);
        let mut attempts: u64 = 0;
        while out.len() < n {
            if attempts >= MAX_REJECTION_ATTEMPTS {
                return Err(Error::Geometry(format!(
                    "{}: rejection sampling exceeded {MAX_REJECTION_ATTEMPTS} attempts",
                    self.id
                )));
            }
            attempts += 1;
            let x = lo[0] + (hi[0] - lo[0]) * rng.random::<f64>();
            let y = lo[1] + (hi[1] - lo[1]) * rng.random::<f64>();
            let p = [T::of(x), T::of(y)];
            if self.contains(p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn l_shape() -> AreaUnit<f64> {
        let ring = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0], [0.0, 0.0]];
        AreaUnit::new("L", vec![Polygon { exterior: ring, holes: vec![] }]).unwrap()
    }

    #[test]
    fn area_centroid_and_containment() {
        let l = l_shape();
        assert!((l.area() - 3.0).abs() < 1e-12);
        assert!((l.reversed().area() - 3.0).abs() < 1e-12);
        let c = l.centroid();
        assert!((c[0] - 5.0 / 6.0).abs() < 1e-12 && (c[1] - 5.0 / 6.0).abs() < 1e-12);
        assert!(l.contains([0.5, 1.5]));
        assert!(!l.contains([1.5, 1.5]));
    }

    #[test]
    fn holes_are_excluded() {
        let outer = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [0.0, 0.0]];
        let hole = vec![[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0], [1.0, 1.0]];
        let u: AreaUnit<f64> = AreaUnit::new("donut", vec![Polygon { exterior: outer, holes: vec![hole] }]).unwrap();
        assert!((u.area() - 12.0).abs() < 1e-12);
        assert!(!u.contains([2.0, 2.0]));
        assert!(u.contains([0.5, 2.0]));
        let c = u.centroid();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn open_ring_rejected() {
        let ring = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(AreaUnit::new("x", vec![Polygon { exterior: ring, holes: vec![] }]).is_err());
    }

    #[test]
    fn degenerate_polygon_rejected_by_sampler() {
        let ring = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 0.0]];
        let u = AreaUnit::new("flat", vec![Polygon { exterior: ring, holes: vec![] }]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(u.sample_uniform(10, &mut rng), Err(Error::DegeneratePolygon { .. })));
    }

    #[test]
    fn samples_fall_inside() {
        let l = l_shape();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let pts = l.sample_uniform(500, &mut rng).unwrap();
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|&p| l.contains(p)));
    }
}
