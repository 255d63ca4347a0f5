//! Chordal (spherical) metric on the one-point compactification of R^n.
//!
//! `h(x, y) = |x-y| / (sqrt(1+|x|^2) sqrt(1+|y|^2))` for finite points and
//! `h(x, inf) = 1 / sqrt(1+|x|^2)`; values lie in [0, 1]. This is the chord
//! length between stereographic images on a sphere of diameter 1, hence a
//! genuine metric. Sets enter as finite point samples; diameters and set
//! distances over continua are approximated by the caller's sampling.

use crate::error::{Error, Result};
use crate::geom;

/// A point of the extended space: finite in R^n, or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedPoint {
    Finite(Vec<f64>),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("finite extended point must have finite coordinates"));
        }
        Ok(ExtendedPoint::Finite(coords))
    }
}

/// Nonempty sampled representation of a set in the extended space.
#[derive(Debug, Clone)]
pub struct PointSample {
    points: Vec<ExtendedPoint>,
}

impl PointSample {
    pub fn new(points: Vec<ExtendedPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point sample must be nonempty"));
        }
        Ok(PointSample { points })
    }

    pub fn points(&self) -> &[ExtendedPoint] {
        &self.points
    }
}

/// Chordal distance between two extended points; symmetric, in [0, 1].
pub fn chordal_distance(x: &ExtendedPoint, y: &ExtendedPoint) -> f64 {
    match (x, y) {
        (ExtendedPoint::Infinity, ExtendedPoint::Infinity) => 0.0,
        (ExtendedPoint::Finite(a), ExtendedPoint::Infinity)
        | (ExtendedPoint::Infinity, ExtendedPoint::Finite(a)) => {
            1.0 / (1.0 + sq_norm(a)).sqrt()
        }
        (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => {
            geom::dist(a, b) / ((1.0 + sq_norm(a)).sqrt() * (1.0 + sq_norm(b)).sqrt())
        }
    }
}

/// Chordal diameter of a sample: maximum pairwise distance, 0 for singletons.
pub fn chordal_diameter(sample: &PointSample) -> f64 {
    let pts = sample.points();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.max(chordal_distance(&pts[i], &pts[j]));
        }
    }
    best
}

/// Chordal distance between two samples: minimum over cross pairs.
pub fn chordal_set_distance(a: &PointSample, b: &PointSample) -> f64 {
    let mut best = f64::INFINITY;
    for x in a.points() {
        for y in b.points() {
            best = best.min(chordal_distance(x, y));
        }
    }
    best
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coords: &[f64]) -> ExtendedPoint {
        ExtendedPoint::finite(coords.to_vec()).unwrap()
    }

    #[test]
    fn origin_to_infinity_is_one() {
        assert_eq!(chordal_distance(&p(&[0.0, 0.0]), &ExtendedPoint::Infinity), 1.0);
    }

    #[test]
    fn identical_points_are_at_distance_zero() {
        let x = p(&[1.5, -2.0]);
        assert_eq!(chordal_distance(&x, &x), 0.0);
        assert_eq!(
            chordal_distance(&ExtendedPoint::Infinity, &ExtendedPoint::Infinity),
            0.0
        );
    }

    #[test]
    fn antipodal_unit_vectors_in_plane() {
        // |x - y| = 2, both denominators sqrt(2): distance exactly 1.
        let d = chordal_distance(&p(&[1.0, 0.0]), &p(&[-1.0, 0.0]));
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diameter_cases() {
        let s = PointSample::new(vec![p(&[0.0, 0.0]), ExtendedPoint::Infinity]).unwrap();
        assert_eq!(chordal_diameter(&s), 1.0);

        let single = PointSample::new(vec![p(&[3.0, 4.0])]).unwrap();
        assert_eq!(chordal_diameter(&single), 0.0);

        // {0, e1, -e1}: the antipodal pair dominates with distance 1.
        let tri = PointSample::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[-1.0, 0.0])]).unwrap();
        let d01 = chordal_distance(&p(&[0.0, 0.0]), &p(&[1.0, 0.0]));
        let expected = d01.max(1.0);
        assert!((chordal_diameter(&tri) - expected).abs() < 1e-15);
    }

    #[test]
    fn set_distance_cases() {
        let a = PointSample::new(vec![p(&[0.0, 0.0])]).unwrap();
        let same = PointSample::new(vec![p(&[0.0, 0.0])]).unwrap();
        assert_eq!(chordal_set_distance(&a, &same), 0.0);

        let inf = PointSample::new(vec![ExtendedPoint::Infinity]).unwrap();
        assert_eq!(chordal_set_distance(&a, &inf), 1.0);

        let ab = PointSample::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        let c = PointSample::new(vec![p(&[2.0, 0.0])]).unwrap();
        let expected = chordal_distance(&p(&[1.0, 0.0]), &p(&[2.0, 0.0]));
        assert!((chordal_set_distance(&ab, &c) - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(PointSample::new(vec![]).is_err());
    }

    #[test]
    fn diameter_monotone_under_inclusion() {
        let small = PointSample::new(vec![p(&[0.0, 0.0]), p(&[1.0, 1.0])]).unwrap();
        let big = PointSample::new(vec![
            p(&[0.0, 0.0]),
            p(&[1.0, 1.0]),
            p(&[-5.0, 2.0]),
            ExtendedPoint::Infinity,
        ])
        .unwrap();
        assert!(chordal_diameter(&big) >= chordal_diameter(&small));
    }
}
