//! Points of real projective space, the chord metric, and the charts between
//! `R^d`, the equator and the projective Poincaré sphere.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::Real;

/// A line through the origin, stored as the unit representative whose last
/// nonzero coordinate is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint<S> {
    rep: Vector<S>,
}

/// Flips `v` in place so that its last nonzero coordinate is positive.
pub fn canonicalize_in_place<S: Real>(v: &mut [S]) {
    if let Some(&last) = v.iter().rev().find(|x| !x.is_zero()) {
        if last < S::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl<S: Real> ProjectivePoint<S> {
    pub fn from_vector(v: &Vector<S>) -> Result<Self> {
        let (mut rep, _) = v.normalized()?;
        canonicalize_in_place(rep.as_mut_slice());
        Ok(Self { rep })
    }

    pub fn from_slice(v: &[S]) -> Result<Self> {
        Self::from_vector(&Vector::from_slice(v)?)
    }

    pub fn rep(&self) -> &Vector<S> {
        &self.rep
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep.len()
    }

    /// Last coordinate of the canonical representative, never negative.
    pub fn height(&self) -> S {
        self.rep[self.rep.len() - 1]
    }
}

/// `min(|p - q|, |p + q|)` on unit representatives.
pub fn proj_metric<S: Real>(p: &ProjectivePoint<S>, q: &ProjectivePoint<S>) -> Result<S> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(Error::Dimension(format!(
            "projective points in R^{} and R^{}",
            p.ambient_dim(),
            q.ambient_dim()
        )));
    }
    Ok(chord_distance(p.rep.as_slice(), q.rep.as_slice()))
}

pub(crate) fn chord_distance<S: Real>(p: &[S], q: &[S]) -> S {
    let mut minus = S::zero();
    let mut plus = S::zero();
    for (&a, &b) in p.iter().zip(q) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    minus.min(plus).sqrt()
}

/// Chart `x -> P(x, 1)` onto the open northern hemisphere.
pub fn h1<S: Real>(x: &Vector<S>) -> ProjectivePoint<S> {
    ProjectivePoint::from_vector(&x.extended(S::one())).expect("(x, 1) is never zero")
}

/// Inverse chart; fails for points whose height is at most `delta`.
pub fn h1_inverse<S: Real>(p: &ProjectivePoint<S>, delta: S) -> Result<Vector<S>> {
    let last = p.height();
    if !(last > delta) {
        return Err(Error::AtInfinity {
            last: last.as_f64(),
            delta: delta.as_f64(),
        });
    }
    Ok(p.rep.truncated().scale(S::one() / last))
}

/// `P x -> P(x, 0)`: directions of `R^d` as points on the equator.
pub fn equator_embed<S: Real>(p: &ProjectivePoint<S>) -> ProjectivePoint<S> {
    ProjectivePoint::from_vector(&p.rep.extended(S::zero())).expect("unit vector")
}

/// Drops the last coordinate of an equator point.
pub fn equator_restrict<S: Real>(p: &ProjectivePoint<S>) -> Result<ProjectivePoint<S>> {
    ProjectivePoint::from_vector(&p.rep.truncated())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> ProjectivePoint<f64> {
        ProjectivePoint::from_slice(v).unwrap()
    }

    #[test]
    fn antipodes_coincide() {
        assert_eq!(
            proj_metric(&pt(&[1.0, 0.0]), &pt(&[-1.0, 0.0])).unwrap(),
            0.0
        );
        assert_eq!(pt(&[0.3, -2.0]), pt(&[-0.3, 2.0]));
    }

    #[test]
    fn orthogonal_directions() {
        let d = proj_metric(&pt(&[1.0, 0.0]), &pt(&[0.0, 1.0])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_direction() {
        let d = proj_metric(&pt(&[1.0, 0.0]), &pt(&[1.0, 1.0])).unwrap();
        // |(1,0) - (1,1)/sqrt2|^2 = 2 - sqrt2
        assert!((d - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((d - 0.76537).abs() < 1e-5);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(proj_metric(&pt(&[1.0, 0.0]), &pt(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn canonical_sign_rule() {
        assert_eq!(pt(&[1.0, -1.0, 0.0]).rep().as_slice()[1] > 0.0, true);
        assert!(pt(&[0.0, 0.0, -3.0]).height() > 0.0);
    }

    #[test]
    fn chart_at_origin_is_pole() {
        let p = h1(&Vector::from_slice(&[0.0, 0.0]).unwrap());
        assert_eq!(p.rep().as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn chart_of_unit_axis() {
        let p = h1(&Vector::from_slice(&[1.0, 0.0]).unwrap());
        let s = 1.0 / 2f64.sqrt();
        assert!(
            (p.rep()[0] - s).abs() < 1e-15 && p.rep()[1] == 0.0 && (p.rep()[2] - s).abs() < 1e-15
        );
        let x = h1_inverse(&p, 1e-6).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1] == 0.0);
    }

    #[test]
    fn far_points_approach_equator() {
        let target = equator_embed(&pt(&[3.0, 4.0]));
        let mut last = f64::INFINITY;
        for k in 1..8 {
            let r = 10f64.powi(k);
            let d = proj_metric(
                &h1(&Vector::from_slice(&[3.0 * r, 4.0 * r]).unwrap()),
                &target,
            )
            .unwrap();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn inverse_chart_rejects_equator() {
        let err = h1_inverse(&pt(&[1.0, 0.0, 0.0]), 1e-3).unwrap_err();
        assert!(matches!(err, Error::AtInfinity { .. }));
        assert_eq!(
            h1_inverse(&pt(&[0.0, 0.0, 1.0]), 1e-3).unwrap().as_slice(),
            &[0.0, 0.0]
        );
    }

    #[test]
    fn equator_embedding() {
        assert_eq!(
            equator_embed(&pt(&[1.0, 0.0])).rep().as_slice(),
            &[1.0, 0.0, 0.0]
        );
        assert_eq!(
            equator_embed(&pt(&[0.0, 1.0])).rep().as_slice(),
            &[0.0, 1.0, 0.0]
        );
        let (p, q) = (pt(&[0.2, -0.7]), pt(&[1.0, 0.4]));
        let before = proj_metric(&p, &q).unwrap();
        let after = proj_metric(&equator_embed(&p), &equator_embed(&q)).unwrap();
        assert!((before - after).abs() < 1e-15);
        assert_eq!(equator_restrict(&equator_embed(&p)).unwrap(), p);
    }
}
