//! Proper rigid alignment of point sets in R⁴ (orthogonal Procrustes with
//! `det R = +1`).

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::surface::Vec4;

/// Motion `p ↦ R p + t` with `candidate ≈ R · reference + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment {
    pub rotation: Matrix4<f64>,
    pub translation: Vec4,
    /// Root mean square of `candidate - (R reference + t)`.
    pub rms: f64,
}

impl Alignment {
    pub fn apply(&self, p: &Vec4) -> Vec4 {
        self.rotation * p + self.translation
    }

    /// Map a candidate point back onto the reference frame.
    pub fn apply_inverse(&self, p: &Vec4) -> Vec4 {
        self.rotation.transpose() * (p - self.translation)
    }
}

fn centroid(points: &[Vec4]) -> Vec4 {
    points.iter().sum::<Vec4>() / points.len() as f64
}

/// Best proper motion carrying `reference` onto `candidate`.
pub fn rigid_align(candidate: &[Vec4], reference: &[Vec4]) -> Result<Alignment> {
    if candidate.len() != reference.len() {
        return Err(Error::InvalidArgument(format!(
            "point sets differ in size: {} vs {}",
            candidate.len(),
            reference.len()
        )));
    }
    if candidate.len() < 4 {
        return Err(Error::DegeneratePoints(format!(
            "need at least 4 points, got {}",
            candidate.len()
        )));
    }
    let (cc, cr) = (centroid(candidate), centroid(reference));
    let mut h = Matrix4::zeros();
    let mut spread = Matrix4::zeros();
    for (c, r) in candidate.iter().zip(reference) {
        let (dc, dr) = (c - cc, r - cr);
        h += dc * dr.transpose();
        spread += dr * dr.transpose();
    }
    let eig = spread.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[2] > 1e-12 * ev[0].max(f64::MIN_POSITIVE)) {
        return Err(Error::DegeneratePoints(format!(
            "centered reference spans fewer than 3 dimensions (eigenvalues {ev:?})"
        )));
    }
    let svd = h.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::DegeneratePoints("SVD did not converge".into())),
    };
    let mut d = Matrix4::identity();
    if (u * vt).determinant() < 0.0 {
        // singular values come sorted, so flip the weakest axis
        d[(3, 3)] = -1.0;
    }
    let rotation = u * d * vt;
    let translation = cc - rotation * cr;
    let sq: f64 = candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| (c - (rotation * r + translation)).norm_squared())
        .sum();
    Ok(Alignment {
        rotation,
        translation,
        rms: (sq / candidate.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> Vec<Vec4> {
        (0..30)
            .map(|k| {
                let t = k as f64 * 0.37;
                Vec4::new(t.cos(), (1.3 * t).sin(), 0.5 * t, (0.7 * t).cos() * t)
            })
            .collect()
    }

    #[test]
    fn identity_alignment() {
        let pts = cloud();
        let a = rigid_align(&pts, &pts).unwrap();
        assert!((a.rotation - Matrix4::identity()).amax() < 1e-12);
        assert!(a.translation.norm() < 1e-12 && a.rms < 1e-12);
    }

    #[test]
    fn recovers_known_motion() {
        // exponential of a skew matrix: a proper rotation
        #[rustfmt::skip]
        let q = Matrix4::new(
            0.0, 0.3, -0.2, 0.1,
            -0.3, 0.0, 0.5, 0.2,
            0.2, -0.5, 0.0, -0.4,
            -0.1, -0.2, 0.4, 0.0,
        )
        .exp();
        let t = Vec4::new(1.0, -2.0, 0.5, 3.0);
        let reference = cloud();
        let candidate: Vec<Vec4> = reference.iter().map(|p| q * p + t).collect();
        let a = rigid_align(&candidate, &reference).unwrap();
        assert!((a.rotation - q).amax() < 1e-10);
        assert!((a.translation - t).amax() < 1e-10);
        assert!(a.rms < 1e-10);
        assert!((a.apply_inverse(&candidate[3]) - reference[3]).norm() < 1e-10);
    }

    #[test]
    fn planar_sets_are_degenerate() {
        let pts: Vec<Vec4> = (0..10).map(|k| Vec4::new(k as f64, (k * k) as f64, 0.0, 0.0)).collect();
        assert!(matches!(rigid_align(&pts, &pts), Err(Error::DegeneratePoints(_))));
    }
}
