//! Azimuth search against the joint layer/phase-mode signal subspace.
//!
//! The phase-mode response depends on elevation only through `sin θ`, so
//! paths at `θ` and `π − θ` share it. The search therefore tests the joint
//! column `a_v(θ̂) ⊗ b(θ̂, φ)`, whose vertical factor tells them apart.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::array::{horizontal_steering, vertical_steering, UcyaGeometry};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Azimuth grid and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MusicGrid {
    /// Number of uniform grid points `D` over `[0, 2π)`.
    pub points: usize,
    /// Refine each peak with a parabola through its neighbours.
    pub refine: bool,
}

impl Default for MusicGrid {
    fn default() -> Self {
        Self { points: 360, refine: false }
    }
}

impl MusicGrid {
    pub fn step(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    pub fn angle(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }
}

/// Outcome of one azimuth search.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthPeak {
    pub azimuth_rad: f64,
    pub grid_index: usize,
    /// Spectrum value at the peak.
    pub value: f64,
    /// Peak over median spectrum value.
    pub prominence: f64,
}

/// Unit-norm phase-mode steering column `B_habᴴ a_h(θ, φ, f)`.
pub fn phase_mode_column(theta: f64, phi: f64, f_hz: f64, geo: &UcyaGeometry, b_hab: &CMat) -> CVec {
    let col = b_hab.adjoint() * horizontal_steering(theta, phi, f_hz, geo);
    let n = col.norm();
    if n > 0.0 {
        col / C64::new(n, 0.0)
    } else {
        col
    }
}

/// Unit-norm joint column with the layer index fastest, first `m_v` layers.
pub fn joint_column(theta: f64, phi: f64, f_hz: f64, m_v: usize, geo: &UcyaGeometry, b_hab: &CMat) -> CVec {
    let v = vertical_steering(theta, f_hz, geo).rows(0, m_v).normalize();
    let b = phase_mode_column(theta, phi, f_hz, geo, b_hab);
    CVec::from_fn(m_v * b.len(), |i, _| v[i % m_v] * b[i / m_v])
}

/// `SP(φ) = 1 / ‖(I − E Eᴴ) x(θ, φ)‖²` on the grid, with `E` an orthonormal
/// signal basis over (layer, phase mode).
pub fn music_spectrum(signal: &CMat, theta: f64, f_hz: f64, geo: &UcyaGeometry, b_hab: &CMat, grid: &MusicGrid) -> Vec<f64> {
    let m_v = signal.nrows() / b_hab.ncols();
    let e_h = signal.adjoint();
    (0..grid.points)
        .map(|i| {
            let x = joint_column(theta, grid.angle(i), f_hz, m_v, geo, b_hab);
            let d = 1.0 - (&e_h * x).norm_squared();
            1.0 / d.max(f64::EPSILON * f64::EPSILON)
        })
        .collect()
}

/// Largest spectrum value for elevation `theta`.
pub fn music_azimuth(
    signal: &CMat,
    theta: f64,
    f_hz: f64,
    geo: &UcyaGeometry,
    b_hab: &CMat,
    grid: &MusicGrid,
) -> Result<AzimuthPeak> {
    if grid.points < 64 {
        return Err(Error::InvalidParameter(format!("azimuth grid needs at least 64 points, got {}", grid.points)));
    }
    let n_h = b_hab.ncols();
    if !signal.nrows().is_multiple_of(n_h) || signal.nrows() / n_h > geo.m_v || signal.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "signal basis {}x{} for {} phase modes",
            signal.nrows(),
            signal.ncols(),
            n_h
        )));
    }
    let sp = music_spectrum(signal, theta, f_hz, geo, b_hab, grid);
    let (i, &value) = sp
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    let mut sorted = sp.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let mut azimuth = grid.angle(i);
    if grid.refine {
        let d = grid.points;
        let (l, r) = (sp[(i + d - 1) % d], sp[(i + 1) % d]);
        let denom = l - 2.0 * value + r;
        if denom < 0.0 {
            let offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
            let a = azimuth + offset * grid.step();
            azimuth = a - 2.0 * PI * (a / (2.0 * PI)).floor();
        }
    }
    Ok(AzimuthPeak { azimuth_rad: azimuth, grid_index: i, value, prominence: value / median })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::qdft_matrix;
    use crate::linalg::{svd, CMat};

    const M_V: usize = 6;

    fn setup(thetas: &[f64], phis: &[f64]) -> (UcyaGeometry, CMat, CMat, f64) {
        let f0 = 28e9;
        let geo = UcyaGeometry::desk(f0);
        let b = qdft_matrix(geo.m_h, 12).unwrap();
        let cols: Vec<CVec> =
            thetas.iter().zip(phis).map(|(&t, &p)| joint_column(t, p, f0, M_V, &geo, &b)).collect();
        let (u, _, _) = svd(&CMat::from_columns(&cols)).unwrap();
        (geo, b, u, f0)
    }

    fn wrapped(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }

    #[test]
    fn joint_column_layout() {
        let f0 = 28e9;
        let geo = UcyaGeometry::desk(f0);
        let b = qdft_matrix(geo.m_h, 12).unwrap();
        let x = joint_column(1.1, 0.4, f0, 3, &geo, &b);
        let v = vertical_steering(1.1, f0, &geo).rows(0, 3).normalize();
        let h = phase_mode_column(1.1, 0.4, f0, &geo, &b);
        assert!((x[3 * 5 + 2] - v[2] * h[5]).norm() < 1e-15);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_peak_within_one_step() {
        let grid = MusicGrid::default();
        for phi in [0.0, 0.4, 2.0, 3.3, 5.9, 6.2] {
            let (geo, b, e, f0) = setup(&[1.2], &[phi]);
            let p = music_azimuth(&e, 1.2, f0, &geo, &b, &grid).unwrap();
            assert!(wrapped(p.azimuth_rad, phi) <= grid.step(), "{phi}: {}", p.azimuth_rad);
        }
    }

    #[test]
    fn mirrored_elevations_keep_their_own_azimuths() {
        let grid = MusicGrid::default();
        let (t1, t2) = (1.403, PI - 1.403);
        let (geo, b, e, f0) = setup(&[t1, t2, 2.4], &[0.96, 1.38, 4.46]);
        let p1 = music_azimuth(&e, t1, f0, &geo, &b, &grid).unwrap();
        let p2 = music_azimuth(&e, t2, f0, &geo, &b, &grid).unwrap();
        assert!(wrapped(p1.azimuth_rad, 0.96) <= grid.step());
        assert!(wrapped(p2.azimuth_rad, 1.38) <= grid.step());
    }

    #[test]
    fn spectrum_is_positive() {
        let (geo, b, e, f0) = setup(&[1.0, 2.0], &[0.5, 4.0]);
        let sp = music_spectrum(&e, 1.0, f0, &geo, &b, &MusicGrid::default());
        assert!(sp.iter().all(|&x| x > 0.0 && x.is_finite()));
    }

    #[test]
    fn one_step_shift_moves_the_peak_one_step() {
        let grid = MusicGrid::default();
        let phi = grid.angle(77);
        let (geo, b, e, f0) = setup(&[1.3], &[phi]);
        let i0 = music_azimuth(&e, 1.3, f0, &geo, &b, &grid).unwrap().grid_index;
        let (geo, b, e, f0) = setup(&[1.3], &[phi + grid.step()]);
        let i1 = music_azimuth(&e, 1.3, f0, &geo, &b, &grid).unwrap().grid_index;
        assert_eq!(i0, 77);
        assert_eq!(i1, 78);
    }

    #[test]
    fn refinement_does_not_move_away_from_truth() {
        let grid = MusicGrid { points: 90, refine: true };
        let phi = 1.234;
        let (geo, b, e, f0) = setup(&[1.1, 1.9], &[phi, 4.0]);
        let mut e = e;
        e[(0, 0)] += C64::new(1e-3, 0.0);
        let coarse = MusicGrid { refine: false, ..grid };
        let p = music_azimuth(&e, 1.1, f0, &geo, &b, &grid).unwrap();
        let q = music_azimuth(&e, 1.1, f0, &geo, &b, &coarse).unwrap();
        assert!(wrapped(p.azimuth_rad, phi) <= wrapped(q.azimuth_rad, phi));
    }

    #[test]
    fn rejects_coarse_grids_and_bad_bases() {
        let (geo, b, e, f0) = setup(&[1.0], &[1.0]);
        assert!(music_azimuth(&e, 1.0, f0, &geo, &b, &MusicGrid { points: 32, refine: false }).is_err());
        let odd = CMat::zeros(26, 1);
        assert!(music_azimuth(&odd, 1.0, f0, &geo, &b, &MusicGrid::default()).is_err());
    }
}
