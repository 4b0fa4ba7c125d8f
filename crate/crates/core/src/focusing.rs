//! Unitary focusing of every subcarrier onto the reference frequency.
//!
//! For each subcarrier and sweep beam, a unitary `T` maps the array manifold
//! sampled on an elevation grid inside the beam's sweep interval onto the
//! same manifold at the reference subcarrier (orthogonal Procrustes).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::array::{sweep_factor, vertical_steering, SystemConfig, UcyaGeometry};
use crate::beamspace::BeamformerSet;
use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, rank_of, svd, CMat, CVec, C64};
use crate::tensor::ComplexTensor;
use crate::SPEED_OF_LIGHT;
#[allow(unused_imports)]
use num_traits::Float;

/// Focusing grid and which stages are focused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FocusingOptions {
    /// Elevation grid points per sweep interval `N_b`.
    pub n_b: usize,
    /// Also focus the horizontal phase-mode stage.
    ///
    /// A unitary acting on phase modes mixes the azimuth phases `e^{jpφ}`, so
    /// this is off by default and the horizontal matrices are identities.
    pub horizontal: bool,
}

impl Default for FocusingOptions {
    fn default() -> Self {
        Self { n_b: 16, horizontal: false }
    }
}

/// `θ_{m_b,j} = π m_b / M_b + π j / (M_b N_b)`, `j = 0..N_b`, zero-based `m_b`.
pub fn elevation_grid(m_b: usize, n_b: usize, m_b_count: usize) -> Vec<f64> {
    let width = PI / m_b_count as f64;
    (0..n_b).map(|j| width * m_b as f64 + width * j as f64 / n_b as f64).collect()
}

/// `(2P+1) × N_b` matrix of `J_p(γ_{m_f}(θ_j))`, rows `p = −P..P`.
pub fn build_g_h(m_f: usize, m_b: usize, n_b: usize, geo: &UcyaGeometry, cfg: &SystemConfig, p_max: usize) -> DMatrix<f64> {
    let f = cfg.frequency(m_f);
    let grid = elevation_grid(m_b, n_b, cfg.m_b);
    let p0 = p_max as i32;
    DMatrix::from_fn(2 * p_max + 1, n_b, |r, c| {
        let gamma = 2.0 * PI * f * geo.radius_m * grid[c].sin() / SPEED_OF_LIGHT;
        bessel_j(r as i32 - p0, gamma)
    })
}

/// `M_v × N_b` matrix whose columns are `conj(w) ⊙ a_v(θ_j, f_{m_f})`.
pub fn build_g_v(m_f: usize, m_b: usize, n_b: usize, geo: &UcyaGeometry, cfg: &SystemConfig, weights: &CVec) -> CMat {
    let f = cfg.frequency(m_f);
    let cols: Vec<CVec> = elevation_grid(m_b, n_b, cfg.m_b)
        .into_iter()
        .map(|th| weights.conjugate().component_mul(&vertical_steering(th, f, geo)))
        .collect();
    CMat::from_columns(&cols)
}

/// Unitary `T` minimizing `‖T g − g0‖_F`: `T = V Uᴴ` with `g g0ᴴ = U Σ Vᴴ`.
///
/// Identical inputs return the identity exactly. Singular directions below
/// the rank tolerance are discarded from both factors and re-completed with
/// [`complete_basis`].
pub fn solve_focusing(g: &CMat, g0: &CMat) -> Result<CMat> {
    if g.shape() != g0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "focusing targets {:?} and {:?}",
            g.shape(),
            g0.shape()
        )));
    }
    if g == g0 {
        return Ok(CMat::identity(g.nrows(), g.nrows()));
    }
    let m = g * g0.adjoint();
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::Degenerate("manifold cross product vanishes".into()));
    }
    let (u, s, v) = svd(&m)?;
    let r = rank_of(&s);
    let u = complete_basis(&u.columns(0, r).into_owned());
    let v = complete_basis(&v.columns(0, r).into_owned());
    Ok(v * u.adjoint())
}

/// Focusing matrices for every subcarrier and sweep beam.
#[derive(Debug, Clone)]
pub struct FocusingSet {
    pub n_b: usize,
    /// Reference subcarrier `m_f0`.
    pub f0_index: usize,
    m_f: usize,
    m_b: usize,
    t_v: Vec<CMat>,
    t_h: Vec<CMat>,
}

impl FocusingSet {
    /// Solves all alignment problems.
    ///
    /// The vertical targets are built on the de-weighted manifold because
    /// [`FocusingSet::apply`] removes the digital weights before focusing.
    pub fn build(cfg: &SystemConfig, geo: &UcyaGeometry, bf: &BeamformerSet, opts: FocusingOptions) -> Result<Self> {
        if opts.n_b < 1 {
            return Err(Error::InvalidParameter("focusing grid needs at least one point".into()));
        }
        let f0_index = cfg.reference_index();
        let ones = CVec::from_element(geo.m_v, C64::new(1.0, 0.0));
        let n_h = 2 * bf.p_max + 1;
        let mut t_v = Vec::with_capacity(cfg.m_f * cfg.m_b);
        let mut t_h = Vec::with_capacity(cfg.m_f * cfg.m_b);
        for m_f in 0..cfg.m_f {
            for m_b in 0..cfg.m_b {
                let g0 = build_g_v(f0_index, m_b, opts.n_b, geo, cfg, &ones);
                let g = build_g_v(m_f, m_b, opts.n_b, geo, cfg, &ones);
                t_v.push(solve_focusing(&g, &g0)?);
                if opts.horizontal {
                    let g0 = build_g_h(f0_index, m_b, opts.n_b, geo, cfg, bf.p_max).map(|x| C64::new(x, 0.0));
                    let g = build_g_h(m_f, m_b, opts.n_b, geo, cfg, bf.p_max).map(|x| C64::new(x, 0.0));
                    t_h.push(solve_focusing(&g, &g0)?);
                } else {
                    t_h.push(CMat::identity(n_h, n_h));
                }
            }
        }
        Ok(Self { n_b: opts.n_b, f0_index, m_f: cfg.m_f, m_b: cfg.m_b, t_v, t_h })
    }

    fn slot(&self, m_f: usize, m_b: usize) -> usize {
        assert!(m_f < self.m_f && m_b < self.m_b, "focusing index ({m_f}, {m_b}) out of range");
        m_f * self.m_b + m_b
    }

    pub fn t_v(&self, m_f: usize, m_b: usize) -> &CMat {
        &self.t_v[self.slot(m_f, m_b)]
    }

    pub fn t_h(&self, m_f: usize, m_b: usize) -> &CMat {
        &self.t_h[self.slot(m_f, m_b)]
    }

    /// All stored matrices.
    pub fn matrices(&self) -> impl Iterator<Item = &CMat> {
        self.t_v.iter().chain(self.t_h.iter())
    }

    /// Focuses one beam's `M_v × (2P+1) × M_f × M_t` tensor.
    ///
    /// Each `(m_f, m_t)` slice `S` becomes `b̃ (T_v B̃_v) S (T_h B̃_h)ᵀ`, where
    /// `B̃ = (B_dbᴴ)⁻¹` removes the digital weights and `b̃` removes the sweep
    /// phase.
    pub fn apply(&self, x: &ComplexTensor, m_b: usize, bf: &BeamformerSet, cfg: &SystemConfig) -> Result<ComplexTensor> {
        let s = x.shape();
        if s.len() != 4 || s[0] != bf.m_v || s[1] != bf.horizontal_dim() || s[2] != self.m_f {
            return Err(Error::DimensionMismatch(format!("cannot focus a tensor of shape {:?}", s)));
        }
        let (m_v, m_hd, m_f, m_t) = (s[0], s[1], s[2], s[3]);
        let block = m_v * m_hd;
        let mut out = x.clone();
        for f in 0..m_f {
            let inv = |w: &CVec| -> Result<CVec> {
                if w.iter().any(|z| z.norm() == 0.0) {
                    return Err(Error::SingularWeights { m_f: f, m_b });
                }
                Ok(w.map(|z| C64::new(1.0, 0.0) / z.conj()))
            };
            let a = self.t_v(f, m_b) * CMat::from_diagonal(&inv(bf.vertical_weights(f, m_b))?);
            let b = self.t_h(f, m_b) * CMat::from_diagonal(&inv(bf.horizontal_weights(f, m_b))?);
            let b_t = b.transpose() * sweep_factor(cfg.frequency(f), m_b, cfg.sweep_interval_s).conj();
            for t in 0..m_t {
                let off = (t * m_f + f) * block;
                let slice = CMat::from_column_slice(m_v, m_hd, &x.data()[off..off + block]);
                let focused = &a * slice * &b_t;
                out.data_mut()[off..off + block].copy_from_slice(focused.as_slice());
            }
        }
        Ok(out)
    }
}
