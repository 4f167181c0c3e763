//! Unitary Fourier transform on the periodic full-line grid.
//!
//! Convention: u_hat(rho) = (2 pi)^(-1/2) int e^{-i r rho} u(r) dr, realised as
//! u_hat_q = h (2 pi)^(-1/2) e^{-i rho_q r_min} FFT(u)_q, with inverse
//! u_j = drho (2 pi)^(-1/2) sum_q e^{i rho_q r_j} u_hat_q.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{DomainKind, Grid1D, WaveField};

/// Field in momentum representation, same layout as [`WaveField`]; bin q
/// carries momentum `grid.rho(q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumField {
    pub grid: Grid1D,
    pub modes: usize,
    pub values: Vec<Complex64>,
}

impl MomentumField {
    pub fn at(&self, q: usize, j: usize) -> Complex64 {
        self.values[q * self.modes + j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.drho() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiply every mode by m(rho).
    pub fn multiply(&mut self, m: impl Fn(f64) -> Complex64) {
        for q in 0..self.grid.n {
            let f = m(self.grid.rho(q));
            for j in 0..self.modes {
                self.values[q * self.modes + j] *= f;
            }
        }
    }

    /// Multiply mode j by m(j, rho).
    pub fn multiply_modes(&mut self, m: impl Fn(usize, f64) -> Complex64) {
        for q in 0..self.grid.n {
            let rho = self.grid.rho(q);
            for j in 0..self.modes {
                self.values[q * self.modes + j] *= m(j, rho);
            }
        }
    }
}

/// FFT plans for one grid size.
#[derive(Clone)]
pub struct FourierPlan {
    grid: Grid1D,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// e^{-i rho_q r_min}
    phase: Vec<Complex64>,
}

impl FourierPlan {
    pub fn new(grid: Grid1D) -> Result<Self> {
        if grid.kind != DomainKind::FullLinePeriodic {
            return Err(Error::GridMismatch("Fourier transform needs a full-line grid".into()));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let phase = (0..grid.n)
            .map(|q| Complex64::from_polar(1.0, -grid.rho(q) * grid.r_min))
            .collect();
        Ok(FourierPlan { grid, fwd, inv, phase })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Forward transform of one column (length n).
    pub fn forward_column(&self, col: &mut [Complex64]) {
        self.fwd.process(col);
        let c = self.grid.h() / (2.0 * std::f64::consts::PI).sqrt();
        for (v, p) in col.iter_mut().zip(&self.phase) {
            *v *= p * c;
        }
    }

    pub fn inverse_column(&self, col: &mut [Complex64]) {
        for (v, p) in col.iter_mut().zip(&self.phase) {
            *v *= p.conj();
        }
        self.inv.process(col);
        let c = self.grid.drho() / (2.0 * std::f64::consts::PI).sqrt();
        for v in col.iter_mut() {
            *v *= c;
        }
    }

    pub fn forward(&self, u: &WaveField) -> Result<MomentumField> {
        if u.grid != self.grid {
            return Err(Error::GridMismatch("field grid differs from plan grid".into()));
        }
        let mut values = vec![Complex64::default(); u.values.len()];
        let mut col = vec![Complex64::default(); self.grid.n];
        for j in 0..u.modes {
            for i in 0..self.grid.n {
                col[i] = u.at(i, j);
            }
            self.forward_column(&mut col);
            for q in 0..self.grid.n {
                values[q * u.modes + j] = col[q];
            }
        }
        Ok(MomentumField { grid: self.grid, modes: u.modes, values })
    }

    pub fn inverse(&self, uh: &MomentumField) -> Result<WaveField> {
        if uh.grid != self.grid {
            return Err(Error::GridMismatch("field grid differs from plan grid".into()));
        }
        let mut values = vec![Complex64::default(); uh.values.len()];
        let mut col = vec![Complex64::default(); self.grid.n];
        for j in 0..uh.modes {
            for q in 0..self.grid.n {
                col[q] = uh.at(q, j);
            }
            self.inverse_column(&mut col);
            for i in 0..self.grid.n {
                values[i * uh.modes + j] = col[i];
            }
        }
        Ok(WaveField { grid: self.grid, modes: uh.modes, values })
    }

    /// Apply a momentum multiplier m(mode, rho).
    pub fn multiplier(
        &self,
        u: &WaveField,
        m: impl Fn(usize, f64) -> Complex64,
    ) -> Result<WaveField> {
        let mut uh = self.forward(u)?;
        uh.multiply_modes(m);
        self.inverse(&uh)
    }
}

pub fn fourier(u: &WaveField) -> Result<MomentumField> {
    FourierPlan::new(u.grid)?.forward(u)
}

pub fn inverse_fourier(uh: &MomentumField) -> Result<WaveField> {
    FourierPlan::new(uh.grid)?.inverse(uh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(g: Grid1D, r0: f64, w: f64, k0: f64) -> WaveField {
        let vals = (0..g.n)
            .map(|i| {
                let r = g.r(i);
                Complex64::from_polar((-(r - r0).powi(2) / (4.0 * w * w)).exp(), k0 * r)
            })
            .collect();
        WaveField::from_values(g, 1, vals).unwrap()
    }

    #[test]
    fn gaussian_pair() {
        // exp(-r^2/(4w^2)) -> w sqrt(2) exp(-w^2 rho^2)
        let g = Grid1D::full_line(1024, 0.1);
        let w = 2.0;
        let uh = fourier(&gaussian(g, 0.0, w, 0.0)).unwrap();
        for q in 0..g.n {
            let rho = g.rho(q);
            let want = w * 2f64.sqrt() * (-w * w * rho * rho).exp();
            assert!((uh.at(q, 0) - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let g = Grid1D::full_line(256, 0.2);
        let mut u = gaussian(g, 1.3, 1.5, 2.0);
        u.values[17] += Complex64::new(0.3, -0.1);
        let uh = fourier(&u).unwrap();
        assert!((uh.norm() - u.norm()).abs() < 1e-12);
        let back = inverse_fourier(&uh).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn shift_theorem() {
        let g = Grid1D::full_line(512, 0.1);
        let a = 3.0;
        let u = gaussian(g, 0.0, 1.0, 1.0);
        // v(r) = u(r - a)
        let mut v = gaussian(g, a, 1.0, 1.0);
        v.scale(Complex64::from_polar(1.0, -a));
        let (uh, vh) = (fourier(&u).unwrap(), fourier(&v).unwrap());
        for q in 0..g.n {
            let want = uh.at(q, 0) * Complex64::from_polar(1.0, -a * g.rho(q));
            assert!((vh.at(q, 0) - want).norm() < 1e-10, "{q}");
        }
    }

    #[test]
    fn momentum_mean_of_packet() {
        let g = Grid1D::full_line(2048, 0.1);
        let uh = fourier(&gaussian(g, 5.0, 2.0, 1.5)).unwrap();
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for q in 0..g.n {
            let p = uh.at(q, 0).norm_sqr();
            m0 += p;
            m1 += p * g.rho(q);
        }
        assert!((m1 / m0 - 1.5).abs() < 1e-10);
    }

    #[test]
    fn half_line_rejected() {
        let g = Grid1D::half_line(1.0, 8);
        assert!(FourierPlan::new(g).is_err());
    }
}
