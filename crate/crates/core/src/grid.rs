//! Radial grids and complex wave fields over grid x angular modes.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// r_i = i h on [0, r_max]; both end points are pinned to zero.
    HalfLineDirichlet,
    /// r_j = (j - n/2) h, periodic.
    FullLinePeriodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub kind: DomainKind,
}

impl Grid1D {
    pub fn half_line(r_max: f64, n: usize) -> Self {
        assert!(n >= 3 && r_max > 0.0, "half-line grid needs n >= 3 and r_max > 0");
        Grid1D { r_min: 0.0, r_max, n, kind: DomainKind::HalfLineDirichlet }
    }

    /// Half-line grid with spacing h and n points.
    pub fn half_line_h(h: f64, n: usize) -> Self {
        Self::half_line(h * (n - 1) as f64, n)
    }

    /// Periodic grid with n (even) points and spacing h, r_j = (j - n/2) h.
    pub fn full_line(n: usize, h: f64) -> Self {
        assert!(n >= 2 && n % 2 == 0 && h > 0.0, "full-line grid needs even n and h > 0");
        let half = (n / 2) as f64;
        Grid1D {
            r_min: -half * h,
            r_max: (half - 1.0) * h,
            n,
            kind: DomainKind::FullLinePeriodic,
        }
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n - 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        match self.kind {
            DomainKind::HalfLineDirichlet => i as f64 * self.h(),
            DomainKind::FullLinePeriodic => (i as f64 - (self.n / 2) as f64) * self.h(),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r(i)).collect()
    }

    pub fn is_half_line(&self) -> bool {
        self.kind == DomainKind::HalfLineDirichlet
    }

    /// True for grid points carrying a Dirichlet pin.
    pub fn pinned(&self, i: usize) -> bool {
        self.is_half_line() && (i == 0 || i + 1 == self.n)
    }

    /// Momentum spacing of the periodic grid.
    pub fn drho(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.h())
    }

    /// Momentum of DFT bin q (FFT ordering).
    pub fn rho(&self, q: usize) -> f64 {
        let n = self.n as i64;
        let q = q as i64;
        let k = if q < n / 2 { q } else { q - n };
        k as f64 * self.drho()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|q| self.rho(q)).collect()
    }

    /// Index of the grid point closest to r (clamped).
    pub fn index_of(&self, r: f64) -> usize {
        let x = ((r - self.r(0)) / self.h()).round();
        x.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Complex field on a grid with `modes` angular components, stored row-major:
/// value (i, j) at `i * modes + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub modes: usize,
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(grid: Grid1D, modes: usize) -> Self {
        WaveField { grid, modes, values: vec![Complex64::default(); grid.n * modes] }
    }

    pub fn from_values(grid: Grid1D, modes: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n * modes {
            return Err(Error::DimensionMismatch(values.len(), grid.n * modes));
        }
        Ok(WaveField { grid, modes, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.modes + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.values[i * self.modes + j] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.h() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// L2 inner product <self, other> (conjugate-linear in self).
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.h()
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: Complex64) -> WaveField {
        let mut w = self.clone();
        w.scale(c);
        w
    }

    pub fn axpy(&mut self, a: Complex64, x: &WaveField) {
        for (y, x) in self.values.iter_mut().zip(&x.values) {
            *y += a * x;
        }
    }

    pub fn sub(&self, other: &WaveField) -> WaveField {
        let mut w = self.clone();
        w.axpy(Complex64::new(-1.0, 0.0), other);
        w
    }

    pub fn add(&self, other: &WaveField) -> WaveField {
        let mut w = self.clone();
        w.axpy(Complex64::new(1.0, 0.0), other);
        w
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
    }

    /// Column of a single mode.
    pub fn mode_column(&self, j: usize) -> Vec<Complex64> {
        (0..self.grid.n).map(|i| self.at(i, j)).collect()
    }

    pub fn set_mode_column(&mut self, j: usize, col: &[Complex64]) {
        for (i, v) in col.iter().enumerate() {
            self.set(i, j, *v);
        }
    }

    /// Mass in grid rows selected by the predicate on r.
    pub fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let h = self.grid.h();
        let mut s = 0.0;
        for i in 0..self.grid.n {
            if pred(self.grid.r(i)) {
                for j in 0..self.modes {
                    s += self.at(i, j).norm_sqr();
                }
            }
        }
        s * h
    }

    /// Mass within `cells` grid points of the artificial boundary: the far end
    /// of a half-line grid or both ends of a periodic grid.
    pub fn edge_mass(&self, cells: usize) -> f64 {
        let n = self.grid.n;
        let h = self.grid.h();
        let row = |i: usize| (0..self.modes).map(|j| self.at(i, j).norm_sqr()).sum::<f64>();
        let mut s = 0.0;
        match self.grid.kind {
            DomainKind::HalfLineDirichlet => {
                for i in n.saturating_sub(cells)..n {
                    s += row(i);
                }
            }
            DomainKind::FullLinePeriodic => {
                for i in 0..cells.min(n) {
                    s += row(i);
                }
                for i in n.saturating_sub(cells).max(cells)..n {
                    s += row(i);
                }
            }
        }
        s * h
    }

    pub fn max_abs_diff(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let kind: u32 = match self.grid.kind {
            DomainKind::HalfLineDirichlet => 0,
            DomainKind::FullLinePeriodic => 1,
        };
        w.write_all(&kind.to_le_bytes())?;
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&(self.modes as u64).to_le_bytes())?;
        w.write_all(&self.grid.r_min.to_le_bytes())?;
        w.write_all(&self.grid.r_max.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 16];
        r.read_exact(&mut head)?;
        if &head[..8] != MAGIC {
            return Err(Error::Io("bad wavefield magic".into()));
        }
        let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Io(format!("unsupported wavefield version {version}")));
        }
        let kind = match u32::from_le_bytes(head[12..16].try_into().unwrap()) {
            0 => DomainKind::HalfLineDirichlet,
            1 => DomainKind::FullLinePeriodic,
            k => return Err(Error::Io(format!("unknown domain kind {k}"))),
        };
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let modes = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let r_min = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let r_max = f64::from_le_bytes(b8);
        let mut buf = vec![0u8; 16 * n * modes];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(WaveField { grid: Grid1D { r_min, r_max, n, kind }, modes, values })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

const MAGIC: &[u8; 8] = b"SCATWAVE";
const FORMAT_VERSION: u32 = 1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_line_points() {
        let g = Grid1D::half_line(10.0, 11);
        assert_eq!(g.h(), 1.0);
        assert_eq!(g.r(0), 0.0);
        assert_eq!(g.r(10), 10.0);
        assert!(g.pinned(0) && g.pinned(10) && !g.pinned(5));
    }

    #[test]
    fn full_line_points() {
        let g = Grid1D::full_line(8, 0.5);
        assert!((g.h() - 0.5).abs() < 1e-15);
        assert_eq!(g.r(4), 0.0);
        assert_eq!(g.r(0), -2.0);
        assert_eq!(g.rho(0), 0.0);
        assert!(g.rho(4) < 0.0);
        assert_eq!(g.index_of(1.0), 6);
    }

    #[test]
    fn binary_round_trip_exact() {
        let g = Grid1D::full_line(16, 0.3);
        let vals = (0..48)
            .map(|i| Complex64::new((i as f64 * 0.7).sin() / 3.0, f64::EPSILON * i as f64))
            .collect();
        let u = WaveField::from_values(g, 3, vals).unwrap();
        let mut buf = Vec::new();
        u.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 32 + 16 * 48);
        let v = WaveField::read_from(&buf[..]).unwrap();
        assert_eq!(u.grid.r_min.to_bits(), v.grid.r_min.to_bits());
        for (a, b) in u.values.iter().zip(&v.values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(u, v);
    }

    #[test]
    fn bad_magic() {
        let buf = vec![0u8; 64];
        assert!(WaveField::read_from(&buf[..]).is_err());
    }

    #[test]
    fn size_mismatch() {
        let g = Grid1D::half_line(1.0, 5);
        let e = WaveField::from_values(g, 2, vec![Complex64::default(); 9]).unwrap_err();
        assert_eq!(e.code(), "grid_ops.DimensionMismatch");
    }
}
