//! Sampled functions on the periodic box `[-T/2, T/2)^n` and their Fourier transforms.
//!
//! Convention: `F f(xi) = \int e^{-i x.xi} f(x) dx`, inverse with `(2 pi)^{-n}`.
//! The discrete forward transform is the DFT scaled by `(T/N)^n`, evaluated on the
//! lattice `2 pi k / T`, `-N/2 <= k_i < N/2`. Both sample arrays are stored
//! in centred order: index `i` on an axis is `x = -T/2 + i T/N`, index `j` is `k = j - N/2`.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Periodic sampling lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    extent: f64,
    n: usize,
}

impl GridSpec {
    /// Grid with integer extent `T`, `N` a power of two with `N >= 8`, `dim` in {1, 2}.
    pub fn new(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if extent.fract() != 0.0 {
            return Err(Error::NonIntegerExtent(extent));
        }
        Self::with_extent(dim, extent, n)
    }

    /// Like [`GridSpec::new`] but accepts any positive extent. Unit-cube norms
    /// reject such grids.
    pub fn with_extent(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(invalid("dim", format!("{dim} not in 1..=2")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(invalid("extent", format!("{extent} must be positive")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(invalid("points_per_axis", format!("{n} must be a power of two >= 8")));
        }
        Ok(Self { dim, extent, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn extent(&self) -> f64 {
        self.extent
    }
    pub fn points_per_axis(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn has_integer_extent(&self) -> bool {
        self.extent.fract() == 0.0
    }
    /// Sample spacing `T/N`.
    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }
    /// Quadrature weight `(T/N)^n` of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    /// Frequency lattice spacing `2 pi / T`.
    pub fn freq_spacing(&self) -> f64 {
        2.0 * PI / self.extent
    }
    /// Largest lattice frequency magnitude per axis, `pi N / T`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.extent
    }
    /// Coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.spacing()
    }
    /// Frequency of axis index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.freq_spacing()
    }
    /// Split a flat index into per-axis indices (row-major, axis 0 slowest).
    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.unravel(idx);
        if self.dim == 1 {
            [self.coord(a), 0.0]
        } else {
            [self.coord(a), self.coord(b)]
        }
    }
    pub fn freq(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.unravel(idx);
        if self.dim == 1 {
            [self.wavenumber(a), 0.0]
        } else {
            [self.wavenumber(a), self.wavenumber(b)]
        }
    }
    /// Same sample count with extent multiplied by `2^e`; relabels samples of
    /// `f` as samples of `f(2^{-e} .)`.
    pub fn dilated(&self, e: i32) -> Self {
        Self { extent: self.extent * 2f64.powi(e), ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Physical,
    Frequency,
}

/// Complex samples on a [`GridSpec`], either in physical or frequency space.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T: Real> {
    grid: GridSpec,
    space: Space,
    data: Vec<Complex<T>>,
}

impl<T: Real> Field<T> {
    pub fn from_samples(grid: GridSpec, space: Space, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Structural(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, space, data })
    }

    pub fn zeros(grid: GridSpec, space: Space) -> Self {
        Self { grid, space, data: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    /// Physical field sampled from `f(x)`.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex<T>) -> Self {
        let d = grid.dim;
        let data = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self { grid, space: Space::Physical, data }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex::new(T::of(f(x)), T::zero()))
    }

    /// Frequency-space field sampled from `g(xi)` on the lattice.
    pub fn from_freq_fn(grid: GridSpec, mut g: impl FnMut(&[f64]) -> Complex<T>) -> Self {
        let d = grid.dim;
        let data = (0..grid.len()).map(|i| g(&grid.freq(i)[..d])).collect();
        Self { grid, space: Space::Frequency, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn space(&self) -> Space {
        self.space
    }
    pub fn samples(&self) -> &[Complex<T>] {
        &self.data
    }
    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }
    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Same samples viewed on another grid of equal size (used for dilations).
    pub fn regrid(mut self, grid: GridSpec) -> Result<Self> {
        if grid.len() != self.grid.len() || grid.dim != self.grid.dim {
            return Err(Error::GridMismatch("regrid needs equal sample layout".into()));
        }
        self.grid = grid;
        Ok(self)
    }

    fn expect(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::Structural(format!("expected {space:?} field, got {:?}", self.space)));
        }
        Ok(())
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        if self.space != other.space {
            return Err(Error::Structural("operands live in different spaces".into()));
        }
        Ok(())
    }

    /// Forward transform, physical -> frequency.
    pub fn dft(&self) -> Result<Self> {
        self.expect(Space::Physical)?;
        let mut data = self.data.clone();
        transform(&self.grid, &mut data, false);
        Ok(Self { grid: self.grid, space: Space::Frequency, data })
    }

    /// Inverse transform, frequency -> physical.
    pub fn idft(&self) -> Result<Self> {
        self.expect(Space::Frequency)?;
        let mut data = self.data.clone();
        transform(&self.grid, &mut data, true);
        Ok(Self { grid: self.grid, space: Space::Physical, data })
    }

    /// `m(D) f = F^{-1}[m F f]`.
    pub fn multiplier_apply(&self, m: impl Fn(&[f64]) -> Complex<T>) -> Result<Self> {
        let mut hat = self.dft()?;
        hat.mul_by_freq_fn(m);
        hat.idft()
    }

    pub fn multiplier_apply_real(&self, m: impl Fn(&[f64]) -> f64) -> Result<Self> {
        self.multiplier_apply(|xi| Complex::new(T::of(m(xi)), T::zero()))
    }

    /// Multiply a frequency-space field by `m` on the lattice.
    pub fn mul_by_freq_fn(&mut self, m: impl Fn(&[f64]) -> Complex<T>) {
        let d = self.grid.dim;
        for (i, z) in self.data.iter_mut().enumerate() {
            *z = *z * m(&self.grid.freq(i)[..d]);
        }
    }

    /// Periodic convolution approximating `\int f(x-y) g(y) dy`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        self.expect(Space::Physical)?;
        let a = self.dft()?;
        let b = other.dft()?;
        a.mul(&b)?.idft()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(self.with_data(data))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(self.with_data(data))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.with_data(self.data.iter().map(|z| z * c).collect())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        self.with_data(self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(|z| Complex::new(z.norm(), T::zero()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest modulus on the outer eighth of the lattice (per axis) relative to the peak.
    pub fn spectral_edge(&self) -> f64 {
        let n = self.grid.n;
        let d = self.grid.dim;
        let peak = self.max_abs().f64();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self
            .data
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let ix = self.grid.unravel(*i);
                ix[..d].iter().any(|&a| a.abs_diff(n / 2) >= 7 * n / 16)
            })
            .fold(0.0, |m, (_, z)| f64::max(m, z.norm().f64()));
        edge / peak
    }

    fn with_data(&self, data: Vec<Complex<T>>) -> Self {
        Self { grid: self.grid, space: self.space, data }
    }
}

/// In-place centred transform. Forward carries `(T/N)^n`, inverse `T^{-n}`.
pub(crate) fn transform<T: Real>(grid: &GridSpec, data: &mut [Complex<T>], inverse: bool) {
    let n = grid.n;
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // (-1)^i twist on both sides moves the origin to the centre of the box
    let twist = |data: &mut [Complex<T>]| {
        for (idx, z) in data.iter_mut().enumerate() {
            let [a, b] = grid.unravel(idx);
            if (a + b) % 2 == 1 {
                *z = -*z;
            }
        }
    };
    twist(data);
    fft.process(data);
    if grid.dim == 2 {
        let mut col = vec![Complex::new(T::zero(), T::zero()); n * n];
        transpose(data, &mut col, n);
        fft.process(&mut col);
        transpose(&col, data, n);
    }
    twist(data);
    let scale = if inverse {
        T::of(grid.extent.powi(-(grid.dim as i32)))
    } else {
        T::of(grid.cell_volume())
    };
    for z in data.iter_mut() {
        *z = *z * scale;
    }
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    // O(N^2) direct sum of the scaled transform
    fn direct_dft(g: &GridSpec, f: &[Complex<f64>]) -> Vec<Complex<f64>> {
        (0..g.len())
            .map(|j| {
                let xi = g.freq(j);
                (0..g.len())
                    .map(|i| {
                        let x = g.point(i);
                        let ph = -(x[0] * xi[0] + x[1] * xi[1]);
                        f[i] * Complex::from_polar(g.cell_volume(), ph)
                    })
                    .sum()
            })
            .collect()
    }

    fn rel_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(1, 8.0, 12).is_err());
        assert!(GridSpec::new(1, 8.0, 4).is_err());
        assert!(GridSpec::new(3, 8.0, 16).is_err());
        assert_eq!(GridSpec::new(1, 8.5, 16), Err(Error::NonIntegerExtent(8.5)));
    }

    #[test]
    fn delta_transforms_to_one() {
        let g = GridSpec::new(1, 8.0, 32).unwrap();
        let mut f = Field::<f64>::zeros(g, Space::Physical);
        f.samples_mut()[16] = c(32.0 / 8.0);
        let hat = f.dft().unwrap();
        for z in hat.samples() {
            assert!((z - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_self_transform() {
        let g = GridSpec::new(1, 32.0, 256).unwrap();
        let f = Field::<f64>::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        let hat = f.dft().unwrap();
        let exact: Vec<_> =
            (0..g.len()).map(|j| c((2.0 * PI).sqrt() * (-g.wavenumber(j).powi(2) / 2.0).exp())).collect();
        assert!(rel_err(hat.samples(), &exact) < 1e-10);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, n) in [(1, 32), (2, 8), (2, 16)] {
            let g = GridSpec::new(dim, 5.0, n).unwrap();
            let f = Field::from_fn(g, |_| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let fast = f.dft().unwrap();
            assert!(rel_err(fast.samples(), &direct_dft(&g, f.samples())) < 1e-10);
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = GridSpec::new(2, 6.0, 16).unwrap();
        let f = Field::<f64>::from_real_fn(g, |x| (x[0] - 0.3 * x[1]).sin() + x[1]);
        let back = f.dft().unwrap().idft().unwrap();
        assert!(rel_err(back.samples(), f.samples()) < 1e-12);
    }

    #[test]
    fn translation_by_modulation() {
        let g = GridSpec::new(1, 16.0, 128).unwrap();
        let h = g.spacing();
        let v = 5.0 * h;
        let f = Field::<f64>::from_real_fn(g, |x| (-(x[0] * x[0])).exp());
        // m(xi) = e^{-i xi v} shifts by +v
        let shifted = f.multiplier_apply(|xi| Complex::from_polar(1.0, -xi[0] * v)).unwrap();
        for i in 5..g.len() {
            assert!((shifted.samples()[i] - f.samples()[i - 5]).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_convolution() {
        let g = GridSpec::new(1, 40.0, 512).unwrap();
        let gauss = |s2: f64| move |x: &[f64]| (-x[0] * x[0] / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
        let a = Field::<f64>::from_real_fn(g, gauss(1.0));
        let conv = a.convolve(&a).unwrap();
        let exact = Field::<f64>::from_real_fn(g, gauss(2.0));
        assert!(rel_err(conv.samples(), exact.samples()) < 1e-8);
    }

    #[test]
    fn convolution_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::new(1, 4.0, 32).unwrap();
        let a = Field::from_fn(g, |_| c(rng.gen()));
        let b = Field::from_fn(g, |_| c(rng.gen()));
        let fast = a.convolve(&b).unwrap();
        let n = g.len();
        let slow: Vec<_> = (0..n)
            .map(|i| {
                (0..n).map(|l| a.samples()[(i + n + n / 2 - l) % n] * b.samples()[l] * g.spacing()).sum()
            })
            .collect();
        assert!(rel_err(fast.samples(), &slow) < 1e-10);
    }

    #[test]
    fn f32_path_round_trips() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let f = Field::<f32>::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let back = f.dft().unwrap().idft().unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() < 1e-5);
        }
    }
}
