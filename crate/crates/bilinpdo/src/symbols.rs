//! Symbols `sigma(x, xi, eta)`, their dyadic localisations `sigma_j^rho` and the
//! block norms `||Delta_k sigma_j^rho||` behind the three symbol classes.
//!
//! Blocks are computed on grids fitted to each `(j, k)` level. Symbols that factor as
//! `a(x) s(xi, eta)` or `a(x) b(xi) c(eta)` are sampled factor by factor, since the
//! unit-cube `L^2` norm and the sup norm of a tensor product factor exactly.

use crate::error::{invalid, Error, Result};
use crate::field_core::{transform, Field, GridSpec, Space};
use crate::fit::linear_fit;
use crate::partitions::{norm, PartitionFamily};
use crate::spaces::{ul2_norm, NormReport, SpaceTag};
use crate::C64;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

pub type XFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;
pub type FreqFn = Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync>;
pub type FullFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> C64 + Send + Sync>;

#[derive(Clone)]
pub enum Form {
    General(FullFn),
    /// `a(x) s(xi, eta)`; `a = 1` when absent.
    Split { x: Option<XFn>, freq: FreqFn },
    /// `a(x) b(xi) c(eta)`.
    Tensor { x: Option<XFn>, xi: XFn, eta: XFn },
}

/// A three-slot symbol with the metadata the samplers need.
#[derive(Clone)]
pub struct Symbol {
    form: Form,
    dim: usize,
    label: String,
    freq_support_radius: Option<f64>,
    support_box: Option<[f64; 2]>,
    x_reach: Option<f64>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("x_independent", &self.x_independent())
            .field("freq_support_radius", &self.freq_support_radius)
            .finish()
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl Symbol {
    pub fn general(dim: usize, f: impl Fn(&[f64], &[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        Self::from_form(dim, Form::General(Arc::new(f)))
    }

    pub fn x_independent_fn(dim: usize, s: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        Self::from_form(dim, Form::Split { x: None, freq: Arc::new(s) })
    }

    pub fn split(
        dim: usize,
        a: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        s: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_form(dim, Form::Split { x: Some(Arc::new(a)), freq: Arc::new(s) })
    }

    pub fn tensor(
        dim: usize,
        a: Option<XFn>,
        b: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        c: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_form(dim, Form::Tensor { x: a, xi: Arc::new(b), eta: Arc::new(c) })
    }

    pub fn from_form(dim: usize, form: Form) -> Self {
        Self {
            form,
            dim,
            label: String::new(),
            freq_support_radius: None,
            support_box: None,
            x_reach: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::x_independent_fn(dim, |_, _| C64::new(0.0, 0.0)).with_support_radius(0.0)
    }

    pub fn one(dim: usize) -> Self {
        Self::x_independent_fn(dim, |_, _| one()).with_label("one")
    }

    /// Declares that `sigma` vanishes for `|(xi, eta)| > r`.
    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.freq_support_radius = Some(r);
        self
    }

    /// Declares `supp sigma in {|xi| <= a, |eta| <= b}`; implies a support radius.
    pub fn with_support_box(mut self, a: f64, b: f64) -> Self {
        self.support_box = Some([a, b]);
        let r = a.hypot(b);
        self.freq_support_radius = Some(self.freq_support_radius.map_or(r, |q| q.min(r)));
        self
    }

    /// Half-width of the region carrying the non-constant part of the `x` dependence.
    pub fn with_x_reach(mut self, r: f64) -> Self {
        self.x_reach = Some(r);
        self
    }

    pub fn with_label(mut self, l: impl Into<String>) -> Self {
        self.label = l.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn form(&self) -> &Form {
        &self.form
    }
    pub fn freq_support_radius(&self) -> Option<f64> {
        self.freq_support_radius
    }
    pub fn support_box(&self) -> Option<[f64; 2]> {
        self.support_box
    }
    pub fn x_reach(&self) -> Option<f64> {
        self.x_reach
    }

    pub fn x_independent(&self) -> bool {
        matches!(self.form, Form::Split { x: None, .. } | Form::Tensor { x: None, .. })
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> C64 {
        match &self.form {
            Form::General(f) => f(x, xi, eta),
            Form::Split { x: a, freq } => a.as_ref().map_or(one(), |a| a(x)) * freq(xi, eta),
            Form::Tensor { x: a, xi: b, eta: c } => a.as_ref().map_or(one(), |a| a(x)) * b(xi) * c(eta),
        }
    }

    /// `x`-independent part evaluated at `(xi, eta)`; `None` for general symbols.
    pub fn freq_part(&self, xi: &[f64], eta: &[f64]) -> Option<C64> {
        match &self.form {
            Form::General(_) => None,
            Form::Split { freq, .. } => Some(freq(xi, eta)),
            Form::Tensor { xi: b, eta: c, .. } => Some(b(xi) * c(eta)),
        }
    }

    /// Multiply by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.form = match &self.form {
            Form::General(f) => {
                let f = f.clone();
                Form::General(Arc::new(move |x, a, b| f(x, a, b) * c))
            }
            Form::Split { x, freq } => {
                let g = freq.clone();
                Form::Split { x: x.clone(), freq: Arc::new(move |a, b| g(a, b) * c) }
            }
            Form::Tensor { x, xi, eta } => {
                let b = xi.clone();
                Form::Tensor { x: x.clone(), xi: Arc::new(move |v| b(v) * c), eta: eta.clone() }
            }
        };
        out
    }
}

/// Norm used inside a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockNorm {
    Ul2,
    Sup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsVariant {
    Plain,
    Star,
    Dagger,
}

impl BsVariant {
    pub fn tag(&self) -> SpaceTag {
        match self {
            BsVariant::Plain => SpaceTag::BsPlain,
            BsVariant::Star => SpaceTag::BsStar,
            BsVariant::Dagger => SpaceTag::BsDagger,
        }
    }
    fn block_norm(&self) -> BlockNorm {
        if *self == BsVariant::Dagger {
            BlockNorm::Sup
        } else {
            BlockNorm::Ul2
        }
    }
}

/// Truncation and grid-fitting parameters of the block computations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsConfig {
    /// `Psi_j` on `R^{2n}`.
    pub family: PartitionFamily,
    /// `psi_k` acting on each variable group.
    pub lp: PartitionFamily,
    pub j_max: Option<usize>,
    /// Highest `k` a fitted grid is asked to resolve.
    pub k_cap: usize,
    pub tol: f64,
    pub quiet: usize,
    /// Margin added on each side of a factor's support when sizing its box.
    pub pad: f64,
    pub max_points_1d: usize,
    pub max_points_2d: usize,
    pub max_points_3d: usize,
}

impl BsConfig {
    pub fn standard(n: usize) -> Self {
        Self {
            family: PartitionFamily::make_lp(2 * n, 40, 1.0).unwrap(),
            lp: PartitionFamily::make_lp(n, 40, 1.0).unwrap(),
            j_max: None,
            k_cap: 6,
            tol: 1e-9,
            quiet: 8,
            pad: 2.0,
            max_points_1d: 1 << 22,
            max_points_2d: 2048,
            max_points_3d: 64,
        }
    }

    pub fn with_family(mut self, family: PartitionFamily) -> Self {
        self.family = family;
        self
    }
}

fn grid_for(dim: usize, half_width: f64, k_cap: usize, pad: f64, cap: usize, lp: &PartitionFamily) -> Result<GridSpec> {
    let t = (2.0 * half_width + 2.0 * pad).ceil().max(2.0);
    let need = t * 2f64.powi(k_cap as i32) * lp.profile().outer / std::f64::consts::PI;
    let n = (need.ceil() as usize).next_power_of_two().clamp(8, cap.max(8));
    GridSpec::new(dim, t, n)
}

/// Highest `k` whose whole annulus is inside the lattice.
fn k_avail(g: &GridSpec, lp: &PartitionFamily) -> usize {
    let nyq = g.nyquist();
    let mut k = 0;
    while k < lp.k_max() && lp.annulus(k + 1).1 <= nyq {
        k += 1;
    }
    k
}

fn block_value(f: &Field<f64>, kind: BlockNorm) -> Result<f64> {
    Ok(match kind {
        BlockNorm::Ul2 => ul2_norm(f)?.value,
        BlockNorm::Sup => f.max_abs(),
    })
}

/// `||psi_k(D) f||` for every resolvable `k` of a field on one variable group.
fn group_blocks(f: &Field<f64>, lp: &PartitionFamily, kind: BlockNorm) -> Result<Vec<f64>> {
    let hat = f.dft()?;
    let kk = k_avail(f.grid(), lp);
    (0..=kk)
        .map(|k| {
            let mut b = hat.clone();
            b.mul_by_freq_fn(|y| C64::new(lp.piece_at(k, y), 0.0));
            block_value(&b.idft()?, kind)
        })
        .collect()
}

/// `||psi_{k1}(D_xi) psi_{k2}(D_eta) s||` for a field on `(xi, eta)`, `n = 1`.
fn pair_blocks(f: &Field<f64>, lp: &PartitionFamily, kind: BlockNorm) -> Result<Vec<Vec<f64>>> {
    let hat = f.dft()?;
    let kk = k_avail(f.grid(), lp);
    let cells: Vec<Result<f64>> = (0..(kk + 1) * (kk + 1))
        .into_par_iter()
        .map(|c| {
            let (k1, k2) = (c / (kk + 1), c % (kk + 1));
            let mut b = hat.clone();
            b.mul_by_freq_fn(|y| C64::new(lp.piece(k1, y[0].abs()) * lp.piece(k2, y[1].abs()), 0.0));
            block_value(&b.idft()?, kind)
        })
        .collect();
    let mut out = vec![vec![0.0; kk + 1]; kk + 1];
    for (c, v) in cells.into_iter().enumerate() {
        out[c / (kk + 1)][c % (kk + 1)] = v?;
    }
    Ok(out)
}

/// Dense samples of a function of `(x, xi, eta)`, `n = 1`, axis 0 = `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense3 {
    pub grids: [GridSpec; 3],
    pub data: Vec<C64>,
}

impl Dense3 {
    pub fn sample(grids: [GridSpec; 3], f: impl Fn(f64, f64, f64) -> C64) -> Self {
        let [a, b, c] = grids.map(|g| g.points_per_axis());
        let mut data = Vec::with_capacity(a * b * c);
        for i in 0..a {
            for j in 0..b {
                for k in 0..c {
                    data.push(f(grids[0].coord(i), grids[1].coord(j), grids[2].coord(k)));
                }
            }
        }
        Self { grids, data }
    }

    fn dims(&self) -> [usize; 3] {
        self.grids.map(|g| g.points_per_axis())
    }

    fn transform_all(&mut self, inverse: bool) {
        let d = self.dims();
        let strides = [d[1] * d[2], d[2], 1];
        for axis in 0..3 {
            let len = d[axis];
            let mut line = vec![C64::new(0.0, 0.0); len];
            let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
            for p in 0..d[others[0]] {
                for q in 0..d[others[1]] {
                    let base = p * strides[others[0]] + q * strides[others[1]];
                    for (t, z) in line.iter_mut().enumerate() {
                        *z = self.data[base + t * strides[axis]];
                    }
                    transform(&self.grids[axis], &mut line, inverse);
                    for (t, z) in line.iter().enumerate() {
                        self.data[base + t * strides[axis]] = *z;
                    }
                }
            }
        }
    }

    /// Sup over unit cubes of `(x, xi, eta)` space of the cube-restricted `L^2` norm.
    pub fn ul2(&self) -> Result<f64> {
        for g in &self.grids {
            if !g.has_integer_extent() {
                return Err(Error::NonIntegerExtent(g.extent()));
            }
        }
        let d = self.dims();
        let t = self.grids.map(|g| g.extent() as usize);
        let cube = |g: &GridSpec, i: usize, tt: usize| {
            (((g.coord(i) + 0.5 * g.extent()) + 1e-9).floor() as usize).min(tt - 1)
        };
        let mut acc = vec![0.0; t[0] * t[1] * t[2]];
        let mut idx = 0;
        for i in 0..d[0] {
            let ci = cube(&self.grids[0], i, t[0]);
            for j in 0..d[1] {
                let cj = cube(&self.grids[1], j, t[1]);
                for k in 0..d[2] {
                    let ck = cube(&self.grids[2], k, t[2]);
                    acc[(ci * t[1] + cj) * t[2] + ck] += self.data[idx].norm_sqr();
                    idx += 1;
                }
            }
        }
        let vol: f64 = self.grids.iter().map(|g| g.spacing()).product();
        Ok((acc.into_iter().fold(0.0, f64::max) * vol).sqrt())
    }

    pub fn sup(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// One `Delta_k` block of a densely sampled localisation.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedSymbolBlock {
    pub j: usize,
    pub rho: f64,
    pub k: [usize; 3],
    pub samples: Dense3,
    pub block_norm_ul2: f64,
}

/// `Delta_k = psi_{k0}(D_x) psi_{k1}(D_xi) psi_{k2}(D_eta)` applied to dense samples.
pub fn triple_block(loc: &Dense3, j: usize, rho: f64, k: [usize; 3], lp: &PartitionFamily) -> Result<LocalizedSymbolBlock> {
    let mut s = loc.clone();
    s.transform_all(false);
    apply_triple(&mut s, k, lp);
    s.transform_all(true);
    let block_norm_ul2 = s.ul2()?;
    Ok(LocalizedSymbolBlock { j, rho, k, samples: s, block_norm_ul2 })
}

fn apply_triple(s: &mut Dense3, k: [usize; 3], lp: &PartitionFamily) {
    let d = s.dims();
    let w: Vec<Vec<f64>> = (0..3)
        .map(|a| (0..d[a]).map(|i| lp.piece(k[a], s.grids[a].wavenumber(i).abs())).collect())
        .collect();
    let mut idx = 0;
    for i in 0..d[0] {
        for j in 0..d[1] {
            let wij = w[0][i] * w[1][j];
            for kk in 0..d[2] {
                s.data[idx] *= wij * w[2][kk];
                idx += 1;
            }
        }
    }
}

/// Block norms of one localisation level, stored in factored form where possible.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockTable {
    Product { x: Vec<f64>, xi: Vec<f64>, eta: Vec<f64> },
    Split { x: Vec<f64>, freq: Vec<Vec<f64>> },
    Full(Vec<Vec<Vec<f64>>>),
}

impl BlockTable {
    pub fn lens(&self) -> [usize; 3] {
        match self {
            BlockTable::Product { x, xi, eta } => [x.len(), xi.len(), eta.len()],
            BlockTable::Split { x, freq } => [x.len(), freq.len(), freq.first().map_or(0, |r| r.len())],
            BlockTable::Full(t) => [t.len(), t[0].len(), t[0][0].len()],
        }
    }

    pub fn get(&self, k: [usize; 3]) -> f64 {
        let l = self.lens();
        if k[0] >= l[0] || k[1] >= l[1] || k[2] >= l[2] {
            return 0.0;
        }
        match self {
            BlockTable::Product { x, xi, eta } => x[k[0]] * xi[k[1]] * eta[k[2]],
            BlockTable::Split { x, freq } => x[k[0]] * freq[k[1]][k[2]],
            BlockTable::Full(t) => t[k[0]][k[1]][k[2]],
        }
    }
}

/// Blocks of `sigma_j^rho` for one `j`, with the grids that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub j: usize,
    pub table: BlockTable,
    pub grids: Vec<GridSpec>,
}

fn const_x_blocks() -> Vec<f64> {
    vec![1.0]
}

/// `j_max` from the support radius, or the configured one.
pub fn j_limit(sigma: &Symbol, rho: f64, cfg: &BsConfig) -> Result<usize> {
    if let Some(j) = cfg.j_max {
        return Ok(j);
    }
    match sigma.freq_support_radius() {
        Some(r) if r <= 1.0 => Ok(2),
        Some(r) => Ok((r.log2() / (1.0 - rho)).ceil() as usize + 2),
        None => Err(invalid("j_max", "symbol has no frequency support radius; supply j_max")),
    }
}

/// Grid for one factor: sized from `k_cap`, then refined until the factor's spectrum
/// is negligible at the lattice edge or the point cap is reached.
fn factor_field(
    f: &(dyn Fn(&[f64]) -> C64 + Send + Sync),
    dim: usize,
    half_width: f64,
    stretch: f64,
    cfg: &BsConfig,
) -> Result<Field<f64>> {
    let mut g = grid_for(dim, half_width, cfg.k_cap, cfg.pad, cfg.max_points_1d, &cfg.lp)?;
    loop {
        let fld = Field::from_fn(g, |v| {
            let y: Vec<f64> = v.iter().map(|t| t * stretch).collect();
            f(&y)
        });
        let n = g.points_per_axis();
        if n * 2 > cfg.max_points_1d || fld.dft()?.spectral_edge() <= FACTOR_EDGE {
            return Ok(fld);
        }
        g = GridSpec::new(dim, g.extent(), n * 2)?;
    }
}

const FACTOR_EDGE: f64 = 1e-10;

fn x_grid_blocks(
    a: &Option<XFn>,
    sigma: &Symbol,
    scale: f64,
    cfg: &BsConfig,
    kind: BlockNorm,
    grids: &mut Vec<GridSpec>,
) -> Result<Vec<f64>> {
    let Some(a) = a else { return Ok(const_x_blocks()) };
    let reach = sigma
        .x_reach()
        .ok_or_else(|| Error::Unsupported("x-dependent symbol without an x reach".into()))?;
    let f = factor_field(a.as_ref(), sigma.dim(), reach * scale, 1.0 / scale, cfg)?;
    grids.push(*f.grid());
    group_blocks(&f, &cfg.lp, kind)
}

/// Block norms `||Delta_k sigma_j^rho||` of level `j`, or `None` when `sigma_j` vanishes.
pub fn level_blocks(sigma: &Symbol, j: usize, rho: f64, cfg: &BsConfig, kind: BlockNorm) -> Result<Option<Level>> {
    let fam = &cfg.family;
    let n = sigma.dim();
    let scale = 2f64.powf(j as f64 * rho);
    let (lo, hi) = fam.annulus(j);
    if let Some(r) = sigma.freq_support_radius() {
        if lo >= r {
            return Ok(None);
        }
    }
    let mut grids = Vec::new();
    // Psi_0 is identically 1 on the support: sigma_0 keeps its tensor structure
    if let (Form::Tensor { x, xi, eta }, Some([a, b])) = (sigma.form(), sigma.support_box()) {
        if j == 0 && a.hypot(b) <= fam.profile().inner {
            let xb = x_grid_blocks(x, sigma, scale, cfg, kind, &mut grids)?;
            let mut one_factor = |f: &XFn, w: f64| -> Result<Vec<f64>> {
                let fld = factor_field(f.as_ref(), n, w / scale, scale, cfg)?;
                grids.push(*fld.grid());
                group_blocks(&fld, &cfg.lp, kind)
            };
            let xi_b = one_factor(xi, a)?;
            let eta_b = one_factor(eta, b)?;
            return Ok(Some(Level { j, table: BlockTable::Product { x: xb, xi: xi_b, eta: eta_b }, grids }));
        }
    }
    if n != 1 {
        return Err(Error::Unsupported("dense symbol sampling is implemented for n = 1".into()));
    }
    let reach = sigma.freq_support_radius().map_or(hi, |r| r.min(hi)) / scale;
    match sigma.form() {
        Form::Split { x, .. } | Form::Tensor { x, .. } => {
            let xb = x_grid_blocks(x, sigma, scale, cfg, kind, &mut grids)?;
            let g = grid_for(2, reach, cfg.k_cap, cfg.pad, cfg.max_points_2d, &cfg.lp)?;
            grids.push(g);
            let f = Field::from_fn(g, |v| {
                let (a, b) = (v[0] * scale, v[1] * scale);
                let psi = fam.piece(j, a.hypot(b));
                if psi == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    sigma.freq_part(&[a], &[b]).unwrap() * psi
                }
            });
            let freq = pair_blocks(&f, &cfg.lp, kind)?;
            Ok(Some(Level { j, table: BlockTable::Split { x: xb, freq }, grids }))
        }
        Form::General(_) => {
            let loc = localize_dense(sigma, j, rho, cfg)?;
            let mut hat = loc.clone();
            hat.transform_all(false);
            let ks = loc.grids.map(|g| k_avail(&g, &cfg.lp));
            let mut t = vec![vec![vec![0.0; ks[2] + 1]; ks[1] + 1]; ks[0] + 1];
            for (k0, plane) in t.iter_mut().enumerate() {
                for (k1, row) in plane.iter_mut().enumerate() {
                    for (k2, cell) in row.iter_mut().enumerate() {
                        let mut b = hat.clone();
                        apply_triple(&mut b, [k0, k1, k2], &cfg.lp);
                        b.transform_all(true);
                        *cell = match kind {
                            BlockNorm::Ul2 => b.ul2()?,
                            BlockNorm::Sup => b.sup(),
                        };
                    }
                }
            }
            grids.extend(loc.grids);
            Ok(Some(Level { j, table: BlockTable::Full(t), grids }))
        }
    }
}

/// Dense samples of `sigma_j^rho` on grids fitted to level `j` (`n = 1`).
pub fn localize_dense(sigma: &Symbol, j: usize, rho: f64, cfg: &BsConfig) -> Result<Dense3> {
    if sigma.dim() != 1 {
        return Err(Error::Unsupported("dense symbol sampling is implemented for n = 1".into()));
    }
    let scale = 2f64.powf(j as f64 * rho);
    let (_, hi) = cfg.family.annulus(j);
    let reach = sigma.freq_support_radius().map_or(hi, |r| r.min(hi)) / scale;
    let gf = grid_for(1, reach, cfg.k_cap, cfg.pad, cfg.max_points_3d, &cfg.lp)?;
    let gx = if sigma.x_independent() {
        GridSpec::new(1, 2.0, 8)?
    } else {
        let r = sigma
            .x_reach()
            .ok_or_else(|| Error::Unsupported("x-dependent symbol without an x reach".into()))?;
        grid_for(1, r * scale, cfg.k_cap, cfg.pad, cfg.max_points_3d, &cfg.lp)?
    };
    localize_on(sigma, j, rho, &cfg.family, [gx, gf, gf])
}

/// `sigma_j^rho(x, xi, eta) = sigma(2^{-j rho} x, 2^{j rho} xi, 2^{j rho} eta) Psi_j(2^{j rho}(xi, eta))`
/// sampled on the given grids.
pub fn localize_on(sigma: &Symbol, j: usize, rho: f64, family: &PartitionFamily, grids: [GridSpec; 3]) -> Result<Dense3> {
    if sigma.dim() != 1 {
        return Err(Error::Unsupported("dense symbol sampling is implemented for n = 1".into()));
    }
    let scale = 2f64.powf(j as f64 * rho);
    Ok(Dense3::sample(grids, |x, a, b| {
        let (a, b) = (a * scale, b * scale);
        let psi = family.piece(j, a.hypot(b));
        if psi == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            sigma.eval(&[x / scale], &[a], &[b]) * psi
        }
    }))
}

/// First index after which `quiet` consecutive entries sit below `tol` times the running max.
fn quiet_cut(v: &[f64], tol: f64, quiet: usize) -> usize {
    let mut run_max: f64 = 0.0;
    let mut streak = 0;
    for (i, &x) in v.iter().enumerate() {
        run_max = run_max.max(x);
        if x <= tol * run_max {
            streak += 1;
            if streak >= quiet {
                return i + 1 - quiet;
            }
        } else {
            streak = 0;
        }
    }
    v.len()
}

fn axis_maxima(t: &BlockTable) -> [Vec<f64>; 3] {
    let l = t.lens();
    let mut m = [vec![0.0; l[0]], vec![0.0; l[1]], vec![0.0; l[2]]];
    for a in 0..l[0] {
        for b in 0..l[1] {
            for c in 0..l[2] {
                let v = t.get([a, b, c]);
                m[0][a] = f64::max(m[0][a], v);
                m[1][b] = f64::max(m[1][b], v);
                m[2][c] = f64::max(m[2][c], v);
            }
        }
    }
    m
}

/// Block norm row for CSV export.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockRow {
    pub j: usize,
    pub k: [usize; 3],
    pub norm: f64,
}

/// All nonvanishing levels up to the `j` limit.
pub fn levels(sigma: &Symbol, rho: f64, cfg: &BsConfig, kind: BlockNorm) -> Result<Vec<Level>> {
    let jm = j_limit(sigma, rho, cfg)?;
    let mut out = Vec::new();
    for j in 0..=jm {
        if let Some(l) = level_blocks(sigma, j, rho, cfg, kind)? {
            out.push(l);
        }
    }
    Ok(out)
}

pub fn block_rows(levels: &[Level]) -> Vec<BlockRow> {
    let mut rows = Vec::new();
    for l in levels {
        let n = l.table.lens();
        for a in 0..n[0] {
            for b in 0..n[1] {
                for c in 0..n[2] {
                    rows.push(BlockRow { j: l.j, k: [a, b, c], norm: l.table.get([a, b, c]) });
                }
            }
        }
    }
    rows
}

/// Aggregate precomputed levels into the chosen norm.
pub fn aggregate(levels: &[Level], m: f64, s: [f64; 3], variant: BsVariant, cfg: &BsConfig) -> (f64, [usize; 3]) {
    let mut cuts = [0usize; 3];
    let mut per_level = Vec::new();
    for l in levels {
        let mx = axis_maxima(&l.table);
        let c = [0, 1, 2].map(|a| quiet_cut(&mx[a], cfg.tol, cfg.quiet));
        for a in 0..3 {
            cuts[a] = cuts[a].max(c[a]);
        }
        per_level.push((l, c));
    }
    let w = |j: usize, k: [usize; 3]| {
        2f64.powf(-(j as f64) * m + k[0] as f64 * s[0] + k[1] as f64 * s[1] + k[2] as f64 * s[2])
    };
    let value = match variant {
        BsVariant::Plain => per_level
            .iter()
            .map(|(l, c)| {
                let mut acc = crate::scalar::KahanSum::<f64>::default();
                for a in 0..c[0] {
                    for b in 0..c[1] {
                        for d in 0..c[2] {
                            acc.add(w(l.j, [a, b, d]) * l.table.get([a, b, d]));
                        }
                    }
                }
                acc.value()
            })
            .fold(0.0, f64::max),
        BsVariant::Star => {
            let k0max = per_level.iter().map(|(_, c)| c[0]).max().unwrap_or(0);
            (0..k0max)
                .map(|a| {
                    per_level
                        .iter()
                        .map(|(l, c)| {
                            let mut acc = 0.0;
                            if a < c[0] {
                                for b in 0..c[1] {
                                    for d in 0..c[2] {
                                        acc += w(l.j, [a, b, d]) * l.table.get([a, b, d]);
                                    }
                                }
                            }
                            acc
                        })
                        .fold(0.0, f64::max)
                })
                .sum()
        }
        BsVariant::Dagger => per_level
            .iter()
            .flat_map(|(l, c)| {
                let c = *c;
                (0..c[0]).flat_map(move |a| {
                    (0..c[1]).flat_map(move |b| (0..c[2]).map(move |d| w(l.j, [a, b, d]) * l.table.get([a, b, d])))
                })
            })
            .fold(0.0, f64::max),
    };
    (value, cuts)
}

/// `BS^m_{rho,rho}(s)` norm in the plain, star or dagger aggregation.
pub fn bs_norm(sigma: &Symbol, m: f64, rho: f64, s: [f64; 3], variant: BsVariant, cfg: &BsConfig) -> Result<NormReport> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("{rho} not in [0, 1)")));
    }
    let lv = levels(sigma, rho, cfg, variant.block_norm())?;
    let (value, cuts) = aggregate(&lv, m, s, variant, cfg);
    let nmax = lv.iter().flat_map(|l| l.grids.iter().map(|g| g.points_per_axis())).max().unwrap_or(0);
    let tmax = lv.iter().flat_map(|l| l.grids.iter().map(|g| g.extent())).fold(0.0, f64::max);
    Ok(NormReport {
        value,
        tag: variant.tag(),
        params: vec![
            ("T", tmax),
            ("N", nmax as f64),
            ("m", m),
            ("rho", rho),
            ("s0", s[0]),
            ("s1", s[1]),
            ("s2", s[2]),
            ("j_max", j_limit(sigma, rho, cfg)? as f64),
            ("k0_cut", cuts[0] as f64),
            ("k1_cut", cuts[1] as f64),
            ("k2_cut", cuts[2] as f64),
        ],
        note: None,
    })
}

/// Fitted decay exponents of `||Delta_k sigma_j^rho||`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub j_slope: f64,
    /// `None` when every block with `k_i >= 1` vanishes.
    pub k_slopes: [Option<f64>; 3],
    pub orders: [u32; 3],
    pub m: f64,
    pub rows: Vec<BlockRow>,
}

impl DecayReport {
    /// `j` slope within `tol_j` of `m` and every `k_i` slope at most `-(N_i - 0.5)`.
    pub fn passes(&self, tol_j: f64) -> bool {
        (self.j_slope - self.m).abs() <= tol_j
            && self
                .k_slopes
                .iter()
                .zip(self.orders)
                .all(|(s, o)| s.map_or(true, |s| s <= -(o as f64 - 0.5)))
    }
}

/// Fit `log2 ||Delta_k sigma_j^rho||_{L^2_ul}` against `j` and each `k_i`.
///
/// The `j` slope uses the dominant block of each level; the `k_i` slope of a level
/// uses the blocks along axis `i` (other indices 0) above `1e-13` of the level maximum,
/// and the worst level is reported.
pub fn hormander_decay_check(
    sigma: &Symbol,
    m: f64,
    rho: f64,
    orders: [u32; 3],
    j_range: std::ops::RangeInclusive<usize>,
    k_hi: usize,
    cfg: &BsConfig,
) -> Result<DecayReport> {
    let mut js = Vec::new();
    let mut tops = Vec::new();
    let mut slopes: [Option<f64>; 3] = [None, None, None];
    let mut rows = Vec::new();
    let mut zero_axis = [true; 3];
    for j in j_range {
        let Some(level) = level_blocks(sigma, j, rho, cfg, BlockNorm::Ul2)? else { continue };
        rows.extend(block_rows(std::slice::from_ref(&level)));
        let mx = axis_maxima(&level.table);
        let top = mx[0].iter().cloned().fold(0.0, f64::max);
        js.push(j as f64);
        tops.push(top.log2());
        for axis in 0..3 {
            let (mut ks, mut vs) = (Vec::new(), Vec::new());
            for k in 1..=k_hi {
                let mut idx = [0; 3];
                idx[axis] = k;
                let v = level.table.get(idx);
                if v > 1e-13 * top {
                    ks.push(k as f64);
                    vs.push(v.log2());
                }
            }
            if !ks.is_empty() {
                zero_axis[axis] = false;
            }
            if ks.len() >= 2 {
                let s = linear_fit(&ks, &vs).unwrap().0;
                slopes[axis] = Some(slopes[axis].map_or(s, |p: f64| p.max(s)));
            } else if ks.len() == 1 {
                // a single surviving shell next to exact zeros: decay faster than any fit
                slopes[axis] = Some(slopes[axis].unwrap_or(f64::NEG_INFINITY));
            }
        }
    }
    if js.len() < 3 {
        return Err(invalid("j_range", "need at least three nonvanishing levels"));
    }
    for axis in 0..3 {
        if zero_axis[axis] {
            slopes[axis] = None;
        }
    }
    let j_slope = linear_fit(&js, &tops).unwrap().0;
    Ok(DecayReport { j_slope, k_slopes: slopes, orders, m, rows })
}

/// Frequency-space view of a zero-extended sample set; used by tests and the CLI.
pub fn sample_freq_part(sigma: &Symbol, g: &GridSpec) -> Option<Field<f64>> {
    if sigma.dim() != 1 || sigma.freq_part(&[0.0], &[0.0]).is_none() {
        return None;
    }
    let f = Field::from_fn(*g, |v| sigma.freq_part(&[v[0]], &[v[1]]).unwrap());
    Some(Field::from_samples(*g, Space::Physical, f.into_samples()).ok()?)
}

pub fn support_check(sigma: &Symbol, probes: &[[f64; 2]]) -> bool {
    let Some(r) = sigma.freq_support_radius() else { return true };
    probes
        .iter()
        .filter(|p| norm(&p[..]) > r)
        .all(|p| sigma.eval(&[0.0], &[p[0]], &[p[1]]).norm() <= 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::Profile;
    use std::f64::consts::PI;

    fn cfg1() -> BsConfig {
        BsConfig::standard(1)
    }

    // separable direct DFT along one axis of an N^3 block; no FFT involved
    fn direct_axis(d: &mut Dense3, axis: usize, inverse: bool) {
        let n = d.dims();
        let g = d.grids[axis];
        let len = n[axis];
        let strides = [n[1] * n[2], n[2], 1];
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        for p in 0..n[others[0]] {
            for q in 0..n[others[1]] {
                let base = p * strides[others[0]] + q * strides[others[1]];
                let line: Vec<C64> = (0..len).map(|t| d.data[base + t * strides[axis]]).collect();
                for o in 0..len {
                    let mut acc = C64::new(0.0, 0.0);
                    for (i, z) in line.iter().enumerate() {
                        let (x, xi) = if inverse { (g.coord(o), g.wavenumber(i)) } else { (g.coord(i), g.wavenumber(o)) };
                        let sign = if inverse { 1.0 } else { -1.0 };
                        acc += z * C64::from_polar(1.0, sign * x * xi);
                    }
                    d.data[base + o * strides[axis]] =
                        if inverse { acc / g.extent() } else { acc * g.spacing() };
                }
            }
        }
    }

    fn oracle_block(loc: &Dense3, k: [usize; 3], lp: &PartitionFamily) -> f64 {
        let mut d = loc.clone();
        for a in 0..3 {
            direct_axis(&mut d, a, false);
        }
        let n = d.dims();
        let mut idx = 0;
        for i in 0..n[0] {
            for j in 0..n[1] {
                for l in 0..n[2] {
                    let w = lp.piece(k[0], d.grids[0].wavenumber(i).abs())
                        * lp.piece(k[1], d.grids[1].wavenumber(j).abs())
                        * lp.piece(k[2], d.grids[2].wavenumber(l).abs());
                    d.data[idx] *= w;
                    idx += 1;
                }
            }
        }
        for a in 0..3 {
            direct_axis(&mut d, a, true);
        }
        // unit cubes of a T = 2 grid: split each axis at its midpoint
        let h: f64 = d.grids.iter().map(|g| g.spacing()).product();
        let mut best: f64 = 0.0;
        for c in 0..8 {
            let mut acc = 0.0;
            let mut idx = 0;
            for i in 0..n[0] {
                for j in 0..n[1] {
                    for l in 0..n[2] {
                        let cube = ((i >= n[0] / 2) as usize) << 2 | ((j >= n[1] / 2) as usize) << 1 | (l >= n[2] / 2) as usize;
                        if cube == c {
                            acc += d.data[idx].norm_sqr();
                        }
                        idx += 1;
                    }
                }
            }
            best = best.max(acc * h);
        }
        best.sqrt()
    }

    fn wavy() -> Symbol {
        Symbol::general(1, |x, a, b| {
            C64::new(1.0 + 0.3 * (PI * x[0]).cos(), 0.2 * (PI * x[0]).sin())
                * (-(a[0] * a[0] + b[0] * b[0]) / 3.0).exp()
                * C64::from_polar(1.0, a[0] / 3.0)
        })
        .with_x_reach(1.0)
    }

    #[test]
    fn tiny_symbol_matches_direct_summation() {
        let cfg = cfg1();
        let g = GridSpec::new(1, 2.0, 16).unwrap();
        let sigma = wavy();
        let (m, rho, s) = (0.3, 0.25, [0.5, 0.25, 0.75]);
        let mut levels = Vec::new();
        let mut oracle = 0.0f64;
        for j in 0..=2 {
            let loc = localize_on(&sigma, j, rho, &cfg.family, [g, g, g]).unwrap();
            let mut t = vec![vec![vec![0.0; 4]; 4]; 4];
            let mut sum = 0.0;
            for k0 in 0..4 {
                for k1 in 0..4 {
                    for k2 in 0..4 {
                        let b = triple_block(&loc, j, rho, [k0, k1, k2], &cfg.lp).unwrap();
                        let o = oracle_block(&loc, [k0, k1, k2], &cfg.lp);
                        assert!((b.block_norm_ul2 - o).abs() <= 1e-10 * o.max(1e-3), "{j} {k0}{k1}{k2}: {} vs {o}", b.block_norm_ul2);
                        t[k0][k1][k2] = b.block_norm_ul2;
                        sum += 2f64.powf(-(j as f64) * m + k0 as f64 * s[0] + k1 as f64 * s[1] + k2 as f64 * s[2]) * o;
                    }
                }
            }
            oracle = oracle.max(sum);
            levels.push(Level { j, table: BlockTable::Full(t), grids: vec![g] });
        }
        let cfg0 = BsConfig { tol: 0.0, ..cfg };
        let (v, _) = aggregate(&levels, m, s, BsVariant::Plain, &cfg0);
        assert!((v - oracle).abs() <= 1e-10 * oracle);
    }

    #[test]
    fn zero_symbol_has_zero_norm() {
        for v in [BsVariant::Plain, BsVariant::Star, BsVariant::Dagger] {
            let r = bs_norm(&Symbol::zero(1), 0.0, 0.0, [0.5; 3], v, &cfg1()).unwrap();
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn unbounded_symbol_needs_j_max() {
        let e = bs_norm(&Symbol::one(1), 0.0, 0.0, [0.5; 3], BsVariant::Plain, &cfg1());
        assert!(e.is_err());
    }

    #[test]
    fn x_independent_values_give_no_k0_blocks() {
        // general form, so the dense path samples the x axis for real
        let sigma = Symbol::general(1, |_, a, b| C64::new((-(a[0] * a[0] + b[0] * b[0])).exp(), 0.0))
            .with_x_reach(1.0)
            .with_support_radius(8.0);
        let cfg = cfg1();
        for j in 0..3 {
            let lv = level_blocks(&sigma, j, 0.5, &cfg, BlockNorm::Ul2).unwrap().unwrap();
            let top = axis_maxima(&lv.table)[0][0];
            let l = lv.table.lens();
            for k0 in 1..l[0] {
                for k1 in 0..l[1] {
                    for k2 in 0..l[2] {
                        assert!(lv.table.get([k0, k1, k2]) <= 1e-12 * top);
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_telescope_to_the_localisation() {
        let cfg = cfg1();
        let g = GridSpec::new(1, 2.0, 16).unwrap();
        let loc = localize_on(&wavy(), 1, 0.5, &cfg.family, [g, g, g]).unwrap();
        let mut acc = vec![C64::new(0.0, 0.0); loc.data.len()];
        for k0 in 0..8 {
            for k1 in 0..8 {
                for k2 in 0..8 {
                    let b = triple_block(&loc, 1, 0.5, [k0, k1, k2], &cfg.lp).unwrap();
                    for (a, z) in acc.iter_mut().zip(&b.samples.data) {
                        *a += z;
                    }
                }
            }
        }
        let err = acc.iter().zip(&loc.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-10 * loc.sup(), "{err}");
    }

    #[test]
    fn separable_block_factorises() {
        let cfg = cfg1();
        let g = GridSpec::new(1, 4.0, 32).unwrap();
        let a = |x: f64| C64::new((-(x * x) * 2.0).exp(), 0.0);
        let b = |x: f64| C64::new((-(x - 0.3).powi(2) * 3.0).exp(), 0.0);
        let c = |x: f64| C64::from_polar((-(x * x)).exp(), x);
        let loc = Dense3::sample([g, g, g], |x, p, q| a(x) * b(p) * c(q));
        let one = |f: &dyn Fn(f64) -> C64| group_blocks(&Field::from_fn(g, |v| f(v[0])), &cfg.lp, BlockNorm::Ul2).unwrap();
        let (ba, bb, bc) = (one(&a), one(&b), one(&c));
        for k in [[0, 0, 0], [1, 0, 2], [2, 1, 1]] {
            let blk = triple_block(&loc, 0, 0.0, k, &cfg.lp).unwrap().block_norm_ul2;
            let prod = ba[k[0]] * bb[k[1]] * bc[k[2]];
            assert!((blk - prod).abs() <= 1e-10 * prod, "{blk} vs {prod}");
        }
    }

    #[test]
    fn narrow_partition_keeps_only_level_zero() {
        let delta = 0.05;
        let fam = PartitionFamily::with_profile(2, 40, Profile::narrow(delta).unwrap()).unwrap();
        let r = 2f64.powf(0.5 - delta);
        let sigma = Symbol::x_independent_fn(1, move |a, b| {
            C64::new(crate::partitions::bump(a[0].hypot(b[0]) / r, 1.0), 0.0)
        })
        .with_support_radius(r);
        let cfg = cfg1().with_family(fam);
        assert!(level_blocks(&sigma, 0, 0.5, &cfg, BlockNorm::Ul2).unwrap().is_some());
        for j in 1..6 {
            assert!(level_blocks(&sigma, j, 0.5, &cfg, BlockNorm::Ul2).unwrap().is_none());
        }
        let g = GridSpec::new(1, 4.0, 16).unwrap();
        let loc = localize_on(&sigma, 0, 0.5, &fam, [g, g, g]).unwrap();
        let direct = Dense3::sample([g, g, g], |x, a, b| sigma.eval(&[x], &[a], &[b]));
        assert_eq!(loc, direct);
    }

    #[test]
    fn constant_symbol_localises_to_the_shell() {
        let cfg = cfg1();
        let g = GridSpec::new(1, 16.0, 32).unwrap();
        for j in 0..4 {
            let loc = localize_on(&Symbol::one(1), j, 0.0, &cfg.family, [g, g, g]).unwrap();
            let want = Dense3::sample([g, g, g], |_, a, b| C64::new(cfg.family.piece(j, a.hypot(b)), 0.0));
            assert_eq!(loc, want);
        }
    }

    #[test]
    fn plain_is_below_star_and_norms_are_homogeneous() {
        let cfg = cfg1();
        let sigma = Symbol::split(1, |x| C64::new(1.0 + 0.5 * (-x[0] * x[0]).exp(), 0.0), |a, b| {
            C64::new((1.0 + a[0] * a[0] + b[0] * b[0]).powf(-0.25) * crate::partitions::bump(a[0].hypot(b[0]) / 16.0, 1.0), 0.0)
        })
        .with_support_radius(16.0)
        .with_x_reach(6.0);
        let s = [0.5, 0.5, 0.5];
        let plain = bs_norm(&sigma, -0.25, 0.5, s, BsVariant::Plain, &cfg).unwrap().value;
        let star = bs_norm(&sigma, -0.25, 0.5, s, BsVariant::Star, &cfg).unwrap().value;
        assert!(plain > 0.0 && plain <= star * (1.0 + 1e-12));
        let twice = bs_norm(&sigma.scaled(-2.0), -0.25, 0.5, s, BsVariant::Star, &cfg).unwrap().value;
        assert!((twice - 2.0 * star).abs() <= 1e-12 * star);
    }

    #[test]
    fn quiet_cut_stops_after_quiet_run() {
        let v = [1.0, 0.5, 1e-12, 1e-13, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(quiet_cut(&v, 1e-9, 8), 2);
        assert_eq!(quiet_cut(&v[..5], 1e-9, 8), 5);
    }
}
