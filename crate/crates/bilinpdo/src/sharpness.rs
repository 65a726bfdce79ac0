//! Counterexample families: the epsilon-scaled tensor family for `s1, s2`,
//! Wainger lattice sums, the oscillatory lattice symbol for `s0`, and the
//! dilation transfer between `rho = 0` and `rho > 0` symbol classes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::bilinear::{apply_hat, ratio_probe, InNorm, Pairing, ProbeStats};
use crate::error::{invalid, Error, Result};
use crate::field_core::{Field, GridSpec, Space};
use crate::fit::{linear_fit, loglog_slope};
use crate::partitions::{bump, smooth_step, PartitionFamily, Profile};
use crate::spaces::{lp_norm, NormReport};
use crate::symbols::{bs_norm, BsConfig, BsVariant, Form, Symbol};
use crate::C64;

/// `u^`: 1 on `|xi| <= 1/2`, 0 for `|xi| >= 1`.
pub fn u_hat(xi: f64) -> f64 {
    smooth_step((1.0 - xi.abs()) / 0.5, 1.0)
}

/// `v^`: 1 on `19/20 <= |eta| <= 21/20`, supported in `9/10 <= |eta| <= 11/10`.
pub fn v_hat(eta: f64) -> f64 {
    let r = eta.abs();
    smooth_step((1.1 - r) / 0.05, 1.0) * smooth_step((r - 0.9) / 0.05, 1.0)
}

fn trapezoid(a: f64, b: f64, m: usize, f: impl Fn(f64) -> C64) -> C64 {
    let h = (b - a) / m as f64;
    let mut acc = (f(a) + f(b)) * 0.5;
    for i in 1..m {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

fn nodes_for(y: f64) -> usize {
    (8.0 * y.abs()).ceil().max(2048.0) as usize
}

/// `u(y) = (1/2pi) int e^{iy xi} u^(xi) d xi`, by trapezoid on the support.
pub fn u_profile(y: f64) -> f64 {
    trapezoid(0.0, 1.0, nodes_for(y), |s| C64::new((y * s).cos() * u_hat(s), 0.0)).re / PI
}

/// `(u * u)(y)`, the inverse transform of `u^^2`.
pub fn uu_profile(y: f64) -> f64 {
    trapezoid(0.0, 1.0, nodes_for(y), |s| C64::new((y * s).cos() * u_hat(s).powi(2), 0.0)).re / PI
}

/// Which construction a sweep belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    EpsS12,
    Wainger,
    S0Family,
    DilationTransfer,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::EpsS12 => "eps_s12",
            Family::Wainger => "wainger",
            Family::S0Family => "s0_family",
            Family::DilationTransfer => "dilation_transfer",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub params: Vec<(&'static str, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl SweepRow {
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == key).map(|p| p.1)
    }
}

/// Rows of one family over a swept axis, with the fitted slope of `log2 ratio`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessSweep {
    pub family: Family,
    /// Parameter the slope is fitted against.
    pub axis: &'static str,
    /// Fit against `log2(axis)` rather than `axis` itself.
    pub log_axis: bool,
    pub rows: Vec<SweepRow>,
    pub fitted_slope: Option<f64>,
}

impl SharpnessSweep {
    /// Sorts rows by their parameter tuple and fits the slope; at least four rows are needed.
    pub fn new(family: Family, axis: &'static str, log_axis: bool, mut rows: Vec<SweepRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| !(r.ratio > 0.0) || !r.ratio.is_finite()) {
            return Err(Error::Structural(format!("non-positive ratio {} in {} sweep", r.ratio, family.name())));
        }
        rows.sort_by(|a, b| {
            let ka: Vec<f64> = a.params.iter().map(|p| p.1).collect();
            let kb: Vec<f64> = b.params.iter().map(|p| p.1).collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut xs = Vec::new();
        for r in &rows {
            xs.push(r.param(axis).ok_or_else(|| invalid("axis", format!("row lacks `{axis}`")))?);
        }
        let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let fitted_slope = if rows.len() < 4 {
            None
        } else if log_axis {
            loglog_slope(&xs, &ys)
        } else {
            let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
            linear_fit(&xs, &ly).map(|p| p.0)
        };
        Ok(Self { family, axis, log_axis, rows, fitted_slope })
    }

    /// Largest over smallest ratio.
    pub fn spread(&self) -> f64 {
        let hi = self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let lo = self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// `family,param...,lhs,rhs,ratio`, one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("family");
        if let Some(r) = self.rows.first() {
            for (k, _) in &r.params {
                s.push(',');
                s.push_str(k);
            }
        }
        s.push_str(",lhs,rhs,ratio\n");
        for r in &self.rows {
            s.push_str(self.family.name());
            for (_, v) in &r.params {
                let _ = write!(s, ",{v:e}");
            }
            let _ = writeln!(s, ",{:e},{:e},{:e}", r.lhs, r.rhs, r.ratio);
        }
        s
    }
}

// ---------------------------------------------------------------------------
// epsilon family

/// `sigma_eps(xi, eta) = u^(xi/eps) v^(eta)`.
pub fn eps_symbol(eps: f64) -> Symbol {
    Symbol::tensor(1, None, move |xi| C64::new(u_hat(xi[0] / eps), 0.0), |eta| C64::new(v_hat(eta[0]), 0.0))
        .with_support_box(eps, 1.1)
        .with_label(format!("eps_s12(eps={eps})"))
}

/// `T = wrap/eps`, `N` large enough that the spectra stay off the lattice edge.
pub fn eps_grid(eps: f64, wrap: f64) -> Result<GridSpec> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid("eps", format!("{eps} not in (0, 1/2]")));
    }
    let t = (wrap / eps).ceil();
    let n = ((t * 1.4 / PI).ceil() as usize).next_power_of_two().max(64);
    GridSpec::new(1, t, n)
}

fn exponent(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `f^(xi) = eps^{1/p-1} u^(xi/eps)` and `g^(eta) = eps^{1/q-1} u^((eta-1)/eps)`,
/// translated by `shift[0]`, `shift[1]`.
pub fn eps_inputs(grid: GridSpec, eps: f64, p: f64, q: f64, shift: [f64; 2]) -> (Field<f64>, Field<f64>) {
    let cf = eps.powf(exponent(p) - 1.0);
    let cg = eps.powf(exponent(q) - 1.0);
    let fh = Field::from_freq_fn(grid, |xi| C64::from_polar(cf * u_hat(xi[0] / eps), -xi[0] * shift[0]));
    let gh = Field::from_freq_fn(grid, |eta| C64::from_polar(cg * u_hat((eta[0] - 1.0) / eps), -eta[0] * shift[1]));
    (fh, gh)
}

/// Settings of the epsilon family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S12Config {
    pub wrap: f64,
    pub m: f64,
    pub s0: f64,
    pub s2: f64,
    pub variant: BsVariant,
    pub bs: BsConfig,
}

impl S12Config {
    pub fn standard() -> Self {
        let narrow = PartitionFamily::with_profile(2, 40, Profile::narrow(0.05).unwrap()).unwrap();
        let mut bs = BsConfig::standard(1).with_family(narrow);
        bs.pad = 0.5;
        Self { wrap: 128.0, m: 0.0, s0: 0.6, s2: 0.5, variant: BsVariant::Plain, bs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct S12Row {
    pub eps: f64,
    pub s1: f64,
    pub t_norm: f64,
    pub f_norm: f64,
    pub g_norm: f64,
    pub sigma: NormReport,
    pub grid: GridSpec,
}

impl S12Row {
    pub fn ratio(&self) -> f64 {
        self.t_norm / (self.sigma.value * self.f_norm * self.g_norm)
    }

    pub fn sweep_row(&self) -> SweepRow {
        SweepRow {
            params: vec![
                ("eps", self.eps),
                ("s1", self.s1),
                ("T", self.grid.extent()),
                ("N", self.grid.points_per_axis() as f64),
                ("sigma_norm", self.sigma.value),
            ],
            lhs: self.t_norm,
            rhs: self.sigma.value * self.f_norm * self.g_norm,
            ratio: self.ratio(),
        }
    }
}

/// One point of the epsilon family: `||T(f,g)||_r`, `||f||_p`, `||g||_q` and `||sigma_eps||`.
pub fn family_s12(eps: f64, p: f64, q: f64, r: f64, s1: f64, cfg: &S12Config) -> Result<S12Row> {
    if eps > 1.0 / 20.0 {
        return Err(invalid("eps", format!("{eps} too large: supp g^ leaves the plateau of v^ (need eps <= 1/20)")));
    }
    let grid = eps_grid(eps, cfg.wrap)?;
    let sigma = eps_symbol(eps);
    let (fh, gh) = eps_inputs(grid, eps, p, q, [0.0, 0.0]);
    let t = apply_hat(&sigma, &fh, &gh)?;
    let norm = bs_norm(&sigma, cfg.m, 0.0, [cfg.s0, s1, cfg.s2], cfg.variant, &cfg.bs)?;
    Ok(S12Row {
        eps,
        s1,
        t_norm: lp_norm(&t, r)?.value,
        f_norm: lp_norm(&fh.idft()?, p)?.value,
        g_norm: lp_norm(&gh.idft()?, q)?.value,
        sigma: norm,
        grid,
    })
}

pub fn eps_s12_sweep(eps: &[f64], p: f64, q: f64, r: f64, s1: f64, cfg: &S12Config) -> Result<SharpnessSweep> {
    let rows: Result<Vec<SweepRow>> = eps.iter().map(|&e| family_s12(e, p, q, r, s1, cfg).map(|r| r.sweep_row())).collect();
    SharpnessSweep::new(Family::EpsS12, "eps", true, rows?)
}

/// Lattice `T_sigma(f, g)` against quadrature closed forms, sup-relative errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormCheck {
    pub eps: f64,
    /// Against `eps^{1/p} (u*u)(eps x) [v^(D) g](x)`, both factors by quadrature.
    pub factor_err: f64,
    /// Against `eps^{1/p} (u*u)(eps x) eps^{1/q} e^{ix} u(eps x)`; only when `v^ = 1` on `supp g^`.
    pub full_err: Option<f64>,
    pub grid: GridSpec,
}

/// `[v^(D) g](x)` for the unshifted `g`, by trapezoid in `eta = 1 + eps z`.
fn vg_quadrature(x: f64, eps: f64, q: f64) -> C64 {
    let m = nodes_for(eps * x).max(4096);
    let i = trapezoid(-1.0, 1.0, m, |z| C64::from_polar(u_hat(z) * v_hat(1.0 + eps * z), eps * x * z));
    C64::from_polar(eps.powf(exponent(q)), x) * i / (2.0 * PI)
}

pub fn closed_form_check(eps: f64, p: f64, q: f64, wrap: f64) -> Result<ClosedFormCheck> {
    let grid = eps_grid(eps, wrap)?;
    let sigma = eps_symbol(eps);
    let (fh, gh) = eps_inputs(grid, eps, p, q, [0.0, 0.0]);
    let t = apply_hat(&sigma, &fh, &gh)?;
    let pf = eps.powf(exponent(p));
    let plateau = eps <= 1.0 / 20.0;
    let errs: Vec<(f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.coord(i);
            let a = pf * uu_profile(eps * x);
            let by_v = a * vg_quadrature(x, eps, q);
            let full = if plateau {
                a * C64::from_polar(eps.powf(exponent(q)) * u_profile(eps * x), x)
            } else {
                C64::new(0.0, 0.0)
            };
            let z = t.samples()[i];
            ((z - by_v).norm(), (z - full).norm(), by_v.norm())
        })
        .collect();
    let scale = errs.iter().map(|e| e.2).fold(0.0, f64::max);
    let factor_err = errs.iter().map(|e| e.0).fold(0.0, f64::max) / scale;
    let full_err = plateau.then(|| errs.iter().map(|e| e.1).fold(0.0, f64::max) / scale);
    Ok(ClosedFormCheck { eps, factor_err, full_err, grid })
}

/// Ratio probe of the epsilon family over random translations of `f` and `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsProbe {
    pub eps: f64,
    pub sigma_norm: f64,
    pub stats: ProbeStats,
}

impl EpsProbe {
    pub fn normalized_median(&self) -> f64 {
        self.stats.median / self.sigma_norm
    }
}

fn in_exponent(n: InNorm) -> f64 {
    match n {
        InNorm::Lp(p) => p,
        InNorm::Bmo => f64::INFINITY,
    }
}

/// `trials` random pairs translated by `a/eps`, `b/eps` with `a, b` uniform in `[-8, 8]`,
/// ratios divided by `||sigma_eps||_{BS(s)}`.
pub fn eps_probe(
    eps: f64,
    pairing: Pairing,
    s: [f64; 3],
    trials: usize,
    seed: u64,
    cfg: &S12Config,
) -> Result<EpsProbe> {
    let grid = eps_grid(eps, cfg.wrap)?;
    let sigma = eps_symbol(eps);
    let sigma_norm = bs_norm(&sigma, cfg.m, 0.0, s, cfg.variant, &cfg.bs)?.value;
    let (p, q) = (in_exponent(pairing.f), in_exponent(pairing.g));
    let half = (grid.extent() / 4.0).min(8.0 / eps);
    let sampler = |rng: &mut ChaCha8Rng| {
        let shift = [rng.gen_range(-half..half), rng.gen_range(-half..half)];
        let (fh, gh) = eps_inputs(grid, eps, p, q, shift);
        let phase = C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
        (fh.scale(phase), gh)
    };
    let stats = ratio_probe(&sigma, sampler, pairing, trials, seed)?;
    Ok(EpsProbe { eps, sigma_norm, stats })
}

// ---------------------------------------------------------------------------
// Wainger sums

/// `K_cut` with `e^{-t K_cut} <= 1e-12`.
pub fn k_cut_for(t: f64) -> usize {
    (12.0 * 10f64.ln() / t).ceil() as usize
}

/// `a + ... / p` threshold for the Wainger sums on `R^1`.
pub fn wainger_threshold(a: f64, p: f64) -> f64 {
    1.0 - a / 2.0 - 1.0 / p + a / p
}

/// Cutoff in `x` applied to the lattice sums.
pub fn wainger_phi(x: f64) -> f64 {
    bump(x / 3.0, 1.0)
}

/// `f(x) = phi(x) sum_{0 < |k| <= K} e^{-t|k|} |k|^{-b} e^{i|k|^a} e^{ikx}` on one period.
pub fn wainger(a: f64, b: f64, t: f64, p: f64, k_cut: Option<usize>) -> Result<(Field<f64>, NormReport)> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid("a", format!("{a} not in (0, 1)")));
    }
    if !(t > 0.0) {
        return Err(invalid("t", "must be positive"));
    }
    let k = k_cut.unwrap_or_else(|| k_cut_for(t));
    if (-t * k as f64).exp() > 1e-12 {
        return Err(Error::Truncation(format!("e^(-t K_cut) = {:e} > 1e-12 at K_cut = {k}", (-t * k as f64).exp())));
    }
    let m = (8 * k).next_power_of_two().max(64);
    let grid = GridSpec::with_extent(1, 2.0 * PI, m)?;
    let coef = |kk: i64| {
        let ka = kk.unsigned_abs() as f64;
        C64::from_polar(2.0 * PI * (-t * ka).exp() * ka.powf(-b), ka.powf(a))
    };
    let hat = Field::from_freq_fn(grid, |xi| {
        let kk = xi[0].round() as i64;
        if kk == 0 || kk.unsigned_abs() as usize > k {
            C64::new(0.0, 0.0)
        } else {
            coef(kk)
        }
    });
    let data = hat.idft()?.samples().iter().enumerate().map(|(i, z)| z * wainger_phi(grid.coord(i))).collect();
    let f = Field::from_samples(grid, Space::Physical, data)?;
    let n = lp_norm(&f, p)?;
    Ok((f, n))
}

/// `||f_{a,b,t}||_p` over `ts`, ratio column = norm.
pub fn wainger_sweep(a: f64, b: f64, ts: &[f64], p: f64) -> Result<SharpnessSweep> {
    let rows: Result<Vec<SweepRow>> = ts
        .iter()
        .map(|&t| {
            let (f, n) = wainger(a, b, t, p, None)?;
            Ok(SweepRow {
                params: vec![
                    ("a", a),
                    ("b", b),
                    ("t", t),
                    ("p", p),
                    ("K_cut", k_cut_for(t) as f64),
                    ("N", f.grid().points_per_axis() as f64),
                ],
                lhs: n.value,
                rhs: 1.0,
                ratio: n.value,
            })
        })
        .collect();
    SharpnessSweep::new(Family::Wainger, "t", true, rows?)
}

// ---------------------------------------------------------------------------
// s0 family

/// `phi`, supported in `[-1/4, 1/4]`.
pub fn s0_phi(y: f64) -> f64 {
    bump(4.0 * y, 1.0)
}

/// `phi~`, equal to 1 on `[-1/4, 1/4]`, supported in `[-1/2, 1/2]`.
pub fn s0_phi_tilde(y: f64) -> f64 {
    Profile { inner: 0.25, outer: 0.5, sharpness: 1.0 }.eval(y.abs())
}

/// Parameters of the oscillatory lattice symbol and its test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S0Params {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub m: f64,
    pub s0: f64,
    pub r: f64,
}

impl S0Params {
    /// `m - s0 - b1 - b2 + n` with `n = 1`.
    pub fn exponent(&self) -> f64 {
        self.m - self.s0 - self.b1 - self.b2 + 1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct S0Row {
    pub t: f64,
    pub k_cut: usize,
    /// `||T(f,g)||_{L^r}` assembled from quadratures of the Fourier integrals.
    pub computed: f64,
    /// The same norm from the direct double lattice sum.
    pub closed: f64,
    /// `sum_{k,l} e^{-t(|k|+|l|)} (1+|k|+|l|)^{m-s0} |k|^{-b1} |l|^{-b2}`.
    pub double_sum: f64,
    /// `sum_k e^{-2t|k|} (1+|k|)^{m-s0-b1-b2+n}`.
    pub diagonal_sum: f64,
}

impl S0Row {
    pub fn rel_err(&self) -> f64 {
        (self.computed - self.closed).abs() / self.closed.abs()
    }
}

const LOCAL_NODES: usize = 64;

fn quad_local(f: impl Fn(f64) -> C64) -> C64 {
    // integrands here vanish to all orders at +-1/2
    trapezoid(-0.5, 0.5, LOCAL_NODES, f)
}

/// `int phi(xi - k) f^(xi) d xi` for every `0 < |k| <= K`, with `f^ = sum_nu c_nu phi~(. - nu)`
/// evaluated from its neighbouring lattice terms.
fn lattice_pairings(k_cut: usize, c: impl Fn(i64) -> C64 + Sync) -> Vec<C64> {
    let kk = k_cut as i64;
    (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return C64::new(0.0, 0.0);
            }
            quad_local(|y| {
                let mut fh = C64::new(0.0, 0.0);
                for nu in (k - 1)..=(k + 1) {
                    if nu != 0 && nu.abs() <= kk {
                        fh += c(nu) * s0_phi_tilde(y + (k - nu) as f64);
                    }
                }
                fh * s0_phi(y)
            })
        })
        .collect()
}

/// Linear convolution of two sequences by FFT.
fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let len = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut fa = a.to_vec();
    fa.resize(len, C64::new(0.0, 0.0));
    let mut fb = b.to_vec();
    fb.resize(len, C64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa.truncate(a.len() + b.len() - 1);
    fa.iter().map(|z| z / len as f64).collect()
}

fn phi_l1() -> f64 {
    quad_local(|y| C64::new(s0_phi(y), 0.0)).re
}

fn phi_lr(r: f64) -> f64 {
    let m = 1 << 14;
    (trapezoid(-0.5, 0.5, m, |y| C64::new(s0_phi(y).powf(r), 0.0)).re).powf(1.0 / r)
}

/// `T_{sigma_{a1,a2}}(f_{a1,b1,t}, g_{a2,b2,t})` two ways.
///
/// The computed side pairs `phi(. - k)` with the lattice sum `f^` by quadrature, keeps
/// every phase, sums over `(k, l)` through a convolution in `|k| + |l|` and takes the
/// `L^r` norm of `phi(x) S / (2 pi)^2` on a grid. The closed side is the positive double
/// lattice sum times `||phi||_1^2 ||phi||_r / (2 pi)^2`.
pub fn family_s0(pr: &S0Params, t: f64) -> Result<S0Row> {
    if !(t > 0.0) {
        return Err(invalid("t", "must be positive"));
    }
    let k_cut = k_cut_for(t);
    if (-t * k_cut as f64).exp() > 1e-12 {
        return Err(Error::Truncation(format!("K_cut = {k_cut} too small for t = {t}")));
    }
    let kk = k_cut as i64;
    let cf = |a: f64, b: f64| move |nu: i64| {
        let n = nu.unsigned_abs() as f64;
        C64::from_polar((-t * n).exp() * n.powf(-b), n.powf(a))
    };
    let i_f = lattice_pairings(k_cut, cf(pr.a1, pr.b1));
    let i_g = lattice_pairings(k_cut, cf(pr.a2, pr.b2));
    // fold +-k into one sequence indexed by |k|, with the symbol's phases
    let fold = |i: &[C64], a: f64| -> Vec<C64> {
        (0..=k_cut)
            .map(|u| {
                if u == 0 {
                    return C64::new(0.0, 0.0);
                }
                let ph = C64::from_polar(1.0, -(u as f64).powf(a));
                (i[(kk + u as i64) as usize] + i[(kk - u as i64) as usize]) * ph
            })
            .collect()
    };
    let conv = convolve(&fold(&i_f, pr.a1), &fold(&i_g, pr.a2));
    let w = |s: usize| (1.0 + s as f64).powf(pr.m - pr.s0);
    let mut s_val = C64::new(0.0, 0.0);
    for (s, z) in conv.iter().enumerate().skip(2) {
        s_val += z * w(s);
    }
    let grid = GridSpec::new(1, 2.0, 1024)?;
    let tx = Field::from_fn(grid, |x| s_val * s0_phi(x[0]) / (4.0 * PI * PI));
    let computed = lp_norm(&tx, pr.r)?.value;

    let decay = |b: f64| -> Vec<f64> { (0..=k_cut).map(|k| (-t * k as f64).exp() * (k as f64).powf(-b)).collect() };
    let (df, dg) = (decay(pr.b1), decay(pr.b2));
    let wt: Vec<f64> = (0..=2 * k_cut + 1).map(w).collect();
    let double_sum: f64 = 4.0
        * (1..=k_cut)
            .into_par_iter()
            .map(|k| {
                let mut acc = 0.0;
                for l in 1..=k_cut {
                    acc += wt[k + l] * dg[l];
                }
                acc * df[k]
            })
            .sum::<f64>();
    let p1 = phi_l1();
    let closed = double_sum * p1 * p1 * phi_lr(pr.r) / (4.0 * PI * PI);
    let e = pr.exponent();
    let diagonal_sum = (1..=k_cut).map(|k| (-2.0 * t * k as f64).exp() * (1.0 + k as f64).powf(e)).sum::<f64>() * 2.0;
    Ok(S0Row { t, k_cut, computed, closed, double_sum, diagonal_sum })
}

/// `family_s0` over `ts`; the ratio column is the double lattice sum.
pub fn s0_sweep(pr: &S0Params, ts: &[f64]) -> Result<(SharpnessSweep, Vec<S0Row>)> {
    let rows: Result<Vec<S0Row>> = ts.iter().map(|&t| family_s0(pr, t)).collect();
    let rows = rows?;
    let sweep_rows = rows
        .iter()
        .map(|r| SweepRow {
            params: vec![("t", r.t), ("s0", pr.s0), ("exponent", pr.exponent()), ("K_cut", r.k_cut as f64)],
            lhs: r.computed,
            rhs: r.closed,
            ratio: r.double_sum,
        })
        .collect();
    Ok((SharpnessSweep::new(Family::S0Family, "t", true, sweep_rows)?, rows))
}

// ---------------------------------------------------------------------------
// dilation transfer

/// `varsigma_l(x, xi, eta) = sigma_l(2^{l r} x, 2^{-l r} xi, 2^{-l r} eta)` with
/// `sigma_l = sigma Psi_l` and `r = rho/(1-rho)`.
pub fn dilated_piece(sigma: &Symbol, ell: usize, rho: f64, family: PartitionFamily) -> Result<Symbol> {
    let Form::Split { x, freq } = sigma.form().clone() else {
        return Err(Error::Unsupported("dilation transfer needs a split symbol a(x) s(xi, eta)".into()));
    };
    if sigma.dim() != 1 {
        return Err(Error::Unsupported("dilation transfer is implemented for n = 1".into()));
    }
    let c = 2f64.powf(ell as f64 * rho / (1.0 - rho));
    let freq2: Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync> = Arc::new(move |a: &[f64], b: &[f64]| {
        let (u, v) = (a[0] / c, b[0] / c);
        let psi = family.piece(ell, u.hypot(v));
        if psi == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            freq(&[u], &[v]) * psi
        }
    });
    let x2 = x.map(|a| -> Arc<dyn Fn(&[f64]) -> C64 + Send + Sync> { Arc::new(move |y: &[f64]| a(&[y[0] * c])) });
    let mut out = Symbol::from_form(1, Form::Split { x: x2, freq: freq2 })
        .with_support_radius(c * family.annulus(ell).1)
        .with_label(format!("dilated piece l={ell}"));
    if let Some(r) = sigma.x_reach() {
        out = out.with_x_reach(r / c);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferRow {
    pub ell: usize,
    /// `||varsigma_l||` in `BS^{m,dagger}_{rho,rho}(s)`.
    pub lhs: f64,
    /// `||sigma||` in `BS^{m',dagger}_{0,0}(s)`.
    pub rhs: f64,
}

/// Both sides of the per-`l` dilation inequality; slope of `log2(lhs/rhs)` against `l`.
pub fn dilation_transfer(
    sigma: &Symbol,
    m: f64,
    mp: f64,
    rho: f64,
    s: [f64; 3],
    ells: &[usize],
    rhs_j_max: usize,
    cfg: &BsConfig,
) -> Result<(SharpnessSweep, Vec<TransferRow>)> {
    if rho == 0.0 {
        return Err(invalid("rho", "rho = 0 makes the reduction vacuous"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid("rho", format!("{rho} not in (0, 1)")));
    }
    let mut rcfg = *cfg;
    rcfg.j_max = Some(rhs_j_max);
    let rhs = bs_norm(sigma, mp, 0.0, s, BsVariant::Dagger, &rcfg)?.value;
    let mut rows = Vec::new();
    for &ell in ells {
        let piece = dilated_piece(sigma, ell, rho, cfg.family)?;
        let lhs = bs_norm(&piece, m, rho, s, BsVariant::Dagger, cfg)?.value;
        rows.push(TransferRow { ell, lhs, rhs });
    }
    let sweep_rows = rows
        .iter()
        .map(|r| SweepRow {
            params: vec![("ell", r.ell as f64), ("m", m), ("mp", mp), ("rho", rho)],
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.lhs / r.rhs,
        })
        .collect();
    Ok((SharpnessSweep::new(Family::DilationTransfer, "ell", false, sweep_rows)?, rows))
}

/// `(1 + e^{-x^2}/2) (1 + xi^2 + eta^2)^{mp/2}`.
pub fn suite_symbol(mp: f64) -> Symbol {
    Symbol::split(1, |x| C64::new(1.0 + 0.5 * (-x[0] * x[0]).exp(), 0.0), move |a, b| {
        C64::new((1.0 + a[0] * a[0] + b[0] * b[0]).powf(mp / 2.0), 0.0)
    })
    .with_x_reach(6.0)
    .with_label(format!("suite(m={mp})"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_have_the_pinned_supports() {
        assert_eq!(u_hat(0.5), 1.0);
        assert_eq!(u_hat(0.0), 1.0);
        assert_eq!(u_hat(1.0), 0.0);
        assert!(u_hat(0.75) > 0.0 && u_hat(0.75) < 1.0);
        for e in [0.95, 1.0, 1.05, -1.0] {
            assert_eq!(v_hat(e), 1.0);
        }
        for e in [0.9, 1.1, 0.5, 0.0] {
            assert_eq!(v_hat(e), 0.0);
        }
    }

    #[test]
    fn u_profile_matches_a_fine_midpoint_rule() {
        for y in [0.0, 3.0, 40.0] {
            let m = 200_000;
            let h = 1.0 / m as f64;
            let mid: f64 = (0..m).map(|i| (i as f64 + 0.5) * h).map(|s| (y * s).cos() * u_hat(s)).sum::<f64>() * h / PI;
            assert!((u_profile(y) - mid).abs() < 1e-9, "{y}");
        }
    }

    #[test]
    fn sweep_rejects_nonpositive_ratios_and_needs_four_points() {
        let row = |x: f64, r: f64| SweepRow { params: vec![("x", x)], lhs: r, rhs: 1.0, ratio: r };
        assert!(SharpnessSweep::new(Family::Wainger, "x", true, vec![row(1.0, 0.0)]).is_err());
        let s = SharpnessSweep::new(Family::Wainger, "x", true, vec![row(1.0, 1.0), row(2.0, 2.0)]).unwrap();
        assert!(s.fitted_slope.is_none());
        let rows = (1..=4).map(|i| row(2f64.powi(i), 2f64.powi(-2 * i))).rev().collect();
        let s = SharpnessSweep::new(Family::Wainger, "x", true, rows).unwrap();
        assert!((s.fitted_slope.unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(s.rows[0].param("x"), Some(2.0));
        assert!(s.to_csv().starts_with("family,x,lhs,rhs,ratio\nwainger,"));
    }

    #[test]
    fn s12_rejects_eps_outside_the_plateau() {
        assert!(family_s12(1.0 / 8.0, 2.0, 2.0, 1.0, 0.5, &S12Config::standard()).is_err());
    }

    #[test]
    fn closed_form_at_small_eps() {
        let c = closed_form_check(1.0 / 64.0, 2.0, 2.0, 600.0).unwrap();
        assert!(c.factor_err < 1e-8, "{c:?}");
        assert!(c.full_err.unwrap() < 1e-8, "{c:?}");
    }

    #[test]
    fn s12_ratio_ignores_a_unimodular_factor() {
        let cfg = S12Config::standard();
        let eps = 1.0 / 64.0;
        let grid = eps_grid(eps, cfg.wrap).unwrap();
        let sigma = eps_symbol(eps);
        let (fh, gh) = eps_inputs(grid, eps, 2.0, 2.0, [3.0, -5.0]);
        let t1 = lp_norm(&apply_hat(&sigma, &fh, &gh).unwrap(), 1.0).unwrap().value;
        let fh2 = fh.scale(C64::from_polar(1.0, 0.7));
        let t2 = lp_norm(&apply_hat(&sigma, &fh2, &gh).unwrap(), 1.0).unwrap().value;
        let n1 = lp_norm(&fh.idft().unwrap(), 2.0).unwrap().value;
        let n2 = lp_norm(&fh2.idft().unwrap(), 2.0).unwrap().value;
        assert!((t1 / n1 - t2 / n2).abs() <= 1e-12 * t1 / n1);
    }

    #[test]
    fn wainger_truncation_and_damping() {
        assert!(matches!(wainger(0.5, 1.0, 1.0, 4.0, Some(5)), Err(Error::Truncation(_))));
        let (_, n) = wainger(0.5, 0.7, 4.0, 4.0, None).unwrap();
        let grid = GridSpec::with_extent(1, 2.0 * PI, 1024).unwrap();
        let c = (-4.0f64).exp();
        let ones = Field::from_fn(grid, |x| C64::new(2.0 * c * (x[0] + 1.0).cos() * wainger_phi(x[0]), 0.0));
        let one_terms = lp_norm(&ones, 4.0).unwrap().value;
        assert!(n.value <= 1.25 * one_terms && n.value >= 0.8 * one_terms, "{} {}", n.value, one_terms);
    }

    #[test]
    fn wainger_matches_direct_series() {
        let (f, _) = wainger(0.5, 0.8, 0.5, 2.0, None).unwrap();
        let g = *f.grid();
        let k = k_cut_for(0.5) as i64;
        for i in [0, g.len() / 3, g.len() / 2 + 7] {
            let x = g.coord(i);
            let mut acc = C64::new(0.0, 0.0);
            for kk in (-k..=k).filter(|&v| v != 0) {
                let a = kk.unsigned_abs() as f64;
                acc += C64::from_polar((-0.5 * a).exp() * a.powf(-0.8), a.sqrt() + kk as f64 * x);
            }
            assert!((f.samples()[i] - acc * wainger_phi(x)).norm() < 1e-10);
        }
    }

    #[test]
    fn s0_computed_matches_closed_and_decreases_in_t() {
        let pr = S0Params { a1: 0.5, a2: 0.5, b1: 0.6, b2: 0.6, m: 0.0, s0: 2.0, r: 1.0 };
        let a = family_s0(&pr, 0.25).unwrap();
        let b = family_s0(&pr, 0.125).unwrap();
        assert!(a.rel_err() < 1e-9 && b.rel_err() < 1e-9, "{a:?} {b:?}");
        assert!(b.double_sum > a.double_sum);
        assert!(b.diagonal_sum > a.diagonal_sum);
    }

    #[test]
    fn transfer_rejects_rho_zero() {
        let cfg = BsConfig::standard(1);
        assert!(dilation_transfer(&suite_symbol(-0.5), 0.0, -0.5, 0.0, [0.5; 3], &[1, 2], 4, &cfg).is_err());
    }

    #[test]
    fn ell_zero_piece_is_the_first_dyadic_piece() {
        let sigma = suite_symbol(-0.5);
        let fam = BsConfig::standard(1).family;
        let p = dilated_piece(&sigma, 0, 0.5, fam).unwrap();
        for (x, a, b) in [(0.3, 0.5, -1.0), (2.0, 1.5, 0.2)] {
            let want = sigma.eval(&[x], &[a], &[b]) * fam.piece(0, f64::hypot(a, b));
            assert!((p.eval(&[x], &[a], &[b]) - want).norm() < 1e-15);
        }
    }
}
