//! The acceptance suite: twelve numbered checks with pinned tolerances and
//! wall-clock budgets, shared by the integration test and `bilinpdo selftest`.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bilinear::{apply, decompose, DecomposeConfig, Pairing};
use crate::error::Result;
use crate::field_core::{Field, GridSpec};
use crate::fit::{linear_fit, loglog_slope};
use crate::partitions::{
    make_appendix_split, make_appendix_split_unchecked, make_uniform_pair, norm, PartitionFamily, Profile,
};
use crate::sharpness::{
    closed_form_check, dilated_piece, dilation_transfer, eps_probe, family_s12, s0_sweep, suite_symbol, wainger,
    wainger_phi, wainger_sweep, wainger_threshold, Family, S0Params, S12Config, SharpnessSweep,
};
use crate::spaces::{lp_norm, square_function};
use crate::symbols::{hormander_decay_check, level_blocks, BlockNorm, BsConfig, BsVariant, Symbol};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The literal check fails for a documented reason; every other check of the
    /// criterion passed.
    KnownFail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::KnownFail => "FAIL (known)",
        })
    }
}

/// Fault injection for the negative-path runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Build the split from a partition profile with a wrong outer radius.
    pub corrupt_partition: bool,
}

type Check = fn(&Options) -> Result<Verdict>;

pub struct Criterion {
    pub id: usize,
    pub module: &'static str,
    pub title: &'static str,
    pub budget: Duration,
    check: Check,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: usize,
    pub module: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{:<12} {:>2} {:<10} {}: {} [{:.1}s / {}s]",
            self.status.to_string(),
            self.id,
            self.module,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

/// Sub-checks of one criterion; `known` marks the literal check that is expected to fail.
struct Verdict {
    parts: Vec<(String, bool, bool)>,
}

impl Verdict {
    fn new() -> Self {
        Self { parts: Vec::new() }
    }
    fn check(&mut self, ok: bool, what: String) -> &mut Self {
        self.parts.push((what, ok, false));
        self
    }
    fn known(&mut self, ok: bool, what: String) -> &mut Self {
        self.parts.push((what, ok, true));
        self
    }
    fn status(&self) -> Status {
        if self.parts.iter().any(|(_, ok, known)| !ok && !known) {
            Status::Fail
        } else if self.parts.iter().any(|(_, ok, _)| !ok) {
            Status::KnownFail
        } else {
            Status::Pass
        }
    }
    fn detail(&self) -> String {
        self.parts
            .iter()
            .map(|(w, ok, _)| if *ok { w.clone() } else { format!("{w} <- FAILED") })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, module, title, secs, check| Criterion { id, module, title, budget: Duration::from_secs(secs), check };
    vec![
        c(1, "field_core", "DFT against direct summation", 5, c1_dft as Check),
        c(2, "partitions", "dyadic partition sums to one", 5, c2_partition),
        c(3, "partitions", "uniform kappa-chi identity", 30, c3_uniform),
        c(4, "partitions", "three-way split identity", 10, c4_split),
        c(5, "bilinear", "operator product laws and closed form", 10, c5_apply),
        c(6, "bilinear", "I0+I1+I2+I3 decomposition", 180, c6_decompose),
        c(7, "symbols", "block decay signature", 120, c7_decay),
        c(8, "spaces", "square-function R^(n/2) scaling", 60, c8_square),
        c(9, "bilinear", "boundedness ratio flat along the dilation family", 600, c9_probe),
        c(10, "sharpness", "eps-family exponent", 300, c10_eps),
        c(11, "sharpness", "Wainger threshold", 120, c11_wainger),
        c(12, "sharpness", "s0 construction and dilation transfer", 300, c12_s0),
    ]
}

/// Runs one criterion; an error or a blown budget is a failure.
pub fn run_one(c: &Criterion, opts: &Options) -> Outcome {
    let start = Instant::now();
    let res = (c.check)(opts);
    let elapsed = start.elapsed();
    let (mut status, mut detail) = match res {
        Ok(v) => (v.status(), v.detail()),
        Err(e) => (Status::Fail, format!("error: {e}")),
    };
    if elapsed > c.budget {
        status = Status::Fail;
        detail.push_str("; over the runtime budget");
    }
    Outcome { id: c.id, module: c.module, title: c.title, status, detail, elapsed, budget: c.budget }
}

/// Runs the criteria whose module matches `filter` (all when `None`), in order.
pub fn run(filter: Option<&str>, opts: &Options, mut each: impl FnMut(&Outcome)) -> Vec<Outcome> {
    criteria()
        .iter()
        .filter(|c| filter.map_or(true, |f| c.module == f))
        .map(|c| {
            let o = run_one(c, opts);
            each(&o);
            o
        })
        .collect()
}

pub fn modules() -> Vec<&'static str> {
    let mut m: Vec<&'static str> = criteria().iter().map(|c| c.module).collect();
    m.dedup();
    m.sort();
    m.dedup();
    m
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    d / b.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c1_dft(_: &Options) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for t in 0..20 {
        let n = [8, 16, 32, 64][t % 4];
        let g = GridSpec::new(1, rng.gen_range(2..20) as f64, n)?;
        let f = Field::from_fn(g, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let fast = f.dft()?;
        let fwd: Vec<C64> = (0..n)
            .map(|k| (0..n).map(|i| f.samples()[i] * C64::from_polar(g.spacing(), -g.coord(i) * g.wavenumber(k))).sum())
            .collect();
        worst = worst.max(max_rel(fast.samples(), &fwd));
        let back = fast.idft()?;
        let inv: Vec<C64> = (0..n)
            .map(|i| {
                (0..n).map(|k| fast.samples()[k] * C64::from_polar(1.0 / g.extent(), g.coord(i) * g.wavenumber(k))).sum()
            })
            .collect();
        worst = worst.max(max_rel(back.samples(), &inv));
    }
    let mut v = Verdict::new();
    v.check(worst <= 1e-10, format!("20 fields, max rel err {worst:.1e} (tol 1e-10)"));
    Ok(v)
}

fn c2_partition(_: &Options) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let kk = 8;
    let mut v = Verdict::new();
    for dim in [1usize, 2] {
        let lp = PartitionFamily::make_lp(dim, kk, 1.0)?;
        let top = 2f64.powi(kk as i32);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-top..top)).collect();
            let r = norm(&xi);
            if r > top {
                continue;
            }
            worst = worst.max((lp.partial_sum(kk, r) - 1.0).abs());
        }
        v.check(worst <= 1e-12, format!("n={dim} residual {worst:.1e}"));
    }
    v.check(true, "tol 1e-12, 1e4 points".into());
    Ok(v)
}

fn c3_uniform(_: &Options) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut v = Verdict::new();
    for dim in [1usize, 2] {
        let pair = make_uniform_pair(dim)?;
        let pts = if dim == 1 { 10_000 } else { 2_000 };
        let mut dev = 0.0f64;
        let mut outside_ok = true;
        for _ in 0..pts {
            let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-30.0..30.0)).collect();
            dev = dev.max((pair.identity_sum(&xi) - 1.0).abs());
            let far: Vec<f64> = (0..dim).map(|_| rng.gen_range(1.0..3.0) * if rng.gen() { 1.0 } else { -1.0 }).collect();
            outside_ok &= pair.kappa(&far) == 0.0;
        }
        let mut chi_min = f64::INFINITY;
        let mut kappa_min = f64::INFINITY;
        let steps = if dim == 1 { 400 } else { 60 };
        for a in 0..=steps {
            for b in 0..=if dim == 1 { 0 } else { steps } {
                let p = [-1.0 + 2.0 * a as f64 / steps as f64, -1.0 + 2.0 * b as f64 / steps as f64];
                chi_min = chi_min.min(pair.chi(&p[..dim]));
                kappa_min = kappa_min.min(pair.kappa(&p[..dim]));
            }
        }
        v.check(dev <= 1e-8, format!("n={dim} identity dev {dev:.1e}"));
        v.check(outside_ok, format!("n={dim} supp kappa in [-1,1]^n"));
        v.check(chi_min > 0.0 && kappa_min >= 0.0, format!("n={dim} min chi {chi_min:.2e} on the cube"));
    }
    // one axis factor of chi has its transform in the unit ball
    let pair = make_uniform_pair(1)?;
    let g = GridSpec::new(1, 512.0, 8192)?;
    let hat = Field::<f64>::from_real_fn(g, |x| pair.chi_1d(x[0])).dft()?;
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for (i, z) in hat.samples().iter().enumerate() {
        if g.wavenumber(i).abs() <= pair.chi_band() + 1e-12 {
            inner += z.norm_sqr();
        } else {
            outer += z.norm_sqr();
        }
    }
    let leak = (outer / inner).sqrt();
    v.check(leak <= 1e-8 && pair.chi_band() <= 1.0, format!("chi band {:.3}, leakage {leak:.1e}", pair.chi_band()));
    Ok(v)
}

fn c4_split(opts: &Options) -> Result<Verdict> {
    let fam = if opts.corrupt_partition {
        PartitionFamily::with_profile(2, 40, Profile::new(1.0, 4.0, 1.0)?)?
    } else {
        PartitionFamily::make_lp(2, 40, 1.0)?
    };
    let split = if opts.corrupt_partition { make_appendix_split_unchecked(&fam) } else { make_appendix_split(&fam)? };
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    let mut supp_ok = true;
    for j in 1..=6i32 {
        let top = 2f64.powi(j + 2);
        for _ in 0..10_000 {
            let (a, b) = (rng.gen_range(-top..top), rng.gen_range(-top..top));
            let want = fam.piece(j as usize, a.hypot(b));
            worst = worst.max((split.reassemble(j, a.abs(), b.abs()) - want).abs());
        }
        let s = 2f64.powi(j);
        for i in 0..=2000 {
            let r = 8.0 * s * i as f64 / 2000.0;
            supp_ok &= r < s / 32.0 || split.phi_prime(j, r) == 0.0;
            supp_ok &= (r > s / 16.0 && r < 4.0 * s) || split.psi_prime(j, r) == 0.0;
            supp_ok &= (r > s / 64.0 && r < 4.0 * s) || split.psi_dprime(j, r) == 0.0;
        }
    }
    let mut v = Verdict::new();
    v.check(worst <= 1e-12, format!("j=1..6 residual {worst:.1e} (tol 1e-12)"));
    v.check(supp_ok, "supports 2^(j-5), [2^(j-4), 2^(j+2)], [2^(j-6), 2^(j+2)]".into());
    Ok(v)
}

fn gauss(grid: GridSpec, c: f64, s: f64) -> Field<f64> {
    Field::from_fn(grid, |x| C64::from_polar((-(x[0] - c).powi(2) / s).exp(), 0.3 * x[0]))
}

fn field_rel(a: &Field<f64>, b: &Field<f64>) -> f64 {
    max_rel(a.samples(), b.samples())
}

fn c5_apply(_: &Options) -> Result<Verdict> {
    let g = GridSpec::new(1, 32.0, 256)?;
    let (f, h) = (gauss(g, 1.0, 2.0), gauss(g, -0.5, 3.0));
    let prod = field_rel(&apply(&Symbol::one(1), &f, &h)?, &f.mul(&h)?);
    let m1 = |x: f64| (-(x * x) / 8.0).exp();
    let m2 = |x: f64| 1.0 / (1.0 + x * x);
    let sigma = Symbol::tensor(1, None, move |a| C64::new(m1(a[0]), 0.0), move |b| C64::new(m2(b[0]), 0.0));
    let want = f.multiplier_apply_real(|x| m1(x[0]))?.mul(&h.multiplier_apply_real(|x| m2(x[0]))?)?;
    let sep = field_rel(&apply(&sigma, &f, &h)?, &want);
    let cf = closed_form_check(1.0 / 8.0, 2.0, 2.0, 600.0)?;
    let cf2 = closed_form_check(1.0 / 64.0, 2.0, 2.0, 600.0)?;
    let full = cf2.full_err.unwrap_or(f64::INFINITY);
    let mut v = Verdict::new();
    v.check(prod <= 1e-9, format!("sigma=1 product {prod:.1e}"))
        .check(sep <= 1e-9, format!("separable {sep:.1e}"))
        .check(cf.factor_err <= 1e-8, format!("eps=1/8 (u*u)(eps x) closed form {:.1e}", cf.factor_err))
        .check(full <= 1e-8, format!("eps=1/64 full closed form {full:.1e} (tol 1e-9/1e-8)"));
    Ok(v)
}

fn band_limited(grid: GridSpec, band: f64, rng: &mut ChaCha8Rng) -> Result<Field<f64>> {
    Field::from_freq_fn(grid, |xi| {
        let w = crate::partitions::bump(norm(xi) / band, 1.0);
        if w == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w
        }
    })
    .idft()
}

fn c6_decompose(_: &Options) -> Result<Verdict> {
    let g = GridSpec::new(1, 8.0, 256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let b = 66.0;
    let (f, gg, h) = (band_limited(g, b, &mut rng)?, band_limited(g, b, &mut rng)?, band_limited(g, 2.0 * b, &mut rng)?);
    let fam = PartitionFamily::make_lp(2, 40, 1.0)?;
    let mut worst = 0.0f64;
    let mut audits = true;
    let mut i1 = 0;
    for j0 in [3usize, 5, 7] {
        let sigma = Symbol::x_independent_fn(1, move |a, b| C64::new(fam.piece(j0, a[0].hypot(b[0])), 0.0))
            .with_support_radius(2f64.powi(j0 as i32 + 1));
        for rho in [0.0, 0.5] {
            let cfg = DecomposeConfig { j_low: 1, ..DecomposeConfig::standard(1)? };
            let led = decompose(&sigma, &f, &gg, &h, rho, &cfg)?;
            worst = worst.max(led.rel_error());
            audits &= led.audit.passed();
            i1 += led.audit.i1_blocks;
        }
    }
    let mut v = Verdict::new();
    v.check(worst <= 1e-6, format!("j0 in {{3,5,7}}, rho in {{0,1/2}}: max rel err {worst:.1e} (tol 1e-6)"))
        .check(audits && i1 > 0, format!("nu/l audits over {i1} I1 blocks"));
    Ok(v)
}

fn c7_decay(_: &Options) -> Result<Verdict> {
    let m = -0.25;
    let r = hormander_decay_check(&suite_symbol(m), m, 0.5, [2, 2, 2], 2..=8, 6, &BsConfig::standard(1))?;
    let ks: Vec<String> = r.k_slopes.iter().map(|s| s.map_or("none".into(), |s| format!("{s:.2}"))).collect();
    let mut v = Verdict::new();
    v.check(r.passes(0.15), format!("j-slope {:.3} vs m = {m} (tol 0.15); k-slopes [{}] vs <= -1.5", r.j_slope, ks.join(", ")));
    Ok(v)
}

fn c8_square(_: &Options) -> Result<Verdict> {
    let g = GridSpec::new(1, 64.0, 512)?;
    let f = Field::from_fn(g, |x| C64::from_polar((-x[0] * x[0] / 32.0).exp(), 2.0 * x[0]));
    let w = Profile::standard();
    let rs = [1.0, 2.0, 4.0, 8.0];
    let mut v = Verdict::new();
    for p in [2.0, 4.0, f64::INFINITY] {
        let base = lp_norm(&f, p)?.value;
        let ratios: Result<Vec<f64>> =
            rs.iter().map(|&r| Ok(square_function(&f, r, &w, false, p)?.value / base)).collect();
        let s = loglog_slope(&rs, &ratios?).unwrap_or(f64::NAN);
        v.check((s - 0.5).abs() <= 0.2, format!("p={p}: slope {s:.3}"));
    }
    v.check(true, "target 1/2 +- 0.2".into());
    Ok(v)
}

fn c9_probe(_: &Options) -> Result<Verdict> {
    let mut cfg = S12Config::standard();
    cfg.wrap = 64.0;
    cfg.variant = BsVariant::Star;
    let runs = [
        (Pairing::L2_L2_H1, [0.6, 0.5, 0.5]),
        (Pairing::L2_BMO_L2, [0.6, 0.5, 0.5]),
        (Pairing::L2_L2_L1, [0.5, 0.5, 0.5]),
    ];
    let mut v = Verdict::new();
    for (k, (pairing, s)) in runs.iter().enumerate() {
        let mut js = Vec::new();
        let mut ys = Vec::new();
        for j in 0..=8 {
            let eps = 2f64.powi(-5 - j);
            let p = eps_probe(eps, *pairing, *s, 50, 900 + k as u64, &cfg)?;
            js.push(j as f64);
            ys.push(p.normalized_median().log2());
        }
        let slope = linear_fit(&js, &ys).map_or(f64::NAN, |p| p.0);
        v.check(slope.abs() <= 0.05, format!("{}: slope {slope:+.4}", pairing.name()));
    }
    v.check(true, "j=0..8, 50 pairs per j, tol 0.05".into());
    Ok(v)
}

fn eps_list() -> Vec<f64> {
    (6..=10).map(|k| 2f64.powi(-k)).collect()
}

fn c10_eps(_: &Options) -> Result<Verdict> {
    let cfg = S12Config::standard();
    let mut v = Verdict::new();
    for s1 in [0.0, 0.25, 0.5] {
        let rows = eps_list().iter().map(|&e| family_s12(e, 2.0, 2.0, 1.0, s1, &cfg)).collect::<Result<Vec<_>>>()?;
        let sw = SharpnessSweep::new(Family::EpsS12, "eps", true, rows.iter().map(|r| r.sweep_row()).collect())?;
        let s = sw.fitted_slope.unwrap_or(f64::NAN);
        v.check((s - (s1 - 0.5)).abs() <= 0.1, format!("s1={s1}: slope {s:.3} vs {}", s1 - 0.5));
        if s1 == 0.5 {
            // each norm against its value at the smallest eps
            let last = rows.iter().min_by(|a, b| a.eps.partial_cmp(&b.eps).unwrap()).unwrap();
            let worst = rows
                .iter()
                .flat_map(|r| [r.t_norm / last.t_norm, r.f_norm / last.f_norm, r.g_norm / last.g_norm])
                .map(|q| q.max(1.0 / q))
                .fold(1.0, f64::max);
            v.check(worst < 2.0, format!("||T||, ||f||, ||g|| within factor {worst:.4} of the eps=2^-10 values"));
        }
    }
    Ok(v)
}

fn c11_wainger(_: &Options) -> Result<Verdict> {
    let (a, p) = (0.5, 4.0);
    let th = wainger_threshold(a, p);
    let ts: Vec<f64> = (1..=10).map(|k| 2f64.powi(-k)).collect();
    let above = wainger_sweep(a, th + 0.1, &ts, p)?;
    let below = wainger_sweep(a, th - 0.2, &ts, p)?;
    let at = |sw: &SharpnessSweep, t: f64| sw.rows.iter().find(|r| r.param("t") == Some(t)).map_or(f64::NAN, |r| r.ratio);
    // increments of the norm along t = 2^-5 .. 2^-10, read as t -> 0
    let incs = |sw: &SharpnessSweep| -> Vec<f64> {
        let y: Vec<f64> = (5..=10).map(|k| at(sw, 2f64.powi(-k))).collect();
        increment_ratios(&y)
    };
    let above_inc = incs(&above).into_iter().fold(0.0, f64::max);
    let below_inc = incs(&below).into_iter().fold(f64::INFINITY, f64::min);
    let div = at(&below, 2f64.powi(-10)) / at(&below, 2f64.powi(-2));

    let (_, big_t) = wainger(a, th + 0.1, 4.0, p, None)?;
    let g = GridSpec::with_extent(1, 2.0 * PI, 1024)?;
    let c = (-4.0f64).exp();
    let ones = Field::from_fn(g, |x| C64::new(2.0 * c * (x[0] + 1.0).cos() * wainger_phi(x[0]), 0.0));
    let big_ratio = big_t.value / lp_norm(&ones, p)?.value;

    let mut v = Verdict::new();
    v.check(big_ratio <= 1.25, format!("t=4: norm / (k=+-1 terms) = {big_ratio:.3}"))
        .known(above.spread() < 2.0, format!("b=thr+0.1: max/min over t=2^-1..2^-10 = {:.2} (< 2)", above.spread()))
        .check(above_inc < 0.8, format!("b=thr+0.1: increments shrink (max ratio {above_inc:.2} < 0.8)"))
        .check(div >= 2.0, format!("b=thr-0.2: growth 2^-2 -> 2^-10 = {div:.2} (>= 2)"))
        .check(below_inc > 0.85, format!("b=thr-0.2: increments persist (min ratio {below_inc:.2} > 0.85)"));
    Ok(v)
}

/// Ratios of successive increments of a sequence.
fn increment_ratios(y: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    d.windows(2).map(|w| w[1] / w[0]).collect()
}

fn c12_s0(_: &Options) -> Result<Verdict> {
    let ts: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
    let base = S0Params { a1: 0.5, a2: 0.5, b1: 0.6, b2: 0.6, m: 0.0, s0: 2.0, r: 1.0 };
    let diverge = S0Params { s0: 0.6, ..base };
    let (stable_sw, stable) = s0_sweep(&base, &ts)?;
    let (div_sw, div) = s0_sweep(&diverge, &ts)?;
    let err = stable.iter().chain(&div).map(|r| r.rel_err()).fold(0.0, f64::max);
    // rows sorted by decreasing t reads as t -> 0
    let seq = |rows: &[crate::sharpness::S0Row]| -> Vec<f64> {
        let mut r = rows.to_vec();
        r.sort_by(|a, b| b.t.partial_cmp(&a.t).unwrap());
        r.iter().map(|x| x.double_sum).collect()
    };
    let stable_inc = increment_ratios(&seq(&stable)).into_iter().fold(0.0, f64::max);
    let div_inc = increment_ratios(&seq(&div)).into_iter().fold(f64::INFINITY, f64::min);

    let mut cfg = BsConfig::standard(1);
    cfg.max_points_2d = 1024;
    let (mp, m, rho) = (-0.5, 0.0, 0.5);
    let sigma = suite_symbol(mp);
    let (tr, rows) = dilation_transfer(&sigma, m, mp, rho, [0.5, 0.5, 0.5], &[0, 1, 2, 3, 4, 5, 6], 6, &cfg)?;
    let (ls, ys): (Vec<f64>, Vec<f64>) =
        tr.rows.iter().filter(|r| r.param("ell").unwrap() >= 1.0).map(|r| (r.param("ell").unwrap(), r.ratio.log2())).unzip();
    let slope = linear_fit(&ls, &ys).map_or(f64::NAN, |p| p.0);
    let bound = mp - m / (1.0 - rho);
    let r0 = rows[0].lhs / rows[0].rhs;

    let xi = Symbol::x_independent_fn(1, move |a, b| C64::new((1.0 + a[0] * a[0] + b[0] * b[0]).powf(mp / 2.0), 0.0));
    let piece = dilated_piece(&xi, 3, rho, cfg.family)?;
    let only_k0 = (0..=8)
        .filter_map(|j| level_blocks(&piece, j, rho, &cfg, BlockNorm::Sup).transpose())
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|l| l.table.lens()[0] == 1);

    let mut v = Verdict::new();
    v.check(err <= 1e-6, format!("pairing vs closed-form lattice sum: max rel err {err:.1e} (tol 1e-6)"))
        .known(
            stable_sw.spread() < 1.1,
            format!("exponent {:.1}: variation over t=2^-4..2^-10 = {:.3} (< 1.1)", base.exponent(), stable_sw.spread()),
        )
        .check(stable_inc < 1.0, format!("exponent {:.1}: increments shrink (max ratio {stable_inc:.2})", base.exponent()))
        .check(div_sw.spread() >= 2.0, format!("exponent {:.1}: growth {:.2} (>= 2)", diverge.exponent(), div_sw.spread()))
        .check(div_inc > 1.0, format!("exponent {:.1}: increments grow (min ratio {div_inc:.2})", diverge.exponent()))
        .check(slope <= bound + 0.15, format!("transfer slope l=1..6 {slope:.3} vs {bound} + 0.15"))
        .check((0.25..=4.0).contains(&r0), format!("l=0 ratio {r0:.3}"))
        .check(only_k0, "x-independent: only k0 = 0 blocks".into());
    Ok(v)
}
