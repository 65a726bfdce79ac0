//! `T_sigma(f, g)(x) = (2 pi)^{-2n} \int\int e^{i x.(xi+eta)} sigma(x, xi, eta) f^(xi) g^(eta)`
//! on the lattice, the dual form `\int T_sigma(f, g) h` and its block decomposition.
//!
//! On the lattice the double integral becomes `T^{-2n} sum_k sum_l`. For the periodic
//! samples `x_i` the frequency `xi_k + eta_l` aliases exactly onto the lattice, so the
//! `x`-independent path folds `k + l` modulo `N` and finishes with one inverse transform.

use crate::error::{invalid, Error, Result};
use crate::field_core::{Field, GridSpec, Space};
use crate::partitions::{AppendixSplit, PartitionFamily, UniformPair};
use crate::scalar::{ksum_c, Real};
use crate::spaces::{bmo_norms, h1_norm, lp_norm};
use crate::symbols::{Form, Symbol};
use crate::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_pair(f: &Field<f64>, g: &Field<f64>) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", f.grid(), g.grid())));
    }
    if f.space() != g.space() {
        return Err(Error::Structural("inputs live in different spaces".into()));
    }
    Ok(())
}

const EDGE_TOL: f64 = 1e-10;

/// `T_sigma(f, g)` for physical fields. Fails with [`Error::Truncation`] when either
/// spectrum reaches the edge of the lattice; see [`apply_truncated`].
pub fn apply(sigma: &Symbol, f: &Field<f64>, g: &Field<f64>) -> Result<Field<f64>> {
    check_pair(f, g)?;
    let (fh, gh) = (f.dft()?, g.dft()?);
    let edge = fh.spectral_edge().max(gh.spectral_edge());
    if edge > EDGE_TOL {
        return Err(Error::Truncation(format!("input spectrum at the lattice edge: {edge:e} of peak")));
    }
    apply_hat(sigma, &fh, &gh)
}

/// [`apply`] without the band-limit check; returns the observed spectral edge ratio.
pub fn apply_truncated(sigma: &Symbol, f: &Field<f64>, g: &Field<f64>) -> Result<(Field<f64>, f64)> {
    check_pair(f, g)?;
    let (fh, gh) = (f.dft()?, g.dft()?);
    let edge = fh.spectral_edge().max(gh.spectral_edge());
    Ok((apply_hat(sigma, &fh, &gh)?, edge))
}

fn nonzero(hat: &Field<f64>) -> Vec<(usize, C64)> {
    hat.samples().iter().copied().enumerate().filter(|(_, z)| *z != zero()).collect()
}

/// `T_sigma` from lattice spectra. Exact zeros in the spectra are skipped.
pub fn apply_hat(sigma: &Symbol, fh: &Field<f64>, gh: &Field<f64>) -> Result<Field<f64>> {
    check_pair(fh, gh)?;
    if fh.space() != Space::Frequency {
        return Err(Error::Structural("apply_hat expects frequency-space inputs".into()));
    }
    let grid = *fh.grid();
    if sigma.dim() != grid.dim() {
        return Err(Error::Structural(format!("symbol dim {} on a {}-d grid", sigma.dim(), grid.dim())));
    }
    let (fs, gs) = (nonzero(fh), nonzero(gh));
    match sigma.form() {
        Form::General(_) => Ok(direct(sigma, &grid, &fs, &gs)),
        Form::Split { x, .. } | Form::Tensor { x, .. } => {
            let t = folded(sigma, &grid, &fs, &gs)?;
            Ok(match x {
                None => t,
                Some(a) => {
                    let d = grid.dim();
                    let mut t = t;
                    for (i, z) in t.samples_mut().iter_mut().enumerate() {
                        *z *= a(&grid.point(i)[..d]);
                    }
                    t
                }
            })
        }
    }
}

/// Index of `xi_k + eta_l` on the lattice, folded modulo `N` per axis.
fn fold(grid: &GridSpec, k: usize, l: usize) -> usize {
    let n = grid.points_per_axis();
    let h = n / 2;
    let [a1, a2] = grid.unravel(k);
    let [b1, b2] = grid.unravel(l);
    let s1 = (a1 + b1 + h) % n;
    if grid.dim() == 1 {
        s1
    } else {
        s1 * n + (a2 + b2 + h) % n
    }
}

fn folded(sigma: &Symbol, grid: &GridSpec, fs: &[(usize, C64)], gs: &[(usize, C64)]) -> Result<Field<f64>> {
    let d = grid.dim();
    let mut acc = vec![zero(); grid.len()];
    for &(k, fk) in fs {
        let xi = grid.freq(k);
        for &(l, gl) in gs {
            let eta = grid.freq(l);
            let s = sigma.freq_part(&xi[..d], &eta[..d]).unwrap();
            acc[fold(grid, k, l)] += s * fk * gl;
        }
    }
    // idft supplies T^{-n}; the double sum needs T^{-2n}
    let c = grid.extent().powi(-(d as i32));
    for z in acc.iter_mut() {
        *z *= c;
    }
    Field::from_samples(*grid, Space::Frequency, acc)?.idft()
}

fn direct(sigma: &Symbol, grid: &GridSpec, fs: &[(usize, C64)], gs: &[(usize, C64)]) -> Field<f64> {
    let d = grid.dim();
    let c = grid.extent().powi(-2 * d as i32);
    let data: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let mut acc = zero();
            for &(k, fk) in fs {
                let xi = grid.freq(k);
                let mut inner = zero();
                for &(l, gl) in gs {
                    let eta = grid.freq(l);
                    let ph: f64 = (0..d).map(|a| x[a] * (xi[a] + eta[a])).sum();
                    inner += C64::from_polar(1.0, ph) * sigma.eval(&x[..d], &xi[..d], &eta[..d]) * gl;
                }
                acc += inner * fk;
            }
            acc * c
        })
        .collect();
    Field::from_samples(*grid, Space::Physical, data).unwrap()
}

/// Riemann sum of `T_sigma(f, g) h`.
pub fn dual_pairing(sigma: &Symbol, f: &Field<f64>, g: &Field<f64>, h: &Field<f64>) -> Result<C64> {
    check_pair(f, h)?;
    let t = apply(sigma, f, g)?;
    pair_with(&t, h)
}

fn pair_with(t: &Field<f64>, h: &Field<f64>) -> Result<C64> {
    check_pair(t, h)?;
    let w = t.grid().cell_volume();
    Ok(ksum_c(t.samples().iter().zip(h.samples()).map(|(a, b)| a * b)) * w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartTag {
    I0,
    I1,
    I2,
    I3,
}

impl PartTag {
    pub const ALL: [PartTag; 4] = [PartTag::I0, PartTag::I1, PartTag::I2, PartTag::I3];
    pub fn index(&self) -> usize {
        *self as usize
    }
    pub fn name(&self) -> &'static str {
        ["I0", "I1", "I2", "I3"][self.index()]
    }
}

/// One block `I_{j,k,nu}`; `nu` is `None` when blocks were summed over `nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerEntry {
    pub tag: PartTag,
    pub j: usize,
    /// Rescale exponent actually used, `round(j rho)`.
    pub e: i32,
    pub k: [usize; 3],
    pub nu: Option<[i64; 2]>,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualFormLedger {
    pub direct_value: C64,
    pub parts: [C64; 4],
    pub block_values: Vec<LedgerEntry>,
    pub truncation: Vec<(&'static str, f64)>,
    pub audit: SupportAudit,
}

impl DualFormLedger {
    pub fn total(&self) -> C64 {
        ksum_c(self.parts.iter().copied())
    }

    pub fn rel_error(&self) -> f64 {
        (self.total() - self.direct_value).norm() / self.direct_value.norm()
    }

    /// Sum of the block values carrying `tag`.
    pub fn tag_sum(&self, tag: PartTag) -> C64 {
        ksum_c(self.block_values.iter().filter(|b| b.tag == tag).map(|b| b.value))
    }

    /// Total regrouped by `j` first.
    pub fn total_by_j(&self) -> C64 {
        let jm = self.block_values.iter().map(|b| b.j).max().unwrap_or(0);
        ksum_c((0..=jm).map(|j| ksum_c(self.block_values.iter().filter(|b| b.j == j).map(|b| b.value))))
    }
}

/// Outcome of the support audits on the `I1` blocks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupportAudit {
    pub i1_blocks: usize,
    pub nu_violations: usize,
    pub ell_checked: usize,
    pub ell_violations: usize,
    pub messages: Vec<String>,
}

impl SupportAudit {
    pub fn passed(&self) -> bool {
        self.nu_violations == 0 && self.ell_violations == 0
    }
}

#[derive(Clone, Debug)]
pub struct DecomposeConfig {
    /// `Psi_j` on `R^{2n}`; the standard radii are required by the split.
    pub family: PartitionFamily,
    pub split: AppendixSplit,
    pub pair: UniformPair,
    /// `psi_k` acting on `xi` and `eta` of the localised symbol, and `Delta_l` in the audit.
    pub lp: PartitionFamily,
    /// Levels `j <= j_low` route to `I0`.
    pub j_low: usize,
    pub keep_blocks: bool,
}

impl DecomposeConfig {
    pub fn standard(n: usize) -> Result<Self> {
        let family = PartitionFamily::make_lp(2 * n, 40, 1.0)?;
        Ok(Self {
            split: crate::partitions::make_appendix_split(&family)?,
            family,
            pair: crate::partitions::make_uniform_pair(n)?,
            lp: PartitionFamily::make_lp(n, 40, 1.0)?,
            j_low: 8,
            keep_blocks: false,
        })
    }
}

type Mult<'a> = Box<dyn Fn(f64) -> f64 + Sync + 'a>;

fn routes<'a>(split: &'a AppendixSplit, j: usize, j_low: usize) -> Vec<(PartTag, Mult<'a>, Mult<'a>)> {
    let j = j as i32;
    if j as usize <= j_low {
        vec![(PartTag::I0, Box::new(move |r| split.low(j, r)), Box::new(move |r| split.low(j, r)))]
    } else {
        vec![
            (PartTag::I1, Box::new(move |r| split.phi_prime(j, r)), Box::new(move |r| split.psi_prime(j, r))),
            (PartTag::I2, Box::new(move |r| split.psi_prime(j, r)), Box::new(move |r| split.phi_prime(j, r))),
            (PartTag::I3, Box::new(move |r| split.psi_dprime(j, r)), Box::new(move |r| split.psi_dprime(j, r))),
        ]
    }
}

/// Per unit cell `nu`: the lattice indices in `supp kappa(. - nu)` with weight
/// `kappa chi F^` at the rescaled frequency.
fn cells(hat: &[C64], dil: &GridSpec, pair: &UniformPair) -> Vec<(i64, Vec<(usize, C64)>)> {
    let nz: Vec<usize> = (0..hat.len()).filter(|&k| hat[k] != zero()).collect();
    if nz.is_empty() {
        return Vec::new();
    }
    let lo = dil.wavenumber(nz[0]).floor() as i64 - 1;
    let hi = dil.wavenumber(*nz.last().unwrap()).ceil() as i64 + 1;
    (lo..=hi)
        .filter_map(|nu| {
            let v: Vec<(usize, C64)> = nz
                .iter()
                .filter_map(|&k| {
                    let y = dil.wavenumber(k) - nu as f64;
                    let kap = pair.kappa1(y);
                    (kap != 0.0).then(|| (k, hat[k] * kap * pair.chi_1d(y)))
                })
                .collect();
            (!v.is_empty()).then_some((nu, v))
        })
        .collect()
}

/// `I_0 + I_1 + I_2 + I_3` for an `x`-independent band-limited symbol, `n = 1`.
///
/// Each level `j` is rescaled by `2^e`, `e = round(j rho)`: the samples of `f`, `g`, `h`
/// are relabelled onto the grid of extent `2^e T`, `Delta_k` acts on the localised
/// symbol over the rescaled lattice, and the unit-cell decomposition splits both inputs.
pub fn decompose(
    sigma: &Symbol,
    f: &Field<f64>,
    g: &Field<f64>,
    h: &Field<f64>,
    rho: f64,
    cfg: &DecomposeConfig,
) -> Result<DualFormLedger> {
    check_pair(f, g)?;
    check_pair(f, h)?;
    let grid = *f.grid();
    if grid.dim() != 1 || sigma.dim() != 1 {
        return Err(Error::Unsupported("decomposition is implemented for n = 1".into()));
    }
    if !sigma.x_independent() {
        return Err(Error::Unsupported("decomposition needs an x-independent symbol".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("{rho} not in [0, 1)")));
    }
    let radius = sigma
        .freq_support_radius()
        .ok_or_else(|| invalid("sigma", "decomposition needs a band-limited symbol"))?;
    let direct_value = dual_pairing(sigma, f, g, h)?;
    let n = grid.points_per_axis();
    let (fh, gh, hh) = (f.dft()?, g.dft()?, h.dft()?);
    // pairing with h evaluates its transform at -zeta
    let h_neg: Vec<C64> = (0..n).map(|m| hh.samples()[(n - m) % n]).collect();

    let mut parts = [zero(); 4];
    let mut blocks = Vec::new();
    let mut audit = SupportAudit::default();
    let mut max_e = 0;
    let mut max_k = 0;
    let mut j = 0;
    while cfg.family.annulus(j).0 < radius {
        let e = (j as f64 * rho).round() as i32;
        max_e = max_e.max(e);
        let lam = 2f64.powi(e);
        let dil = grid.dilated(e);
        // sigma_j^rho on the rescaled lattice equals sigma_j on the original one
        let sj: Vec<C64> = (0..n * n)
            .map(|idx| {
                let (a, b) = (grid.wavenumber(idx / n), grid.wavenumber(idx % n));
                let psi = cfg.family.piece(j, a.hypot(b));
                if psi == 0.0 {
                    zero()
                } else {
                    sigma.freq_part(&[a], &[b]).unwrap() * psi
                }
            })
            .collect();
        if sj.iter().all(|z| *z == zero()) {
            j += 1;
            continue;
        }
        let kblocks = symbol_blocks(&sj, &dil, &cfg.lp)?;
        max_k = max_k.max(kblocks.len());
        let hp: Vec<C64> = h_neg.iter().map(|z| z * lam).collect();
        let jac = 1.0 / lam;
        let tp = dil.extent();
        for (tag, m1, m2) in routes(&cfg.split, j, cfg.j_low) {
            let fj: Vec<C64> = (0..n).map(|k| fh.samples()[k] * m1(grid.wavenumber(k).abs()) * lam).collect();
            let gj: Vec<C64> = (0..n).map(|k| gh.samples()[k] * m2(grid.wavenumber(k).abs()) * lam).collect();
            let (cf, cg) = (cells(&fj, &dil, &cfg.pair), cells(&gj, &dil, &cfg.pair));
            let per_block: Vec<Vec<LedgerEntry>> = kblocks
                .par_iter()
                .map(|(k1, k2, b)| {
                    let mut out = Vec::new();
                    let mut sub = Vec::new();
                    for (nu1, c1) in &cf {
                        for (nu2, c2) in &cg {
                            let mut acc = zero();
                            for &(k, fk) in c1 {
                                let mut inner = zero();
                                for &(l, gl) in c2 {
                                    inner += b[k * n + l] * gl * hp[(k + l + n / 2) % n];
                                }
                                acc += inner * fk;
                            }
                            let value = acc * (jac / (tp * tp));
                            if cfg.keep_blocks {
                                out.push(LedgerEntry { tag, j, e, k: [0, *k1, *k2], nu: Some([*nu1, *nu2]), value });
                            } else {
                                sub.push(value);
                            }
                        }
                    }
                    if !cfg.keep_blocks {
                        out.push(LedgerEntry { tag, j, e, k: [0, *k1, *k2], nu: None, value: ksum_c(sub) });
                    }
                    out
                })
                .collect();
            let level: Vec<LedgerEntry> = per_block.into_iter().flatten().collect();
            parts[tag.index()] += ksum_c(level.iter().map(|b| b.value));
            if tag == PartTag::I1 {
                audit_i1(&mut audit, j, e, &fj, &dil, &cf, &cg, &cfg.lp);
            }
            blocks.extend(level);
        }
        j += 1;
    }
    Ok(DualFormLedger {
        direct_value,
        parts,
        block_values: blocks,
        truncation: vec![
            ("T", grid.extent()),
            ("N", n as f64),
            ("j_max", j.saturating_sub(1) as f64),
            ("j_low", cfg.j_low as f64),
            ("e_max", max_e as f64),
            ("k_blocks", max_k as f64),
        ],
        audit,
    })
}

/// `Delta_{k1}(D_xi) Delta_{k2}(D_eta)` of the sampled localised symbol. The rescaled
/// lattice is treated as a periodic box of extent `2 pi N / T'`.
fn symbol_blocks(sj: &[C64], dil: &GridSpec, lp: &PartitionFamily) -> Result<Vec<(usize, usize, Vec<C64>)>> {
    let n = dil.points_per_axis();
    let box_grid = GridSpec::with_extent(2, 2.0 * std::f64::consts::PI * n as f64 / dil.extent(), n)?;
    let hat = Field::from_samples(box_grid, Space::Physical, sj.to_vec())?.dft()?;
    let top = box_grid.nyquist();
    let mut kk = 0;
    while lp.annulus(kk).0 <= top {
        kk += 1;
    }
    let ks: Vec<(usize, usize)> = (0..kk).flat_map(|a| (0..kk).map(move |b| (a, b))).collect();
    ks.into_par_iter()
        .map(|(k1, k2)| {
            let mut b = hat.clone();
            b.mul_by_freq_fn(|y| C64::new(lp.piece(k1, y[0].abs()) * lp.piece(k2, y[1].abs()), 0.0));
            Ok((k1, k2, b.idft()?.into_samples()))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn audit_i1(
    audit: &mut SupportAudit,
    j: usize,
    e: i32,
    fj: &[C64],
    dil: &GridSpec,
    cf: &[(i64, Vec<(usize, C64)>)],
    cg: &[(i64, Vec<(usize, C64)>)],
    lp: &PartitionFamily,
) {
    let shell = j as i32 - e;
    let nu1_cap = 2f64.powi(shell - 5) + 1.0;
    let nu2_cap = 2f64.powi(shell + 2) + 1.0;
    for (nu1, _) in cf {
        for (nu2, _) in cg {
            audit.i1_blocks += 1;
            if (*nu1 as f64).abs() > nu1_cap || (*nu2 as f64).abs() > nu2_cap {
                audit.nu_violations += 1;
                audit.messages.push(format!("j={j}: nu=({nu1},{nu2}) outside ({nu1_cap},{nu2_cap})"));
            }
        }
    }
    // Delta_l pieces of the rescaled first input
    let peak = fj.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    if peak == 0.0 {
        return;
    }
    let mut ell_max = None;
    for l in 0..lp.k_max() {
        if lp.annulus(l).0 > dil.nyquist() {
            break;
        }
        let live = fj
            .iter()
            .enumerate()
            .any(|(k, z)| *z != zero() && lp.piece(l, dil.wavenumber(k).abs()) != 0.0);
        if live {
            audit.ell_checked += 1;
            ell_max = Some(l);
            if l >= 1 && l as i32 > shell - 4 {
                audit.ell_violations += 1;
                audit.messages.push(format!("j={j}: Delta_{l} f_j nonzero beyond j(1-rho)-4 = {}", shell - 4));
            }
        }
    }
    if let Some(l) = ell_max {
        let cap = 2f64.powi(l as i32 + 1) + 1.0;
        for (nu1, _) in cf {
            if (*nu1 as f64).abs() > cap {
                audit.nu_violations += 1;
                audit.messages.push(format!("j={j}: nu1={nu1} exceeds 2^(l+1)+1 with l={l}"));
            }
        }
    }
}

/// Norm applied to one input of the probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InNorm {
    Lp(f64),
    Bmo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutNorm {
    Lp(f64),
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub f: InNorm,
    pub g: InNorm,
    pub out: OutNorm,
}

impl Pairing {
    pub const L2_L2_H1: Pairing = Pairing { f: InNorm::Lp(2.0), g: InNorm::Lp(2.0), out: OutNorm::H1 };
    pub const L2_BMO_L2: Pairing = Pairing { f: InNorm::Lp(2.0), g: InNorm::Bmo, out: OutNorm::Lp(2.0) };
    pub const L2_L2_L1: Pairing = Pairing { f: InNorm::Lp(2.0), g: InNorm::Lp(2.0), out: OutNorm::Lp(1.0) };

    pub fn name(&self) -> String {
        let i = |n: InNorm| match n {
            InNorm::Lp(p) => format!("L{p}"),
            InNorm::Bmo => "bmo".into(),
        };
        let o = match self.out {
            OutNorm::Lp(p) => format!("L{p}"),
            OutNorm::H1 => "h1".into(),
        };
        format!("{}x{}->{}", i(self.f), i(self.g), o)
    }
}

fn in_norm(f: &Field<f64>, n: InNorm) -> Result<f64> {
    Ok(match n {
        InNorm::Lp(p) => lp_norm(f, p)?.value,
        InNorm::Bmo => bmo_norms(f)?.0.value,
    })
}

fn out_norm(f: &Field<f64>, n: OutNorm) -> Result<f64> {
    Ok(match n {
        OutNorm::Lp(p) => lp_norm(f, p)?.value,
        OutNorm::H1 => h1_norm(f, 4)?.value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeStats {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl ProbeStats {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let mut s = ratios.clone();
        s.sort_by(f64::total_cmp);
        Self {
            max: s.last().copied().unwrap_or(0.0),
            median: quantile(&s, 0.5),
            q10: quantile(&s, 0.1),
            q90: quantile(&s, 0.9),
            ratios,
        }
    }
}

/// `||T_sigma(f, g)||_out / (||f|| ||g||)` over randomised inputs.
///
/// `sampler` draws the lattice spectra `(f^, g^)`; trial `t` uses stream `t` of a
/// ChaCha generator seeded with `seed`, so results do not depend on scheduling.
/// Draws where either input has zero norm are repeated.
pub fn ratio_probe<S>(sigma: &Symbol, sampler: S, pairing: Pairing, trials: usize, seed: u64) -> Result<ProbeStats>
where
    S: Fn(&mut ChaCha8Rng) -> (Field<f64>, Field<f64>) + Sync,
{
    let ratios: Result<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            for _ in 0..64 {
                let (fh, gh) = sampler(&mut rng);
                let (f, g) = (fh.idft()?, gh.idft()?);
                let nf = in_norm(&f, pairing.f)?;
                let ng = in_norm(&g, pairing.g)?;
                if nf == 0.0 || ng == 0.0 {
                    continue;
                }
                let tfg = apply_hat(sigma, &fh, &gh)?;
                return Ok(out_norm(&tfg, pairing.out)? / (nf * ng));
            }
            Err(invalid("sampler", "keeps producing zero-norm inputs"))
        })
        .collect();
    Ok(ProbeStats::from_ratios(ratios?))
}

/// Real-valued conversion helper for callers holding `f32` fields.
pub fn widen<T: Real>(f: &Field<T>) -> Field<f64> {
    let data = f.samples().iter().map(|z| C64::new(z.re.f64(), z.im.f64())).collect();
    Field::from_samples(*f.grid(), f.space(), data).unwrap()
}
