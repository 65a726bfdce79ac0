//! Smooth partitions of unity: dyadic Littlewood-Paley families, the three-way
//! high-frequency split, and a uniform decomposition `sum_nu kappa(xi-nu) chi(xi-nu) = 1`.

use crate::error::{invalid, Result};

/// `0` for `t <= 0`, `1` for `t >= 1`, built from `exp(-a/t)`.
pub fn smooth_step(t: f64, a: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let p = (-a / t).exp();
    let q = (-a / (1.0 - t)).exp();
    p / (p + q)
}

/// `exp(-a/(1-t^2))` on `|t| < 1`, zero outside.
pub fn bump(t: f64, a: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-a / (1.0 - t * t)).exp()
    }
}

/// Radial profile equal to 1 on `r <= inner` and 0 on `r >= outer`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub inner: f64,
    pub outer: f64,
    pub sharpness: f64,
}

impl Profile {
    pub fn new(inner: f64, outer: f64, sharpness: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(invalid("profile", format!("need 0 < inner < outer, got {inner}, {outer}")));
        }
        if !(sharpness > 0.0) {
            return Err(invalid("sharpness", "must be positive"));
        }
        Ok(Self { inner, outer, sharpness })
    }

    /// Plateau on `|xi| <= 1`, support in `|xi| <= 2`.
    pub fn standard() -> Self {
        Self { inner: 1.0, outer: 2.0, sharpness: 1.0 }
    }

    /// Plateau on `|z| <= 2^{1/2-delta}`, support in `|z| <= 2^{1/2+delta}`.
    /// Its dyadic pieces make every symbol supported in the plateau a pure `j = 0` symbol.
    pub fn narrow(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(invalid("delta", format!("{delta} not in (0, 1/2)")));
        }
        Self::new(2f64.powf(0.5 - delta), 2f64.powf(0.5 + delta), 1.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((self.outer - r) / (self.outer - self.inner), self.sharpness)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dyadic family `psi_0 = phi`, `psi_k = phi(./2^k) - phi(./2^{k-1})` on `R^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionFamily {
    profile: Profile,
    k_max: usize,
    dim: usize,
}

impl PartitionFamily {
    pub fn make_lp(dim: usize, k_max: usize, sharpness: f64) -> Result<Self> {
        Self::with_profile(dim, k_max, Profile::new(1.0, 2.0, sharpness)?)
    }

    pub fn with_profile(dim: usize, k_max: usize, profile: Profile) -> Result<Self> {
        if k_max < 1 {
            return Err(invalid("k_max", "must be at least 1"));
        }
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        Ok(Self { profile, k_max, dim })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `phi(r / 2^k)`, any integer `k`.
    pub fn phi_k(&self, k: i32, r: f64) -> f64 {
        self.profile.eval(r * 2f64.powi(-k))
    }

    /// `psi_k(r)` for a radius `r = |xi|`.
    pub fn piece(&self, k: usize, r: f64) -> f64 {
        if k == 0 {
            self.phi_k(0, r)
        } else {
            let k = k as i32;
            self.phi_k(k, r) - self.phi_k(k - 1, r)
        }
    }

    pub fn piece_at(&self, k: usize, xi: &[f64]) -> f64 {
        self.piece(k, norm(xi))
    }

    /// Radii between which `psi_k` can be nonzero.
    pub fn annulus(&self, k: usize) -> (f64, f64) {
        let p = self.profile;
        if k == 0 {
            (0.0, p.outer)
        } else {
            let s = 2f64.powi(k as i32);
            (0.5 * s * p.inner, s * p.outer)
        }
    }

    /// Index of the last piece that can be nonzero below radius `r`.
    pub fn last_piece_below(&self, r: f64) -> usize {
        let mut k = 0;
        while self.annulus(k + 1).0 < r {
            k += 1;
        }
        k
    }

    /// `sum_{k <= kk} psi_k(r)`, summed term by term.
    pub fn partial_sum(&self, kk: usize, r: f64) -> f64 {
        (0..=kk).map(|k| self.piece(k, r)).sum()
    }

    /// Sampled profile rows `(piece, k, r, value)` for export.
    pub fn sample_rows(&self, radii: &[f64]) -> Vec<(&'static str, usize, f64, f64)> {
        let mut rows = Vec::new();
        for k in 0..=self.k_max {
            for &r in radii {
                rows.push(("psi", k, r, self.piece(k, r)));
            }
        }
        rows
    }
}

/// Three-way split of a dyadic shell on `R^n x R^n`, expressed through the base profile
/// `phi_k = phi(./2^k)`: `phi'_j = phi_{j-6}`, `psi'_j = phi_{j+1}(1 - phi_{j-4})`,
/// `psi''_j = phi_{j+1}(1 - phi_{j-6})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AppendixSplit {
    lp: PartitionFamily,
}

impl AppendixSplit {
    pub fn family(&self) -> &PartitionFamily {
        &self.lp
    }
    pub fn phi_prime(&self, j: i32, r: f64) -> f64 {
        self.lp.phi_k(j - 6, r)
    }
    pub fn psi_prime(&self, j: i32, r: f64) -> f64 {
        self.lp.phi_k(j + 1, r) * (1.0 - self.lp.phi_k(j - 4, r))
    }
    pub fn psi_dprime(&self, j: i32, r: f64) -> f64 {
        self.lp.phi_k(j + 1, r) * (1.0 - self.lp.phi_k(j - 6, r))
    }
    /// Low-pass companion for small `j`: equals 1 on `|z| <= 2^{j+1}`, so that
    /// `Psi_j = Psi_j low_j(xi) low_j(eta)`.
    pub fn low(&self, j: i32, r: f64) -> f64 {
        self.lp.phi_k(j + 1, r)
    }

    /// `Psi_j (phi' psi' + psi' phi' + psi'' psi'')` at radii `(|xi|, |eta|)`.
    pub fn reassemble(&self, j: i32, rx: f64, ry: f64) -> f64 {
        let big = self.lp.piece(j as usize, rx.hypot(ry));
        big * (self.phi_prime(j, rx) * self.psi_prime(j, ry)
            + self.psi_prime(j, rx) * self.phi_prime(j, ry)
            + self.psi_dprime(j, rx) * self.psi_dprime(j, ry))
    }
}

pub fn make_appendix_split(lp2n: &PartitionFamily) -> Result<AppendixSplit> {
    if lp2n.dim() % 2 != 0 {
        return Err(invalid("lp2n", "family must live on an even-dimensional space"));
    }
    if lp2n.profile().inner != 1.0 || lp2n.profile().outer != 2.0 {
        return Err(invalid("lp2n", "split needs the standard plateau/support radii 1 and 2"));
    }
    Ok(AppendixSplit { lp: *lp2n })
}

/// Skips the radius check; only for fault-injection runs.
#[doc(hidden)]
pub fn make_appendix_split_unchecked(lp2n: &PartitionFamily) -> AppendixSplit {
    AppendixSplit { lp: *lp2n }
}

/// Pair `(kappa, chi)` with `supp kappa in [-1,1]^n`, band-limited `chi >= c > 0` on
/// `[-1,1]^n` and `sum_nu kappa(xi - nu) chi(xi - nu) = 1`.
///
/// `chi = |w|^2` with `w` the inverse transform of a bump supported in `|s| <= r`,
/// `r = 1/(2 sqrt n)` per axis, so the transform of `chi` lives in the unit ball.
/// `kappa = b / D` where `D` is the periodisation of `b chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformPair {
    dim: usize,
    half_width: f64,
    nodes: Vec<(f64, f64)>,
}

const UNIFORM_NODES: usize = 96;

pub fn make_uniform_pair(dim: usize) -> Result<UniformPair> {
    if !(1..=9).contains(&dim) {
        return Err(invalid("dim", format!("{dim} not in 1..=9")));
    }
    let r = 0.5 / (dim as f64).sqrt();
    // trapezoid nodes on (0, r): w(y) = (1/pi) sum weight * eta(s) cos(y s)
    let h = r / UNIFORM_NODES as f64;
    let nodes = (0..UNIFORM_NODES)
        .map(|m| {
            let s = m as f64 * h;
            let wgt = if m == 0 { 0.5 * h } else { h };
            (s, wgt * bump(s / r, 1.0) / std::f64::consts::PI)
        })
        .collect();
    Ok(UniformPair { dim, half_width: r, nodes })
}

impl UniformPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radius of the frequency support of one axis factor of `chi`.
    pub fn chi_band(&self) -> f64 {
        2.0 * self.half_width
    }

    fn w1(&self, y: f64) -> f64 {
        self.nodes.iter().map(|&(s, c)| c * (y * s).cos()).sum()
    }

    fn chi1(&self, y: f64) -> f64 {
        let w = self.w1(y);
        w * w
    }

    fn b1(y: f64) -> f64 {
        bump(y, 1.0)
    }

    fn d1(&self, y: f64) -> f64 {
        let base = y.floor();
        (-1..=2)
            .map(|m| {
                let t = y - (base + m as f64);
                Self::b1(t) * self.chi1(t)
            })
            .sum()
    }

    pub fn chi(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&y| self.chi1(y)).product()
    }

    pub fn kappa(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .map(|&y| {
                let b = Self::b1(y);
                if b == 0.0 {
                    0.0
                } else {
                    b / self.d1(y)
                }
            })
            .product()
    }

    /// One axis factor of `kappa` (the pair is a tensor product).
    pub fn kappa1(&self, y: f64) -> f64 {
        let b = Self::b1(y);
        if b == 0.0 {
            0.0
        } else {
            b / self.d1(y)
        }
    }

    pub fn chi_1d(&self, y: f64) -> f64 {
        self.chi1(y)
    }

    /// `sum_nu kappa(xi - nu) chi(xi - nu)` over every `nu` whose cube meets `xi`.
    pub fn identity_sum(&self, xi: &[f64]) -> f64 {
        let n = xi.len();
        let mut total = 0.0;
        let count = 4usize.pow(n as u32);
        let mut shifted = vec![0.0; n];
        for code in 0..count {
            let mut c = code;
            for (i, &x) in xi.iter().enumerate() {
                let nu = x.floor() - 1.0 + (c % 4) as f64;
                c /= 4;
                shifted[i] = x - nu;
            }
            total += self.kappa(&shifted) * self.chi(&shifted);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plateau_and_support() {
        let lp = PartitionFamily::make_lp(1, 6, 1.0).unwrap();
        assert_eq!(lp.piece(0, 0.7), 1.0);
        assert_eq!(lp.piece(3, 17.0), 0.0);
        assert_eq!(lp.piece(3, 16.0), 0.0);
        assert!(lp.piece(3, 8.0) > 0.0);
        assert!(PartitionFamily::make_lp(1, 0, 1.0).is_err());
    }

    #[test]
    fn pieces_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [1usize, 2] {
            let lp = PartitionFamily::make_lp(dim, 6, 1.0).unwrap();
            for _ in 0..10_000 {
                let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-32.0..32.0)).collect();
                if norm(&xi) > 32.0 {
                    continue;
                }
                assert!((lp.partial_sum(6, norm(&xi)) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn split_supports() {
        let lp = PartitionFamily::make_lp(2, 10, 1.0).unwrap();
        let s = make_appendix_split(&lp).unwrap();
        let j = 8;
        let u = 2f64.powi(j);
        assert_eq!(s.phi_prime(j, u / 16.0), 0.0);
        assert!(s.phi_prime(j, u / 33.0) > 0.0);
        assert_eq!(s.psi_prime(j, u / 16.0 * 0.999), 0.0);
        assert_eq!(s.psi_prime(j, 4.0 * u), 0.0);
        assert_eq!(s.psi_dprime(j, u / 64.0 * 0.999), 0.0);
        assert!(make_appendix_split(&PartitionFamily::make_lp(1, 3, 1.0).unwrap()).is_err());
    }

    #[test]
    fn uniform_pair_identity_and_support() {
        let p = make_uniform_pair(1).unwrap();
        assert_eq!(p.kappa(&[1.5]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let x = rng.gen_range(-40.0..40.0);
            assert!((p.identity_sum(&[x]) - 1.0).abs() < 1e-12);
        }
        assert!(make_uniform_pair(10).is_err());
    }

    #[test]
    fn narrow_profile_radii() {
        let p = Profile::narrow(0.05).unwrap();
        assert_eq!(p.eval(2f64.powf(0.45)), 1.0);
        assert_eq!(p.eval(2f64.powf(0.55)), 0.0);
    }
}
