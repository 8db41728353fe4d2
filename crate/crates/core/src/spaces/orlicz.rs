use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::spectral::{Grid, SpectralField};

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrliczKind {
    PhiStar,
    PsiStar,
    PsiK,
    Custom,
}

/// Outcome of the sampled convexity/monotonicity check on a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub vanishes_at_zero: bool,
    pub increasing: bool,
    pub convex: bool,
    /// Most negative normalised second difference seen on the sample.
    pub worst_second_difference: f64,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.vanishes_at_zero && self.increasing && self.convex
    }
}

const CERT_TOL: f64 = 1e-9;

/// Checks a profile on a log-spaced sample of `[1e-6, 1e2]`.
pub fn certify(profile: &dyn Fn(f64) -> f64) -> ConvexityCertificate {
    let xs: Vec<f64> = (0..=240).map(|i| 10f64.powf(-6.0 + i as f64 / 30.0)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| profile(x)).collect();
    let vanishes_at_zero = profile(0.0).abs() <= CERT_TOL;
    let increasing = vals.windows(2).all(|w| w[1] >= w[0] - CERT_TOL * w[0].abs().max(1.0));
    let mut worst = 0.0f64;
    for i in 1..xs.len() - 1 {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let s0 = (vals[i] - vals[i - 1]) / (x1 - x0);
        let s1 = (vals[i + 1] - vals[i]) / (x2 - x1);
        let scale = s0.abs().max(s1.abs()).max(1e-300);
        worst = worst.min((s1 - s0) / scale);
    }
    ConvexityCertificate {
        vanishes_at_zero,
        increasing,
        convex: worst >= -CERT_TOL,
        worst_second_difference: worst,
    }
}

/// Orlicz profile with its identity and certificate.
#[derive(Clone)]
pub struct OrliczSpec {
    pub kind: OrliczKind,
    pub k: Option<f64>,
    profile: Profile,
    pub certificate: ConvexityCertificate,
}

impl fmt::Debug for OrliczSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczSpec")
            .field("kind", &self.kind)
            .field("k", &self.k)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl OrliczSpec {
    /// `φ_*(x) = x ln(e + x)`.
    pub fn phi_star() -> Self {
        Self::named(OrliczKind::PhiStar, None, Arc::new(|x: f64| x * (std::f64::consts::E + x).ln()))
    }

    /// `ψ_*(x) = e^x − 1`.
    pub fn psi_star() -> Self {
        Self::named(OrliczKind::PsiStar, None, Arc::new(|x: f64| x.exp_m1()))
    }

    /// `ψ_k(x) = e^{x^{1/k}} − 1`. Not convex near 0 for `k > 1`; the
    /// certificate records that.
    pub fn psi_k(k: f64) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(OscError::InvalidParameter(format!("ψ_k needs k ≥ 1, got {k}")));
        }
        Ok(Self::named(
            OrliczKind::PsiK,
            Some(k),
            Arc::new(move |x: f64| x.powf(1.0 / k).exp_m1()),
        ))
    }

    /// User profile; must pass the convexity certificate.
    pub fn custom(profile: Profile) -> Result<Self> {
        let spec = Self::named(OrliczKind::Custom, None, profile);
        if !spec.certificate.passed() {
            return Err(OscError::InvalidParameter(format!(
                "custom Orlicz profile fails the convexity certificate: {:?}",
                spec.certificate
            )));
        }
        Ok(spec)
    }

    fn named(kind: OrliczKind, k: Option<f64>, profile: Profile) -> Self {
        let certificate = certify(profile.as_ref());
        OrliczSpec {
            kind,
            k,
            profile,
            certificate,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.profile)(x)
    }

    pub fn profile(&self) -> Profile {
        self.profile.clone()
    }
}

/// Set on which the Orlicz integral is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrliczDomain {
    Full,
    /// Periodic cube of `side` cells anchored at grid index `origin`.
    Cube { origin: [usize; 3], side: usize },
}

impl OrliczDomain {
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        match *self {
            OrliczDomain::Full => vec![true; grid.len()],
            OrliczDomain::Cube { origin, side } => {
                let n = grid.n();
                (0..grid.len())
                    .map(|i| {
                        let idx = grid.indices(i);
                        (0..grid.dim()).all(|a| (idx[a] + n - origin[a]) % n < side)
                    })
                    .collect()
            }
        }
    }
}

/// `∫_S φ(|f|/s) dμ` by grid quadrature.
pub fn orlicz_integral(grid: &Grid, magnitudes: &[f64], mask: &[bool], spec: &OrliczSpec, s: f64) -> f64 {
    let dv = grid.cell_volume();
    magnitudes
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| spec.eval(v / s))
        .sum::<f64>()
        * dv
}

const BISECTION_RTOL: f64 = 1e-8;

/// Luxemburg norm `inf{s > 0 : ∫ φ(|f|/s) dμ ≤ 1}` of sampled magnitudes.
pub fn orlicz_of_values(grid: &Grid, magnitudes: &[f64], spec: &OrliczSpec, domain: OrliczDomain) -> Result<f64> {
    if magnitudes.len() != grid.len() {
        return Err(OscError::ShapeMismatch("sample count does not match grid".into()));
    }
    let mask = domain.mask(grid);
    let top = magnitudes
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let integral = |s: f64| orlicz_integral(grid, magnitudes, &mask, spec, s);
    let (mut lo, mut hi) = (top, top);
    while integral(hi) > 1.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(OscError::InvalidParameter("Orlicz integral never drops below 1".into()));
        }
    }
    while integral(lo) <= 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while (hi - lo) > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if integral(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

pub fn orlicz_norm(f: &SpectralField, spec: &OrliczSpec, domain: OrliczDomain) -> Result<f64> {
    orlicz_of_values(f.grid(), &f.magnitude_values(), spec, domain)
}

/// Numerical conjugate `ψ(y) = sup_{x ≥ 0}(xy − φ(x))` on a y-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub y: Vec<f64>,
    /// `f64::INFINITY` where the sup is unbounded on the search range.
    pub values: Vec<f64>,
    pub maximisers: Vec<f64>,
}

impl Conjugate {
    pub fn is_infinite(&self, i: usize) -> bool {
        self.values[i].is_infinite()
    }
}

/// Upper end of the x search range.
pub const LF_X_MAX: f64 = 1e12;
const LF_SAMPLES: usize = 6000;

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub fn legendre_fenchel(profile: &dyn Fn(f64) -> f64, y_grid: &[f64]) -> Conjugate {
    let mut xs = vec![0.0];
    let (lo, hi) = (1e-10f64.ln(), LF_X_MAX.ln());
    xs.extend((0..LF_SAMPLES).map(|i| (lo + (hi - lo) * i as f64 / (LF_SAMPLES - 1) as f64).exp()));
    let phis: Vec<f64> = xs.iter().map(|&x| profile(x)).collect();
    let mut values = Vec::with_capacity(y_grid.len());
    let mut maximisers = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let (best, _) = xs
            .iter()
            .zip(&phis)
            .map(|(x, p)| x * y - p)
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if best == xs.len() - 1 {
            values.push(f64::INFINITY);
            maximisers.push(f64::INFINITY);
            continue;
        }
        let a = if best == 0 { 0.0 } else { xs[best - 1] };
        let b = xs[best + 1];
        let g = |x: f64| x * y - profile(x);
        let (x, v) = golden_max(&g, a, b);
        let at_zero = -profile(0.0);
        if at_zero >= v {
            values.push(at_zero);
            maximisers.push(0.0);
        } else {
            values.push(v);
            maximisers.push(x);
        }
    }
    Conjugate {
        y: y_grid.to_vec(),
        values,
        maximisers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit_cube_indicator() -> (Grid, Vec<f64>, OrliczDomain) {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let dom = OrliczDomain::Cube { origin: [3, 5, 0], side: 8 };
        let m = dom.mask(&g);
        (g, m.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(), dom)
    }

    #[test]
    fn indicator_norm_solves_scalar_equation() {
        let (g, ind, _) = unit_cube_indicator();
        let s = orlicz_of_values(&g, &ind, &OrliczSpec::phi_star(), OrliczDomain::Full).unwrap();
        // oracle: bisection on (1/s)ln(e+1/s) = 1
        let h = |s: f64| (1.0 / s) * (E + 1.0 / s).ln() - 1.0;
        let (mut a, mut b) = (0.1, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if h(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        assert!((s - a).abs() < 1e-7 * a, "{s} vs {a}");
    }

    #[test]
    fn self_consistency_integral_is_one() {
        let (g, ind, dom) = unit_cube_indicator();
        let scaled: Vec<f64> = ind.iter().map(|v| 3.7 * v).collect();
        let mask = dom.mask(&g);
        for spec in [OrliczSpec::phi_star(), OrliczSpec::psi_star()] {
            let s = orlicz_of_values(&g, &scaled, &spec, dom).unwrap();
            let i = orlicz_integral(&g, &scaled, &mask, &spec, s);
            assert!((0.999..=1.001).contains(&i), "{i}");
        }
        assert_eq!(orlicz_of_values(&g, &vec![0.0; g.len()], &OrliczSpec::phi_star(), dom).unwrap(), 0.0);
    }

    #[test]
    fn certificates() {
        assert!(OrliczSpec::phi_star().certificate.passed());
        assert!(OrliczSpec::psi_star().certificate.passed());
        assert!(OrliczSpec::psi_k(1.0).unwrap().certificate.passed());
        assert!(!OrliczSpec::psi_k(2.0).unwrap().certificate.convex);
        assert!(OrliczSpec::custom(Arc::new(|x: f64| x.sqrt())).is_err());
        assert!(OrliczSpec::custom(Arc::new(|x: f64| x * x)).is_ok());
        assert!(OrliczSpec::psi_k(0.5).is_err());
    }

    #[test]
    fn quadratic_is_self_dual() {
        let ys: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let c = legendre_fenchel(&|x: f64| 0.5 * x * x, &ys);
        for (y, v) in ys.iter().zip(&c.values) {
            assert!((v - 0.5 * y * y).abs() <= 1e-6 * (1.0 + 0.5 * y * y));
        }
    }

    #[test]
    fn linear_profile_gives_indicator() {
        let ys = [0.0, 0.5, 1.0, 1.5, 3.0];
        let c = legendre_fenchel(&|x: f64| x, &ys);
        assert_eq!(&c.values[..3], &[0.0, 0.0, 0.0]);
        assert!(c.is_infinite(3) && c.is_infinite(4));
    }

    #[test]
    fn phi_star_conjugate_is_exponential_like() {
        let ys: Vec<f64> = (0..=32).map(|i| 2.0 + i as f64 * 0.25).collect();
        let spec = OrliczSpec::phi_star();
        let c = legendre_fenchel(&|x| spec.eval(x), &ys);
        let ratios: Vec<f64> = ys.iter().zip(&c.values).map(|(y, v)| v / y.exp()).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.1 && hi < 0.5, "{lo} {hi}");
        // conjugate is convex on the grid
        for w in c.values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9 * w[1]);
        }
    }
}
