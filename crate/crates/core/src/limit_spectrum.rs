//! Spectrum of the limit problem below the first Dirichlet eigenvalue of the
//! fiber disk: disk eigendata, the fiber mean `S(λ) = ∫_D u₀`, the dispersion
//! function `δ(λ)`, its roots `δ(λ) = γ_j` and the limit eigenfunctions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh2d::{CellGeometry, Point};
use crate::special_functions::{bessel_j0, bessel_j1, BesselZeroTable};

/// Smallest accepted series length.
pub const MIN_TERMS: usize = 50;
/// Below this value of `√λ·r` the mean and the profile use power series in λ.
const SMALL_ARGUMENT: f64 = 2.0;
/// Interval margin for root searches, relative to `μ₁`.
const MARGIN: f64 = 1e-10;

/// A radially symmetric Dirichlet eigenmode of the disk: eigenvalue `mu` and
/// squared mean `c2 = (∫_D f_n)²` of the L²-normalized mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMode {
    pub mu: f64,
    pub c2: f64,
}

/// Radial Dirichlet eigendata of the disk of radius `r`, first `count` modes.
pub fn disk_radial_eigendata(r: f64, count: usize) -> Result<Vec<RadialMode>> {
    if !(r > 0.0) || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "need r > 0 and count >= 1 (r = {r}, count = {count})"
        )));
    }
    let zeros = BesselZeroTable::global().first(count);
    Ok(zeros
        .into_iter()
        .map(|j| RadialMode {
            mu: (j / r).powi(2),
            c2: 4.0 * PI * r * r / (j * j),
        })
        .collect())
}

/// Constants of the dispersion relation for one cell geometry.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionParams {
    pub geometry: CellGeometry,
    pub n_terms: usize,
    /// First Dirichlet eigenvalue of the disk.
    pub mu1: f64,
    /// First Dirichlet eigenvalue of the vertical interval, `(π/L)²`.
    pub lambda0: f64,
    /// `1 + |D|/|C∖D|`
    pub c_coef: f64,
    /// `1/|C∖D|`
    pub cp_coef: f64,
    #[serde(skip)]
    modes: Vec<RadialMode>,
}

impl DispersionParams {
    pub fn new(geometry: CellGeometry, n_terms: usize) -> Result<Self> {
        if n_terms < MIN_TERMS {
            return Err(Error::InvalidArgument(format!(
                "n_terms = {n_terms} is below the minimum {MIN_TERMS}"
            )));
        }
        let geometry = CellGeometry::new(geometry.side, geometry.center, geometry.radius, geometry.height)?;
        // one extra mode for the tail bound
        let modes = disk_radial_eigendata(geometry.radius, n_terms + 1)?;
        let matrix = geometry.matrix_area();
        Ok(Self {
            geometry,
            n_terms,
            mu1: modes[0].mu,
            lambda0: (PI / geometry.height).powi(2),
            c_coef: 1.0 + geometry.disk_area() / matrix,
            cp_coef: 1.0 / matrix,
            modes,
        })
    }

    pub fn radius(&self) -> f64 {
        self.geometry.radius
    }

    pub fn disk_area(&self) -> f64 {
        self.geometry.disk_area()
    }

    pub fn matrix_area(&self) -> f64 {
        self.geometry.matrix_area()
    }

    /// The `n_terms` radial modes used by [`mean_u0_series`].
    pub fn modes(&self) -> &[RadialMode] {
        &self.modes[..self.n_terms]
    }

    /// Vertical eigenvalue `γ_j = (jπ/L)²`.
    pub fn gamma(&self, j: usize) -> f64 {
        (j as f64 * PI / self.geometry.height).powi(2)
    }

    fn check_domain(&self, lambda: f64) -> Result<()> {
        if lambda > 0.0 && lambda < self.mu1 {
            Ok(())
        } else {
            Err(Error::OutsideDomain { lambda, mu1: self.mu1 })
        }
    }
}

/// Truncated series value with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `S(λ) = Σ c_n²/(μ_n − λ)` over the radial modes.
pub fn mean_u0_series(lambda: f64, params: &DispersionParams) -> Result<SeriesValue> {
    params.check_domain(lambda)?;
    let value = params.modes().iter().rev().map(|m| m.c2 / (m.mu - lambda)).sum();
    // j₀,ₙ > (n − 1/4)π bounds Σ_{n>N} c_n²/μ_n by an integral
    let n = params.n_terms as f64;
    let r = params.radius();
    let next_mu = params.modes[params.n_terms].mu;
    let tail_bound = 4.0 * PI * r.powi(4) / (3.0 * PI.powi(4) * (n - 0.25).powi(3)) / (1.0 - lambda / next_mu);
    Ok(SeriesValue { value, tail_bound })
}

/// `S(λ)` from the radial solution of `−Δu₀ = λu₀ + 1`, `u₀ = 0` on `∂D`.
pub fn mean_u0_closed(lambda: f64, r: f64) -> Result<f64> {
    let mu1 = (BesselZeroTable::global().zero(1) / r).powi(2);
    if !(lambda > 0.0 && lambda < mu1) {
        return Err(Error::OutsideDomain { lambda, mu1 });
    }
    let k = lambda.sqrt();
    let x = k * r;
    let j0 = bessel_j0(x);
    if x < SMALL_ARGUMENT {
        // πr⁴/(4 J₀(x)) · Σ_{m≥1} (−1)^{m+1} m (x/2)^{2m−2} / (m!² (m+1))
        let q = 0.25 * x * x;
        let mut power = 1.0;
        let mut fact2 = 1.0;
        let mut sum = 0.0;
        for m in 1..60 {
            let mf = m as f64;
            fact2 *= mf * mf;
            let term = mf * power / (fact2 * (mf + 1.0));
            sum += if m % 2 == 1 { term } else { -term };
            if term < 1e-18 * sum.abs() {
                break;
            }
            power *= q;
        }
        return Ok(PI * r.powi(4) / (4.0 * j0) * sum);
    }
    Ok((2.0 * PI * r * bessel_j1(x) / (k * j0) - PI * r * r) / lambda)
}

/// The fiber profile `u₀(ρ) = (J₀(√λρ)/J₀(√λr) − 1)/λ`, `0 ≤ ρ ≤ r`.
pub fn u0_eval(lambda: f64, rho: f64, r: f64) -> Result<f64> {
    let mu1 = (BesselZeroTable::global().zero(1) / r).powi(2);
    if !(lambda > 0.0 && lambda < mu1) {
        return Err(Error::OutsideDomain { lambda, mu1 });
    }
    if !(0.0..=r).contains(&rho) {
        return Err(Error::InvalidArgument(format!("radius {rho} outside [0, {r}]")));
    }
    let k = lambda.sqrt();
    let x = k * r;
    let j0r = bessel_j0(x);
    if x < SMALL_ARGUMENT {
        // (J₀(kρ) − J₀(kr))/λ = Σ_{m≥1} (−1)^m λ^{m−1} (ρ^{2m} − r^{2m}) / (4^m m!²)
        let (rho2, r2) = (rho * rho, r * r);
        let mut coef = 0.25;
        let (mut rp, mut sp) = (rho2, r2);
        let mut sum = 0.0;
        for m in 1..60 {
            let mf = m as f64;
            if m > 1 {
                coef *= 0.25 * lambda / (mf * mf);
                rp *= rho2;
                sp *= r2;
            }
            let term = coef * (rp - sp);
            sum += if m % 2 == 1 { -term } else { term };
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        return Ok(sum / j0r);
    }
    Ok((bessel_j0(k * rho) / j0r - 1.0) / lambda)
}

/// `δ(λ) = Cλ + C'λ²S(λ)`.
pub fn delta(lambda: f64, params: &DispersionParams) -> Result<f64> {
    params.check_domain(lambda)?;
    let s = mean_u0_closed(lambda, params.radius())?;
    Ok(lambda * params.c_coef + params.cp_coef * lambda * lambda * s)
}

/// `φ(t) = t(C + t|D|/(|C∖D|(μ₁ − t)))`, an upper bound for `δ`.
pub fn phi(t: f64, params: &DispersionParams) -> Result<f64> {
    params.check_domain(t)?;
    Ok(t * (params.c_coef + t * params.disk_area() / (params.matrix_area() * (params.mu1 - t))))
}

/// Bisection for an increasing `f` on `[lo, hi]` with `f(lo) < 0 ≤ f(hi)`,
/// run until the bracket endpoints are adjacent doubles.
fn bisect_increasing(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64, f64)> {
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if !(flo < 0.0 && fhi >= 0.0) {
        return Err(Error::NotBracketed(lo));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let root = if flo.abs() <= fhi.abs() { lo } else { hi };
    Ok((root, hi - lo, flo.abs().min(fhi.abs())))
}

/// `μ₀ = φ⁻¹(λ₀)`, a lower bound for every limit eigenvalue.
pub fn mu0_lower_bound(params: &DispersionParams) -> Result<f64> {
    let tiny = MARGIN * params.mu1;
    let (root, _, _) = bisect_increasing(tiny, params.mu1 - tiny, |t| Ok(phi(t, params)? - params.lambda0))?;
    Ok(root)
}

/// One limit eigenvalue, the root of `δ(λ) = γ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRoot {
    pub j: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// `S(λ)` at the root.
    pub mean_u0: f64,
    pub bracket_width: f64,
    /// `|δ(λ) − γ_j| / γ_j`
    pub delta_residual: f64,
}

pub fn limit_root(params: &DispersionParams, j: usize) -> Result<LimitRoot> {
    if j == 0 {
        return Err(Error::InvalidArgument("vertical mode index starts at 1".into()));
    }
    let gamma = params.gamma(j);
    let tiny = MARGIN * params.mu1;
    let (lambda, width, fabs) = bisect_increasing(tiny, params.mu1 - tiny, |l| Ok(delta(l, params)? - gamma))?;
    Ok(LimitRoot {
        j,
        gamma,
        lambda,
        mean_u0: mean_u0_closed(lambda, params.radius())?,
        bracket_width: width,
        delta_residual: fabs / gamma,
    })
}

/// Limit eigenvalues for `j = 1..=j_max`, increasing in `j`.
pub fn limit_eigenvalues(params: &DispersionParams, j_max: usize) -> Result<Vec<LimitRoot>> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("j_max must be at least 1".into()));
    }
    (1..=j_max).map(|j| limit_root(params, j)).collect()
}

/// Limit eigenfunction `(λu₀(|y − c|) + 1)·v_j(x₃)` on the fiber and
/// `v_j(x₃)` on the matrix, with `v_j = √(2/L)·sin(jπx₃/L)`.
#[derive(Debug, Clone, Copy)]
pub struct LimitField {
    pub root: LimitRoot,
    pub geometry: CellGeometry,
}

impl LimitField {
    pub fn vertical(&self, x3: f64) -> f64 {
        let l = self.geometry.height;
        (2.0 / l).sqrt() * (self.root.j as f64 * PI * x3 / l).sin()
    }

    /// Cross-section factor: `λu₀(ρ) + 1` inside the disk, 1 outside.
    pub fn profile(&self, y: Point) -> f64 {
        let rho = self.geometry.distance_to_center(y);
        let r = self.geometry.radius;
        if rho >= r {
            return 1.0;
        }
        self.root.lambda * u0_eval(self.root.lambda, rho, r).expect("root lies inside (0, mu1)") + 1.0
    }

    pub fn eval(&self, y: Point, x3: f64) -> f64 {
        self.profile(y) * self.vertical(x3)
    }
}

pub fn limit_eigenfunction(root: &LimitRoot, params: &DispersionParams) -> LimitField {
    LimitField {
        root: *root,
        geometry: params.geometry,
    }
}

/// CSV table `j,gamma_j,lambda_k,S,delta_check` (no comment lines).
pub fn roots_csv(roots: &[LimitRoot]) -> String {
    let mut out = String::from("j,gamma_j,lambda_k,S,delta_check\n");
    for r in roots {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.j, r.gamma, r.lambda, r.mean_u0, r.delta_residual
        );
    }
    out
}
