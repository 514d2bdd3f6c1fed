//! Bessel functions of the first kind of orders zero and one, plus the
//! positive zeros of `J0`.
//!
//! Evaluation uses the ascending power series up to [`SERIES_CROSSOVER`] and
//! the Hankel asymptotic expansion (optimally truncated) beyond it. Zeros are
//! seeded with McMahon's expansion and polished by Newton's method using
//! `J0' = -J1`, with a bisection fallback inside `((n-1)π, nπ)`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::{OnceLock, RwLock};

/// Argument above which the asymptotic expansion replaces the power series.
pub const SERIES_CROSSOVER: f64 = 12.0;

/// `J0(x)` for `x >= 0`. Negative arguments are folded (`J0` is even).
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_CROSSOVER {
        j0_series(x)
    } else {
        hankel(x, 0)
    }
}

/// `J1(x)` for `x >= 0`. Negative arguments use `J1(-x) = -J1(x)`.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x <= SERIES_CROSSOVER {
        j1_series(x)
    } else {
        hankel(x, 1)
    }
}

/// Ascending series `Σ (-1)^m (x²/4)^m / (m!)²`.
pub fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -q / (m * m);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) && m > q.sqrt() {
            break;
        }
        if m > 200.0 {
            break;
        }
    }
    sum
}

/// Ascending series `(x/2) Σ (-1)^m (x²/4)^m / (m! (m+1)!)`.
pub fn j1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -q / (m * (m + 1.0));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) && m > q.sqrt() {
            break;
        }
        if m > 200.0 {
            break;
        }
    }
    0.5 * x * sum
}

/// Hankel expansion of `J_order(x)`, order 0 or 1, truncated at the smallest term.
pub fn hankel(x: f64, order: u32) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        if next.abs() >= last || next.abs() < 1e-18 {
            break;
        }
        last = next.abs();
        term = next;
        // sign pattern: P takes k = 0, 2, 4, ... with (-1)^(k/2); Q takes odd k
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            q += if ((k - 1) / 2) % 2 == 0 { term } else { -term };
        }
    }
    let chi = x - (0.5 * f64::from(order) + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// McMahon's asymptotic estimate of the `n`-th positive zero of `J0`.
pub fn mcmahon_guess(n: usize) -> f64 {
    let beta = (n as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5))
}

fn refine_zero(n: usize) -> f64 {
    let lo = ((n - 1) as f64 * PI).max(FRAC_PI_4);
    let hi = n as f64 * PI;
    let mut x = mcmahon_guess(n);
    let mut newton_ok = true;
    for _ in 0..50 {
        let step = bessel_j0(x) / bessel_j1(x);
        x += step;
        if !(lo..=hi).contains(&x) || !x.is_finite() {
            newton_ok = false;
            break;
        }
        if step.abs() <= 1e-15 * x {
            break;
        }
    }
    if newton_ok && bessel_j0(x).abs() <= 1e-11 {
        return x;
    }
    bisect_j0(lo, hi)
}

fn bisect_j0(mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = bessel_j0(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = bessel_j0(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Append-only cache of the positive zeros `j0,1 < j0,2 < ...` of `J0`.
#[derive(Debug, Default)]
pub struct BesselZeroTable {
    zeros: RwLock<Vec<f64>>,
}

impl BesselZeroTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide shared table.
    pub fn global() -> &'static BesselZeroTable {
        static TABLE: OnceLock<BesselZeroTable> = OnceLock::new();
        TABLE.get_or_init(BesselZeroTable::new)
    }

    /// The `n`-th zero (1-based). Panics on `n == 0`.
    pub fn zero(&self, n: usize) -> f64 {
        assert!(n >= 1, "Bessel zeros are indexed from 1");
        self.ensure(n);
        self.zeros.read().expect("zero table poisoned")[n - 1]
    }

    /// The first `count` zeros.
    pub fn first(&self, count: usize) -> Vec<f64> {
        self.ensure(count);
        self.zeros.read().expect("zero table poisoned")[..count].to_vec()
    }

    pub fn len(&self) -> usize {
        self.zeros.read().expect("zero table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ensure(&self, count: usize) {
        if self.len() >= count {
            return;
        }
        let mut zeros = self.zeros.write().expect("zero table poisoned");
        while zeros.len() < count {
            let n = zeros.len() + 1;
            zeros.push(refine_zero(n));
        }
    }
}

/// `n`-th positive zero of `J0`, served from the global cache.
pub fn bessel_j0_zero(n: usize) -> f64 {
    BesselZeroTable::global().zero(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit reference values (mpmath), rounded to f64.
    const REF: &[(f64, f64, f64)] = &[
        (0.5, 0.938_469_807_240_812_9, 0.242_268_457_674_873_9),
        (1.0, 0.765_197_686_557_966_6, 0.440_050_585_744_933_5),
        (3.0, -0.260_051_954_901_933_4, 0.339_058_958_525_936_5),
        (5.0, -0.177_596_771_314_338_3, -0.327_579_137_591_465_2),
        (8.0, 0.171_650_807_137_553_9, 0.234_636_346_853_914_6),
        (11.5, -0.067_653_948_111_665_23, -0.228_378_620_665_323_5),
        (12.0, 0.047_689_310_796_833_54, -0.223_447_104_490_627_6),
        (13.0, 0.206_926_102_377_067_8, -0.070_318_052_121_778_37),
        (20.0, 0.167_024_664_340_583_2, 0.066_833_124_175_850_05),
        (50.0, 0.055_812_327_669_251_82, -0.097_511_828_125_175_14),
        (100.0, 0.019_985_850_304_223_12, -0.077_145_352_014_112_16),
    ];

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(0.0), 0.0);
    }

    #[test]
    fn matches_reference_table() {
        for &(x, j0, j1) in REF {
            let tol = 1e-12;
            assert!((bessel_j0(x) - j0).abs() <= tol, "J0({x})");
            assert!((bessel_j1(x) - j1).abs() <= tol, "J1({x})");
        }
    }

    #[test]
    fn derivative_identity() {
        for &x in &[1.0, 5.0, 20.0] {
            let h = 1e-5;
            let d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2.0 * h);
            assert!((d + bessel_j1(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn recurrence_identity() {
        let x = 3.0;
        let h = 1e-4;
        // fourth-order central difference for J1'
        let d = (-bessel_j1(x + 2.0 * h) + 8.0 * bessel_j1(x + h) - 8.0 * bessel_j1(x - h) + bessel_j1(x - 2.0 * h))
            / (12.0 * h);
        assert!((bessel_j1(x) / x + d - bessel_j0(x)).abs() < 1e-10);
    }

    #[test]
    fn branches_agree_across_crossover() {
        let mut x = 11.0;
        while x <= 13.0 {
            assert!((j0_series(x) - hankel(x, 0)).abs() < 1e-11, "J0 at {x}");
            assert!((j1_series(x) - hankel(x, 1)).abs() < 1e-11, "J1 at {x}");
            x += 0.01;
        }
    }

    #[test]
    fn known_bounds_on_sample() {
        for i in 0..=10_000 {
            let x = i as f64 * 0.01;
            assert!(bessel_j0(x).abs() <= 1.0 + 1e-15);
            assert!(bessel_j1(x).abs() <= 0.59);
        }
    }

    #[test]
    fn first_zeros() {
        assert!((bessel_j0_zero(1) - 2.404_825_557_695_773).abs() < 1e-11);
        assert!((bessel_j0_zero(2) - 5.520_078_110_286_311).abs() < 1e-11);
        assert!((bessel_j0_zero(3) - 8.653_727_912_911_012).abs() < 1e-11);
        assert!((bessel_j0_zero(50) - 156.295_034_268_533_5).abs() < 1e-10);
        assert!((bessel_j0_zero(100) - 313.374_266_077_527_8).abs() < 1e-10);
    }

    #[test]
    fn zeros_by_bisection_oracle() {
        // series-only bisection, no Newton, no asymptotics
        for n in 1..=3 {
            let mut lo = ((n - 1) as f64 * PI).max(0.5);
            let mut hi = n as f64 * PI;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (j0_series(mid) > 0.0) == (j0_series(lo) > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((bessel_j0_zero(n) - lo).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_table_properties() {
        let table = BesselZeroTable::new();
        let zeros = table.first(120);
        for (i, w) in zeros.windows(2).enumerate() {
            assert!(w[1] > w[0]);
            // interlacing: J1 changes sign between consecutive J0 zeros
            assert!(bessel_j1(w[0]) * bessel_j1(w[1]) < 0.0, "pair {i}");
        }
        for &z in &zeros {
            assert!(bessel_j0(z).abs() <= 1e-11);
        }
        let spacing = zeros[50] - zeros[49];
        assert!((spacing - PI).abs() < 0.01);
        assert_eq!(table.len(), 120);
    }

    #[test]
    fn mcmahon_is_close() {
        assert!((mcmahon_guess(1) - bessel_j0_zero(1)).abs() < 2e-3);
        for n in 2..20 {
            assert!((mcmahon_guess(n) - bessel_j0_zero(n)).abs() < 1e-5);
        }
    }
}
