//! Sample points for fitting filter polynomials.
//!
//! Four schemes are supported: equispaced interior points, Chebyshev points
//! of the first kind, and Gauss nodes for the Legendre weight `1` and the
//! Jacobi weight `1 + ω` on `[-1, 1]`. Gauss nodes come from the
//! Golub–Welsch eigenvalue problem on the symmetric tridiagonal Jacobi
//! matrix of the weight's orthogonal polynomials.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Closed interval `[lower, upper]` with finite bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Maps `t ∈ [-1, 1]` affinely onto this interval.
    #[inline]
    pub fn from_reference(&self, t: f64) -> f64 {
        self.midpoint() + 0.5 * self.width() * t
    }

    /// `n` equally spaced points including both endpoints (`n ≥ 2`), or the
    /// midpoint when `n == 1`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.midpoint()],
            _ => {
                let step = self.width() / (n - 1) as f64;
                let mut g: Vec<f64> = (0..n).map(|i| self.lower + i as f64 * step).collect();
                g[n - 1] = self.upper;
                g
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleScheme {
    Equispaced,
    Chebyshev,
    Legendre,
    Jacobi,
}

impl SampleScheme {
    pub const ALL: [SampleScheme; 4] = [
        SampleScheme::Equispaced,
        SampleScheme::Chebyshev,
        SampleScheme::Legendre,
        SampleScheme::Jacobi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SampleScheme::Equispaced => "equispaced",
            SampleScheme::Chebyshev => "chebyshev",
            SampleScheme::Legendre => "legendre",
            SampleScheme::Jacobi => "jacobi",
        }
    }
}

impl fmt::Display for SampleScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SampleScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SampleScheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or(Error::InvalidConfig("unknown sampling scheme"))
    }
}

/// Ascending sample points produced by one scheme on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<f64>,
    interval: Interval,
    scheme: SampleScheme,
}

impl SampleSet {
    /// Builds a set from arbitrary points; sorts them and rejects duplicates.
    pub fn from_points(mut points: Vec<f64>, interval: Interval, scheme: SampleScheme) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCount("a sample set needs at least one point"));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        points.sort_by(f64::total_cmp);
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("sample points must be pairwise distinct"));
        }
        Ok(Self {
            points,
            interval,
            scheme,
        })
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn interval(&self) -> Interval {
        self.interval
    }

    #[inline]
    pub fn scheme(&self) -> SampleScheme {
        self.scheme
    }
}

fn check_count(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidCount("number of samples must be at least 1"));
    }
    Ok(())
}

fn sorted_set(mut points: Vec<f64>, interval: Interval, scheme: SampleScheme) -> SampleSet {
    points.sort_by(f64::total_cmp);
    SampleSet {
        points,
        interval,
        scheme,
    }
}

/// `l + k (u − l) / (r + 1)` for `k = 1..=r`; endpoints excluded.
pub fn equispaced_nodes(interval: Interval, r: usize) -> Result<SampleSet> {
    check_count(r)?;
    let step = interval.width() / (r + 1) as f64;
    let points = (1..=r).map(|k| interval.lower() + k as f64 * step).collect();
    Ok(sorted_set(points, interval, SampleScheme::Equispaced))
}

/// Chebyshev points of the first kind mapped onto `interval`.
pub fn chebyshev_nodes(interval: Interval, r: usize) -> Result<SampleSet> {
    check_count(r)?;
    let points = (1..=r)
        .map(|k| {
            let t = libm::cos((2 * k - 1) as f64 * PI / (2 * r) as f64);
            // cos rounds the exact zero of odd r to ~6e-17; pin it.
            let t = if 2 * k - 1 == r { 0.0 } else { t };
            interval.from_reference(t)
        })
        .collect();
    Ok(sorted_set(points, interval, SampleScheme::Chebyshev))
}

/// Gauss–Legendre nodes (weight 1 on `[-1, 1]`) mapped onto `interval`.
pub fn gauss_legendre_nodes(interval: Interval, r: usize) -> Result<SampleSet> {
    let rule = gauss_legendre_rule(r)?;
    let points = rule.nodes.iter().map(|&t| interval.from_reference(t)).collect();
    Ok(sorted_set(points, interval, SampleScheme::Legendre))
}

/// Gauss–Jacobi nodes for the weight `1 + ω` on `[-1, 1]`, mapped onto
/// `interval`.
pub fn gauss_jacobi_nodes(interval: Interval, r: usize) -> Result<SampleSet> {
    let rule = gauss_jacobi_rule(r)?;
    let points = rule.nodes.iter().map(|&t| interval.from_reference(t)).collect();
    Ok(sorted_set(points, interval, SampleScheme::Jacobi))
}

/// Dispatches to the generator for `scheme`.
pub fn sample(scheme: SampleScheme, interval: Interval, r: usize) -> Result<SampleSet> {
    match scheme {
        SampleScheme::Equispaced => equispaced_nodes(interval, r),
        SampleScheme::Chebyshev => chebyshev_nodes(interval, r),
        SampleScheme::Legendre => gauss_legendre_nodes(interval, r),
        SampleScheme::Jacobi => gauss_jacobi_nodes(interval, r),
    }
}

/// Nodes and weights of a Gauss rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Golub–Welsch rule for the Legendre weight.
pub fn gauss_legendre_rule(r: usize) -> Result<GaussRule> {
    check_count(r)?;
    let diag = vec![0.0; r];
    let off: Vec<f64> = (1..r)
        .map(|k| {
            let k = k as f64;
            k / libm::sqrt(4.0 * k * k - 1.0)
        })
        .collect();
    golub_welsch(&diag, &off, 2.0)
}

/// Golub–Welsch rule for the weight `1 + ω` (Jacobi exponents 0 on
/// `1 − ω` and 1 on `1 + ω`).
pub fn gauss_jacobi_rule(r: usize) -> Result<GaussRule> {
    check_count(r)?;
    let diag: Vec<f64> = (0..r)
        .map(|k| {
            let k = k as f64;
            1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0))
        })
        .collect();
    let off: Vec<f64> = (1..r)
        .map(|k| {
            let k = k as f64;
            libm::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0)
        })
        .collect();
    golub_welsch(&diag, &off, 2.0)
}

fn golub_welsch(diag: &[f64], off: &[f64], mass: f64) -> Result<GaussRule> {
    let (nodes, first) = match tridiag_ql(diag, off)? {
        Some(pair) => pair,
        None => {
            let nodes = tridiag_eigenvalues_bisection(diag, off)?;
            let first = nodes
                .iter()
                .map(|&x| christoffel_first_component(diag, off, x))
                .collect();
            (nodes, first)
        }
    };
    let weights = first.iter().map(|v| mass * v * v).collect();
    Ok(GaussRule { nodes, weights })
}

/// First eigenvector component for eigenvalue `x` from the normalized
/// three-term recurrence: `v₀² = 1 / Σ p_k(x)²`.
fn christoffel_first_component(diag: &[f64], off: &[f64], x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    for k in 0..off.len() {
        let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let next = ((x - diag[k]) * cur - b_prev * prev) / off[k];
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    1.0 / libm::sqrt(sum)
}

fn check_tridiag(diag: &[f64], off: &[f64]) -> Result<()> {
    if diag.is_empty() {
        return Err(Error::InvalidCount("tridiagonal matrix must be nonempty"));
    }
    if off.len() + 1 != diag.len() {
        return Err(Error::DimensionMismatch {
            context: "tridiagonal off-diagonal",
            expected: diag.len() - 1,
            found: off.len(),
        });
    }
    Ok(())
}

/// All eigenvalues (ascending) of the symmetric tridiagonal matrix with the
/// given diagonal and off-diagonal.
///
/// Implicit-shift QL; falls back to Sturm bisection when QL needs more than
/// `50 · n` iterations.
pub fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    match tridiag_ql(diag, off)? {
        Some((values, _)) => Ok(values),
        None => tridiag_eigenvalues_bisection(diag, off),
    }
}

/// QL iteration with Wilkinson-style shifts. Returns ascending eigenvalues
/// paired with the first component of each normalized eigenvector, or
/// `None` when the iteration budget is exhausted.
fn tridiag_ql(diag: &[f64], off: &[f64]) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    check_tridiag(diag, off)?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // First row of the accumulated eigenvector matrix.
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    let budget = 50 * n;
    let mut iterations = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > budget {
                return Ok(None);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let first = order.iter().map(|&i| z[i].abs()).collect();
    Ok(Some((values, first)))
}

/// Eigenvalues by Sturm-sequence bisection on Gershgorin bounds.
pub fn tridiag_eigenvalues_bisection(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    check_tridiag(diag, off)?;
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + off.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;

    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON * span } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };

    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        values.push(0.5 * (a + b));
    }
    Ok(values)
}
