//! Polynomial fits of sampled filters.
//!
//! Two routes are provided. [`solve_vandermonde_qr`] solves the monomial
//! least-squares system directly and inherits the exponential conditioning
//! of the Vandermonde matrix. [`arnoldi_fit`] instead orthonormalizes the
//! Krylov sequence `1, Ωe, Ω²e, …` of `Ω = diag(ω)` with Gram–Schmidt and
//! fits in that basis. The Hessenberg table recorded during the process is
//! all that is needed to regenerate the basis polynomials at new scalar
//! points or with a matrix argument.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dense::{dot, householder_lstsq, norm2, singular_values, DenseMatrix};
use crate::error::{Error, Result};
use crate::filters::{eval_filter, FilterSpec};
use crate::sampling::{Interval, SampleSet};

/// Subdiagonal entries of the Hessenberg table below this value end the
/// basis.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-14;

/// Monomial coefficients recovered from the basis are not reliable beyond
/// this degree.
pub const MONOMIAL_TRUST_DEGREE: usize = 15;

const RANK_DEFICIENT_PIVOT: f64 = 1e-300;

/// `V(i, j) = ω_i^j` for `j = 0..=degree`.
#[derive(Debug, Clone)]
pub struct VandermondeMatrix {
    entries: DenseMatrix,
    samples: SampleSet,
    degree: usize,
}

impl VandermondeMatrix {
    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

pub fn build_vandermonde(samples: &SampleSet, degree: usize) -> Result<VandermondeMatrix> {
    let r = samples.len();
    if degree + 1 > r {
        return Err(Error::Underdetermined {
            rows: r,
            cols: degree + 1,
        });
    }
    let mut entries = DenseMatrix::zeros(r, degree + 1);
    for (i, &w) in samples.points().iter().enumerate() {
        let row = entries.row_mut(i);
        row[0] = 1.0;
        for j in 1..=degree {
            row[j] = row[j - 1] * w;
        }
    }
    Ok(VandermondeMatrix {
        entries,
        samples: samples.clone(),
        degree,
    })
}

/// Reported when the Arnoldi process stops before the requested degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub requested_degree: usize,
    pub effective_degree: usize,
    /// Normalization `H(m+1, m)` at the step that ended the basis.
    pub subdiagonal: f64,
}

/// Arnoldi basis over the sample points.
///
/// `q` is `r × (d+1)` with first column all ones and every column of norm
/// `√r`; `h` is the `(d+2) × (d+1)` upper-Hessenberg table. Its last column
/// holds the projections of `Ω q_d`, whose remainder is the truncation
/// residual and never becomes a basis column.
#[derive(Debug, Clone)]
pub struct ArnoldiBasis {
    q: DenseMatrix,
    h: DenseMatrix,
    samples: SampleSet,
    breakdown: Option<Breakdown>,
}

impl ArnoldiBasis {
    /// Runs the Arnoldi process up to `degree`, truncating at breakdown.
    pub fn build(samples: &SampleSet, degree: usize) -> Self {
        let omega = samples.points();
        let r = omega.len();
        let rf = r as f64;
        let sqrt_r = libm::sqrt(rf);

        let mut columns: Vec<Vec<f64>> = vec![vec![1.0; r]];
        let mut h = DenseMatrix::zeros(degree + 2, degree + 1);
        let mut breakdown = None;
        for m in 0..=degree {
            let mut q: Vec<f64> = omega.iter().zip(&columns[m]).map(|(w, c)| w * c).collect();
            // Modified Gram–Schmidt followed by one re-orthogonalization pass.
            for _ in 0..2 {
                for (l, col) in columns.iter().enumerate() {
                    let c = dot(col, &q) / rf;
                    h[(l, m)] += c;
                    q.iter_mut().zip(col).for_each(|(qi, ci)| *qi -= c * ci);
                }
            }
            let norm = norm2(&q) / sqrt_r;
            h[(m + 1, m)] = norm;
            if m == degree {
                break;
            }
            if columns.len() == r || norm < BREAKDOWN_TOLERANCE {
                breakdown = Some(Breakdown {
                    requested_degree: degree,
                    effective_degree: m,
                    subdiagonal: norm,
                });
                break;
            }
            q.iter_mut().for_each(|v| *v /= norm);
            columns.push(q);
        }

        let d = columns.len() - 1;
        let q = DenseMatrix::from_fn(r, d + 1, |i, j| columns[j][i]);
        let h = if d == degree {
            h
        } else {
            DenseMatrix::from_fn(d + 2, d + 1, |i, j| h[(i, j)])
        };
        Self {
            q,
            h,
            samples: samples.clone(),
            breakdown,
        }
    }

    /// Effective degree (number of columns minus one).
    pub fn degree(&self) -> usize {
        self.q.cols() - 1
    }

    pub fn q_columns(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn h_table(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    /// Rebuilds a basis from stored parts (for deserialization). Only the
    /// shape of the table is validated.
    pub fn from_parts(samples: SampleSet, h: DenseMatrix) -> Result<Self> {
        if h.rows() != h.cols() + 1 || h.cols() == 0 {
            return Err(Error::DimensionMismatch {
                context: "ArnoldiBasis::from_parts",
                expected: h.cols() + 1,
                found: h.rows(),
            });
        }
        let degree = h.cols() - 1;
        let q = replay_columns(&h, degree, samples.points());
        Ok(Self {
            q,
            h,
            samples,
            breakdown: None,
        })
    }

    /// Square tridiagonal (Hessenberg) block `T = H[0..=d, 0..=d]`.
    pub fn projection_matrix(&self) -> DenseMatrix {
        let n = self.degree() + 1;
        DenseMatrix::from_fn(n, n, |i, j| self.h[(i, j)])
    }

    /// Triangular factor `R = [e₁, T e₁, …, T^d e₁]` with `V = Q R`.
    pub fn krylov_factor(&self) -> DenseMatrix {
        let n = self.degree() + 1;
        let t = self.projection_matrix();
        let mut r = DenseMatrix::zeros(n, n);
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        for j in 0..n {
            for i in 0..n {
                r[(i, j)] = v[i];
            }
            v = (0..n).map(|i| dot(t.row(i), &v)).collect();
        }
        r
    }

    /// Basis polynomials evaluated at `points`: row `i` holds
    /// `w_0(x_i), …, w_d(x_i)`.
    pub fn evaluate_columns(&self, points: &[f64]) -> DenseMatrix {
        replay_columns(&self.h, self.degree(), points)
    }
}

fn replay_columns(h: &DenseMatrix, degree: usize, points: &[f64]) -> DenseMatrix {
    let mut w = DenseMatrix::zeros(points.len(), degree + 1);
    for (i, &x) in points.iter().enumerate() {
        let row = w.row_mut(i);
        row[0] = 1.0;
        for m in 0..degree {
            let mut v = x * row[m];
            for l in 0..=m {
                v -= h[(l, m)] * row[l];
            }
            row[m + 1] = v / h[(m + 1, m)];
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitMethod {
    VandermondeQR,
    Arnoldi,
}

impl FitMethod {
    pub fn name(self) -> &'static str {
        match self {
            FitMethod::VandermondeQR => "vandermonde",
            FitMethod::Arnoldi => "arnoldi",
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vandermonde" => Ok(FitMethod::VandermondeQR),
            "arnoldi" => Ok(FitMethod::Arnoldi),
            _ => Err(Error::InvalidConfig("unknown fit method")),
        }
    }
}

/// Fitted polynomial in basis and/or monomial form.
#[derive(Debug, Clone)]
pub struct PolynomialApproximant {
    basis_coefficients: Option<Vec<f64>>,
    monomial_coefficients: Option<Vec<f64>>,
    basis: Option<ArnoldiBasis>,
    filter_name: String,
    fit_method: FitMethod,
    /// `true` when the direct solve met a pivot below `1e-300`.
    pub degenerate: bool,
    /// `true` when monomial coefficients were recovered from a basis of
    /// degree above [`MONOMIAL_TRUST_DEGREE`].
    pub monomial_untrusted: bool,
}

impl PolynomialApproximant {
    /// Approximant in the Arnoldi basis with the given coefficients.
    pub fn from_basis(basis: ArnoldiBasis, coefficients: Vec<f64>, filter_name: &str) -> Result<Self> {
        if coefficients.len() != basis.degree() + 1 {
            return Err(Error::DimensionMismatch {
                context: "PolynomialApproximant::from_basis",
                expected: basis.degree() + 1,
                found: coefficients.len(),
            });
        }
        Ok(Self {
            basis_coefficients: Some(coefficients),
            monomial_coefficients: None,
            basis: Some(basis),
            filter_name: filter_name.to_string(),
            fit_method: FitMethod::Arnoldi,
            degenerate: false,
            monomial_untrusted: false,
        })
    }

    pub fn basis_coefficients(&self) -> Option<&[f64]> {
        self.basis_coefficients.as_deref()
    }

    pub fn monomial_coefficients(&self) -> Option<&[f64]> {
        self.monomial_coefficients.as_deref()
    }

    pub fn basis(&self) -> Option<&ArnoldiBasis> {
        self.basis.as_ref()
    }

    pub fn filter_name(&self) -> &str {
        &self.filter_name
    }

    pub fn fit_method(&self) -> FitMethod {
        self.fit_method
    }

    /// Polynomial degree of the stored representation.
    pub fn degree(&self) -> usize {
        match (&self.basis_coefficients, &self.monomial_coefficients) {
            (Some(c), _) | (None, Some(c)) => c.len() - 1,
            (None, None) => unreachable!("approximant without coefficients"),
        }
    }

    /// Adds monomial coefficients `c = R⁻¹ a` obtained by back-substitution
    /// through the Krylov factor. No-op for Vandermonde fits.
    pub fn with_monomial_coefficients(mut self) -> Self {
        if let (Some(basis), Some(a)) = (&self.basis, &self.basis_coefficients) {
            let r = basis.krylov_factor();
            let n = a.len();
            let mut c = vec![0.0; n];
            for i in (0..n).rev() {
                let s: f64 = ((i + 1)..n).map(|j| r[(i, j)] * c[j]).sum();
                c[i] = (a[i] - s) / r[(i, i)];
            }
            self.monomial_untrusted = n - 1 > MONOMIAL_TRUST_DEGREE;
            self.monomial_coefficients = Some(c);
        }
        self
    }
}

/// Householder least squares on the Vandermonde matrix.
pub fn solve_vandermonde_qr(v: &VandermondeMatrix, g_values: &[f64]) -> Result<PolynomialApproximant> {
    let ls = householder_lstsq(v.entries(), g_values)?;
    Ok(PolynomialApproximant {
        basis_coefficients: None,
        monomial_coefficients: Some(ls.solution),
        basis: None,
        filter_name: String::new(),
        fit_method: FitMethod::VandermondeQR,
        degenerate: ls.min_abs_r_diag < RANK_DEFICIENT_PIVOT,
        monomial_untrusted: false,
    })
}

/// Least-squares fit in the Arnoldi basis, `a = Q† g`.
pub fn arnoldi_fit(samples: &SampleSet, g_values: &[f64], degree: usize) -> Result<PolynomialApproximant> {
    if g_values.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            context: "arnoldi_fit",
            expected: samples.len(),
            found: g_values.len(),
        });
    }
    let basis = ArnoldiBasis::build(samples, degree);
    let ls = householder_lstsq(basis.q_columns(), g_values)?;
    let mut approx = PolynomialApproximant::from_basis(basis, ls.solution, "")?;
    approx.degenerate = ls.min_abs_r_diag < RANK_DEFICIENT_PIVOT;
    Ok(approx)
}

/// Samples `filter`, then fits with `method`. The Vandermonde route caps
/// the degree at `r − 1`, matching the truncation of the Arnoldi route.
pub fn fit_filter(
    filter: &FilterSpec,
    samples: &SampleSet,
    degree: usize,
    method: FitMethod,
) -> Result<PolynomialApproximant> {
    let g = eval_filter(filter, samples.points())?;
    let mut approx = match method {
        FitMethod::Arnoldi => arnoldi_fit(samples, &g, degree)?,
        FitMethod::VandermondeQR => {
            let v = build_vandermonde(samples, degree.min(samples.len() - 1))?;
            solve_vandermonde_qr(&v, &g)?
        }
    };
    approx.filter_name = filter.name().to_string();
    Ok(approx)
}

/// Evaluates the approximant: basis recurrence for Arnoldi fits, Horner for
/// monomial-only fits.
pub fn evaluate_approximant(approx: &PolynomialApproximant, points: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    match (&approx.basis, &approx.basis_coefficients, &approx.monomial_coefficients) {
        (Some(basis), Some(a), _) => {
            let w = basis.evaluate_columns(points);
            Ok((0..points.len()).map(|i| dot(w.row(i), a)).collect())
        }
        (_, _, Some(c)) => Ok(points
            .iter()
            .map(|&x| c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck))
            .collect()),
        _ => Err(Error::PlanMismatch("approximant has no usable coefficients")),
    }
}

/// Largest `|p(x) − g(x)|` over an `n`-point uniform grid on `interval`.
pub fn max_grid_error(
    approx: &PolynomialApproximant,
    filter: &FilterSpec,
    interval: Interval,
    n: usize,
) -> Result<f64> {
    let grid = interval.grid(n);
    let exact = eval_filter(filter, &grid)?;
    let fitted = evaluate_approximant(approx, &grid)?;
    Ok(exact
        .iter()
        .zip(&fitted)
        .fold(0.0, |m, (e, f)| m.max((e - f).abs())))
}

/// 2-norm condition number with an optional theoretical lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub matrix_label: String,
    pub condition_number: f64,
    pub theoretical_lower_bound: Option<f64>,
}

/// `σ_max / σ_min` by one-sided Jacobi; `+∞` when `σ_min < 1e-300`.
pub fn condition_number(matrix: &DenseMatrix, label: &str) -> ConditionReport {
    let sv = singular_values(matrix);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    let kappa = if min < RANK_DEFICIENT_PIVOT { f64::INFINITY } else { max / min };
    ConditionReport {
        matrix_label: label.to_string(),
        condition_number: kappa.max(1.0),
        theoretical_lower_bound: None,
    }
}

/// Lower bound on `κ(V)` for `r` samples in `interval`:
/// `2^{r−1} α^{−r}` when the interval sits inside `[−α, α]` with `α < 1`,
/// `2^{r−2}` when it sits inside `(0, 2]`.
pub fn vandermonde_condition_bound(interval: Interval, r: usize) -> Option<f64> {
    let alpha = interval.lower().abs().max(interval.upper().abs());
    let r = r as f64;
    if alpha < 1.0 {
        Some(libm::pow(2.0, r - 1.0) * libm::pow(1.0 / alpha, r))
    } else if interval.lower() > 0.0 && interval.upper() <= 2.0 {
        Some(libm::pow(2.0, r - 2.0))
    } else {
        None
    }
}

/// Relative Frobenius residual of `V/‖e‖ = (Q/‖e‖) · R`.
pub fn verify_qr_equivalence(basis: &ArnoldiBasis, v: &VandermondeMatrix) -> Result<f64> {
    let q = basis.q_columns();
    let ve = v.entries();
    if q.rows() != ve.rows() || q.cols() != ve.cols() {
        return Err(Error::DimensionMismatch {
            context: "verify_qr_equivalence",
            expected: q.rows() * q.cols(),
            found: ve.rows() * ve.cols(),
        });
    }
    let scale = 1.0 / libm::sqrt(q.rows() as f64);
    let mut qr = q.matmul(&basis.krylov_factor())?;
    qr.scale(scale);
    let mut vs = ve.clone();
    vs.scale(scale);
    let denom = vs.frobenius_norm();
    vs.axpy(-1.0, &qr);
    Ok(vs.frobenius_norm() / denom)
}

/// `κ((Q/√r)ᵀ (Q/√r))`, ideally 1.
pub fn basis_orthonormality_condition(basis: &ArnoldiBasis) -> ConditionReport {
    let q = basis.q_columns();
    let mut gram = q.t_matmul(q).expect("square Gram product");
    gram.scale(1.0 / q.rows() as f64);
    let mut report = condition_number(&gram, "arnoldi_gram");
    report.theoretical_lower_bound = Some(1.0);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::filters::builtin_filter;
    use crate::sampling::{chebyshev_nodes, sample, SampleScheme};

    fn set(points: &[f64]) -> SampleSet {
        SampleSet::from_points(
            points.to_vec(),
            Interval::new(-1.0, 3.0).unwrap(),
            SampleScheme::Equispaced,
        )
        .unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        let v = build_vandermonde(&set(&[2.0]), 0).unwrap();
        assert_eq!(v.entries().values(), &[1.0]);
        let v = build_vandermonde(&set(&[1.0, 2.0]), 1).unwrap();
        assert_eq!(v.entries().values(), &[1.0, 1.0, 1.0, 2.0]);
        let v = build_vandermonde(&set(&[0.5, -0.5, 0.9]), 2).unwrap();
        // Rows are stored ascending: −0.5, 0.5, 0.9.
        assert_eq!(v.entries().col_to_vec(2), vec![0.25, 0.25, 0.81]);
        assert!(matches!(
            build_vandermonde(&set(&[1.0, 2.0]), 2),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn vandermonde_qr_examples() {
        let v = build_vandermonde(&set(&[0.0, 1.0, 2.0]), 2).unwrap();
        let a = solve_vandermonde_qr(&v, &[0.0, 1.0, 4.0]).unwrap();
        let c = a.monomial_coefficients().unwrap();
        assert!(c[0].abs() < 1e-10 && c[1].abs() < 1e-10 && (c[2] - 1.0).abs() < 1e-10);
        assert!(a.basis().is_none());
        assert_eq!(a.fit_method(), FitMethod::VandermondeQR);

        let s = chebyshev_nodes(Interval::new(-0.9, 0.9).unwrap(), 11).unwrap();
        for k in 0..=10 {
            let v = build_vandermonde(&s, k).unwrap();
            let a = solve_vandermonde_qr(&v, &[1.0; 11]).unwrap();
            let c = a.monomial_coefficients().unwrap();
            assert!((c[0] - 1.0).abs() < 1e-8);
            assert!(c[1..].iter().all(|x| x.abs() < 1e-8));
        }
    }

    #[test]
    fn vandermonde_qr_flags_degenerate_systems() {
        let v = build_vandermonde(&set(&[0.0, 1.0]), 1).unwrap();
        let mut v = v;
        // Force an exactly singular matrix.
        v.entries = DenseMatrix::from_vec(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let a = solve_vandermonde_qr(&v, &[1.0, 1.0]).unwrap();
        assert!(a.degenerate);
        assert!(a.monomial_coefficients().is_some());
    }

    #[test]
    fn arnoldi_constant_fit() {
        let s = set(&[-0.7, 0.1, 0.4, 1.3, 2.2]);
        let a = arnoldi_fit(&s, &[1.0; 5], 3).unwrap();
        let c = a.basis_coefficients().unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-12));
        let vals = evaluate_approximant(&a, &[-0.3, 0.7]).unwrap();
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn arnoldi_linear_round_trip() {
        let s = set(&[-0.5, 0.0, 0.5]);
        let a = arnoldi_fit(&s, &[-0.5, 0.0, 0.5], 1).unwrap();
        let vals = evaluate_approximant(&a, s.points()).unwrap();
        for (v, w) in vals.iter().zip(s.points()) {
            assert!((v - w).abs() < 1e-13);
        }
    }

    #[test]
    fn arnoldi_rejects_length_mismatch() {
        assert!(matches!(
            arnoldi_fit(&set(&[0.0, 1.0]), &[1.0], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn arnoldi_truncates_when_degree_reaches_sample_count() {
        let s = chebyshev_nodes(Interval::new(-0.9, 0.9).unwrap(), 6).unwrap();
        let basis = ArnoldiBasis::build(&s, 6);
        let b = basis.breakdown().expect("breakdown reported");
        assert_eq!(b.requested_degree, 6);
        assert_eq!(b.effective_degree, 5);
        assert_eq!(basis.degree(), 5);
        assert_eq!(basis.q_columns().cols(), 6);
        assert_eq!(basis.h_table().rows(), 7);
        assert_eq!(basis.h_table().cols(), 6);
        // The final remainder is numerically zero.
        assert!(b.subdiagonal < 1e-13);
    }

    #[test]
    fn basis_structure() {
        let s = sample(SampleScheme::Legendre, Interval::new(1e-5, 2.0).unwrap(), 30).unwrap();
        let basis = ArnoldiBasis::build(&s, 20);
        assert!(basis.breakdown().is_none());
        let q = basis.q_columns();
        let sqrt_r = libm::sqrt(30.0);
        assert!(q.col_to_vec(0).iter().all(|&v| v == 1.0));
        for j in 0..q.cols() {
            assert!((norm2(&q.col_to_vec(j)) - sqrt_r).abs() < 1e-12 * sqrt_r);
        }
        let h = basis.h_table();
        assert_eq!((h.rows(), h.cols()), (22, 21));
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if i > j + 1 {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
        // Replaying the table at the samples reproduces Q.
        let w = basis.evaluate_columns(s.points());
        assert!(w.max_abs_diff(q).unwrap() < 1e-10);
    }

    #[test]
    fn condition_examples() {
        assert_eq!(condition_number(&DenseMatrix::identity(3), "I").condition_number, 1.0);
        let k = condition_number(&DenseMatrix::diagonal(&[1.0, 10.0]), "d").condition_number;
        assert!((k - 10.0).abs() < 1e-12);
        let singular = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(condition_number(&singular, "s").condition_number, f64::INFINITY);

        let iv = Interval::new(-0.9, 0.9).unwrap();
        let s = chebyshev_nodes(iv, 12).unwrap();
        let v = build_vandermonde(&s, 11).unwrap();
        let bound = vandermonde_condition_bound(iv, 12).unwrap();
        assert!((bound - 7251.36621869496).abs() < 1e-6);
        assert!(condition_number(v.entries(), "V").condition_number >= bound);
    }

    #[test]
    fn condition_bound_cases() {
        let b = vandermonde_condition_bound(Interval::new(1e-5, 2.0).unwrap(), 5).unwrap();
        assert_eq!(b, 8.0);
        assert!(vandermonde_condition_bound(Interval::new(-3.0, 3.0).unwrap(), 5).is_none());
    }

    #[test]
    fn qr_equivalence_examples() {
        let s = set(&[0.5]);
        let basis = ArnoldiBasis::build(&s, 0);
        let v = build_vandermonde(&s, 0).unwrap();
        assert!(verify_qr_equivalence(&basis, &v).unwrap() < 1e-14);

        let s = chebyshev_nodes(Interval::new(-0.9, 0.9).unwrap(), 8).unwrap();
        let basis = ArnoldiBasis::build(&s, 7);
        let v = build_vandermonde(&s, 7).unwrap();
        assert!(verify_qr_equivalence(&basis, &v).unwrap() < 1e-10);

        let s = sample(SampleScheme::Equispaced, Interval::new(1e-5, 2.0).unwrap(), 10).unwrap();
        let basis = ArnoldiBasis::build(&s, 9);
        let v = build_vandermonde(&s, 9).unwrap();
        assert!(verify_qr_equivalence(&basis, &v).unwrap() < 1e-9);

        let v = build_vandermonde(&s, 8).unwrap();
        assert!(verify_qr_equivalence(&basis, &v).is_err());
    }

    #[test]
    fn orthonormality_examples() {
        let s = set(&[0.1, 0.2, 0.3]);
        let k = basis_orthonormality_condition(&ArnoldiBasis::build(&s, 0));
        assert_eq!(k.condition_number, 1.0);
        assert_eq!(k.theoretical_lower_bound, Some(1.0));
        for scheme in [SampleScheme::Chebyshev, SampleScheme::Equispaced] {
            let s = sample(scheme, Interval::new(-0.9, 0.9).unwrap(), 40).unwrap();
            let k = basis_orthonormality_condition(&ArnoldiBasis::build(&s, 40)).condition_number;
            assert!((1.0..=1.1).contains(&k), "{scheme}: {k}");
        }
    }

    #[test]
    fn monomial_recovery_matches_horner() {
        let s = chebyshev_nodes(Interval::new(-0.9, 0.9).unwrap(), 9).unwrap();
        let g: Vec<f64> = s.points().iter().map(|x| 2.0 - x + 0.5 * x * x * x).collect();
        let a = arnoldi_fit(&s, &g, 4).unwrap().with_monomial_coefficients();
        let c = a.monomial_coefficients().unwrap();
        let expected = [2.0, -1.0, 0.0, 0.5, 0.0];
        for (x, e) in c.iter().zip(expected) {
            assert!((x - e).abs() < 1e-11, "{c:?}");
        }
        assert!(!a.monomial_untrusted);

        let s = chebyshev_nodes(Interval::new(-0.9, 0.9).unwrap(), 20).unwrap();
        let a = arnoldi_fit(&s, &[1.0; 20], 16).unwrap().with_monomial_coefficients();
        assert!(a.monomial_untrusted);
    }

    #[test]
    fn g4_arnoldi_at_one() {
        let f = builtin_filter("g4", None).unwrap();
        let s = chebyshev_nodes(f.default_interval(), 40).unwrap();
        let a = fit_filter(&f, &s, 40, FitMethod::Arnoldi).unwrap();
        let v = evaluate_approximant(&a, &[1.0]).unwrap()[0];
        assert!((v - libm::exp(-10.0)).abs() < 1e-9);
        assert_eq!(a.filter_name(), "g4");
    }

    #[test]
    fn evaluation_rejects_non_finite_points() {
        let a = arnoldi_fit(&set(&[0.0, 1.0]), &[1.0, 1.0], 1).unwrap();
        assert_eq!(evaluate_approximant(&a, &[0.0, f64::INFINITY]), Err(Error::NonFinite(1)));
    }
}
