//! Explicit spectral filter functions.
//!
//! The simple filters `g0`–`g3` are random-walk style and act on the
//! normalized adjacency spectrum `(-1, 1)`; the complex filters `g4`–`g7`
//! are Gaussian low/high/band-pass/band-reject shapes on the Laplacian
//! spectrum `[0, 2]`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::sampling::Interval;

/// Default `α` for the scaled random walk.
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Where a filter is finite. Endpoints may be open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDomain {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl FilterDomain {
    pub fn open(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: true,
            upper_open: true,
        }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: false,
            upper_open: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_open { x > self.lower } else { x >= self.lower };
        let below = if self.upper_open { x < self.upper } else { x <= self.upper };
        above && below
    }

    /// Pulls `x` onto a closed endpoint when it is within `tol` outside it.
    /// Points within `tol` of an open endpoint are rejected, since that
    /// endpoint is a singularity.
    pub fn clamp_within(&self, x: f64, tol: f64) -> Option<f64> {
        let near_open = (self.lower_open && (x - self.lower).abs() <= tol)
            || (self.upper_open && (x - self.upper).abs() <= tol);
        if near_open {
            return None;
        }
        if self.contains(x) {
            return Some(x);
        }
        if !self.lower_open && x < self.lower && self.lower - x <= tol {
            return Some(self.lower);
        }
        if !self.upper_open && x > self.upper && x - self.upper <= tol {
            return Some(self.upper);
        }
        None
    }
}

/// Which graph operator a filter's domain corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// `(-1, 1)`: normalized adjacency.
    Adjacency,
    /// `[0, 2]`: normalized Laplacian.
    Laplacian,
}

type FilterFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named scalar filter bound to its domain.
#[derive(Clone)]
pub struct FilterSpec {
    name: String,
    function: FilterFn,
    domain: FilterDomain,
    default_interval: Interval,
    alpha: Option<f64>,
    spectrum: SpectrumKind,
}

impl fmt::Debug for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("default_interval", &self.default_interval)
            .field("alpha", &self.alpha)
            .field("spectrum", &self.spectrum)
            .finish()
    }
}

impl FilterSpec {
    /// A user-supplied filter. It is considered finite on the closed
    /// `interval`, which is also its default sampling interval.
    pub fn custom<F>(name: &str, interval: Interval, spectrum: SpectrumKind, function: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            function: Arc::new(function),
            domain: FilterDomain::closed(interval.lower(), interval.upper()),
            default_interval: interval,
            alpha: None,
            spectrum,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> FilterDomain {
        self.domain
    }

    /// Interval the filter is sampled on by default; narrower than the
    /// domain for the simple filters, whose domain is open at a pole.
    pub fn default_interval(&self) -> Interval {
        self.default_interval
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn spectrum(&self) -> SpectrumKind {
        self.spectrum
    }

    /// Unchecked pointwise evaluation.
    #[inline]
    pub fn evaluate(&self, omega: f64) -> f64 {
        (self.function)(omega)
    }
}

/// Names of the built-in filters.
pub const BUILTIN_NAMES: [&str; 8] = ["g0", "g1", "g2", "g3", "g4", "g5", "g6", "g7"];

/// One of the eight built-in filters. `alpha` must be given (in `(0, 1)`)
/// for `g0` and only for `g0`; see [`builtin_filter_with_default_alpha`]
/// for the defaulting variant.
pub fn builtin_filter(name: &str, alpha: Option<f64>) -> Result<FilterSpec> {
    let simple = |function: FilterFn| -> FilterSpec {
        FilterSpec {
            name: name.to_string(),
            function,
            domain: FilterDomain::open(-1.0, 1.0),
            default_interval: Interval::new(-0.9, 0.9).expect("valid interval"),
            alpha: None,
            spectrum: SpectrumKind::Adjacency,
        }
    };
    let complex = |function: FilterFn| -> FilterSpec {
        FilterSpec {
            name: name.to_string(),
            function,
            domain: FilterDomain::closed(0.0, 2.0),
            default_interval: Interval::new(1e-5, 2.0).expect("valid interval"),
            alpha: None,
            spectrum: SpectrumKind::Laplacian,
        }
    };
    if name != "g0" && alpha.is_some() && BUILTIN_NAMES.contains(&name) {
        return Err(Error::InvalidFilterParameter("alpha is only used by g0"));
    }
    let spec = match name {
        "g0" => {
            let a = alpha.ok_or(Error::InvalidFilterParameter("g0 requires alpha"))?;
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidFilterParameter("alpha must lie in (0, 1)"));
            }
            let mut spec = simple(Arc::new(move |w| (1.0 - a) / (1.0 - w)));
            spec.alpha = Some(a);
            spec
        }
        "g1" => simple(Arc::new(|w| 1.0 / (1.0 - w))),
        "g2" => simple(Arc::new(|w| w / (1.0 - w))),
        "g3" => simple(Arc::new(|w| w * w / (1.0 - w))),
        "g4" => complex(Arc::new(|w| libm::exp(-10.0 * w * w))),
        "g5" => complex(Arc::new(|w| 1.0 - libm::exp(-10.0 * w * w))),
        "g6" => complex(Arc::new(|w| libm::exp(-10.0 * (w - 1.0) * (w - 1.0)))),
        "g7" => complex(Arc::new(|w| 1.0 - libm::exp(-10.0 * (w - 1.0) * (w - 1.0)))),
        other => return Err(Error::UnknownFilter(other.to_string())),
    };
    Ok(spec)
}

/// Like [`builtin_filter`] but fills in [`DEFAULT_ALPHA`] for `g0`.
pub fn builtin_filter_with_default_alpha(name: &str, alpha: Option<f64>) -> Result<FilterSpec> {
    let alpha = match (name, alpha) {
        ("g0", None) => Some(DEFAULT_ALPHA),
        (_, a) => a,
    };
    builtin_filter(name, alpha)
}

/// Evaluates `filter` at every point, rejecting points outside its domain.
pub fn eval_filter(filter: &FilterSpec, points: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() {
                Err(Error::NonFinite(index))
            } else if !filter.domain.contains(value) {
                Err(Error::OutsideDomain { index, value })
            } else {
                Ok(filter.evaluate(value))
            }
        })
        .collect()
}
