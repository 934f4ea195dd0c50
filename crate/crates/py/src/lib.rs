//! Python bindings. Exact rationals cross the boundary as `(num, den)`
//! tuples; `W` arguments accept a float, a `(num, den)` tuple or a string
//! such as `"1/2"`.

use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lossbell::bounds;
use lossbell::lhv::{self, EnumerationMode, EnvelopePolyline};
use lossbell::quantum::{self, CrossingTarget, SettingProfile, Settings};
use lossbell::sim;
use lossbell::{BellFunctional, EfficiencyProfile, FunctionalKind, Rational, SiteCount};

fn err(e: lossbell::Error) -> PyErr {
    match e {
        lossbell::Error::Domain(m) | lossbell::Error::Dimension(m) => PyValueError::new_err(m),
        lossbell::Error::Capacity(m) => PyOverflowError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for lossbell::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn sites(n: u32) -> PyResult<SiteCount> {
    SiteCount::new(n).py()
}

fn functional(n: SiteCount, name: &str, signs: &str) -> PyResult<BellFunctional> {
    let kind = if name.eq_ignore_ascii_case("natural") {
        BellFunctional::natural(n).kind
    } else {
        name.parse::<FunctionalKind>().py()?
    };
    let sign = |c: Option<char>| match c {
        Some('+') => Ok(1),
        Some('-') => Ok(-1),
        _ => Err(PyValueError::new_err(format!("signs must be two of '+'/'-', got '{signs}'"))),
    };
    if signs.chars().count() != 2 {
        return Err(PyValueError::new_err(format!("signs must be two of '+'/'-', got '{signs}'")));
    }
    let mut cs = signs.chars();
    let f = BellFunctional::new(kind, sign(cs.next())?, sign(cs.next())?).py()?;
    f.check_sites(n).py()?;
    Ok(f)
}

fn pair(r: Rational) -> (i128, i128) {
    (*r.numer(), *r.denom())
}

#[derive(FromPyObject)]
enum WArg {
    Pair((i128, i128)),
    Text(String),
    Float(f64),
}

impl WArg {
    fn exact(&self) -> PyResult<Option<Rational>> {
        match self {
            WArg::Pair((n, d)) if *d > 0 => Ok(Some(Rational::new(*n, *d))),
            WArg::Pair(_) => Err(PyValueError::new_err("denominator must be positive")),
            WArg::Text(s) => {
                let bad = || PyValueError::new_err(format!("'{s}' is not num/den"));
                let (n, d) = s.split_once('/').ok_or_else(bad)?;
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                if d <= 0 {
                    return Err(bad());
                }
                Ok(Some(Rational::new(n, d)))
            }
            WArg::Float(_) => Ok(None),
        }
    }

    fn as_f64(&self) -> PyResult<f64> {
        Ok(match self.exact()? {
            Some(r) => *r.numer() as f64 / *r.denom() as f64,
            None => match self {
                WArg::Float(x) => *x,
                _ => unreachable!("non-float arguments are exact"),
            },
        })
    }
}

/// Exact LHV envelope `F_max(W)` of one functional.
#[pyclass(name = "Envelope", module = "lossbell", frozen)]
struct PyEnvelope {
    inner: EnvelopePolyline,
}

#[pymethods]
impl PyEnvelope {
    #[getter]
    fn n(&self) -> u32 {
        self.inner.sites().get()
    }

    #[getter]
    fn functional(&self) -> String {
        self.inner.functional().label()
    }

    /// Vertices as `((w_num, w_den), (f_num, f_den))`.
    #[getter]
    fn vertices(&self) -> Vec<((i128, i128), (i128, i128))> {
        self.inner.vertices().iter().map(|v| (pair(v.w), pair(v.f))).collect()
    }

    /// Envelope at `w`; exact `(num, den)` for exact input, float otherwise.
    fn query<'py>(&self, py: Python<'py>, w: WArg) -> PyResult<Bound<'py, PyAny>> {
        match w.exact()? {
            Some(r) => Ok(pair(self.inner.query(r).py()?).into_pyobject(py)?.into_any()),
            None => Ok(self.inner.query_f64(w.as_f64()?).py()?.into_pyobject(py)?.into_any()),
        }
    }

    /// First `W` at which the optimal GHZ line exceeds this envelope.
    fn crossing(&self) -> PyResult<Option<f64>> {
        let n = self.inner.sites();
        let c = quantum::threshold_crossing(n, &self.inner.functional(), CrossingTarget::Envelope(&self.inner)).py()?;
        Ok(c.w_star)
    }

    /// Largest excess over the envelope among random stochastic local
    /// responses, as a float.
    #[pyo3(signature = (trials, seed = 0))]
    fn probe(&self, py: Python<'_>, trials: u64, seed: u64) -> PyResult<f64> {
        let r = py.detach(|| lhv::stochastic_probe(&self.inner, trials, seed)).py()?;
        Ok(r.max_excess_f64())
    }

    fn __repr__(&self) -> String {
        format!(
            "Envelope(n={}, functional='{}', vertices={})",
            self.inner.sites(),
            self.inner.functional(),
            self.inner.vertices().len()
        )
    }
}

/// Builds the envelope of `functional` at `n` sites.
#[pyfunction]
#[pyo3(signature = (n, functional = "natural", signs = "++", mode = "dp"))]
fn envelope(py: Python<'_>, n: u32, functional: &str, signs: &str, mode: &str) -> PyResult<PyEnvelope> {
    let n = sites(n)?;
    let f = self::functional(n, functional, signs)?;
    let mode: EnumerationMode = mode.parse().py()?;
    let inner = py
        .detach(|| lhv::enumerate_moment_points(n, mode).and_then(|s| lhv::upper_envelope(&s, &f)))
        .py()?;
    Ok(PyEnvelope { inner })
}

/// Distinct `(w_num, w_den, re_z, im_z)` over all deterministic strategies.
#[pyfunction]
#[pyo3(signature = (n, mode = "dp"))]
fn moment_points(py: Python<'_>, n: u32, mode: &str) -> PyResult<Vec<(i128, i128, i64, i64)>> {
    let n = sites(n)?;
    let mode: EnumerationMode = mode.parse().py()?;
    let set = py.detach(|| lhv::enumerate_moment_points(n, mode)).py()?;
    Ok(set.iter().map(|p| (*p.w.numer(), *p.w.denom(), p.re_z, p.im_z)).collect())
}

#[pyfunction]
#[pyo3(signature = (n, w, functional = "natural"))]
fn holder_bound(n: u32, w: WArg, functional: &str) -> PyResult<f64> {
    let n = sites(n)?;
    bounds::holder_bound(n, &self::functional(n, functional, "++")?, w.as_f64()?).py()
}

#[pyfunction]
#[pyo3(signature = (n, functional = "natural"))]
fn mabk_bound(n: u32, functional: &str) -> PyResult<f64> {
    let n = sites(n)?;
    Ok(bounds::mabk_bound(n, &self::functional(n, functional, "++")?))
}

/// `min(Holder, MABK)` at `w`.
#[pyfunction]
#[pyo3(signature = (n, w, functional = "natural"))]
fn tight_analytic_bound(n: u32, w: WArg, functional: &str) -> PyResult<f64> {
    let n = sites(n)?;
    bounds::tight_analytic_bound(n, &self::functional(n, functional, "++")?, w.as_f64()?).py()
}

/// "MABK", "Holder" or "LHV_no_violation".
#[pyfunction]
fn classify_region(n: u32, w: WArg) -> PyResult<&'static str> {
    let n = sites(n)?;
    Ok(match w.exact()? {
        Some(r) => bounds::classify_region_exact(n, r).py()?.name(),
        None => bounds::classify_region(n, w.as_f64()?).py()?.name(),
    })
}

/// `(w_star, eta_symmetric)` of the melded analytic bound.
#[pyfunction]
fn analytic_threshold(n: u32) -> PyResult<(f64, f64)> {
    let t = bounds::analytic_threshold(sites(n)?);
    Ok((t.w_star, t.eta_symmetric))
}

#[pyfunction]
fn braunstein_mann_threshold(n: u32) -> PyResult<f64> {
    Ok(bounds::braunstein_mann_threshold(sites(n)?))
}

/// `(w_threshold, eta_symmetric)` for violating Svetlichny's bound.
#[pyfunction]
fn svetlichny_requirement(n: u32) -> PyResult<(f64, f64)> {
    let r = bounds::svetlichny_requirement(sites(n)?);
    Ok((r.w_threshold, r.eta_symmetric))
}

/// Signed full-correlator expansion as `[(word, coefficient)]`, e.g.
/// `("ABB", -1)`.
#[pyfunction]
#[pyo3(signature = (n, functional = "natural", signs = "++"))]
fn expand_functional(n: u32, functional: &str, signs: &str) -> PyResult<Vec<(String, i32)>> {
    let n = sites(n)?;
    let f = self::functional(n, functional, signs)?;
    Ok(quantum::expand_functional(n, &f).py()?.into_iter().map(|t| (t.word.to_string(), t.coefficient)).collect())
}

/// `(value, thetas_a, thetas_b)` maximizing the lossless GHZ value.
#[pyfunction]
#[pyo3(signature = (n, functional = "natural", signs = "++"))]
fn optimal_settings(n: u32, functional: &str, signs: &str) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let n = sites(n)?;
    let o = quantum::optimal_settings(n, &self::functional(n, functional, signs)?).py()?;
    Ok((o.value, o.settings.thetas_a, o.settings.thetas_b))
}

/// GHZ `⟨∏(A_k + iB_k)⟩` functional value with per-site loss.
#[pyclass(name = "QuantumPrediction", module = "lossbell", frozen, get_all)]
struct PyQuantumPrediction {
    value: f64,
    w: f64,
    lossless_value: f64,
    thetas_a: Vec<f64>,
    thetas_b: Vec<f64>,
}

#[pymethods]
impl PyQuantumPrediction {
    fn __repr__(&self) -> String {
        format!("QuantumPrediction(value={}, w={}, lossless_value={})", self.value, self.w, self.lossless_value)
    }
}

fn profile(n: SiteCount, etas: Vec<f64>) -> PyResult<EfficiencyProfile> {
    match etas.as_slice() {
        [eta] => EfficiencyProfile::symmetric(n, *eta).py(),
        _ => EfficiencyProfile::new(etas).py(),
    }
}

fn settings(thetas_a: Option<Vec<f64>>, thetas_b: Option<Vec<f64>>) -> PyResult<Settings> {
    match (thetas_a, thetas_b) {
        (Some(a), Some(b)) => Ok(Settings::Explicit(SettingProfile::new(a, b).py()?)),
        (None, None) => Ok(Settings::Optimal),
        _ => Err(PyValueError::new_err("give both thetas_a and thetas_b, or neither")),
    }
}

/// `etas` is either one symmetric efficiency or one per site. Angles
/// default to the optimum.
#[pyfunction]
#[pyo3(signature = (n, etas, functional = "natural", signs = "++", thetas_a = None, thetas_b = None))]
fn quantum_prediction(
    n: u32,
    etas: Vec<f64>,
    functional: &str,
    signs: &str,
    thetas_a: Option<Vec<f64>>,
    thetas_b: Option<Vec<f64>>,
) -> PyResult<PyQuantumPrediction> {
    let n = sites(n)?;
    let f = self::functional(n, functional, signs)?;
    let q = quantum::quantum_prediction(n, &f, &profile(n, etas)?, &settings(thetas_a, thetas_b)?).py()?;
    Ok(PyQuantumPrediction {
        value: q.value,
        w: q.w,
        lossless_value: q.lossless_value,
        thetas_a: q.settings.thetas_a,
        thetas_b: q.settings.thetas_b,
    })
}

/// `(w_star, eta_symmetric)` where the optimal GHZ line crosses the
/// `"analytic"` bound or the exact `"envelope"`; `None` if it never does.
#[pyfunction]
#[pyo3(signature = (n, functional = "natural", target = "analytic"))]
fn threshold_crossing(py: Python<'_>, n: u32, functional: &str, target: &str) -> PyResult<(Option<f64>, Option<f64>)> {
    let n = sites(n)?;
    let f = self::functional(n, functional, "++")?;
    let c = match target {
        "analytic" => quantum::threshold_crossing(n, &f, CrossingTarget::Analytic).py()?,
        "envelope" => {
            let env = py.detach(|| lhv::envelope_for(n, &f)).py()?;
            quantum::threshold_crossing(n, &f, CrossingTarget::Envelope(&env)).py()?
        }
        other => return Err(PyValueError::new_err(format!("target must be 'analytic' or 'envelope', got '{other}'"))),
    };
    Ok((c.w_star, c.eta_symmetric))
}

/// Estimates from a simulated heralded run, compared against the bounds.
#[pyclass(name = "SimulationReport", module = "lossbell", frozen, get_all)]
struct PySimulationReport {
    w_hat: f64,
    f_hat: f64,
    se_w: f64,
    se_f: f64,
    trials_per_word: usize,
    seed: u64,
    region: &'static str,
    excess_over_envelope: f64,
    excess_over_analytic: f64,
    significance: f64,
    violates: bool,
}

#[pymethods]
impl PySimulationReport {
    fn __repr__(&self) -> String {
        format!(
            "SimulationReport(w_hat={:.6}, f_hat={:.6}, se_f={:.6}, region='{}', significance={:.3})",
            self.w_hat, self.f_hat, self.se_f, self.region, self.significance
        )
    }
}

/// Simulates every setting word `trials` times and reports the estimate.
#[pyfunction]
#[pyo3(signature = (n, etas, trials, seed = 0, functional = "natural", signs = "++", thetas_a = None, thetas_b = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    n: u32,
    etas: Vec<f64>,
    trials: usize,
    seed: u64,
    functional: &str,
    signs: &str,
    thetas_a: Option<Vec<f64>>,
    thetas_b: Option<Vec<f64>>,
) -> PyResult<PySimulationReport> {
    let n = sites(n)?;
    let f = self::functional(n, functional, signs)?;
    let etas = profile(n, etas)?;
    let settings = settings(thetas_a, thetas_b)?;
    let (est, v) = py
        .detach(|| -> lossbell::Result<_> {
            let s = match settings {
                Settings::Explicit(p) => p,
                Settings::Optimal => quantum::optimal_settings(n, &f)?.settings,
            };
            let t = sim::simulate_design(n, &etas, &s, trials, seed)?;
            let est = sim::estimate_functionals(&t, &f)?;
            let v = sim::violation_report(&est, &lhv::envelope_for(n, &f)?)?;
            Ok((est, v))
        })
        .py()?;
    Ok(PySimulationReport {
        w_hat: est.w_hat,
        f_hat: est.f_hat,
        se_w: est.se_w,
        se_f: est.se_f,
        trials_per_word: est.trials_per_word,
        seed: est.seed,
        region: v.region.name(),
        excess_over_envelope: v.excess_over_envelope,
        excess_over_analytic: v.excess_over_analytic,
        significance: v.significance,
        violates: v.violates(),
    })
}

#[pymodule]
#[pyo3(name = "lossbell")]
fn lossbell_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyEnvelope>()?;
    m.add_class::<PyQuantumPrediction>()?;
    m.add_class::<PySimulationReport>()?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(moment_points, m)?)?;
    m.add_function(wrap_pyfunction!(holder_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mabk_bound, m)?)?;
    m.add_function(wrap_pyfunction!(tight_analytic_bound, m)?)?;
    m.add_function(wrap_pyfunction!(classify_region, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(braunstein_mann_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(svetlichny_requirement, m)?)?;
    m.add_function(wrap_pyfunction!(expand_functional, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_settings, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_crossing, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
