//! Recovery of a Robinson approximation with a cut-norm error certificate.
//!
//! [`recover`] handles nonnegative `L^p` inputs with `5 < p < ∞`: normalize to
//! `‖w‖_p = 1`, estimate Λ, cut off at `M = 2Λ^{−1/(p−1)}`, choose `α` from
//! whichever case applies and evaluate `R_w^α`. [`recover_bounded`] is the
//! simpler bounded path with constant 44.

use crate::cutnorm::{cut_norm, CutNormBudget, CutNormMode, EXACT_CAP as CUT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::graphon::{SearchMode, StepGraphon};
use crate::knapsack::EXACT_SIDE_CAP;
use crate::lambda::{lambda_exact, lambda_heuristic, EXACT_CAP as LAMBDA_EXACT_CAP};
use crate::robinson::{robinson_approx, RobinsonApprox};
use serde::{Deserialize, Serialize, Serializer};
use std::time::Instant;

/// Largest `α` handed to the approximation; the formulas can exceed 1 when Λ is large.
pub const ALPHA_MAX: f64 = 1.0 - 1e-9;

/// Pipeline settings. Unknown keys are rejected when parsed from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct RecoveryConfig {
    /// Refinement factor for the Λ estimate.
    pub refinement: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Largest grid on which the error cut-norm is computed exactly.
    pub cutnorm_cap: usize,
    /// Resolution of the approximation grid; defaults to the input's `n`.
    pub grid_n: Option<usize>,
    /// Record per-stage durations in the report (off by default: they are not reproducible).
    pub timings: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            refinement: 1,
            restarts: 50,
            seed: 0,
            cutnorm_cap: CUT_EXACT_CAP,
            grid_n: None,
            timings: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTaken {
    BoundedCorollary,
    Case1,
    Case2,
    AlphaZero,
    /// Λ̂ = 0 on a non-Robinson input: the smallest grid `α = 1/n` is used instead.
    FallbackMinAlpha,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    pub lambda_ms: f64,
    pub cutoff_ms: f64,
    pub approx_ms: f64,
    pub error_ms: f64,
}

/// Pipeline trace. Λ values, `M`, the measured error and the bound are in the
/// normalized frame (`w` multiplied by `normalizationScale`); the approximation
/// returned next to the report is in the caller's frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryReport {
    #[serde(serialize_with = "serialize_p")]
    pub p: f64,
    pub normalization_scale: f64,
    #[serde(rename = "M")]
    pub big_m: Option<f64>,
    pub lambda_w: f64,
    #[serde(rename = "lambdaWM")]
    pub lambda_wm: Option<f64>,
    pub lambda_mode: SearchMode,
    pub case_taken: CaseTaken,
    pub alpha: f64,
    pub grid_n: usize,
    pub approx_mode: SearchMode,
    pub measured_error: f64,
    /// `measuredError` divided by the normalization scale.
    pub measured_error_unscaled: f64,
    pub error_mode: CutNormMode,
    pub theoretical_bound: f64,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn serialize_p<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

impl RecoveryReport {
    /// Column names for [`RecoveryReport::csv_row`].
    pub const CSV_HEADER: &'static str = "p,normalizationScale,M,lambdaW,lambdaWM,lambdaMode,caseTaken,alpha,gridN,measuredError,measuredErrorUnscaled,errorMode,theoreticalBound";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        format!(
            "{},{:e},{},{:e},{},{},{},{:e},{},{:e},{:e},{},{:e}",
            if self.p.is_infinite() { "inf".to_string() } else { self.p.to_string() },
            self.normalization_scale,
            opt(self.big_m),
            self.lambda_w,
            opt(self.lambda_wm),
            tag(&self.lambda_mode),
            tag(&self.case_taken),
            self.alpha,
            self.grid_n,
            self.measured_error,
            self.measured_error_unscaled,
            tag(&self.error_mode),
            self.theoretical_bound,
        )
    }
}

/// Serde name of a unit enum variant.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Worst-case error guaranteed for the given Λ.
///
/// Finite `p`: `78 λ^{(p−5)/(5p−5)}`. `p = ∞`: `44 λ^{1/5}`, times
/// `infNorm^{4/5}` when a sup norm above 1 is supplied.
pub fn theoretical_bound(p: f64, lambda: f64, inf_norm: Option<f64>) -> Result<f64> {
    if p.is_nan() || p <= 5.0 {
        return Err(Error::invalid(format!("the bound needs p > 5, got {p}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if p.is_infinite() {
        let base = 44.0 * lambda.powf(0.2);
        return Ok(match inf_norm {
            Some(s) if s > 1.0 => base * s.powf(0.8),
            _ => base,
        });
    }
    Ok(78.0 * lambda.powf((p - 5.0) / (5.0 * p - 5.0)))
}

/// `α` and `m` used by the bounded-`L^p` upper bound:
/// `α = ‖w‖_∞^{−p/(3p−2)} Λ^{2p/(5p−2)}` and `m = ⌈Λ^{−(p−2)/(5p−2)}⌉`.
pub fn proposition_constants(w: &StepGraphon, p: f64, cfg: &RecoveryConfig) -> Result<(f64, usize)> {
    if !w.is_nonnegative() {
        return Err(Error::precondition("the constants need a nonnegative graphon"));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("p must be at least 1, got {p}")));
    }
    let norm = w.lp_norm(p)?;
    if norm > 1.0 + 1e-12 {
        return Err(Error::precondition(format!("need ‖w‖_p <= 1, got {norm}")));
    }
    let (lambda, _) = estimate_lambda(w, cfg)?;
    constants_from(w.sup_norm(), lambda, p)
}

/// [`proposition_constants`] from a known sup norm and Λ.
pub fn constants_from(sup: f64, lambda: f64, p: f64) -> Result<(f64, usize)> {
    if !(lambda > 0.0) {
        return Err(Error::precondition("the constants need Λ > 0"));
    }
    let (a_exp, l_exp, m_exp) = if p.is_infinite() {
        (-1.0 / 3.0, 0.4, -0.2)
    } else {
        (-p / (3.0 * p - 2.0), 2.0 * p / (5.0 * p - 2.0), -(p - 2.0) / (5.0 * p - 2.0))
    };
    let alpha = sup.powf(a_exp) * lambda.powf(l_exp);
    let m = lambda.powf(m_exp).ceil().max(1.0) as usize;
    Ok((alpha, m))
}

/// Λ estimate used by the pipeline: exact when `n·r <= 15`, otherwise the
/// heuristic at refinement 2.
pub fn estimate_lambda(w: &StepGraphon, cfg: &RecoveryConfig) -> Result<(f64, SearchMode)> {
    let r = cfg.refinement.max(1);
    if w.n() * r <= LAMBDA_EXACT_CAP {
        Ok((lambda_exact(w, r)?.value, SearchMode::Exact))
    } else {
        let cert = lambda_heuristic(w, 2, cfg.restarts, cfg.seed)?;
        Ok((cert.value, SearchMode::Heuristic))
    }
}

fn approx_mode(w: &StepGraphon) -> SearchMode {
    if w.n() <= EXACT_SIDE_CAP {
        SearchMode::Exact
    } else {
        SearchMode::Heuristic
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `‖w − R‖_□` on the common refinement of both grids.
fn error_cut_norm(w: &StepGraphon, r: &StepGraphon, cfg: &RecoveryConfig) -> Result<(f64, CutNormMode)> {
    let l = w.n() / gcd(w.n(), r.n()) * r.n();
    let diff = w.refine(l / w.n())?.sub(&r.refine(l / r.n())?)?;
    let budget = CutNormBudget {
        exact_cap: cfg.cutnorm_cap,
        restarts: cfg.restarts,
        seed: cfg.seed,
    };
    let res = cut_norm(&diff, &budget);
    Ok((res.value, res.mode))
}

struct Clock(Option<Instant>);

impl Clock {
    fn start(on: bool) -> Self {
        Clock(on.then(Instant::now))
    }

    fn lap(&mut self) -> f64 {
        match &mut self.0 {
            Some(t) => {
                let ms = t.elapsed().as_secs_f64() * 1e3;
                *t = Instant::now();
                ms
            }
            None => 0.0,
        }
    }
}

fn clamp_alpha(alpha: f64, warnings: &mut Vec<String>) -> f64 {
    if alpha > ALPHA_MAX {
        warnings.push(format!("alpha {alpha:.6} clamped below 1"));
        ALPHA_MAX
    } else {
        alpha
    }
}

/// Recovery for bounded inputs.
///
/// Inputs with values in `[0,1]` use `α = ‖w‖_∞^{−1/3} Λ^{2/5}` and the bound
/// `44 Λ^{1/5}`; other kernels use `α = ‖w‖_∞^{−2/5} Λ^{2/5}` and
/// `44 ‖w‖_∞^{4/5} Λ^{1/5}`.
pub fn recover_bounded(w: &StepGraphon, cfg: &RecoveryConfig) -> Result<(RobinsonApprox, RecoveryReport)> {
    let mut clock = Clock::start(cfg.timings);
    let mut timings = Timings::default();
    let mut warnings = Vec::new();
    let grid_n = cfg.grid_n.unwrap_or(w.n());
    let (lambda, lambda_mode) = estimate_lambda(w, cfg)?;
    timings.lambda_ms = clock.lap();
    let sup = w.sup_norm();
    let graphon = w.min() >= 0.0 && w.max() <= 1.0;
    let mode = approx_mode(w);

    let (case_taken, alpha) = if lambda > 0.0 {
        let raw = if graphon {
            sup.powf(-1.0 / 3.0) * lambda.powf(0.4)
        } else {
            sup.powf(-0.4) * lambda.powf(0.4)
        };
        (CaseTaken::BoundedCorollary, clamp_alpha(raw, &mut warnings))
    } else if w.is_robinson(1e-12).robinson {
        (CaseTaken::AlphaZero, 0.0)
    } else {
        warnings.push(format!(
            "Λ estimate is 0 but the input is not Robinson; using alpha = 1/{}",
            w.n()
        ));
        (CaseTaken::FallbackMinAlpha, 1.0 / w.n() as f64)
    };
    let approx = robinson_approx(w, alpha, grid_n, mode)?;
    timings.approx_ms = clock.lap();
    let (measured_error, error_mode) = if case_taken == CaseTaken::AlphaZero {
        (0.0, CutNormMode::Exact)
    } else {
        error_cut_norm(w, &approx.values, cfg)?
    };
    timings.error_ms = clock.lap();
    let theoretical_bound = theoretical_bound(f64::INFINITY, lambda, (!graphon).then_some(sup))?;
    let report = RecoveryReport {
        p: f64::INFINITY,
        normalization_scale: 1.0,
        big_m: None,
        lambda_w: lambda,
        lambda_wm: None,
        lambda_mode,
        case_taken,
        alpha,
        grid_n: approx.grid_n,
        approx_mode: approx.mode,
        measured_error,
        measured_error_unscaled: measured_error,
        error_mode,
        theoretical_bound,
        warnings,
        timings: cfg.timings.then_some(timings),
    };
    Ok((approx, report))
}

/// Recovery for nonnegative `L^p` inputs, `5 < p < ∞`.
pub fn recover(w: &StepGraphon, p: f64, cfg: &RecoveryConfig) -> Result<(RobinsonApprox, RecoveryReport)> {
    if p.is_nan() || p <= 5.0 {
        return Err(Error::invalid(format!("recovery needs p > 5, got {p}")));
    }
    if p.is_infinite() {
        return Err(Error::invalid("p = inf goes through the bounded recovery path"));
    }
    if !w.is_nonnegative() {
        return Err(Error::precondition("recovery needs a nonnegative graphon"));
    }
    let mut clock = Clock::start(cfg.timings);
    let mut timings = Timings::default();
    let mut warnings = Vec::new();
    let grid_n = cfg.grid_n.unwrap_or(w.n());
    let mode = approx_mode(w);

    let norm = w.lp_norm(p)?;
    if norm == 0.0 {
        // The zero graphon is Robinson.
        let approx = robinson_approx(w, 0.0, grid_n.max(1), mode)?;
        let report = RecoveryReport {
            p,
            normalization_scale: 1.0,
            big_m: None,
            lambda_w: 0.0,
            lambda_wm: None,
            lambda_mode: SearchMode::Exact,
            case_taken: CaseTaken::AlphaZero,
            alpha: 0.0,
            grid_n: approx.grid_n,
            approx_mode: approx.mode,
            measured_error: 0.0,
            measured_error_unscaled: 0.0,
            error_mode: CutNormMode::Exact,
            theoretical_bound: 0.0,
            warnings,
            timings: cfg.timings.then_some(timings),
        };
        return Ok((approx, report));
    }
    let scale = 1.0 / norm;
    let v = w.scale(scale);

    let (lambda, lambda_mode) = estimate_lambda(&v, cfg)?;
    timings.lambda_ms = clock.lap();

    let mut big_m = None;
    let mut lambda_wm = None;
    let (case_taken, alpha) = if lambda == 0.0 {
        if v.is_robinson(1e-12).robinson {
            (CaseTaken::AlphaZero, 0.0)
        } else {
            warnings.push(format!(
                "Λ estimate is 0 but the input is not Robinson; using alpha = 1/{}",
                w.n()
            ));
            (CaseTaken::FallbackMinAlpha, 1.0 / w.n() as f64)
        }
    } else {
        let m = 2.0 * lambda.powf(-1.0 / (p - 1.0));
        let vm = v.cutoff(m)?.cutoff;
        let (lm, _) = estimate_lambda(&vm, cfg)?;
        big_m = Some(m);
        lambda_wm = Some(lm);
        timings.cutoff_ms = clock.lap();
        if lm > 0.0 {
            let raw = vm.sup_norm().powf(-0.4) * lm.powf(0.4);
            (CaseTaken::Case1, clamp_alpha(raw, &mut warnings))
        } else {
            let raw = m.powf(-0.4) * lambda.powf(0.4);
            (CaseTaken::Case2, clamp_alpha(raw, &mut warnings))
        }
    };

    let approx = robinson_approx(&v, alpha, grid_n, mode)?;
    timings.approx_ms = clock.lap();
    let (measured_error, error_mode) = if case_taken == CaseTaken::AlphaZero {
        (0.0, CutNormMode::Exact)
    } else {
        error_cut_norm(&v, &approx.values, cfg)?
    };
    timings.error_ms = clock.lap();

    let theoretical_bound = theoretical_bound(p, lambda, None)?;
    let unscaled = if case_taken == CaseTaken::AlphaZero {
        RobinsonApprox {
            values: if approx.grid_n == w.n() { w.clone() } else { approx.values.scale(norm) },
            ..approx
        }
    } else {
        RobinsonApprox {
            values: approx.values.scale(norm),
            ..approx
        }
    };
    let report = RecoveryReport {
        p,
        normalization_scale: scale,
        big_m,
        lambda_w: lambda,
        lambda_wm,
        lambda_mode,
        case_taken,
        alpha,
        grid_n: unscaled.grid_n,
        approx_mode: unscaled.mode,
        measured_error,
        measured_error_unscaled: measured_error * norm,
        error_mode,
        theoretical_bound,
        warnings,
        timings: cfg.timings.then_some(timings),
    };
    Ok((unscaled, report))
}
