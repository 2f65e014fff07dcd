//! Series solutions, dominant singularities and asymptotic constants.

pub mod family;
pub mod singular;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::real::{Real, DEFAULT_PRECISION};
use crate::series::{Scalar, Series, TruncSeries};

pub use family::{online_solve, simply_generated_series, CharacteristicFunction, Family, Shape};
pub use singular::{hint_from_series, solve_exp_singularity, solve_singular_system, BivariateMap, Partials, SingularPoint};

/// Truncation and numerical parameters shared by every constant.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticsConfig {
    /// Series order `N`.
    pub order: usize,
    /// Degree at which nested terms are frozen into polynomials.
    pub nested_degree: usize,
    /// Working precision in bits.
    pub precision: usize,
    /// Finite-difference step.
    pub fd_step: f64,
    /// Residual tolerance of the singularity solvers.
    pub tolerance: f64,
    /// Search interval for `α`.
    pub alpha_bracket: (f64, f64),
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig {
            order: 64,
            nested_degree: 40,
            precision: DEFAULT_PRECISION,
            fd_step: 1e-3,
            tolerance: 1e-20,
            alpha_bracket: ALPHA_BRACKET,
        }
    }
}

impl AsymptoticsConfig {
    /// Same configuration at twice the truncation.
    pub fn doubled(&self) -> Self {
        AsymptoticsConfig { order: self.order * 2, nested_degree: self.nested_degree * 2, ..self.clone() }
    }

    fn real(&self, v: i64) -> Real {
        Real::from_i64(v, self.precision)
    }
}

/// Bracket for `α` at `t = 2`.
pub const ALPHA_BRACKET: (f64, f64) = (0.338, 0.400);

/// Relative drift allowed when the finite-difference step is halved.
pub const MAX_FD_DRIFT: f64 = 1e-3;

/// Relative change allowed when the truncation order doubles.
pub const MAX_TRUNCATION_CHANGE: f64 = 1e-6;

fn exact_t(t: &Scalar) -> Option<BigRational> {
    match t {
        Scalar::Rational(q) if q.is_integer() => Some(q.clone()),
        _ => None,
    }
}

/// Coefficients of `P(x,t)` to order `n`; exact when `t` is an integer rational.
pub fn solve_polya_series(t: &Scalar, n: usize) -> Result<Series> {
    if let Some(q) = exact_t(t) {
        let mut f = Family::polya(q, n);
        return Ok(Series::Rational(f.series()?.clone()));
    }
    let mut f = Family::polya(t.to_real(DEFAULT_PRECISION), n);
    Ok(Series::Real(f.series()?.clone()))
}

/// Coefficients of `P_D(x,t)` to order `n` for a finite degree model.
pub fn solve_degree_series(m: &DegreeModel, t: &Scalar, n: usize) -> Result<Series> {
    if let Some(q) = exact_t(t) {
        let mut f = Family::degree(m, q, n)?;
        return Ok(Series::Rational(f.series()?.clone()));
    }
    let mut f = Family::degree(m, t.to_real(DEFAULT_PRECISION), n)?;
    Ok(Series::Real(f.series()?.clone()))
}

/// `ξ(x) = x exp(Σ_{j≥2} c(j,2)/j P(x^j,2j))`, exactly.
pub fn xi_series(n: usize) -> Result<TruncSeries<BigRational>> {
    let two = BigRational::from_integer(2.into());
    Family::polya(two, n).xi()
}

/// `ξ` in working precision.
pub fn xi_series_real(cfg: &AsymptoticsConfig) -> Result<TruncSeries<Real>> {
    Family::polya(cfg.real(2), cfg.order).xi()
}

#[derive(Clone, Debug)]
pub struct AlphaEstimate {
    pub alpha: Real,
    pub xi_prime: Real,
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// Root of `ξ(α) = e^{-1}` on the configured bracket.
pub fn estimate_alpha(cfg: &AsymptoticsConfig) -> Result<AlphaEstimate> {
    let xi = xi_series_real(cfg)?;
    let (lo, hi) = cfg.alpha_bracket;
    let (alpha, xi_prime, residual) = solve_exp_singularity(&xi, lo, hi, cfg.tolerance)?;
    Ok(AlphaEstimate { alpha, xi_prime, residual, bracket: cfg.alpha_bracket })
}

/// Constants of `p_n ~ A n^{3/2} c_l^n`.
#[derive(Clone, Debug)]
pub struct LabeledConstants {
    pub alpha: Real,
    pub xi_prime: f64,
    pub a: f64,
    pub c_l: f64,
}

pub fn labeled_constants(cfg: &AsymptoticsConfig) -> Result<LabeledConstants> {
    let est = estimate_alpha(cfg)?;
    let prec = cfg.precision;
    let e = Real::e(prec);
    let two_pi = Real::pi(prec).mul_i64(2);
    let a = (&(&two_pi * &e) * &(&est.alpha * &est.xi_prime)).sqrt();
    let c_l = &Real::one(prec) / &(&(&e * &e) * &est.alpha);
    Ok(LabeledConstants { xi_prime: est.xi_prime.to_f64(), a: a.to_f64(), c_l: c_l.to_f64(), alpha: est.alpha })
}

/// The same singularity found from the bivariate system `y = ξ(x) e^y`.
pub fn labeled_singular_point(cfg: &AsymptoticsConfig) -> Result<SingularPoint> {
    let mut fam = Family::polya(cfg.real(2), cfg.order);
    let cf = fam.characteristic(cfg.nested_degree)?;
    let map = BivariateMap::new(&cf);
    let hint = hint_from_series(fam.series()?)?;
    solve_singular_system(&map, (hint.0, cfg.real(1)), cfg.tolerance)
}

/// Singular point of `y = F(x,y)` for a finite degree model at real `t`.
pub fn degree_singular_point(model: &DegreeModel, t: &Real, cfg: &AsymptoticsConfig) -> Result<SingularPoint> {
    let mut fam = Family::degree(model, t.clone(), cfg.order)?;
    let cf = fam.characteristic(cfg.nested_degree)?;
    let map = BivariateMap::new(&cf);
    let hint = hint_from_series(fam.series()?)?;
    solve_singular_system(&map, hint, cfg.tolerance)
}

/// Constants of `g_n ~ C n^{3/2} δ^n` for a finite, aperiodic degree model.
#[derive(Clone, Debug)]
pub struct CollisionConstants {
    pub t1: SingularPoint,
    pub t2: SingularPoint,
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    pub delta: f64,
}

pub fn collision_constants(model: &DegreeModel, cfg: &AsymptoticsConfig) -> Result<CollisionConstants> {
    let DegreeModel::Finite { degrees, .. } = model else {
        return Err(Error::InvalidModel("collision constants need a finite degree set".into()));
    };
    let period = degrees.iter().filter(|&&k| k > 0).fold(0usize, |g, &k| num_integer::gcd(g, k - 1));
    if period != 1 {
        return Err(Error::InvalidModel(format!("degree set has period {period}")));
    }
    let t1 = degree_singular_point(model, &cfg.real(1), cfg)?;
    let t2 = degree_singular_point(model, &cfg.real(2), cfg)?;
    let k1 = t1.coefficient_constant();
    let k2 = t2.coefficient_constant();
    let c = &k2 / &(&k1 * &k1);
    let delta = &(&t1.x0 * &t1.x0) / &t2.x0;
    Ok(CollisionConstants { k1: k1.to_f64(), k2: k2.to_f64(), c: c.to_f64(), delta: delta.to_f64(), t1, t2 })
}

pub fn unary_binary_constants(cfg: &AsymptoticsConfig) -> Result<CollisionConstants> {
    collision_constants(&DegreeModel::unary_binary(), cfg)
}

/// `(A(α) + α R_d(α,1)) / (α e ξ'(α))` for the exponential family at integer `t`.
fn exp_mark_mean(t: i64, d: usize, cfg: &AsymptoticsConfig) -> Result<f64> {
    let mut fam = Family::polya(cfg.real(t), cfg.order);
    let xi = fam.xi()?;
    let (lo, hi) = if t == 2 { cfg.alpha_bracket } else { (0.05, 0.95) };
    let (alpha, xi_prime, _) = solve_exp_singularity(&xi, lo, hi, cfg.tolerance)?;
    let a = fam.mark_nested_sum(d)?.eval(&alpha);
    let r = fam.explicit_mark(d)?.eval(&alpha);
    let e = Real::e(cfg.precision);
    let num = &a + &(&alpha * &r);
    let den = &(&alpha * &e) * &xi_prime;
    Ok((&num / &den).to_f64())
}

/// Mean number of leaves per vertex for a pair of isomorphic labeled trees.
pub fn leaf_mean_constant(cfg: &AsymptoticsConfig) -> Result<f64> {
    exp_mark_mean(2, 0, cfg)
}

/// The same formula for a single labeled tree (`t = 1`); equals `e^{-1}`.
pub fn leaf_mean_baseline(cfg: &AsymptoticsConfig) -> Result<f64> {
    exp_mark_mean(1, 0, cfg)
}

/// Finite-difference mean and variance coefficients with their stability report.
#[derive(Clone, Debug, PartialEq)]
pub struct CltConstants {
    pub mu: f64,
    pub sigma2: f64,
    pub step: f64,
    /// Plain central differences at `step` and `step / 2`.
    pub mu_steps: (f64, f64),
    pub sigma2_steps: (f64, f64),
    pub mu_drift: f64,
    pub sigma2_drift: f64,
}

fn rel(a: &Real, b: &Real) -> f64 {
    let d = (a - b).to_f64().abs();
    let s = b.to_f64().abs();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// `L'(0)` and `L''(0)` from a five-point stencil at `h` and `h/2`, Richardson-combined.
/// `sign` multiplies both derivatives.
fn clt_from<F>(mut log_x0: F, h: f64, sign: i64, name: &str, prec: usize) -> Result<CltConstants>
where
    F: FnMut(&Real) -> Result<Real>,
{
    let h = Real::from_f64(h, prec);
    let hh = h.div_i64(2);
    let f0 = log_x0(&Real::zero(prec))?;
    let mut at = |k: i64, s: &Real| log_x0(&s.mul_i64(k));
    let (p1, m1, p2, m2) = (at(1, &h)?, at(-1, &h)?, at(2, &h)?, at(-2, &h)?);
    let (q1, n1) = (at(1, &hh)?, at(-1, &hh)?);
    // With step h/2, the points ±2(h/2) are ±h.
    let stencil = |f1: &Real, fm1: &Real, f2: &Real, fm2: &Real, step: &Real| {
        let d1 = &(&(f1 - fm1).mul_i64(8) - &(f2 - fm2)) / &step.mul_i64(12);
        let num = &(&(f1 + fm1).mul_i64(16) - &(f2 + fm2)) - &f0.mul_i64(30);
        let d2 = &num / &(step * step).mul_i64(12);
        (d1, d2)
    };
    let (d1h, d2h) = stencil(&p1, &m1, &p2, &m2, &h);
    let (d1q, d2q) = stencil(&q1, &n1, &p1, &m1, &hh);
    let rich = |coarse: &Real, fine: &Real| &(&fine.mul_i64(16) - coarse) / &Real::from_i64(15, prec);
    let mu = rich(&d1h, &d1q).mul_i64(sign);
    let sigma2 = -rich(&d2h, &d2q);
    let mu_drift = rel(&d1h, &d1q);
    let sigma2_drift = rel(&d2h, &d2q);
    if mu_drift >= MAX_FD_DRIFT {
        return Err(Error::UnstableDifference { quantity: format!("{name} mean"), drift: mu_drift });
    }
    if sigma2_drift >= MAX_FD_DRIFT {
        return Err(Error::UnstableDifference { quantity: format!("{name} variance"), drift: sigma2_drift });
    }
    let out = CltConstants {
        mu: mu.to_f64(),
        sigma2: sigma2.to_f64(),
        step: h.to_f64(),
        mu_steps: (d1h.mul_i64(sign).to_f64(), d1q.mul_i64(sign).to_f64()),
        sigma2_steps: (-d2h.to_f64(), -d2q.to_f64()),
        mu_drift,
        sigma2_drift,
    };
    if out.sigma2 < 0.0 {
        return Err(Error::Degenerate(format!("{name} variance is negative")));
    }
    Ok(out)
}

/// `μ, σ²` of `log W` for uniform Pólya trees with degrees in `D`.
pub fn logweight_clt_constants(model: &DegreeModel, cfg: &AsymptoticsConfig) -> Result<CltConstants> {
    clt_from(
        |t| Ok(degree_singular_point(model, t, cfg)?.x0.ln()),
        cfg.fd_step,
        -1,
        "log W",
        cfg.precision,
    )
}

/// `μ, σ²` of `log |Aut|` for uniform Pólya trees, and the labelings coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct AutClt {
    pub clt: CltConstants,
    /// Radius of convergence of `P(x,0)`.
    pub rho: f64,
    /// `μ + 1`, the linear coefficient in `E log L = n log n - (μ+1) n + (log n)/2 + O(1)`.
    pub labelings_linear: f64,
}

fn polya_radius(t: &Real, cfg: &AsymptoticsConfig) -> Result<Real> {
    let xi = Family::polya(t.clone(), cfg.order).xi()?;
    Ok(solve_exp_singularity(&xi, 0.25, 0.45, cfg.tolerance)?.0)
}

pub fn aut_clt_constants(cfg: &AsymptoticsConfig) -> Result<AutClt> {
    let clt = clt_from(|t| Ok(polya_radius(t, cfg)?.ln()), cfg.fd_step, 1, "log Aut", cfg.precision)?;
    let rho = polya_radius(&Real::zero(cfg.precision), cfg)?.to_f64();
    let labelings_linear = clt.mu + 1.0;
    Ok(AutClt { clt, rho, labelings_linear })
}

/// Means and covariance of the degree counts `(X_{d_1}, ...)` of isomorphic labeled pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeClt {
    pub degrees: Vec<usize>,
    /// `F_{u_d} / (x0 F_x)` at the bivariate singular point.
    pub means: Vec<f64>,
    /// `-∂ log x0 / ∂s_d`, for comparison.
    pub means_fd: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub step: f64,
    /// Largest relative drift under step halving.
    pub drift: f64,
}

pub fn degree_clt_constants(ds: &[usize], cfg: &AsymptoticsConfig) -> Result<DegreeClt> {
    if ds.is_empty() {
        return Err(Error::InvalidArgument("empty degree list".into()));
    }
    let prec = cfg.precision;
    let mut base = Family::polya(cfg.real(2), cfg.order);
    let cf = base.characteristic(cfg.nested_degree)?;
    let map = BivariateMap::new(&cf);
    let hint = hint_from_series(base.series()?)?;
    let mut sp = solve_singular_system(&map, (hint.0, cfg.real(1)), cfg.tolerance)?;
    let e_y0 = sp.y0.exp();
    let mut means = Vec::with_capacity(ds.len());
    for &d in ds {
        let a = base.mark_nested_sum(d)?.eval(&sp.x0);
        let r = base.explicit_mark(d)?.eval(&sp.x0);
        // F = x e^{y + S(u)} + x Σ (u_k - 1) R_k, differentiated at u = 1.
        let xi = cf.e.as_ref().expect("exponential family").eval(&sp.x0);
        let f_u = &(&(&xi * &e_y0) * &a) + &(&sp.x0 * &r);
        means.push((&f_u / &(&sp.x0 * &sp.f_x)).to_f64());
        sp.f_u.push(f_u);
    }

    let hint0 = (sp.x0.clone(), sp.y0.clone());
    let log_x0 = |s: &[Real]| -> Result<Real> {
        let marks: Vec<(usize, Real)> = ds.iter().zip(s).map(|(&d, v)| (d, v.exp())).collect();
        let mut fam = Family::marked_polya(cfg.real(2), &marks, cfg.order);
        let cf = fam.characteristic(cfg.nested_degree)?;
        let p = solve_singular_system(&BivariateMap::new(&cf), hint0.clone(), cfg.tolerance)?;
        Ok(p.x0.ln())
    };
    let k = ds.len();
    let zero = Real::zero(prec);
    let mut means_fd = vec![0.0; k];
    let mut cov = vec![vec![0.0; k]; k];
    let mut drift: f64 = 0.0;
    for i in 0..k {
        let c = clt_from(
            |v| {
                let mut s = vec![zero.clone(); k];
                s[i] = v.clone();
                log_x0(&s)
            },
            cfg.fd_step,
            -1,
            &format!("degree {}", ds[i]),
            prec,
        )?;
        means_fd[i] = c.mu;
        cov[i][i] = c.sigma2;
        drift = drift.max(c.mu_drift).max(c.sigma2_drift);
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mixed = |h: &Real| -> Result<Real> {
                let mut acc = Real::zero(prec);
                for (si, sj, sgn) in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)] {
                    let mut s = vec![zero.clone(); k];
                    s[i] = h.mul_i64(si);
                    s[j] = h.mul_i64(sj);
                    acc = &acc + &log_x0(&s)?.mul_i64(sgn);
                }
                Ok(&acc / &(h * h).mul_i64(4))
            };
            let h = Real::from_f64(cfg.fd_step, prec);
            let coarse = mixed(&h)?;
            let fine = mixed(&h.div_i64(2))?;
            let d = rel(&coarse, &fine);
            if d >= MAX_FD_DRIFT {
                return Err(Error::UnstableDifference {
                    quantity: format!("covariance of degrees {} and {}", ds[i], ds[j]),
                    drift: d,
                });
            }
            drift = drift.max(d);
            let v = -(&(&fine.mul_i64(4) - &coarse) / &Real::from_i64(3, prec)).to_f64();
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    Ok(DegreeClt { degrees: ds.to_vec(), means, means_fd, covariance: cov, step: cfg.fd_step, drift })
}

/// Runs `f` at `cfg` and at twice the truncation; every value must move by less than
/// [`MAX_TRUNCATION_CHANGE`] (relative).
pub fn truncation_check<F>(cfg: &AsymptoticsConfig, names: &[&str], mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&AsymptoticsConfig) -> Result<Vec<f64>>,
{
    let a = f(cfg)?;
    let b = f(&cfg.doubled())?;
    for ((x, y), name) in a.iter().zip(&b).zip(names.iter().chain(core::iter::repeat(&"value"))) {
        let change = if *y == 0.0 { (x - y).abs() } else { ((x - y) / y).abs() };
        if !(change < MAX_TRUNCATION_CHANGE) {
            return Err(Error::TruncationUnstable { quantity: String::from(*name), change });
        }
    }
    Ok(a)
}
