//! Dominant singularities of `y = F(x, y)`.

use alloc::format;
use alloc::vec::Vec;

use crate::asymptotics::family::CharacteristicFunction;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::series::TruncSeries;

/// Solution of `y = F(x,y)`, `1 = F_y(x,y)` with the partials the coefficient law needs.
#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub x0: Real,
    pub y0: Real,
    pub f_x: Real,
    pub f_yy: Real,
    /// `F_{u_i}` for marked systems, in mark order.
    pub f_u: Vec<Real>,
    pub residual: f64,
    pub iterations: usize,
}

impl SingularPoint {
    /// `K` in `[x^n] y ~ K x0^{-n} n^{-3/2}`.
    pub fn coefficient_constant(&self) -> Real {
        let prec = self.x0.precision();
        let two_pi = Real::pi(prec).mul_i64(2);
        (&(&self.x0 * &self.f_x) / &(&two_pi * &self.f_yy)).sqrt()
    }
}

/// Values and partial derivatives of `F` at a point.
#[derive(Clone, Debug)]
pub struct Partials {
    pub f: Real,
    pub f_x: Real,
    pub f_y: Real,
    pub f_yy: Real,
    pub f_xy: Real,
}

/// `F` with its `x`-derivatives precomputed for repeated evaluation.
#[derive(Clone, Debug)]
pub struct BivariateMap {
    e: Option<(TruncSeries<Real>, TruncSeries<Real>)>,
    b: Vec<(TruncSeries<Real>, TruncSeries<Real>)>,
    prec: usize,
}

impl BivariateMap {
    pub fn new(cf: &CharacteristicFunction<Real>) -> Self {
        let prec = cf
            .e
            .as_ref()
            .map(|s| s.ctx())
            .or_else(|| cf.b.first().map(|s| s.ctx()))
            .unwrap_or(crate::real::DEFAULT_PRECISION);
        BivariateMap {
            e: cf.e.as_ref().map(|s| (s.clone(), s.derivative())),
            b: cf.b.iter().map(|s| (s.clone(), s.derivative())).collect(),
            prec,
        }
    }

    pub fn partials(&self, x: &Real, y: &Real) -> Partials {
        let zero = Real::zero(self.prec);
        let (mut f, mut f_x, mut f_y, mut f_yy, mut f_xy) =
            (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone());
        if let Some((e, de)) = &self.e {
            let ey = y.exp();
            let ev = &e.eval(x) * &ey;
            let dv = &de.eval(x) * &ey;
            f = &f + &ev;
            f_y = &f_y + &ev;
            f_yy = &f_yy + &ev;
            f_x = &f_x + &dv;
            f_xy = &f_xy + &dv;
        }
        // y^p and its first two derivatives in y.
        let mut ypow: Vec<Real> = Vec::with_capacity(self.b.len());
        let mut acc = Real::one(self.prec);
        for _ in 0..self.b.len() {
            ypow.push(acc.clone());
            acc = &acc * y;
        }
        for (p, (bp, dbp)) in self.b.iter().enumerate() {
            let bv = bp.eval(x);
            let dv = dbp.eval(x);
            f = &f + &(&bv * &ypow[p]);
            f_x = &f_x + &(&dv * &ypow[p]);
            if p >= 1 {
                f_y = &f_y + &(&bv * &ypow[p - 1]).mul_i64(p as i64);
                f_xy = &f_xy + &(&dv * &ypow[p - 1]).mul_i64(p as i64);
            }
            if p >= 2 {
                f_yy = &f_yy + &(&bv * &ypow[p - 2]).mul_i64((p * (p - 1)) as i64);
            }
        }
        Partials { f, f_x, f_y, f_yy, f_xy }
    }
}

fn residual_of(p: &Partials, y: &Real) -> f64 {
    let r1 = (&p.f - y).to_f64().abs();
    let r2 = (&p.f_y - &Real::one(y.precision())).to_f64().abs();
    r1.max(r2)
}

/// Damped Newton on the characteristic system starting from `hint = (x, y)`.
pub fn solve_singular_system(map: &BivariateMap, hint: (Real, Real), tol: f64) -> Result<SingularPoint> {
    const MAX_ITER: usize = 200;
    let (mut x, mut y) = hint;
    let mut p = map.partials(&x, &y);
    let mut res = residual_of(&p, &y);
    let one = Real::one(map.prec);
    for it in 0..MAX_ITER {
        if res < tol {
            return finish(x, y, p, res, it);
        }
        let r1 = &p.f - &y;
        let r2 = &p.f_y - &one;
        let j11 = p.f_x.clone();
        let j12 = &p.f_y - &one;
        let j21 = p.f_xy.clone();
        let j22 = p.f_yy.clone();
        let det = &(&j11 * &j22) - &(&j12 * &j21);
        if det.is_zero() || !det.is_finite() || det.to_f64().abs() < 1e-300 {
            return Err(Error::SingularJacobian { iteration: it });
        }
        let dx = &(&(&r1 * &j22) - &(&j12 * &r2)) / &det;
        let dy = &(&(&j11 * &r2) - &(&j21 * &r1)) / &det;
        let mut lambda = Real::one(map.prec);
        let mut accepted = false;
        for _ in 0..30 {
            let nx = &x - &(&lambda * &dx);
            let ny = &y - &(&lambda * &dy);
            if nx.is_negative() || nx.is_zero() {
                lambda = lambda.div_i64(2);
                continue;
            }
            let np = map.partials(&nx, &ny);
            let nres = residual_of(&np, &ny);
            if nres.is_finite() && (nres < res || nres < tol) {
                x = nx;
                y = ny;
                p = np;
                res = nres;
                accepted = true;
                break;
            }
            lambda = lambda.div_i64(2);
        }
        if !accepted {
            return Err(Error::Divergence { residual: res });
        }
    }
    if res < tol {
        return finish(x, y, p, res, MAX_ITER);
    }
    Err(Error::Divergence { residual: res })
}

fn finish(x: Real, y: Real, p: Partials, res: f64, it: usize) -> Result<SingularPoint> {
    if x.is_negative() || y.is_negative() {
        return Err(Error::Degenerate(format!("negative solution x={} y={}", x.to_f64(), y.to_f64())));
    }
    if p.f_x.is_zero() || p.f_x.is_negative() {
        return Err(Error::Degenerate("F_x vanishes at the singular point".into()));
    }
    if p.f_yy.is_zero() || p.f_yy.is_negative() {
        return Err(Error::Degenerate("F_yy vanishes at the singular point".into()));
    }
    Ok(SingularPoint { x0: x, y0: y, f_x: p.f_x, f_yy: p.f_yy, f_u: Vec::new(), residual: res, iterations: it })
}

/// Starting point from the tail of the solved series: `x` from the ratio of the
/// last two nonzero coefficients corrected for `n^{-3/2}`, `y` from the partial sum.
pub fn hint_from_series(series: &TruncSeries<Real>) -> Result<(Real, Real)> {
    let cs = series.coeffs();
    let nz: Vec<usize> = (1..cs.len()).filter(|&k| !cs[k].is_zero()).collect();
    if nz.len() < 2 {
        return Err(Error::Degenerate("series too short to locate a singularity".into()));
    }
    let j = nz[nz.len() - 1];
    let i = nz[nz.len() - 2];
    let ratio = cs[i].to_f64() / cs[j].to_f64();
    let x = (ratio * (i as f64 / j as f64).powf(1.5)).powf(1.0 / (j - i) as f64);
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Degenerate("nonpositive coefficient ratio".into()));
    }
    let prec = series.ctx();
    let xr = Real::from_f64(x, prec);
    let y = series.eval(&xr);
    Ok((xr, y))
}

/// Root of `ξ(x) = e^{-1}` in `[lo, hi]`: bisection, then Newton with `ξ'`.
pub fn solve_exp_singularity(xi: &TruncSeries<Real>, lo: f64, hi: f64, tol: f64) -> Result<(Real, Real, f64)> {
    let prec = xi.ctx();
    let target = Real::from_i64(-1, prec).exp();
    let dxi = xi.derivative();
    let g = |x: &Real| &xi.eval(x) - &target;
    let mut a = Real::from_f64(lo, prec);
    let mut b = Real::from_f64(hi, prec);
    let ga = g(&a);
    let gb = g(&b);
    if ga.is_negative() == gb.is_negative() {
        return Err(Error::NoBracket { lo, hi });
    }
    let a_neg = ga.is_negative();
    for _ in 0..64 {
        let mid = (&a + &b).div_i64(2);
        let gm = g(&mid);
        if gm.is_negative() == a_neg {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut x = (&a + &b).div_i64(2);
    let mut res = g(&x).to_f64().abs();
    for _ in 0..60 {
        if res < tol {
            break;
        }
        let d = dxi.eval(&x);
        if d.is_zero() {
            return Err(Error::SingularJacobian { iteration: 0 });
        }
        x = &x - &(&g(&x) / &d);
        res = g(&x).to_f64().abs();
    }
    if res >= tol {
        return Err(Error::Divergence { residual: res });
    }
    let d = dxi.eval(&x);
    Ok((x, d, res))
}
