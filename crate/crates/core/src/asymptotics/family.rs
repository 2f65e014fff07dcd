//! Nested functional equations for `P(x,t)`, `P_D(x,t)` and their marked variants.
//!
//! A family is solved level by level: level `m` is the same equation with
//! `t -> m t` and every degree multiplier `g_k -> g_k^m`, truncated at
//! `order / m`. The term `P(x^i, i t)` of level `m` is level `m i` evaluated
//! at `x^i`, so the recursion is finite.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::partitions::{factorial, CTable};
use crate::series::{Field, TruncSeries};

/// Shape of the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `x exp(y + Σ_{i≥2} c_i Q_i / i)` plus finitely many corrected degrees.
    Exp,
    /// `x Σ_{k∈D} g_k R_k(x, y)` over a finite degree set.
    Finite,
}

#[derive(Clone, Debug)]
struct Level<S: Field> {
    series: TruncSeries<S>,
    ctab: CTable<S>,
    /// `Q_i = P^{(m i)}(x^i)` for `i = 2..=order`, at this level's order.
    q: Vec<TruncSeries<S>>,
}

/// The right-hand side `F(x, y) = E(x) e^y + Σ_p B_p(x) y^p` with nested terms frozen.
#[derive(Clone, Debug)]
pub struct CharacteristicFunction<S: Field> {
    pub e: Option<TruncSeries<S>>,
    pub b: Vec<TruncSeries<S>>,
}

/// A solved (memoized) equation family.
#[derive(Clone, Debug)]
pub struct Family<S: Field> {
    shape: Shape,
    t: S,
    degrees: Vec<usize>,
    g: Vec<S>,
    order: usize,
    levels: BTreeMap<usize, Level<S>>,
    marks: BTreeMap<(usize, usize), TruncSeries<S>>,
}

impl<S: Field> Family<S> {
    /// `P(x,t) = x exp(P(x,t) + Σ_{j≥2} c(j,t)/j P(x^j, jt))`.
    pub fn polya(t: S, order: usize) -> Self {
        Self::marked_polya(t, &[], order)
    }

    /// Pólya family whose vertices of out-degree `d` carry the factor `u_d`.
    pub fn marked_polya(t: S, marks: &[(usize, S)], order: usize) -> Self {
        let mut m: Vec<(usize, S)> = marks.to_vec();
        m.sort_by_key(|p| p.0);
        Family {
            shape: Shape::Exp,
            t,
            degrees: m.iter().map(|p| p.0).collect(),
            g: m.into_iter().map(|p| p.1).collect(),
            order,
            levels: BTreeMap::new(),
            marks: BTreeMap::new(),
        }
    }

    /// `P_D(x,t) = x Σ_{k∈D} (w_k k!)^t Σ_{λ⊢k} Π_j (c(j,t) P_D(x^j,jt))^{λ_j} / (j^{λ_j} λ_j!)`.
    pub fn degree(model: &DegreeModel, t: S, order: usize) -> Result<Self> {
        Self::marked_degree(model, t, &[], order)
    }

    /// Degree family with per-degree marks `u_k` multiplying `(w_k k!)^t`.
    pub fn marked_degree(model: &DegreeModel, t: S, marks: &[(usize, S)], order: usize) -> Result<Self> {
        let DegreeModel::Finite { degrees, weights } = model else {
            return Err(Error::InvalidModel("degree families need a finite degree set".into()));
        };
        let ctx = t.ctx();
        let mut g = Vec::with_capacity(degrees.len());
        for (&k, w) in degrees.iter().zip(weights) {
            let base = w * BigRational::from_integer(BigInt::from(factorial(k as u32)));
            let mut gk = if num_traits::Zero::is_zero(&base) {
                S::zero(ctx)
            } else {
                S::from_ratio(&base, ctx).pow(&t)?
            };
            if let Some((_, u)) = marks.iter().find(|p| p.0 == k) {
                gk = gk.mul(u);
            }
            g.push(gk);
        }
        Ok(Family {
            shape: Shape::Finite,
            t,
            degrees: degrees.clone(),
            g,
            order,
            levels: BTreeMap::new(),
            marks: BTreeMap::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn t(&self) -> &S {
        &self.t
    }

    fn ctx(&self) -> S::Ctx {
        self.t.ctx()
    }

    fn max_degree(&self) -> usize {
        self.degrees.last().copied().unwrap_or(0)
    }

    /// Coefficient `γ_k` of `R_k` at level `m`.
    fn gamma(&self, idx: usize, m: usize) -> S {
        let gm = self.g[idx].powi(m as u32);
        match self.shape {
            Shape::Exp => gm.sub(&S::one(self.ctx())),
            Shape::Finite => gm,
        }
    }

    /// The solved series of level `m` (order `order / m`).
    pub fn level(&mut self, m: usize) -> Result<&TruncSeries<S>> {
        self.ensure_level(m)?;
        Ok(&self.levels[&m].series)
    }

    /// The series at level one.
    pub fn series(&mut self) -> Result<&TruncSeries<S>> {
        self.level(1)
    }

    fn ensure_level(&mut self, m: usize) -> Result<()> {
        if self.levels.contains_key(&m) {
            return Ok(());
        }
        let ord = self.order / m;
        let ctx = self.ctx();
        let tm = self.t.mul_i64(m as i64);
        if ord == 0 {
            let ctab = CTable::new(tm, 1)?;
            self.levels.insert(m, Level { series: TruncSeries::zero(0, ctx), ctab, q: Vec::new() });
            return Ok(());
        }
        for i in 2..=ord {
            self.ensure_level(m * i)?;
        }
        let ctab = CTable::new(tm, ord)?;
        let q: Vec<TruncSeries<S>> =
            (2..=ord).map(|i| self.levels[&(m * i)].series.substitute_power(i, ord)).collect();
        let kmax = self.max_degree();
        let ys = y_terms(&ctab, &q, kmax, ord, ctx);
        let s = match self.shape {
            Shape::Exp => Some(s_term(&ctab, &q, ord, ctx)),
            Shape::Finite => None,
        };
        let b = self.b_terms(&ys, m, ord);
        let series = online_solve(s.as_ref(), &b, ord, ctx)?;
        self.levels.insert(m, Level { series, ctab, q });
        Ok(())
    }

    /// `B_p = Σ_{k≥p} γ_k / p! · Y_{k-p}` for `p = 0..=max degree`.
    fn b_terms(&self, ys: &[TruncSeries<S>], m: usize, ord: usize) -> Vec<TruncSeries<S>> {
        let ctx = self.ctx();
        let kmax = self.max_degree();
        let mut b = vec![TruncSeries::zero(ord, ctx); kmax + 1];
        for (idx, &k) in self.degrees.iter().enumerate() {
            let gamma = self.gamma(idx, m);
            if gamma.is_zero() {
                continue;
            }
            let mut pf = S::one(ctx);
            for p in 0..=k {
                if p > 0 {
                    pf = pf.mul_i64(p as i64);
                }
                let coeff = gamma.div(&pf);
                b[p] = b[p].add(&ys[k - p].scale(&coeff));
            }
        }
        b
    }

    /// Frozen right-hand side at level one, nested terms truncated at degree `nested_degree`.
    pub fn characteristic(&mut self, nested_degree: usize) -> Result<CharacteristicFunction<S>> {
        self.ensure_level(1)?;
        let ctx = self.ctx();
        let ord = self.order;
        let lvl = &self.levels[&1];
        let q: Vec<TruncSeries<S>> = lvl.q.iter().map(|s| s.truncate(nested_degree).resized(ord)).collect();
        let ys = y_terms(&lvl.ctab, &q, self.max_degree(), ord, ctx);
        let x = TruncSeries::x(ord, ctx);
        let e = match self.shape {
            Shape::Exp => Some(s_term(&lvl.ctab, &q, ord, ctx).exp()?.mul(&x)),
            Shape::Finite => None,
        };
        let b = self.b_terms(&ys, 1, ord).into_iter().map(|s| s.mul(&x)).collect();
        Ok(CharacteristicFunction { e, b })
    }

    /// `ξ(x) = x exp(Σ_{j≥2} c(j,t)/j P(x^j, jt))` for the Pólya family.
    pub fn xi(&mut self) -> Result<TruncSeries<S>> {
        if self.shape != Shape::Exp {
            return Err(Error::InvalidArgument("ξ is defined for the Pólya family".into()));
        }
        self.ensure_level(1)?;
        let ctx = self.ctx();
        let ord = self.order;
        let lvl = &self.levels[&1];
        let s = s_term(&lvl.ctab, &lvl.q, ord, ctx);
        Ok(s.exp()?.mul(&TruncSeries::x(ord, ctx)))
    }

    /// `A(x) = Σ_{j≥2} c(j,t) M_d(x^j, jt)` where `M_d = ∂_u P` at `u = 1`.
    pub fn mark_nested_sum(&mut self, d: usize) -> Result<TruncSeries<S>> {
        self.ensure_mark(d, 1)?;
        let ord = self.order;
        Ok(self.nested_mark_sum(d, 1, ord))
    }

    /// Series `M_d(x,t) = ∂P(x,t,u)/∂u_d` at `u = 1` (leaves: `d = 0`).
    pub fn mark_derivative(&mut self, d: usize) -> Result<&TruncSeries<S>> {
        self.ensure_mark(d, 1)?;
        Ok(&self.marks[&(d, 1)])
    }

    /// `R_d(x, 1) = Σ_{p≤d} Y_{d-p}(x) / p!`, the explicit `u_d` coefficient at `y = 1`.
    pub fn explicit_mark(&mut self, d: usize) -> Result<TruncSeries<S>> {
        self.ensure_level(1)?;
        let ctx = self.ctx();
        let ord = self.order;
        let lvl = &self.levels[&1];
        let ys = y_terms(&lvl.ctab, &lvl.q, d, ord, ctx);
        let mut r = TruncSeries::zero(ord, ctx);
        let mut pf = S::one(ctx);
        for p in 0..=d {
            if p > 0 {
                pf = pf.mul_i64(p as i64);
            }
            r = r.add(&ys[d - p].scale(&S::one(ctx).div(&pf)));
        }
        Ok(r)
    }

    fn nested_mark_sum(&self, d: usize, m: usize, ord: usize) -> TruncSeries<S> {
        let ctx = self.ctx();
        let lvl = &self.levels[&m];
        let mut a = TruncSeries::zero(ord, ctx);
        for i in 2..=ord {
            let sub = self.marks[&(d, m * i)].substitute_power(i, ord);
            a = a.add(&sub.scale(lvl.ctab.get(i)));
        }
        a
    }

    fn ensure_mark(&mut self, d: usize, m: usize) -> Result<()> {
        if self.shape != Shape::Exp || !self.degrees.is_empty() {
            return Err(Error::InvalidArgument("mark derivatives are taken on the unmarked Pólya family".into()));
        }
        if self.marks.contains_key(&(d, m)) {
            return Ok(());
        }
        self.ensure_level(m)?;
        let ord = self.order / m;
        let ctx = self.ctx();
        if ord == 0 {
            self.marks.insert((d, m), TruncSeries::zero(0, ctx));
            return Ok(());
        }
        for i in 2..=ord {
            self.ensure_mark(d, m * i)?;
        }
        let a = self.nested_mark_sum(d, m, ord);
        let lvl = &self.levels[&m];
        let p = &lvl.series;
        let ys = y_terms(&lvl.ctab, &lvl.q, d, ord, ctx);
        // R_d(x, P) = Σ_{p≤d} P^p / p! · Y_{d-p}
        let mut r = TruncSeries::zero(ord, ctx);
        let mut pp = TruncSeries::one(ord, ctx);
        let mut pf = S::one(ctx);
        for k in 0..=d {
            if k > 0 {
                pp = pp.mul(p);
                pf = pf.mul_i64(k as i64);
            }
            r = r.add(&pp.mul(&ys[d - k]).scale(&S::one(ctx).div(&pf)));
        }
        let x = TruncSeries::x(ord, ctx);
        let num = p.mul(&a).add(&x.mul(&r));
        let one_minus_p = TruncSeries::one(ord, ctx).sub(p);
        let mser = num.mul(&one_minus_p.inverse()?);
        self.marks.insert((d, m), mser);
        Ok(())
    }
}

/// `Y_r = [z^r] exp(Σ_{i≥2} c_i Q_i z^i / i)` for `r = 0..=kmax`.
fn y_terms<S: Field>(ctab: &CTable<S>, q: &[TruncSeries<S>], kmax: usize, ord: usize, ctx: S::Ctx) -> Vec<TruncSeries<S>> {
    let mut ys: Vec<TruncSeries<S>> = Vec::with_capacity(kmax + 1);
    ys.push(TruncSeries::one(ord, ctx));
    for r in 1..=kmax {
        let mut acc = TruncSeries::zero(ord, ctx);
        for i in 2..=r {
            let Some(qi) = q.get(i - 2) else { break };
            if i > ctab.max_j() {
                break;
            }
            acc = acc.add(&qi.mul(&ys[r - i]).scale(ctab.get(i)));
        }
        ys.push(acc.scale(&S::one(ctx).div_i64(r as i64)));
    }
    ys
}

/// `Σ_{i≥2} c_i Q_i / i`
fn s_term<S: Field>(ctab: &CTable<S>, q: &[TruncSeries<S>], ord: usize, ctx: S::Ctx) -> TruncSeries<S> {
    let mut s = TruncSeries::zero(ord, ctx);
    for (k, qi) in q.iter().enumerate() {
        let i = k + 2;
        s = s.add(&qi.scale(&ctab.get(i).div_i64(i as i64)));
    }
    s
}

/// Solves `y = x (exp(y + S) + Σ_p B_p y^p)` (exp part only when `s` is given),
/// one coefficient at a time.
pub fn online_solve<S: Field>(
    s: Option<&TruncSeries<S>>,
    b: &[TruncSeries<S>],
    ord: usize,
    ctx: S::Ctx,
) -> Result<TruncSeries<S>> {
    let pmax = b.len().saturating_sub(1);
    let zero = S::zero(ctx);
    let mut y = vec![zero.clone(); ord + 1];
    let mut pw = vec![vec![zero.clone(); ord + 1]; pmax + 1];
    pw[0][0] = S::one(ctx);
    let mut e = vec![zero.clone(); ord + 1];
    if let Some(s) = s {
        e[0] = s.coeff(0).exp()?;
    }
    for n in 1..=ord {
        let k = n - 1;
        if k >= 1 {
            for p in 1..=pmax {
                let mut acc = zero.clone();
                for i in 1..=k {
                    let prev = &pw[p - 1][k - i];
                    if y[i].is_zero() || prev.is_zero() {
                        continue;
                    }
                    acc = acc.add(&y[i].mul(prev));
                }
                pw[p][k] = acc;
            }
            if let Some(s) = s {
                let mut acc = zero.clone();
                for i in 1..=k {
                    let a = y[i].add(&s.coeff(i));
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul_i64(i as i64).mul(&e[k - i]));
                }
                e[k] = acc.div_i64(k as i64);
            }
        }
        let mut g = if s.is_some() { e[k].clone() } else { zero.clone() };
        for (p, bp) in b.iter().enumerate() {
            for a in 0..=k {
                let c = &bp.coeffs()[a];
                let w = &pw[p][k - a];
                if c.is_zero() || w.is_zero() {
                    continue;
                }
                g = g.add(&c.mul(w));
            }
        }
        y[n] = g;
    }
    Ok(TruncSeries::from_coeffs(y, ord, ctx))
}

/// `T = x Φ(T)` by plain fixed-point iteration on truncated series (`Φ` truncated at `ord`).
pub fn simply_generated_series(model: &DegreeModel, ord: usize) -> TruncSeries<BigRational> {
    let phi: Vec<BigRational> = (0..=ord).map(|k| model.weight(k).unwrap_or_else(num_traits::Zero::zero)).collect();
    let x = TruncSeries::<BigRational>::x(ord, ());
    let mut t = TruncSeries::<BigRational>::zero(ord, ());
    for _ in 0..=ord {
        let mut acc = TruncSeries::zero(ord, ());
        let mut pw = TruncSeries::one(ord, ());
        for w in &phi {
            if !num_traits::Zero::is_zero(w) {
                acc = acc.add(&pw.scale(w));
            }
            pw = pw.mul(&t);
        }
        let next = acc.mul(&x);
        if next == t {
            break;
        }
        t = next;
    }
    t
}
