//! Parsing of model specifications, size ranges and number literals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use treeiso_core::model::DegreeModel;

use crate::failure::{Failure, Outcome};

/// Environment variable holding the default working precision in bits.
pub const PRECISION_ENV: &str = "TREEISO_PRECISION";

/// `7`, `-3`, `1/2` or `0.125`, exactly.
pub fn parse_rational(s: &str) -> Outcome<BigRational> {
    let s = s.trim();
    let bad = || Failure::invalid(format!("not a rational literal: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Failure::invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int = int.trim_start_matches(['-', '+']);
        let whole: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().map_err(|_| bad())? };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(whole * &scale + f, scale);
        return Ok(if neg { -v } else { v });
    }
    let v: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(v))
}

/// Comma-separated list.
pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> Outcome<T>) -> Outcome<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| item(p.trim())).collect()
}

pub fn parse_usize(s: &str) -> Outcome<usize> {
    s.trim().parse().map_err(|_| Failure::invalid(format!("not a non-negative integer: {s:?}")))
}

/// `n`, `a..b` or `a..=b` (both inclusive).
pub fn parse_range(s: &str) -> Outcome<Vec<usize>> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse_usize(a)?, parse_usize(b.trim_start_matches('='))?),
        None => {
            let n = parse_usize(s)?;
            (n, n)
        }
    };
    if a == 0 || b < a {
        return Err(Failure::invalid(format!("bad size range {s:?}")));
    }
    Ok((a..=b).collect())
}

/// `lo,hi`.
pub fn parse_interval(s: &str) -> Outcome<(f64, f64)> {
    let v = parse_list(s, |p| p.parse::<f64>().map_err(|_| Failure::invalid(format!("not a number: {p:?}"))))?;
    match v[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err(Failure::invalid(format!("expected lo,hi with lo < hi, got {s:?}"))),
    }
}

/// Model as named on the command line, with its resolved degree model.
#[derive(Clone, Debug, Serialize)]
pub struct ModelSpec {
    pub name: String,
    pub signature: String,
    #[serde(skip)]
    pub model: DegreeModel,
}

impl ModelSpec {
    fn new(name: &str, model: DegreeModel) -> Self {
        ModelSpec { name: name.into(), signature: model.signature(), model }
    }
}

/// `labeled`, `plane`, `ub`, `binary121`, `binary`, or a custom model from `--D`/`--w`.
pub fn resolve_model(name: Option<&str>, d: Option<&str>, w: Option<&str>) -> Outcome<ModelSpec> {
    if let Some(d) = d {
        if !matches!(name, None | Some("degree")) {
            return Err(Failure::invalid("--D only combines with --model degree"));
        }
        let degrees = parse_list(d, parse_usize)?;
        let weights = match w {
            Some(w) => parse_list(w, parse_rational)?,
            None => vec![BigRational::one(); degrees.len()],
        };
        if weights.iter().any(|x| x.is_negative()) {
            return Err(Failure::invalid("weights must be non-negative"));
        }
        return Ok(ModelSpec::new("degree", DegreeModel::finite(&degrees, &weights)?));
    }
    if w.is_some() {
        return Err(Failure::invalid("--w needs --D"));
    }
    let name = name.ok_or_else(|| Failure::invalid("a model is required (--model or --D/--w)"))?;
    let model = match name {
        "labeled" => DegreeModel::labeled(),
        "plane" => DegreeModel::plane(),
        "ub" | "unary-binary" => DegreeModel::unary_binary(),
        "binary121" => DegreeModel::binary121(),
        "binary" => DegreeModel::binary(),
        "degree" => return Err(Failure::invalid("--model degree needs --D")),
        other => return Err(Failure::invalid(format!("unknown model {other:?}"))),
    };
    Ok(ModelSpec::new(if name == "unary-binary" { "ub" } else { name }, model))
}

/// Precision from the flag, else from [`PRECISION_ENV`], else the library default.
pub fn resolve_precision(flag: Option<usize>) -> Outcome<usize> {
    let p = match flag {
        Some(p) => p,
        None => match std::env::var(PRECISION_ENV) {
            Ok(v) => parse_usize(&v).map_err(|_| Failure::invalid(format!("{PRECISION_ENV}={v:?} is not an integer")))?,
            Err(_) => treeiso_core::real::DEFAULT_PRECISION,
        },
    };
    if p < 64 {
        return Err(Failure::invalid(format!("precision {p} is below 64 bits")));
    }
    Ok(p)
}

/// Scientific rendering of `q` with exactly `digits` significant digits (round half up).
pub fn render_rational(q: &BigRational, digits: usize) -> String {
    let digits = digits.max(1);
    if q.is_zero() {
        return format!("{:.*e}", digits - 1, 0.0);
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let a = q.abs();
    let ten = BigInt::from(10);
    // Initial exponent guess from digit counts, then corrected.
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut scaled = (&a * pow10(digits as i64 - 1 - e) + &half).floor().to_integer();
    if scaled >= num_traits::pow(ten.clone(), digits) {
        scaled /= &ten;
        e += 1;
    }
    let s = scaled.to_string();
    let (head, tail) = s.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}
