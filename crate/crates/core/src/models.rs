//! Catalogue of growth models for fault-counting curves.
//!
//! Nine general families `phi1..phi9` (rational, logarithmic, poly-log,
//! exponential and polynomial) plus the poly-logarithmic ladder
//! `lam1..lam7`. Logarithms are natural; `L` below stands for `ln(x + 1)`.
//!
//! | id     | formula                                   |
//! |--------|-------------------------------------------|
//! | `phi1` | `a x / (x + B)`                           |
//! | `phi2` | `(a x^3 + b x^2 + c x + d) / (A x^3 + B x^2 + C x + D)` |
//! | `phi3` | `(a x^b + c) / (A x^B + C)`               |
//! | `phi4` | `a L^b + c`                               |
//! | `phi5` | `a L^3 + b L^2 + c L + d`                 |
//! | `phi6` | `a b^(x^(1/c)) + d`                       |
//! | `phi7` | `a x^3 + b x^2 + c x + d`                 |
//! | `phi8` | `a x^b + c`                               |
//! | `phi9` | `a x^-3 + b x^-2 + c x^-1 + d`            |
//! | `lamK` | `c0 + sum_{j=1..K} cj L^j`, K = 1..5      |
//! | `lam6` | same as `phi4`                            |
//! | `lam7` | `a L^(1/b) + c`                           |
//!
//! Non-integer powers are `x^e = exp(e ln x)` with `0^e = 0` for `e > 0`.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
    Phi5,
    Phi6,
    Phi7,
    Phi8,
    Phi9,
    Lam1,
    Lam2,
    Lam3,
    Lam4,
    Lam5,
    Lam6,
    Lam7,
}

impl ModelId {
    pub const ALL: [ModelId; 16] = [
        ModelId::Phi1,
        ModelId::Phi2,
        ModelId::Phi3,
        ModelId::Phi4,
        ModelId::Phi5,
        ModelId::Phi6,
        ModelId::Phi7,
        ModelId::Phi8,
        ModelId::Phi9,
        ModelId::Lam1,
        ModelId::Lam2,
        ModelId::Lam3,
        ModelId::Lam4,
        ModelId::Lam5,
        ModelId::Lam6,
        ModelId::Lam7,
    ];

    pub const PHI: [ModelId; 9] = [
        ModelId::Phi1,
        ModelId::Phi2,
        ModelId::Phi3,
        ModelId::Phi4,
        ModelId::Phi5,
        ModelId::Phi6,
        ModelId::Phi7,
        ModelId::Phi8,
        ModelId::Phi9,
    ];

    /// The poly-log ladder of fixed degree, `lam1..lam5`.
    pub const LADDER: [ModelId; 5] = [
        ModelId::Lam1,
        ModelId::Lam2,
        ModelId::Lam3,
        ModelId::Lam4,
        ModelId::Lam5,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModelId::Phi1 => "phi1",
            ModelId::Phi2 => "phi2",
            ModelId::Phi3 => "phi3",
            ModelId::Phi4 => "phi4",
            ModelId::Phi5 => "phi5",
            ModelId::Phi6 => "phi6",
            ModelId::Phi7 => "phi7",
            ModelId::Phi8 => "phi8",
            ModelId::Phi9 => "phi9",
            ModelId::Lam1 => "lam1",
            ModelId::Lam2 => "lam2",
            ModelId::Lam3 => "lam3",
            ModelId::Lam4 => "lam4",
            ModelId::Lam5 => "lam5",
            ModelId::Lam6 => "lam6",
            ModelId::Lam7 => "lam7",
        }
    }

    /// Degree of a fixed-degree poly-log ladder model.
    pub fn ladder_degree(self) -> Option<usize> {
        match self {
            ModelId::Lam1 => Some(1),
            ModelId::Lam2 => Some(2),
            ModelId::Lam3 => Some(3),
            ModelId::Lam4 => Some(4),
            ModelId::Lam5 => Some(5),
            _ => None,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            ModelId::Phi1 => 2,
            ModelId::Phi2 => 8,
            ModelId::Phi3 => 6,
            ModelId::Phi4 | ModelId::Phi8 | ModelId::Lam6 | ModelId::Lam7 => 3,
            ModelId::Phi5 | ModelId::Phi6 | ModelId::Phi7 | ModelId::Phi9 => 4,
            other => other.ladder_degree().expect("ladder model") + 1,
        }
    }

    pub fn spec(self) -> ModelSpec {
        let free = Bound::FREE;
        let exponent = Bound::new(0.05, 6.0);
        let (names, bounds, note): (&[&str], Vec<Bound>, &str) = match self {
            ModelId::Phi1 => (&["a", "B"], vec![free; 2], "pole where x = -B"),
            ModelId::Phi2 => (
                &["a", "b", "c", "d", "A", "B", "C", "D"],
                vec![free; 8],
                "pole where the cubic denominator vanishes",
            ),
            ModelId::Phi3 => (
                &["a", "b", "c", "A", "B", "C"],
                vec![free, exponent, free, free, exponent, free],
                "pole where A x^B + C vanishes",
            ),
            ModelId::Phi4 | ModelId::Lam6 => (
                &["a", "b", "c"],
                vec![free, exponent, free],
                "defined for x >= 0",
            ),
            ModelId::Phi5 => (&["a", "b", "c", "d"], vec![free; 4], "defined for x >= 0"),
            ModelId::Phi6 => (
                &["a", "b", "c", "d"],
                vec![free, Bound::new(f64::MIN_POSITIVE, 1e3), Bound::new(1.0, 10.0), free],
                "base b > 0; may overflow for large x",
            ),
            ModelId::Phi7 => (&["a", "b", "c", "d"], vec![free; 4], "defined everywhere"),
            ModelId::Phi8 => (&["a", "b", "c"], vec![free, exponent, free], "defined for x >= 0"),
            ModelId::Phi9 => (&["a", "b", "c", "d"], vec![free; 4], "defined for x > 0"),
            ModelId::Lam7 => (
                &["a", "b", "c"],
                vec![free, Bound::new(0.2, 5.0), free],
                "defined for x >= 0",
            ),
            ladder => {
                const NAMES: [&str; 6] = ["c0", "c1", "c2", "c3", "c4", "c5"];
                let k = ladder.ladder_degree().expect("ladder model");
                (&NAMES[..=k], vec![free; k + 1], "defined for x >= 0")
            }
        };
        ModelSpec {
            id: self,
            param_names: names.to_vec(),
            bounds,
            domain_note: note,
        }
    }

    /// Index of the additive constant term, if the model has one.
    pub fn constant_term(self) -> Option<usize> {
        match self {
            ModelId::Phi1 | ModelId::Phi2 | ModelId::Phi3 => None,
            ModelId::Phi4 | ModelId::Phi8 | ModelId::Lam6 | ModelId::Lam7 => Some(2),
            ModelId::Phi5 | ModelId::Phi6 | ModelId::Phi7 | ModelId::Phi9 => Some(3),
            _ => Some(0),
        }
    }

    /// Smallest admissible argument.
    pub fn min_x(self) -> f64 {
        if self == ModelId::Phi9 {
            f64::MIN_POSITIVE
        } else {
            0.0
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        ModelId::ALL
            .into_iter()
            .find(|m| m.token() == t)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Closed interval for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub const fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn is_free(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub param_names: Vec<&'static str>,
    pub bounds: Vec<Bound>,
    pub domain_note: &'static str,
}

impl ModelSpec {
    pub fn param_count(&self) -> usize {
        self.param_names.len()
    }

    pub fn clamp(&self, params: &mut [f64]) {
        for (p, b) in params.iter_mut().zip(&self.bounds) {
            *p = b.clamp(*p);
        }
    }
}

/// All sixteen models, `phi1..phi9` then `lam1..lam7`.
pub fn catalogue() -> Vec<ModelSpec> {
    ModelId::ALL.iter().map(|m| m.spec()).collect()
}

/// Parameters of one model, checked for count, finiteness and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    model: ModelId,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(model: ModelId, values: Vec<f64>) -> Result<Self> {
        let spec = model.spec();
        check_count(model, &values)?;
        for ((v, b), name) in values.iter().zip(&spec.bounds).zip(&spec.param_names) {
            if !v.is_finite() || !b.contains(*v) {
                return Err(Error::InvalidArgument(format!(
                    "{model} parameter {name} = {v} outside [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(Self { model, values })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

fn check_count(model: ModelId, p: &[f64]) -> Result<()> {
    if p.len() != model.param_count() {
        return Err(Error::ParamCount {
            model: model.token(),
            expected: model.param_count(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Value of `model` at `x`.
pub fn evaluate(model: ModelId, params: &[f64], x: f64) -> Result<f64> {
    check_count(model, params)?;
    eval(model, params, x, None)
}

/// Partial derivatives of `model` at `x` with respect to each parameter.
pub fn gradient(model: ModelId, params: &[f64], x: f64) -> Result<Vec<f64>> {
    check_count(model, params)?;
    let mut g = vec![0.0; params.len()];
    eval(model, params, x, Some(&mut g))?;
    Ok(g)
}

/// Value and gradient in one pass; `grad` must have `param_count` slots.
pub(crate) fn value_and_gradient(model: ModelId, params: &[f64], x: f64, grad: &mut [f64]) -> Result<f64> {
    eval(model, params, x, Some(grad))
}

pub(crate) fn value(model: ModelId, params: &[f64], x: f64) -> Result<f64> {
    eval(model, params, x, None)
}

/// `base^e` for `base >= 0`, with `0^e = 0` when `e > 0`.
fn pow(model: ModelId, base: f64, e: f64, x: f64) -> Result<f64> {
    if base > 0.0 {
        Ok((e * base.ln()).exp())
    } else if base == 0.0 && e > 0.0 {
        Ok(0.0)
    } else if base == 0.0 && e == 0.0 {
        Ok(1.0)
    } else {
        Err(Error::Domain {
            model: model.token(),
            x,
            reason: "power undefined",
        })
    }
}

/// `ln(base)` where the factor it multiplies vanishes at `base = 0`.
fn ln0(base: f64) -> f64 {
    if base > 0.0 {
        base.ln()
    } else {
        0.0
    }
}

fn eval(model: ModelId, p: &[f64], x: f64, grad: Option<&mut [f64]>) -> Result<f64> {
    let name = model.token();
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            model: name,
            x,
            reason: "negative argument",
        });
    }
    let pole = || Error::Pole { model: name, x };
    let log1 = (x + 1.0).ln();

    match model {
        ModelId::Phi1 => {
            let (a, b) = (p[0], p[1]);
            let den = x + b;
            if den == 0.0 {
                return Err(pole());
            }
            if let Some(g) = grad {
                g[0] = x / den;
                g[1] = -a * x / (den * den);
            }
            Ok(a * x / den)
        }
        ModelId::Phi2 => {
            let powers = [x * x * x, x * x, x, 1.0];
            let num: f64 = (0..4).map(|i| p[i] * powers[i]).sum();
            let den: f64 = (0..4).map(|i| p[4 + i] * powers[i]).sum();
            if den == 0.0 {
                return Err(pole());
            }
            if let Some(g) = grad {
                for i in 0..4 {
                    g[i] = powers[i] / den;
                    g[4 + i] = -num * powers[i] / (den * den);
                }
            }
            Ok(num / den)
        }
        ModelId::Phi3 => {
            let (a, b, c, ca, cb, cc) = (p[0], p[1], p[2], p[3], p[4], p[5]);
            let xb = pow(model, x, b, x)?;
            let xbb = pow(model, x, cb, x)?;
            let num = a * xb + c;
            let den = ca * xbb + cc;
            if den == 0.0 {
                return Err(pole());
            }
            if let Some(g) = grad {
                let lx = ln0(x);
                let den2 = den * den;
                g[0] = xb / den;
                g[1] = a * xb * lx / den;
                g[2] = 1.0 / den;
                g[3] = -num * xbb / den2;
                g[4] = -num * ca * xbb * lx / den2;
                g[5] = -num / den2;
            }
            Ok(num / den)
        }
        ModelId::Phi4 | ModelId::Lam6 => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let lb = pow(model, log1, b, x)?;
            if let Some(g) = grad {
                g[0] = lb;
                g[1] = a * lb * ln0(log1);
                g[2] = 1.0;
            }
            Ok(a * lb + c)
        }
        ModelId::Phi5 => {
            let powers = [log1 * log1 * log1, log1 * log1, log1, 1.0];
            if let Some(g) = grad {
                g.copy_from_slice(&powers);
            }
            Ok((0..4).map(|i| p[i] * powers[i]).sum())
        }
        ModelId::Phi6 => {
            let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
            if b <= 0.0 {
                return Err(Error::Domain {
                    model: name,
                    x,
                    reason: "base must be positive",
                });
            }
            if c == 0.0 {
                return Err(Error::Domain {
                    model: name,
                    x,
                    reason: "root index must be nonzero",
                });
            }
            let u = pow(model, x, 1.0 / c, x)?;
            let bu = (u * b.ln()).exp();
            if let Some(g) = grad {
                let du_dc = -u * ln0(x) / (c * c);
                g[0] = bu;
                g[1] = if u == 0.0 { 0.0 } else { a * u * bu / b };
                g[2] = a * bu * b.ln() * du_dc;
                g[3] = 1.0;
            }
            Ok(a * bu + d)
        }
        ModelId::Phi7 => {
            let powers = [x * x * x, x * x, x, 1.0];
            if let Some(g) = grad {
                g.copy_from_slice(&powers);
            }
            Ok((0..4).map(|i| p[i] * powers[i]).sum())
        }
        ModelId::Phi8 => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let xb = pow(model, x, b, x)?;
            if let Some(g) = grad {
                g[0] = xb;
                g[1] = a * xb * ln0(x);
                g[2] = 1.0;
            }
            Ok(a * xb + c)
        }
        ModelId::Phi9 => {
            if x == 0.0 {
                return Err(Error::Domain {
                    model: name,
                    x,
                    reason: "negative powers diverge",
                });
            }
            let r = 1.0 / x;
            let powers = [r * r * r, r * r, r, 1.0];
            if let Some(g) = grad {
                g.copy_from_slice(&powers);
            }
            Ok((0..4).map(|i| p[i] * powers[i]).sum())
        }
        ModelId::Lam7 => {
            let (a, b, c) = (p[0], p[1], p[2]);
            if b == 0.0 {
                return Err(Error::Domain {
                    model: name,
                    x,
                    reason: "degree parameter must be nonzero",
                });
            }
            let lb = pow(model, log1, 1.0 / b, x)?;
            if let Some(g) = grad {
                g[0] = lb;
                g[1] = -a * lb * ln0(log1) / (b * b);
                g[2] = 1.0;
            }
            Ok(a * lb + c)
        }
        ladder => {
            let k = ladder.ladder_degree().expect("ladder model");
            let mut power = 1.0;
            let mut y = 0.0;
            let mut g = grad;
            for j in 0..=k {
                y += p[j] * power;
                if let Some(g) = g.as_deref_mut() {
                    g[j] = power;
                }
                power *= log1;
            }
            Ok(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(ModelId::Phi1, &[1.0, 1.0], 1.0).unwrap(), 0.5);
        assert_eq!(evaluate(ModelId::Phi5, &[3.0, -2.0, 5.0, 7.0], 0.0).unwrap(), 7.0);
        let v = evaluate(ModelId::Phi8, &[2.0, 0.5, 1.0], 9.0).unwrap();
        assert!((v - 7.0).abs() < 1e-12);
    }

    #[test]
    fn domain_and_pole_errors() {
        assert!(matches!(
            evaluate(ModelId::Phi9, &[1.0, 1.0, 1.0, 1.0], 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(evaluate(ModelId::Phi1, &[1.0, -2.0], 2.0), Err(Error::Pole { .. })));
        assert!(matches!(
            evaluate(ModelId::Phi2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -3.0], 3.0),
            Err(Error::Pole { .. })
        ));
        assert!(matches!(
            evaluate(ModelId::Phi3, &[1.0, 1.0, 0.0, 1.0, 1.0, -1.0], 1.0),
            Err(Error::Pole { .. })
        ));
        // A negative exponent at the origin has no value.
        assert!(matches!(
            evaluate(ModelId::Phi8, &[1.0, -0.5, 0.0], 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(evaluate(ModelId::Phi5, &[1.0; 4], -1.0).is_err());
        assert!(matches!(evaluate(ModelId::Phi5, &[1.0; 3], 1.0), Err(Error::ParamCount { .. })));
    }

    #[test]
    fn zero_to_positive_power_is_zero() {
        assert_eq!(evaluate(ModelId::Phi8, &[2.0, 0.5, 1.0], 0.0).unwrap(), 1.0);
        assert_eq!(evaluate(ModelId::Phi4, &[2.0, 0.3, 1.0], 0.0).unwrap(), 1.0);
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(ModelId::Phi4, &[1.7, 2.2, -3.0], 12.0).unwrap();
        assert_eq!(g[2], 1.0);
        let g = gradient(ModelId::Phi1, &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(g[0], 0.5);
        let g = gradient(ModelId::Phi7, &[0.3, -1.0, 2.0, 5.0], 2.0).unwrap();
        assert_eq!(g[1], 4.0);
    }

    #[test]
    fn catalogue_order_and_counts() {
        let cat = catalogue();
        assert_eq!(cat.len(), 16);
        assert_eq!(cat[0].id, ModelId::Phi1);
        assert_eq!(cat[15].id, ModelId::Lam7);
        assert_eq!(ModelId::Phi2.param_count(), 8);
        assert_eq!(ModelId::Lam5.param_count(), 6);
        for spec in &cat {
            assert_eq!(spec.param_count(), spec.id.param_count());
            assert_eq!(spec.bounds.len(), spec.param_count());
        }
    }

    #[test]
    fn tokens_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.token().parse::<ModelId>().unwrap(), m);
        }
        assert!("phi10".parse::<ModelId>().is_err());
        assert_eq!("PHI5".parse::<ModelId>().unwrap(), ModelId::Phi5);
    }

    #[test]
    fn param_vector_checks_bounds() {
        assert!(ParamVector::new(ModelId::Phi8, vec![1.0, 0.5, 0.0]).is_ok());
        assert!(ParamVector::new(ModelId::Phi8, vec![1.0, 7.0, 0.0]).is_err());
        assert!(ParamVector::new(ModelId::Phi6, vec![1.0, 0.0, 2.0, 0.0]).is_err());
        assert!(ParamVector::new(ModelId::Phi5, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ParamVector::new(ModelId::Phi5, vec![1.0]).is_err());
    }

    fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn ladder_nests_by_zero_padding(k in 1usize..5, c in coeffs(6), x in 0.0f64..1e6) {
            let lo = ModelId::LADDER[k - 1];
            let hi = ModelId::LADDER[k];
            let small = &c[..=k];
            let mut padded = small.to_vec();
            padded.push(0.0);
            let a = evaluate(lo, small, x).unwrap();
            let b = evaluate(hi, &padded, x).unwrap();
            prop_assert!(close(a, b, 1e-12));
        }

        #[test]
        fn phi1_is_phi3_with_unit_exponents(a in -10.0f64..10.0, b in 0.1f64..1e4, x in 0.0f64..1e6) {
            let p1 = evaluate(ModelId::Phi1, &[a, b], x).unwrap();
            let p3 = evaluate(ModelId::Phi3, &[a, 1.0, 0.0, 1.0, 1.0, b], x).unwrap();
            prop_assert!(close(p1, p3, 1e-12));
        }

        #[test]
        fn aliases_agree(c in coeffs(4), b in 0.05f64..6.0, x in 0.0f64..1e6) {
            let phi5 = evaluate(ModelId::Phi5, &c, x).unwrap();
            let lam3 = evaluate(ModelId::Lam3, &[c[3], c[2], c[1], c[0]], x).unwrap();
            prop_assert!(close(phi5, lam3, 1e-12) || (phi5 - lam3).abs() < 1e-9);
            let p = [c[0], b, c[1]];
            prop_assert_eq!(evaluate(ModelId::Phi4, &p, x).unwrap(), evaluate(ModelId::Lam6, &p, x).unwrap());
        }

        #[test]
        fn constant_only_models_are_constant(k in 0usize..16, c in -5.0f64..5.0, x in 1.0f64..1e5) {
            let model = ModelId::ALL[k];
            let Some(ci) = model.constant_term() else { return Ok(()); };
            let spec = model.spec();
            // Non-constant parameters get a neutral in-bounds value with zero amplitude.
            let mut p: Vec<f64> = spec.bounds.iter().map(|b| if b.is_free() { 0.0 } else { b.clamp(1.0) }).collect();
            p[ci] = c;
            let at_x = evaluate(model, &p, x).unwrap();
            let at_1 = evaluate(model, &p, 1.0).unwrap();
            prop_assert_eq!(at_x, c);
            prop_assert_eq!(at_1, c);
        }
    }
}
