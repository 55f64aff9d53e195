//! Catalog of twice continuously differentiable regression functions with
//! exact first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A regression function `m0` with exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RegressionFunction {
    Zero,
    Constant(f64),
    /// `a*x + b`.
    Linear { a: f64, b: f64 },
    Sin,
    Logistic,
    /// `a*x + sin(x)`: globally bounded derivatives with a linear trend.
    LinearPlusSin { a: f64 },
    /// Natural cubic spline demo with linear tails; C^2 everywhere and both
    /// derivatives globally bounded.
    Spline(CubicSpline),
}

impl RegressionFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::Zero => 0.0,
            RegressionFunction::Constant(c) => *c,
            RegressionFunction::Linear { a, b } => a * x + b,
            RegressionFunction::Sin => x.sin(),
            RegressionFunction::Logistic => logistic(x),
            RegressionFunction::LinearPlusSin { a } => a * x + x.sin(),
            RegressionFunction::Spline(s) => s.eval(x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::Zero | RegressionFunction::Constant(_) => 0.0,
            RegressionFunction::Linear { a, .. } => *a,
            RegressionFunction::Sin => x.cos(),
            RegressionFunction::Logistic => {
                let s = logistic(x);
                s * (1.0 - s)
            }
            RegressionFunction::LinearPlusSin { a } => a + x.cos(),
            RegressionFunction::Spline(s) => s.d1(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::Zero
            | RegressionFunction::Constant(_)
            | RegressionFunction::Linear { .. } => 0.0,
            RegressionFunction::Sin => -x.sin(),
            RegressionFunction::Logistic => {
                let s = logistic(x);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
            RegressionFunction::LinearPlusSin { .. } => -x.sin(),
            RegressionFunction::Spline(s) => s.d2(x),
        }
    }

    pub fn id(&self) -> String {
        match self {
            RegressionFunction::Zero => "zero".to_string(),
            RegressionFunction::Constant(c) => format!("constant:{c}"),
            RegressionFunction::Linear { a, b } => format!("linear:{a},{b}"),
            RegressionFunction::Sin => "sin".to_string(),
            RegressionFunction::Logistic => "logistic".to_string(),
            RegressionFunction::LinearPlusSin { a } => format!("linsin:{a}"),
            RegressionFunction::Spline(_) => "spline".to_string(),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::config(format!("unknown regression function id: {id}"));
        let (name, args) = match id.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (id, None),
        };
        let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        match (name, args) {
            ("zero", None) => Ok(RegressionFunction::Zero),
            ("sin", None) => Ok(RegressionFunction::Sin),
            ("logistic", None) => Ok(RegressionFunction::Logistic),
            ("spline", None) => Ok(RegressionFunction::Spline(CubicSpline::demo())),
            ("constant", Some(a)) => Ok(RegressionFunction::Constant(parse_f(a)?)),
            ("linsin", Some(a)) => Ok(RegressionFunction::LinearPlusSin { a: parse_f(a)? }),
            ("linear", Some(args)) => {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad());
                }
                Ok(RegressionFunction::Linear {
                    a: parse_f(parts[0])?,
                    b: parse_f(parts[1])?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for RegressionFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        RegressionFunction::parse(&s)
    }
}

impl From<RegressionFunction> for String {
    fn from(f: RegressionFunction) -> String {
        f.id()
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Default catalog instances.
pub fn m0_catalog() -> Vec<RegressionFunction> {
    vec![
        RegressionFunction::Zero,
        RegressionFunction::Constant(1.0),
        RegressionFunction::Linear { a: 2.0, b: 1.0 },
        RegressionFunction::Sin,
        RegressionFunction::Logistic,
        RegressionFunction::LinearPlusSin { a: 5.0 },
        RegressionFunction::Spline(CubicSpline::demo()),
    ]
}

/// Natural cubic spline interpolant with linear extrapolation beyond the
/// boundary knots. Natural end conditions make the extension C^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::config(
                "spline needs at least 3 knots with matching values".to_string(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("spline knots must be increasing".to_string()));
        }
        // Thomas solve of the natural-spline tridiagonal system.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = knots[i] - knots[i - 1];
            let h1 = knots[i + 1] - knots[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0;
        }
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline { knots, values, m })
    }

    pub fn demo() -> Self {
        CubicSpline::natural(
            vec![-4.0, -2.0, 0.0, 2.0, 4.0],
            vec![0.0, 1.2, 0.4, -1.0, 0.3],
        )
        .expect("demo spline is valid")
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0] + self.boundary_slope(0) * (x - self.knots[0]);
        }
        if x >= self.knots[n - 1] {
            return self.values[n - 1] + self.boundary_slope(n - 1) * (x - self.knots[n - 1]);
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = self.knots[i + 1] - x;
        let b = x - self.knots[i];
        self.m[i] * a * a * a / (6.0 * h)
            + self.m[i + 1] * b * b * b / (6.0 * h)
            + (self.values[i] / h - self.m[i] * h / 6.0) * a
            + (self.values[i + 1] / h - self.m[i + 1] * h / 6.0) * b
    }

    pub fn d1(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.boundary_slope(0);
        }
        if x >= self.knots[n - 1] {
            return self.boundary_slope(n - 1);
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = self.knots[i + 1] - x;
        let b = x - self.knots[i];
        -self.m[i] * a * a / (2.0 * h) + self.m[i + 1] * b * b / (2.0 * h)
            - (self.values[i] / h - self.m[i] * h / 6.0)
            + (self.values[i + 1] / h - self.m[i + 1] * h / 6.0)
    }

    pub fn d2(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] || x >= self.knots[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        self.m[i] * (self.knots[i + 1] - x) / h + self.m[i + 1] * (x - self.knots[i]) / h
    }

    fn boundary_slope(&self, end: usize) -> f64 {
        let n = self.knots.len();
        if end == 0 {
            let h = self.knots[1] - self.knots[0];
            -self.m[0] * h / 2.0 - (self.values[0] / h - self.m[0] * h / 6.0)
                + (self.values[1] / h - self.m[1] * h / 6.0)
        } else {
            let h = self.knots[n - 1] - self.knots[n - 2];
            self.m[n - 1] * h / 2.0 - (self.values[n - 2] / h - self.m[n - 2] * h / 6.0)
                + (self.values[n - 1] / h - self.m[n - 1] * h / 6.0)
        }
    }
}
