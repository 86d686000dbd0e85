//! Sums of trigonometric monomials `c * prod cos|sin(m * x_p^r)`.
//!
//! Text form: `0.3*cos(x0_1) - 0.2*sin(2*x1_2)*cos(x3_1) + 1.5`, where `xP_R`
//! is the real coordinate with slot `P` in `0..4` and quaternionic index `R`
//! starting at 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{TorusError, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrigKind {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: TrigKind,
    pub freq: i32,
    /// Slot `p` in `0..4`.
    pub p: usize,
    /// Zero-based quaternionic index.
    pub r: usize,
}

impl Factor {
    fn eval(&self, x: f64) -> f64 {
        let t = self.freq as f64 * x;
        match self.kind {
            TrigKind::Cos => t.cos(),
            TrigKind::Sin => t.sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TrigExpr {
    pub terms: Vec<Term>,
}

impl TrigExpr {
    pub fn zero() -> Self {
        TrigExpr { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        TrigExpr {
            terms: vec![Term {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    /// Largest zero-based quaternionic index used, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.r))
            .max()
    }

    /// Value at the coordinate vector `x` of a grid with quaternionic dimension `n`.
    pub fn eval(&self, x: &[f64], n: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.factors
                        .iter()
                        .map(|f| f.eval(x[f.p * n + f.r]))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn sample(&self, grid: &TorusGrid) -> Result<Vec<f64>, TorusError> {
        if let Some(r) = self.max_index() {
            if r >= grid.n() {
                return Err(TorusError::Grid(format!(
                    "expression uses quaternionic index {} but n = {}",
                    r + 1,
                    grid.n()
                )));
            }
        }
        let n = grid.n();
        Ok(grid.sample(|x| self.eval(x, n)))
    }

    /// Exact partial derivative along `x_p^r` (zero-based `r`).
    pub fn derivative(&self, p: usize, r: usize) -> TrigExpr {
        let mut terms = Vec::new();
        for t in &self.terms {
            for (i, f) in t.factors.iter().enumerate() {
                if f.p != p || f.r != r || f.freq == 0 {
                    continue;
                }
                let m = f.freq as f64;
                let (kind, sign) = match f.kind {
                    TrigKind::Cos => (TrigKind::Sin, -m),
                    TrigKind::Sin => (TrigKind::Cos, m),
                };
                let mut factors = t.factors.clone();
                factors[i] = Factor { kind, ..*f };
                terms.push(Term {
                    coeff: t.coeff * sign,
                    factors,
                });
            }
        }
        TrigExpr { terms }
    }

    pub fn add(&self, other: &TrigExpr) -> TrigExpr {
        TrigExpr {
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TrigExpr {
        TrigExpr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * s,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for TrigExpr {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let c = if i == 0 {
                if t.coeff.is_sign_negative() {
                    out.write_str("-")?;
                }
                t.coeff.abs()
            } else {
                out.write_str(if t.coeff.is_sign_negative() { " - " } else { " + " })?;
                t.coeff.abs()
            };
            write!(out, "{c:?}")?;
            for f in &t.factors {
                let name = match f.kind {
                    TrigKind::Cos => "cos",
                    TrigKind::Sin => "sin",
                };
                if f.freq == 1 {
                    write!(out, "*{name}(x{}_{})", f.p, f.r + 1)?;
                } else {
                    write!(out, "*{name}({}*x{}_{})", f.freq, f.p, f.r + 1)?;
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TorusError> {
        Err(TorusError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TorusError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn number(&mut self) -> Result<f64, TorusError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("invalid number {text:?}"))
            }
        }
    }

    fn uint(&mut self) -> Result<usize, TorusError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .map_or_else(|| self.err("expected an integer"), Ok)
    }

    fn factor(&mut self) -> Result<Factor, TorusError> {
        self.skip_ws();
        let kind = if self.s[self.pos..].starts_with(b"cos") {
            TrigKind::Cos
        } else if self.s[self.pos..].starts_with(b"sin") {
            TrigKind::Sin
        } else {
            return self.err("expected cos or sin");
        };
        self.pos += 3;
        self.expect(b'(')?;
        let negative = self.eat(b'-');
        let mut freq = 1i32;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            freq = self.uint()? as i32;
            self.expect(b'*')?;
        }
        if negative {
            freq = -freq;
        }
        self.expect(b'x')?;
        let p = self.uint()?;
        if p > 3 {
            return self.err("slot index must be in 0..=3");
        }
        if self.s.get(self.pos) != Some(&b'_') {
            return self.err("expected '_'");
        }
        self.pos += 1;
        let r = self.uint()?;
        if r == 0 {
            return self.err("quaternionic index starts at 1");
        }
        self.expect(b')')?;
        Ok(Factor {
            kind,
            freq,
            p,
            r: r - 1,
        })
    }

    fn term(&mut self, sign: f64) -> Result<Term, TorusError> {
        let mut coeff = sign;
        let mut factors = Vec::new();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                coeff *= self.number()?;
                if !self.eat(b'*') {
                    return Ok(Term { coeff, factors });
                }
            }
            _ => {}
        }
        loop {
            factors.push(self.factor()?);
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Term { coeff, factors })
    }

    fn expr(&mut self) -> Result<TrigExpr, TorusError> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            terms.push(self.term(sign)?);
            sign = if self.eat(b'+') {
                1.0
            } else if self.eat(b'-') {
                -1.0
            } else {
                break;
            };
        }
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(TrigExpr { terms })
    }
}

impl FromStr for TrigExpr {
    type Err = TorusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser {
            s: s.as_bytes(),
            pos: 0,
        }
        .expr()
    }
}

impl TryFrom<String> for TrigExpr {
    type Error = TorusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TrigExpr> for String {
    fn from(e: TrigExpr) -> Self {
        e.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_emit() {
        let e: TrigExpr = "0.3*cos(x0_1) + 0.2 * cos( x1_2 ) - sin(2*x3_1)*cos(x0_2) + 1.5"
            .parse()
            .unwrap();
        assert_eq!(e.terms.len(), 4);
        assert_eq!(e.terms[2].coeff, -1.0);
        assert_eq!(e.terms[2].factors[0].freq, 2);
        assert_eq!(e.terms[3].factors.len(), 0);
        let text = e.to_string();
        assert_eq!(
            text,
            "0.3*cos(x0_1) + 0.2*cos(x1_2) - 1.0*sin(2*x3_1)*cos(x0_2) + 1.5"
        );
        assert_eq!(text.parse::<TrigExpr>().unwrap(), e);
        assert_eq!("0".parse::<TrigExpr>().unwrap().eval(&[0.0; 4], 1), 0.0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "cos(y0_1)", "cos(x4_1)", "cos(x0_0)", "0.3*", "tan(x0_1)", "1 2"] {
            assert!(bad.parse::<TrigExpr>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let e: TrigExpr = "0.7*cos(2*x0_1)*sin(x2_2) - 0.4*sin(3*x1_2) + 2".parse().unwrap();
        let n = 2;
        let x = [0.3, 1.1, -0.4, 2.0, 0.9, 0.2, 1.7, -1.3];
        for p in 0..4 {
            for r in 0..n {
                let a = p * n + r;
                let eps = 1e-6;
                let mut xp = x;
                let mut xm = x;
                xp[a] += eps;
                xm[a] -= eps;
                let fd = (e.eval(&xp, n) - e.eval(&xm, n)) / (2.0 * eps);
                let exact = e.derivative(p, r).eval(&x, n);
                assert!((fd - exact).abs() < 1e-8, "axis {a}: {fd} vs {exact}");
            }
        }
    }
}
