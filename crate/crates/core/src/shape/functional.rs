//! Spectral functionals `J(Ω) = F(λ₁(Ω), …, λ_k(Ω))` with `F` drawn from a
//! grammar that is nondecreasing in every argument by construction:
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*        at most one non-constant factor
//! factor := number | lambda<j> | λ<j> | max(expr, expr, ...) | (expr)
//! ```
//!
//! Numbers are nonnegative literals, so every product scales by a
//! nonnegative constant; a product whose constant part is zero is rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dirichlet::{dense_eigenvalues, eigenpairs, restrict};
use crate::error::{Error, Result};
use crate::grid::DomainMask;
use crate::stiffness::StiffnessOperator;

/// Masks up to this many cells are diagonalized densely.
const DENSE_EIGEN_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Lambda(usize),
    Sum(Vec<Expr>),
    /// Positive constant times an expression.
    Scale(f64, Box<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    fn max_index(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Lambda(j) => *j,
            Expr::Scale(_, e) => e.max_index(),
            Expr::Sum(xs) | Expr::Max(xs) => xs.iter().map(Expr::max_index).max().unwrap_or(0),
        }
    }

    fn is_constant(&self) -> bool {
        self.max_index() == 0
    }

    /// `lambdas[j-1] = λ_j`.
    pub fn eval(&self, lambdas: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Lambda(j) => lambdas[j - 1],
            Expr::Sum(xs) => xs.iter().map(|e| e.eval(lambdas)).sum(),
            Expr::Scale(c, e) => c * e.eval(lambdas),
            Expr::Max(xs) => xs.iter().map(|e| e.eval(lambdas)).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Expr], sep: &str| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Lambda(j) => write!(f, "lambda{j}"),
            Expr::Sum(xs) => {
                f.write_str("(")?;
                join(f, xs, "+")?;
                f.write_str(")")
            }
            Expr::Scale(c, e) => write!(f, "{c}*{e}"),
            Expr::Max(xs) => {
                f.write_str("max(")?;
                join(f, xs, ",")?;
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        while self.eat("+") {
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while self.eat("*") {
            factors.push(self.factor()?);
        }
        if factors.len() == 1 {
            return Ok(factors.pop().unwrap());
        }
        let (consts, vars): (Vec<Expr>, Vec<Expr>) = factors.into_iter().partition(Expr::is_constant);
        let c: f64 = consts.iter().map(|e| e.eval(&[])).product();
        match vars.len() {
            0 => Ok(Expr::Const(c)),
            1 if c > 0.0 => Ok(Expr::Scale(c, Box::new(vars.into_iter().next().unwrap()))),
            1 => Err(self.err("a spectral term must be scaled by a positive constant")),
            _ => Err(self.err("products of eigenvalue terms are not monotone in general")),
        }
    }

    fn number(&mut self) -> Option<f64> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_digit() || *c == '.' || *c == 'e' || *c == 'E'))
            .map_or(rest.len(), |(i, _)| i);
        let v = rest[..end].parse::<f64>().ok()?;
        self.pos += end;
        Some(v)
    }

    fn index(&mut self) -> Result<usize> {
        let rest = self.rest();
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let j: usize = rest[..end].parse().map_err(|_| self.err("expected an eigenvalue index"))?;
        if j == 0 {
            return Err(self.err("eigenvalue indices start at 1"));
        }
        self.pos += end;
        Ok(j)
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat("max(") {
            let mut args = vec![self.expr()?];
            while self.eat(",") {
                args.push(self.expr()?);
            }
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(if args.len() == 1 { args.pop().unwrap() } else { Expr::Max(args) });
        }
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(e);
        }
        if self.eat("lambda") || self.eat("λ") {
            self.eat("_");
            return Ok(Expr::Lambda(self.index()?));
        }
        match self.number() {
            Some(v) if v.is_finite() && v >= 0.0 => Ok(Expr::Const(v)),
            _ => Err(self.err("expected a number, lambda<j>, max(...) or '('")),
        }
    }
}

pub fn parse_functional(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// A parsed functional together with the source it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FunctionalSpec {
    pub name: String,
    pub expr: Expr,
    /// Number of eigenvalues consumed (the largest index used, at least 1).
    pub k: usize,
}

impl FunctionalSpec {
    pub fn parse(src: &str) -> Result<Self> {
        let expr = parse_functional(src)?;
        Ok(FunctionalSpec {
            name: src.trim().to_string(),
            k: expr.max_index().max(1),
            expr,
        })
    }

    pub fn lambda(j: usize) -> Self {
        FunctionalSpec::parse(&format!("lambda{j}")).expect("valid literal")
    }

    /// `F(0, …, 0)`, a lower bound of `J`.
    pub fn floor(&self) -> f64 {
        self.expr.eval(&vec![0.0; self.k])
    }

    /// `F` applied to `λ₁..λ_k`; missing eigenvalues count as `+∞`.
    pub fn combine(&self, lambdas: &[f64]) -> f64 {
        let mut l = lambdas.to_vec();
        l.resize(self.k.max(l.len()), f64::INFINITY);
        self.expr.eval(&l)
    }
}

impl TryFrom<String> for FunctionalSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        FunctionalSpec::parse(&s)
    }
}

impl From<FunctionalSpec> for String {
    fn from(f: FunctionalSpec) -> Self {
        f.name
    }
}

/// `λ₁..λ_k` of the mask (`+∞` past the number of cells, all `+∞` when empty).
pub fn mask_eigenvalues(base: &StiffnessOperator, mask: &DomainMask, k: usize) -> Result<Vec<f64>> {
    if mask.is_empty() {
        return Ok(vec![f64::INFINITY; k]);
    }
    let op = restrict(base, mask)?;
    let mut values = if op.size() <= DENSE_EIGEN_LIMIT {
        let mut all = dense_eigenvalues(&op);
        all.truncate(k);
        all
    } else {
        eigenpairs(&op, k.min(op.size()))?.eigenvalues
    };
    values.resize(k, f64::INFINITY);
    Ok(values)
}

/// `J(Ω)`; the empty set gives `+∞`.
pub fn eval_functional(spec: &FunctionalSpec, base: &StiffnessOperator, mask: &DomainMask) -> Result<f64> {
    if mask.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(spec.combine(&mask_eigenvalues(base, mask, spec.k)?))
}
