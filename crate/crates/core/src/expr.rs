//! Closed-form scalar expressions over (x, y) and their exact third-order
//! jets via forward Taylor propagation.
//!
//! The node set is closed under third differentiation away from singular
//! points, so `jet_eval` is exact to rounding; no finite differences are
//! involved in closed-form mode.

use std::fmt;
use std::sync::Arc;

use crate::jet::Jet3;
use crate::point::Point2;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    X,
    Y,
    Const(f64),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, Arc<Node>),
    Neg(Arc<Node>),
    Exp(Arc<Node>),
    Log(Arc<Node>),
    Sin(Arc<Node>),
    Cos(Arc<Node>),
    Tan(Arc<Node>),
    Atan(Arc<Node>),
    Sqrt(Arc<Node>),
}

/// A scalar field given in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr {
    root: Arc<Node>,
}

fn sing(what: impl Into<String>, at: Point2) -> Error {
    Error::SingularPoint {
        what: what.into(),
        at,
    }
}

impl ScalarExpr {
    pub fn new(root: Node) -> Self {
        ScalarExpr { root: Arc::new(root) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parser::parse(text).map(ScalarExpr::new)
    }

    /// Value and all derivatives through order three at `p`, exact to rounding.
    pub fn jet_eval(&self, p: Point2) -> Result<Jet3> {
        let j = eval(&self.root, p)?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(sing("non-finite jet", p))
        }
    }

    pub fn eval(&self, p: Point2) -> Result<f64> {
        self.jet_eval(p).map(|j| j.v)
    }

    /// Replace every occurrence of x and y by the given subexpressions.
    pub fn substitute(&self, x_by: &ScalarExpr, y_by: &ScalarExpr) -> Self {
        fn walk(n: &Arc<Node>, xs: &Arc<Node>, ys: &Arc<Node>) -> Arc<Node> {
            let bin = |f: fn(Arc<Node>, Arc<Node>) -> Node, a: &Arc<Node>, b: &Arc<Node>| {
                Arc::new(f(walk(a, xs, ys), walk(b, xs, ys)))
            };
            let un = |f: fn(Arc<Node>) -> Node, a: &Arc<Node>| Arc::new(f(walk(a, xs, ys)));
            match &**n {
                Node::X => xs.clone(),
                Node::Y => ys.clone(),
                Node::Const(c) => Arc::new(Node::Const(*c)),
                Node::Add(a, b) => bin(Node::Add, a, b),
                Node::Sub(a, b) => bin(Node::Sub, a, b),
                Node::Mul(a, b) => bin(Node::Mul, a, b),
                Node::Div(a, b) => bin(Node::Div, a, b),
                Node::Pow(a, b) => bin(Node::Pow, a, b),
                Node::Neg(a) => un(Node::Neg, a),
                Node::Exp(a) => un(Node::Exp, a),
                Node::Log(a) => un(Node::Log, a),
                Node::Sin(a) => un(Node::Sin, a),
                Node::Cos(a) => un(Node::Cos, a),
                Node::Tan(a) => un(Node::Tan, a),
                Node::Atan(a) => un(Node::Atan, a),
                Node::Sqrt(a) => un(Node::Sqrt, a),
            }
        }
        ScalarExpr {
            root: walk(&self.root, &x_by.root, &y_by.root),
        }
    }
}

fn eval(node: &Node, p: Point2) -> Result<Jet3> {
    Ok(match node {
        Node::X => Jet3::variable(p.x, 0),
        Node::Y => Jet3::variable(p.y, 1),
        Node::Const(c) => Jet3::constant(*c),
        Node::Add(a, b) => eval(a, p)? + eval(b, p)?,
        Node::Sub(a, b) => eval(a, p)? - eval(b, p)?,
        Node::Mul(a, b) => eval(a, p)? * eval(b, p)?,
        Node::Div(a, b) => {
            let d = eval(b, p)?;
            if d.v.abs() < 1e-300 {
                return Err(sing("division by zero", p));
            }
            let u = d.v;
            eval(a, p)? * d.compose([1.0 / u, -1.0 / (u * u), 2.0 / u.powi(3), -6.0 / u.powi(4)])
        }
        Node::Pow(a, b) => {
            let base = eval(a, p)?;
            // Constant integer exponents keep negative bases legal.
            if let Node::Const(c) = **b {
                if (c - c.round()).abs() < 1e-12 && c.round().abs() <= 64.0 {
                    return powi(base, c.round() as i64, p);
                }
            }
            let expo = eval(b, p)?;
            if base.v <= 0.0 {
                return Err(sing("non-positive base under real power", p));
            }
            // u^w = exp(w log u)
            let u = base.v;
            let lnu = base.compose([u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / u.powi(3)]);
            let w = expo * lnu;
            let e = w.v.exp();
            w.compose([e, e, e, e])
        }
        Node::Neg(a) => -eval(a, p)?,
        Node::Exp(a) => {
            let u = eval(a, p)?;
            let e = u.v.exp();
            u.compose([e, e, e, e])
        }
        Node::Log(a) => {
            let u = eval(a, p)?;
            if u.v <= 1e-300 {
                return Err(sing("log of non-positive value", p));
            }
            let t = u.v;
            u.compose([t.ln(), 1.0 / t, -1.0 / (t * t), 2.0 / t.powi(3)])
        }
        Node::Sin(a) => {
            let u = eval(a, p)?;
            let (s, c) = u.v.sin_cos();
            u.compose([s, c, -s, -c])
        }
        Node::Cos(a) => {
            let u = eval(a, p)?;
            let (s, c) = u.v.sin_cos();
            u.compose([c, -s, -c, s])
        }
        Node::Tan(a) => {
            let u = eval(a, p)?;
            if u.v.cos().abs() < 1e-12 {
                return Err(sing("pole of tan", p));
            }
            let t = u.v.tan();
            let s2 = 1.0 + t * t;
            u.compose([t, s2, 2.0 * t * s2, s2 * (2.0 + 6.0 * t * t)])
        }
        Node::Atan(a) => {
            let u = eval(a, p)?;
            let t = u.v;
            let q = 1.0 / (1.0 + t * t);
            u.compose([t.atan(), q, -2.0 * t * q * q, (6.0 * t * t - 2.0) * q * q * q])
        }
        Node::Sqrt(a) => {
            let u = eval(a, p)?;
            if u.v <= 1e-300 {
                return Err(sing("sqrt of non-positive value", p));
            }
            let t = u.v;
            let s = t.sqrt();
            u.compose([
                s,
                0.5 / s,
                -0.25 / (t * s),
                0.375 / (t * t * s),
            ])
        }
    })
}

fn powi(base: Jet3, n: i64, p: Point2) -> Result<Jet3> {
    if n == 0 {
        return Ok(Jet3::constant(1.0));
    }
    let neg = n < 0;
    let mut k = n.unsigned_abs();
    let mut acc = Jet3::constant(1.0);
    let mut sq = base;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * sq;
        }
        sq = sq * sq;
        k >>= 1;
    }
    if neg {
        if base.v.abs() < 1e-300 {
            return Err(sing("zero base under negative power", p));
        }
        let u = acc.v;
        Ok(acc.compose([1.0 / u, -1.0 / (u * u), 2.0 / u.powi(3), -6.0 / u.powi(4)]))
    } else {
        Ok(acc)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn w(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::X => write!(f, "x"),
                Node::Y => write!(f, "y"),
                Node::Const(c) => write!(f, "{c}"),
                Node::Add(a, b) => parens(f, a, " + ", b),
                Node::Sub(a, b) => parens(f, a, " - ", b),
                Node::Mul(a, b) => parens(f, a, " * ", b),
                Node::Div(a, b) => parens(f, a, " / ", b),
                Node::Pow(a, b) => parens(f, a, "^", b),
                Node::Neg(a) => {
                    write!(f, "(-")?;
                    w(a, f)?;
                    write!(f, ")")
                }
                Node::Exp(a) => func(f, "exp", a),
                Node::Log(a) => func(f, "log", a),
                Node::Sin(a) => func(f, "sin", a),
                Node::Cos(a) => func(f, "cos", a),
                Node::Tan(a) => func(f, "tan", a),
                Node::Atan(a) => func(f, "atan", a),
                Node::Sqrt(a) => func(f, "sqrt", a),
            }
        }
        fn parens(f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node) -> fmt::Result {
            write!(f, "(")?;
            w(a, f)?;
            write!(f, "{op}")?;
            w(b, f)?;
            write!(f, ")")
        }
        fn func(f: &mut fmt::Formatter<'_>, name: &str, a: &Node) -> fmt::Result {
            write!(f, "{name}(")?;
            w(a, f)?;
            write!(f, ")")
        }
        w(&self.root, f)
    }
}

/// Convenience constructors for building expressions in code.
pub mod build {
    use super::{Node, ScalarExpr};
    use std::sync::Arc;

    pub fn x() -> ScalarExpr {
        ScalarExpr::new(Node::X)
    }
    pub fn y() -> ScalarExpr {
        ScalarExpr::new(Node::Y)
    }
    pub fn c(v: f64) -> ScalarExpr {
        ScalarExpr::new(Node::Const(v))
    }
    fn bin(f: fn(Arc<Node>, Arc<Node>) -> Node, a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        ScalarExpr::new(f(a.root, b.root))
    }
    fn un(f: fn(Arc<Node>) -> Node, a: ScalarExpr) -> ScalarExpr {
        ScalarExpr::new(f(a.root))
    }
    pub fn add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        bin(Node::Add, a, b)
    }
    pub fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        bin(Node::Sub, a, b)
    }
    pub fn mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        bin(Node::Mul, a, b)
    }
    pub fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        bin(Node::Div, a, b)
    }
    pub fn pow(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        bin(Node::Pow, a, b)
    }
    pub fn neg(a: ScalarExpr) -> ScalarExpr {
        un(Node::Neg, a)
    }
    pub fn exp(a: ScalarExpr) -> ScalarExpr {
        un(Node::Exp, a)
    }
    pub fn log(a: ScalarExpr) -> ScalarExpr {
        un(Node::Log, a)
    }
    pub fn sin(a: ScalarExpr) -> ScalarExpr {
        un(Node::Sin, a)
    }
    pub fn cos(a: ScalarExpr) -> ScalarExpr {
        un(Node::Cos, a)
    }
    pub fn tan(a: ScalarExpr) -> ScalarExpr {
        un(Node::Tan, a)
    }
    pub fn atan(a: ScalarExpr) -> ScalarExpr {
        un(Node::Atan, a)
    }
    pub fn sqrt(a: ScalarExpr) -> ScalarExpr {
        un(Node::Sqrt, a)
    }
}

mod parser {
    use super::Node;
    use crate::{Error, Result};
    use std::sync::Arc;

    #[derive(Clone, Debug, PartialEq)]
    enum Tok {
        Num(f64),
        Ident(String),
        Plus,
        Minus,
        Star,
        Slash,
        Caret,
        LParen,
        RParen,
        Comma,
    }

    fn err(message: impl Into<String>) -> Error {
        Error::Parse {
            message: message.into(),
        }
    }

    fn lex(text: &str) -> Result<Vec<Tok>> {
        let mut toks = Vec::new();
        let bytes: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < bytes.len() {
            let ch = bytes[i];
            match ch {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                    toks.push(match ch {
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        '/' => Tok::Slash,
                        '^' => Tok::Caret,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        _ => Tok::Comma,
                    });
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_digit()
                            || bytes[i] == '.'
                            || bytes[i] == 'e'
                            || bytes[i] == 'E'
                            || ((bytes[i] == '+' || bytes[i] == '-')
                                && i > start
                                && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                    {
                        i += 1;
                    }
                    let s: String = bytes[start..i].iter().collect();
                    toks.push(Tok::Num(s.parse().map_err(|_| err(format!("bad number `{s}`")))?));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                        i += 1;
                    }
                    toks.push(Tok::Ident(bytes[start..i].iter().collect()));
                }
                other => return Err(err(format!("unexpected character `{other}`"))),
            };
        }
        Ok(toks)
    }

    struct P {
        toks: Vec<Tok>,
        pos: usize,
    }

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos)
        }
        fn next(&mut self) -> Option<Tok> {
            let t = self.toks.get(self.pos).cloned();
            self.pos += 1;
            t
        }
        fn expect(&mut self, t: Tok) -> Result<()> {
            match self.next() {
                Some(ref got) if *got == t => Ok(()),
                got => Err(err(format!("expected {t:?}, got {got:?}"))),
            }
        }

        // expr := term (('+'|'-') term)*
        fn expr(&mut self) -> Result<Node> {
            let mut lhs = self.term()?;
            loop {
                match self.peek() {
                    Some(Tok::Plus) => {
                        self.next();
                        lhs = Node::Add(Arc::new(lhs), Arc::new(self.term()?));
                    }
                    Some(Tok::Minus) => {
                        self.next();
                        lhs = Node::Sub(Arc::new(lhs), Arc::new(self.term()?));
                    }
                    _ => return Ok(lhs),
                }
            }
        }

        // term := factor (('*'|'/') factor)*
        fn term(&mut self) -> Result<Node> {
            let mut lhs = self.factor()?;
            loop {
                match self.peek() {
                    Some(Tok::Star) => {
                        self.next();
                        lhs = Node::Mul(Arc::new(lhs), Arc::new(self.factor()?));
                    }
                    Some(Tok::Slash) => {
                        self.next();
                        lhs = Node::Div(Arc::new(lhs), Arc::new(self.factor()?));
                    }
                    _ => return Ok(lhs),
                }
            }
        }

        // factor := '-' factor | power
        fn factor(&mut self) -> Result<Node> {
            if matches!(self.peek(), Some(Tok::Minus)) {
                self.next();
                return Ok(Node::Neg(Arc::new(self.factor()?)));
            }
            self.power()
        }

        // power := atom ('^' factor)?   (right-associative)
        fn power(&mut self) -> Result<Node> {
            let base = self.atom()?;
            if matches!(self.peek(), Some(Tok::Caret)) {
                self.next();
                let expo = self.factor()?;
                return Ok(Node::Pow(Arc::new(base), Arc::new(expo)));
            }
            Ok(base)
        }

        fn atom(&mut self) -> Result<Node> {
            match self.next() {
                Some(Tok::Num(v)) => Ok(Node::Const(v)),
                Some(Tok::LParen) => {
                    let inner = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(inner)
                }
                Some(Tok::Ident(name)) => match name.as_str() {
                    "x" => Ok(Node::X),
                    "y" => Ok(Node::Y),
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "e" => Ok(Node::Const(std::f64::consts::E)),
                    f @ ("exp" | "log" | "sin" | "cos" | "tan" | "atan" | "sqrt" | "pow") => {
                        self.expect(Tok::LParen)?;
                        let a = self.expr()?;
                        if f == "pow" {
                            self.expect(Tok::Comma)?;
                            let b = self.expr()?;
                            self.expect(Tok::RParen)?;
                            return Ok(Node::Pow(Arc::new(a), Arc::new(b)));
                        }
                        self.expect(Tok::RParen)?;
                        let a = Arc::new(a);
                        Ok(match f {
                            "exp" => Node::Exp(a),
                            "log" => Node::Log(a),
                            "sin" => Node::Sin(a),
                            "cos" => Node::Cos(a),
                            "tan" => Node::Tan(a),
                            "atan" => Node::Atan(a),
                            _ => Node::Sqrt(a),
                        })
                    }
                    other => Err(err(format!("unknown identifier `{other}`"))),
                },
                got => Err(err(format!("unexpected token {got:?}"))),
            }
        }
    }

    pub fn parse(text: &str) -> Result<Node> {
        let mut p = P {
            toks: lex(text)?,
            pos: 0,
        };
        let node = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(err("trailing input after expression"));
        }
        Ok(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn pt(x: f64, y: f64) -> Point2 {
        Point2 { x, y }
    }

    #[test]
    fn linear_function_jets() {
        let e = ScalarExpr::parse("x + 2*y").unwrap();
        let j = e.jet_eval(pt(0.3, 0.1)).unwrap();
        assert_relative_eq!(j.v, 0.5);
        assert_eq!(j.d1, [1.0, 2.0]);
        assert_eq!(j.d2, [[0.0; 2]; 2]);
        assert_eq!(j.d3, [[[0.0; 2]; 2]; 2]);
    }

    #[test]
    fn scherk_jets_match_hand_differentiation() {
        // phi = log(cos y) - log(cos x): d1 = (tan x, -tan y),
        // d2 = diag(sec^2 x, -sec^2 y), d3 diag-only 2 sec^2 tan.
        let e = ScalarExpr::parse("log(cos(y)) - log(cos(x))").unwrap();
        let j = e.jet_eval(pt(FRAC_PI_6, FRAC_PI_6)).unwrap();
        let t = FRAC_PI_6.tan();
        assert_relative_eq!(j.d1[0], t, max_relative = 1e-15);
        assert_relative_eq!(j.d1[1], -t, max_relative = 1e-15);
        assert_relative_eq!(j.d2[0][0], 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(j.d2[1][1], -4.0 / 3.0, max_relative = 1e-15);
        assert_eq!(j.d2[0][1], 0.0);
        assert_relative_eq!(j.d3[0][0][0], 2.0 * (4.0 / 3.0) * t, max_relative = 1e-14);
        assert_relative_eq!(j.d3[1][1][1], -2.0 * (4.0 / 3.0) * t, max_relative = 1e-14);
        assert_eq!(j.d3[0][0][1], 0.0);
    }

    #[test]
    fn tan_pole_is_singular() {
        let e = ScalarExpr::parse("tan(x)").unwrap();
        assert!(matches!(
            e.jet_eval(pt(FRAC_PI_2, 0.0)),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn log_and_sqrt_domains() {
        let e = ScalarExpr::parse("log(x)").unwrap();
        assert!(e.jet_eval(pt(-1.0, 0.0)).is_err());
        let s = ScalarExpr::parse("sqrt(x)").unwrap();
        assert!(s.jet_eval(pt(-1.0, 0.0)).is_err());
    }

    #[test]
    fn integer_power_allows_negative_base() {
        let e = ScalarExpr::parse("x^3").unwrap();
        let j = e.jet_eval(pt(-2.0, 0.0)).unwrap();
        assert_relative_eq!(j.v, -8.0);
        assert_relative_eq!(j.d1[0], 12.0);
        assert_relative_eq!(j.d2[0][0], -12.0);
        assert_relative_eq!(j.d3[0][0][0], 6.0);
    }

    #[test]
    fn general_power_via_exp_log() {
        let e = ScalarExpr::parse("pow(x, y)").unwrap();
        let j = e.jet_eval(pt(2.0, 1.5)).unwrap();
        assert_relative_eq!(j.v, 2.0_f64.powf(1.5), max_relative = 1e-15);
        assert_relative_eq!(j.d1[0], 1.5 * 2.0_f64.powf(0.5), max_relative = 1e-14);
        assert_relative_eq!(j.d1[1], 2.0_f64.powf(1.5) * 2.0_f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn substitution_builds_wave_profile() {
        // f(u) = u^3 with u = x + y
        let f = ScalarExpr::parse("x^3").unwrap();
        let u = ScalarExpr::parse("x + y").unwrap();
        let phi = f.substitute(&u, &build::c(0.0));
        let j = phi.jet_eval(pt(0.5, 0.25)).unwrap();
        assert_relative_eq!(j.v, 0.75_f64.powi(3), max_relative = 1e-15);
        assert_relative_eq!(j.d1[0], 3.0 * 0.75_f64.powi(2), max_relative = 1e-15);
        assert_relative_eq!(j.d1[1], 3.0 * 0.75_f64.powi(2), max_relative = 1e-15);
        assert_relative_eq!(j.d2[0][1], 6.0 * 0.75, max_relative = 1e-15);
    }

    #[test]
    fn display_roundtrips_through_parser() {
        let e = ScalarExpr::parse("sin(x)*exp(y/2) - 3*x^2").unwrap();
        let text = e.to_string();
        let re = ScalarExpr::parse(&text).unwrap();
        let p = pt(0.7, -0.4);
        assert_relative_eq!(
            e.jet_eval(p).unwrap().v,
            re.jet_eval(p).unwrap().v,
            max_relative = 1e-15
        );
    }
}
