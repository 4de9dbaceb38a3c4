//! Symbolic expressions over `a`, `K[.]`, `H[.]`, `I[.]` and products.
//!
//! Text syntax: `2*K[a*H[a*H[a]]] + K[a]^2*I[a^2]`. Canonical strings sort
//! product factors and group equal ones into powers; that is the only
//! algebra applied when comparing expressions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeqExpr {
    Atom,
    K(Box<SeqExpr>),
    H(Box<SeqExpr>),
    I(Box<SeqExpr>),
    Product(Vec<SeqExpr>),
    /// `(K a)^j`, kept unexpanded.
    PowerOfKA(u32),
}

impl SeqExpr {
    pub fn k(x: SeqExpr) -> SeqExpr {
        SeqExpr::K(Box::new(x))
    }

    pub fn h(x: SeqExpr) -> SeqExpr {
        SeqExpr::H(Box::new(x))
    }

    pub fn i(x: SeqExpr) -> SeqExpr {
        SeqExpr::I(Box::new(x))
    }

    pub fn ka() -> SeqExpr {
        SeqExpr::k(SeqExpr::Atom)
    }

    /// Flattened product; a single factor is returned as is.
    pub fn product(factors: Vec<SeqExpr>) -> SeqExpr {
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            f.push_factors(&mut flat);
        }
        if flat.len() == 1 {
            flat.pop().expect("one factor")
        } else {
            SeqExpr::Product(flat)
        }
    }

    /// Appends the multiplicative factors of `self`, flattening nested
    /// products and dropping `(K a)^0`.
    pub fn push_factors(self, out: &mut Vec<SeqExpr>) {
        match self {
            SeqExpr::Product(fs) => fs.into_iter().for_each(|f| f.push_factors(out)),
            SeqExpr::PowerOfKA(0) => {}
            other => out.push(other),
        }
    }

    pub fn factors(&self) -> Vec<SeqExpr> {
        let mut out = Vec::new();
        self.clone().push_factors(&mut out);
        out
    }

    pub fn is_ka(&self) -> bool {
        matches!(self, SeqExpr::K(x) if **x == SeqExpr::Atom)
    }

    /// Canonical string: children canonicalized, factors sorted, equal
    /// factors grouped as powers, `(K a)^j` expanded into `j` factors.
    pub fn canonical(&self) -> String {
        match self {
            SeqExpr::Atom => "a".into(),
            SeqExpr::K(x) => format!("K[{}]", x.canonical()),
            SeqExpr::H(x) => format!("H[{}]", x.canonical()),
            SeqExpr::I(x) => format!("I[{}]", x.canonical()),
            SeqExpr::Product(_) | SeqExpr::PowerOfKA(_) => {
                let mut parts: Vec<String> = Vec::new();
                for f in self.factors() {
                    match f {
                        SeqExpr::PowerOfKA(j) => {
                            parts.extend(std::iter::repeat("K[a]".to_string()).take(j as usize))
                        }
                        other => parts.push(other.canonical()),
                    }
                }
                parts.sort();
                group_powers(&parts)
            }
        }
    }

    /// Total number of `a` atoms, counting `(K a)^j` as `j`.
    pub fn degree(&self) -> u32 {
        match self {
            SeqExpr::Atom => 1,
            SeqExpr::K(x) | SeqExpr::H(x) | SeqExpr::I(x) => x.degree(),
            SeqExpr::Product(fs) => fs.iter().map(SeqExpr::degree).sum(),
            SeqExpr::PowerOfKA(j) => *j,
        }
    }

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Atom => write!(f, "a"),
            SeqExpr::K(x) => write!(f, "K[{x}]"),
            SeqExpr::H(x) => write!(f, "H[{x}]"),
            SeqExpr::I(x) => write!(f, "I[{x}]"),
            SeqExpr::PowerOfKA(0) => write!(f, "1"),
            SeqExpr::PowerOfKA(1) => write!(f, "K[a]"),
            SeqExpr::PowerOfKA(j) => write!(f, "K[a]^{j}"),
            SeqExpr::Product(_) => {
                // construction order, adjacent repeats shown as powers
                let mut runs: Vec<(String, u32)> = Vec::new();
                for x in self.factors() {
                    let (s, n) = match &x {
                        SeqExpr::PowerOfKA(j) => ("K[a]".to_string(), *j),
                        other => (other.to_string(), 1),
                    };
                    match runs.last_mut() {
                        Some((last, m)) if *last == s => *m += n,
                        _ => runs.push((s, n)),
                    }
                }
                let text: Vec<String> = runs
                    .into_iter()
                    .map(|(s, n)| if n == 1 { s } else { format!("{s}^{n}") })
                    .collect();
                write!(f, "{}", text.join("*"))
            }
        }
    }
}

fn group_powers(sorted: &[String]) -> String {
    if sorted.is_empty() {
        return "1".into();
    }
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let n = j - i;
        out.push(if n == 1 {
            sorted[i].clone()
        } else {
            format!("{}^{n}", sorted[i])
        });
        i = j;
    }
    out.join("*")
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f)
    }
}

/// `coeff * expr`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: i64,
    pub expr: SeqExpr,
}

impl Term {
    pub fn new(coeff: i64, expr: SeqExpr) -> Term {
        Term { coeff, expr }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff == 1 {
            write!(f, "{}", self.expr)
        } else {
            write!(f, "{}*{}", self.coeff, self.expr)
        }
    }
}

/// An ordered sum of terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expansion {
    pub terms: Vec<Term>,
}

impl Expansion {
    pub fn new(terms: Vec<Term>) -> Expansion {
        Expansion { terms }
    }

    /// Canonical term string to total coefficient; zero totals dropped.
    pub fn canonical_map(&self) -> BTreeMap<String, i64> {
        let mut out: BTreeMap<String, i64> = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.expr.canonical()).or_insert(0) += t.coeff;
        }
        out.retain(|_, c| *c != 0);
        out
    }

    /// Terms as `(coeff, canonical string)` in their stored order.
    pub fn canonical_terms(&self) -> Vec<(i64, String)> {
        self.terms.iter().map(|t| (t.coeff, t.expr.canonical())).collect()
    }

    /// Groups canonically equal terms, keeping first-occurrence order.
    pub fn grouped(&self) -> Expansion {
        let mut order: Vec<String> = Vec::new();
        let mut acc: BTreeMap<String, Term> = BTreeMap::new();
        for t in &self.terms {
            let key = t.expr.canonical();
            match acc.get_mut(&key) {
                Some(e) => e.coeff += t.coeff,
                None => {
                    order.push(key.clone());
                    acc.insert(key, t.clone());
                }
            }
        }
        Expansion::new(
            order
                .into_iter()
                .filter_map(|k| acc.remove(&k))
                .filter(|t| t.coeff != 0)
                .collect(),
        )
    }

    /// Sum of coefficients over terms whose outer operator is `K[...]`
    /// (a lone `K[a]` included).
    pub fn k_weight(&self) -> i64 {
        self.terms
            .iter()
            .filter(|t| matches!(t.expr, SeqExpr::K(_)))
            .map(|t| t.coeff)
            .sum()
    }
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Same canonical terms with the same multiplicities.
pub fn exprs_equal(x: &Expansion, y: &Expansion) -> bool {
    x.canonical_map() == y.canonical_map()
}

impl FromStr for Expansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expansion> {
        let mut p = ExprParser { src: s.as_bytes(), pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

impl FromStr for SeqExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<SeqExpr> {
        let mut p = ExprParser { src: s.as_bytes(), pos: 0 };
        let e = p.product()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::ExprSyntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::ExprSyntax {
                pos: start,
                msg: "expected an integer".into(),
            })
    }

    fn sum(&mut self) -> Result<Expansion> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(b'+') {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(Expansion::new(terms))
    }

    fn term(&mut self) -> Result<Term> {
        let mut coeff = 1i64;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            coeff = i64::try_from(self.integer()?).map_err(|_| self.error("coefficient too large"))?;
            self.expect(b'*')?;
        }
        Ok(Term::new(coeff, self.product()?))
    }

    fn product(&mut self) -> Result<SeqExpr> {
        let mut factors = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.extend(self.power()?);
        }
        Ok(SeqExpr::product(factors))
    }

    fn power(&mut self) -> Result<Vec<SeqExpr>> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer()?;
            if n == 0 || n > 64 {
                return Err(self.error("exponent must be in 1..=64"));
            }
            return Ok(vec![base; n as usize]);
        }
        Ok(vec![base])
    }

    fn atom(&mut self) -> Result<SeqExpr> {
        match self.peek() {
            Some(b'a') => {
                self.pos += 1;
                Ok(SeqExpr::Atom)
            }
            Some(c @ (b'K' | b'H' | b'I')) => {
                self.pos += 1;
                self.expect(b'[')?;
                let inner = self.product()?;
                self.expect(b']')?;
                Ok(match c {
                    b'K' => SeqExpr::k(inner),
                    b'H' => SeqExpr::h(inner),
                    _ => SeqExpr::i(inner),
                })
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.product()?;
                self.expect(b')')?;
                Ok(inner)
            }
            _ => Err(self.error("expected 'a', 'K[', 'H[', 'I[' or '('")),
        }
    }
}
