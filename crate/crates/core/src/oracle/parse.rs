//! Reader for equations written as plain text, e.g.
//! `eta_t + f_xx + G f_yy + alpha ((eta f_x)_x + G (eta f_y)_y) - 1/6 beta f_4x`.
//!
//! Juxtaposition multiplies; `^n` raises to an integer power; `(…)_xy`
//! differentiates a group; `p/q` is a rational literal. Derivative suffixes
//! read `x`, `y`, `t` with optional counts (`f_2x2yt`, `f_xxt`). A name with
//! an unreadable suffix (such as `h_h`) is kept as an opaque symbol.

use num_rational::Rational64;

use super::termsum::{Base, Grade, Monomial, TermSum, UNIT};
use crate::error::{Error, Result};

/// Named parameter combinations available to an equation text.
#[derive(Debug, Clone, Default)]
pub struct Symbols {
    entries: Vec<(&'static str, Grade)>,
}

impl Symbols {
    /// α, β, γ, δ, τ plus `G = γ/β`.
    pub fn standard() -> Self {
        Self {
            entries: vec![
                ("alpha", [1, 0, 0, 0, 0]),
                ("beta", [0, 1, 0, 0, 0]),
                ("gamma", [0, 0, 1, 0, 0]),
                ("delta", [0, 0, 0, 1, 0]),
                ("tau", [0, 0, 0, 0, 1]),
                ("G", [0, -1, 1, 0, 0]),
            ],
        }
    }

    pub fn with(mut self, name: &'static str, g: Grade) -> Self {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, g));
        self
    }

    fn get(&self, name: &str) -> Option<Grade> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, g)| *g)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    /// Closing parenthesis with an optional derivative suffix.
    RParen(Option<String>),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_char = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    while i < b.len() {
        let c = b[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let v = src[start..i]
                    .parse()
                    .map_err(|_| Error::Oracle(format!("bad integer at {start}")))?;
                out.push((Tok::Num(v), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while i < b.len() && ident_char(b[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            b')' => {
                i += 1;
                let suffix = if i < b.len() && b[i] == b'_' {
                    let s = i + 1;
                    i = s;
                    while i < b.len() && b[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    Some(src[s..i].to_string())
                } else {
                    None
                };
                out.push((Tok::RParen(suffix), start));
                continue;
            }
            _ => {}
        }
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            _ => {
                return Err(Error::Oracle(format!(
                    "unexpected character `{}` at {start}",
                    c as char
                )))
            }
        };
        out.push((t, start));
        i += 1;
    }
    Ok(out)
}

/// Read a derivative suffix such as `2x2yt` or `xxy` into `(a, b, c)`.
pub fn parse_suffix(s: &str) -> Option<(u8, u8, u8)> {
    let mut counts = [0u8; 3];
    let mut pending: Option<u8> = None;
    if s.is_empty() {
        return None;
    }
    for ch in s.chars() {
        if let Some(d) = ch.to_digit(10) {
            if pending.is_some() || d == 0 {
                return None;
            }
            pending = Some(d as u8);
            continue;
        }
        let idx = match ch {
            'x' => 0,
            'y' => 1,
            't' => 2,
            _ => return None,
        };
        counts[idx] += pending.take().unwrap_or(1);
    }
    if pending.is_some() {
        return None;
    }
    Some((counts[0], counts[1], counts[2]))
}

fn ident_to_sum(name: &str, syms: &Symbols) -> Result<TermSum> {
    if let Some(g) = syms.get(name) {
        return Ok(TermSum::param(g));
    }
    let (stem, suffix) = match name.split_once('_') {
        Some((s, x)) => (s, Some(x)),
        None => (name, None),
    };
    let base = match stem {
        "f" => Base::F,
        "eta" => Base::Eta,
        "h" => Base::H,
        _ => return Err(Error::Oracle(format!("unknown symbol `{name}`"))),
    };
    match suffix {
        None => Ok(TermSum::monomial(Monomial::new(base, 0, 0, 0)?)),
        Some(sfx) => match parse_suffix(sfx) {
            Some((a, b, c)) => Ok(TermSum::monomial(Monomial::new(base, a, b, c)?)),
            None => Ok(TermSum::monomial(Monomial::new(
                Base::Sym(name.to_string()),
                0,
                0,
                0,
            )?)),
        },
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    syms: &'a Symbols,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn err(&self, msg: &str) -> Error {
        let at = self
            .toks
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(usize::MAX);
        Error::Oracle(format!("{msg} at offset {at}"))
    }

    fn expr(&mut self) -> Result<TermSum> {
        let mut acc = TermSum::zero();
        let mut sign = Rational64::from_integer(1);
        let mut first = true;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    sign = -sign;
                }
                _ if first => {}
                _ => return Ok(acc),
            }
            first = false;
            let t = self.product()?;
            acc = acc.add(&t.scale(sign));
            sign = Rational64::from_integer(1);
            if !matches!(self.peek(), Some(Tok::Plus | Tok::Minus)) {
                return Ok(acc);
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::LParen))
    }

    fn product(&mut self) -> Result<TermSum> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Tok::Num(d)) if *d != 0 => {
                            let d = *d;
                            self.pos += 1;
                            acc = acc.scale(Rational64::new(1, d));
                        }
                        _ => return Err(self.err("division only by a nonzero integer literal")),
                    }
                }
                _ if self.starts_factor() => acc = acc.mul(&self.power()?)?,
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<TermSum> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let n = match self.peek() {
            Some(Tok::Num(n)) => *n,
            _ => return Err(self.err("expected an integer exponent")),
        };
        self.pos += 1;
        if neg {
            // Only pure parameter products may carry negative powers.
            let mut it = base.iter();
            match (it.next(), it.next()) {
                (Some(((g, f), c)), None) if f.is_empty() && *c == Rational64::from_integer(1) => {
                    let mut out: Grade = UNIT;
                    for i in 0..5 {
                        out[i] = -g[i] * n as i32;
                    }
                    Ok(TermSum::param(out))
                }
                _ => Err(self.err("negative powers apply to parameters only")),
            }
        } else {
            base.pow(n as u32)
        }
    }

    fn atom(&mut self) -> Result<TermSum> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(TermSum::constant(Rational64::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                ident_to_sum(&name, self.syms)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek().cloned() {
                    Some(Tok::RParen(sfx)) => {
                        self.pos += 1;
                        match sfx {
                            None => Ok(inner),
                            Some(s) => {
                                let (a, b, c) = parse_suffix(&s).ok_or_else(|| {
                                    self.err(&format!("bad derivative suffix `{s}`"))
                                })?;
                                inner.differentiate_n(a, b, c)
                            }
                        }
                    }
                    _ => Err(self.err("expected `)`")),
                }
            }
            _ => Err(self.err("expected a factor")),
        }
    }
}

/// Parse an equation text (left side of `… = 0`) into a normalized sum.
pub fn parse_equation(src: &str, syms: &Symbols) -> Result<TermSum> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        syms,
    };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> TermSum {
        parse_equation(s, &Symbols::standard()).unwrap()
    }

    #[test]
    fn suffixes() {
        assert_eq!(parse_suffix("2x2yt"), Some((2, 2, 1)));
        assert_eq!(parse_suffix("xxyy"), Some((2, 2, 0)));
        assert_eq!(parse_suffix("x2yt"), Some((1, 2, 1)));
        assert_eq!(parse_suffix("4x2t"), Some((4, 0, 2)));
        assert_eq!(parse_suffix("h"), None);
        assert_eq!(parse_suffix("2"), None);
    }

    #[test]
    fn product_rule_through_groups() {
        assert_eq!(parse("(f_x^2)_x"), parse("2 f_x f_xx"));
        assert_eq!(parse("(h f_x)_x"), parse("h_x f_x + h f_2x"));
    }

    #[test]
    fn ratio_symbol_and_negative_power() {
        assert_eq!(parse("G f_yy"), parse("gamma beta^-1 f_yy"));
        assert_eq!(parse("G^2"), parse("gamma^2 beta^-2"));
    }

    #[test]
    fn rationals_and_signs() {
        assert_eq!(parse("-1/6 beta f_4x + 1/6 beta f_4x"), TermSum::zero());
        assert_eq!(parse("- (f_x - f_y)"), parse("f_y - f_x"));
        assert_eq!(parse("-3/2 f_y^2"), parse("-3 f_y f_y / 2"));
    }

    #[test]
    fn opaque_symbols_and_errors() {
        let s = parse("h_h f_y");
        assert!(s.contains_base(&Base::Sym("h_h".into())));
        assert!(parse_equation("q_x", &Symbols::standard()).is_err());
        assert!(parse_equation("(f_x", &Symbols::standard()).is_err());
        assert!(parse_equation("f_x^-1", &Symbols::standard()).is_err());
        assert!(parse_equation("f_t )", &Symbols::standard()).is_err());
    }
}
