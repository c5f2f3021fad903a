//! Polynomial expressions: rationals `p/q`, variables, `+ - * ^`,
//! parentheses and unary minus. `^` is right-associative and binds tighter
//! than unary minus, so `-x^2 = -(x^2)`.

use num::{BigInt, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::kernel::{Poly, Rat};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

/// Position is a 0-based character offset.
fn lex(text: &str, dim: usize) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '0'..='9' => {
                let num = take_digits(&chars, &mut i);
                let mut value = Rat::from_integer(num);
                if chars.get(i) == Some(&'/') {
                    i += 1;
                    if !chars.get(i).is_some_and(char::is_ascii_digit) {
                        return Err(syntax(i, "expected digits after '/'"));
                    }
                    let den = take_digits(&chars, &mut i);
                    if den.is_zero() {
                        return Err(syntax(start, "zero denominator"));
                    }
                    value /= Rat::from_integer(den);
                }
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                let index =
                    resolve(&name, dim).ok_or(Error::UnknownVariable { name, pos: start })?;
                out.push((start, Tok::Var(index)));
                continue;
            }
            '/' => return Err(syntax(start, "'/' only appears inside rational literals")),
            other => return Err(syntax(start, &format!("unexpected character {other:?}"))),
        }
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

fn take_digits(chars: &[char], i: &mut usize) -> BigInt {
    let start = *i;
    while *i < chars.len() && chars[*i].is_ascii_digit() {
        *i += 1;
    }
    let s: String = chars[start..*i].iter().collect();
    s.parse().expect("ascii digits")
}

fn resolve(name: &str, dim: usize) -> Option<usize> {
    if dim <= 3 {
        if let Some(k) = ["x", "y", "z"][..dim].iter().position(|&a| a == name) {
            return Some(k);
        }
    }
    let rest = name.strip_prefix('x')?;
    if rest.starts_with('0') {
        return None;
    }
    let k: usize = rest.parse().ok()?;
    (1..=dim).contains(&k).then(|| k - 1)
}

fn syntax(pos: usize, msg: &str) -> Error {
    Error::Syntax {
        pos,
        msg: msg.to_string(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc * self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let exponent = self.unary_exponent()?;
        let e = exponent
            .as_constant()
            .filter(|c| c.is_integer() && !c.is_negative())
            .and_then(|c| c.to_integer().to_u32())
            .ok_or(Error::BadExponent { pos })?;
        Ok(base.pow(e))
    }

    /// The exponent of `^`: a signed power, so `x^2^3 = x^8` and `x^-1` is
    /// parsed (and then rejected as an exponent).
    fn unary_exponent(&mut self) -> Result<Poly> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary_exponent()?);
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Poly> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(r) => Ok(Poly::constant(self.dim, r)),
            Tok::Var(i) => Ok(Poly::var(self.dim, i)),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.pos();
                if self.bump() != Tok::RParen {
                    return Err(syntax(close, "expected ')'"));
                }
                Ok(inner)
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, &format!("unexpected {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Num(_) => "number",
        Tok::Var(_) => "variable",
        Tok::Plus => "'+'",
        Tok::Minus => "'-'",
        Tok::Star => "'*'",
        Tok::Caret => "'^'",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
        Tok::End => "end of input",
    }
}

/// Parses a polynomial in `dim` variables.
pub fn parse_poly(text: &str, dim: usize) -> Result<Poly> {
    let toks = lex(text, dim)?;
    let mut p = Parser { toks, at: 0, dim };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        let pos = p.pos();
        let what = describe(p.peek());
        return Err(syntax(pos, &format!("unexpected {what}")));
    }
    Ok(out)
}

/// Parses a rational literal such as `-3/2`.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let p = parse_poly(text, 0)?;
    p.as_constant()
        .ok_or_else(|| syntax(0, "expected a constant"))
}
