use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::poly::{index_of, Poly, Vars};
use super::scalar::Scalar;
use crate::{Error, Result};

/// Parse `+ - * ^ ( )` expressions over integers, `a/b` rationals, `sqrt2`, `pi` and
/// the given variables. Exponents must be non-negative integers, except on `pi`.
pub fn parse_poly(text: &str, vars: &Vars) -> Result<Poly> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Variable(format!("unexpected trailing input in `{text}`")));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push(Tok::Num(t.parse().map_err(|_| Error::Variable(format!("bad integer `{t}`")))?));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Variable(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn peek_op(&self, c: char) -> bool {
        self.toks.get(self.pos) == Some(&Tok::Op(c))
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut neg = false;
        if self.peek_op('-') {
            self.pos += 1;
            neg = true;
        } else if self.peek_op('+') {
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if neg {
            acc = -acc;
        }
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                acc = &acc + &self.term()?;
            } else if self.peek_op('-') {
                self.pos += 1;
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                acc = &acc * &self.power()?;
            } else if self.peek_op('/') {
                self.pos += 1;
                let d = self.power()?;
                let inv = d
                    .degree()
                    .filter(|&k| k == 0)
                    .and_then(|_| d.coeff(&alloc::vec![0; self.vars.len()]).recip())
                    .ok_or_else(|| Error::Variable("division by a non-monomial constant".into()))?;
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let (base, is_pi) = self.atom()?;
        if !self.peek_op('^') {
            return Ok(base);
        }
        self.pos += 1;
        let mut neg = false;
        if self.peek_op('-') {
            self.pos += 1;
            neg = true;
        }
        let Some(Tok::Num(k)) = self.toks.get(self.pos).cloned() else {
            return Err(Error::Variable("exponent must be an integer".into()));
        };
        self.pos += 1;
        if is_pi {
            let k = if neg { -k } else { k };
            return Ok(Poly::constant(self.vars, Scalar::pi_pow(k as i32)));
        }
        if neg {
            return Err(Error::Variable("negative exponent on a non-pi factor".into()));
        }
        Ok(base.pow(k as u32))
    }

    fn atom(&mut self) -> Result<(Poly, bool)> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| Error::Variable("unexpected end of input".into()))?;
        self.pos += 1;
        match t {
            Tok::Num(n) => Ok((Poly::constant(self.vars, Scalar::int(n)), false)),
            Tok::Ident(name) => match name.as_str() {
                "sqrt2" => Ok((Poly::constant(self.vars, Scalar::sqrt2()), false)),
                "pi" => Ok((Poly::constant(self.vars, Scalar::pi_pow(1)), true)),
                _ => Ok((Poly::var(self.vars, index_of(self.vars, &name)?), false)),
            },
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.peek_op(')') {
                    return Err(Error::Variable("missing `)`".into()));
                }
                self.pos += 1;
                Ok((e, false))
            }
            Tok::Op(c) => Err(Error::Variable(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::vars;

    #[test]
    fn parses_rendered_polynomials_back() {
        let v = vars(&["a", "y1", "y2", "d"]);
        let text = "1/2*sqrt2*y1 + 1/2*sqrt2*y2 - 1/4*pi^-1 + (1 + sqrt2)*a^2*d";
        let p = parse_poly(text, &v).unwrap();
        assert_eq!(parse_poly(&alloc::string::ToString::to_string(&p), &v).unwrap(), p);
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(parse_poly("z + 1", &vars(&["x"])).is_err());
    }
}
