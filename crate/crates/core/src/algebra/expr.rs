//! Small infix parser for rational expressions in an outer variable and λ,
//! e.g. `"-λ/2 + 1"`, `"(2 - 3x^2 - x^4)/(x (1 - x^2)(1 + x^2))"`.

use super::{kconst, lam, zvar, AlgebraError, BiRatFunc, CRat, Field, RatFunc, RatFuncL, Ring};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, AlgebraError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()[]".contains(c) || c == '−' {
            let c = match c {
                '−' => '-',
                '[' => '(',
                ']' => ')',
                c => c,
            };
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(AlgebraError::Parse(s.into()));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    var: &'a str,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self) -> AlgebraError {
        AlgebraError::Parse(self.src.into())
    }
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expr(&mut self) -> Result<BiRatFunc, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }
    fn term(&mut self) -> Result<BiRatFunc, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(AlgebraError::ZeroDenominator);
                }
                acc = acc.div(&d);
            } else if matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('('))) {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }
    fn unary(&mut self) -> Result<BiRatFunc, AlgebraError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }
    fn power(&mut self) -> Result<BiRatFunc, AlgebraError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let e = match self.toks.get(self.pos) {
                Some(Tok::Num(n)) => n.parse::<i32>().map_err(|_| self.err())?,
                _ => return Err(self.err()),
            };
            self.pos += 1;
            if neg && base.is_zero() {
                return Err(AlgebraError::ZeroDenominator);
            }
            return Ok(base.powi(if neg { -e } else { e }));
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<BiRatFunc, AlgebraError> {
        let t = self.peek().cloned().ok_or_else(|| self.err())?;
        self.pos += 1;
        match t {
            Tok::Num(n) => {
                let r = super::parse_rat(&n)?;
                Ok(kconst(RatFunc::constant(CRat::real(r))))
            }
            Tok::Ident(id) => match id.as_str() {
                "λ" | "lambda" => Ok(kconst(lam())),
                "i" => Ok(kconst(RatFunc::constant(CRat::i()))),
                v if v == self.var => Ok(zvar()),
                _ => Err(self.err()),
            },
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err());
                }
                Ok(e)
            }
            _ => Err(self.err()),
        }
    }
}

/// Parse an expression in the outer variable `var` and λ.
pub fn parse_birat(s: &str, var: &str) -> Result<BiRatFunc, AlgebraError> {
    let mut p = Parser { toks: lex(s)?, pos: 0, var, src: s };
    if p.toks.is_empty() {
        return Err(p.err());
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err());
    }
    Ok(e)
}

/// Parse a rational function of λ alone.
pub fn parse_ratfunc(s: &str) -> Result<RatFuncL, AlgebraError> {
    parse_birat(s, "λ")?.as_constant().ok_or_else(|| AlgebraError::Parse(s.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rf_i, FmtVar};

    #[test]
    fn parses_lambda_forms() {
        assert_eq!(parse_ratfunc("-λ/2 + 1").unwrap(), rf_i(&[2, -1], &[2]));
        assert_eq!(parse_ratfunc("(λ^2+12λ+12)/28").unwrap(), rf_i(&[12, 12, 1], &[28]));
        assert_eq!(parse_ratfunc("(lambda - 1)^2").unwrap(), rf_i(&[1, -2, 1], &[1]));
        assert!(parse_ratfunc("1/(λ-λ)").is_err());
        assert!(parse_ratfunc("x + 1").is_err());
    }

    #[test]
    fn display_roundtrip() {
        for f in [rf_i(&[3, -7, 2], &[5, 0, 1]), rf_i(&[-1], &[2]), rf_i(&[0, -1], &[2])] {
            let s = f.fmt_var("λ");
            assert_eq!(parse_ratfunc(&s).unwrap(), f, "{s}");
        }
        let c = RatFunc::constant(CRat::gauss(2, -3));
        assert_eq!(parse_ratfunc(&c.fmt_var("λ")).unwrap(), c);
    }

    #[test]
    fn parses_outer_variable() {
        let w = parse_birat("(2 - 3ρ^2 - ρ^4)/(ρ(1 - ρ^2)(1 + ρ^2))", "ρ").unwrap();
        assert_eq!(w, crate::fuchsian::registry::ground_state_log_derivative());
    }

    #[test]
    fn bivariate_display_roundtrip() {
        use crate::fuchsian::{fmt_bi, registry};
        for name in ["spec", "specg", "Schrod", "specss", "specssHeun0", "specssHeun"] {
            let ode = registry::equation(name).unwrap();
            for f in [&ode.p, &ode.q] {
                let s = fmt_bi(f, &ode.var);
                assert_eq!(&parse_birat(&s, &ode.var).unwrap(), f, "{name}: {s}");
            }
        }
    }
}
