use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Parses `text` into an [`Expr`]. Whitespace is ignored.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.into() }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let start = self.pos;
        let exponent = self.factor()?;
        if exponent.depends_on_x() {
            return Err(ParseError::Syntax {
                offset: start,
                message: "exponent must be a constant".into(),
            });
        }
        let n = exponent.eval(0.0).map_err(|e| ParseError::Syntax {
            offset: start,
            message: format!("invalid exponent: {e}"),
        })?;
        Ok(Expr::pow(base, n))
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::unary(UnaryOp::Neg, self.base()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent after all
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax { offset: start, message: "malformed number".into() })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if name == "x" {
            return Ok(Expr::Var);
        }
        let op = UnaryOp::from_name(name).ok_or_else(|| ParseError::UnknownIdentifier {
            offset: start,
            name: name.to_string(),
        })?;
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.expect(b')')?;
        Ok(Expr::unary(op, arg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    #[test]
    fn single_power_node() {
        assert_eq!(parse("x^2").unwrap(), Expr::pow(Expr::Var, 2.0));
    }

    #[test]
    fn division_of_power() {
        assert_eq!(
            parse("x^3/3").unwrap(),
            Expr::binary(BinaryOp::Div, Expr::pow(Expr::Var, 3.0), c(3.0))
        );
    }

    #[test]
    fn grammar_exercise() {
        // left-associative: (exp(x) + 2*x^2) - 1
        let expected = Expr::binary(
            BinaryOp::Sub,
            Expr::binary(
                BinaryOp::Add,
                Expr::unary(UnaryOp::Exp, Expr::Var),
                Expr::binary(BinaryOp::Mul, c(2.0), Expr::pow(Expr::Var, 2.0)),
            ),
            c(1.0),
        );
        assert_eq!(parse("exp(x) + 2*x^2 - 1").unwrap(), expected);
        assert_eq!(parse("exp( x )+2 * x ^ 2-1").unwrap(), expected);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse("x^2^3").unwrap(), Expr::pow(Expr::Var, 8.0));
        assert_eq!(parse("x^(1/2)").unwrap(), Expr::pow(Expr::Var, 0.5));
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(Expr::Var, -1.0));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1e-3").unwrap(), c(1e-3));
        assert_eq!(parse("2.5E+2").unwrap(), c(250.0));
        assert_eq!(parse(".5").unwrap(), c(0.5));
        assert_eq!(parse("3.").unwrap(), c(3.0));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse("foo(x)"),
            Err(ParseError::UnknownIdentifier { offset: 0, name: "foo".into() })
        );
        assert_eq!(parse("2*y").unwrap_err().offset(), 2);
        assert_eq!(parse("x +").unwrap_err().offset(), 3);
        assert_eq!(parse("(x").unwrap_err().offset(), 2);
        assert_eq!(parse("x ) ").unwrap_err().offset(), 2);
        assert_eq!(parse("x^x").unwrap_err().offset(), 2);
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("."), Err(ParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn negative_literals_stay_negations() {
        assert_eq!(parse("-1").unwrap(), Expr::unary(UnaryOp::Neg, c(1.0)));
    }
}
