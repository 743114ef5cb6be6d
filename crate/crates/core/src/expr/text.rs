//! Infix text format.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" number | "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | name | name "(" expr { "," expr } ")" | "(" expr ")" ;
//! ```
//!
//! `/` is protected division and `^` is protected power. A minus sign directly
//! before a number literal (not followed by `^`) is part of the literal.

use super::{Alphabet, BinaryOp, Expr, ExprError, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Var(_) => PREC_ATOM,
        Expr::Const(c) if c.is_sign_negative() => PREC_NEG,
        Expr::Const(_) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(op, ..) => match op {
            BinaryOp::Add | BinaryOp::Sub => PREC_ADD,
            BinaryOp::Mul | BinaryOp::Pdiv => PREC_MUL,
            BinaryOp::Pow => PREC_POW,
        },
    }
}

fn format_number(c: f64) -> String {
    // Debug formatting is the shortest string that parses back to the same bits.
    format!("{c:?}")
}

fn write_expr(e: &Expr, names: &[String], out: &mut String) {
    match e {
        Expr::Var(i) => match names.get(*i) {
            Some(name) => out.push_str(name),
            None => out.push_str(&format!("x{i}")),
        },
        Expr::Const(c) => out.push_str(&format_number(*c)),
        Expr::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            let bare = matches!(**a, Expr::Var(_))
                || matches!(**a, Expr::Unary(op, _) if op != UnaryOp::Neg);
            wrap(a, names, out, !bare);
        }
        Expr::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expr(a, names, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            let p = precedence(e);
            let (left_parens, right_parens) = if *op == BinaryOp::Pow {
                (precedence(a) < PREC_ATOM, precedence(b) < PREC_NEG)
            } else {
                (precedence(a) < p, precedence(b) <= p)
            };
            wrap(a, names, out, left_parens);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            wrap(b, names, out, right_parens);
        }
    }
}

fn wrap(e: &Expr, names: &[String], out: &mut String, parens: bool) {
    if parens {
        out.push('(');
        write_expr(e, names, out);
        out.push(')');
    } else {
        write_expr(e, names, out);
    }
}

pub(crate) fn to_text(e: &Expr, names: &[String]) -> String {
    let mut out = String::new();
    write_expr(e, names, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Sym(char),
    End,
}

fn describe(t: &Token) -> String {
    match t {
        Token::Number(n) => format!("number {n}"),
        Token::Ident(s) => format!("`{s}`"),
        Token::Sym(c) => format!("`{c}`"),
        Token::End => "end of input".to_string(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value = literal.parse::<f64>().map_err(|_| ExprError::Syntax {
                position: tokens.len() + 1,
                message: format!("malformed number `{literal}`"),
            })?;
            tokens.push(Token::Number(value));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            tokens.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                position: tokens.len() + 1,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    tokens.push(Token::End);
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        self.tokens
            .get(self.pos + offset)
            .unwrap_or(&Token::End)
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t != Token::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            position: self.pos + 1,
            message: message.into(),
        }
    }

    fn expect(&mut self, sym: char) -> Result<(), ExprError> {
        if *self.peek() == Token::Sym(sym) {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Sym('+') => BinaryOp::Add,
                Token::Sym('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Sym('*') => BinaryOp::Mul,
                Token::Sym('/') => BinaryOp::Pdiv,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() != Token::Sym('-') {
            return self.power();
        }
        self.next();
        if let Token::Number(n) = *self.peek() {
            if *self.peek_at(1) != Token::Sym('^') {
                self.next();
                return Ok(Expr::Const(-n));
            }
        }
        Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Token::Sym('^') {
            self.next();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().clone() {
            Token::Number(n) => {
                self.next();
                Ok(Expr::Const(n))
            }
            Token::Sym('(') => {
                self.next();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.next();
                if *self.peek() == Token::Sym('(') {
                    self.call(name)
                } else {
                    self.names
                        .iter()
                        .position(|n| *n == name)
                        .map(Expr::Var)
                        .ok_or(ExprError::UnknownIdentifier(name))
                }
            }
            other => Err(self.error(format!("unexpected {}", describe(&other)))),
        }
    }

    fn call(&mut self, name: String) -> Result<Expr, ExprError> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Token::Sym(',') {
            self.next();
            args.push(self.expr()?);
        }
        self.expect(')')?;
        let expected = if UnaryOp::from_name(&name).is_some() {
            1
        } else if BinaryOp::from_name(&name).is_some() {
            2
        } else {
            return Err(ExprError::UnknownIdentifier(name));
        };
        if args.len() != expected {
            return Err(ExprError::ArityMisuse {
                name,
                expected,
                got: args.len(),
            });
        }
        let mut args = args.into_iter();
        let first = args.next().expect("one argument");
        Ok(match args.next() {
            None => Expr::unary(UnaryOp::from_name(&name).expect("unary"), first),
            Some(second) => Expr::binary(BinaryOp::from_name(&name).expect("binary"), first, second),
        })
    }
}

/// Parses infix text against variable names.
pub fn parse_with_names(text: &str, names: &[String]) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        names,
    };
    let e = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(format!("unexpected {}", describe(parser.peek()))));
    }
    Ok(e)
}

/// Parses infix text using the alphabet's variable names.
pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Expr, ExprError> {
    parse_with_names(text, &alphabet.names)
}
