//! Text syntax for field elements, Witt vectors, symbols, and valuations.
//!
//! * rational functions: `(x^2 + 3*y) / (x - 1)`, `t^-2`, with named
//!   bindings substituted for identifiers that are not field variables;
//! * Witt vectors: `[a, b, c]`;
//! * Milnor symbol sums: `3*{x, y} - {t, u + 1}` (modulus supplied by the
//!   caller);
//! * Witt symbol sums: `[a, b | x, y} + 2*[c | t, u}` — Witt components
//!   before the bar, multiplicative entries after, closing brace;
//! * divisor valuations: `at t = 3`, `t = -1`, `at inf(t)`.

use crate::error::{Error, Result};
use crate::field::{DivisorValuation, FieldContext, RatFunc};
use crate::milnor::KSymbolSum;
use crate::hsym::HSymbolSum;
use crate::witt::WittVector;
use std::collections::BTreeMap;

/// Named rational-function constants available to the parser. Bindings take
/// precedence over field variables of the same name.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    map: BTreeMap<String, RatFunc>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn insert(&mut self, name: &str, value: RatFunc) {
        self.map.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&RatFunc> {
        self.map.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Parses a rational-function expression.
pub fn parse_ratfunc(ctx: &FieldContext, input: &str, bindings: &Bindings) -> Result<RatFunc> {
    let mut p = Parser::new(ctx, input, bindings)?;
    let f = p.expr()?;
    p.expect_end()?;
    Ok(f)
}

/// Parses a Witt vector `[f_1, ..., f_r]`.
pub fn parse_witt(ctx: &FieldContext, input: &str, bindings: &Bindings) -> Result<WittVector> {
    let mut p = Parser::new(ctx, input, bindings)?;
    let w = p.witt_vector()?;
    p.expect_end()?;
    Ok(w)
}

/// Parses a Milnor symbol sum `c*{b_1, ..., b_n} ± ...` with the given
/// modulus.
pub fn parse_ksym(
    ctx: &FieldContext,
    modulus: u64,
    input: &str,
    bindings: &Bindings,
) -> Result<KSymbolSum> {
    let mut p = Parser::new(ctx, input, bindings)?;
    let terms = p.symbol_sum(SymbolKind::Milnor)?;
    p.expect_end()?;
    let degree = uniform_degree(terms.iter().map(|(_, _, en)| en.len()), input)?;
    let flat = terms.into_iter().map(|(c, _, en)| (c, en)).collect();
    KSymbolSum::new(ctx, degree, modulus, flat)
}

/// Parses a Witt symbol sum `c*[a_1, ..., a_r | b_1, ..., b_n} ± ...`.
pub fn parse_hsym(ctx: &FieldContext, input: &str, bindings: &Bindings) -> Result<HSymbolSum> {
    let mut p = Parser::new(ctx, input, bindings)?;
    let terms = p.symbol_sum(SymbolKind::Witt)?;
    p.expect_end()?;
    let degree = uniform_degree(terms.iter().map(|(_, _, en)| en.len()), input)?;
    let witt_len = uniform_degree(terms.iter().map(|(_, w, _)| w.len()), input)?;
    let flat = terms
        .into_iter()
        .map(|(c, comps, en)| Ok((c, WittVector::new(ctx, comps)?, en)))
        .collect::<Result<Vec<_>>>()?;
    HSymbolSum::new(ctx, degree, witt_len, flat)
}

/// Parses a divisor valuation: `at <var> = <c>` or `at inf(<var>)` (the
/// leading `at` is optional).
pub fn parse_valuation(
    ctx: &FieldContext,
    input: &str,
    bindings: &Bindings,
) -> Result<DivisorValuation> {
    let mut p = Parser::new(ctx, input, bindings)?;
    let v = p.valuation()?;
    p.expect_end()?;
    Ok(v)
}

fn uniform_degree(lens: impl Iterator<Item = usize>, input: &str) -> Result<usize> {
    let mut degree = None;
    for len in lens {
        match degree {
            None => degree = Some(len),
            Some(d) if d == len => {}
            Some(_) => {
                return Err(Error::Parse {
                    pos: input.len(),
                    msg: "terms have different arities".into(),
                });
            }
        }
    }
    degree.ok_or_else(|| Error::Parse {
        pos: 0,
        msg: "empty symbol sum".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SymbolKind {
    /// `{b_1, ..., b_n}`
    Milnor,
    /// `[a_1, ..., a_r | b_1, ..., b_n}`
    Witt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Ident,
    Int,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Bar,
    Comma,
    Equals,
    End,
}

struct Token {
    kind: Tok,
    pos: usize,
    text: String,
}

struct Parser<'a> {
    ctx: &'a FieldContext,
    bindings: &'a Bindings,
    tokens: Vec<Token>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(ctx: &'a FieldContext, input: &str, bindings: &'a Bindings) -> Result<Parser<'a>> {
        Ok(Parser {
            ctx,
            bindings,
            tokens: tokenize(input)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.at];
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, kind: Tok) -> bool {
        if self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Result<Token> {
        let t = self.peek();
        if t.kind != kind {
            return Err(self.error(format!("expected {what}")));
        }
        let tok = Token {
            kind: t.kind,
            pos: t.pos,
            text: t.text.clone(),
        };
        self.bump();
        Ok(tok)
    }

    fn expect_end(&mut self) -> Result<()> {
        if self.peek().kind != Tok::End {
            return Err(self.error("unexpected trailing input".into()));
        }
        Ok(())
    }

    fn error(&self, msg: String) -> Error {
        Error::Parse {
            pos: self.peek().pos,
            msg,
        }
    }

    fn error_at(&self, pos: usize, msg: String) -> Error {
        Error::Parse { pos, msg }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        loop {
            if self.eat(Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(Tok::Star) {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(Tok::Slash) {
                let rhs = self.unary()?;
                acc = acc.div(&rhs).map_err(|_| self.error("division by zero".into()))?;
            } else {
                return Ok(acc);
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<RatFunc> {
        if self.eat(Tok::Minus) {
            Ok(self.unary()?.neg())
        } else {
            self.power()
        }
    }

    // power := atom ('^' exponent)?
    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if !self.eat(Tok::Caret) {
            return Ok(base);
        }
        let e = self.exponent()?;
        base.pow(e)
            .map_err(|_| self.error("zero raised to a negative power".into()))
    }

    // exponent := '-'? integer | '(' '-'? integer ')'
    fn exponent(&mut self) -> Result<i64> {
        let parens = self.eat(Tok::LParen);
        let negative = self.eat(Tok::Minus);
        let tok = self.expect(Tok::Int, "an integer exponent")?;
        let raw: i64 = tok
            .text
            .parse()
            .map_err(|_| self.error("exponent out of range".into()))?;
        if parens {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if negative { -raw } else { raw })
    }

    // atom := identifier | integer | '(' expr ')'
    fn atom(&mut self) -> Result<RatFunc> {
        match self.peek().kind {
            Tok::Ident => {
                let tok = self.bump();
                let pos = tok.pos;
                let name = tok.text.clone();
                if let Some(f) = self.bindings.get(&name) {
                    if f.ctx() != self.ctx {
                        return Err(self.error_at(
                            pos,
                            format!("binding `{name}` is over a different field"),
                        ));
                    }
                    return Ok(f.clone());
                }
                match self.ctx.var_index(&name) {
                    Some(k) => Ok(RatFunc::var(self.ctx, k)),
                    None => Err(self.error_at(pos, format!("unknown identifier `{name}`"))),
                }
            }
            Tok::Int => {
                let tok = self.bump();
                let value: i64 = tok
                    .text
                    .parse()
                    .map_err(|_| self.error("integer out of range".into()))?;
                Ok(RatFunc::constant_i64(self.ctx, value))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error("expected a variable, number, or `(`".into())),
        }
    }

    fn expr_list(&mut self, terminators: &[Tok]) -> Result<Vec<RatFunc>> {
        let mut out = Vec::new();
        if terminators.contains(&self.peek().kind) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if !self.eat(Tok::Comma) {
                return Ok(out);
            }
        }
    }

    // witt_vector := '[' expr (',' expr)* ']'
    fn witt_vector(&mut self) -> Result<WittVector> {
        self.expect(Tok::LBracket, "`[`")?;
        let comps = self.expr_list(&[Tok::RBracket])?;
        self.expect(Tok::RBracket, "`]`")?;
        WittVector::new(self.ctx, comps)
    }

    // symbol_sum := signed_symbol (('+'|'-') signed_symbol)*
    fn symbol_sum(&mut self, kind: SymbolKind) -> Result<Vec<(i64, Vec<RatFunc>, Vec<RatFunc>)>> {
        let mut out = Vec::new();
        let first = self.signed_symbol(kind, 1)?;
        out.push(first);
        loop {
            let sign = if self.eat(Tok::Plus) {
                1
            } else if self.eat(Tok::Minus) {
                -1
            } else {
                return Ok(out);
            };
            out.push(self.signed_symbol(kind, sign)?);
        }
    }

    // signed_symbol := '-' signed_symbol | integer '*'? symbol | symbol
    fn signed_symbol(
        &mut self,
        kind: SymbolKind,
        sign: i64,
    ) -> Result<(i64, Vec<RatFunc>, Vec<RatFunc>)> {
        if self.eat(Tok::Minus) {
            return self.signed_symbol(kind, -sign);
        }
        let mut coeff = sign;
        if self.peek().kind == Tok::Int {
            let tok = self.bump();
            let c: i64 = tok
                .text
                .parse()
                .map_err(|_| self.error("coefficient out of range".into()))?;
            coeff = coeff
                .checked_mul(c)
                .ok_or_else(|| self.error("coefficient out of range".into()))?;
            self.eat(Tok::Star);
        }
        let (comps, entries) = self.symbol(kind)?;
        Ok((coeff, comps, entries))
    }

    // Milnor: '{' list '}'; Witt: '[' list ('|' list)? '}'
    fn symbol(&mut self, kind: SymbolKind) -> Result<(Vec<RatFunc>, Vec<RatFunc>)> {
        match kind {
            SymbolKind::Milnor => {
                self.expect(Tok::LBrace, "`{`")?;
                let entries = self.expr_list(&[Tok::RBrace])?;
                self.expect(Tok::RBrace, "`}`")?;
                for e in &entries {
                    if e.is_zero() {
                        return Err(self.error("symbol entries must be nonzero".into()));
                    }
                }
                Ok((Vec::new(), entries))
            }
            SymbolKind::Witt => {
                self.expect(Tok::LBracket, "`[`")?;
                let comps = self.expr_list(&[Tok::Bar, Tok::RBrace])?;
                if comps.is_empty() {
                    return Err(self.error("a Witt symbol needs at least one component".into()));
                }
                let entries = if self.eat(Tok::Bar) {
                    let entries = self.expr_list(&[Tok::RBrace])?;
                    for e in &entries {
                        if e.is_zero() {
                            return Err(self.error("symbol entries must be nonzero".into()));
                        }
                    }
                    entries
                } else {
                    Vec::new()
                };
                self.expect(Tok::RBrace, "`}`")?;
                Ok((comps, entries))
            }
        }
    }

    // valuation := 'at'? (ident '=' '-'? integer | 'inf' '(' ident ')')
    fn valuation(&mut self) -> Result<DivisorValuation> {
        if self.peek().kind == Tok::Ident && self.peek().text == "at" {
            self.bump();
        }
        let tok = self.expect(Tok::Ident, "a variable name or `inf`")?;
        let name = tok.text;
        if name == "inf" || name == "infinity" {
            self.expect(Tok::LParen, "`(`")?;
            let var = self.expect(Tok::Ident, "a variable name")?;
            let k = self
                .ctx
                .var_index(&var.text)
                .ok_or_else(|| self.error(format!("unknown variable `{}`", var.text)))?;
            self.expect(Tok::RParen, "`)`")?;
            return DivisorValuation::infinity_in(self.ctx, k);
        }
        let k = self
            .ctx
            .var_index(&name)
            .ok_or_else(|| self.error(format!("unknown variable `{name}`")))?;
        self.expect(Tok::Equals, "`=`")?;
        let negative = self.eat(Tok::Minus);
        let tok = self.expect(Tok::Int, "an integer center")?;
        let raw: i64 = tok
            .text
            .parse()
            .map_err(|_| self.error("center out of range".into()))?;
        let p = self.ctx.p() as i64;
        let c = (if negative { -raw } else { raw }).rem_euclid(p) as u64;
        DivisorValuation::finite(self.ctx, k, c)
    }
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        let (kind, len) = match b {
            b'+' => (Tok::Plus, 1),
            b'-' => (Tok::Minus, 1),
            b'*' => (Tok::Star, 1),
            b'/' => (Tok::Slash, 1),
            b'^' => (Tok::Caret, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'[' => (Tok::LBracket, 1),
            b']' => (Tok::RBracket, 1),
            b'{' => (Tok::LBrace, 1),
            b'}' => (Tok::RBrace, 1),
            b'|' => (Tok::Bar, 1),
            b',' => (Tok::Comma, 1),
            b'=' => (Tok::Equals, 1),
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                (Tok::Int, j - i)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                (Tok::Ident, j - i)
            }
            _ => {
                return Err(Error::Parse {
                    pos,
                    msg: format!("unexpected character `{}`", &input[pos..pos + 1]),
                });
            }
        };
        out.push(Token {
            kind,
            pos,
            text: input[pos..pos + len].to_string(),
        });
        i += len;
    }
    out.push(Token {
        kind: Tok::End,
        pos: input.len(),
        text: String::new(),
    });
    Ok(out)
}
