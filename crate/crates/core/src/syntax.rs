//! Rule text: parser and pretty-printer.
//!
//! ```text
//! spec    := rule*
//! rule    := ID "<-" ID incl_op ID clauses
//!          | ID "<-" ID "unless" excl_op ID clauses
//! clauses := ["where" expr] ["map" "{" ID ":=" expr ("," ID ":=" expr)* "}"]
//! ```
//!
//! Expressions use, from loosest to tightest binding: `|`, `&`, prefix `!`,
//! the comparisons `< <= > >= =` (non-associative), `+ -`, `* / %`. Atoms are
//! naturals, `true`, `false`, `a.KEY` (first operand) and `b.KEY` (second
//! operand). `#` starts a comment that runs to the end of the line.

use std::collections::HashSet;

use num_bigint::BigUint;

use crate::analysis::Spec;
use crate::error::ParseError;
use crate::expr::{BinOp, Expr, MapPredicate, MapUpdate, Side};
use crate::model::Identifier;
use crate::rule::{ExclusiveOp, ExclusiveRule, InclusiveOp, InclusiveRule, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Arrow,
    Assign,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Op(BinOp),
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Arrow => "`<-`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::Bang => "`!`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (line_no, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (line_no + 1, i + 1);
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('<', Some('-')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Op(BinOp::Le), 2),
                ('>', Some('=')) => (Tok::Op(BinOp::Ge), 2),
                (':', Some('=')) => (Tok::Assign, 2),
                ('<', _) => (Tok::Op(BinOp::Lt), 1),
                ('>', _) => (Tok::Op(BinOp::Gt), 1),
                ('=', _) => (Tok::Op(BinOp::Eq), 1),
                ('+', _) => (Tok::Op(BinOp::Add), 1),
                ('-', _) => (Tok::Op(BinOp::Sub), 1),
                ('*', _) => (Tok::Op(BinOp::Mul), 1),
                ('/', _) => (Tok::Op(BinOp::Div), 1),
                ('%', _) => (Tok::Op(BinOp::Rem), 1),
                ('&', _) => (Tok::Op(BinOp::And), 1),
                ('|', _) => (Tok::Op(BinOp::Or), 1),
                ('!', _) => (Tok::Bang, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                (c, _) if is_word_char(c) => {
                    let len = chars[i..].iter().take_while(|&&c| is_word_char(c)).count();
                    (Tok::Word(chars[i..i + len].iter().collect()), len)
                }
                (c, _) => return Err(ParseError::new(line, column, format!("unexpected character `{c}`"))),
            };
            out.push(Spanned { tok, line, column });
            i += width;
        }
    }
    let line = src.lines().count().max(1);
    let column = src.lines().last().map_or(1, |l| l.chars().count() + 1);
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.column, message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<Identifier, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(Identifier::new(w).expect("words are valid identifiers"))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn keyword_is(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == word)
    }

    fn spec(&mut self) -> Result<Spec, ParseError> {
        let mut rules = Vec::new();
        while *self.peek() != Tok::Eof {
            rules.push(self.rule()?);
        }
        Ok(Spec::new(rules))
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let lhs = self.ident("a rule name")?;
        self.expect(Tok::Arrow, "`<-`")?;
        let left = self.ident("an identifier")?;
        let op_word = match self.peek().clone() {
            Tok::Word(w) => w,
            _ => return Err(self.unexpected("a temporal operator or `unless`")),
        };
        let rule = if op_word == "unless" {
            self.bump();
            let op = match self.peek() {
                Tok::Word(w) => ExclusiveOp::from_keyword(w),
                _ => None,
            }
            .ok_or_else(|| self.unexpected("one of `after`, `follow`, `contain`"))?;
            self.bump();
            let excluded = self.ident("an identifier")?;
            let (phi, psi) = self.clauses()?;
            Rule::Exclusive(ExclusiveRule { lhs, included: left, op, excluded, phi, psi })
        } else {
            let op = InclusiveOp::from_keyword(&op_word)
                .ok_or_else(|| self.unexpected("a temporal operator or `unless`"))?;
            self.bump();
            let right = self.ident("an identifier")?;
            let (phi, psi) = self.clauses()?;
            Rule::Inclusive(InclusiveRule { lhs, left, op, right, phi, psi })
        };
        Ok(rule)
    }

    fn clauses(&mut self) -> Result<(MapPredicate, MapUpdate), ParseError> {
        let mut phi = MapPredicate::always();
        let mut psi = MapUpdate::empty();
        // A following `where <-` or `map <-` starts the next rule instead.
        if self.keyword_is("where") && *self.peek_at(1) != Tok::Arrow {
            self.bump();
            phi = MapPredicate::new(self.expr()?);
        }
        if self.keyword_is("map") && *self.peek_at(1) == Tok::LBrace {
            self.bump();
            self.bump();
            let mut seen = HashSet::new();
            let mut assignments = Vec::new();
            if *self.peek() != Tok::RBrace {
                loop {
                    let at = &self.toks[self.pos];
                    let (line, column) = (at.line, at.column);
                    let key = self.ident("a map key")?;
                    if !seen.insert(key.clone()) {
                        return Err(ParseError::new(line, column, format!("map key `{key}` assigned twice")));
                    }
                    self.expect(Tok::Assign, "`:=`")?;
                    assignments.push((key, self.expr()?));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace, "`,` or `}`")?;
            psi = MapUpdate::new(assignments);
        }
        Ok((phi, psi))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Op(BinOp::Or) {
            self.bump();
            lhs = Expr::binary(BinOp::Or, lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.negation()?;
        while *self.peek() == Tok::Op(BinOp::And) {
            self.bump();
            lhs = Expr::binary(BinOp::And, lhs, self.negation()?);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Expr::not(self.negation()?));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.sum()?;
        match *self.peek() {
            Tok::Op(op @ (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq)) => {
                self.bump();
                let rhs = self.sum()?;
                if matches!(self.peek(), Tok::Op(BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq)) {
                    return Err(self.error_here("comparisons do not chain; add parentheses"));
                }
                Ok(Expr::binary(op, lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Tok::Op(op @ (BinOp::Add | BinOp::Sub)) = *self.peek() {
            self.bump();
            lhs = Expr::binary(op, lhs, self.product()?);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        while let Tok::Op(op @ (BinOp::Mul | BinOp::Div | BinOp::Rem)) = *self.peek() {
            self.bump();
            lhs = Expr::binary(op, lhs, self.atom()?);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Word(w) if w == "true" => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Word(w) if w == "false" => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                Ok(Expr::Nat(w.parse::<BigUint>().expect("digits parse")))
            }
            Tok::Word(w) if (w == "a" || w == "b") && *self.peek_at(1) == Tok::Dot => {
                self.bump();
                self.bump();
                let side = if w == "a" { Side::Left } else { Side::Right };
                Ok(Expr::Field(side, self.ident("a map key")?))
            }
            _ => Err(self.unexpected("a number, `true`, `false`, `a.KEY`, `b.KEY` or `(`")),
        }
    }
}

/// Parses rule text into a specification.
pub fn parse_spec(source: &str) -> Result<Spec, ParseError> {
    Parser { toks: lex(source)?, pos: 0 }.spec()
}

/// Parses a single expression.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Or, ..) => 1,
        Expr::Binary(BinOp::And, ..) => 2,
        Expr::Not(_) => 3,
        Expr::Binary(BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq, ..) => 4,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 5,
        Expr::Binary(BinOp::Mul | BinOp::Div | BinOp::Rem, ..) => 6,
        Expr::Nat(_) | Expr::Bool(_) | Expr::Field(..) => 7,
    }
}

fn write_expr(e: &Expr, min_level: u8, out: &mut String) {
    let wrap = level(e) < min_level;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Nat(n) => out.push_str(&n.to_string()),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Field(Side::Left, k) => {
            out.push_str("a.");
            out.push_str(k.as_str());
        }
        Expr::Field(Side::Right, k) => {
            out.push_str("b.");
            out.push_str(k.as_str());
        }
        Expr::Not(inner) => {
            out.push('!');
            write_expr(inner, 3, out);
        }
        Expr::Binary(op, l, r) => {
            let lv = level(e);
            // Left-associative, except comparisons which do not associate.
            let (left_min, right_min) = if lv == 4 { (5, 5) } else { (lv, lv + 1) };
            write_expr(l, left_min, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(r, right_min, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Renders an expression with the minimum parentheses needed to reparse it.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 1, &mut out);
    out
}

fn write_clauses(phi: &MapPredicate, psi: &MapUpdate, out: &mut String) {
    if !phi.is_trivial() {
        out.push_str(" where ");
        out.push_str(&print_expr(&phi.body));
    }
    if !psi.is_empty() {
        let body: Vec<String> = psi.assignments.iter().map(|(k, e)| format!("{k} := {}", print_expr(e))).collect();
        out.push_str(" map { ");
        out.push_str(&body.join(", "));
        out.push_str(" }");
    }
}

pub fn print_rule(rule: &Rule) -> String {
    let mut out = String::new();
    match rule {
        Rule::Inclusive(r) => {
            out.push_str(&format!("{} <- {} {} {}", r.lhs, r.left, r.op.keyword(), r.right));
            write_clauses(&r.phi, &r.psi, &mut out);
        }
        Rule::Exclusive(r) => {
            out.push_str(&format!("{} <- {} unless {} {}", r.lhs, r.included, r.op.keyword(), r.excluded));
            write_clauses(&r.phi, &r.psi, &mut out);
        }
    }
    out
}

/// One rule per line.
pub fn print_spec(spec: &Spec) -> String {
    spec.rules.iter().map(|r| print_rule(r) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ident;
    use proptest::prelude::*;

    #[test]
    fn squaring_rule() {
        let spec = parse_spec("e1 <- e0 coincide e0 where a.d = b.d map { d := a.d * a.d }").unwrap();
        let d = ident("d");
        let expected = Rule::inclusive(ident("e1"), ident("e0"), InclusiveOp::Coincide, ident("e0"))
            .with_phi(MapPredicate::new(Expr::binary(BinOp::Eq, Expr::left(d.clone()), Expr::right(d.clone()))))
            .with_psi(MapUpdate::new(vec![(d.clone(), Expr::binary(BinOp::Mul, Expr::left(d.clone()), Expr::left(d)))]));
        assert_eq!(spec.rules, vec![expected]);
    }

    #[test]
    fn defaults() {
        let spec = parse_spec("A <- B before C").unwrap();
        assert_eq!(spec.rules, vec![Rule::inclusive(ident("A"), ident("B"), InclusiveOp::Before, ident("C"))]);
    }

    #[test]
    fn exclusive_form() {
        let spec = parse_spec("A <- B unless follow C where a.x = b.x").unwrap();
        let x = ident("x");
        let expected = Rule::exclusive(ident("A"), ident("B"), ExclusiveOp::Follow, ident("C"))
            .with_phi(MapPredicate::new(Expr::binary(BinOp::Eq, Expr::left(x.clone()), Expr::right(x))));
        assert_eq!(spec.rules, vec![expected]);
    }

    #[test]
    fn several_rules_and_comments() {
        let src = "# header\nA <- B before C # trailing\n\nD <- A unless after E\n1 <- 0 coincide 0 where a.c0 > 0 map { c0 := a.c0 - 1, c1 := a.c1 }\n";
        let spec = parse_spec(src).unwrap();
        assert_eq!(spec.len(), 3);
        assert_eq!(spec.rules[2].lhs(), &ident("1"));
    }

    #[test]
    fn keywords_as_rule_names() {
        let spec = parse_spec("A <- B before C where true\nwhere <- map meet before map { x := 1 }\nmap <- A start A").unwrap();
        assert_eq!(spec.len(), 3);
        assert_eq!(spec.rules[1].lhs(), &ident("where"));
        assert_eq!(spec.rules[2].lhs(), &ident("map"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("!a.x < 1 + 2 * 3 | b.y = 0 & true").unwrap();
        assert_eq!(print_expr(&e), "!a.x < 1 + 2 * 3 | b.y = 0 & true");
        let Expr::Binary(BinOp::Or, l, _) = &e else { panic!("{e:?}") };
        assert!(matches!(**l, Expr::Not(_)));
        assert_eq!(print_expr(&parse_expr("(1 - 2) - 3").unwrap()), "1 - 2 - 3");
        assert_eq!(print_expr(&parse_expr("1 - (2 - 3)").unwrap()), "1 - (2 - 3)");
        assert_eq!(print_expr(&parse_expr("(a.x = 1) = true").unwrap()), "(a.x = 1) = true");
    }

    #[test]
    fn errors_are_positioned() {
        let err = parse_spec("A <- B before C\nA <- B sideways C").unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
        let err = parse_spec("A <- B before C map { x := 1, x := 2 }").unwrap_err();
        assert_eq!((err.line, err.column), (1, 31));
        assert!(err.message.contains("twice"));
        let err = parse_spec("A <- B before C where a.x < 1 < 2").unwrap_err();
        assert!(err.message.contains("chain"));
        assert!(parse_spec("# nothing\n").unwrap().is_empty());
        assert!(parse_spec("A <- B before C where a.x $ 2").is_err());
        assert!(parse_spec("A <- B unless before C").is_err());
    }

    fn arb_key() -> impl Strategy<Value = Identifier> {
        prop::sample::select(vec!["x", "y", "d", "c0"]).prop_map(ident)
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u64..1000).prop_map(Expr::nat),
            any::<bool>().prop_map(Expr::Bool),
            arb_key().prop_map(Expr::left),
            arb_key().prop_map(Expr::right),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::not),
                (prop::sample::select(BinOp::ALL.to_vec()), inner.clone(), inner).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            ]
        })
    }

    fn arb_rule() -> impl Strategy<Value = Rule> {
        let id = prop::sample::select(vec!["A", "B", "C", "where", "map", "7"]).prop_map(ident);
        let psi = prop::collection::btree_map(prop::sample::select(vec!["x", "y", "d"]), arb_expr(), 0..3)
            .prop_map(|m| MapUpdate::new(m.into_iter().map(|(k, e)| (ident(k), e)).collect()));
        (id.clone(), id.clone(), id, any::<bool>(), 0usize..8, arb_expr(), psi).prop_map(|(lhs, l, r, excl, op, phi, psi)| {
            let base = if excl {
                Rule::exclusive(lhs, l, ExclusiveOp::ALL[op % 3], r)
            } else {
                Rule::inclusive(lhs, l, InclusiveOp::ALL[op], r)
            };
            base.with_phi(MapPredicate::new(phi)).with_psi(psi)
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(rules in prop::collection::vec(arb_rule(), 1..4)) {
            let spec = Spec::new(rules);
            let text = print_spec(&spec);
            let reparsed = parse_spec(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(&reparsed, &spec);
            prop_assert_eq!(print_spec(&reparsed), text);
        }
    }
}
