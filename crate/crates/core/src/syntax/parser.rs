use std::collections::HashMap;
use std::fmt;

use crate::term::{Term, ADD, MUL};

use super::lexer::{tokenize, Pos, Token, TokenKind};
use super::{
    Binder, BinderStyle, ClassSyntax, Command, DefSyntax, FieldKind, FieldSyntax, InstanceBody,
    InstanceSyntax, SectionItem, SectionSyntax, SourceFile,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, found: &str, expected: Vec<String>) -> Self {
        ParseError { line: pos.line, col: pos.col, found: found.into(), expected }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: unexpected {}", self.line, self.col, self.found)?;
        match self.expected.as_slice() {
            [] => Ok(()),
            [one] => write!(f, ", expected {one}"),
            many => write!(f, ", expected one of {}", many.join(", ")),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "set_option",
    "class",
    "structure",
    "instance",
    "def",
    "attribute",
    "extends",
    "section",
    "end",
    "letI",
    "opaque",
    "out_param",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Identifiers that are implicitly bound when they occur free in a
/// declaration: one letter, optionally followed by digits, subscripts or
/// primes.
pub(crate) fn is_autobound(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_numeric() || c == '\'')
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Names bound by the binders of the declaration being parsed.
    scope: Vec<String>,
    /// Allow `_` holes (only in `#synth` goals).
    holes: Option<u32>,
    anon_counter: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek_kind(), TokenKind::Ident(s) if s == kw)
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == kind
    }

    /// Error at the current token. Inside a command, a token that starts a
    /// later line than the previous token is reported right after the
    /// previous token, where the missing piece belongs.
    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        let mut pos = tok.start;
        if self.pos > 0 {
            let prev = &self.tokens[self.pos - 1];
            if prev.end.line < tok.start.line {
                pos = prev.end;
            }
        }
        ParseError::new(pos, &tok.kind.to_string(), expected.iter().map(|s| s.to_string()).collect())
    }

    fn error_here(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.start, &tok.kind.to_string(), expected.iter().map(|s| s.to_string()).collect())
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek_kind() {
            TokenKind::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn nat_u32(&mut self) -> PResult<u32> {
        match self.peek_kind() {
            TokenKind::Nat(n) => match u32::try_from(n.clone()) {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => Err(self.error(&["a priority below 2^32"])),
            },
            _ => Err(self.error(&["a number"])),
        }
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek_kind(), TokenKind::Ident(s) if !is_keyword(s))
    }

    fn starts_atom(&self) -> bool {
        match self.peek_kind() {
            TokenKind::Ident(s) => !is_keyword(s),
            TokenKind::Nat(_) | TokenKind::LParen => true,
            TokenKind::Hole => self.holes.is_some(),
            _ => false,
        }
    }

    // ---- terms ----

    fn resolve(&self, name: String) -> Term {
        if self.scope.contains(&name) || is_autobound(&name) {
            Term::Var(name)
        } else {
            Term::Const(name, Vec::new())
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek_kind().clone() {
            TokenKind::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(self.resolve(s))
            }
            TokenKind::Nat(n) => {
                self.bump();
                Ok(Term::Nat(n))
            }
            TokenKind::Hole if self.holes.is_some() => {
                self.bump();
                let id = self.holes.as_mut().expect("holes enabled");
                let m = Term::Meta(*id);
                *id += 1;
                Ok(m)
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error(&["a term"])),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let first = if self.at_ident() {
            let name = self.ident("an identifier")?;
            let mut args = Vec::new();
            while self.starts_atom() {
                args.push(self.atom()?);
            }
            let head = self.resolve(name);
            match head {
                Term::Var(v) if !args.is_empty() => {
                    return Err(ParseError::new(
                        self.tokens[self.pos - 1].start,
                        &format!("application of variable `{v}`"),
                        vec!["a constant head".into()],
                    ));
                }
                Term::Const(name, _) => Term::Const(name, args),
                var => var,
            }
        } else {
            self.atom()?
        };
        let op = match self.peek_kind() {
            TokenKind::Plus => ADD,
            TokenKind::Star => MUL,
            _ => return Ok(first),
        };
        if !first.is_atomic() {
            return Err(self.error(&["a parenthesized operand"]));
        }
        self.bump();
        let second = self.atom()?;
        Ok(Term::Const(op.into(), vec![first, second]))
    }

    // ---- binders ----

    fn binders(&mut self) -> PResult<Vec<Binder>> {
        let mut out = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::LParen | TokenKind::LBrace => {
                    let style = if self.at(&TokenKind::LParen) {
                        BinderStyle::Explicit
                    } else {
                        BinderStyle::Implicit
                    };
                    let close = if style == BinderStyle::Explicit {
                        TokenKind::RParen
                    } else {
                        TokenKind::RBrace
                    };
                    self.bump();
                    let mut names = vec![self.ident("a binder name")?];
                    while self.at_ident() {
                        names.push(self.ident("a binder name")?);
                    }
                    self.expect(TokenKind::Colon, "`:`")?;
                    let out_param = style == BinderStyle::Explicit && self.at_keyword("out_param");
                    if out_param {
                        self.bump();
                    }
                    let ty = self.term()?;
                    self.expect(close.clone(), &close.to_string())?;
                    for name in names {
                        self.scope.push(name.clone());
                        out.push(Binder { name: Some(name), ty: ty.clone(), style, out_param });
                    }
                }
                TokenKind::LBracket => {
                    self.bump();
                    let name = if self.at_ident() && *self.peek_at(1) == TokenKind::Colon {
                        let n = self.ident("a binder name")?;
                        self.bump();
                        Some(n)
                    } else {
                        None
                    };
                    let ty = self.term()?;
                    self.expect(TokenKind::RBracket, "`]`")?;
                    if let Some(n) = &name {
                        self.scope.push(n.clone());
                    }
                    out.push(Binder { name, ty, style: BinderStyle::Instance, out_param: false });
                }
                _ => return Ok(out),
            }
        }
    }

    // ---- commands ----

    fn command(&mut self) -> PResult<Command> {
        self.scope.clear();
        match self.peek_kind().clone() {
            TokenKind::Synth => {
                self.bump();
                Ok(Command::Synth(self.goal()?))
            }
            TokenKind::AttrOpen => self.instance(),
            TokenKind::Ident(kw) => match kw.as_str() {
                "set_option" => {
                    self.bump();
                    let name = self.ident("an option name")?;
                    let value = match self.peek_kind() {
                        TokenKind::Ident(b) if b == "true" => true,
                        TokenKind::Ident(b) if b == "false" => false,
                        _ => return Err(self.error(&["`true`", "`false`"])),
                    };
                    self.bump();
                    Ok(Command::SetOption { name, value })
                }
                "class" => {
                    self.bump();
                    Ok(Command::Class(self.class_body()?))
                }
                "structure" => {
                    self.bump();
                    Ok(Command::Structure(self.class_body()?))
                }
                "instance" => self.instance(),
                "def" => self.def(),
                "attribute" => {
                    self.bump();
                    self.expect(TokenKind::LBracket, "`[`")?;
                    let attr = match self.peek_kind() {
                        TokenKind::Ident(a) if a == "instance" => a.clone(),
                        _ => return Err(self.error(&["`instance`"])),
                    };
                    self.bump();
                    self.expect(TokenKind::RBracket, "`]`")?;
                    let name = self.ident("a declaration name")?;
                    Ok(Command::Attribute { attr, name })
                }
                "section" => self.section(),
                _ => Err(self.error_here(&COMMAND_STARTS)),
            },
            _ => Err(self.error_here(&COMMAND_STARTS)),
        }
    }

    fn goal(&mut self) -> PResult<Term> {
        self.holes = Some(0);
        let t = self.term();
        self.holes = None;
        t
    }

    fn class_body(&mut self) -> PResult<ClassSyntax> {
        let name = self.ident("a class name")?;
        let binders = self.binders()?;
        let mut extends = Vec::new();
        if self.at_keyword("extends") {
            self.bump();
            extends.push(self.term()?);
            while self.at(&TokenKind::Comma) {
                self.bump();
                extends.push(self.term()?);
            }
        }
        let mut fields = Vec::new();
        if self.at(&TokenKind::Assign) {
            self.bump();
            if !self.at(&TokenKind::LParen) {
                return Err(self.error(&["`(`"]));
            }
            while self.at(&TokenKind::LParen) {
                self.bump();
                let fname = self.ident("a field name")?;
                self.expect(TokenKind::Colon, "`:`")?;
                let ty = self.term()?;
                let mut kind = FieldKind::Proof;
                if self.at(&TokenKind::Comma) {
                    self.bump();
                    kind = match self.peek_kind() {
                        TokenKind::Ident(k) if k == "data" => FieldKind::Data,
                        TokenKind::Ident(k) if k == "proof" => FieldKind::Proof,
                        _ => return Err(self.error(&["`data`", "`proof`"])),
                    };
                    self.bump();
                }
                self.expect(TokenKind::RParen, "`)`")?;
                fields.push(FieldSyntax { name: fname, ty, kind });
            }
        }
        Ok(ClassSyntax { name, binders, extends, fields })
    }

    fn instance(&mut self) -> PResult<Command> {
        let mut priority = None;
        if self.at(&TokenKind::AttrOpen) {
            self.bump();
            self.expect_keyword("priority")?;
            priority = Some(self.nat_u32()?);
            self.expect(TokenKind::RBracket, "`]`")?;
        }
        self.expect_keyword("instance")?;
        let written = if self.at_ident() { Some(self.ident("an instance name")?) } else { None };
        let binders = self.binders()?;
        self.expect(TokenKind::Colon, "`:`")?;
        let head = self.term()?;
        let body = if self.at(&TokenKind::Assign) {
            self.bump();
            self.instance_body()?
        } else {
            InstanceBody::Opaque
        };
        let (name, generated_name) = match written {
            Some(n) => (n, false),
            None => {
                let class = head.head().unwrap_or("inst").to_string();
                let n = self.anon_counter.entry(class.clone()).or_insert(0);
                *n += 1;
                (format!("{class}.inst{n}"), true)
            }
        };
        Ok(Command::Instance(InstanceSyntax { name, generated_name, priority, binders, head, body }))
    }

    fn instance_body(&mut self) -> PResult<InstanceBody> {
        if self.at_keyword("opaque") {
            self.bump();
            return Ok(InstanceBody::Opaque);
        }
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut assigns = Vec::new();
        while self.at_ident() {
            let field = self.ident("a field name")?;
            self.expect(TokenKind::Assign, "`:=`")?;
            let value = self.term()?;
            assigns.push((field, value));
            if self.at(&TokenKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(InstanceBody::Assigns(assigns))
    }

    fn def(&mut self) -> PResult<Command> {
        self.bump();
        let name = self.ident("a definition name")?;
        let binders = self.binders()?;
        let ty = if self.at(&TokenKind::Colon) {
            self.bump();
            Some(self.term()?)
        } else {
            None
        };
        self.expect(TokenKind::Assign, "`:=`")?;
        let body = if self.at_keyword("opaque") {
            self.bump();
            None
        } else {
            Some(self.term()?)
        };
        Ok(Command::Def(DefSyntax { name, binders, ty, body }))
    }

    fn section(&mut self) -> PResult<Command> {
        self.bump();
        let binders = self.binders()?;
        let mut items = Vec::new();
        let mut anon = 0;
        loop {
            match self.peek_kind() {
                TokenKind::Synth => {
                    self.bump();
                    items.push(SectionItem::Synth(self.goal()?));
                }
                TokenKind::Ident(k) if k == "letI" => {
                    self.bump();
                    let written = if self.at_ident() { Some(self.ident("a name")?) } else { None };
                    self.expect(TokenKind::Colon, "`:`")?;
                    let ty = self.term()?;
                    let value = if self.at(&TokenKind::Assign) {
                        self.bump();
                        Some(self.term()?)
                    } else {
                        None
                    };
                    let (name, generated_name) = match written {
                        Some(n) => (n, false),
                        None => {
                            anon += 1;
                            (format!("_letI{anon}"), true)
                        }
                    };
                    items.push(SectionItem::LetI { name, generated_name, ty, value });
                }
                TokenKind::Ident(k) if k == "end" => {
                    self.bump();
                    return Ok(Command::Section(SectionSyntax { binders, items }));
                }
                // A missing `end` shows up at the next command; anything
                // else is itself the bad item.
                TokenKind::Eof | TokenKind::AttrOpen => return Err(self.error(&["`end`"])),
                TokenKind::Ident(k) if COMMAND_KEYWORDS.contains(&k.as_str()) => return Err(self.error(&["`end`"])),
                _ => return Err(self.error_here(&["`letI`", "`#synth`", "`end`"])),
            }
        }
    }
}

const COMMAND_KEYWORDS: [&str; 7] = ["set_option", "class", "structure", "instance", "def", "attribute", "section"];

const COMMAND_STARTS: [&str; 9] = [
    "`set_option`",
    "`class`",
    "`structure`",
    "`instance`",
    "`@[`",
    "`def`",
    "`attribute`",
    "`section`",
    "`#synth`",
];

/// Parse a whole `.tc` source text.
pub fn parse_file(text: &str) -> Result<SourceFile, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, scope: Vec::new(), holes: None, anon_counter: HashMap::new() };
    let mut file = SourceFile::default();
    while !p.at(&TokenKind::Eof) {
        let line = p.peek().start.line;
        let cmd = p.command()?;
        file.commands.push(cmd);
        file.lines.push(line);
    }
    Ok(file)
}

/// Parse a single goal term; `_` holes become metavariables numbered from 0.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, scope: Vec::new(), holes: None, anon_counter: HashMap::new() };
    let t = p.goal()?;
    if !p.at(&TokenKind::Eof) {
        return Err(p.error_here(&["end of input"]));
    }
    Ok(t)
}
