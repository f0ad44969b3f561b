use std::fmt;

use num_bigint::BigUint;

use super::parser::ParseError;

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Nat(BigUint),
    /// `#synth`
    Synth,
    /// `@[`
    AttrOpen,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Assign,
    Comma,
    Plus,
    Star,
    Hole,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Nat(n) => write!(f, "`{n}`"),
            TokenKind::Synth => f.write_str("`#synth`"),
            TokenKind::AttrOpen => f.write_str("`@[`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Assign => f.write_str("`:=`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Plus => f.write_str("`+`"),
            TokenKind::Star => f.write_str("`*`"),
            TokenKind::Hole => f.write_str("`_`"),
            TokenKind::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Pos,
    /// Position just past the last character.
    pub end: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '!' | '?')
}

fn alias(ident: &str) -> String {
    match ident {
        "ℕ" => "nat".into(),
        "ℤ" => "int".into(),
        _ => ident.into(),
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            let c = chars[i];
            i += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'-') {
            let open = Pos { line, col };
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::new(open, "`/-`", vec!["`-/`".into()]));
                }
                if chars[i] == '-' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }

        let start = Pos { line, col };
        let kind = if c.is_ascii_digit() {
            let mut digits = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                digits.push(chars[i]);
                bump!();
            }
            TokenKind::Nat(digits.parse().expect("ascii digits"))
        } else if c == '_' && !chars.get(i + 1).is_some_and(|&n| is_ident_continue(n)) {
            bump!();
            TokenKind::Hole
        } else if is_ident_start(c) {
            let mut ident = String::new();
            while i < chars.len() && is_ident_continue(chars[i]) {
                ident.push(chars[i]);
                bump!();
            }
            TokenKind::Ident(alias(&ident))
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let (kind, width) = match (c, two.as_str()) {
                (_, ":=") => (TokenKind::Assign, 2),
                (_, "@[") => (TokenKind::AttrOpen, 2),
                ('#', _) => {
                    let word: String = chars[i + 1..]
                        .iter()
                        .take_while(|c| is_ident_continue(**c))
                        .collect();
                    if word == "synth" {
                        (TokenKind::Synth, 6)
                    } else {
                        return Err(ParseError::new(start, &format!("`#{word}`"), vec!["`#synth`".into()]));
                    }
                }
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                ('[', _) => (TokenKind::LBracket, 1),
                (']', _) => (TokenKind::RBracket, 1),
                (':', _) => (TokenKind::Colon, 1),
                (',', _) => (TokenKind::Comma, 1),
                ('+', _) => (TokenKind::Plus, 1),
                ('*', _) => (TokenKind::Star, 1),
                _ => {
                    return Err(ParseError::new(start, &format!("`{c}`"), vec!["a token".into()]));
                }
            };
            for _ in 0..width {
                bump!();
            }
            kind
        };
        tokens.push(Token { kind, start, end: Pos { line, col } });
    }
    let eof = Pos { line, col };
    tokens.push(Token { kind: TokenKind::Eof, start: eof, end: eof });
    Ok(tokens)
}
