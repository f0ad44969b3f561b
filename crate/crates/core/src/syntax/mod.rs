//! The `.tc` declaration language: a small Lean-flavoured surface syntax for
//! classes, structures, instances, definitions and synthesis queries.

mod lexer;
mod parser;
mod render;

pub use lexer::{tokenize, Pos, Token, TokenKind};
pub use parser::{parse_file, parse_term, ParseError};
pub use render::{render_decl, render_file, render_term};

use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinderStyle {
    Explicit,
    Implicit,
    Instance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    /// Instance binders may be anonymous; the others are always named.
    pub name: Option<String>,
    pub ty: Term,
    pub style: BinderStyle,
    /// Type was written `out_param T`.
    pub out_param: bool,
}

impl Binder {
    pub fn explicit(name: &str, ty: Term) -> Self {
        Binder { name: Some(name.into()), ty, style: BinderStyle::Explicit, out_param: false }
    }

    pub fn implicit(name: &str, ty: Term) -> Self {
        Binder { name: Some(name.into()), ty, style: BinderStyle::Implicit, out_param: false }
    }

    pub fn instance(name: Option<&str>, ty: Term) -> Self {
        Binder { name: name.map(Into::into), ty, style: BinderStyle::Instance, out_param: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Data,
    Proof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSyntax {
    pub name: String,
    pub ty: Term,
    pub kind: FieldKind,
}

/// Shared shape of `class` and `structure` declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSyntax {
    pub name: String,
    pub binders: Vec<Binder>,
    pub extends: Vec<Term>,
    pub fields: Vec<FieldSyntax>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceBody {
    Opaque,
    Assigns(Vec<(String, Term)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceSyntax {
    pub name: String,
    /// The name was generated (`<class>.inst<N>`) rather than written.
    pub generated_name: bool,
    pub priority: Option<u32>,
    pub binders: Vec<Binder>,
    pub head: Term,
    pub body: InstanceBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefSyntax {
    pub name: String,
    pub binders: Vec<Binder>,
    pub ty: Option<Term>,
    /// `None` for `:= opaque`.
    pub body: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectionItem {
    LetI {
        name: String,
        generated_name: bool,
        ty: Term,
        value: Option<Term>,
    },
    Synth(Term),
}

/// A block of local hypotheses: its binders become rigid variables and local
/// instances, `letI` adds further local instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSyntax {
    pub binders: Vec<Binder>,
    pub items: Vec<SectionItem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    SetOption { name: String, value: bool },
    Class(ClassSyntax),
    Structure(ClassSyntax),
    Instance(InstanceSyntax),
    Def(DefSyntax),
    Attribute { attr: String, name: String },
    Synth(Term),
    Section(SectionSyntax),
}

/// Parsed file. Equality ignores the recorded source lines.
#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub commands: Vec<Command>,
    /// 1-based line of each command, parallel to `commands`.
    pub lines: Vec<usize>,
}

impl PartialEq for SourceFile {
    fn eq(&self, other: &Self) -> bool {
        self.commands == other.commands
    }
}

impl Eq for SourceFile {}

impl SourceFile {
    pub fn line_of(&self, index: usize) -> usize {
        self.lines.get(index).copied().unwrap_or(0)
    }
}
