use std::fmt::{self, Write};

use crate::term::{Term, ADD, MUL};

use super::{Binder, BinderStyle, ClassSyntax, Command, FieldKind, InstanceBody, SectionItem, SourceFile};

/// Source-form term: like `Display` but metavariables print as `_`.
struct Src<'a>(&'a Term);

impl fmt::Display for Src<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Meta(_) => f.write_str("_"),
            Term::Const(name, args) if args.is_empty() => f.write_str(name),
            Term::Const(name, args)
                if (name == ADD || name == MUL) && args.len() == 2 && args.iter().all(Term::is_atomic) =>
            {
                let op = if name == ADD { "+" } else { "*" };
                write!(f, "{} {op} {}", Src(&args[0]), Src(&args[1]))
            }
            Term::Const(name, args) => {
                f.write_str(name)?;
                for arg in args {
                    let infix = matches!(arg, Term::Const(n, a) if (n == ADD || n == MUL) && a.len() == 2);
                    if arg.is_atomic() && !infix {
                        write!(f, " {}", Src(arg))?;
                    } else {
                        write!(f, " ({})", Src(arg))?;
                    }
                }
                Ok(())
            }
            other => write!(f, "{other}"),
        }
    }
}

/// Render a term as it would be written in a `.tc` file.
pub fn render_term(t: &Term) -> String {
    Src(t).to_string()
}

fn binder(out: &mut String, b: &Binder) {
    let ty = Src(&b.ty);
    let name = b.name.as_deref().unwrap_or("_");
    match b.style {
        BinderStyle::Explicit if b.out_param => write!(out, " ({name} : out_param {ty})"),
        BinderStyle::Explicit => write!(out, " ({name} : {ty})"),
        BinderStyle::Implicit => write!(out, " {{{name} : {ty}}}"),
        BinderStyle::Instance => match &b.name {
            Some(n) => write!(out, " [{n} : {ty}]"),
            None => write!(out, " [{ty}]"),
        },
    }
    .expect("write to string");
}

fn class_like(out: &mut String, kw: &str, c: &ClassSyntax) {
    write!(out, "{kw} {}", c.name).unwrap();
    for b in &c.binders {
        binder(out, b);
    }
    if !c.extends.is_empty() {
        let parents: Vec<String> = c.extends.iter().map(|t| Src(t).to_string()).collect();
        write!(out, " extends {}", parents.join(", ")).unwrap();
    }
    if !c.fields.is_empty() {
        out.push_str(" :=");
        for field in &c.fields {
            let tag = match field.kind {
                FieldKind::Data => "data",
                FieldKind::Proof => "proof",
            };
            write!(out, " ({} : {}, {tag})", field.name, Src(&field.ty)).unwrap();
        }
    }
}

/// Render one command back to source text.
pub fn render_decl(cmd: &Command) -> String {
    let mut out = String::new();
    match cmd {
        Command::SetOption { name, value } => write!(out, "set_option {name} {value}").unwrap(),
        Command::Class(c) => class_like(&mut out, "class", c),
        Command::Structure(c) => class_like(&mut out, "structure", c),
        Command::Instance(i) => {
            if let Some(p) = i.priority {
                write!(out, "@[priority {p}] ").unwrap();
            }
            out.push_str("instance");
            if !i.generated_name {
                write!(out, " {}", i.name).unwrap();
            }
            for b in &i.binders {
                binder(&mut out, b);
            }
            write!(out, " : {} := ", Src(&i.head)).unwrap();
            match &i.body {
                InstanceBody::Opaque => out.push_str("opaque"),
                InstanceBody::Assigns(assigns) => {
                    let parts: Vec<String> =
                        assigns.iter().map(|(f, t)| format!("{f} := {}", Src(t))).collect();
                    if parts.is_empty() {
                        out.push_str("{ }");
                    } else {
                        write!(out, "{{ {} }}", parts.join(", ")).unwrap();
                    }
                }
            }
        }
        Command::Def(d) => {
            write!(out, "def {}", d.name).unwrap();
            for b in &d.binders {
                binder(&mut out, b);
            }
            if let Some(ty) = &d.ty {
                write!(out, " : {}", Src(ty)).unwrap();
            }
            match &d.body {
                Some(body) => write!(out, " := {}", Src(body)).unwrap(),
                None => out.push_str(" := opaque"),
            }
        }
        Command::Attribute { attr, name } => write!(out, "attribute [{attr}] {name}").unwrap(),
        Command::Synth(goal) => write!(out, "#synth {}", Src(goal)).unwrap(),
        Command::Section(s) => {
            out.push_str("section");
            for b in &s.binders {
                binder(&mut out, b);
            }
            for item in &s.items {
                match item {
                    SectionItem::LetI { name, generated_name, ty, value } => {
                        out.push_str("\n  letI");
                        if !generated_name {
                            write!(out, " {name}").unwrap();
                        }
                        write!(out, " : {}", Src(ty)).unwrap();
                        if let Some(v) = value {
                            write!(out, " := {}", Src(v)).unwrap();
                        }
                    }
                    SectionItem::Synth(goal) => write!(out, "\n  #synth {}", Src(goal)).unwrap(),
                }
            }
            out.push_str("\nend");
        }
    }
    out
}

pub fn render_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for cmd in &file.commands {
        out.push_str(&render_decl(cmd));
        out.push('\n');
    }
    out
}
