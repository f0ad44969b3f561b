//! First-order unification up to arithmetic on literals.

use tcsynth::syntax::parse_term;
use tcsynth::term::{normalize, unify, Substitution};

fn main() {
    let pairs = [
        ("char_p (zmod _) _", "char_p (zmod 4) (2 + 2)"),
        ("prod _ _", "prod nat (prod int nat)"),
        ("zmod (3 * 5)", "zmod 15"),
        ("set _", "list nat"),
    ];
    for (l, r) in pairs {
        let (l, r) = (parse_term(l).unwrap(), parse_term(r).unwrap());
        match unify(&l, &r, &(), &Substitution::new()) {
            Some(s) => println!("{l}  =?=  {r}\n  ⇒ {}", normalize(&s.apply(&l), &())),
            None => println!("{l}  =?=  {r}\n  ⇒ no unifier"),
        }
    }
}
