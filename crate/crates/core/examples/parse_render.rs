//! Parse a declaration file and print it back in canonical form.

use tcsynth::syntax::{parse_file, render_file};

const SOURCE: &str = "
class has_scalar (α β : Type) := (smul : smul_fn α β, data)
instance : has_scalar nat int := { smul := int.nsmul }
section (R M : Type) [module R M]
  #synth has_scalar R M
end
";

fn main() {
    let file = parse_file(SOURCE).expect("parses");
    print!("{}", render_file(&file));
    match parse_file("class has_mul (M : Type)\ninstance : has_mul nat := { mul := }") {
        Ok(_) => unreachable!(),
        Err(e) => println!("error at {e}"),
    }
}
