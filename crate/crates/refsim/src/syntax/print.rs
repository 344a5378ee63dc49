use std::fmt;

use super::formula::Formula;

/// Binding strength, loose to tight. `->`/`<->` are parse-time sugar and
/// never printed.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        _ => 3,
    }
}

fn write_at(f: &Formula, min_level: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = level(f) < min_level;
    if paren {
        out.write_str("(")?;
    }
    match f {
        Formula::True => out.write_str("true")?,
        Formula::False => out.write_str("false")?,
        Formula::Atom(p) => write!(out, "{p}")?,
        Formula::Not(g) => {
            out.write_str("~")?;
            write_at(g, 3, out)?;
        }
        Formula::And(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.write_str(" & ")?;
                }
                write_at(x, 3, out)?;
            }
        }
        Formula::Or(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.write_str(" | ")?;
                }
                write_at(x, 2, out)?;
            }
        }
        Formula::Box(a, g) => {
            write!(out, "[{a}]")?;
            write_at(g, 3, out)?;
        }
        Formula::Dia(a, g) => {
            write!(out, "<{a}>")?;
            write_at(g, 3, out)?;
        }
        Formula::RefBox(g) => {
            out.write_str("[ref]")?;
            write_at(g, 3, out)?;
        }
        Formula::RefDia(g) => {
            out.write_str("<ref>")?;
            write_at(g, 3, out)?;
        }
        Formula::SimBox(g) => {
            out.write_str("[sim]")?;
            write_at(g, 3, out)?;
        }
        Formula::SimDia(g) => {
            out.write_str("<sim>")?;
            write_at(g, 3, out)?;
        }
        Formula::Origin(g) => {
            out.write_str("[orig]")?;
            write_at(g, 3, out)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, out)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::parse;

    #[test]
    fn printing_uses_minimal_parens() {
        for (input, printed) in [
            ("p & [a]q", "p & [a]q"),
            ("<ref>(p | q)", "<ref>(p | q)"),
            ("~[orig]<a>p", "~[orig]<a>p"),
            ("(p & q) | r", "r | p & q"),
            ("p & (q | r)", "p & (q | r)"),
            ("~(p & q)", "~(p & q)"),
            ("[a](p -> q)", "[a](q | ~p)"),
        ] {
            assert_eq!(parse(input).unwrap().to_string(), printed);
        }
    }
}
