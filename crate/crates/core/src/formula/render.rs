use super::Formula;

// Binding strength: implication 1, disjunction 2, conjunction 3, unary/atoms 4.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 1,
        Formula::Or(_) => 2,
        Formula::And(_) => 3,
        _ => 4,
    }
}

fn write(f: &Formula, min: u8, out: &mut String) {
    let paren = level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Var(p) => out.push_str(p),
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::Not(a) => {
            out.push('!');
            write(a, 4, out);
        }
        Formula::Box(x, a) => {
            out.push('[');
            out.push_str(x.name());
            out.push_str("] ");
            write(a, 4, out);
        }
        Formula::Diamond(x, a) => {
            out.push('<');
            out.push_str(x.name());
            out.push_str("> ");
            write(a, 4, out);
        }
        Formula::And(xs) | Formula::Or(xs) => {
            let (sep, child) = if matches!(f, Formula::And(_)) {
                (" & ", 4)
            } else {
                (" | ", 3)
            };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write(x, child, out);
            }
        }
        Formula::Implies(a, b) => {
            write(a, 2, out);
            out.push_str(" -> ");
            write(b, 1, out);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Render in the concrete syntax accepted by [`super::parse_formula`], with
/// the minimum parentheses needed to re-parse to the same tree.
pub fn render_formula(f: &Formula) -> String {
    let mut s = String::new();
    write(f, 0, &mut s);
    s
}
