use super::{normalize, normalize_act, ActExpr, Arg, Formula, Term};

// Binding strength of the printed form; higher binds tighter.
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

/// Canonical text: the printed form of the normalized formula.
pub fn render_formula(f: &Formula) -> String {
    print_formula(&normalize(f))
}

pub fn render_act(a: &ActExpr) -> String {
    print_act(&normalize_act(a))
}

/// Prints the formula as-is, adding only the parentheses needed to reparse it.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0, false);
    out
}

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, false);
    out
}

pub fn print_act(a: &ActExpr) -> String {
    let mut out = String::new();
    write_act(&mut out, a);
    out
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMPLIES,
        Formula::Or(v) if v.len() > 1 => OR,
        Formula::And(v) if v.len() > 1 => AND,
        Formula::Exists(..) | Formula::Forall(..) | Formula::Not(_) => UNARY,
        _ => 5,
    }
}

fn is_quant(f: &Formula) -> bool {
    matches!(f, Formula::Exists(..) | Formula::Forall(..))
}

/// `min` is the weakest binding the context accepts; `closed` asks for
/// quantifiers to be wrapped because text may follow them.
fn write_formula(out: &mut String, f: &Formula, min: u8, closed: bool) {
    let wrap = prec(f) < min || (closed && is_quant(f));
    if wrap {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(p, args) => {
            out.push_str(p);
            if !args.is_empty() {
                out.push('(');
                write_terms(out, args);
                out.push(')');
            }
        }
        Formula::Equals(l, r) => {
            write_term(out, l, true);
            out.push_str(" = ");
            write_term(out, r, false);
        }
        Formula::Not(g) => {
            out.push_str("not ");
            write_formula(out, g, UNARY, true);
        }
        Formula::And(v) | Formula::Or(v) if v.is_empty() => {
            out.push_str(if matches!(f, Formula::And(_)) {
                "true"
            } else {
                "false"
            });
        }
        Formula::And(v) | Formula::Or(v) if v.len() == 1 => {
            // Degenerate one-child connective: print the child, which reparses to it.
            write_formula(out, &v[0], min, closed);
        }
        Formula::And(v) | Formula::Or(v) => {
            let (kw, p) = if matches!(f, Formula::And(_)) {
                (" and ", AND + 1)
            } else {
                (" or ", OR + 1)
            };
            for (k, c) in v.iter().enumerate() {
                if k > 0 {
                    out.push_str(kw);
                }
                write_formula(out, c, p, true);
            }
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, OR, true);
            out.push_str(" => ");
            write_formula(out, b, IMPLIES, closed && !wrap);
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            out.push_str(if matches!(f, Formula::Exists(..)) {
                "exists ?"
            } else {
                "forall ?"
            });
            out.push_str(v);
            out.push_str(" . ");
            write_formula(out, b, 0, false);
        }
        Formula::Bel(a, g) | Formula::Int(a, g) => {
            out.push_str(if matches!(f, Formula::Bel(..)) {
                "Bel("
            } else {
                "Int("
            });
            out.push_str(a);
            out.push_str(", ");
            write_formula(out, g, 0, false);
            out.push(')');
        }
        Formula::MB(a, b, g) | Formula::CollInt(a, b, g) | Formula::CollAcc(a, b, g) => {
            out.push_str(match f {
                Formula::MB(..) => "MB(",
                Formula::CollInt(..) => "CollInt(",
                _ => "CollAcc(",
            });
            out.push_str(a);
            out.push_str(", ");
            out.push_str(b);
            out.push_str(", ");
            write_formula(out, g, 0, false);
            out.push(')');
        }
        Formula::Done(a, p) => {
            out.push_str("Done(");
            write_act(out, a);
            if **p != Formula::True {
                out.push_str(", ");
                write_formula(out, p, 0, false);
            }
            out.push(')');
        }
        Formula::Possible(g) => {
            out.push_str("Possible(");
            write_formula(out, g, 0, false);
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

fn write_terms(out: &mut String, ts: &[Term]) {
    for (k, t) in ts.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        write_term(out, t, false);
    }
}

/// `lhs` marks the left operand of `=`, where a description must be closed
/// off so its body does not swallow the `=`.
fn write_term(out: &mut String, t: &Term, lhs: bool) {
    match t {
        Term::Const(c) => out.push_str(c),
        Term::Var(v) => {
            out.push('?');
            out.push_str(v);
        }
        Term::App(n, args) => {
            out.push_str(n);
            out.push('(');
            write_terms(out, args);
            out.push(')');
        }
        Term::Descr(v, body) => {
            if lhs {
                out.push('(');
            }
            out.push_str("iota ?");
            out.push_str(v);
            out.push_str(" . ");
            write_formula(out, body, UNARY, true);
            if lhs {
                out.push(')');
            }
        }
    }
}

fn write_act(out: &mut String, a: &ActExpr) {
    match a {
        ActExpr::Atomic { act, actor, args } => {
            out.push_str(act);
            out.push('(');
            write_term(out, actor, false);
            for arg in args {
                out.push_str(", ");
                match arg {
                    Arg::Term(t) => write_term(out, t, false),
                    Arg::Formula(f) => write_formula(out, f, 0, false),
                }
            }
            out.push(')');
        }
        ActExpr::Choice(l, r) => {
            write_act(out, l);
            out.push_str(" | ");
            write_act_operand(out, r, matches!(**r, ActExpr::Choice(..)));
        }
        ActExpr::Seq(l, r) => {
            write_act_operand(out, l, matches!(**l, ActExpr::Choice(..)));
            out.push_str(" ; ");
            write_act_operand(out, r, !matches!(**r, ActExpr::Atomic { .. }));
        }
    }
}

fn write_act_operand(out: &mut String, a: &ActExpr, paren: bool) {
    if paren {
        out.push('(');
    }
    write_act(out, a);
    if paren {
        out.push(')');
    }
}
