//! Mixfix pretty printer; output re-parses to the same term.

use super::terms::{op_shape, OpShape, DEFAULT_PREC};
use crate::term::{Node, Term};

fn prec_of(t: &Term) -> u32 {
    match t.node() {
        Node::App(op, args) if !args.is_empty() => match op_shape(&op.name, op.arity()) {
            OpShape::Infix(_) | OpShape::Juxtaposition => op.attrs.prec.unwrap_or(DEFAULT_PREC),
            _ => 0,
        },
        _ => 0,
    }
}

fn wrap(t: &Term, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_term(t, out);
        out.push(')');
    } else {
        write_term(t, out);
    }
}

/// Appends the user-level rendering of `t` to `out`.
pub fn write_term(t: &Term, out: &mut String) {
    let (op, args) = match t.node() {
        Node::Var(v) => {
            out.push_str(&v.name);
            return;
        }
        Node::App(op, args) => (op, args),
    };
    if args.is_empty() {
        out.push_str(&op.name);
        return;
    }
    let p = op.attrs.prec.unwrap_or(DEFAULT_PREC);
    match op_shape(&op.name, op.arity()) {
        shape @ (OpShape::Infix(_) | OpShape::Juxtaposition) => {
            let sep = match &shape {
                OpShape::Infix(tok) => format!(" {tok} "),
                _ => " ".to_string(),
            };
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(&sep);
                }
                let ap = prec_of(a);
                let parens = if i == 0 && args.len() == 2 && !op.is_ac() { ap > p } else { ap >= p && ap > 0 };
                wrap(a, parens, out);
            }
        }
        OpShape::Bracket(parts) => {
            out.push_str(&parts[0]);
            for (i, a) in args.iter().enumerate() {
                out.push(' ');
                write_term(a, out);
                if parts[i + 1] == "," {
                    out.push(',');
                } else {
                    out.push(' ');
                    out.push_str(&parts[i + 1]);
                }
            }
        }
        OpShape::Prefix | OpShape::Other => {
            out.push_str(&op.name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(a, out);
            }
            out.push(')');
        }
    }
}

pub fn show(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, &mut s);
    s
}
