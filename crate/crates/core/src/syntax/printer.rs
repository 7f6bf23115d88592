use std::fmt::{self, Write};

use super::Agent;

/// Whether the rightmost spine of `p` ends in a case, so that a following
/// `[]` would be absorbed by it.
fn ends_with_case(p: &Agent) -> bool {
    match p {
        Agent::Case(bs) => !bs.is_empty(),
        Agent::Output(_, _, q) | Agent::Input(_, _, q) => !q.is_nil() && ends_with_case(q),
        Agent::Res(_, q) | Agent::Rep(q) => ends_with_case(q),
        Agent::Par(..) | Agent::Assert(_) => false,
    }
}

fn par(p: &Agent, out: &mut String) {
    match p {
        Agent::Par(l, r) => {
            par(l, out);
            out.push_str(" | ");
            unary(r, out);
        }
        _ => unary(p, out),
    }
}

fn unary(p: &Agent, out: &mut String) {
    match p {
        Agent::Par(..) => {
            out.push('(');
            par(p, out);
            out.push(')');
        }
        Agent::Assert(a) if a.is_unit() => out.push('0'),
        Agent::Assert(a) => {
            let _ = write!(out, "(|{a}|)");
        }
        Agent::Output(m, n, q) => {
            let _ = write!(out, "{m}!{n}");
            cont(q, out);
        }
        Agent::Input(m, x, q) => {
            let _ = write!(out, "{m}({x})");
            cont(q, out);
        }
        Agent::Case(bs) if bs.is_empty() => out.push_str("case"),
        Agent::Case(bs) => {
            out.push_str("case ");
            for (i, (c, q)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" [] ");
                }
                let _ = write!(out, "{c} : ");
                if i + 1 < bs.len() && ends_with_case(q) {
                    out.push('(');
                    par(q, out);
                    out.push(')');
                } else {
                    unary(q, out);
                }
            }
        }
        Agent::Res(..) => {
            let mut names = Vec::new();
            let mut body = p;
            while let Agent::Res(a, q) = body {
                names.push(a.to_string());
                body = q;
            }
            let _ = write!(out, "(new {})", names.join(","));
            unary(body, out);
        }
        Agent::Rep(q) => {
            out.push('!');
            unary(q, out);
        }
    }
}

fn cont(q: &Agent, out: &mut String) {
    if !q.is_nil() {
        out.push('.');
        unary(q, out);
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        par(self, &mut s);
        f.write_str(&s)
    }
}
