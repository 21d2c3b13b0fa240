use std::fmt::Write;

use ctp_core::{Cost, CtpInstance, Rational};

/// Short fractions stay exact; anything longer is shown as a decimal.
fn number(r: &Rational) -> String {
    if r.denom().to_string().len() <= 4 && r.numer().to_string().len() <= 6 {
        r.to_compact()
    } else {
        r.to_decimal(6)
    }
}

fn cost(c: &Cost) -> String {
    match c {
        Cost::Finite(r) => number(r),
        Cost::Infinite => "inf".to_string(),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Edge labels are `cost|p`; uncertain edges are dashed, s is a box and t
/// a double circle.
pub fn render(inst: &CtpInstance) -> String {
    let directed = inst.edges().iter().any(|e| e.directed);
    let mut out = String::new();
    let _ = writeln!(out, "{} ctp {{", if directed { "digraph" } else { "graph" });
    let _ = writeln!(out, "  rankdir=LR;");
    for (i, name) in inst.vertices().iter().enumerate() {
        let shape = if i == inst.source().0 {
            "box"
        } else if i == inst.target().0 {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  {} [shape={shape}];", quote(name));
    }
    let arrow = if directed { "->" } else { "--" };
    for e in inst.edges() {
        let mut attrs = vec![format!(
            "label={}",
            quote(&format!("{}|{}", cost(&e.cost), number(&e.blocking_prior)))
        )];
        if e.forced_status().is_none() {
            attrs.push("style=dashed".into());
        }
        if directed && !e.directed {
            attrs.push("dir=none".into());
        }
        let _ = writeln!(
            out,
            "  {} {arrow} {} [{}];",
            quote(inst.vertex_name(e.tail)),
            quote(inst.vertex_name(e.head)),
            attrs.join(", ")
        );
    }
    out.push_str("}\n");
    out
}
