use std::fmt::Write;

use super::{Diagram, Site};

fn node(s: Site) -> String {
    match s {
        Site::Dom(i) => format!("d{i}"),
        Site::Cod(j) => format!("c{j}"),
        Site::In(b, _) | Site::Out(b, _) => format!("b{b}"),
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz source, left to right: domain, boxes, codomain.
pub(super) fn render(d: &Diagram) -> String {
    let mut out = String::from("digraph diagram {\n  rankdir=LR;\n");
    if !d.dom().is_empty() {
        out.push_str("  { rank=source;\n");
        for (i, l) in d.dom().iter().enumerate() {
            let _ = writeln!(out, "    d{i} [shape=plaintext, label=\"{}\"];", escape(&l.to_string()));
        }
        out.push_str("  }\n");
    }
    for (b, bx) in d.boxes().iter().enumerate() {
        let _ = writeln!(out, "  b{b} [shape=box, label=\"{}\"];", escape(bx.transition.as_str()));
    }
    if !d.cod().is_empty() {
        out.push_str("  { rank=sink;\n");
        for (j, l) in d.cod().iter().enumerate() {
            let _ = writeln!(out, "    c{j} [shape=plaintext, label=\"{}\"];", escape(&l.to_string()));
        }
        out.push_str("  }\n");
    }
    for w in d.wires() {
        let place = d.endpoint(w.from).expect("valid wire").place;
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            node(w.from),
            node(w.to),
            escape(place.as_str())
        );
    }
    out.push_str("}\n");
    out
}
