use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{DeviceKind, FlatCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    NodeOutOfRange,
    FloatingNode,
    DuplicateName,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Offending device or node name.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks node ranges, duplicate device names and DC connectivity.
/// An empty result means the circuit is well formed.
pub fn validate_circuit(circuit: &FlatCircuit) -> Vec<Diagnostic> {
    let n = circuit.node_count();
    let mut out = Vec::new();

    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, dev) in circuit.devices.iter().enumerate() {
        let key = dev.name.to_ascii_lowercase();
        if let Some(&first) = seen.get(&key) {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                subject: dev.name.clone(),
                message: format!("duplicate name `{}` (devices #{first} and #{i})", dev.name),
            });
        } else {
            seen.insert(key, i);
        }
        for t in dev.kind.terminals() {
            if t >= n {
                out.push(Diagnostic {
                    kind: DiagnosticKind::NodeOutOfRange,
                    subject: dev.name.clone(),
                    message: format!("device `{}` refers to node {t}, only {n} nodes", dev.name),
                });
            }
        }
    }
    if out.iter().any(|d| d.kind == DiagnosticKind::NodeOutOfRange) {
        return out;
    }

    for node in dc_isolated_nodes(circuit) {
        let name = &circuit.node_names[node];
        out.push(Diagnostic {
            kind: DiagnosticKind::FloatingNode,
            subject: name.clone(),
            message: format!("floating node `{name}`: no DC path to ground"),
        });
    }
    out
}

/// Nodes without a conductive path to ground. Resistors, junctions, sources and
/// MOSFET channels conduct; capacitors and gates do not.
pub fn dc_isolated_nodes(circuit: &FlatCircuit) -> Vec<usize> {
    let n = circuit.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        if a < n && b < n {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    };
    for dev in &circuit.devices {
        match dev.kind {
            DeviceKind::Resistor { a, b, .. } | DeviceKind::Mtj { a, b, .. } => union(a, b),
            DeviceKind::Vsource { p, n, .. } => union(p, n),
            DeviceKind::Mosfet { d, s, .. } => union(d, s),
            DeviceKind::Capacitor { .. } => {}
        }
    }
    let ground = find(&mut parent, 0);
    (1..n).filter(|&i| find(&mut parent, i) != ground).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{flatten_hierarchy, parse_netlist};

    fn check(text: &str) -> Vec<Diagnostic> {
        validate_circuit(&flatten_hierarchy(&parse_netlist(text).unwrap()).unwrap())
    }

    #[test]
    fn divider_is_clean() {
        assert!(check("V1 in 0 DC 1\nR1 in mid 1k\nR2 mid 0 1k\n").is_empty());
    }

    #[test]
    fn capacitor_only_node_is_floating() {
        let d = check("V1 in 0 DC 1\nR1 in 0 1k\nC1 x 0 1f\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::FloatingNode);
        assert_eq!(d[0].subject, "x");
        assert!(d[0].message.contains("floating node"));
    }

    #[test]
    fn gate_only_node_is_floating() {
        let d = check("V1 d 0 DC 1\nM1 d g 0 0 nmos W=1u L=1u\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].subject, "g");
    }

    #[test]
    fn duplicate_top_level_names() {
        let d = check("V1 d 0 DC 1\nM1 d d 0 0 nmos W=1u L=1u\nM1 d d 0 0 nmos W=1u L=1u\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::DuplicateName);
        assert_eq!(d[0].subject, "M1");
    }

    #[test]
    fn out_of_range_node() {
        let mut c = flatten_hierarchy(&parse_netlist("R1 a 0 1k\n").unwrap()).unwrap();
        if let DeviceKind::Resistor { b, .. } = &mut c.devices[0].kind {
            *b = 7;
        }
        let d = validate_circuit(&c);
        assert_eq!(d[0].kind, DiagnosticKind::NodeOutOfRange);
        assert_eq!(d[0].subject, "R1");
    }
}
