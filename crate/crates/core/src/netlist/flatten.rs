use std::collections::HashMap;

use thiserror::Error;

use super::{
    AnalysisDirective, Device, DeviceKind, ElementKind, ElementLine, FlatCircuit, ModelDefaults,
    Netlist, SourceValue, GROUND,
};
use crate::devices::{MosParams, Polarity, Waveform};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlattenError {
    #[error("recursive subcircuit instantiation: {}", .0.join(" -> "))]
    Recursion(Vec<String>),
    #[error(
        "instance `{instance}` of `{subckt}` has {found} nodes, subcircuit has {expected} ports"
    )]
    Arity {
        instance: String,
        subckt: String,
        expected: usize,
        found: usize,
    },
    #[error("instance `{instance}` references undefined subcircuit `{subckt}`")]
    UndefinedSubckt { instance: String, subckt: String },
    #[error("element `{name}` has {found} nodes, expected {expected}")]
    ElementArity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid source `{name}`: {reason}")]
    Source { name: String, reason: String },
    #[error("capacitor `{0}`: ic= requires one grounded terminal")]
    FloatingIc(String),
}

struct Flattener<'a> {
    netlist: &'a Netlist,
    defaults: ModelDefaults,
    node_ids: HashMap<String, usize>,
    node_names: Vec<String>,
    devices: Vec<Device>,
    initial: Vec<(usize, f64)>,
    stack: Vec<String>,
}

/// Expands subcircuit instances and assigns node indices.
///
/// Ground is node 0; other nodes are numbered in order of first appearance.
/// Internal nodes and device names of an instance are prefixed with
/// `<instance>.`; ports map to the caller's nodes and `.global` nodes are shared.
pub fn flatten_hierarchy(netlist: &Netlist) -> Result<FlatCircuit, FlattenError> {
    let mut f = Flattener {
        netlist,
        defaults: ModelDefaults::from_params(&netlist.params),
        node_ids: HashMap::from([(GROUND.to_string(), 0)]),
        node_names: vec![GROUND.to_string()],
        devices: Vec::new(),
        initial: Vec::new(),
        stack: Vec::new(),
    };
    let identity = HashMap::new();
    f.expand(&netlist.elements, "", &identity)?;
    let tran = netlist
        .analyses
        .iter()
        .map(|a| match *a {
            AnalysisDirective::Tran { step, stop } => (step, stop),
        })
        .next();
    Ok(FlatCircuit {
        node_names: f.node_names,
        devices: f.devices,
        initial: f.initial,
        tran,
    })
}

impl Flattener<'_> {
    fn node(&mut self, local: &str, prefix: &str, ports: &HashMap<String, String>) -> usize {
        let global = if local == GROUND || self.netlist.globals.iter().any(|g| g == local) {
            local.to_string()
        } else if let Some(outer) = ports.get(local) {
            outer.clone()
        } else {
            format!("{prefix}{local}")
        };
        if let Some(&id) = self.node_ids.get(&global) {
            return id;
        }
        let id = self.node_names.len();
        self.node_ids.insert(global.clone(), id);
        self.node_names.push(global);
        id
    }

    /// `ports` maps the scope's port names to already-resolved outer node names.
    fn expand(
        &mut self,
        elements: &[ElementLine],
        prefix: &str,
        ports: &HashMap<String, String>,
    ) -> Result<(), FlattenError> {
        for e in elements {
            let name = format!("{prefix}{}", e.name);
            if let Some(expected) = e.expected_arity() {
                if e.nodes.len() != expected {
                    return Err(FlattenError::ElementArity {
                        name,
                        expected,
                        found: e.nodes.len(),
                    });
                }
            }
            let kind = match &e.kind {
                ElementKind::Instance { subckt } => {
                    self.instantiate(e, subckt, &name, prefix, ports)?;
                    continue;
                }
                ElementKind::Resistor { ohms } => DeviceKind::Resistor {
                    a: self.node(&e.nodes[0], prefix, ports),
                    b: self.node(&e.nodes[1], prefix, ports),
                    ohms: *ohms,
                },
                ElementKind::Capacitor { farads, ic } => {
                    let a = self.node(&e.nodes[0], prefix, ports);
                    let b = self.node(&e.nodes[1], prefix, ports);
                    if let Some(v) = ic {
                        match (a, b) {
                            (_, 0) => self.initial.push((a, *v)),
                            (0, _) => self.initial.push((b, -*v)),
                            _ => return Err(FlattenError::FloatingIc(name)),
                        }
                    }
                    DeviceKind::Capacitor {
                        a,
                        b,
                        farads: *farads,
                    }
                }
                ElementKind::Mosfet {
                    polarity,
                    w,
                    l,
                    overrides,
                } => {
                    let card = match polarity {
                        Polarity::Nmos => &self.defaults.nmos,
                        Polarity::Pmos => &self.defaults.pmos,
                    };
                    let params = MosParams {
                        w: *w,
                        l: *l,
                        vth0: overrides.vth0.unwrap_or(card.vth0),
                        kprime: overrides.kprime.unwrap_or(card.kprime),
                        lambda: overrides.lambda.unwrap_or(card.lambda),
                        cox_overlap: overrides.cox_overlap.unwrap_or(card.cox_overlap),
                        ..card.clone()
                    };
                    DeviceKind::Mosfet {
                        d: self.node(&e.nodes[0], prefix, ports),
                        g: self.node(&e.nodes[1], prefix, ports),
                        s: self.node(&e.nodes[2], prefix, ports),
                        b: self.node(&e.nodes[3], prefix, ports),
                        params,
                    }
                }
                ElementKind::Mtj { state, area, tox } => {
                    let mut params = self.defaults.mtj.clone();
                    if let Some(a) = area {
                        params.area = *a;
                    }
                    DeviceKind::Mtj {
                        a: self.node(&e.nodes[0], prefix, ports),
                        b: self.node(&e.nodes[1], prefix, ports),
                        tox: tox.unwrap_or(params.tox0),
                        params,
                        state: *state,
                    }
                }
                ElementKind::Vsource(value) => {
                    let wave = match value {
                        SourceValue::Dc(v) => Waveform::dc(*v),
                        SourceValue::Pwl(points) => {
                            Waveform::new(points.clone()).map_err(|err| FlattenError::Source {
                                name: name.clone(),
                                reason: err.to_string(),
                            })?
                        }
                    };
                    DeviceKind::Vsource {
                        p: self.node(&e.nodes[0], prefix, ports),
                        n: self.node(&e.nodes[1], prefix, ports),
                        wave,
                    }
                }
            };
            self.devices.push(Device { name, kind });
        }
        Ok(())
    }

    fn instantiate(
        &mut self,
        e: &ElementLine,
        subckt: &str,
        name: &str,
        prefix: &str,
        ports: &HashMap<String, String>,
    ) -> Result<(), FlattenError> {
        let def =
            self.netlist
                .subcircuits
                .get(subckt)
                .ok_or_else(|| FlattenError::UndefinedSubckt {
                    instance: name.to_string(),
                    subckt: subckt.to_string(),
                })?;
        if self.stack.iter().any(|s| s == subckt) {
            let mut chain = self.stack.clone();
            chain.push(subckt.to_string());
            return Err(FlattenError::Recursion(chain));
        }
        if def.ports.len() != e.nodes.len() {
            return Err(FlattenError::Arity {
                instance: name.to_string(),
                subckt: subckt.to_string(),
                expected: def.ports.len(),
                found: e.nodes.len(),
            });
        }
        let mut inner_ports = HashMap::new();
        for (port, outer) in def.ports.iter().zip(&e.nodes) {
            // resolve the outer name now so that nested scopes see global names
            let id = self.node(outer, prefix, ports);
            inner_ports.insert(port.clone(), self.node_names[id].clone());
        }
        let inner_prefix = format!("{}.", name.to_ascii_lowercase());
        self.stack.push(subckt.to_string());
        self.expand(&def.elements, &inner_prefix, &inner_ports)?;
        self.stack.pop();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn flat(text: &str) -> FlatCircuit {
        flatten_hierarchy(&parse_netlist(text).unwrap()).unwrap()
    }

    #[test]
    fn identity_flatten() {
        let c = flat("V1 a 0 DC 1\nR1 a b 1k\nR2 b 0 1k\n");
        assert_eq!(c.node_count(), 3);
        assert_eq!(c.node_names, vec!["0", "a", "b"]);
        assert_eq!(c.devices.len(), 3);
    }

    #[test]
    fn two_instances_get_distinct_nodes() {
        let c = flat(
            "\
.subckt cell bl sl
Rj bl mid 742
Ra mid sl 100
.ends
X1 b1 0 cell
X2 b2 0 cell
",
        );
        assert_eq!(c.devices.len(), 4);
        assert_eq!(c.devices[0].name, "x1.Rj");
        assert_eq!(c.devices[2].name, "x2.Rj");
        let mid1 = c.node_index("x1.mid").unwrap();
        let mid2 = c.node_index("x2.mid").unwrap();
        assert_ne!(mid1, mid2);
        match (&c.devices[0].kind, &c.devices[2].kind) {
            (DeviceKind::Resistor { a: a1, .. }, DeviceKind::Resistor { a: a2, .. }) => {
                assert_eq!(*a1, c.node_index("b1").unwrap());
                assert_eq!(*a2, c.node_index("b2").unwrap());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn recursion_detected() {
        let n = parse_netlist(".subckt loop a\nX1 a loop\n.ends\nX0 n loop\n").unwrap();
        assert!(matches!(
            flatten_hierarchy(&n),
            Err(FlattenError::Recursion(_))
        ));
    }

    #[test]
    fn arity_mismatch() {
        let n = parse_netlist(".subckt cell a b\nR1 a b 1\n.ends\nX1 n cell\n").unwrap();
        assert!(matches!(
            flatten_hierarchy(&n),
            Err(FlattenError::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn undefined_subckt() {
        let n = parse_netlist("X1 a b nothing\n").unwrap();
        assert!(matches!(
            flatten_hierarchy(&n),
            Err(FlattenError::UndefinedSubckt { .. })
        ));
    }

    #[test]
    fn globals_are_shared() {
        let c = flat(
            "\
.global vdd
.subckt load out
R1 vdd out 1k
.ends
V1 vdd 0 DC 1
X1 o1 load
X2 o2 load
",
        );
        assert_eq!(c.node_names, vec!["0", "vdd", "o1", "o2"]);
    }

    #[test]
    fn nested_instances() {
        let c = flat(
            "\
.subckt inner p
R1 p q 1
R2 q 0 1
.ends
.subckt outer p
X1 p inner
.ends
X9 top outer
",
        );
        assert!(c.node_index("x9.x1.q").is_some());
        assert_eq!(c.devices[0].name, "x9.x1.R1");
    }

    #[test]
    fn params_override_defaults() {
        let c = flat(".param vth0_n=0.3 mtj_tmr=2\nM1 d g 0 0 nmos W=1u L=1u\nJ1 d 0 state=AP\n");
        match &c.devices[0].kind {
            DeviceKind::Mosfet { params, .. } => assert_eq!(params.vth0, 0.3),
            _ => unreachable!(),
        }
        match &c.devices[1].kind {
            DeviceKind::Mtj { params, tox, .. } => {
                assert_eq!(params.tmr, 2.0);
                assert_eq!(*tox, params.tox0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn capacitor_ic_feeds_initial() {
        let c = flat("C1 a 0 50f ic=1\nR1 a 0 1k\n");
        assert_eq!(c.initial, vec![(1, 1.0)]);
        let n = parse_netlist("C1 a b 50f ic=1\n").unwrap();
        assert!(matches!(
            flatten_hierarchy(&n),
            Err(FlattenError::FloatingIc(_))
        ));
    }
}
