use thiserror::Error;

use super::units::parse_value;
use super::{
    normalize_node, AnalysisDirective, ElementKind, ElementLine, MosOverrides, Netlist,
    SourceValue, Subckt, MODEL_PARAMS,
};
use crate::devices::{MtjState, Polarity};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown device kind `{0}`")]
    UnknownDevice(char),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("non-positive {what}: {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("expected {expected} nodes, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("PWL times must be strictly increasing")]
    PwlOrder,
}

type LineResult<T> = std::result::Result<T, ParseErrorKind>;

/// Parses netlist text. Comment (`*`) and blank lines are skipped; a leading
/// comment becomes the title.
pub fn parse_netlist(text: &str) -> Result<Netlist, ParseError> {
    let mut netlist = Netlist::default();
    let mut open: Option<Subckt> = None;
    let mut seen_statement = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('*') {
            if !seen_statement && netlist.title.is_empty() {
                netlist.title = comment.trim().to_string();
            }
            continue;
        }
        seen_statement = true;
        let at = |kind| ParseError {
            line: line_no,
            kind,
        };

        if line.starts_with('.') {
            let tokens = tokenize(line);
            let directive = tokens[0].to_ascii_lowercase();
            match directive.as_str() {
                ".subckt" => {
                    if open.is_some() {
                        return Err(at(ParseErrorKind::Syntax("nested .subckt".into())));
                    }
                    let name = tokens
                        .get(1)
                        .ok_or_else(|| at(ParseErrorKind::Syntax(".subckt needs a name".into())))?;
                    open = Some(Subckt {
                        name: name.to_ascii_lowercase(),
                        ports: tokens[2..].iter().map(|p| normalize_node(p)).collect(),
                        elements: Vec::new(),
                    });
                }
                ".ends" => {
                    let sub = open.take().ok_or_else(|| {
                        at(ParseErrorKind::Syntax(".ends without .subckt".into()))
                    })?;
                    if netlist.subcircuits.contains_key(&sub.name) {
                        return Err(at(ParseErrorKind::Syntax(format!(
                            "subcircuit `{}` defined twice",
                            sub.name
                        ))));
                    }
                    netlist.subcircuits.insert(sub.name.clone(), sub);
                }
                ".param" => {
                    let pairs = key_values(&tokens[1..]).map_err(at)?;
                    if pairs.is_empty() {
                        return Err(at(ParseErrorKind::Syntax(".param needs name=value".into())));
                    }
                    for (key, value) in pairs {
                        if !MODEL_PARAMS.contains(&key.as_str()) {
                            return Err(at(ParseErrorKind::UnknownParameter(key)));
                        }
                        let v = number(&value).map_err(at)?;
                        netlist.params.insert(key, v);
                    }
                }
                ".tran" => {
                    if tokens.len() != 3 {
                        return Err(at(ParseErrorKind::Syntax(".tran <step> <stop>".into())));
                    }
                    let step = positive(&tokens[1], "time step").map_err(at)?;
                    let stop = positive(&tokens[2], "stop time").map_err(at)?;
                    netlist
                        .analyses
                        .push(AnalysisDirective::Tran { step, stop });
                }
                ".global" => netlist
                    .globals
                    .extend(tokens[1..].iter().map(|n| normalize_node(n))),
                ".end" => break,
                other => {
                    return Err(at(ParseErrorKind::Syntax(format!(
                        "unknown directive `{other}`"
                    ))))
                }
            }
            continue;
        }

        let element = parse_element(line).map_err(at)?;
        match open.as_mut() {
            Some(sub) => sub.elements.push(element),
            None => netlist.elements.push(element),
        }
    }

    if let Some(sub) = open {
        return Err(ParseError {
            line: text.lines().count(),
            kind: ParseErrorKind::Syntax(format!("unterminated .subckt `{}`", sub.name)),
        });
    }
    Ok(netlist)
}

/// Splits on whitespace, gluing `key = value` into `key=value` and keeping
/// parenthesized PWL lists as separate tokens.
fn tokenize(line: &str) -> Vec<String> {
    let spaced = line
        .replace('(', " ( ")
        .replace(')', " ) ")
        .replace(',', " ");
    let mut out: Vec<String> = Vec::new();
    let mut raw = spaced.split_whitespace().peekable();
    while let Some(tok) = raw.next() {
        if tok == "=" {
            if let (Some(prev), Some(next)) = (out.last_mut(), raw.next()) {
                prev.push('=');
                prev.push_str(next);
            }
        } else if tok.ends_with('=') {
            let mut joined = tok.to_string();
            if let Some(next) = raw.next() {
                joined.push_str(next);
            }
            out.push(joined);
        } else if tok.starts_with('=') && !out.is_empty() {
            out.last_mut().unwrap().push_str(tok);
        } else {
            out.push(tok.to_string());
        }
    }
    out
}

fn number(token: &str) -> LineResult<f64> {
    parse_value(token).ok_or_else(|| ParseErrorKind::MalformedNumber(token.to_string()))
}

fn positive(token: &str, what: &'static str) -> LineResult<f64> {
    let v = number(token)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ParseErrorKind::NonPositive { what, value: v })
    }
}

fn key_values(tokens: &[String]) -> LineResult<Vec<(String, String)>> {
    tokens
        .iter()
        .map(|t| {
            t.split_once('=')
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
                .ok_or_else(|| ParseErrorKind::Syntax(format!("expected key=value, found `{t}`")))
        })
        .collect()
}

fn nodes_of(tokens: &[String], count: usize) -> LineResult<Vec<String>> {
    let nodes: Vec<&String> = tokens.iter().skip(1).take(count).collect();
    if nodes.len() < count || nodes.iter().any(|n| n.contains('=')) {
        let found = nodes.iter().take_while(|n| !n.contains('=')).count();
        return Err(ParseErrorKind::Arity {
            expected: count,
            found,
        });
    }
    Ok(nodes.iter().map(|n| normalize_node(n)).collect())
}

fn parse_element(line: &str) -> LineResult<ElementLine> {
    let tokens = tokenize(line);
    let name = tokens[0].clone();
    let first = name.chars().next().unwrap().to_ascii_lowercase();
    let (nodes, kind) = match first {
        'r' | 'c' => {
            let nodes = nodes_of(&tokens, 2)?;
            let rest = &tokens[3..];
            let value_tok = rest
                .first()
                .ok_or(ParseErrorKind::MissingParameter("value"))?;
            if first == 'r' {
                if rest.len() > 1 {
                    return Err(ParseErrorKind::UnknownParameter(rest[1].clone()));
                }
                let ohms = positive(value_tok, "resistance")?;
                (nodes, ElementKind::Resistor { ohms })
            } else {
                let farads = positive(value_tok, "capacitance")?;
                let mut ic = None;
                for (key, value) in key_values(&rest[1..])? {
                    match key.as_str() {
                        "ic" => ic = Some(number(&value)?),
                        _ => return Err(ParseErrorKind::UnknownParameter(key)),
                    }
                }
                (nodes, ElementKind::Capacitor { farads, ic })
            }
        }
        'm' => {
            let positional = tokens[1..].iter().take_while(|t| !t.contains('=')).count();
            if positional != 5 {
                return Err(ParseErrorKind::Arity {
                    expected: 4,
                    found: positional.saturating_sub(1),
                });
            }
            let nodes = nodes_of(&tokens, 4)?;
            let model = tokens
                .get(5)
                .ok_or(ParseErrorKind::MissingParameter("model"))?;
            let polarity = match model.to_ascii_lowercase().as_str() {
                "nmos" => Polarity::Nmos,
                "pmos" => Polarity::Pmos,
                other => {
                    return Err(ParseErrorKind::Syntax(format!(
                        "unknown model `{other}`, expected nmos or pmos"
                    )))
                }
            };
            let (mut w, mut l) = (None, None);
            let mut overrides = MosOverrides::default();
            for (key, value) in key_values(&tokens[6..])? {
                match key.as_str() {
                    "w" => w = Some(positive(&value, "width")?),
                    "l" => l = Some(positive(&value, "length")?),
                    "vth0" => overrides.vth0 = Some(number(&value)?),
                    "kp" => overrides.kprime = Some(positive(&value, "kp")?),
                    "lambda" => overrides.lambda = Some(non_negative(&value, "lambda")?),
                    "cov" => overrides.cox_overlap = Some(non_negative(&value, "cov")?),
                    _ => return Err(ParseErrorKind::UnknownParameter(key)),
                }
            }
            let w = w.ok_or(ParseErrorKind::MissingParameter("W"))?;
            let l = l.ok_or(ParseErrorKind::MissingParameter("L"))?;
            (
                nodes,
                ElementKind::Mosfet {
                    polarity,
                    w,
                    l,
                    overrides,
                },
            )
        }
        'j' => {
            let nodes = nodes_of(&tokens, 2)?;
            let (mut state, mut area, mut tox) = (None, None, None);
            for (key, value) in key_values(&tokens[3..])? {
                match key.as_str() {
                    "state" => {
                        state = Some(match value.to_ascii_uppercase().as_str() {
                            "P" => MtjState::P,
                            "AP" => MtjState::Ap,
                            _ => {
                                return Err(ParseErrorKind::Syntax(format!(
                                    "state must be P or AP, found `{value}`"
                                )))
                            }
                        })
                    }
                    "area" => area = Some(positive(&value, "area")?),
                    "tox" => tox = Some(positive(&value, "tox")?),
                    _ => return Err(ParseErrorKind::UnknownParameter(key)),
                }
            }
            let state = state.ok_or(ParseErrorKind::MissingParameter("state"))?;
            (nodes, ElementKind::Mtj { state, area, tox })
        }
        'v' => {
            let nodes = nodes_of(&tokens, 2)?;
            let rest = &tokens[3..];
            let value = parse_source(rest)?;
            (nodes, ElementKind::Vsource(value))
        }
        'x' => {
            if tokens.len() < 2 {
                return Err(ParseErrorKind::Syntax(
                    "instance needs a subcircuit name".into(),
                ));
            }
            let subckt = tokens.last().unwrap().to_ascii_lowercase();
            let nodes = tokens[1..tokens.len() - 1]
                .iter()
                .map(|n| normalize_node(n))
                .collect();
            (nodes, ElementKind::Instance { subckt })
        }
        other => return Err(ParseErrorKind::UnknownDevice(other)),
    };
    Ok(ElementLine { name, nodes, kind })
}

fn non_negative(token: &str, what: &'static str) -> LineResult<f64> {
    let v = number(token)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ParseErrorKind::NonPositive { what, value: v })
    }
}

fn parse_source(rest: &[String]) -> LineResult<SourceValue> {
    let head = rest
        .first()
        .ok_or(ParseErrorKind::MissingParameter("source value"))?
        .to_ascii_lowercase();
    match head.as_str() {
        "dc" => {
            if rest.len() != 2 {
                return Err(ParseErrorKind::Syntax("expected `DC <value>`".into()));
            }
            Ok(SourceValue::Dc(number(&rest[1])?))
        }
        "pwl" => {
            if rest.get(1).map(String::as_str) != Some("(")
                || rest.last().map(String::as_str) != Some(")")
            {
                return Err(ParseErrorKind::Syntax("expected `PWL(t1 v1 ...)`".into()));
            }
            let values = rest[2..rest.len() - 1]
                .iter()
                .map(|t| number(t))
                .collect::<LineResult<Vec<f64>>>()?;
            if values.is_empty() || values.len() % 2 != 0 {
                return Err(ParseErrorKind::Syntax("PWL needs time/value pairs".into()));
            }
            let points: Vec<(f64, f64)> = values.chunks(2).map(|c| (c[0], c[1])).collect();
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(ParseErrorKind::PwlOrder);
            }
            Ok(SourceValue::Pwl(points))
        }
        _ if rest.len() == 1 => Ok(SourceValue::Dc(number(&rest[0])?)),
        _ => Err(ParseErrorKind::Syntax("expected DC or PWL source".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistor_line() {
        let n = parse_netlist("R1 a 0 1k").unwrap();
        assert_eq!(n.elements.len(), 1);
        let r = &n.elements[0];
        assert_eq!(r.name, "R1");
        assert_eq!(r.nodes, vec!["a", "0"]);
        assert_eq!(r.kind, ElementKind::Resistor { ohms: 1000.0 });
    }

    #[test]
    fn mtj_line() {
        let n = parse_netlist("J1 bl sl state=P area=1600n2 tox=1n").unwrap();
        match &n.elements[0].kind {
            ElementKind::Mtj { state, area, tox } => {
                assert_eq!(*state, MtjState::P);
                assert!((area.unwrap() - 1.6e-15).abs() < 1e-27);
                assert_eq!(tox.unwrap(), 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_resistance_rejected() {
        let err = parse_netlist("R1 a 0 -5").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(
            err.kind,
            ParseErrorKind::NonPositive {
                what: "resistance",
                ..
            }
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_netlist("* t\nR1 a 0 1k\n\nQ1 a b c\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(err.kind, ParseErrorKind::UnknownDevice('q'));

        let err = parse_netlist("C1 a 0 5x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MalformedNumber("5x".into()));
    }

    #[test]
    fn unknown_parameter_is_an_error() {
        let err = parse_netlist("M1 d g s 0 nmos W=1u L=100n foo=3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownParameter("foo".into()));
        let err = parse_netlist(".param bogus=1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownParameter("bogus".into()));
    }

    #[test]
    fn mosfet_and_sources() {
        let text = "\
* sources
M1 out in 0 0 NMOS W=1u L=0.1u vth0=0.35
Vdd vdd 0 DC 1.0
Vin in gnd PWL(0 0 10p 1, 1n 1)
.tran 1p 2n
";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.title, "sources");
        match &n.elements[0].kind {
            ElementKind::Mosfet {
                polarity,
                w,
                l,
                overrides,
            } => {
                assert_eq!(*polarity, Polarity::Nmos);
                assert_eq!(*w, 1e-6);
                assert_eq!(*l, 0.1e-6);
                assert_eq!(overrides.vth0, Some(0.35));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(n.elements[2].nodes, vec!["in", "0"]);
        assert_eq!(
            n.elements[2].kind,
            ElementKind::Vsource(SourceValue::Pwl(vec![
                (0.0, 0.0),
                (10e-12, 1.0),
                (1e-9, 1.0)
            ]))
        );
        assert_eq!(
            n.analyses,
            vec![AnalysisDirective::Tran {
                step: 1e-12,
                stop: 2e-9
            }]
        );
    }

    #[test]
    fn arity_checked() {
        let err = parse_netlist("M1 d g s nmos W=1u L=1u").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::Arity { expected: 4, .. }
        ));
        let err = parse_netlist("R1 a").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::Arity { expected: 2, .. }
        ));
    }

    #[test]
    fn subckt_block() {
        let text = "\
.subckt cell bl sl
Rj bl sl 742
.ends
X1 a 0 cell
";
        let n = parse_netlist(text).unwrap();
        let cell = &n.subcircuits["cell"];
        assert_eq!(cell.ports, vec!["bl", "sl"]);
        assert_eq!(cell.elements.len(), 1);
        assert_eq!(
            n.elements[0].kind,
            ElementKind::Instance {
                subckt: "cell".into()
            }
        );
    }

    #[test]
    fn unterminated_subckt() {
        assert!(parse_netlist(".subckt a p\nR1 p 0 1\n").is_err());
    }

    #[test]
    fn spaced_equals() {
        let n = parse_netlist("C1 a 0 1p ic = 0.5").unwrap();
        assert_eq!(
            n.elements[0].kind,
            ElementKind::Capacitor {
                farads: 1e-12,
                ic: Some(0.5)
            }
        );
    }
}
