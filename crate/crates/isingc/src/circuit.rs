//! Abstract gate-network representation: text format, parser, layer
//! normalization and the controlled-phase to Ising-native decomposition.

use thiserror::Error;

use crate::angle::norm_deg;

/// One abstract gate of the network.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// Rotation by `angle_deg` about the xy-plane axis at `axis_deg`.
    SingleQubit { qubit: usize, axis_deg: f64, angle_deg: f64 },
    /// Virtual z rotation; realized by re-phasing later pulses.
    FrameZ { qubit: usize, angle_deg: f64 },
    /// Ising evolution: exp(-i * theta_rad * 2 Iz Iz) on the pair.
    Coupling { q_a: usize, q_b: usize, angle_deg: f64 },
    /// diag(1,1,1,e^{i phi}) on the pair.
    ControlledPhase { q_a: usize, q_b: usize, phi_deg: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::SingleQubit { qubit, .. } | Gate::FrameZ { qubit, .. } => vec![qubit],
            Gate::Coupling { q_a, q_b, .. } | Gate::ControlledPhase { q_a, q_b, .. } => {
                vec![q_a, q_b]
            }
        }
    }

    fn min_qubit(&self) -> usize {
        self.qubits().into_iter().min().expect("gate touches a qubit")
    }
}

/// A layer holds gates with pairwise-disjoint qubit support.
pub type Layer = Vec<Gate>;

/// Ordered, layered gate network.
#[derive(Clone, Debug, PartialEq)]
pub struct GateNetwork {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: qubit {q} out of range (qubits {n})")]
    QubitOutOfRange { line: usize, q: usize, n: usize },
    #[error("line {line}: qubit {q} appears twice in one layer")]
    DuplicateQubit { line: usize, q: usize },
    #[error("line {line}: self-coupling on qubit {q}")]
    SelfCoupling { line: usize, q: usize },
    #[error("missing 'qubits N' header")]
    MissingHeader,
}

impl GateNetwork {
    pub fn new(n_qubits: usize, layers: Vec<Layer>) -> Result<Self, ParseError> {
        let net = GateNetwork { n_qubits, layers };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), ParseError> {
        for layer in &self.layers {
            let mut seen = std::collections::BTreeSet::new();
            for gate in layer {
                for q in gate.qubits() {
                    if q >= self.n_qubits {
                        return Err(ParseError::QubitOutOfRange { line: 0, q, n: self.n_qubits });
                    }
                    if !seen.insert(q) {
                        return Err(ParseError::DuplicateQubit { line: 0, q });
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of single-qubit (target) gates, the paper's `p`.
    pub fn target_gate_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|g| matches!(g, Gate::SingleQubit { .. }))
            .count()
    }
}

/// Flatten layers into a sequential gate list. Within a layer, gates are
/// emitted by ascending lowest qubit index (top to bottom); layer order
/// is preserved.
pub fn normalize(network: &GateNetwork) -> Vec<Gate> {
    let mut out = Vec::new();
    for layer in &network.layers {
        let mut gates: Vec<&Gate> = layer.iter().collect();
        gates.sort_by_key(|g| g.min_qubit());
        out.extend(gates.into_iter().cloned());
    }
    out
}

/// Ising-native replacement for a controlled-phase gate.
///
/// Satisfies, as a matrix identity on the pair (verified by the oracle
/// tests): diag(1,1,1,e^{i phi}) =
///   e^{i*global_phase} * U_zz(coupling) * (Rz(frame) (x) Rz(frame))
/// with U_zz(t) = exp(-i*t_rad*2IzIz) and Rz(a) = exp(-i*a_rad*Iz).
/// The coupling angle is negative (-phi/2): a controlled phase needs the
/// inverse of the machine's natural positive-J evolution; the scheduler
/// folds it into the pair deficit modulo 360.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CphaseDecomposition {
    pub coupling_deg: f64,
    pub frame_deg: f64,
    pub global_phase_deg: f64,
}

pub fn decompose_cphase(phi_deg: f64) -> CphaseDecomposition {
    CphaseDecomposition {
        coupling_deg: -phi_deg / 2.0,
        frame_deg: phi_deg / 2.0,
        global_phase_deg: phi_deg / 4.0,
    }
}

/// Parse the line-based circuit text format.
///
/// `#` starts a comment; mnemonics are case-insensitive; gates separated
/// by `;` on one line share a layer; each line is a new layer.
pub fn parse_circuit(text: &str) -> Result<GateNetwork, ParseError> {
    let mut n_qubits: Option<usize> = None;
    let mut layers: Vec<Layer> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }

        if n_qubits.is_none() {
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap_or("");
            if !head.eq_ignore_ascii_case("qubits") {
                return Err(ParseError::Syntax {
                    line: line_no,
                    col: col_of(raw_line, head),
                    msg: "expected 'qubits N' header".into(),
                });
            }
            let n_tok = toks.next().ok_or(ParseError::Syntax {
                line: line_no,
                col: raw_line.len() + 1,
                msg: "expected qubit count".into(),
            })?;
            let n: usize = n_tok.parse().map_err(|_| ParseError::Syntax {
                line: line_no,
                col: col_of(raw_line, n_tok),
                msg: format!("bad qubit count '{n_tok}'"),
            })?;
            if n == 0 {
                return Err(ParseError::Syntax {
                    line: line_no,
                    col: col_of(raw_line, n_tok),
                    msg: "qubit count must be positive".into(),
                });
            }
            if let Some(extra) = toks.next() {
                return Err(ParseError::Syntax {
                    line: line_no,
                    col: col_of(raw_line, extra),
                    msg: format!("unexpected token '{extra}'"),
                });
            }
            n_qubits = Some(n);
            continue;
        }

        let n = n_qubits.unwrap();
        let mut layer: Layer = Vec::new();
        let mut used = std::collections::BTreeSet::new();
        for segment in line.split(';') {
            if segment.trim().is_empty() {
                continue;
            }
            let gate = parse_gate(segment, raw_line, line_no)?;
            for q in gate.qubits() {
                if q >= n {
                    return Err(ParseError::QubitOutOfRange { line: line_no, q, n });
                }
                if !used.insert(q) {
                    return Err(ParseError::DuplicateQubit { line: line_no, q });
                }
            }
            layer.push(gate);
        }
        if !layer.is_empty() {
            layers.push(layer);
        }
    }

    let n = n_qubits.ok_or(ParseError::MissingHeader)?;
    Ok(GateNetwork { n_qubits: n, layers })
}

fn col_of(raw_line: &str, token: &str) -> usize {
    if token.is_empty() {
        return 1;
    }
    // Byte offset of the token within the line, 1-based.
    let token_ptr = token.as_ptr() as usize;
    let line_ptr = raw_line.as_ptr() as usize;
    if token_ptr >= line_ptr && token_ptr < line_ptr + raw_line.len() {
        token_ptr - line_ptr + 1
    } else {
        raw_line.find(token).map(|p| p + 1).unwrap_or(1)
    }
}

fn parse_gate(segment: &str, raw_line: &str, line_no: usize) -> Result<Gate, ParseError> {
    let toks: Vec<&str> = segment.split_whitespace().collect();
    let syntax = |tok: &str, msg: String| ParseError::Syntax {
        line: line_no,
        col: col_of(raw_line, tok),
        msg,
    };
    let head = toks[0];
    let mnemonic = head.to_ascii_lowercase();

    let parse_f64 = |tok: &str| -> Result<f64, ParseError> {
        let v: f64 = tok
            .parse()
            .map_err(|_| syntax(tok, format!("expected a number, found '{tok}'")))?;
        if !v.is_finite() {
            return Err(syntax(tok, format!("non-finite angle '{tok}'")));
        }
        Ok(v)
    };
    let parse_qubit = |tok: &str| -> Result<usize, ParseError> {
        tok.parse()
            .map_err(|_| syntax(tok, format!("expected a qubit index, found '{tok}'")))
    };
    let arity = |want: usize| -> Result<(), ParseError> {
        if toks.len() != want + 1 {
            return Err(syntax(
                head,
                format!("'{mnemonic}' expects {} argument(s), found {}", want, toks.len() - 1),
            ));
        }
        Ok(())
    };

    match mnemonic.as_str() {
        "h" => {
            arity(1)?;
            Ok(Gate::SingleQubit { qubit: parse_qubit(toks[1])?, axis_deg: 90.0, angle_deg: 90.0 })
        }
        "rot" => {
            arity(3)?;
            Ok(Gate::SingleQubit {
                qubit: parse_qubit(toks[3])?,
                axis_deg: norm_deg(parse_f64(toks[1])?),
                angle_deg: parse_f64(toks[2])?,
            })
        }
        "rz" => {
            arity(2)?;
            Ok(Gate::FrameZ { qubit: parse_qubit(toks[2])?, angle_deg: parse_f64(toks[1])? })
        }
        "zz" => {
            arity(3)?;
            let (a, b) = (parse_qubit(toks[2])?, parse_qubit(toks[3])?);
            if a == b {
                return Err(ParseError::SelfCoupling { line: line_no, q: a });
            }
            Ok(Gate::Coupling { q_a: a, q_b: b, angle_deg: parse_f64(toks[1])? })
        }
        "cphase" => {
            arity(3)?;
            let (a, b) = (parse_qubit(toks[2])?, parse_qubit(toks[3])?);
            if a == b {
                return Err(ParseError::SelfCoupling { line: line_no, q: a });
            }
            Ok(Gate::ControlledPhase { q_a: a, q_b: b, phi_deg: parse_f64(toks[1])? })
        }
        _ if mnemonic.starts_with("ry") && mnemonic.len() > 2 => {
            arity(1)?;
            let angle = parse_f64(&head[2..])?;
            Ok(Gate::SingleQubit { qubit: parse_qubit(toks[1])?, axis_deg: 90.0, angle_deg: angle })
        }
        _ => Err(syntax(head, format!("unknown gate '{head}'"))),
    }
}

/// Render a network back to the text format; `parse_circuit` of the
/// result yields an equal network.
pub fn render_circuit(network: &GateNetwork) -> String {
    let mut out = format!("qubits {}\n", network.n_qubits);
    for layer in &network.layers {
        let parts: Vec<String> = layer.iter().map(render_gate).collect();
        out.push_str(&parts.join(" ; "));
        out.push('\n');
    }
    out
}

fn render_gate(gate: &Gate) -> String {
    match gate {
        Gate::SingleQubit { qubit, axis_deg, angle_deg } => {
            if *axis_deg == 90.0 && *angle_deg == 90.0 {
                format!("h {qubit}")
            } else if *axis_deg == 90.0 {
                format!("ry{angle_deg} {qubit}")
            } else {
                format!("rot {axis_deg} {angle_deg} {qubit}")
            }
        }
        Gate::FrameZ { qubit, angle_deg } => format!("rz {angle_deg} {qubit}"),
        Gate::Coupling { q_a, q_b, angle_deg } => format!("zz {angle_deg} {q_a} {q_b}"),
        Gate::ControlledPhase { q_a, q_b, phi_deg } => format!("cphase {phi_deg} {q_a} {q_b}"),
    }
}
