//! JSON interchange formats and the canonical writer.
//!
//! * matrix: `{"rows": n, "cols": m, "entries": [[re, im], ...]}`, row-major
//! * game: `{"S": [...], "T": [...], "A": [...], "B": [...], "pi": [[s, t, p], ...], "V": [[s, t, a, b], ...]}`
//!   with indices into the label lists; `V` lists accepting tuples only
//! * graph: `{"vertices": [...], "edges": [[u, v], ...]}`
//! * strategy: `{"dA": n, "dB": m, "psi": matrix, "alice": {label: [matrix, ...]}, "bob": {...}}`
//!
//! Canonical output has sorted keys, no whitespace and every float printed
//! with 17 significant digits, so writing a parsed document reproduces it
//! byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::games::{GameError, Graph, NonlocalGame, Party};
use crate::linalg::{ComplexMatrix, LinalgError, C64};
use crate::strategies::{Measurement, QuantumStrategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = FormatError;

    fn try_from(m: MatrixJson) -> Result<Self, FormatError> {
        let data = m.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Ok(ComplexMatrix::new(m.rows, m.cols, data)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameJson {
    #[serde(rename = "S")]
    pub alice_questions: Vec<String>,
    #[serde(rename = "T")]
    pub bob_questions: Vec<String>,
    #[serde(rename = "A")]
    pub alice_answers: Vec<String>,
    #[serde(rename = "B")]
    pub bob_answers: Vec<String>,
    pub pi: Vec<(usize, usize, f64)>,
    #[serde(rename = "V")]
    pub accept: Vec<[usize; 4]>,
}

impl From<&NonlocalGame> for GameJson {
    fn from(g: &NonlocalGame) -> Self {
        let (ns, nt) = (g.alice_questions().len(), g.bob_questions().len());
        let (na, nb) = (g.alice_answers().len(), g.bob_answers().len());
        let mut pi = Vec::new();
        let mut accept = Vec::new();
        for s in 0..ns {
            for t in 0..nt {
                let p = g.prob(s, t);
                if p != 0.0 {
                    pi.push((s, t, p));
                }
                for a in 0..na {
                    for b in 0..nb {
                        if g.accepts(s, t, a, b) {
                            accept.push([s, t, a, b]);
                        }
                    }
                }
            }
        }
        GameJson {
            alice_questions: g.alice_questions().to_vec(),
            bob_questions: g.bob_questions().to_vec(),
            alice_answers: g.alice_answers().to_vec(),
            bob_answers: g.bob_answers().to_vec(),
            pi,
            accept,
        }
    }
}

impl TryFrom<GameJson> for NonlocalGame {
    type Error = FormatError;

    fn try_from(j: GameJson) -> Result<Self, FormatError> {
        let (ns, nt) = (j.alice_questions.len(), j.bob_questions.len());
        let (na, nb) = (j.alice_answers.len(), j.bob_answers.len());
        let mut pi = vec![0.0; ns * nt];
        for &(s, t, p) in &j.pi {
            if s >= ns || t >= nt {
                return Err(FormatError::Invalid(format!("pi entry ({s}, {t}) is out of range")));
            }
            pi[s * nt + t] += p;
        }
        let mut accept = vec![false; ns * nt * na * nb];
        for &[s, t, a, b] in &j.accept {
            if s >= ns || t >= nt || a >= na || b >= nb {
                return Err(FormatError::Invalid(format!(
                    "V entry ({s}, {t}, {a}, {b}) is out of range"
                )));
            }
            accept[((s * nt + t) * na + a) * nb + b] = true;
        }
        Ok(NonlocalGame::new(
            j.alice_questions,
            j.bob_questions,
            j.alice_answers,
            j.bob_answers,
            pi,
            accept,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            vertices: g.vertices().to_vec(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = FormatError;

    fn try_from(j: GraphJson) -> Result<Self, FormatError> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|&[u, v]| (u, v)).collect();
        Ok(Graph::new(j.vertices, &edges)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyJson {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub psi: MatrixJson,
    pub alice: BTreeMap<String, Vec<MatrixJson>>,
    pub bob: BTreeMap<String, Vec<MatrixJson>>,
}

impl From<&QuantumStrategy> for StrategyJson {
    fn from(st: &QuantumStrategy) -> Self {
        let (d_a, d_b) = st.local_dims();
        let side = |p: Party| {
            st.measurements(p)
                .iter()
                .map(|(q, m)| (q.clone(), m.outcomes().iter().map(MatrixJson::from).collect()))
                .collect()
        };
        StrategyJson {
            d_a,
            d_b,
            psi: st.state().into(),
            alice: side(Party::Alice),
            bob: side(Party::Bob),
        }
    }
}

impl TryFrom<StrategyJson> for QuantumStrategy {
    type Error = FormatError;

    /// Measurements come out in label order. Operators are not validated here; see
    /// [`QuantumStrategy::validate`].
    fn try_from(j: StrategyJson) -> Result<Self, FormatError> {
        let side = |map: BTreeMap<String, Vec<MatrixJson>>| -> Result<Vec<(String, Measurement)>, FormatError> {
            map.into_iter()
                .map(|(q, ops)| {
                    if ops.is_empty() {
                        return Err(FormatError::Invalid(format!("measurement {q:?} has no outcomes")));
                    }
                    let ops = ops.into_iter().map(ComplexMatrix::try_from).collect::<Result<_, _>>()?;
                    Ok((q, Measurement::new(ops)))
                })
                .collect()
        };
        let psi = ComplexMatrix::try_from(j.psi)?;
        Ok(QuantumStrategy::new_unchecked(
            j.d_a,
            j.d_b,
            psi,
            side(j.alice)?,
            side(j.bob)?,
        )?)
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                write!(out, "{x:.16e}").expect("write to String");
            } else {
                write!(out, "{n}").expect("write to String");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Canonical JSON text of any serializable value, newline-terminated.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String, FormatError> {
    let mut out = String::new();
    write_value(&mut out, &serde_json::to_value(value)?);
    out.push('\n');
    Ok(out)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_matrix(m: &ComplexMatrix) -> String {
    to_canonical_json(&MatrixJson::from(m)).expect("matrix serializes")
}

pub fn read_matrix(text: &str) -> Result<ComplexMatrix, FormatError> {
    from_json::<MatrixJson>(text)?.try_into()
}

pub fn write_game(g: &NonlocalGame) -> String {
    to_canonical_json(&GameJson::from(g)).expect("game serializes")
}

pub fn read_game(text: &str) -> Result<NonlocalGame, FormatError> {
    from_json::<GameJson>(text)?.try_into()
}

pub fn write_graph(g: &Graph) -> String {
    to_canonical_json(&GraphJson::from(g)).expect("graph serializes")
}

pub fn read_graph(text: &str) -> Result<Graph, FormatError> {
    from_json::<GraphJson>(text)?.try_into()
}

pub fn write_strategy(st: &QuantumStrategy) -> String {
    to_canonical_json(&StrategyJson::from(st)).expect("strategy serializes")
}

pub fn read_strategy(text: &str) -> Result<QuantumStrategy, FormatError> {
    from_json::<StrategyJson>(text)?.try_into()
}
