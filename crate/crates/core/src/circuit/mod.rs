//! Gate library, the six-block design space, genome decoding, baseline
//! ansätze and OpenQASM 2.0 emission.

mod blocks;
mod gates;
mod qasm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocks::{AnsatzGenome, Block, BlockTemplate, BLOCK_TEMPLATES, N_BLOCK_KINDS};
pub use gates::{GateKind, GateMatrix, Matrix2, Matrix4};
pub use qasm::{emit_qasm, format_angle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("block {position}: unknown block id {id} (valid ids are 0-5)")]
    InvalidBlockId { position: usize, id: usize },
    #[error("block {position}: invalid qubit pair ({a},{b}) for {n_qubits} qubits")]
    InvalidQubitPair { position: usize, a: usize, b: usize, n_qubits: usize },
    #[error("expected {expected} parameters, got {actual}")]
    ParamCountMismatch { expected: usize, actual: usize },
    #[error("{kind} takes {expected} qubits, got {actual}")]
    ArityMismatch { kind: &'static str, expected: usize, actual: usize },
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("instruction uses the same qubit twice")]
    RepeatedQubit,
    #[error("parameter indices must be assigned in first-appearance order")]
    ParamOrder,
    #[error("{0}")]
    Invalid(String),
}

/// What feeds one angle slot of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSlot {
    /// Index into the circuit's flat parameter vector.
    Param(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub slots: Vec<ParamSlot>,
}

impl Instruction {
    /// Angle values for this instruction under the parameter vector.
    pub fn angles(&self, params: &[f64]) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match *s {
                ParamSlot::Param(i) => params[i],
                ParamSlot::Fixed(v) => v,
            })
            .collect()
    }
}

/// Decoded gate sequence over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    n_params: usize,
}

impl Circuit {
    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, instructions: Vec::new(), n_params: 0 }
    }

    /// Validates qubit ranges, arities and first-appearance parameter order.
    pub fn from_instructions(
        n_qubits: usize,
        instructions: Vec<Instruction>,
    ) -> Result<Self, CircuitError> {
        let mut next_param = 0usize;
        for ins in &instructions {
            check_operands(ins.kind, &ins.qubits, n_qubits)?;
            if ins.slots.len() != ins.kind.param_count() {
                return Err(CircuitError::ParamCountMismatch {
                    expected: ins.kind.param_count(),
                    actual: ins.slots.len(),
                });
            }
            for slot in &ins.slots {
                if let ParamSlot::Param(i) = *slot {
                    if i > next_param {
                        return Err(CircuitError::ParamOrder);
                    }
                    if i == next_param {
                        next_param += 1;
                    }
                }
            }
        }
        Ok(Self { n_qubits, instructions, n_params: next_param })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Number of stored gate instructions, without decomposition.
    pub fn gate_count(&self) -> usize {
        self.instructions.len()
    }

    /// How many instructions read each parameter.
    pub fn param_usage(&self) -> Vec<usize> {
        let mut uses = vec![0usize; self.n_params];
        for ins in &self.instructions {
            for slot in &ins.slots {
                if let ParamSlot::Param(i) = *slot {
                    uses[i] += 1;
                }
            }
        }
        uses
    }

    /// Concatenation `self` then `other`; `other`'s parameters are
    /// renumbered after ours.
    pub fn append(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        if self.n_qubits != other.n_qubits {
            return Err(CircuitError::Invalid(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        let shift = self.n_params;
        let mut instructions = self.instructions.clone();
        instructions.extend(other.instructions.iter().map(|ins| Instruction {
            kind: ins.kind,
            qubits: ins.qubits.clone(),
            slots: ins
                .slots
                .iter()
                .map(|s| match *s {
                    ParamSlot::Param(i) => ParamSlot::Param(i + shift),
                    fixed => fixed,
                })
                .collect(),
        }));
        Ok(Circuit { n_qubits: self.n_qubits, instructions, n_params: self.n_params + other.n_params })
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<(), CircuitError> {
        if params.len() != self.n_params {
            return Err(CircuitError::ParamCountMismatch {
                expected: self.n_params,
                actual: params.len(),
            });
        }
        Ok(())
    }
}

fn check_operands(kind: GateKind, qubits: &[usize], n_qubits: usize) -> Result<(), CircuitError> {
    if qubits.len() != kind.arity() {
        return Err(CircuitError::ArityMismatch {
            kind: kind.name(),
            expected: kind.arity(),
            actual: qubits.len(),
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
        return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits });
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return Err(CircuitError::RepeatedQubit);
    }
    Ok(())
}

/// Incremental circuit construction; every `push` takes fresh parameters.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    n_params: usize,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, instructions: Vec::new(), n_params: 0 }
    }

    /// Appends `kind` on `qubits` with one fresh parameter per angle slot.
    pub fn push(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self, CircuitError> {
        check_operands(kind, qubits, self.n_qubits)?;
        let slots = (0..kind.param_count())
            .map(|k| ParamSlot::Param(self.n_params + k))
            .collect();
        self.n_params += kind.param_count();
        self.instructions.push(Instruction { kind, qubits: qubits.to_vec(), slots });
        Ok(self)
    }

    /// Appends `kind` with all angles fixed.
    pub fn push_fixed(
        &mut self,
        kind: GateKind,
        qubits: &[usize],
        angles: &[f64],
    ) -> Result<&mut Self, CircuitError> {
        check_operands(kind, qubits, self.n_qubits)?;
        if angles.len() != kind.param_count() {
            return Err(CircuitError::ParamCountMismatch {
                expected: kind.param_count(),
                actual: angles.len(),
            });
        }
        let slots = angles.iter().map(|&a| ParamSlot::Fixed(a)).collect();
        self.instructions.push(Instruction { kind, qubits: qubits.to_vec(), slots });
        Ok(self)
    }

    pub fn build(self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, instructions: self.instructions, n_params: self.n_params }
    }
}

/// Decodes a genome into its gate sequence: block templates concatenated
/// in genome order.
pub fn decode(genome: &AnsatzGenome, n_qubits: usize) -> Result<Circuit, CircuitError> {
    genome.validate(n_qubits)?;
    let mut builder = CircuitBuilder::new(n_qubits);
    for block in genome.blocks() {
        BLOCK_TEMPLATES[block.id].expand(&mut builder, block.a, block.b)?;
    }
    Ok(builder.build())
}

/// Entangler connectivity for the baseline ansätze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// CX on every pair i < j.
    #[default]
    Full,
    /// CX on (i, i+1).
    Linear,
}

impl Entanglement {
    fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Full => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }
}

fn layered_baseline(
    n_qubits: usize,
    reps: usize,
    entanglement: Entanglement,
    rotations: &[GateKind],
) -> Result<Circuit, CircuitError> {
    if n_qubits < 2 {
        return Err(CircuitError::Invalid("baseline ansätze need at least 2 qubits".into()));
    }
    if reps == 0 {
        return Err(CircuitError::Invalid("reps must be at least 1".into()));
    }
    let pairs = entanglement.pairs(n_qubits);
    let mut b = CircuitBuilder::new(n_qubits);
    for rep in 0..=reps {
        for &kind in rotations {
            for q in 0..n_qubits {
                b.push(kind, &[q])?;
            }
        }
        if rep < reps {
            for &(i, j) in &pairs {
                b.push(GateKind::Cnot, &[i, j])?;
            }
        }
    }
    Ok(b.build())
}

/// RY layers interleaved with CX entanglers, `reps` entangler layers.
pub fn real_amplitudes(
    n_qubits: usize,
    reps: usize,
    entanglement: Entanglement,
) -> Result<Circuit, CircuitError> {
    layered_baseline(n_qubits, reps, entanglement, &[GateKind::Ry])
}

/// Same skeleton as [`real_amplitudes`] with RY-then-RZ rotation layers.
pub fn two_local(
    n_qubits: usize,
    reps: usize,
    entanglement: Entanglement,
) -> Result<Circuit, CircuitError> {
    layered_baseline(n_qubits, reps, entanglement, &[GateKind::Ry, GateKind::Rz])
}

/// Prepends a parameterless SQRT_H on every qubit.
pub fn prefix_sqrt_h(circuit: &Circuit) -> Circuit {
    let mut instructions: Vec<Instruction> = (0..circuit.n_qubits)
        .map(|q| Instruction { kind: GateKind::SqrtH, qubits: vec![q], slots: Vec::new() })
        .collect();
    instructions.extend(circuit.instructions.iter().cloned());
    Circuit { n_qubits: circuit.n_qubits, instructions, n_params: circuit.n_params }
}
