use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CircuitBuilder, CircuitError, GateKind};

pub const N_BLOCK_KINDS: usize = 6;

/// Which operand(s) of the block's qubit pair an instruction acts on.
#[derive(Debug, Clone, Copy)]
enum Operands {
    /// One instruction on `a`, then the same gate on `b`.
    EachQubit,
    /// One two-qubit instruction on `(a, b)`.
    Pair,
}

/// A two-qubit block of the design space.
#[derive(Debug)]
pub struct BlockTemplate {
    pub id: usize,
    pub name: &'static str,
    /// Human-readable description used in search prompts.
    pub description: &'static str,
    layers: &'static [(GateKind, Operands)],
}

impl BlockTemplate {
    pub(super) fn expand(
        &self,
        builder: &mut CircuitBuilder,
        a: usize,
        b: usize,
    ) -> Result<(), CircuitError> {
        for &(kind, operands) in self.layers {
            match operands {
                Operands::EachQubit => {
                    builder.push(kind, &[a])?;
                    builder.push(kind, &[b])?;
                }
                Operands::Pair => {
                    builder.push(kind, &[a, b])?;
                }
            }
        }
        Ok(())
    }

    pub fn instruction_count(&self) -> usize {
        self.layers
            .iter()
            .map(|(_, o)| match o {
                Operands::EachQubit => 2,
                Operands::Pair => 1,
            })
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|(k, o)| match o {
                Operands::EachQubit => 2 * k.param_count(),
                Operands::Pair => k.param_count(),
            })
            .sum()
    }
}

use GateKind::*;
use Operands::*;

pub static BLOCK_TEMPLATES: [BlockTemplate; N_BLOCK_KINDS] = [
    BlockTemplate {
        id: 0,
        name: "U3+CU3",
        description: "U3+CU3 -- One block has a U3 layer with one U3 gate on each qubit and a CU3 layer.",
        layers: &[(U3, EachQubit), (Cu3, Pair)],
    },
    BlockTemplate {
        id: 1,
        name: "ZZ+RY",
        description: "ZZ+RY -- One block contains one layer of ZZ gate and one RY layer.",
        layers: &[(Rzz, Pair), (Ry, EachQubit)],
    },
    BlockTemplate {
        id: 2,
        name: "RXYZ",
        description: "RXYZ -- One block has four layers: RX, RY, RZ, and CZ.",
        layers: &[(Rx, EachQubit), (Ry, EachQubit), (Rz, EachQubit), (Cz, Pair)],
    },
    BlockTemplate {
        id: 3,
        name: "ZX+XX",
        description: "ZX+XX -- Based on their MNIST circuit design, one block has two layers: ZX and XX.",
        layers: &[(Rzx, Pair), (Rxx, Pair)],
    },
    BlockTemplate {
        id: 4,
        name: "RXYZ+U1+CU3",
        description: "RXYZ+U1+CU3 -- Based on their random circuit basis gate set, we propose a design space in which one block has six layers in the order of RX, RY, RZ, CZ, U1, and CU3.",
        layers: &[
            (Rx, EachQubit),
            (Ry, EachQubit),
            (Rz, EachQubit),
            (Cz, Pair),
            (U1, EachQubit),
            (Cu3, Pair),
        ],
    },
    BlockTemplate {
        id: 5,
        name: "IBMQ Basis",
        description: "IBMQ Basis -- One block with the basis gate set of IBMQ devices, in which one block has six layers in the order of RZ, X, RZ, SX, RZ, and CNOT.",
        layers: &[
            (Rz, EachQubit),
            (X, EachQubit),
            (Rz, EachQubit),
            (Sx, EachQubit),
            (Rz, EachQubit),
            (Cnot, Pair),
        ],
    },
];

/// One block choice: template id on the ordered qubit pair (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    pub a: usize,
    pub b: usize,
}

/// Ordered block list; the unit a proposer emits.
///
/// Displays in the bracket syntax `[1, (0,1)], [2, (1,2)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnsatzGenome {
    blocks: Vec<Block>,
}

impl AnsatzGenome {
    pub const DEFAULT_BLOCKS: usize = 6;

    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn from_tuples(blocks: &[(usize, (usize, usize))]) -> Self {
        Self::new(blocks.iter().map(|&(id, (a, b))| Block { id, a, b }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Checks ids and qubit pairs; errors name the first offending block.
    pub fn validate(&self, n_qubits: usize) -> Result<(), CircuitError> {
        for (position, block) in self.blocks.iter().enumerate() {
            if block.id >= N_BLOCK_KINDS {
                return Err(CircuitError::InvalidBlockId { position, id: block.id });
            }
            if block.a == block.b || block.a >= n_qubits || block.b >= n_qubits {
                return Err(CircuitError::InvalidQubitPair {
                    position,
                    a: block.a,
                    b: block.b,
                    n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Instruction count predicted from the template table.
    pub fn template_gate_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| BLOCK_TEMPLATES[b.id].instruction_count())
            .sum()
    }
}

impl fmt::Display for AnsatzGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "[{}, ({},{})]", b.id, b.a, b.b)?;
        }
        Ok(())
    }
}
