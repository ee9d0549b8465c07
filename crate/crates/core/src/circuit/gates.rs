use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Matrix2 = [[Complex64; 2]; 2];
/// Two-qubit gate matrix. Local basis index is `2 * bit(first) + bit(second)`
/// where `first` is the first operand (the control for controlled gates).
pub type Matrix4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U1,
    U3,
    Sx,
    X,
    H,
    SqrtH,
    Cz,
    Cnot,
    Cu3,
    Rzz,
    Rxx,
    Rzx,
}

impl GateKind {
    pub const ALL: [GateKind; 15] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U1,
        GateKind::U3,
        GateKind::Sx,
        GateKind::X,
        GateKind::H,
        GateKind::SqrtH,
        GateKind::Cz,
        GateKind::Cnot,
        GateKind::Cu3,
        GateKind::Rzz,
        GateKind::Rxx,
        GateKind::Rzx,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cz
            | GateKind::Cnot
            | GateKind::Cu3
            | GateKind::Rzz
            | GateKind::Rxx
            | GateKind::Rzx => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::U1
            | GateKind::Rzz
            | GateKind::Rxx
            | GateKind::Rzx => 1,
            GateKind::U3 | GateKind::Cu3 => 3,
            _ => 0,
        }
    }

    /// True when the gate is exp(-iθP/2) for a single Pauli string P (up to
    /// global phase), so the two-term shift rule is exact for its angle.
    pub fn supports_shift_rule(self) -> bool {
        matches!(
            self,
            GateKind::Rx
                | GateKind::Ry
                | GateKind::Rz
                | GateKind::U1
                | GateKind::Rzz
                | GateKind::Rxx
                | GateKind::Rzx
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::U1 => "U1",
            GateKind::U3 => "U3",
            GateKind::Sx => "SX",
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::SqrtH => "SQRT_H",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cu3 => "CU3",
            GateKind::Rzz => "RZZ",
            GateKind::Rxx => "RXX",
            GateKind::Rzx => "RZX",
        }
    }

    /// Gate name as written in OpenQASM 2.0 output.
    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U1 => "u1",
            GateKind::U3 => "u3",
            GateKind::Sx => "sx",
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::SqrtH => "sqrth",
            GateKind::Cz => "cz",
            GateKind::Cnot => "cx",
            GateKind::Cu3 => "cu3",
            GateKind::Rzz => "rzz",
            GateKind::Rxx => "rxx",
            GateKind::Rzx => "rzx",
        }
    }

    pub fn matrix(self, params: &[f64]) -> GateMatrix {
        debug_assert_eq!(params.len(), self.param_count());
        match self {
            GateKind::Rx => GateMatrix::One(rx(params[0])),
            GateKind::Ry => GateMatrix::One(ry(params[0])),
            GateKind::Rz => GateMatrix::One(rz(params[0])),
            GateKind::U1 => GateMatrix::One(u1(params[0])),
            GateKind::U3 => GateMatrix::One(u3(params[0], params[1], params[2])),
            GateKind::Sx => GateMatrix::One(sx()),
            GateKind::X => GateMatrix::One([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
            GateKind::H => GateMatrix::One(hadamard()),
            GateKind::SqrtH => GateMatrix::One(sqrt_h()),
            GateKind::Cz => GateMatrix::Two(cz()),
            GateKind::Cnot => GateMatrix::Two(controlled(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])),
            GateKind::Cu3 => GateMatrix::Two(controlled(&u3(params[0], params[1], params[2]))),
            GateKind::Rzz => GateMatrix::Two(rzz(params[0])),
            GateKind::Rxx => GateMatrix::Two(rxx(params[0])),
            GateKind::Rzx => GateMatrix::Two(rzx(params[0])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One(Matrix2),
    Two(Matrix4),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rx(t: f64) -> Matrix2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

fn ry(t: f64) -> Matrix2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

fn rz(t: f64) -> Matrix2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
}

fn u1(lambda: f64) -> Matrix2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, lambda)]]
}

fn u3(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [
        [c(co, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(co, phi + lambda)],
    ]
}

fn sx() -> Matrix2 {
    [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]]
}

fn hadamard() -> Matrix2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]
}

/// Principal square root ((1+i)I + (1-i)H)/2.
fn sqrt_h() -> Matrix2 {
    let h = hadamard();
    let a = c(0.5, 0.5);
    let b = c(0.5, -0.5);
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            let id = if r == col { 1.0 } else { 0.0 };
            *v = a * id + b * h[r][col];
        }
    }
    m
}

fn cz() -> Matrix4 {
    let mut m = identity4();
    m[3][3] = c(-1.0, 0.0);
    m
}

fn identity4() -> Matrix4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

fn controlled(u: &Matrix2) -> Matrix4 {
    let mut m = identity4();
    for r in 0..2 {
        for col in 0..2 {
            m[2 + r][2 + col] = u[r][col];
        }
    }
    m
}

/// exp(-iθ Z⊗Z / 2): diagonal with phases by parity.
fn rzz(t: f64) -> Matrix4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    let minus = Complex64::from_polar(1.0, -t / 2.0);
    let plus = Complex64::from_polar(1.0, t / 2.0);
    m[0][0] = minus;
    m[1][1] = plus;
    m[2][2] = plus;
    m[3][3] = minus;
    m
}

/// exp(-iθ X⊗X / 2) = cos(θ/2) I - i sin(θ/2) X⊗X.
fn rxx(t: f64) -> Matrix4 {
    let (s, co) = (t / 2.0).sin_cos();
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        m[i][i] = c(co, 0.0);
        m[i][3 - i] = c(0.0, -s);
    }
    m
}

/// exp(-iθ Z⊗X / 2), Z on the first operand.
fn rzx(t: f64) -> Matrix4 {
    let (s, co) = (t / 2.0).sin_cos();
    let mut m = [[c(0.0, 0.0); 4]; 4];
    // Z⊗X maps |0b> -> |0,!b> and |1b> -> -|1,!b>.
    for i in 0..4 {
        m[i][i] = c(co, 0.0);
        let sign = if i < 2 { 1.0 } else { -1.0 };
        m[i ^ 1][i] = c(0.0, -s * sign);
    }
    m
}
