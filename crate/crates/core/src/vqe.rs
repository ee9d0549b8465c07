//! Gradients (parameter shift and central differences), the training loop
//! and warm-start strategies.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{prefix_sqrt_h, Circuit, ParamSlot};
use crate::pauli::Hamiltonian;
use crate::simulator::{self, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("circuit has {circuit} qubits but the Hamiltonian has {hamiltonian}")]
    QubitMismatch { circuit: usize, hamiltonian: usize },
    #[error("parameter {index} is not eligible for the shift rule")]
    ShiftNotApplicable { index: usize },
    #[error("energy became NaN at epoch {epoch}")]
    NonFiniteEnergy { epoch: usize },
    #[error("invalid training configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Adam,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum InitStrategy {
    /// i.i.d. uniform in [-π, π).
    RandomUniform,
    /// Every parameter starts at the same angle.
    Constant(f64),
    /// SQRT_H on every qubit ahead of the ansatz, random angles.
    VqeI,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Shift rule where exact, central differences elsewhere.
    Auto,
    ShiftOnly,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub convergence_tol: f64,
    pub convergence_window: usize,
    pub init_strategy: InitStrategy,
    pub seed: u64,
    pub gradient_mode: GradientMode,
    pub fd_step: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::Adam,
            learning_rate: 0.05,
            max_epochs: 200,
            convergence_tol: 1e-6,
            convergence_window: 10,
            init_strategy: InitStrategy::RandomUniform,
            seed: 0,
            gradient_mode: GradientMode::Auto,
            fd_step: 1e-4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::Config("learning_rate must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(TrainError::Config("max_epochs must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(TrainError::Config("fd_step must be positive".into()));
        }
        if self.convergence_window == 0 {
            return Err(TrainError::Config("convergence_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub epoch: usize,
    pub energy: f64,
}

/// Outcome of one training run.
///
/// `trajectory[k]` is the energy at the parameters held at the start of
/// epoch `k + 1`; `final_params` produced `final_energy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub trajectory: Vec<TrajectoryPoint>,
    pub epochs_run: usize,
    pub epochs_to_converge: Option<usize>,
    pub final_energy: f64,
    pub final_params: Vec<f64>,
    pub best_energy: f64,
    pub best_params: Vec<f64>,
    pub gate_count: usize,
    /// Parameter count of the trained circuit.
    pub n_params: usize,
}

/// Energy of a fixed circuit/Hamiltonian pair as a function of the angles.
///
/// Caches basis energies when the Hamiltonian is diagonal.
pub struct EnergyFunction<'a> {
    circuit: &'a Circuit,
    hamiltonian: &'a Hamiltonian,
    initial: Option<&'a StateVector>,
    diagonal: Option<Vec<f64>>,
}

impl<'a> EnergyFunction<'a> {
    pub fn new(circuit: &'a Circuit, hamiltonian: &'a Hamiltonian) -> Result<Self, TrainError> {
        if circuit.n_qubits() != hamiltonian.n_qubits() {
            return Err(TrainError::QubitMismatch {
                circuit: circuit.n_qubits(),
                hamiltonian: hamiltonian.n_qubits(),
            });
        }
        let diagonal = hamiltonian.is_diagonal().then(|| hamiltonian.diagonal_energies());
        Ok(Self { circuit, hamiltonian, initial: None, diagonal })
    }

    pub fn with_initial_state(mut self, initial: &'a StateVector) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector, TrainError> {
        Ok(simulator::run(self.circuit, params, self.initial)?)
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64, TrainError> {
        let state = self.state(params)?;
        Ok(match &self.diagonal {
            Some(energies) => state
                .amplitudes()
                .iter()
                .zip(energies)
                .map(|(a, e)| a.norm_sqr() * e)
                .sum(),
            None => simulator::expectation(&state, self.hamiltonian)?,
        })
    }

    fn shifted(&self, params: &[f64], k: usize, delta: f64) -> Result<f64, TrainError> {
        let mut p = params.to_vec();
        p[k] += delta;
        self.energy(&p)
    }
}

/// Parameters the two-term shift rule handles exactly: bound by exactly one
/// instruction whose kind is generated by a single Pauli string.
pub fn shift_eligible(circuit: &Circuit) -> Vec<bool> {
    let uses = circuit.param_usage();
    let mut eligible = vec![false; circuit.n_params()];
    for ins in circuit.instructions() {
        for slot in &ins.slots {
            if let ParamSlot::Param(i) = *slot {
                eligible[i] = uses[i] == 1 && ins.kind.supports_shift_rule();
            }
        }
    }
    eligible
}

/// d<H>/dθ for every parameter.
pub fn gradient(
    circuit: &Circuit,
    params: &[f64],
    hamiltonian: &Hamiltonian,
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<f64>, TrainError> {
    let f = EnergyFunction::new(circuit, hamiltonian)?;
    gradient_of(&f, params, mode, fd_step)
}

pub fn gradient_of(
    f: &EnergyFunction<'_>,
    params: &[f64],
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<f64>, TrainError> {
    f.circuit().check_params(params).map_err(SimError::from)?;
    let eligible = shift_eligible(f.circuit());
    if mode == GradientMode::ShiftOnly {
        if let Some(index) = eligible.iter().position(|e| !e) {
            return Err(TrainError::ShiftNotApplicable { index });
        }
    }
    (0..params.len())
        .into_par_iter()
        .map(|k| {
            let use_shift = match mode {
                GradientMode::ShiftOnly => true,
                GradientMode::FiniteDifference => false,
                GradientMode::Auto => eligible[k],
            };
            if use_shift {
                Ok((f.shifted(params, k, FRAC_PI_2)? - f.shifted(params, k, -FRAC_PI_2)?) / 2.0)
            } else {
                Ok((f.shifted(params, k, fd_step)? - f.shifted(params, k, -fd_step)?)
                    / (2.0 * fd_step))
            }
        })
        .collect()
}

/// Starting angles for `n_params` parameters under `strategy`.
pub fn initial_params(strategy: InitStrategy, n_params: usize, seed: u64) -> Vec<f64> {
    match strategy {
        InitStrategy::Constant(v) => vec![v; n_params],
        InitStrategy::RandomUniform | InitStrategy::VqeI => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_params).map(|_| rng.random_range(-PI..PI)).collect()
        }
    }
}

/// The circuit `train` actually optimizes for a given strategy.
pub fn training_circuit(circuit: &Circuit, strategy: InitStrategy) -> Circuit {
    match strategy {
        InitStrategy::VqeI => prefix_sqrt_h(circuit),
        _ => circuit.clone(),
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = Self::BETA1 * self.m[k] + (1.0 - Self::BETA1) * grad[k];
            self.v[k] = Self::BETA2 * self.v[k] + (1.0 - Self::BETA2) * grad[k] * grad[k];
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + Self::EPS);
        }
    }
}

/// Minimizes <H> over the circuit's angles.
///
/// Each epoch records the energy of the current angles, stops if the last
/// `convergence_window` energies span less than `convergence_tol`, and
/// otherwise takes one full-gradient optimizer step.
pub fn train(
    circuit: &Circuit,
    hamiltonian: &Hamiltonian,
    cfg: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    cfg.validate()?;
    let circuit = training_circuit(circuit, cfg.init_strategy);
    let f = EnergyFunction::new(&circuit, hamiltonian)?;
    let mut params = initial_params(cfg.init_strategy, circuit.n_params(), cfg.seed);
    let mut adam = Adam::new(params.len());

    let mut trajectory: Vec<TrajectoryPoint> = Vec::with_capacity(cfg.max_epochs);
    let mut best = (f64::INFINITY, params.clone());
    let mut converged_at = None;

    for epoch in 1..=cfg.max_epochs {
        let energy = f.energy(&params)?;
        if energy.is_nan() {
            return Err(TrainError::NonFiniteEnergy { epoch });
        }
        trajectory.push(TrajectoryPoint { epoch, energy });
        if energy < best.0 {
            best = (energy, params.clone());
        }
        if trajectory.len() >= cfg.convergence_window {
            let window = &trajectory[trajectory.len() - cfg.convergence_window..];
            let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.energy), hi.max(p.energy))
            });
            if hi - lo < cfg.convergence_tol {
                converged_at = Some(epoch);
                break;
            }
        }
        if epoch == cfg.max_epochs {
            break;
        }
        let grad = gradient_of(&f, &params, cfg.gradient_mode, cfg.fd_step)?;
        match cfg.optimizer {
            Optimizer::Adam => adam.step(&mut params, &grad, cfg.learning_rate),
            Optimizer::GradientDescent => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= cfg.learning_rate * g;
                }
            }
        }
    }

    let final_energy = trajectory.last().map(|p| p.energy).unwrap_or(f64::NAN);
    Ok(TrainReport {
        epochs_run: trajectory.len(),
        trajectory,
        epochs_to_converge: converged_at,
        final_energy,
        final_params: params,
        best_energy: best.0,
        best_params: best.1,
        gate_count: circuit.gate_count(),
        n_params: circuit.n_params(),
    })
}
