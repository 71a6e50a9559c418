//! Unitary memory model: a fixed interaction `U` on memory ⊗ system and a
//! memory state that is carried from one use to the next.
//!
//! One use maps `ξ ⊗ ρ` to `U (ξ ⊗ ρ) U^dagger`; the system marginal is the
//! output and the memory marginal becomes the memory for the next use.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{choi_distance, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::{partial_trace, tensor, ComplexMatrix, ProductSpace, C_ZERO};
use crate::state::{
    check_same_dim, entropy_of_matrix, von_neumann_entropy, DensityOperator, UnitaryOperator,
};

/// Interaction unitary plus the current memory state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeviceJson", into = "DeviceJson")]
pub struct MemoryDevice {
    unitary: UnitaryOperator,
    space: ProductSpace,
    memory: DensityOperator,
}

#[derive(Serialize, Deserialize)]
struct DeviceJson {
    dim_m: usize,
    dim_s: usize,
    unitary: UnitaryOperator,
    memory: DensityOperator,
}

impl TryFrom<DeviceJson> for MemoryDevice {
    type Error = Error;

    fn try_from(raw: DeviceJson) -> Result<Self> {
        MemoryDevice::new(raw.unitary, raw.dim_m, raw.dim_s, raw.memory)
    }
}

impl From<MemoryDevice> for DeviceJson {
    fn from(dev: MemoryDevice) -> Self {
        DeviceJson {
            dim_m: dev.dim_m(),
            dim_s: dev.dim_s(),
            unitary: dev.unitary,
            memory: dev.memory,
        }
    }
}

impl MemoryDevice {
    pub fn new(unitary: UnitaryOperator, dim_m: usize, dim_s: usize, memory: DensityOperator) -> Result<Self> {
        let space = ProductSpace::memory_system(dim_m, dim_s)?;
        check_same_dim(space.total_dim(), unitary.dim(), "device unitary")?;
        check_same_dim(dim_m, memory.dim(), "device memory")?;
        Ok(MemoryDevice {
            unitary,
            space,
            memory,
        })
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.unitary
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn memory(&self) -> &DensityOperator {
        &self.memory
    }

    pub fn dim_m(&self) -> usize {
        self.space.factor_dims()[ProductSpace::MEMORY]
    }

    pub fn dim_s(&self) -> usize {
        self.space.factor_dims()[ProductSpace::SYSTEM]
    }

    /// Same interaction with a different memory state.
    pub fn with_memory(&self, memory: DensityOperator) -> Result<Self> {
        check_same_dim(self.dim_m(), memory.dim(), "device memory")?;
        Ok(MemoryDevice {
            unitary: self.unitary.clone(),
            space: self.space.clone(),
            memory,
        })
    }

    /// Joint state `U (ξ ⊗ ρ) U^dagger` after one interaction.
    pub fn collide(&self, rho: &DensityOperator) -> Result<ComplexMatrix> {
        check_same_dim(self.dim_s(), rho.dim(), "device input")?;
        let joint = tensor(self.memory.matrix(), rho.matrix());
        Ok(self.unitary.matrix().conjugate(&joint))
    }

    /// One use: returns the system output and the device with updated memory.
    pub fn use_once(&self, rho: &DensityOperator) -> Result<(DensityOperator, MemoryDevice)> {
        let joint = self.collide(rho)?;
        let (output, memory) = self.split(&joint)?;
        Ok((output, self.with_memory(memory)?))
    }

    fn split(&self, joint: &ComplexMatrix) -> Result<(DensityOperator, DensityOperator)> {
        let output = partial_trace(joint, &self.space, ProductSpace::SYSTEM)?;
        let memory = partial_trace(joint, &self.space, ProductSpace::MEMORY)?;
        Ok((DensityOperator::new_unchecked(output), DensityOperator::new_unchecked(memory)))
    }

    /// Block `(<i| ⊗ I) U (|m> ⊗ I)` of the interaction, a `dim_s × dim_s` matrix.
    fn system_block(&self, i: usize, m: usize) -> ComplexMatrix {
        let ds = self.dim_s();
        let u = self.unitary.matrix();
        ComplexMatrix::from_fn(ds, ds, |r, c| u[(i * ds + r, m * ds + c)])
    }

    /// Block `(I ⊗ <s|) U (I ⊗ |t>)` of the interaction, a `dim_m × dim_m` matrix.
    fn memory_block(&self, s: usize, t: usize) -> ComplexMatrix {
        let ds = self.dim_s();
        let dm = self.dim_m();
        let u = self.unitary.matrix();
        ComplexMatrix::from_fn(dm, dm, |r, c| u[(r * ds + s, c * ds + t)])
    }

    /// Channel implemented on the system by the current memory state.
    ///
    /// Kraus operators `√λ_j (<i| ⊗ I) U (|e_j> ⊗ I)` over the eigenpairs of
    /// the memory; zero-weight memory directions are dropped.
    pub fn induced_channel(&self) -> KrausChannel {
        let (dm, ds) = (self.dim_m(), self.dim_s());
        let blocks: Vec<Vec<ComplexMatrix>> = (0..dm)
            .map(|i| (0..dm).map(|m| self.system_block(i, m)).collect())
            .collect();
        let dec = self.memory.eigh();
        let mut kraus = Vec::new();
        for (j, &lambda) in dec.values.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let e = dec.vector(j);
            let s = lambda.sqrt();
            for row in &blocks {
                kraus.push(combine(row, &e, s, ds));
            }
        }
        KrausChannel::from_kraus_unchecked(kraus).expect("blocks are square")
    }

    /// Memory update `ξ ↦ Tr_S[U (ξ ⊗ ρ) U^dagger]` for a fixed input `ρ`,
    /// as a channel on the memory space.
    pub fn memory_map(&self, rho: &DensityOperator) -> Result<KrausChannel> {
        check_same_dim(self.dim_s(), rho.dim(), "device input")?;
        let (dm, ds) = (self.dim_m(), self.dim_s());
        let blocks: Vec<Vec<ComplexMatrix>> = (0..ds)
            .map(|s| (0..ds).map(|t| self.memory_block(s, t)).collect())
            .collect();
        let dec = rho.eigh();
        let mut kraus = Vec::new();
        for (j, &mu) in dec.values.iter().enumerate() {
            if mu <= 0.0 {
                continue;
            }
            let f = dec.vector(j);
            let s = mu.sqrt();
            for row in &blocks {
                kraus.push(combine(row, &f, s, dm));
            }
        }
        KrausChannel::from_kraus_unchecked(kraus)
    }

    /// Feeds `inputs` one after another without any reset.
    pub fn run_sequence(&self, inputs: &[DensityOperator], record: Record) -> Result<UsageTranscript> {
        let mut dev = self.clone();
        let mut t = UsageTranscript {
            inputs: Vec::with_capacity(inputs.len()),
            outputs: Vec::with_capacity(inputs.len()),
            memory_states: vec![self.memory.clone()],
            induced_channels: Vec::new(),
            entropies: vec![von_neumann_entropy(&self.memory)],
            joint_entropies: Vec::new(),
        };
        for (k, rho) in inputs.iter().enumerate() {
            let step = k + 1;
            if record.induced_channels {
                t.induced_channels.push(dev.induced_channel());
            }
            let joint = dev.collide(rho).map_err(|e| e.at_step(step))?;
            if record.joint_entropies {
                t.joint_entropies.push(entropy_of_matrix(&joint));
            }
            let (output, memory) = dev.split(&joint).map_err(|e| e.at_step(step))?;
            t.entropies.push(von_neumann_entropy(&memory));
            t.inputs.push(rho.clone());
            t.outputs.push(output);
            t.memory_states.push(memory.clone());
            dev = dev.with_memory(memory).map_err(|e| e.at_step(step))?;
        }
        Ok(t)
    }
}

/// `s · Σ_m v[m] blocks[m]`.
fn combine(blocks: &[ComplexMatrix], v: &[Complex64], s: f64, n: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(n, n);
    for (b, &c) in blocks.iter().zip(v) {
        if c == C_ZERO {
            continue;
        }
        acc = &acc + &b.scale_complex(c * s);
    }
    acc
}

/// What to capture in a transcript beyond states and memory entropies.
#[derive(Clone, Copy, Debug)]
pub struct Record {
    pub induced_channels: bool,
    pub joint_entropies: bool,
}

impl Default for Record {
    fn default() -> Self {
        Record {
            induced_channels: true,
            joint_entropies: true,
        }
    }
}

impl Record {
    pub fn states_only() -> Self {
        Record {
            induced_channels: false,
            joint_entropies: false,
        }
    }
}

/// Per-use record of a run.
///
/// `memory_states[k]` is the memory before use `k + 1`; `entropies` holds
/// their entropies in bits. `induced_channels[k]` and `joint_entropies[k]`
/// are present only when requested.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UsageTranscript {
    pub inputs: Vec<DensityOperator>,
    pub outputs: Vec<DensityOperator>,
    pub memory_states: Vec<DensityOperator>,
    #[serde(default)]
    pub induced_channels: Vec<KrausChannel>,
    pub entropies: Vec<f64>,
    #[serde(default)]
    pub joint_entropies: Vec<f64>,
}

/// One line of the exported step table.
#[derive(Clone, Debug, Serialize)]
pub struct StepSummary {
    pub step: usize,
    pub input_entropy: f64,
    pub output_entropy: f64,
    pub memory_entropy_before: f64,
    pub memory_entropy_after: f64,
    pub joint_entropy: Option<f64>,
    /// Choi distance of this step's induced channel to the first one.
    pub choi_distance_to_first: Option<f64>,
}

impl UsageTranscript {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Length consistency between the recorded lists.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.inputs.len();
        check_same_dim(n, self.outputs.len(), "transcript outputs")?;
        check_same_dim(n + 1, self.memory_states.len(), "transcript memory states")?;
        check_same_dim(n + 1, self.entropies.len(), "transcript entropies")?;
        if !self.induced_channels.is_empty() {
            check_same_dim(n, self.induced_channels.len(), "transcript induced channels")?;
        }
        if !self.joint_entropies.is_empty() {
            check_same_dim(n, self.joint_entropies.len(), "transcript joint entropies")?;
        }
        Ok(())
    }

    /// Largest deviation between `memory_states[k+1]` and the memory map of
    /// step `k` applied to `memory_states[k]`, recomputed from `unitary`.
    pub fn chain_residual(&self, unitary: &UnitaryOperator) -> Result<f64> {
        self.check_shape()?;
        let dim_m = self.memory_states[0].dim();
        let dim_s = self.inputs.first().map_or(1, |r| r.dim());
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let dev = MemoryDevice::new(unitary.clone(), dim_m, dim_s, self.memory_states[k].clone())?;
            let f = dev.memory_map(&self.inputs[k])?;
            let next = f.apply(&self.memory_states[k])?;
            worst = worst.max(next.matrix().max_abs_diff(self.memory_states[k + 1].matrix()));
        }
        Ok(worst)
    }

    pub fn step_summaries(&self) -> Result<Vec<StepSummary>> {
        self.check_shape()?;
        let first = self.induced_channels.first().map(|c| c.to_choi());
        (0..self.len())
            .map(|k| {
                let choi_distance_to_first = match (&first, self.induced_channels.get(k)) {
                    (Some(c0), Some(ch)) => Some(choi_distance(c0, &ch.to_choi())?),
                    _ => None,
                };
                Ok(StepSummary {
                    step: k + 1,
                    input_entropy: von_neumann_entropy(&self.inputs[k]),
                    output_entropy: von_neumann_entropy(&self.outputs[k]),
                    memory_entropy_before: self.entropies[k],
                    memory_entropy_after: self.entropies[k + 1],
                    joint_entropy: self.joint_entropies.get(k).copied(),
                    choi_distance_to_first,
                })
            })
            .collect()
    }
}

/// Two-qubit SWAP interaction with memory `xi`.
pub fn swap_device(xi: DensityOperator) -> Result<MemoryDevice> {
    check_same_dim(2, xi.dim(), "SWAP memory")?;
    MemoryDevice::new(crate::pauli::swap(), 2, 2, xi)
}

/// Validates a device loaded from untrusted input at a custom tolerance.
pub fn validate_device(dev: &MemoryDevice, tolerance: f64) -> Result<()> {
    crate::state::validate_unitary(dev.unitary.matrix().clone(), tolerance)?;
    crate::state::validate_density(dev.memory.matrix().clone(), tolerance)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_distance, constant_channel, random_unitary_channel, RandomUnitarySpec};
    use crate::random::{random_state, random_unitary, rng_from_seed};

    fn plus() -> DensityOperator {
        DensityOperator::from_bloch([1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_device_passes_input_through() {
        let xi = DensityOperator::from_bloch([0.0, 0.3, 0.1]).unwrap();
        let dev = MemoryDevice::new(UnitaryOperator::identity(4), 2, 2, xi.clone()).unwrap();
        let rho = DensityOperator::from_bloch([0.5, 0.0, -0.5]).unwrap();
        let (out, next) = dev.use_once(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!(next.memory().matrix().max_abs_diff(xi.matrix()) < 1e-15);
        assert!(channel_distance(&dev.induced_channel(), &KrausChannel::identity(2)).unwrap() < 1e-12);
    }

    #[test]
    fn swap_exchanges_memory_and_input() {
        let xi = DensityOperator::basis(2, 0);
        let rho = plus();
        let dev = swap_device(xi.clone()).unwrap();
        let (out, next) = dev.use_once(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(xi.matrix()) < 1e-15);
        assert!(next.memory().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let joint = dev.collide(&rho).unwrap();
        assert!(joint.max_abs_diff(&tensor(rho.matrix(), xi.matrix())) < 1e-15);
    }

    #[test]
    fn swap_induced_and_memory_maps_are_constant() {
        let xi = DensityOperator::from_bloch([0.2, 0.0, 0.7]).unwrap();
        let dev = swap_device(xi.clone()).unwrap();
        assert!(channel_distance(&dev.induced_channel(), &constant_channel(&xi)).unwrap() < 1e-12);
        let rho = DensityOperator::from_bloch([0.0, -0.6, 0.1]).unwrap();
        let f = dev.memory_map(&rho).unwrap();
        assert!(channel_distance(&f, &constant_channel(&rho)).unwrap() < 1e-12);
    }

    #[test]
    fn swap_sequence_shifts_inputs() {
        let xi = DensityOperator::basis(2, 0);
        let dev = swap_device(xi.clone()).unwrap();
        let inputs = vec![
            plus(),
            DensityOperator::basis(2, 1),
            DensityOperator::from_bloch([0.0, 1.0, 0.0]).unwrap(),
        ];
        let t = dev.run_sequence(&inputs, Record::default()).unwrap();
        assert!(t.outputs[0].matrix().max_abs_diff(xi.matrix()) < 1e-15);
        assert!(t.outputs[1].matrix().max_abs_diff(inputs[0].matrix()) < 1e-15);
        assert!(t.outputs[2].matrix().max_abs_diff(inputs[1].matrix()) < 1e-15);
        t.check_shape().unwrap();
        assert!(t.chain_residual(dev.unitary()).unwrap() < 1e-12);
    }

    #[test]
    fn controlled_dephasing_by_hand() {
        // U = |0><0| ⊗ I + |1><1| ⊗ σz, ξ = I/2: output I/2 for |+>.
        let u = UnitaryOperator::new(ComplexMatrix::from_diagonal(&[1.0, 1.0, 1.0, -1.0]), 1e-12).unwrap();
        let dev = MemoryDevice::new(u, 2, 2, DensityOperator::maximally_mixed(2)).unwrap();
        let (out, next) = dev.use_once(&plus()).unwrap();
        assert!(out.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
        assert!((next.memory().matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((next.memory().matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        let spec = RandomUnitarySpec::dephasing(0.5).unwrap();
        assert!(channel_distance(&dev.induced_channel(), &random_unitary_channel(&spec)).unwrap() < 1e-12);
    }

    #[test]
    fn induced_channel_matches_use_once_on_matrix_units() {
        let mut rng = rng_from_seed(5);
        let u = random_unitary(6, &mut rng);
        let xi = random_state(3, &mut rng);
        let dev = MemoryDevice::new(u, 3, 2, xi).unwrap();
        let ch = dev.induced_channel();
        assert!(ch.trace_preservation_residual() < 1e-12);
        let space = dev.space().clone();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = ComplexMatrix::zeros(2, 2);
                e[(i, j)] = Complex64::new(1.0, 0.0);
                let joint = dev.unitary().matrix().conjugate(&tensor(dev.memory().matrix(), &e));
                let direct = partial_trace(&joint, &space, ProductSpace::SYSTEM).unwrap();
                assert!(ch.apply_matrix(&e).unwrap().max_abs_diff(&direct) < 1e-12);
            }
        }
    }

    #[test]
    fn memory_map_reproduces_memory_update() {
        let mut rng = rng_from_seed(9);
        let u = random_unitary(6, &mut rng);
        let dev = MemoryDevice::new(u, 2, 3, random_state(2, &mut rng)).unwrap();
        let rho = random_state(3, &mut rng);
        let f = dev.memory_map(&rho).unwrap();
        assert!(f.trace_preservation_residual() < 1e-12);
        for _ in 0..5 {
            let xi = random_state(2, &mut rng);
            let d = dev.with_memory(xi.clone()).unwrap();
            let (_, next) = d.use_once(&rho).unwrap();
            assert!(f.apply(&xi).unwrap().matrix().max_abs_diff(next.memory().matrix()) < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let dev = swap_device(DensityOperator::basis(2, 0)).unwrap();
        assert!(matches!(
            dev.use_once(&DensityOperator::basis(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let inputs = vec![plus(), DensityOperator::basis(3, 0)];
        assert!(matches!(
            dev.run_sequence(&inputs, Record::default()),
            Err(Error::Step { step: 2, .. })
        ));
        assert!(MemoryDevice::new(UnitaryOperator::identity(4), 2, 3, DensityOperator::basis(2, 0)).is_err());
    }

    #[test]
    fn device_json_round_trip() {
        let dev = swap_device(DensityOperator::basis(2, 1)).unwrap();
        let s = serde_json::to_string(&dev).unwrap();
        assert!(s.starts_with(r#"{"dim_m":2,"dim_s":2,"unitary":"#));
        let back: MemoryDevice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, dev);
    }
}
