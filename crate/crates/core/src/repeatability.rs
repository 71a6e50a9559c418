//! Repeatability of channels implemented by memory devices.
//!
//! A device is n-repeatable for a target channel when the channel it induces
//! is the same on each of its first n uses, whatever the inputs. This module
//! provides:
//!
//! * the controlled-U dilation `U = Σ_j |j><j| ⊗ U_j` of a random unitary
//!   channel, whose memory diagonal (and hence induced channel) never moves;
//! * empirical repeatability checks against a target channel;
//! * the entropy bound `n Δ ≤ S(ξ_{n+1}) - S(ξ_1) ≤ log2 dim M` that caps how
//!   many times a nonunital channel can be repeated with a finite memory;
//! * the shift-register device with memory `ξ^{⊗n}`, exactly n-repeatable for
//!   any channel;
//! * the check that a maximally mixed memory always induces a unital channel.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::channel::{choi_distance, entropy_deficit, is_unital, ChoiMatrix, KrausChannel, PredicateCheck, RandomUnitarySpec};
use crate::device::{MemoryDevice, UsageTranscript};
use crate::error::{Error, Result};
use crate::matrix::{tensor_all, ComplexMatrix, ProductSpace, C_ZERO};
use crate::random::{random_state, random_unitary, rng_from_seed};
use crate::report::{ser_sig12, ser_sig12_opt, ser_sig12_vec};
use crate::state::{
    check_same_dim, shannon_entropy, validate_density, von_neumann_entropy, DensityOperator, UnitaryOperator,
};
use crate::tomography::pauli_probes;

/// Choi distance separating numerical noise from genuine memory drift.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

/// Largest total dimension (memory × system) a constructed device may have.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// Slack used for every entropy inequality.
pub const ENTROPY_SLACK: f64 = 1e-9;

/// Controlled-U device together with the spec it was built from.
#[derive(Clone, Debug)]
pub struct ControlledU {
    spec: RandomUnitarySpec,
    device: MemoryDevice,
}

impl ControlledU {
    pub fn spec(&self) -> &RandomUnitarySpec {
        &self.spec
    }

    pub fn device(&self) -> &MemoryDevice {
        &self.device
    }

    pub fn into_device(self) -> MemoryDevice {
        self.device
    }

    /// The random unitary channel the device is meant to implement.
    pub fn target(&self) -> KrausChannel {
        crate::channel::random_unitary_channel(&self.spec)
    }
}

/// Builds `U = Σ_j |j><j| ⊗ U_j` with memory diagonal `p`.
///
/// `coherences`, if given, supplies the off-diagonal entries of the memory
/// state; its diagonal is overwritten with the probabilities.
pub fn controlled_u_device(
    spec: &RandomUnitarySpec,
    coherences: Option<&ComplexMatrix>,
    tolerance: f64,
) -> Result<ControlledU> {
    let k = spec.len();
    let ds = spec.system_dim();
    let mut u = ComplexMatrix::zeros(k * ds, k * ds);
    for (j, uj) in spec.unitaries().iter().enumerate() {
        for r in 0..ds {
            for c in 0..ds {
                u[(j * ds + r, j * ds + c)] = uj.matrix()[(r, c)];
            }
        }
    }
    let mut xi = match coherences {
        Some(c) => {
            check_same_dim(k, c.square_dim()?, "memory coherences")?;
            c.clone()
        }
        None => ComplexMatrix::zeros(k, k),
    };
    for (j, &p) in spec.probs().iter().enumerate() {
        xi[(j, j)] = Complex64::new(p, 0.0);
    }
    let memory = validate_density(xi, tolerance).map_err(|e| Error::InvalidCoherences(Box::new(e)))?;
    let device = MemoryDevice::new(UnitaryOperator::new_unchecked(u), k, ds, memory)?;
    Ok(ControlledU {
        spec: spec.clone(),
        device,
    })
}

/// Where the inputs of a repeatability run come from.
#[derive(Clone, Debug)]
pub enum InputSource {
    /// The same state on every use.
    Fixed(DensityOperator),
    /// Independent random states from a seeded generator.
    SeededRandom(u64),
    /// One constant-input run per probe state; per-step maximum deviation.
    ///
    /// For qubits the probes are the six Pauli eigenstates and `I/2`; for
    /// larger systems the computational basis, the Fourier basis and `I/d`.
    WorstOfSet,
}

/// Per-step Choi distance between the induced and the target channel.
#[derive(Clone, Debug, Serialize)]
pub struct RepeatabilityReport {
    pub n_requested: usize,
    #[serde(serialize_with = "ser_sig12")]
    pub max_choi_deviation: f64,
    /// 1-based index of the first use whose deviation exceeds the threshold.
    pub first_deviating_step: Option<usize>,
    #[serde(serialize_with = "ser_sig12_vec")]
    pub per_step_deviation: Vec<f64>,
    #[serde(serialize_with = "ser_sig12")]
    pub threshold: f64,
}

impl RepeatabilityReport {
    fn from_deviations(per_step_deviation: Vec<f64>, threshold: f64) -> Self {
        let max_choi_deviation = per_step_deviation.iter().copied().fold(0.0, f64::max);
        let first_deviating_step = per_step_deviation.iter().position(|&d| d > threshold).map(|k| k + 1);
        RepeatabilityReport {
            n_requested: per_step_deviation.len(),
            max_choi_deviation,
            first_deviating_step,
            per_step_deviation,
            threshold,
        }
    }

    pub fn passed(&self) -> bool {
        self.first_deviating_step.is_none()
    }
}

/// Probe states used by [`InputSource::WorstOfSet`].
pub fn worst_case_probes(dim: usize) -> Vec<DensityOperator> {
    let mut probes = if dim == 2 {
        pauli_probes()
    } else {
        let mut v: Vec<DensityOperator> = (0..dim).map(|k| DensityOperator::basis(dim, k)).collect();
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / dim as f64);
        for k in 0..dim {
            let amp: Vec<Complex64> = (0..dim).map(|j| omega.powu((j * k) as u32)).collect();
            v.push(DensityOperator::pure(&amp).expect("nonzero"));
        }
        v
    };
    probes.push(DensityOperator::maximally_mixed(dim));
    probes
}

fn deviations_along(
    dev: &MemoryDevice,
    target: &ChoiMatrix,
    n: usize,
    mut next_input: impl FnMut() -> DensityOperator,
) -> Result<Vec<f64>> {
    let mut dev = dev.clone();
    let mut out = Vec::with_capacity(n);
    for step in 1..=n {
        let d = choi_distance(&dev.induced_channel().to_choi(), target).map_err(|e| e.at_step(step))?;
        out.push(d);
        if step < n {
            let (_, next) = dev.use_once(&next_input()).map_err(|e| e.at_step(step))?;
            dev = next;
        }
    }
    Ok(out)
}

/// Runs `n` uses and compares each use's induced channel with `target`.
pub fn check_repeatable(
    dev: &MemoryDevice,
    target: &KrausChannel,
    n: usize,
    source: &InputSource,
    threshold: f64,
) -> Result<RepeatabilityReport> {
    check_same_dim(dev.dim_s(), target.dim(), "repeatability target")?;
    let target = target.to_choi();
    let ds = dev.dim_s();
    let per_step = match source {
        InputSource::Fixed(rho) => {
            check_same_dim(ds, rho.dim(), "fixed input")?;
            deviations_along(dev, &target, n, || rho.clone())?
        }
        InputSource::SeededRandom(seed) => {
            let mut rng = rng_from_seed(*seed);
            deviations_along(dev, &target, n, || random_state(ds, &mut rng))?
        }
        InputSource::WorstOfSet => {
            let mut worst = vec![0.0; n];
            for probe in worst_case_probes(ds) {
                let devs = deviations_along(dev, &target, n, || probe.clone())?;
                for (w, d) in worst.iter_mut().zip(devs) {
                    *w = f64::max(*w, d);
                }
            }
            worst
        }
    };
    Ok(RepeatabilityReport::from_deviations(per_step, threshold))
}

/// Outcome of the memory-diagonal preservation check for controlled-U devices.
#[derive(Clone, Debug, Serialize)]
pub struct DiagonalReport {
    pub samples: usize,
    /// `max_k max_j |<j|ξ_k|j> - p_j|` along the simulated run.
    #[serde(serialize_with = "ser_sig12")]
    pub max_diagonal_drift: f64,
    /// Largest deviation of the simulated coherences from
    /// `ξ_jk Tr[U_j ρ U_k^dagger]`.
    #[serde(serialize_with = "ser_sig12")]
    pub max_coherence_error: f64,
}

/// Feeds `samples` random inputs through a controlled-U device and checks
/// that the memory diagonal stays at `p` while each coherence `ξ_jk` is
/// multiplied by `Tr[U_j ρ U_k^dagger]`.
pub fn diagonal_preservation_check(cu: &ControlledU, samples: usize, seed: u64) -> Result<DiagonalReport> {
    let mut rng = rng_from_seed(seed);
    let probs = cu.spec.probs();
    let us = cu.spec.unitaries();
    let k = probs.len();
    let ds = cu.spec.system_dim();
    let mut dev = cu.device.clone();
    let mut max_diagonal_drift: f64 = 0.0;
    let mut max_coherence_error: f64 = 0.0;
    for step in 1..=samples {
        let rho = random_state(ds, &mut rng);
        let xi = dev.memory().matrix().clone();
        let (_, next) = dev.use_once(&rho).map_err(|e| e.at_step(step))?;
        let updated = next.memory().matrix();
        for j in 0..k {
            max_diagonal_drift = max_diagonal_drift.max((updated[(j, j)] - probs[j]).norm());
            for l in 0..k {
                // Tr[U_j ρ U_l^dagger]
                let factor = (&(us[j].matrix() * rho.matrix()) * &us[l].matrix().adjoint()).trace();
                let predicted = xi[(j, l)] * factor;
                max_coherence_error = max_coherence_error.max((updated[(j, l)] - predicted).norm());
            }
        }
        dev = next;
    }
    Ok(DiagonalReport {
        samples,
        max_diagonal_drift,
        max_coherence_error,
    })
}

/// Largest number of uses compatible with the entropy bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepeatLimit {
    Unbounded,
    /// `floor(log2(dim M) / Δ)`. With `tie` set the ratio was within `1e-12`
    /// of the integer `n`, and `n - 1` is reported alongside it.
    Finite { n: u64, tie: bool },
}

impl RepeatLimit {
    /// Limit from `log2(mem_dim) / delta`.
    pub fn from_ratio(mem_dim: usize, delta: f64, tolerance: f64) -> Self {
        if delta <= tolerance {
            return RepeatLimit::Unbounded;
        }
        let ratio = (mem_dim as f64).log2() / delta;
        let nearest = ratio.round();
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-12 {
            RepeatLimit::Finite {
                n: nearest as u64,
                tie: true,
            }
        } else {
            RepeatLimit::Finite {
                n: ratio.floor() as u64,
                tie: false,
            }
        }
    }

    pub fn value(&self) -> Option<u64> {
        match self {
            RepeatLimit::Unbounded => None,
            RepeatLimit::Finite { n, .. } => Some(*n),
        }
    }
}

impl Serialize for RepeatLimit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            RepeatLimit::Unbounded => s.serialize_str("unbounded"),
            RepeatLimit::Finite { n, tie: false } => s.serialize_u64(*n),
            RepeatLimit::Finite { n, tie: true } => {
                let mut m = s.serialize_map(Some(3))?;
                m.serialize_entry("n", n)?;
                m.serialize_entry("alt", &(n - 1))?;
                m.serialize_entry("tie", &true)?;
                m.end()
            }
        }
    }
}

/// Entropy-deficit bound for repeating a channel with a finite memory.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "ser_sig12")]
    pub delta_at_mixture: f64,
    #[serde(serialize_with = "ser_sig12")]
    pub delta_max_estimate: f64,
    /// Set when `delta_max_estimate` is only `Δ(I/d)` (systems beyond qubits).
    pub delta_max_is_lower_bound: bool,
    pub mem_dim: usize,
    pub n_max_mixture: RepeatLimit,
    pub n_max_estimate: RepeatLimit,
}

/// Affine Bloch representation `r ↦ T r + t` of a qubit channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAffine {
    pub matrix: [[f64; 3]; 3],
    pub shift: [f64; 3],
}

impl BlochAffine {
    pub fn of_channel(ch: &KrausChannel) -> Result<Self> {
        check_same_dim(2, ch.dim(), "Bloch representation")?;
        let paulis = crate::pauli::paulis();
        let half_identity = ComplexMatrix::identity(2).scale(0.5);
        let center = ch.apply_matrix(&half_identity)?;
        let mut shift = [0.0; 3];
        let mut matrix = [[0.0; 3]; 3];
        for (a, pa) in paulis.iter().enumerate() {
            shift[a] = (pa.matrix() * &center).trace().re;
        }
        for (b, pb) in paulis.iter().enumerate() {
            let image = ch.apply_matrix(&pb.matrix().scale(0.5))?;
            for (a, pa) in paulis.iter().enumerate() {
                matrix[a][b] = (pa.matrix() * &image).trace().re;
            }
        }
        Ok(BlochAffine { matrix, shift })
    }

    pub fn apply(&self, r: [f64; 3]) -> [f64; 3] {
        let mut out = self.shift;
        for (a, row) in self.matrix.iter().enumerate() {
            out[a] += row[0] * r[0] + row[1] * r[1] + row[2] * r[2];
        }
        out
    }
}

fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Entropy of a qubit with Bloch vector length `len`.
fn bloch_entropy(len: f64) -> f64 {
    let p = (1.0 + len.min(1.0)) / 2.0;
    shannon_entropy(&[p, 1.0 - p])
}

/// Maximizes `Δ(r) = S(r) - S(T r + t)` over the Bloch ball: a cubic grid
/// with `points` samples per axis, then a shrinking pattern search.
/// Returns `(Δ_max, argmax)`.
pub fn qubit_delta_max(affine: &BlochAffine, points: usize) -> ([f64; 3], f64) {
    let delta = |r: [f64; 3]| bloch_entropy(norm3(r)) - bloch_entropy(norm3(affine.apply(r)));
    let points = points.max(2);
    let step = 2.0 / (points - 1) as f64;
    let mut best = ([0.0; 3], delta([0.0; 3]));
    for i in 0..points {
        let x = -1.0 + i as f64 * step;
        for j in 0..points {
            let y = -1.0 + j as f64 * step;
            if x * x + y * y > 1.0 {
                continue;
            }
            for k in 0..points {
                let z = -1.0 + k as f64 * step;
                let r = [x, y, z];
                if x * x + y * y + z * z > 1.0 {
                    continue;
                }
                let d = delta(r);
                if d > best.1 {
                    best = (r, d);
                }
            }
        }
    }
    let project = |r: [f64; 3]| {
        let n = norm3(r);
        if n > 1.0 {
            [r[0] / n, r[1] / n, r[2] / n]
        } else {
            r
        }
    };
    let mut h = step;
    while h > 1e-12 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut r = best.0;
                r[axis] += sign * h;
                let r = project(r);
                let d = delta(r);
                if d > best.1 {
                    best = (r, d);
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best
}

/// Grid resolution of the qubit `Δ_max` search.
pub const BLOCH_GRID_POINTS: usize = 201;

/// Evaluates the entropy-deficit witness at `I/d` and, for qubits, the
/// maximum deficit over all states, and turns both into repetition limits.
pub fn repeatability_bound(ch: &KrausChannel, mem_dim: usize, tolerance: f64) -> Result<BoundReport> {
    repeatability_bound_with_grid(ch, mem_dim, tolerance, BLOCH_GRID_POINTS)
}

pub fn repeatability_bound_with_grid(
    ch: &KrausChannel,
    mem_dim: usize,
    tolerance: f64,
    grid_points: usize,
) -> Result<BoundReport> {
    if mem_dim == 0 {
        return Err(Error::InvalidArgument("memory dimension must be positive".into()));
    }
    let d = ch.dim();
    let delta_at_mixture = entropy_deficit(ch, &DensityOperator::maximally_mixed(d))?;
    let (delta_max_estimate, delta_max_is_lower_bound) = if d == 2 {
        let (_, dmax) = qubit_delta_max(&BlochAffine::of_channel(ch)?, grid_points);
        (dmax.max(delta_at_mixture), false)
    } else {
        (delta_at_mixture, true)
    };
    Ok(BoundReport {
        delta_at_mixture,
        delta_max_estimate,
        delta_max_is_lower_bound,
        mem_dim,
        n_max_mixture: RepeatLimit::from_ratio(mem_dim, delta_at_mixture, tolerance),
        n_max_estimate: RepeatLimit::from_ratio(mem_dim, delta_max_estimate, tolerance),
    })
}

/// Accumulated entropy balance after the first `n` uses.
#[derive(Clone, Debug, Serialize)]
pub struct ChainPrefix {
    pub n: usize,
    /// `Σ_{k≤n} [S(ρ_k) - S(E_k[ρ_k])]`; equals `n Δ(ρ)` for a repeatable
    /// device fed a constant input.
    #[serde(serialize_with = "ser_sig12")]
    pub accumulated_deficit: f64,
    /// `S(ξ_{n+1}) - S(ξ_1)`.
    #[serde(serialize_with = "ser_sig12")]
    pub memory_entropy_gain: f64,
}

/// Result of auditing a transcript against the entropy chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub steps: usize,
    pub mem_dim: usize,
    #[serde(serialize_with = "ser_sig12")]
    pub log_mem_dim: f64,
    pub constant_input: bool,
    /// `Δ` of the first use; with a constant input, `n Δ` is the bound's
    /// left-hand side whenever the device is repeatable.
    #[serde(serialize_with = "ser_sig12_opt")]
    pub first_step_deficit: Option<f64>,
    pub prefixes: Vec<ChainPrefix>,
    /// `min_k [S(E_k[ρ_k]) + S(ξ_{k+1}) - S(ρ_k) - S(ξ_k)]`.
    #[serde(serialize_with = "ser_sig12")]
    pub worst_subadditivity_margin: f64,
    /// `max_k |S(ξ_k) + S(ρ_k) - S(joint_k)|`, when joint entropies were recorded.
    #[serde(serialize_with = "ser_sig12_opt")]
    pub max_conservation_residual: Option<f64>,
    /// Smallest prefix length at which an inequality fails.
    pub first_violation: Option<usize>,
    pub passed: bool,
}

/// Checks, for every prefix of the transcript,
/// `Σ_k Δ_k ≤ S(ξ_{n+1}) - S(ξ_1) ≤ log2 dim M`, together with per-step
/// subadditivity and (when recorded) per-step entropy conservation.
/// All entropies are recomputed from the stored states.
pub fn entropy_chain_check(t: &UsageTranscript, mem_dim: usize) -> Result<ChainReport> {
    t.check_shape()?;
    check_same_dim(mem_dim, t.memory_states[0].dim(), "transcript memory")?;
    let n = t.len();
    let log_mem_dim = (mem_dim as f64).log2();
    let s_in: Vec<f64> = t.inputs.iter().map(von_neumann_entropy).collect();
    let s_out: Vec<f64> = t.outputs.iter().map(von_neumann_entropy).collect();
    let s_mem: Vec<f64> = t.memory_states.iter().map(von_neumann_entropy).collect();
    let constant_input = t.inputs.windows(2).all(|w| w[0].matrix().max_abs_diff(w[1].matrix()) <= 1e-12);

    let mut first_violation: Option<usize> = None;
    let flag = |k: usize, first: &mut Option<usize>| {
        if first.is_none_or(|f| k < f) {
            *first = Some(k);
        }
    };

    let mut worst_subadditivity_margin = f64::INFINITY;
    let mut max_conservation: Option<f64> = None;
    let mut prefixes = Vec::with_capacity(n);
    let mut accumulated = 0.0;
    for k in 0..n {
        let margin = s_out[k] + s_mem[k + 1] - s_in[k] - s_mem[k];
        worst_subadditivity_margin = worst_subadditivity_margin.min(margin);
        if margin < -ENTROPY_SLACK {
            flag(k + 1, &mut first_violation);
        }
        if let Some(&joint) = t.joint_entropies.get(k) {
            let r = (s_mem[k] + s_in[k] - joint).abs();
            max_conservation = Some(max_conservation.map_or(r, |m: f64| m.max(r)));
            if r > ENTROPY_SLACK {
                flag(k + 1, &mut first_violation);
            }
        }
        accumulated += s_in[k] - s_out[k];
        let gain = s_mem[k + 1] - s_mem[0];
        if accumulated > gain + ENTROPY_SLACK || gain > log_mem_dim + ENTROPY_SLACK {
            flag(k + 1, &mut first_violation);
        }
        prefixes.push(ChainPrefix {
            n: k + 1,
            accumulated_deficit: accumulated,
            memory_entropy_gain: gain,
        });
    }
    if n == 0 {
        worst_subadditivity_margin = 0.0;
    }
    Ok(ChainReport {
        steps: n,
        mem_dim,
        log_mem_dim,
        constant_input,
        first_step_deficit: (n > 0).then(|| s_in[0] - s_out[0]),
        prefixes,
        worst_subadditivity_margin,
        max_conservation_residual: max_conservation,
        first_violation,
        passed: first_violation.is_none(),
    })
}

/// Device whose memory is `n` copies of the inner memory `ξ`.
///
/// Each use applies the inner interaction to the first memory slot and the
/// input, then cycles the slots one to the left so the used slot moves to
/// the end. The first `n` inputs each meet a fresh copy of `ξ`.
pub fn shift_register_device(inner: &MemoryDevice, n: usize, size_cap: usize) -> Result<MemoryDevice> {
    if n == 0 {
        return Err(Error::InvalidArgument("shift register needs at least one slot".into()));
    }
    let dx = inner.dim_m();
    let ds = inner.dim_s();
    let dim_m = u32::try_from(n)
        .ok()
        .and_then(|e| dx.checked_pow(e))
        .ok_or(Error::SizeCap { dim: usize::MAX, cap: size_cap })?;
    let total = dim_m.checked_mul(ds).ok_or(Error::SizeCap { dim: usize::MAX, cap: size_cap })?;
    if total > size_cap {
        return Err(Error::SizeCap { dim: total, cap: size_cap });
    }
    let u = inner.unitary().matrix();
    let rest_dim = dim_m / dx;
    let mut w = ComplexMatrix::zeros(total, total);
    for col_mem in 0..dim_m {
        let a1 = col_mem / rest_dim;
        let rest = col_mem % rest_dim;
        for s in 0..ds {
            let col = col_mem * ds + s;
            for a1p in 0..dx {
                let row_mem = rest * dx + a1p;
                for sp in 0..ds {
                    let amp = u[(a1p * ds + sp, a1 * ds + s)];
                    if amp != C_ZERO {
                        w[(row_mem * ds + sp, col)] = amp;
                    }
                }
            }
        }
    }
    let slots = vec![inner.memory().matrix().clone(); n];
    let memory = DensityOperator::new_unchecked(tensor_all(&slots));
    MemoryDevice::new(UnitaryOperator::new_unchecked(w), dim_m, ds, memory)
}

/// Stinespring device for a Kraus channel: memory of dimension equal to the
/// number of Kraus operators, initialized to `|0>`, with
/// `U (|0> ⊗ |s>) = Σ_k |k> ⊗ K_k |s>` completed to a unitary by
/// Gram-Schmidt over the computational basis.
pub fn stinespring_device(ch: &KrausChannel) -> Result<MemoryDevice> {
    let r = ch.kraus().len();
    let ds = ch.dim();
    let total = r * ds;
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(total);
    for s in 0..ds {
        let mut v = vec![C_ZERO; total];
        for (k, kr) in ch.kraus().iter().enumerate() {
            for o in 0..ds {
                v[k * ds + o] = kr[(o, s)];
            }
        }
        columns.push(v);
    }
    let mut candidate = 0;
    while columns.len() < total {
        if candidate >= total {
            return Err(Error::InvalidArgument("could not complete the isometry to a unitary".into()));
        }
        let mut v = vec![C_ZERO; total];
        v[candidate] = Complex64::new(1.0, 0.0);
        candidate += 1;
        for _ in 0..2 {
            for c in &columns {
                let proj: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(c) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            columns.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let u = ComplexMatrix::from_fn(total, total, |i, j| columns[j][i]);
    let unitary = crate::state::validate_unitary(u, 1e-9)?;
    MemoryDevice::new(unitary, r, ds, DensityOperator::basis(r, 0))
}

/// Unitality of the channel induced by `u` when the memory is `I/dim_M`.
pub fn mixed_memory_unitality(u: &UnitaryOperator, space: &ProductSpace, tolerance: f64) -> Result<PredicateCheck> {
    let dims = space.factor_dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument("memory ⊗ system space expected".into()));
    }
    let dev = MemoryDevice::new(u.clone(), dims[0], dims[1], DensityOperator::maximally_mixed(dims[0]))?;
    Ok(is_unital(&dev.induced_channel(), tolerance))
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitalityReport {
    pub samples: usize,
    #[serde(serialize_with = "ser_sig12")]
    pub worst_residual: f64,
    pub all_unital: bool,
}

/// Samples random interactions on `space` and checks that a maximally mixed
/// memory makes every induced channel unital.
pub fn mixed_memory_unitality_check(
    space: &ProductSpace,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<UnitalityReport> {
    let mut rng = rng_from_seed(seed);
    let mut worst_residual: f64 = 0.0;
    let mut all_unital = true;
    for _ in 0..samples {
        let u = random_unitary(space.total_dim(), &mut rng);
        let check = mixed_memory_unitality(&u, space, tolerance)?;
        worst_residual = worst_residual.max(check.residual);
        all_unital &= check.holds;
    }
    Ok(UnitalityReport {
        samples,
        worst_residual,
        all_unital,
    })
}
