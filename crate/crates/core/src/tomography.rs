//! Six-probe qubit process tomography against devices that may carry memory.
//!
//! Probes are the eigenstates of `σx, σy, σz`. Each probe's mean output
//! Bloch vector is estimated, an affine Bloch map is fitted by least squares
//! and the channel is rebuilt from it. Run against a memory device, the
//! estimate depends on the order in which probes are fed: a sequential
//! schedule (N copies of probe 1, then N of probe 2, ...) and a randomized
//! schedule see different channels unless the device is repeatable.

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use serde::Serialize;

use crate::channel::{choi_distance, depolarizing, ChoiMatrix, KrausChannel};
use crate::device::MemoryDevice;
use crate::error::{Error, Result};
use crate::matrix::{eigh, ComplexMatrix};
use crate::random::rng_stream;
use crate::report::{ser_sig12, ser_sig12_vec};
use crate::state::{check_same_dim, DensityOperator};

/// Upper bound on `6 N` uses per tomography run.
pub const TRANSCRIPT_CAP: usize = 6_000_000;

const ORDER_STREAM: u64 = 0;
const SAMPLING_STREAM: u64 = 1;

/// `|+x>, |-x>, |+y>, |-y>, |0>, |1>` as density operators.
pub fn pauli_probes() -> Vec<DensityOperator> {
    PROBE_BLOCH
        .iter()
        .map(|&r| DensityOperator::from_bloch(r).expect("unit Bloch vector"))
        .collect()
}

const PROBE_BLOCH: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

/// Anything that turns an input state into an output state, possibly
/// changing internally as it does.
pub trait Apparatus {
    fn system_dim(&self) -> usize;
    fn feed(&mut self, rho: &DensityOperator) -> Result<DensityOperator>;
}

impl Apparatus for MemoryDevice {
    fn system_dim(&self) -> usize {
        self.dim_s()
    }

    fn feed(&mut self, rho: &DensityOperator) -> Result<DensityOperator> {
        let (out, next) = self.use_once(rho)?;
        *self = next;
        Ok(out)
    }
}

/// A memoryless channel.
impl Apparatus for KrausChannel {
    fn system_dim(&self) -> usize {
        self.dim()
    }

    fn feed(&mut self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.apply(rho)
    }
}

/// A memory device whose memory is reset to its initial state before every
/// use, so it behaves as the memoryless channel that state induces.
#[derive(Clone, Debug)]
pub struct Resetting(pub MemoryDevice);

impl Apparatus for Resetting {
    fn system_dim(&self) -> usize {
        self.0.dim_s()
    }

    fn feed(&mut self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(self.0.use_once(rho)?.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeOrder {
    Sequential,
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact Pauli expectations on each output.
    Exact,
    /// One ±1 Pauli measurement per use, axes cycling x, y, z per probe.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeStrategy {
    pub kind: ProbeOrder,
    pub shots_per_probe: usize,
    pub seed: u64,
}

impl ProbeStrategy {
    pub fn sequential(shots_per_probe: usize) -> Self {
        ProbeStrategy {
            kind: ProbeOrder::Sequential,
            shots_per_probe,
            seed: 0,
        }
    }

    pub fn randomized(shots_per_probe: usize, seed: u64) -> Self {
        ProbeStrategy {
            kind: ProbeOrder::Randomized,
            shots_per_probe,
            seed,
        }
    }
}

/// Reconstruction options.
#[derive(Clone, Copy, Debug)]
pub struct Reconstruction {
    /// Clip negative Choi eigenvalues and renormalize the trace.
    pub project_to_cp: bool,
    pub tolerance: f64,
}

impl Default for Reconstruction {
    fn default() -> Self {
        Reconstruction {
            project_to_cp: false,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TomographyResult {
    pub strategy: ProbeStrategy,
    pub mode: Mode,
    /// Fitted `T` in `r ↦ T r + t`, row-major.
    #[serde(serialize_with = "ser_rows")]
    pub bloch_map: [[f64; 3]; 3],
    #[serde(serialize_with = "ser_sig12_vec")]
    pub bloch_shift: [f64; 3],
    /// Mean output Bloch vector per probe; `None` if a probe was never drawn.
    #[serde(serialize_with = "ser_probe_means")]
    pub probe_means: Vec<Option<[f64; 3]>>,
    #[serde(skip)]
    pub choi: ChoiMatrix,
    /// Whether the reconstructed map is completely positive.
    pub cp: bool,
    pub projected: bool,
    #[serde(skip)]
    pub estimated: Option<KrausChannel>,
    #[serde(serialize_with = "ser_sig12")]
    pub dist_to_identity: f64,
    #[serde(serialize_with = "ser_sig12")]
    pub dist_to_depolarizing: f64,
}

fn ser_rows<S: serde::Serializer>(m: &[[f64; 3]; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|&x| crate::report::sig12(x)).collect()).collect();
    rows.serialize(s)
}

fn ser_probe_means<S: serde::Serializer>(
    v: &[Option<[f64; 3]>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Option<Vec<String>>> = v
        .iter()
        .map(|o| o.map(|r| r.iter().map(|&x| crate::report::sig12(x)).collect()))
        .collect();
    rows.serialize(s)
}

#[derive(Default, Clone, Copy)]
struct ProbeAccumulator {
    uses: usize,
    sums: [f64; 3],
    counts: [usize; 3],
}

/// Feeds the probe schedule through a copy of `dev` and reconstructs the
/// channel it appears to implement.
pub fn run_tomography<A: Apparatus + Clone>(
    dev: &A,
    strategy: ProbeStrategy,
    mode: Mode,
    options: Reconstruction,
) -> Result<TomographyResult> {
    check_same_dim(2, dev.system_dim(), "tomography system")?;
    let n = strategy.shots_per_probe;
    if n == 0 {
        return Err(Error::InvalidArgument("shots_per_probe must be at least 1".into()));
    }
    let total = n.checked_mul(6).filter(|&t| t <= TRANSCRIPT_CAP).ok_or_else(|| {
        Error::InvalidArgument(format!("6 x {n} uses exceed the cap of {TRANSCRIPT_CAP}"))
    })?;

    let probes = pauli_probes();
    let mut order_rng = rng_stream(strategy.seed, ORDER_STREAM);
    let mut sample_rng = rng_stream(strategy.seed, SAMPLING_STREAM);
    let mut acc = [ProbeAccumulator::default(); 6];
    let mut dev = dev.clone();
    for k in 0..total {
        let p = match strategy.kind {
            ProbeOrder::Sequential => k / n,
            ProbeOrder::Randomized => order_rng.random_range(0..6),
        };
        let out = dev.feed(&probes[p]).map_err(|e| e.at_step(k + 1))?;
        let r = out.bloch_vector();
        let a = &mut acc[p];
        match mode {
            Mode::Exact => {
                for axis in 0..3 {
                    a.sums[axis] += r[axis];
                    a.counts[axis] += 1;
                }
            }
            Mode::Sampled => {
                let axis = a.uses % 3;
                let up = sample_rng.random::<f64>() < (1.0 + r[axis]) / 2.0;
                a.sums[axis] += if up { 1.0 } else { -1.0 };
                a.counts[axis] += 1;
            }
        }
        a.uses += 1;
    }

    let probe_means: Vec<Option<[f64; 3]>> = acc
        .iter()
        .map(|a| {
            (a.uses > 0).then(|| {
                let mut m = [0.0; 3];
                for axis in 0..3 {
                    if a.counts[axis] > 0 {
                        m[axis] = a.sums[axis] / a.counts[axis] as f64;
                    }
                }
                m
            })
        })
        .collect();

    let pairs: Vec<([f64; 3], [f64; 3])> = probe_means
        .iter()
        .zip(PROBE_BLOCH)
        .filter_map(|(m, input)| m.map(|out| (input, out)))
        .collect();
    let (bloch_map, bloch_shift) = fit_affine(&pairs)?;
    let raw = affine_to_choi(&bloch_map, &bloch_shift);
    let cp = raw.is_cp(options.tolerance);
    let (choi, projected) = if !cp && options.project_to_cp {
        (project_to_cp(&raw)?, true)
    } else {
        (raw, false)
    };
    let estimated = if cp || projected {
        choi.to_kraus(options.tolerance).ok()
    } else {
        None
    };
    let dist_to_identity = choi_distance(&choi, &KrausChannel::identity(2).to_choi())?;
    let dist_to_depolarizing = choi_distance(&choi, &depolarizing(2, 1.0)?.to_choi())?;
    Ok(TomographyResult {
        strategy,
        mode,
        bloch_map,
        bloch_shift,
        probe_means,
        choi,
        cp,
        projected,
        estimated,
        dist_to_identity,
        dist_to_depolarizing,
    })
}

/// Least-squares fit of `out = T in + t` over (input, output) Bloch pairs.
pub fn fit_affine(pairs: &[([f64; 3], [f64; 3])]) -> Result<([[f64; 3]; 3], [f64; 3])> {
    let mut normal = Matrix4::<f64>::zeros();
    let mut rhs = [Vector4::<f64>::zeros(); 3];
    for (input, output) in pairs {
        let x = Vector4::new(input[0], input[1], input[2], 1.0);
        normal += x * x.transpose();
        for a in 0..3 {
            rhs[a] += x * output[a];
        }
    }
    let lu = normal.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::InvalidArgument(
            "probe outputs do not determine the affine map (too few distinct probes)".into(),
        ));
    }
    let mut matrix = [[0.0; 3]; 3];
    let mut shift = [0.0; 3];
    for a in 0..3 {
        let sol = lu.solve(&rhs[a]).expect("nonsingular");
        matrix[a] = [sol[0], sol[1], sol[2]];
        shift[a] = sol[3];
    }
    Ok((matrix, shift))
}

/// Choi matrix of the (trace-preserving) affine Bloch map. For any `X`,
/// `E(X) = [Tr X (I + t·σ) + Σ_b Tr(X σ_b) Σ_a T_ab σ_a] / 2`.
pub fn affine_to_choi(matrix: &[[f64; 3]; 3], shift: &[f64; 3]) -> ChoiMatrix {
    let paulis = crate::pauli::paulis();
    let mut image_identity = ComplexMatrix::identity(2);
    for a in 0..3 {
        image_identity = &image_identity + &paulis[a].matrix().scale(shift[a]);
    }
    let images: Vec<ComplexMatrix> = (0..3)
        .map(|b| {
            let mut m = ComplexMatrix::zeros(2, 2);
            for a in 0..3 {
                m = &m + &paulis[a].matrix().scale(matrix[a][b]);
            }
            m
        })
        .collect();
    let mut c = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let mut unit = ComplexMatrix::zeros(2, 2);
            unit[(i, j)] = num_complex::Complex64::new(1.0, 0.0);
            let mut image = image_identity.scale_complex(unit.trace());
            for b in 0..3 {
                image = &image + &images[b].scale_complex((&unit * paulis[b].matrix()).trace());
            }
            let image = image.scale(0.5);
            for o in 0..2 {
                for p in 0..2 {
                    c[(i * 2 + o, j * 2 + p)] = image[(o, p)] * 0.5;
                }
            }
        }
    }
    ChoiMatrix::from_matrix(2, c).expect("4x4")
}

/// Clips negative eigenvalues and renormalizes to unit trace. The result is
/// completely positive but in general only approximately trace preserving.
pub fn project_to_cp(choi: &ChoiMatrix) -> Result<ChoiMatrix> {
    let dec = eigh(choi.matrix(), 1e-6)?;
    let clipped = dec.map_spectrum(|x| x.max(0.0));
    let tr = clipped.trace().re;
    if tr <= 0.0 {
        return Err(Error::InvalidArgument("projection removed the whole Choi matrix".into()));
    }
    ChoiMatrix::from_matrix(choi.dim(), clipped.scale(1.0 / tr))
}

/// Both probe orderings against the same device.
#[derive(Clone, Debug, Serialize)]
pub struct StrategyComparison {
    pub sequential: TomographyResult,
    pub randomized: TomographyResult,
    #[serde(serialize_with = "ser_sig12")]
    pub inter_estimate_distance: f64,
}

pub fn compare_strategies<A: Apparatus + Clone>(
    dev: &A,
    shots_per_probe: usize,
    seed: u64,
    mode: Mode,
    options: Reconstruction,
) -> Result<StrategyComparison> {
    let sequential = run_tomography(
        dev,
        ProbeStrategy {
            kind: ProbeOrder::Sequential,
            shots_per_probe,
            seed,
        },
        mode,
        options,
    )?;
    let randomized = run_tomography(dev, ProbeStrategy::randomized(shots_per_probe, seed), mode, options)?;
    let inter_estimate_distance = choi_distance(&sequential.choi, &randomized.choi)?;
    Ok(StrategyComparison {
        sequential,
        randomized,
        inter_estimate_distance,
    })
}
