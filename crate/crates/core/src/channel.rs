//! Quantum channels in Kraus and Choi form.
//!
//! Choi matrices are normalized to unit trace and ordered input ⊗ output:
//! `C = (1/d) Σ_ij |i><j| ⊗ E(|i><j|)`. Channel equality is measured by
//! the trace distance between Choi matrices, which lies in `[0, 1]`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigh, trace_norm_hermitian, ComplexMatrix, C_ZERO};
use crate::random::{random_state, random_unitary, rng_from_seed};
use crate::state::{
    check_same_dim, relative_entropy, von_neumann_entropy, DensityOperator, UnitaryOperator,
    DEFAULT_TOLERANCE,
};

/// Trace-preserving completely positive map `ρ ↦ Σ K ρ K^dagger`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KrausJson", into = "KrausJson")]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct KrausJson {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<KrausJson> for KrausChannel {
    type Error = Error;

    fn try_from(raw: KrausJson) -> Result<Self> {
        let ch = KrausChannel::new(raw.kraus, DEFAULT_TOLERANCE)?;
        check_same_dim(raw.dim, ch.dim, "channel JSON dim")?;
        Ok(ch)
    }
}

impl From<KrausChannel> for KrausJson {
    fn from(ch: KrausChannel) -> Self {
        KrausJson {
            dim: ch.dim,
            kraus: ch.kraus,
        }
    }
}

impl KrausChannel {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix>, tolerance: f64) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let residual = ch.trace_preservation_residual();
        if residual > tolerance {
            return Err(Error::NotTracePreserving { residual, tolerance });
        }
        Ok(ch)
    }

    /// Shape checks only.
    pub(crate) fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("Kraus list is empty".into()))?;
        let dim = first.square_dim()?;
        for k in &kraus {
            check_same_dim(dim, k.square_dim()?, "Kraus operator")?;
        }
        Ok(KrausChannel { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: &UnitaryOperator) -> Self {
        KrausChannel {
            dim: u.dim(),
            kraus: vec![u.matrix().clone()],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `max |Σ K^dagger K - I|`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Linear action on an arbitrary `d × d` matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_same_dim(self.dim, m.square_dim()?, "channel input")?;
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &k.conjugate(m);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::new_unchecked(self.apply_matrix(rho.matrix())?))
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        kraus_to_choi(self)
    }

    /// Sequential composition: `self` after `first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<KrausChannel> {
        check_same_dim(self.dim, first.dim, "compose")?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Ok(KrausChannel { dim: self.dim, kraus })
    }
}

/// Unit-trace Choi matrix of a linear map, ordered input ⊗ output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Wraps a `d² × d²` matrix without checking complete positivity.
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_same_dim(dim * dim, matrix.square_dim()?, "Choi matrix")?;
        Ok(ChoiMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Smallest eigenvalue; negative values witness a non-CP map.
    pub fn min_eigenvalue(&self) -> f64 {
        let dec = eigh(&self.matrix, 1e-6).expect("Choi matrix is Hermitian");
        *dec.values.last().expect("nonempty spectrum")
    }

    pub fn is_cp(&self, tolerance: f64) -> bool {
        self.min_eigenvalue() >= -tolerance
    }

    /// `max |Tr_out C - I/d|`; zero for trace-preserving maps.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C_ZERO;
                for o in 0..d {
                    acc += self.matrix[(i * d + o, j * d + o)];
                }
                let target = if i == j { 1.0 / d as f64 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// `E(m) = Σ_ij m_ij E(|i><j|)` with `E(|i><j|)[o,o'] = d·C[(i,o),(j,o')]`.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        check_same_dim(d, m.square_dim()?, "channel input")?;
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mij = m[(i, j)];
                if mij == C_ZERO {
                    continue;
                }
                for o in 0..d {
                    for p in 0..d {
                        out[(o, p)] += mij * self.matrix[(i * d + o, j * d + p)] * d as f64;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kraus form from the spectral decomposition; fails for non-CP maps.
    pub fn to_kraus(&self, tolerance: f64) -> Result<KrausChannel> {
        let d = self.dim;
        let dec = eigh(&self.matrix, tolerance)?;
        let min = *dec.values.last().expect("nonempty spectrum");
        if min < -tolerance {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: min,
                tolerance,
            });
        }
        let mut kraus = Vec::new();
        for (k, &lambda) in dec.values.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let v = dec.vector(k);
            let s = (d as f64 * lambda).sqrt();
            kraus.push(ComplexMatrix::from_fn(d, d, |o, i| v[i * d + o] * s));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("Choi matrix is zero".into()));
        }
        KrausChannel::from_kraus_unchecked(kraus)
    }
}

pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let d = ch.dim;
    let mut c = ComplexMatrix::zeros(d * d, d * d);
    for k in &ch.kraus {
        // vec(K)[(i, o)] = K[o, i]
        let v: Vec<Complex64> = (0..d * d).map(|idx| k[(idx % d, idx / d)]).collect();
        c = &c + &ComplexMatrix::projector(&v);
    }
    ChoiMatrix {
        dim: d,
        matrix: c.scale(1.0 / d as f64),
    }
}

/// `||C_a - C_b||_1 / 2` on unit-trace Choi matrices.
pub fn choi_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    check_same_dim(a.dim, b.dim, "choi_distance")?;
    let diff = &a.matrix - &b.matrix;
    Ok(0.5 * trace_norm_hermitian(&diff, 1e-6)?)
}

/// Choi distance between two Kraus channels.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    choi_distance(&a.to_choi(), &b.to_choi())
}

/// Outcome of a structural predicate together with its residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredicateCheck {
    pub holds: bool,
    pub residual: f64,
}

/// `E[I] = I` within `tolerance`, i.e. `max |Σ K K^dagger - I|`.
pub fn is_unital(ch: &KrausChannel, tolerance: f64) -> PredicateCheck {
    let mut sum = ComplexMatrix::zeros(ch.dim, ch.dim);
    for k in &ch.kraus {
        sum = &sum + &(k * &k.adjoint());
    }
    let residual = sum.max_abs_diff(&ComplexMatrix::identity(ch.dim));
    PredicateCheck {
        holds: residual <= tolerance,
        residual,
    }
}

/// Probability vector paired with unitaries: `E[ρ] = Σ p_j U_j ρ U_j^dagger`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct RandomUnitarySpec {
    probs: Vec<f64>,
    unitaries: Vec<UnitaryOperator>,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    probs: Vec<f64>,
    unitaries: Vec<UnitaryOperator>,
}

impl TryFrom<SpecJson> for RandomUnitarySpec {
    type Error = Error;

    fn try_from(raw: SpecJson) -> Result<Self> {
        RandomUnitarySpec::new(raw.probs, raw.unitaries)
    }
}

impl From<RandomUnitarySpec> for SpecJson {
    fn from(s: RandomUnitarySpec) -> Self {
        SpecJson {
            probs: s.probs,
            unitaries: s.unitaries,
        }
    }
}

impl RandomUnitarySpec {
    pub fn new(probs: Vec<f64>, unitaries: Vec<UnitaryOperator>) -> Result<Self> {
        if probs.is_empty() || probs.len() != unitaries.len() {
            return Err(Error::InvalidProbabilities(format!(
                "{} probabilities for {} unitaries",
                probs.len(),
                unitaries.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbabilities(format!("{p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!("sum is {total}")));
        }
        let dim = unitaries[0].dim();
        for u in &unitaries {
            check_same_dim(dim, u.dim(), "random unitary spec")?;
        }
        Ok(RandomUnitarySpec { probs, unitaries })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn unitaries(&self) -> &[UnitaryOperator] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn system_dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    /// Uniform mixture of `I, σx, σy, σz`: the completely depolarizing qubit channel.
    pub fn pauli_twirl() -> Self {
        let [x, y, z] = crate::pauli::paulis();
        RandomUnitarySpec::new(vec![0.25; 4], vec![UnitaryOperator::identity(2), x, y, z]).expect("valid")
    }

    /// Qubit dephasing `(1-p) ρ + p σz ρ σz`.
    pub fn dephasing(p: f64) -> Result<Self> {
        RandomUnitarySpec::new(vec![1.0 - p, p], vec![UnitaryOperator::identity(2), crate::pauli::sigma_z()])
    }

    /// Seeded random spec with `terms` unitaries on dimension `dim`.
    pub fn random(dim: usize, terms: usize, rng: &mut impl Rng) -> Self {
        let probs = crate::random::random_probabilities(terms, rng);
        let unitaries = (0..terms).map(|_| random_unitary(dim, rng)).collect();
        RandomUnitarySpec { probs, unitaries }
    }
}

/// Kraus form `{√p_j U_j}`.
pub fn random_unitary_channel(spec: &RandomUnitarySpec) -> KrausChannel {
    let kraus = spec
        .probs
        .iter()
        .zip(&spec.unitaries)
        .map(|(&p, u)| u.matrix().scale(p.sqrt()))
        .collect();
    KrausChannel {
        dim: spec.system_dim(),
        kraus,
    }
}

/// `S(ρ) - S(E[ρ])` in bits; positive values witness nonunitality.
pub fn entropy_deficit(ch: &KrausChannel, rho: &DensityOperator) -> Result<f64> {
    let out = ch.apply(rho)?;
    Ok(von_neumann_entropy(rho) - von_neumann_entropy(&out))
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0, 1]")));
    }
    let k0 = ComplexMatrix::from_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex64::new(gamma.sqrt(), 0.0);
    Ok(KrausChannel {
        dim: 2,
        kraus: vec![k0, k1],
    })
}

/// `ρ ↦ (1-p) ρ + p I/d`, built from the `d²` clock-and-shift unitaries.
pub fn depolarizing(dim: usize, p: f64) -> Result<KrausChannel> {
    let d2 = (dim * dim) as f64;
    if !(0.0..=d2 / (d2 - 1.0).max(1.0)).contains(&p) || dim == 0 {
        return Err(Error::InvalidArgument(format!("depolarizing parameter {p} out of range")));
    }
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / dim as f64);
    let mut kraus = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let weight = if a == 0 && b == 0 { 1.0 - p + p / d2 } else { p / d2 };
            if weight <= 0.0 {
                continue;
            }
            // X^a Z^b: |k> -> ω^{bk} |k+a>
            let w = ComplexMatrix::from_fn(dim, dim, |r, c| {
                if r == (c + a) % dim {
                    omega.powu((b * c) as u32) * weight.sqrt()
                } else {
                    C_ZERO
                }
            });
            kraus.push(w);
        }
    }
    Ok(KrausChannel { dim, kraus })
}

/// Maps every state to `xi`; Kraus set `{√λ_i |e_i><j|}` over the
/// eigenpairs of `xi` and the computational basis.
pub fn constant_channel(xi: &DensityOperator) -> KrausChannel {
    let d = xi.dim();
    let dec = xi.eigh();
    let mut kraus = Vec::new();
    for (i, &lambda) in dec.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let e = dec.vector(i);
        let s = lambda.sqrt();
        for j in 0..d {
            kraus.push(ComplexMatrix::from_fn(d, d, |r, c| if c == j { e[r] * s } else { C_ZERO }));
        }
    }
    KrausChannel { dim: d, kraus }
}

/// Per-sample outcome of the unital entropy monotonicity check.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// `S(E[ρ]) - S(ρ)` per sample.
    pub margins: Vec<f64>,
    pub worst_margin: f64,
    pub violations: usize,
    pub slack: f64,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples states and checks `S(E[ρ]) ≥ S(ρ) - slack` for a unital channel.
pub fn unital_monotonicity_harness(
    ch: &KrausChannel,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let unital = is_unital(ch, tolerance);
    if !unital.holds {
        return Err(Error::NotUnital {
            residual: unital.residual,
            tolerance,
        });
    }
    let mut rng = rng_from_seed(seed);
    let slack = 1e-9;
    let margins: Vec<f64> = (0..samples)
        .map(|_| {
            let rho = random_state(ch.dim, &mut rng);
            let out = ch.apply(&rho)?;
            Ok(von_neumann_entropy(&out) - von_neumann_entropy(&rho))
        })
        .collect::<Result<_>>()?;
    let worst_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = margins.iter().filter(|&&m| m < -slack).count();
    Ok(MonotonicityReport {
        samples,
        margins,
        worst_margin,
        violations,
        slack,
    })
}

/// The same inequality routed through relative entropy to `I/d`:
/// `S(E[ρ]||I/d) ≤ S(ρ||I/d)`. Returns `(before, after)`.
pub fn relative_entropy_to_mixture(ch: &KrausChannel, rho: &DensityOperator) -> Result<(f64, f64)> {
    let mix = DensityOperator::maximally_mixed(ch.dim);
    let out = ch.apply(rho)?;
    Ok((
        relative_entropy(rho, &mix, DEFAULT_TOLERANCE)?,
        relative_entropy(&out, &mix, DEFAULT_TOLERANCE)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{sigma_x, sigma_z};

    fn plus() -> DensityOperator {
        DensityOperator::from_bloch([1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_channel_is_trivial() {
        let rho = DensityOperator::from_bloch([0.2, 0.1, -0.3]).unwrap();
        let id = KrausChannel::identity(2);
        assert_eq!(id.apply(&rho).unwrap(), rho);
        assert_eq!(entropy_deficit(&id, &rho).unwrap(), 0.0);
    }

    #[test]
    fn dephasing_on_plus_is_mixed() {
        let ch = random_unitary_channel(&RandomUnitarySpec::dephasing(0.5).unwrap());
        let out = ch.apply(&plus()).unwrap();
        assert!(out.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
        // General input: off-diagonals vanish, diagonal kept.
        let rho = DensityOperator::from_bloch([0.3, -0.5, 0.4]).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(out.matrix()[(0, 1)].norm() < 1e-15);
        assert!((out.matrix()[(0, 0)] - rho.matrix()[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn pauli_twirl_depolarizes_completely() {
        let ch = random_unitary_channel(&RandomUnitarySpec::pauli_twirl());
        let rho = DensityOperator::from_bloch([0.3, -0.5, 0.4]).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn constant_channel_outputs_xi() {
        let xi = DensityOperator::from_bloch([0.1, 0.2, 0.6]).unwrap();
        let ch = constant_channel(&xi);
        assert!(ch.trace_preservation_residual() < 1e-12);
        let out = ch.apply(&DensityOperator::basis(2, 1)).unwrap();
        assert!(out.matrix().max_abs_diff(xi.matrix()) < 1e-12);
    }

    #[test]
    fn choi_distances() {
        let id = KrausChannel::identity(2);
        let dep = depolarizing(2, 1.0).unwrap();
        let x = KrausChannel::unitary(&sigma_x());
        assert!(channel_distance(&id, &id).unwrap() < 1e-15);
        // Oracle: |Φ+><Φ+| - I/4 has eigenvalues 3/4, -1/4 (x3).
        assert!((channel_distance(&id, &dep).unwrap() - 0.75).abs() < 1e-12);
        // Orthogonal Bell states.
        assert!((channel_distance(&id, &x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitality_checks() {
        let ad = amplitude_damping(0.5).unwrap();
        let u = is_unital(&ad, 1e-9);
        assert!(!u.holds);
        assert!((u.residual - 0.5).abs() < 1e-15);
        let pure = constant_channel(&DensityOperator::basis(2, 0));
        assert!(!is_unital(&pure, 1e-9).holds);
        assert!(is_unital(&constant_channel(&DensityOperator::maximally_mixed(2)), 1e-9).holds);
        let twirl = random_unitary_channel(&RandomUnitarySpec::pauli_twirl());
        assert!(is_unital(&twirl, 1e-9).holds);
    }

    #[test]
    fn amplitude_damping_limits() {
        let id = KrausChannel::identity(2);
        assert!(channel_distance(&amplitude_damping(0.0).unwrap(), &id).unwrap() < 1e-15);
        let to_ground = constant_channel(&DensityOperator::basis(2, 0));
        assert!(channel_distance(&amplitude_damping(1.0).unwrap(), &to_ground).unwrap() < 1e-12);
        assert!(amplitude_damping(1.5).is_err());
    }

    #[test]
    fn amplitude_damping_deficit_at_mixture() {
        let ad = amplitude_damping(0.5).unwrap();
        let delta = entropy_deficit(&ad, &DensityOperator::maximally_mixed(2)).unwrap();
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((delta - (1.0 - h)).abs() < 1e-12);
        assert!((delta - 0.188722).abs() < 1e-6);
    }

    #[test]
    fn constant_mixture_equals_full_depolarizing() {
        let a = constant_channel(&DensityOperator::maximally_mixed(2));
        let b = depolarizing(2, 1.0).unwrap();
        assert!(a.to_choi().matrix().max_abs_diff(b.to_choi().matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_qutrit_is_cptp_and_correct() {
        let ch = depolarizing(3, 0.4).unwrap();
        assert!(ch.trace_preservation_residual() < 1e-12);
        let rho = DensityOperator::basis(3, 2);
        let out = ch.apply(&rho).unwrap();
        let expected = &rho.matrix().scale(0.6) + &ComplexMatrix::identity(3).scale(0.4 / 3.0);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn choi_round_trip() {
        let ad = amplitude_damping(0.3).unwrap();
        let choi = ad.to_choi();
        assert!(choi.trace_preservation_residual() < 1e-15);
        assert!(choi.is_cp(1e-12));
        let back = choi.to_kraus(1e-9).unwrap();
        assert!(channel_distance(&ad, &back).unwrap() < 1e-12);
        let rho = DensityOperator::from_bloch([0.5, 0.1, 0.2]).unwrap();
        let a = ad.apply(&rho).unwrap();
        let b = choi.apply_matrix(rho.matrix()).unwrap();
        assert!(a.matrix().max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn kraus_validation() {
        assert!(KrausChannel::new(vec![], 1e-9).is_err());
        let bad = vec![ComplexMatrix::from_diagonal(&[1.0, 0.5])];
        assert!(matches!(KrausChannel::new(bad, 1e-9), Err(Error::NotTracePreserving { .. })));
        let json = serde_json::to_string(&amplitude_damping(0.2).unwrap()).unwrap();
        let back: KrausChannel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, amplitude_damping(0.2).unwrap());
    }

    #[test]
    fn spec_validation() {
        let z = sigma_z();
        assert!(RandomUnitarySpec::new(vec![0.5, 0.6], vec![z.clone(), z.clone()]).is_err());
        assert!(RandomUnitarySpec::new(vec![1.2, -0.2], vec![z.clone(), z.clone()]).is_err());
        assert!(RandomUnitarySpec::new(vec![1.0], vec![z.clone(), z]).is_err());
    }

    #[test]
    fn harness_identity_margins_are_zero() {
        let r = unital_monotonicity_harness(&KrausChannel::identity(2), 50, 1, 1e-9).unwrap();
        assert!(r.margins.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn harness_rejects_nonunital() {
        let ad = amplitude_damping(0.5).unwrap();
        assert!(matches!(
            unital_monotonicity_harness(&ad, 10, 1, 1e-9),
            Err(Error::NotUnital { .. })
        ));
    }
}
