//! Single-qubit Pauli matrices and the two-qubit SWAP.

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, C_ONE, C_ZERO};
use crate::state::UnitaryOperator;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn sigma_x() -> UnitaryOperator {
    UnitaryOperator::new_unchecked(ComplexMatrix::from_fn(2, 2, |i, j| if i != j { C_ONE } else { C_ZERO }))
}

pub fn sigma_y() -> UnitaryOperator {
    let m = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => C_ZERO,
    });
    UnitaryOperator::new_unchecked(m)
}

pub fn sigma_z() -> UnitaryOperator {
    UnitaryOperator::new_unchecked(ComplexMatrix::from_diagonal(&[1.0, -1.0]))
}

/// `(σx, σy, σz)`.
pub fn paulis() -> [UnitaryOperator; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Two-qubit SWAP: `|a,b> -> |b,a>`.
pub fn swap() -> UnitaryOperator {
    swap_dim(2)
}

/// SWAP of two `d`-level systems.
pub fn swap_dim(d: usize) -> UnitaryOperator {
    let n = d * d;
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (c / d, c % d);
        if r == b * d + a {
            C_ONE
        } else {
            C_ZERO
        }
    });
    UnitaryOperator::new_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::validate_unitary;

    #[test]
    fn pauli_algebra() {
        let [x, y, z] = paulis();
        let xy = x.matrix() * y.matrix();
        assert!(xy.max_abs_diff(&z.matrix().scale_complex(I)) < 1e-15);
        for p in [x, y, z] {
            assert!(validate_unitary(p.matrix().clone(), 1e-15).is_ok());
        }
    }

    #[test]
    fn swap_exchanges_factors() {
        let s = swap_dim(3);
        assert!(validate_unitary(s.matrix().clone(), 1e-15).is_ok());
        // |1,2> -> |2,1>
        assert_eq!(s.matrix()[(2 * 3 + 1, 3 + 2)], C_ONE);
    }
}
