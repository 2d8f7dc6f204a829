//! Cyclic shift operators on periodic cell fields: integer permutations, the
//! fractional one-cell shift, and their composition for arbitrary real
//! shifts. All operators act in O(N) index arithmetic; no matrices are
//! formed.

use crate::error::{Error, Result};
use crate::mesh::CellField;

/// Decomposition of a real cell shift `s` for a field of `N` cells:
/// `p = (floor(s) + 1) mod N` and `theta = s - floor(s)` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftIndex {
    pub p: usize,
    pub theta: f64,
}

impl ShiftIndex {
    /// Applies the shift as `out[j] = (1-theta) u[j-p+1] + theta u[j-p]`,
    /// indices mod N. A vanishing `theta` degenerates to a pure permutation
    /// copy so integer shifts reproduce the input values bit for bit.
    pub fn apply(&self, field: &CellField) -> CellField {
        let n = field.len();
        let u = field.values();
        debug_assert!(self.p < n);
        let p = self.p;
        let mut out = Vec::with_capacity(n);
        if self.theta == 0.0 {
            for j in 0..n {
                out.push(u[(j + n + 1 - p) % n]);
            }
        } else {
            let th = self.theta;
            for j in 0..n {
                let a = u[(j + n + 1 - p) % n];
                let b = u[(j + n - p) % n];
                out.push((1.0 - th) * a + th * b);
            }
        }
        CellField::new_unchecked(field.mesh(), out)
    }
}

/// Splits a finite shift into the wrapped integer index `p` and fractional
/// part `theta`. The floor-based fractional part keeps `theta` in `[0, 1)`
/// for negative shifts as well.
pub fn decompose_shift(s: f64, n_cells: usize) -> Result<ShiftIndex> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shift must be finite, got {s}"
        )));
    }
    debug_assert!(n_cells >= 2);
    let mut floor = s.floor();
    let mut theta = s - floor;
    // For tiny negative s the subtraction can round up to exactly 1.
    if theta >= 1.0 {
        floor += 1.0;
        theta = 0.0;
    }
    let n = n_cells as i64;
    let p = ((floor as i64) + 1).rem_euclid(n) as usize;
    Ok(ShiftIndex { p, theta })
}

/// Integer cyclic shift by `m` cells: `out[j] = u[j - m]` mod N, so positive
/// `m` moves content toward larger indices.
pub fn cyclic_shift(field: &CellField, m: i64) -> CellField {
    let n = field.len();
    let u = field.values();
    let mr = m.rem_euclid(n as i64) as usize;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        out.push(u[(j + n - mr) % n]);
    }
    CellField::new_unchecked(field.mesh(), out)
}

/// Fractional shift by `omega` of one cell width:
/// `out[j] = (1-omega) u[j] + omega u[j-1]` mod N, `omega` in `[0, 1]`.
pub fn fractional_shift(field: &CellField, omega: f64) -> Result<CellField> {
    if !(omega.is_finite() && (0.0..=1.0).contains(&omega)) {
        return Err(Error::InvalidArgument(format!(
            "fractional shift needs omega in [0, 1], got {omega}"
        )));
    }
    let n = field.len();
    let u = field.values();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        out.push((1.0 - omega) * u[j] + omega * u[(j + n - 1) % n]);
    }
    Ok(CellField::new_unchecked(field.mesh(), out))
}

/// Generalized shift by an arbitrary real number of cells, composed as the
/// fractional shift of the decomposed remainder after the integer
/// permutation. Exactly integer shifts reduce to [`cyclic_shift`].
pub fn apply_shift(field: &CellField, s: f64) -> Result<CellField> {
    let idx = decompose_shift(s, field.len())?;
    Ok(idx.apply(field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;

    fn field(values: &[f64]) -> CellField {
        let mesh = Mesh1D::new(0.0, values.len() as f64, values.len()).unwrap();
        CellField::new(mesh, values.to_vec()).unwrap()
    }

    #[test]
    fn unit_permutations() {
        let u = field(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(cyclic_shift(&u, 1).values(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(cyclic_shift(&u, -1).values(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(cyclic_shift(&u, 0).values(), u.values());
        assert_eq!(cyclic_shift(&u, 5).values(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(cyclic_shift(&u, -4).values(), u.values());
    }

    #[test]
    fn fractional_shift_blends_with_left_neighbor() {
        let u = field(&[1.0, 0.0, 0.0, 0.0]);
        let v = fractional_shift(&u, 0.25).unwrap();
        assert_eq!(v.values(), &[0.75, 0.25, 0.0, 0.0]);
        assert_eq!(fractional_shift(&u, 0.0).unwrap().values(), u.values());
        assert_eq!(
            fractional_shift(&u, 1.0).unwrap().values(),
            cyclic_shift(&u, 1).values()
        );
        assert!(fractional_shift(&u, 1.5).is_err());
        assert!(fractional_shift(&u, -0.1).is_err());
        assert!(fractional_shift(&u, f64::NAN).is_err());
    }

    #[test]
    fn decompose_examples() {
        let idx = decompose_shift(1.2, 4).unwrap();
        assert_eq!(idx.p, 2);
        assert!((idx.theta - 0.2).abs() < 1e-15);

        let idx = decompose_shift(-0.3, 4).unwrap();
        assert_eq!(idx.p, 0);
        assert!((idx.theta - 0.7).abs() < 1e-15);

        let idx = decompose_shift(5.0, 4).unwrap();
        assert_eq!(idx, ShiftIndex { p: 2, theta: 0.0 });

        let idx = decompose_shift(0.0, 4).unwrap();
        assert_eq!(idx, ShiftIndex { p: 1, theta: 0.0 });

        assert!(decompose_shift(f64::INFINITY, 4).is_err());
    }

    #[test]
    fn decompose_handles_tiny_negative_shifts() {
        let idx = decompose_shift(-1e-17, 8).unwrap();
        assert_eq!(idx.p, 1);
        assert_eq!(idx.theta, 0.0);
    }

    #[test]
    fn generalized_shift_examples() {
        let u = field(&[1.0, 0.0, 0.0, 0.0]);
        let v = apply_shift(&u, 2.5).unwrap();
        assert_eq!(v.values(), &[0.0, 0.0, 0.5, 0.5]);

        let v = apply_shift(&u, -1.0).unwrap();
        assert_eq!(v.values(), cyclic_shift(&u, -1).values());

        let v = apply_shift(&u, 4.0).unwrap();
        assert_eq!(v.values(), u.values());
    }

    #[test]
    fn integer_shifts_are_bitwise_permutations() {
        let u = field(&[1.0, -0.0, 3.5, -2.25, 0.1]);
        for m in -7..=7 {
            let a = apply_shift(&u, m as f64).unwrap();
            let b = cyclic_shift(&u, m);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn permutation_and_blend_commute() {
        let u = field(&[0.3, -1.2, 4.0, 0.0, 2.2, -0.7]);
        for m in [-5i64, -1, 0, 2, 9] {
            for omega in [0.0, 0.3, 0.75, 1.0] {
                let a = fractional_shift(&cyclic_shift(&u, m), omega).unwrap();
                let b = cyclic_shift(&fractional_shift(&u, omega).unwrap(), m);
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn fractional_shifts_do_not_compose() {
        // Two half-cell shifts are not one full-cell shift: the double blend
        // smears while the permutation stays sharp.
        let u = field(&[1.0, 0.0, 0.0, 0.0]);
        let twice = fractional_shift(&fractional_shift(&u, 0.5).unwrap(), 0.5).unwrap();
        assert_eq!(twice.values(), &[0.25, 0.5, 0.25, 0.0]);
        let once = apply_shift(&u, 1.0).unwrap();
        assert_eq!(once.values(), &[0.0, 1.0, 0.0, 0.0]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn theta_stays_in_unit_interval(s in -1e6f64..1e6, n in 2usize..50) {
                let idx = decompose_shift(s, n).unwrap();
                prop_assert!(idx.p < n);
                prop_assert!((0.0..1.0).contains(&idx.theta));
            }

            #[test]
            fn mass_is_conserved(
                values in proptest::collection::vec(-1e3f64..1e3, 3..40),
                s in -500.0f64..500.0,
            ) {
                let u = field(&values);
                let v = apply_shift(&u, s).unwrap();
                let scale = u.values().iter().map(|x| x.abs()).sum::<f64>() + 1.0;
                prop_assert!((v.sum() - u.sum()).abs() <= 1e-12 * scale);
            }

            #[test]
            fn range_is_preserved(
                values in proptest::collection::vec(-1e3f64..1e3, 3..40),
                s in -500.0f64..500.0,
            ) {
                let u = field(&values);
                let v = apply_shift(&u, s).unwrap();
                let lo = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let slack = 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0);
                for &x in v.values() {
                    prop_assert!(x >= lo - slack && x <= hi + slack);
                }
            }

            #[test]
            fn integer_parts_compose(
                values in proptest::collection::vec(-10.0f64..10.0, 3..20),
                a in -30i64..30,
                b in -30i64..30,
            ) {
                let u = field(&values);
                let two = cyclic_shift(&cyclic_shift(&u, a), b);
                let one = cyclic_shift(&u, a + b);
                prop_assert_eq!(two.values(), one.values());
            }
        }
    }
}
