use crate::error::{AlhError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Energy-momentum: a vector m_μ for spherical conformal infinity, a
/// scalar mass otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EnergyMomentum {
    Vector(Vec<f64>),
    Scalar(f64),
}

fn eta(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i != j { 0.0 } else if i == 0 { -1.0 } else { 1.0 })
}

/// max |η Λᵀ η Λ - I|.
pub fn lorentz_defect(l: &DMatrix<f64>) -> f64 {
    let d = l.nrows();
    let e = eta(d);
    (&e * l.transpose() * &e * l - DMatrix::identity(d, d)).amax()
}

/// Minkowski square -m_0² + Σ m_i².
pub fn minkowski_square(m: &[f64]) -> f64 {
    -m[0] * m[0] + m[1..].iter().map(|x| x * x).sum::<f64>()
}

/// Boost of rapidity `chi` mixing the time axis with spatial axis `axis`.
pub fn lorentz_boost(dim: usize, axis: usize, chi: f64) -> DMatrix<f64> {
    let mut l = DMatrix::identity(dim, dim);
    let (c, s) = (chi.cosh(), chi.sinh());
    l[(0, 0)] = c;
    l[(axis, axis)] = c;
    l[(0, axis)] = s;
    l[(axis, 0)] = s;
    l
}

/// Λ1 m1 + Λ2 m2, after checking both matrices are Lorentz transformations.
pub fn lorentz_add(l1: &DMatrix<f64>, m1: &EnergyMomentum, l2: &DMatrix<f64>, m2: &EnergyMomentum) -> Result<EnergyMomentum> {
    for l in [l1, l2] {
        if !l.is_square() {
            return Err(AlhError::Validation("Lorentz matrix must be square".into()));
        }
        let d = lorentz_defect(l);
        if d > 1e-10 {
            return Err(AlhError::Validation(format!("not a Lorentz matrix (defect {d:e})")));
        }
    }
    match (m1, m2) {
        (EnergyMomentum::Vector(a), EnergyMomentum::Vector(b)) => {
            if a.len() != l1.nrows() || b.len() != l2.nrows() || a.len() != b.len() {
                return Err(AlhError::Dimension { expected: l1.nrows(), got: a.len().min(b.len()) });
            }
            let s = l1 * DVector::from_column_slice(a) + l2 * DVector::from_column_slice(b);
            Ok(EnergyMomentum::Vector(s.iter().copied().collect()))
        }
        (EnergyMomentum::Scalar(a), EnergyMomentum::Scalar(b)) => Ok(EnergyMomentum::Scalar(a + b)),
        _ => Err(AlhError::Validation("cannot add a vector and a scalar mass".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_sum_and_boost() {
        let i = DMatrix::identity(4, 4);
        let s = lorentz_add(&i, &EnergyMomentum::Vector(vec![1.0, 0.0, 0.0, 0.0]), &i, &EnergyMomentum::Vector(vec![2.0, 0.0, 0.0, 0.0]))
            .unwrap();
        assert_eq!(s, EnergyMomentum::Vector(vec![3.0, 0.0, 0.0, 0.0]));
        let b = lorentz_boost(4, 3, 0.4);
        let z = DMatrix::zeros(4, 4) + DMatrix::identity(4, 4);
        let EnergyMomentum::Vector(v) =
            lorentz_add(&b, &EnergyMomentum::Vector(vec![1.0, 0.0, 0.0, 0.0]), &z, &EnergyMomentum::Vector(vec![0.0; 4])).unwrap()
        else {
            unreachable!()
        };
        assert!((v[0] - 0.4f64.cosh()).abs() < 1e-15);
        let mut bad = DMatrix::identity(4, 4);
        bad[(0, 1)] = 0.1;
        assert!(lorentz_add(&bad, &EnergyMomentum::Scalar(1.0), &z, &EnergyMomentum::Scalar(1.0)).is_err());
    }
}
