use crate::error::{AlhError, Result};
use serde::{Deserialize, Serialize};

/// Result of [`extrapolate_limit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub error: f64,
    /// Fitted decay order p of the C·R^{-p} model (NaN when not fitted).
    pub order: f64,
    /// Set when the tail was not monotone and the raw last value is returned.
    pub unreliable: bool,
}

/// Richardson step on a doubling triple assuming v = L + C R^{-p}.
fn richardson(v: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[1];
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    if d2.abs() <= 4.0 * f64::EPSILON * scale {
        // Already converged to round-off.
        return Some((v[2], f64::INFINITY));
    }
    let q = d1 / d2;
    if !(q > 1.0) {
        return None;
    }
    Some((v[2] + d2 / (q - 1.0), q.log2()))
}

/// Extrapolates R → ∞ from values on a ladder with R_{k+1} = 2 R_k.
/// The error is the spread of the last two extrapolants.
pub fn extrapolate_limit(radii: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if radii.len() != values.len() {
        return Err(AlhError::Dimension { expected: radii.len(), got: values.len() });
    }
    if radii.len() < 3 {
        return Err(AlhError::Parameter("extrapolation needs at least three ladder points".into()));
    }
    for w in radii.windows(2) {
        if (w[1] - 2.0 * w[0]).abs() > 1e-12 * w[1].abs() {
            return Err(AlhError::Parameter(format!("ladder must double: {} -> {}", w[0], w[1])));
        }
    }
    let m = values.len();
    let last = values[m - 1];
    let mut ext = Vec::new();
    for t in values.windows(3) {
        match richardson([t[0], t[1], t[2]]) {
            Some(e) => ext.push(e),
            None => {
                let spread = (values[m - 1] - values[m - 2]).abs().max(1e-300);
                return Ok(Extrapolation { limit: last, error: spread * 1e3, order: f64::NAN, unreliable: true });
            }
        }
    }
    let (limit, order) = ext[ext.len() - 1];
    let error = if ext.len() >= 2 { (ext[ext.len() - 1].0 - ext[ext.len() - 2].0).abs() } else { (limit - last).abs() };
    Ok(Extrapolation { limit, error, order, unreliable: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_inverse_models() {
        let r = [8.0, 16.0, 32.0, 64.0];
        let e = extrapolate_limit(&r, &[2.5; 4]).unwrap();
        assert_eq!((e.limit, e.error), (2.5, 0.0));
        let v: Vec<f64> = r.iter().map(|x| 3.0 + 7.0 / x).collect();
        let e = extrapolate_limit(&r, &v).unwrap();
        assert!((e.limit - 3.0).abs() < 1e-10 && (e.order - 1.0).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn non_monotone_tail_flagged() {
        let e = extrapolate_limit(&[1.0, 2.0, 4.0], &[1.0, 2.0, 1.0]).unwrap();
        assert!(e.unreliable && e.limit == 1.0);
        assert!(extrapolate_limit(&[1.0, 3.0, 4.0], &[1.0, 2.0, 1.0]).is_err());
    }
}
