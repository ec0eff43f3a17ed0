use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::PriorSpec;
use crate::rng::{Role, StreamKey};
use crate::scalar::{powu, Real};

/// Truncated coefficient sequence `theta_1..theta_L` inside the ellipsoid
/// `sum_i i^(2 alpha) theta_i^2 <= c_tilde^2`. Coordinates past `L` are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSequence<T> {
    pub alpha: u32,
    pub c_tilde: T,
    pub values: Vec<T>,
}

/// `sum_i i^(2 alpha) theta_i^2` over the stored coordinates.
pub fn ellipsoid_norm<T: Real>(values: &[T], alpha: u32) -> T {
    values
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let w = powu(T::from_usize(idx + 1).unwrap(), alpha) * v;
            w * w
        })
        .sum()
}

impl<T: Real> CoefficientSequence<T> {
    pub fn new(values: Vec<T>, alpha: u32, c_tilde: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation(
                "theta",
                "sequence must have at least one coordinate",
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                "theta",
                format!("coordinate {} is not finite", pos + 1),
            ));
        }
        if alpha == 0 {
            return Err(Error::validation("alpha", "must be at least 1"));
        }
        if !(c_tilde.is_finite() && c_tilde > T::zero()) {
            return Err(Error::validation("c_tilde", "must be finite and positive"));
        }
        let norm = ellipsoid_norm(&values, alpha);
        if norm > c_tilde * c_tilde {
            return Err(Error::validation(
                "theta",
                format!(
                    "ellipsoid norm {norm} exceeds c_tilde^2 = {}",
                    c_tilde * c_tilde
                ),
            ));
        }
        Ok(CoefficientSequence {
            alpha,
            c_tilde,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `theta_i` for 1-based `i`; zero past the stored length.
    #[inline]
    pub fn get(&self, i: usize) -> T {
        debug_assert!(i >= 1);
        self.values.get(i - 1).copied().unwrap_or_else(T::zero)
    }

    pub fn ellipsoid_norm(&self) -> T {
        ellipsoid_norm(&self.values, self.alpha)
    }

    /// `sum_{i > cutoff} theta_i^2`.
    pub fn tail_energy(&self, cutoff: usize) -> T {
        self.values.iter().skip(cutoff).map(|&v| v * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    /// Redraw until the sample lies in the ellipsoid.
    Reject,
    /// Rescale an outside sample onto the boundary.
    Project,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientKind<T> {
    /// `theta_i = s * i^-(alpha + 1/2 + kappa)`, scaled so the ellipsoid norm
    /// is `rho * c_tilde^2`.
    PolynomialDecay { kappa: T, rho: T },
    /// All mass on index `i0`, placed on the boundary.
    SingleSpike { i0: usize },
    GaussianPrior {
        prior: PriorSpec<T>,
        mode: PriorMode,
    },
}

/// Recipe for a coefficient sequence of a given stored length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec<T> {
    pub kind: CoefficientKind<T>,
    pub length: usize,
}

impl<T: Real> CoefficientSpec<T> {
    pub fn is_random(&self) -> bool {
        matches!(self.kind, CoefficientKind::GaussianPrior { .. })
    }
}

pub(crate) const MAX_REJECTIONS: u32 = 10_000;

/// Shrinks `values` by a few ulps until the norm is inside the ellipsoid.
/// Only needed for sequences constructed on (or scaled to) the boundary.
fn pull_inside<T: Real>(values: &mut [T], alpha: u32, c_tilde: T) {
    let shrink = T::one() - T::lit(4.0) * T::epsilon();
    while ellipsoid_norm(values, alpha) > c_tilde * c_tilde {
        values.iter_mut().for_each(|v| *v *= shrink);
    }
}

/// Draws (or builds) a sequence from `spec`; deterministic in `seed`.
pub fn sample_coefficients<T: Real>(
    spec: &CoefficientSpec<T>,
    c_tilde: T,
    alpha: u32,
    seed: u64,
) -> Result<CoefficientSequence<T>> {
    let len = spec.length;
    if len == 0 {
        return Err(Error::validation("length", "must be at least 1"));
    }
    if !(c_tilde.is_finite() && c_tilde > T::zero()) {
        return Err(Error::validation("c_tilde", "must be finite and positive"));
    }
    let values = match &spec.kind {
        CoefficientKind::SingleSpike { i0 } => {
            let i0 = *i0;
            if i0 == 0 || i0 > len {
                return Err(Error::validation(
                    "i0",
                    format!("spike index {i0} outside 1..={len}"),
                ));
            }
            let mut v = vec![T::zero(); len];
            v[i0 - 1] = c_tilde / powu(T::from_usize(i0).unwrap(), alpha);
            pull_inside(&mut v, alpha, c_tilde);
            v
        }
        CoefficientKind::PolynomialDecay { kappa, rho } => {
            let (kappa, rho) = (*kappa, *rho);
            if !kappa.is_finite() {
                return Err(Error::validation("kappa", "must be finite"));
            }
            if !(rho > T::zero() && rho <= T::one()) {
                return Err(Error::validation(
                    "rho",
                    format!("boundary fraction must lie in (0, 1], got {rho}"),
                ));
            }
            let expo = T::from_u32(alpha).unwrap() + T::lit(0.5) + kappa;
            let mut v: Vec<T> = (1..=len)
                .map(|i| T::from_usize(i).unwrap().powf(-expo))
                .collect();
            let raw = ellipsoid_norm(&v, alpha);
            let scale = (rho * c_tilde * c_tilde / raw).sqrt();
            v.iter_mut().for_each(|x| *x *= scale);
            pull_inside(&mut v, alpha, c_tilde);
            v
        }
        CoefficientKind::GaussianPrior { prior, mode } => {
            let ell = prior.variances.len();
            if ell > len {
                return Err(Error::validation(
                    "length",
                    format!("stored length {len} shorter than prior dimension {ell}"),
                ));
            }
            let sd: Vec<T> = prior.variances.iter().map(|v| v.sqrt()).collect();
            let draw = |attempt: u32| {
                let key = StreamKey::new(seed, Role::Prior, attempt as u64, 0);
                let mut v = vec![T::zero(); len];
                for (i, s) in sd.iter().enumerate() {
                    v[i] = *s * key.normal_as::<T>(i as u64);
                }
                v
            };
            let bound = c_tilde * c_tilde;
            match mode {
                PriorMode::Reject => {
                    let mut accepted = None;
                    for attempt in 0..MAX_REJECTIONS {
                        let v = draw(attempt);
                        if ellipsoid_norm(&v, alpha) <= bound {
                            accepted = Some(v);
                            break;
                        }
                    }
                    accepted.ok_or(Error::RejectionExhausted {
                        attempts: MAX_REJECTIONS,
                    })?
                }
                PriorMode::Project => {
                    let mut v = draw(0);
                    let norm = ellipsoid_norm(&v, alpha);
                    if norm > bound {
                        let scale = c_tilde / norm.sqrt();
                        v.iter_mut().for_each(|x| *x *= scale);
                        pull_inside(&mut v, alpha, c_tilde);
                    }
                    v
                }
            }
        }
    };
    CoefficientSequence::new(values, alpha, c_tilde)
}
