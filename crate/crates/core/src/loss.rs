//! Robust losses mapping residuals into `[0, 1]`, and the matching IRLS weights.
//!
//! Every loss is 0 at a zero residual and saturates at exactly 1 once the
//! residual reaches `epsilon`. Weights follow `w(r) = loss'(r) / r`; the hard
//! 0-1 loss uses the inlier indicator instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Hard01,
    Msac,
    Huber,
    RedescendingHuber,
    TukeyBisquare,
    MagsacPP,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Hard01 => "hard01",
            LossKind::Msac => "msac",
            LossKind::Huber => "huber",
            LossKind::RedescendingHuber => "redescending-huber",
            LossKind::TukeyBisquare => "tukey",
            LossKind::MagsacPP => "magsac++",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "hard01" | "hard" | "ransac" => LossKind::Hard01,
            "msac" => LossKind::Msac,
            "huber" => LossKind::Huber,
            "redescending-huber" | "redescendinghuber" | "rhuber" => LossKind::RedescendingHuber,
            "tukey" | "tukey-bisquare" | "tukeybisquare" => LossKind::TukeyBisquare,
            "magsac++" | "magsacpp" | "magsac" => LossKind::MagsacPP,
            other => return Err(Error::InvalidConfig(format!("unknown loss '{other}'"))),
        })
    }
}

/// Confidence used to convert the noise-scale upper bound into a residual cutoff.
const MAGSAC_QUANTILE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
struct MagsacConsts {
    /// (dof - 1) / 2
    a: f64,
    /// k^2 / 2 where k = sqrt of the chi-square quantile.
    big_k: f64,
    upper_at_k: f64,
    lower_norm: f64,
}

/// A robust loss with its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossFunction {
    kind: LossKind,
    epsilon: f64,
    dof: u32,
    magsac: Option<MagsacConsts>,
}

impl LossFunction {
    /// `dof` only affects [`LossKind::MagsacPP`].
    pub fn new(kind: LossKind, epsilon: f64, dof: u32) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!("loss threshold must be positive, got {epsilon}")));
        }
        if dof == 0 {
            return Err(Error::InvalidConfig("loss dof must be positive".into()));
        }
        let magsac = (kind == LossKind::MagsacPP).then(|| {
            let chi = ChiSquared::new(dof as f64).expect("positive dof");
            let k2 = chi.inverse_cdf(MAGSAC_QUANTILE);
            let a = 0.5 * (dof as f64 - 1.0);
            let big_k = 0.5 * k2;
            MagsacConsts { a, big_k, upper_at_k: upper_gamma(a, big_k), lower_norm: lower_gamma(a + 1.0, big_k) }
        });
        Ok(Self { kind, epsilon, dof, magsac })
    }

    pub fn hard(epsilon: f64) -> Result<Self> {
        Self::new(LossKind::Hard01, epsilon, 1)
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    /// Residual at and beyond which the loss is 1.
    pub fn cutoff(&self) -> f64 {
        self.epsilon
    }

    /// Loss in `[0, 1]`.
    #[inline]
    pub fn loss(&self, r: f64) -> f64 {
        let eps = self.epsilon;
        if !(r < eps) {
            return 1.0;
        }
        let r = r.max(0.0);
        match self.kind {
            LossKind::Hard01 => 0.0,
            LossKind::Msac => (r * r) / (eps * eps),
            LossKind::Huber => {
                let delta = 0.5 * eps;
                let rho = if r <= delta { 0.5 * r * r } else { delta * (r - 0.5 * delta) };
                (rho / (0.375 * eps * eps)).min(1.0)
            }
            LossKind::RedescendingHuber => {
                let (a, b) = (eps / 3.0, 2.0 * eps / 3.0);
                let rho = if r <= a {
                    0.5 * r * r
                } else if r <= b {
                    a * r - 0.5 * a * a
                } else {
                    a * b - 0.5 * a * a + 0.5 * a / (eps - b) * ((eps - b).powi(2) - (eps - r).powi(2))
                };
                (rho / (2.0 * eps * eps / 9.0)).min(1.0)
            }
            LossKind::TukeyBisquare => {
                let u = 1.0 - (r / eps).powi(2);
                1.0 - u * u * u
            }
            LossKind::MagsacPP => {
                let c = self.magsac.as_ref().expect("magsac constants");
                let u = c.big_k * (r / eps).powi(2);
                if u == 0.0 {
                    return 0.0;
                }
                let v = (u * (upper_gamma(c.a, u) - c.upper_at_k) + lower_gamma(c.a + 1.0, u)) / c.lower_norm;
                v.clamp(0.0, 1.0)
            }
        }
    }

    /// IRLS weight; zero exactly where the loss saturates.
    #[inline]
    pub fn weight(&self, r: f64) -> f64 {
        let eps = self.epsilon;
        if !(r < eps) {
            return 0.0;
        }
        let r = r.max(0.0);
        match self.kind {
            LossKind::Hard01 => 1.0,
            LossKind::Msac => 2.0 / (eps * eps),
            LossKind::Huber => {
                let delta = 0.5 * eps;
                let norm = 0.375 * eps * eps;
                if r <= delta {
                    1.0 / norm
                } else {
                    delta / (r * norm)
                }
            }
            LossKind::RedescendingHuber => {
                let (a, b) = (eps / 3.0, 2.0 * eps / 3.0);
                let norm = 2.0 * eps * eps / 9.0;
                let psi_over_r = if r <= a {
                    1.0
                } else if r <= b {
                    a / r
                } else {
                    a * (eps - r) / ((eps - b) * r)
                };
                psi_over_r / norm
            }
            LossKind::TukeyBisquare => {
                let u = 1.0 - (r / eps).powi(2);
                6.0 / (eps * eps) * u * u
            }
            LossKind::MagsacPP => {
                let c = self.magsac.as_ref().expect("magsac constants");
                // The a = 0 (dof 1) weight diverges at r = 0.
                let u = (c.big_k * (r / eps).powi(2)).max(1e-300);
                let scale = 2.0 * c.big_k / (eps * eps);
                (scale * (upper_gamma(c.a, u) - c.upper_at_k) / c.lower_norm).max(0.0)
            }
        }
    }
}

/// Upper incomplete gamma `Γ(a, x)`, including `a = 0` where it is `E1(x)`.
fn upper_gamma(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        exp_int_e1(x)
    } else {
        gamma(a) * gamma_ur(a, x)
    }
}

/// Lower incomplete gamma `γ(a, x)`.
fn lower_gamma(a: f64, x: f64) -> f64 {
    gamma(a) * gamma_lr(a, x)
}

/// Exponential integral `E1(x)` for `x > 0`: power series below 1, Lentz
/// continued fraction above.
fn exp_int_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER - x.ln() - sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}
