//! Binary state discrimination measures.
//!
//! Everything is driven by the curve `psi(alpha) = log Tr A^alpha B^(1-alpha)`
//! evaluated on the eigenvalue-ratio clusters: the Chernoff distance is
//! `-min_[0,1] psi`, the Hoeffding distance its Legendre-type transform,
//! and the Bayesian measure `T_p` comes from the trace-norm error of the
//! optimal (Helstrom) test. Multi-copy exponents are computed directly on
//! tensor powers up to a dimension cap.

use crate::matcore::{rmax, trace_norm, trace_re, PsdOperator};
use crate::optim::{maximize_concave_half_line, minimize_convex, MinimizerKind};
use crate::scalar::{r, ExtReal, Real};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// The curve `alpha -> log Tr A^alpha B^(1-alpha)` with its analytic
/// derivative, cached as ratio clusters `(a, b, Tr P_a Q_b)`.
#[derive(Debug, Clone)]
pub struct PsiCurve<R: Real> {
    terms: Vec<(R, R, R)>,
}

impl<R: Real> PsiCurve<R> {
    pub fn new(a: &PsdOperator<R>, b: &PsdOperator<R>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch(a.dim(), b.dim()));
        }
        let mut terms = Vec::new();
        for ca in a.nonzero_clusters() {
            for cb in b.nonzero_clusters() {
                let w = rmax(trace_re(&(&ca.projection * &cb.projection)), R::zero());
                if w > R::zero() {
                    terms.push((ca.value, cb.value, w));
                }
            }
        }
        Ok(PsiCurve { terms })
    }

    /// `Tr A^alpha B^(1-alpha)` (powers on supports).
    pub fn overlap(&self, alpha: R) -> R {
        let mut acc = R::zero();
        for &(a, b, w) in &self.terms {
            acc += a.powf(alpha) * b.powf(R::one() - alpha) * w;
        }
        acc
    }

    fn overlap_prime(&self, alpha: R) -> R {
        let mut acc = R::zero();
        for &(a, b, w) in &self.terms {
            acc += a.powf(alpha) * b.powf(R::one() - alpha) * (a / b).ln() * w;
        }
        acc
    }

    /// `psi(alpha)` with `log 0 = -inf`.
    pub fn psi(&self, alpha: R) -> ExtReal<R> {
        let m = self.overlap(alpha);
        if m <= R::zero() {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(m.ln())
        }
    }

    /// Analytic derivative `psi'(alpha) = m'(alpha)/m(alpha)`; `None` on
    /// orthogonal supports. On the ratio clusters this is exactly the
    /// relative-entropy expression of the endpoint identities.
    pub fn psi_prime(&self, alpha: R) -> Option<R> {
        let m = self.overlap(alpha);
        if m <= R::zero() {
            None
        } else {
            Some(self.overlap_prime(alpha) / m)
        }
    }

    /// True when the supports are orthogonal (`psi = -inf` on (0,1)).
    pub fn is_orthogonal(&self) -> bool {
        self.terms.is_empty()
    }

    /// Midpoint convexity defect over an alpha grid; nonpositive within
    /// tolerance for a genuine psi-curve.
    pub fn convexity_defect(&self, grid: usize) -> R {
        let mut worst = -r::<R>(1.0);
        for i in 0..grid {
            for j in (i + 1)..grid {
                let a1 = r::<R>(i as f64 / (grid - 1) as f64);
                let a2 = r::<R>(j as f64 / (grid - 1) as f64);
                if let (Some(f1), Some(f2), Some(fm)) = (
                    self.psi(a1).finite(),
                    self.psi(a2).finite(),
                    self.psi((a1 + a2) * r(0.5)).finite(),
                ) {
                    worst = rmax(worst, fm - (f1 + f2) * r(0.5));
                }
            }
        }
        worst
    }
}

/// `psi(alpha | A || B) = log Tr A^alpha B^(1-alpha)`.
pub fn psi<R: Real>(a: &PsdOperator<R>, b: &PsdOperator<R>, alpha: R) -> Result<ExtReal<R>> {
    Ok(PsiCurve::new(a, b)?.psi(alpha))
}

/// Chernoff distance with the argmin and its location classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChernoffResult<R: Real> {
    pub value: ExtReal<R>,
    pub alpha_star: R,
    /// Interior/endpoint/constant classification of the minimizer; the
    /// recovery-from-equality arguments need interiority as a hypothesis.
    pub minimizer: String,
}

pub(crate) fn minimizer_name(kind: MinimizerKind) -> String {
    match kind {
        MinimizerKind::Interior => "interior".into(),
        MinimizerKind::LeftEndpoint => "left_endpoint".into(),
        MinimizerKind::RightEndpoint => "right_endpoint".into(),
        MinimizerKind::Constant => "constant".into(),
    }
}

/// `C(A||B) = -min_{alpha in [0,1]} psi(alpha)`, endpoint-inclusive.
pub fn chernoff_distance<R: Real>(
    a: &PsdOperator<R>,
    b: &PsdOperator<R>,
) -> Result<ChernoffResult<R>> {
    let curve = PsiCurve::new(a, b)?;
    chernoff_of_curve(&curve)
}

pub(crate) fn chernoff_of_curve<R: Real>(curve: &PsiCurve<R>) -> Result<ChernoffResult<R>> {
    if curve.is_orthogonal() {
        return Ok(ChernoffResult {
            value: ExtReal::PosInf,
            alpha_star: r(0.5),
            minimizer: "constant".into(),
        });
    }
    let res = minimize_convex(|alpha| curve.psi(alpha), R::zero(), R::one(), r(1e-10), 200);
    let value = match res.value {
        ExtReal::Finite(v) => ExtReal::Finite(-v),
        ExtReal::NegInf => ExtReal::PosInf,
        ExtReal::PosInf => ExtReal::NegInf,
    };
    Ok(ChernoffResult {
        value,
        alpha_star: res.x,
        minimizer: minimizer_name(res.kind),
    })
}

/// Hoeffding distance with the maximizing alpha when interior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoeffdingResult<R: Real> {
    pub value: ExtReal<R>,
    pub alpha_star: Option<R>,
}

/// `H_r(A||B) = sup_{0 <= alpha < 1} (-alpha r - psi(alpha)) / (1-alpha)`,
/// evaluated as `sup_{s >= 0} (-s r - (1+s) psi(s/(1+s)))`.
///
/// The flat and divergent regimes are resolved from the endpoint data:
/// the value is `+inf` when `-r > psi(1)` and `-psi(0)` when
/// `-r < psi(0) + psi'(0)`.
pub fn hoeffding_distance<R: Real>(
    a: &PsdOperator<R>,
    b: &PsdOperator<R>,
    rate: R,
) -> Result<HoeffdingResult<R>> {
    let curve = PsiCurve::new(a, b)?;
    hoeffding_of_curve(&curve, rate)
}

pub(crate) fn hoeffding_of_curve<R: Real>(
    curve: &PsiCurve<R>,
    rate: R,
) -> Result<HoeffdingResult<R>> {
    if curve.is_orthogonal() {
        return Ok(HoeffdingResult {
            value: ExtReal::PosInf,
            alpha_star: None,
        });
    }
    let psi0 = curve.psi(R::zero());
    let psi1 = curve.psi(R::one());

    // -r above the terminal slope: the supremum runs away.
    match psi1 {
        ExtReal::Finite(v1) => {
            if -rate > v1 {
                return Ok(HoeffdingResult {
                    value: ExtReal::PosInf,
                    alpha_star: None,
                });
            }
        }
        ExtReal::NegInf => {
            return Ok(HoeffdingResult {
                value: ExtReal::PosInf,
                alpha_star: None,
            });
        }
        ExtReal::PosInf => unreachable!("overlap is finite"),
    }

    let v0 = match psi0 {
        ExtReal::Finite(v) => v,
        ExtReal::NegInf => {
            // Tr A^0 B = 0 while Tr A B^0 > 0 cannot happen for psi
            // convex unless supports are orthogonal, handled above.
            return Ok(HoeffdingResult {
                value: ExtReal::PosInf,
                alpha_star: None,
            });
        }
        ExtReal::PosInf => unreachable!(),
    };
    if let Some(slope0) = curve.psi_prime(R::zero()) {
        if -rate < v0 + slope0 {
            return Ok(HoeffdingResult {
                value: ExtReal::Finite(-v0),
                alpha_star: Some(R::zero()),
            });
        }
    }

    let objective = |s: R| -> ExtReal<R> {
        let alpha = s / (R::one() + s);
        match curve.psi(alpha) {
            ExtReal::Finite(p) => ExtReal::Finite(-s * rate - (R::one() + s) * p),
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
        }
    };
    let (s_star, value) = maximize_concave_half_line(objective, r(1e-12), 300);
    Ok(HoeffdingResult {
        value,
        alpha_star: Some(s_star / (R::one() + s_star)),
    })
}

/// Bayesian discrimination measure for priors `(p, 1-p)`:
/// `T_p = -log P_err / min(p, 1-p)` with
/// `P_err = (1 - |p rho - (1-p) sigma|_1) / 2`; `+inf` when the optimal
/// test never errs.
pub fn bayes_measure_tp<R: Real>(
    rho: &PsdOperator<R>,
    sigma: &PsdOperator<R>,
    p: R,
) -> Result<ExtReal<R>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    if p <= R::zero() || p >= R::one() {
        return Err(Error::InvalidInput("prior p must be in (0,1)".into()));
    }
    let tol = r::<R>(1e-8);
    if !rho.is_density(tol) || !sigma.is_density(tol) {
        return Err(Error::NotDensity("T_p needs unit-trace states".into()));
    }
    let m = rho.matrix().map(|z| z * crate::matcore::creal(p))
        - sigma
            .matrix()
            .map(|z| z * crate::matcore::creal(R::one() - p));
    tp_from_helstrom(trace_norm(&m), p)
}

fn tp_from_helstrom<R: Real>(helstrom_norm: R, p: R) -> Result<ExtReal<R>> {
    let perr = rmax((R::one() - helstrom_norm) * r(0.5), R::zero());
    let prior = if p <= r(0.5) { p } else { R::one() - p };
    if perr <= r(1e-15) {
        return Ok(ExtReal::PosInf);
    }
    Ok(ExtReal::Finite(-(perr / prior).ln()))
}

/// One multi-copy data point: the n-copy rate `(1/n) T_p` and its gap to
/// the Chernoff distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendPoint<R: Real> {
    pub n: usize,
    pub rate: ExtReal<R>,
    /// `|rate - C|` when both ends are finite.
    pub gap: Option<R>,
}

/// The finite-n sequence `(1/n) T_p(rho^n, sigma^n)` up to `n_max`,
/// stopping at the dimension cap. The trend toward the Chernoff distance
/// is asymptotic; no per-n tolerance is implied.
pub fn exponent_trend<R: Real>(
    rho: &PsdOperator<R>,
    sigma: &PsdOperator<R>,
    p: R,
    n_max: usize,
    cap: usize,
) -> Result<Vec<TrendPoint<R>>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let tol = r::<R>(1e-8);
    if !rho.is_density(tol) || !sigma.is_density(tol) {
        return Err(Error::NotDensity(
            "exponent trend needs unit-trace states".into(),
        ));
    }
    if p <= R::zero() || p >= R::one() {
        return Err(Error::InvalidInput("prior p must be in (0,1)".into()));
    }
    let chernoff = chernoff_distance(rho, sigma)?.value;
    let q = R::one() - p;
    let mut out = Vec::new();
    for n in 1..=n_max {
        let rho_n = match crate::matcore::tensor_power(rho.matrix(), n, cap) {
            Ok(m) => m,
            Err(Error::DimensionCap(_, _)) => break,
            Err(e) => return Err(e),
        };
        let sigma_n = crate::matcore::tensor_power(sigma.matrix(), n, cap)?;
        let m = rho_n.map(|z| z * crate::matcore::creal(p))
            - sigma_n.map(|z| z * crate::matcore::creal(q));
        let tp = tp_from_helstrom(trace_norm(&m), p)?;
        let rate = tp.scale(R::one() / r(n as f64));
        let gap = match (rate.finite(), chernoff.finite()) {
            (Some(x), Some(c)) => Some((x - c).abs()),
            _ => None,
        };
        out.push(TrendPoint { n, rate, gap });
    }
    Ok(out)
}

/// Reconstructs `-S_alpha` from Hoeffding distances through the inverse
/// Legendre relation `-S_alpha = sup_r { -r alpha/(1-alpha) - H_r }`,
/// scanning `r` over the active window. Used as a duality oracle.
pub fn renyi_from_hoeffding<R: Real>(
    a: &PsdOperator<R>,
    b: &PsdOperator<R>,
    alpha: R,
    r_grid: usize,
) -> Result<ExtReal<R>> {
    if alpha < R::zero() || alpha >= R::one() {
        return Err(Error::InvalidInput("duality needs alpha in [0,1)".into()));
    }
    let curve = PsiCurve::new(a, b)?;
    if curve.is_orthogonal() {
        return Ok(ExtReal::NegInf);
    }
    let v0 = curve.psi(R::zero()).unwrap_finite();
    let v1 = curve.psi(R::one()).unwrap_finite();
    let slope0 = curve.psi_prime(R::zero()).unwrap();
    // Active interval of rates: -psi(1) <= r <= -psi(0) - psi'(0).
    let lo = -v1;
    let hi = -v0 - slope0;
    let factor = alpha / (R::one() - alpha);
    let mut best = ExtReal::NegInf;
    for i in 0..=r_grid {
        let s = r::<R>(i as f64 / r_grid as f64);
        let rate = lo + (hi - lo) * s;
        let h = hoeffding_of_curve(&curve, rate)?;
        if let Some(hv) = h.value.finite() {
            let cand = ExtReal::Finite(-rate * factor - hv);
            if cand > best {
                best = cand;
            }
        }
    }
    Ok(best)
}
