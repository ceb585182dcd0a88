//! Divergence-function descriptors and the f-divergence evaluator.
//!
//! A divergence function carries its pointwise evaluator together with the
//! boundary data the quantum formula needs: the value `f(0)`, the right
//! limit `f(0+)` (they differ for the indicator of `{0}`), and the slope
//! at infinity `omega = lim f(x)/x` that weighs the part of the first
//! operator living outside the support of the second.
//!
//! The evaluator is purely spectral: with `A = sum a P_a`, `B = sum b Q_b`,
//!
//! ```text
//! S_f(A||B) = sum_a [ sum_{b>0} b f(a/b) Tr P_a Q_b + a omega Tr P_a Q_0 ]
//! ```
//!
//! under the extended-real conventions `0 * (±inf) = 0`.

use crate::matcore::{rmax, trace_re, PsdOperator};
use crate::opconvex::RepresentingMeasure;
use crate::scalar::{r, to_f64, ExtReal, Real};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Serializable divergence-function descriptor, the wire format
/// `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    XLogX,
    Power { alpha: f64 },
    NegPower { alpha: f64 },
    PhiT { t: f64 },
    IndicatorZero,
    Affine { c0: f64, c1: f64 },
    AbsMinusOne,
}

/// Scalar function descriptor for f-divergences.
#[derive(Clone)]
pub struct DivergenceFunction<R: Real> {
    name: String,
    evaluator: Arc<dyn Fn(R) -> R + Send + Sync>,
    f0: R,
    f0_plus: R,
    omega: ExtReal<R>,
    operator_convex: bool,
    representation: Option<Arc<RepresentingMeasure<R>>>,
}

impl<R: Real> std::fmt::Debug for DivergenceFunction<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivergenceFunction")
            .field("name", &self.name)
            .field("f0", &to_f64(self.f0))
            .field("f0_plus", &to_f64(self.f0_plus))
            .field("omega", &self.omega.to_f64_lossy())
            .field("operator_convex", &self.operator_convex)
            .finish()
    }
}

impl<R: Real> DivergenceFunction<R> {
    /// `f(x) = x log x`, the relative-entropy generator.
    pub fn x_log_x() -> Self {
        DivergenceFunction {
            name: "x_log_x".into(),
            evaluator: Arc::new(|x: R| {
                if x == R::zero() {
                    R::zero()
                } else {
                    x * x.ln()
                }
            }),
            f0: R::zero(),
            f0_plus: R::zero(),
            omega: ExtReal::PosInf,
            operator_convex: true,
            representation: None,
        }
    }

    /// `f(x) = x^alpha` for `alpha >= 0`.
    ///
    /// `alpha = 0` is the support function (`1` on `(0, inf)`, `0` at `0`)
    /// and `alpha = 1` the identity. Operator convexity holds exactly for
    /// `alpha` in `[1, 2]`.
    pub fn power(alpha: R) -> Result<Self> {
        if alpha < R::zero() {
            return Err(Error::InvalidInput("power needs alpha >= 0".into()));
        }
        let omega = if alpha > R::one() {
            ExtReal::PosInf
        } else if alpha == R::one() {
            ExtReal::Finite(R::one())
        } else {
            ExtReal::zero()
        };
        let (f0, f0_plus) = if alpha == R::zero() {
            (R::zero(), R::one())
        } else {
            (R::zero(), R::zero())
        };
        Ok(DivergenceFunction {
            name: format!("power({})", to_f64(alpha)),
            evaluator: Arc::new(move |x: R| {
                if alpha == R::zero() {
                    if x > R::zero() {
                        R::one()
                    } else {
                        R::zero()
                    }
                } else {
                    x.powf(alpha)
                }
            }),
            f0,
            f0_plus,
            omega,
            operator_convex: alpha >= R::one() && alpha <= r(2.0),
            representation: None,
        })
    }

    /// `f(x) = -x^alpha` for `0 < alpha < 1`; operator convex with
    /// `omega = 0`.
    pub fn neg_power(alpha: R) -> Result<Self> {
        if alpha <= R::zero() || alpha >= R::one() {
            return Err(Error::InvalidInput("neg_power needs 0 < alpha < 1".into()));
        }
        Ok(DivergenceFunction {
            name: format!("neg_power({})", to_f64(alpha)),
            evaluator: Arc::new(move |x: R| -x.powf(alpha)),
            f0: R::zero(),
            f0_plus: R::zero(),
            omega: ExtReal::zero(),
            operator_convex: true,
            representation: None,
        })
    }

    /// The primitive `phi_t(x) = -x/(x+t)`, `t > 0`: the building block of
    /// every operator convex function through the integral representation.
    pub fn phi_t(t: R) -> Result<Self> {
        if t <= R::zero() {
            return Err(Error::InvalidInput("phi_t needs t > 0".into()));
        }
        Ok(DivergenceFunction {
            name: format!("phi_t({})", to_f64(t)),
            evaluator: Arc::new(move |x: R| -x / (x + t)),
            f0: R::zero(),
            f0_plus: R::zero(),
            omega: ExtReal::zero(),
            operator_convex: true,
            representation: None,
        })
    }

    /// Indicator of `{0}`: operator convex, discontinuous at `0`.
    pub fn indicator_zero() -> Self {
        DivergenceFunction {
            name: "indicator_zero".into(),
            evaluator: Arc::new(|x: R| if x == R::zero() { R::one() } else { R::zero() }),
            f0: R::one(),
            f0_plus: R::zero(),
            omega: ExtReal::zero(),
            operator_convex: true,
            representation: None,
        }
    }

    /// `f(x) = c0 + c1 x`. Divergence-trivial: preserved by every
    /// trace-preserving map.
    pub fn affine(c0: R, c1: R) -> Self {
        DivergenceFunction {
            name: format!("affine({},{})", to_f64(c0), to_f64(c1)),
            evaluator: Arc::new(move |x: R| c0 + c1 * x),
            f0: c0,
            f0_plus: c0,
            omega: ExtReal::Finite(c1),
            operator_convex: true,
            representation: None,
        }
    }

    /// `f(x) = |x - 1|`: classically convex (total variation) but not
    /// operator convex.
    pub fn abs_minus_one() -> Self {
        DivergenceFunction {
            name: "abs_minus_one".into(),
            evaluator: Arc::new(|x: R| (x - R::one()).abs()),
            f0: R::one(),
            f0_plus: R::one(),
            omega: ExtReal::Finite(R::one()),
            operator_convex: false,
            representation: None,
        }
    }

    /// Arbitrary evaluator with explicitly declared boundary data. The
    /// operator-convexity flag is taken on trust and only probed in tests.
    pub fn custom<F: Fn(R) -> R + Send + Sync + 'static>(
        name: &str,
        evaluator: F,
        f0: R,
        f0_plus: R,
        omega: ExtReal<R>,
        operator_convex: bool,
    ) -> Self {
        DivergenceFunction {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            f0,
            f0_plus,
            omega,
            operator_convex,
            representation: None,
        }
    }

    /// Builds from the serializable descriptor.
    pub fn build(spec: &FunctionSpec) -> Result<Self> {
        match spec {
            FunctionSpec::XLogX => Ok(Self::x_log_x()),
            FunctionSpec::Power { alpha } => Self::power(r(*alpha)),
            FunctionSpec::NegPower { alpha } => Self::neg_power(r(*alpha)),
            FunctionSpec::PhiT { t } => Self::phi_t(r(*t)),
            FunctionSpec::IndicatorZero => Ok(Self::indicator_zero()),
            FunctionSpec::Affine { c0, c1 } => Ok(Self::affine(r(*c0), r(*c1))),
            FunctionSpec::AbsMinusOne => Ok(Self::abs_minus_one()),
        }
    }

    pub fn with_representation(mut self, rep: RepresentingMeasure<R>) -> Self {
        self.representation = Some(Arc::new(rep));
        self
    }

    pub fn representation(&self) -> Option<&RepresentingMeasure<R>> {
        self.representation.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn omega(&self) -> ExtReal<R> {
        self.omega
    }

    pub fn f0(&self) -> R {
        self.f0
    }

    pub fn f0_plus(&self) -> R {
        self.f0_plus
    }

    pub fn is_operator_convex(&self) -> bool {
        self.operator_convex
    }

    /// Pointwise evaluation; `x = 0` returns the declared `f(0)`.
    pub fn eval(&self, x: R) -> Result<R> {
        let v = if x == R::zero() {
            self.f0
        } else {
            (self.evaluator)(x)
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(to_f64(x)))
        }
    }

    /// Checks the declared boundary data against the evaluator: operator
    /// convexity forces `f(0) >= f(0+)`, the right limit must match a
    /// probe near zero, and a finite slope at infinity must match a
    /// growth probe. Intended for custom descriptors.
    pub fn validate(&self) -> Result<()> {
        if self.operator_convex && self.f0 < self.f0_plus - r(1e-12) {
            return Err(Error::InvalidInput(format!(
                "{}: operator convexity needs f(0) >= f(0+)",
                self.name
            )));
        }
        // Convergence probes rather than fixed-point checks: algebraic
        // tails like x^0.3 approach their limits slowly.
        let d_coarse = (self.eval(r(1e-3))? - self.f0_plus).abs();
        let d_fine = (self.eval(r(1e-9))? - self.f0_plus).abs();
        let scale = rmax(self.f0_plus.abs(), R::one());
        if d_fine > d_coarse + r::<R>(1e-12) * scale || d_fine > r::<R>(1e-2) * scale {
            return Err(Error::InvalidInput(format!(
                "{}: declared f(0+) disagrees with the evaluator near zero",
                self.name
            )));
        }
        if let ExtReal::Finite(w) = self.omega {
            let slope = |x: R| -> Result<R> { Ok(self.eval(x)? / x) };
            let s_coarse = (slope(r(1e6))? - w).abs();
            let s_fine = (slope(r(1e10))? - w).abs();
            let scale = rmax(w.abs(), R::one());
            if s_fine > s_coarse + r::<R>(1e-12) * scale || s_fine > r::<R>(1e-2) * scale {
                return Err(Error::InvalidInput(format!(
                    "{}: declared omega disagrees with the growth probe",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Mass below which `Tr A (I - B^0)` counts as zero, so that fp residue
/// never triggers the `omega = +inf` branch on support-contained pairs.
fn support_mass_floor<R: Real>(a: &PsdOperator<R>) -> R {
    r::<R>(1e-12) * rmax(a.trace().abs(), R::one())
}

/// Quantum f-divergence `S_f(A||B)` through the spectral double sum.
pub fn f_divergence<R: Real>(
    a: &PsdOperator<R>,
    b: &PsdOperator<R>,
    f: &DivergenceFunction<R>,
) -> Result<ExtReal<R>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let mut finite = R::zero();
    let mut kernel_mass = R::zero();
    let b_kernel = (b.support_rank() < b.dim()).then(|| b.kernel_projection());

    for ca in a.spectral().clusters() {
        for cb in b.spectral().clusters() {
            if cb.value <= R::zero() {
                continue;
            }
            let w = trace_re(&(&ca.projection * &cb.projection));
            let w = rmax(w, R::zero());
            if w == R::zero() {
                continue;
            }
            let ratio = ca.value / cb.value;
            finite += cb.value * f.eval(ratio)? * w;
        }
        if let Some(k) = &b_kernel {
            if ca.value > R::zero() {
                let w = rmax(trace_re(&(&ca.projection * k)), R::zero());
                kernel_mass += ca.value * w;
            }
        }
    }

    let mut total = ExtReal::Finite(finite);
    if kernel_mass > support_mass_floor(a) {
        total = total.checked_add(f.omega().scale(kernel_mass))?;
    }
    Ok(total)
}

/// Rényi relative entropy `S_alpha = log(S_{f_alpha}) / (alpha - 1)` for
/// `alpha >= 0`, `alpha != 1`. For `alpha > 1` the support rule makes the
/// value `+inf` when `supp A` is not contained in `supp B`.
pub fn renyi<R: Real>(a: &PsdOperator<R>, b: &PsdOperator<R>, alpha: R) -> Result<ExtReal<R>> {
    if alpha < R::zero() {
        return Err(Error::InvalidInput("renyi needs alpha >= 0".into()));
    }
    if alpha == R::one() {
        return Err(Error::InvalidInput(
            "alpha = 1 is the relative entropy; call relative_entropy".into(),
        ));
    }
    let f = DivergenceFunction::power(alpha)?;
    let s = f_divergence(a, b, &f)?;
    Ok(ExtReal::ln_of(s)?.scale(R::one() / (alpha - R::one())))
}

/// Relative entropy `Tr A (log* A - log* B)` under support containment,
/// `+inf` otherwise.
pub fn relative_entropy<R: Real>(a: &PsdOperator<R>, b: &PsdOperator<R>) -> Result<ExtReal<R>> {
    f_divergence(a, b, &DivergenceFunction::x_log_x())
}

/// Classical weight pair on a finite support.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalPair<R> {
    pub p: Vec<R>,
    pub q: Vec<R>,
}

impl<R: Real> ClassicalPair<R> {
    pub fn new(p: Vec<R>, q: Vec<R>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch(p.len(), q.len()));
        }
        let floor = -r::<R>(1e-12);
        if p.iter()
            .chain(q.iter())
            .any(|x| !x.is_finite() || *x < floor)
        {
            return Err(Error::InvalidInput(
                "weights must be finite and >= 0".into(),
            ));
        }
        let clamp = |v: Vec<R>| v.into_iter().map(|x| rmax(x, R::zero())).collect();
        Ok(ClassicalPair {
            p: clamp(p),
            q: clamp(q),
        })
    }
}

/// The classical reduction of a state pair: joint weights
/// `p(a,b) = a Tr P_a Q_b`, `q(a,b) = b Tr P_a Q_b` on
/// `spect(A) x spect(B)`. Every f-divergence survives the reduction.
pub fn nsz_reduce<R: Real>(a: &PsdOperator<R>, b: &PsdOperator<R>) -> Result<ClassicalPair<R>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let mut p = Vec::new();
    let mut q = Vec::new();
    for ca in a.spectral().clusters() {
        for cb in b.spectral().clusters() {
            let w = rmax(trace_re(&(&ca.projection * &cb.projection)), R::zero());
            p.push(ca.value * w);
            q.push(cb.value * w);
        }
    }
    ClassicalPair::new(p, q)
}

/// Classical f-divergence `sum_{q>0} q f(p/q) + omega sum_{q=0} p`.
pub fn classical_f_divergence<R: Real>(
    pair: &ClassicalPair<R>,
    f: &DivergenceFunction<R>,
) -> Result<ExtReal<R>> {
    let mut finite = R::zero();
    let mut off_support = R::zero();
    for (&pi, &qi) in pair.p.iter().zip(pair.q.iter()) {
        if qi > R::zero() {
            finite += qi * f.eval(pi / qi)?;
        } else {
            off_support += pi;
        }
    }
    let mut total = ExtReal::Finite(finite);
    let p_scale = pair.p.iter().fold(R::zero(), |acc, &x| acc + x);
    if off_support > r::<R>(1e-12) * rmax(p_scale, R::one()) {
        total = total.checked_add(f.omega().scale(off_support))?;
    }
    Ok(total)
}

/// Uhlmann fidelity `Tr sqrt(rho^{1/2} sigma rho^{1/2})`.
pub fn fidelity<R: Real>(rho: &PsdOperator<R>, sigma: &PsdOperator<R>) -> Result<R> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let s = rho.sqrt_matrix();
    let m = &s * sigma.matrix() * &s;
    let tol = *rho.tolerances();
    let sd = crate::matcore::spectral_decompose(&m, tol.cluster, r(1e-6))?;
    let mut acc = R::zero();
    for c in sd.clusters() {
        if c.value > R::zero() {
            acc += c.value.sqrt() * R::from_usize(c.multiplicity).unwrap();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{creal, CMatrix, PsdOperator};
    use nalgebra::DVector;

    type P = PsdOperator<f64>;

    fn fin(v: ExtReal<f64>) -> f64 {
        v.unwrap_finite()
    }

    fn e1_psi_pair() -> (P, P) {
        let e1 = DVector::from_column_slice(&[creal(1.0), creal(0.0)]);
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = DVector::from_column_slice(&[creal(s), creal(s)]);
        (P::pure_state(&e1).unwrap(), P::pure_state(&psi).unwrap())
    }

    #[test]
    fn function_boundary_data() {
        let phi1 = DivergenceFunction::<f64>::phi_t(1.0).unwrap();
        assert_eq!(phi1.eval(1.0).unwrap(), -0.5);
        assert_eq!(phi1.f0(), 0.0);
        assert_eq!(phi1.omega(), ExtReal::zero());

        let p2 = DivergenceFunction::<f64>::power(2.0).unwrap();
        assert_eq!(p2.omega(), ExtReal::PosInf);
        assert_eq!(p2.f0(), 0.0);

        let xlx = DivergenceFunction::<f64>::x_log_x();
        assert_eq!(xlx.eval(1.0).unwrap(), 0.0);
        assert_eq!(xlx.omega(), ExtReal::PosInf);

        let ind = DivergenceFunction::<f64>::indicator_zero();
        assert_eq!(ind.f0(), 1.0);
        assert_eq!(ind.f0_plus(), 0.0);

        assert!(DivergenceFunction::<f64>::neg_power(1.5).is_err());
        assert!(DivergenceFunction::<f64>::phi_t(0.0).is_err());
    }

    #[test]
    fn boundary_data_validates() {
        for f in [
            DivergenceFunction::<f64>::x_log_x(),
            DivergenceFunction::power(0.5).unwrap(),
            DivergenceFunction::power(2.0).unwrap(),
            DivergenceFunction::neg_power(0.3).unwrap(),
            DivergenceFunction::phi_t(2.0).unwrap(),
            DivergenceFunction::indicator_zero(),
            DivergenceFunction::affine(1.0, -2.0),
            DivergenceFunction::abs_minus_one(),
        ] {
            f.validate().unwrap_or_else(|e| panic!("{}: {e}", f.name()));
        }
        // A lying custom descriptor is caught.
        let bad = DivergenceFunction::custom(
            "bad_omega",
            |x: f64| x * x,
            0.0,
            0.0,
            ExtReal::Finite(0.0),
            true,
        );
        assert!(bad.validate().is_err());
        let bad0 =
            DivergenceFunction::custom("bad_f0", |_x: f64| 1.0, 0.0, 1.0, ExtReal::zero(), true);
        assert!(bad0.validate().is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = FunctionSpec::PhiT { t: 1.0 };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"kind":"phi_t","params":{"t":1.0}}"#);
        let back: FunctionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let unit: FunctionSpec = serde_json::from_str(r#"{"kind":"x_log_x"}"#).unwrap();
        assert_eq!(unit, FunctionSpec::XLogX);
    }

    #[test]
    fn equal_arguments_give_f1_times_trace() {
        let rho = P::from_diagonal(&[0.4, 0.35, 0.25]).unwrap();
        for f in [
            DivergenceFunction::x_log_x(),
            DivergenceFunction::phi_t(2.0).unwrap(),
            DivergenceFunction::power(2.0).unwrap(),
        ] {
            let v = fin(f_divergence(&rho, &rho, &f).unwrap());
            let expect = f.eval(1.0).unwrap() * rho.trace();
            assert!((v - expect).abs() < 1e-12, "{}", f.name());
        }
    }

    #[test]
    fn pure_pair_closed_form() {
        // S_f = f(1)/2 + omega/2 + f(0)/2 for |e1>, |psi=(e1+e2)/sqrt 2>.
        let (rho, sigma) = e1_psi_pair();
        let phi1 = DivergenceFunction::phi_t(1.0).unwrap();
        let v = fin(f_divergence(&rho, &sigma, &phi1).unwrap());
        assert!((v - (-0.25)).abs() < 1e-12);

        // x log x: support violated, omega = +inf.
        let xlx = DivergenceFunction::x_log_x();
        assert_eq!(f_divergence(&rho, &sigma, &xlx).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn renyi_values() {
        let rho = P::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!(fin(renyi(&rho, &rho, 0.7).unwrap()).abs() < 1e-12);

        let a = P::from_diagonal(&[0.5, 0.5]).unwrap();
        let b = P::from_diagonal(&[0.25, 0.75]).unwrap();
        // Tr A^2 B^{-1} = 4/3.
        let s2 = fin(renyi(&a, &b, 2.0).unwrap());
        assert!((s2 - (4.0_f64 / 3.0).ln()).abs() < 1e-12);

        // alpha > 1 support rule.
        let (rho, sigma) = e1_psi_pair();
        assert_eq!(renyi(&rho, &sigma, 2.0).unwrap(), ExtReal::PosInf);
        // alpha < 1 stays finite without support containment.
        assert!(renyi(&rho, &sigma, 0.5).unwrap().is_finite());
    }

    #[test]
    fn relative_entropy_classical_value() {
        let a = P::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let b = P::from_diagonal(&[0.5, 0.5]).unwrap();
        let expect = (2.0 / 3.0) * (4.0_f64 / 3.0).ln() + (1.0 / 3.0) * (2.0_f64 / 3.0).ln();
        assert!((fin(relative_entropy(&a, &b).unwrap()) - expect).abs() < 1e-12);
    }

    #[test]
    fn nsz_weights_for_pure_pair() {
        let (rho, sigma) = e1_psi_pair();
        let pair = nsz_reduce(&rho, &sigma).unwrap();
        // Both operators have spectrum {0, 1}; all four overlaps are 1/2.
        let mut p_sorted = pair.p.clone();
        p_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut q_sorted = pair.q.clone();
        q_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pair.p.len(), 4);
        for (v, expect) in p_sorted.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((v - expect).abs() < 1e-12);
        }
        for (v, expect) in q_sorted.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn nsz_preserves_divergences_on_random_pairs() {
        let mut rng = crate::sampling::rng_from_seed(11);
        let functions = [
            DivergenceFunction::x_log_x(),
            DivergenceFunction::power(0.5).unwrap(),
            DivergenceFunction::phi_t(1.0).unwrap(),
            DivergenceFunction::indicator_zero(),
        ];
        for _ in 0..20 {
            let a = P::new(crate::sampling::random_density(&mut rng, 2, 2)).unwrap();
            let b = P::new(crate::sampling::random_density(&mut rng, 2, 2)).unwrap();
            let pair = nsz_reduce(&a, &b).unwrap();
            for f in &functions {
                let quantum = fin(f_divergence(&a, &b, f).unwrap());
                let classical = fin(classical_f_divergence(&pair, f).unwrap());
                assert!(
                    (quantum - classical).abs() < 1e-10,
                    "{}: {quantum} vs {classical}",
                    f.name()
                );
            }
        }
    }

    #[test]
    fn classical_values() {
        // p = q.
        let pair = ClassicalPair::new(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        let phi = DivergenceFunction::phi_t(1.0).unwrap();
        let v = fin(classical_f_divergence(&pair, &phi).unwrap());
        assert!((v - (-0.5)).abs() < 1e-12);

        // Total variation via |x-1| under support containment.
        let pair = ClassicalPair::new(vec![0.2, 0.8], vec![0.5, 0.5]).unwrap();
        let tv = fin(classical_f_divergence(&pair, &DivergenceFunction::abs_minus_one()).unwrap());
        assert!((tv - 0.6).abs() < 1e-12);

        // KL of (1,0) vs (1/2,1/2) is log 2.
        let pair = ClassicalPair::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let kl = fin(classical_f_divergence(&pair, &DivergenceFunction::x_log_x()).unwrap());
        assert!((kl - 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_values() {
        let rho = P::from_diagonal(&[0.7, 0.3]).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);

        let sigma = P::from_diagonal(&[0.2, 0.8]).unwrap();
        let expect = (0.7_f64 * 0.2).sqrt() + (0.3_f64 * 0.8).sqrt();
        assert!((fidelity(&rho, &sigma).unwrap() - expect).abs() < 1e-12);

        // Non-commuting pure pair: fidelity differs from S_{x^{1/2}}.
        let (rho, sigma) = e1_psi_pair();
        let f_uhlmann = fidelity(&rho, &sigma).unwrap();
        let f_half =
            fin(f_divergence(&rho, &sigma, &DivergenceFunction::power(0.5).unwrap()).unwrap());
        assert!((f_uhlmann - f_half).abs() > 1e-3);
        assert!((f_uhlmann - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((f_half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_second_argument_weighs_by_omega() {
        let a = P::from_diagonal(&[0.4, 0.6]).unwrap();
        let zero = P::new(CMatrix::<f64>::zeros(2, 2)).unwrap();
        // omega finite: S_f(A||0) = omega * Tr A.
        let aff = DivergenceFunction::affine(0.0, 2.0);
        assert!((fin(f_divergence(&a, &zero, &aff).unwrap()) - 2.0).abs() < 1e-12);
        // omega = 0 gives zero.
        let phi = DivergenceFunction::phi_t(1.0).unwrap();
        assert_eq!(fin(f_divergence(&a, &zero, &phi).unwrap()), 0.0);
        // A = 0 as well: 0 * (+inf) = 0.
        let xlx = DivergenceFunction::x_log_x();
        assert_eq!(fin(f_divergence(&zero, &zero, &xlx).unwrap()), 0.0);
    }
}
