//! Integral representations of operator convex functions.
//!
//! Every continuous operator convex `f` on `[0, +inf)` decomposes as
//!
//! ```text
//! f(x) = f(0) + a x + b x^2 + int_(0,inf) ( x/(1+t) - x/(x+t) ) dmu(t)
//! ```
//!
//! with `b >= 0` and `int dmu/(1+t)^2` finite; `b = lim f(x)/x^2` and
//! `a = f(1) - f(0) - b`. Two sibling forms are carried as variants: the
//! finite-slope form `f = f(0) + alpha x - int x/(x+t) dmu` (exists exactly
//! when `omega(f)` is finite, and then `omega = alpha`), and the psi-form
//! `f = f(0) + b x^2 + int (psi(t) x - x/(x+t)) dmu` for non-polynomial f.
//!
//! Divergences assemble from the same data, with the primitives
//! `phi_t(x) = -x/(x+t)` evaluated on the eigenvalue-ratio clusters:
//!
//! ```text
//! S_f(A||B) = f(0) Tr B + a Tr A B^0 + b Tr A^2 B^-1
//!           + int [ Tr A B^0 / (1+t) + S_phi_t(A||B) ] dmu(t)
//!           + omega(f) Tr A (I - B^0)
//! ```

use crate::matcore::{rmax, trace_re, PsdOperator};
use crate::quad;
use crate::scalar::{r, ExtReal, Real};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// The measure `mu` of a representation: a finite atom list or one of the
/// closed-form densities the canonical functions use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Measure<R> {
    /// Atoms `(t_i, w_i)` with `t_i > 0`, `w_i >= 0`.
    Discrete { atoms: Vec<(R, R)> },
    /// Lebesgue measure `dt`.
    Lebesgue,
    /// `scale * t^(gamma - 1) dt`.
    PowerWeight { gamma: R, scale: R },
}

impl<R: Real> Measure<R> {
    fn density(&self, t: R) -> R {
        match self {
            Measure::Discrete { .. } => unreachable!("discrete measures are summed"),
            Measure::Lebesgue => R::one(),
            Measure::PowerWeight { gamma, scale } => *scale * t.powf(*gamma - R::one()),
        }
    }

    /// `int g dmu`, by summation or adaptive quadrature.
    pub fn integrate<F: Fn(R) -> R>(&self, g: F, rel_tol: R, node_cap: usize) -> Result<R> {
        match self {
            Measure::Discrete { atoms } => {
                let mut acc = R::zero();
                for &(t, w) in atoms {
                    acc += w * g(t);
                }
                Ok(acc)
            }
            _ => quad::integrate_half_line(|t| g(t) * self.density(t), rel_tol, node_cap),
        }
    }

    fn validate(&self, rel_tol: R, node_cap: usize) -> Result<()> {
        match self {
            Measure::Discrete { atoms } => {
                if atoms.iter().any(|&(t, w)| t <= R::zero() || w < R::zero()) {
                    return Err(Error::InvalidInput(
                        "atoms need t > 0 and weight >= 0".into(),
                    ));
                }
                Ok(())
            }
            _ => {
                // The defining finiteness condition: int dmu/(1+t)^2 < inf.
                let one = R::one();
                self.integrate(|t| one / ((one + t) * (one + t)), rel_tol, node_cap)
                    .map(|_| ())
            }
        }
    }
}

/// Named linear-term shapes of the psi-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "psi", rename_all = "snake_case")]
pub enum PsiSpec<R> {
    /// `psi = 0` (the pure negative-power form).
    Zero,
    /// `psi(t) = 1/t` (the `x^alpha`, `1 < alpha < 2` form).
    InverseT,
    /// The closed form built from `f(0), f(1), f'(1), b` for
    /// non-polynomial operator convex `f`.
    ClosedForm { f0: R, f1: R, fp1: R, b: R },
}

impl<R: Real> PsiSpec<R> {
    pub fn eval(&self, t: R) -> R {
        let one = R::one();
        match self {
            PsiSpec::Zero => R::zero(),
            PsiSpec::InverseT => one / t,
            PsiSpec::ClosedForm { f0, f1, fp1, b } => {
                let a = *f1 - *f0 - *b;
                let ratio = a / (*fp1 - *f1 + *f0 - *b);
                one / (one + t) + ratio / ((one + t) * (one + t))
            }
        }
    }
}

/// The structural variant of a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Variant<R> {
    /// `f0 + a x + b x^2 + int (x/(1+t) - x/(x+t)) dmu`.
    Standard { a: R, b: R },
    /// `f0 + alpha x - int x/(x+t) dmu`; exists iff `omega(f)` is finite,
    /// and then `omega = alpha`.
    FiniteOmega { alpha: R },
    /// `f0 + b x^2 + int (psi(t) x - x/(x+t)) dmu`.
    Psi { b: R, psi: PsiSpec<R> },
}

/// Canonical operator convex functions with closed-form representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalFunction<R> {
    XLogX,
    /// `-x^alpha`, `0 < alpha < 1`.
    NegPower(R),
    /// `x^alpha`, `1 < alpha < 2`.
    Power(R),
}

/// Representation data `(f(0), variant, mu)` plus the slope at infinity,
/// which is fixed by the variant rather than probed numerically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentingMeasure<R: Real> {
    pub f0: R,
    pub variant: Variant<R>,
    pub mu: Measure<R>,
    pub omega: ExtReal<R>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
}

fn default_rel_tol() -> f64 {
    quad::DEFAULT_REL_TOL
}

fn default_node_cap() -> usize {
    quad::DEFAULT_NODE_CAP
}

impl<R: Real> RepresentingMeasure<R> {
    pub fn new(f0: R, variant: Variant<R>, mu: Measure<R>, omega: ExtReal<R>) -> Result<Self> {
        let rep = RepresentingMeasure {
            f0,
            variant,
            mu,
            omega,
            rel_tol: default_rel_tol(),
            node_cap: default_node_cap(),
        };
        if let Variant::Standard { b, .. } | Variant::Psi { b, .. } = &rep.variant {
            if *b < R::zero() {
                return Err(Error::InvalidInput(
                    "quadratic coefficient b must be >= 0".into(),
                ));
            }
        }
        rep.mu.validate(r(rep.rel_tol), rep.node_cap)?;
        Ok(rep)
    }

    /// Standard-form representation with a discrete measure; the slope at
    /// infinity has the closed form `a + sum w/(1+t)` when `b = 0`.
    pub fn standard_discrete(f0: R, a: R, b: R, atoms: Vec<(R, R)>) -> Result<Self> {
        let omega = if b > R::zero() {
            ExtReal::PosInf
        } else {
            let mut s = a;
            for &(t, w) in &atoms {
                s += w / (R::one() + t);
            }
            ExtReal::Finite(s)
        };
        Self::new(
            f0,
            Variant::Standard { a, b },
            Measure::Discrete { atoms },
            omega,
        )
    }

    /// The canonical data of the named functions.
    pub fn canonical(kind: CanonicalFunction<R>) -> Result<Self> {
        let pi = R::pi();
        match kind {
            CanonicalFunction::XLogX => Self::new(
                R::zero(),
                Variant::Standard {
                    a: R::zero(),
                    b: R::zero(),
                },
                Measure::Lebesgue,
                ExtReal::PosInf,
            ),
            CanonicalFunction::NegPower(alpha) => {
                if alpha <= R::zero() || alpha >= R::one() {
                    return Err(Error::InvalidInput("NegPower needs 0 < alpha < 1".into()));
                }
                Self::new(
                    R::zero(),
                    Variant::Standard {
                        a: -R::one(),
                        b: R::zero(),
                    },
                    Measure::PowerWeight {
                        gamma: alpha,
                        scale: (alpha * pi).sin() / pi,
                    },
                    ExtReal::zero(),
                )
            }
            CanonicalFunction::Power(alpha) => {
                if alpha <= R::one() || alpha >= r(2.0) {
                    return Err(Error::InvalidInput("Power needs 1 < alpha < 2".into()));
                }
                Self::new(
                    R::zero(),
                    Variant::Standard {
                        a: R::one(),
                        b: R::zero(),
                    },
                    Measure::PowerWeight {
                        gamma: alpha,
                        scale: ((alpha - R::one()) * pi).sin() / pi,
                    },
                    ExtReal::PosInf,
                )
            }
        }
    }

    /// Finite-slope form of `-x^alpha`: `alpha = omega = 0` with the same
    /// power-weight measure.
    pub fn neg_power_finite_omega(alpha: R) -> Result<Self> {
        if alpha <= R::zero() || alpha >= R::one() {
            return Err(Error::InvalidInput("needs 0 < alpha < 1".into()));
        }
        let pi = R::pi();
        Self::new(
            R::zero(),
            Variant::FiniteOmega { alpha: R::zero() },
            Measure::PowerWeight {
                gamma: alpha,
                scale: (alpha * pi).sin() / pi,
            },
            ExtReal::zero(),
        )
    }

    /// Psi-form of `x^alpha` (`1 < alpha < 2`): `psi(t) = 1/t`.
    pub fn power_psi_form(alpha: R) -> Result<Self> {
        if alpha <= R::one() || alpha >= r(2.0) {
            return Err(Error::InvalidInput("needs 1 < alpha < 2".into()));
        }
        let pi = R::pi();
        Self::new(
            R::zero(),
            Variant::Psi {
                b: R::zero(),
                psi: PsiSpec::InverseT,
            },
            Measure::PowerWeight {
                gamma: alpha,
                scale: ((alpha - R::one()) * pi).sin() / pi,
            },
            ExtReal::PosInf,
        )
    }

    /// Pointwise evaluation by quadrature (or atom summation).
    pub fn eval(&self, x: R) -> Result<R> {
        if x < R::zero() {
            return Err(Error::InvalidInput(
                "representation domain is x >= 0".into(),
            ));
        }
        if x == R::zero() {
            return Ok(self.f0);
        }
        let one = R::one();
        let rel = r::<R>(self.rel_tol);
        match &self.variant {
            Variant::Standard { a, b } => {
                let integral = self.mu.integrate(
                    |t| x * (x - one) / ((one + t) * (x + t)),
                    rel,
                    self.node_cap,
                )?;
                Ok(self.f0 + *a * x + *b * x * x + integral)
            }
            Variant::FiniteOmega { alpha } => {
                let integral = self.mu.integrate(|t| x / (x + t), rel, self.node_cap)?;
                Ok(self.f0 + *alpha * x - integral)
            }
            Variant::Psi { b, psi } => {
                let integral =
                    self.mu
                        .integrate(|t| psi.eval(t) * x - x / (x + t), rel, self.node_cap)?;
                Ok(self.f0 + *b * x * x + integral)
            }
        }
    }

    /// Recovers `b = lim f(x)/x^2` by probing at large argument.
    ///
    /// The probe divides by `x^2 = 1e18`, so a loose quadrature target is
    /// ample; the tight default would exhaust nodes on the huge-`x`
    /// integrand for nothing.
    pub fn b_probe(&self) -> Result<R> {
        let x = r::<R>(1e9);
        let mut probe = self.clone();
        probe.rel_tol = 1e-5;
        Ok(probe.eval(x)? / (x * x))
    }

    /// Declared quadratic coefficient (zero in the finite-slope form).
    pub fn b_declared(&self) -> R {
        match &self.variant {
            Variant::Standard { b, .. } | Variant::Psi { b, .. } => *b,
            Variant::FiniteOmega { .. } => R::zero(),
        }
    }
}

/// Ratio-cluster data shared by the primitive divergences: entries
/// `(a, b, w)` over the nonzero spectra, plus the support traces.
struct ClusterData<R> {
    terms: Vec<(R, R, R)>,
    tr_b: R,
    tr_a_b0: R,
    tr_a2_binv: R,
    kernel_mass: R,
}

fn cluster_data<R: Real>(a: &PsdOperator<R>, b: &PsdOperator<R>) -> Result<ClusterData<R>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let mut terms = Vec::new();
    let mut tr_a_b0 = R::zero();
    let mut tr_a2_binv = R::zero();
    for ca in a.nonzero_clusters() {
        for cb in b.nonzero_clusters() {
            let w = rmax(trace_re(&(&ca.projection * &cb.projection)), R::zero());
            if w == R::zero() {
                continue;
            }
            terms.push((ca.value, cb.value, w));
            tr_a_b0 += ca.value * w;
            tr_a2_binv += ca.value * ca.value / cb.value * w;
        }
    }
    let kernel_mass = if b.support_rank() < b.dim() {
        let k = b.kernel_projection();
        rmax(trace_re(&(a.matrix() * k)), R::zero())
    } else {
        R::zero()
    };
    Ok(ClusterData {
        terms,
        tr_b: b.trace(),
        tr_a_b0,
        tr_a2_binv,
        kernel_mass,
    })
}

/// `S_phi_t(A||B) = -sum a b w / (a + t b)` over the ratio clusters.
fn s_phi<R: Real>(data: &ClusterData<R>, t: R) -> R {
    let mut acc = R::zero();
    for &(a, b, w) in &data.terms {
        acc -= a * b * w / (a + t * b);
    }
    acc
}

/// Assembles `S_f(A||B)` from representation data instead of evaluating
/// `f` on eigenvalue ratios; agreement with the direct route is the
/// cross-validation oracle.
pub fn divergence_via_representation<R: Real>(
    a: &PsdOperator<R>,
    b: &PsdOperator<R>,
    rep: &RepresentingMeasure<R>,
) -> Result<ExtReal<R>> {
    let data = cluster_data(a, b)?;
    let rel = r::<R>(rep.rel_tol);
    let one = R::one();

    let finite = match &rep.variant {
        Variant::Standard { a: lin, b: quad_c } => {
            let integral = rep.mu.integrate(
                |t| data.tr_a_b0 / (one + t) + s_phi(&data, t),
                rel,
                rep.node_cap,
            )?;
            rep.f0 * data.tr_b + *lin * data.tr_a_b0 + *quad_c * data.tr_a2_binv + integral
        }
        Variant::FiniteOmega { alpha } => {
            let integral = rep.mu.integrate(|t| s_phi(&data, t), rel, rep.node_cap)?;
            rep.f0 * data.tr_b + *alpha * data.tr_a_b0 + integral
        }
        Variant::Psi { b: quad_c, psi } => {
            let psi = psi.clone();
            let integral = rep.mu.integrate(
                |t| psi.eval(t) * data.tr_a_b0 + s_phi(&data, t),
                rel,
                rep.node_cap,
            )?;
            rep.f0 * data.tr_b + *quad_c * data.tr_a2_binv + integral
        }
    };

    let mut total = ExtReal::Finite(finite);
    let mass_floor = r::<R>(1e-12) * rmax(a.trace().abs(), R::one());
    if data.kernel_mass > mass_floor {
        total = total.checked_add(rep.omega.scale(data.kernel_mass))?;
    }
    Ok(total)
}
