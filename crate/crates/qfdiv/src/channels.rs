//! Quantum channels: Kraus/Choi representations, duals, positivity and
//! Schwarz diagnostics, the transpose-depolarizing map family, pinching,
//! and the Petz maps with stochastic completion.
//!
//! A channel stores a Kraus list, a Choi matrix, or both. Maps that are
//! not completely positive (the transpose family for most parameters)
//! live Choi-only; `apply` then contracts the Choi matrix directly.
//! Exact positivity of a map is not decided here: complete positivity is
//! read off the Choi spectrum, while k-positivity and the Schwarz
//! property are *falsified* by seeded sampling, never certified.

use crate::matcore::{
    creal, eigh, hermiticity_residual, hs_inner, kron, max_abs, partial_trace, rmax,
    spectral_decompose, CMatrix, MatrixJson, PsdOperator, Tolerances,
};
use crate::sampling;
use crate::scalar::{r, to_f64, Real};
use crate::{Error, Result};
use nalgebra::{ComplexField, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Column-stacked vectorization, matching `vec(A X B) = (B^T ⊗ A) vec(X)`.
pub(crate) fn vec_of<R: Real>(m: &CMatrix<R>) -> DVector<Complex<R>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    DVector::from_fn(rows * cols, |k, _| m[(k % rows, k / rows)])
}

pub(crate) fn unvec<R: Real>(v: &DVector<Complex<R>>, rows: usize, cols: usize) -> CMatrix<R> {
    CMatrix::from_fn(rows, cols, |i, j| v[j * rows + i])
}

/// Superoperator of the sandwich `X -> M X N`.
fn sandwich_superop<R: Real>(m: &CMatrix<R>, n: &CMatrix<R>) -> CMatrix<R> {
    kron(&n.transpose(), m)
}

/// Linear map between matrix algebras, as a channel.
#[derive(Debug, Clone)]
pub struct Channel<R: Real> {
    d_in: usize,
    d_out: usize,
    kraus: Option<Vec<CMatrix<R>>>,
    choi: Option<CMatrix<R>>,
}

impl<R: Real> Channel<R> {
    pub fn from_kraus(kraus: Vec<CMatrix<R>>, d_in: usize, d_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::DimensionMismatch(
                    k.nrows() * k.ncols(),
                    d_out * d_in,
                ));
            }
        }
        Ok(Channel {
            d_in,
            d_out,
            kraus: Some(kraus),
            choi: None,
        })
    }

    pub fn from_choi(choi: CMatrix<R>, d_in: usize, d_out: usize) -> Result<Self> {
        let d = d_in * d_out;
        if choi.nrows() != d || choi.ncols() != d {
            return Err(Error::DimensionMismatch(choi.nrows(), d));
        }
        Ok(Channel {
            d_in,
            d_out,
            kraus: None,
            choi: Some(choi),
        })
    }

    /// Both representations; they must agree on a matrix-unit basis.
    pub fn from_parts(
        kraus: Vec<CMatrix<R>>,
        choi: CMatrix<R>,
        d_in: usize,
        d_out: usize,
    ) -> Result<Self> {
        let by_kraus = Self::from_kraus(kraus.clone(), d_in, d_out)?;
        let by_choi = Self::from_choi(choi.clone(), d_in, d_out)?;
        let resid = by_kraus.action_distance(&by_choi)?;
        if resid > r(1e-10) {
            return Err(Error::InvalidInput(format!(
                "kraus and choi disagree (residual {})",
                to_f64(resid)
            )));
        }
        Ok(Channel {
            d_in,
            d_out,
            kraus: Some(kraus),
            choi: Some(choi),
        })
    }

    pub fn identity(d: usize) -> Self {
        Channel {
            d_in: d,
            d_out: d,
            kraus: Some(vec![CMatrix::identity(d, d)]),
            choi: None,
        }
    }

    pub fn unitary(u: CMatrix<R>) -> Result<Self> {
        let d = u.nrows();
        if u.ncols() != d {
            return Err(Error::NotSquare(u.nrows(), u.ncols()));
        }
        Self::from_kraus(vec![u], d, d)
    }

    /// `X -> (Tr X) I / d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let scale = creal(R::one() / r::<R>(d as f64).sqrt());
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::<R>::zeros(d, d);
                k[(i, j)] = scale;
                kraus.push(k);
            }
        }
        Channel {
            d_in: d,
            d_out: d,
            kraus: Some(kraus),
            choi: None,
        }
    }

    /// `X ⊗ Y -> X Tr Y` on `C^{d_keep} ⊗ C^{d_trace}`.
    pub fn trace_out_second(d_keep: usize, d_trace: usize) -> Self {
        let d_in = d_keep * d_trace;
        let mut kraus = Vec::with_capacity(d_trace);
        for j in 0..d_trace {
            let mut k = CMatrix::<R>::zeros(d_keep, d_in);
            for i in 0..d_keep {
                k[(i, i * d_trace + j)] = creal(R::one());
            }
            kraus.push(k);
        }
        Channel {
            d_in,
            d_out: d_keep,
            kraus: Some(kraus),
            choi: None,
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus_ops(&self) -> Option<&[CMatrix<R>]> {
        self.kraus.as_deref()
    }

    pub fn has_kraus(&self) -> bool {
        self.kraus.is_some()
    }

    /// Applies the channel to a `d_in x d_in` matrix.
    pub fn apply(&self, x: &CMatrix<R>) -> Result<CMatrix<R>> {
        if x.nrows() != self.d_in || x.ncols() != self.d_in {
            return Err(Error::DimensionMismatch(x.nrows(), self.d_in));
        }
        if let Some(kraus) = &self.kraus {
            let mut out = CMatrix::<R>::zeros(self.d_out, self.d_out);
            for k in kraus {
                out += k * x * k.adjoint();
            }
            return Ok(out);
        }
        let choi = self.choi.as_ref().expect("channel holds a representation");
        let lifted = kron(
            &x.transpose(),
            &CMatrix::<R>::identity(self.d_out, self.d_out),
        );
        partial_trace(&(lifted * choi), &[self.d_in, self.d_out], &[1])
    }

    /// The Choi matrix `sum_ij E_ij ⊗ Phi(E_ij)`.
    pub fn choi(&self) -> CMatrix<R> {
        if let Some(c) = &self.choi {
            return c.clone();
        }
        let kraus = self.kraus.as_ref().expect("channel holds a representation");
        let d = self.d_in * self.d_out;
        let mut c = CMatrix::<R>::zeros(d, d);
        for k in kraus {
            let v = DVector::<Complex<R>>::from_fn(d, |idx, _| {
                let i = idx / self.d_out;
                let kk = idx % self.d_out;
                k[(kk, i)]
            });
            c += &v * v.adjoint();
        }
        c
    }

    /// Superoperator matrix `S vec(X) = vec(Phi(X))`.
    pub fn superop(&self) -> CMatrix<R> {
        if let Some(kraus) = &self.kraus {
            let mut s = CMatrix::<R>::zeros(self.d_out * self.d_out, self.d_in * self.d_in);
            for k in kraus {
                s += kron(&k.map(|z| z.conjugate()), k);
            }
            return s;
        }
        let choi = self.choi.as_ref().unwrap();
        superop_from_choi(choi, self.d_in, self.d_out)
    }

    pub fn from_superop(s: CMatrix<R>, d_in: usize, d_out: usize) -> Result<Self> {
        if s.nrows() != d_out * d_out || s.ncols() != d_in * d_in {
            return Err(Error::DimensionMismatch(s.nrows(), d_out * d_out));
        }
        Self::from_choi(choi_from_superop(&s, d_in, d_out), d_in, d_out)
    }

    /// Hilbert-Schmidt adjoint.
    pub fn adjoint(&self) -> Channel<R> {
        if let Some(kraus) = &self.kraus {
            return Channel {
                d_in: self.d_out,
                d_out: self.d_in,
                kraus: Some(kraus.iter().map(|k| k.adjoint()).collect()),
                choi: None,
            };
        }
        let s = self.superop().adjoint();
        Channel::from_superop(s, self.d_out, self.d_in).expect("adjoint dims are consistent")
    }

    /// `second ∘ first`.
    pub fn compose(second: &Channel<R>, first: &Channel<R>) -> Result<Channel<R>> {
        if first.d_out != second.d_in {
            return Err(Error::DimensionMismatch(first.d_out, second.d_in));
        }
        if let (Some(k2), Some(k1)) = (&second.kraus, &first.kraus) {
            if k1.len() * k2.len() <= 4096 {
                let mut kraus = Vec::with_capacity(k1.len() * k2.len());
                for a in k2 {
                    for b in k1 {
                        kraus.push(a * b);
                    }
                }
                return Channel::from_kraus(kraus, first.d_in, second.d_out);
            }
        }
        let s = second.superop() * first.superop();
        Channel::from_superop(s, first.d_in, second.d_out)
    }

    /// Tensor product of two channels; needs Kraus forms (complete
    /// positivity) on both sides.
    pub fn tensor(a: &Channel<R>, b: &Channel<R>) -> Result<Channel<R>> {
        let ka = a.require_kraus()?;
        let kb = b.require_kraus()?;
        let mut kraus = Vec::with_capacity(ka.len() * kb.len());
        for x in &ka {
            for y in &kb {
                kraus.push(kron(x, y));
            }
        }
        Channel::from_kraus(kraus, a.d_in * b.d_in, a.d_out * b.d_out)
    }

    /// n-fold tensor power within the dimension cap.
    pub fn tensor_power(&self, n: usize, cap: usize) -> Result<Channel<R>> {
        if n == 0 {
            return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
        }
        let grow = |d: usize| -> Result<usize> {
            let mut dim = 1usize;
            for _ in 0..n {
                dim = dim
                    .checked_mul(d)
                    .ok_or(Error::DimensionCap(usize::MAX, cap))?;
                if dim > cap {
                    return Err(Error::DimensionCap(dim, cap));
                }
            }
            Ok(dim)
        };
        grow(self.d_in)?;
        grow(self.d_out)?;
        let base = self.require_kraus()?;
        if base.len().pow(n as u32) > 65536 {
            return Err(Error::DimensionCap(base.len().pow(n as u32), 65536));
        }
        let mut out = Channel::from_kraus(base.clone(), self.d_in, self.d_out)?;
        for _ in 1..n {
            out = Channel::tensor(&out, self)?;
        }
        Ok(out)
    }

    /// Kraus operators, extracting them from a PSD Choi matrix if needed.
    pub fn require_kraus(&self) -> Result<Vec<CMatrix<R>>> {
        if let Some(k) = &self.kraus {
            return Ok(k.clone());
        }
        let choi = self.choi.as_ref().unwrap();
        let resid = hermiticity_residual(choi);
        let scale = rmax(max_abs(choi), R::one());
        if resid > r::<R>(1e-8) * scale {
            return Err(Error::Representation(
                "Choi matrix is not Hermitian; no Kraus form".into(),
            ));
        }
        let sym = (choi + choi.adjoint()).map(|z| z * creal(r(0.5)));
        let (vals, vecs) = eigh(&sym);
        let lmax = vals.iter().fold(R::zero(), |a, &b| rmax(a, b.abs()));
        let floor = r::<R>(1e-10) * rmax(lmax, R::one());
        let mut kraus = Vec::new();
        for (idx, &lambda) in vals.iter().enumerate() {
            if lambda < -floor {
                return Err(Error::Representation(format!(
                    "Choi matrix has negative eigenvalue {}; map is not CP",
                    to_f64(lambda)
                )));
            }
            if lambda > floor {
                let col = vecs.column(idx).into_owned();
                let k = CMatrix::<R>::from_fn(self.d_out, self.d_in, |kk, i| {
                    col[i * self.d_out + kk] * creal(lambda.sqrt())
                });
                kraus.push(k);
            }
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::<R>::zeros(self.d_out, self.d_in));
        }
        Ok(kraus)
    }

    /// Max action difference over the matrix-unit basis.
    pub fn action_distance(&self, other: &Channel<R>) -> Result<R> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::DimensionMismatch(self.d_in, other.d_in));
        }
        let mut worst = R::zero();
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let mut e = CMatrix::<R>::zeros(self.d_in, self.d_in);
                e[(i, j)] = creal(R::one());
                let diff = self.apply(&e)? - other.apply(&e)?;
                worst = rmax(worst, max_abs(&diff));
            }
        }
        Ok(worst)
    }

    /// Residual of `Tr Phi(X)* Y = Tr X* Phi^*(Y)` over a basis probe;
    /// sanity check for the adjoint.
    pub fn adjoint_pairing_residual(&self, seed: u64) -> R {
        let mut rng = sampling::rng_from_seed(seed);
        let adj = self.adjoint();
        let mut worst = R::zero();
        for _ in 0..8 {
            let x = sampling::gaussian_matrix::<R, _>(&mut rng, self.d_in, self.d_in);
            let y = sampling::gaussian_matrix::<R, _>(&mut rng, self.d_out, self.d_out);
            let lhs = hs_inner(&self.apply(&x).unwrap(), &y);
            let rhs = hs_inner(&x, &adj.apply(&y).unwrap());
            worst = rmax(worst, (lhs - rhs).modulus());
        }
        worst
    }

    /// `Phi(I)` deviation from the identity (unitality of the map).
    pub fn unitality_residual(&self) -> R {
        let i = CMatrix::<R>::identity(self.d_in, self.d_in);
        max_abs(&(self.apply(&i).unwrap() - CMatrix::<R>::identity(self.d_out, self.d_out)))
    }

    /// `Phi^*(I)` deviation from the identity (trace preservation).
    pub fn trace_preservation_residual(&self) -> R {
        let i = CMatrix::<R>::identity(self.d_out, self.d_out);
        max_abs(&(self.adjoint().apply(&i).unwrap() - CMatrix::<R>::identity(self.d_in, self.d_in)))
    }

    /// How far `Phi^*(I) <= I` fails: `max(0, lambda_max(Phi^*(I)) - 1)`.
    pub fn trace_increase(&self) -> R {
        let i = CMatrix::<R>::identity(self.d_out, self.d_out);
        let m = self.adjoint().apply(&i).unwrap();
        let sd = spectral_decompose(&m, r(1e-8), r(1e-6)).expect("dual unit is Hermitian");
        rmax(sd.lambda_max() - R::one(), R::zero())
    }

    /// Minimum eigenvalue of the (symmetrized) Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> R {
        let c = self.choi();
        let sym = (&c + c.adjoint()).map(|z| z * creal(r(0.5)));
        let (vals, _) = eigh(&sym);
        vals.into_iter()
            .fold(R::zero(), |a, b| if b < a { b } else { a })
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus: self
                .kraus
                .as_ref()
                .map(|ks| ks.iter().map(MatrixJson::from_matrix).collect()),
            choi: self.choi.as_ref().map(MatrixJson::from_matrix),
        }
    }

    pub fn from_json(j: &ChannelJson) -> Result<Self> {
        match (&j.kraus, &j.choi) {
            (Some(ks), Some(c)) => Self::from_parts(
                ks.iter().map(|m| m.to_matrix()).collect::<Result<_>>()?,
                c.to_matrix()?,
                j.d_in,
                j.d_out,
            ),
            (Some(ks), None) => Self::from_kraus(
                ks.iter().map(|m| m.to_matrix()).collect::<Result<_>>()?,
                j.d_in,
                j.d_out,
            ),
            (None, Some(c)) => Self::from_choi(c.to_matrix()?, j.d_in, j.d_out),
            (None, None) => Err(Error::InvalidInput(
                "channel needs a kraus or choi field".into(),
            )),
        }
    }
}

/// Wire format for channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
}

/// Choi index `(i k),(j l)` holds superop entry `S[(l k),(j i)]`.
fn choi_from_superop<R: Real>(s: &CMatrix<R>, d_in: usize, d_out: usize) -> CMatrix<R> {
    let d = d_in * d_out;
    CMatrix::from_fn(d, d, |row, col| {
        let (i, k) = (row / d_out, row % d_out);
        let (j, l) = (col / d_out, col % d_out);
        s[(l * d_out + k, j * d_in + i)]
    })
}

fn superop_from_choi<R: Real>(c: &CMatrix<R>, d_in: usize, d_out: usize) -> CMatrix<R> {
    CMatrix::from_fn(d_out * d_out, d_in * d_in, |row, col| {
        let (l, k) = (row / d_out, row % d_out);
        let (j, i) = (col / d_in, col % d_in);
        c[(i * d_out + k, j * d_out + l)]
    })
}

// ---------------------------------------------------------------------------
// The transpose-depolarizing family
// ---------------------------------------------------------------------------

/// The three one-parameter map families with known positivity thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TomiyamaKind {
    /// `Phi_eps(X) = (1-eps) X^T + eps (Tr X) I/d`;
    /// k-positive (k >= 2) iff `1 - 1/(d+1) <= eps <= 1 + 1/(d-1)`.
    Phi,
    /// `Psi_eps(X) = (1-eps) X + eps (Tr X) I/d`;
    /// completely positive iff `0 <= eps <= 1 + 1/(d^2-1)`.
    Psi,
    /// `Lambda_eps(X) = (1-eps) X^T + eps X`;
    /// a Schwarz map iff `eps = 1`.
    Lambda,
}

/// Builds the requested family member in Choi form (the maps are not CP
/// for most parameters, so no Kraus form is attached).
pub fn tomiyama_map<R: Real>(kind: TomiyamaKind, eps: R, d: usize) -> Result<Channel<R>> {
    if d < 2 {
        return Err(Error::InvalidInput("tomiyama maps need d >= 2".into()));
    }
    let dim = d * d;
    let one = R::one();
    let inv_d = one / r::<R>(d as f64);
    let mut choi = CMatrix::<R>::zeros(dim, dim);
    for i in 0..d {
        for j in 0..d {
            // image = Phi(E_ij)
            let mut image = CMatrix::<R>::zeros(d, d);
            match kind {
                TomiyamaKind::Phi => {
                    image[(j, i)] += creal(one - eps);
                    if i == j {
                        for m in 0..d {
                            image[(m, m)] += creal(eps * inv_d);
                        }
                    }
                }
                TomiyamaKind::Psi => {
                    image[(i, j)] += creal(one - eps);
                    if i == j {
                        for m in 0..d {
                            image[(m, m)] += creal(eps * inv_d);
                        }
                    }
                }
                TomiyamaKind::Lambda => {
                    image[(j, i)] += creal(one - eps);
                    image[(i, j)] += creal(eps);
                }
            }
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] += image[(k, l)];
                }
            }
        }
    }
    Channel::from_choi(choi, d, d)
}

/// Pinching by the spectral projections of `B`: `X -> sum_b Q_b X Q_b`.
/// Trace-preserving, completely positive, idempotent; the Kraus rank is
/// the number of spectral clusters.
pub fn pinching_channel<R: Real>(b: &PsdOperator<R>) -> Result<Channel<R>> {
    if b.dim() == 0 || b.spectral().clusters().is_empty() {
        return Err(Error::InvalidInput("empty operator".into()));
    }
    let kraus: Vec<CMatrix<R>> = b
        .spectral()
        .clusters()
        .iter()
        .map(|c| c.projection.clone())
        .collect();
    Channel::from_kraus(kraus, b.dim(), b.dim())
}

// ---------------------------------------------------------------------------
// Petz maps
// ---------------------------------------------------------------------------

/// The Petz pair attached to `(Phi, B)`:
/// `Phi_B(X) = Phi(B)^{-1/2} Phi(B^{1/2} X B^{1/2}) Phi(B)^{-1/2}` and its
/// Hilbert-Schmidt adjoint, the recovery map
/// `Phi*_B(Y) = B^{1/2} Phi^*(Phi(B)^{-1/2} Y Phi(B)^{-1/2}) B^{1/2}`.
#[derive(Debug, Clone)]
pub struct PetzPair<R: Real> {
    pub forward: Channel<R>,
    pub recovery: Channel<R>,
    /// `Phi(B)^0`, the support of the image reference.
    pub range_support: CMatrix<R>,
    /// `Phi(B)` as a PSD operator.
    pub image: PsdOperator<R>,
}

/// Builds both Petz maps by sandwiching representations; the supports are
/// kept exact through the generalized inverses, never by numeric
/// inversion of the channel.
pub fn petz_maps<R: Real>(phi: &Channel<R>, b: &PsdOperator<R>) -> Result<PetzPair<R>> {
    if b.dim() != phi.d_in() {
        return Err(Error::DimensionMismatch(b.dim(), phi.d_in()));
    }
    let image = PsdOperator::with_tolerances(phi.apply(b.matrix())?, *b.tolerances())?;
    let pre = b.sqrt_matrix();
    let post = image.inv_sqrt_matrix();
    let range_support = image.support_projection();

    let (forward, recovery) = if let Some(ks) = phi.kraus_ops() {
        let fw: Vec<CMatrix<R>> = ks.iter().map(|k| &post * k * &pre).collect();
        let rc: Vec<CMatrix<R>> = ks.iter().map(|k| &pre * k.adjoint() * &post).collect();
        (
            Channel::from_kraus(fw, phi.d_in(), phi.d_out())?,
            Channel::from_kraus(rc, phi.d_out(), phi.d_in())?,
        )
    } else {
        let s_phi = phi.superop();
        let s_pre = sandwich_superop(&pre, &pre);
        let s_post = sandwich_superop(&post, &post);
        let s_fw = &s_post * &s_phi * &s_pre;
        let s_rc = s_fw.adjoint();
        (
            Channel::from_superop(s_fw, phi.d_in(), phi.d_out())?,
            Channel::from_superop(s_rc, phi.d_out(), phi.d_in())?,
        )
    };
    Ok(PetzPair {
        forward,
        recovery,
        range_support,
        image,
    })
}

/// Completes a trace-deficient recovery map to a trace-preserving one:
/// `Psi(Y) = Psi0(Y) + Tr((I - G) Y) rho_fill` with `G = Psi0^*(I)`.
/// `Psi` agrees with `Psi0` on operators supported in `supp G`.
pub fn complete_to_stochastic<R: Real>(
    psi0: &Channel<R>,
    rho_fill: &PsdOperator<R>,
) -> Result<Channel<R>> {
    if rho_fill.dim() != psi0.d_out() {
        return Err(Error::DimensionMismatch(rho_fill.dim(), psi0.d_out()));
    }
    if !rho_fill.is_density(r(1e-8)) {
        return Err(Error::NotDensity(format!(
            "fill state has trace {}",
            to_f64(rho_fill.trace())
        )));
    }
    let d_in = psi0.d_in();
    let g = psi0
        .adjoint()
        .apply(&CMatrix::<R>::identity(psi0.d_out(), psi0.d_out()))?;
    let p = CMatrix::<R>::identity(d_in, d_in) - g;
    // Y -> Tr(P Y) rho has superoperator vec(rho) vec(P^T)^T (no
    // conjugation: Tr(P Y) is linear in Y).
    let vr = vec_of(rho_fill.matrix());
    let vp = vec_of(&p.transpose());
    let d_out2 = psi0.d_out() * psi0.d_out();
    let d_in2 = d_in * d_in;
    let mut s = psi0.superop();
    for row in 0..d_out2 {
        for col in 0..d_in2 {
            s[(row, col)] += vr[row] * vp[col];
        }
    }
    let mut done = Channel::from_superop(s, d_in, psi0.d_out())?;
    // Attach a Kraus form when the completion is CP.
    if done.choi_min_eigenvalue() >= -r::<R>(1e-9) * rmax(max_abs(&done.choi()), R::one()) {
        if let Ok(ks) = done.require_kraus() {
            done = Channel::from_parts(ks, done.choi(), done.d_in(), done.d_out())?;
        }
    }
    Ok(done)
}

// ---------------------------------------------------------------------------
// The contraction V
// ---------------------------------------------------------------------------

/// The map `V(X) = Phi^*(X Phi(B)^{-1/2}) B^{1/2}` from the output algebra
/// back to the input algebra. A contraction in the Hilbert-Schmidt metric
/// whenever `Phi` is substochastic, with `V^*(B^{1/2}) = Phi(B)^{1/2}`.
#[derive(Debug, Clone)]
pub struct ContractionV<R: Real> {
    superop: CMatrix<R>,
    d_in: usize,
    d_out: usize,
}

pub fn contraction_v<R: Real>(phi: &Channel<R>, b: &PsdOperator<R>) -> Result<ContractionV<R>> {
    if b.dim() != phi.d_in() {
        return Err(Error::DimensionMismatch(b.dim(), phi.d_in()));
    }
    let image = PsdOperator::with_tolerances(phi.apply(b.matrix())?, *b.tolerances())?;
    let d2 = phi.d_out();
    let d1 = phi.d_in();
    // right-multiplications: X -> X M has superop (M^T ⊗ I).
    let rm_img = sandwich_superop(&CMatrix::<R>::identity(d2, d2), &image.inv_sqrt_matrix());
    let rm_b = sandwich_superop(&CMatrix::<R>::identity(d1, d1), &b.sqrt_matrix());
    let s_adj = phi.superop().adjoint();
    Ok(ContractionV {
        superop: rm_b * s_adj * rm_img,
        d_in: d2,
        d_out: d1,
    })
}

impl<R: Real> ContractionV<R> {
    pub fn apply(&self, x: &CMatrix<R>) -> Result<CMatrix<R>> {
        if x.nrows() != self.d_in || x.ncols() != self.d_in {
            return Err(Error::DimensionMismatch(x.nrows(), self.d_in));
        }
        Ok(unvec(&(&self.superop * vec_of(x)), self.d_out, self.d_out))
    }

    pub fn apply_adjoint(&self, x: &CMatrix<R>) -> Result<CMatrix<R>> {
        if x.nrows() != self.d_out || x.ncols() != self.d_out {
            return Err(Error::DimensionMismatch(x.nrows(), self.d_out));
        }
        Ok(unvec(
            &(self.superop.adjoint() * vec_of(x)),
            self.d_in,
            self.d_in,
        ))
    }

    /// Operator norm in the Hilbert-Schmidt metric.
    pub fn norm(&self) -> R {
        crate::matcore::operator_norm(&self.superop)
    }
}

// ---------------------------------------------------------------------------
// Property diagnostics
// ---------------------------------------------------------------------------

/// A found violation of k-positivity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KPositivityWitness {
    pub min_eigenvalue: f64,
    /// The pure input state on ancilla ⊗ system whose image fails PSD.
    pub state: MatrixJson,
}

/// A found violation of the Schwarz inequality for the dual map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchwarzWitness {
    pub violation: f64,
    pub input: MatrixJson,
}

/// Positivity/trace diagnostic report. Complete positivity comes from the
/// Choi spectrum; k-positivity and the Schwarz inequality are sampled
/// falsifiers with the recorded seed and budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub trace_preserving: bool,
    pub trace_preserving_residual: f64,
    pub trace_nonincreasing: bool,
    pub trace_increase: f64,
    pub unital: bool,
    pub unitality_residual: f64,
    pub completely_positive: bool,
    pub choi_min_eigenvalue: f64,
    /// For each probed k: a witness if k-positivity was falsified.
    pub k_positivity_witnesses: Vec<(usize, Option<KPositivityWitness>)>,
    pub schwarz_violation: f64,
    pub schwarz_witness: Option<SchwarzWitness>,
    pub samples: usize,
    pub seed: u64,
}

/// Applies `id_k ⊗ Phi` to a matrix on `C^k ⊗ C^{d_in}` given as k x k
/// blocks of size d_in.
fn apply_amplified<R: Real>(phi: &Channel<R>, k: usize, x: &CMatrix<R>) -> Result<CMatrix<R>> {
    let d_in = phi.d_in();
    let d_out = phi.d_out();
    let mut out = CMatrix::<R>::zeros(k * d_out, k * d_out);
    for a in 0..k {
        for b in 0..k {
            let block = x.view((a * d_in, b * d_in), (d_in, d_in)).into_owned();
            let image = phi.apply(&block)?;
            for i in 0..d_out {
                for j in 0..d_out {
                    out[(a * d_out + i, b * d_out + j)] = image[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

fn min_eig<R: Real>(m: &CMatrix<R>) -> R {
    let sym = (m + m.adjoint()).map(|z| z * creal(r(0.5)));
    let (vals, _) = eigh(&sym);
    vals.into_iter()
        .fold(R::zero(), |a, b| if b < a { b } else { a })
}

/// Runs the full diagnostic battery with the given sampling budget.
pub fn properties<R: Real>(phi: &Channel<R>, samples: usize, seed: u64) -> Result<PropertyReport> {
    let tol = Tolerances::<R>::default();
    let tp_resid = phi.trace_preservation_residual();
    let increase = phi.trace_increase();
    let unital_resid = phi.unitality_residual();
    let choi_min = phi.choi_min_eigenvalue();
    let choi_scale = rmax(max_abs(&phi.choi()), R::one());
    let cp = choi_min >= -tol.psd * choi_scale;

    let mut rng = sampling::rng_from_seed(seed);
    let d_in = phi.d_in();

    // k-positivity falsifiers, k = 2 .. d_in (k >= d_in coincides with CP).
    let mut k_wit: Vec<(usize, Option<KPositivityWitness>)> = Vec::new();
    for k in 2..=d_in.max(2) {
        let mut found: Option<KPositivityWitness> = None;
        let per_k = (samples / 4).max(8);
        for s in 0..=per_k {
            let psi = if s == 0 {
                // Maximally entangled probe across the first k levels.
                let mut v = DVector::<Complex<R>>::zeros(k * d_in);
                let w = creal(R::one() / r::<R>(k as f64).sqrt());
                for i in 0..k.min(d_in) {
                    v[i * d_in + i] = w;
                }
                v
            } else {
                sampling::random_pure::<R, _>(&mut rng, k * d_in)
            };
            let state = &psi * psi.adjoint();
            let image = apply_amplified(phi, k, &state)?;
            let lam = min_eig(&image);
            let scale = rmax(max_abs(&image), R::one());
            if lam < -tol.psd * scale {
                let better = found
                    .as_ref()
                    .map(|w| to_f64(lam) < w.min_eigenvalue)
                    .unwrap_or(true);
                if better {
                    found = Some(KPositivityWitness {
                        min_eigenvalue: to_f64(lam),
                        state: MatrixJson::from_matrix(&state),
                    });
                }
            }
        }
        k_wit.push((k, found));
    }

    // Schwarz falsifier on the dual: lambda_max(Phi*(Y*)Phi*(Y) - Phi*(Y*Y)),
    // over all matrix units and `samples` Gaussian inputs.
    let dual = phi.adjoint();
    let d2 = dual.d_in();
    let mut worst = R::zero();
    let mut witness: Option<SchwarzWitness> = None;
    let mut check = |y: CMatrix<R>, dual: &Channel<R>| -> Result<()> {
        let fy = dual.apply(&y)?;
        let fys = dual.apply(&y.adjoint())?;
        let fyy = dual.apply(&(y.adjoint() * &y))?;
        let gap = fys * fy - fyy;
        let lam = -min_eig(&gap.map(|z| -z));
        // lam = lambda_max(gap)
        if lam > worst {
            worst = lam;
            witness = Some(SchwarzWitness {
                violation: to_f64(lam),
                input: MatrixJson::from_matrix(&y),
            });
        }
        Ok(())
    };
    for i in 0..d2 {
        for j in 0..d2 {
            let mut e = CMatrix::<R>::zeros(d2, d2);
            e[(i, j)] = creal(R::one());
            check(e, &dual)?;
        }
    }
    for _ in 0..samples {
        check(sampling::gaussian_matrix::<R, _>(&mut rng, d2, d2), &dual)?;
    }
    let schwarz_tol = r::<R>(1e-9);
    let violation = if worst > schwarz_tol {
        to_f64(worst)
    } else {
        0.0
    };

    Ok(PropertyReport {
        trace_preserving: tp_resid <= tol.hermiticity,
        trace_preserving_residual: to_f64(tp_resid),
        trace_nonincreasing: increase <= tol.hermiticity,
        trace_increase: to_f64(increase),
        unital: unital_resid <= tol.hermiticity,
        unitality_residual: to_f64(unital_resid),
        completely_positive: cp,
        choi_min_eigenvalue: to_f64(choi_min),
        k_positivity_witnesses: k_wit,
        schwarz_violation: violation,
        schwarz_witness: if violation > 0.0 { witness } else { None },
        samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Trace-preservation equivalences
// ---------------------------------------------------------------------------

/// Residuals of the equivalent characterizations of `Tr Phi(B) = Tr B`
/// for a trace non-increasing positive map: the trace gap itself, the
/// dominance of `B^0` by the fixed-point projection of `Phi^*(Phi(B)^0)`,
/// and `Phi*_B(Phi(B)) = B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePreservationReport {
    pub trace_gap: f64,
    pub projection_dominance_residual: f64,
    pub petz_fixes_reference_residual: f64,
    pub trace_increase_of_dual_unit: f64,
    pub all_hold: bool,
}

pub fn trace_preservation_report<R: Real>(
    phi: &Channel<R>,
    b: &PsdOperator<R>,
) -> Result<TracePreservationReport> {
    let tol = Tolerances::<R>::default();
    let increase = phi.trace_increase();

    let image = PsdOperator::with_tolerances(phi.apply(b.matrix())?, *b.tolerances())?;
    let trace_gap = (image.trace() - b.trace()).abs();

    // B^0 <= P_{1}(Phi^*(Phi(B)^0)).
    let m = phi.adjoint().apply(&image.support_projection())?;
    let sd = spectral_decompose(&m, tol.cluster, r(1e-6))?;
    let mut p1 = CMatrix::<R>::zeros(b.dim(), b.dim());
    for c in sd.clusters() {
        if (c.value - R::one()).abs() <= r(1e-6) {
            p1 += &c.projection;
        }
    }
    let b0 = b.support_projection();
    let dominance = max_abs(&(&b0 - p1 * &b0));

    let petz = petz_maps(phi, b)?;
    let recovered = petz.recovery.apply(image.matrix())?;
    let petz_resid = crate::matcore::hs_norm(&(recovered - b.matrix()));

    let thr = r::<R>(1e-8) * rmax(b.trace(), R::one());
    Ok(TracePreservationReport {
        trace_gap: to_f64(trace_gap),
        projection_dominance_residual: to_f64(dominance),
        petz_fixes_reference_residual: to_f64(petz_resid),
        trace_increase_of_dual_unit: to_f64(increase),
        all_hold: trace_gap <= thr && dominance <= thr && petz_resid <= thr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{cplx, trace_re};
    use rand::Rng;

    type M = CMatrix<f64>;
    type C = Channel<f64>;

    fn diag(entries: &[f64]) -> M {
        M::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j {
                creal(entries[i])
            } else {
                creal(0.0)
            }
        })
    }

    #[test]
    fn identity_channel_acts_trivially() {
        let c = C::identity(3);
        let x = sampling::gaussian_matrix::<f64, _>(&mut sampling::rng_from_seed(1), 3, 3);
        assert!(max_abs(&(c.apply(&x).unwrap() - &x)) < 1e-14);
        assert!(max_abs(&(c.adjoint().apply(&x).unwrap() - &x)) < 1e-14);
    }

    #[test]
    fn depolarizing_adjoint_matches_inner_products() {
        let c = C::completely_depolarizing(3);
        let x = diag(&[1.0, 2.0, 3.0]);
        let expect = M::identity(3, 3).map(|z| z * creal(2.0));
        assert!(max_abs(&(c.apply(&x).unwrap() - expect)) < 1e-12);
        assert!(c.adjoint_pairing_residual(5) < 1e-10);
    }

    #[test]
    fn partial_trace_channel_action() {
        let c = C::trace_out_second(2, 3);
        let mut rng = sampling::rng_from_seed(2);
        let x = sampling::random_psd::<f64, _>(&mut rng, 2, 2);
        let y = sampling::random_psd::<f64, _>(&mut rng, 3, 3);
        let xy = kron(&x, &y);
        let out = c.apply(&xy).unwrap();
        let expect = x.map(|z| z * creal(trace_re(&y)));
        assert!(max_abs(&(out - expect)) < 1e-10);
        assert!(c.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn choi_kraus_round_trip_preserves_action() {
        let mut rng = sampling::rng_from_seed(3);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 2, 3);
        let c = C::from_kraus(ks, 3, 2).unwrap();
        let via_choi = C::from_choi(c.choi(), 3, 2).unwrap();
        assert!(c.action_distance(&via_choi).unwrap() < 1e-10);
        let back = C::from_kraus(via_choi.require_kraus().unwrap(), 3, 2).unwrap();
        assert!(c.action_distance(&back).unwrap() < 1e-10);
    }

    #[test]
    fn superop_round_trip() {
        let mut rng = sampling::rng_from_seed(4);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 2, 3, 2);
        let c = C::from_kraus(ks, 2, 3).unwrap();
        let s = c.superop();
        let back = C::from_superop(s, 2, 3).unwrap();
        assert!(c.action_distance(&back).unwrap() < 1e-10);
    }

    #[test]
    fn adjoint_is_involutive() {
        let mut rng = sampling::rng_from_seed(5);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 2, 3, 3);
        let c = C::from_kraus(ks, 2, 3).unwrap();
        assert!(c.adjoint_pairing_residual(7) < 1e-10);
        let cc = c.adjoint().adjoint();
        assert!(c.action_distance(&cc).unwrap() < 1e-10);
    }

    #[test]
    fn compose_and_tensor_agree_with_pointwise() {
        let mut rng = sampling::rng_from_seed(6);
        let k1 = sampling::random_cptp_kraus::<f64, _>(&mut rng, 2, 2, 2);
        let k2 = sampling::random_cptp_kraus::<f64, _>(&mut rng, 2, 2, 2);
        let c1 = C::from_kraus(k1, 2, 2).unwrap();
        let c2 = C::from_kraus(k2, 2, 2).unwrap();

        let x = sampling::random_psd::<f64, _>(&mut rng, 2, 2);
        let composed = C::compose(&c2, &c1).unwrap();
        let expect = c2.apply(&c1.apply(&x).unwrap()).unwrap();
        assert!(max_abs(&(composed.apply(&x).unwrap() - expect)) < 1e-10);

        let y = sampling::random_psd::<f64, _>(&mut rng, 2, 2);
        let tp = C::tensor(&c1, &c2).unwrap();
        let expect = kron(&c1.apply(&x).unwrap(), &c2.apply(&y).unwrap());
        assert!(max_abs(&(tp.apply(&kron(&x, &y)).unwrap() - expect)) < 1e-10);

        let sq = c1.tensor_power(2, 4096).unwrap();
        assert_eq!(sq.d_in(), 4);
        assert!(
            max_abs(
                &(sq.apply(&kron(&x, &x)).unwrap()
                    - kron(&c1.apply(&x).unwrap(), &c1.apply(&x).unwrap()))
            ) < 1e-10
        );
    }

    #[test]
    fn unitary_conjugation_is_clean() {
        let mut rng = sampling::rng_from_seed(8);
        let u = sampling::random_unitary::<f64, _>(&mut rng, 3);
        let c = C::unitary(u).unwrap();
        let rep = properties(&c, 60, 11).unwrap();
        assert!(rep.trace_preserving);
        assert!(rep.completely_positive);
        assert!(rep.schwarz_violation <= 1e-10);
        assert!(rep.k_positivity_witnesses.iter().all(|(_, w)| w.is_none()));
    }

    #[test]
    fn transpose_map_fails_schwarz_with_matrix_unit_witness() {
        // Lambda_0 is the pure transpose; the violation at X = |e1><e2|
        // is (1-eps)^2 = 1.
        let lam = tomiyama_map::<f64>(TomiyamaKind::Lambda, 0.0, 2).unwrap();
        let rep = properties(&lam, 50, 13).unwrap();
        assert!(
            rep.schwarz_violation >= 1.0 - 1e-9,
            "{}",
            rep.schwarz_violation
        );
        // eps = 0.5 still violates by 0.25.
        let lam_half = tomiyama_map::<f64>(TomiyamaKind::Lambda, 0.5, 2).unwrap();
        let rep = properties(&lam_half, 50, 13).unwrap();
        assert!(rep.schwarz_violation >= 0.25 - 1e-9);
    }

    #[test]
    fn tomiyama_phi_cp_window() {
        // CP iff 1 - 1/(d+1) <= eps <= 1 + 1/(d-1).
        for d in [2usize, 3] {
            let lo = 1.0 - 1.0 / (d as f64 + 1.0);
            let hi = 1.0 + 1.0 / (d as f64 - 1.0);
            for (eps, expect_cp) in [
                (lo - 0.01, false),
                (lo + 0.01, true),
                (hi - 0.01, true),
                (hi + 0.01, false),
            ] {
                let c = tomiyama_map::<f64>(TomiyamaKind::Phi, eps, d).unwrap();
                let cp = c.choi_min_eigenvalue() >= -1e-10;
                assert_eq!(cp, expect_cp, "Phi d={d} eps={eps}");
            }
        }
    }

    #[test]
    fn tomiyama_psi_cp_window_and_depolarizing_limit() {
        for d in [2usize, 3] {
            let hi = 1.0 + 1.0 / ((d * d) as f64 - 1.0);
            for (eps, expect_cp) in [
                (-0.01, false),
                (0.3, true),
                (hi - 0.005, true),
                (hi + 0.005, false),
            ] {
                let c = tomiyama_map::<f64>(TomiyamaKind::Psi, eps, d).unwrap();
                let cp = c.choi_min_eigenvalue() >= -1e-10;
                assert_eq!(cp, expect_cp, "Psi d={d} eps={eps}");
            }
        }
        // eps = 1 is the completely depolarizing channel.
        let c = tomiyama_map::<f64>(TomiyamaKind::Psi, 1.0, 2).unwrap();
        let dep = C::completely_depolarizing(2);
        assert!(c.action_distance(&dep).unwrap() < 1e-12);
        let rep = properties(&c, 60, 17).unwrap();
        assert!(rep.completely_positive && rep.schwarz_violation <= 1e-10);
    }

    #[test]
    fn tomiyama_phi_2_positivity_falsified_below_threshold() {
        // Just below eps = 1 - 1/(d+1) the map is positive but not
        // 2-positive; the entangled probe finds it.
        let d = 2;
        let eps = 1.0 - 1.0 / 3.0 - 0.05;
        let c = tomiyama_map::<f64>(TomiyamaKind::Phi, eps, d).unwrap();
        let rep = properties(&c, 60, 19).unwrap();
        let k2 = rep
            .k_positivity_witnesses
            .iter()
            .find(|(k, _)| *k == 2)
            .unwrap();
        assert!(k2.1.is_some());
    }

    #[test]
    fn pinching_properties() {
        let b = PsdOperator::from_diagonal(&[0.5, 0.5, 0.2]).unwrap();
        let e = pinching_channel(&b).unwrap();
        assert_eq!(e.kraus_ops().unwrap().len(), 2);

        // Idempotence and trace preservation on random inputs.
        let mut rng = sampling::rng_from_seed(20);
        for _ in 0..5 {
            let x = sampling::gaussian_matrix::<f64, _>(&mut rng, 3, 3);
            let once = e.apply(&x).unwrap();
            let twice = e.apply(&once).unwrap();
            assert!(max_abs(&(twice - &once)) < 1e-12);
            assert!((trace_re(&once) - trace_re(&x)).abs() < 1e-12);
        }

        // Trivial spectrum: pinching is the identity.
        let b = PsdOperator::from_diagonal(&[0.7, 0.7]).unwrap();
        let e = pinching_channel(&b).unwrap();
        assert!(e.action_distance(&C::identity(2)).unwrap() < 1e-12);

        // Commuting input is fixed.
        let b = PsdOperator::from_diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let e = pinching_channel(&b).unwrap();
        let a = diag(&[1.0, 2.0, 3.0]);
        assert!(max_abs(&(e.apply(&a).unwrap() - &a)) < 1e-12);
    }

    #[test]
    fn petz_identity_channel_recovers() {
        let mut rng = sampling::rng_from_seed(21);
        let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
        let a = sampling::random_psd::<f64, _>(&mut rng, 3, 3);
        let petz = petz_maps(&C::identity(3), &b).unwrap();
        let recovered = petz.recovery.apply(&a).unwrap();
        assert!(max_abs(&(recovered - &a)) < 1e-9);
    }

    #[test]
    fn petz_pair_are_hs_adjoints() {
        let mut rng = sampling::rng_from_seed(22);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 2, 2);
        let phi = C::from_kraus(ks, 3, 2).unwrap();
        let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
        let petz = petz_maps(&phi, &b).unwrap();
        let adj = petz.forward.adjoint();
        assert!(adj.action_distance(&petz.recovery).unwrap() < 1e-10);
    }

    #[test]
    fn petz_recovery_fixes_reference_iff_trace_preserved() {
        let mut rng = sampling::rng_from_seed(23);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 3, 2);
        let phi = C::from_kraus(ks.clone(), 3, 3).unwrap();
        let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
        let rep = trace_preservation_report(&phi, &b).unwrap();
        assert!(rep.all_hold, "{rep:?}");

        // Halving the channel breaks every item coherently.
        let half: Vec<M> = ks
            .iter()
            .map(|k| k.map(|z| z * creal(1.0 / 2.0_f64.sqrt())))
            .collect();
        let phi_half = C::from_kraus(half, 3, 3).unwrap();
        let rep = trace_preservation_report(&phi_half, &b).unwrap();
        assert!(!rep.all_hold);
        assert!(rep.trace_gap > 1e-3);
        assert!(rep.projection_dominance_residual > 1e-3);
        assert!(rep.petz_fixes_reference_residual > 1e-3);
    }

    #[test]
    fn unitary_conjugation_petz_reverses_exactly() {
        let mut rng = sampling::rng_from_seed(24);
        let u = sampling::random_unitary::<f64, _>(&mut rng, 3);
        let phi = C::unitary(u).unwrap();
        let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
        // supp A <= supp B with B full rank.
        let a = sampling::random_psd::<f64, _>(&mut rng, 3, 2);
        let petz = petz_maps(&phi, &b).unwrap();
        let recovered = petz.recovery.apply(&phi.apply(&a).unwrap()).unwrap();
        assert!(max_abs(&(recovered - &a)) < 1e-9);
    }

    #[test]
    fn stochastic_completion_restores_trace() {
        let mut rng = sampling::rng_from_seed(25);
        // Rank-deficient reference: completion term is nontrivial.
        let b = PsdOperator::from_diagonal(&[0.7, 0.3, 0.0]).unwrap();
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 3, 2);
        let phi = C::from_kraus(ks, 3, 3).unwrap();
        let petz = petz_maps(&phi, &b).unwrap();

        let fill = PsdOperator::from_diagonal(&[1.0 / 3.0; 3]).unwrap();
        let psi = complete_to_stochastic(&petz.recovery, &fill).unwrap();
        assert!(psi.trace_preservation_residual() < 1e-10);

        // Agrees with the bare recovery on operators inside supp Phi(B).
        let image_supp = petz.range_support.clone();
        let y = &image_supp * sampling::random_psd::<f64, _>(&mut rng, 3, 3) * &image_supp;
        let via_completed = psi.apply(&y).unwrap();
        let via_bare = petz.recovery.apply(&y).unwrap();
        assert!(max_abs(&(via_completed - via_bare)) < 1e-9);

        // Full-rank image: the completion is the recovery itself.
        let b_full = PsdOperator::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let petz_full = petz_maps(&phi, &b_full).unwrap();
        let psi_full = complete_to_stochastic(&petz_full.recovery, &fill).unwrap();
        assert!(psi_full.action_distance(&petz_full.recovery).unwrap() < 1e-9);
    }

    #[test]
    fn contraction_v_identities() {
        let mut rng = sampling::rng_from_seed(26);

        // Identity channel, full-rank B: V(X) = X B^{-1/2} B^{1/2} = X on
        // the support.
        let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
        let v = contraction_v(&C::identity(3), &b).unwrap();
        let x = sampling::gaussian_matrix::<f64, _>(&mut rng, 3, 3);
        assert!(max_abs(&(v.apply(&x).unwrap() - &x)) < 1e-9);

        // V^*(B^{1/2}) = Phi(B)^{1/2}.
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 2, 2);
        let phi = C::from_kraus(ks.clone(), 3, 2).unwrap();
        let v = contraction_v(&phi, &b).unwrap();
        let image = PsdOperator::new(phi.apply(b.matrix()).unwrap()).unwrap();
        let lhs = v.apply_adjoint(&b.sqrt_matrix()).unwrap();
        assert!(max_abs(&(lhs - image.sqrt_matrix())) < 1e-9);

        // V(Phi(B)^{1/2}) = B^{1/2} iff trace preserved: holds for CPTP,
        // fails for the halved channel.
        let back = v.apply(&image.sqrt_matrix()).unwrap();
        assert!(max_abs(&(back - b.sqrt_matrix())) < 1e-9);
        let half: Vec<M> = ks
            .iter()
            .map(|k| k.map(|z| z * creal(1.0 / 2.0_f64.sqrt())))
            .collect();
        let phi_half = C::from_kraus(half, 3, 2).unwrap();
        let v_half = contraction_v(&phi_half, &b).unwrap();
        let image_half = PsdOperator::new(phi_half.apply(b.matrix()).unwrap()).unwrap();
        let back = v_half.apply(&image_half.sqrt_matrix()).unwrap();
        assert!(max_abs(&(back - b.sqrt_matrix())) > 1e-3);

        // Contraction property over random CPTP channels.
        for _ in 0..20 {
            let d_in = 2 + (rng.gen::<u32>() % 2) as usize;
            let d_out = 2 + (rng.gen::<u32>() % 2) as usize;
            let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, d_in, d_out, 2);
            let phi = C::from_kraus(ks, d_in, d_out).unwrap();
            let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, d_in, d_in)).unwrap();
            let v = contraction_v(&phi, &b).unwrap();
            assert!(v.norm() <= 1.0 + 1e-10, "norm {}", v.norm());
        }
    }

    #[test]
    fn renyi0_monotone_under_trace_preserving_positive_maps() {
        // Tr Phi(B) Phi(A)^0 >= Tr B A^0 when Tr Phi(A) = Tr A.
        let mut rng = sampling::rng_from_seed(27);
        for _ in 0..10 {
            let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 3, 3, 2);
            let phi = C::from_kraus(ks, 3, 3).unwrap();
            let a = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 2)).unwrap();
            let b = PsdOperator::new(sampling::random_psd::<f64, _>(&mut rng, 3, 3)).unwrap();
            let fa = PsdOperator::new(phi.apply(a.matrix()).unwrap()).unwrap();
            let fb = phi.apply(b.matrix()).unwrap();
            let lhs = trace_re(&(&fb * fa.support_projection()));
            let rhs = trace_re(&(b.matrix() * a.support_projection()));
            assert!(lhs >= rhs - 1e-8, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn channel_json_round_trip() {
        let mut rng = sampling::rng_from_seed(28);
        let ks = sampling::random_cptp_kraus::<f64, _>(&mut rng, 2, 3, 2);
        let c = C::from_kraus(ks, 2, 3).unwrap();
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back = C::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert!(c.action_distance(&back).unwrap() < 1e-12);

        let lam = tomiyama_map::<f64>(TomiyamaKind::Lambda, 0.3, 2).unwrap();
        let j = serde_json::to_string(&lam.to_json()).unwrap();
        let back = C::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert!(lam.action_distance(&back).unwrap() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let c = C::identity(2);
        assert!(c.apply(&M::zeros(3, 3)).is_err());
        assert!(C::from_kraus(vec![M::zeros(2, 3)], 2, 2).is_err());
        assert!(C::from_choi(M::zeros(3, 3), 2, 2).is_err());
        let x = cplx(0.0, 1.0);
        let mut bad = M::identity(4, 4);
        bad[(0, 1)] = x;
        // Non-Hermitian Choi has no Kraus form.
        assert!(C::from_choi(bad, 2, 2).unwrap().require_kraus().is_err());
    }
}
