//! Support-convention-aware Hermitian matrix calculus.
//!
//! Spectral decompositions with eigenvalue clustering, generalized powers
//! and inverses taken on the support only, `log*`, Kronecker/partial-trace
//! plumbing, Schatten norms, and the Cauchy-system solver used by the
//! uniqueness probes.

use crate::scalar::{r, to_f64, Real};
use crate::{Error, Result};
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Dense complex matrix, the working representation of every operator.
pub type CMatrix<R> = DMatrix<Complex<R>>;

#[inline]
pub(crate) fn rmax<R: Real>(a: R, b: R) -> R {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
pub fn cplx<R: Real>(re: R, im: R) -> Complex<R> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}

/// Numerical tolerances, all relative to the operator scale unless noted.
///
/// The exact mathematics of the underlying identities fixes no thresholds;
/// these defaults are the artifact's calibration and every entry can be
/// overridden.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<R> {
    /// Hermiticity residual bound for accepting an input as Hermitian.
    pub hermiticity: R,
    /// Most negative eigenvalue allowed, relative to the largest one.
    pub psd: R,
    /// Eigenvalues at or below `support * lambda_max` count as zero.
    pub support: R,
    /// Relative eigenvalue-gap threshold for merging clusters.
    pub cluster: R,
    /// Idempotency/orthogonality residual allowed for spectral projections.
    pub projection: R,
    /// Residual allowed when reassembling an operator from its clusters.
    pub reconstruction: R,
}

impl<R: Real> Default for Tolerances<R> {
    fn default() -> Self {
        Tolerances {
            hermiticity: r(1e-8),
            psd: r(1e-8),
            support: r(1e-10),
            cluster: r(1e-8),
            projection: r(1e-8),
            reconstruction: r(1e-10),
        }
    }
}

/// One eigenvalue cluster: the merged eigenvalue, its spectral projection
/// and the multiplicity (rank of the projection).
#[derive(Debug, Clone)]
pub struct Cluster<R: Real> {
    pub value: R,
    pub projection: CMatrix<R>,
    pub multiplicity: usize,
}

/// Spectral decomposition into strictly increasing eigenvalue clusters
/// with orthogonal projections summing to the identity.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<R: Real> {
    clusters: Vec<Cluster<R>>,
    dim: usize,
}

impl<R: Real> SpectralDecomposition<R> {
    pub fn clusters(&self) -> &[Cluster<R>] {
        &self.clusters
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> Vec<R> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    /// Largest eigenvalue (clusters are sorted increasing).
    pub fn lambda_max(&self) -> R {
        self.clusters
            .last()
            .map(|c| c.value)
            .unwrap_or_else(R::zero)
    }

    pub fn lambda_min(&self) -> R {
        self.clusters
            .first()
            .map(|c| c.value)
            .unwrap_or_else(R::zero)
    }

    /// `sum f(lambda) P_lambda` over all clusters.
    pub fn apply<F: Fn(R) -> R>(&self, f: F) -> CMatrix<R> {
        let mut out = CMatrix::<R>::zeros(self.dim, self.dim);
        for c in &self.clusters {
            out += c.projection.map(|z| z * creal(f(c.value)));
        }
        out
    }

    /// Reassembles the operator from its clusters.
    pub fn reconstruct(&self) -> CMatrix<R> {
        self.apply(|x| x)
    }

    /// `max_ij |sum P - I|`, a health check on the projection system.
    pub fn completeness_residual(&self) -> R {
        let mut sum = CMatrix::<R>::zeros(self.dim, self.dim);
        for c in &self.clusters {
            sum += &c.projection;
        }
        max_abs(&(sum - CMatrix::<R>::identity(self.dim, self.dim)))
    }
}

/// Largest entry modulus, used as the scale of a matrix.
pub fn max_abs<R: Real>(m: &CMatrix<R>) -> R {
    let mut s = R::zero();
    for z in m.iter() {
        s = rmax(s, z.modulus());
    }
    s
}

/// Hermiticity defect `max_ij |A - A*|`.
pub fn hermiticity_residual<R: Real>(m: &CMatrix<R>) -> R {
    max_abs(&(m - m.adjoint()))
}

/// Hilbert-Schmidt inner product `Tr A* B`.
pub fn hs_inner<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> Complex<R> {
    let mut acc = Complex::new(R::zero(), R::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conjugate() * *y;
    }
    acc
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm<R: Real>(m: &CMatrix<R>) -> R {
    let mut acc = R::zero();
    for z in m.iter() {
        let a = z.modulus();
        acc += a * a;
    }
    acc.sqrt()
}

/// Commutator `AB - BA`.
pub fn commutator<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a * b - b * a
}

pub fn trace<R: Real>(m: &CMatrix<R>) -> Complex<R> {
    m.trace()
}

/// Real part of the trace; the imaginary part is discarded (callers pass
/// operators whose trace is real up to rounding).
pub fn trace_re<R: Real>(m: &CMatrix<R>) -> R {
    m.trace().real()
}

fn check_finite<R: Real>(m: &CMatrix<R>) -> Result<()> {
    for z in m.iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// Hermitian eigendecomposition, sorted ascending.
///
/// Diagonal matrices short-circuit the solver; large diagonal operators
/// (tensor powers of commuting states) would otherwise dominate runtime.
pub(crate) fn eigh<R: Real>(m: &CMatrix<R>) -> (Vec<R>, CMatrix<R>) {
    let n = m.nrows();
    let scale = max_abs(m);
    let diag_tol = r::<R>(1e-14) * rmax(scale, R::one());
    let mut off = R::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = rmax(off, m[(i, j)].modulus());
            }
        }
    }
    if off <= diag_tol {
        let mut idx: Vec<usize> = (0..n).collect();
        let vals: Vec<R> = (0..n).map(|i| m[(i, i)].real()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let sorted: Vec<R> = idx.iter().map(|&i| vals[i]).collect();
        let mut vecs = CMatrix::<R>::zeros(n, n);
        for (col, &i) in idx.iter().enumerate() {
            vecs[(i, col)] = creal(R::one());
        }
        return (sorted, vecs);
    }

    let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<R> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMatrix::<R>::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Groups sorted eigenvalues into clusters separated by gaps larger than
/// `delta * scale`, where `scale` is the spectral spread, falling back to
/// `max(1, |lambda|_max)` when the spread is pure rounding noise.
fn cluster_indices<R: Real>(sorted: &[R], delta: R) -> Vec<(usize, usize)> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let spread = *sorted.last().unwrap() - sorted[0];
    let max_abs_val = rmax(sorted[0].abs(), sorted.last().unwrap().abs());
    let noise_floor = r::<R>(1e-12) * rmax(R::one(), max_abs_val);
    let scale = if spread > noise_floor {
        spread
    } else {
        rmax(R::one(), max_abs_val)
    };
    let threshold = delta * scale;
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i] - sorted[i - 1] > threshold {
            ranges.push((start, i));
            start = i;
        }
    }
    ranges.push((start, sorted.len()));
    ranges
}

/// Spectral decomposition of a Hermitian matrix with relative eigenvalue
/// clustering `delta_cluster`. Rejects non-square or non-Hermitian input.
pub fn spectral_decompose<R: Real>(
    a: &CMatrix<R>,
    delta_cluster: R,
    hermiticity_tol: R,
) -> Result<SpectralDecomposition<R>> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare(a.nrows(), a.ncols()));
    }
    check_finite(a)?;
    let scale = rmax(max_abs(a), R::one());
    let resid = hermiticity_residual(a);
    if resid > hermiticity_tol * scale {
        return Err(Error::NotHermitian(
            to_f64(resid),
            to_f64(hermiticity_tol * scale),
        ));
    }
    let sym = (a + a.adjoint()).map(|z| z * creal(r(0.5)));
    let (vals, vecs) = eigh(&sym);
    let n = vals.len();
    let mut clusters = Vec::new();
    for (lo, hi) in cluster_indices(&vals, delta_cluster) {
        let mult = hi - lo;
        let mut value = R::zero();
        let mut proj = CMatrix::<R>::zeros(n, n);
        for (&lambda, v) in vals[lo..hi].iter().zip(vecs.column_iter().skip(lo)) {
            value += lambda;
            proj += v * v.adjoint();
        }
        value /= R::from_usize(mult).unwrap();
        clusters.push(Cluster {
            value,
            projection: proj,
            multiplicity: mult,
        });
    }
    Ok(SpectralDecomposition { clusters, dim: n })
}

/// Positive semidefinite operator with its spectral decomposition and
/// support data resolved once at construction.
///
/// Eigenvalues below `support * lambda_max` are snapped to exactly zero and
/// merged into a single kernel cluster, so `spect(A)` carries the support
/// convention explicitly. Instances are immutable.
#[derive(Debug, Clone)]
pub struct PsdOperator<R: Real> {
    matrix: CMatrix<R>,
    spectral: SpectralDecomposition<R>,
    support_rank: usize,
    tolerances: Tolerances<R>,
}

impl<R: Real> PsdOperator<R> {
    pub fn new(matrix: CMatrix<R>) -> Result<Self> {
        Self::with_tolerances(matrix, Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix<R>, tol: Tolerances<R>) -> Result<Self> {
        let spectral = spectral_decompose(&matrix, tol.cluster, tol.hermiticity)?;
        let lambda_max = spectral.lambda_max();
        if lambda_max < R::zero() {
            return Err(Error::NotPsd(
                to_f64(spectral.lambda_min()),
                to_f64(lambda_max),
            ));
        }
        let floor = tol.support * lambda_max;
        let neg_allowed = tol.psd * rmax(lambda_max, r(1e-300));
        if spectral.lambda_min() < -neg_allowed {
            return Err(Error::NotPsd(
                to_f64(spectral.lambda_min()),
                to_f64(lambda_max),
            ));
        }
        // Snap kernel-level eigenvalues to exactly zero and merge them.
        let dim = spectral.dim();
        let mut zero_proj = CMatrix::<R>::zeros(dim, dim);
        let mut zero_mult = 0usize;
        let mut clusters: Vec<Cluster<R>> = Vec::new();
        for c in spectral.clusters() {
            if c.value <= floor {
                zero_proj += &c.projection;
                zero_mult += c.multiplicity;
            } else {
                clusters.push(c.clone());
            }
        }
        if zero_mult > 0 {
            clusters.insert(
                0,
                Cluster {
                    value: R::zero(),
                    projection: zero_proj,
                    multiplicity: zero_mult,
                },
            );
        }
        let support_rank = dim - zero_mult;
        Ok(PsdOperator {
            matrix,
            spectral: SpectralDecomposition { clusters, dim },
            support_rank,
            tolerances: tol,
        })
    }

    /// Diagonal PSD operator from nonnegative weights.
    pub fn from_diagonal(weights: &[R]) -> Result<Self> {
        let n = weights.len();
        let m = CMatrix::<R>::from_fn(n, n, |i, j| {
            if i == j {
                creal(weights[i])
            } else {
                Complex::new(R::zero(), R::zero())
            }
        });
        Self::new(m)
    }

    /// Rank-one projector onto `v / |v|`.
    pub fn pure_state(v: &DVector<Complex<R>>) -> Result<Self> {
        let n = v.norm();
        if n == R::zero() {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        let u = v.map(|z| z * creal(R::one() / n));
        Self::new(&u * u.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition<R> {
        &self.spectral
    }

    pub fn tolerances(&self) -> &Tolerances<R> {
        &self.tolerances
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn trace(&self) -> R {
        trace_re(&self.matrix)
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn is_zero(&self) -> bool {
        self.support_rank == 0
    }

    /// Clusters with strictly positive eigenvalue.
    pub fn nonzero_clusters(&self) -> impl Iterator<Item = &Cluster<R>> {
        self.spectral
            .clusters()
            .iter()
            .filter(|c| c.value > R::zero())
    }

    /// `A^0`: projection onto the support.
    pub fn support_projection(&self) -> CMatrix<R> {
        let d = self.dim();
        let mut p = CMatrix::<R>::zeros(d, d);
        for c in self.nonzero_clusters() {
            p += &c.projection;
        }
        p
    }

    /// `I - A^0`: projection onto the kernel.
    pub fn kernel_projection(&self) -> CMatrix<R> {
        CMatrix::<R>::identity(self.dim(), self.dim()) - self.support_projection()
    }

    /// Generalized complex power `sum_{a>0} a^z P_a`.
    ///
    /// `z = 0` gives the support projection, `z = -1` the generalized
    /// inverse, and purely imaginary `z = it` a unitary on the support.
    pub fn power(&self, z: Complex<R>) -> CMatrix<R> {
        let d = self.dim();
        let mut out = CMatrix::<R>::zeros(d, d);
        for c in self.nonzero_clusters() {
            let w = (z * creal(c.value.ln())).exp();
            out += c.projection.map(|p| p * w);
        }
        out
    }

    /// Generalized real power `sum_{a>0} a^p P_a`.
    pub fn power_real(&self, p: R) -> CMatrix<R> {
        let d = self.dim();
        let mut out = CMatrix::<R>::zeros(d, d);
        for c in self.nonzero_clusters() {
            out += c.projection.map(|q| q * creal(c.value.powf(p)));
        }
        out
    }

    pub fn sqrt_matrix(&self) -> CMatrix<R> {
        self.power_real(r(0.5))
    }

    pub fn inv_sqrt_matrix(&self) -> CMatrix<R> {
        self.power_real(r(-0.5))
    }

    /// `log* A = sum_{a>0} (log a) P_a`, zero on the kernel.
    pub fn log_star(&self) -> CMatrix<R> {
        let d = self.dim();
        let mut out = CMatrix::<R>::zeros(d, d);
        for c in self.nonzero_clusters() {
            out += c.projection.map(|q| q * creal(c.value.ln()));
        }
        out
    }

    /// `Tr A (I - B^0)`: mass of `self` outside the support of `other`.
    pub fn mass_outside_support(&self, other: &PsdOperator<R>) -> R {
        let k = other.kernel_projection();
        trace_re(&(self.matrix() * k))
    }

    /// Whether `supp self <= supp other` within the support tolerance.
    pub fn support_contained_in(&self, other: &PsdOperator<R>) -> bool {
        let mass = self.mass_outside_support(other);
        let scale = rmax(self.trace(), R::one());
        mass <= r::<R>(1e-10) * scale
    }

    /// Density check: trace one within `tol`.
    pub fn is_density(&self, tol: R) -> bool {
        (self.trace() - R::one()).abs() <= tol
    }
}

/// `f(A)` for Hermitian `A` through the spectral decomposition.
pub fn matrix_function<R: Real, F: Fn(R) -> R>(a: &CMatrix<R>, f: F) -> Result<CMatrix<R>> {
    let tol = Tolerances::<R>::default();
    let sd = spectral_decompose(a, tol.cluster, tol.hermiticity)?;
    Ok(sd.apply(f))
}

// ---------------------------------------------------------------------------
// Tensor plumbing
// ---------------------------------------------------------------------------

/// Kronecker product.
pub fn kron<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a.kronecker(b)
}

/// `A^{tensor n}`; the output dimension `d^n` must stay within `cap`.
pub fn tensor_power<R: Real>(a: &CMatrix<R>, n: usize, cap: usize) -> Result<CMatrix<R>> {
    if n == 0 {
        return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
    }
    let d = a.nrows();
    let mut dim = 1usize;
    for _ in 0..n {
        dim = dim
            .checked_mul(d)
            .ok_or(Error::DimensionCap(usize::MAX, cap))?;
        if dim > cap {
            return Err(Error::DimensionCap(dim, cap));
        }
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = out.kronecker(a);
    }
    Ok(out)
}

/// Partial trace over the factors not listed in `keep`.
///
/// `dims` are the tensor factor dimensions (their product must equal the
/// matrix dimension); `keep` lists the factor indices to retain, in order.
pub fn partial_trace<R: Real>(
    a: &CMatrix<R>,
    dims: &[usize],
    keep: &[usize],
) -> Result<CMatrix<R>> {
    let total: usize = dims.iter().product();
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare(a.nrows(), a.ncols()));
    }
    if total != a.nrows() {
        return Err(Error::DimensionMismatch(total, a.nrows()));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidInput("keep index out of range".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::InvalidInput("duplicate keep index".into()));
    }

    let out_dim: usize = keep.iter().map(|&k| dims[k]).product::<usize>().max(1);
    // Decompose each full index into (kept part, traced part).
    let mut kept_of = vec![0usize; total];
    let mut traced_of = vec![0usize; total];
    for idx in 0..total {
        let mut rem = idx;
        let mut factors = vec![0usize; dims.len()];
        for f in (0..dims.len()).rev() {
            factors[f] = rem % dims[f];
            rem /= dims[f];
        }
        let mut kept = 0usize;
        for &k in keep {
            kept = kept * dims[k] + factors[k];
        }
        let mut traced = 0usize;
        for f in 0..dims.len() {
            if !keep.contains(&f) {
                traced = traced * dims[f] + factors[f];
            }
        }
        kept_of[idx] = kept;
        traced_of[idx] = traced;
    }
    let mut out = CMatrix::<R>::zeros(out_dim, out_dim);
    for i in 0..total {
        for j in 0..total {
            if traced_of[i] == traced_of[j] {
                out[(kept_of[i], kept_of[j])] += a[(i, j)];
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Singular values, descending. Hermitian and diagonal inputs bypass the
/// general SVD.
pub fn singular_values<R: Real>(m: &CMatrix<R>) -> Vec<R> {
    let mut svals: Vec<R> = if m.nrows() == m.ncols()
        && hermiticity_residual(m) <= r::<R>(1e-12) * rmax(max_abs(m), R::one())
    {
        let sym = (m + m.adjoint()).map(|z| z * creal(r(0.5)));
        let (vals, _) = eigh(&sym);
        vals.into_iter().map(|v| v.abs()).collect()
    } else {
        let svd = nalgebra::linalg::SVD::new(m.clone(), false, false);
        svd.singular_values.iter().copied().collect()
    };
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svals
}

/// Trace norm `|A|_1`, the sum of singular values.
pub fn trace_norm<R: Real>(m: &CMatrix<R>) -> R {
    let mut acc = R::zero();
    for s in singular_values(m) {
        acc += s;
    }
    acc
}

/// Extended Schatten quantity `(Tr |A|^p)^{1/p}` for nonzero real `p`.
///
/// For `p < 1` this is not a norm; negative powers are taken on the
/// support of `|A|`, and the zero matrix maps to zero.
pub fn schatten_p<R: Real>(m: &CMatrix<R>, p: R) -> Result<R> {
    if p == R::zero() {
        return Err(Error::InvalidInput(
            "schatten exponent must be nonzero".into(),
        ));
    }
    let svals = singular_values(m);
    let smax = svals.first().copied().unwrap_or_else(R::zero);
    if smax == R::zero() {
        return Ok(R::zero());
    }
    let support_floor = r::<R>(1e-10) * smax;
    let mut acc = R::zero();
    for s in svals {
        if p > R::zero() && p < R::one() || p < R::zero() {
            if s > support_floor {
                acc += s.powf(p);
            }
        } else if s > R::zero() {
            acc += s.powf(p);
        }
    }
    Ok(acc.powf(R::one() / p))
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm<R: Real>(m: &CMatrix<R>) -> R {
    singular_values(m).first().copied().unwrap_or_else(R::zero)
}

// ---------------------------------------------------------------------------
// Cauchy systems
// ---------------------------------------------------------------------------

/// Solution of a Cauchy system `sum_j c_j / (x_i + t_j) = v_i`.
#[derive(Debug, Clone)]
pub struct CauchySolution<R> {
    pub coefficients: Vec<R>,
    pub residual: R,
    pub condition: R,
    /// Set when the condition number exceeds `1e12`.
    pub ill_conditioned: bool,
}

/// Solves the Cauchy system with full-pivoting LU.
///
/// `xs` must be pairwise distinct and nonnegative, `ts` pairwise distinct
/// and positive; the Cauchy matrix is then invertible and interpolation
/// through the primitives `1/(x+t)` is exact.
pub fn cauchy_solve<R: Real>(xs: &[R], ts: &[R], values: &[R]) -> Result<CauchySolution<R>> {
    let n = xs.len();
    if ts.len() != n || values.len() != n {
        return Err(Error::DimensionMismatch(n, ts.len().max(values.len())));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty Cauchy system".into()));
    }
    let dup = |v: &[R]| -> bool {
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                let scale = rmax(rmax(v[i].abs(), v[j].abs()), R::one());
                if (v[i] - v[j]).abs() <= r::<R>(1e-14) * scale {
                    return true;
                }
            }
        }
        false
    };
    if dup(xs) {
        return Err(Error::InvalidInput("duplicate x nodes".into()));
    }
    if dup(ts) {
        return Err(Error::InvalidInput("duplicate t nodes".into()));
    }
    if ts.iter().any(|&t| t <= R::zero()) {
        return Err(Error::InvalidInput("t nodes must be positive".into()));
    }
    if xs.iter().any(|&x| x < R::zero()) {
        return Err(Error::InvalidInput("x nodes must be nonnegative".into()));
    }

    let c = DMatrix::<R>::from_fn(n, n, |i, j| R::one() / (xs[i] + ts[j]));
    let rhs = DVector::<R>::from_row_slice(values);
    let svd = nalgebra::linalg::SVD::new(c.clone(), false, false);
    let smax = svd
        .singular_values
        .iter()
        .fold(R::zero(), |a, &b| rmax(a, b));
    let smin = svd
        .singular_values
        .iter()
        .fold(smax, |a, &b| if b < a { b } else { a });
    let condition = if smin > R::zero() {
        smax / smin
    } else {
        r(f64::MAX)
    };
    let lu = nalgebra::linalg::FullPivLU::new(c.clone());
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput("singular Cauchy matrix".into()))?;
    let resid_vec = &c * &sol - &rhs;
    let mut residual = R::zero();
    for x in resid_vec.iter() {
        residual = rmax(residual, x.abs());
    }
    Ok(CauchySolution {
        coefficients: sol.iter().copied().collect(),
        residual,
        condition,
        ill_conditioned: condition > r(1e12),
    })
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

/// Wire format for matrices: row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: [usize; 2],
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix<R: Real>(m: &CMatrix<R>) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                entries.push([to_f64(z.re), to_f64(z.im)]);
            }
        }
        MatrixJson {
            dims: [rows, cols],
            entries,
        }
    }

    pub fn to_matrix<R: Real>(&self) -> Result<CMatrix<R>> {
        let [rows, cols] = self.dims;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("dims must be >= 1".into()));
        }
        if self.entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(self.entries.len(), rows * cols));
        }
        let m = CMatrix::<R>::from_fn(rows, cols, |i, j| {
            let [re, im] = self.entries[i * cols + j];
            cplx(r(re), r(im))
        });
        check_finite(&m)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMatrix<f64>;

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
    fn identity_is_one_cluster() {
        let sd = spectral_decompose(&M::identity(2, 2), 1e-8, 1e-8).unwrap();
        assert_eq!(sd.clusters().len(), 1);
        assert_eq!(sd.clusters()[0].multiplicity, 2);
        assert!((sd.clusters()[0].value - 1.0).abs() < 1e-14);
        assert!(max_abs(&(sd.clusters()[0].projection.clone() - M::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn qutrit_example_state_has_three_rank_one_clusters() {
        let sd = spectral_decompose(&diag(&[1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0]), 1e-8, 1e-8).unwrap();
        assert_eq!(sd.clusters().len(), 3);
        for c in sd.clusters() {
            assert_eq!(c.multiplicity, 1);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        // Deterministic pseudo-random Hermitian 4x4.
        let mut m = M::zeros(4, 4);
        let mut s = 1.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                s = (s * 997.0 + 13.0) % 101.0;
                let re = s / 101.0 - 0.5;
                s = (s * 997.0 + 13.0) % 101.0;
                let im = s / 101.0 - 0.5;
                m[(i, j)] = cplx(re, im);
            }
        }
        let h = (&m + m.adjoint()).map(|z| z * creal(0.5));
        let sd = spectral_decompose(&h, 1e-8, 1e-8).unwrap();
        assert!(max_abs(&(sd.reconstruct() - &h)) < 1e-12);
        assert!(sd.completeness_residual() < 1e-12);
        // Projection algebra: orthogonal idempotents.
        for (i, ci) in sd.clusters().iter().enumerate() {
            for (j, cj) in sd.clusters().iter().enumerate() {
                let prod = &ci.projection * &cj.projection;
                let expect = if i == j {
                    ci.projection.clone()
                } else {
                    M::zeros(4, 4)
                };
                assert!(max_abs(&(prod - expect)) < 1e-10);
            }
        }
    }

    #[test]
    fn support_projection_cases() {
        let zero = PsdOperator::new(M::zeros(3, 3)).unwrap();
        assert!(zero.is_zero());
        assert!(max_abs(&zero.support_projection()) == 0.0);

        let rho = PsdOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0, 0.0]).unwrap();
        assert!(max_abs(&(rho.support_projection() - diag(&[1.0, 1.0, 0.0]))) < 1e-12);

        let v = DVector::from_column_slice(&[creal(0.6), cplx(0.0, 0.8)]);
        let pure = PsdOperator::pure_state(&v).unwrap();
        let p0 = pure.support_projection();
        assert!(max_abs(&(p0.clone() - pure.matrix())) < 1e-12);
        assert!(max_abs(&(&p0 * &p0 - p0.clone())) < 1e-12);
    }

    #[test]
    fn generalized_inverse_and_powers() {
        let a = PsdOperator::from_diagonal(&[4.0, 0.0]).unwrap();
        let inv = a.power(creal(-1.0));
        assert!(max_abs(&(inv - diag(&[0.25, 0.0]))) < 1e-14);

        let b = PsdOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0, 0.0]).unwrap();
        let h = b.power_real(0.5);
        assert!(max_abs(&(h - diag(&[(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt(), 0.0]))) < 1e-14);
    }

    #[test]
    fn imaginary_power_is_unitary_on_support() {
        let g = M::from_fn(3, 3, |i, j| {
            cplx((i + 2 * j) as f64 * 0.17 - 0.4, (i * j) as f64 * 0.23 - 0.1)
        });
        let a = PsdOperator::new(&g * g.adjoint()).unwrap();
        let t = 0.7;
        let u = a.power(cplx(0.0, t));
        let um = a.power(cplx(0.0, -t));
        assert!(max_abs(&(&u * &um - a.support_projection())) < 1e-10);
    }

    #[test]
    fn power_additivity_on_support() {
        let a = PsdOperator::from_diagonal(&[0.3, 1.7, 0.0]).unwrap();
        let z1 = cplx(0.4, 0.3);
        let z2 = cplx(-1.1, 0.2);
        let lhs = a.power(z1) * a.power(z2);
        let rhs = a.power(z1 + z2);
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn log_star_conventions() {
        let i2 = PsdOperator::new(M::identity(2, 2)).unwrap();
        assert!(max_abs(&i2.log_star()) < 1e-14);
        let e = PsdOperator::from_diagonal(&[std::f64::consts::E, 0.0]).unwrap();
        assert!(max_abs(&(e.log_star() - diag(&[1.0, 0.0]))) < 1e-14);
    }

    #[test]
    fn log_star_is_derivative_of_power_at_zero() {
        let a = PsdOperator::from_diagonal(&[0.2, 0.5, 1.9]).unwrap();
        let h = 1e-6;
        let fd = (a.power(creal(h)) - a.power(creal(-h))).map(|z| z * creal(0.5 / h));
        assert!(max_abs(&(fd - a.log_star())) < 1e-6);
    }

    #[test]
    fn kron_and_tensor_power() {
        let i2 = M::identity(2, 2);
        assert!(max_abs(&(kron(&i2, &i2) - M::identity(4, 4))) == 0.0);

        let p = 0.3;
        let t = tensor_power(&diag(&[p, 1.0 - p]), 2, 4096).unwrap();
        let expect = diag(&[p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)]);
        assert!(max_abs(&(t - expect)) < 1e-15);

        assert!(matches!(
            tensor_power(&M::identity(8, 8), 5, 4096),
            Err(Error::DimensionCap(_, _))
        ));
    }

    #[test]
    fn trace_multiplicativity_under_kron() {
        let g1 = M::from_fn(2, 2, |i, j| cplx(0.3 * (i as f64 + 1.0), 0.1 * j as f64));
        let g2 = M::from_fn(3, 3, |i, j| cplx(0.2 * (j as f64 - 1.0), 0.05 * i as f64));
        let a = &g1 * g1.adjoint();
        let b = &g2 * g2.adjoint();
        let t = trace_re(&kron(&a, &b));
        assert!((t - trace_re(&a) * trace_re(&b)).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_basics() {
        let g1 = M::from_fn(2, 2, |i, j| cplx((i + j) as f64 * 0.3, 0.2 * i as f64));
        let g2 = M::from_fn(3, 3, |i, j| {
            cplx((2 * i + j) as f64 * 0.1, -0.1 * (j as f64))
        });
        let a = &g1 * g1.adjoint();
        let b = &g2 * g2.adjoint();
        let ab = kron(&a, &b);
        let red = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let expect = a.map(|z| z * creal(trace_re(&b)));
        assert!(max_abs(&(red - expect)) < 1e-12);

        let full = partial_trace(&ab, &[2, 3], &[]).unwrap();
        assert!((full[(0, 0)].re - trace_re(&ab)).abs() < 1e-12);

        assert!(partial_trace(&ab, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn trace_norm_values() {
        // |e1><e1| - |psi><psi| with psi = (e1+e2)/sqrt(2) has trace norm sqrt(2).
        let e1 = DVector::from_column_slice(&[creal(1.0), creal(0.0)]);
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = DVector::from_column_slice(&[creal(s), creal(s)]);
        let m = &e1 * e1.adjoint() - &psi * psi.adjoint();
        assert!((trace_norm(&m) - 2.0_f64.sqrt()).abs() < 1e-12);

        assert_eq!(trace_norm(&M::zeros(3, 3)), 0.0);
        assert!((schatten_p(&diag(&[3.0, 4.0]), 2.0).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn schatten_negative_power_on_support() {
        let m = diag(&[2.0, 0.0]);
        // Tr |A|^{-1} over the support = 1/2, so the quantity is (1/2)^{-1} = 2.
        let v = schatten_p(&m, -1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(schatten_p(&M::zeros(2, 2), -1.0).unwrap(), 0.0);
    }

    #[test]
    fn cauchy_single_point() {
        let sol = cauchy_solve(&[1.0], &[1.0], &[2.0]).unwrap();
        assert!((sol.coefficients[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_forward_then_solve() {
        let xs = [0.0, 1.0];
        let ts = [1.0, 2.0];
        let c = [1.0, 1.0];
        let values: Vec<f64> = xs
            .iter()
            .map(|&x| {
                c.iter()
                    .zip(ts.iter())
                    .map(|(&cj, &tj)| cj / (x + tj))
                    .sum()
            })
            .collect();
        let sol = cauchy_solve(&xs, &ts, &values).unwrap();
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((sol.coefficients[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_five_node_residual() {
        let xs = [0.1, 0.7, 1.3, 2.9, 4.2];
        let ts = [0.4, 0.9, 1.6, 2.2, 3.7];
        let values = [0.3, -0.2, 1.1, 0.05, -0.6];
        let sol = cauchy_solve(&xs, &ts, &values).unwrap();
        assert!(sol.residual < 1e-8);
    }

    #[test]
    fn cauchy_rejects_duplicates() {
        assert!(cauchy_solve(&[1.0, 1.0], &[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(cauchy_solve(&[0.0, 1.0], &[2.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip_exact() {
        let m = M::from_fn(2, 3, |i, j| cplx(i as f64 + 0.125, j as f64 - 0.25));
        let j = MatrixJson::from_matrix(&m);
        let back: M = j.to_matrix().unwrap();
        assert_eq!(m, back);
        let s = serde_json::to_string(&j).unwrap();
        let j2: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(j2.to_matrix::<f64>().unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(spectral_decompose(&M::from_fn(2, 3, |_, _| creal(0.0)), 1e-8, 1e-8).is_err());
        let mut nh = M::identity(2, 2);
        nh[(0, 1)] = creal(0.5);
        assert!(spectral_decompose(&nh, 1e-8, 1e-8).is_err());
        let neg = diag(&[1.0, -0.5]);
        assert!(PsdOperator::new(neg).is_err());
    }
}
