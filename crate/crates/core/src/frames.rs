//! Continuous-frame models on quadrature grids.
//!
//! A [`FrameModel`] pairs a parameter window (a [`Region`] of a
//! [`SpaceModel`]) with an evaluation map `t ↦ Ψ(t) ∈ C^n`. Vectors carry the
//! `√h` factors of the underlying function-space quadrature, so Euclidean
//! inner products approximate `L²` inner products, and the parameter measure
//! lives in the region weights. The frame operator is the quadrature sum
//! `Σ wᵢ T_{Ψ(tᵢ)}`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use nalgebra::DMatrix;

use crate::operators::{weighted_sum, HermitianOp, Subspace};
use crate::spaces::{Region, SpaceKind, SpaceModel};
use crate::{CVector, Complex64, Error, Result};

type EvalFn = dyn Fn(&[f64]) -> CVector + Send + Sync;

/// A frame `Ψ` sampled on a quadrature grid of its parameter space.
#[derive(Clone)]
pub struct FrameModel {
    label: String,
    space: SpaceModel,
    region: Region,
    dim: usize,
    evaluate: Arc<EvalFn>,
    vectors: Vec<CVector>,
    declared_d: f64,
    reference: (f64, f64),
}

impl fmt::Debug for FrameModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameModel")
            .field("label", &self.label)
            .field("space", &self.space)
            .field("grid_points", &self.region.len())
            .field("dim", &self.dim)
            .field("declared_d", &self.declared_d)
            .field("reference", &self.reference)
            .finish()
    }
}

impl FrameModel {
    /// Builds a model from an evaluation map. `declared_d = None` declares
    /// the grid maximum of `‖Ψ(t)‖²`.
    pub fn new(
        label: impl Into<String>,
        space: SpaceModel,
        region: Region,
        dim: usize,
        evaluate: Arc<EvalFn>,
        declared_d: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("frame model dimension"));
        }
        let vectors: Vec<CVector> = region.points().iter().map(|p| evaluate(p)).collect();
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        if vectors
            .iter()
            .any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        let observed = max_norm_sq(&vectors);
        let declared_d = declared_d.unwrap_or(observed);
        if observed > declared_d * (1.0 + 1e-6) {
            return Err(Error::NormBoundExceeded {
                declared: declared_d,
                observed,
            });
        }
        let reference = weighted_sum(&vectors, region.weights())?.extreme_eigenvalues()?;
        Ok(Self {
            label: label.into(),
            space,
            region,
            dim,
            evaluate,
            vectors,
            declared_d,
            reference,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Dimension `n` of the model of `H`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Ψ(t)` at an arbitrary parameter point.
    pub fn evaluate(&self, t: &[f64]) -> CVector {
        (self.evaluate)(t)
    }

    /// `Ψ` at every grid point, in grid order.
    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        self.region.weights()
    }

    pub fn declared_d(&self) -> f64 {
        self.declared_d
    }

    /// Extreme eigenvalues `(A, B)` of the grid frame operator.
    pub fn reference_bounds(&self) -> (f64, f64) {
        self.reference
    }

    /// The same frame followed by the coordinate map onto `sub`:
    /// `Ψ'(t) = Q* Ψ(t)` for the orthonormal basis `Q` of `sub`. The declared
    /// `D` is kept, since compression cannot increase norms.
    pub fn compressed(&self, sub: &Subspace, label: impl Into<String>) -> Result<Self> {
        if sub.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: sub.ambient_dim(),
            });
        }
        if sub.dim() == 0 {
            return Err(Error::Empty("compression subspace"));
        }
        let adj: DMatrix<Complex64> = sub.basis().adjoint();
        let inner = self.evaluate.clone();
        let eval: Arc<EvalFn> = Arc::new(move |t: &[f64]| &adj * inner(t));
        Self::new(
            label,
            self.space,
            self.region.clone(),
            sub.dim(),
            eval,
            Some(self.declared_d),
        )
    }
}

fn max_norm_sq(vectors: &[CVector]) -> f64 {
    vectors.iter().map(|v| v.norm_squared()).fold(0.0, f64::max)
}

/// Quadrature frame operator `Σ wᵢ T_{Ψ(tᵢ)}`.
pub fn frame_operator(frame: &FrameModel) -> Result<HermitianOp> {
    weighted_sum(frame.vectors(), frame.weights())
}

/// Grid maximum of `‖Ψ(t)‖²` together with the declared `D`.
pub fn norm_bound_d(frame: &FrameModel) -> Result<(f64, f64)> {
    let observed = max_norm_sq(frame.vectors());
    if observed > frame.declared_d * (1.0 + 1e-6) {
        return Err(Error::NormBoundExceeded {
            declared: frame.declared_d,
            observed,
        });
    }
    Ok((observed, frame.declared_d))
}

/// Span of the given coordinate axes.
pub fn coordinate_subspace(ambient: usize, coords: &[usize]) -> Result<Subspace> {
    let mut basis = DMatrix::<Complex64>::zeros(ambient, coords.len());
    for (j, &k) in coords.iter().enumerate() {
        if k >= ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                got: k + 1,
            });
        }
        basis[(k, j)] = Complex64::new(1.0, 0.0);
    }
    Subspace::from_orthonormal_columns(basis)
}

/// Eigenspace of `op` for eigenvalues `≥ tau · λ_max`.
pub fn spectral_subspace(op: &HermitianOp, tau: f64) -> Result<Subspace> {
    let (vals, vecs) = op.eigen_decomposition()?;
    let top = vals.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::NotPositive { min_eig: top });
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= tau * top).collect();
    let basis = DMatrix::from_fn(op.dim(), keep.len(), |i, j| vecs[(i, keep[j])]);
    Subspace::from_orthonormal_columns(basis)
}

/// Midpoint nodes `(s_k, w_k)` of `[lo, hi]`.
pub fn midpoint_nodes(interval: (f64, f64), n: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = interval;
    if n == 0 || !(hi > lo) {
        return Err(Error::Empty("quadrature interval"));
    }
    let h = (hi - lo) / n as f64;
    Ok((0..n).map(|k| (lo + (k as f64 + 0.5) * h, h)).collect())
}

fn check_space(space: &SpaceModel, want_dim: usize, hyperbolic: bool) -> Result<()> {
    let ok = match space.kind {
        SpaceKind::HyperbolicHalfPlane => hyperbolic,
        SpaceKind::Euclidean { dim } | SpaceKind::EuclideanRegion { dim } => {
            !hyperbolic && dim == want_dim
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "frame needs a {} parameter space, got {:?}",
            if hyperbolic {
                "hyperbolic"
            } else {
                "Euclidean"
            },
            space.kind
        )))
    }
}

/// Real window function for Gabor systems.
pub type Window = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `g(x) = e^{-πx²}`, with `‖g‖² = 1/√2`.
pub fn gaussian_window() -> Window {
    Arc::new(|x: f64| libm::exp(-PI * x * x))
}

/// Gabor system `Ψ(a, b)(x) = e^{-2πibx} g(x − a)` on the time grid
/// `s_k` (midpoints of `time`), parameters `(a, b)` from a 2-D Euclidean
/// region.
///
/// The time grid has spacing `h`, so `b` is only resolved modulo `1/h`; a
/// `b`-window of length `L_b` covers `L_b·h` periods and the vectors are
/// scaled by `(L_b·h)^{-1/2}` so that the frame operator approximates
/// `‖g‖²·I` on the part of the time grid well inside the `a`-window.
pub fn gabor_frame(
    space: SpaceModel,
    window: Window,
    n: usize,
    time: (f64, f64),
    region: Region,
) -> Result<FrameModel> {
    check_space(&space, 2, false)?;
    let nodes = midpoint_nodes(time, n)?;
    let h = nodes[0].1;
    if nodes.iter().all(|&(s, _)| window(s) == 0.0) && window(0.0) == 0.0 {
        return Err(Error::InvalidArgument(
            "Gabor window is identically zero".into(),
        ));
    }
    let b_len = region
        .intervals()
        .get(1)
        .map(|(lo, hi)| hi - lo)
        .ok_or(Error::InvalidArgument(
            "Gabor region needs an (a, b) box".into(),
        ))?;
    // √h from the time quadrature times (L_b·h)^{-1/2} from the period count.
    let amp = libm::sqrt(1.0 / b_len);
    let continuous_d = gabor_window_norm_sq(&window) / (b_len * h);
    let eval: Arc<EvalFn> = Arc::new(move |t: &[f64]| {
        let (a, b) = (t[0], t[1]);
        CVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(s, _)| {
                let phase = -2.0 * PI * b * s;
                Complex64::new(libm::cos(phase), libm::sin(phase)) * (amp * window(s - a))
            }),
        )
    });
    // The time grid can over-resolve a shifted window slightly, so D is the
    // larger of the continuous value and the grid scan.
    let mut model = FrameModel::new("gabor", space, region, n, eval, None)?;
    model.declared_d = model.declared_d.max(continuous_d);
    Ok(model)
}

/// `‖g‖²` by a fine midpoint rule on `[-40, 40]`.
pub fn gabor_window_norm_sq(window: &Window) -> f64 {
    let n = 160_000;
    let h = 80.0 / n as f64;
    (0..n)
        .map(|k| {
            let x = -40.0 + (k as f64 + 0.5) * h;
            let g = window(x);
            g * g * h
        })
        .sum()
}

/// Fourier restriction to `L²(S)` for an interval `S`:
/// `Ψ(λ)[k] = √w_k e^{2πiλ s_k}` on an `n`-point midpoint rule of `S`.
/// `D = |S|` exactly.
pub fn exponential_frame(
    space: SpaceModel,
    s: (f64, f64),
    n: usize,
    region: Region,
) -> Result<FrameModel> {
    check_space(&space, 1, false)?;
    let nodes = midpoint_nodes(s, n)?;
    let measure = s.1 - s.0;
    let eval: Arc<EvalFn> = Arc::new(move |t: &[f64]| {
        let lambda = t[0];
        CVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(sk, wk)| {
                let phase = 2.0 * PI * lambda * sk;
                Complex64::new(libm::cos(phase), libm::sin(phase)) * libm::sqrt(wk)
            }),
        )
    });
    FrameModel::new("exponential", space, region, n, eval, Some(measure))
}

/// Reproducing kernel of the Paley–Wiener space with band `[-A, A]`
/// (angular): `K(x, y) = sin(A(x−y)) / (π(x−y))`, `K(x, x) = A/π`.
pub fn sinc_kernel(bandwidth: f64, x: f64, y: f64) -> f64 {
    let u = x - y;
    if u.abs() < 1e-8 {
        bandwidth / PI
    } else {
        libm::sin(bandwidth * u) / (PI * u)
    }
}

/// Kernel frame `Ψ(x) = K(x, ·)` of the Paley–Wiener space, sampled as
/// `Ψ(x)[k] = √w_k K(x, s_k)` on a midpoint rule of `interval`.
pub fn sinc_kernel_frame(
    space: SpaceModel,
    bandwidth: f64,
    interval: (f64, f64),
    n: usize,
    region: Region,
) -> Result<FrameModel> {
    check_space(&space, 1, false)?;
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument(
            "sinc bandwidth must be positive".into(),
        ));
    }
    let nodes = midpoint_nodes(interval, n)?;
    let eval: Arc<EvalFn> = Arc::new(move |t: &[f64]| {
        CVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(sk, wk)| {
                Complex64::new(libm::sqrt(wk) * sinc_kernel(bandwidth, t[0], sk), 0.0)
            }),
        )
    });
    FrameModel::new("sinc", space, region, n, eval, None)
}

type HatFn = dyn Fn(f64) -> f64 + Send + Sync;
type TimeFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A wavelet given by its Fourier profile `ψ̂` (convention
/// `ψ̂(ξ) = ∫ψ(x)e^{-2πixξ}dx`), the bounds `lo ≤ |ξ| ≤ hi` of its support
/// (`lo` may be 0 and `hi` infinite), and optionally its time-domain form.
#[derive(Clone)]
pub struct WaveletSpec {
    pub name: String,
    hat: Arc<HatFn>,
    time: Option<Arc<TimeFn>>,
    support: (f64, f64),
}

impl fmt::Debug for WaveletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveletSpec")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("has_time_form", &self.time.is_some())
            .finish()
    }
}

impl WaveletSpec {
    pub fn new(
        name: impl Into<String>,
        hat: Arc<HatFn>,
        time: Option<Arc<TimeFn>>,
        support: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo >= 0.0) || !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "bad profile support {support:?}"
            )));
        }
        Ok(Self {
            name: name.into(),
            hat,
            time,
            support,
        })
    }

    /// `ψ̂ = 1` on `lo ≤ |ξ| ≤ hi`; `ψ(x) = (sin 2π·hi·x − sin 2π·lo·x)/(πx)`.
    pub fn band(lo: f64, hi: f64) -> Result<Self> {
        let hat: Arc<HatFn> = Arc::new(move |xi: f64| {
            if xi.abs() >= lo && xi.abs() <= hi {
                1.0
            } else {
                0.0
            }
        });
        let time: Arc<TimeFn> = Arc::new(move |x: f64| {
            let v = if x.abs() < 1e-12 {
                2.0 * (hi - lo)
            } else {
                (libm::sin(2.0 * PI * hi * x) - libm::sin(2.0 * PI * lo * x)) / (PI * x)
            };
            Complex64::new(v, 0.0)
        });
        Self::new(format!("band[{lo},{hi}]"), hat, Some(time), (lo, hi))
    }

    /// `ψ̂(ξ) = ξ e^{-ξ²}` (odd); `ψ(x) = iπ^{3/2} x e^{-π²x²}`.
    pub fn odd_gaussian() -> Self {
        let hat: Arc<HatFn> = Arc::new(|xi: f64| xi * libm::exp(-xi * xi));
        let c = libm::pow(PI, 1.5);
        let time: Arc<TimeFn> =
            Arc::new(move |x: f64| Complex64::new(0.0, c * x * libm::exp(-PI * PI * x * x)));
        Self {
            name: "odd-gaussian".into(),
            hat,
            time: Some(time),
            support: (0.0, f64::INFINITY),
        }
    }

    /// `ψ̂_λ(ξ) = ψ̂(λξ)`, i.e. `ψ_λ(x) = λ⁻¹ψ(x/λ)`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        let hat = self.hat.clone();
        let time = self
            .time
            .clone()
            .map(|t| -> Arc<TimeFn> { Arc::new(move |x: f64| t(x / lambda) / lambda) });
        Self::new(
            format!("{}@{lambda}", self.name),
            Arc::new(move |xi: f64| hat(lambda * xi)),
            time,
            (self.support.0 / lambda, self.support.1 / lambda),
        )
    }

    pub fn hat(&self, xi: f64) -> f64 {
        (self.hat)(xi)
    }

    pub fn time(&self, x: f64) -> Option<Complex64> {
        self.time.as_ref().map(|t| t(x))
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// The two half-line integrals of the admissibility condition
/// `∫_0^∞ |ψ̂(ξ)|²/ξ dξ = ∫_0^∞ |ψ̂(−ξ)|²/ξ dξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Calderon {
    pub positive: f64,
    pub negative: f64,
    /// Common value (mean of the two sides).
    pub value: f64,
    /// `|positive − negative| / max(positive, negative)`; 0 when both vanish.
    pub defect: f64,
}

/// Relative tolerance on the two sides of the admissibility condition.
pub const CALDERON_TOL: f64 = 1e-6;

impl Calderon {
    /// Both sides equal within tolerance.
    pub fn is_balanced(&self) -> bool {
        self.defect <= CALDERON_TOL
    }

    /// Balanced and nonzero: the profile generates a continuous tight frame.
    pub fn is_frame_generator(&self) -> bool {
        self.is_balanced() && self.value > 0.0
    }

    pub fn require_admissible(&self) -> Result<f64> {
        if !self.is_balanced() {
            return Err(Error::Hypothesis(format!(
                "inadmissible wavelet: half-line integrals {} and {} differ",
                self.positive, self.negative
            )));
        }
        if self.value <= 0.0 {
            return Err(Error::Hypothesis(
                "zero wavelet is not a frame generator".into(),
            ));
        }
        Ok(self.value)
    }
}

const LOG_LO: f64 = -40.0;
const LOG_HI: f64 = 8.0;
const LOG_PANELS: usize = 40_000;

/// Evaluates both half-line integrals in the variable `u = ln ξ`, where the
/// integrand becomes `|ψ̂(±e^u)|²`. Fails when the integrand has not decayed
/// at a truncated end (divergent integral).
pub fn calderon_constant(spec: &WaveletSpec) -> Result<Calderon> {
    let (lo, hi) = spec.support;
    let u0 = if lo > 0.0 { libm::log(lo) } else { LOG_LO };
    let u1 = if hi.is_finite() {
        libm::log(hi)
    } else {
        LOG_HI
    };
    let side = |sign: f64| -> Result<f64> {
        let f = |u: f64| {
            let v = spec.hat(sign * libm::exp(u));
            v * v
        };
        let total = simpson(&f, u0, u1, LOG_PANELS);
        let ends = [(lo == 0.0, u0), (!hi.is_finite(), u1)];
        for (open, u) in ends {
            if open && f(u) > 1e-12 * total.max(1e-300) {
                return Err(Error::NoConvergence);
            }
        }
        Ok(total)
    };
    let positive = side(1.0)?;
    let negative = side(-1.0)?;
    let scale = positive.max(negative);
    let defect = if scale > 0.0 {
        (positive - negative).abs() / scale
    } else {
        0.0
    };
    Ok(Calderon {
        positive,
        negative,
        value: 0.5 * (positive + negative),
        defect,
    })
}

/// Composite Simpson rule with `panels` (even) subintervals.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels + panels % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Wavelet system `Ψ(b, a)(x) = a^{-1/2} ψ((x − b)/a)` over the hyperbolic
/// half-plane with measure `a⁻² db da`, sampled on the midpoint grid of
/// `time`. Its frame operator approximates `C_ψ·I` on the frequencies the
/// window resolves, `C_ψ` being the Calderón constant.
pub fn wavelet_frame(
    space: SpaceModel,
    spec: &WaveletSpec,
    n: usize,
    time: (f64, f64),
    region: Region,
) -> Result<FrameModel> {
    check_space(&space, 2, true)?;
    calderon_constant(spec)?.require_admissible()?;
    let psi = spec.time.clone().ok_or(Error::InvalidArgument(
        "wavelet needs a time-domain form".into(),
    ))?;
    let nodes = midpoint_nodes(time, n)?;
    let eval: Arc<EvalFn> = Arc::new(move |t: &[f64]| {
        let (b, a) = (t[0], t[1]);
        let amp = libm::sqrt(nodes[0].1 / a);
        CVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(s, _)| psi((s - b) / a) * amp),
        )
    });
    FrameModel::new(
        format!("wavelet:{}", spec.name),
        space,
        region,
        n,
        eval,
        None,
    )
}
