use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, ComplexMatrix, TensorShape, ZERO};
use crate::quantum::DensityMatrix;

/// Tolerance on `Σ K†K = I` and on the Choi input marginal.
pub const TP_TOL: f64 = 1e-9;
/// Eigenvalues of `d_in·J` below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-11;

/// How a channel was specified. The Choi matrix is always the canonical form.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Kraus(Vec<ComplexMatrix>),
    Choi,
    Isometry(ComplexMatrix),
}

/// A completely positive trace-preserving map `D(C^{in_dim}) → D(out_shape)`.
///
/// The canonical data is the normalized Choi state `J = (id ⊗ Λ)(Φ)` with the
/// reference (input copy) as the first factor and the output factors after it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    in_dim: usize,
    out_shape: TensorShape,
    choi: ComplexMatrix,
    origin: Representation,
}

impl QuantumChannel {
    /// Channel from Kraus operators `K_m : C^{in} → C^{out}`.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>, out_shape: TensorShape) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if d_out != out_shape.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: out_shape.total_dim(),
                found: d_out,
            });
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for (m, k) in kraus.iter().enumerate() {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::InvalidChannel(format!("Kraus operator {m} has the wrong shape")));
            }
            sum += &k.adjoint().matmul(k);
        }
        let gap = (&sum - &ComplexMatrix::identity(d_in)).max_abs();
        if gap > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (gap {gap:e})"
            )));
        }
        let mut choi = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
        for k in &kraus {
            // (I ⊗ K)|Ω⟩ has entry K[o, i] at (i, o)
            let v: Vec<Complex64> = (0..d_in * d_out).map(|idx| k[(idx % d_out, idx / d_out)]).collect();
            for (r, vr) in v.iter().enumerate() {
                if *vr == ZERO {
                    continue;
                }
                for (c, vc) in v.iter().enumerate() {
                    choi[(r, c)] += vr * vc.conj();
                }
            }
        }
        let choi = choi.scale(1.0 / d_in as f64);
        Ok(Self {
            in_dim: d_in,
            out_shape,
            choi,
            origin: Representation::Kraus(kraus),
        })
    }

    /// Channel `X ↦ V X V†` for an isometry `V` (`out × in`, `V†V = I`).
    pub fn from_isometry(v: ComplexMatrix, out_shape: TensorShape) -> Result<Self> {
        let (d_out, d_in) = (v.rows(), v.cols());
        if d_out != out_shape.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: out_shape.total_dim(),
                found: d_out,
            });
        }
        let gap = (&v.adjoint().matmul(&v) - &ComplexMatrix::identity(d_in)).max_abs();
        if gap > 1e-10 {
            return Err(Error::InvalidChannel(format!("V†V differs from I by {gap:e}")));
        }
        Ok(Self::from_isometry_trusted(v, out_shape))
    }

    pub(crate) fn from_isometry_trusted(v: ComplexMatrix, out_shape: TensorShape) -> Self {
        let (d_out, d_in) = (v.rows(), v.cols());
        let n = d_in * d_out;
        let mut choi = ComplexMatrix::zeros(n, n);
        let s = 1.0 / d_in as f64;
        for i in 0..d_in {
            for j in 0..d_in {
                for o in 0..d_out {
                    let a = v[(o, i)] * s;
                    if a == ZERO {
                        continue;
                    }
                    for o2 in 0..d_out {
                        choi[(i * d_out + o, j * d_out + o2)] = a * v[(o2, j)].conj();
                    }
                }
            }
        }
        Self {
            in_dim: d_in,
            out_shape,
            choi,
            origin: Representation::Isometry(v),
        }
    }

    /// Channel from a normalized Choi state `J = (id ⊗ Λ)(Φ)` on `in ⊗ out`.
    pub fn from_choi(choi: ComplexMatrix, in_dim: usize, out_shape: TensorShape) -> Result<Self> {
        let n = choi.ensure_square()?;
        if in_dim == 0 || n != in_dim * out_shape.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: in_dim * out_shape.total_dim(),
                found: n,
            });
        }
        let scale = choi.max_abs().max(1.0);
        let dev = choi.hermitian_deviation();
        if dev > 1e-10 * scale {
            return Err(Error::NotHermitian {
                deviation: dev,
                bound: 1e-10 * scale,
            });
        }
        let choi = choi.hermitian_part();
        let min = eig_hermitian(&choi)?.values[0];
        if min < -1e-10 {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not positive (eigenvalue {min:e})"
            )));
        }
        let shape = TensorShape::new(vec![in_dim, out_shape.total_dim()])?;
        let marginal = partial_trace(&choi, &shape, &[0])?;
        let target = ComplexMatrix::identity(in_dim).scale(1.0 / in_dim as f64);
        let gap = (&marginal - &target).max_abs();
        if gap > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "Choi input marginal differs from I/d_in by {gap:e}"
            )));
        }
        Ok(Self::from_choi_trusted(choi, in_dim, out_shape))
    }

    pub(crate) fn from_choi_trusted(choi: ComplexMatrix, in_dim: usize, out_shape: TensorShape) -> Self {
        debug_assert_eq!(choi.rows(), in_dim * out_shape.total_dim());
        Self {
            in_dim,
            out_shape,
            choi,
            origin: Representation::Choi,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_isometry_trusted(ComplexMatrix::identity(d), TensorShape::flat(d))
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.ensure_square()?;
        Self::from_isometry(u, TensorShape::flat(d))
    }

    /// The constant channel `X ↦ tr(X) σ`.
    pub fn replacement(in_dim: usize, sigma: &DensityMatrix) -> Self {
        let choi = crate::linalg::kron(&ComplexMatrix::identity(in_dim).scale(1.0 / in_dim as f64), sigma.mat());
        Self::from_choi_trusted(choi, in_dim, sigma.shape().clone())
    }

    /// Completely dephasing channel in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let mut choi = ComplexMatrix::zeros(d * d, d * d);
        for k in 0..d {
            choi[(k * d + k, k * d + k)] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self::from_choi_trusted(choi, d, TensorShape::flat(d))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_shape.total_dim()
    }

    pub fn out_shape(&self) -> &TensorShape {
        &self.out_shape
    }

    pub fn representation(&self) -> &Representation {
        &self.origin
    }

    /// Normalized Choi matrix (trace one).
    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// Shape of the Choi state: the input copy followed by the output factors.
    pub fn choi_shape(&self) -> TensorShape {
        TensorShape::flat(self.in_dim).join(&self.out_shape)
    }

    /// The Choi state `J(Λ) = (id ⊗ Λ)(Φ)`.
    pub fn choi_state(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.choi.clone(), self.choi_shape())
    }

    /// `Λ(|b⟩⟨b'|) = d_in · J_{b b'}` (block of the Choi matrix).
    pub fn image_of_unit(&self, b: usize, b2: usize) -> ComplexMatrix {
        let d = self.out_dim();
        self.choi
            .block(b * d, (b + 1) * d, b2 * d, (b2 + 1) * d)
            .scale(self.in_dim as f64)
    }

    /// Apply to an arbitrary operator on the input space.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.in_dim || x.cols() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: x.rows(),
            });
        }
        let d = self.out_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        let s = self.in_dim as f64;
        for b in 0..self.in_dim {
            for b2 in 0..self.in_dim {
                let c = x[(b, b2)] * s;
                if c == ZERO {
                    continue;
                }
                for o in 0..d {
                    let row = self.choi.row(b * d + o);
                    for o2 in 0..d {
                        out[(o, o2)] += c * row[b2 * d + o2];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.mat())?;
        Ok(DensityMatrix::from_trusted(out, self.out_shape.clone()))
    }

    /// `(id_R ⊗ Λ)(X)` for `X` on `R ⊗ in` with `R` of dimension `d_ref`.
    pub fn apply_on_second(&self, x: &ComplexMatrix, d_ref: usize) -> Result<ComplexMatrix> {
        let n_in = d_ref * self.in_dim;
        if x.rows() != n_in || x.cols() != n_in {
            return Err(Error::DimensionMismatch {
                expected: n_in,
                found: x.rows(),
            });
        }
        let (di, d) = (self.in_dim, self.out_dim());
        let s = di as f64;
        let mut out = ComplexMatrix::zeros(d_ref * d, d_ref * d);
        for r in 0..d_ref {
            for r2 in 0..d_ref {
                for b in 0..di {
                    for b2 in 0..di {
                        let c = x[(r * di + b, r2 * di + b2)] * s;
                        if c == ZERO {
                            continue;
                        }
                        for o in 0..d {
                            let row = self.choi.row(b * d + o);
                            for o2 in 0..d {
                                out[(r * d + o, r2 * d + o2)] += c * row[b2 * d + o2];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(id_R ⊗ Λ)(ρ)` as a state on `R ⊗ out`.
    pub fn apply_to_second(&self, rho: &DensityMatrix, d_ref: usize) -> Result<DensityMatrix> {
        let out = self.apply_on_second(rho.mat(), d_ref)?;
        let shape = TensorShape::flat(d_ref).join(&self.out_shape);
        Ok(DensityMatrix::from_trusted(out, shape))
    }

    /// Kraus operators: the original ones when given, otherwise extracted from
    /// the Choi matrix (eigenvalues of `d_in·J` below `KRAUS_CUTOFF` dropped).
    pub fn kraus(&self) -> Vec<ComplexMatrix> {
        match &self.origin {
            Representation::Kraus(k) => k.clone(),
            Representation::Isometry(v) => vec![v.clone()],
            Representation::Choi => self.kraus_from_choi(),
        }
    }

    /// Kraus operators always recomputed from the Choi matrix.
    pub fn kraus_from_choi(&self) -> Vec<ComplexMatrix> {
        let (di, d) = (self.in_dim, self.out_dim());
        let eig = crate::linalg::eig_hermitian_unchecked(&self.choi.scale(di as f64));
        let mut out = Vec::new();
        for (m, &lambda) in eig.values.iter().enumerate().rev() {
            if lambda < KRAUS_CUTOFF {
                continue;
            }
            let s = lambda.sqrt();
            out.push(ComplexMatrix::from_fn(d, di, |o, i| eig.vectors[(i * d + o, m)] * s));
        }
        out
    }

    /// The effective channel onto the kept output factors, `tr_{rest} ∘ Λ`.
    pub fn fragment(&self, keep: &[usize]) -> Result<QuantumChannel> {
        if keep.is_empty() {
            return Err(Error::Shape("fragment keep set must be non-empty".into()));
        }
        let out_shape = self.out_shape.restrict(keep)?;
        let choi_keep: Vec<usize> = std::iter::once(0).chain(keep.iter().map(|k| k + 1)).collect();
        let choi = partial_trace(&self.choi, &self.choi_shape(), &choi_keep)?;
        Ok(Self::from_choi_trusted(choi, self.in_dim, out_shape))
    }

    /// Same channel with the output space refactorized.
    pub fn with_out_shape(&self, out_shape: TensorShape) -> Result<QuantumChannel> {
        if out_shape.total_dim() != self.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim(),
                found: out_shape.total_dim(),
            });
        }
        Ok(Self {
            out_shape,
            ..self.clone()
        })
    }

    /// Largest deviation of `tr_out J` from `I/d_in`.
    pub fn trace_preservation_gap(&self) -> f64 {
        let shape = TensorShape::new(vec![self.in_dim, self.out_dim()]).expect("positive dims");
        let m = partial_trace(&self.choi, &shape, &[0]).expect("consistent shape");
        (&m - &ComplexMatrix::identity(self.in_dim).scale(1.0 / self.in_dim as f64)).max_abs()
    }
}

/// Effective fragment channel `tr_{\keep} ∘ Λ`.
pub fn effective_fragment_channel(ch: &QuantumChannel, keep: &[usize]) -> Result<QuantumChannel> {
    ch.fragment(keep)
}

/// Choi state of a channel.
pub fn choi_of(ch: &QuantumChannel) -> DensityMatrix {
    ch.choi_state()
}
