use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt_pd, ComplexMatrix, TensorShape};

use super::povm::Povm;
use super::state::DensityMatrix;

/// Deterministic, splittable random source (ChaCha8).
///
/// Equal seeds and equal call sequences give identical draws on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child generator; advances this generator by one draw.
    pub fn split(&mut self) -> SeededRng {
        let child_seed = self.rng.next_u64();
        SeededRng::new(child_seed)
    }

    /// Child generator determined by `(seed, index)` alone, without touching
    /// this generator's state.
    pub fn fork(&self, index: u64) -> SeededRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        let child_seed = rng.next_u64();
        SeededRng::new(child_seed)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex Gaussian with unit variance per real component.
    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniformly random `k`-subset of `0..n`, sorted.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx = rand::seq::index::sample(&mut self.rng, n, k.min(n)).into_vec();
        idx.sort_unstable();
        idx
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Orthonormalize the columns of a tall matrix by twice-applied modified
/// Gram–Schmidt. Keeping `R` with a positive diagonal makes the result Haar
/// distributed when the input is Ginibre.
fn orthonormalize_columns(mut m: ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    dot += m[(i, k)].conj() * m[(i, j)];
                }
                for i in 0..rows {
                    let v = m[(i, k)];
                    m[(i, j)] -= dot * v;
                }
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
    m
}

/// Haar-random `d × d` unitary.
pub fn haar_unitary(d: usize, rng: &mut SeededRng) -> ComplexMatrix {
    orthonormalize_columns(rng.ginibre(d, d))
}

/// Haar-random isometry `V : C^{d_in} → C^{d_out}` (a `d_out × d_in` matrix with `V†V = I`).
pub fn haar_isometry(d_in: usize, d_out: usize, rng: &mut SeededRng) -> Result<ComplexMatrix> {
    if d_in == 0 || d_out < d_in {
        return Err(Error::Domain(format!(
            "isometry needs 1 <= d_in <= d_out, got d_in = {d_in}, d_out = {d_out}"
        )));
    }
    Ok(orthonormalize_columns(rng.ginibre(d_out, d_in)))
}

/// Haar-random pure state vector of dimension `d`.
pub fn random_pure_vector(d: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    haar_isometry(1, d.max(1), rng).expect("1 <= d").col(0)
}

/// Random state of the given rank: the marginal of a Haar-random pure state on
/// `dim ⊗ rank`.
pub fn random_density(shape: TensorShape, rank: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let n = shape.total_dim();
    if rank == 0 || rank > n {
        return Err(Error::Domain(format!("rank {rank} outside 1..={n}")));
    }
    let g = rng.ginibre(n, rank);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    Ok(DensityMatrix::from_trusted(w.scale(1.0 / tr), shape))
}

/// Random full-rank state on a single factor.
pub fn random_state(d: usize, rng: &mut SeededRng) -> DensityMatrix {
    random_density(TensorShape::flat(d), d, rng).expect("rank equals dimension")
}

/// Random POVM: random positive matrices `G_k` normalized as `S^{-1/2} G_k S^{-1/2}` with `S = Σ G_k`.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut SeededRng) -> Result<Povm> {
    if outcomes == 0 || d == 0 {
        return Err(Error::Domain("a POVM needs at least one outcome and dimension".into()));
    }
    if outcomes == 1 {
        return Ok(Povm::trivial(d));
    }
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = rng.ginibre(d, d);
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(d, d);
    for r in &raw {
        sum += r;
    }
    let s = inv_sqrt_pd(&sum, 1e-300)?;
    Ok(Povm::from_trusted(raw.iter().map(|r| s.matmul(r).matmul(&s)).collect()))
}
