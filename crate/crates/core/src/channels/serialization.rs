use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, TensorShape};

use super::channel::QuantumChannel;

#[derive(Debug, Serialize, Deserialize)]
struct ChoiParts {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// On-disk channel format: `{in_dim, out_dims, choi: {re, im}}` with the
/// normalized Choi matrix stored row by row.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelFile {
    in_dim: usize,
    out_dims: Vec<usize>,
    choi: ChoiParts,
}

pub fn channel_to_json(ch: &QuantumChannel) -> String {
    let m = ch.choi();
    let n = m.rows();
    let file = ChannelFile {
        in_dim: ch.in_dim(),
        out_dims: ch.out_shape().dims().to_vec(),
        choi: ChoiParts {
            re: (0..n).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect(),
            im: (0..n).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect(),
        },
    };
    serde_json::to_string(&file).expect("plain data serializes")
}

/// Parse and validate a channel file.
pub fn channel_from_json(text: &str) -> Result<QuantumChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    let shape = TensorShape::new(file.out_dims)?;
    let n = file.in_dim * shape.total_dim();
    let ChoiParts { re, im } = file.choi;
    if re.len() != n || im.len() != n || re.iter().chain(&im).any(|r| r.len() != n) {
        return Err(Error::Serialization(format!("choi arrays must be {n}x{n}")));
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(re[i][j], im[i][j]));
    QuantumChannel::from_choi(m.clone(), file.in_dim, shape.clone())?;
    // validation symmetrizes; keep the stored entries as written
    Ok(QuantumChannel::from_choi_trusted(m, file.in_dim, shape))
}
