//! `KSTD1` model files.
//!
//! A plain-text header of `key=value` lines (format tag first, then the
//! kernel block, hyperparameters, `n`, `d` and `jitter_used`) terminated by
//! a blank line, followed by little-endian `f64` arrays in this order:
//! `X_train` (row-major), `row_sums`, `K_diag`, `total_sum`, and the lower
//! triangle of the Cholesky factor packed row by row.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::density::{FittedKstModel, Hyperparams};
use crate::error::{KstError, Result};
use crate::io::write_atomic;
use crate::kernels::KernelSpec;

pub const FORMAT_TAG: &str = "KSTD1";

pub fn to_bytes(model: &FittedKstModel) -> Result<Vec<u8>> {
    let mut out = format!("format={FORMAT_TAG}\n").into_bytes();
    for (k, v) in model.describe()? {
        out.extend_from_slice(format!("{k}={v}\n").as_bytes());
    }
    out.push(b'\n');
    let mut push = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    model.x_train().iter().for_each(|&v| push(v));
    model.row_sums().iter().for_each(|&v| push(v));
    model.k_diag().iter().for_each(|&v| push(v));
    push(model.total_sum());
    let l = model.chol_factor();
    for i in 0..l.nrows() {
        for j in 0..=i {
            push(l[(i, j)]);
        }
    }
    Ok(out)
}

fn header_end(bytes: &[u8]) -> Option<usize> {
    bytes.windows(2).position(|w| w == b"\n\n").map(|p| p + 2)
}

pub fn from_bytes(bytes: &[u8]) -> Result<FittedKstModel> {
    let end = header_end(bytes).ok_or_else(|| KstError::input("model file has no header terminator"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| KstError::input("model header is not UTF-8"))?;
    let mut kv = BTreeMap::new();
    for line in header.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| KstError::input(format!("bad header line '{line}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    if kv.get("format").map(String::as_str) != Some(FORMAT_TAG) {
        return Err(KstError::input(format!("not a {FORMAT_TAG} model file")));
    }
    let num = |k: &str| -> Result<f64> {
        kv.get(k)
            .ok_or_else(|| KstError::input(format!("missing key '{k}'")))?
            .parse()
            .map_err(|_| KstError::input(format!("bad value for '{k}'")))
    };
    let int = |k: &str| -> Result<usize> {
        kv.get(k)
            .ok_or_else(|| KstError::input(format!("missing key '{k}'")))?
            .parse()
            .map_err(|_| KstError::input(format!("bad value for '{k}'")))
    };
    let kernel = KernelSpec::from_kv(&kv)?;
    let hyper = Hyperparams::new(num("sigma0_sq")?, num("alpha")?, num("beta")?)?;
    let (n, d) = (int("n")?, int("d")?);
    let jitter = num("jitter_used")?;

    let body = &bytes[end..];
    let expected = n * d + 2 * n + 1 + n * (n + 1) / 2;
    if body.len() != expected * 8 {
        return Err(KstError::input(format!(
            "model body has {} bytes, expected {} for n = {n}, d = {d}",
            body.len(),
            expected * 8
        )));
    }
    let mut vals = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut take = |k: usize| -> Vec<f64> { vals.by_ref().take(k).collect() };
    let x = Array2::from_shape_vec((n, d), take(n * d)).map_err(|e| KstError::input(e.to_string()))?;
    let row_sums = take(n);
    let k_diag = take(n);
    let total_sum = take(1)[0];
    let packed = take(n * (n + 1) / 2);
    let mut chol = DMatrix::zeros(n, n);
    let mut it = packed.into_iter();
    for i in 0..n {
        for j in 0..=i {
            chol[(i, j)] = it.next().expect("sized above");
        }
    }
    FittedKstModel::from_parts(kernel, hyper, x, row_sums, k_diag, total_sum, chol, jitter)
}

pub fn save_model(model: &FittedKstModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &to_bytes(model)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FittedKstModel> {
    from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::fit;
    use crate::kernels::FeatureMap;
    use ndarray::array;

    #[test]
    fn header_is_plain_text() {
        let k = KernelSpec::squared_exponential(vec![0.5, 2.0]).unwrap();
        let m = fit(k, Hyperparams::new(1.0, 3.0, 0.01).unwrap(), array![[0.0, 1.0], [2.0, 3.0]].view()).unwrap();
        let bytes = to_bytes(&m).unwrap();
        let end = header_end(&bytes).unwrap();
        let header = std::str::from_utf8(&bytes[..end]).unwrap();
        assert!(header.starts_with("format=KSTD1\n"));
        assert!(header.contains("kernel.length_scales=0.5,2.0\n"));
        assert!(header.contains("beta=0.01\n"));
        assert_eq!(bytes.len() - end, 8 * (4 + 2 + 2 + 1 + 3));
    }

    #[test]
    fn empty_model_round_trip() {
        let k = KernelSpec::explicit(FeatureMap::Linear, vec![1.0]).unwrap();
        let m = fit(k, Hyperparams::new(1.0, 3.0, 1.0).unwrap(), Array2::zeros((0, 1)).view()).unwrap();
        let back = from_bytes(&to_bytes(&m).unwrap()).unwrap();
        assert_eq!(back.score(&[0.3]).unwrap(), m.score(&[0.3]).unwrap());
    }

    #[test]
    fn truncated_body_rejected() {
        let k = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let m = fit(k, Hyperparams::new(1.0, 1.0, 1.0).unwrap(), array![[0.0], [1.0]].view()).unwrap();
        let mut bytes = to_bytes(&m).unwrap();
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(from_bytes(&bytes), Err(KstError::Input(_))));
        assert!(from_bytes(b"format=OTHER\n\n").is_err());
    }
}
