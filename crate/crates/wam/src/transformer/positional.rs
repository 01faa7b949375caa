use crate::error::{Result, WamError};

/// Sinusoidal encodings, row-major `[len, d_model]`:
/// `PE[p, 2i] = sin(p / 10000^(2i/d))`, `PE[p, 2i+1] = cos(p / 10000^(2i/d))`.
pub fn positional_encoding(len: usize, d_model: usize, max_position: usize) -> Result<Vec<f64>> {
    if len > max_position {
        return Err(WamError::InvalidArgument(format!(
            "sequence length {len} exceeds max_position {max_position}"
        )));
    }
    let mut pe = vec![0.0; len * d_model];
    for pos in 0..len {
        for i in (0..d_model).step_by(2) {
            let angle = pos as f64 / 10000f64.powf(i as f64 / d_model as f64);
            pe[pos * d_model + i] = angle.sin();
            if i + 1 < d_model {
                pe[pos * d_model + i + 1] = angle.cos();
            }
        }
    }
    Ok(pe)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_zero_alternates() {
        let pe = positional_encoding(1, 6, 10).unwrap();
        assert_eq!(pe, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn row_one_for_d4() {
        let pe = positional_encoding(4, 4, 10).unwrap();
        let expect = [1f64.sin(), 1f64.cos(), 0.01f64.sin(), 0.01f64.cos()];
        for (a, b) in pe[4..8].iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(pe.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn too_long_rejected() {
        assert!(positional_encoding(11, 4, 10).is_err());
    }
}
