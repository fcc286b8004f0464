//! Mixed-radix codes for labelings of a finite ordered coordinate list.
//! The first coordinate is the most significant digit.

pub(crate) fn decode_into(mut code: u64, base: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = (code % base as u64) as usize;
        code /= base as u64;
    }
}

pub(crate) fn encode(digits: impl IntoIterator<Item = usize>, base: usize) -> u64 {
    digits
        .into_iter()
        .fold(0u64, |acc, d| acc * base as u64 + d as u64)
}

/// Sums `table` (over `len` coordinates) onto the coordinates at `positions`.
pub(crate) fn marginalize(table: &[f64], base: usize, len: usize, positions: &[usize]) -> Vec<f64> {
    let out_len = (base as u64).pow(positions.len() as u32) as usize;
    let mut out = vec![0.0; out_len];
    let mut digits = vec![0usize; len];
    for (code, &p) in table.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        decode_into(code as u64, base, &mut digits);
        let target = encode(positions.iter().map(|&i| digits[i]), base);
        out[target as usize] += p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_marginal() {
        let mut d = [0; 3];
        decode_into(encode([1, 0, 2], 3), 3, &mut d);
        assert_eq!(d, [1, 0, 2]);
        // uniform on 2 binary coordinates, marginal onto the second
        let m = marginalize(&[0.1, 0.2, 0.3, 0.4], 2, 2, &[1]);
        assert!((m[0] - 0.4).abs() < 1e-15 && (m[1] - 0.6).abs() < 1e-15);
    }
}
