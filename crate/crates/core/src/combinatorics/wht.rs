use crate::error::{param, Result};

/// In-place unnormalized Walsh–Hadamard transform,
/// `w(s) = Σ_x (-1)^{s·x} v(x)`.
///
/// Applying it twice multiplies by `2^n`; callers own the normalization.
pub fn wht_in_place(data: &mut [f64]) -> Result<()> {
    let len = data.len();
    if !len.is_power_of_two() {
        return Err(param(format!("WHT length {len} is not a power of two")));
    }
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn wht(values: &[f64]) -> Result<Vec<f64>> {
    let mut out = values.to_vec();
    wht_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Quadratic-time oracle straight from the definition.
    fn wht_direct(v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|s| {
                v.iter()
                    .enumerate()
                    .map(|(x, &vx)| if (s & x).count_ones() % 2 == 0 { vx } else { -vx })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn delta_maps_to_all_ones() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        assert_eq!(wht(&v).unwrap(), vec![1.0; 8]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(wht(&[1.0, 2.0, 3.0]).is_err());
        assert!(wht(&[]).is_err());
        assert_eq!(wht(&[2.5]).unwrap(), vec![2.5]);
    }

    #[test]
    fn involution_up_to_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let back = wht(&wht(&v).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - 64.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_sum_n8() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = wht(&v).unwrap();
        for (a, b) in fast.iter().zip(wht_direct(&v)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn parseval(n in 0u32..=12, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = wht(&v).unwrap();
            let lhs: f64 = w.iter().map(|x| x * x).sum();
            let rhs: f64 = (1u64 << n) as f64 * v.iter().map(|x| x * x).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300));
        }
    }
}
