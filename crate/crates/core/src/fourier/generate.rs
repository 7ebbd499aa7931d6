use rand::Rng;

use super::BooleanFn;
use crate::error::Result;

/// Independent uniform values in `[0, 1]`, occasionally rounded to `{0, 1}`.
pub fn random_function<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BooleanFn> {
    let boolean = rng.random_bool(0.3);
    let table = (0..1usize << n)
        .map(|_| {
            let u: f64 = rng.random();
            if boolean { u.round() } else { u }
        })
        .collect();
    BooleanFn::new(n, p, table)
}

/// A random monotone function drawn from one of three families: the
/// monotone envelope of sparse random values, a smoothed weighted threshold,
/// or the indicator of a random monotone DNF.
pub fn random_monotone<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BooleanFn> {
    if n == 0 {
        return BooleanFn::constant(0, p, rng.random());
    }
    let size = 1usize << n;
    let table: Vec<f64> = match rng.random_range(0..3) {
        0 => {
            let density = rng.random_range(0.05..0.5);
            let mut t: Vec<f64> = (0..size)
                .map(|_| if rng.random_bool(density) { rng.random() } else { 0.0 })
                .collect();
            t[0] = 0.0;
            // Upward closure by coordinate-wise maximum.
            for i in 0..n {
                let bit = 1 << i;
                for x in 0..size {
                    if x & bit != 0 {
                        t[x] = t[x].max(t[x ^ bit]);
                    }
                }
            }
            t
        }
        1 => {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let theta = rng.random_range(0.2..0.8) * total;
            let width = rng.random_range(0.0..0.3) * total;
            (0..size)
                .map(|x| {
                    let s: f64 = (0..n).filter(|i| x >> i & 1 == 1).map(|i| w[i]).sum();
                    if width == 0.0 {
                        f64::from(s >= theta)
                    } else {
                        ((s - theta) / width + 0.5).clamp(0.0, 1.0)
                    }
                })
                .collect()
        }
        _ => {
            let terms: Vec<usize> = (0..rng.random_range(1..=n.max(1)))
                .map(|_| {
                    let mut m = 0;
                    while m == 0 {
                        m = (0..n).filter(|_| rng.random_bool(0.35)).fold(0, |acc, i| acc | (1 << i));
                    }
                    m
                })
                .collect();
            (0..size)
                .map(|x| f64::from(terms.iter().any(|&t| x & t == t)))
                .collect()
        }
    };
    BooleanFn::new(n, p, table)
}

/// OR of ANDs over consecutive blocks of `width` coordinates.
pub fn tribes(n: usize, width: usize, p: f64) -> Result<BooleanFn> {
    let width = width.max(1);
    BooleanFn::from_fn(n, p, |x| {
        let hit = (0..n).step_by(width).any(|start| {
            let end = (start + width).min(n);
            let mask = ((1u32 << (end - start)) - 1) << start;
            x & mask == mask
        });
        f64::from(hit)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_monotone_functions_are_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=7 {
            for _ in 0..30 {
                assert!(random_monotone(n, 0.3, &mut rng).unwrap().is_monotone());
            }
        }
    }

    #[test]
    fn tribes_shape() {
        let t = tribes(4, 2, 0.5).unwrap();
        assert_eq!(t.value(0b0011), 1.0);
        assert_eq!(t.value(0b0101), 0.0);
        assert!(t.is_monotone());
    }
}
