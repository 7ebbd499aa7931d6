use super::BooleanFn;
use crate::error::{Error, Result};

/// `Inf_{p,i}(f) = E_p |f(ω) − f(σ_i ω)|`.
pub fn influence(f: &BooleanFn, i: usize) -> Result<f64> {
    if i >= f.n() {
        return Err(Error::invalid(format!("coordinate {i} out of range for n = {}", f.n())));
    }
    Ok(f.expect(|w, v| (v - f.value(w ^ (1 << i))).abs()))
}

pub fn influences(f: &BooleanFn) -> Vec<f64> {
    (0..f.n())
        .map(|i| influence(f, i).expect("coordinate in range"))
        .collect()
}

/// `II_p(f) = Σ_i Inf_{p,i}(f)²`.
pub fn ii_p(f: &BooleanFn) -> f64 {
    influences(f).iter().map(|x| x * x).sum()
}
