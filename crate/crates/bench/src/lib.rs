//! Fixtures shared by the criterion benchmarks in `benches/`.

use solitonflow_core::model::{SolitonParams, WarpedProductSpec, ZState};
use solitonflow_core::seed::{soliton_seed, SeedConfig};

/// Example 1 orbit with its seed at `a = 6`, `b = 3`.
pub fn example1() -> (WarpedProductSpec, SolitonParams, ZState) {
    let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).expect("valid spec");
    let p = SolitonParams::steady(-1.0);
    let z0 = soliton_seed(&spec, &p, &SeedConfig::soliton(vec![6.0, 3.0])).expect("valid seed");
    (spec, p, z0)
}

/// A warped product with `r` factors, `d_i = i` and `lambda_i = d_i - 1`.
pub fn test_orbit(r: usize) -> WarpedProductSpec {
    let d: Vec<usize> = (1..=r).collect();
    let lambda = d.iter().map(|&d| d as f64 - 1.0).collect();
    WarpedProductSpec::new(d, lambda).expect("valid spec")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(example1().2.t, 0.001);
        assert_eq!(test_orbit(4).d(), &[1, 2, 3, 4]);
    }
}
