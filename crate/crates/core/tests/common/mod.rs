#![allow(dead_code)]

use levy_ou::levy::{JumpFamily, LevyModel};
use levy_ou::ou::OuModel;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const HEIGHT_STD: f64 = std::f64::consts::SQRT_2;

/// OU model with `sigma_w = 1` and compound Poisson `N(0, 2)` jumps
/// (intensity 0 means no jumps).
pub fn cp_model(a: f64, intensity: f64) -> OuModel {
    let jumps = if intensity == 0.0 {
        JumpFamily::None
    } else {
        JumpFamily::CompoundPoisson { intensity, height_std: HEIGHT_STD }
    };
    OuModel::new(a, 0.0, LevyModel::new(1.0, jumps).unwrap()).unwrap()
}

pub fn gamma_model(a: f64, c: f64, rate: f64) -> OuModel {
    OuModel::new(a, 0.0, LevyModel::new(1.0, JumpFamily::Gamma { c, rate }).unwrap()).unwrap()
}

/// Two-sample chi-square homogeneity test on integer counts, pooling the
/// upper tail so every expected cell count is at least 5. Returns
/// `(statistic, 1%-critical value)`.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, f64) {
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    for &k in a {
        ca[k as usize] += 1.0;
    }
    for &k in b {
        cb[k as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    // pool cells from the top until the smallest expected count is >= 5
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pa, mut pb) = (0.0, 0.0);
    for k in (0..=max).rev() {
        pa += ca[k];
        pb += cb[k];
        let row = pa + pb;
        if row * na.min(nb) / total >= 5.0 {
            cells.push((pa, pb));
            pa = 0.0;
            pb = 0.0;
        }
    }
    if pa + pb > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += pa;
            last.1 += pb;
        } else {
            cells.push((pa, pb));
        }
    }
    let mut stat = 0.0;
    for &(oa, ob) in &cells {
        let row = oa + ob;
        let ea = row * na / total;
        let eb = row * nb / total;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = (cells.len().max(2) - 1) as f64;
    let crit = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    (stat, crit)
}
