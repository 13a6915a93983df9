//! Parameter sets of the published tables and figures.

/// Ratios `gamma / gamma*` of the split-sum vs quadrature table.
pub const TABLE1_RATIOS: [f64; 32] = [
    0.001, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.15, 0.2, 0.25, 0.3,
    0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0,
];
pub const TABLE1_LD_KM: f64 = 1000.0;

/// Rossby radii of the closed-form table on the equator (`cos gamma = 0`).
pub fn table2_equator_ld() -> Vec<f64> {
    (3..=20).map(|k| 100.0 * k as f64).collect()
}

/// Rossby radii of the closed-form table at the antipode.
pub fn table2_antipode_ld() -> Vec<f64> {
    (6..=20).map(|k| 100.0 * k as f64).collect()
}

pub const FIG2_LD_KM: [f64; 2] = [1000.0, 100.0];
pub const FIG2_L_MAX: usize = 10_000;

pub const FIG3_LD_KM: [f64; 5] = [50.0, 100.0, 200.0, 500.0, 1000.0];
/// The two panels are labelled 50/1000 km in one place and 50/100 km in
/// another, so all three are produced.
pub const FIG4_LD_KM: [f64; 3] = [50.0, 100.0, 1000.0];

/// 0.1 to 20, geometrically spaced.
pub fn gg_star_ratios() -> Vec<f64> {
    let n = 70;
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            if k + 1 == n {
                20.0
            } else {
                (0.1f64.ln() + t * (200.0f64).ln()).exp()
            }
        })
        .collect()
}
