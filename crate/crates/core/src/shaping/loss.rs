/// Hinge penalty on the kurtosis: zero up to the limit, slope `penalty` above.
pub fn sensing_loss(kurtosis: f64, kappa_limit: f64, penalty: f64) -> f64 {
    if kurtosis <= kappa_limit {
        0.0
    } else {
        penalty * (kurtosis - kappa_limit)
    }
}

/// Normalized rate loss `(M - GMI) / M` plus the sensing penalty.
pub fn total_loss(gmi: f64, bits_per_symbol: u32, sensing_loss: f64) -> f64 {
    let m = bits_per_symbol as f64;
    (m - gmi) / m + sensing_loss
}
