//! `start:step:stop` SNR grids in dB.

/// Parse `start:step:stop` (inclusive of `stop` up to rounding) or a single
/// value. The result is non-empty and strictly increasing.
pub fn parse_snr_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let number = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{s}` is not a finite number in SNR grid `{spec}`"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if step <= 0.0 {
                return Err(format!("SNR grid step must be positive in `{spec}`"));
            }
            if stop < start {
                return Err(format!("SNR grid stop is below start in `{spec}`"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("SNR grid `{spec}` has too many points"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("expected `start:step:stop` or a single value, got `{spec}`")),
    }
}

/// Checks that a grid is non-empty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<(), String> {
    if grid.is_empty() {
        return Err("SNR grid is empty".into());
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err("SNR grid contains a non-finite value".into());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("SNR grid must be strictly increasing".into());
    }
    Ok(())
}
