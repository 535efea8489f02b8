//! Occupation-based observables of basis-state distributions.

use super::PostError;

/// `⟨n_q⟩` for qubit `q` (leftmost qubit is `q = 0`).
pub fn occupation(p: &[f64], qubit: usize) -> Result<f64, PostError> {
    let n = register_size(p)?;
    if qubit >= n {
        return Err(PostError::BadLayout(format!("qubit {qubit} outside a {n}-qubit register")));
    }
    let bit = 1 << (n - 1 - qubit);
    Ok(p.iter().enumerate().filter(|(k, _)| k & bit != 0).map(|(_, x)| x).sum())
}

fn register_size(p: &[f64]) -> Result<usize, PostError> {
    if !p.len().is_power_of_two() || p.len() < 2 {
        return Err(PostError::BadLayout(format!("{} entries is not a register", p.len())));
    }
    Ok(p.len().trailing_zeros() as usize)
}

/// `(n_↑ − n_↓, n_↑ + n_↓)` at `site` of a two-component chain of `sites`
/// sites, with up modes on qubits `0..sites` and down modes after them.
pub fn spin_charge(p: &[f64], sites: usize, site: usize) -> Result<(f64, f64), PostError> {
    let n = register_size(p)?;
    if n != 2 * sites || site >= sites {
        return Err(PostError::BadLayout(format!("site {site} of {sites} on a {n}-qubit register")));
    }
    let up = occupation(p, site)?;
    let down = occupation(p, sites + site)?;
    Ok((up - down, up + down))
}
