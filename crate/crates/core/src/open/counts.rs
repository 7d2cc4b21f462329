use crate::error::{Error, Result};

/// Exact binomial coefficient; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for m in 1..=k as u128 {
        r = r.checked_mul(n as u128 - k as u128 + m)? / m;
    }
    Some(r)
}

fn overflow() -> Error {
    Error::Overflow("term count exceeds 128-bit range".into())
}

/// Number of `(k₁, …, k_p)` tuples with `Σk = S` and every partial sum ≤ `j`
/// for `S ≤ j`: `C(S + p − 1, p − 1)`.
pub(crate) fn tuple_multiplicity(p: usize, total: usize) -> f64 {
    binomial((total + p - 1) as u64, (p - 1) as u64).expect("small arguments") as f64
}

/// `(n_α − i + 1 + j)! / [(1 + j)! (n_α − i)!] − 1`
pub fn condition_term_count(n_alpha: usize, i: usize, j: usize) -> Result<u128> {
    if n_alpha == 0 || i >= n_alpha {
        return Err(Error::Input(format!("need 0 ≤ i < n_α, got i = {i}, n_α = {n_alpha}")));
    }
    let a = (n_alpha - i) as u64;
    let b = binomial(a + 1 + j as u64, a).ok_or_else(overflow)?;
    Ok(b - 1)
}

/// `Λ [(n_α + n_β − i + 1)! / ((n_α − i + 1)! n_β!) − n_β − 1]`
pub fn time_term_count(n_alpha: usize, n_beta: usize, i: usize, blocks: usize) -> Result<u128> {
    if n_alpha == 0 || i >= n_alpha {
        return Err(Error::Input(format!("need 0 ≤ i < n_α, got i = {i}, n_α = {n_alpha}")));
    }
    if n_beta == 0 || blocks == 0 {
        return Err(Error::Input("n_β and the block count must be positive".into()));
    }
    let a = (n_alpha - i + 1) as u64;
    let b = binomial(a + n_beta as u64, n_beta as u64).ok_or_else(overflow)?;
    (b - n_beta as u128 - 1).checked_mul(blocks as u128).ok_or_else(overflow)
}
