use super::TransferError;

/// H*(x) = -log2 P(x), in bits.
pub fn h_star(p: f64) -> Result<f64, TransferError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(TransferError::Domain(format!(
            "probability must be in (0, 1], got {p}"
        )));
    }
    Ok(-p.log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyIdentities {
    /// H*(x, y) = H*(x) + H*(y|x).
    pub joint: f64,
    /// H*(x:y) = H*(y) - H*(y|x).
    pub mutual: f64,
    /// H*(x:y) minus H*(x) + H*(y) - H*(x, y).
    pub residual: f64,
}

/// Joint and mutual entropy from P(x), P(y|x) and the marginal P(y).
pub fn entropy_identities(
    px: f64,
    py_given_x: f64,
    py: f64,
) -> Result<EntropyIdentities, TransferError> {
    let hx = h_star(px)?;
    let hy_x = h_star(py_given_x)?;
    let hy = h_star(py)?;
    let joint = hx + hy_x;
    let mutual = hy - hy_x;
    let residual = mutual - (hx + hy - joint);
    Ok(EntropyIdentities {
        joint,
        mutual,
        residual,
    })
}
