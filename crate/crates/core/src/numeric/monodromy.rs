use super::{integrate_fundamental, CMatrix, IntegrationOptions, NumericError, Path, PotentialSpec, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyResult {
    /// `M(end)·M(start)⁻¹` for the frame starting at the identity.
    pub matrix: CMatrix,
    pub det: C64,
    /// Accepted integration steps.
    pub steps: usize,
}

/// Holonomy of the flat connection around a closed polygonal loop.
pub fn monodromy(
    pot: &PotentialSpec,
    loop_path: &Path,
    opts: &IntegrationOptions,
) -> Result<MonodromyResult, NumericError> {
    if !loop_path.is_closed() {
        return Err(NumericError::NotClosed);
    }
    let n = pot.n();
    let identity = CMatrix::identity(n, n);
    let sol = integrate_fundamental(pot, loop_path, &identity, opts)?;
    let start_inv = sol
        .start()
        .m
        .clone()
        .try_inverse()
        .ok_or_else(|| NumericError::InvalidFrame("singular start frame".into()))?;
    let matrix = &sol.end().m * start_inv;
    let det = matrix.determinant();
    Ok(MonodromyResult { matrix, det, steps: sol.steps })
}
