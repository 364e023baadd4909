//! Baker-Campbell-Hausdorff product on nilpotent algebras.

use crate::algebra::{AlgebraVector, LieAlgebra};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Highest nilpotency class for which the truncated series is exact.
pub const MAX_BCH_CLASS: usize = 4;

/// Nilpotency class of `alg` (0 for the zero algebra, 1 for abelian).
pub fn nilpotency_class(alg: &LieAlgebra, tol: &Tolerances) -> Result<usize> {
    alg.classify(tol).nilpotency_class.ok_or(Error::NotNilpotent)
}

/// `S(X, Y)` with `exp(X) exp(Y) = exp(S(X, Y))`, keeping brackets of length
/// at most `class`. Exact when the algebra is nilpotent of that class.
pub fn bch_product(
    alg: &LieAlgebra,
    x: &AlgebraVector,
    y: &AlgebraVector,
    class: usize,
) -> Result<AlgebraVector> {
    if class > MAX_BCH_CLASS {
        return Err(Error::UnsupportedClass {
            class,
            max: MAX_BCH_CLASS,
        });
    }
    alg.check_vector(x)?;
    alg.check_vector(y)?;
    let br = |a: &AlgebraVector, b: &AlgebraVector| alg.bracket_unchecked(a, b);
    let mut s = x + y;
    if class >= 2 {
        let xy = br(x, y);
        s += &xy * 0.5;
        if class >= 3 {
            let xxy = br(x, &xy);
            let yxy = br(y, &xy);
            s += (&xxy - &yxy) / 12.0;
            if class >= 4 {
                s -= br(y, &xxy) / 24.0;
            }
        }
    }
    Ok(s)
}
