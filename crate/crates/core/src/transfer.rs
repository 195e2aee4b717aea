//! Bilinear interpolation, its transpose as restriction, Galerkin coarse
//! operators, and the Fourier symbols of the transfers.

use alloc::vec::Vec;

use num_traits::Float;

use crate::assembly::{CsrMatrix, GridOperator, GridSpec};
use crate::lfa::Frequency;
use crate::model::{stencil_symbol, Stencil9};
use crate::{Error, Result, C64};

/// Interpolation `P` from the grid with `n/2` cells per side and `R = Pᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPair {
    pub fine: GridSpec,
    pub coarse: GridSpec,
    pub p: CsrMatrix,
    pub r: CsrMatrix,
}

pub fn build_transfers(fine: GridSpec) -> Result<TransferPair> {
    let n = fine.n();
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::InvalidParameter("fine grid divisor must be even and at least 4"));
    }
    let coarse = GridSpec::new(n / 2)?;
    let mut trip = Vec::with_capacity(9 * coarse.interior_count());
    for cj in 0..coarse.side() {
        for ci in 0..coarse.side() {
            let col = coarse.index(ci, cj);
            let (fi, fj) = (2 * ci + 1, 2 * cj + 1);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let w = (1.0 - 0.5 * dx.abs() as f64) * (1.0 - 0.5 * dy.abs() as f64);
                    let row = fine.index((fi as i64 + dx) as usize, (fj as i64 + dy) as usize);
                    trip.push((row, col, w));
                }
            }
        }
    }
    let p = CsrMatrix::from_triplets(fine.interior_count(), coarse.interior_count(), &trip)?;
    let r = p.transpose();
    Ok(TransferPair { fine, coarse, p, r })
}

/// Galerkin product `Pᵀ A₀ P`.
pub fn galerkin(a0: &GridOperator, t: &TransferPair) -> Result<GridOperator> {
    if a0.grid != t.fine {
        return Err(Error::DimensionMismatch { expected: t.fine.interior_count(), found: a0.dim() });
    }
    let ap = a0.matrix.matmul(&t.p)?;
    let matrix = t.r.matmul(&ap)?;
    Ok(GridOperator { grid: t.coarse, matrix })
}

/// Bilinear interpolation symbol at the four harmonics of a low frequency,
/// ordered `ω, ω+(π,π), ω+(π,0), ω+(0,π)`.
pub fn interp_symbol(omega: Frequency) -> Result<[f64; 4]> {
    if !omega.is_low() {
        return Err(Error::InvalidParameter("interpolation symbol needs a low frequency"));
    }
    Ok(interp_symbol_unchecked(omega))
}

pub(crate) fn interp_symbol_unchecked(omega: Frequency) -> [f64; 4] {
    omega.harmonics().map(|h| 0.25 * (1.0 + Float::cos(h.w1)) * (1.0 + Float::cos(h.w2)))
}

/// Symbol of `R = Pᵀ` acting from each harmonic to the coarse mode. With
/// `R` the plain transpose this is `4 p̂`, not `p̂`.
pub fn restrict_symbol(omega: Frequency) -> Result<[f64; 4]> {
    Ok(interp_symbol(omega)?.map(|p| 4.0 * p))
}

/// Symbol of the assembled Galerkin operator at the coarse frequency `2ω`.
pub fn galerkin_symbol(stencil: &Stencil9, omega: Frequency) -> Result<C64> {
    let p = interp_symbol(omega)?;
    let h = omega.harmonics();
    let mut s = C64::new(0.0, 0.0);
    for k in 0..4 {
        s += stencil_symbol(stencil, h[k]) * (4.0 * p[k] * p[k]);
    }
    Ok(s)
}
