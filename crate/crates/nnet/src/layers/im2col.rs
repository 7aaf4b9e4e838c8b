use crate::scalar::Scalar;

/// Geometry of a square-kernel convolution over one `c x h x w` sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn out_hw(&self) -> (usize, usize) {
        (
            (self.h + 2 * self.pad - self.k) / self.stride + 1,
            (self.w + 2 * self.pad - self.k) / self.stride + 1,
        )
    }

    /// Rows of the column matrix.
    pub fn col_rows(&self) -> usize {
        self.c * self.k * self.k
    }

    /// Columns of the column matrix.
    pub fn col_cols(&self) -> usize {
        let (ho, wo) = self.out_hw();
        ho * wo
    }

    /// Input row/column touched by output `o` at kernel tap `t`, if inside.
    #[inline]
    fn src(&self, o: usize, t: usize, extent: usize) -> Option<usize> {
        let pos = (o * self.stride + t) as isize - self.pad as isize;
        (pos >= 0 && (pos as usize) < extent).then_some(pos as usize)
    }
}

/// Unfold `x` (one sample) into `cols` of shape `(c*k*k) x (ho*wo)`.
pub(crate) fn im2col<T: Scalar>(g: &ConvGeom, x: &[T], cols: &mut [T]) {
    let (ho, wo) = g.out_hw();
    debug_assert_eq!(x.len(), g.c * g.h * g.w);
    debug_assert_eq!(cols.len(), g.col_rows() * ho * wo);
    let mut row = 0;
    for c in 0..g.c {
        let plane = &x[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ki in 0..g.k {
            for kj in 0..g.k {
                let dst = &mut cols[row * ho * wo..(row + 1) * ho * wo];
                for oy in 0..ho {
                    let line = &mut dst[oy * wo..(oy + 1) * wo];
                    match g.src(oy, ki, g.h) {
                        None => line.iter_mut().for_each(|v| *v = T::zero()),
                        Some(iy) => {
                            let src = &plane[iy * g.w..(iy + 1) * g.w];
                            for (ox, v) in line.iter_mut().enumerate() {
                                *v = match g.src(ox, kj, g.w) {
                                    Some(ix) => src[ix],
                                    None => T::zero(),
                                };
                            }
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-add `cols` back into `x`.
pub(crate) fn col2im<T: Scalar>(g: &ConvGeom, cols: &[T], x: &mut [T]) {
    let (ho, wo) = g.out_hw();
    debug_assert_eq!(x.len(), g.c * g.h * g.w);
    let mut row = 0;
    for c in 0..g.c {
        let plane = &mut x[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ki in 0..g.k {
            for kj in 0..g.k {
                let src = &cols[row * ho * wo..(row + 1) * ho * wo];
                for oy in 0..ho {
                    if let Some(iy) = g.src(oy, ki, g.h) {
                        let line = &src[oy * wo..(oy + 1) * wo];
                        let dst = &mut plane[iy * g.w..(iy + 1) * g.w];
                        for (ox, &v) in line.iter().enumerate() {
                            if let Some(ix) = g.src(ox, kj, g.w) {
                                dst[ix] = dst[ix] + v;
                            }
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // <im2col(x), y> == <x, col2im(y)> for random x, y
    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let g = ConvGeom { c: 2, h: 7, w: 6, k: 3, stride: 2, pad: 1 };
        let x: Vec<f64> = (0..g.c * g.h * g.w).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let n = g.col_rows() * g.col_cols();
        let y: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let mut cols = vec![0.0; n];
        im2col(&g, &x, &mut cols);
        let lhs: f64 = cols.iter().zip(&y).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; x.len()];
        col2im(&g, &y, &mut back);
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, rhs);
    }
}
