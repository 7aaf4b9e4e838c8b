//! Classical contact segmentation: centre-weighted majority filter, then
//! the largest 4-connected component.

use crate::raster::Mask;

/// 3x3 majority vote with the centre pixel counted twice (5 of 10 votes).
/// Removes isolated flips while leaving digital discs untouched.
pub fn majority_filter(m: &Mask) -> Mask {
    let mut out = Mask::new(m.rows, m.cols);
    for i in 0..m.rows as isize {
        for j in 0..m.cols as isize {
            let mut votes = if m.at(i, j) { 2 } else { 0 };
            for di in -1..=1 {
                for dj in -1..=1 {
                    if (di, dj) != (0, 0) && m.at(i + di, j + dj) {
                        votes += 1;
                    }
                }
            }
            out.set(i as usize, j as usize, votes >= 5);
        }
    }
    out
}

/// Largest 4-connected component; ties go to the component found first in
/// row-major order.
pub fn largest_component(m: &Mask) -> Mask {
    let mut label = vec![0u32; m.rows * m.cols];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..m.data.len() {
        if !m.data[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut size = 0;
        while let Some(k) = stack.pop() {
            size += 1;
            let (r, c) = (k / m.cols, k % m.cols);
            let mut push = |n: usize| {
                if m.data[n] && label[n] == 0 {
                    label[n] = next;
                    stack.push(n);
                }
            };
            if r > 0 {
                push(k - m.cols);
            }
            if r + 1 < m.rows {
                push(k + m.cols);
            }
            if c > 0 {
                push(k - 1);
            }
            if c + 1 < m.cols {
                push(k + 1);
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    let mut out = Mask::new(m.rows, m.cols);
    if best.1 > 0 {
        for (o, &l) in out.data.iter_mut().zip(&label) {
            *o = l == best.0;
        }
    }
    out
}

pub fn segment(m: &Mask) -> Mask {
    largest_component(&majority_filter(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(t: usize, cx: f64, cy: f64, r: f64) -> Mask {
        let mut m = Mask::new(t, t);
        for i in 0..t {
            for j in 0..t {
                if (j as f64 + 0.5 - cx).hypot(i as f64 + 0.5 - cy) <= r {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    #[test]
    fn clean_discs_survive_unchanged() {
        for k in 0..40 {
            let r = 2.0 + k as f64 * 0.7;
            let d = disc(80, 40.0 + (k % 3) as f64 * 0.3, 39.7, r);
            assert_eq!(segment(&d), d, "radius {r}");
        }
    }

    #[test]
    fn keeps_the_larger_blob_and_drops_specks() {
        let mut m = disc(60, 20.0, 20.0, 8.0);
        for (i, j) in disc(60, 45.0, 45.0, 5.0).pixels() {
            m.set(i, j, true);
        }
        m.set(2, 50, true);
        let s = segment(&m);
        assert_eq!(s, disc(60, 20.0, 20.0, 8.0));
        assert_eq!(segment(&Mask::new(10, 10)).count(), 0);
    }
}
