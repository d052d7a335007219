//! Freeman chain-code boundary tracing on binary masks.

use super::{BinaryImage, ImagingError, Rect};

/// `(d_row, d_col)` step for each chain code. Code 0 moves one column
/// right, code 2 one row up, code 4 one column left and code 6 one row down;
/// odd codes are the diagonals in between.
pub const CHAIN_OFFSETS: [(i64, i64); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn code_of(d_row: i64, d_col: i64) -> u8 {
    CHAIN_OFFSETS
        .iter()
        .position(|&o| o == (d_row, d_col))
        .expect("not a unit step") as u8
}

/// One step clockwise on screen (rows growing downward).
#[inline]
fn clockwise(code: u8) -> u8 {
    (code + 7) % 8
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainCode {
    pub start: (usize, usize),
    pub codes: Vec<u8>,
}

impl ChainCode {
    /// Pixel positions `(row, col)` visited when replaying the codes,
    /// starting with `start`.
    pub fn replay(&self) -> Vec<(i64, i64)> {
        let mut pos = (self.start.0 as i64, self.start.1 as i64);
        let mut out = Vec::with_capacity(self.codes.len() + 1);
        out.push(pos);
        for &c in &self.codes {
            let (dr, dc) = CHAIN_OFFSETS[c as usize];
            pos = (pos.0 + dr, pos.1 + dc);
            out.push(pos);
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        let path = self.replay();
        path.first() == path.last()
    }

    /// Bounding box of the traced boundary.
    pub fn bounding_box(&self) -> Rect {
        let path = self.replay();
        let (mut r0, mut c0, mut r1, mut c1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &(r, c) in &path {
            r0 = r0.min(r);
            c0 = c0.min(c);
            r1 = r1.max(r);
            c1 = c1.max(c);
        }
        Rect::new(
            c0 as usize,
            r0 as usize,
            (c1 - c0 + 1) as usize,
            (r1 - r0 + 1) as usize,
        )
    }
}

fn is_fg(img: &BinaryImage, row: i64, col: i64) -> bool {
    img.get_checked(col, row).unwrap_or(false)
}

/// Moore-neighbour boundary trace, clockwise on screen, from a foreground
/// boundary pixel. Stops when the trace is back at `start` and about to
/// repeat its first move. An isolated pixel yields an empty code list.
pub fn trace_contour(img: &BinaryImage, start: (usize, usize)) -> Result<ChainCode, ImagingError> {
    let (row, col) = start;
    let (r0, c0) = (row as i64, col as i64);
    if !is_fg(img, r0, c0) {
        return Err(ImagingError::StartNotForeground { row, col });
    }
    let neighbour_fg = |r: i64, c: i64, code: u8| {
        let (dr, dc) = CHAIN_OFFSETS[code as usize];
        is_fg(img, r + dr, c + dc)
    };

    if (0..8).all(|k| !neighbour_fg(r0, c0, k)) {
        return Ok(ChainCode {
            start,
            codes: Vec::new(),
        });
    }

    // Backtrack: west when free (always the case for a raster-first pixel),
    // otherwise the first background neighbour found clockwise from west.
    let mut back = 4u8;
    let mut found = false;
    for _ in 0..8 {
        if !neighbour_fg(r0, c0, back) {
            found = true;
            break;
        }
        back = clockwise(back);
    }
    if !found {
        return Err(ImagingError::StartNotBoundary { row, col });
    }

    // Next move from `cur` given the backtrack direction; returns the move
    // code and the new backtrack direction relative to the destination.
    let step = |cur: (i64, i64), back: u8| -> (u8, u8) {
        let mut prev = back;
        let mut d = clockwise(back);
        for _ in 0..8 {
            if neighbour_fg(cur.0, cur.1, d) {
                let (pr, pc) = CHAIN_OFFSETS[prev as usize];
                let (dr, dc) = CHAIN_OFFSETS[d as usize];
                let new_back = code_of(pr - dr, pc - dc);
                return (d, new_back);
            }
            prev = d;
            d = clockwise(d);
        }
        unreachable!("non-isolated pixel has a foreground neighbour")
    };

    let limit = 4 * img.width() * img.height() + 8;
    let mut codes = Vec::new();
    let mut cur = (r0, c0);
    let (first, mut back) = step(cur, back);
    let mut next = first;
    loop {
        let (dr, dc) = CHAIN_OFFSETS[next as usize];
        cur = (cur.0 + dr, cur.1 + dc);
        codes.push(next);
        let (n, b) = step(cur, back);
        if cur == (r0, c0) && n == first {
            break;
        }
        if codes.len() > limit {
            break;
        }
        next = n;
        back = b;
    }
    Ok(ChainCode { start, codes })
}

/// 8-connected foreground component.
#[derive(Clone, Debug)]
pub struct Blob {
    pub contour: ChainCode,
    pub bbox: Rect,
    pub area: usize,
}

/// Labels 8-connected components and traces the outer boundary of each from
/// its raster-first pixel. Components are returned in raster order.
pub fn find_blobs(img: &BinaryImage) -> Vec<Blob> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) || seen[y * w + x] {
                continue;
            }
            let (mut x0, mut y0, mut x1, mut y1) = (x, y, x, y);
            let mut area = 0usize;
            seen[y * w + x] = true;
            stack.push((x, y));
            while let Some((px, py)) = stack.pop() {
                area += 1;
                x0 = x0.min(px);
                x1 = x1.max(px);
                y0 = y0.min(py);
                y1 = y1.max(py);
                for &(dr, dc) in &CHAIN_OFFSETS {
                    let nx = px as i64 + dc;
                    let ny = py as i64 + dr;
                    if img.get_checked(nx, ny) == Some(true) {
                        let idx = ny as usize * w + nx as usize;
                        if !seen[idx] {
                            seen[idx] = true;
                            stack.push((nx as usize, ny as usize));
                        }
                    }
                }
            }
            let contour = trace_contour(img, (y, x)).expect("raster-first pixel is a boundary pixel");
            blobs.push(Blob {
                contour,
                bbox: Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
                area,
            });
        }
    }
    blobs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Raster;
    use proptest::prelude::*;

    fn mask(rows: &[&str]) -> BinaryImage {
        let h = rows.len();
        let w = rows[0].len();
        Raster::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn isolated_pixel_has_no_codes() {
        let img = mask(&["...", ".#.", "..."]);
        assert!(trace_contour(&img, (1, 1)).unwrap().codes.is_empty());
    }

    #[test]
    fn horizontal_pair_starts_east() {
        let img = mask(&["....", ".##.", "...."]);
        let cc = trace_contour(&img, (1, 1)).unwrap();
        assert_eq!(cc.codes[0], 0);
        assert_eq!(cc.codes, vec![0, 4]);
        assert!(cc.is_closed());
    }

    #[test]
    fn square_clockwise() {
        let img = mask(&["....", ".##.", ".##.", "...."]);
        let cc = trace_contour(&img, (1, 1)).unwrap();
        assert_eq!(cc.codes, vec![0, 6, 4, 2]);
        // Replaying the offsets by hand: right, down, left, up.
        assert_eq!(cc.replay(), vec![(1, 1), (1, 2), (2, 2), (2, 1), (1, 1)]);
    }

    #[test]
    fn background_start_is_rejected() {
        let img = mask(&["...", ".#.", "..."]);
        assert!(matches!(
            trace_contour(&img, (0, 0)),
            Err(ImagingError::StartNotForeground { row: 0, col: 0 })
        ));
    }

    #[test]
    fn interior_start_is_rejected() {
        let img = mask(&["###", "###", "###"]);
        assert!(matches!(
            trace_contour(&img, (1, 1)),
            Err(ImagingError::StartNotBoundary { .. })
        ));
    }

    #[test]
    fn concave_shape_traces_outer_boundary() {
        let img = mask(&[
            "......",
            ".####.",
            ".#....",
            ".####.",
            "......",
        ]);
        let cc = trace_contour(&img, (1, 1)).unwrap();
        assert!(cc.is_closed());
        assert_eq!(cc.bounding_box(), Rect::new(1, 1, 4, 3));
    }

    #[test]
    fn blobs_are_separated() {
        let img = mask(&["##....", "##..#.", "....##", "......"]);
        let blobs = find_blobs(&img);
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].area, 4);
        assert_eq!(blobs[0].bbox, Rect::new(0, 0, 2, 2));
        assert_eq!(blobs[1].area, 3);
        assert_eq!(blobs[1].bbox, Rect::new(4, 1, 2, 2));
    }

    proptest! {
        #[test]
        fn replay_stays_on_foreground(bits in proptest::collection::vec(any::<bool>(), 64)) {
            let img = Raster::from_fn(8, 8, |x, y| bits[y * 8 + x]);
            for blob in find_blobs(&img) {
                let cc = &blob.contour;
                for (r, c) in cc.replay() {
                    prop_assert!(img.get_checked(c, r) == Some(true));
                }
                prop_assert!(cc.is_closed());
            }
        }
    }
}
