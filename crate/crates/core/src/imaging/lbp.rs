use super::{HsvImage, ImagingError, LbpImage, Raster};

/// Neighbour offsets `(dx, dy)` for LBP bits 0..8: clockwise on screen
/// starting east.
const LBP_NEIGHBOURS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// 8-neighbour, radius-1 local binary pattern over the value channel.
/// Bit `k` is set when neighbour `k` is at least as bright as the center.
/// Border pixels carry code 0.
pub fn compute_lbp(img: &HsvImage) -> Result<LbpImage, ImagingError> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(ImagingError::TooSmall {
            width: w,
            height: h,
        });
    }
    let v: Vec<u8> = img.pixels().iter().map(|p| p.v).collect();
    let mut out = Raster::filled(w, h, 0u8);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let center = v[y * w + x];
            let mut code = 0u8;
            for (bit, &(dx, dy)) in LBP_NEIGHBOURS.iter().enumerate() {
                let nx = (x as i64 + dx) as usize;
                let ny = (y as i64 + dy) as usize;
                if v[ny * w + nx] >= center {
                    code |= 1 << bit;
                }
            }
            out.set(x, y, code);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Hsv;

    fn value_image(w: usize, h: usize, values: &[u8]) -> HsvImage {
        Raster::from_vec(
            w,
            h,
            values.iter().map(|&v| Hsv { h: 0, s: 0, v }).collect(),
        )
    }

    #[test]
    fn constant_image_is_all_ones_inside() {
        let img = value_image(5, 4, &[77; 20]);
        let lbp = compute_lbp(&img).unwrap();
        for y in 0..4 {
            for x in 0..5 {
                let border = x == 0 || y == 0 || x == 4 || y == 3;
                assert_eq!(lbp.get(x, y), if border { 0 } else { 255 });
            }
        }
    }

    #[test]
    fn darker_neighbours_give_zero() {
        let mut vals = [99u8; 9];
        vals[4] = 100;
        let lbp = compute_lbp(&value_image(3, 3, &vals)).unwrap();
        assert_eq!(lbp.get(1, 1), 0);
    }

    #[test]
    fn bit_order_enumerated() {
        // Set exactly one brighter neighbour at a time and check which bit lights up.
        let order = [(2, 1), (2, 2), (1, 2), (0, 2), (0, 1), (0, 0), (1, 0), (2, 0)];
        for (bit, &(x, y)) in order.iter().enumerate() {
            let mut vals = [99u8; 9];
            vals[4] = 100;
            vals[y * 3 + x] = 150;
            let lbp = compute_lbp(&value_image(3, 3, &vals)).unwrap();
            assert_eq!(lbp.get(1, 1), 1 << bit, "neighbour ({x},{y})");
        }
    }

    #[test]
    fn rejects_tiny_images() {
        assert!(matches!(
            compute_lbp(&value_image(2, 3, &[0; 6])),
            Err(ImagingError::TooSmall { .. })
        ));
    }
}
