//! Zhang–Suen thinning.

use crate::raster::BinaryMask;

/// Neighbors P2..P9, clockwise from north; out-of-bounds pixels are unset.
fn neighbors(mask: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    [
        mask.get_signed(x, y - 1),
        mask.get_signed(x + 1, y - 1),
        mask.get_signed(x + 1, y),
        mask.get_signed(x + 1, y + 1),
        mask.get_signed(x, y + 1),
        mask.get_signed(x - 1, y + 1),
        mask.get_signed(x - 1, y),
        mask.get_signed(x - 1, y - 1),
    ]
}

fn removable(p: &[bool; 8], second_pass: bool) -> bool {
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let transitions = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if transitions != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = *p;
    if second_pass {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    } else {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    }
}

/// Iterated two-subpass thinning until no pixel changes. Note that a 2×2
/// block thins to nothing, a known property of the rules.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut img = mask.clone();
    let mut marked = Vec::new();
    loop {
        let mut changed = false;
        for second_pass in [false, true] {
            marked.clear();
            marked.extend(
                img.points()
                    .filter(|&(x, y)| removable(&neighbors(&img, x, y), second_pass)),
            );
            for &(x, y) in &marked {
                img.set(x, y, false);
            }
            changed |= !marked.is_empty();
        }
        if !changed {
            return img;
        }
    }
}
