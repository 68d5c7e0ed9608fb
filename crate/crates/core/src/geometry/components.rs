use crate::error::{Error, Result};
use crate::geometry::raster::{BitMask, LabeledGrid};

/// Pixel adjacency used for component labeling and boundary tracing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn neighbors(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(i64, i64); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Labels connected foreground regions of `mask`.
///
/// Labels are dense `1..=N`, assigned in raster-scan order of each
/// component's first pixel.
pub fn connected_components(mask: &BitMask, connectivity: Connectivity) -> LabeledGrid {
    let (h, w) = mask.dims();
    let bits = mask.bits();
    let mut labels = vec![0u32; h * w];
    let mut next = 0u32;
    let mut stack: Vec<usize> = Vec::new();
    let offsets = connectivity.neighbors();
    for start in 0..h * w {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let x = (i % w) as i64;
            let y = (i / w) as i64;
            for &(dx, dy) in offsets {
                let nx = x + dx;
                let ny = y + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if bits[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    LabeledGrid::from_labels(h, w, labels).expect("dimensions preserved")
}
