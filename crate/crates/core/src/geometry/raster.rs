//! Binary and labeled pixel grids, polygon scan conversion and erosion.

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::scalar::Scalar;

/// Row-major binary grid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BitMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMask {}x{}", self.height, self.width)?;
        if self.height * self.width <= 64 * 64 {
            for row in self.bits.chunks(self.width) {
                let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl BitMask {
    /// All-zero mask. Panics if either dimension is zero.
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "mask dimensions must be positive");
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn filled(height: usize, width: usize, value: bool) -> Self {
        let mut m = Self::new(height, width);
        m.bits.fill(value);
        m
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 || bits.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width],
                found: vec![bits.len()],
            });
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    /// Builds a mask from rows of `0`/`1` style predicates, handy in tests.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::new(height, width);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.as_ref().len(), width, "ragged rows");
            for (x, &v) in row.as_ref().iter().enumerate() {
                m.set(x, y, v != 0 && v != b'.' && v != b'0');
            }
        }
        m
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Bounds-checked lookup for signed coordinates; outside reads as `false`.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Self {
            height: self.height,
            width: self.width,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a != b)
    }

    pub fn and_not(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a && b).count()
    }

    /// Tight bounding box `(x0, y0, x1, y1)` with exclusive upper bounds.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.iter_set() {
            bb = Some(match bb {
                None => (x, y, x + 1, y + 1),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1)),
            });
        }
        bb
    }

    /// Copies the window `[x0, x0 + w) x [y0, y0 + h)`; out-of-range cells are zero.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        let mut out = Self::new(h, w);
        for y in 0..h {
            let sy = y0 + y;
            if sy >= self.height {
                break;
            }
            for x in 0..w {
                let sx = x0 + x;
                if sx >= self.width {
                    break;
                }
                out.bits[y * w + x] = self.bits[sy * self.width + sx];
            }
        }
        out
    }
}

/// Row-major grid of component labels; `0` is background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGrid {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    num_labels: u32,
}

impl LabeledGrid {
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        Self {
            height,
            width,
            labels: vec![0; height * width],
            num_labels: 0,
        }
    }

    pub fn from_labels(height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 || labels.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width],
                found: vec![labels.len()],
            });
        }
        let num_labels = labels.iter().copied().max().unwrap_or(0);
        Ok(Self {
            height,
            width,
            labels,
            num_labels,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Largest label present.
    #[inline]
    pub fn num_labels(&self) -> u32 {
        self.num_labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> u32 {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.labels[y as usize * self.width + x as usize]
        } else {
            0
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, label: u32) {
        self.labels[y * self.width + x] = label;
        self.num_labels = self.num_labels.max(label);
    }

    #[inline]
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn mask_of(&self, label: u32) -> BitMask {
        let bits = self.labels.iter().map(|&l| l == label).collect();
        BitMask {
            height: self.height,
            width: self.width,
            bits,
        }
    }

    /// Mask of every non-background pixel.
    pub fn foreground(&self) -> BitMask {
        let bits = self.labels.iter().map(|&l| l != 0).collect();
        BitMask {
            height: self.height,
            width: self.width,
            bits,
        }
    }

    /// Pixel count per label, indexed by label (entry 0 is background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.num_labels as usize + 1];
        for &l in &self.labels {
            areas[l as usize] += 1;
        }
        areas
    }
}

/// Sets every cell whose center lies inside `poly` under the even-odd rule.
///
/// Cell `(x, y)` covers `[x, x + 1) x [y, y + 1)` and has center `(x + 0.5, y + 0.5)`.
pub fn rasterize<T: Scalar>(poly: &Polygon<T>, height: usize, width: usize) -> BitMask {
    let mut mask = BitMask::new(height, width);
    rasterize_into(poly, &mut mask, 0, 0);
    mask
}

/// Scan-converts `poly` into `mask`, treating mask cell `(x, y)` as image cell
/// `(x + x_off, y + y_off)`.
pub fn rasterize_into<T: Scalar>(poly: &Polygon<T>, mask: &mut BitMask, x_off: i64, y_off: i64) {
    let verts = poly.vertices();
    let (min, max) = poly.bounds();
    let half = T::lit(0.5);
    let h = mask.height as i64;
    let w = mask.width as i64;

    // rows whose centers fall in [min.y, max.y]
    let row_lo = ((min.y - half).ceil().to_i64().unwrap_or(i64::MIN) - y_off).max(0);
    let row_hi = ((max.y - half).floor().to_i64().unwrap_or(i64::MAX) - y_off).min(h - 1);
    let mut xs: Vec<T> = Vec::with_capacity(8);
    for row in row_lo..=row_hi {
        let yc = T::from_i64(row + y_off).unwrap() + half;
        xs.clear();
        let n = verts.len();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            if (a.y > yc) != (b.y > yc) {
                xs.push(edge_crossing_x(a.x, a.y, b.x, b.y, yc));
            }
        }
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for pair in xs.chunks_exact(2) {
            let c0 = (pair[0] - half).ceil().to_i64().unwrap_or(i64::MIN) - x_off;
            let c1 = (pair[1] - half).ceil().to_i64().unwrap_or(i64::MAX) - x_off;
            let c0 = c0.max(0);
            let c1 = c1.min(w);
            let base = row as usize * mask.width;
            for c in c0..c1 {
                mask.bits[base + c as usize] = true;
            }
        }
    }
}

/// X coordinate where segment `a -> b` crosses the horizontal line `y = yc`.
///
/// Shared by scan conversion and point-in-polygon so both agree bit for bit.
#[inline]
pub(crate) fn edge_crossing_x<T: Scalar>(ax: T, ay: T, bx: T, by: T, yc: T) -> T {
    ax + (yc - ay) * (bx - ax) / (by - ay)
}

/// Morphological erosion with a full 3x3 structuring element.
///
/// Cells outside the grid count as background, so border pixels never survive.
pub fn erode(mask: &BitMask) -> BitMask {
    let (h, w) = mask.dims();
    let mut out = BitMask::new(h, w);
    if h < 3 || w < 3 {
        return out;
    }
    // horizontal run of three, then vertical run of three
    let mut horiz = vec![false; h * w];
    for y in 0..h {
        let row = &mask.bits[y * w..(y + 1) * w];
        for x in 1..w - 1 {
            horiz[y * w + x] = row[x - 1] && row[x] && row[x + 1];
        }
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            out.bits[i] = horiz[i - w] && horiz[i] && horiz[i + w];
        }
    }
    out
}
