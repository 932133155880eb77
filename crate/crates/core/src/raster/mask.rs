use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major grid of values in image coordinates (x = column, y = row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type ScalarGrid = Grid<f64>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Grid {
            width,
            height,
            data: vec![value; width * height],
        })
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "grid {width}x{height} needs {} cells, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    /// Signed lookup; `None` outside the grid.
    #[inline]
    pub fn at(&self, x: i64, y: i64) -> Option<&T> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(&self.data[y as usize * self.width + x as usize])
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn ensure_same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Boolean occupancy grid of a fragment, gap or contact region.
pub type BinaryMask = Grid<bool>;

const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl Grid<bool> {
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Grid::filled(width, height, false)
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Grid::filled(width, height, true)
    }

    #[inline]
    pub fn is_set(&self, x: i64, y: i64) -> bool {
        self.at(x, y).copied().unwrap_or(false)
    }

    /// Bilinear interpolation of the 0/1 occupancy at `p`; off-grid is 0.
    pub fn sample_bilinear(&self, p: crate::geom::Vec2) -> f64 {
        let (x0, y0) = (p.x.floor(), p.y.floor());
        let (fx, fy) = (p.x - x0, p.y - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let v = |x: i64, y: i64| if self.is_set(x, y) { 1.0 } else { 0.0 };
        (1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x0 + 1, y0)) + fy * ((1.0 - fx) * v(x0, y0 + 1) + fx * v(x0 + 1, y0 + 1))
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the foreground.
    pub fn bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.foreground() {
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bb
    }

    /// Mirror about the vertical midline.
    pub fn flip_horizontal(&self) -> Self {
        let w = self.width;
        Grid::from_fn(w, self.height, |x, y| *self.get(w - 1 - x, y)).expect("same dims")
    }

    /// Square structuring element of the given radius (radius 1 = 3x3).
    pub fn dilate(&self, radius: usize) -> Self {
        self.morph(radius, true)
    }

    pub fn erode(&self, radius: usize) -> Self {
        self.morph(radius, false)
    }

    fn morph(&self, radius: usize, dilate: bool) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let r = radius as i64;
        // Separable: rows then columns. Out-of-grid samples are skipped, so
        // full and empty masks are fixed points of both operations.
        let pass = |src: &Grid<bool>, horizontal: bool| -> Grid<bool> {
            Grid::from_fn(src.width, src.height, |x, y| {
                let (x, y) = (x as i64, y as i64);
                let mut acc = !dilate;
                for d in -r..=r {
                    let (sx, sy) = if horizontal { (x + d, y) } else { (x, y + d) };
                    let Some(&v) = src.at(sx, sy) else {
                        continue;
                    };
                    if dilate {
                        acc |= v;
                    } else {
                        acc &= v;
                    }
                }
                acc
            })
            .expect("same dims")
        };
        let rows = pass(self, true);
        pass(&rows, false)
    }

    pub fn open(&self, radius: usize) -> Self {
        self.erode(radius).dilate(radius)
    }

    pub fn close(&self, radius: usize) -> Self {
        self.dilate(radius).erode(radius)
    }

    /// Labels of 4-connected foreground components (0 = background) and
    /// the pixel count of each label (index 0 unused). Labels follow
    /// row-major discovery order.
    pub fn label_components(&self) -> (Grid<u32>, Vec<usize>) {
        let mut labels = Grid::filled(self.width, self.height, 0u32).expect("same dims");
        let mut sizes = vec![0usize];
        let mut stack = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if !*self.get(x, y) || *labels.get(x, y) != 0 {
                    continue;
                }
                let label = sizes.len() as u32;
                let mut size = 0;
                labels.set(x, y, label);
                stack.push((x as i64, y as i64));
                while let Some((cx, cy)) = stack.pop() {
                    size += 1;
                    for (dx, dy) in N4 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if self.is_set(nx, ny) && *labels.get(nx as usize, ny as usize) == 0 {
                            labels.set(nx as usize, ny as usize, label);
                            stack.push((nx, ny));
                        }
                    }
                }
                sizes.push(size);
            }
        }
        (labels, sizes)
    }

    /// Largest 4-connected component; ties go to the earliest in row-major order.
    pub fn largest_component(&self) -> Self {
        let (labels, sizes) = self.label_components();
        let mut best = 0u32;
        for (label, &size) in sizes.iter().enumerate().skip(1) {
            if best == 0 || size > sizes[best as usize] {
                best = label as u32;
            }
        }
        labels.map(|&l| best != 0 && l == best)
    }

    /// Foreground pixels with at least one 4-neighbour outside the foreground.
    pub fn boundary(&self) -> Self {
        Grid::from_fn(self.width, self.height, |x, y| {
            *self.get(x, y)
                && N4
                    .iter()
                    .any(|(dx, dy)| !self.is_set(x as i64 + dx, y as i64 + dy))
        })
        .expect("same dims")
    }

    /// Fills enclosed background regions (4-connected background not reachable
    /// from the grid border).
    pub fn fill_holes(&self) -> Self {
        let outside = flood_from_border(self);
        outside.map(|&reached| !reached)
    }
}

/// Background pixels 4-reachable from the border without crossing `walls`.
pub(crate) fn flood_from_border(walls: &BinaryMask) -> BinaryMask {
    let (w, h) = walls.dims();
    let mut reached = BinaryMask::empty(w, h).expect("same dims");
    let mut stack = Vec::new();
    let seed = |x: usize, y: usize, reached: &mut BinaryMask, stack: &mut Vec<(i64, i64)>| {
        if !*walls.get(x, y) && !*reached.get(x, y) {
            reached.set(x, y, true);
            stack.push((x as i64, y as i64));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut reached, &mut stack);
        seed(x, h - 1, &mut reached, &mut stack);
    }
    for y in 0..h {
        seed(0, y, &mut reached, &mut stack);
        seed(w - 1, y, &mut reached, &mut stack);
    }
    while let Some((x, y)) = stack.pop() {
        for (dx, dy) in N4 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let (ux, uy) = (nx as usize, ny as usize);
            if !*walls.get(ux, uy) && !*reached.get(ux, uy) {
                reached.set(ux, uy, true);
                stack.push((nx, ny));
            }
        }
    }
    reached
}
