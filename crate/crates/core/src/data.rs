//! Point clouds: CSV ingestion, synthetic Gaussian mixtures and candidate grids.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let init = Self { min_x: first.x, min_y: first.y, max_x: first.x, max_y: first.y };
        Some(it.fold(init, |b, p| Self {
            min_x: b.min_x.min(p.x),
            min_y: b.min_y.min(p.y),
            max_x: b.max_x.max(p.x),
            max_y: b.max_y.max(p.y),
        }))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    /// Manhattan distance between opposite corners.
    pub fn l1_diameter(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

/// A non-empty set of 2-D points with its bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    bbox: BoundingBox,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Parameter("point coordinates must be finite".into()));
        }
        let bbox = BoundingBox::of(&points).ok_or_else(|| Error::Parameter("point cloud must be non-empty".into()))?;
        Ok(Self { points, bbox })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

#[derive(Debug, Clone)]
pub struct LoadedPoints {
    pub cloud: PointCloud,
    /// Rows that were skipped because a coordinate was missing or unparsable.
    pub skipped_rows: usize,
}

/// Reads a headered CSV, taking coordinates from the two named columns.
///
/// Rows whose coordinates do not parse as finite numbers are skipped and
/// counted. `max_rows` caps the number of *valid* rows kept.
pub fn load_points_csv(path: &Path, x_column: &str, y_column: &str, max_rows: Option<usize>) -> Result<LoadedPoints> {
    let data_err = |reason: String| Error::Data { path: path.to_path_buf(), reason };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| data_err(format!("missing column {name:?}")))
    };
    let (xi, yi) = (column(x_column)?, column(y_column)?);

    let mut points = Vec::new();
    let mut skipped = 0usize;
    for record in reader.records() {
        if max_rows.is_some_and(|cap| points.len() >= cap) {
            break;
        }
        let parsed = record.ok().and_then(|r| {
            let x = r.get(xi)?.parse::<f64>().ok()?;
            let y = r.get(yi)?.parse::<f64>().ok()?;
            (x.is_finite() && y.is_finite()).then_some(Point::new(x, y))
        });
        match parsed {
            Some(p) => points.push(p),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} malformed rows", path.display());
    }
    if points.is_empty() {
        return Err(data_err("no valid rows".into()));
    }
    Ok(LoadedPoints { cloud: PointCloud::new(points)?, skipped_rows: skipped })
}

/// Writes points as a two-column `x,y` CSV.
pub fn write_points_csv(path: &Path, points: &[Point]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["x", "y"])?;
    for p in points {
        writer.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Mixture of unit-covariance Gaussians whose means are uniform on
/// `[0, box_side]^2`. Points are emitted component by component.
pub fn synth_mixture<R: Rng + ?Sized>(
    num_components: usize,
    points_per_component: usize,
    box_side: f64,
    rng: &mut R,
) -> Result<PointCloud> {
    if num_components == 0 || points_per_component == 0 {
        return Err(Error::Parameter("component and point counts must be positive".into()));
    }
    if !(box_side.is_finite() && box_side >= 0.0) {
        return Err(Error::Parameter(format!("box side must be non-negative, got {box_side}")));
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let means: Vec<Point> = (0..num_components)
        .map(|_| Point::new(rng.random::<f64>() * box_side, rng.random::<f64>() * box_side))
        .collect();
    let mut points = Vec::with_capacity(num_components * points_per_component);
    for mean in &means {
        for _ in 0..points_per_component {
            points.push(Point::new(mean.x + unit.sample(rng), mean.y + unit.sample(rng)));
        }
    }
    PointCloud::new(points)
}

/// `side_count x side_count` grid spanning `bbox` edge to edge, in row-major
/// order: rows go up in `y`, and within a row `x` increases.
pub fn make_grid(bbox: &BoundingBox, side_count: usize) -> Result<PointCloud> {
    if side_count < 2 {
        return Err(Error::Parameter("grid needs at least 2 points per side".into()));
    }
    let steps = (side_count - 1) as f64;
    let at = |lo: f64, hi: f64, i: usize| if i == side_count - 1 { hi } else { lo + (hi - lo) * i as f64 / steps };
    let mut points = Vec::with_capacity(side_count * side_count);
    for row in 0..side_count {
        let y = at(bbox.min_y, bbox.max_y, row);
        for col in 0..side_count {
            points.push(Point::new(at(bbox.min_x, bbox.max_x, col), y));
        }
    }
    PointCloud::new(points)
}

/// Stream order over `n` candidates: identity, or a seeded shuffle.
pub fn stream_order<R: Rng + ?Sized>(n: usize, shuffle: Option<&mut R>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(rng) = shuffle {
        order.shuffle(rng);
    }
    order
}
