//! Seeded Poisson configurations, p-subsets and the two-stage decomposition.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Swaps the coordinates; turns horizontal questions into vertical ones.
    pub fn transposed(self) -> Point {
        Point::new(self.y, self.x)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    center: Point,
    width: f64,
    height: f64,
}

impl Rect {
    pub fn new(center: Point, width: f64, height: f64) -> Result<Self> {
        let finite = center.x.is_finite() && center.y.is_finite();
        if !finite || !(width.is_finite() && width > 0.0) || !(height.is_finite() && height > 0.0)
        {
            return Err(Error::invalid(format!(
                "rectangle needs finite center and positive sides, got {width}x{height} at ({}, {})",
                center.x, center.y
            )));
        }
        Ok(Rect {
            center,
            width,
            height,
        })
    }

    /// `R_{a×b}`: the `a × b` rectangle centred at the origin.
    pub fn centered(width: f64, height: f64) -> Result<Self> {
        Rect::new(Point::default(), width, height)
    }

    /// `R_N`: the `N × N` square centred at the origin.
    pub fn square(side: f64) -> Result<Self> {
        Rect::centered(side, side)
    }

    pub fn from_bounds(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        Rect::new(
            Point::new(0.5 * (x_min + x_max), 0.5 * (y_min + y_max)),
            x_max - x_min,
            y_max - y_min,
        )
    }

    /// Grows the rectangle by `r` on each side.
    pub fn padded(&self, r: f64) -> Rect {
        Rect {
            center: self.center,
            width: self.width + 2.0 * r,
            height: self.height + 2.0 * r,
        }
    }

    pub fn center(&self) -> Point {
        self.center
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
    pub fn x_min(&self) -> f64 {
        self.center.x - 0.5 * self.width
    }
    pub fn x_max(&self) -> f64 {
        self.center.x + 0.5 * self.width
    }
    pub fn y_min(&self) -> f64 {
        self.center.y - 0.5 * self.height
    }
    pub fn y_max(&self) -> f64 {
        self.center.y + 0.5 * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min() && p.x <= self.x_max() && p.y >= self.y_min() && p.y <= self.y_max()
    }

    /// Euclidean distance from `p` to the rectangle (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.x_min() - p.x).max(p.x - self.x_max()).max(0.0);
        let dy = (self.y_min() - p.y).max(p.y - self.y_max()).max(0.0);
        dx.hypot(dy)
    }

    /// Euclidean distance from `p` to the boundary of the rectangle.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        if self.contains(p) {
            (p.x - self.x_min())
                .min(self.x_max() - p.x)
                .min(p.y - self.y_min())
                .min(self.y_max() - p.y)
        } else {
            self.distance_to(p)
        }
    }

    /// Corners in counter-clockwise order starting at the bottom left.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_min(), self.y_min()),
            Point::new(self.x_max(), self.y_min()),
            Point::new(self.x_max(), self.y_max()),
            Point::new(self.x_min(), self.y_max()),
        ]
    }

    pub fn left_edge(&self) -> (Point, Point) {
        (
            Point::new(self.x_min(), self.y_min()),
            Point::new(self.x_min(), self.y_max()),
        )
    }

    pub fn right_edge(&self) -> (Point, Point) {
        (
            Point::new(self.x_max(), self.y_min()),
            Point::new(self.x_max(), self.y_max()),
        )
    }

    pub fn transposed(&self) -> Rect {
        Rect {
            center: self.center.transposed(),
            width: self.height,
            height: self.width,
        }
    }

    /// Intersection of two rectangles, `None` when it has empty interior.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x_min().max(other.x_min());
        let x1 = self.x_max().min(other.x_max());
        let y0 = self.y_min().max(other.y_min());
        let y1 = self.y_max().min(other.y_max());
        Rect::from_bounds(x0, x1, y0, y1).ok()
    }

    pub fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Point::new(self.x_min() + self.width * u, self.y_min() + self.height * v)
    }
}

/// A reproducible random stream: master seed plus stream index.
///
/// The generator is ChaCha8 keyed by the seed with the index as its stream
/// id, so stream `i` yields the same bytes no matter which thread or in what
/// order it is consumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub const fn new(seed: u64, index: u64) -> Self {
        RngStream { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }

    /// Independent sub-stream labelled by `tag`; same index, derived seed.
    pub fn child(&self, tag: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            index: self.index,
        }
    }

    /// Stream `index` of a derived master seed; used to fan replicates out of one stream.
    pub fn replicate(&self, index: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(self.index)),
            index,
        }
    }
}

impl fmt::Display for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.seed, self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Poisson { stream: RngStream, intensity: f64 },
    Subset { stream: RngStream, p: f64 },
    Perturbed { stream: RngStream, epsilon: f64 },
    Explicit,
}

/// Finite planar configuration together with its sampling region and origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub region: Rect,
    pub provenance: Provenance,
}

impl PointSet {
    pub fn new(points: Vec<Point>, region: Rect) -> Self {
        PointSet {
            points,
            region,
            provenance: Provenance::Explicit,
        }
    }

    pub fn empty(region: Rect) -> Self {
        PointSet::new(Vec::new(), region)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The sub-configuration selected by a membership mask.
    pub fn select(&self, mask: &[bool]) -> Vec<Point> {
        self.points
            .iter()
            .zip(mask)
            .filter_map(|(&p, &keep)| keep.then_some(p))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let (stream, label, value) = match self.provenance {
            Provenance::Poisson { stream, intensity } => (Some(stream), "intensity", intensity),
            Provenance::Subset { stream, p } => (Some(stream), "p", p),
            Provenance::Perturbed { stream, epsilon } => (Some(stream), "epsilon", epsilon),
            Provenance::Explicit => (None, "explicit", 0.0),
        };
        let r = &self.region;
        match stream {
            Some(s) => writeln!(out, "# seed={} index={} {label}={value:?}", s.seed, s.index)?,
            None => writeln!(out, "# explicit")?,
        }
        writeln!(
            out,
            "# region={:?},{:?},{:?},{:?}",
            r.center.x, r.center.y, r.width, r.height
        )?;
        writeln!(out, "x,y")?;
        for p in &self.points {
            writeln!(out, "{:?},{:?}", p.x, p.y)?;
        }
        out.flush()
    }

    pub fn read_csv(path: &Path) -> Result<PointSet> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        PointSet::read_csv_from(BufReader::new(file))
    }

    pub fn read_csv_from<R: BufRead>(reader: R) -> Result<PointSet> {
        let mut provenance = Provenance::Explicit;
        let mut region = None;
        let mut points = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<point set>", e))?;
            let line = line.trim();
            let parse_err = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            if let Some(meta) = line.strip_prefix('#') {
                for field in meta.split_whitespace() {
                    let Some((key, value)) = field.split_once('=') else {
                        continue;
                    };
                    match key {
                        "region" => {
                            let v = parse_floats(value, ',').map_err(parse_err)?;
                            if v.len() != 4 {
                                return Err(Error::Parse {
                                    line: lineno + 1,
                                    msg: "region needs 4 numbers".into(),
                                });
                            }
                            region = Some(Rect::new(Point::new(v[0], v[1]), v[2], v[3])?);
                        }
                        "seed" | "index" | "intensity" | "p" | "epsilon" => {
                            provenance = update_provenance(provenance, key, value)
                                .map_err(|m| Error::Parse {
                                    line: lineno + 1,
                                    msg: m,
                                })?;
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line == "x,y" {
                continue;
            }
            let v = parse_floats(line, ',').map_err(parse_err)?;
            if v.len() != 2 {
                return Err(parse_err(format!("expected x,y, got {line:?}")));
            }
            points.push(Point::new(v[0], v[1]));
        }
        let region = region.ok_or_else(|| Error::Parse {
            line: 0,
            msg: "missing region header".into(),
        })?;
        Ok(PointSet {
            points,
            region,
            provenance,
        })
    }
}

fn parse_floats(s: &str, sep: char) -> std::result::Result<Vec<f64>, String> {
    s.split(sep)
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn update_provenance(
    prov: Provenance,
    key: &str,
    value: &str,
) -> std::result::Result<Provenance, String> {
    let stream = match prov {
        Provenance::Poisson { stream, .. }
        | Provenance::Subset { stream, .. }
        | Provenance::Perturbed { stream, .. } => stream,
        Provenance::Explicit => RngStream::new(0, 0),
    };
    let int = |v: &str| v.parse::<u64>().map_err(|e| format!("{key}: {e}"));
    let float = |v: &str| v.parse::<f64>().map_err(|e| format!("{key}: {e}"));
    Ok(match key {
        "seed" => with_stream(prov, RngStream::new(int(value)?, stream.index)),
        "index" => with_stream(prov, RngStream::new(stream.seed, int(value)?)),
        "intensity" => Provenance::Poisson {
            stream,
            intensity: float(value)?,
        },
        "p" => Provenance::Subset {
            stream,
            p: float(value)?,
        },
        "epsilon" => Provenance::Perturbed {
            stream,
            epsilon: float(value)?,
        },
        _ => prov,
    })
}

fn with_stream(prov: Provenance, stream: RngStream) -> Provenance {
    match prov {
        Provenance::Poisson { intensity, .. } => Provenance::Poisson { stream, intensity },
        Provenance::Subset { p, .. } => Provenance::Subset { stream, p },
        Provenance::Perturbed { epsilon, .. } => Provenance::Perturbed { stream, epsilon },
        Provenance::Explicit => Provenance::Poisson {
            stream,
            intensity: f64::NAN,
        },
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::invalid(format!("Poisson mean must be finite and >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous Poisson process on `region`: draw the count, then place the
/// points independently and uniformly.
pub fn sample_poisson(region: Rect, intensity: f64, stream: RngStream) -> Result<PointSet> {
    let mut rng = stream.rng();
    let points = sample_poisson_with(region, intensity, &mut rng)?;
    Ok(PointSet {
        points,
        region,
        provenance: Provenance::Poisson { stream, intensity },
    })
}

pub(crate) fn sample_poisson_with<R: Rng + ?Sized>(
    region: Rect,
    intensity: f64,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::invalid(format!(
            "intensity must be finite and >= 0, got {intensity}"
        )));
    }
    let count = poisson_count(intensity * region.area(), rng)?;
    Ok((0..count).map(|_| region.uniform_point(rng)).collect())
}

/// Independent Bernoulli(p) membership bits for `n` elements.
pub fn p_subset_mask(n: usize, p: f64, stream: RngStream) -> Result<Vec<bool>> {
    check_probability("p", p)?;
    let mut rng = stream.rng();
    Ok(bernoulli_mask(n, p, &mut rng))
}

pub(crate) fn bernoulli_mask<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random::<f64>() < p).collect()
}

/// Random p-subset of the index set `{0, …, n−1}`, in increasing order.
pub fn p_subset_indices(n: usize, p: f64, stream: RngStream) -> Result<Vec<usize>> {
    let mask = p_subset_mask(n, p, stream)?;
    Ok(mask
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect())
}

/// Random p-subset of a point configuration, keeping the parent order.
pub fn p_subset(parent: &PointSet, p: f64, stream: RngStream) -> Result<PointSet> {
    let mask = p_subset_mask(parent.len(), p, stream)?;
    Ok(PointSet {
        points: parent.select(&mask),
        region: parent.region,
        provenance: Provenance::Subset { stream, p },
    })
}

/// `B ~ Poisson(λ_c / p)` together with a p-subset `η` of it, kept as a mask
/// over `B` so that both sets stay aligned.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStage {
    pub parent: PointSet,
    pub included: Vec<bool>,
    pub p: f64,
}

impl TwoStage {
    pub fn eta(&self) -> PointSet {
        PointSet {
            points: self.parent.select(&self.included),
            region: self.parent.region,
            provenance: match self.parent.provenance {
                Provenance::Poisson { stream, .. } => Provenance::Subset {
                    stream: stream.child(1),
                    p: self.p,
                },
                other => other,
            },
        }
    }
}

pub fn two_stage_sample(lambda_c: f64, p: f64, region: Rect, stream: RngStream) -> Result<TwoStage> {
    if !(lambda_c.is_finite() && lambda_c > 0.0) {
        return Err(Error::invalid(format!("lambda_c must be positive, got {lambda_c}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1], got {p}")));
    }
    let parent = sample_poisson(region, lambda_c / p, stream.child(0))?;
    let included = p_subset_mask(parent.len(), p, stream.child(1))?;
    Ok(TwoStage {
        parent,
        included,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        let r = Rect::square(10.0).unwrap();
        assert!(sample_poisson(r, 0.0, RngStream::new(1, 0)).unwrap().is_empty());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(Rect::centered(0.0, 1.0).is_err());
        let r = Rect::square(1.0).unwrap();
        assert!(sample_poisson(r, f64::NAN, RngStream::new(1, 0)).is_err());
        assert!(sample_poisson(r, -1.0, RngStream::new(1, 0)).is_err());
        assert!(p_subset_mask(3, 1.5, RngStream::new(1, 0)).is_err());
        assert!(two_stage_sample(1.0, 0.0, r, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn same_stream_same_points() {
        let r = Rect::square(10.0).unwrap();
        let a = sample_poisson(r, 1.0, RngStream::new(9, 3)).unwrap();
        let b = sample_poisson(r, 1.0, RngStream::new(9, 3)).unwrap();
        let c = sample_poisson(r, 1.0, RngStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, c.points);
        assert!(a.points.iter().all(|&p| r.contains(p)));
    }

    #[test]
    fn subset_extremes() {
        let r = Rect::square(10.0).unwrap();
        let b = sample_poisson(r, 1.0, RngStream::new(2, 0)).unwrap();
        assert_eq!(p_subset(&b, 1.0, RngStream::new(3, 0)).unwrap().points, b.points);
        assert!(p_subset(&b, 0.0, RngStream::new(3, 0)).unwrap().is_empty());
    }

    #[test]
    fn p_one_two_stage_is_degenerate() {
        let r = Rect::square(8.0).unwrap();
        let ts = two_stage_sample(0.5, 1.0, r, RngStream::new(4, 0)).unwrap();
        assert_eq!(ts.eta().points, ts.parent.points);
    }

    #[test]
    fn csv_round_trip() {
        let r = Rect::new(Point::new(1.0, -2.0), 3.0, 4.0).unwrap();
        let a = sample_poisson(r, 2.0, RngStream::new(11, 7)).unwrap();
        let mut buf = Vec::new();
        a.write_csv_to(&mut buf).unwrap();
        let b = PointSet::read_csv_from(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rect_distances() {
        let r = Rect::square(2.0).unwrap();
        assert_eq!(r.distance_to(Point::new(0.0, 0.0)), 0.0);
        assert!((r.distance_to(Point::new(4.0, 5.0)) - 5.0).abs() < 1e-15);
        assert!((r.distance_to_boundary(Point::new(0.5, 0.0)) - 0.5).abs() < 1e-15);
        assert!((dist_to_segment(Point::new(0.0, 3.0), Point::new(-1.0, 0.0), Point::new(1.0, 0.0)) - 3.0).abs() < 1e-15);
    }
}
