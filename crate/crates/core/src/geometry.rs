//! Lattice points of the n×n grid and the maximal collinear subsets it contains.
//!
//! Lines are enumerated by primitive direction: for every direction `(a, b)` with
//! `gcd(a, |b|) = 1`, normalised so that `a > 0` or `(a, b) = (0, 1)`, each grid
//! point whose predecessor `p - (a, b)` falls outside the grid starts exactly one
//! maximal line. Walking forward from that start visits the line's points in
//! lexicographic order, so no deduplication pass is needed.

use std::fmt;

use crate::error::{Error, Result};

/// A site `(i, j)` of the grid, `i` the column and `j` the row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub i: u16,
    pub j: u16,
}

impl GridPoint {
    pub const fn new(i: u16, j: u16) -> Self {
        GridPoint { i, j }
    }

    pub fn in_grid(&self, n: usize) -> bool {
        (self.i as usize) < n && (self.j as usize) < n
    }

    /// Row-major index `j * n + i`.
    pub fn index(&self, n: usize) -> usize {
        self.j as usize * n + self.i as usize
    }

    pub fn from_index(idx: usize, n: usize) -> Self {
        GridPoint::new((idx % n) as u16, (idx / n) as u16)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// The maximal set `ℓ ∩ G_n` for an affine line `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineIncidence {
    points: Vec<GridPoint>,
    canonical_key: Vec<u8>,
}

impl LineIncidence {
    /// Builds an incidence from an arbitrary point list. The points are sorted;
    /// collinearity and maximality are the caller's responsibility.
    pub fn from_points(mut points: Vec<GridPoint>) -> Self {
        points.sort_unstable();
        points.dedup();
        let canonical_key = canonical_key(&points);
        LineIncidence {
            points,
            canonical_key,
        }
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn canonical_key(&self) -> &[u8] {
        &self.canonical_key
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True if every point shares the same row.
    pub fn is_horizontal(&self) -> bool {
        self.points.windows(2).all(|w| w[0].j == w[1].j)
    }
}

/// Serializes a sorted point list as little-endian 16-bit `(i, j)` pairs.
pub fn canonical_key(points: &[GridPoint]) -> Vec<u8> {
    let mut key = Vec::with_capacity(points.len() * 4);
    for p in points {
        key.extend_from_slice(&p.i.to_le_bytes());
        key.extend_from_slice(&p.j.to_le_bytes());
    }
    key
}

/// Exact integer collinearity test.
pub fn collinear(p: GridPoint, r: GridPoint, s: GridPoint) -> bool {
    let (px, py) = (p.i as i64, p.j as i64);
    let (rx, ry) = (r.i as i64, r.j as i64);
    let (sx, sy) = (s.i as i64, s.j as i64);
    (rx - px) * (sy - py) - (ry - py) * (sx - px) == 0
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// All points of G_n in row-major order.
pub fn grid_points(n: usize) -> impl Iterator<Item = GridPoint> {
    (0..n).flat_map(move |j| (0..n).map(move |i| GridPoint::new(i as u16, j as u16)))
}

fn check_args(n: usize, q: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    if q < 2 {
        return Err(Error::invalid(format!(
            "minimum multiplicity must be at least 2, got {q}"
        )));
    }
    if n > u16::MAX as usize + 1 {
        return Err(Error::invalid(format!("grid size {n} too large")));
    }
    Ok(())
}

/// Primitive directions that can carry at least `q` points on an n×n grid.
fn directions(n: usize, q: usize) -> Vec<(i64, i64)> {
    let span = (n - 1) as i64;
    let mut dirs = vec![(0, 1)];
    for a in 1..=span {
        for b in -span..=span {
            if gcd(a as u64, b.unsigned_abs()) != 1 {
                continue;
            }
            let max_steps = if b == 0 {
                span / a
            } else {
                (span / a).min(span / b.abs())
            };
            if max_steps + 1 >= q as i64 {
                dirs.push((a, b));
            }
        }
    }
    if q > n {
        dirs.clear();
    }
    dirs
}

/// Visits every maximal line of at least `q` points as `(start, direction, length)`.
fn for_each_line(n: usize, q: usize, mut f: impl FnMut(GridPoint, (i64, i64), usize)) {
    let span = n as i64;
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < span && y < span;
    for (a, b) in directions(n, q) {
        for y in 0..span {
            for x in 0..span {
                if inside(x - a, y - b) {
                    continue;
                }
                // Steps available before leaving the grid along each axis.
                let along_i = if a == 0 { i64::MAX } else { (span - 1 - x) / a };
                let along_j = match b {
                    0 => i64::MAX,
                    b if b > 0 => (span - 1 - y) / b,
                    b => y / -b,
                };
                let len = along_i.min(along_j) as usize + 1;
                if len >= q {
                    f(GridPoint::new(x as u16, y as u16), (a, b), len);
                }
            }
        }
    }
}

/// Every maximal collinear subset of G_n with at least `q` points, sorted by canonical key.
pub fn enumerate_lines(n: usize, q: usize) -> Result<Vec<LineIncidence>> {
    check_args(n, q)?;
    let mut lines = Vec::new();
    for_each_line(n, q, |start, (a, b), len| {
        let points = (0..len as i64)
            .map(|t| {
                GridPoint::new(
                    (start.i as i64 + t * a) as u16,
                    (start.j as i64 + t * b) as u16,
                )
            })
            .collect::<Vec<_>>();
        let canonical_key = canonical_key(&points);
        lines.push(LineIncidence {
            points,
            canonical_key,
        });
    });
    lines.sort_unstable_by(|x, y| x.canonical_key.cmp(&y.canonical_key));
    Ok(lines)
}

/// `enumerate_lines(n, q).len()` without materializing point lists.
pub fn count_lines(n: usize, q: usize) -> Result<usize> {
    check_args(n, q)?;
    let mut count = 0;
    for_each_line(n, q, |_, _, _| count += 1);
    Ok(count)
}
