//! Independent checks of point configurations and brute-force oracles for small grids.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{collinear, gcd, grid_points, GridPoint};
use crate::symmetry::{fundamental_domain, orbit_of, Parity};

/// An occupied point set on the n×n grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub n: usize,
    pub points: BTreeSet<GridPoint>,
}

impl Configuration {
    pub fn new(n: usize, points: impl IntoIterator<Item = GridPoint>) -> Self {
        Configuration {
            n,
            points: points.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 0/1 occupancy vector indexed like the direct model's variables.
    pub fn occupancy(&self) -> Vec<bool> {
        let mut x = vec![false; self.n * self.n];
        for p in &self.points {
            x[p.index(self.n)] = true;
        }
        x
    }

    /// The occupied sites that fall in the fundamental domain.
    pub fn restrict_to_domain(&self) -> OrbitRepresentatives {
        let (cols, rows) = fundamental_domain(self.n);
        let odd = Parity::of(self.n) == Parity::Odd;
        OrbitRepresentatives {
            n: self.n,
            reps: self
                .points
                .iter()
                .filter(|p| (p.i as usize) < cols && (p.j as usize) < rows)
                .map(|&p| (p, odd && p.i == p.j))
                .collect(),
        }
    }
}

/// Orbit representatives in the fundamental domain, with the diagonal flag
/// marking odd-n sites expanded by the half turn only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRepresentatives {
    pub n: usize,
    pub reps: Vec<(GridPoint, bool)>,
}

impl OrbitRepresentatives {
    /// True if the representative count is the one that expands to 2n points.
    pub fn is_complete(&self) -> bool {
        let diagonal = self.reps.iter().filter(|r| r.1).count();
        match Parity::of(self.n) {
            Parity::Even => self.reps.len() == self.n / 2 && diagonal == 0,
            Parity::Odd => self.reps.len() == self.n.div_ceil(2) && diagonal == 1,
        }
    }
}

pub fn expand(reps: &OrbitRepresentatives) -> Result<Configuration> {
    let n = reps.n;
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    let (cols, rows) = fundamental_domain(n);
    let odd = Parity::of(n) == Parity::Odd;
    let mut owner: HashMap<GridPoint, GridPoint> = HashMap::new();
    let mut collisions = Vec::new();
    for &(rep, diagonal) in &reps.reps {
        if rep.i as usize >= cols || rep.j as usize >= rows {
            return Err(Error::invalid(format!(
                "representative {rep} lies outside the fundamental domain"
            )));
        }
        if diagonal != (odd && rep.i == rep.j) {
            return Err(Error::invalid(format!(
                "representative {rep} has diagonal flag {diagonal}, expected {}",
                odd && rep.i == rep.j
            )));
        }
        for m in orbit_of(rep, n) {
            if let Some(&prev) = owner.get(&m) {
                collisions.extend([prev, m]);
            } else {
                owner.insert(m, rep);
            }
        }
    }
    if !collisions.is_empty() {
        collisions.sort_unstable();
        collisions.dedup();
        return Err(Error::ExpansionCollision { sites: collisions });
    }
    Ok(Configuration::new(n, owner.into_keys()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    OutOfGrid(GridPoint),
    CountMismatch { expected: usize, found: usize },
    Collinear([GridPoint; 3]),
    RowCount { row: u16, count: usize },
    ColumnCount { column: u16, count: usize },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::OutOfGrid(p) => write!(f, "point {p} lies outside the grid"),
            Failure::CountMismatch { expected, found } => {
                write!(f, "expected {expected} points, found {found}")
            }
            Failure::Collinear([a, b, c]) => write!(f, "collinear triple {a} {b} {c}"),
            Failure::RowCount { row, count } => write!(f, "row {row} holds {count} points"),
            Failure::ColumnCount { column, count } => {
                write!(f, "column {column} holds {count} points")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TripleCheck {
    /// Direction hashing per anchor point, quadratic in the point count.
    #[default]
    SlopeBuckets,
    /// Every triple, cubic in the point count.
    BruteForce,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub expect_count: Option<usize>,
    /// Require exactly two points in every row and every column.
    pub two_per_line: bool,
    pub method: TripleCheck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub points: usize,
    pub failure: Option<Failure>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Reduces a direction to a canonical primitive vector, identifying `d` and `-d`.
fn direction_key(a: GridPoint, b: GridPoint) -> (i32, i32) {
    let dx = b.i as i32 - a.i as i32;
    let dy = b.j as i32 - a.j as i32;
    let g = gcd(dx.unsigned_abs() as u64, dy.unsigned_abs() as u64) as i32;
    let (dx, dy) = (dx / g, dy / g);
    if dx < 0 || (dx == 0 && dy < 0) {
        (-dx, -dy)
    } else {
        (dx, dy)
    }
}

fn find_triple_buckets(pts: &[GridPoint]) -> Option<[GridPoint; 3]> {
    let mut seen: HashMap<(i32, i32), GridPoint> = HashMap::new();
    for (k, &a) in pts.iter().enumerate() {
        seen.clear();
        for &b in &pts[k + 1..] {
            if let Some(&prev) = seen.get(&direction_key(a, b)) {
                return Some([a, prev, b]);
            }
            seen.insert(direction_key(a, b), b);
        }
    }
    None
}

fn find_triple_brute(pts: &[GridPoint]) -> Option<[GridPoint; 3]> {
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            for c in b + 1..pts.len() {
                if collinear(pts[a], pts[b], pts[c]) {
                    return Some([pts[a], pts[b], pts[c]]);
                }
            }
        }
    }
    None
}

pub fn verify(c: &Configuration, opts: VerifyOptions) -> Verdict {
    let pts: Vec<GridPoint> = c.points.iter().copied().collect();
    let fail = |failure| Verdict {
        points: pts.len(),
        failure: Some(failure),
    };
    if let Some(&p) = pts.iter().find(|p| !p.in_grid(c.n)) {
        return fail(Failure::OutOfGrid(p));
    }
    if let Some(expected) = opts.expect_count {
        if pts.len() != expected {
            return fail(Failure::CountMismatch {
                expected,
                found: pts.len(),
            });
        }
    }
    let triple = match opts.method {
        TripleCheck::SlopeBuckets => find_triple_buckets(&pts),
        TripleCheck::BruteForce => find_triple_brute(&pts),
    };
    if let Some(t) = triple {
        return fail(Failure::Collinear(t));
    }
    if opts.two_per_line {
        let mut rows = vec![0usize; c.n];
        let mut cols = vec![0usize; c.n];
        for p in &pts {
            rows[p.j as usize] += 1;
            cols[p.i as usize] += 1;
        }
        if let Some(r) = rows.iter().position(|&k| k != 2) {
            return fail(Failure::RowCount {
                row: r as u16,
                count: rows[r],
            });
        }
        if let Some(col) = cols.iter().position(|&k| k != 2) {
            return fail(Failure::ColumnCount {
                column: col as u16,
                count: cols[col],
            });
        }
    }
    Verdict {
        points: pts.len(),
        failure: None,
    }
}

/// Maximum no-three-in-line set on the n×n grid, by pruned exhaustive search.
pub fn brute_force_d(n: usize) -> Result<(usize, Configuration)> {
    if !(2..=6).contains(&n) {
        return Err(Error::invalid(format!(
            "exhaustive maximum search supports 2 <= n <= 6, got {n}"
        )));
    }
    // Per-row choices of at most two sites, larger choices first.
    let mut row_options: Vec<Vec<u16>> = Vec::new();
    for a in 0..n as u16 {
        for b in a + 1..n as u16 {
            row_options.push(vec![a, b]);
        }
    }
    row_options.extend((0..n as u16).map(|a| vec![a]));
    row_options.push(Vec::new());

    struct Search<'a> {
        n: usize,
        options: &'a [Vec<u16>],
        current: Vec<GridPoint>,
        best: Vec<GridPoint>,
    }

    impl Search<'_> {
        fn fits(&self, p: GridPoint) -> bool {
            let cur = &self.current;
            for a in 0..cur.len() {
                for b in a + 1..cur.len() {
                    if collinear(cur[a], cur[b], p) {
                        return false;
                    }
                }
            }
            true
        }

        fn go(&mut self, row: usize) {
            if self.best.len() == 2 * self.n {
                return;
            }
            if self.current.len() + 2 * (self.n - row) <= self.best.len() {
                return;
            }
            if row == self.n {
                self.best = self.current.clone();
                return;
            }
            for opt in self.options {
                let mark = self.current.len();
                let mut ok = true;
                for &i in opt {
                    let p = GridPoint::new(i, row as u16);
                    if !self.fits(p) {
                        ok = false;
                        break;
                    }
                    self.current.push(p);
                }
                if ok {
                    self.go(row + 1);
                }
                self.current.truncate(mark);
            }
        }
    }

    let mut s = Search {
        n,
        options: &row_options,
        current: Vec::new(),
        best: Vec::new(),
    };
    s.go(0);
    Ok((s.best.len(), Configuration::new(n, s.best)))
}

/// Collinear 3-subsets of G_n by direction bucketing around each anchor.
///
/// Each triple is seen from each of its three points, so the per-anchor counts
/// `Σ C(m, 2)` over lines through the anchor sum to three times the total.
pub fn count_collinear_triples(n: usize) -> Result<u64> {
    if !(1..=40).contains(&n) {
        return Err(Error::invalid(format!(
            "collinear triple counting supports 1 <= n <= 40, got {n}"
        )));
    }
    let pts: Vec<GridPoint> = grid_points(n).collect();
    let mut bucket: HashMap<(i32, i32), u64> = HashMap::new();
    let mut total = 0u64;
    for &a in &pts {
        bucket.clear();
        for &b in &pts {
            if a != b {
                *bucket.entry(direction_key(a, b)).or_insert(0) += 1;
            }
        }
        total += bucket.values().map(|&m| m * m.saturating_sub(1) / 2).sum::<u64>();
    }
    Ok(total / 3)
}

/// Collinear 3-subsets of G_n by testing every triple.
pub fn count_collinear_triples_naive(n: usize) -> u64 {
    let pts: Vec<GridPoint> = grid_points(n).collect();
    let mut count = 0;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            for c in b + 1..pts.len() {
                if collinear(pts[a], pts[b], pts[c]) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Orbit representatives of the published 2n-point configurations.
pub mod fixtures {
    use super::OrbitRepresentatives;
    use crate::config::parse_config;

    const SOURCES: [(usize, &str); 11] = [
        (47, include_str!("../fixtures/symmetric/n47.txt")),
        (49, include_str!("../fixtures/symmetric/n49.txt")),
        (51, include_str!("../fixtures/symmetric/n51.txt")),
        (53, include_str!("../fixtures/symmetric/n53.txt")),
        (54, include_str!("../fixtures/symmetric/n54.txt")),
        (55, include_str!("../fixtures/symmetric/n55.txt")),
        (56, include_str!("../fixtures/symmetric/n56.txt")),
        (57, include_str!("../fixtures/symmetric/n57.txt")),
        (58, include_str!("../fixtures/symmetric/n58.txt")),
        (59, include_str!("../fixtures/symmetric/n59.txt")),
        (60, include_str!("../fixtures/symmetric/n60.txt")),
    ];

    pub fn sizes() -> impl Iterator<Item = usize> {
        SOURCES.iter().map(|&(n, _)| n)
    }

    pub fn source(n: usize) -> Option<&'static str> {
        SOURCES.iter().find(|&&(m, _)| m == n).map(|&(_, s)| s)
    }

    pub fn representatives(n: usize) -> Option<OrbitRepresentatives> {
        let file = parse_config(source(n)?).expect("bundled fixture parses");
        file.reps
    }

    pub fn all() -> Vec<OrbitRepresentatives> {
        sizes().filter_map(representatives).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_direct;
    use rand::{Rng, SeedableRng};

    fn p(i: u16, j: u16) -> GridPoint {
        GridPoint::new(i, j)
    }

    #[test]
    fn expands_every_fixture() {
        for reps in fixtures::all() {
            let n = reps.n;
            assert!(reps.is_complete(), "n = {n}");
            let c = expand(&reps).unwrap();
            assert_eq!(c.len(), 2 * n);
            let v = verify(
                &c,
                VerifyOptions {
                    expect_count: Some(2 * n),
                    two_per_line: true,
                    ..Default::default()
                },
            );
            assert!(v.passed(), "n = {n}: {:?}", v.failure);
            if n % 2 == 1 {
                assert!(c.points.iter().all(|q| q.i as usize + q.j as usize != n - 1));
            }
        }
    }

    #[test]
    fn n47_count_and_restriction() {
        let reps = fixtures::representatives(47).unwrap();
        assert_eq!(reps.reps.len(), 24);
        assert!(reps.reps.contains(&(p(8, 8), true)));
        let c = expand(&reps).unwrap();
        assert_eq!(c.len(), 23 * 4 + 2);
        let mut back = c.restrict_to_domain();
        back.reps.sort();
        let mut orig = reps.reps.clone();
        orig.sort();
        assert_eq!(back.reps, orig);
    }

    #[test]
    fn single_rep_fills_two_by_two() {
        let reps = OrbitRepresentatives {
            n: 2,
            reps: vec![(p(0, 0), false)],
        };
        let c = expand(&reps).unwrap();
        assert_eq!(c.points, [p(0, 0), p(0, 1), p(1, 1), p(1, 0)].into_iter().collect());
    }

    #[test]
    fn expansion_errors() {
        let collide = OrbitRepresentatives {
            n: 4,
            reps: vec![(p(0, 0), false), (p(0, 0), false)],
        };
        assert!(matches!(expand(&collide), Err(Error::ExpansionCollision { .. })));
        let outside = OrbitRepresentatives {
            n: 4,
            reps: vec![(p(3, 0), false)],
        };
        assert!(expand(&outside).is_err());
        let unflagged = OrbitRepresentatives {
            n: 5,
            reps: vec![(p(1, 1), false)],
        };
        assert!(expand(&unflagged).is_err());
    }

    #[test]
    fn verify_examples() {
        let line = Configuration::new(3, [p(0, 0), p(1, 1), p(2, 2)]);
        for method in [TripleCheck::SlopeBuckets, TripleCheck::BruteForce] {
            let v = verify(&line, VerifyOptions { method, ..Default::default() });
            assert_eq!(v.failure, Some(Failure::Collinear([p(0, 0), p(1, 1), p(2, 2)])));
        }
        let pair = Configuration::new(9, [p(0, 0), p(8, 8)]);
        assert!(verify(&pair, VerifyOptions::default()).passed());
        let v = verify(
            &pair,
            VerifyOptions {
                expect_count: Some(18),
                ..Default::default()
            },
        );
        assert_eq!(v.failure, Some(Failure::CountMismatch { expected: 18, found: 2 }));
        let outside = Configuration::new(3, [p(3, 0)]);
        assert_eq!(
            verify(&outside, VerifyOptions::default()).failure,
            Some(Failure::OutOfGrid(p(3, 0)))
        );
    }

    #[test]
    fn verify_agrees_with_direct_model() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for n in 3..=10 {
            let m = build_direct(n).unwrap();
            for _ in 0..200 {
                // Two random sites per row, so the row equalities always hold.
                let mut pts = Vec::new();
                for j in 0..n as u16 {
                    let a = rng.gen_range(0..n as u16);
                    let mut b = rng.gen_range(0..n as u16 - 1);
                    if b >= a {
                        b += 1;
                    }
                    pts.extend([p(a, j), p(b, j)]);
                }
                let c = Configuration::new(n, pts);
                let fast = verify(&c, VerifyOptions::default());
                let slow = verify(
                    &c,
                    VerifyOptions {
                        method: TripleCheck::BruteForce,
                        ..Default::default()
                    },
                );
                assert_eq!(fast.passed(), slow.passed());
                assert_eq!(fast.passed(), m.is_satisfied_by(&c.occupancy()));
            }
        }
    }

    #[test]
    fn maximum_sets() {
        assert_eq!(brute_force_d(2).unwrap().0, 4);
        for n in 2..=6 {
            let (d, witness) = brute_force_d(n).unwrap();
            assert_eq!(d, 2 * n);
            assert!(verify(&witness, VerifyOptions::default()).passed());
        }
        assert!(brute_force_d(7).is_err());
    }

    #[test]
    fn triple_counts() {
        assert_eq!(count_collinear_triples(2).unwrap(), 0);
        assert_eq!(count_collinear_triples(3).unwrap(), 8);
        for n in 2..=9 {
            assert_eq!(count_collinear_triples(n).unwrap(), count_collinear_triples_naive(n));
        }
        assert!(count_collinear_triples(41).is_err());
    }
}
