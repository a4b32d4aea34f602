//! Rotation orbits of the grid and the orbit-variable form of line and row constraints.
//!
//! For even `n` every site lies in a 4-cycle of the quarter turn
//! `(i, j) -> (j, n-1-i)`. For odd `n` the anti-diagonal is fixed to zero and
//! the main diagonal splits into 2-cycles under the half turn, so the group acting
//! on lines is the half-turn subgroup.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{GridPoint, LineIncidence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Quarter turn about the grid centre.
pub fn rotate(p: GridPoint, n: usize) -> Result<GridPoint> {
    if !p.in_grid(n) {
        return Err(Error::invalid(format!("{p} is outside the {n}x{n} grid")));
    }
    Ok(rotate_unchecked(p, n))
}

#[inline]
pub(crate) fn rotate_unchecked(p: GridPoint, n: usize) -> GridPoint {
    GridPoint::new(p.j, (n - 1) as u16 - p.i)
}

/// Half turn: `(i, j) -> (n-1-i, n-1-j)`.
#[inline]
pub(crate) fn half_turn(p: GridPoint, n: usize) -> GridPoint {
    let m = (n - 1) as u16;
    GridPoint::new(m - p.i, m - p.j)
}

/// Side lengths `(columns, rows)` of the fundamental domain H_n.
pub fn fundamental_domain(n: usize) -> (usize, usize) {
    match Parity::of(n) {
        Parity::Even => (n / 2, n / 2),
        Parity::Odd => (n.div_ceil(2), (n - 1) / 2),
    }
}

/// Sites sharing one orbit variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub representative: GridPoint,
    pub members: Vec<GridPoint>,
}

impl Orbit {
    pub fn is_diagonal(&self) -> bool {
        self.members.len() == 2
    }
}

/// Partition of G_n into rotation orbits plus the sites fixed to zero.
#[derive(Clone, Debug)]
pub struct OrbitMap {
    n: usize,
    orbits: Vec<Orbit>,
    fixed_zero: Vec<GridPoint>,
    site_to_orbit: Vec<Option<u32>>,
}

/// Members of the orbit generated by a representative in H_n.
pub fn orbit_of(rep: GridPoint, n: usize) -> Vec<GridPoint> {
    if Parity::of(n) == Parity::Odd && rep.i == rep.j {
        vec![rep, half_turn(rep, n)]
    } else {
        let mut members = Vec::with_capacity(4);
        let mut p = rep;
        for _ in 0..4 {
            members.push(p);
            p = rotate_unchecked(p, n);
        }
        members
    }
}

pub fn build_orbit_map(n: usize) -> Result<OrbitMap> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    let (cols, rows) = fundamental_domain(n);
    let mut site_to_orbit = vec![None; n * n];
    let mut orbits = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let rep = GridPoint::new(i as u16, j as u16);
            let idx = orbits.len() as u32;
            let members = orbit_of(rep, n);
            for m in &members {
                let slot = &mut site_to_orbit[m.index(n)];
                debug_assert!(slot.is_none(), "orbits overlap at {m}");
                *slot = Some(idx);
            }
            orbits.push(Orbit {
                representative: rep,
                members,
            });
        }
    }
    let fixed_zero = match Parity::of(n) {
        Parity::Even => Vec::new(),
        Parity::Odd => (0..n)
            .map(|i| GridPoint::new(i as u16, (n - 1 - i) as u16))
            .collect(),
    };
    debug_assert_eq!(
        site_to_orbit.iter().filter(|s| s.is_none()).count(),
        fixed_zero.len()
    );
    Ok(OrbitMap {
        n,
        orbits,
        fixed_zero,
        site_to_orbit,
    })
}

impl OrbitMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.n)
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn fixed_zero(&self) -> &[GridPoint] {
        &self.fixed_zero
    }

    /// Orbit index of a site, or `None` for fixed-zero sites.
    pub fn orbit_index(&self, p: GridPoint) -> Option<usize> {
        self.site_to_orbit[p.index(self.n)].map(|o| o as usize)
    }

    /// Applies one generator of the line symmetry group.
    pub fn generator(&self, p: GridPoint) -> GridPoint {
        match self.parity() {
            Parity::Even => rotate_unchecked(p, self.n),
            Parity::Odd => half_turn(p, self.n),
        }
    }

    /// Expands an orbit-variable assignment into occupied grid sites.
    pub fn expand_assignment(&self, values: &[bool]) -> Vec<GridPoint> {
        let mut pts: Vec<GridPoint> = self
            .orbits
            .iter()
            .zip(values)
            .filter(|(_, &v)| v)
            .flat_map(|(o, _)| o.members.iter().copied())
            .collect();
        pts.sort_unstable();
        pts
    }
}

/// Orbits of lines under the line symmetry group, each listed as indices into the input.
///
/// The first index of every orbit is its canonical-key-least member.
pub fn line_orbits(om: &OrbitMap, lines: &[LineIncidence]) -> Vec<Vec<usize>> {
    let by_key: HashMap<&[u8], usize> = lines
        .iter()
        .enumerate()
        .map(|(idx, l)| (l.canonical_key(), idx))
        .collect();
    let mut seen = vec![false; lines.len()];
    let mut orbits = Vec::new();
    for start in 0..lines.len() {
        if seen[start] {
            continue;
        }
        let mut members = vec![start];
        seen[start] = true;
        let mut current = lines[start].points().to_vec();
        loop {
            let image =
                LineIncidence::from_points(current.iter().map(|&p| om.generator(p)).collect());
            let Some(&idx) = by_key.get(image.canonical_key()) else {
                // Image not in the input family; the orbit is truncated to what was given.
                break;
            };
            if idx == start {
                break;
            }
            if !seen[idx] {
                seen[idx] = true;
                members.push(idx);
            }
            current = image.points().to_vec();
        }
        members.sort_unstable_by(|&a, &b| lines[a].canonical_key().cmp(lines[b].canonical_key()));
        orbits.push(members);
    }
    orbits
}

/// The canonical-key-least member of each line orbit, sorted by key.
pub fn line_orbit_representatives(om: &OrbitMap, lines: &[LineIncidence]) -> Vec<LineIncidence> {
    let mut reps: Vec<LineIncidence> = line_orbits(om, lines)
        .into_iter()
        .map(|orbit| lines[orbit[0]].clone())
        .collect();
    reps.sort_unstable_by(|a, b| a.canonical_key().cmp(b.canonical_key()));
    reps
}

/// A line inequality rewritten over orbit variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedLine {
    pub source: LineIncidence,
    /// Orbit index to weight, ascending by orbit index.
    pub coeffs: Vec<(u32, u8)>,
}

impl ReducedLine {
    pub fn total_weight(&self) -> u32 {
        self.coeffs.iter().map(|&(_, w)| w as u32).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    Constraint(ReducedLine),
    Tautology,
}

pub fn reduce_line(line: &LineIncidence, om: &OrbitMap) -> Reduction {
    let mut coeffs: BTreeMap<u32, u8> = BTreeMap::new();
    for &p in line.points() {
        if let Some(o) = om.orbit_index(p) {
            *coeffs.entry(o as u32).or_insert(0) += 1;
        }
    }
    let total: u32 = coeffs.values().map(|&w| w as u32).sum();
    if total <= 2 {
        return Reduction::Tautology;
    }
    Reduction::Constraint(ReducedLine {
        source: line.clone(),
        coeffs: coeffs.into_iter().collect(),
    })
}

/// Per-row orbit weights `d_r`, ascending by orbit index within each row.
pub fn row_coefficients(om: &OrbitMap) -> Vec<Vec<(u32, u8)>> {
    let mut rows: Vec<BTreeMap<u32, u8>> = vec![BTreeMap::new(); om.n];
    for (idx, orbit) in om.orbits.iter().enumerate() {
        for m in &orbit.members {
            *rows[m.j as usize].entry(idx as u32).or_insert(0) += 1;
        }
    }
    rows.into_iter().map(|r| r.into_iter().collect()).collect()
}
