//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nothree::geometry::GridPoint;
use nothree::model::ConstraintModel;

fn cross(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn pt(p: GridPoint) -> (i64, i64) {
    (p.i as i64, p.j as i64)
}

pub fn all_points(n: usize) -> Vec<(i64, i64)> {
    (0..n as i64)
        .flat_map(|j| (0..n as i64).map(move |i| (i, j)))
        .collect()
}

/// Every maximal grid line with at least `q` points: take each pair of points,
/// collect everything on the line through them, and deduplicate.
pub fn lines_by_pairs(n: usize, q: usize) -> BTreeSet<Vec<(i64, i64)>> {
    let pts = all_points(n);
    let mut out = BTreeSet::new();
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let on: Vec<(i64, i64)> = pts
                .iter()
                .copied()
                .filter(|&c| cross(pts[a], pts[b], c) == 0)
                .collect();
            if on.len() >= q {
                out.insert(on);
            }
        }
    }
    out
}

/// Collinear triples of the n×n grid by checking every triple.
pub fn count_triples_naive(n: usize) -> u128 {
    let pts = all_points(n);
    let mut count = 0u128;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            for c in b + 1..pts.len() {
                if cross(pts[a], pts[b], pts[c]) == 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Checks a full configuration: inside the grid, `2n` points, two per row and
/// column, and no three collinear.
pub fn check_configuration(n: usize, points: &[GridPoint]) -> Result<(), String> {
    let set: BTreeSet<(i64, i64)> = points.iter().map(|&p| pt(p)).collect();
    if set.len() != points.len() {
        return Err("repeated point".into());
    }
    if set.iter().any(|&(i, j)| i < 0 || j < 0 || i >= n as i64 || j >= n as i64) {
        return Err("point outside the grid".into());
    }
    if set.len() != 2 * n {
        return Err(format!("{} points, expected {}", set.len(), 2 * n));
    }
    for k in 0..n as i64 {
        let row = set.iter().filter(|p| p.1 == k).count();
        let col = set.iter().filter(|p| p.0 == k).count();
        if row != 2 || col != 2 {
            return Err(format!("line {k}: row {row}, column {col}"));
        }
    }
    let v: Vec<(i64, i64)> = set.into_iter().collect();
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            for c in b + 1..v.len() {
                if cross(v[a], v[b], v[c]) == 0 {
                    return Err(format!("collinear {:?} {:?} {:?}", v[a], v[b], v[c]));
                }
            }
        }
    }
    Ok(())
}

/// Rotation by a quarter turn, `(i, j) -> (j, n-1-i)`.
pub fn quarter_turn(p: (i64, i64), n: usize) -> (i64, i64) {
    (p.1, n as i64 - 1 - p.0)
}

/// Closure of `p` under the quarter turn.
pub fn rotation_orbit(p: (i64, i64), n: usize) -> BTreeSet<(i64, i64)> {
    let mut out = BTreeSet::new();
    let mut q = p;
    for _ in 0..4 {
        out.insert(q);
        q = quarter_turn(q, n);
    }
    out
}

/// All satisfying assignments of `m`, by trying every one of the `2^k` assignments.
pub fn enumerate_assignments(m: &ConstraintModel) -> Vec<Vec<bool>> {
    assert!(m.num_vars <= 24);
    (0u32..1 << m.num_vars)
        .map(|mask| (0..m.num_vars).map(|k| mask >> k & 1 == 1).collect::<Vec<bool>>())
        .filter(|a| m.is_satisfied_by(a))
        .collect()
}

/// Blocks of sites that a rotation-symmetric configuration occupies all or none of.
///
/// Even `n`: the quarter-turn orbits. Odd `n`: quarter-turn orbits of sites off
/// both diagonals, plus half-turn pairs on the main diagonal; the anti-diagonal
/// stays empty.
pub fn symmetric_blocks(n: usize) -> Vec<Vec<(i64, i64)>> {
    let last = n as i64 - 1;
    let mut seen = BTreeSet::new();
    let mut blocks = Vec::new();
    for p in all_points(n) {
        if seen.contains(&p) {
            continue;
        }
        let block: BTreeSet<(i64, i64)> = if n.is_multiple_of(2) {
            rotation_orbit(p, n)
        } else if p.0 + p.1 == last {
            continue;
        } else if p.0 == p.1 {
            [p, (last - p.0, last - p.1)].into_iter().collect()
        } else {
            rotation_orbit(p, n)
        };
        seen.extend(block.iter().copied());
        blocks.push(block.into_iter().collect());
    }
    blocks
}
