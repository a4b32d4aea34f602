//! Line-oriented text format for configurations and orbit representatives.
//!
//! ```text
//! # comment
//! n 47
//! rep 8 8 diag
//! rep 0 17
//! point 0 17
//! ```
//!
//! `rep` lines keep their order; `point` lines are written sorted. Writing a
//! parsed file reproduces it byte for byte when it was produced by [`write_config`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::GridPoint;
use crate::verify::{Configuration, OrbitRepresentatives};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigFile {
    pub n: usize,
    pub points: Vec<GridPoint>,
    pub reps: Option<OrbitRepresentatives>,
}

impl ConfigFile {
    pub fn from_configuration(c: &Configuration) -> Self {
        ConfigFile {
            n: c.n,
            points: c.points.iter().copied().collect(),
            reps: None,
        }
    }

    pub fn from_reps(reps: &OrbitRepresentatives) -> Self {
        ConfigFile {
            n: reps.n,
            points: Vec::new(),
            reps: Some(reps.clone()),
        }
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.n, self.points.iter().copied())
    }
}

fn coord(tok: Option<&str>, line: usize) -> Result<u16> {
    tok.ok_or_else(|| Error::parse(line, "missing coordinate"))?
        .parse()
        .map_err(|_| Error::parse(line, "malformed coordinate"))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut n = None;
    let mut points = Vec::new();
    let mut reps = Vec::new();
    let mut saw_rep = false;
    for (k, raw) in text.lines().enumerate() {
        let no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap_or_default() {
            "n" => {
                if n.is_some() {
                    return Err(Error::parse(no, "duplicate `n`"));
                }
                let v: usize = toks
                    .next()
                    .ok_or_else(|| Error::parse(no, "missing grid size"))?
                    .parse()
                    .map_err(|_| Error::parse(no, "malformed grid size"))?;
                if v < 2 {
                    return Err(Error::parse(no, "grid size must be at least 2"));
                }
                n = Some(v);
            }
            "point" => points.push(GridPoint::new(coord(toks.next(), no)?, coord(toks.next(), no)?)),
            "rep" => {
                saw_rep = true;
                let p = GridPoint::new(coord(toks.next(), no)?, coord(toks.next(), no)?);
                let diagonal = match toks.next() {
                    None => false,
                    Some("diag") => true,
                    Some(other) => return Err(Error::parse(no, format!("unknown flag `{other}`"))),
                };
                reps.push((p, diagonal));
            }
            other => return Err(Error::parse(no, format!("unknown record `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(Error::parse(no, "trailing tokens"));
        }
    }
    let n = n.ok_or_else(|| Error::parse(0, "missing `n`"))?;
    if let Some(p) = points.iter().chain(reps.iter().map(|r| &r.0)).find(|p| !p.in_grid(n)) {
        return Err(Error::invalid(format!("{p} lies outside the {n}x{n} grid")));
    }
    points.sort_unstable();
    if points.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate point"));
    }
    Ok(ConfigFile {
        n,
        points,
        reps: saw_rep.then_some(OrbitRepresentatives { n, reps }),
    })
}

pub fn write_config(file: &ConfigFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", file.n);
    if let Some(reps) = &file.reps {
        for &(p, diagonal) in &reps.reps {
            let _ = writeln!(out, "rep {} {}{}", p.i, p.j, if diagonal { " diag" } else { "" });
        }
    }
    let mut pts = file.points.clone();
    pts.sort_unstable();
    for p in pts {
        let _ = writeln!(out, "point {} {}", p.i, p.j);
    }
    out
}
