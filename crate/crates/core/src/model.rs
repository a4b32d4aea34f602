//! Direct and rotation-reduced satisfiability models, model sizes, and export.
//!
//! A model is a set of 0/1 variables with two kinds of weighted constraints:
//! line inequalities `Σ w·x ≤ 2` and row equalities `Σ w·x = 2`. Variables are
//! indexed row-major over the grid (direct) or over the fundamental domain (reduced).

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{count_lines, enumerate_lines, GridPoint};
use crate::symmetry::{
    build_orbit_map, line_orbits, orbit_of, reduce_line, row_coefficients, Reduction,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Direct,
    Reduced,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Direct => "direct",
            ModelKind::Reduced => "reduced",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(ModelKind::Direct),
            "reduced" => Ok(ModelKind::Reduced),
            other => Err(Error::invalid(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Sparse weighted sum over model variables, ascending by variable index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSum {
    pub terms: Vec<(u32, u32)>,
}

impl LinearSum {
    pub fn new(mut terms: Vec<(u32, u32)>) -> Self {
        terms.sort_unstable();
        LinearSum { terms }
    }

    pub fn unit(vars: impl IntoIterator<Item = u32>) -> Self {
        LinearSum::new(vars.into_iter().map(|v| (v, 1)).collect())
    }

    /// Largest value the sum can take over 0/1 assignments.
    pub fn max_value(&self) -> u32 {
        self.terms.iter().map(|&(_, w)| w).sum()
    }

    pub fn evaluate(&self, assignment: &[bool]) -> u32 {
        self.terms
            .iter()
            .filter(|&&(v, _)| assignment[v as usize])
            .map(|&(_, w)| w)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintModel {
    pub n: usize,
    pub kind: ModelKind,
    pub num_vars: usize,
    pub at_most_2: Vec<LinearSum>,
    pub exactly_2: Vec<LinearSum>,
    /// Grid site (direct) or orbit representative (reduced) of each variable.
    pub var_names: Vec<GridPoint>,
}

impl ConstraintModel {
    pub fn num_constraints(&self) -> usize {
        self.at_most_2.len() + self.exactly_2.len()
    }

    /// Checks the structural invariants a solver relies on.
    pub fn validate(&self) -> Result<()> {
        if self.var_names.len() != self.num_vars {
            return Err(Error::invalid(format!(
                "{} variable names for {} variables",
                self.var_names.len(),
                self.num_vars
            )));
        }
        let groups = [("at-most-2", &self.at_most_2), ("exactly-2", &self.exactly_2)];
        for (label, sums) in groups {
            for (idx, sum) in sums.iter().enumerate() {
                for w in sum.terms.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err(Error::invalid(format!(
                            "{label} constraint {idx} repeats variable {}",
                            w[0].0
                        )));
                    }
                }
                for &(v, w) in &sum.terms {
                    if v as usize >= self.num_vars {
                        return Err(Error::invalid(format!(
                            "{label} constraint {idx} references variable {v} of {}",
                            self.num_vars
                        )));
                    }
                    if w == 0 {
                        return Err(Error::invalid(format!(
                            "{label} constraint {idx} has a zero weight"
                        )));
                    }
                }
            }
        }
        for (idx, sum) in self.exactly_2.iter().enumerate() {
            if sum.max_value() < 2 {
                return Err(Error::invalid(format!(
                    "exactly-2 constraint {idx} can never reach 2"
                )));
            }
        }
        for (idx, sum) in self.at_most_2.iter().enumerate() {
            if sum.max_value() <= 2 {
                return Err(Error::invalid(format!(
                    "at-most-2 constraint {idx} is tautological"
                )));
            }
        }
        Ok(())
    }

    /// True if the assignment meets every constraint.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars
            && self.at_most_2.iter().all(|s| s.evaluate(assignment) <= 2)
            && self.exactly_2.iter().all(|s| s.evaluate(assignment) == 2)
    }

    /// Occupied grid sites for an assignment, expanding orbits for reduced models.
    pub fn occupied_sites(&self, assignment: &[bool]) -> Vec<GridPoint> {
        let mut sites: Vec<GridPoint> = self
            .var_names
            .iter()
            .zip(assignment)
            .filter(|(_, &on)| on)
            .flat_map(|(&p, _)| match self.kind {
                ModelKind::Direct => vec![p],
                ModelKind::Reduced => orbit_of(p, self.n),
            })
            .collect();
        sites.sort_unstable();
        sites
    }
}

/// One-for-one line inequalities plus row equalities; horizontal lines are left to the rows.
pub fn build_direct(n: usize) -> Result<ConstraintModel> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    let at_most_2 = enumerate_lines(n, 3)?
        .into_iter()
        .filter(|l| !l.is_horizontal())
        .map(|l| LinearSum::unit(l.points().iter().map(|p| p.index(n) as u32)))
        .collect();
    let exactly_2 = (0..n)
        .map(|j| LinearSum::unit((0..n).map(|i| (j * n + i) as u32)))
        .collect();
    Ok(ConstraintModel {
        n,
        kind: ModelKind::Direct,
        num_vars: n * n,
        at_most_2,
        exactly_2,
        var_names: (0..n * n).map(|idx| GridPoint::from_index(idx, n)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Keep one inequality per distinct orbit-incidence vector.
    pub dedup_incidence: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            dedup_incidence: true,
        }
    }
}

pub fn build_reduced(n: usize) -> Result<ConstraintModel> {
    build_reduced_with(n, ReductionOptions::default())
}

pub fn build_reduced_with(n: usize, opts: ReductionOptions) -> Result<ConstraintModel> {
    let om = build_orbit_map(n)?;
    let lines = enumerate_lines(n, 3)?;
    let mut seen = HashSet::new();
    let mut at_most_2 = Vec::new();
    for orbit in line_orbits(&om, &lines) {
        // The orbit of a row reduces to that row's equality.
        if orbit.iter().any(|&idx| lines[idx].is_horizontal()) {
            continue;
        }
        let Reduction::Constraint(reduced) = reduce_line(&lines[orbit[0]], &om) else {
            continue;
        };
        if opts.dedup_incidence && !seen.insert(reduced.coeffs.clone()) {
            continue;
        }
        at_most_2.push(LinearSum::new(
            reduced.coeffs.iter().map(|&(o, w)| (o, w as u32)).collect(),
        ));
    }
    let exactly_2 = row_coefficients(&om)
        .into_iter()
        .map(|row| LinearSum::new(row.into_iter().map(|(o, w)| (o, w as u32)).collect()))
        .collect();
    Ok(ConstraintModel {
        n,
        kind: ModelKind::Reduced,
        num_vars: om.len(),
        at_most_2,
        exactly_2,
        var_names: om.orbits().iter().map(|o| o.representative).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Opb,
    Text,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opb" => Ok(ExportFormat::Opb),
            "text" | "structured-text" => Ok(ExportFormat::Text),
            other => Err(Error::invalid(format!("unknown export format `{other}`"))),
        }
    }
}

const TEXT_MAGIC: &str = "nothree-model 1";

pub fn export_model(m: &ConstraintModel, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Opb => to_opb(m),
        ExportFormat::Text => to_text(m),
    }
    .into_bytes()
}

/// Pseudo-Boolean competition syntax. OPB variables are 1-based, so model
/// variable `k` is written `x{k+1}`.
fn to_opb(m: &ConstraintModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        m.num_vars,
        m.num_constraints()
    );
    let _ = writeln!(out, "* no-three-in-line {} model, n = {}", m.kind, m.n);
    let mut emit = |sum: &LinearSum, rel: &str| {
        for &(v, w) in &sum.terms {
            let _ = write!(out, "+{} x{} ", w, v + 1);
        }
        let _ = writeln!(out, "{rel} 2 ;");
    };
    for sum in &m.at_most_2 {
        emit(sum, "<=");
    }
    for sum in &m.exactly_2 {
        emit(sum, "=");
    }
    out
}

fn to_text(m: &ConstraintModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TEXT_MAGIC}");
    let _ = writeln!(out, "n {}", m.n);
    let _ = writeln!(out, "kind {}", m.kind);
    let _ = writeln!(out, "vars {}", m.num_vars);
    for (idx, p) in m.var_names.iter().enumerate() {
        let _ = writeln!(out, "var {} {} {}", idx, p.i, p.j);
    }
    let mut emit = |tag: &str, sum: &LinearSum| {
        out.push_str(tag);
        for &(v, w) in &sum.terms {
            let _ = write!(out, " {w}*{v}");
        }
        out.push('\n');
    };
    for sum in &m.at_most_2 {
        emit("atmost2", sum);
    }
    for sum in &m.exactly_2 {
        emit("exactly2", sum);
    }
    out.push_str("end\n");
    out
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("malformed {what}")))
}

/// Reads the structured-text model format written by [`export_model`].
pub fn parse_model_text(text: &str) -> Result<ConstraintModel> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    match lines.next() {
        Some((_, TEXT_MAGIC)) => {}
        _ => return Err(Error::parse(1, format!("expected `{TEXT_MAGIC}` header"))),
    }
    let mut n = None;
    let mut kind = None;
    let mut num_vars = None;
    let mut var_names = Vec::new();
    let mut at_most_2 = Vec::new();
    let mut exactly_2 = Vec::new();
    let mut ended = false;
    for (no, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ended {
            return Err(Error::parse(no, "content after `end`"));
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap_or_default() {
            "n" => n = Some(parse_num::<usize>(toks.next(), no, "grid size")?),
            "kind" => {
                kind = Some(
                    toks.next()
                        .ok_or_else(|| Error::parse(no, "missing kind"))?
                        .parse::<ModelKind>()
                        .map_err(|e| Error::parse(no, e.to_string()))?,
                )
            }
            "vars" => num_vars = Some(parse_num::<usize>(toks.next(), no, "variable count")?),
            "var" => {
                let idx: usize = parse_num(toks.next(), no, "variable index")?;
                if idx != var_names.len() {
                    return Err(Error::parse(no, "variable indices must be consecutive"));
                }
                let i = parse_num(toks.next(), no, "column")?;
                let j = parse_num(toks.next(), no, "row")?;
                var_names.push(GridPoint::new(i, j));
            }
            tag @ ("atmost2" | "exactly2") => {
                let mut terms = Vec::new();
                for t in toks {
                    let (w, v) = t
                        .split_once('*')
                        .ok_or_else(|| Error::parse(no, format!("malformed term `{t}`")))?;
                    terms.push((
                        parse_num(Some(v), no, "variable")?,
                        parse_num(Some(w), no, "weight")?,
                    ));
                }
                let sum = LinearSum::new(terms);
                if tag == "atmost2" {
                    at_most_2.push(sum);
                } else {
                    exactly_2.push(sum);
                }
            }
            "end" => ended = true,
            other => return Err(Error::parse(no, format!("unknown record `{other}`"))),
        }
    }
    if !ended {
        return Err(Error::parse(0, "missing `end`"));
    }
    let model = ConstraintModel {
        n: n.ok_or_else(|| Error::parse(0, "missing `n`"))?,
        kind: kind.ok_or_else(|| Error::parse(0, "missing `kind`"))?,
        num_vars: num_vars.ok_or_else(|| Error::parse(0, "missing `vars`"))?,
        at_most_2,
        exactly_2,
        var_names,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ModelSizeRow {
    pub n: usize,
    pub direct_vars: usize,
    pub reduced_vars: usize,
    pub direct_constraints: usize,
    pub reduced_constraints: usize,
}

/// Direct sizes come from the line count; the reduced model is built in full.
pub fn model_size_row(n: usize) -> Result<ModelSizeRow> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    let horizontal = if n >= 3 { n } else { 0 };
    let reduced = build_reduced(n)?;
    Ok(ModelSizeRow {
        n,
        direct_vars: n * n,
        reduced_vars: reduced.num_vars,
        direct_constraints: count_lines(n, 3)? - horizontal + n,
        reduced_constraints: reduced.num_constraints(),
    })
}

pub fn model_size_report(n_min: usize, n_max: usize) -> Result<Vec<ModelSizeRow>> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::invalid(format!(
            "need 2 <= from <= to, got {n_min}..{n_max}"
        )));
    }
    (n_min..=n_max).map(model_size_row).collect()
}
