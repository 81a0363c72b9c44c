//! Problem instances: pedigrees, relationship matrices, and the EDP data
//! `(A, g, N, 2θ)`.
//!
//! File formats:
//!
//! * pedigree CSV with header `id,sire,dam,ebv`, ids `1..=m` in order and
//!   parents (0 = unknown) always listed before their offspring;
//! * matrix file: first line `m`, then `m` rows of `m` whitespace-separated
//!   decimals;
//! * EBV file: one decimal per line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::{cholesky, LinalgError, UpperTriangular};

pub use crate::linalg::SymMatrix;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },
    #[error("no records")]
    NoRecords,
    #[error("dimension mismatch: relationship matrix is {matrix}x{matrix} but {ebv} EBVs were given")]
    DimensionMismatch { matrix: usize, ebv: usize },
    #[error("selection size N={n} must be between 1 and m={m}")]
    SelectionSize { n: usize, m: usize },
    #[error("diversity cap 2θ must be positive and finite, got {0}")]
    DiversityCap(f64),
    #[error("relationship matrix rejected: {0}")]
    Matrix(#[from] LinalgError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedigreeRecord {
    pub id: usize,
    /// 0 when unknown.
    pub sire: usize,
    /// 0 when unknown.
    pub dam: usize,
    pub ebv: f64,
}

/// Topologically ordered pedigree with dense ids `1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pedigree {
    records: Vec<PedigreeRecord>,
}

impl Pedigree {
    /// Validates ordering and density of `records`.
    pub fn new(records: Vec<PedigreeRecord>) -> Result<Self, InstanceError> {
        if records.is_empty() {
            return Err(InstanceError::NoRecords);
        }
        for (k, r) in records.iter().enumerate() {
            // Report positions as they would appear in a file with a header.
            check_record(r, k + 1, k + 2)?;
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[PedigreeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ebvs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ebv).collect()
    }

    /// Serializes back to the CSV format accepted by [`parse_pedigree`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,sire,dam,ebv\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.id, r.sire, r.dam, r.ebv);
        }
        out
    }
}

fn check_record(r: &PedigreeRecord, expected: usize, line: usize) -> Result<(), InstanceError> {
    if r.id < expected {
        return Err(parse_err(line, format!("duplicate id {}", r.id)));
    }
    if r.id != expected {
        return Err(parse_err(
            line,
            format!("non-dense id {} (expected {expected})", r.id),
        ));
    }
    for parent in [r.sire, r.dam] {
        if parent >= r.id {
            return Err(parse_err(
                line,
                format!("parent id {parent} ≥ child id {}", r.id),
            ));
        }
    }
    if !r.ebv.is_finite() {
        return Err(parse_err(line, format!("non-finite ebv {}", r.ebv)));
    }
    Ok(())
}

pub fn parse_pedigree(text: &str) -> Result<Pedigree, InstanceError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let cols: Vec<String> = header
                .trim()
                .trim_start_matches('\u{feff}')
                .split(',')
                .map(|c| c.trim().to_ascii_lowercase())
                .collect();
            if cols != ["id", "sire", "dam", "ebv"] {
                return Err(parse_err(1, "expected header `id,sire,dam,ebv`"));
            }
        }
        None => return Err(InstanceError::NoRecords),
    }

    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let int = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line, format!("unparsable {what} `{s}`")))
        };
        let rec = PedigreeRecord {
            id: int(fields[0], "id")?,
            sire: int(fields[1], "sire")?,
            dam: int(fields[2], "dam")?,
            ebv: fields[3]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("unparsable ebv `{}`", fields[3])))?,
        };
        if rec.id == 0 {
            return Err(parse_err(line, "id 0 is reserved for unknown parents"));
        }
        check_record(&rec, records.len() + 1, line)?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(InstanceError::NoRecords);
    }
    Ok(Pedigree { records })
}

/// Numerical relationship matrix by the tabular method.
pub fn relationship_matrix(p: &Pedigree) -> SymMatrix {
    let m = p.len();
    let mut a = vec![0.0f64; m * m];
    for (i, r) in p.records().iter().enumerate() {
        let s = r.sire.checked_sub(1);
        let d = r.dam.checked_sub(1);
        for j in 0..i {
            let mut v = 0.0;
            if let Some(s) = s {
                v += 0.5 * a[j * m + s];
            }
            if let Some(d) = d {
                v += 0.5 * a[j * m + d];
            }
            a[i * m + j] = v;
            a[j * m + i] = v;
        }
        a[i * m + i] = match (s, d) {
            (Some(s), Some(d)) => 1.0 + 0.5 * a[s * m + d],
            _ => 1.0,
        };
    }
    SymMatrix::from_lower_fn(m, |i, j| a[i * m + j])
}

pub fn parse_matrix(text: &str) -> Result<SymMatrix, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(InstanceError::NoRecords)?;
    let m: usize = first
        .trim()
        .parse()
        .map_err(|_| parse_err(1, format!("unparsable dimension `{}`", first.trim())))?;
    let mut data = Vec::with_capacity(m * m);
    let mut rows = 0;
    for (idx, raw) in lines {
        let line = idx + 1;
        if rows == m {
            return Err(parse_err(line, format!("more than {m} matrix rows")));
        }
        let before = data.len();
        for tok in raw.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("unparsable entry `{tok}`")))?,
            );
        }
        if data.len() - before != m {
            return Err(parse_err(
                line,
                format!("expected {m} entries, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != m {
        return Err(parse_err(
            text.lines().count() + 1,
            format!("expected {m} matrix rows, found {rows}"),
        ));
    }
    Ok(SymMatrix::new(m, data)?)
}

/// Writes the matrix format; decimals use the shortest round-tripping form.
pub fn write_matrix(a: &SymMatrix) -> String {
    let m = a.dim();
    let mut out = format!("{m}\n");
    for i in 0..m {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_ebv(text: &str) -> Result<Vec<f64>, InstanceError> {
    let mut g = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        g.push(
            raw.parse::<f64>()
                .map_err(|_| parse_err(idx + 1, format!("unparsable ebv `{raw}`")))?,
        );
    }
    if g.is_empty() {
        return Err(InstanceError::NoRecords);
    }
    Ok(g)
}

pub fn write_ebv(g: &[f64]) -> String {
    g.iter().map(|v| format!("{v}\n")).collect()
}

/// Validated equal-deployment instance together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct EdpInstance {
    a: SymMatrix,
    g: Vec<f64>,
    n: usize,
    two_theta: f64,
    u: UpperTriangular,
}

impl EdpInstance {
    pub fn new(a: SymMatrix, g: Vec<f64>, n: usize, two_theta: f64) -> Result<Self, InstanceError> {
        if a.dim() != g.len() {
            return Err(InstanceError::DimensionMismatch {
                matrix: a.dim(),
                ebv: g.len(),
            });
        }
        if n == 0 || n > a.dim() {
            return Err(InstanceError::SelectionSize { n, m: a.dim() });
        }
        if !(two_theta > 0.0) || !two_theta.is_finite() {
            return Err(InstanceError::DiversityCap(two_theta));
        }
        let u = cholesky(&a)?;
        Ok(Self {
            a,
            g,
            n,
            two_theta,
            u,
        })
    }

    /// Candidate count `m`.
    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn ebv(&self) -> &[f64] {
        &self.g
    }

    /// Selection size `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn two_theta(&self) -> f64 {
        self.two_theta
    }

    /// Cholesky factor with `A = UᵀU`.
    pub fn u(&self) -> &UpperTriangular {
        &self.u
    }

    /// `√(2θ)·N`, the cone radius bound on `‖Uy‖`.
    pub fn cone_radius(&self) -> f64 {
        self.two_theta.sqrt() * self.n as f64
    }

    pub fn with_two_theta(&self, two_theta: f64) -> Result<Self, InstanceError> {
        if !(two_theta > 0.0) || !two_theta.is_finite() {
            return Err(InstanceError::DiversityCap(two_theta));
        }
        Ok(Self {
            two_theta,
            ..self.clone()
        })
    }

    /// `gᵀx` for `x = e_S / N`.
    pub fn objective(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&i| self.g[i]).sum::<f64>() / self.n as f64
    }

    pub fn coancestry(&self, selected: &[usize]) -> f64 {
        group_coancestry(&self.a, selected, self.n)
    }

    /// Cheap necessary-condition checks; feasibility itself is assumed.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut diag: Vec<f64> = (0..self.m()).map(|i| self.a.get(i, i)).collect();
        diag.sort_by(f64::total_cmp);
        let offdiag_nonneg = (0..self.m()).all(|i| self.a.row(i).iter().all(|&v| v >= 0.0));
        if offdiag_nonneg {
            let lower = diag[..self.n].iter().sum::<f64>() / (self.n * self.n) as f64;
            if lower > self.two_theta {
                out.push(format!(
                    "instance looks infeasible: every selection has coancestry ≥ {lower:.6} > 2θ = {}",
                    self.two_theta
                ));
            }
        }
        out
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// Pedigree CSV; EBVs come from the file unless `ebv` overrides them.
    Pedigree { path: PathBuf, ebv: Option<PathBuf> },
    Matrix { matrix: PathBuf, ebv: PathBuf },
}

fn read(path: &Path) -> Result<String, InstanceError> {
    std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(
    source: &InstanceSource,
    n: usize,
    two_theta: f64,
) -> Result<EdpInstance, InstanceError> {
    let (a, g) = match source {
        InstanceSource::Pedigree { path, ebv } => {
            let ped = parse_pedigree(&read(path)?)?;
            let g = match ebv {
                Some(p) => parse_ebv(&read(p)?)?,
                None => ped.ebvs(),
            };
            (relationship_matrix(&ped), g)
        }
        InstanceSource::Matrix { matrix, ebv } => {
            (parse_matrix(&read(matrix)?)?, parse_ebv(&read(ebv)?)?)
        }
    };
    EdpInstance::new(a, g, n, two_theta)
}

/// `xᵀAx` with `x_i = 1/N` on `selected`, zero elsewhere.
pub fn group_coancestry(a: &SymMatrix, selected: &[usize], n: usize) -> f64 {
    let mut sum = 0.0;
    for &i in selected {
        let row = a.row(i);
        for &j in selected {
            sum += row[j];
        }
    }
    sum / (n * n) as f64
}
