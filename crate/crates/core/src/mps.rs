//! MPS reader (free and fixed format) producing [`LpProblem`]s.
//!
//! Integer markers are recorded but integrality is dropped, so a MIP file
//! yields its LP relaxation. Bound or RHS values with magnitude at least
//! [`MPS_INFINITY`] are read as infinite.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use thiserror::Error;

use crate::model::{LpProblem, ObjSense};
use crate::sparse::SparseMatrix;

pub const MPS_INFINITY: f64 = 1e30;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: row `{name}` is not declared")]
    UndeclaredRow { line: usize, name: String },
    #[error("line {line}: column `{name}` is not declared")]
    UndeclaredColumn { line: usize, name: String },
    #[error("line {line}: malformed number `{text}`")]
    MalformedNumber { line: usize, text: String },
    #[error("line {line}: duplicate row `{name}`")]
    DuplicateRow { line: usize, name: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: RANGES entry on objective row `{name}`")]
    RangesOnObjective { line: usize, name: String },
    #[error("no objective (N) row declared")]
    MissingObjective,
    #[error("column `{name}`: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MpsError {
    /// Source line of the offending entry, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            MpsError::UnknownSection { line, .. }
            | MpsError::UndeclaredRow { line, .. }
            | MpsError::UndeclaredColumn { line, .. }
            | MpsError::MalformedNumber { line, .. }
            | MpsError::DuplicateRow { line, .. }
            | MpsError::Syntax { line, .. }
            | MpsError::RangesOnObjective { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    N,
    L,
    G,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowDecl {
    pub name: String,
    pub kind: RowKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub col: usize,
    pub row: usize,
    pub value: f64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowValue {
    pub row: usize,
    pub value: f64,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Up,
    Lo,
    Fx,
    Fr,
    Mi,
    Pl,
    Bv,
    Li,
    Ui,
    Sc,
}

impl BoundKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "UP" => BoundKind::Up,
            "LO" => BoundKind::Lo,
            "FX" => BoundKind::Fx,
            "FR" => BoundKind::Fr,
            "MI" => BoundKind::Mi,
            "PL" => BoundKind::Pl,
            "BV" => BoundKind::Bv,
            "LI" => BoundKind::Li,
            "UI" => BoundKind::Ui,
            "SC" => BoundKind::Sc,
            _ => return None,
        })
    }

    fn needs_value(self) -> bool {
        !matches!(self, BoundKind::Fr | BoundKind::Mi | BoundKind::Pl | BoundKind::Bv)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub kind: BoundKind,
    pub col: usize,
    pub value: Option<f64>,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MpsDocument {
    pub name: String,
    pub obj_sense: ObjSense,
    pub rows: Vec<RowDecl>,
    /// Index into `rows` of the objective (the first N row).
    pub objective: Option<usize>,
    pub columns: Vec<String>,
    pub integer_columns: Vec<usize>,
    pub entries: Vec<Coefficient>,
    pub rhs: Vec<RowValue>,
    pub ranges: Vec<RowValue>,
    pub bounds: Vec<BoundEntry>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Name,
    ObjSense,
    ObjName,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

fn section_of(word: &str) -> Option<Section> {
    Some(match word.to_ascii_uppercase().as_str() {
        "NAME" => Section::Name,
        "OBJSENSE" | "OBJSENS" => Section::ObjSense,
        "OBJNAME" => Section::ObjName,
        "ROWS" => Section::Rows,
        "COLUMNS" => Section::Columns,
        "RHS" => Section::Rhs,
        "RANGES" => Section::Ranges,
        "BOUNDS" => Section::Bounds,
        "ENDATA" => Section::End,
        _ => return None,
    })
}

/// Fixed-format fields (columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61),
/// keeping only the nonblank ones.
fn fixed_fields(line: &str) -> Vec<String> {
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    let chars: Vec<char> = line.chars().collect();
    SPANS
        .iter()
        .filter_map(|&(a, b)| {
            if a >= chars.len() {
                return None;
            }
            let f: String = chars[a..b.min(chars.len())].iter().collect();
            let f = f.trim();
            (!f.is_empty()).then(|| f.to_string())
        })
        .collect()
}

fn arity_ok(section: Section, n: usize) -> bool {
    match section {
        Section::Rows => n == 2,
        Section::Columns => n == 3 || n == 5,
        Section::Rhs | Section::Ranges => (2..=5).contains(&n),
        Section::Bounds => (2..=4).contains(&n),
        _ => true,
    }
}

fn number(text: &str, line: usize) -> Result<f64, MpsError> {
    match text.parse::<f64>() {
        Ok(v) if !v.is_nan() => Ok(v),
        _ => Err(MpsError::MalformedNumber {
            line,
            text: text.to_string(),
        }),
    }
}

fn finite_number(text: &str, line: usize) -> Result<f64, MpsError> {
    let v = number(text, line)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MpsError::MalformedNumber {
            line,
            text: text.to_string(),
        })
    }
}

fn unquote(s: &str) -> &str {
    s.trim_matches(|c| c == '\'' || c == '"')
}

struct Parser {
    doc: MpsDocument,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
    in_integer_block: bool,
    rhs_set: Option<String>,
    ranges_set: Option<String>,
    bounds_set: Option<String>,
    pending_objname: Option<(String, usize)>,
}

impl Parser {
    /// Free-format tokens unless only the fixed-column reading names
    /// declared rows and columns.
    fn tokens(&self, line: &str, section: Section) -> Vec<String> {
        let free: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if self.plausible(section, &free) {
            return free;
        }
        let fixed = fixed_fields(line);
        if self.plausible(section, &fixed) {
            fixed
        } else {
            free
        }
    }

    fn plausible(&self, section: Section, toks: &[String]) -> bool {
        let n = toks.len();
        if !arity_ok(section, n) {
            return false;
        }
        let is_num = |s: &String| s.parse::<f64>().is_ok();
        let pairs_ok = |pairs: &[String]| {
            pairs
                .chunks(2)
                .all(|p| p.len() == 2 && self.row_index.contains_key(&p[0]) && is_num(&p[1]))
        };
        match section {
            Section::Columns => {
                (n == 3 && unquote(&toks[1]).eq_ignore_ascii_case("MARKER")) || pairs_ok(&toks[1..])
            }
            Section::Rhs | Section::Ranges => pairs_ok(if n % 2 == 1 { &toks[1..] } else { toks }),
            Section::Bounds => toks[1..].iter().any(|t| self.col_index.contains_key(t)),
            _ => true,
        }
    }

    fn row(&self, name: &str, line: usize) -> Result<usize, MpsError> {
        self.row_index.get(name).copied().ok_or_else(|| MpsError::UndeclaredRow {
            line,
            name: name.to_string(),
        })
    }

    fn column(&self, name: &str, line: usize) -> Result<usize, MpsError> {
        self.col_index.get(name).copied().ok_or_else(|| MpsError::UndeclaredColumn {
            line,
            name: name.to_string(),
        })
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.doc.warnings.push(msg);
    }

    fn header(&mut self, section: Section, rest: &[&str], line: usize) -> Result<(), MpsError> {
        match section {
            Section::Name => self.doc.name = rest.join(" "),
            Section::ObjSense if !rest.is_empty() => self.sense(rest[0], line)?,
            Section::ObjName if !rest.is_empty() => self.objname(rest[0], line)?,
            Section::Rhs | Section::Ranges | Section::Bounds | Section::Rows | Section::Columns
                if !rest.is_empty() =>
            {
                return Err(MpsError::Syntax {
                    line,
                    msg: format!("unexpected text after section header: `{}`", rest.join(" ")),
                })
            }
            _ => {}
        }
        Ok(())
    }

    fn sense(&mut self, word: &str, line: usize) -> Result<(), MpsError> {
        self.doc.obj_sense = match word.to_ascii_uppercase().as_str() {
            "MAX" | "MAXIMIZE" => ObjSense::Maximize,
            "MIN" | "MINIMIZE" => ObjSense::Minimize,
            other => {
                return Err(MpsError::Syntax {
                    line,
                    msg: format!("unknown objective sense `{other}`"),
                })
            }
        };
        Ok(())
    }

    fn objname(&mut self, name: &str, line: usize) -> Result<(), MpsError> {
        // resolved after the whole file is read
        self.pending_objname = Some((name.to_string(), line));
        Ok(())
    }

    fn body(&mut self, section: Section, line_text: &str, line: usize) -> Result<(), MpsError> {
        let toks = self.tokens(line_text, section);
        match section {
            Section::Preamble | Section::Name | Section::End => Err(MpsError::Syntax {
                line,
                msg: "data line outside of any section".into(),
            }),
            Section::ObjSense => self.sense(&toks[0], line),
            Section::ObjName => self.objname(&toks[0].clone(), line),
            Section::Rows => self.rows_line(&toks, line),
            Section::Columns => self.columns_line(&toks, line),
            Section::Rhs => self.row_values(&toks, line, false),
            Section::Ranges => self.row_values(&toks, line, true),
            Section::Bounds => self.bounds_line(&toks, line),
        }
    }

    fn rows_line(&mut self, toks: &[String], line: usize) -> Result<(), MpsError> {
        if toks.len() != 2 {
            return Err(MpsError::Syntax {
                line,
                msg: "ROWS entries are `<type> <name>`".into(),
            });
        }
        let kind = match toks[0].to_ascii_uppercase().as_str() {
            "N" => RowKind::N,
            "L" => RowKind::L,
            "G" => RowKind::G,
            "E" => RowKind::E,
            other => {
                return Err(MpsError::Syntax {
                    line,
                    msg: format!("unknown row type `{other}`"),
                })
            }
        };
        let name = toks[1].clone();
        if self.row_index.contains_key(&name) {
            return Err(MpsError::DuplicateRow { line, name });
        }
        let idx = self.doc.rows.len();
        if kind == RowKind::N && self.doc.objective.is_none() {
            let wanted = self.pending_objname.as_ref().is_none_or(|(n, _)| *n == name);
            if wanted {
                self.doc.objective = Some(idx);
            }
        }
        self.row_index.insert(name.clone(), idx);
        self.doc.rows.push(RowDecl { name, kind });
        Ok(())
    }

    fn columns_line(&mut self, toks: &[String], line: usize) -> Result<(), MpsError> {
        if toks.len() == 3 && unquote(&toks[1]).eq_ignore_ascii_case("MARKER") {
            match unquote(&toks[2]).to_ascii_uppercase().as_str() {
                "INTORG" => self.in_integer_block = true,
                "INTEND" => self.in_integer_block = false,
                other => {
                    return Err(MpsError::Syntax {
                        line,
                        msg: format!("unknown marker `{other}`"),
                    })
                }
            }
            return Ok(());
        }
        if toks.len() != 3 && toks.len() != 5 {
            return Err(MpsError::Syntax {
                line,
                msg: "COLUMNS entries are `<column> <row> <value> [<row> <value>]`".into(),
            });
        }
        let col = match self.col_index.get(&toks[0]) {
            Some(&c) => c,
            None => {
                let c = self.doc.columns.len();
                self.col_index.insert(toks[0].clone(), c);
                self.doc.columns.push(toks[0].clone());
                if self.in_integer_block {
                    self.doc.integer_columns.push(c);
                }
                c
            }
        };
        for pair in toks[1..].chunks(2) {
            let row = self.row(&pair[0], line)?;
            let value = finite_number(&pair[1], line)?;
            self.doc.entries.push(Coefficient { col, row, value, line });
        }
        Ok(())
    }

    fn row_values(&mut self, toks: &[String], line: usize, ranges: bool) -> Result<(), MpsError> {
        // an odd token count carries a leading set name
        let (set, pairs) = if toks.len() % 2 == 1 {
            (Some(toks[0].clone()), &toks[1..])
        } else {
            (None, toks)
        };
        if pairs.is_empty() {
            return Err(MpsError::Syntax {
                line,
                msg: "expected `<row> <value>` pairs".into(),
            });
        }
        let current = if ranges { &mut self.ranges_set } else { &mut self.rhs_set };
        if let Some(set) = set {
            match current {
                None => *current = Some(set),
                Some(first) if *first != set => {
                    let what = if ranges { "RANGES" } else { "RHS" };
                    self.warn(format!("line {line}: ignoring {what} set `{set}`"));
                    return Ok(());
                }
                _ => {}
            }
        }
        for pair in pairs.chunks(2) {
            let row = self.row(&pair[0], line)?;
            let value = number(&pair[1], line)?;
            if ranges {
                if self.doc.rows[row].kind == RowKind::N {
                    return Err(MpsError::RangesOnObjective {
                        line,
                        name: pair[0].clone(),
                    });
                }
                self.doc.ranges.push(RowValue { row, value, line });
            } else {
                self.doc.rhs.push(RowValue { row, value, line });
            }
        }
        Ok(())
    }

    fn bounds_line(&mut self, toks: &[String], line: usize) -> Result<(), MpsError> {
        let kind = BoundKind::parse(&toks[0]).ok_or_else(|| MpsError::Syntax {
            line,
            msg: format!("unknown bound type `{}`", toks[0]),
        })?;
        let rest = &toks[1..];
        let with_value = if kind.needs_value() { 2 } else { 1 };
        let (set, col_name, value) = match (rest.len(), kind.needs_value()) {
            (n, true) if n == with_value => (None, &rest[0], Some(&rest[1])),
            (n, true) if n == with_value + 1 => (Some(&rest[0]), &rest[1], Some(&rest[2])),
            (1, false) => (None, &rest[0], None),
            // a stray value after a valueless key is tolerated
            (2, false) => {
                if self.col_index.contains_key(&rest[1]) {
                    (Some(&rest[0]), &rest[1], None)
                } else {
                    (None, &rest[0], None)
                }
            }
            (3, false) => (Some(&rest[0]), &rest[1], None),
            _ => {
                return Err(MpsError::Syntax {
                    line,
                    msg: format!("malformed {} bound", toks[0]),
                })
            }
        };
        if let Some(set) = set {
            match &self.bounds_set {
                None => self.bounds_set = Some(set.clone()),
                Some(first) if first != set => {
                    self.warn(format!("line {line}: ignoring BOUNDS set `{set}`"));
                    return Ok(());
                }
                _ => {}
            }
        }
        let col = self.column(col_name, line)?;
        let value = value.map(|v| number(v, line)).transpose()?;
        self.doc.bounds.push(BoundEntry { kind, col, value, line });
        Ok(())
    }
}

/// Parses an MPS stream.
pub fn parse_mps<R: BufRead>(reader: R) -> Result<MpsDocument, MpsError> {
    let mut p = Parser {
        doc: MpsDocument::default(),
        row_index: HashMap::new(),
        col_index: HashMap::new(),
        in_integer_block: false,
        rhs_set: None,
        ranges_set: None,
        bounds_set: None,
        pending_objname: None,
    };
    let mut section = Section::Preamble;
    let mut ended = false;
    for (idx, text) in reader.lines().enumerate() {
        let text = text?;
        let line = idx + 1;
        let trimmed = text.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if ended {
            p.warn(format!("line {line}: content after ENDATA ignored"));
            break;
        }
        let first = trimmed.chars().next().expect("nonempty");
        if !first.is_whitespace() {
            let mut words = trimmed.split_whitespace();
            let head = words.next().expect("nonempty");
            let rest: Vec<&str> = words.collect();
            section = section_of(head).ok_or_else(|| MpsError::UnknownSection {
                line,
                name: head.to_string(),
            })?;
            if section == Section::End {
                ended = true;
                continue;
            }
            p.header(section, &rest, line)?;
        } else {
            p.body(section, trimmed, line)?;
        }
    }
    if !ended {
        p.warn("missing ENDATA".into());
    }
    if let Some((name, line)) = &p.pending_objname {
        match p.row_index.get(name) {
            Some(&r) if p.doc.rows[r].kind == RowKind::N => p.doc.objective = Some(r),
            _ => {
                return Err(MpsError::UndeclaredRow {
                    line: *line,
                    name: name.clone(),
                })
            }
        }
    }
    Ok(p.doc)
}

/// Reads an MPS file; names ending in `.gz` are decompressed on the fly.
pub fn read_mps_file(path: impl AsRef<Path>) -> Result<MpsDocument, MpsError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let raw: Box<dyn Read> = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz")) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_mps(BufReader::new(raw))
}

/// An [`LpProblem`] together with the names it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsProblem {
    pub name: String,
    pub problem: LpProblem,
    /// Names of the constraint rows, in problem order.
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub integer_columns: Vec<usize>,
    /// Parse and build warnings, in the order they were raised.
    pub warnings: Vec<String>,
}

fn as_bound(v: f64) -> f64 {
    if v >= MPS_INFINITY {
        f64::INFINITY
    } else if v <= -MPS_INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Converts a parsed document into general form.
pub fn build_problem(doc: &MpsDocument) -> Result<MpsProblem, MpsError> {
    let obj = doc.objective.ok_or(MpsError::MissingObjective)?;
    let mut warnings = doc.warnings.clone();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    // constraint rows keep declaration order; other N rows are dropped
    let mut row_map = vec![None; doc.rows.len()];
    let mut row_names = Vec::new();
    for (r, decl) in doc.rows.iter().enumerate() {
        if decl.kind == RowKind::N {
            if r != obj {
                warn(format!("free row `{}` dropped", decl.name));
            }
        } else {
            row_map[r] = Some(row_names.len());
            row_names.push(decl.name.clone());
        }
    }
    let m = row_names.len();
    let n = doc.columns.len();

    let mut c = vec![0.0; n];
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut trips = Vec::with_capacity(doc.entries.len());
    for e in &doc.entries {
        if let Some(&first) = seen.get(&(e.row, e.col)) {
            warn(format!(
                "line {}: duplicate coefficient for ({}, {}) summed with line {first}",
                e.line, doc.columns[e.col], doc.rows[e.row].name
            ));
        } else {
            seen.insert((e.row, e.col), e.line);
        }
        if e.row == obj {
            c[e.col] += e.value;
        } else if let Some(i) = row_map[e.row] {
            trips.push((i, e.col, e.value));
        }
    }
    let a = SparseMatrix::from_triplets(m, n, &trips).map_err(|err| MpsError::Syntax {
        line: 0,
        msg: err.to_string(),
    })?;

    let mut rhs = vec![0.0; doc.rows.len()];
    let mut obj_constant = 0.0;
    for v in &doc.rhs {
        if v.row == obj {
            obj_constant = 0.0 - v.value;
        } else {
            rhs[v.row] = as_bound(v.value);
        }
    }
    let mut rl = vec![0.0; m];
    let mut ru = vec![0.0; m];
    for (r, decl) in doc.rows.iter().enumerate() {
        let Some(i) = row_map[r] else { continue };
        (rl[i], ru[i]) = match decl.kind {
            RowKind::L => (f64::NEG_INFINITY, rhs[r]),
            RowKind::G => (rhs[r], f64::INFINITY),
            RowKind::E => (rhs[r], rhs[r]),
            RowKind::N => unreachable!("free rows are not mapped"),
        };
    }
    for v in &doc.ranges {
        let Some(i) = row_map[v.row] else { continue };
        let r = rhs[v.row];
        let range = v.value;
        (rl[i], ru[i]) = match doc.rows[v.row].kind {
            RowKind::L => (r - range.abs(), r),
            RowKind::G => (r, r + range.abs()),
            RowKind::E if range >= 0.0 => (r, r + range),
            RowKind::E => (r + range, r),
            RowKind::N => unreachable!("rejected while parsing"),
        };
    }

    let mut vl = vec![0.0; n];
    let mut vu = vec![f64::INFINITY; n];
    let mut lower_set = vec![false; n];
    for b in &doc.bounds {
        let j = b.col;
        let v = b.value.map(as_bound).unwrap_or(0.0);
        match b.kind {
            BoundKind::Up | BoundKind::Ui => {
                vu[j] = v;
                if v < 0.0 && !lower_set[j] {
                    vl[j] = f64::NEG_INFINITY;
                    warn(format!(
                        "line {}: negative upper bound on `{}` with no lower bound; lower set to -inf",
                        b.line, doc.columns[j]
                    ));
                }
            }
            BoundKind::Sc => {
                vu[j] = v;
                warn(format!("line {}: semicontinuous `{}` relaxed to [0, {v}]", b.line, doc.columns[j]));
            }
            BoundKind::Lo | BoundKind::Li => {
                vl[j] = v;
                lower_set[j] = true;
            }
            BoundKind::Fx => {
                vl[j] = v;
                vu[j] = v;
                lower_set[j] = true;
            }
            BoundKind::Fr => {
                vl[j] = f64::NEG_INFINITY;
                vu[j] = f64::INFINITY;
                lower_set[j] = true;
            }
            BoundKind::Mi => {
                vl[j] = f64::NEG_INFINITY;
                lower_set[j] = true;
            }
            BoundKind::Pl => vu[j] = f64::INFINITY,
            BoundKind::Bv => {
                vl[j] = 0.0;
                vu[j] = 1.0;
                lower_set[j] = true;
            }
        }
    }
    for j in 0..n {
        if vl[j] > vu[j] || vl[j] == f64::INFINITY || vu[j] == f64::NEG_INFINITY {
            return Err(MpsError::InvalidBounds {
                name: doc.columns[j].clone(),
                lower: vl[j],
                upper: vu[j],
            });
        }
    }

    let mut problem = LpProblem::new(c, a, rl, ru, vl, vu)
        .map_err(|err| MpsError::Syntax {
            line: 0,
            msg: err.to_string(),
        })?
        .with_objective_constant(obj_constant);
    if doc.obj_sense == ObjSense::Maximize {
        problem = problem.into_maximization();
    }
    Ok(MpsProblem {
        name: doc.name.clone(),
        problem,
        row_names,
        col_names: doc.columns.clone(),
        integer_columns: doc.integer_columns.clone(),
        warnings,
    })
}

/// Parses and builds in one go.
pub fn load_mps(path: impl AsRef<Path>) -> Result<MpsProblem, MpsError> {
    build_problem(&read_mps_file(path)?)
}

/// Writes `prob` as free-format MPS with generated names `R<i>` and `C<j>`.
/// Reading the text back with [`parse_mps`] and [`build_problem`] yields
/// the same problem.
pub fn to_free_mps(prob: &LpProblem, name: &str) -> String {
    use std::fmt::Write as _;
    let maximize = prob.sense == ObjSense::Maximize;
    let stated = |v: f64| if maximize { -v } else { v };
    let mut s = String::new();
    let _ = writeln!(s, "NAME {name}");
    if maximize {
        s.push_str("OBJSENSE\n    MAX\n");
    }
    s.push_str("ROWS\n N OBJ\n");
    let mut rhs = Vec::new();
    let mut ranges = Vec::new();
    for (i, (&l, &u)) in prob.row_lower.iter().zip(&prob.row_upper).enumerate() {
        let kind = match (l.is_finite(), u.is_finite()) {
            _ if l == u => {
                rhs.push((i, l));
                "E"
            }
            (true, true) => {
                rhs.push((i, u));
                ranges.push((i, u - l));
                "L"
            }
            (false, true) => {
                rhs.push((i, u));
                "L"
            }
            (true, false) => {
                rhs.push((i, l));
                "G"
            }
            (false, false) => {
                rhs.push((i, -MPS_INFINITY));
                "G"
            }
        };
        let _ = writeln!(s, " {kind} R{i}");
    }
    s.push_str("COLUMNS\n");
    for j in 0..prob.num_vars() {
        let c = stated(prob.c[j]);
        let mut empty = true;
        if c != 0.0 {
            let _ = writeln!(s, "    C{j} OBJ {c:?}");
            empty = false;
        }
        for (i, v) in prob.a.col(j) {
            let _ = writeln!(s, "    C{j} R{i} {v:?}");
            empty = false;
        }
        if empty {
            let _ = writeln!(s, "    C{j} OBJ 0");
        }
    }
    s.push_str("RHS\n");
    let constant = stated(prob.obj_constant);
    if constant != 0.0 {
        let _ = writeln!(s, "    RHS OBJ {:?}", -constant);
    }
    for (i, v) in rhs {
        let _ = writeln!(s, "    RHS R{i} {v:?}");
    }
    if !ranges.is_empty() {
        s.push_str("RANGES\n");
        for (i, v) in ranges {
            let _ = writeln!(s, "    RNG R{i} {v:?}");
        }
    }
    s.push_str("BOUNDS\n");
    for (j, (&l, &u)) in prob.var_lower.iter().zip(&prob.var_upper).enumerate() {
        if l == u {
            let _ = writeln!(s, " FX BND C{j} {l:?}");
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(s, " FR BND C{j}");
            continue;
        }
        if l == f64::NEG_INFINITY {
            let _ = writeln!(s, " MI BND C{j}");
        } else if l != 0.0 {
            let _ = writeln!(s, " LO BND C{j} {l:?}");
        }
        if u != f64::INFINITY {
            let _ = writeln!(s, " UP BND C{j} {u:?}");
        }
    }
    s.push_str("ENDATA\n");
    s
}
