use std::fmt::Write as _;

use super::{Clause, Cnf, Literal};
use crate::error::CnfError;

const PROVENANCE_TAG: &str = "provenance ";

/// Non-fatal irregularities found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimacsWarning {
    ClauseCountMismatch { declared: usize, found: usize },
    UnterminatedLastClause,
}

/// Parses DIMACS CNF. Clause count mismatches are tolerated and logged.
pub fn parse_dimacs(input: &str) -> Result<Cnf, CnfError> {
    let (cnf, warnings) = parse_dimacs_detailed(input)?;
    for w in warnings {
        log::warn!("dimacs: {w:?}");
    }
    Ok(cnf)
}

pub fn parse_dimacs_detailed(input: &str) -> Result<(Cnf, Vec<DimacsWarning>), CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut provenance = String::new();
    let mut comments = Vec::new();
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut warnings = Vec::new();

    'lines: for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let text = rest.strip_prefix(' ').unwrap_or(rest);
                match text.strip_prefix(PROVENANCE_TAG) {
                    Some(tag) if provenance.is_empty() => provenance = tag.to_string(),
                    _ => comments.push(text.to_string()),
                }
                continue;
            }
        }
        if line.starts_with('%') {
            // SATLIB end marker; anything after it is padding.
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let n = fields[2]
                .parse::<u32>()
                .map_err(|_| parse_err(line_no, "bad variable count"))?;
            let m = fields[3]
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(CnfError::MissingHeader);
        };
        for tok in line.split_whitespace() {
            if tok == "%" {
                break 'lines;
            }
            let value: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, &format!("bad literal `{tok}`")))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(parse_err(line_no, "literal 0 with no preceding literals"));
                }
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(parse_err(
                    line_no,
                    &format!("variable {} exceeds declared count {num_vars}", value.abs()),
                ));
            }
            current.push(Literal::from_dimacs(value as i32).expect("nonzero"));
        }
    }

    let (num_vars, declared) = header.ok_or(CnfError::MissingHeader)?;
    if !current.is_empty() {
        warnings.push(DimacsWarning::UnterminatedLastClause);
        clauses.push(Clause::new(current));
    }
    if declared != clauses.len() {
        warnings.push(DimacsWarning::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    let mut cnf = Cnf::new(num_vars, clauses)?;
    cnf.provenance = provenance;
    cnf.comments = comments;
    Ok((cnf, warnings))
}

fn parse_err(line: usize, message: &str) -> CnfError {
    CnfError::Parse {
        line,
        message: message.to_string(),
    }
}

/// Serializes to DIMACS with `\n` line endings. Provenance and comments are
/// written as leading `c` lines so that parsing restores them.
pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    if !cnf.provenance.is_empty() {
        let _ = writeln!(out, "c {PROVENANCE_TAG}{}", cnf.provenance);
    }
    for c in &cnf.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.num_clauses());
    for clause in cnf.clauses() {
        for l in clause.lits() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
