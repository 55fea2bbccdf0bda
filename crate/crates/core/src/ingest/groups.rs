use super::IngestError;
use crate::{Pid, PidPair};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

/// One row of a group annotation file: a pedestrian and the other members of its group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupAnnotation {
    pub pid: Pid,
    pub group_size: usize,
    pub partner_ids: Vec<Pid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct AnnotationParse {
    pub annotations: Vec<GroupAnnotation>,
    pub skipped: Vec<SkippedRow>,
}

fn parse_group_row(line: &str) -> Result<GroupAnnotation, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let ints: Vec<Pid> = toks
        .iter()
        .map(|t| t.parse::<Pid>().map_err(|_| format!("non-integer token {t:?}")))
        .collect::<Result<_, _>>()?;
    if ints.len() < 2 {
        return Err("expected pid and group size".into());
    }
    let (pid, group_size) = (ints[0], ints[1] as usize);
    if group_size < 2 {
        return Err(format!("group size {group_size} < 2"));
    }
    if ints.len() != group_size + 1 {
        return Err(format!(
            "group size {group_size} needs {} tokens, found {}",
            group_size + 1,
            ints.len()
        ));
    }
    let partner_ids = ints[2..].to_vec();
    if partner_ids.contains(&pid) {
        return Err(format!("pid {pid} lists itself as partner"));
    }
    Ok(GroupAnnotation {
        pid,
        group_size,
        partner_ids,
    })
}

/// Parses space-separated `PID GROUP-SIZE PARTNER-ID...` rows.
///
/// Bad rows are skipped and reported; reciprocity between rows is not checked
/// here (see [`find_asymmetries`]).
pub fn parse_group_annotations<R: Read>(reader: R) -> Result<AnnotationParse, IngestError> {
    let mut out = AnnotationParse::default();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_group_row(trimmed) {
            Ok(a) => out.annotations.push(a),
            Err(reason) => {
                log::warn!("group annotations line {}: {}", i + 1, reason);
                out.skipped.push(SkippedRow { line: i + 1, reason });
            }
        }
    }
    Ok(out)
}

/// Ground-truth pairs: `{a, b}` whenever either row lists the other.
pub fn annotation_pair_set(annotations: &[GroupAnnotation]) -> BTreeSet<PidPair> {
    annotations
        .iter()
        .flat_map(|a| a.partner_ids.iter().filter_map(move |&p| PidPair::new(a.pid, p)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Asymmetry {
    /// `pid` lists `partner`, but `partner` has no row at all.
    MissingRow { pid: Pid, partner: Pid },
    /// `partner` has a row that does not list `pid`.
    NotReciprocated { pid: Pid, partner: Pid },
    /// Rows of the same group disagree on its size.
    SizeMismatch { pid: Pid, partner: Pid },
}

/// Reports rows whose partner relationships are not mirrored by the partner's row.
pub fn find_asymmetries(annotations: &[GroupAnnotation]) -> Vec<Asymmetry> {
    let by_pid: BTreeMap<Pid, &GroupAnnotation> = annotations.iter().map(|a| (a.pid, a)).collect();
    let mut out = Vec::new();
    for a in annotations {
        for &partner in &a.partner_ids {
            match by_pid.get(&partner) {
                None => out.push(Asymmetry::MissingRow { pid: a.pid, partner }),
                Some(b) if !b.partner_ids.contains(&a.pid) => {
                    out.push(Asymmetry::NotReciprocated { pid: a.pid, partner })
                }
                Some(b) if b.group_size != a.group_size => {
                    out.push(Asymmetry::SizeMismatch { pid: a.pid, partner })
                }
                Some(_) => {}
            }
        }
    }
    out
}
