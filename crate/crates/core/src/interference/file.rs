//! CSV matrix files. The first row and first column carry `src>dst` tunnel
//! labels in canonical order; the corner cell is `tunnel`.

use crate::graph::{NodeId, TunnelIndex};

use super::{InterferenceError, InterferenceMatrix};

pub fn write_matrix_csv(f: &InterferenceMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels: Vec<String> = (0..f.len()).map(|t| f.index().label(t)).collect();
    let mut header = vec!["tunnel".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (k, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..f.len()).map(|l| if f.get(k, l) { "1" } else { "0" }.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn parse_label(s: &str) -> Result<(NodeId, NodeId), InterferenceError> {
    let bad = || InterferenceError::File(format!("bad tunnel label {s:?}"));
    let (a, b) = s.trim().split_once('>').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    Ok((NodeId(a), NodeId(b)))
}

pub fn parse_matrix_csv(text: &str) -> Result<InterferenceMatrix, InterferenceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec.map_err(|e| InterferenceError::File(e.to_string()))?);
    }
    let header = records
        .first()
        .ok_or_else(|| InterferenceError::File("empty file".into()))?;
    let labels = header
        .iter()
        .skip(1)
        .map(parse_label)
        .collect::<Result<Vec<_>, _>>()?;
    let mut overlays: Vec<NodeId> = labels.iter().flat_map(|&(a, b)| [a, b]).collect();
    overlays.sort();
    overlays.dedup();
    let index = TunnelIndex::new(overlays);
    if labels.len() != index.len() {
        return Err(InterferenceError::File(format!(
            "{} labels, expected {} for {} overlays",
            labels.len(),
            index.len(),
            index.overlay_count()
        )));
    }
    for (t, &(s, d)) in labels.iter().enumerate() {
        if index.index(s, d) != Some(t) {
            return Err(InterferenceError::File(format!(
                "column {} label {s}>{d} is not in canonical order",
                t + 1
            )));
        }
    }
    if records.len() != labels.len() + 1 {
        return Err(InterferenceError::File(format!(
            "{} rows, expected {}",
            records.len() - 1,
            labels.len()
        )));
    }
    let mut cells = vec![vec![false; labels.len()]; labels.len()];
    for (k, rec) in records.iter().skip(1).enumerate() {
        if rec.len() != labels.len() + 1 {
            return Err(InterferenceError::File(format!("row {} has {} cells", k + 1, rec.len())));
        }
        if parse_label(&rec[0])? != labels[k] {
            return Err(InterferenceError::File(format!("row {} label mismatch", k + 1)));
        }
        for (l, cell) in rec.iter().skip(1).enumerate() {
            cells[k][l] = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(InterferenceError::File(format!(
                        "row {} column {}: expected 0 or 1, got {other:?}",
                        k + 1,
                        l + 1
                    )))
                }
            };
        }
    }
    let mut f = InterferenceMatrix::identity(index);
    for k in 0..labels.len() {
        for l in k + 1..labels.len() {
            if cells[k][l] != cells[l][k] {
                return Err(InterferenceError::Asymmetric(f.index().label(k), f.index().label(l)));
            }
            f.set(k, l, cells[k][l]);
        }
    }
    Ok(f)
}
