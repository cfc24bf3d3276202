//! Ordinal dataset CSV: one header cell per column as `name:levels`,
//! then 0-based integer levels.

use std::path::Path;

use oce::simulate::OrdinalDataset;
use oce::{Error, Result};

pub fn write_dataset(path: &Path, data: &OrdinalDataset, labels: Option<&[String]>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))?;
    let header: Vec<String> = (1..=data.cols())
        .map(|m| {
            let name = labels
                .and_then(|l| l.get(m - 1).cloned())
                .unwrap_or_else(|| format!("X{m}"));
            format!("{name}:{}", data.level_counts()[m - 1])
        })
        .collect();
    writer
        .write_record(&header)
        .and_then(|_| {
            for r in 0..data.rows() {
                let row: Vec<String> = data.row(r).iter().map(|c| c.to_string()).collect();
                writer.write_record(&row)?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<(OrdinalDataset, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut labels = Vec::new();
    let mut level_counts = Vec::new();
    for cell in reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?
        .iter()
    {
        let (name, levels) = cell.rsplit_once(':').ok_or_else(|| {
            Error::Data(format!(
                "{}: header cell {cell:?} is not of the form name:levels",
                path.display()
            ))
        })?;
        let levels: usize = levels.parse().map_err(|_| {
            Error::Data(format!(
                "{}: level count in header cell {cell:?} is not an integer",
                path.display()
            ))
        })?;
        labels.push(name.to_string());
        level_counts.push(levels);
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::Data(format!("{}: row {idx}: {e}", path.display())))?;
        let row: Vec<u32> = record
            .iter()
            .map(|cell| {
                cell.trim().parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: row {idx}: cell {cell:?} is not an integer level",
                        path.display()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok((OrdinalDataset::new(rows, level_counts)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let data = OrdinalDataset::new(
            vec![vec![0, 2, 1], vec![1, 0, 1], vec![0, 3, 0]],
            vec![2, 4, 2],
        )
        .unwrap();
        let dir = std::env::temp_dir().join("oce-dataset-file-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("d.csv");
        write_dataset(&path, &data, None).unwrap();
        let (back, labels) = read_dataset(&path).unwrap();
        assert_eq!(back, data);
        assert_eq!(labels, vec!["X1", "X2", "X3"]);
    }

    #[test]
    fn rejects_malformed_headers() {
        let dir = std::env::temp_dir().join("oce-dataset-file-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "X1,X2\n0,1\n").unwrap();
        assert!(read_dataset(&path).is_err());
        std::fs::write(&path, "X1:2,X2:2\n0,5\n").unwrap();
        assert!(read_dataset(&path).is_err());
    }
}
