//! Dataset files: JSON-lines uncertain datasets and CSV certain datasets.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, UnnError};
use crate::object::{Dataset, ObjectRecord, UncertainObject};
use crate::point::{check_dims, Point};

/// Parses JSON-lines object records. Blank lines are skipped; labels are optional.
pub fn read_objects<R: Read>(reader: R) -> Result<Vec<UncertainObject>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| UnnError::Parse { line: i + 1, msg };
        let record: ObjectRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        out.push(UncertainObject::try_from(record).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(out)
}

pub fn write_objects<'a, W: Write>(
    writer: W,
    objects: impl IntoIterator<Item = &'a UncertainObject>,
) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for o in objects {
        serde_json::to_writer(&mut w, &ObjectRecord::from(o)).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_jsonl(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::new(read_objects(File::open(path)?)?)
}

pub fn write_dataset_jsonl(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    write_objects(File::create(path)?, dataset.objects())
}

/// Certain labeled points, as read from a numeric CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CertainDataset {
    pub features: Vec<String>,
    pub points: Vec<Point>,
    pub labels: Vec<String>,
}

impl CertainDataset {
    pub fn new(points: Vec<Point>, labels: Vec<String>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(UnnError::InvalidDataset(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        let dim = points.first().map_or(0, Point::dim);
        for p in &points {
            check_dims(dim, p.dim())?;
        }
        let features = (0..dim).map(|j| format!("x{j}")).collect();
        Ok(CertainDataset { features, points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Population standard deviation of each coordinate.
    pub fn column_std(&self) -> Vec<f64> {
        let n = self.points.len() as f64;
        (0..self.dim())
            .map(|j| {
                let mean = self.points.iter().map(|p| p.coords()[j]).sum::<f64>() / n;
                let var = self
                    .points
                    .iter()
                    .map(|p| (p.coords()[j] - mean).powi(2))
                    .sum::<f64>()
                    / n;
                var.sqrt()
            })
            .collect()
    }

    /// Point-mass dataset with the same points and labels.
    pub fn to_certain_objects(&self) -> Vec<UncertainObject> {
        self.points
            .iter()
            .zip(&self.labels)
            .map(|(p, l)| UncertainObject::certain(p.clone(), Some(l.clone())))
            .collect()
    }
}

/// Reads a CSV with a header row, numeric feature columns and a final
/// `label` column. With `require_label = false` a missing `label` column is
/// allowed and labels come back empty.
pub fn read_certain_csv<R: Read>(reader: R, require_label: bool) -> Result<CertainDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let has_label = header.last().is_some_and(|h| h == "label");
    if require_label && !has_label {
        return Err(UnnError::Parse { line: 1, msg: "last column must be `label`".into() });
    }
    let n_features = if has_label { header.len() - 1 } else { header.len() };
    if n_features == 0 {
        return Err(UnnError::Parse { line: 1, msg: "no feature columns".into() });
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| UnnError::Parse { line, msg: e.to_string() })?;
        if record.len() != header.len() {
            return Err(UnnError::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let coords = record
            .iter()
            .take(n_features)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| UnnError::Parse { line, msg: format!("not a number: `{f}`") })
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(Point::new(coords).map_err(|e| UnnError::Parse { line, msg: e.to_string() })?);
        labels.push(if has_label { record[n_features].to_string() } else { String::new() });
    }
    Ok(CertainDataset { features: header[..n_features].to_vec(), points, labels })
}

pub fn write_certain_csv<W: Write>(writer: W, data: &CertainDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = data.features.clone();
    header.push("label".into());
    w.write_record(&header)?;
    for (p, l) in data.points.iter().zip(&data.labels) {
        let mut row: Vec<String> = p.coords().iter().map(|x| x.to_string()).collect();
        row.push(l.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
