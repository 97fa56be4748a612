use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};
use crate::labels::{Label, Labeling};

/// Delimited text layouts accepted by [`Dataset::from_reader`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Comma separated.
    Csv,
    /// Tab or whitespace separated (also covers space-aligned files).
    Tsv,
}

impl Format {
    /// Guess from a file extension; anything that is not `.csv` is read as
    /// whitespace separated.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Tsv,
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Format::Csv => line.split(',').map(str::trim).collect(),
            Format::Tsv => line.split_whitespace().collect(),
        }
    }
}

/// Immutable point database. Point ids are positions `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<Point2D>,
    truth: Option<Labeling>,
}

impl Dataset {
    pub fn new(points: Vec<Point2D>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("point {i} is not finite")));
        }
        Ok(Self {
            points,
            truth: None,
        })
    }

    pub fn with_labels(points: Vec<Point2D>, labels: Labeling) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch(points.len(), labels.len()));
        }
        let mut ds = Self::new(points)?;
        ds.truth = Some(labels);
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn point(&self, id: usize) -> Point2D {
        self.points[id]
    }

    pub fn truth(&self) -> Option<&Labeling> {
        self.truth.as_ref()
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::bounding(&self.points).expect("dataset is non-empty")
    }

    /// Parse rows of `x,y` or `x,y,label`. Blank lines and `#` comments are
    /// skipped, as is a single leading header row of non-numeric fields.
    pub fn from_reader<R: Read>(reader: R, format: Format) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels: Vec<Label> = Vec::new();
        let mut labelled: Option<bool> = None;
        let mut header_seen = false;

        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let row = i + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields = format.split(trimmed);
            if points.is_empty() && !header_seen && fields.iter().all(|f| f.parse::<f64>().is_err())
            {
                header_seen = true;
                continue;
            }
            let parse_err = |message: String| Error::Parse { row, message };
            if fields.len() != 2 && fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 2 or 3 fields, found {}",
                    fields.len()
                )));
            }
            let has_label = fields.len() == 3;
            match labelled {
                None => labelled = Some(has_label),
                Some(l) if l != has_label => {
                    return Err(parse_err("inconsistent number of fields".into()));
                }
                _ => {}
            }
            let coord = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| parse_err(format!("`{s}` is not a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(format!("`{s}` is not finite")))
                }
            };
            points.push(Point2D::new(coord(fields[0])?, coord(fields[1])?));
            if has_label {
                let raw: i64 = fields[2]
                    .parse()
                    .or_else(|_| fields[2].parse::<f64>().map(|v| v as i64))
                    .map_err(|_| parse_err(format!("`{}` is not a label", fields[2])))?;
                labels.push(Label::from(raw));
            }
        }

        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if labelled == Some(true) {
            Self::with_labels(points, Labeling::new(labels))
        } else {
            Self::new(points)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_reader(File::open(path)?, Format::from_path(path))
    }

    /// Write `x,y[,label]` rows (no header).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, p) in self.points.iter().enumerate() {
            match &self.truth {
                Some(t) => writeln!(w, "{},{},{}", p.x, p.y, t[id])?,
                None => writeln!(w, "{},{}", p.x, p.y)?,
            }
        }
        Ok(())
    }

    /// Append points (labelled noise when the dataset carries labels).
    pub fn extended(&self, extra: &[Point2D]) -> Result<Dataset> {
        let mut points = self.points.clone();
        points.extend_from_slice(extra);
        match &self.truth {
            Some(t) => {
                let mut labels = t.clone().into_inner();
                labels.extend(std::iter::repeat_n(Label::Noise, extra.len()));
                Dataset::with_labels(points, Labeling::new(labels))
            }
            None => Dataset::new(points),
        }
    }
}
