//! Width dataset files: `# key=value` header lines, then
//! `x,log_S,width,error_exponent` rows.

use crate::error::{IoContext, PipelineError, Result};
use btzone::asymptotics::{DataNode, WidthDataset};
use btzone::maps::MapFamily;
use btzone::numerics::Precision;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const COLUMNS: &str = "x,log_S,width,error_exponent";
pub const DATASET_FILE: &str = "widths.csv";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub x: String,
    #[serde(rename = "log_S")]
    pub log_s: String,
    pub width: String,
    pub error_exponent: String,
}

impl DatasetRow {
    pub fn line(&self) -> String {
        format!("{},{},{},{}\n", self.x, self.log_s, self.width, self.error_exponent)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetFile {
    pub meta: Vec<(String, String)>,
    pub rows: Vec<DatasetRow>,
}

impl DatasetFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str(COLUMNS);
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        let mut s = self.header();
        for r in &self.rows {
            s.push_str(&r.line());
        }
        s
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut meta = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.strip_prefix('#') else { break };
            let (k, v) = rest.trim().split_once('=').ok_or_else(|| PipelineError::Format {
                path: origin.into(),
                line: i + 1,
                msg: "header line is not key=value".into(),
            })?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| bad(origin, 0, e))?.clone();
        if headers.iter().collect::<Vec<_>>().join(",") != COLUMNS {
            return Err(PipelineError::Format { path: origin.into(), line: meta.len() + 1, msg: format!("expected columns {COLUMNS}") });
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            rows.push(rec.map_err(|e: csv::Error| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                bad(origin, line, e)
            })?);
        }
        Ok(Self { meta, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        Self::parse(&text, path)
    }

    /// Loads a file that may end in a partially written row; the partial row is
    /// cut from disk before parsing.
    pub fn load_for_resume(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        if keep < text.len() {
            fs::write(path, &text[..keep]).at(path)?;
        }
        Self::parse(&text[..keep], path)
    }

    /// Atomic rewrite through a sibling temporary file.
    pub fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        fs::write(&tmp, self.render()).at(&tmp)?;
        fs::rename(&tmp, path).at(path)
    }

    pub fn family(&self) -> Result<MapFamily> {
        let ctx = self.precision()?;
        let name = self.get("family").ok_or_else(|| missing("family"))?;
        let gamma = self.get("gamma").map(|g| ctx.parse(g)).transpose()?;
        Ok(MapFamily::from_name(name, gamma)?)
    }

    /// Working precision of the least precise node.
    pub fn precision(&self) -> Result<Precision> {
        let num = |key: &str| -> Result<u32> {
            self.get(key)
                .ok_or_else(|| missing(key))?
                .parse()
                .map_err(|_| PipelineError::Config(format!("header {key} is not an integer")))
        };
        Ok(Precision::new(num("digits")?, num("guard")?)?)
    }

    pub fn widths(&self) -> Result<WidthDataset> {
        let ctx = self.precision()?;
        let nodes = self
            .rows
            .iter()
            .map(|r| Ok(DataNode { x: ctx.parse(&r.x)?, log_s: ctx.parse(&r.log_s)? }))
            .collect::<Result<Vec<_>>>()?;
        let meta: BTreeMap<String, String> = self.meta.iter().cloned().collect();
        let data = WidthDataset { meta, nodes };
        data.validate()?;
        Ok(data)
    }
}

fn bad(path: &Path, line: usize, e: csv::Error) -> PipelineError {
    PipelineError::Format { path: path.into(), line, msg: e.to_string() }
}

fn missing(key: &str) -> PipelineError {
    PipelineError::Config(format!("dataset header has no {key} entry"))
}

pub(crate) fn append(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::OpenOptions::new().append(true).create(true).open(path).at(path)?;
    f.write_all(text.as_bytes()).at(path)?;
    f.flush().at(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DatasetFile {
        DatasetFile {
            meta: vec![
                ("family".into(), "bogdanov".into()),
                ("gamma".into(), "3".into()),
                ("digits".into(), "40".into()),
                ("guard".into(), "10".into()),
            ],
            rows: vec![
                DatasetRow { x: "0.1".into(), log_s: "57.5".into(), width: "1e-60".into(), error_exponent: "-60.0".into() },
                DatasetRow { x: "0.2".into(), log_s: "55.25".into(), width: "2e-30".into(), error_exponent: "-29.7".into() },
            ],
        }
    }

    #[test]
    fn render_parse_identity() {
        let f = sample();
        let text = f.render();
        assert!(text.starts_with("# family=bogdanov\n"));
        let back = DatasetFile::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.render(), text);
        let w = back.widths().unwrap();
        assert_eq!(w.nodes.len(), 2);
        assert_eq!(back.family().unwrap().name(), "bogdanov");
    }

    #[test]
    fn empty_dataset_is_header_only() {
        let f = DatasetFile { rows: vec![], ..sample() };
        let back = DatasetFile::parse(&f.render(), Path::new("mem")).unwrap();
        assert!(back.rows.is_empty());
    }

    #[test]
    fn partial_row_is_dropped_on_resume() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(DATASET_FILE);
        let mut text = sample().render();
        text.push_str("0.3,54.");
        fs::write(&p, &text).unwrap();
        let f = DatasetFile::load_for_resume(&p).unwrap();
        assert_eq!(f.rows.len(), 2);
        assert_eq!(fs::read_to_string(&p).unwrap(), sample().render());
    }

    #[test]
    fn malformed_rows_name_the_file() {
        let text = "# family=henon\nx,log_S,width,error_exponent\n0.1,2\n";
        let err = DatasetFile::parse(text, Path::new("bad.csv")).unwrap_err().to_string();
        assert!(err.starts_with("bad.csv:"), "{err}");
        assert!(DatasetFile::parse("# family=henon\na,b\n", Path::new("x")).is_err());
    }
}
