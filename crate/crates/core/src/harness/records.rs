//! Result records, their CSV/JSON forms, and the append-only resume log.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use crate::error::{Error, Result};

/// One measured quantity of one experiment task.
///
/// Column order of the CSV form follows the field order. `instance` is the
/// instance index within a cell, or a grid index for per-cell experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub instance: usize,
    pub metric: String,
    pub value: f64,
    /// Seconds spent on the task; left empty unless requested.
    pub wall_time_s: Option<f64>,
}

/// Identity of the task that produced a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaskKey {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub instance: usize,
}

impl ResultRecord {
    pub fn task(&self) -> TaskKey {
        TaskKey { experiment: self.experiment, n: self.n, k: self.k, m: self.m, instance: self.instance }
    }

    fn check(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite value for metric {:?}", self.metric)));
        }
        if self.metric.is_empty() || self.metric.contains([',', '"', '\n']) {
            return Err(Error::InvalidParameter(format!("bad metric name {:?}", self.metric)));
        }
        Ok(())
    }
}

/// Canonical order: by task, then metric name.
pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.task().cmp(&b.task()).then_with(|| a.metric.cmp(&b.metric)));
}

/// Keeps the last record of every `(task, metric)` pair, in canonical order.
pub fn dedup_records(records: Vec<ResultRecord>) -> Vec<ResultRecord> {
    let mut map: BTreeMap<(TaskKey, String), ResultRecord> = BTreeMap::new();
    for r in records {
        map.insert((r.task(), r.metric.clone()), r);
    }
    map.into_values().collect()
}

fn nonempty(records: &[ResultRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    records.iter().try_for_each(ResultRecord::check)
}

/// CSV text with a header row.
pub fn records_to_csv(records: &[ResultRecord]) -> Result<String> {
    nonempty(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_csv(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    let text = records_to_csv(records)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

/// JSON array of records.
pub fn write_json(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    nonempty(records)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, records)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

const LOG_HEADER: &str = "experiment,n,k,m,seed,instance,metric,value,wall_time_s\n";

/// Append-only CSV log of finished tasks. Each task's records go out in a
/// single write followed by a flush; a torn trailing line left by an
/// interrupted run is cut off when the log is reopened.
#[derive(Debug)]
pub struct RecordLog {
    file: File,
}

impl RecordLog {
    /// Opens (creating if needed) the log and returns the records it holds.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<ResultRecord>)> {
        let path = path.as_ref();
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let complete = match text.rfind('\n') {
            Some(i) => i + 1,
            None => 0,
        };
        text.truncate(complete);
        if text.is_empty() {
            file.set_len(0)?;
            file.seek(SeekFrom::Start(0))?;
            file.write_all(LOG_HEADER.as_bytes())?;
            file.flush()?;
            return Ok((Self { file }, Vec::new()));
        }
        if !text.starts_with(LOG_HEADER) {
            return Err(Error::Config(format!("{} is not a record log", path.display())));
        }
        file.set_len(complete as u64)?;
        file.seek(SeekFrom::End(0))?;
        Ok((Self { file }, parse_csv(&text)?))
    }

    /// Appends one task's records.
    pub fn append(&mut self, records: &[ResultRecord]) -> Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        records.iter().try_for_each(ResultRecord::check)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.file.write_all(&bytes)?;
        self.file.flush()?;
        Ok(())
    }
}

/// Tasks in `records` that carry every metric in `expected`.
pub fn completed_tasks(records: &[ResultRecord], expected: &[&str]) -> BTreeSet<TaskKey> {
    let mut seen: BTreeMap<TaskKey, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        seen.entry(r.task()).or_default().insert(r.metric.as_str());
    }
    seen.into_iter()
        .filter(|(_, ms)| ms.contains(super::FAILED_METRIC) || expected.iter().all(|e| ms.contains(e)))
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: usize, metric: &str, value: f64) -> ResultRecord {
        ResultRecord {
            experiment: ExperimentKind::FigQsDensity,
            n: 12,
            k: 3,
            m: 144,
            seed: 0xDEAD_BEEF_0123_4567,
            instance,
            metric: metric.into(),
            value,
            wall_time_s: None,
        }
    }

    #[test]
    fn csv_round_trips_exactly() {
        let mut recs = vec![rec(0, "success", 0.1 + 0.2), rec(1, "success", 1e-300), rec(1, "solutions", 3.0)];
        recs[2].wall_time_s = Some(0.125);
        let text = records_to_csv(&recs).unwrap();
        assert!(text.starts_with(LOG_HEADER));
        assert_eq!(parse_csv(&text).unwrap(), recs);
    }

    #[test]
    fn json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let recs = vec![rec(0, "success", 0.75), rec(3, "solutions", 12.0)];
        write_json(&recs, &path).unwrap();
        assert_eq!(read_json(&path).unwrap(), recs);
    }

    #[test]
    fn empty_or_non_finite_sets_are_rejected_without_writing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        assert!(write_csv(&[], &path).is_err());
        assert!(write_csv(&[rec(0, "x", f64::NAN)], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn log_survives_torn_lines_and_reports_completed_tasks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.log.csv");
        {
            let (mut log, old) = RecordLog::open(&path).unwrap();
            assert!(old.is_empty());
            log.append(&[rec(0, "success", 0.5), rec(0, "solutions", 2.0)]).unwrap();
            log.append(&[rec(1, "success", 0.25)]).unwrap();
        }
        // Simulate a crash in the middle of a write.
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"fig_qs_density,12,3,144,1,2,succ").unwrap();
        drop(f);
        let (mut log, old) = RecordLog::open(&path).unwrap();
        assert_eq!(old.len(), 3);
        let done = completed_tasks(&old, &["success", "solutions"]);
        assert_eq!(done.len(), 1);
        assert_eq!(done.iter().next().unwrap().instance, 0);
        log.append(&[rec(2, "success", 1.0)]).unwrap();
        drop(log);
        let (_, again) = RecordLog::open(&path).unwrap();
        assert_eq!(again.len(), 4);
    }

    #[test]
    fn dedup_keeps_the_latest_value_in_canonical_order() {
        let recs = vec![rec(1, "success", 0.1), rec(0, "success", 0.2), rec(1, "success", 0.3)];
        let out = dedup_records(recs);
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].instance, out[1].instance, out[1].value), (0, 1, 0.3));
    }
}
