//! File formats: the plain-text train file, CSV tables, and JSON sidecars.
//!
//! Train files are UTF-8 text. The first line is `#domain <t_start> <t_end>`;
//! every following line is one train as space-separated ascending times, with
//! an optional trailing `|<label>` token. An empty line is an empty train.
//! Exactly tied event times are perturbed forward by 1e-9 at ingestion and
//! the perturbation count is reported.

use crate::error::{CliError, CliResult};
use serde::Serialize;
use spikedepth_core::{SpikeTrain, TimeDomain, TrainSample};
use std::fs;
use std::path::Path;

/// Smallest separation injected between tied event times.
pub const TIE_PERTURBATION: f64 = 1e-9;

pub struct LoadedTrains {
    pub sample: TrainSample,
    /// Events nudged forward to break exact ties.
    pub perturbed_events: usize,
}

pub fn write_train_file(path: &Path, sample: &TrainSample) -> CliResult<()> {
    let mut out = String::new();
    let domain = sample.domain();
    out.push_str(&format!("#domain {} {}\n", domain.start(), domain.end()));
    for (train, label) in sample.trains().iter().zip(sample.labels()) {
        let times: Vec<String> = train.times().iter().map(|t| format!("{t}")).collect();
        out.push_str(&times.join(" "));
        if let Some(l) = label {
            out.push('|');
            out.push_str(l);
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_train_file(path: &Path) -> CliResult<LoadedTrains> {
    let text = fs::read_to_string(path)?;
    parse_train_file(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_train_file(text: &str) -> Result<LoadedTrains, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty train file")?;
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    if header_fields.len() != 3 || header_fields[0] != "#domain" {
        return Err("first line must be '#domain <t_start> <t_end>'".into());
    }
    let t_start: f64 = header_fields[1]
        .parse()
        .map_err(|_| "unparseable domain start")?;
    let t_end: f64 = header_fields[2]
        .parse()
        .map_err(|_| "unparseable domain end")?;
    let domain = TimeDomain::new(t_start, t_end).map_err(|e| e.to_string())?;

    let mut trains = Vec::new();
    let mut labels = Vec::new();
    let mut perturbed = 0usize;
    for (lineno, raw) in lines.enumerate() {
        let line = raw.trim_end_matches('\r');
        let (times_part, label) = match line.split_once('|') {
            Some((t, l)) => {
                if l.trim().is_empty() {
                    return Err(format!("line {}: empty label after '|'", lineno + 2));
                }
                (t, Some(l.trim().to_string()))
            }
            None => (line, None),
        };
        let mut times: Vec<f64> = Vec::new();
        for tok in times_part.split_whitespace() {
            let t: f64 = tok
                .parse()
                .map_err(|_| format!("line {}: unparseable time '{tok}'", lineno + 2))?;
            times.push(t);
        }
        // Break exact ties with a forward nudge, cascading so the result is
        // strictly increasing. Descending order is judged against the input
        // values, not the nudged ones, so a run of equal times stays legal.
        let mut prev_input = f64::NEG_INFINITY;
        for i in 0..times.len() {
            let input = times[i];
            if input < prev_input {
                return Err(format!(
                    "line {}: times not ascending ({input} after {prev_input})",
                    lineno + 2,
                ));
            }
            if i > 0 && times[i] <= times[i - 1] {
                times[i] = times[i - 1] + TIE_PERTURBATION;
                perturbed += 1;
            }
            prev_input = input;
        }
        let train = SpikeTrain::new(times, domain)
            .map_err(|e| format!("line {}: {e}", lineno + 2))?;
        trains.push(train);
        labels.push(label);
    }
    let sample = TrainSample::with_labels(trains, labels).map_err(|e| e.to_string())?;
    Ok(LoadedTrains {
        sample,
        perturbed_events: perturbed,
    })
}

/// Serialize rows to CSV with a fixed column order given by the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// JSON sidecar carrying full configuration and seeds.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_labels_and_empty_trains() {
        let domain = TimeDomain::unit();
        let trains = vec![
            SpikeTrain::new(vec![0.1, 0.25, 0.7], domain).unwrap(),
            SpikeTrain::empty(domain),
            SpikeTrain::new(vec![0.5], domain).unwrap(),
        ];
        let labels = vec![Some("a".to_string()), None, Some("outlier".to_string())];
        let sample = TrainSample::with_labels(trains, labels).unwrap();
        let dir = std::env::temp_dir().join("spikedepth_fmt_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trains.txt");
        write_train_file(&path, &sample).unwrap();
        let loaded = read_train_file(&path).unwrap();
        assert_eq!(loaded.perturbed_events, 0);
        assert_eq!(loaded.sample.len(), 3);
        for (a, b) in loaded.sample.trains().iter().zip(sample.trains()) {
            assert_eq!(a.times(), b.times());
        }
        assert_eq!(loaded.sample.labels(), sample.labels());
    }

    #[test]
    fn perturbs_ties_and_reports_count() {
        let text = "#domain 0 1\n0.2 0.2 0.2 0.5\n";
        let loaded = parse_train_file(text).unwrap();
        assert_eq!(loaded.perturbed_events, 2);
        let times = loaded.sample.trains()[0].times();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!((times[1] - 0.2 - TIE_PERTURBATION).abs() < 1e-15);
    }

    #[test]
    fn rejects_descending_times_and_bad_headers() {
        assert!(parse_train_file("#domain 0 1\n0.5 0.2\n").is_err());
        assert!(parse_train_file("0.1 0.2\n").is_err());
        assert!(parse_train_file("#domain 1 0\n").is_err());
        assert!(parse_train_file("#domain 0 1\n0.5|\n").is_err());
    }
}
