use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub question: String,
    pub gold_answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// A JSON array of HotPotQA records (`_id`, `question`, `answer`).
    HotpotJson,
    /// One `{"id", "question", "answer"}` object per line.
    SimpleJsonl,
}

impl DatasetFormat {
    /// `.jsonl` files are simple-jsonl, everything else hotpot-json.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => DatasetFormat::SimpleJsonl,
            _ => DatasetFormat::HotpotJson,
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hotpot-json" => Ok(DatasetFormat::HotpotJson),
            "simple-jsonl" => Ok(DatasetFormat::SimpleJsonl),
            other => Err(HarnessError::InvalidInput(format!("unknown dataset format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub records: Vec<TaskRecord>,
    /// Records dropped for an empty question or answer.
    pub skipped: usize,
}

fn text_field(value: &Value, keys: &[&str]) -> String {
    keys.iter()
        .find_map(|k| value.get(*k))
        .map(|v| match v {
            Value::String(s) => s.trim().to_string(),
            Value::Null => String::new(),
            other => other.to_string(),
        })
        .unwrap_or_default()
}

fn to_record(value: &Value, fallback_id: usize) -> Option<TaskRecord> {
    let question = text_field(value, &["question"]);
    let gold_answer = text_field(value, &["answer", "gold_answer"]);
    if question.is_empty() || gold_answer.is_empty() {
        return None;
    }
    let mut id = text_field(value, &["_id", "id"]);
    if id.is_empty() {
        id = format!("task-{fallback_id}");
    }
    Some(TaskRecord { id, question, gold_answer })
}

pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<Dataset, HarnessError> {
    let format_error = |e: serde_json::Error, line: usize| HarnessError::DatasetFormat {
        line,
        column: e.column(),
        message: e.to_string(),
    };
    let mut values = Vec::new();
    match format {
        DatasetFormat::HotpotJson => {
            let parsed: Vec<Value> = serde_json::from_str(text).map_err(|e| {
                let line = e.line();
                format_error(e, line)
            })?;
            values.extend(parsed);
        }
        DatasetFormat::SimpleJsonl => {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let value: Value = serde_json::from_str(line).map_err(|e| format_error(e, i + 1))?;
                if !value.is_object() {
                    return Err(HarnessError::DatasetFormat {
                        line: i + 1,
                        column: 1,
                        message: "expected a JSON object".into(),
                    });
                }
                values.push(value);
            }
        }
    }
    let total = values.len();
    let records: Vec<TaskRecord> = values.iter().enumerate().filter_map(|(i, v)| to_record(v, i + 1)).collect();
    let skipped = total - records.len();
    if skipped > 0 {
        warn!("skipped {skipped} dataset records with an empty question or answer");
    }
    Ok(Dataset { records, skipped })
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    parse_dataset(&text, format)
}

/// Seeded sample without replacement. The same records, size and seed always
/// give the same tasks in the same order.
pub fn sample_tasks(records: &[TaskRecord], n: usize, seed: u64) -> Result<Vec<TaskRecord>, HarnessError> {
    if n > records.len() {
        return Err(HarnessError::InvalidInput(format!("cannot sample {n} tasks from a dataset of {}", records.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, records.len(), n).into_iter().map(|i| records[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn records(n: usize) -> Vec<TaskRecord> {
        (0..n)
            .map(|i| TaskRecord { id: format!("t{i}"), question: format!("q{i}?"), gold_answer: format!("a{i}") })
            .collect()
    }

    #[test]
    fn simple_jsonl_loading() {
        let text = r#"{"id": "1", "question": "Q1?", "answer": "A1"}
{"id": "2", "question": "Q2?", "answer": "A2"}

{"id": "3", "question": "Q3?", "answer": "A3"}
"#;
        let dataset = parse_dataset(text, DatasetFormat::SimpleJsonl).unwrap();
        assert_eq!(dataset.records.len(), 3);
        assert_eq!(dataset.skipped, 0);
        assert_eq!(dataset.records[2], TaskRecord { id: "3".into(), question: "Q3?".into(), gold_answer: "A3".into() });
    }

    #[test]
    fn empty_answers_are_skipped() {
        let text = "{\"id\": \"1\", \"question\": \"Q?\", \"answer\": \"\"}\n{\"id\": \"2\", \"question\": \"Q?\", \"answer\": \"x\"}\n";
        let dataset = parse_dataset(text, DatasetFormat::SimpleJsonl).unwrap();
        assert_eq!(dataset.records.len(), 1);
        assert_eq!(dataset.skipped, 1);
    }

    #[test]
    fn malformed_line_is_named() {
        let text = "{\"id\": \"1\", \"question\": \"Q?\", \"answer\": \"x\"}\n{\"id\": \"2\", \"question\n";
        match parse_dataset(text, DatasetFormat::SimpleJsonl) {
            Err(HarnessError::DatasetFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_dataset("[1, 2]\n", DatasetFormat::SimpleJsonl),
            Err(HarnessError::DatasetFormat { line: 1, .. })
        ));
    }

    #[test]
    fn hotpot_json_loading() {
        let text = r#"[
  {"_id": "5a8b", "question": "Which magazine was started first?", "answer": "Arthur's Magazine", "type": "comparison"},
  {"_id": "5a8c", "question": "Who?", "answer": null}
]"#;
        let dataset = parse_dataset(text, DatasetFormat::HotpotJson).unwrap();
        assert_eq!(dataset.records.len(), 1);
        assert_eq!(dataset.records[0].id, "5a8b");
        assert_eq!(dataset.skipped, 1);
        assert!(matches!(
            parse_dataset("[{\"_id\": 1,\n  oops}]", DatasetFormat::HotpotJson),
            Err(HarnessError::DatasetFormat { line: 2, .. })
        ));
    }

    #[test]
    fn format_from_path_and_name() {
        assert_eq!(DatasetFormat::for_path(Path::new("x.jsonl")), DatasetFormat::SimpleJsonl);
        assert_eq!(DatasetFormat::for_path(Path::new("hotpot_dev.json")), DatasetFormat::HotpotJson);
        assert_eq!("simple-jsonl".parse::<DatasetFormat>().unwrap(), DatasetFormat::SimpleJsonl);
        assert!("csv".parse::<DatasetFormat>().is_err());
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let all = records(20);
        let sample = sample_tasks(&all, 20, 7).unwrap();
        let ids: HashSet<_> = sample.iter().map(|r| r.id.clone()).collect();
        assert_eq!(ids.len(), 20);
    }

    #[test]
    fn sampling_is_seeded() {
        let all = records(1000);
        let a = sample_tasks(&all, 150, 1).unwrap();
        assert_eq!(a, sample_tasks(&all, 150, 1).unwrap());
        let b = sample_tasks(&all, 150, 2).unwrap();
        assert_ne!(a, b);
        let ids: HashSet<_> = a.iter().map(|r| &r.id).collect();
        assert_eq!(ids.len(), 150);
        assert!(a.iter().all(|r| all.contains(r)));
    }

    #[test]
    fn oversampling_is_rejected() {
        assert!(matches!(sample_tasks(&records(3), 4, 0), Err(HarnessError::InvalidInput(_))));
    }
}
