//! Answer scoring and runtime statistics.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

fn articles() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(a|an|the)\b").expect("valid regex"))
}

/// Lowercase, strip punctuation, drop the articles `a`/`an`/`the`, collapse
/// whitespace.
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let unpunctuated: String = lowered.chars().filter(|c| !is_punctuation(*c)).collect();
    let without_articles = articles().replace_all(&unpunctuated, " ");
    without_articles.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}')
}

pub fn exact_match(predicted: &str, gold: &str) -> bool {
    normalize_answer(predicted) == normalize_answer(gold)
}

/// Token-overlap F1 over normalized answers. A yes/no/noanswer answer only
/// scores when it matches exactly.
pub fn f1_score(predicted: &str, gold: &str) -> f64 {
    let predicted = normalize_answer(predicted);
    let gold = normalize_answer(gold);
    let special = ["yes", "no", "noanswer"];
    if (special.contains(&predicted.as_str()) || special.contains(&gold.as_str())) && predicted != gold {
        return 0.0;
    }
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for token in gold.split_whitespace() {
        *gold_counts.entry(token).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for token in predicted.split_whitespace() {
        if let Some(count) = gold_counts.get_mut(token).filter(|c| **c > 0) {
            *count -= 1;
            common += 1;
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / predicted.split_whitespace().count() as f64;
    let recall = common as f64 / gold.split_whitespace().count() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Mean and sample standard deviation (n - 1 denominator) in one pass.
/// The deviation is 0 for fewer than two values.
pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let mut count = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for &x in values {
        count += 1.0;
        let delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
    if count < 2.0 {
        return (mean, 0.0);
    }
    (mean, (m2 / (count - 1.0)).sqrt())
}
