//! Sentence splitting for page extracts.

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "inc", "ltd", "co", "corp", "vs", "etc", "e.g", "i.e", "u.s",
    "u.k", "no", "mt", "gen", "col", "lt", "sgt", "capt", "rev", "hon", "fr", "jan", "feb", "mar", "apr", "jun", "jul",
    "aug", "sep", "sept", "oct", "nov", "dec", "approx", "ca", "c", "op", "vol", "ed", "dept", "univ", "est", "fig",
];

/// Splits text into sentences on `.`, `!` or `?` followed by whitespace.
/// Known abbreviations, single-letter initials and boundaries followed by a
/// lowercase word do not end a sentence. Line breaks always do.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|line| !line.is_empty() && !is_heading(line)).flat_map(split_paragraph).collect()
}

fn is_heading(line: &str) -> bool {
    line.starts_with("==") && line.ends_with("==")
}

fn split_paragraph(paragraph: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    for (i, &(offset, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let Some(&(_, next)) = chars.get(i + 1) else { continue };
        if !next.is_whitespace() {
            continue;
        }
        if c == '.' && is_guarded(&paragraph[start..offset]) {
            continue;
        }
        let following = chars[i + 1..].iter().map(|&(_, ch)| ch).find(|ch| !ch.is_whitespace());
        if following.is_some_and(char::is_lowercase) {
            continue;
        }
        let end = offset + c.len_utf8();
        push_trimmed(&mut sentences, &paragraph[start..end]);
        start = end;
    }
    push_trimmed(&mut sentences, &paragraph[start..]);
    sentences
}

fn is_guarded(before_period: &str) -> bool {
    let word = before_period.rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"').next().unwrap_or_default();
    let mut letters = word.chars();
    if let (Some(first), None) = (letters.next(), letters.next()) {
        return first.is_alphabetic();
    }
    ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}
