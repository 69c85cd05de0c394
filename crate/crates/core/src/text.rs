//! Tokenization and sentence splitting shared by the planner, the
//! realizer and the corpus statistics.

const CLITICS: [&str; 6] = ["s", "re", "m", "ll", "ve", "d"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Lowercased word tokens; punctuation becomes standalone tokens and
/// contractions split at the apostrophe (`don't` -> `do`, `n't`).
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prev_word = i > 0 && is_word_char(chars[i - 1]);
        let next_word = chars.get(i + 1).copied().is_some_and(is_word_char);
        if is_word_char(c) {
            word.extend(c.to_lowercase());
        } else if (c == '\'' || c == '’') && prev_word && next_word && !word.is_empty() {
            word.push('\'');
        } else if c == '-' && prev_word && next_word && !word.is_empty() {
            word.push('-');
        } else if (c == '\'' || c == '’') && word.is_empty() && next_word && !prev_word {
            // standalone clitic such as "'s" in "it 's"
            let rest: String = chars[i + 1..]
                .iter()
                .take_while(|c| is_word_char(**c))
                .flat_map(|c| c.to_lowercase())
                .collect();
            if CLITICS.contains(&rest.as_str()) {
                tokens.push(format!("'{rest}"));
                i += 1 + rest.chars().count();
                continue;
            }
            tokens.push("'".to_string());
        } else {
            flush_word(&mut word, &mut tokens);
            if !c.is_whitespace() {
                tokens.push(c.to_lowercase().collect());
            }
        }
        i += 1;
    }
    flush_word(&mut word, &mut tokens);
    tokens
}

fn flush_word(word: &mut String, tokens: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    let w = std::mem::take(word);
    if w == "n't" {
        tokens.push(w);
        return;
    }
    if w.len() > 3 && w.ends_with("n't") {
        let stem = &w[..w.len() - 3];
        tokens.push(stem.to_string());
        tokens.push("n't".to_string());
        return;
    }
    if let Some(pos) = w.find('\'') {
        let (head, tail) = w.split_at(pos);
        if !head.is_empty() && tail.len() > 1 {
            tokens.push(head.to_string());
            tokens.push(tail.to_string());
            return;
        }
    }
    tokens.push(w);
}

/// True for tokens with no alphanumeric character (punctuation, symbols).
pub fn is_punct(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Splits on `.`, `!` or `?` followed by whitespace or end of text. The
/// delimiter stays with its sentence; sentences are trimmed and empty
/// ones dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_boundary = iter.peek().is_none_or(|(_, n)| n.is_whitespace());
            if at_boundary {
                let end = i + c.len_utf8();
                push_sentence(&mut out, &text[start..end]);
                start = end;
            }
        }
    }
    push_sentence(&mut out, &text[start..]);
    out
}

fn push_sentence(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}
