/// Characters split off as standalone tokens.
fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '«' | '»' | '¿' | '¡' | '…' | '“' | '”' | '‘' | '’' | '„' | '–' | '—' | '·'
        )
}

/// Lowercases, splits on whitespace and emits every punctuation character as
/// its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_punctuation(c) {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.extend(c.to_lowercase());
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}
