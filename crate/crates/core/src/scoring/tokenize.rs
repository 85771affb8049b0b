/// Punctuation split off the end of a word into its own token.
pub const TERMINAL_PUNCTUATION: [char; 4] = ['.', ',', '!', '?'];

pub fn is_punctuation(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if TERMINAL_PUNCTUATION.contains(&c))
}

/// Whitespace tokenizer that detaches trailing `. , ! ?` as separate tokens.
/// Capitalization is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let body = word.trim_end_matches(TERMINAL_PUNCTUATION);
        if !body.is_empty() {
            tokens.push(body.to_string());
        }
        tokens.extend(word[body.len()..].chars().map(String::from));
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detaches_period() {
        assert_eq!(
            tokenize("der Soldat schreibt."),
            ["der", "Soldat", "schreibt", "."]
        );
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
    }

    #[test]
    fn soldat_sentence() {
        let tokens =
            tokenize("Er wollte uns sagen, dass der Soldat dem Offizier einen Brief schreibt.");
        assert_eq!(tokens.len(), 14);
        assert_eq!(tokens.iter().filter(|t| !is_punctuation(t)).count(), 12);
        assert_eq!(tokens[4], ",");
        assert_eq!(tokens[3], "sagen");
        assert_eq!(tokens[13], ".");
    }

    #[test]
    fn keeps_case_and_runs_of_punctuation() {
        assert_eq!(tokenize("Was?! Nein."), ["Was", "?", "!", "Nein", "."]);
        assert_eq!(tokenize("... ok"), [".", ".", ".", "ok"]);
    }
}
