//! Minimal shell-like lexing for validation command strings.

/// How a command segment is joined to the one after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connector {
    /// `&&`: run the next segment only on success.
    And,
    /// `;` or newline: run the next segment unconditionally.
    Then,
    End,
}

/// Split on newlines, `&&` and `;` outside single or double quotes.
/// Segments are trimmed and empty ones dropped; a command with no non-empty
/// segment yields a single empty segment.
pub fn split_segments(command: &str) -> Vec<(String, Connector)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut chars = command.chars().peekable();
    let push = |current: &mut String, conn: Connector, out: &mut Vec<(String, Connector)>| {
        let seg = current.trim();
        if !seg.is_empty() {
            out.push((seg.to_string(), conn));
        }
        current.clear();
    };
    while let Some(c) = chars.next() {
        match (quote, c) {
            (Some(q), _) if c == q => {
                quote = None;
                current.push(c);
            }
            (Some(_), _) => current.push(c),
            (None, '\'' | '"') => {
                quote = Some(c);
                current.push(c);
            }
            (None, '\n' | ';') => push(&mut current, Connector::Then, &mut out),
            (None, '&') if chars.peek() == Some(&'&') => {
                chars.next();
                push(&mut current, Connector::And, &mut out);
            }
            _ => current.push(c),
        }
    }
    push(&mut current, Connector::End, &mut out);
    if let Some(last) = out.last_mut() {
        last.1 = Connector::End;
    } else {
        out.push((String::new(), Connector::End));
    }
    out
}

/// The individual commands of one validation entry.
pub fn split_commands(command: &str) -> Vec<String> {
    split_segments(command).into_iter().map(|(s, _)| s).collect()
}

/// Remove single- and double-quoted literals, quotes included. Quotes do not
/// nest; an unterminated quote strips to the end of the string.
pub fn strip_quoted(command: &str) -> String {
    let mut out = String::with_capacity(command.len());
    let mut quote: Option<char> = None;
    for c in command.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '\'' || c == '"' => quote = Some(c),
            None => out.push(c),
        }
    }
    out
}

/// First whitespace-separated word, skipping leading `NAME=value` assignments.
pub fn head(command: &str) -> &str {
    command
        .split_whitespace()
        .find(|w| !is_assignment(w))
        .unwrap_or("")
}

fn is_assignment(word: &str) -> bool {
    match word.split_once('=') {
        Some((name, _)) => {
            !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !name.starts_with(|c: char| c.is_ascii_digit())
        }
        None => false,
    }
}

/// Whitespace-separated words with surrounding quotes removed. Quoted
/// whitespace does not split a word.
pub fn words(command: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut in_word = false;
    for c in command.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => current.push(c),
            None if c == '\'' || c == '"' => {
                quote = Some(c);
                in_word = true;
            }
            None if c.is_whitespace() => {
                if in_word {
                    out.push(std::mem::take(&mut current));
                    in_word = false;
                }
            }
            None => {
                current.push(c);
                in_word = true;
            }
        }
    }
    if in_word {
        out.push(current);
    }
    out
}
