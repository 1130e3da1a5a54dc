//! Tokenizer shared by the Turtle reader and the query parser.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Iri(String),
    PName(String, String),
    Blank(String),
    Var(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    /// Bare identifier: keywords, `a`, `true`, `@prefix` (with the `@`).
    Word(String),
    /// Single punctuation: `. ; , [ ] ( ) { } *`.
    Punct(char),
    /// `^^`, comparison and boolean operators.
    Op(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Iri(s) => write!(f, "<{s}>"),
            Tok::PName(p, l) => write!(f, "{p}:{l}"),
            Tok::Blank(s) => write!(f, "_:{s}"),
            Tok::Var(s) => write!(f, "?{s}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::LangTag(s) => write!(f, "@{s}"),
            Tok::Integer(s) | Tok::Decimal(s) | Tok::Double(s) | Tok::Word(s) => f.write_str(s),
            Tok::Punct(c) => write!(f, "{c}"),
            Tok::Op(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub message: String,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

fn is_local_char(c: char) -> bool {
    is_name_char(c) || c == ':' || c == '%'
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let err = |line: usize, m: String| LexError { line, message: m };
    while i < chars.len() {
        let c = chars[i];
        let start_line = line;
        let push = |out: &mut Vec<Spanned>, tok: Tok| out.push(Spanned { tok, line: start_line });
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '<' => {
                // An IRI runs to the next '>' with no whitespace in between.
                let mut j = i + 1;
                while j < chars.len() && !chars[j].is_whitespace() && !matches!(chars[j], '<' | '>' | '"' | '{' | '}') {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '>' && chars.get(i + 1) != Some(&'=') {
                    push(&mut out, Tok::Iri(chars[i + 1..j].iter().collect()));
                    i = j + 1;
                } else if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Op("<="));
                    i += 2;
                } else {
                    push(&mut out, Tok::Op("<"));
                    i += 1;
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Op(">="));
                    i += 2;
                } else {
                    push(&mut out, Tok::Op(">"));
                    i += 1;
                }
            }
            '=' => {
                push(&mut out, Tok::Op("="));
                i += 1;
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Op("!="));
                    i += 2;
                } else {
                    push(&mut out, Tok::Op("!"));
                    i += 1;
                }
            }
            '&' | '|' => {
                if chars.get(i + 1) != Some(&c) {
                    return Err(err(line, format!("unexpected '{c}'")));
                }
                push(&mut out, Tok::Op(if c == '&' { "&&" } else { "||" }));
                i += 2;
            }
            '^' => {
                if chars.get(i + 1) != Some(&'^') {
                    return Err(err(line, "expected '^^'".into()));
                }
                push(&mut out, Tok::Op("^^"));
                i += 2;
            }
            '"' | '\'' => {
                let long = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                i += if long { 3 } else { 1 };
                let mut s = String::new();
                loop {
                    let Some(&d) = chars.get(i) else {
                        return Err(err(start_line, "unterminated string".into()));
                    };
                    if d == c {
                        if !long {
                            i += 1;
                            break;
                        }
                        if chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c) {
                            i += 3;
                            break;
                        }
                    }
                    if d == '\\' {
                        let (ch, used) = unescape(&chars[i..]).ok_or_else(|| err(line, "bad escape sequence".into()))?;
                        s.push(ch);
                        i += used;
                        continue;
                    }
                    if d == '\n' {
                        line += 1;
                    }
                    s.push(d);
                    i += 1;
                }
                push(&mut out, Tok::Str(s));
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '-') {
                    j += 1;
                }
                let word: String = chars[i + 1..j].iter().collect();
                if word == "prefix" || word == "base" {
                    push(&mut out, Tok::Word(format!("@{word}")));
                } else if word.is_empty() {
                    return Err(err(line, "empty language tag".into()));
                } else {
                    push(&mut out, Tok::LangTag(word));
                }
                i = j;
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err(line, "empty variable name".into()));
                }
                push(&mut out, Tok::Var(chars[i + 1..j].iter().collect()));
                i = j;
            }
            '_' if chars.get(i + 1) == Some(&':') => {
                let mut j = i + 2;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                while j > i + 2 && chars[j - 1] == '.' {
                    j -= 1;
                }
                push(&mut out, Tok::Blank(chars[i + 2..j].iter().collect()));
                i = j;
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+' || c == '.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let (tok, j) = number(&chars, i);
                push(&mut out, tok);
                i = j;
            }
            '.' | ';' | ',' | '[' | ']' | '(' | ')' | '{' | '}' | '*' => {
                push(&mut out, Tok::Punct(c));
                i += 1;
            }
            c if is_name_char(c) || c == ':' => {
                let mut j = i;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                if chars.get(j) == Some(&':') {
                    let prefix: String = chars[i..j].iter().collect();
                    let mut k = j + 1;
                    while k < chars.len() && is_local_char(chars[k]) {
                        k += 1;
                    }
                    while k > j + 1 && chars[k - 1] == '.' {
                        k -= 1;
                    }
                    push(&mut out, Tok::PName(prefix, chars[j + 1..k].iter().collect()));
                    i = k;
                } else {
                    while j > i && chars[j - 1] == '.' {
                        j -= 1;
                    }
                    push(&mut out, Tok::Word(chars[i..j].iter().collect()));
                    i = j;
                }
            }
            other => return Err(err(line, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

fn unescape(s: &[char]) -> Option<(char, usize)> {
    let c = match s.get(1)? {
        't' => '\t',
        'n' => '\n',
        'r' => '\r',
        'b' => '\u{8}',
        'f' => '\u{c}',
        '"' => '"',
        '\'' => '\'',
        '\\' => '\\',
        'u' | 'U' => {
            let n = if s[1] == 'u' { 4 } else { 8 };
            let hex: String = s.get(2..2 + n)?.iter().collect();
            let ch = char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?;
            return Some((ch, 2 + n));
        }
        _ => return None,
    };
    Some((c, 2))
}

fn number(chars: &[char], mut i: usize) -> (Tok, usize) {
    let start = i;
    if chars[i] == '-' || chars[i] == '+' {
        i += 1;
    }
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    let mut decimal = false;
    if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
        decimal = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    let mut double = false;
    if matches!(chars.get(i), Some('e') | Some('E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('+') | Some('-')) {
            j += 1;
        }
        if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
            double = true;
            i = j;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    let text: String = chars[start..i].iter().collect();
    let tok = if double {
        Tok::Double(text)
    } else if decimal {
        Tok::Decimal(text)
    } else {
        Tok::Integer(text)
    };
    (tok, i)
}

/// Escapes a string for a double-quoted literal.
pub fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}
