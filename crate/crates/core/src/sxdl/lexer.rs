use std::fmt;

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Colon,
    Semi,
    LBrace,
    RBrace,
    Eq,
    Arrow,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Colon => f.write_str(":"),
            Tok::Semi => f.write_str(";"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::Eq => f.write_str("="),
            Tok::Arrow => f.write_str("->"),
            Tok::Dot => f.write_str("."),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        let lexical = |msg: String| ParseError::Lexical {
            line: span.line,
            col: span.col,
            message: msg,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() != Some(&'/') {
                    return Err(lexical("unexpected character `/`".into()));
                }
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump!();
                }
            }
            ':' | ';' | '{' | '}' | '=' | '.' => {
                bump!();
                let tok = match c {
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '=' => Tok::Eq,
                    _ => Tok::Dot,
                };
                out.push((tok, span));
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('>') => {
                        bump!();
                        out.push((Tok::Arrow, span));
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let mut s = String::from("-");
                        while let Some(&d) = chars.peek() {
                            if !is_number_char(d, &s) {
                                break;
                            }
                            s.push(d);
                            bump!();
                        }
                        out.push((Tok::Num(parse_number(&s).map_err(lexical)?), span));
                    }
                    _ => return Err(lexical("unexpected character `-`".into())),
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None | Some('\n') => return Err(lexical("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => {
                                return Err(lexical(format!("unknown escape `\\{other}`")))
                            }
                            None => return Err(lexical("unterminated string".into())),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                out.push((Tok::Str(s), span));
            }
            d if d.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !is_number_char(d, &s) {
                        break;
                    }
                    s.push(d);
                    bump!();
                }
                out.push((Tok::Num(parse_number(&s).map_err(lexical)?), span));
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut s = String::new();
                while let Some(&a) = chars.peek() {
                    if !(a.is_ascii_alphanumeric() || a == '_') {
                        break;
                    }
                    s.push(a);
                    bump!();
                }
                out.push((Tok::Ident(s), span));
            }
            other => return Err(lexical(format!("unexpected character `{}`", other.escape_debug()))),
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

/// Exponent signs are only accepted right after `e`/`E`.
fn is_number_char(c: char, so_far: &str) -> bool {
    c.is_ascii_digit()
        || c == '.'
        || c == 'e'
        || c == 'E'
        || ((c == '+' || c == '-') && so_far.ends_with(['e', 'E']))
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(n) if n.is_finite() => Ok(n),
        Ok(_) => Err(format!("number `{s}` is out of range")),
        Err(_) => Err(format!("malformed number `{s}`")),
    }
}
