//! Hand-rolled lexer. Byte offsets are tracked for parse diagnostics.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    // keywords
    Fn,
    Let,
    If,
    Else,
    While,
    Return,
    True,
    False,
    // literals and names
    Int(i64),
    Str(String),
    Ident(String),
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Arrow,
    Assign,
    // operators
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Fn => "fn",
            Tok::Let => "let",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Int(_) => "integer literal",
            Tok::Str(_) => "string literal",
            Tok::Ident(_) => "identifier",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                tokens.push(Token { tok: Tok::LParen, offset: i });
                i += 1;
            }
            b')' => {
                tokens.push(Token { tok: Tok::RParen, offset: i });
                i += 1;
            }
            b'{' => {
                tokens.push(Token { tok: Tok::LBrace, offset: i });
                i += 1;
            }
            b'}' => {
                tokens.push(Token { tok: Tok::RBrace, offset: i });
                i += 1;
            }
            b'[' => {
                tokens.push(Token { tok: Tok::LBracket, offset: i });
                i += 1;
            }
            b']' => {
                tokens.push(Token { tok: Tok::RBracket, offset: i });
                i += 1;
            }
            b',' => {
                tokens.push(Token { tok: Tok::Comma, offset: i });
                i += 1;
            }
            b';' => {
                tokens.push(Token { tok: Tok::Semi, offset: i });
                i += 1;
            }
            b':' => {
                tokens.push(Token { tok: Tok::Colon, offset: i });
                i += 1;
            }
            b'+' => {
                tokens.push(Token { tok: Tok::Plus, offset: i });
                i += 1;
            }
            b'-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    tokens.push(Token { tok: Tok::Arrow, offset: i });
                    i += 2;
                } else {
                    tokens.push(Token { tok: Tok::Minus, offset: i });
                    i += 1;
                }
            }
            b'*' => {
                tokens.push(Token { tok: Tok::Star, offset: i });
                i += 1;
            }
            b'/' => {
                tokens.push(Token { tok: Tok::Slash, offset: i });
                i += 1;
            }
            b'%' => {
                tokens.push(Token { tok: Tok::Percent, offset: i });
                i += 1;
            }
            b'<' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    tokens.push(Token { tok: Tok::Le, offset: i });
                    i += 2;
                } else {
                    tokens.push(Token { tok: Tok::Lt, offset: i });
                    i += 1;
                }
            }
            b'>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    tokens.push(Token { tok: Tok::Ge, offset: i });
                    i += 2;
                } else {
                    tokens.push(Token { tok: Tok::Gt, offset: i });
                    i += 1;
                }
            }
            b'=' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    tokens.push(Token { tok: Tok::EqEq, offset: i });
                    i += 2;
                } else {
                    tokens.push(Token { tok: Tok::Assign, offset: i });
                    i += 1;
                }
            }
            b'!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    tokens.push(Token { tok: Tok::NotEq, offset: i });
                    i += 2;
                } else {
                    tokens.push(Token { tok: Tok::Bang, offset: i });
                    i += 1;
                }
            }
            b'&' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'&' {
                    tokens.push(Token { tok: Tok::AndAnd, offset: i });
                    i += 2;
                } else {
                    return Err(LexError { offset: i, message: "stray '&' (did you mean '&&'?)".into() });
                }
            }
            b'|' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'|' {
                    tokens.push(Token { tok: Tok::OrOr, offset: i });
                    i += 2;
                } else {
                    return Err(LexError { offset: i, message: "stray '|' (did you mean '||'?)".into() });
                }
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut value = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(LexError { offset: start, message: "unterminated string literal".into() });
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\\' => {
                            if i + 1 >= bytes.len() {
                                return Err(LexError { offset: i, message: "dangling escape at end of input".into() });
                            }
                            let esc = bytes[i + 1];
                            let ch = match esc {
                                b'n' => '\n',
                                b't' => '\t',
                                b'\\' => '\\',
                                b'"' => '"',
                                other => {
                                    return Err(LexError {
                                        offset: i,
                                        message: format!("unknown escape '\\{}'", other as char),
                                    })
                                }
                            };
                            value.push(ch);
                            i += 2;
                        }
                        b'\n' => {
                            return Err(LexError { offset: start, message: "newline inside string literal".into() });
                        }
                        _ => {
                            // Consume one UTF-8 scalar, not one byte.
                            let rest = &source[i..];
                            let ch = rest.chars().next().unwrap();
                            value.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                tokens.push(Token { tok: Tok::Str(value), offset: start });
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &source[start..i];
                match text.parse::<i64>() {
                    Ok(v) => tokens.push(Token { tok: Tok::Int(v), offset: start }),
                    Err(_) => {
                        return Err(LexError {
                            offset: start,
                            message: format!("integer literal '{}' does not fit in 64 bits", text),
                        })
                    }
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &source[start..i];
                let tok = match word {
                    "fn" => Tok::Fn,
                    "let" => Tok::Let,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "return" => Tok::Return,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                tokens.push(Token { tok, offset: start });
            }
            other => {
                return Err(LexError {
                    offset: i,
                    message: format!("unexpected character '{}'", other as char),
                });
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, offset: source.len() });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arrow_and_comparisons() {
        let toks = lex("-> - >= > == = !=").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![Tok::Arrow, Tok::Minus, Tok::Ge, Tok::Gt, Tok::EqEq, Tok::Assign, Tok::NotEq, Tok::Eof]
        );
    }

    #[test]
    fn string_escapes_round_trip() {
        let toks = lex(r#""a\n\t\"\\b""#).unwrap();
        assert_eq!(toks[0].tok, Tok::Str("a\n\t\"\\b".to_string()));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("let // trailing words\nx").unwrap();
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[0].tok, Tok::Let);
        assert_eq!(toks[1].tok, Tok::Ident("x".into()));
    }

    #[test]
    fn oversized_literal_is_an_error() {
        let err = lex("99999999999999999999").unwrap_err();
        assert!(err.message.contains("64 bits"));
    }
}
