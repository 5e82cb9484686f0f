//! Tokenizer for the system description language.

use num::{BigInt, BigRational, One};
use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(BigRational),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Plus,
    Minus,
    Star,
    Caret,
    Equals,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::Equals => write!(f, "`=`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Scan the whole input; `#` comments run to end of line.
/// Numbers are exact rationals: `7`, `0.25` (→ 1/4), `1/2`.
pub fn lex(text: &str) -> Result<Vec<Token>, (Span, String)> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(s), span });
            }
            c if c.is_ascii_digit() => {
                let mut int = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        int.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let mut value = BigRational::from_integer(int.parse::<BigInt>().unwrap());
                if chars.peek() == Some(&'.') {
                    chars.next();
                    col += 1;
                    let mut frac = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            frac.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    if frac.is_empty() {
                        return Err((span, "digits expected after decimal point".into()));
                    }
                    let num: BigInt = frac.parse().unwrap();
                    let mut den = BigInt::one();
                    for _ in 0..frac.len() {
                        den *= 10;
                    }
                    value += BigRational::new(num, den);
                }
                out.push(Token { tok: Tok::Number(value), span });
            }
            _ => {
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '=' => Tok::Equals,
                    '/' => Tok::Star, // placeholder; handled below
                    other => return Err((span, format!("unexpected character `{other}`"))),
                };
                if c == '/' {
                    // rational literal continuation: previous token must be an integer
                    chars.next();
                    col += 1;
                    let mut den = String::new();
                    while let Some(&d) = chars.peek() {
                        if d.is_ascii_digit() {
                            den.push(d);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    let Some(Token { tok: Tok::Number(n), .. }) = out.last_mut() else {
                        return Err((span, "`/` is only valid inside a rational literal".into()));
                    };
                    if den.is_empty() {
                        return Err((span, "digits expected after `/`".into()));
                    }
                    let den: BigInt = den.parse().unwrap();
                    if den == BigInt::from(0) {
                        return Err((span, "zero denominator in rational literal".into()));
                    }
                    *n = &*n / BigRational::from_integer(den);
                } else {
                    chars.next();
                    col += 1;
                    out.push(Token { tok, span });
                }
            }
        }
    }
    Ok(out)
}
