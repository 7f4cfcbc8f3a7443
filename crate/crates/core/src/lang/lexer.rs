use num::{BigInt, BigRational, One, Zero};

use super::LangError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(BigRational),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Amp,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LangError> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            '&' => Some(Tok::Amp),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: tl, col: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), line: tl, col: tc });
            continue;
        }
        let negative = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            let start = i;
            if negative {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut frac = String::new();
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac.push(chars[i]);
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Number(parse_decimal(&text)), line: tl, col: tc });
            continue;
        }
        return Err(LangError::Syntax {
            line: tl,
            col: tc,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// Exact value of a decimal literal such as `-12.25`.
fn parse_decimal(text: &str) -> BigRational {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
    let mut denom = BigInt::one();
    for _ in 0..frac_part.len() {
        denom *= 10;
    }
    let value = BigRational::new(numer, denom);
    if neg {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let toks = tokenize("2.5 -3 10").unwrap();
        let nums: Vec<BigRational> = toks
            .into_iter()
            .filter_map(|t| match t.tok {
                Tok::Number(n) => Some(n),
                _ => None,
            })
            .collect();
        assert_eq!(nums[0], BigRational::new(5.into(), 2.into()));
        assert_eq!(nums[1], BigRational::from_integer((-3).into()));
        assert_eq!(nums[2], BigRational::from_integer(10.into()));
    }

    #[test]
    fn tracks_positions_and_comments() {
        let toks = tokenize("# header\n  Foo(A);").unwrap();
        assert_eq!(toks[0].line, 2);
        assert_eq!(toks[0].col, 3);
        let err = tokenize("A $").unwrap_err();
        assert!(matches!(err, LangError::Syntax { line: 1, col: 3, .. }));
    }
}
