use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eq,
    Plus,
    Comma,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(super) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, msg: &str, expected: &[&str]| ParseError::new(line, column, msg, expected);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
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
                col += 1;
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, pos });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '-' || c == '.' {
            let start = i;
            if c == '-' {
                i += 1;
            }
            let digits = |i: &mut usize| {
                let s = *i;
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    *i += 1;
                }
                *i - s
            };
            let mut mantissa = digits(&mut i);
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                mantissa += digits(&mut i);
            }
            if mantissa == 0 {
                return Err(err(line, col, "malformed number", &["digit"]));
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if digits(&mut i) == 0 {
                    return Err(err(line, col + (save - start), "malformed exponent", &["digit"]));
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| err(line, col, "malformed number", &["number"]))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Number(value),
                pos,
            });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(pos.line, pos.column, "unterminated string", &["`\"`"]));
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        let escaped = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(err(line, col, "invalid escape sequence", &["`\\\"`", "`\\\\`", "`\\n`", "`\\t`"])),
                        };
                        s.push(escaped);
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        return Err(err(line, col, &format!("unexpected character {c:?}"), &[]));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers() {
        assert_eq!(
            toks("1 -2.5 .5 3e-2 1E+3 0.0"),
            vec![
                Tok::Number(1.0),
                Tok::Number(-2.5),
                Tok::Number(0.5),
                Tok::Number(0.03),
                Tok::Number(1000.0),
                Tok::Number(0.0),
                Tok::Eof
            ]
        );
        assert!(tokenize("-").is_err());
        assert!(tokenize("1e").is_err());
    }

    #[test]
    fn strings_and_comments() {
        assert_eq!(
            toks("path = \"a\\\"b\" # trailing\nx"),
            vec![
                Tok::Ident("path".into()),
                Tok::Eq,
                Tok::Str("a\"b".into()),
                Tok::Ident("x".into()),
                Tok::Eof
            ]
        );
        let e = tokenize("x = \"open\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
    }

    #[test]
    fn positions() {
        let t = tokenize("a {\n  b = 1\n}").unwrap();
        assert_eq!(t[2].pos, Pos { line: 2, column: 3 });
        assert_eq!(t[4].pos, Pos { line: 2, column: 7 });
        let e = tokenize("a @").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }
}
