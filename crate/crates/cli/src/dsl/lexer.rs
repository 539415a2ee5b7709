use super::{DslError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Colon,
    Arrow,
    DoubleArrow,
    Equals,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`=>`".into(),
            Tok::Equals => "`=`".into(),
        }
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits the text into tokens. `#` starts a comment running to the end of
/// the line.
pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => bump(&mut chars),
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            '{' | '}' | ';' | ',' | ':' => {
                bump(&mut chars);
                out.push((
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ';' => Tok::Semi,
                        ',' => Tok::Comma,
                        _ => Tok::Colon,
                    },
                    pos,
                ));
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push((Tok::Arrow, pos));
                } else {
                    return Err(DslError::new(pos, "expected `->`"));
                }
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push((Tok::DoubleArrow, pos));
                } else {
                    out.push((Tok::Equals, pos));
                }
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                out.push((Tok::Ident(s), pos));
            }
            other => return Err(DslError::new(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}
