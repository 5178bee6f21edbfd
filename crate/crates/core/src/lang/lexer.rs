#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Eq,
    Colon,
    Comma,
    Dot,
    DotDot,
    Minus,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Float(x) => format!("`{x}`"),
            Tok::Eq => "`=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Minus => "`-`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
        }
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Lexes one source line. Everything after `#` is a comment.
pub fn lex_line(line: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() => {
                let (tok, next) = lex_number(&chars, i)?;
                toks.push(tok);
                i = next;
            }
            '.' if chars.get(i + 1) == Some(&'.') => {
                toks.push(Tok::DotDot);
                i += 2;
            }
            _ => {
                let tok = match c {
                    '=' => Tok::Eq,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '-' => Tok::Minus,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    other => return Err(format!("unexpected character {other:?}")),
                };
                toks.push(tok);
                i += 1;
            }
        }
    }
    Ok(toks)
}

fn lex_number(chars: &[char], start: usize) -> Result<(Tok, usize), String> {
    let mut i = start;
    let digits = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(&mut i);
    let mut is_float = false;
    // `1..2` is a range, not `1.` followed by `.2`
    if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
        is_float = true;
        i += 1;
        digits(&mut i);
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            is_float = true;
            i = j;
            digits(&mut i);
        }
    }
    if i < chars.len() && is_ident_start(chars[i]) {
        return Err(format!(
            "malformed number `{}`",
            chars[start..=i].iter().collect::<String>()
        ));
    }
    let text: String = chars[start..i].iter().collect();
    let tok = if is_float {
        let x: f64 = text
            .parse()
            .map_err(|_| format!("malformed number `{text}`"))?;
        if !x.is_finite() {
            return Err(format!("number `{text}` is out of range"));
        }
        Tok::Float(x)
    } else {
        Tok::Int(
            text.parse()
                .map_err(|_| format!("integer `{text}` is out of range"))?,
        )
    };
    Ok((tok, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_range_and_numbers() {
        let toks = lex_line("input h: float = 1.5 range -2..3e1 # note").unwrap();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("input".into()),
                Tok::Ident("h".into()),
                Tok::Colon,
                Tok::Ident("float".into()),
                Tok::Eq,
                Tok::Float(1.5),
                Tok::Ident("range".into()),
                Tok::Minus,
                Tok::Int(2),
                Tok::DotDot,
                Tok::Float(30.0),
            ]
        );
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(lex_line("a = cube() $").is_err());
        assert!(lex_line("x = 12abc").is_err());
    }
}
