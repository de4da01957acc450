//! Minimal S-expression reader shared by the SyGuS frontend and the SMT
//! reply parser. Tracks line/column for diagnostics.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    /// Symbol or numeral (quoted symbols are stored without the bars).
    Atom(String, Pos),
    /// String literal, without the quotes.
    Str(String, Pos),
    List(Vec<Sexp>, Pos),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct SexpError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            _ => None,
        }
    }

    /// The head symbol of a list such as `(assert ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    pub fn is_atom(&self, s: &str) -> bool {
        self.as_atom() == Some(s)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::Str(s, _) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexp::List(items, _) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> SexpError {
        SexpError { line: pos.line, col: pos.col, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_ws();
        let start = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(self.err(start, "unbalanced '('")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => items.push(self.read()?.expect("peeked a character")),
                    }
                }
            }
            ')' => Err(self.err(start, "unexpected ')'")),
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err(start, "unterminated quoted symbol")),
                        Some('|') => return Ok(Some(Sexp::Atom(s, start))),
                        Some(c) => s.push(c),
                    }
                }
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err(start, "unterminated string literal")),
                        Some('"') if self.chars.peek() == Some(&'"') => {
                            self.bump();
                            s.push('"');
                        }
                        Some('"') => return Ok(Some(Sexp::Str(s, start))),
                        Some(c) => s.push(c),
                    }
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"' | '|') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(s, start)))
            }
        }
    }
}

/// Reads every top-level S-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(s) = r.read()? {
        out.push(s);
    }
    Ok(out)
}

/// Reads exactly one S-expression.
pub fn parse_one(text: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(SexpError { line: 1, col: 1, message: "empty input".into() }),
        _ => {
            let p = all[1].pos();
            Err(SexpError { line: p.line, col: p.col, message: "trailing input".into() })
        }
    }
}

/// Whether `text` holds at least one complete expression with balanced
/// parentheses (ignoring comments, strings and quoted symbols).
pub fn is_complete(text: &str) -> bool {
    let mut depth = 0i64;
    let mut seen = false;
    let mut in_str = false;
    let mut in_bar = false;
    let mut in_comment = false;
    for c in text.chars() {
        if in_comment {
            in_comment = c != '\n';
            continue;
        }
        if in_str {
            in_str = c != '"';
            continue;
        }
        if in_bar {
            in_bar = c != '|';
            continue;
        }
        match c {
            ';' => in_comment = true,
            '"' => {
                in_str = true;
                seen = true
            }
            '|' => {
                in_bar = true;
                seen = true
            }
            '(' => {
                depth += 1;
                seen = true
            }
            ')' => depth -= 1,
            c if !c.is_whitespace() => seen = true,
            _ => {}
        }
    }
    seen && depth <= 0 && !in_str && !in_bar
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let all = parse_all("; header\n(a (b c) |d e|)\n(\"s\")").unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].pos(), Pos { line: 2, col: 1 });
        assert_eq!(all[0].to_string(), "(a (b c) d e)");
        let items = all[0].as_list().unwrap();
        assert_eq!(items[2].as_atom(), Some("d e"));
        assert!(matches!(&all[1].as_list().unwrap()[0], Sexp::Str(s, _) if s == "s"));
    }

    #[test]
    fn reports_unbalanced_input() {
        let err = parse_all("(check-synt").unwrap_err();
        assert_eq!((err.line, err.col), (1, 1));
        let err = parse_all("(a))").unwrap_err();
        assert_eq!((err.line, err.col), (1, 4));
    }

    #[test]
    fn completeness_check() {
        assert!(is_complete("sat\n"));
        assert!(!is_complete("((x 1)\n"));
        assert!(is_complete("((x 1)\n (y (- 2)))\n"));
        assert!(!is_complete("   \n"));
    }
}
