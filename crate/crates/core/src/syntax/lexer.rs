use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub line: usize,
    pub column: usize,
    /// No whitespace separates this token from the previous one.
    pub glued: bool,
}

const SPECIAL: &[char] = &['(', ')', '[', ']', '{', '}', ','];

/// Splits on whitespace; parentheses, brackets, braces and commas are always
/// tokens of their own. `---` and `***` start comments running to end of line.
pub fn tokenize(src: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let mut glued = false;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                glued = false;
                i += 1;
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            if !glued && (rest == "---" || rest == "***") {
                break;
            }
            let start = i;
            if SPECIAL.contains(&c) {
                i += 1;
            } else {
                while i < chars.len() && !chars[i].is_whitespace() && !SPECIAL.contains(&chars[i]) {
                    i += 1;
                }
            }
            out.push(Token {
                text: chars[start..i].iter().collect(),
                line: lineno + 1,
                column: start + 1,
                glued,
            });
            glued = true;
        }
    }
    out
}

/// Cursor over a token slice with error helpers.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Self {
        Cursor {
            toks: tokenize(src),
            pos: 0,
        }
    }

    pub fn from_tokens(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    pub fn peek_at(&self, k: usize) -> Option<&str> {
        self.toks.get(self.pos + k).map(|t| t.text.as_str())
    }

    pub fn peek_token(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn eat(&mut self, text: &str) -> bool {
        if self.peek() == Some(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, text: &str) -> Result<()> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{text}`")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(t) => Ok(t.text.clone()),
            None => Err(Error::UnexpectedEof(format!("expected {what}"))),
        }
    }

    pub fn error(&self, msg: &str) -> Error {
        match self.toks.get(self.pos) {
            Some(t) => Error::Parse {
                line: t.line,
                column: t.column,
                message: format!("{msg}, found `{}`", t.text),
            },
            None => Error::UnexpectedEof(msg.to_string()),
        }
    }

    /// Reads tokens up to the next standalone `.`, joining glued tokens.
    pub fn words_until_dot(&mut self) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        loop {
            let Some(t) = self.next() else {
                return Err(Error::UnexpectedEof("expected `.`".into()));
            };
            if t.text == "." {
                return Ok(out);
            }
            match out.last_mut() {
                Some(last) if t.glued => last.push_str(&t.text),
                _ => out.push(t.text.clone()),
            }
        }
    }
}
