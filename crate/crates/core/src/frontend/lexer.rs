use super::ast::Pos;
use super::FrontendError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    Punct(&'static str),
    /// Body of a `/*@ ... */` annotation comment.
    Pragma(String),
    /// `#define NAME` followed by the tokens of its value.
    Define(String, Vec<(Pos, Tok)>),
    Eof,
}

const PUNCTS: [&str; 30] = [
    "++", "--", "+=", "-=", "<=", ">=", "==", "!=", "&&", "||", "->", "{", "}", "(", ")", "[",
    "]", ";", ",", ":", "=", "<", ">", "+", "-", "*", "/", "%", "!", "&",
];

pub fn lex(src: &str) -> Result<Vec<(Pos, Tok)>, FrontendError> {
    let mut out = Vec::new();
    let mut line_start = true;
    let mut lx = Lexer {
        b: src.as_bytes(),
        src,
        i: 0,
        line: 1,
        col: 1,
    };
    loop {
        lx.skip_ws(&mut line_start)?;
        let pos = lx.pos();
        let Some(c) = lx.peek() else {
            out.push((pos, Tok::Eof));
            return Ok(out);
        };
        if c == b'#' {
            if !line_start {
                return Err(FrontendError::syntax(pos, "'#' must start a line"));
            }
            out.extend(lx.directive()?);
            line_start = true;
            continue;
        }
        line_start = false;
        if c == b'/' && lx.at("/*@") {
            lx.bump_n(3);
            let st = lx.i;
            while !lx.at("*/") {
                if lx.peek().is_none() {
                    return Err(FrontendError::syntax(pos, "unterminated annotation comment"));
                }
                lx.bump();
            }
            let body = src[st..lx.i].trim().to_string();
            lx.bump_n(2);
            out.push((pos, Tok::Pragma(body)));
            continue;
        }
        out.push((pos, lx.token()?));
    }
}

struct Lexer<'a> {
    b: &'a [u8],
    src: &'a str,
    i: usize,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.b.get(self.i).copied()
    }

    fn at(&self, s: &str) -> bool {
        self.src[self.i..].starts_with(s)
    }

    fn bump(&mut self) {
        if self.b[self.i] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.i += 1;
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    /// Skip whitespace and ordinary comments, tracking whether the next
    /// token starts a line.
    fn skip_ws(&mut self, line_start: &mut bool) -> Result<(), FrontendError> {
        loop {
            match self.peek() {
                Some(b'\n') => {
                    *line_start = true;
                    self.bump();
                }
                Some(c) if c.is_ascii_whitespace() => self.bump(),
                Some(b'/') if self.at("//") => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                Some(b'/') if self.at("/*") && !self.at("/*@") => {
                    let pos = self.pos();
                    self.bump_n(2);
                    while !self.at("*/") {
                        if self.peek().is_none() {
                            return Err(FrontendError::syntax(pos, "unterminated comment"));
                        }
                        self.bump();
                    }
                    self.bump_n(2);
                }
                _ => return Ok(()),
            }
        }
    }

    fn token(&mut self) -> Result<Tok, FrontendError> {
        let pos = self.pos();
        let c = self.peek().expect("not at end");
        if c.is_ascii_digit() {
            let st = self.i;
            while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                self.bump();
            }
            if matches!(self.peek(), Some(d) if d.is_ascii_alphabetic() || d == b'_') {
                return Err(FrontendError::syntax(self.pos(), "malformed number"));
            }
            return self.src[st..self.i]
                .parse()
                .map(Tok::Int)
                .map_err(|_| FrontendError::syntax(pos, "integer literal out of range"));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let st = self.i;
            while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric() || d == b'_') {
                self.bump();
            }
            return Ok(Tok::Ident(self.src[st..self.i].to_string()));
        }
        for p in PUNCTS {
            if self.at(p) {
                self.bump_n(p.len());
                return Ok(Tok::Punct(p));
            }
        }
        let ch = self.src[self.i..].chars().next().unwrap_or('?');
        Err(FrontendError::syntax(pos, format!("unexpected character {ch:?}")))
    }

    /// A preprocessor line. `#define NAME value` yields one token; other
    /// directives (`#include`, ...) are skipped.
    fn directive(&mut self) -> Result<Vec<(Pos, Tok)>, FrontendError> {
        let pos = self.pos();
        self.bump();
        let mut toks = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c != b'\n' && c.is_ascii_whitespace()) {
                self.bump();
            }
            if self.at("//") {
                while !matches!(self.peek(), None | Some(b'\n')) {
                    self.bump();
                }
            }
            if self.at("/*") {
                let p = self.pos();
                self.bump_n(2);
                while !self.at("*/") {
                    if self.peek().is_none() {
                        return Err(FrontendError::syntax(p, "unterminated comment"));
                    }
                    self.bump();
                }
                self.bump_n(2);
                continue;
            }
            match self.peek() {
                None | Some(b'\n') => break,
                _ => {
                    let p = self.pos();
                    toks.push((p, self.token()?));
                }
            }
        }
        match toks.first() {
            Some((_, Tok::Ident(d))) if d == "define" => match toks.get(1) {
                Some((_, Tok::Ident(name))) => {
                    let name = name.clone();
                    let value = toks.drain(2..).collect();
                    Ok(vec![(pos, Tok::Define(name, value))])
                }
                _ => Err(FrontendError::syntax(pos, "expected a name after #define")),
            },
            _ => Ok(Vec::new()),
        }
    }
}
