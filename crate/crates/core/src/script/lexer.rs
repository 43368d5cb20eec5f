//! Minimal dialect-aware lexer.
//!
//! Splits source text into code, string-literal and comment tokens. It knows
//! just enough about each dialect to keep `#` inside strings from starting a
//! comment and quotes inside comments from starting a string:
//!
//! - R: `#` comments, `'`/`"` strings with backslash escapes (may span lines),
//!   backtick-quoted names kept as code.
//! - Python: as R, plus triple-quoted strings; single-quoted strings end at a
//!   newline.
//! - shell: `#` only starts a comment at the start of a word; single quotes
//!   have no escapes.

use crate::supplement::Dialect;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Code,
    Str,
    Comment,
}

/// A lexeme with its absolute byte offset. `text` excludes delimiters: string
/// quotes and the leading `#` of comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub offset: usize,
    pub text: &'a str,
}

pub fn tokenize(src: &str, dialect: Dialect) -> Vec<Token<'_>> {
    Lexer {
        src,
        bytes: src.as_bytes(),
        dialect,
        pos: 0,
        code_start: 0,
        tokens: Vec::new(),
    }
    .run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    dialect: Dialect,
    pos: usize,
    code_start: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Vec<Token<'a>> {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'\n' => {
                    self.flush_code(self.pos);
                    self.pos += 1;
                    self.code_start = self.pos;
                }
                b'#' if self.comment_allowed() => self.comment(),
                b'"' | b'\'' => self.string(),
                b'`' if self.dialect != Dialect::Py => self.backtick(),
                _ => self.pos += 1,
            }
        }
        self.flush_code(self.pos);
        self.tokens
    }

    fn flush_code(&mut self, end: usize) {
        let text = &self.src[self.code_start..end];
        let text = text.strip_suffix('\r').unwrap_or(text);
        if !text.is_empty() {
            self.tokens.push(Token {
                kind: TokenKind::Code,
                offset: self.code_start,
                text,
            });
        }
    }

    fn comment_allowed(&self) -> bool {
        if self.dialect != Dialect::Shell || self.pos == 0 {
            return true;
        }
        matches!(self.bytes[self.pos - 1], b' ' | b'\t' | b'\n' | b';' | b'(')
    }

    fn comment(&mut self) {
        self.flush_code(self.pos);
        let start = self.pos + 1;
        let mut end = start;
        while end < self.bytes.len() && self.bytes[end] != b'\n' {
            end += 1;
        }
        let text = &self.src[start..end];
        self.tokens.push(Token {
            kind: TokenKind::Comment,
            offset: start,
            text: text.strip_suffix('\r').unwrap_or(text),
        });
        self.pos = end;
        self.code_start = end;
    }

    fn string(&mut self) {
        self.flush_code(self.pos);
        let quote = self.bytes[self.pos];
        let triple = self.dialect == Dialect::Py
            && self.bytes.get(self.pos + 1) == Some(&quote)
            && self.bytes.get(self.pos + 2) == Some(&quote);
        let delim_len = if triple { 3 } else { 1 };
        let escapes = !(self.dialect == Dialect::Shell && quote == b'\'');
        let stops_at_newline = self.dialect == Dialect::Py && !triple;

        let start = self.pos + delim_len;
        let mut i = start;
        let (content_end, resume) = loop {
            if i >= self.bytes.len() {
                break (self.bytes.len(), self.bytes.len());
            }
            let b = self.bytes[i];
            if escapes && b == b'\\' {
                i += 2;
                continue;
            }
            if b == b'\n' && stops_at_newline {
                break (i, i);
            }
            if b == quote {
                if !triple {
                    break (i, i + 1);
                }
                if self.bytes.get(i + 1) == Some(&quote) && self.bytes.get(i + 2) == Some(&quote) {
                    break (i, i + 3);
                }
            }
            i += 1;
        };
        let content_end = content_end.min(self.bytes.len());
        self.tokens.push(Token {
            kind: TokenKind::Str,
            offset: start,
            text: &self.src[start..content_end],
        });
        self.pos = resume.min(self.bytes.len());
        self.code_start = self.pos;
    }

    fn backtick(&mut self) {
        let mut i = self.pos + 1;
        while i < self.bytes.len() && self.bytes[i] != b'`' && self.bytes[i] != b'\n' {
            i += 1;
        }
        self.pos = if i < self.bytes.len() && self.bytes[i] == b'`' {
            i + 1
        } else {
            i
        };
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrLit {
    pub offset: usize,
    pub line: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentText {
    pub line: usize,
    pub text: String,
}

/// Line-oriented view of a lexed source file.
///
/// `masked` has the same byte layout as the source, but with string contents
/// and comments (including the `#`) blanked to spaces, so pattern matches on
/// it only ever hit code.
#[derive(Debug, Clone)]
pub struct SourceView<'a> {
    pub src: &'a str,
    pub masked: String,
    line_starts: Vec<usize>,
    pub strings: Vec<StrLit>,
    pub comments: Vec<CommentText>,
}

impl<'a> SourceView<'a> {
    pub fn new(src: &'a str, dialect: Dialect) -> Self {
        let tokens = tokenize(src, dialect);
        let mut line_starts = vec![0];
        line_starts.extend(src.bytes().enumerate().filter(|(_, b)| *b == b'\n').map(|(i, _)| i + 1));
        let mut masked = src.as_bytes().to_vec();
        let mut strings = Vec::new();
        let mut comments = Vec::new();
        let line_of = |offset: usize| line_starts.partition_point(|s| *s <= offset);
        for token in &tokens {
            let (from, to) = match token.kind {
                TokenKind::Code => continue,
                TokenKind::Str => {
                    strings.push(StrLit {
                        offset: token.offset,
                        line: line_of(token.offset),
                        value: token.text.to_string(),
                    });
                    (token.offset, token.offset + token.text.len())
                }
                TokenKind::Comment => {
                    comments.push(CommentText {
                        line: line_of(token.offset),
                        text: token.text.to_string(),
                    });
                    (token.offset - 1, token.offset + token.text.len())
                }
            };
            for b in &mut masked[from..to] {
                if *b != b'\n' && *b != b'\r' {
                    *b = b' ';
                }
            }
        }
        let masked = String::from_utf8(masked).expect("masking replaces whole characters");
        Self {
            src,
            masked,
            line_starts,
            strings,
            comments,
        }
    }

    /// Number of lines, not counting the empty remainder after a final newline.
    pub fn line_count(&self) -> usize {
        if self.src.is_empty() {
            0
        } else if self.src.ends_with('\n') {
            self.line_starts.len() - 1
        } else {
            self.line_starts.len()
        }
    }

    /// 1-based line containing `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        self.line_starts.partition_point(|s| *s <= offset)
    }

    fn line_range(&self, line: usize) -> (usize, usize) {
        let start = self.line_starts[line - 1];
        let mut end = self
            .line_starts
            .get(line)
            .map(|next| next - 1)
            .unwrap_or(self.src.len());
        if end > start && self.src.as_bytes()[end - 1] == b'\r' {
            end -= 1;
        }
        (start, end)
    }

    /// Masked text of a 1-based line, with its absolute start offset.
    pub fn masked_line(&self, line: usize) -> (usize, &str) {
        let (start, end) = self.line_range(line);
        (start, &self.masked[start..end])
    }

    pub fn source_line(&self, line: usize) -> &str {
        let (start, end) = self.line_range(line);
        &self.src[start..end]
    }

    /// Given the offset of an opening parenthesis in the masked text, returns
    /// the offset of its matching close, searching across lines.
    pub fn matching_paren(&self, open: usize) -> Option<usize> {
        let bytes = self.masked.as_bytes();
        if bytes.get(open) != Some(&b'(') {
            return None;
        }
        let mut depth = 0usize;
        for (i, b) in bytes.iter().enumerate().skip(open) {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    pub fn strings_between(&self, from: usize, to: usize) -> impl Iterator<Item = &StrLit> {
        self.strings.iter().filter(move |s| s.offset > from && s.offset < to)
    }
}
