use std::fmt;

use super::{LexError, ParseError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Document,
    Imports,
    Claim,
    Decl,
    Content,
    AssertedInference,
    AssertedContext,
    AssertedEvidence,
    AssertedArtifactSupport,
    Counter,
    Reasoning,
    Source,
    Target,
    ArgumentReasoning,
    ArtifactReference,
    References,
    Artifact,
    Kind,
    Version,
    Date,
    ArtifactRel,
    Expression,
    Lang,
    Body,
    Obligation,
    Spec,
    Text,
}

const KEYWORDS: [(&str, Keyword); 27] = [
    ("DOCUMENT", Keyword::Document),
    ("IMPORTS", Keyword::Imports),
    ("CLAIM", Keyword::Claim),
    ("DECL", Keyword::Decl),
    ("CONTENT", Keyword::Content),
    ("ASSERTED_INFERENCE", Keyword::AssertedInference),
    ("ASSERTED_CONTEXT", Keyword::AssertedContext),
    ("ASSERTED_EVIDENCE", Keyword::AssertedEvidence),
    ("ASSERTED_ARTIFACT_SUPPORT", Keyword::AssertedArtifactSupport),
    ("COUNTER", Keyword::Counter),
    ("REASONING", Keyword::Reasoning),
    ("SOURCE", Keyword::Source),
    ("TARGET", Keyword::Target),
    ("ARGUMENT_REASONING", Keyword::ArgumentReasoning),
    ("ARTIFACT_REFERENCE", Keyword::ArtifactReference),
    ("REFERENCES", Keyword::References),
    ("ARTIFACT", Keyword::Artifact),
    ("KIND", Keyword::Kind),
    ("VERSION", Keyword::Version),
    ("DATE", Keyword::Date),
    ("ARTIFACT_REL", Keyword::ArtifactRel),
    ("EXPRESSION", Keyword::Expression),
    ("LANG", Keyword::Lang),
    ("BODY", Keyword::Body),
    ("OBLIGATION", Keyword::Obligation),
    ("SPEC", Keyword::Spec),
    ("TEXT", Keyword::Text),
];

impl Keyword {
    pub fn as_str(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).expect("every keyword is listed")
    }

    /// Keywords that begin a top-level command; parsing resumes at these
    /// after an error.
    pub fn starts_command(self) -> bool {
        matches!(
            self,
            Keyword::Document
                | Keyword::Imports
                | Keyword::Claim
                | Keyword::AssertedInference
                | Keyword::AssertedContext
                | Keyword::AssertedEvidence
                | Keyword::AssertedArtifactSupport
                | Keyword::ArgumentReasoning
                | Keyword::ArtifactReference
                | Keyword::Artifact
                | Keyword::ArtifactRel
                | Keyword::Expression
                | Keyword::Obligation
                | Keyword::Text
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    /// A string literal, unescaped.
    Str(String),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "`{}`", k.as_str()),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Str(_) => f.write_str("a string"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
    /// For strings: the source position of each unescaped character, then
    /// the position of the closing quote.
    pub(crate) positions: Vec<(usize, usize)>,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn pos(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
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
}

fn word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokens and every lexical error; lexing continues past errors.
pub(crate) fn lex(source: &str, file: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, col: 1 };
    let mut toks = Vec::new();
    let mut errs = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        if c.is_whitespace() {
            cur.bump();
        } else if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
        } else if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut positions = Vec::new();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                let at = cur.pos();
                cur.bump();
                match c {
                    '"' => {
                        positions.push(at);
                        closed = true;
                        break;
                    }
                    '\\' => match cur.peek() {
                        Some(e @ ('"' | '\\')) => {
                            cur.bump();
                            value.push(e);
                            positions.push(at);
                        }
                        Some(e) if e != '\n' => {
                            cur.bump();
                            errs.push(ParseError {
                                span: Span::new(file, at, cur.pos()),
                                message: format!("unknown escape `\\{e}`"),
                            });
                        }
                        _ => errs.push(ParseError {
                            span: Span::new(file, at, cur.pos()),
                            message: "unfinished escape".into(),
                        }),
                    },
                    c => {
                        value.push(c);
                        positions.push(at);
                    }
                }
            }
            if closed {
                toks.push(Token { kind: TokenKind::Str(value), span: Span::new(file, start, cur.pos()), positions });
            } else {
                errs.push(ParseError { span: Span::new(file, start, cur.pos()), message: "unterminated string".into() });
            }
        } else if word_char(c) {
            let mut w = String::new();
            while let Some(c) = cur.peek().filter(|c| word_char(*c)) {
                w.push(c);
                cur.bump();
            }
            let kind = match KEYWORDS.iter().find(|(s, _)| *s == w) {
                Some((_, k)) => TokenKind::Keyword(*k),
                None => TokenKind::Ident(w),
            };
            toks.push(Token { kind, span: Span::new(file, start, cur.pos()), positions: Vec::new() });
        } else {
            cur.bump();
            errs.push(ParseError {
                span: Span::new(file, start, cur.pos()),
                message: format!("illegal character `{c}`"),
            });
        }
    }
    (toks, errs)
}

pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let (toks, mut errs) = lex(source, file);
    if errs.is_empty() {
        Ok(toks)
    } else {
        Err(errs.swap_remove(0))
    }
}
