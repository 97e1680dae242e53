use crate::sacm::{
    is_ident, ArtifactKind, AssertionDeclaration, EntityKind, Fragment, Gid, MultiLangString, RelKind,
};

use super::lexer::{lex, Keyword, Token, TokenKind};
use super::{document_name_for, Command, CommandForm, Content, Document, Located, ParseError, Span};

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    file: String,
    eof: (usize, usize),
}

type PResult<T> = Result<T, ParseError>;

fn describe(t: Option<&Token>) -> String {
    t.map_or_else(|| "end of input".to_string(), |t| t.kind.to_string())
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_kw(&self) -> Option<Keyword> {
        match self.peek() {
            Some(Token { kind: TokenKind::Keyword(k), .. }) => Some(*k),
            _ => None,
        }
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span.clone(),
            None => Span::new(&self.file, self.eof, self.eof),
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { span: self.here(), message }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        if self.peek_kw() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<&'t Token> {
        if self.peek_kw() == Some(kw) {
            self.pos += 1;
            Ok(&self.toks[self.pos - 1])
        } else {
            Err(self.error(format!("expected `{}`, found {}", kw.as_str(), describe(self.peek()))))
        }
    }

    fn ident(&mut self, what: &str, after: &str) -> PResult<Located<String>> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(s), span, .. }) => {
                self.pos += 1;
                Ok(Located { value: s.clone(), span: span.clone() })
            }
            t => Err(self.error(format!("expected {what} after {after}, found {}", describe(t)))),
        }
    }

    fn gid(&mut self, after: &str) -> PResult<Located<Gid>> {
        let id = self.ident("a gid", after)?;
        match Gid::new(id.value) {
            Ok(g) => Ok(Located { value: g, span: id.span }),
            Err(e) => Err(ParseError { span: id.span, message: format!("malformed gid: {e}") }),
        }
    }

    fn gid_list(&mut self, after: &str) -> PResult<Vec<Located<Gid>>> {
        if !matches!(self.peek(), Some(Token { kind: TokenKind::Ident(_), .. })) {
            return Err(self.error(format!("expected at least one gid after {after}")));
        }
        let mut out = Vec::new();
        while matches!(self.peek(), Some(Token { kind: TokenKind::Ident(_), .. })) {
            out.push(self.gid(after)?);
        }
        Ok(out)
    }

    fn string(&mut self, after: &str) -> PResult<&'t Token> {
        match self.peek() {
            Some(t @ Token { kind: TokenKind::Str(_), .. }) => {
                self.pos += 1;
                Ok(t)
            }
            t => Err(self.error(format!("expected a string after {after}, found {}", describe(t)))),
        }
    }

    fn plain_string(&mut self, after: &str) -> PResult<Located<String>> {
        let t = self.string(after)?;
        let TokenKind::Str(s) = &t.kind else { unreachable!() };
        Ok(Located { value: s.clone(), span: t.span.clone() })
    }

    fn content(&mut self, after: &str) -> PResult<Content> {
        let t = self.string(after)?;
        let TokenKind::Str(s) = &t.kind else { unreachable!() };
        let chars: Vec<char> = s.chars().collect();
        let (mls, ref_spans) = multilang(&chars, &t.positions, &self.file)?;
        Ok(Content { mls, span: t.span.clone(), ref_spans })
    }

    fn optional_content(&mut self) -> PResult<Content> {
        if self.eat_kw(Keyword::Content) {
            self.content("CONTENT")
        } else {
            Ok(Content::empty())
        }
    }

    fn declaration(&mut self) -> PResult<AssertionDeclaration> {
        if !self.eat_kw(Keyword::Decl) {
            return Ok(AssertionDeclaration::Asserted);
        }
        let d = self.ident("a declaration", "DECL")?;
        AssertionDeclaration::from_keyword(&d.value).ok_or_else(|| ParseError {
            span: d.span,
            message: format!(
                "unknown declaration `{}`; expected one of asserted, axiomatic, assumed, defeated, needs_support",
                d.value
            ),
        })
    }

    /// Parses the command whose keyword is at the cursor.
    fn command(&mut self, kw: Keyword) -> PResult<CommandForm> {
        let kw_name = kw.as_str();
        self.pos += 1;
        Ok(match kw {
            Keyword::Claim => {
                let gid = self.gid(kw_name)?;
                let declaration = self.declaration()?;
                self.expect_kw(Keyword::Content)?;
                CommandForm::Claim { gid, declaration, content: self.content("CONTENT")? }
            }
            Keyword::AssertedInference
            | Keyword::AssertedContext
            | Keyword::AssertedEvidence
            | Keyword::AssertedArtifactSupport => {
                let kind = RelKind::ALL.into_iter().find(|k| k.keyword() == kw_name).expect("relationship keyword");
                let gid = self.gid(kw_name)?;
                let declaration = self.declaration()?;
                let is_counter = self.eat_kw(Keyword::Counter);
                let reasoning = if self.eat_kw(Keyword::Reasoning) { Some(self.gid("REASONING")?) } else { None };
                self.expect_kw(Keyword::Source)?;
                let source = self.gid_list("SOURCE")?;
                self.expect_kw(Keyword::Target)?;
                let target = self.gid_list("TARGET")?;
                let content = self.optional_content()?;
                CommandForm::Relationship { kind, gid, declaration, is_counter, reasoning, source, target, content }
            }
            Keyword::ArgumentReasoning => {
                let gid = self.gid(kw_name)?;
                self.expect_kw(Keyword::Content)?;
                CommandForm::Reasoning { gid, content: self.content("CONTENT")? }
            }
            Keyword::ArtifactReference => {
                let gid = self.gid(kw_name)?;
                self.expect_kw(Keyword::References)?;
                let referenced = self.gid_list("REFERENCES")?;
                let content = self.optional_content()?;
                CommandForm::ArtifactReference { gid, referenced, content }
            }
            Keyword::Artifact => {
                let gid = self.gid(kw_name)?;
                let kind = if self.eat_kw(Keyword::Kind) {
                    let k = self.ident("an artifact kind", "KIND")?;
                    ArtifactKind::from_keyword(&k.value).ok_or_else(|| ParseError {
                        span: k.span,
                        message: format!(
                            "unknown artifact kind `{}`; expected one of artifact, activity, participant, resource, technique",
                            k.value
                        ),
                    })?
                } else {
                    ArtifactKind::Artifact
                };
                self.expect_kw(Keyword::Version)?;
                let version = self.plain_string("VERSION")?.value;
                self.expect_kw(Keyword::Date)?;
                let date = self.plain_string("DATE")?;
                self.expect_kw(Keyword::Content)?;
                CommandForm::Artifact { gid, kind, version, date, content: self.content("CONTENT")? }
            }
            Keyword::ArtifactRel => {
                let gid = self.gid(kw_name)?;
                self.expect_kw(Keyword::Source)?;
                let source = self.gid_list("SOURCE")?;
                self.expect_kw(Keyword::Target)?;
                let target = self.gid_list("TARGET")?;
                self.expect_kw(Keyword::Content)?;
                CommandForm::ArtifactRel { gid, source, target, content: self.content("CONTENT")? }
            }
            Keyword::Expression => {
                let gid = self.gid(kw_name)?;
                self.expect_kw(Keyword::Lang)?;
                let lang = self.plain_string("LANG")?.value;
                self.expect_kw(Keyword::Body)?;
                let body = self.plain_string("BODY")?;
                if body.value.is_empty() {
                    return Err(ParseError { span: body.span, message: "expression body must not be empty".into() });
                }
                CommandForm::Expression { gid, lang, body: body.value }
            }
            Keyword::Obligation => {
                let gid = self.gid(kw_name)?;
                self.expect_kw(Keyword::Spec)?;
                CommandForm::Obligation { gid, spec: self.plain_string("SPEC")? }
            }
            Keyword::Text => CommandForm::Text { content: self.content("TEXT")? },
            _ => unreachable!("not a command keyword"),
        })
    }

    fn recover(&mut self) {
        while let Some(t) = self.peek() {
            if matches!(t.kind, TokenKind::Keyword(k) if k.starts_command()) {
                break;
            }
            self.pos += 1;
        }
    }
}

fn end_of(source: &str) -> (usize, usize) {
    let mut pos = (1, 1);
    for c in source.chars() {
        if c == '\n' {
            pos = (pos.0 + 1, 1);
        } else {
            pos.1 += 1;
        }
    }
    pos
}

/// Parses as much as possible. The document holds every command that
/// parsed; the errors are sorted by position.
pub fn parse_document_partial(source: &str, file: &str) -> (Document, Vec<ParseError>) {
    let (toks, mut errs) = lex(source, file);
    let mut p = Parser { toks: &toks, pos: 0, file: file.to_string(), eof: end_of(source) };
    let mut name = document_name_for(file);
    if p.eat_kw(Keyword::Document) {
        match p.ident("a document name", "DOCUMENT") {
            Ok(n) => name = n.value,
            Err(e) => {
                errs.push(e);
                p.recover();
            }
        }
    }
    let mut imports = Vec::new();
    let mut commands = Vec::new();
    while let Some(t) = p.peek() {
        let start = t.span.clone();
        let result = match t.kind {
            TokenKind::Keyword(Keyword::Imports) => {
                p.pos += 1;
                p.ident("a document name", "IMPORTS").map(|i| imports.push(i))
            }
            TokenKind::Keyword(Keyword::Document) => {
                p.pos += 1;
                Err(ParseError { span: start.clone(), message: "DOCUMENT must be the first command".into() })
            }
            TokenKind::Keyword(k) if k.starts_command() => p.command(k).map(|form| {
                let end = &p.toks[p.pos - 1].span;
                commands.push(Command { span: start.to(end), form });
            }),
            _ => {
                let e = p.error(format!("expected a command, found {}", describe(Some(t))));
                p.pos += 1;
                Err(e)
            }
        };
        if let Err(e) = result {
            errs.push(e);
            p.recover();
        }
    }
    errs.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.message.cmp(&b.message)));
    (Document { name, imports, commands }, errs)
}

pub fn parse_document(source: &str, file: &str) -> Result<Document, Vec<ParseError>> {
    let (doc, errs) = parse_document_partial(source, file);
    if errs.is_empty() {
        Ok(doc)
    } else {
        Err(errs)
    }
}

/// Splits unescaped string content into fragments. `body` is taken to
/// start at the beginning of `span`.
pub fn parse_multilang(body: &str, span: &Span) -> Result<MultiLangString, ParseError> {
    let mut positions = Vec::new();
    let (mut line, mut col) = (span.start_line, span.start_col);
    for c in body.chars() {
        positions.push((line, col));
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    positions.push((line, col));
    let chars: Vec<char> = body.chars().collect();
    multilang(&chars, &positions, &span.file).map(|(m, _)| m)
}

/// `positions` has one entry per character plus one for the end.
fn multilang(chars: &[char], positions: &[(usize, usize)], file: &str) -> PResult<(MultiLangString, Vec<Span>)> {
    let span = |a: usize, b: usize| Span::new(file, positions[a], positions[b]);
    let mut frags: Vec<Fragment> = Vec::new();
    let mut ref_spans = Vec::new();
    let mut text = String::new();
    let mut i = 0;
    while i < chars.len() {
        if !(chars[i] == '@' && chars.get(i + 1) == Some(&'{')) {
            text.push(chars[i]);
            i += 1;
            continue;
        }
        let start = i;
        let Some(close) = matching_brace(chars, i + 1) else {
            return Err(ParseError { span: span(start, start + 2), message: "unclosed antiquotation".into() });
        };
        let mut j = i + 2;
        let word_start = j;
        while j < close && chars[j].is_ascii_alphanumeric() {
            j += 1;
        }
        let word: String = chars[word_start..j].iter().collect();
        if word == "formal" {
            let inner: String = chars[j..close].iter().collect();
            let Some((lang, body)) = inner.split_once(':') else {
                return Err(ParseError {
                    span: span(start, close + 1),
                    message: "formal antiquotation needs `lang: body`".into(),
                });
            };
            let lang = lang.trim();
            if lang.is_empty() || lang.contains(char::is_whitespace) {
                return Err(ParseError { span: span(start, close + 1), message: format!("malformed language tag `{lang}`") });
            }
            if !text.is_empty() {
                frags.push(Fragment::text(std::mem::take(&mut text)));
            }
            frags.push(Fragment::Formal { lang: lang.to_string(), body: body.trim().to_string() });
        } else {
            let Some(kind) = EntityKind::from_name(&word) else {
                let shown = if word.is_empty() { chars[word_start..close].iter().collect() } else { word };
                return Err(ParseError {
                    span: span(word_start, j.max(word_start + 1).min(close)),
                    message: format!("unknown entity kind `{shown}`"),
                });
            };
            let target: String = chars[j..close].iter().collect::<String>().trim().to_string();
            if !is_ident(&target) || !chars.get(j).is_some_and(|c| c.is_whitespace()) {
                return Err(ParseError {
                    span: span(start, close + 1),
                    message: format!("malformed gid `{target}` in antiquotation"),
                });
            }
            if !text.is_empty() {
                frags.push(Fragment::text(std::mem::take(&mut text)));
            }
            frags.push(Fragment::Ref { kind, target: Gid::new(target).expect("checked above") });
            ref_spans.push(span(start, close + 1));
        }
        i = close + 1;
    }
    if !text.is_empty() || frags.is_empty() {
        frags.push(Fragment::text(text));
    }
    Ok((MultiLangString::new(frags).expect("at least one fragment"), ref_spans))
}

/// Index of the `}` closing the `{` at `open`, allowing nested braces.
fn matching_brace(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, c) in chars.iter().enumerate().skip(open) {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}
