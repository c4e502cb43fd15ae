use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::io::{self, BufRead};

use thiserror::Error;

use super::{AnnotatedToken, AnnotatedTweet, Corpus, GenderLabel, LanguageTag};

#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 for errors not tied to a line.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error)]
pub enum ParseErrorKind {
    #[error("unknown language tag {0:?}")]
    UnknownLangTag(String),
    #[error("unknown gender value {0:?}")]
    UnknownGender(String),
    #[error("missing gender line")]
    MissingGender,
    #[error("empty tweet body")]
    EmptyTweet,
    #[error("duplicate tweet id {0:?}")]
    DuplicateId(String),
    #[error("invalid token surface: {0}")]
    BadSurface(String),
    #[error("missing attribute `{0}`")]
    MissingAttribute(&'static str),
    #[error("unexpected end of input inside a tweet record")]
    UnexpectedEof,
    #[error("{0}")]
    Syntax(String),
    #[error("read error: {0}")]
    Io(#[from] io::Error),
}

impl ParseErrorKind {
    /// Content errors leave the record structure intact, so a diagnostic scan
    /// can report them and keep going. Everything else aborts.
    pub fn is_content(&self) -> bool {
        matches!(
            self,
            ParseErrorKind::UnknownLangTag(_)
                | ParseErrorKind::UnknownGender(_)
                | ParseErrorKind::MissingGender
                | ParseErrorKind::EmptyTweet
                | ParseErrorKind::DuplicateId(_)
                | ParseErrorKind::BadSurface(_)
        )
    }
}

/// Result of a diagnostic [`scan_corpus`]: the records that parsed cleanly
/// plus every content problem found along the way.
#[derive(Debug, Default)]
pub struct Scan {
    pub corpus: Corpus,
    pub problems: Vec<ParseError>,
}

/// Parses the annotation format, failing on the first problem.
pub fn parse_corpus<R: BufRead>(input: R) -> Result<Corpus, ParseError> {
    let mut parser = Parser::default();
    parser.run(input, true)?;
    Ok(Corpus::new(parser.tweets))
}

/// Parses the annotation format, collecting content problems (bad tags,
/// missing gender, duplicates) instead of stopping at them. Records with
/// problems are left out of the returned corpus. Structural errors still abort.
pub fn scan_corpus<R: BufRead>(input: R) -> Result<Scan, ParseError> {
    let mut parser = Parser::default();
    parser.run(input, false)?;
    Ok(Scan { corpus: Corpus::new(parser.tweets), problems: parser.problems })
}

/// Writes the canonical form of `corpus`.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for tweet in &corpus.tweets {
        write_tweet(&mut out, tweet).expect("writing to a String cannot fail");
    }
    out
}

/// Writes one record in canonical form: always with the `author` attribute,
/// lowercase gender, LF line endings.
pub fn write_tweet<W: fmt::Write>(out: &mut W, tweet: &AnnotatedTweet) -> fmt::Result {
    writeln!(out, "<tweet id=\"{}\" author=\"{}\">", Escaped(&tweet.id), Escaped(&tweet.author_id))?;
    for tok in &tweet.tokens {
        writeln!(out, "<word lang=\"{}\">{}</word>", tok.lang, Escaped(&tok.surface))?;
    }
    writeln!(out, "<gender>{}</gender>", tweet.gender)?;
    out.write_str("</tweet>\n")
}

/// Placeholder written in place of the gender on unannotated records.
pub const GENDER_PLACEHOLDER: &str = "?";

/// An unannotated record: every token tagged `O` and the gender left as
/// [`GENDER_PLACEHOLDER`]. Parsing reports it until a human fills it in.
pub fn write_skeleton<W: fmt::Write>(out: &mut W, id: &str, author: &str, surfaces: &[String]) -> fmt::Result {
    writeln!(out, "<tweet id=\"{}\" author=\"{}\">", Escaped(id), Escaped(author))?;
    for s in surfaces {
        writeln!(out, "<word lang=\"O\">{}</word>", Escaped(s))?;
    }
    writeln!(out, "<gender>{GENDER_PLACEHOLDER}</gender>")?;
    out.write_str("</tweet>\n")
}

struct Escaped<'a>(&'a str);

impl fmt::Display for Escaped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.0.chars() {
            match c {
                '<' => f.write_str("&lt;")?,
                '>' => f.write_str("&gt;")?,
                '&' => f.write_str("&amp;")?,
                '"' => f.write_str("&quot;")?,
                c => f.write_char(c)?,
            }
        }
        Ok(())
    }
}

/// Decodes the five XML entities. Any other `&` is kept literally.
fn unescape(s: &str) -> String {
    if !s.contains('&') {
        return s.to_owned();
    }
    const ENTITIES: [(&str, char); 5] =
        [("&lt;", '<'), ("&gt;", '>'), ("&amp;", '&'), ("&quot;", '"'), ("&apos;", '\'')];
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match ENTITIES.iter().find(|(e, _)| rest.starts_with(e)) {
            Some((e, c)) => {
                out.push(*c);
                rest = &rest[e.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

struct OpenRecord {
    id: String,
    author_id: Option<String>,
    tokens: Vec<AnnotatedToken>,
    gender: Option<GenderLabel>,
    bad: bool,
}

#[derive(Default)]
struct Parser {
    tweets: Vec<AnnotatedTweet>,
    problems: Vec<ParseError>,
    seen: HashSet<String>,
    open: Option<OpenRecord>,
}

impl Parser {
    fn run<R: BufRead>(&mut self, input: R, strict: bool) -> Result<(), ParseError> {
        let mut last = 0;
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            last = lineno;
            let line = line.map_err(|e| ParseError { line: lineno, kind: e.into() })?;
            if let Err(kind) = self.line(line.trim()) {
                let err = ParseError { line: lineno, kind };
                if strict || !err.kind.is_content() {
                    return Err(err);
                }
                if let Some(open) = self.open.as_mut() {
                    open.bad = true;
                }
                self.problems.push(err);
            }
        }
        if self.open.is_some() {
            return Err(ParseError { line: last, kind: ParseErrorKind::UnexpectedEof });
        }
        Ok(())
    }

    fn line(&mut self, line: &str) -> Result<(), ParseErrorKind> {
        if line.is_empty() {
            return Ok(());
        }
        let Some(open) = self.open.as_mut() else {
            return self.open_record(line);
        };

        if line == "</tweet>" {
            let open = self.open.take().expect("record is open");
            return self.close_record(open);
        }
        if line.starts_with("<word") {
            if open.gender.is_some() {
                return Err(ParseErrorKind::Syntax("word line after gender line".into()));
            }
            let (attrs, rest) = start_tag(line, "word")?;
            let content = rest
                .strip_suffix("</word>")
                .ok_or_else(|| ParseErrorKind::Syntax("word line must end with </word>".into()))?;
            let lang_raw = attr(&attrs, "lang").ok_or(ParseErrorKind::MissingAttribute("lang"))?;
            let surface = unescape(content);
            let lang: LanguageTag =
                lang_raw.parse().map_err(|_| ParseErrorKind::UnknownLangTag(lang_raw.to_owned()))?;
            if surface.is_empty() {
                return Err(ParseErrorKind::BadSurface("empty surface".into()));
            }
            if surface.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(ParseErrorKind::BadSurface(format!("{surface:?} contains whitespace")));
            }
            open.tokens.push(AnnotatedToken { surface, lang });
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix("<gender>") {
            if open.gender.is_some() {
                return Err(ParseErrorKind::Syntax("second gender line in record".into()));
            }
            let value = rest
                .strip_suffix("</gender>")
                .ok_or_else(|| ParseErrorKind::Syntax("gender line must end with </gender>".into()))?
                .trim();
            let gender = value.parse().map_err(|_| ParseErrorKind::UnknownGender(value.to_owned()));
            // Mark the slot filled even on error so following lines are judged correctly.
            open.gender = Some(gender.as_ref().copied().unwrap_or(GenderLabel::Male));
            gender?;
            return Ok(());
        }
        if line.starts_with("<tweet") {
            return Err(ParseErrorKind::Syntax("<tweet> opened before previous record closed".into()));
        }
        Err(ParseErrorKind::Syntax(format!("unexpected line {line:?}")))
    }

    fn open_record(&mut self, line: &str) -> Result<(), ParseErrorKind> {
        if !line.starts_with("<tweet") {
            return Err(ParseErrorKind::Syntax(format!("expected <tweet ...>, found {line:?}")));
        }
        let (attrs, rest) = start_tag(line, "tweet")?;
        if !rest.is_empty() {
            return Err(ParseErrorKind::Syntax("trailing text after <tweet ...>".into()));
        }
        let id = attr(&attrs, "id").ok_or(ParseErrorKind::MissingAttribute("id"))?;
        if id.is_empty() {
            return Err(ParseErrorKind::Syntax("empty tweet id".into()));
        }
        let author_id = attr(&attrs, "author").map(str::to_owned);
        if author_id.as_deref() == Some("") {
            return Err(ParseErrorKind::Syntax("empty author id".into()));
        }
        self.open = Some(OpenRecord {
            id: id.to_owned(),
            author_id,
            tokens: Vec::new(),
            gender: None,
            bad: false,
        });
        if !self.seen.insert(id.to_owned()) {
            return Err(ParseErrorKind::DuplicateId(id.to_owned()));
        }
        Ok(())
    }

    fn close_record(&mut self, open: OpenRecord) -> Result<(), ParseErrorKind> {
        if open.tokens.is_empty() && !open.bad {
            return Err(ParseErrorKind::EmptyTweet);
        }
        let Some(gender) = open.gender else {
            return Err(ParseErrorKind::MissingGender);
        };
        if open.bad {
            return Ok(());
        }
        self.tweets.push(AnnotatedTweet {
            author_id: open.author_id.unwrap_or_else(|| open.id.clone()),
            id: open.id,
            tokens: open.tokens,
            gender,
        });
        Ok(())
    }
}

/// Splits `<name k="v" ...>rest` into decoded attributes and `rest`.
fn start_tag<'a>(line: &'a str, name: &str) -> Result<(Vec<(&'a str, String)>, &'a str), ParseErrorKind> {
    let body = line
        .strip_prefix('<')
        .and_then(|l| l.strip_prefix(name))
        .ok_or_else(|| ParseErrorKind::Syntax(format!("expected <{name}")))?;
    let mut attrs = Vec::new();
    let mut rest = body;
    loop {
        let trimmed = rest.trim_start();
        if let Some(after) = trimmed.strip_prefix('>') {
            return Ok((attrs, after));
        }
        // attributes must be separated from the tag name and each other
        if trimmed.len() == rest.len() {
            return Err(ParseErrorKind::Syntax(format!("malformed <{name}> tag")));
        }
        let eq = trimmed
            .find('=')
            .ok_or_else(|| ParseErrorKind::Syntax(format!("malformed attribute in <{name}>")))?;
        let key = &trimmed[..eq];
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(ParseErrorKind::Syntax(format!("bad attribute name {key:?}")));
        }
        let after_eq = &trimmed[eq + 1..];
        let quote = after_eq
            .chars()
            .next()
            .filter(|c| *c == '"' || *c == '\'')
            .ok_or_else(|| ParseErrorKind::Syntax(format!("attribute {key} must be quoted")))?;
        let value_start = &after_eq[1..];
        let close = value_start
            .find(quote)
            .ok_or_else(|| ParseErrorKind::Syntax(format!("unterminated attribute {key}")))?;
        if attrs.iter().any(|(k, _)| *k == key) {
            return Err(ParseErrorKind::Syntax(format!("repeated attribute {key}")));
        }
        attrs.push((key, unescape(&value_start[..close])));
        rest = &value_start[close + 1..];
    }
}

fn attr<'a>(attrs: &'a [(&str, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Corpus, ParseError> {
        parse_corpus(s.as_bytes())
    }

    const ONE: &str = "<tweet id=\"1\" author=\"u1\">\n\
<word lang=\"En\">triple</word>\n\
<word lang=\"Hi\">mudda</word>\n\
<word lang=\"O\">#GST</word>\n\
<gender>male</gender>\n\
</tweet>\n";

    #[test]
    fn decodes_a_record() {
        let c = parse(ONE).unwrap();
        assert_eq!(c.len(), 1);
        let t = &c.tweets[0];
        assert_eq!(t.id, "1");
        assert_eq!(t.author_id, "u1");
        assert_eq!(t.gender, GenderLabel::Male);
        let langs: Vec<_> = t.tokens.iter().map(|t| t.lang).collect();
        assert_eq!(langs, [LanguageTag::En, LanguageTag::Hi, LanguageTag::O]);
        assert_eq!(t.tokens[2].surface, "#GST");
    }

    #[test]
    fn canonical_form_is_byte_exact() {
        assert_eq!(serialize_corpus(&parse(ONE).unwrap()), ONE);
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n\n  \n").unwrap().is_empty());
        assert_eq!(serialize_corpus(&Corpus::default()), "");
    }

    #[test]
    fn author_defaults_to_tweet_id() {
        let c = parse("<tweet id=\"77\">\n<word lang=\"En\">x</word>\n<gender>FEMALE</gender>\n</tweet>\n").unwrap();
        assert_eq!(c.tweets[0].author_id, "77");
        assert_eq!(c.tweets[0].gender, GenderLabel::Female);
    }

    #[test]
    fn entities_round_trip() {
        let src = "<tweet id=\"a&amp;b\" author=\"q&quot;\">\n<word lang=\"O\">&lt;3&amp;&gt;</word>\n<gender>male</gender>\n</tweet>\n";
        let c = parse(src).unwrap();
        assert_eq!(c.tweets[0].id, "a&b");
        assert_eq!(c.tweets[0].author_id, "q\"");
        assert_eq!(c.tweets[0].tokens[0].surface, "<3&>");
        assert_eq!(serialize_corpus(&c), src);
    }

    #[test]
    fn blank_lines_and_indentation_tolerated() {
        let src = format!("\n\n{}\n\n  {}", ONE, ONE.replace("id=\"1\"", "id=\"2\""));
        assert_eq!(parse(&src).unwrap().len(), 2);
    }

    fn err_of(s: &str) -> ParseError {
        parse(s).unwrap_err()
    }

    #[test]
    fn unknown_lang_tag_is_positioned() {
        let e = err_of("<tweet id=\"1\">\n<word lang=\"Xx\">a</word>\n<gender>male</gender>\n</tweet>\n");
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::UnknownLangTag(ref t) if t == "Xx"));
    }

    #[test]
    fn missing_gender() {
        let e = err_of("<tweet id=\"1\">\n<word lang=\"En\">a</word>\n</tweet>\n");
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::MissingGender));
    }

    #[test]
    fn empty_body() {
        let e = err_of("<tweet id=\"1\">\n<gender>male</gender>\n</tweet>\n");
        assert!(matches!(e.kind, ParseErrorKind::EmptyTweet));
    }

    #[test]
    fn duplicate_id() {
        let e = err_of(&format!("{ONE}{ONE}"));
        assert_eq!(e.line, 7);
        assert!(matches!(e.kind, ParseErrorKind::DuplicateId(ref id) if id == "1"));
    }

    #[test]
    fn unknown_gender() {
        let e = err_of("<tweet id=\"1\">\n<word lang=\"En\">a</word>\n<gender>other</gender>\n</tweet>\n");
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::UnknownGender(_)));
    }

    #[test]
    fn truncated_record() {
        let e = err_of("<tweet id=\"1\">\n<word lang=\"En\">a</word>\n");
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEof));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(err_of("hello\n").kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(err_of("<tweet author=\"x\">\n").kind, ParseErrorKind::MissingAttribute("id")));
        assert!(matches!(err_of("<tweet id=1>\n").kind, ParseErrorKind::Syntax(_)));
        let e = err_of("<tweet id=\"1\">\n<word lang=\"En\">a</word>\n<gender>male</gender>\n<word lang=\"En\">b</word>\n");
        assert_eq!(e.line, 4);
        // space-separated token form is not accepted
        assert!(err_of("<tweet id=\"1\">\nhello En\n").line == 2);
    }

    #[test]
    fn whitespace_surface_rejected() {
        let e = err_of("<tweet id=\"1\">\n<word lang=\"En\">a b</word>\n<gender>male</gender>\n</tweet>\n");
        assert!(matches!(e.kind, ParseErrorKind::BadSurface(_)));
    }

    #[test]
    fn scan_collects_content_problems() {
        let src = format!(
            "{ONE}<tweet id=\"2\">\n<word lang=\"En\">a</word>\n<gender>?</gender>\n</tweet>\n\
             <tweet id=\"3\">\n<word lang=\"Zz\">a</word>\n<gender>male</gender>\n</tweet>\n{ONE}"
        );
        let scan = scan_corpus(src.as_bytes()).unwrap();
        assert_eq!(scan.corpus.len(), 1);
        let lines: Vec<_> = scan.problems.iter().map(|p| p.line).collect();
        assert_eq!(lines, [9, 12, 15]);
    }
}
