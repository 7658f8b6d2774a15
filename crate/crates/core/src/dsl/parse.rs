use crate::ccd::Selector;
use crate::diagnostics::{Code, Diagnostic, Location};
use crate::fault_tree::FtExpr;
use crate::lifetime::BasicEvent;
use crate::metrics::LoadSpec;

use super::check::structure;
use super::{BoxDecl, ConsequenceDecl, FtDecl, Mission, Model, PathDecl, TimeUnit};

/// Deepest gate nesting accepted inside one `ft` line.
pub const MAX_EXPR_DEPTH: usize = 64;
/// Largest fault tree, in nodes, after expanding `ft` references.
pub const MAX_FT_EXPANSION: usize = 1_000_000;

const RESERVED: [&str; 3] = ["AND", "OR", "NOT"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

type PResult<T> = std::result::Result<T, Diagnostic>;

fn err(line: usize, col: usize, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(Code::ParseError, msg).at(line, col)
}

fn lex(line_no: usize, line: &str) -> PResult<(Vec<Token>, usize)> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if c.is_ascii_digit() || matches!(c, '.' | '+' | '-') {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | '+' | '-' | 'e' | 'E')) {
                i += 1;
            }
            toks.push(Token { tok: Tok::Num(chars[start..i].iter().collect()), col });
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(line_no, col, "unterminated string")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(err(line_no, i + 1, "invalid escape in string")),
                        };
                        s.push(esc);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            toks.push(Token { tok: Tok::Str(s), col });
        } else if "=()[]{},:".contains(c) {
            toks.push(Token { tok: Tok::Punct(c), col });
            i += 1;
        } else {
            return Err(err(line_no, col, format!("unexpected character `{}`", c.escape_debug())));
        }
    }
    Ok((toks, chars.len() + 1))
}

fn parse_float(text: &str) -> Option<f64> {
    if !text.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct Line<'a> {
    no: usize,
    toks: &'a [Token],
    pos: usize,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(err(self.no, self.col(), msg))
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Location)> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let loc = Location { line: self.no, col: self.col() };
                self.pos += 1;
                Ok((s.clone(), loc))
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn name(&mut self, what: &str) -> PResult<(String, Location)> {
        let col = self.col();
        let (n, loc) = self.ident(what)?;
        if RESERVED.contains(&n.as_str()) {
            return Err(err(self.no, col, format!("`{n}` is reserved and cannot name a declaration")));
        }
        Ok((n, loc))
    }

    fn punct(&mut self, c: char) -> PResult<()> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{c}`"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Punct(c));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`")),
        }
    }

    fn number(&mut self, what: &str) -> PResult<f64> {
        match self.peek() {
            Some(Tok::Num(s)) => match parse_float(s) {
                Some(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                None => self.fail(format!("`{s}` is not a valid number")),
            },
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn integer(&mut self, what: &str) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Num(s)) => match s.parse::<u64>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.fail(format!("`{s}` is not a non-negative integer")),
            },
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn key(&mut self) -> PResult<(String, usize)> {
        let col = self.col();
        let (k, _) = self.ident("a `key=value` setting")?;
        self.punct('=')?;
        Ok((k, col))
    }

    fn finish(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            self.fail("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn expr(&mut self, depth: usize) -> PResult<FtExpr> {
        if depth > MAX_EXPR_DEPTH {
            return self.fail(format!("gates nested deeper than {MAX_EXPR_DEPTH}"));
        }
        let col = self.col();
        let (id, _) = self.ident("an event, fault tree or gate")?;
        if !self.eat('(') {
            if RESERVED.contains(&id.as_str()) {
                return Err(err(self.no, col, format!("gate `{id}` needs an argument list")));
            }
            return Ok(FtExpr::Atomic(id));
        }
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                args.push(self.expr(depth + 1)?);
                if self.eat(')') {
                    break;
                }
                self.punct(',')?;
            }
        }
        match id.as_str() {
            "AND" => Ok(FtExpr::And(args)),
            "OR" => Ok(FtExpr::Or(args)),
            "NOT" if args.len() == 1 => Ok(FtExpr::Not(Box::new(args.pop().unwrap()))),
            "NOT" => Err(err(self.no, col, "NOT takes exactly one argument")),
            _ => Err(err(self.no, col, format!("unknown gate `{id}`; expected AND, OR or NOT"))),
        }
    }

    fn selector(&mut self) -> PResult<Selector> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let sel = match s.as_str() {
                    "yes" => Selector::Yes,
                    "no" => Selector::No,
                    "skip" => Selector::Irrelevant,
                    _ => return self.fail(format!("`{s}` is not a selector; use yes, no or skip")),
                };
                self.pos += 1;
                Ok(sel)
            }
            Some(Tok::Num(s)) => {
                let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return self.fail(format!("`{s}` is not a selector code"));
                }
                // Codes other than 0 and 1 mean the box is irrelevant.
                let sel = s.parse::<i64>().map_or(Selector::Irrelevant, Selector::from_code);
                self.pos += 1;
                Ok(sel)
            }
            _ => self.fail("expected a selector (yes, no, skip)"),
        }
    }
}

#[derive(Default)]
struct Builder {
    model: Model,
    saw_model: bool,
    errors: Vec<Diagnostic>,
}

impl Builder {
    fn declare(&mut self, name: &str, loc: Location) -> PResult<()> {
        if let Some(prev) = self.model.spans.0.get(name) {
            return Err(Diagnostic::error(
                Code::DuplicateName,
                format!("`{name}` is already declared at line {}", prev.line),
            )
            .at(loc.line, loc.col));
        }
        self.model.spans.0.insert(name.to_string(), loc);
        Ok(())
    }

    fn line(&mut self, ln: &mut Line<'_>) -> PResult<()> {
        let Some(Tok::Ident(kw)) = ln.peek() else {
            return ln.fail("expected a declaration keyword");
        };
        let kw = kw.clone();
        let kw_col = ln.col();
        ln.pos += 1;
        match kw.as_str() {
            "model" => {
                if self.saw_model {
                    return Err(err(ln.no, kw_col, "the model name is already set"));
                }
                match ln.peek() {
                    Some(Tok::Str(s)) => {
                        self.model.name = s.clone();
                        ln.pos += 1;
                    }
                    _ => return ln.fail("expected a quoted model name"),
                }
                ln.finish()?;
                self.saw_model = true;
            }
            "mission" => {
                if self.model.mission.is_some() {
                    return Err(err(ln.no, kw_col, "mission time is already set"));
                }
                let (mut t, mut unit) = (None, None);
                while ln.peek().is_some() {
                    let (k, col) = ln.key()?;
                    match k.as_str() {
                        "t" if t.is_none() => t = Some(ln.number("a mission time")?),
                        "unit" if unit.is_none() => {
                            let (u, _) = ln.ident("`years` or `hours`")?;
                            unit = Some(match u.as_str() {
                                "years" => TimeUnit::Years,
                                "hours" => TimeUnit::Hours,
                                _ => return Err(err(ln.no, col, format!("unknown unit `{u}`"))),
                            });
                        }
                        _ => return Err(err(ln.no, col, format!("unexpected or repeated setting `{k}`"))),
                    }
                }
                let Some(t) = t else {
                    return Err(err(ln.no, kw_col, "mission needs `t=`"));
                };
                self.model.mission = Some(Mission { t, unit: unit.unwrap_or(TimeUnit::Years) });
            }
            "event" => {
                let (name, loc) = ln.name("an event name")?;
                let (k, col) = ln.key()?;
                let event = match k.as_str() {
                    "rate" => BasicEvent::exponential(name.clone(), ln.number("a failure rate")?),
                    "prob" => BasicEvent::constant(name.clone(), ln.number("a probability")?),
                    _ => return Err(err(ln.no, col, "expected `rate=` or `prob=`")),
                };
                ln.finish()?;
                self.declare(&name, loc)?;
                self.model.events.push(event);
            }
            "ft" => {
                let (name, loc) = ln.name("a fault-tree name")?;
                ln.punct('=')?;
                let expr = ln.expr(0)?;
                ln.finish()?;
                self.declare(&name, loc)?;
                self.model.fts.push(FtDecl { name, expr });
            }
            "box" => {
                let (name, loc) = ln.name("a box name")?;
                ln.punct('=')?;
                ln.keyword("dec")?;
                ln.punct('(')?;
                let (ft, _) = ln.ident("a fault-tree or event name")?;
                ln.punct(')')?;
                ln.finish()?;
                self.declare(&name, loc)?;
                self.model.boxes.push(BoxDecl { name, ft });
            }
            "path" => {
                let (name, loc) = ln.name("a path name")?;
                ln.punct('=')?;
                ln.punct('[')?;
                let mut steps = Vec::new();
                if !ln.eat(']') {
                    loop {
                        let (b, _) = ln.ident("a box name")?;
                        ln.punct(':')?;
                        steps.push((b, ln.selector()?));
                        if ln.eat(']') {
                            break;
                        }
                        ln.punct(',')?;
                    }
                }
                ln.finish()?;
                self.declare(&name, loc)?;
                self.model.paths.push(PathDecl { name, steps });
            }
            "consequence" => {
                let (name, loc) = ln.name("a consequence name")?;
                ln.punct('=')?;
                ln.punct('{')?;
                let mut paths = Vec::new();
                if !ln.eat('}') {
                    loop {
                        paths.push(ln.ident("a path name")?.0);
                        if ln.eat('}') {
                            break;
                        }
                        ln.punct(',')?;
                    }
                }
                ln.finish()?;
                self.declare(&name, loc)?;
                self.model.consequences.push(ConsequenceDecl { name, paths });
            }
            "load" => {
                let (name, loc) = ln.name("a load name")?;
                let (mut cons, mut mttr, mut customers) = (None, None, None);
                while ln.peek().is_some() {
                    let (k, col) = ln.key()?;
                    match k.as_str() {
                        "consequence" if cons.is_none() => cons = Some(ln.ident("a consequence name")?.0),
                        "mttr" if mttr.is_none() => mttr = Some(ln.number("an MTTR in hours")?),
                        "customers" if customers.is_none() => customers = Some(ln.integer("a customer count")?),
                        _ => return Err(err(ln.no, col, format!("unexpected or repeated setting `{k}`"))),
                    }
                }
                let (Some(consequence), Some(mttr_h), Some(customers)) = (cons, mttr, customers) else {
                    return Err(err(ln.no, kw_col, "load needs `consequence=`, `mttr=` and `customers=`"));
                };
                self.declare(&name, loc)?;
                self.model.loads.push(LoadSpec { label: name, consequence, mttr_h, customers });
            }
            _ => return Err(err(ln.no, kw_col, format!("unknown declaration `{kw}`"))),
        }
        Ok(())
    }
}

/// Parses model text. On failure every diagnostic carries a position.
pub fn parse(text: &str) -> Result<Model, Vec<Diagnostic>> {
    let mut b = Builder::default();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let (toks, end_col) = match lex(no, raw) {
            Ok(v) => v,
            Err(d) => {
                b.errors.push(d);
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut ln = Line { no, toks: &toks, pos: 0, end_col };
        if let Err(d) = b.line(&mut ln) {
            b.errors.push(d);
        }
    }
    if !b.errors.is_empty() {
        return Err(b.errors);
    }
    let model = b.model;
    let errors: Vec<Diagnostic> = structure(&model)
        .into_iter()
        .map(|d| if d.location.is_none() { d.at(1, 1) } else { d })
        .collect();
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

/// [`parse`] for raw bytes; invalid UTF-8 is a positioned parse error.
pub fn parse_bytes(bytes: &[u8]) -> Result<Model, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let col = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
            Err(vec![err(line, col, "input is not valid UTF-8")])
        }
    }
}
