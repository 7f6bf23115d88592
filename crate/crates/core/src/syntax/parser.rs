use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::data::{Assertion, Condition, Term};
use crate::instances::{registry_lookup, InstanceError};
use crate::nominal::{Name, Nominal};
use crate::params::Instance;

use super::{check_guarded, Agent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared name `{name}`")]
    UndeclaredName { name: String, line: usize, col: usize },
    #[error("guardedness violation in `{def}`: assertion `{assertion}` is unguarded in `{replication}`")]
    GuardednessViolation {
        def: String,
        replication: String,
        assertion: String,
    },
    #[error("missing `instance <key>` header")]
    MissingInstance,
    #[error(transparent)]
    UnknownInstance(#[from] InstanceError),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
}

/// The contents of an agent file.
#[derive(Clone)]
pub struct ParsedUnit {
    pub instance_key: String,
    pub instance: Arc<dyn Instance>,
    /// Declared free names, when the file has a `names` line.
    pub names: Option<Vec<Name>>,
    pub defs: Vec<(String, Agent)>,
}

impl ParsedUnit {
    pub fn get(&self, name: &str) -> Result<&Agent, ParseError> {
        self.defs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| ParseError::UnknownDefinition(name.to_string()))
    }
}

impl fmt::Debug for ParsedUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParsedUnit")
            .field("instance", &self.instance_key)
            .field("names", &self.names)
            .field("defs", &self.defs)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 14] = ["<->", "(|", "|)", ":=", "[]", "<>", "|", "!", ".", "(", ")", ",", ":", "="];
const KEYWORDS: [&str; 5] = ["case", "new", "def", "instance", "names"];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = content.chars().collect();
        let mut j = 0;
        while j < chars.len() {
            let c = chars[j];
            let col = j + 1;
            if c.is_whitespace() {
                j += 1;
            } else if c.is_ascii_digit() {
                let start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                let v = s.parse::<i64>().map_err(|e| ParseError::Syntax {
                    line,
                    col,
                    msg: format!("bad integer `{s}`: {e}"),
                })?;
                out.push(Token { tok: Tok::Int(v), line, col });
            } else if c.is_alphabetic() || c == '_' {
                let start = j;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..j].iter().collect()),
                    line,
                    col,
                });
            } else {
                let rest: String = chars[j..].iter().take(3).collect();
                match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                    Some(s) => {
                        out.push(Token { tok: Tok::Sym(s), line, col });
                        j += s.chars().count();
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: format!("unexpected character `{c}`"),
                        })
                    }
                }
            }
        }
    }
    // end of input sits just after the last non-blank content
    let (line, col) = text
        .lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let content = l.split('#').next().unwrap_or("").trim_end();
            (!content.is_empty()).then(|| (i + 1, content.chars().count() + 1))
        })
        .last()
        .unwrap_or((1, 1));
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    inst: &'a dyn Instance,
    defs: &'a [(String, Agent)],
    first_seen: BTreeMap<Name, (usize, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect(&mut self, sym: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", Self::describe(self.peek())))
        }
    }

    fn eat(&mut self, sym: &'static str) -> bool {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn binder(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !self.is_constant(&s) => {
                self.bump();
                Ok(Name::new(&s))
            }
            other => self.error(format!("expected a name, found {}", Self::describe(&other))),
        }
    }

    fn is_constant(&self, s: &str) -> bool {
        self.inst.constants().contains(&s)
    }

    fn is_function(&self, s: &str) -> bool {
        self.inst.function_symbols().iter().any(|(f, _)| *f == s)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => self.error(format!("keyword `{s}` cannot be a term")),
            Tok::Ident(s) if self.is_function(&s) && *self.peek_at(1) == Tok::Sym("(") => {
                self.bump();
                self.bump();
                let mut args = vec![self.term()?];
                while self.eat(",") {
                    args.push(self.term()?);
                }
                self.expect(")")?;
                Ok(Term::app(&s, args))
            }
            Tok::Ident(s) if self.is_constant(&s) => {
                self.bump();
                Ok(Term::app(&s, vec![]))
            }
            Tok::Ident(s) => {
                self.bump();
                let n = Name::new(&s);
                self.first_seen.entry(n).or_insert((line, col));
                Ok(Term::Name(n))
            }
            other => self.error(format!("expected a term, found {}", Self::describe(&other))),
        }
    }

    fn checked_term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = self.here();
        let t = self.term()?;
        self.inst
            .validate_term(&t)
            .map_err(|msg| ParseError::Syntax { line, col, msg })?;
        Ok(t)
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let (line, col) = self.here();
        let c = match self.peek().clone() {
            Tok::Ident(s)
                if self.inst.predicates().iter().any(|(p, _)| *p == s) && *self.peek_at(1) == Tok::Sym("(") =>
            {
                self.bump();
                self.bump();
                let mut args = vec![self.term()?];
                while self.eat(",") {
                    args.push(self.term()?);
                }
                self.expect(")")?;
                Condition::Pred(s.as_str().into(), args)
            }
            _ => {
                let a = self.term()?;
                let op = self.bump();
                let b = self.term()?;
                match op {
                    Tok::Sym("=") => Condition::Eq(a, b),
                    Tok::Sym("<>") => Condition::Neq(a, b),
                    Tok::Sym("<->") => Condition::Chan(a, b),
                    other => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: format!("expected `=`, `<>` or `<->`, found {}", Self::describe(&other)),
                        })
                    }
                }
            }
        };
        self.inst
            .validate_condition(&c)
            .map_err(|msg| ParseError::Syntax { line, col, msg })?;
        Ok(c)
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        let (line, col) = self.here();
        if *self.peek() == Tok::Sym("|)") {
            return Ok(Assertion::unit());
        }
        if *self.peek() == Tok::Int(1) && *self.peek_at(1) == Tok::Sym("|)") {
            self.bump();
            return Ok(Assertion::unit());
        }
        let mut bindings = Vec::new();
        loop {
            let l = self.term()?;
            self.expect(":=")?;
            let r = self.term()?;
            bindings.push((l, r));
            if !self.eat(",") {
                break;
            }
        }
        let a = Assertion::from_bindings(bindings);
        self.inst
            .validate_assertion(&a)
            .map_err(|msg| ParseError::Syntax { line, col, msg })?;
        Ok(a)
    }

    fn par(&mut self) -> Result<Agent, ParseError> {
        let mut p = self.unary()?;
        while self.eat("|") {
            let q = self.unary()?;
            p = Agent::par(p, q);
        }
        Ok(p)
    }

    fn continuation(&mut self) -> Result<Agent, ParseError> {
        if self.eat(".") {
            self.unary()
        } else {
            Ok(Agent::nil())
        }
    }

    fn unary(&mut self) -> Result<Agent, ParseError> {
        match self.peek().clone() {
            Tok::Int(0) if !matches!(self.peek_at(1), Tok::Sym("!") | Tok::Sym("(")) => {
                self.bump();
                Ok(Agent::nil())
            }
            Tok::Sym("!") => {
                self.bump();
                Ok(Agent::rep(self.unary()?))
            }
            Tok::Sym("(|") => {
                self.bump();
                let a = self.assertion()?;
                self.expect("|)")?;
                Ok(Agent::assertion(a))
            }
            Tok::Sym("(") => {
                self.bump();
                if *self.peek() == Tok::Ident("new".into()) {
                    self.bump();
                    let mut names = vec![self.binder()?];
                    while self.eat(",") {
                        names.push(self.binder()?);
                    }
                    self.expect(")")?;
                    let body = self.unary()?;
                    Ok(Agent::res_all(&names, body))
                } else {
                    let p = self.par()?;
                    self.expect(")")?;
                    Ok(p)
                }
            }
            Tok::Ident(s) if s == "case" => {
                self.bump();
                let mut branches = Vec::new();
                loop {
                    let c = self.condition()?;
                    self.expect(":")?;
                    let p = self.unary()?;
                    branches.push((c, p));
                    if !self.eat("[]") {
                        break;
                    }
                }
                Ok(Agent::case(branches))
            }
            Tok::Ident(s)
                if !matches!(self.peek_at(1), Tok::Sym("!") | Tok::Sym("("))
                    && self.defs.iter().any(|(d, _)| *d == s) =>
            {
                self.bump();
                Ok(self.defs.iter().find(|(d, _)| *d == s).unwrap().1.clone())
            }
            Tok::Ident(_) | Tok::Int(_) => {
                let m = self.checked_term()?;
                if self.eat("!") {
                    let n = self.checked_term()?;
                    let p = self.continuation()?;
                    Ok(Agent::output(m, n, p))
                } else if self.eat("(") {
                    let x = self.binder()?;
                    self.expect(")")?;
                    let p = self.continuation()?;
                    Ok(Agent::input(m, x, p))
                } else {
                    self.error(format!(
                        "expected `!` or `(` after subject `{m}`, found {}",
                        Self::describe(self.peek())
                    ))
                }
            }
            other => self.error(format!("expected an agent, found {}", Self::describe(&other))),
        }
    }
}

fn guarded(def: &str, p: &Agent) -> Result<(), ParseError> {
    check_guarded(p).map_err(|v| ParseError::GuardednessViolation {
        def: def.to_string(),
        replication: v.replication,
        assertion: v.assertion,
    })
}

/// Parses a single agent in the given instance. Free names need no
/// declaration.
pub fn parse_agent(inst: &dyn Instance, text: &str) -> Result<Agent, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        inst,
        defs: &[],
        first_seen: BTreeMap::new(),
    };
    let a = p.par()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after agent", Parser::describe(p.peek())));
    }
    guarded("<agent>", &a)?;
    Ok(a)
}

/// Parses an agent file: an `instance <key>` line, an optional `names`
/// line, and `def <Name> = <agent>` blocks. Earlier definitions may be
/// referenced by name in later ones and are expanded in place.
pub fn parse(text: &str) -> Result<ParsedUnit, ParseError> {
    // the instance key may contain `-`, so the header is read before lexing
    let mut key = None;
    let mut rest = String::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        if words.next() == Some("instance") {
            if key.is_some() {
                return Err(ParseError::Syntax {
                    line: i + 1,
                    col: 1,
                    msg: "duplicate `instance` header".into(),
                });
            }
            key = Some(words.next().map(str::to_string).ok_or(ParseError::Syntax {
                line: i + 1,
                col: 1,
                msg: "expected an instance key".into(),
            })?);
            rest.push('\n');
        } else {
            rest.push_str(line);
            rest.push('\n');
        }
    }
    let key = key.ok_or(ParseError::MissingInstance)?;
    let inst = registry_lookup(&key)?;
    let toks = lex(&rest)?;

    let mut names: Option<Vec<Name>> = None;
    let mut defs: Vec<(String, Agent)> = Vec::new();
    let mut pos = 0;
    if toks[pos].tok == Tok::Ident("names".into()) {
        let line = toks[pos].line;
        pos += 1;
        let mut v = Vec::new();
        while toks[pos].line == line {
            match &toks[pos].tok {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => v.push(Name::new(s)),
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        col: toks[pos].col,
                        msg: "expected a name".into(),
                    })
                }
            }
            pos += 1;
        }
        names = Some(v);
    }
    let declared: Option<BTreeSet<Name>> = names.as_ref().map(|v| v.iter().copied().collect());

    while toks[pos].tok != Tok::Eof {
        let t = &toks[pos];
        if t.tok != Tok::Ident("def".into()) {
            return Err(ParseError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("expected `def`, found {}", Parser::describe(&t.tok)),
            });
        }
        let def_name = match &toks[pos + 1].tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            other => {
                return Err(ParseError::Syntax {
                    line: toks[pos + 1].line,
                    col: toks[pos + 1].col,
                    msg: format!("expected a definition name, found {}", Parser::describe(other)),
                })
            }
        };
        if toks[pos + 2].tok != Tok::Sym("=") {
            return Err(ParseError::Syntax {
                line: toks[pos + 2].line,
                col: toks[pos + 2].col,
                msg: "expected `=`".into(),
            });
        }
        if defs.iter().any(|(d, _)| *d == def_name) {
            return Err(ParseError::Syntax {
                line: toks[pos + 1].line,
                col: toks[pos + 1].col,
                msg: format!("duplicate definition `{def_name}`"),
            });
        }
        let start = pos + 3;
        let mut end = start;
        while toks[end].tok != Tok::Eof && toks[end].tok != Tok::Ident("def".into()) {
            end += 1;
        }
        let mut body: Vec<Token> = toks[start..end].to_vec();
        body.push(Token {
            tok: Tok::Eof,
            line: toks[end].line,
            col: toks[end].col,
        });
        let mut p = Parser {
            toks: body,
            pos: 0,
            inst: inst.as_ref(),
            defs: &defs,
            first_seen: BTreeMap::new(),
        };
        let agent = p.par()?;
        if *p.peek() != Tok::Eof {
            return p.error(format!("unexpected {} after agent", Parser::describe(p.peek())));
        }
        guarded(&def_name, &agent)?;
        if let Some(declared) = &declared {
            for n in agent.support() {
                if !declared.contains(&n) {
                    let (line, col) = p.first_seen.get(&n).copied().unwrap_or((t.line, t.col));
                    return Err(ParseError::UndeclaredName {
                        name: n.to_string(),
                        line,
                        col,
                    });
                }
            }
        }
        defs.push((def_name, agent));
        pos = end;
    }
    Ok(ParsedUnit {
        instance_key: key,
        instance: inst,
        names,
        defs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CryptoInstance, PiInstance};
    use crate::nominal::Alpha;

    fn t(s: &str) -> Term {
        Term::name(s)
    }

    #[test]
    fn output_with_nil() {
        let p = parse_agent(&PiInstance, "a!b.0").unwrap();
        assert_eq!(p, Agent::output(t("a"), t("b"), Agent::nil()));
        assert_eq!(parse_agent(&PiInstance, "a!b").unwrap(), p);
    }

    #[test]
    fn crypto_agent() {
        let p = parse_agent(&CryptoInstance, "(new a,k)((|x:=enc(a,k)|) | b(z).b!k.case z=a : c!d)").unwrap();
        let enc = Term::app("enc", vec![t("a"), t("k")]);
        let body = Agent::par(
            Agent::assertion(Assertion::binding(t("x"), enc)),
            Agent::input(
                t("b"),
                Name::new("z"),
                Agent::output(
                    t("b"),
                    t("k"),
                    Agent::case(vec![(Condition::Eq(t("z"), t("a")), Agent::output(t("c"), t("d"), Agent::nil()))]),
                ),
            ),
        );
        assert_eq!(p, Agent::res_all(&[Name::new("a"), Name::new("k")], body));
    }

    #[test]
    fn two_branch_case() {
        let p = parse_agent(&PiInstance, "case x=b : a!b [] x<>b : a!c").unwrap();
        let Agent::Case(bs) = &p else { panic!() };
        assert_eq!(bs.len(), 2);
        assert_eq!(bs[1].0, Condition::Neq(t("x"), t("b")));
    }

    #[test]
    fn precedence() {
        let p = parse_agent(&PiInstance, "!a(x).0 | b!c").unwrap();
        assert!(matches!(p, Agent::Par(ref l, _) if matches!(**l, Agent::Rep(_))));
        let q = parse_agent(&PiInstance, "a(x).b!x | c!c").unwrap();
        assert!(matches!(q, Agent::Par(..)));
    }

    #[test]
    fn errors_are_located() {
        match parse_agent(&PiInstance, "a!b.\n  c?d") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 4)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_agent(&CryptoInstance, "!(|x:=a|)"),
            Err(ParseError::GuardednessViolation { .. })
        ));
    }

    #[test]
    fn files_and_references() {
        let text = "# example\ninstance pi\nnames a b\ndef P' = a!b.a!b\ndef P = a(x).P'\n";
        let unit = parse(text).unwrap();
        assert_eq!(unit.defs.len(), 2);
        let p = unit.get("P").unwrap();
        assert!(matches!(p, Agent::Input(..)));
        assert!(matches!(unit.get("Q"), Err(ParseError::UnknownDefinition(_))));
        let bad = "instance pi\nnames a\ndef P = a!c\n";
        assert!(matches!(parse(bad), Err(ParseError::UndeclaredName { .. })));
        assert!(matches!(parse("instance bogus\n"), Err(ParseError::UnknownInstance(_))));
    }

    #[test]
    fn round_trip() {
        let cases: [(&dyn Instance, &str); 4] = [
            (&PiInstance, "a(x).case x=b : a!b.a!b [] x<>b : a!b.a!b"),
            (&CryptoInstance, "(new a,k)((|x:=enc(a,k)|) | b(z).b!k.case z=a : c!d)"),
            (&PiInstance, "case a=a : (b!b.case b=b : 0) [] a<>b : !a(y).y!a"),
            (&PiInstance, "(a!b | c(x)) | (new d)(d!d | 0)"),
        ];
        for (inst, src) in cases {
            let p = parse_agent(inst, src).unwrap();
            let printed = p.to_string();
            let q = parse_agent(inst, &printed).unwrap();
            assert!(p.alpha_eq(&q), "{src} -> {printed}");
        }
    }
}
