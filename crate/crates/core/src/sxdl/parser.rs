use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::ParseError;
use crate::kb::Value;

const KEYWORDS: &[&str] = &[
    "class", "instance", "has", "role", "link", "environment", "behavior", "effect", "true", "false",
    "nan",
];

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        declared: HashSet::new(),
        unresolved: Vec::new(),
        declared_at: HashMap::new(),
    };
    let doc = p.document()?;
    // A reference that was unknown when read but declared further down is
    // a forward reference; names declared nowhere are left to the loader.
    for r in &p.unresolved {
        if let Some(decl) = p.declared_at.get(&r.name) {
            if *decl > r.span {
                return Err(ParseError::ForwardReference {
                    line: r.span.line,
                    col: r.span.col,
                    name: r.name.clone(),
                });
            }
        }
    }
    Ok(doc)
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
    declared: HashSet<String>,
    unresolved: Vec<Ident>,
    declared_at: HashMap<String, Span>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let (tok, span) = &self.tokens[self.pos];
        ParseError::Syntax {
            line: span.line,
            col: span.col,
            found: tok.to_string(),
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(self.unexpected(&format!("`{tok}`")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        if self.is_keyword(kw) {
            Ok(self.advance().1)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let (tok, span) = self.advance();
                let Tok::Ident(name) = tok else { unreachable!() };
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// An identifier where keywords are unambiguous, e.g. the role `effect`.
    fn word(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.peek() {
            Tok::Ident(_) => {
                let (tok, span) = self.advance();
                let Tok::Ident(name) = tok else { unreachable!() };
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn declare(&mut self, id: &Ident) {
        self.declared.insert(id.name.clone());
        self.declared_at.entry(id.name.clone()).or_insert(id.span);
    }

    fn reference(&mut self, id: &Ident) {
        if !self.declared.contains(&id.name) {
            self.unresolved.push(id.clone());
        }
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let mut statements = Vec::new();
        while *self.peek() != Tok::Eof {
            statements.push(self.statement()?);
        }
        Ok(Document { statements })
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Ident(s) if s == "class" => StatementKind::Class(self.class_decl()?),
            Tok::Ident(s) if s == "instance" => StatementKind::Instance(self.instance_decl()?),
            Tok::Ident(s) if s == "link" => StatementKind::Link(self.link_decl()?),
            Tok::Ident(s) if s == "environment" => {
                self.advance();
                self.expect(Tok::LBrace)?;
                let mut decls = Vec::new();
                while !matches!(self.peek(), Tok::RBrace) {
                    if !self.is_keyword("instance") {
                        return Err(self.unexpected("`instance` or `}`"));
                    }
                    decls.push(self.instance_decl()?);
                }
                self.advance();
                StatementKind::Environment(decls)
            }
            Tok::Ident(s) if s == "behavior" => StatementKind::Behavior(self.behavior_decl()?),
            _ => {
                return Err(self.unexpected(
                    "`class`, `instance`, `link`, `environment` or `behavior`",
                ))
            }
        };
        Ok(Statement { span, kind })
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        self.keyword("class")?;
        let name = self.ident("class name")?;
        self.expect(Tok::Colon)?;
        let parent = self.ident("parent class name")?;
        self.expect(Tok::Semi)?;
        self.reference(&parent);
        self.declare(&name);
        Ok(ClassDecl { name, parent })
    }

    fn instance_decl(&mut self) -> Result<InstanceDecl, ParseError> {
        let span = self.keyword("instance")?;
        let name = self.ident("instance name")?;
        self.expect(Tok::Colon)?;
        let class = self.ident("class name")?;
        self.reference(&class);
        let value = if *self.peek() == Tok::Eq {
            self.advance();
            Some(self.literal()?)
        } else {
            None
        };
        self.declare(&name);
        let members = self.block()?;
        Ok(InstanceDecl {
            span,
            name,
            class,
            value,
            members,
        })
    }

    fn block(&mut self) -> Result<Vec<Member>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut members = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.advance();
                    return Ok(members);
                }
                Tok::Ident(s) if s == "role" => members.push(Member::Role(self.role_assign()?)),
                Tok::Ident(_) => members.push(Member::Attr(self.attr_assign()?)),
                _ => return Err(self.unexpected("`has`, `role` or `}`")),
            }
        }
    }

    fn role_assign(&mut self) -> Result<RoleAssign, ParseError> {
        let span = self.keyword("role")?;
        let role = self.word("role name")?;
        self.expect(Tok::Arrow)?;
        let target = self.ident("target instance")?;
        self.expect(Tok::Semi)?;
        self.reference(&target);
        Ok(RoleAssign { span, role, target })
    }

    /// `has C ...` or the fused `hasC ...` spelling.
    fn attr_assign(&mut self) -> Result<AttrAssign, ParseError> {
        let span = self.span();
        let class = match self.peek().clone() {
            Tok::Ident(s) if s == "has" => {
                self.advance();
                self.ident("attribute class")?
            }
            Tok::Ident(s) if has_member_class(&s).is_some() => {
                self.advance();
                Ident {
                    name: has_member_class(&s).unwrap_or_default().to_string(),
                    span: Span {
                        line: span.line,
                        col: span.col + 3,
                    },
                }
            }
            _ => return Err(self.unexpected("`has`, `role` or `}`")),
        };
        self.reference(&class);
        // `has C unit { ... }`: the unit identifier is the value.
        if let (Tok::Ident(unit), Tok::LBrace) = (self.peek().clone(), self.peek_at(1)) {
            if !KEYWORDS.contains(&unit.as_str()) {
                self.advance();
                let members = self.block()?;
                return Ok(AttrAssign {
                    span,
                    class,
                    name: None,
                    value: Value::Text(unit),
                    members,
                });
            }
        }
        let name = if matches!(self.peek(), Tok::Ident(_)) {
            Some(self.ident("attribute name or `=`")?)
        } else {
            None
        };
        self.expect(Tok::Eq)?;
        let value = self.literal()?;
        if let Some(n) = &name {
            self.declare(n);
        }
        let members = if *self.peek() == Tok::LBrace {
            self.block()?
        } else {
            self.expect(Tok::Semi)?;
            Vec::new()
        };
        Ok(AttrAssign {
            span,
            class,
            name,
            value,
            members,
        })
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let v = match self.peek() {
            Tok::Str(s) => Value::Text(s.clone()),
            Tok::Num(n) => Value::Number(*n),
            Tok::Ident(s) if s == "true" => Value::Bool(true),
            Tok::Ident(s) if s == "false" => Value::Bool(false),
            Tok::Ident(s) if s == "nan" => Value::Nan,
            _ => return Err(self.unexpected("literal")),
        };
        self.advance();
        Ok(v)
    }

    fn link_decl(&mut self) -> Result<LinkDecl, ParseError> {
        self.keyword("link")?;
        let source = self.ident("source instance")?;
        self.expect(Tok::Dot)?;
        let member = self.word("role name or has<Class>")?;
        self.expect(Tok::Arrow)?;
        let target = self.ident("target instance")?;
        self.expect(Tok::Semi)?;
        self.reference(&source);
        self.reference(&target);
        if let Some(c) = has_member_class(&member.name) {
            self.reference(&Ident {
                name: c.to_string(),
                span: member.span,
            });
        }
        Ok(LinkDecl {
            source,
            member,
            target,
        })
    }

    fn behavior_decl(&mut self) -> Result<BehaviorDecl, ParseError> {
        let span = self.keyword("behavior")?;
        let (name, binding) = match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                (s, None)
            }
            _ => {
                let id = self.ident("behavior name")?;
                self.declare(&id);
                (id.name.clone(), Some(id))
            }
        };
        self.expect(Tok::LBrace)?;
        let mut attrs = Vec::new();
        while !self.is_keyword("effect") {
            if matches!(self.peek(), Tok::Ident(_)) {
                attrs.push(self.attr_assign()?);
            } else {
                return Err(self.unexpected("`has` or `effect`"));
            }
        }
        self.advance();
        self.expect(Tok::Colon)?;
        let effect_class = self.ident("effect class")?;
        self.reference(&effect_class);
        self.expect(Tok::LBrace)?;
        let mut effect_attrs = Vec::new();
        while *self.peek() != Tok::RBrace {
            if !matches!(self.peek(), Tok::Ident(_)) {
                return Err(self.unexpected("`has` or `}`"));
            }
            effect_attrs.push(self.attr_assign()?);
        }
        self.advance();
        self.expect(Tok::RBrace)?;
        Ok(BehaviorDecl {
            span,
            name,
            binding,
            attrs,
            effect_class,
            effect_attrs,
        })
    }
}
