use crate::kb::Value;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub span: Span,
    pub kind: StatementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Class(ClassDecl),
    Instance(InstanceDecl),
    Link(LinkDecl),
    Environment(Vec<InstanceDecl>),
    Behavior(BehaviorDecl),
}

/// `class Name : Parent;`
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: Ident,
    pub parent: Ident,
}

/// `instance name : Class (= literal)? { member* }`
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDecl {
    pub span: Span,
    pub name: Ident,
    pub class: Ident,
    pub value: Option<Value>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Attr(AttrAssign),
    Role(RoleAssign),
}

/// An owned attribute: `has Class (name)? = literal;`, with an optional
/// block of nested members in place of the `;`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrAssign {
    pub span: Span,
    pub class: Ident,
    pub name: Option<Ident>,
    pub value: Value,
    pub members: Vec<Member>,
}

/// `role r -> target;`
#[derive(Debug, Clone, PartialEq)]
pub struct RoleAssign {
    pub span: Span,
    pub role: Ident,
    pub target: Ident,
}

/// `link source.member -> target;` where `member` is a role name or
/// `has<Class>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDecl {
    pub source: Ident,
    pub member: Ident,
    pub target: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorDecl {
    pub span: Span,
    /// Display name, bound to the `Name` attribute.
    pub name: String,
    /// Set when the behavior was declared with an identifier, which is then
    /// also bound as an instance name.
    pub binding: Option<Ident>,
    pub attrs: Vec<AttrAssign>,
    pub effect_class: Ident,
    pub effect_attrs: Vec<AttrAssign>,
}

/// Identifiers with a leading underscore label anonymous instances and are
/// scoped to one document.
pub fn is_local_name(name: &str) -> bool {
    name.starts_with('_')
}

/// Splits `hasFPS` into `FPS`; `None` for plain role names.
pub fn has_member_class(member: &str) -> Option<&str> {
    member
        .strip_prefix("has")
        .filter(|rest| rest.chars().next().is_some_and(|c| c.is_ascii_uppercase()))
}
