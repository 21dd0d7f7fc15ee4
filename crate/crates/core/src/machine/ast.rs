//! Program representation for the reference language.
//!
//! Surface forms (see `docs/language.md`):
//!
//! ```text
//! <int> | <name> | nil
//! (+ e e) (- e e) (* e e) (= e e) (< e e) (cons-bit e e)
//! (if e e e) (lambda (p) e) (idiom e) (f e ...)
//! (define (f p ...) (define (g q ...) ...) ... e)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use super::int::Integer;
use super::sexpr::Datum;
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    ConsBit,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Eq => "=",
            Prim::Lt => "<",
            Prim::ConsBit => "cons-bit",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        Some(match name {
            "+" => Prim::Add,
            "-" => Prim::Sub,
            "*" => Prim::Mul,
            "=" => Prim::Eq,
            "<" => Prim::Lt,
            "cons-bit" => Prim::ConsBit,
            _ => return None,
        })
    }
}

const KEYWORDS: &[&str] = &["define", "lambda", "if", "idiom", "nil"];

fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || Prim::from_name(name).is_some()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Integer),
    Var(String),
    Nil,
    Prim(Prim, Box<[Expr]>),
    If(Box<[Expr; 3]>),
    Lambda(String, Box<Expr>),
    Apply(Box<Expr>, Box<[Expr]>),
    /// A reused fragment inserted as a unit; evaluates exactly like its body.
    Idiom(Box<Expr>),
}

/// `(define (name params...) defs... expr)`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Body {
    pub defs: Vec<Definition>,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Root {
    /// A bare expression over the externally supplied parameters.
    Expr(Expr),
    Define(Definition),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    params: Vec<String>,
    root: Root,
}

impl Program {
    /// Parses `text`. For a bare expression, `params` names the program's
    /// parameters; a top-level `define` supplies its own.
    pub fn parse(text: &str, params: &[&str]) -> Result<Program, ParseError> {
        let datum = Datum::parse(text)?;
        let params: Vec<String> = params.iter().map(|p| p.to_string()).collect();
        Program::from_datum(&datum, &params)
    }

    pub fn from_datum(datum: &Datum, params: &[String]) -> Result<Program, ParseError> {
        if is_define(datum) {
            let mut scope = Vec::new();
            let def = parse_definition(datum, &mut scope)?;
            return Ok(Program {
                params: def.params.clone(),
                root: Root::Define(def),
            });
        }
        for p in params {
            check_binder(p)?;
        }
        let mut scope: Vec<String> = params.to_vec();
        let expr = parse_expr(datum, &mut scope)?;
        Ok(Program {
            params: params.to_vec(),
            root: Root::Expr(expr),
        })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn root(&self) -> &Root {
        &self.root
    }

    pub fn to_datum(&self) -> Datum {
        match &self.root {
            Root::Expr(e) => e.to_datum(),
            Root::Define(d) => d.to_datum(),
        }
    }

    /// Every expression node, outermost first, not descending into idioms.
    pub fn subexpressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        match &self.root {
            Root::Expr(e) => e.collect(&mut out),
            Root::Define(d) => d.collect(&mut out),
        }
        out
    }

    /// Replaces every idiom node with its body.
    pub fn expand_idioms(&self) -> Program {
        let root = match &self.root {
            Root::Expr(e) => Root::Expr(e.expand_idioms()),
            Root::Define(d) => Root::Define(d.expand_idioms()),
        };
        Program {
            params: self.params.clone(),
            root,
        }
    }

    pub fn idioms(&self) -> Vec<&Expr> {
        self.subexpressions()
            .into_iter()
            .filter_map(|e| match e {
                Expr::Idiom(inner) => Some(&**inner),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_datum())
    }
}

impl Expr {
    pub fn to_datum(&self) -> Datum {
        match self {
            Expr::Lit(i) => Datum::Atom(i.to_string()),
            Expr::Var(v) => Datum::Atom(v.clone()),
            Expr::Nil => Datum::atom("nil"),
            Expr::Prim(p, args) => {
                let mut items = vec![Datum::atom(p.name())];
                items.extend(args.iter().map(Expr::to_datum));
                Datum::List(items)
            }
            Expr::If(parts) => {
                let mut items = vec![Datum::atom("if")];
                items.extend(parts.iter().map(Expr::to_datum));
                Datum::List(items)
            }
            Expr::Lambda(p, body) => Datum::List(vec![
                Datum::atom("lambda"),
                Datum::List(vec![Datum::Atom(p.clone())]),
                body.to_datum(),
            ]),
            Expr::Apply(f, args) => {
                let mut items = vec![f.to_datum()];
                items.extend(args.iter().map(Expr::to_datum));
                Datum::List(items)
            }
            Expr::Idiom(inner) => Datum::List(vec![Datum::atom("idiom"), inner.to_datum()]),
        }
    }

    /// Node count; an idiom counts as a single node.
    pub fn size(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::Nil | Expr::Idiom(_) => 1,
            Expr::Prim(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            Expr::If(parts) => 1 + parts.iter().map(Expr::size).sum::<usize>(),
            Expr::Lambda(_, body) => 1 + body.size(),
            Expr::Apply(f, args) => 1 + f.size() + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) | Expr::Nil => {}
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Expr::Prim(_, args) => args.iter().for_each(|a| a.free_vars_into(bound, out)),
            Expr::If(parts) => parts.iter().for_each(|a| a.free_vars_into(bound, out)),
            Expr::Lambda(p, body) => {
                bound.push(p.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
            Expr::Apply(f, args) => {
                f.free_vars_into(bound, out);
                args.iter().for_each(|a| a.free_vars_into(bound, out));
            }
            Expr::Idiom(inner) => inner.free_vars_into(bound, out),
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        out.push(self);
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::Nil | Expr::Idiom(_) => {}
            Expr::Prim(_, args) => args.iter().for_each(|a| a.collect(out)),
            Expr::If(parts) => parts.iter().for_each(|a| a.collect(out)),
            Expr::Lambda(_, body) => body.collect(out),
            Expr::Apply(f, args) => {
                f.collect(out);
                args.iter().for_each(|a| a.collect(out));
            }
        }
    }

    pub fn expand_idioms(&self) -> Expr {
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::Nil => self.clone(),
            Expr::Prim(p, args) => Expr::Prim(*p, args.iter().map(Expr::expand_idioms).collect()),
            Expr::If(parts) => Expr::If(Box::new([
                parts[0].expand_idioms(),
                parts[1].expand_idioms(),
                parts[2].expand_idioms(),
            ])),
            Expr::Lambda(p, body) => Expr::Lambda(p.clone(), Box::new(body.expand_idioms())),
            Expr::Apply(f, args) => Expr::Apply(
                Box::new(f.expand_idioms()),
                args.iter().map(Expr::expand_idioms).collect(),
            ),
            Expr::Idiom(inner) => inner.expand_idioms(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_datum())
    }
}

impl Definition {
    pub fn to_datum(&self) -> Datum {
        let mut header = vec![Datum::Atom(self.name.clone())];
        header.extend(self.params.iter().map(|p| Datum::Atom(p.clone())));
        let mut items = vec![Datum::atom("define"), Datum::List(header)];
        items.extend(self.body.defs.iter().map(Definition::to_datum));
        items.push(self.body.expr.to_datum());
        Datum::List(items)
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        for d in &self.body.defs {
            d.collect(out);
        }
        self.body.expr.collect(out);
    }

    fn expand_idioms(&self) -> Definition {
        Definition {
            name: self.name.clone(),
            params: self.params.clone(),
            body: Body {
                defs: self
                    .body
                    .defs
                    .iter()
                    .map(Definition::expand_idioms)
                    .collect(),
                expr: self.body.expr.expand_idioms(),
            },
        }
    }
}

fn is_define(d: &Datum) -> bool {
    matches!(
        d.as_list().and_then(|l| l.first()).and_then(Datum::as_atom),
        Some("define")
    )
}

fn check_binder(name: &str) -> Result<(), ParseError> {
    if is_reserved(name) || name.parse::<Integer>().is_ok() || name.starts_with('<') {
        return Err(ParseError::Malformed(format!("'{name}' cannot be bound")));
    }
    Ok(())
}

fn binder(d: &Datum) -> Result<String, ParseError> {
    let name = d
        .as_atom()
        .ok_or_else(|| ParseError::Malformed(format!("expected a name, found {d}")))?;
    check_binder(name)?;
    Ok(name.to_string())
}

fn parse_definition(d: &Datum, scope: &mut Vec<String>) -> Result<Definition, ParseError> {
    let items = d.as_list().unwrap_or_default();
    if items.len() < 3 {
        return Err(ParseError::Malformed(format!(
            "define needs a header and a body: {d}"
        )));
    }
    let header = items[1]
        .as_list()
        .filter(|h| !h.is_empty())
        .ok_or_else(|| {
            ParseError::Malformed(format!("define header must be (name params...): {d}"))
        })?;
    let name = binder(&header[0])?;
    let params = header[1..]
        .iter()
        .map(binder)
        .collect::<Result<Vec<_>, _>>()?;

    // the function's own name is visible inside its body
    let mark = scope.len();
    scope.push(name.clone());
    scope.extend(params.iter().cloned());
    let body = parse_body(&items[2..], scope);
    scope.truncate(mark);
    Ok(Definition {
        name,
        params,
        body: body?,
    })
}

fn parse_body(items: &[Datum], scope: &mut Vec<String>) -> Result<Body, ParseError> {
    let (last, defs) = items.split_last().expect("non-empty body");
    if is_define(last) {
        return Err(ParseError::Malformed(
            "body must end with an expression".into(),
        ));
    }
    // local definitions are mutually visible
    let mark = scope.len();
    for d in defs {
        if !is_define(d) {
            return Err(ParseError::Malformed(format!(
                "only definitions may precede the body expression: {d}"
            )));
        }
        let name = d
            .as_list()
            .and_then(|l| l[1].as_list())
            .and_then(|h| h.first());
        if let Some(name) = name {
            scope.push(binder(name)?);
        }
    }
    let result = (|| {
        let defs = defs
            .iter()
            .map(|d| parse_definition(d, scope))
            .collect::<Result<Vec<_>, _>>()?;
        let expr = parse_expr(last, scope)?;
        Ok(Body { defs, expr })
    })();
    scope.truncate(mark);
    result
}

fn arity_check(d: &Datum, items: &[Datum], want: usize) -> Result<(), ParseError> {
    if items.len() != want + 1 {
        return Err(ParseError::Malformed(format!(
            "'{}' takes {want} argument(s): {d}",
            items[0]
        )));
    }
    Ok(())
}

fn parse_expr(d: &Datum, scope: &mut Vec<String>) -> Result<Expr, ParseError> {
    match d {
        Datum::Atom(a) => {
            if let Ok(i) = a.parse::<Integer>() {
                return Ok(Expr::Lit(i));
            }
            if a == "nil" {
                return Ok(Expr::Nil);
            }
            if Prim::from_name(a).is_some() || KEYWORDS.contains(&a.as_str()) {
                return Err(ParseError::Malformed(format!("'{a}' must be applied")));
            }
            if scope.iter().any(|s| s == a) {
                Ok(Expr::Var(a.clone()))
            } else {
                Err(ParseError::UnboundVariable(a.clone()))
            }
        }
        Datum::List(items) => {
            let head = items
                .first()
                .ok_or_else(|| ParseError::Malformed("empty application ()".into()))?;
            match head.as_atom() {
                Some("define") => Err(ParseError::Malformed(format!(
                    "define is only allowed at the start of a body: {d}"
                ))),
                Some("if") => {
                    arity_check(d, items, 3)?;
                    Ok(Expr::If(Box::new([
                        parse_expr(&items[1], scope)?,
                        parse_expr(&items[2], scope)?,
                        parse_expr(&items[3], scope)?,
                    ])))
                }
                Some("lambda") => {
                    arity_check(d, items, 2)?;
                    let ps = items[1].as_list().filter(|p| p.len() == 1).ok_or_else(|| {
                        ParseError::Malformed(format!("lambda takes exactly one parameter: {d}"))
                    })?;
                    let p = binder(&ps[0])?;
                    scope.push(p.clone());
                    let body = parse_expr(&items[2], scope);
                    scope.pop();
                    Ok(Expr::Lambda(p, Box::new(body?)))
                }
                Some("idiom") => {
                    arity_check(d, items, 1)?;
                    Ok(Expr::Idiom(Box::new(parse_expr(&items[1], scope)?)))
                }
                Some("nil") => Err(ParseError::Malformed(format!("nil cannot be applied: {d}"))),
                Some(name) if Prim::from_name(name).is_some() => {
                    let prim = Prim::from_name(name).unwrap();
                    arity_check(d, items, 2)?;
                    let args = items[1..]
                        .iter()
                        .map(|a| parse_expr(a, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Expr::Prim(prim, args.into_boxed_slice()))
                }
                _ => {
                    let f = parse_expr(head, scope)?;
                    let args = items[1..]
                        .iter()
                        .map(|a| parse_expr(a, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Expr::Apply(Box::new(f), args.into_boxed_slice()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const POW4: &str = "(define (pow4 x ) (define (sqr x ) (* x x)) (sqr (sqr x ) ))";

    #[test]
    fn square_is_prim_application() {
        let p = Program::parse("(* x x)", &["x"]).unwrap();
        match p.root() {
            Root::Expr(Expr::Prim(Prim::Mul, args)) => {
                assert_eq!(&args[..], &[Expr::Var("x".into()), Expr::Var("x".into())]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pow4_listing_nests_definitions() {
        let p = Program::parse(POW4, &[]).unwrap();
        assert_eq!(p.params(), ["x"]);
        let Root::Define(def) = p.root() else {
            panic!()
        };
        assert_eq!(def.name, "pow4");
        assert_eq!(def.body.defs.len(), 1);
        assert_eq!(def.body.defs[0].name, "sqr");
        assert_eq!(
            p.to_string(),
            "(define (pow4 x) (define (sqr x) (* x x)) (sqr (sqr x)))"
        );
    }

    #[test]
    fn rejects_unbound_and_malformed() {
        assert!(matches!(
            Program::parse("(* x y)", &["x"]),
            Err(ParseError::UnboundVariable(v)) if v == "y"
        ));
        assert!(matches!(
            Program::parse("(* x", &["x"]),
            Err(ParseError::Syntax(e)) if e.position == 4
        ));
        assert!(matches!(
            Program::parse("(foo x)", &["x"]),
            Err(ParseError::UnboundVariable(_))
        ));
        assert!(Program::parse("(+ x)", &["x"]).is_err());
        assert!(Program::parse("+", &["x"]).is_err());
        assert!(Program::parse("(lambda (a b) a)", &[]).is_err());
        assert!(Program::parse("(define (f x) (define (g y) y))", &[]).is_err());
    }

    #[test]
    fn local_definitions_are_mutually_visible() {
        let src = "(define (f x) (define (a y) (b y)) (define (b y) (+ y 1)) (a x))";
        assert!(Program::parse(src, &[]).is_ok());
    }

    #[test]
    fn size_and_free_vars() {
        let p = Program::parse("(* x (lambda (y) (+ y z)))", &["x", "z"]).unwrap();
        let Root::Expr(e) = p.root() else { panic!() };
        assert_eq!(e.size(), 6);
        assert_eq!(e.free_vars().into_iter().collect::<Vec<_>>(), ["x", "z"]);
    }

    #[test]
    fn idiom_counts_as_one_node_and_expands() {
        let p = Program::parse("(* (idiom (* x x)) (idiom (* x x)))", &["x"]).unwrap();
        let Root::Expr(e) = p.root() else { panic!() };
        assert_eq!(e.size(), 3);
        assert_eq!(p.idioms().len(), 2);
        assert_eq!(p.expand_idioms().to_string(), "(* (* x x) (* x x))");
    }
}
