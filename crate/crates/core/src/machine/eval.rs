//! Fuel-bounded evaluation.
//!
//! Cost model: every evaluated expression node costs one step (literal,
//! variable lookup, primitive call, conditional, lambda creation,
//! application), and each local definition binding costs one step. Idiom
//! nodes are free: they evaluate exactly like their body. `cons-bit` is lazy
//! in its tail, so zero-argument programs may describe infinite bit streams
//! that are forced one cell at a time.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;

use super::ast::{Body, Definition, Expr, Prim, Program, Root};
use super::int::Integer;
use super::EvalError;

/// Nested evaluation depth at which a candidate is abandoned.
pub const MAX_DEPTH: usize = 1024;

/// A step account. `consumed` never exceeds `budget`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fuel {
    budget: u64,
    consumed: u64,
}

impl Fuel {
    pub fn new(budget: u64) -> Self {
        Fuel {
            budget,
            consumed: 0,
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.consumed
    }

    /// Charges `n` steps. On exhaustion the account is drained to exactly
    /// its budget.
    pub fn charge(&mut self, n: u64) -> Result<(), EvalError> {
        if self.remaining() < n {
            self.consumed = self.budget;
            return Err(EvalError::FuelExhausted {
                consumed: self.budget,
            });
        }
        self.consumed += n;
        Ok(())
    }
}

/// An evaluation result detached from the program that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Bits(Vec<u8>),
    Closure,
}

impl Value {
    pub fn int(v: i64) -> Self {
        Value::Int(BigInt::from(v))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Bits(bits) => {
                for b in bits {
                    write!(f, "{b}")?;
                }
                Ok(())
            }
            Value::Closure => f.write_str("#<closure>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Value,
    pub steps: u64,
}

/// Evaluates `program` on `args`, charging `fuel`. Bit-list results are
/// forced completely under the same account.
pub fn evaluate(
    program: &Program,
    args: &[Value],
    fuel: &mut Fuel,
) -> Result<Evaluation, EvalError> {
    let start = fuel.consumed();
    let args = args.iter().map(to_val).collect::<Result<Vec<_>, _>>()?;
    let mut m = Machine { fuel };
    let v = m.run(program, args)?;
    let value = m.detach(v)?;
    Ok(Evaluation {
        value,
        steps: fuel.consumed() - start,
    })
}

/// Integer-in, integer-out evaluation used by operator tests.
pub fn evaluate_int(
    program: &Program,
    args: &[Integer],
    fuel: &mut Fuel,
) -> Result<Integer, EvalError> {
    let args = args.iter().cloned().map(Val::Int).collect();
    let mut m = Machine { fuel };
    match m.run(program, args)? {
        Val::Int(i) => Ok(i),
        other => Err(EvalError::Type(format!(
            "expected an integer result, got {}",
            other.kind()
        ))),
    }
}

/// Exact step count of a halting run. Fails if `budget` is insufficient.
pub fn step_count(program: &Program, args: &[Value], budget: u64) -> Result<u64, EvalError> {
    let mut fuel = Fuel::new(budget);
    evaluate(program, args, &mut fuel).map(|e| e.steps)
}

/// Output of forcing a zero-argument program as a bit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRun {
    pub bits: Vec<u8>,
    pub steps: u64,
    /// The stream ended with `nil` before `max_bits` were produced.
    pub ended: bool,
}

/// Forces up to `max_bits` cells of a zero-argument program's output. Each
/// cell gets a fresh account of `fuel_per_bit` steps; production stops at
/// the first cell that fails (fuel, type error), so the bits produced for a
/// shorter request are always a prefix of those for a longer one.
pub fn run_sequence(program: &Program, max_bits: usize, fuel_per_bit: u64) -> SequenceRun {
    let mut bits = Vec::new();
    let mut steps = 0;
    if max_bits == 0 || program.arity() != 0 {
        return SequenceRun {
            bits,
            steps,
            ended: false,
        };
    }
    let mut fuel = Fuel::new(fuel_per_bit);
    let mut m = Machine { fuel: &mut fuel };
    let mut current = m.run(program, Vec::new());
    steps += m.fuel.consumed();
    loop {
        let cell = match current {
            Ok(Val::Nil) => {
                return SequenceRun {
                    bits,
                    steps,
                    ended: true,
                }
            }
            Ok(Val::Cons(cell)) => cell,
            _ => break,
        };
        bits.push(cell.bit);
        if bits.len() == max_bits {
            break;
        }
        let mut fuel = Fuel::new(fuel_per_bit);
        let mut m = Machine { fuel: &mut fuel };
        current = m.force_tail(&cell);
        steps += m.fuel.consumed();
    }
    SequenceRun {
        bits,
        steps,
        ended: false,
    }
}

/// Forces up to `max_bits` cells under a single account. Returns the bits
/// produced before the stream ended or failed, and the failure if any.
pub fn force_bits(
    program: &Program,
    max_bits: usize,
    fuel: &mut Fuel,
) -> (Vec<u8>, Option<EvalError>) {
    let mut bits = Vec::new();
    if program.arity() != 0 {
        return (
            bits,
            Some(EvalError::Arity {
                expected: program.arity(),
                got: 0,
            }),
        );
    }
    if max_bits == 0 {
        return (bits, None);
    }
    let mut m = Machine { fuel };
    let mut current = m.run(program, Vec::new());
    loop {
        let cell = match current {
            Ok(Val::Nil) => return (bits, None),
            Ok(Val::Cons(cell)) => cell,
            Ok(other) => {
                return (
                    bits,
                    Some(EvalError::Type(format!(
                        "expected a bit-list, got {}",
                        other.kind()
                    ))),
                )
            }
            Err(e) => return (bits, Some(e)),
        };
        bits.push(cell.bit);
        if bits.len() == max_bits {
            return (bits, None);
        }
        current = m.force_tail(&cell);
    }
}

fn to_val<'p>(v: &Value) -> Result<Val<'p>, EvalError> {
    Ok(match v {
        Value::Int(i) => Val::Int(Integer::from_big(i.clone())),
        Value::Bool(b) => Val::Bool(*b),
        Value::Bits(bits) => {
            let mut acc = Val::Nil;
            for &b in bits.iter().rev() {
                if b > 1 {
                    return Err(EvalError::Type(format!(
                        "bit-list element {b} is not 0 or 1"
                    )));
                }
                acc = Val::Cons(Rc::new(Cell {
                    bit: b,
                    tail: RefCell::new(Tail::Forced(acc)),
                }));
            }
            acc
        }
        Value::Closure => {
            return Err(EvalError::Type(
                "closures cannot be passed as arguments".into(),
            ))
        }
    })
}

type Env<'p> = Option<Rc<Frame<'p>>>;

struct Frame<'p> {
    binding: Binding<'p>,
    parent: Env<'p>,
}

enum Binding<'p> {
    Var(&'p str, Val<'p>),
    /// Definitions are materialized as closures at lookup time, which keeps
    /// recursive bindings free of reference cycles.
    Defs(&'p [Definition]),
}

#[derive(Clone)]
enum Val<'p> {
    Int(Integer),
    Bool(bool),
    Nil,
    Cons(Rc<Cell<'p>>),
    Closure(Rc<Closure<'p>>),
}

impl Val<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Val::Int(_) => "integer",
            Val::Bool(_) => "boolean",
            Val::Nil | Val::Cons(_) => "bit-list",
            Val::Closure(_) => "closure",
        }
    }
}

struct Cell<'p> {
    bit: u8,
    tail: RefCell<Tail<'p>>,
}

enum Tail<'p> {
    Pending(&'p Expr, Env<'p>),
    Forced(Val<'p>),
}

struct Closure<'p> {
    params: &'p [String],
    body: FnBody<'p>,
    env: Env<'p>,
}

#[derive(Clone, Copy)]
enum FnBody<'p> {
    Expr(&'p Expr),
    Body(&'p Body),
}

struct Machine<'f> {
    fuel: &'f mut Fuel,
}

impl Machine<'_> {
    fn run<'p>(&mut self, program: &'p Program, args: Vec<Val<'p>>) -> Result<Val<'p>, EvalError> {
        if args.len() != program.arity() {
            return Err(EvalError::Arity {
                expected: program.arity(),
                got: args.len(),
            });
        }
        match program.root() {
            Root::Expr(e) => {
                let env = bind(program.params(), args, None);
                self.eval(e, env, 0)
            }
            Root::Define(def) => {
                let defs: &'p [Definition] = std::slice::from_ref(def);
                let env = push(Binding::Defs(defs), None);
                self.fuel.charge(1)?;
                let closure = Closure {
                    params: &def.params,
                    body: FnBody::Body(&def.body),
                    env,
                };
                self.enter(&closure, args, 0)
            }
        }
    }

    fn enter<'p>(
        &mut self,
        c: &Closure<'p>,
        args: Vec<Val<'p>>,
        depth: usize,
    ) -> Result<Val<'p>, EvalError> {
        let env = bind(c.params, args, c.env.clone());
        match c.body {
            FnBody::Expr(e) => self.eval(e, env, depth),
            FnBody::Body(b) => {
                let env = self.bind_defs(b, env)?;
                self.eval(&b.expr, env, depth)
            }
        }
    }

    fn bind_defs<'p>(&mut self, body: &'p Body, env: Env<'p>) -> Result<Env<'p>, EvalError> {
        if body.defs.is_empty() {
            return Ok(env);
        }
        self.fuel.charge(body.defs.len() as u64)?;
        Ok(push(Binding::Defs(&body.defs), env))
    }

    fn eval<'p>(
        &mut self,
        mut expr: &'p Expr,
        mut env: Env<'p>,
        depth: usize,
    ) -> Result<Val<'p>, EvalError> {
        if depth > MAX_DEPTH {
            return Err(EvalError::RecursionLimit);
        }
        loop {
            if let Expr::Idiom(inner) = expr {
                expr = inner;
                continue;
            }
            self.fuel.charge(1)?;
            match expr {
                Expr::Lit(i) => return Ok(Val::Int(i.clone())),
                Expr::Nil => return Ok(Val::Nil),
                Expr::Var(name) => return lookup(&env, name),
                Expr::Prim(Prim::ConsBit, args) => {
                    let bit = match self.eval(&args[0], env.clone(), depth + 1)? {
                        Val::Int(Integer::Small(b @ (0 | 1))) => b as u8,
                        other => {
                            return Err(EvalError::Type(format!(
                                "cons-bit needs 0 or 1, got {}",
                                other.kind()
                            )))
                        }
                    };
                    return Ok(Val::Cons(Rc::new(Cell {
                        bit,
                        tail: RefCell::new(Tail::Pending(&args[1], env)),
                    })));
                }
                Expr::Prim(p, args) => {
                    let a = self.eval(&args[0], env.clone(), depth + 1)?;
                    let b = self.eval(&args[1], env, depth + 1)?;
                    return prim(*p, a, b);
                }
                Expr::If(parts) => {
                    let test = match self.eval(&parts[0], env.clone(), depth + 1)? {
                        Val::Bool(b) => b,
                        other => {
                            return Err(EvalError::Type(format!(
                                "if needs a boolean, got {}",
                                other.kind()
                            )))
                        }
                    };
                    expr = if test { &parts[1] } else { &parts[2] };
                }
                Expr::Lambda(p, body) => {
                    return Ok(Val::Closure(Rc::new(Closure {
                        params: std::slice::from_ref(p),
                        body: FnBody::Expr(body),
                        env,
                    })))
                }
                Expr::Apply(f, args) => {
                    let fv = self.eval(f, env.clone(), depth + 1)?;
                    let Val::Closure(c) = fv else {
                        return Err(EvalError::Type(format!("cannot apply a {}", fv.kind())));
                    };
                    if c.params.len() != args.len() {
                        return Err(EvalError::Type(format!(
                            "function takes {} argument(s), given {}",
                            c.params.len(),
                            args.len()
                        )));
                    }
                    let mut argv = Vec::with_capacity(args.len());
                    for a in args.iter() {
                        argv.push(self.eval(a, env.clone(), depth + 1)?);
                    }
                    // tail position: continue in the callee without growing the stack
                    env = bind(c.params, argv, c.env.clone());
                    match c.body {
                        FnBody::Expr(e) => expr = e,
                        FnBody::Body(b) => {
                            env = self.bind_defs(b, env)?;
                            expr = &b.expr;
                        }
                    }
                }
                Expr::Idiom(_) => unreachable!(),
            }
        }
    }

    fn force_tail<'p>(&mut self, cell: &Cell<'p>) -> Result<Val<'p>, EvalError> {
        let pending = match &*cell.tail.borrow() {
            Tail::Forced(v) => return Ok(v.clone()),
            Tail::Pending(e, env) => (*e, env.clone()),
        };
        let v = self.eval(pending.0, pending.1, 0)?;
        *cell.tail.borrow_mut() = Tail::Forced(v.clone());
        Ok(v)
    }

    fn detach(&mut self, v: Val<'_>) -> Result<Value, EvalError> {
        Ok(match v {
            Val::Int(i) => Value::Int(i.to_big()),
            Val::Bool(b) => Value::Bool(b),
            Val::Closure(_) => Value::Closure,
            Val::Nil => Value::Bits(Vec::new()),
            Val::Cons(first) => {
                let mut bits = vec![first.bit];
                let mut cell = first;
                loop {
                    match self.force_tail(&cell)? {
                        Val::Nil => break,
                        Val::Cons(next) => {
                            bits.push(next.bit);
                            cell = next;
                        }
                        other => {
                            return Err(EvalError::Type(format!(
                                "cons-bit tail must be a bit-list, got {}",
                                other.kind()
                            )))
                        }
                    }
                }
                Value::Bits(bits)
            }
        })
    }
}

fn push<'p>(binding: Binding<'p>, parent: Env<'p>) -> Env<'p> {
    Some(Rc::new(Frame { binding, parent }))
}

fn bind<'p>(params: &'p [String], args: Vec<Val<'p>>, mut env: Env<'p>) -> Env<'p> {
    for (p, a) in params.iter().zip(args) {
        env = push(Binding::Var(p, a), env);
    }
    env
}

fn lookup<'p>(env: &Env<'p>, name: &str) -> Result<Val<'p>, EvalError> {
    let mut cur = env;
    while let Some(frame) = cur {
        match &frame.binding {
            Binding::Var(n, v) if *n == name => return Ok(v.clone()),
            Binding::Defs(defs) => {
                if let Some(d) = defs.iter().find(|d| d.name == name) {
                    return Ok(Val::Closure(Rc::new(Closure {
                        params: &d.params,
                        body: FnBody::Body(&d.body),
                        env: Some(frame.clone()),
                    })));
                }
            }
            Binding::Var(..) => {}
        }
        cur = &frame.parent;
    }
    // the parser rejects unbound names, so this only fires on hand-built ASTs
    Err(EvalError::Type(format!("unbound variable {name}")))
}

fn prim<'p>(p: Prim, a: Val<'p>, b: Val<'p>) -> Result<Val<'p>, EvalError> {
    let (Val::Int(x), Val::Int(y)) = (&a, &b) else {
        return Err(EvalError::Type(format!(
            "'{}' needs integers, got {} and {}",
            p.name(),
            a.kind(),
            b.kind()
        )));
    };
    Ok(match p {
        Prim::Add => Val::Int(x.add(y)),
        Prim::Sub => Val::Int(x.sub(y)),
        Prim::Mul => Val::Int(x.mul(y)),
        Prim::Eq => Val::Bool(x == y),
        Prim::Lt => Val::Bool(x < y),
        Prim::ConsBit => unreachable!("cons-bit is lazy"),
    })
}
