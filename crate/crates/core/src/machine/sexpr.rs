//! Reader and printer for the raw S-expression layer.
//!
//! Everything above this module (programs, grammar templates, idiom
//! fragments) is built from [`Datum`] trees. The printer emits the canonical
//! form: single spaces between elements, no padding inside parentheses.

use std::fmt;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datum {
    Atom(String),
    List(Vec<Datum>),
}

impl Datum {
    pub fn atom(s: impl Into<String>) -> Self {
        Datum::Atom(s.into())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Datum::Atom(a) => Some(a),
            Datum::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Datum]> {
        match self {
            Datum::List(items) => Some(items),
            Datum::Atom(_) => None,
        }
    }

    /// Reads exactly one datum; trailing non-whitespace is an error.
    pub fn parse(text: &str) -> Result<Datum, SyntaxError> {
        let mut reader = Reader { text, pos: 0 };
        reader.skip_ws();
        let datum = reader.datum()?;
        reader.skip_ws();
        if reader.pos < text.len() {
            return Err(SyntaxError::new(reader.pos, "unexpected trailing input"));
        }
        Ok(datum)
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Atom(a) => f.write_str(a),
            Datum::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl Reader<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn datum(&mut self) -> Result<Datum, SyntaxError> {
        match self.peek() {
            None => Err(SyntaxError::new(self.pos, "unexpected end of input")),
            Some(b')') => Err(SyntaxError::new(self.pos, "unexpected ')'")),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => {
                            return Err(SyntaxError::new(
                                self.pos,
                                "unexpected end of input, expected ')'",
                            ))
                        }
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Datum::List(items));
                        }
                        Some(_) => items.push(self.datum()?),
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Datum::Atom(self.text[start..self.pos].to_string()))
            }
        }
    }
}
