//! Turtle-star reading and writing (`.ttls`).
//!
//! The accepted language is a small Turtle subset: `@prefix` directives,
//! IRIs (`<...>` or prefixed), quoted triples `<< s p o >>`, string
//! literals with an optional `^^datatype`, bare numbers (read as
//! `xsd:double`), `;` and `,` lists and `#` comments. Blank nodes,
//! collections, language tags, the `a` keyword and `@base` are not part of it.

mod parse;
mod serialize;

pub use parse::{parse, parse_bytes, ParseError, MAX_NESTING};
pub use serialize::serialize;

pub const FILE_EXTENSION: &str = "ttls";
