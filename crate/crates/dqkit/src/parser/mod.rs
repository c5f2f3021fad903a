//! Text front end: polynomial expressions and JSON documents.

mod document;
mod expr;

pub use document::{
    canonicalize, document_from_value, parse_document, to_canonical_string, to_value, Document,
};
pub use expr::{parse_poly, parse_rat};
