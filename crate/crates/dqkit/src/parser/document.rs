//! JSON documents: `{kind, dim, order?, degree?, arity?, rank?, payload}`.
//!
//! Indices in documents are 1-based. Serialization is canonical: keys are
//! sorted, polynomials render in descending graded-lex order and every
//! optional field that can be inferred is written out, so one
//! parse/serialize pass reaches a fixed point.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::calculus::{Form, MultiVec};
use crate::diffop::PolyDiffOp;
use crate::error::{Error, Result};
use crate::kernel::{variable_names, Exponents, Poly};
use crate::liealgebroid::AlgebroidPresentation;
use crate::qclimit::QCData;
use crate::starprod::{GaugeOp, StarProduct};

use super::parse_poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Poly(Poly),
    MultiVec(MultiVec),
    Form(Form),
    DiffOp(PolyDiffOp),
    Star(StarProduct),
    Gauge(GaugeOp),
    Qc(QCData),
    Algebroid(AlgebroidPresentation),
    Bundle(BTreeMap<String, Document>),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Poly(_) => "poly",
            Document::MultiVec(_) => "multivec",
            Document::Form(_) => "form",
            Document::DiffOp(_) => "diffop",
            Document::Star(_) => "star",
            Document::Gauge(_) => "gauge",
            Document::Qc(_) => "qc",
            Document::Algebroid(_) => "algebroid",
            Document::Bundle(_) => "bundle",
        }
    }

    pub fn dim(&self) -> Option<usize> {
        Some(match self {
            Document::Poly(p) => p.dim(),
            Document::MultiVec(a) => a.dim(),
            Document::Form(a) => a.dim(),
            Document::DiffOp(d) => d.dim(),
            Document::Star(s) => s.dim(),
            Document::Gauge(g) => g.dim(),
            Document::Qc(q) => q.dim(),
            Document::Algebroid(a) => a.dim(),
            Document::Bundle(_) => return None,
        })
    }
}

macro_rules! extractor {
    ($name:ident, $variant:ident, $ty:ty, $kind:literal) => {
        impl Document {
            pub fn $name(self) -> Result<$ty> {
                match self {
                    Document::$variant(v) => Ok(v),
                    other => Err(Error::Schema {
                        path: "$.kind".into(),
                        msg: format!("expected {}, found {}", $kind, other.kind()),
                    }),
                }
            }
        }
    };
}

extractor!(into_poly, Poly, Poly, "poly");
extractor!(into_multivec, MultiVec, MultiVec, "multivec");
extractor!(into_form, Form, Form, "form");
extractor!(into_diffop, DiffOp, PolyDiffOp, "diffop");
extractor!(into_star, Star, StarProduct, "star");
extractor!(into_gauge, Gauge, GaugeOp, "gauge");
extractor!(into_qc, Qc, QCData, "qc");
extractor!(
    into_algebroid,
    Algebroid,
    AlgebroidPresentation,
    "algebroid"
);
extractor!(into_bundle, Bundle, BTreeMap<String, Document>, "bundle");

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

/// Re-locates errors raised below `path`.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema { .. } => e,
        other => schema(path, other.to_string()),
    })
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(&format!("{path}.{k}"), "unknown field"));
    }
    Ok(obj)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(&format!("{path}.{key}"), "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn opt_uint(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<usize>> {
    obj.get(key)
        .map(|v| uint(v, &format!("{path}.{key}")))
        .transpose()
}

fn poly(v: &Value, dim: usize, path: &str) -> Result<Poly> {
    let text = v
        .as_str()
        .ok_or_else(|| schema(path, "expected a polynomial expression string"))?;
    at(path, parse_poly(text, dim))
}

fn index(v: &Value, bound: usize, path: &str) -> Result<usize> {
    let i = uint(v, path)?;
    if i == 0 || i > bound {
        return Err(schema(path, format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

struct Shape {
    dim: usize,
    rank: usize,
    degree: Option<usize>,
}

type Terms = Vec<(Vec<usize>, Poly)>;

/// Entries `{indices, coeff}` of an alternating tensor.
fn alt_terms(v: &Value, shape: &Shape, path: &str) -> Result<(usize, Terms)> {
    let items = array(v, path)?;
    let mut degree = shape.degree;
    let mut out = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let obj = object(item, &p, &["indices", "coeff"])?;
        let ip = format!("{p}.indices");
        let idx = array(field(obj, "indices", &p)?, &ip)?
            .iter()
            .enumerate()
            .map(|(j, i)| index(i, shape.rank, &format!("{ip}[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        match degree {
            None => degree = Some(idx.len()),
            Some(d) if d != idx.len() => {
                return Err(schema(
                    &ip,
                    format!("expected {d} indices, found {}", idx.len()),
                ))
            }
            _ => {}
        }
        let c = poly(field(obj, "coeff", &p)?, shape.dim, &format!("{p}.coeff"))?;
        out.push((idx, c));
    }
    let degree = degree.ok_or_else(|| schema(path, "empty payload needs an explicit degree"))?;
    Ok((degree, out))
}

fn multivec(v: &Value, dim: usize, degree: Option<usize>, path: &str) -> Result<MultiVec> {
    let shape = Shape {
        dim,
        rank: dim,
        degree,
    };
    let (degree, terms) = alt_terms(v, &shape, path)?;
    let mut out = MultiVec::zero(dim, degree);
    for (idx, c) in terms {
        out.add_term(idx, c);
    }
    Ok(out)
}

fn form(v: &Value, dim: usize, rank: usize, degree: Option<usize>, path: &str) -> Result<Form> {
    let shape = Shape { dim, rank, degree };
    let (degree, terms) = alt_terms(v, &shape, path)?;
    let mut out = Form::zero_ranked(dim, rank, degree);
    for (idx, c) in terms {
        out.add_term(idx, c);
    }
    Ok(out)
}

fn diffop(v: &Value, dim: usize, arity: Option<usize>, path: &str) -> Result<PolyDiffOp> {
    let items = array(v, path)?;
    let mut arity = arity;
    let mut terms = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let obj = object(item, &p, &["coeff", "orders"])?;
        let op = format!("{p}.orders");
        let orders = array(field(obj, "orders", &p)?, &op)?
            .iter()
            .enumerate()
            .map(|(j, o)| {
                let sp = format!("{op}[{j}]");
                let e = array(o, &sp)?
                    .iter()
                    .enumerate()
                    .map(|(l, n)| {
                        let n = uint(n, &format!("{sp}[{l}]"))?;
                        u32::try_from(n)
                            .map_err(|_| schema(&format!("{sp}[{l}]"), "order too large"))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                if e.len() != dim {
                    return Err(schema(
                        &sp,
                        format!("expected {dim} entries, found {}", e.len()),
                    ));
                }
                Ok(Exponents(e))
            })
            .collect::<Result<Vec<_>>>()?;
        match arity {
            None => arity = Some(orders.len()),
            Some(a) if a != orders.len() => {
                return Err(schema(
                    &op,
                    format!("expected arity {a}, found {}", orders.len()),
                ))
            }
            _ => {}
        }
        let c = poly(field(obj, "coeff", &p)?, dim, &format!("{p}.coeff"))?;
        terms.push((orders, c));
    }
    let arity = arity.ok_or_else(|| schema(path, "empty payload needs an explicit arity"))?;
    let mut out = PolyDiffOp::zero(dim, arity);
    for (orders, c) in terms {
        out.add_term(orders, c);
    }
    Ok(out)
}

fn diffop_list(v: &Value, dim: usize, arity: usize, path: &str) -> Result<Vec<PolyDiffOp>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, d)| diffop(d, dim, Some(arity), &format!("{path}[{k}]")))
        .collect()
}

/// Parses a document from a JSON value.
pub fn document_from_value(v: &Value) -> Result<Document> {
    from_value(v, "$")
}

fn from_value(v: &Value, path: &str) -> Result<Document> {
    let allowed = ["kind", "dim", "order", "degree", "arity", "rank", "payload"];
    let obj = object(v, path, &allowed)?;
    let kp = format!("{path}.kind");
    let kind = field(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| schema(&kp, "expected a string"))?;
    let pp = format!("{path}.payload");
    let payload = field(obj, "payload", path)?;
    if kind == "bundle" {
        let entries = payload
            .as_object()
            .ok_or_else(|| schema(&pp, "expected an object"))?;
        let mut out = BTreeMap::new();
        for (name, doc) in entries {
            out.insert(name.clone(), from_value(doc, &format!("{pp}.{name}"))?);
        }
        return Ok(Document::Bundle(out));
    }
    let dim = uint(field(obj, "dim", path)?, &format!("{path}.dim"))?;
    let order = opt_uint(obj, "order", path)?;
    let degree = opt_uint(obj, "degree", path)?;
    let arity = opt_uint(obj, "arity", path)?;
    let rank = opt_uint(obj, "rank", path)?;
    let extra = |key: &str, present: bool| -> Result<()> {
        if present {
            return Err(schema(
                &format!("{path}.{key}"),
                format!("not allowed for kind {kind}"),
            ));
        }
        Ok(())
    };
    let needs_order = matches!(kind, "star" | "gauge" | "qc");
    extra("order", order.is_some() && !needs_order)?;
    extra(
        "degree",
        degree.is_some() && !matches!(kind, "multivec" | "form"),
    )?;
    extra("arity", arity.is_some() && kind != "diffop")?;
    extra(
        "rank",
        rank.is_some() && !matches!(kind, "form" | "algebroid"),
    )?;
    let doc = match kind {
        "poly" => Document::Poly(poly(payload, dim, &pp)?),
        "multivec" => Document::MultiVec(multivec(payload, dim, degree, &pp)?),
        "form" => Document::Form(form(payload, dim, rank.unwrap_or(dim), degree, &pp)?),
        "diffop" => Document::DiffOp(diffop(payload, dim, arity, &pp)?),
        "star" => {
            let body = object(payload, &pp, &["P"])?;
            let ps = diffop_list(field(body, "P", &pp)?, dim, 2, &format!("{pp}.P"))?;
            let order = order.unwrap_or(ps.len());
            Document::Star(at(path, StarProduct::new(dim, order, ps))?)
        }
        "gauge" => {
            let body = object(payload, &pp, &["R"])?;
            let rs = diffop_list(field(body, "R", &pp)?, dim, 1, &format!("{pp}.R"))?;
            let order = order.unwrap_or(rs.len());
            Document::Gauge(at(path, GaugeOp::new(dim, order, rs))?)
        }
        "qc" => {
            let body = object(payload, &pp, &["pis", "H"])?;
            let lp = format!("{pp}.pis");
            let mut pis = array(field(body, "pis", &pp)?, &lp)?
                .iter()
                .enumerate()
                .map(|(k, m)| multivec(m, dim, Some(2), &format!("{lp}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            if let Some(n) = order {
                if n < pis.len() {
                    return Err(schema(
                        &lp,
                        format!("{} bivectors for order {n}", pis.len()),
                    ));
                }
                pis.resize(n, MultiVec::zero(dim, 2));
            }
            let h = form(
                field(body, "H", &pp)?,
                dim,
                dim,
                Some(3),
                &format!("{pp}.H"),
            )?;
            Document::Qc(at(path, QCData::new(pis, h))?)
        }
        "algebroid" => {
            let body = object(payload, &pp, &["anchor", "structure"])?;
            let ap = format!("{pp}.anchor");
            let anchor = array(field(body, "anchor", &pp)?, &ap)?
                .iter()
                .enumerate()
                .map(|(a, row)| {
                    let rp = format!("{ap}[{a}]");
                    array(row, &rp)?
                        .iter()
                        .enumerate()
                        .map(|(j, c)| poly(c, dim, &format!("{rp}[{j}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let r = anchor.len();
            if let Some(declared) = rank {
                if declared != r {
                    return Err(schema(&ap, format!("{r} anchor rows for rank {declared}")));
                }
            }
            let sp = format!("{pp}.structure");
            let structure = array(field(body, "structure", &pp)?, &sp)?
                .iter()
                .enumerate()
                .map(|(k, item)| {
                    let ip = format!("{sp}[{k}]");
                    let o = object(item, &ip, &["pair", "coeffs"])?;
                    let pairp = format!("{ip}.pair");
                    let pair = array(field(o, "pair", &ip)?, &pairp)?;
                    if pair.len() != 2 {
                        return Err(schema(&pairp, "expected two indices"));
                    }
                    let a = index(&pair[0], r, &format!("{pairp}[0]"))?;
                    let b = index(&pair[1], r, &format!("{pairp}[1]"))?;
                    let cp = format!("{ip}.coeffs");
                    let coeffs = array(field(o, "coeffs", &ip)?, &cp)?
                        .iter()
                        .enumerate()
                        .map(|(j, c)| poly(c, dim, &format!("{cp}[{j}]")))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(((a, b), coeffs))
                })
                .collect::<Result<Vec<_>>>()?;
            Document::Algebroid(at(&sp, AlgebroidPresentation::new(dim, anchor, structure))?)
        }
        other => return Err(schema(&kp, format!("unknown kind {other:?}"))),
    };
    Ok(doc)
}

/// Parses a document from JSON text.
pub fn parse_document(text: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        pos: e.column(),
        msg: format!("invalid JSON at line {}: {e}", e.line()),
    })?;
    document_from_value(&v)
}

fn render(p: &Poly) -> Value {
    Value::String(p.render(&variable_names(p.dim())))
}

fn alt_value<K: crate::calculus::AltKind>(a: &crate::calculus::Alt<K>) -> Value {
    Value::Array(
        a.terms()
            .map(|(idx, c)| {
                let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
                json!({ "indices": one_based, "coeff": render(c) })
            })
            .collect(),
    )
}

fn diffop_value(d: &PolyDiffOp) -> Value {
    Value::Array(
        d.terms()
            .map(|(orders, c)| {
                let orders: Vec<&Vec<u32>> = orders.iter().map(|e| &e.0).collect();
                json!({ "coeff": render(c), "orders": orders })
            })
            .collect(),
    )
}

/// Canonical JSON value of a document.
pub fn to_value(doc: &Document) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(doc.kind()));
    if let Some(dim) = doc.dim() {
        obj.insert("dim".into(), json!(dim));
    }
    let payload = match doc {
        Document::Poly(p) => render(p),
        Document::MultiVec(a) => {
            obj.insert("degree".into(), json!(a.degree()));
            alt_value(a)
        }
        Document::Form(a) => {
            obj.insert("degree".into(), json!(a.degree()));
            if a.rank() != a.dim() {
                obj.insert("rank".into(), json!(a.rank()));
            }
            alt_value(a)
        }
        Document::DiffOp(d) => {
            obj.insert("arity".into(), json!(d.arity()));
            diffop_value(d)
        }
        Document::Star(s) => {
            obj.insert("order".into(), json!(s.order()));
            json!({ "P": s.ps().iter().map(diffop_value).collect::<Vec<_>>() })
        }
        Document::Gauge(g) => {
            obj.insert("order".into(), json!(g.order()));
            json!({ "R": g.rs().iter().map(diffop_value).collect::<Vec<_>>() })
        }
        Document::Qc(q) => {
            obj.insert("order".into(), json!(q.order()));
            json!({
                "pis": q.pis().iter().map(alt_value).collect::<Vec<_>>(),
                "H": alt_value(q.h()),
            })
        }
        Document::Algebroid(a) => {
            obj.insert("rank".into(), json!(a.rank()));
            let anchor: Vec<Vec<Value>> = a
                .anchor_matrix()
                .iter()
                .map(|row| row.iter().map(render).collect())
                .collect();
            let mut structure = Vec::new();
            for x in 0..a.rank() {
                for y in x + 1..a.rank() {
                    let c = a.structure(x, y);
                    if c.iter().any(|p| !p.is_zero()) {
                        let coeffs: Vec<Value> = c.iter().map(render).collect();
                        structure.push(json!({ "pair": [x + 1, y + 1], "coeffs": coeffs }));
                    }
                }
            }
            json!({ "anchor": anchor, "structure": structure })
        }
        Document::Bundle(entries) => Value::Object(
            entries
                .iter()
                .map(|(k, d)| (k.clone(), to_value(d)))
                .collect(),
        ),
    };
    obj.insert("payload".into(), payload);
    Value::Object(obj)
}

/// Canonical text: pretty-printed with sorted keys and a trailing newline.
pub fn to_canonical_string(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(doc)).expect("serializable");
    s.push('\n');
    s
}

/// One canonicalization pass over document text.
pub fn canonicalize(text: &str) -> Result<String> {
    Ok(to_canonical_string(&parse_document(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(text: &str) -> Document {
        let doc = parse_document(text).unwrap();
        let once = to_canonical_string(&doc);
        assert_eq!(parse_document(&once).unwrap(), doc);
        assert_eq!(canonicalize(&once).unwrap(), once);
        doc
    }

    #[test]
    fn bivector_document() {
        let doc =
            round_trip(r#"{"kind":"multivec","dim":2,"payload":[{"indices":[1,2],"coeff":"1"}]}"#);
        let pi = doc.into_multivec().unwrap();
        assert_eq!(pi, MultiVec::basis(2, &[0, 1], Poly::one(2)));
        let flipped = r#"{"kind":"multivec","dim":2,"payload":[{"indices":[2,1],"coeff":"-1"}]}"#;
        assert_eq!(
            parse_document(flipped).unwrap().into_multivec().unwrap(),
            pi
        );
    }

    #[test]
    fn star_document() {
        let text = r#"{"kind":"star","dim":2,"payload":{"P":[[
            {"coeff":"1/2","orders":[[1,0],[0,1]]},
            {"coeff":"-1/2","orders":[[0,1],[1,0]]}]]}}"#;
        let s = round_trip(text).into_star().unwrap();
        assert_eq!(s.order(), 1);
        assert!(s.is_special());
    }

    #[test]
    fn kind_payload_mismatch() {
        let text = r#"{"kind":"star","dim":2,"payload":{"R":[]}}"#;
        match parse_document(text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.payload.R"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn located_errors() {
        let cases = [
            (r#"{"kind":"poly","dim":2,"payload":"x +"}"#, "$.payload"),
            (r#"{"kind":"poly","payload":"x"}"#, "$.dim"),
            (
                r#"{"kind":"poly","dim":2,"payload":"x","order":1}"#,
                "$.order",
            ),
            (r#"{"kind":"blob","dim":2,"payload":"x"}"#, "$.kind"),
            (r#"{"kind":"multivec","dim":2,"payload":[]}"#, "$.payload"),
            (
                r#"{"kind":"multivec","dim":2,"payload":[{"indices":[1,3],"coeff":"1"}]}"#,
                "$.payload[0].indices[1]",
            ),
            (
                r#"{"kind":"form","dim":2,"payload":[{"indices":[1],"coeff":"1"},{"indices":[1,2],"coeff":"x"}]}"#,
                "$.payload[1].indices",
            ),
            (
                r#"{"kind":"diffop","dim":2,"payload":[{"coeff":"q","orders":[[1,0]]}]}"#,
                "$.payload[0].coeff",
            ),
            (
                r#"{"kind":"diffop","dim":2,"payload":[{"coeff":"1","orders":[[1]]}]}"#,
                "$.payload[0].orders[0]",
            ),
            (
                r#"{"kind":"bundle","payload":{"a":{"kind":"poly","dim":1,"payload":7}}}"#,
                "$.payload.a.payload",
            ),
            (
                r#"{"kind":"qc","dim":3,"payload":{"pis":[],"H":[{"indices":[1,2,3],"coeff":"x"}]}}"#,
                "$",
            ),
        ];
        for (text, want) in cases {
            match parse_document(text) {
                Err(Error::Schema { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_document("{"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn other_kinds_round_trip() {
        round_trip(r#"{"kind":"poly","dim":3,"payload":"z^2 - 1/3*x*y"}"#);
        round_trip(r#"{"kind":"form","dim":2,"degree":2,"payload":[]}"#);
        round_trip(r#"{"kind":"form","dim":1,"rank":3,"payload":[{"indices":[3,1],"coeff":"x"}]}"#);
        round_trip(r#"{"kind":"diffop","dim":1,"arity":1,"payload":[]}"#);
        round_trip(
            r#"{"kind":"gauge","dim":1,"order":3,"payload":{"R":[[{"coeff":"1/2","orders":[[2]]}]]}}"#,
        );
        round_trip(
            r#"{"kind":"qc","dim":2,"order":2,"payload":{"pis":[[{"indices":[1,2],"coeff":"1"}]],"H":[]}}"#,
        );
        let a = round_trip(
            r#"{"kind":"algebroid","dim":2,"payload":{"anchor":[["1","0"],["0","x"]],
                "structure":[{"pair":[1,2],"coeffs":["0","1"]}]}}"#,
        );
        assert_eq!(a.into_algebroid().unwrap().rank(), 2);
        let b = round_trip(r#"{"kind":"bundle","payload":{}}"#);
        assert!(b.into_bundle().unwrap().is_empty());
    }
}
