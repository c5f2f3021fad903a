//! Invariant suites over a bundle of named documents.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::calculus::{differential, exterior_d, MultiVec};
use crate::diffop::{cocycle_defect, hochschild_delta};
use crate::error::Result;
use crate::kernel::{variable_names, Poly};
use crate::liealgebroid::from_poisson;
use crate::parser::Document;
use crate::poisson::{bracket, is_poisson, koszul_bracket, lichnerowicz_d};
use crate::starprod::{
    assoc_defect, assoc_poisson, gauge_transform, invert_gauge, specialize, subprincipal, GaugeOp,
    StarProduct,
};

use super::{algebroid_defect, doc, mc_defects, poly_value, Defect, Report};

/// Outcome of one named check: empty when it passes.
struct Check {
    name: String,
    defects: Vec<Defect>,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Runs `f`; a property error becomes a located defect, any other error
    /// is reported as a defect of the check itself.
    fn run(&mut self, name: String, f: impl FnOnce(&str) -> Result<Vec<Defect>>) {
        let defects = match f(&name) {
            Ok(d) => d,
            Err(e) => vec![Defect::from_error(&name, &e)],
        };
        self.checks.push(Check { name, defects });
    }
}

fn nonzero_multivec(loc: String, a: MultiVec) -> Vec<Defect> {
    if a.is_zero() {
        Vec::new()
    } else {
        vec![Defect::new(loc, doc(Document::MultiVec(a)))]
    }
}

fn bivector_checks(s: &mut Suite, name: &str, pi: &MultiVec) {
    let n = pi.dim();
    let names = variable_names(n);
    s.run(format!("{name}: poisson"), |_| {
        Ok(is_poisson(pi)?
            .witness
            .into_iter()
            .map(|(t, v)| {
                Defect::new(
                    format!(
                        "{name}: jacobiator({}, {}, {})",
                        names[t[0]], names[t[1]], names[t[2]]
                    ),
                    poly_value(&v),
                )
            })
            .collect())
    });
    if !is_poisson(pi).map(|c| c.is_poisson()).unwrap_or(false) {
        return;
    }
    s.run(format!("{name}: d_pi squared"), |ctx| {
        let mut out = Vec::new();
        for i in 0..n {
            let x = Poly::var(n, i);
            let f = MultiVec::scalar(x.clone());
            out.extend(nonzero_multivec(
                format!("{ctx} on {}", names[i]),
                lichnerowicz_d(pi, &lichnerowicz_d(pi, &f)?)?,
            ));
            for j in 0..n {
                let v = MultiVec::basis(n, &[j], x.clone());
                out.extend(nonzero_multivec(
                    format!("{ctx} on {}*d/d{}", names[i], names[j]),
                    lichnerowicz_d(pi, &lichnerowicz_d(pi, &v)?)?,
                ));
            }
        }
        Ok(out)
    });
    s.run(format!("{name}: cotangent algebroid"), |ctx| {
        Ok(from_poisson(pi)?
            .check()?
            .iter()
            .map(|f| algebroid_defect(ctx, f))
            .collect())
    });
    s.run(format!("{name}: koszul of exact forms"), |ctx| {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (f, g) = (Poly::var(n, i), Poly::var(n, j));
                let lhs = koszul_bracket(pi, &differential(&f), &differential(&g))?;
                let rhs = differential(&bracket(pi, &f, &g)?);
                let diff = lhs.sub(&rhs);
                if !diff.is_zero() {
                    out.push(Defect::new(
                        format!("{ctx} (d{}, d{})", names[i], names[j]),
                        doc(Document::Form(diff)),
                    ));
                }
            }
        }
        Ok(out)
    });
}

fn assoc_defects(ctx: &str, s: &StarProduct) -> Result<Vec<Defect>> {
    Ok(assoc_defect(s)?
        .into_iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(k, d)| Defect::new(format!("{ctx} order {}", k + 1), doc(Document::DiffOp(d))))
        .collect())
}

/// Coefficient degree bound for specialization: the largest coefficient
/// degree appearing in `P₁`.
fn coefficient_degree(s: &StarProduct) -> u32 {
    s.p(1)
        .terms()
        .map(|(_, c)| c.total_degree())
        .max()
        .flatten()
        .unwrap_or(0)
}

fn star_checks(s: &mut Suite, name: &str, st: &StarProduct) {
    s.run(format!("{name}: associativity"), |ctx| {
        assoc_defects(ctx, st)
    });
    if !assoc_defect(st)
        .map(|d| d.iter().all(|x| x.is_zero()))
        .unwrap_or(false)
    {
        return;
    }
    s.run(format!("{name}: unitality"), |ctx| {
        Ok(st
            .unitality_defects()
            .into_iter()
            .map(|(k, slot)| {
                Defect::new(
                    format!("{ctx} order {k} slot {slot}"),
                    "P_k(1, .) or P_k(., 1) nonzero",
                )
            })
            .collect())
    });
    s.run(format!("{name}: cocycle P1"), |ctx| {
        let d = cocycle_defect(&st.p(1))?;
        Ok(if d.is_zero() {
            Vec::new()
        } else {
            vec![Defect::new(ctx, doc(Document::DiffOp(d)))]
        })
    });
    s.run(format!("{name}: associated poisson"), |_| {
        assoc_poisson(st).map(|_| Vec::new())
    });
    if st.order() < 2 {
        return;
    }
    if st.is_special() {
        let id = GaugeOp::identity(st.dim(), st.order());
        s.run(format!("{name}: subprincipal closedness"), |_| {
            subprincipal(st, &id).map(|_| Vec::new())
        });
    } else {
        s.run(
            format!("{name}: specialize and subprincipal closedness"),
            |_| {
                let sp = specialize(st, coefficient_degree(st))?;
                subprincipal(st, &sp.gauge).map(|_| Vec::new())
            },
        );
    }
}

fn gauge_checks(s: &mut Suite, name: &str, g: &GaugeOp) {
    s.run(format!("{name}: inverse"), |ctx| {
        let inv = invert_gauge(g)?;
        let mut out = Vec::new();
        for (label, prod) in [("left", inv.compose(g)?), ("right", g.compose(&inv)?)] {
            if !prod.is_identity() {
                out.push(Defect::new(
                    format!("{ctx} {label}"),
                    doc(Document::Gauge(prod)),
                ));
            }
        }
        Ok(out)
    });
    s.run(format!("{name}: unitality"), |ctx| {
        Ok(g.unitality_defects()
            .into_iter()
            .map(|k| Defect::new(format!("{ctx} order {k}"), "R_k(1) nonzero"))
            .collect())
    });
}

/// Gauging preserves associativity and the associated bracket.
fn gauge_pair_checks(s: &mut Suite, sname: &str, st: &StarProduct, gname: &str, g: &GaugeOp) {
    s.run(format!("{sname} by {gname}: gauge invariance"), |ctx| {
        let gauged = gauge_transform(st, g)?;
        let mut out = assoc_defects(ctx, &gauged)?;
        let before = st.bracket_op();
        let after = gauged.bracket_op();
        if before != after {
            out.push(Defect::new(
                format!("{ctx} bracket"),
                doc(Document::DiffOp(after.sub(&before))),
            ));
        }
        Ok(out)
    });
}

fn collect(s: &mut Suite, prefix: &str, bundle: &BTreeMap<String, Document>) {
    let full = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}/{k}")
        }
    };
    for (key, d) in bundle {
        let name = full(key);
        match d {
            Document::MultiVec(a) if a.degree() == 2 => bivector_checks(s, &name, a),
            Document::Form(f) if f.rank() == f.dim() => {
                s.run(format!("{name}: d squared"), |ctx| {
                    let dd = exterior_d(&exterior_d(f));
                    Ok(if dd.is_zero() {
                        Vec::new()
                    } else {
                        vec![Defect::new(ctx, doc(Document::Form(dd)))]
                    })
                })
            }
            Document::DiffOp(q) if q.arity() == 1 => {
                s.run(format!("{name}: cocycle of coboundary"), |ctx| {
                    let d = cocycle_defect(&hochschild_delta(q)?)?;
                    Ok(if d.is_zero() {
                        Vec::new()
                    } else {
                        vec![Defect::new(ctx, doc(Document::DiffOp(d)))]
                    })
                })
            }
            Document::Star(st) => star_checks(s, &name, st),
            Document::Gauge(g) => gauge_checks(s, &name, g),
            Document::Qc(q) => s.run(format!("{name}: maurer-cartan"), |ctx| mc_defects(q, ctx)),
            Document::Algebroid(a) => s.run(format!("{name}: algebroid"), |ctx| {
                Ok(a.check()?
                    .iter()
                    .map(|f| algebroid_defect(ctx, f))
                    .collect())
            }),
            Document::Bundle(inner) => collect(s, &name, inner),
            _ => {}
        }
    }
    for (sk, sd) in bundle {
        let Document::Star(st) = sd else { continue };
        for (gk, gd) in bundle {
            let Document::Gauge(g) = gd else { continue };
            if g.dim() == st.dim() && g.order() == st.order() {
                gauge_pair_checks(s, &full(sk), st, &full(gk), g);
            }
        }
    }
}

/// Runs every applicable suite; the report lists each check and all defects
/// in a fixed order.
pub fn verify_bundle(bundle: &BTreeMap<String, Document>) -> Report {
    let mut suite = Suite { checks: Vec::new() };
    collect(&mut suite, "", bundle);
    let total = suite.checks.len();
    let passed = suite.checks.iter().filter(|c| c.defects.is_empty()).count();
    let results: Vec<Value> = suite
        .checks
        .iter()
        .map(|c| json!({ "check": c.name, "ok": c.defects.is_empty() }))
        .collect();
    let first = suite
        .checks
        .iter()
        .find(|c| !c.defects.is_empty())
        .map(|c| json!({ "check": c.name, "location": c.defects[0].location, "value": c.defects[0].value }));
    let mut payload = json!({
        "checks": total,
        "passed": passed,
        "failed": total - passed,
        "results": results,
        "first_failure": first,
    });
    if total == 0 {
        payload["warning"] =
            json!("no applicable checks: bundle is empty or has no checkable entries");
    }
    let defects = suite.checks.into_iter().flat_map(|c| c.defects).collect();
    Report::new("verify", payload).with_defects(defects)
}
