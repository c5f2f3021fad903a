//! The `dqkit` command-line driver.
//!
//! Every command prints one JSON report (`command`, `ok`, `payload`,
//! `defects`) and exits 0 when ok, 1 on a located defect and 2 on malformed
//! input or usage.

mod report;
mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::calculus::{increasing_tuples, AlgebroidForm, Form, MultiVec};
use crate::diffop::{cocycle_defect, compose_into_slot, hochschild_delta};
use crate::error::{Error, Result};
use crate::kernel::{variable_names, Poly, TPoly};
use crate::liealgebroid::{extension_curvature, from_poisson, AlgebroidFailure, ExtensionData};
use crate::parser::{parse_document, parse_poly, to_value, Document};
use crate::poisson::{bracket, hamiltonian, is_poisson, koszul_bracket, lichnerowicz_d};
use crate::qclimit::{kappa, mc_defect, QCData};
use crate::starprod::{
    ad_exp, assoc_defect, assoc_poisson, contravariant_nabla, gauge_transform, invert_gauge, moyal,
    nabla_curvature, sigma1_class, specialize, subprincipal, BimoduleModel, GaugeOp, StarProduct,
};

pub use report::{Defect, Report};
pub use verify::verify_bundle;

#[derive(Parser, Debug)]
#[command(
    name = "dqkit",
    version,
    about = "Exact calculus for truncated star products and Poisson structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Input document.
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Truncation order.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Ambient dimension for bare expressions.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Coefficient degree bound for `star specialize`.
    #[arg(long, global = true)]
    degree: Option<u32>,
    /// Plain-text rendering instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Add wall-clock milliseconds to the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Secondary input documents, in order.
    #[arg(long = "arg", global = true, value_name = "FILE")]
    args: Vec<PathBuf>,
    /// Polynomial arguments, in order.
    #[arg(
        long = "f",
        global = true,
        value_name = "EXPR",
        allow_hyphen_values = true
    )]
    polys: Vec<String>,
    /// Coefficients t⁰, t¹, … of the series α for `star adexp`.
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    alpha: Vec<String>,
    /// Slot (1-based) for `diffop compose`.
    #[arg(long, global = true)]
    slot: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and canonicalize a document (or `--f` with `--dim`).
    Parse,
    /// Brackets, d_Π and Hamiltonian fields of a bivector.
    #[command(subcommand)]
    Poisson(PoissonCmd),
    /// Lie algebroid presentations.
    #[command(subcommand)]
    Algebroid(AlgebroidCmd),
    /// Polydifferential operators and Hochschild calculus.
    #[command(subcommand)]
    Diffop(DiffopCmd),
    /// Truncated star products and their gauge theory.
    #[command(subcommand)]
    Star(StarCmd),
    /// Maurer–Cartan defects of quasi-classical data.
    Mc,
    /// κ = π̃(B) − π₂ for a curving `--arg B`.
    Kappa,
    /// Run every applicable check over a bundle.
    Verify,
}

#[derive(Subcommand, Debug)]
enum PoissonCmd {
    /// Jacobi identity on coordinate triples.
    Check,
    /// {f, g} for `--f f --f g`.
    Bracket,
    /// d_Π of the multivector `--arg A`.
    Dpi,
    /// Koszul bracket of the 1-forms `--arg α --arg β`.
    Koszul,
    /// Hamiltonian vector field of `--f f`.
    Hamiltonian,
}

#[derive(Subcommand, Debug)]
enum AlgebroidCmd {
    /// Jacobi identity and anchor morphism.
    Check,
    /// Algebroid differential of the form `--arg ω`.
    D,
    /// The cotangent algebroid of a bivector.
    FromPoisson,
    /// Splitting curvature for twist `--arg ω` and splitting `--arg λ`.
    ExtCurv,
}

#[derive(Subcommand, Debug)]
enum DiffopCmd {
    /// Evaluate on `--f` arguments.
    Apply,
    /// Insert `--arg inner` into `--slot k`.
    Compose,
    /// Hochschild coboundary of a unary operator.
    Delta,
    /// Hochschild cocycle defect of a binary operator.
    Cocycle,
}

#[derive(Subcommand, Debug)]
enum StarCmd {
    /// Moyal product of a constant bivector to `--order N`.
    Moyal,
    /// Associativity defect per order.
    Assoc,
    /// Associated Poisson bivector.
    Poisson,
    /// Gauge transform by `--arg R`.
    Gauge,
    /// Inverse gauge operator.
    Invert,
    /// Gauge to a special product with coefficient bound `--degree`.
    Specialize,
    /// Σ₁ class of the special section `--arg R`.
    Sigma1,
    /// Subprincipal curvature of `--arg R` (identity if absent).
    Subprincipal,
    /// Ad(exp α)(b) for `--alpha` coefficients and `--f b`.
    Adexp,
    /// ∇_{df} m of a bimodule bundle, `--f f --f m`.
    Nabla,
    /// Curvature of the contravariant connection of a bimodule bundle.
    NablaCurv,
}

/// What a run produced: the text for each stream and the exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let started = Instant::now();
    let report = match execute(&cli.command, &cli.common) {
        Ok(r) => r,
        Err(e) if e.is_defect() => Report::new(command_name(&cli.command), Value::Null)
            .with_defects(vec![Defect::from_error("", &e)]),
        Err(e) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let mut report = report;
    if cli.common.timing {
        report.timing_ms = Some(started.elapsed().as_millis());
    }
    let text = if cli.common.human {
        report.render_human()
    } else {
        report.render_json()
    };
    let code = if report.ok() { 0 } else { 1 };
    match &cli.common.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn command_name(c: &Command) -> String {
    let (head, sub) = match c {
        Command::Parse => ("parse", ""),
        Command::Mc => ("mc", ""),
        Command::Kappa => ("kappa", ""),
        Command::Verify => ("verify", ""),
        Command::Poisson(p) => (
            "poisson",
            match p {
                PoissonCmd::Check => "check",
                PoissonCmd::Bracket => "bracket",
                PoissonCmd::Dpi => "dpi",
                PoissonCmd::Koszul => "koszul",
                PoissonCmd::Hamiltonian => "hamiltonian",
            },
        ),
        Command::Algebroid(a) => (
            "algebroid",
            match a {
                AlgebroidCmd::Check => "check",
                AlgebroidCmd::D => "d",
                AlgebroidCmd::FromPoisson => "from-poisson",
                AlgebroidCmd::ExtCurv => "ext-curv",
            },
        ),
        Command::Diffop(d) => (
            "diffop",
            match d {
                DiffopCmd::Apply => "apply",
                DiffopCmd::Compose => "compose",
                DiffopCmd::Delta => "delta",
                DiffopCmd::Cocycle => "cocycle",
            },
        ),
        Command::Star(s) => (
            "star",
            match s {
                StarCmd::Moyal => "moyal",
                StarCmd::Assoc => "assoc",
                StarCmd::Poisson => "poisson",
                StarCmd::Gauge => "gauge",
                StarCmd::Invert => "invert",
                StarCmd::Specialize => "specialize",
                StarCmd::Sigma1 => "sigma1",
                StarCmd::Subprincipal => "subprincipal",
                StarCmd::Adexp => "adexp",
                StarCmd::Nabla => "nabla",
                StarCmd::NablaCurv => "nabla-curv",
            },
        ),
    };
    if sub.is_empty() {
        head.to_string()
    } else {
        format!("{head} {sub}")
    }
}

pub(crate) fn load(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| match e {
        Error::Schema { path: p, msg } => Error::Schema {
            path: format!("{}:{p}", path.display()),
            msg,
        },
        other => Error::Invalid(format!("{}: {other}", path.display())),
    })
}

impl Common {
    fn input(&self) -> Result<Document> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::Invalid("missing --in <file>".into()))?;
        load(path)
    }

    fn arg(&self, k: usize, what: &str) -> Result<Document> {
        let path = self
            .args
            .get(k)
            .ok_or_else(|| Error::Invalid(format!("missing --arg for {what}")))?;
        load(path)
    }

    fn polys(&self, dim: usize, count: usize) -> Result<Vec<Poly>> {
        if self.polys.len() != count {
            return Err(Error::Invalid(format!(
                "expected {count} --f arguments, found {}",
                self.polys.len()
            )));
        }
        self.polys.iter().map(|s| parse_poly(s, dim)).collect()
    }
}

pub(crate) fn poly_value(p: &Poly) -> Value {
    Value::String(p.render(&variable_names(p.dim())))
}

pub(crate) fn doc(d: Document) -> Value {
    to_value(&d)
}

pub(crate) fn frame_form(f: Form, rank: usize) -> Result<AlgebroidForm> {
    if f.rank() != rank {
        return Err(Error::DimensionMismatch {
            expected: rank,
            found: f.rank(),
        });
    }
    Ok(f.retag())
}

pub(crate) fn section_value(s: &[Poly]) -> Value {
    Value::Array(s.iter().map(poly_value).collect())
}

pub(crate) fn algebroid_defect(context: &str, f: &AlgebroidFailure) -> Defect {
    let at = |w: String| {
        if context.is_empty() {
            w
        } else {
            format!("{context}: {w}")
        }
    };
    match f {
        AlgebroidFailure::Jacobi { sections, defect } => Defect::new(
            at("jacobi".into()),
            json!({
                "sections": sections.iter().map(|s| section_value(s)).collect::<Vec<_>>(),
                "defect": section_value(defect),
            }),
        ),
        AlgebroidFailure::Anchor { pair, defect } => Defect::new(
            at(format!("anchor(e{}, e{})", pair[0] + 1, pair[1] + 1)),
            doc(Document::MultiVec(defect.clone())),
        ),
    }
}

fn tpoly_value(t: &TPoly) -> Value {
    Value::Array(t.coeffs().iter().map(poly_value).collect())
}

fn execute(command: &Command, c: &Common) -> Result<Report> {
    let name = command_name(command);
    let report = |payload: Value| Report::new(name.clone(), payload);
    match command {
        Command::Parse => match &c.input {
            Some(_) => Ok(report(doc(c.input()?))),
            None => {
                let dim = c
                    .dim
                    .ok_or_else(|| Error::Invalid("parse needs --in or --dim with --f".into()))?;
                let p = c.polys(dim, 1)?.remove(0);
                Ok(report(doc(Document::Poly(p))))
            }
        },
        Command::Poisson(p) => {
            let pi = c.input()?.into_multivec()?;
            match p {
                PoissonCmd::Check => {
                    let check = is_poisson(&pi)?;
                    let defects = check
                        .witness
                        .iter()
                        .map(|(t, v)| {
                            let names = variable_names(pi.dim());
                            Defect::new(
                                format!(
                                    "jacobiator({}, {}, {})",
                                    names[t[0]], names[t[1]], names[t[2]]
                                ),
                                poly_value(v),
                            )
                        })
                        .collect();
                    Ok(report(json!({ "poisson": check.is_poisson() })).with_defects(defects))
                }
                PoissonCmd::Bracket => {
                    let fg = c.polys(pi.dim(), 2)?;
                    Ok(report(poly_value(&bracket(&pi, &fg[0], &fg[1])?)))
                }
                PoissonCmd::Dpi => {
                    let a = c.arg(0, "the multivector")?.into_multivec()?;
                    Ok(report(doc(Document::MultiVec(lichnerowicz_d(&pi, &a)?))))
                }
                PoissonCmd::Koszul => {
                    let alpha = c.arg(0, "the first 1-form")?.into_form()?;
                    let beta = c.arg(1, "the second 1-form")?.into_form()?;
                    Ok(report(doc(Document::Form(koszul_bracket(
                        &pi, &alpha, &beta,
                    )?))))
                }
                PoissonCmd::Hamiltonian => {
                    let f = c.polys(pi.dim(), 1)?.remove(0);
                    Ok(report(doc(Document::MultiVec(hamiltonian(&pi, &f)?))))
                }
            }
        }
        Command::Algebroid(a) => match a {
            AlgebroidCmd::FromPoisson => {
                let pi = c.input()?.into_multivec()?;
                Ok(report(doc(Document::Algebroid(from_poisson(&pi)?))))
            }
            AlgebroidCmd::Check => {
                let alg = c.input()?.into_algebroid()?;
                let defects = alg
                    .check()?
                    .iter()
                    .map(|f| algebroid_defect("", f))
                    .collect();
                Ok(report(json!({ "rank": alg.rank() })).with_defects(defects))
            }
            AlgebroidCmd::D => {
                let alg = c.input()?.into_algebroid()?;
                let omega = frame_form(c.arg(0, "the form")?.into_form()?, alg.rank())?;
                Ok(report(doc(Document::Form(alg.d(&omega)?.retag()))))
            }
            AlgebroidCmd::ExtCurv => {
                let alg = c.input()?.into_algebroid()?;
                let rank = alg.rank();
                let twist = frame_form(c.arg(0, "the twist 2-form")?.into_form()?, rank)?;
                let lambda = frame_form(c.arg(1, "the splitting 1-form")?.into_form()?, rank)?;
                let ext = ExtensionData::new(alg, twist)?;
                Ok(report(doc(Document::Form(
                    extension_curvature(&ext, &lambda)?.retag(),
                ))))
            }
        },
        Command::Diffop(d) => {
            let op = c.input()?.into_diffop()?;
            match d {
                DiffopCmd::Apply => {
                    let args = c.polys(op.dim(), op.arity())?;
                    Ok(report(poly_value(&op.apply(&args)?)))
                }
                DiffopCmd::Compose => {
                    let inner = c.arg(0, "the inner operator")?.into_diffop()?;
                    let slot = c
                        .slot
                        .ok_or_else(|| Error::Invalid("missing --slot".into()))?;
                    Ok(report(doc(Document::DiffOp(compose_into_slot(
                        &op, slot, &inner,
                    )?))))
                }
                DiffopCmd::Delta => Ok(report(doc(Document::DiffOp(hochschild_delta(&op)?)))),
                DiffopCmd::Cocycle => {
                    let defect = cocycle_defect(&op)?;
                    let defects = if defect.is_zero() {
                        Vec::new()
                    } else {
                        vec![Defect::new(
                            "cocycle",
                            doc(Document::DiffOp(defect.clone())),
                        )]
                    };
                    Ok(report(doc(Document::DiffOp(defect))).with_defects(defects))
                }
            }
        }
        Command::Star(s) => star(s, c, &name),
        Command::Mc => {
            let q = c.input()?.into_qc()?;
            let defects = mc_defects(&q, "")?;
            let orders: Vec<Value> = mc_defect(&q)?
                .into_iter()
                .map(|d| doc(Document::MultiVec(d)))
                .collect();
            Ok(
                report(json!({ "defects_by_order": orders, "first_order": 2 }))
                    .with_defects(defects),
            )
        }
        Command::Kappa => {
            let q = c.input()?.into_qc()?;
            let b = c.arg(0, "the curving 2-form")?.into_form()?;
            let k = kappa(&q, &b)?;
            Ok(report(json!({
                "kappa": doc(Document::MultiVec(k.kappa)),
                "certificate": doc(Document::MultiVec(k.certificate)),
            })))
        }
        Command::Verify => {
            let bundle = c.input()?.into_bundle()?;
            Ok(verify_bundle(&bundle))
        }
    }
}

/// Nonzero Maurer–Cartan coefficients, located by order and covector triple.
pub(crate) fn mc_defects(q: &QCData, context: &str) -> Result<Vec<Defect>> {
    let names = variable_names(q.dim());
    let mut out = Vec::new();
    for (k, d) in mc_defect(q)?.into_iter().enumerate() {
        for t in increasing_tuples(q.dim(), 3) {
            let v = d.coeff(&t);
            if !v.is_zero() {
                let loc = format!(
                    "order {} (d{}, d{}, d{})",
                    k + 2,
                    names[t[0]],
                    names[t[1]],
                    names[t[2]]
                );
                let loc = if context.is_empty() {
                    loc
                } else {
                    format!("{context}: {loc}")
                };
                out.push(Defect::new(loc, poly_value(&v)));
            }
        }
    }
    Ok(out)
}

fn gauge_arg(c: &Common, s: &StarProduct) -> Result<GaugeOp> {
    if c.args.is_empty() {
        return Ok(GaugeOp::identity(s.dim(), s.order()));
    }
    c.arg(0, "the gauge operator")?.into_gauge()
}

fn bimodule(c: &Common) -> Result<BimoduleModel> {
    let mut parts = c.input()?.into_bundle()?;
    let star1 = parts
        .remove("star")
        .ok_or_else(|| Error::Invalid("bimodule bundle needs an entry `star`".into()))?
        .into_star()?;
    let (n, order) = (star1.dim(), star1.order());
    let g = match parts.remove("G") {
        Some(d) => d.into_gauge()?,
        None => GaugeOp::identity(n, order),
    };
    let mut field = |key: &str| -> Result<MultiVec> {
        match parts.remove(key) {
            Some(d) => d.into_multivec(),
            None => Ok(MultiVec::zero(n, 1)),
        }
    };
    let xi0 = field("xi0")?;
    let xi1 = field("xi1")?;
    BimoduleModel::new(star1, g, xi0, xi1)
}

fn star(s: &StarCmd, c: &Common, name: &str) -> Result<Report> {
    let report = |payload: Value| Report::new(name, payload);
    match s {
        StarCmd::Moyal => {
            let pi = c.input()?.into_multivec()?;
            let order = c
                .order
                .ok_or_else(|| Error::Invalid("missing --order".into()))?;
            Ok(report(doc(Document::Star(moyal(&pi, order)?))))
        }
        StarCmd::Assoc => {
            let st = c.input()?.into_star()?;
            let d = assoc_defect(&st)?;
            let defects = d
                .iter()
                .enumerate()
                .filter(|(_, op)| !op.is_zero())
                .map(|(k, op)| {
                    Defect::new(
                        format!("order {}", k + 1),
                        doc(Document::DiffOp(op.clone())),
                    )
                })
                .collect();
            let unital = st.unitality_defects().is_empty();
            Ok(report(json!({
                "orders_checked": st.order(),
                "unital": unital,
            }))
            .with_defects(defects))
        }
        StarCmd::Poisson => {
            let st = c.input()?.into_star()?;
            Ok(report(doc(Document::MultiVec(assoc_poisson(&st)?))))
        }
        StarCmd::Gauge => {
            let st = c.input()?.into_star()?;
            let r = c.arg(0, "the gauge operator")?.into_gauge()?;
            Ok(report(doc(Document::Star(gauge_transform(&st, &r)?))))
        }
        StarCmd::Invert => {
            let r = c.input()?.into_gauge()?;
            Ok(report(doc(Document::Gauge(invert_gauge(&r)?))))
        }
        StarCmd::Specialize => {
            let st = c.input()?.into_star()?;
            let degree = c
                .degree
                .ok_or_else(|| Error::Invalid("missing --degree".into()))?;
            let sp = specialize(&st, degree)?;
            let special = gauge_transform(&st, &sp.gauge)?;
            Ok(report(json!({
                "Q": doc(Document::DiffOp(sp.q)),
                "R": doc(Document::Gauge(sp.gauge)),
                "special": doc(Document::Star(special)),
            })))
        }
        StarCmd::Sigma1 => {
            let st = c.input()?.into_star()?;
            let r = c.arg(0, "the gauge operator")?.into_gauge()?;
            let class = sigma1_class(&st, &r)?;
            Ok(report(doc(Document::MultiVec(class.xi().clone()))))
        }
        StarCmd::Subprincipal => {
            let st = c.input()?.into_star()?;
            let r = gauge_arg(c, &st)?;
            Ok(report(doc(Document::MultiVec(subprincipal(&st, &r)?))))
        }
        StarCmd::Adexp => {
            let st = c.input()?.into_star()?;
            let (n, order) = (st.dim(), st.order());
            let coeffs = c
                .alpha
                .iter()
                .map(|a| parse_poly(a, n))
                .collect::<Result<Vec<_>>>()?;
            let alpha = TPoly::new(n, order, coeffs)?;
            let b = TPoly::from_poly(c.polys(n, 1)?.remove(0), order);
            Ok(report(tpoly_value(&ad_exp(&st, &alpha, &b)?)))
        }
        StarCmd::Nabla => {
            let m = bimodule(c)?;
            let fm = c.polys(m.star1().dim(), 2)?;
            Ok(report(poly_value(&contravariant_nabla(
                &m, &fm[0], &fm[1],
            )?)))
        }
        StarCmd::NablaCurv => {
            let m = bimodule(c)?;
            Ok(report(doc(Document::MultiVec(nabla_curvature(&m)?))))
        }
    }
}
