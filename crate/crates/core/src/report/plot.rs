//! Whitespace-delimited plot tables derived from JSON reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    SupnormVsEll,
    CtDecay,
    KernelMass,
    MarginVsLambda,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::SupnormVsEll,
        PlotKind::CtDecay,
        PlotKind::KernelMass,
        PlotKind::MarginVsLambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::SupnormVsEll => "supnorm-vs-ell",
            PlotKind::CtDecay => "ct-decay",
            PlotKind::KernelMass => "kernel-mass",
            PlotKind::MarginVsLambda => "margin-vs-lambda",
        }
    }

    fn source(self) -> &'static [&'static str] {
        match self {
            PlotKind::SupnormVsEll => &["lift-sweep", "verify"],
            PlotKind::CtDecay => &["ct-check"],
            PlotKind::KernelMass => &["metrics"],
            PlotKind::MarginVsLambda => &["verify"],
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = PlotKind::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidParameter(format!("unknown plot kind {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

fn num(v: &Value) -> String {
    v.as_f64().map_or_else(|| "nan".to_string(), |x| format!("{x:.12e}"))
}

fn field<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Value> {
    path.iter().try_fold(v, |cur, key| {
        cur.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("report is missing field {}", path.join("."))))
    })
}

fn rows<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Vec<Value>> {
    field(v, path)?
        .as_array()
        .ok_or_else(|| Error::InvalidParameter(format!("report field {} is not a list", path.join("."))))
}

/// Renders one plot table from a report produced by this crate.
pub fn emit_plot(report: &Value, kind: PlotKind) -> Result<String> {
    let source = report.get("kind").and_then(Value::as_str).unwrap_or("");
    if !kind.source().contains(&source) {
        return Err(Error::InvalidParameter(format!(
            "plot {} needs a {} report, got {source:?}",
            kind.name(),
            kind.source().join(" or ")
        )));
    }
    let mut out = String::new();
    match kind {
        PlotKind::SupnormVsEll => {
            out.push_str("# sup-norm of bulk eigenvectors against ell_G: |psi|_inf <= 8 D z^-4 / sqrt(ell_G)\n");
            out.push_str("# ell_G max_sup bound\n");
            if source == "lift-sweep" {
                for r in rows(report, &["result", "rows"])? {
                    writeln!(out, "{} {} {}", field(r, &["ell_g"])?, num(&r["max_sup"]), num(&r["sup_bound"])).ok();
                }
            } else {
                let eigen = field(report, &["result", "eigen"])?;
                let mut max_sup: Option<f64> = None;
                let mut bound: Option<f64> = None;
                for p in rows(eigen, &["pairs"])? {
                    let Some(c) = p["checks"].as_array().and_then(|cs| cs.iter().find(|c| c["name"] == "sup_bulk"))
                    else {
                        continue;
                    };
                    let s = p["sup_norm"].as_f64().unwrap_or(f64::NAN);
                    let b = c["bound"].as_f64().unwrap_or(f64::NAN);
                    max_sup = Some(max_sup.map_or(s, |m| m.max(s)));
                    bound = Some(bound.map_or(b, |m| m.min(b)));
                }
                writeln!(
                    out,
                    "{} {} {}",
                    field(eigen, &["ell_g"])?,
                    num(&max_sup.into()),
                    num(&bound.into())
                )
                .ok();
            }
        }
        PlotKind::CtDecay => {
            out.push_str("# sphere sums of the cover Green function: S_n <= 4 delta^-2 (1 + delta/2D)^-2n\n");
            out.push_str("# n S_n rhs\n");
            for (i, c) in rows(report, &["result", "checks"])?.iter().enumerate() {
                if i > 0 {
                    out.push_str("\n\n");
                }
                writeln!(out, "# lambda = {} delta = {}", num(&c["lambda"]), num(&c["delta"])).ok();
                for r in rows(c, &["rows"])? {
                    writeln!(out, "{} {} {}", field(r, &["n"])?, num(&r["s_n"]), num(&r["rhs"])).ok();
                }
            }
        }
        PlotKind::KernelMass => {
            out.push_str("# averaged kernel mass: |M_n delta_b|^2 <= 32 z^-4 / n\n");
            writeln!(out, "# lambda = {}", num(field(report, &["result", "lambda"])?)).ok();
            out.push_str("# n mass bound\n");
            for r in rows(report, &["result", "kernel_mass"])? {
                writeln!(out, "{} {} {}", field(r, &["n"])?, num(&r["mass"]), num(&r["bound"])).ok();
            }
        }
        PlotKind::MarginVsLambda => {
            out.push_str("# margin of the sup-norm bound (bulk and gap) per eigenvalue\n");
            out.push_str("# lambda sup bound margin\n");
            for p in rows(report, &["result", "eigen", "pairs"])? {
                let Some(c) = p["checks"]
                    .as_array()
                    .and_then(|cs| cs.iter().find(|c| c["name"] == "sup_bulk" || c["name"] == "sup_gap"))
                else {
                    continue;
                };
                writeln!(
                    out,
                    "{} {} {} {}",
                    num(&p["lambda"]),
                    num(&p["sup_norm"]),
                    num(&c["bound"]),
                    num(&c["margin"])
                )
                .ok();
            }
        }
    }
    Ok(out)
}
