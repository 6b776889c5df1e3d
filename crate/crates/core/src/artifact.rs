//! Persistence of the pipeline artifacts (calibration, zero catalog,
//! divergence report) as deterministic JSON, plus CSV emission for curves.
//!
//! Artifacts are written with fixed field order and 17-significant-digit
//! floats, so identical inputs produce byte-identical files. Every
//! downstream artifact embeds the kernel-parameter hash of its upstream, and
//! loaders verify both the schema version and that hash.

use crate::calibration::CalibrationResult;
use crate::kernel::{KernelParams, KernelSpec};
use crate::residue::DivergenceReport;
use crate::zeros::{CatalogZero, SearchRegion, ZeroCatalog};
use crate::{Complex64, Error, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: i64 = 1;

/// 17-significant-digit float formatting; round-trips exactly.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        panic!("artifact floats must be finite, got {x}");
    }
    format!("{x:.16e}")
}

/// Deterministic JSON value: object fields keep insertion order.
#[derive(Debug, Clone)]
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<JsonValue>),
    Object(Vec<(String, JsonValue)>),
}

impl JsonValue {
    pub fn obj() -> JsonValue {
        JsonValue::Object(Vec::new())
    }
    pub fn push(&mut self, key: &str, value: JsonValue) -> &mut Self {
        if let JsonValue::Object(fields) = self {
            fields.push((key.to_string(), value));
        } else {
            panic!("push on non-object");
        }
        self
    }
    pub fn complex(z: Complex64) -> JsonValue {
        let mut o = JsonValue::obj();
        o.push("re", JsonValue::Float(z.re));
        o.push("im", JsonValue::Float(z.im));
        o
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            JsonValue::Null => out.push_str("null"),
            JsonValue::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            JsonValue::Int(i) => {
                let _ = write!(out, "{i}");
            }
            JsonValue::Float(x) => out.push_str(&format_f64(*x)),
            JsonValue::Str(s) => {
                let _ = write!(out, "{}", serde_json::Value::String(s.clone()));
            }
            JsonValue::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            JsonValue::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (k, (key, value)) in fields.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    let _ = write!(out, "{}: ", serde_json::Value::String(key.clone()));
                    value.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// Hash of the kernel parameters at full precision; chains the artifacts.
pub fn spec_hash(params: &KernelParams) -> String {
    let canon = format!(
        "L={};delta={};epsilon={};b0={};b1={}",
        params.l,
        format_f64(params.delta),
        format_f64(params.epsilon),
        format_f64(params.b0),
        format_f64(params.b1)
    );
    let mut hasher = Sha256::new();
    hasher.update(canon.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

// ---------------------------------------------------------------------------
// readers: thin helpers over serde_json::Value
// ---------------------------------------------------------------------------

fn get<'a>(v: &'a serde_json::Value, key: &str) -> Result<&'a serde_json::Value> {
    v.get(key)
        .ok_or_else(|| Error::Format(format!("missing field '{key}'")))
}

fn get_f64(v: &serde_json::Value, key: &str) -> Result<f64> {
    get(v, key)?
        .as_f64()
        .ok_or_else(|| Error::Format(format!("field '{key}' is not a number")))
}

fn get_i64(v: &serde_json::Value, key: &str) -> Result<i64> {
    get(v, key)?
        .as_i64()
        .ok_or_else(|| Error::Format(format!("field '{key}' is not an integer")))
}

fn get_str<'a>(v: &'a serde_json::Value, key: &str) -> Result<&'a str> {
    get(v, key)?
        .as_str()
        .ok_or_else(|| Error::Format(format!("field '{key}' is not a string")))
}

fn get_complex(v: &serde_json::Value, key: &str) -> Result<Complex64> {
    let o = get(v, key)?;
    Ok(Complex64::new(get_f64(o, "re")?, get_f64(o, "im")?))
}

fn check_header(v: &serde_json::Value, kind: &str) -> Result<()> {
    let version = get_i64(v, "schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema_version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    let k = get_str(v, "kind")?;
    if k != kind {
        return Err(Error::Format(format!(
            "artifact kind '{k}' where '{kind}' was expected"
        )));
    }
    Ok(())
}

fn check_chain(v: &serde_json::Value, params: &KernelParams, what: &str) -> Result<()> {
    let stored = get_str(v, "spec_hash")?;
    let expected = spec_hash(params);
    if stored != expected {
        return Err(Error::Dependency(format!(
            "{what} was produced for a different kernel (hash {stored} != {expected}); \
             rerun the upstream command"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// calibration artifact
// ---------------------------------------------------------------------------

pub fn calibration_to_json(cal: &CalibrationResult) -> String {
    let p = cal.spec.params();
    let mut spec = JsonValue::obj();
    spec.push("L", JsonValue::Int(p.l as i64));
    spec.push("delta", JsonValue::Float(p.delta));
    spec.push("epsilon", JsonValue::Float(p.epsilon));
    spec.push("b0", JsonValue::Float(p.b0));
    spec.push("b1", JsonValue::Float(p.b1));
    let mut root = JsonValue::obj();
    root.push("schema_version", JsonValue::Int(SCHEMA_VERSION));
    root.push("kind", JsonValue::Str("calibration".into()));
    root.push("spec", spec);
    root.push("spec_hash", JsonValue::Str(spec_hash(&p)));
    root.push("z0", JsonValue::complex(cal.z0));
    root.push("i0", JsonValue::complex(cal.i0));
    root.push("i1", JsonValue::complex(cal.i1));
    root.push("a0", JsonValue::Float(cal.a0));
    root.push("b0_part", JsonValue::Float(cal.b0_part));
    root.push("a1", JsonValue::Float(cal.a1));
    root.push("b1_part", JsonValue::Float(cal.b1_part));
    root.push("residual", JsonValue::Float(cal.residual));
    root.push(
        "margins",
        JsonValue::Array(cal.margins.iter().map(|m| JsonValue::Float(*m)).collect()),
    );
    root.push("condition", JsonValue::Float(cal.condition));
    root.push(
        "l_trace",
        JsonValue::Array(
            cal.l_trace
                .iter()
                .map(|(l, m)| {
                    JsonValue::Array(vec![JsonValue::Int(*l as i64), JsonValue::Float(*m)])
                })
                .collect(),
        ),
    );
    root.render()
}

pub fn calibration_from_json(text: &str) -> Result<CalibrationResult> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("bad JSON: {e}")))?;
    check_header(&v, "calibration")?;
    let spec_v = get(&v, "spec")?;
    let params = KernelParams {
        l: get_i64(spec_v, "L")? as u32,
        delta: get_f64(spec_v, "delta")?,
        epsilon: get_f64(spec_v, "epsilon")?,
        b0: get_f64(spec_v, "b0")?,
        b1: get_f64(spec_v, "b1")?,
    };
    // derived fields are re-validated on load
    let spec = KernelSpec::from_params(&params)?;
    check_chain(&v, &params, "calibration")?;
    let margins_v = get(&v, "margins")?
        .as_array()
        .ok_or_else(|| Error::Format("margins is not an array".into()))?;
    if margins_v.len() != 4 {
        return Err(Error::Format("margins must have 4 entries".into()));
    }
    let mut margins = [0.0; 4];
    for (k, m) in margins_v.iter().enumerate() {
        margins[k] = m
            .as_f64()
            .ok_or_else(|| Error::Format("margin is not a number".into()))?;
    }
    let mut l_trace = Vec::new();
    if let Some(arr) = v.get("l_trace").and_then(|t| t.as_array()) {
        for item in arr {
            let pair = item
                .as_array()
                .ok_or_else(|| Error::Format("l_trace entry is not a pair".into()))?;
            if pair.len() != 2 {
                return Err(Error::Format("l_trace entry is not a pair".into()));
            }
            l_trace.push((
                pair[0].as_i64().unwrap_or(0) as u32,
                pair[1].as_f64().unwrap_or(f64::NAN),
            ));
        }
    }
    Ok(CalibrationResult {
        spec,
        z0: get_complex(&v, "z0")?,
        i0: get_complex(&v, "i0")?,
        i1: get_complex(&v, "i1")?,
        a0: get_f64(&v, "a0")?,
        b0_part: get_f64(&v, "b0_part")?,
        a1: get_f64(&v, "a1")?,
        b1_part: get_f64(&v, "b1_part")?,
        residual: get_f64(&v, "residual")?,
        margins,
        condition: get_f64(&v, "condition")?,
        l_trace,
    })
}

// ---------------------------------------------------------------------------
// zero-catalog artifact
// ---------------------------------------------------------------------------

pub fn catalog_to_json(cal: &CalibrationResult, catalog: &ZeroCatalog) -> String {
    let mut region = JsonValue::obj();
    region.push("sigma_lo", JsonValue::Float(catalog.region.sigma_lo));
    region.push("sigma_hi", JsonValue::Float(catalog.region.sigma_hi));
    region.push(
        "scan_sigma_hi",
        JsonValue::Float(catalog.region.scan_sigma_hi),
    );
    region.push("omega_max", JsonValue::Float(catalog.region.omega_max));
    region.push(
        "boundary_min_modulus",
        JsonValue::Float(catalog.region.boundary_min_modulus),
    );
    region.push(
        "certification",
        JsonValue::Str("rectangle-certified".into()),
    );
    let mut root = JsonValue::obj();
    root.push("schema_version", JsonValue::Int(SCHEMA_VERSION));
    root.push("kind", JsonValue::Str("zero_catalog".into()));
    root.push("spec_hash", JsonValue::Str(spec_hash(&cal.spec.params())));
    root.push("region", region);
    root.push(
        "zeros",
        JsonValue::Array(
            catalog
                .zeros
                .iter()
                .map(|z| {
                    let mut o = JsonValue::obj();
                    o.push("re", JsonValue::Float(z.location.re));
                    o.push("im", JsonValue::Float(z.location.im));
                    o.push("multiplicity", JsonValue::Int(z.multiplicity as i64));
                    o.push("residual", JsonValue::Float(z.residual));
                    o
                })
                .collect(),
        ),
    );
    root.push("r_max", JsonValue::Float(catalog.r_max));
    root.push(
        "z_max_indices",
        JsonValue::Array(catalog.z_max.iter().map(|&i| JsonValue::Int(i as i64)).collect()),
    );
    root.push("mu_max", JsonValue::Int(catalog.mu_max as i64));
    root.push(
        "z_dom_indices",
        JsonValue::Array(catalog.z_dom.iter().map(|&i| JsonValue::Int(i as i64)).collect()),
    );
    root.push("z_min", JsonValue::complex(catalog.z_min));
    root.push("total_winding", JsonValue::Int(catalog.total_winding));
    root.render()
}

pub fn catalog_from_json(text: &str, cal: &CalibrationResult) -> Result<ZeroCatalog> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("bad JSON: {e}")))?;
    check_header(&v, "zero_catalog")?;
    check_chain(&v, &cal.spec.params(), "zero catalog")?;
    let region_v = get(&v, "region")?;
    let region = SearchRegion {
        sigma_lo: get_f64(region_v, "sigma_lo")?,
        sigma_hi: get_f64(region_v, "sigma_hi")?,
        scan_sigma_hi: get_f64(region_v, "scan_sigma_hi")?,
        omega_max: get_f64(region_v, "omega_max")?,
        boundary_min_modulus: get_f64(region_v, "boundary_min_modulus")?,
    };
    let zeros_v = get(&v, "zeros")?
        .as_array()
        .ok_or_else(|| Error::Format("zeros is not an array".into()))?;
    let mut zeros = Vec::with_capacity(zeros_v.len());
    for z in zeros_v {
        zeros.push(CatalogZero {
            location: Complex64::new(get_f64(z, "re")?, get_f64(z, "im")?),
            multiplicity: get_i64(z, "multiplicity")? as u32,
            residual: get_f64(z, "residual")?,
        });
    }
    let idx_list = |key: &str| -> Result<Vec<usize>> {
        Ok(get(&v, key)?
            .as_array()
            .ok_or_else(|| Error::Format(format!("{key} is not an array")))?
            .iter()
            .filter_map(|x| x.as_i64())
            .map(|x| x as usize)
            .collect())
    };
    Ok(ZeroCatalog {
        region,
        zeros,
        r_max: get_f64(&v, "r_max")?,
        z_max: idx_list("z_max_indices")?,
        mu_max: get_i64(&v, "mu_max")? as u32,
        z_dom: idx_list("z_dom_indices")?,
        z_min: get_complex(&v, "z_min")?,
        total_winding: get_i64(&v, "total_winding")?,
    })
}

// ---------------------------------------------------------------------------
// divergence-report artifact
// ---------------------------------------------------------------------------

pub fn report_to_json(cal: &CalibrationResult, report: &DivergenceReport) -> String {
    let mut root = JsonValue::obj();
    root.push("schema_version", JsonValue::Int(SCHEMA_VERSION));
    root.push("kind", JsonValue::Str("divergence_report".into()));
    root.push("spec_hash", JsonValue::Str(spec_hash(&cal.spec.params())));
    root.push("n_exp", JsonValue::Int(report.chosen.n_exp as i64));
    root.push("theta_n", JsonValue::Float(report.chosen.theta_n));
    root.push("cos_theta", JsonValue::Float(report.chosen.cos_theta));
    root.push("x0", JsonValue::Float(report.x0));
    root.push("gamma", JsonValue::Float(report.params.gamma));
    root.push("eta", JsonValue::Float(report.params.eta));
    root.push("sigma", JsonValue::Float(report.params.sigma));
    root.push("d_eta", JsonValue::Float(report.params.d_eta));
    root.push("omega_n", JsonValue::Float(report.params.omega_n));
    root.push("c_ln", JsonValue::Float(report.params.c_ln));
    root.push(
        "b_values",
        JsonValue::Array(
            report
                .b_values
                .iter()
                .map(|(z, b)| {
                    let mut o = JsonValue::obj();
                    o.push("zero", JsonValue::complex(*z));
                    o.push("b", JsonValue::complex(*b));
                    o
                })
                .collect(),
        ),
    );
    root.push(
        "rows",
        JsonValue::Array(
            report
                .rows
                .iter()
                .map(|r| {
                    let mut o = JsonValue::obj();
                    o.push("m", JsonValue::Int(r.m as i64));
                    o.push("x", JsonValue::Float(r.x));
                    o.push("s_m", JsonValue::complex(r.s_m));
                    o.push("budget", JsonValue::Float(r.budget));
                    o.push("leading_ln", JsonValue::Float(r.leading_ln));
                    o.push("prediction_ln", JsonValue::Float(r.prediction_ln));
                    o.push(
                        "lower_bound_ln",
                        r.lower_bound_ln.map_or(JsonValue::Null, JsonValue::Float),
                    );
                    o.push("inconclusive", JsonValue::Bool(r.inconclusive));
                    o.push(
                        "solver_sign",
                        r.solver_sign
                            .map_or(JsonValue::Null, |s| JsonValue::Int(s as i64)),
                    );
                    o.push(
                        "solver_ln",
                        r.solver_ln.map_or(JsonValue::Null, JsonValue::Float),
                    );
                    o.push("solver_note", JsonValue::Str(r.solver_note.clone()));
                    o
                })
                .collect(),
        ),
    );
    root.render()
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Writes a solution curve as `x, f, log10_abs_f` (sign carried by `f`,
/// which prints as `inf`/`-inf` beyond float range).
pub fn curve_to_csv(grid: &crate::volterra::SolutionGrid) -> String {
    let mut out = String::from("x,f,log10_abs_f\n");
    for i in 0..grid.len() {
        let lv = grid.values.log_at(i);
        let f = grid.values.f64_at(i);
        let _ = writeln!(
            out,
            "{},{},{}",
            format_f64(grid.x_at(i)),
            if f.is_finite() {
                format_f64(f)
            } else {
                format!("{f}")
            },
            if lv.is_zero() {
                "-inf".to_string()
            } else {
                format_f64(lv.log10_abs())
            }
        );
    }
    out
}

/// Writes the per-`m` demo table as CSV.
pub fn report_to_csv(report: &DivergenceReport) -> String {
    let mut out = String::from("m,x,s_m,budget,prediction_ln,lower_bound_ln,solver_ln\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m,
            format_f64(r.x),
            format_f64(r.s_m.re),
            format_f64(r.budget),
            format_f64(r.prediction_ln),
            r.lower_bound_ln.map(format_f64).unwrap_or_default(),
            r.solver_ln.map(format_f64).unwrap_or_default(),
        );
    }
    out
}

/// `|H|` samples on a grid, for external plotting.
pub fn h_grid_csv(
    cal: &CalibrationResult,
    sigma: (f64, f64, usize),
    omega: (f64, f64, usize),
) -> Result<String> {
    let acc = crate::laplace::TransformAccuracy::standard();
    let mut out = String::from("sigma,omega,abs_h\n");
    for i in 0..=sigma.2 {
        let sg = sigma.0 + (sigma.1 - sigma.0) * i as f64 / sigma.2 as f64;
        for j in 0..=omega.2 {
            let om = omega.0 + (omega.1 - omega.0) * j as f64 / omega.2 as f64;
            let h = crate::laplace::eval_h(&cal.spec, Complex64::new(sg, om), &acc)?;
            let _ = writeln!(
                out,
                "{},{},{}",
                format_f64(sg),
                format_f64(om),
                format_f64(h.value.norm())
            );
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_text(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Dependency(format!(
            "cannot read {what} at {}: {e}; run the producing subcommand first",
            path.display()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_roundtrips() {
        for &x in &[
            0.0,
            1.0,
            -1.261045012,
            39601.0,
            1.1974e-300,
            -9.87654321e250,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_rendering_is_stable() {
        let mut o = JsonValue::obj();
        o.push("a", JsonValue::Int(1));
        o.push("b", JsonValue::Array(vec![JsonValue::Float(0.5)]));
        let r1 = o.render();
        let r2 = o.render();
        assert_eq!(r1, r2);
        assert!(r1.contains("\"a\": 1"));
        // parses as valid JSON
        let v: serde_json::Value = serde_json::from_str(&r1).unwrap();
        assert_eq!(v["b"][0].as_f64().unwrap(), 0.5);
    }

    #[test]
    fn spec_hash_is_parameter_sensitive() {
        let a = KernelParams {
            l: 199,
            delta: 0.25,
            epsilon: 0.05,
            b0: 103.0,
            b1: 1526.0,
        };
        let mut b = a;
        b.b0 = 103.0000000001;
        assert_ne!(spec_hash(&a), spec_hash(&b));
        assert_eq!(spec_hash(&a), spec_hash(&a));
    }
}
