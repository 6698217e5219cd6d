//! `caloron compute`: one invariant from one JSON input.

use std::fmt::Write as _;
use std::fs;

use caloron_core::coefficients::{pretty_fraction, to_f64, transgression_prefactor};
use caloron_core::gauge::{GaugePair, GroupMap};
use caloron_core::holonomy::{higgs_holonomy, loop_holonomy, HolonomyOptions};
use caloron_core::invariants::{
    chern_character_even, chern_simons_total, degree1_character, odd_chern_character, string_form,
    string_potential_total, transgression_pullback, SymTrace,
};
use caloron_core::ktheory::TwzElement;
use caloron_core::linalg::C64;
use caloron_core::loopcore::SampledLoop;
use caloron_core::meshforms::{GradedForm, MatrixForm};
use caloron_core::{Error, Result};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::{ComputeArgs, EXIT_INVALID, EXIT_PASS};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    /// Winding number of a sampled loop.
    Winding,
    /// String form s_f of a gauge pair.
    StringForm,
    /// Total string potential of a gauge pair.
    StringPotential,
    /// Odd Chern character of a group map.
    OddCh,
    /// Even Chern character of a connection form.
    EvenCh,
    /// Chern–Simons form of a connection form.
    Cs,
    /// Transgression prefactor, and the transgression form of a group map if given.
    Tau,
    /// Holonomy of a Higgs field (gauge pair) or of a single algebra loop.
    Holonomy,
    /// Degree-one character of the Higgs field of a gauge pair, mod 1.
    Degree1Character,
    /// Curvature of a TWZ representative.
    TwzCurvature,
}

pub fn run(args: &ComputeArgs) -> u8 {
    let (value, summary) = match compute(args) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let text = match serde_json::to_string_pretty(&value) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_INVALID;
            }
            print!("{summary}");
        }
        None => {
            print!("{text}");
            eprint!("{summary}");
        }
    }
    EXIT_PASS
}

fn read<T: serde::de::DeserializeOwned>(args: &ComputeArgs) -> Result<T> {
    let path = args.input.as_ref().ok_or_else(|| Error::Validation("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn compute(args: &ComputeArgs) -> Result<(Value, String)> {
    let mut summary = String::new();
    let value = match args.kind {
        Kind::Winding => {
            let l: SampledLoop = read(args)?;
            let w = l.winding_number()?;
            writeln!(summary, "winding number {} (quadrature {:.12}, distance {:.3e})", w.value, w.raw, w.distance).unwrap();
            json!({ "winding": w })
        }
        Kind::StringForm => {
            let p: GaugePair = read(args)?;
            form_result(string_form(SymTrace::new(args.degree)?, &p)?, &mut summary)?
        }
        Kind::StringPotential => {
            let p: GaugePair = read(args)?;
            form_result(string_potential_total(SymTrace::new(args.degree)?, &p)?, &mut summary)?
        }
        Kind::OddCh => {
            let g: GroupMap = read(args)?;
            graded_result(odd_chern_character(&g, args.truncate)?, &mut summary)?
        }
        Kind::EvenCh => {
            let a: MatrixForm = read(args)?;
            graded_result(chern_character_even(&a, args.truncate)?, &mut summary)?
        }
        Kind::Cs => {
            let a: MatrixForm = read(args)?;
            form_result(chern_simons_total(SymTrace::new(args.degree)?, &a)?, &mut summary)?
        }
        Kind::Tau => {
            let c = transgression_prefactor(args.degree)?;
            writeln!(summary, "transgression prefactor for k = {}: {}", args.degree, pretty_fraction(&c)).unwrap();
            let mut v = json!({
                "degree": args.degree,
                "prefactor": caloron_core::coefficients::fraction_string(&c),
                "prefactor_value": to_f64(&c),
            });
            if args.input.is_some() {
                let g: GroupMap = read(args)?;
                let mut form = form_result(transgression_pullback(SymTrace::new(args.degree)?, &g)?, &mut summary)?;
                v["form"] = form["form"].take();
                v["periods"] = form["periods"].take();
            }
            v
        }
        Kind::Holonomy => {
            let opts = HolonomyOptions { steps: args.steps, reunitarize: args.reunitarize, ..Default::default() };
            let v: Value = read(args)?;
            if v.get("samples").is_some() {
                let phi: SampledLoop = serde_json::from_value(v)?;
                let h = loop_holonomy(&phi, opts)?;
                writeln!(summary, "holonomy error estimate {:.3e}", h.error_estimate).unwrap();
                json!({ "endpoint": h.endpoint, "error_estimate": h.error_estimate, "reunitarization": h.reunitarization })
            } else {
                let p: GaugePair = serde_json::from_value(v)?;
                let h = higgs_holonomy(p.higgs(), opts)?;
                writeln!(
                    summary,
                    "holonomy over {} base points: error estimate {:.3e}, unitarity defect {:.3e}",
                    h.holonomy.mesh().len(),
                    h.max_error_estimate(),
                    h.unitarity_defect()
                )
                .unwrap();
                json!({
                    "holonomy": h.holonomy,
                    "error_estimate": h.error_estimate,
                    "reunitarization": h.reunitarization,
                    "steps": h.steps,
                })
            }
        }
        Kind::Degree1Character => {
            let p: GaugePair = read(args)?;
            let values = degree1_character(p.higgs())?;
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            writeln!(summary, "degree-one character over {} base points, range [{lo:.12}, {hi:.12}] mod 1", values.len())
                .unwrap();
            json!({ "values": values })
        }
        Kind::TwzCurvature => {
            let e: TwzElement = read(args)?;
            graded_result(e.curvature(args.truncate)?, &mut summary)?
        }
    };
    Ok((value, summary))
}

fn trace(m: &[C64]) -> C64 {
    let n = (m.len() as f64).sqrt() as usize;
    (0..n).map(|i| m[i * n + i]).sum()
}

/// Periods of a form over its coordinate cycles, each with its nearest integer.
fn periods(form: &MatrixForm, summary: &mut String) -> Result<Value> {
    let n = form.rank();
    let mut out = Vec::new();
    for (cycle, values) in form.periods()? {
        let traces: Vec<C64> = values.chunks(n * n).map(trace).collect();
        let first = traces.first().copied().unwrap_or_default();
        let spread = traces.iter().map(|z| (z - first).norm()).fold(0.0, f64::max);
        let nearest = first.re.round();
        let distance = (first - C64::new(nearest, 0.0)).norm();
        writeln!(
            summary,
            "  degree {} cycle {:?}: {:+.12} {:+.12}i (spread {:.1e}), nearest integer {} at {:.3e}",
            form.degree(),
            cycle,
            first.re,
            first.im,
            spread,
            nearest,
            distance
        )
        .unwrap();
        out.push(json!({
            "degree": form.degree(),
            "cycle": cycle,
            "value": [first.re, first.im],
            "spread": spread,
            "nearest_integer": nearest,
            "distance": distance,
        }));
    }
    Ok(Value::Array(out))
}

fn form_result(form: MatrixForm, summary: &mut String) -> Result<Value> {
    writeln!(summary, "{}-form, sup norm {:.6e}", form.degree(), form.max_abs()).unwrap();
    let periods = periods(&form, summary)?;
    Ok(json!({ "form": form, "periods": periods }))
}

fn graded_result(form: GradedForm, summary: &mut String) -> Result<Value> {
    writeln!(summary, "graded form with degrees {:?}, sup norm {:.6e}", form.degrees(), form.max_abs()).unwrap();
    let mut all = Vec::new();
    for (_, part) in form.parts() {
        if let Value::Array(p) = periods(part, summary)? {
            all.extend(p);
        }
    }
    Ok(json!({ "form": form, "periods": all }))
}
