use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use sphdesign::configs::{antipodal_split, catalog as builtin, parse_config, render_config, save_config, PointConfig, CATALOG_NAMES};
use sphdesign::derived::{derive as derive_family, verify_derived_strength, DeriveMode, DerivedError};
use sphdesign::design::design_strength;
use sphdesign::dimfilter::{admissible, count_valid_m, thm37_filter, Variant, DENSITY_CONSTANT};
use sphdesign::exactnum::QuadExt;
use sphdesign::minimaltype::{
    certify as run_certify, parse_certificate, render_certificate, shipped_alpha, CertifyOptions, SearchOutcome,
};
use sphdesign::structure::{
    build_coherent_config, decompose, lift, packing_report, packing_report_gram, reordered_source, srg_from_two_distance,
    verify_q_poly, DecomposeCase, StructureError,
};

use crate::manifest::InputDigest;
use crate::Input;

pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub exit: i32,
    pub verdict: String,
    pub witnesses: Vec<(String, String)>,
}

impl Outcome {
    pub fn input_error(msg: String) -> Self {
        Outcome { text: String::new(), json: json!({ "error": msg }), exit: 3, verdict: msg, witnesses: Vec::new() }
    }
}

fn load(input: &Input, digests: &mut Vec<InputDigest>) -> Result<PointConfig> {
    if let Some(name) = &input.catalog {
        let c = builtin(name).map_err(|e| anyhow!("{e} (known: {})", CATALOG_NAMES.join(", ")))?;
        digests.push(InputDigest::of(format!("catalog:{name}"), render_config(&c).as_bytes()));
        return Ok(c);
    }
    let path = input.config.as_ref().ok_or_else(|| anyhow!("pass --catalog or --config"))?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    digests.push(InputDigest::of(path.display().to_string(), &bytes));
    let text = String::from_utf8(bytes).context("config is not UTF-8")?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_certificate(path: &Path, digests: &mut Vec<InputDigest>) -> Result<Vec<QuadExt>> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    digests.push(InputDigest::of(path.display().to_string(), &bytes));
    let text = String::from_utf8(bytes).context("certificate is not UTF-8")?;
    parse_certificate(&text).with_context(|| format!("parsing {}", path.display()))
}

fn list(v: &[QuadExt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn opt(v: &Option<QuadExt>) -> String {
    v.as_ref().map_or("-".into(), |x| x.to_string())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn verify(input: &Input, t_max: usize, min_strength: Option<usize>, digests: &mut Vec<InputDigest>) -> Result<Outcome> {
    let c = load(input, digests)?;
    let report = design_strength(&c, t_max)?;
    let angles = c.gram()?.angles();
    let (half, antipodal) = antipodal_split(&c)?;
    let packing = packing_report(&half)?;

    let mut t = String::new();
    writeln!(t, "{}: {} points, dim {}", c.label(), c.len(), c.dim())?;
    writeln!(t, "strength: {}", report.strength_text())?;
    writeln!(t, "tight: {} (|X| = {}, bound {})", yes(report.tight), c.len(), report.bound)?;
    for (k, s) in &report.sums {
        writeln!(t, "  degree {k}: {s}")?;
    }
    writeln!(t, "angles: {}", list(&angles))?;
    writeln!(t, "antipodal: {}", yes(antipodal))?;
    writeln!(
        t,
        "packing ({} {} in dim {}): coherence {}, welch {}{}, levenstein {}{}",
        half.len(),
        if antipodal { "lines" } else { "points" },
        half.dim(),
        packing.coherence,
        opt(&packing.welch),
        if packing.etf { " (ETF)" } else { "" },
        opt(&packing.levenstein),
        if packing.levenstein_equality { " (equality)" } else { "" },
    )?;

    let mut witnesses = vec![("strength".into(), report.strength_text()), ("tight".into(), report.tight.to_string())];
    if let Some(k) = report.witness {
        witnesses.push((format!("degree {k} sum"), report.sum(k).unwrap().to_string()));
    }
    let exit = match min_strength {
        Some(m) if report.strength < m => 1,
        _ => 0,
    };
    Ok(Outcome {
        json: json!({
            "config": { "label": c.label(), "dim": c.dim(), "size": c.len() },
            "design": report,
            "angles": angles,
            "antipodal": antipodal,
            "packing": packing,
        }),
        verdict: format!("strength {}", report.strength_text()),
        text: t,
        exit,
        witnesses,
    })
}

fn certificate_for(c: &PointConfig, path: Option<&Path>, digests: &mut Vec<InputDigest>) -> Result<Vec<QuadExt>> {
    match path {
        Some(p) => load_certificate(p, digests),
        None => shipped_alpha(c.label())
            .ok_or_else(|| anyhow!("no stored certificate for {}; pass --certificate", c.label())),
    }
}

pub fn derive(
    input: &Input,
    certificate: Option<&Path>,
    mode: &str,
    out: Option<&Path>,
    digests: &mut Vec<InputDigest>,
) -> Result<Outcome> {
    let mode = match mode {
        "minimal" => DeriveMode::MinimalType,
        "unit" => DeriveMode::UnitSphere,
        other => bail!("unknown mode {other:?} (expected minimal or unit)"),
    };
    let c = load(input, digests)?;
    let alpha = certificate_for(&c, certificate, digests)?;
    let report = design_strength(&c, 7)?;
    let family = derive_family(&c, &alpha, mode)?;
    let strengths = verify_derived_strength(&family, &report);

    let mut t = String::new();
    writeln!(t, "{}: alpha = ({})", c.label(), list(&alpha))?;
    writeln!(t, "{} levels, design strength {}", family.levels.len(), report.strength_text())?;
    let mut levels = Vec::new();
    for (i, l) in family.levels.iter().enumerate() {
        let angles = family.level_gram(i).angles();
        writeln!(t, "  level {}: {} points, angles {}", l.label(), l.indices.len(), list(&angles))?;
        let mut file = None;
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            match &l.coords {
                Some(coords) => {
                    let p = dir.join(format!("level_{i}.cfg"));
                    save_config(coords, &p)?;
                    file = Some(p.display().to_string());
                }
                None => writeln!(t, "    coordinates need a second radical; not written")?,
            }
        }
        levels.push(json!({ "beta": l.label(), "value": l.value, "size": l.indices.len(), "angles": angles, "file": file }));
    }
    let (exit, verdict, strength_json) = match strengths {
        Ok(s) => {
            writeln!(t, "each level is a {}-design or better:", s.required)?;
            for l in &s.levels {
                writeln!(t, "  level {}: strength {}{}", l.beta, l.strength, if l.saturated { "+" } else { "" })?;
            }
            (0, format!("levels are {}-designs", s.required), serde_json::to_value(&s)?)
        }
        Err(e @ DerivedError::StrengthShortfall { .. }) => {
            writeln!(t, "{e}")?;
            (1, e.to_string(), Value::Null)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        json: json!({ "config": c.label(), "alpha": alpha, "levels": levels, "strengths": strength_json }),
        text: t,
        exit,
        verdict,
        witnesses: Vec::new(),
    })
}

pub fn certify(
    input: &Input,
    certificate: Option<&Path>,
    grid: Option<(u32, u64)>,
    skip_structured: bool,
    save: Option<&Path>,
    digests: &mut Vec<InputDigest>,
) -> Result<Outcome> {
    let c = load(input, digests)?;
    let cert = certificate.map(|p| load_certificate(p, digests)).transpose()?;
    if let Some((n, _)) = grid {
        eprintln!("exhaustive grid: enumerating integer vectors of squared norm {n}");
    }
    let opts = CertifyOptions { certificate: cert, skip_structured, grid };
    let report = run_certify(&c, &opts)?;

    let mut t = String::new();
    writeln!(t, "{}: {} points, dim {}, strength {}, tight {}", c.label(), c.len(), c.dim(), report.strength, yes(report.tight))?;
    for s in &report.stages {
        writeln!(t, "  {}: {}", s.stage, s.result)?;
    }
    let mut witnesses = Vec::new();
    let verdict = match &report.verdict {
        SearchOutcome::Found(cert) => {
            writeln!(t, "Found: n0 = {}, n1 = {}", cert.n0, cert.n1)?;
            t.push_str(&render_certificate(&cert.alpha));
            witnesses.push(("alpha".into(), list(&cert.alpha)));
            witnesses.push(("n0".into(), cert.n0.to_string()));
            witnesses.push(("n1".into(), cert.n1.to_string()));
            if let Some(p) = save {
                std::fs::write(p, render_certificate(&cert.alpha)).with_context(|| format!("writing {}", p.display()))?;
            }
            "Found".to_string()
        }
        SearchOutcome::Refuted(r) => {
            writeln!(t, "Refuted: {r}")?;
            witnesses.extend(r.detail.iter().map(|w| (w.name.clone(), w.value.clone())));
            if let Some(s) = &r.scope {
                witnesses.push(("candidates".into(), s.candidates.to_string()));
            }
            format!("Refuted({:?})", r.kind)
        }
        SearchOutcome::Unknown(s) => {
            writeln!(t, "Unknown: {s}")?;
            witnesses.push(("candidates".into(), s.candidates.to_string()));
            "Unknown".to_string()
        }
    };
    Ok(Outcome { json: serde_json::to_value(&report)?, text: t, exit: report.exit_code(), verdict, witnesses })
}

pub fn catalog(name: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    if let Some(name) = name {
        let c = builtin(name).map_err(|e| anyhow!("{e} (known: {})", CATALOG_NAMES.join(", ")))?;
        let text = render_config(&c);
        if let Some(p) = out {
            std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
        }
        return Ok(Outcome {
            json: json!({ "name": name, "dim": c.dim(), "ambient": c.ambient(), "size": c.len(), "config": text }),
            text: if out.is_some() { String::new() } else { text },
            exit: 0,
            verdict: format!("emitted {name}"),
            witnesses: Vec::new(),
        });
    }
    let mut t = format!("{:<18} {:>4} {:>8} {:>7}\n", "name", "dim", "ambient", "points");
    let mut rows = Vec::new();
    for n in CATALOG_NAMES {
        let c = builtin(n)?;
        writeln!(t, "{:<18} {:>4} {:>8} {:>7}", n, c.dim(), c.ambient(), c.len())?;
        rows.push(json!({ "name": n, "dim": c.dim(), "ambient": c.ambient(), "size": c.len() }));
    }
    Ok(Outcome { json: Value::Array(rows), text: t, exit: 0, verdict: "listed".into(), witnesses: Vec::new() })
}

pub fn structure(input: &Input, certificate: Option<&Path>, digests: &mut Vec<InputDigest>) -> Result<Outcome> {
    let c = load(input, digests)?;
    let cert = certificate.map(|p| load_certificate(p, digests)).transpose()?;
    let report = run_certify(&c, &CertifyOptions { certificate: cert, ..Default::default() })?;
    let cert = match report.verdict {
        SearchOutcome::Found(cert) => cert,
        SearchOutcome::Refuted(r) => {
            let msg = format!("{}: not of minimal type: {r}", c.label());
            return Ok(Outcome { text: msg.clone() + "\n", json: json!({ "refuted": r }), exit: 1, verdict: msg, witnesses: Vec::new() });
        }
        SearchOutcome::Unknown(s) => {
            let msg = format!("{}: no certificate found ({s})", c.label());
            return Ok(Outcome { text: msg.clone() + "\n", json: json!({ "unknown": s }), exit: 2, verdict: msg, witnesses: Vec::new() });
        }
    };
    let dec = match decompose(&c, &cert) {
        Ok(d) => d,
        Err(e @ (StructureError::ConditionViolated(_) | StructureError::HypothesisViolated(_))) => {
            let msg = e.to_string();
            return Ok(Outcome { text: msg.clone() + "\n", json: json!({ "error": msg }), exit: 1, verdict: msg, witnesses: Vec::new() });
        }
        Err(e) => return Err(e.into()),
    };

    let mut failures: Vec<String> = Vec::new();
    let mut t = String::new();
    let mut witnesses = Vec::new();
    let case = match dec.case {
        DecomposeCase::Tight => "tight",
        DecomposeCase::Levenstein => "Levenstein",
    };
    writeln!(t, "{}: {case} case, d = {}, |D| = {}", c.label(), dec.d, c.len())?;
    writeln!(t, "fibers: |X1| = {}, |X2| = {}, |X3| = {}", dec.sizes[0], dec.sizes[1], dec.sizes[2])?;
    witnesses.push(("sizes".into(), format!("{:?}", dec.sizes)));
    for cond in &dec.conditions {
        let tag = match (cond.holds, cond.required) {
            (true, _) => "ok",
            (false, false) => "degenerate",
            (false, true) => "FAILED",
        };
        writeln!(t, "  {tag:<10} {}: {}", cond.name, cond.detail)?;
    }

    let half = dec.x2_half();
    let packing = packing_report_gram(&half);
    writeln!(
        t,
        "X2 half: {} lines in dim {}, coherence {}, welch {}, ETF {}",
        half.size(),
        half.dim(),
        packing.coherence,
        opt(&packing.welch),
        yes(packing.etf)
    )?;
    witnesses.push(("X2 half coherence".into(), packing.coherence.to_string()));

    let x1 = dec.fiber(0);
    let adjacency = x1.angles().into_iter().next();
    let srg = match adjacency.as_ref().map(|a| srg_from_two_distance(&x1, a)) {
        Some(Ok(s)) => {
            writeln!(t, "X1 graph (adjacency {}): {} (formula and direct count agree)", s.adjacency_angle, s.counted)?;
            witnesses.push(("X1 graph".into(), s.counted.to_string()));
            serde_json::to_value(&s)?
        }
        Some(Err(e @ StructureError::ParameterMismatch { .. })) => {
            failures.push(e.to_string());
            Value::Null
        }
        Some(Err(e)) => {
            writeln!(t, "X1 graph: {e}")?;
            Value::Null
        }
        None => Value::Null,
    };

    let lifted = lift(&dec.x12(), dec.d);
    let lift_json = match lifted {
        Ok(l) => {
            let same = l.gram == reordered_source(&c, &dec)?;
            writeln!(
                t,
                "lift: {} points, strength {}, angles {}, Gram round trip {}",
                l.gram.size(),
                l.report.strength_text(),
                list(&l.angles),
                if same { "exact" } else { "DIFFERS" }
            )?;
            if !same {
                failures.push("lift does not reproduce the Gram of D".into());
            }
            json!({ "report": l, "round_trip": same })
        }
        Err(e) => {
            failures.push(format!("lift: {e}"));
            Value::Null
        }
    };

    let mut cc_json = Value::Null;
    let mut q_json = Value::Null;
    match build_coherent_config(&dec.joint) {
        Ok(cc) => {
            let ty: Vec<String> = cc.type_matrix.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
            let n = dec.joint.gram.size();
            writeln!(
                t,
                "coherent configuration: type ({}), {} relations, axiom (iv) verified over {} triples",
                ty.join("; "),
                cc.relation_count(),
                n * n * n
            )?;
            let covered = cc.lemma_cases.iter().filter(|l| l.case.is_some()).count();
            writeln!(
                t,
                "  fiber strengths {:?}; sufficient condition applies to {covered} of {} fiber triples",
                cc.fiber_strengths,
                cc.lemma_cases.len()
            )?;
            witnesses.push(("type".into(), format!("({})", ty.join("; "))));
            if dec.case == DecomposeCase::Tight {
                match verify_q_poly(&cc, &dec.joint, dec.d) {
                    Ok(q) => {
                        writeln!(
                            t,
                            "Q-polynomial: c = {}, {} block products with zero residual, eigenrows match {}",
                            q.c,
                            q.products_checked,
                            yes(q.eigen_match())
                        )?;
                        for r in &q.eigen_rows {
                            let v = r.value.as_ref().map_or("diag".to_string(), |v| v.to_string());
                            writeln!(t, "  Q({},{}) at {v}: ({})", r.block.0 + 1, r.block.1 + 1, list(&r.realized))?;
                        }
                        if !q.verified() {
                            failures.push("Q-polynomial conditions not all satisfied".into());
                        }
                        q_json = serde_json::to_value(&q)?;
                    }
                    Err(e @ (StructureError::ResidualNonzero { .. } | StructureError::HypothesisViolated(_))) => {
                        failures.push(e.to_string())
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            cc_json = serde_json::to_value(&cc)?;
        }
        Err(e @ StructureError::AxiomIvFails { .. }) => failures.push(e.to_string()),
        Err(e) => return Err(e.into()),
    }

    for f in &failures {
        writeln!(t, "FAILED: {f}")?;
    }
    let exit = if failures.is_empty() { 0 } else { 1 };
    Ok(Outcome {
        json: json!({
            "decomposition": dec,
            "x2_half_packing": packing,
            "x1_graph": srg,
            "lift": lift_json,
            "coherent": cc_json,
            "q_polynomial": q_json,
            "failures": failures,
        }),
        verdict: if exit == 0 { "verified".into() } else { failures.join("; ") },
        text: t,
        exit,
        witnesses,
    })
}

fn variant(s: &str) -> Result<Variant> {
    s.parse::<Variant>().map_err(|e| anyhow!(e))
}

pub fn dims(max_m: u64, v: &str) -> Result<Outcome> {
    let var = variant(v)?;
    if max_m == 0 {
        bail!("--max-m must be at least 1");
    }
    let mut t = format!("{:>6} {:>10}  {:<4} {:<5} {:<14} {:<5} flagged\n", "m", "d", "odd", "mod3", "oddsquarefree", "mod8");
    let mut rows = Vec::new();
    let mut flagged = Vec::new();
    for m in 1..=max_m {
        let f = thm37_filter(m)?;
        let hit = admissible(m, var);
        let c = |n: &str| yes(f.condition(n).is_some_and(|c| c.pass));
        writeln!(
            t,
            "{:>6} {:>10}  {:<4} {:<5} {:<14} {:<5} {}",
            m,
            f.d,
            c("odd"),
            c("mod3"),
            c("oddsquarefree"),
            c("mod8"),
            if hit { "yes" } else { "" }
        )?;
        if hit {
            flagged.push((m, f.d));
        }
        rows.push(json!({ "verdict": f, "flagged": hit }));
    }
    let ms: Vec<String> = flagged.iter().map(|(m, _)| m.to_string()).collect();
    let ds: Vec<String> = flagged.iter().map(|(_, d)| d.to_string()).collect();
    writeln!(t, "flagged: m = {} (d = {})", ms.join(", "), ds.join(", "))?;
    Ok(Outcome {
        json: json!({ "variant": var, "rows": rows, "flagged_m": flagged.iter().map(|p| p.0).collect::<Vec<_>>(), "flagged_d": flagged.iter().map(|p| p.1).collect::<Vec<_>>() }),
        text: t,
        exit: 0,
        verdict: format!("flagged m = {}", ms.join(", ")),
        witnesses: vec![("flagged d".into(), ds.join(", "))],
    })
}

pub fn density(max_x: u64, v: &str) -> Result<Outcome> {
    let var = variant(v)?;
    let r = count_valid_m(max_x, var)?;
    let within = r.relative_gap <= 0.15;
    let mut t = String::new();
    writeln!(t, "f({}) = {} ({v})", r.x, r.f_x)?;
    writeln!(t, "f(x)/x = {:.6}", r.ratio)?;
    writeln!(t, "C/24 = {:.6} (C = {DENSITY_CONSTANT}), predicted count {}", r.predicted_ratio, r.predicted)?;
    writeln!(t, "relative gap {:.1}% (within 15%: {})", 100.0 * r.relative_gap, yes(within))?;
    Ok(Outcome {
        json: json!({ "report": r, "within_15_percent": within }),
        text: t,
        exit: 0,
        verdict: format!("f(x) = {}", r.f_x),
        witnesses: vec![("f(x)".into(), r.f_x.to_string())],
    })
}
