//! One test per acceptance criterion. Each prints a `criterion N: PASS|FAIL`
//! line with the checks behind it, then asserts.

use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use sphdesign::configs::{antipodal_split, catalog, PointConfig, CATALOG_NAMES};
use sphdesign::derived::{derive, derived_angle_map, verify_derived_strength, DeriveMode, DerivedFamily};
use sphdesign::design::{design_strength, design_strength_gram, valencies};
use sphdesign::exactnum::QuadExt;
use sphdesign::gegenbauer::{gegenbauer_eval, harm_dim, recursion_residual};
use sphdesign::minimaltype::{
    certify, shipped_alpha, verify_certificate, CertifyOptions, RefutationKind, SearchOutcome,
};
use sphdesign::structure::{
    build_coherent_config, decompose, lift, packing_report, reordered_source, srg_from_two_distance, verify_q_poly,
};

struct Criterion {
    n: u32,
    checks: Vec<(String, bool)>,
    start: Instant,
}

impl Criterion {
    fn new(n: u32) -> Self {
        Criterion { n, checks: Vec::new(), start: Instant::now() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn within(&mut self, limit: Duration) {
        let t = self.start.elapsed();
        self.check(format!("time {:.2}s < {}s", t.as_secs_f64(), limit.as_secs()), t < limit);
    }

    fn finish(self) {
        let pass = self.checks.iter().all(|c| c.1);
        for (what, ok) in &self.checks {
            println!("  [{}] {what}", if *ok { "ok" } else { "FAIL" });
        }
        println!("criterion {}: {}", self.n, if pass { "PASS" } else { "FAIL" });
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        assert!(pass, "criterion {} failed: {failed:?}", self.n);
    }
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_sphdesign")).arg("--json").args(args).output().expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v)
}

fn q(p: i64, r: i64) -> QuadExt {
    QuadExt::from_frac(p, r)
}

fn kind(o: &SearchOutcome) -> Option<RefutationKind> {
    match o {
        SearchOutcome::Refuted(r) => Some(r.kind),
        _ => None,
    }
}

#[test]
fn criterion_1_hexagon() {
    let mut c = Criterion::new(1);
    let hex = catalog("hexagon").unwrap();
    let r = design_strength(&hex, 8).unwrap();
    c.check(format!("strength exactly 5 (got {})", r.strength_text()), r.strength == 5 && !r.saturated);
    c.check(format!("tight, bound {} = |X| = 6", r.bound), r.tight && r.bound == 6.into());
    c.check(
        format!("degree-6 sum nonzero ({})", r.sum(6).unwrap()),
        r.witness == Some(6) && !r.sum(6).unwrap().is_zero(),
    );
    let (code, v) = cli(&["certify", "--catalog", "hexagon"]);
    c.check(format!("certify exit {code}, Found"), code == 0 && v["verdict"].get("Found").is_some());
    c.within(Duration::from_secs(1));
    c.finish();
}

#[test]
fn criterion_2_icosahedron() {
    let mut c = Criterion::new(2);
    let ico = catalog("icosahedron").unwrap();
    let r = design_strength(&ico, 8).unwrap();
    c.check(format!("strength 5 (got {})", r.strength_text()), r.strength == 5);
    c.check("tight", r.tight);
    let rep = certify(&ico, &CertifyOptions::default()).unwrap();
    c.check("Refuted(NonIntegralClassSizes)", kind(&rep.verdict) == Some(RefutationKind::NonIntegralClassSizes));
    if let SearchOutcome::Refuted(ref f) = rep.verdict {
        c.check(format!("n0 = {:?}", f.witness("n0")), f.witness("n0") == Some("16/3"));
    }
    let (code, v) = cli(&["certify", "--catalog", "icosahedron"]);
    let reason = v["verdict"]["Refuted"]["kind"].as_str().unwrap_or("");
    c.check(format!("cli exit {code}, reason {reason}"), code == 1 && reason == "NonIntegralClassSizes");
    c.finish();
}

#[test]
fn criterion_3_seven_dimensional_tight_design() {
    let mut c = Criterion::new(3);
    let d = catalog("etf_7_28_design").unwrap();
    c.check(format!("56 points in dim 7 (got {} in {})", d.len(), d.dim()), d.len() == 56 && d.dim() == 7);
    let r = design_strength(&d, 8).unwrap();
    c.check(format!("strength 5, tight (got {}, {})", r.strength_text(), r.tight), r.strength == 5 && r.tight);
    let rep = certify(&d, &CertifyOptions::default()).unwrap();
    let SearchOutcome::Found(cert) = rep.verdict else {
        c.check("certify Found", false);
        return c.finish();
    };
    c.check("certify Found", true);
    let dec = decompose(&d, &cert).unwrap();
    c.check(format!("sizes {:?} = 12/32/12", dec.sizes), dec.sizes == vec![12, 32, 12]);

    let half = dec.x2_half();
    let p = sphdesign::structure::packing_report_gram(&half);
    c.check(
        format!("X2 half: {} lines in R^{}, coherence {}, ETF {}", half.size(), half.dim(), p.coherence, p.etf),
        half.size() == 16 && half.dim() == 6 && p.etf && p.coherence == q(1, 3),
    );
    let srg = srg_from_two_distance(&dec.fiber(0), &q(-1, 1)).unwrap();
    c.check(
        format!("X1 graph {} counted, formula {}", srg.counted, srg.formula),
        srg.counted.to_string() == "srg(12,1,0,0)" && srg.formula == srg.counted,
    );
    let cc = build_coherent_config(&dec.joint).unwrap();
    c.check(
        format!("type {:?}", cc.type_matrix),
        cc.type_matrix == vec![vec![3, 2, 3], vec![2, 4, 2], vec![3, 2, 3]],
    );
    c.check("axiom (iv) over all 56^3 triples", cc.axiom_iv && cc.partition && cc.transpose_closed);
    let qp = verify_q_poly(&cc, &dec.joint, 7).unwrap();
    c.check(format!("{} block products, all residuals exactly zero", qp.products_checked), qp.products_checked == 192);
    c.check("(B1) (B2) (B3) and Q-polynomial", qp.all_ones && qp.basis && qp.transpose && qp.q_polynomial);
    c.check(format!("{} eigenrows match the closed forms", qp.eigen_rows.len()), qp.eigen_match());
    c.within(Duration::from_secs(30));
    c.finish();
}

#[test]
fn criterion_4_e8() {
    let mut c = Criterion::new(4);
    let e8 = catalog("e8_min").unwrap();
    let r = design_strength(&e8, 8).unwrap();
    c.check(format!("strength exactly 7 (got {})", r.strength_text()), r.strength == 7 && !r.saturated);
    c.check(format!("tight, 240 = bound {}", r.bound), r.tight && r.bound == 240.into());
    let (half, _) = antipodal_split(&e8).unwrap();
    let p = packing_report(&half).unwrap();
    c.check(
        format!("levenstein {:?}, equality {}", p.levenstein.as_ref().map(|x| x.to_string()), p.levenstein_equality),
        p.levenstein == Some(q(1, 2)) && p.levenstein_equality,
    );
    let rep = certify(&e8, &CertifyOptions::default()).unwrap();
    c.check("Refuted(SevenDesignObstruction)", kind(&rep.verdict) == Some(RefutationKind::SevenDesignObstruction));
    c.within(Duration::from_secs(5));
    c.finish();
}

#[test]
fn criterion_5_d4_and_e6() {
    let mut c = Criterion::new(5);
    for name in ["d4_min", "e6_min"] {
        let d = catalog(name).unwrap();
        let (half, _) = antipodal_split(&d).unwrap();
        let p = packing_report(&half).unwrap();
        c.check(format!("{name}: Levenstein equality at 1/2"), p.levenstein == Some(q(1, 2)) && p.levenstein_equality);
        let rep = certify(&d, &CertifyOptions::default()).unwrap();
        let shipped = rep.stages.iter().any(|s| s.stage == "shipped" && s.result == "found");
        c.check(format!("{name}: certify Found via the shipped certificate"), rep.verdict.is_found() && shipped);
        let cert = verify_certificate(&d, &shipped_alpha(name).unwrap()).unwrap();
        let fam = derive(&d, &cert.alpha, DeriveMode::MinimalType).unwrap();
        let st = verify_derived_strength(&fam, &design_strength(&d, 7).unwrap()).unwrap();
        let strengths: Vec<usize> = st.levels.iter().map(|l| l.strength).collect();
        c.check(format!("{name}: derived levels {:?} have strengths {strengths:?} >= 3", fam.sizes()), strengths.iter().all(|&t| t >= 3));
    }
    c.finish();
}

#[test]
fn criterion_6_mub16() {
    let mut c = Criterion::new(6);
    let m = catalog("mub16").unwrap();
    c.check(format!("{} points, antipodal", m.len()), m.len() == 288 && m.is_antipodal());
    let angles = m.gram().unwrap().angles();
    c.check(format!("angles {angles:?}"), angles == vec![q(-1, 1), q(-1, 4), q(0, 1), q(1, 4)]);
    let (half, _) = antipodal_split(&m).unwrap();
    let p = packing_report(&half).unwrap();
    c.check("Levenstein equality at 1/4", p.levenstein == Some(q(1, 4)) && p.levenstein_equality);
    let (code, v) = cli(&["certify", "--catalog", "mub16", "--exhaustive-grid", "6"]);
    let refuted = &v["verdict"]["Refuted"];
    let scope = &refuted["scope"];
    c.check(
        format!("exit {code}, {}", refuted["kind"]),
        code == 1 && refuted["kind"] == "ExhaustiveSearchEmpty",
    );
    c.check(
        format!("candidates {} examined {} + outside {}", scope["candidates"], scope["examined"], scope["outside_span"]),
        scope["candidates"] == 512512
            && scope["examined"].as_u64().unwrap_or(0) + scope["outside_span"].as_u64().unwrap_or(0) == 512512,
    );
    c.within(Duration::from_secs(60));
    c.finish();
}

#[test]
fn criterion_7_dimension_filter() {
    let mut c = Criterion::new(7);
    let (code, v) = cli(&["dims", "--max-m", "14"]);
    c.check(format!("exit {code}"), code == 0);
    c.check(format!("flagged m {}", v["flagged_m"]), v["flagged_m"] == serde_json::json!([3, 5, 11]));
    c.check(format!("flagged d {}", v["flagged_d"]), v["flagged_d"] == serde_json::json!([47, 119, 527]));
    let cond = |m: usize, name: &str| {
        v["rows"][m - 1]["verdict"]["conditions"]
            .as_array()
            .and_then(|a| a.iter().find(|x| x["name"] == name))
            .map(|x| x["pass"].as_bool().unwrap_or(true))
    };
    c.check("m = 7 fails mod 8", cond(7, "mod8") == Some(false) && v["rows"][6]["flagged"] == false);
    c.check("m = 9 fails the odd-square condition", cond(9, "oddsquarefree") == Some(false) && v["rows"][8]["flagged"] == false);
    c.finish();
}

/// Naive recount: trial-division square-freeness, no sieve.
fn naive_f(x: u64) -> u64 {
    let sqf = |mut n: u64| {
        let mut p = 2;
        while p * p <= n {
            if n % (p * p) == 0 {
                return false;
            }
            if n % p == 0 {
                n /= p;
            }
            p += 1;
        }
        true
    };
    (1..=x).filter(|&m| m % 2 == 1 && m % 3 != 1 && (m + 1) % 8 != 0 && sqf(m) && sqf(m + 1)).count() as u64
}

#[test]
fn criterion_8_density() {
    let mut c = Criterion::new(8);
    let (code, v) = cli(&["density", "--max-x", "100000"]);
    let f = v["report"]["f_x"].as_u64().unwrap_or(0);
    let ratio = v["report"]["ratio"].as_f64().unwrap_or(0.0);
    c.check(format!("exit {code}"), code == 0);
    // value from an independent enumeration done before the build
    c.check(format!("f(100000) = {f} matches the frozen oracle 9234"), f == 9234);
    c.check("f matches a naive trial-division recount", f == naive_f(100_000));
    let target = 0.82963 / 24.0;
    let gap = (ratio - target).abs() / target;
    c.check(format!("f(x)/x = {ratio:.6} within 15% of C/24 = {target:.6} (gap {:.0}%)", 100.0 * gap), gap <= 0.15);
    c.within(Duration::from_secs(10));
    c.finish();
}

fn family_for(name: &str, d: &PointConfig) -> Option<DerivedFamily> {
    if let Some(a) = shipped_alpha(name) {
        return derive(d, &a, DeriveMode::MinimalType).ok();
    }
    let n = d.ambient();
    let basis = |coef: &[i64]| (0..n).map(|i| QuadExt::from_int(*coef.get(i).unwrap_or(&0))).collect::<Vec<_>>();
    // the face direction keeps the icosahedron's level values inside Q(sqrt 5)
    let face: Vec<QuadExt> = (0..n).map(|k| d.points()[..3].iter().fold(QuadExt::zero(), |a, x| &a + &x[k])).collect();
    [basis(&[1]), basis(&[1, 1]), basis(&[2, 1]), basis(&[3, 2, 1]), face]
        .into_iter()
        .find_map(|a| derive(d, &a, DeriveMode::UnitSphere).ok())
}

#[test]
fn criterion_9_property_suites() {
    let mut c = Criterion::new(9);
    for name in CATALOG_NAMES {
        let d = catalog(name).unwrap();
        let gram = d.gram().unwrap();
        let report = design_strength(&d, 8).unwrap();
        let Some(fam) = family_for(name, &d) else {
            c.check(format!("{name}: a derived family exists"), false);
            continue;
        };

        // angle map containment, and coordinates against the joint gram
        let mut images_ok = true;
        let mut angles: Vec<QuadExt> = gram.angles();
        angles.push(QuadExt::one());
        for (i, li) in fam.levels.iter().enumerate() {
            for (j, lj) in fam.levels.iter().enumerate() {
                let (Some(bi), Some(bj)) = (&li.beta, &lj.beta) else { continue };
                let (bi, bj) = match fam.mode {
                    DeriveMode::MinimalType => {
                        // unit-sphere level of ±1 at ⟨α,α⟩ = (d+2)/3
                        let s = QuadExt::from_frac(3, d.dim() as i64 + 2).sqrt().unwrap();
                        (bi * &s, bj * &s)
                    }
                    DeriveMode::UnitSphere => (bi.clone(), bj.clone()),
                };
                let image: Vec<QuadExt> =
                    angles.iter().filter_map(|g| derived_angle_map(&bi, &bj, g).ok()).collect();
                images_ok &= fam.joint.block_values(i, j).iter().all(|v| image.contains(v));
            }
        }
        c.check(format!("{name}: derived angles lie in the image of A(D)"), images_ok);
        let coords_ok = fam
            .levels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.coords.as_ref().map(|p| (i, p)))
            .all(|(i, p)| p.gram().unwrap().with_dim(d.dim() - 1) == fam.level_gram(i));
        c.check(format!("{name}: level coordinates reproduce the level grams"), coords_ok);

        match verify_derived_strength(&fam, &report) {
            Ok(st) => c.check(
                format!("{name}: {} levels are {}-designs", st.levels_count, st.required),
                st.levels.iter().all(|l| l.strength >= st.required),
            ),
            Err(e) => c.check(format!("{name}: derived strength ({e})"), false),
        }

        // solved valencies against direct counts
        let all: Vec<usize> = (0..d.len()).collect();
        match valencies(&gram, &all, &all, None) {
            Ok(t) => c.check(
                format!("{name}: valencies verified from {} points, row sum {} = {}", t.verified_sources, t.row_sum(), t.expected_row_sum()),
                t.verified_sources == d.len() && t.row_sum() == t.expected_row_sum(),
            ),
            Err(e) => c.check(format!("{name}: valencies ({e})"), false),
        }

        // Gegenbauer sums are squared norms, so never negative
        c.check(format!("{name}: degree sums are non-negative"), report.sums.iter().all(|(_, s)| s.signum() >= 0));
    }

    let mut geg_ok = true;
    for dim in 2..12 {
        for k in 0..9 {
            if k >= 2 {
                geg_ok &= recursion_residual(dim, k).is_zero();
            }
            geg_ok &= gegenbauer_eval(dim, k, &QuadExt::one()).unwrap() == QuadExt::rational(harm_dim(dim, k).into());
        }
    }
    c.check("Gegenbauer recursion and G_k(1) = harmonic dimension", geg_ok);

    for name in ["hexagon", "d4_min", "e6_min", "e7_min", "etf_7_28_design"] {
        let d = catalog(name).unwrap();
        let cert = verify_certificate(&d, &shipped_alpha(name).unwrap()).unwrap();
        let dec = decompose(&d, &cert).unwrap();
        let l = lift(&dec.x12(), d.dim()).unwrap();
        let back = reordered_source(&d, &dec).unwrap();
        c.check(format!("{name}: lift of the decomposition reproduces the Gram"), l.gram == back);
        let again = design_strength_gram(&l.gram, 5).unwrap();
        c.check(format!("{name}: lifted set is a 5-design"), again.strength >= 5);
    }
    c.finish();
}
