//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Signed;
use triperc::connectivity::{check_duality, has_crossing, Adjacency, Axis};
use triperc::event::EventSpec;
use triperc::exploration::{explore, exploration_measurability_check, ExitSide, LazySource};
use triperc::harness::{self, CrossingMethod, FkgScenario, Verdict};
use triperc::lattice::{
    classify_cell, neighbors, CellType, Color, ColorConfig, DiagonalConfig, Orientation,
    RectDomain, SamplerKey,
};
use triperc::oracle::{self, ColorMonotonicity};
use triperc::Error;

type Outcome = Result<String, String>;

const SEED: u64 = 0;

fn dom(w: usize, h: usize) -> RectDomain {
    RectDomain::new(w, h).expect("valid domain")
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exhaustive_duality(d: RectDomain) -> (u64, u64) {
    let (mut total, mut bad) = (0, 0);
    for wm in 0u64..1 << d.cell_count() {
        let omega = DiagonalConfig::from_fn(d, |c| {
            if wm >> d.cell_index(c) & 1 == 1 {
                Orientation::NeSw
            } else {
                Orientation::NwSe
            }
        });
        for sm in 0u64..1 << d.site_count() {
            let sigma = ColorConfig::from_fn(d, |s| {
                if sm >> d.site_index(s) & 1 == 1 {
                    Color::Red
                } else {
                    Color::Blue
                }
            });
            total += 1;
            if !check_duality(&omega, &sigma, &d).unwrap() {
                bad += 1;
            }
        }
    }
    (total, bad)
}

fn duality_exactness() -> Outcome {
    let (t1, b1) = exhaustive_duality(dom(1, 1));
    let (t2, b2) = exhaustive_duality(dom(2, 2));
    ensure(t1 == 32 && t2 == 8192, || format!("enumerated {t1} and {t2} configurations"))?;
    ensure(b1 + b2 == 0, || format!("{} exhaustive violations", b1 + b2))?;
    let sizes = [(4, 2), (16, 8), (64, 32)];
    let r = harness::duality_mass_check(&sizes, 0.5, 33_334, SEED, Adjacency::Triangulated)
        .map_err(|e| e.to_string())?;
    let sampled: u64 = r.rows.iter().map(|r| r.reps).sum();
    let violations: u64 = r.rows.iter().map(|r| r.violations).sum();
    ensure(r.verdict == Verdict::Pass && violations == 0, || {
        format!("{violations} sampled violations; first:\n{:?}", r.counterexample)
    })?;
    Ok(format!("exhaustive 32 + 8192 configurations, {sampled} sampled, 0 violations"))
}

fn critical_square_crossing() -> Outcome {
    for n in [1, 2] {
        let e = EventSpec::crossing(dom(n, n), Color::Red, Axis::LeftRight);
        let exact = oracle::enumerate_prob(&e, &q(1, 2)).map_err(|e| e.to_string())?;
        ensure(exact.probability == q(1, 2), || format!("exact value at n={n} is {}", exact.probability))?;
    }
    let mut parts = Vec::new();
    for n in [8, 16, 32] {
        let e = harness::crossing_experiment(&dom(n, n), 0.5, Color::Red, Axis::LeftRight, 10_000, SEED, CrossingMethod::Eager)
            .map_err(|e| e.to_string())?;
        ensure(e.within(0.5, 4.0), || format!("n={n}: {} ± {}", e.value, e.stderr))?;
        parts.push(format!("n={n}: {:.4}±{:.4}", e.value, e.stderr));
    }
    Ok(format!("exact 1/2 at n=1,2; {}", parts.join(", ")))
}

fn rsw_bound() -> Outcome {
    let r = harness::rsw_check(&[8, 16, 32], 2, 10_000, SEED, harness::RSW_BOUND, CrossingMethod::Eager)
        .map_err(|e| e.to_string())?;
    let lows: Vec<String> = r.rows.iter().map(|row| format!("n={}: lower {:.4}", row.n, row.lower)).collect();
    ensure(r.verdict == Verdict::Pass, || format!("verdict {}: {}", r.verdict, lows.join(", ")))?;
    Ok(format!("{} > 1/16", lows.join(", ")))
}

fn fkg_catalogue() -> Vec<(RectDomain, &'static str, &'static str)> {
    let one = dom(1, 1);
    let two = dom(2, 2);
    vec![
        (one, "red-lr", "red-tb"),
        (one, "red-lr", "red-lr"),
        (one, "!blue-tb", "!blue-lr"),
        (one, "connect-red:0,0>1,1", "red-lr"),
        (two, "red-lr", "red-tb"),
        (two, "red-lr", "!blue-lr"),
        (two, "red-lr@0,0,1,2", "red-lr@1,0,1,2"),
        (two, "red-tb@0,0,2,1", "red-lr@0,0,1,2"),
        (two, "connect-red:0,0>2,2", "connect-red:0,2>2,0"),
        (two, "connect-red:1,1>2,2@1,1", "red-tb"),
        (two, "red-lr&red-tb", "red-lr|red-tb"),
        (two, "true", "red-lr"),
    ]
}

fn fkg() -> Outcome {
    let catalogue = fkg_catalogue();
    let mut min_margin: Option<BigRational> = None;
    for (d, a, b) in &catalogue {
        let e1 = EventSpec::parse(*d, a).map_err(|e| e.to_string())?;
        let e2 = EventSpec::parse(*d, b).map_err(|e| e.to_string())?;
        for p in [q(1, 4), q(1, 2), q(3, 4)] {
            let m = oracle::verify_fkg(&e1, &e2, &p).map_err(|e| format!("{a} / {b} on {d}: {e}"))?;
            ensure(!m.is_negative(), || format!("{a} / {b} on {d} at p={p}: margin {m}"))?;
            if min_margin.as_ref().is_none_or(|x| m < *x) {
                min_margin = Some(m);
            }
        }
    }
    let mc = harness::fkg_mc_check(FkgScenario::OverlappingCrossings, 16, 0.5, 10_000, SEED)
        .map_err(|e| e.to_string())?;
    ensure(mc.verdict == Verdict::Pass, || format!("MC margin {} with stderr {}", mc.margin, mc.stderr))?;

    let d = dom(3, 3);
    let p1 = EventSpec::parse(d, "path-red:0,3/1,2/2,1/3,0").unwrap();
    let p2 = EventSpec::parse(d, "path-red:0,0/1,1/2,2/3,3").unwrap();
    let refused = matches!(oracle::verify_fkg(&p1, &p2, &q(1, 2)), Err(Error::Refused(ref m)) if m.contains("not robust"));
    ensure(refused, || "non-robust path pair was not refused".into())?;
    let forced = oracle::fkg_margin_unchecked(&p1, &p2, &q(1, 2)).map_err(|e| e.to_string())?;
    ensure(forced.is_negative(), || format!("forced margin {forced} is not negative"))?;
    Ok(format!(
        "{} exact pairs, min margin {}; MC margin {:.5}±{:.5} at n=16; path pair refused, forced margin {}",
        catalogue.len(),
        min_margin.unwrap(),
        mc.margin,
        mc.stderr,
        forced
    ))
}

fn russo() -> Outcome {
    let mut checked = 0;
    for n in [1, 2] {
        let d = dom(n, n);
        for (color, axis, want) in [
            (Color::Red, Axis::LeftRight, ColorMonotonicity::Increasing),
            (Color::Blue, Axis::TopBottom, ColorMonotonicity::Decreasing),
        ] {
            for p in [q(1, 4), q(1, 2), q(3, 4)] {
                let r = oracle::russo_exact(&EventSpec::crossing(d, color, axis), &p).map_err(|e| e.to_string())?;
                ensure(r.monotonicity == want && r.identity_holds(), || {
                    format!(
                        "{color} {axis:?} on {d} at {p}: derivative {} vs E[#pivotal] {}",
                        r.derivative, r.pivotal_expectation
                    )
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} exact identities"))
}

fn exploration_coupling() -> Outcome {
    let sizes = [(1, 1), (4, 2), (8, 4), (16, 8), (32, 16)];
    let mut mismatches = 0;
    for r in 0..10_000u64 {
        let (w, h) = sizes[r as usize % sizes.len()];
        let d = dom(w, h);
        let key = SamplerKey::new(SEED, r);
        let mut src = LazySource::new(d, key, 0.5);
        let res = explore(&d, &mut src).map_err(|e| e.to_string())?;
        let omega = DiagonalConfig::sample(d, key);
        let sigma = ColorConfig::sample(d, key, 0.5);
        let crosses = has_crossing(&omega, &sigma, &d, Color::Red, Axis::LeftRight).unwrap();
        if crosses != (res.exit_side == ExitSide::Right) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches in 10^4 samples"))?;
    for r in 0..100u64 {
        let (w, h) = sizes[r as usize % 4];
        let d = dom(w, h);
        let mut src = LazySource::new(d, SamplerKey::new(SEED + 1, r), 0.5);
        let res = explore(&d, &mut src).map_err(|e| e.to_string())?;
        let ok = exploration_measurability_check(&d, &res, 0.5, r, 100).map_err(|e| e.to_string())?;
        ensure(ok, || format!("measurability failed on instance {r} ({d})"))?;
    }
    Ok("10^4 coupled samples, 0 mismatches; 10^2 instances x 100 resamples measurable".into())
}

fn kesten_growth() -> Outcome {
    let r = harness::pivotal_scaling(&[8, 16, 32, 64], 0.5, 2000, SEED, 100).map_err(|e| e.to_string())?;
    let means: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("n={}: {:.3}", row.n, row.mean.estimate.value))
        .collect();
    ensure(r.rows.iter().all(|row| row.mean.estimate.accepted >= 2000), || "fewer than 2000 accepted".into())?;
    ensure(r.verdict == Verdict::Pass, || format!("verdict {}: {}", r.verdict, means.join(", ")))?;
    Ok(format!("{}; beta_hat {:.3}", means.join(", "), r.beta_hat.unwrap()))
}

fn sharpness() -> Outcome {
    let ks = [3, 4, 5, 6];
    let up = harness::decay_check(0.05, &ks, 10_000, SEED, false, CrossingMethod::Exploration).map_err(|e| e.to_string())?;
    let down = harness::decay_check(0.05, &ks, 10_000, SEED, true, CrossingMethod::Exploration).map_err(|e| e.to_string())?;
    let fmt = |r: &harness::DecayReport| {
        r.rows
            .iter()
            .map(|row| format!("{:.4}", row.estimate.value))
            .collect::<Vec<_>>()
            .join(" > ")
    };
    ensure(up.verdict == Verdict::Pass, || format!("p=0.55 blue-tb: {}", fmt(&up)))?;
    ensure(down.verdict == Verdict::Pass, || format!("p=0.45 red-lr: {}", fmt(&down)))?;
    Ok(format!("p=0.55 blue-tb {}; p=0.45 red-lr {}", fmt(&up), fmt(&down)))
}

fn pc() -> Outcome {
    let r = harness::pc_estimate(32, 20_000, 0.01, SEED).map_err(|e| e.to_string())?;
    let v = r.estimate.value;
    ensure((0.48..=0.52).contains(&v), || format!("p_c estimate {v} in [{}, {}]", r.lo, r.hi))?;
    Ok(format!("p_c ≈ {v:.4}, bracket [{:.4}, {:.4}]", r.lo, r.hi))
}

fn census() -> Outcome {
    let colors = [Color::Red, Color::Blue];
    let swap_ab = |t: CellType| match t {
        CellType::A => CellType::B,
        CellType::B => CellType::A,
        CellType::N => CellType::N,
    };
    let (mut n, mut a, mut b) = (0, 0, 0);
    for nw in colors {
        for ne in colors {
            for sw in colors {
                for se in colors {
                    let t = classify_cell(nw, ne, sw, se);
                    match t {
                        CellType::N => n += 1,
                        CellType::A => a += 1,
                        CellType::B => b += 1,
                    }
                    ensure(classify_cell(ne, nw, se, sw) == swap_ab(t), || "reflection symmetry broken".into())?;
                    ensure(classify_cell(nw.swap(), ne.swap(), sw.swap(), se.swap()) == swap_ab(t), || {
                        "color-swap symmetry broken".into()
                    })?;
                }
            }
        }
    }
    ensure((n, a, b) == (6, 5, 5), || format!("census {n}/{a}/{b}"))?;
    for (w, h) in [(1, 1), (2, 2), (3, 2)] {
        let d = dom(w, h);
        for wm in 0u64..1 << d.cell_count() {
            let omega = DiagonalConfig::from_fn(d, |c| {
                if wm >> d.cell_index(c) & 1 == 1 {
                    Orientation::NeSw
                } else {
                    Orientation::NwSe
                }
            });
            for u in d.sites() {
                for v in neighbors(u, &d, &omega).unwrap() {
                    ensure(neighbors(v, &d, &omega).unwrap().contains(&u), || {
                        format!("{v} is a neighbor of {u} but not conversely")
                    })?;
                }
            }
        }
    }
    Ok("6 N / 5 A / 5 B; reflection, color swap and neighbor symmetry hold".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("duality exactness", 60, duality_exactness),
        ("critical square crossing", 120, critical_square_crossing),
        ("RSW bound 1/16", 120, rsw_bound),
        ("FKG margins", 120, fkg),
        ("Russo identity", 60, russo),
        ("exploration coupling", 120, exploration_coupling),
        ("Kesten pivotal growth", 600, kesten_growth),
        ("sharpness decay", 300, sharpness),
        ("p_c estimate", 300, pc),
        ("classification census", 60, census),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if result.is_ok() && elapsed > Duration::from_secs(*limit) {
            result = Err(format!("took {:.1}s, limit {limit}s", elapsed.as_secs_f64()));
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => {
                failed += 1;
                ("FAIL", d.clone())
            }
        };
        println!("[{tag}] {:>2}. {name} ({:.1}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
