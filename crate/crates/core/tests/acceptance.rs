//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use halfcube_core::chain::vertex_point;
use halfcube_core::morse::{morse_boundary, rule_applicability, verify_acyclic};
use halfcube_core::snf::{class_independence, homology_report};
use halfcube_core::subcomplex::{basis_faces, homology_basis, subcomplex_members};
use halfcube_core::{
    build_matching, build_subcomplex, enumerate_faces, match_face, parse_seq, ChainComplex,
    ChainVector, FaceKind, FaceSeq, Symbol,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn binom(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..b {
        acc = acc * (a - i) / (i + 1);
    }
    acc
}

fn census() -> Outcome {
    let start = Instant::now();
    for n in 4..=8usize {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let n64 = n as u64;
        for d in 0..=n as i32 {
            let d64 = d as u64;
            let simplex = match d {
                0 => BigUint::one() << (n - 1),
                1 => (BigUint::one() << (n - 2)) * binom(n64, 2),
                _ if d < n as i32 => (BigUint::one() << (n - 1)) * binom(n64, d64 + 1),
                _ => BigUint::zero(),
            };
            let half = if d >= 3 {
                (BigUint::one() << (n - d as usize)) * binom(n64, d64)
            } else {
                BigUint::zero()
            };
            let (s, h) = table.shape_counts(d);
            ensure(
                BigUint::from(s) == simplex && BigUint::from(h) == half,
                || format!("n={n} dim {d}: got ({s}, {h}), want ({simplex}, {half})"),
            )?;
            ensure(table.count(d) == s + h, || format!("n={n} dim {d}: count mismatch"))?;
        }
        if n == 4 {
            let row: Vec<usize> = (0..=4).map(|d| table.count(d)).collect();
            ensure(row == [8, 24, 32, 16, 1], || format!("n=4 row {row:?}"))?;
        }
    }
    within(start, Duration::from_secs(5)).map(|t| format!("n=4..8 in {t}"))
}

fn chain_condition() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for n in 4..=7 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
        for id in 0..table.len() {
            let dd = cx.apply_boundary(&cx.boundary_of_cell(id));
            ensure(dd.is_zero(), || format!("n={n}: dd({}) != 0", table.face(id)))?;
            checked += 1;
        }
        for v in table.ids_of_dim(0) {
            ensure(cx.boundary_of(v).len() == 1, || format!("n={n}: vertex without augmentation"))?;
        }
    }
    within(start, Duration::from_secs(60)).map(|t| format!("{checked} cells in {t}"))
}

fn perfect_matching() -> Outcome {
    let start = Instant::now();
    for n in 4..=8 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let m = build_matching(&table).map_err(|e| e.to_string())?;
        for id in 0..table.len() {
            let face = table.face(id);
            let p = m.partner(id).ok_or_else(|| format!("n={n}: {face} unpaired"))?;
            ensure(m.partner(p) == Some(id), || format!("n={n}: involution fails at {face}"))?;
            ensure(
                rule_applicability(face) == BTreeSet::from([m.rule(id)]),
                || format!("n={n}: rules {:?} apply to {face}", rule_applicability(face)),
            )?;
            let (lo, hi) = if table.dim(id) < table.dim(p) { (id, p) } else { (p, id) };
            ensure(
                table.dim(hi) == table.dim(lo) + 1 && table.facet_ids(hi).contains(&lo),
                || format!("n={n}: {face} and {} are not codimension-1 incident", table.face(p)),
            )?;
        }
    }
    within(start, Duration::from_secs(60)).map(|t| format!("n=4..8 in {t}"))
}

fn acyclicity() -> Outcome {
    let start = Instant::now();
    for n in 4..=7 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let m = build_matching(&table).map_err(|e| e.to_string())?;
        let report = verify_acyclic(&m, &table);
        ensure(report.layers.len() == n + 1, || format!("n={n}: missing layers"))?;
        if let Some(layer) = report.layers.iter().find(|l| l.cycle.is_some()) {
            return Err(format!("n={n} layer {}: cycle {:?}", layer.p, layer.cycle));
        }
    }
    within(start, Duration::from_secs(120)).map(|t| format!("n=4..7 in {t}"))
}

fn triangularity() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut solved = 0usize;
    for n in 4..=6 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
        let m = build_matching(&table).map_err(|e| e.to_string())?;
        for k in -1..n as i32 {
            let mb = morse_boundary(&m, &cx, k).map_err(|e| e.to_string())?;
            ensure(mb.is_unitriangular(), || format!("n={n} k={k}: not unitriangular"))?;
            let uppers: Vec<_> = table.ids_of_dim(k + 1).collect();
            for _ in 0..100 {
                let mut y = ChainVector::zero(k);
                for _ in 0..rng.gen_range(1..=4) {
                    let cell = uppers[rng.gen_range(0..uppers.len())];
                    let c = BigInt::from(rng.gen_range(-3i64..=3));
                    y.add_scaled(&c, &cx.boundary_of_cell(cell));
                }
                let f = mb.solve_cycle(&y, &m, &cx).map_err(|e| format!("n={n} k={k}: {e}"))?;
                ensure(cx.apply_boundary(&f) == y, || format!("n={n} k={k}: d(solve(y)) != y"))?;
                solved += 1;
            }
        }
    }
    Ok(format!("{solved} cycles solved in {:.2?}", start.elapsed()))
}

fn betti_identity() -> Outcome {
    let eq11 = |n: u64, k: u64| -> BigUint { (k..=n).map(|i| binom(n, i) * binom(i - 1, k - 1)).sum() };
    let eq12 = |n: u64, k: u64| -> BigUint {
        (1..=n)
            .filter(|&i| i >= k)
            .map(|i| (BigUint::one() << (i - k)) * binom(i - 1, k - 1))
            .sum()
    };
    for (n, k, want) in [(4, 3, 7u32), (5, 3, 31), (5, 4, 9)] {
        ensure(
            eq11(n, k) == want.into() && eq12(n, k) == want.into(),
            || format!("oracle anchor ({n},{k})"),
        )?;
        let got = halfcube_core::betti_eq11(n as usize, k as usize);
        ensure(got == want.into(), || format!("anchor ({n},{k}): {got}"))?;
    }
    let mut rows = 0;
    for n in 3..=30usize {
        for k in 3..=n {
            let a = halfcube_core::betti_eq11(n, k);
            let b = halfcube_core::betti_eq12(n, k);
            ensure(a == b, || format!("({n},{k}): {a} != {b}"))?;
            ensure(a == eq11(n as u64, k as u64), || format!("({n},{k}): oracle disagrees"))?;
            rows += 1;
        }
    }
    Ok(format!("{rows} pairs agree"))
}

fn unmatched_census() -> Outcome {
    let mut cases = 0;
    for n in 4..=7 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let full = build_matching(&table).map_err(|e| e.to_string())?;
        for k in 3..n {
            let spec = build_subcomplex(&table, &full, k).map_err(|e| e.to_string())?;
            let counts = spec.unpaired_counts(&table);
            let want = halfcube_core::betti_eq12(n, k);
            for (i, &c) in counts.iter().enumerate() {
                let d = i as i32 - 1;
                let expected = if d == k as i32 - 1 { want.clone() } else { BigUint::zero() };
                ensure(BigUint::from(c) == expected, || {
                    format!("n={n} k={k}: {c} unpaired in dim {d}, want {expected}")
                })?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} subcomplexes"))
}

fn oracle_homology() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 4..=6 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
        for k in 3..=n {
            let members = subcomplex_members(&table, k);
            let report = homology_report(&cx, &members, true, "").map_err(|e| e.to_string())?;
            let want = halfcube_core::betti_eq12(n, k);
            ensure(report.is_torsion_free(), || format!("n={n} k={k}: torsion {:?}", report.torsion))?;
            ensure(report.support() == [k as i32 - 1], || {
                format!("n={n} k={k}: support {:?}", report.support())
            })?;
            ensure(BigUint::from(report.betti(k as i32 - 1)) == want, || {
                format!("n={n} k={k}: rank {} want {want}", report.betti(k as i32 - 1))
            })?;
            cases += 1;
        }
    }
    within(start, Duration::from_secs(600)).map(|t| format!("{cases} subcomplexes in {t}"))
}

fn basis_certification() -> Outcome {
    let mut cases = 0;
    for n in 4..=6 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
        let full = build_matching(&table).map_err(|e| e.to_string())?;
        for k in 3..=n {
            let members = subcomplex_members(&table, k);
            let chains: Vec<ChainVector> = if k < n {
                let spec = build_subcomplex(&table, &full, k).map_err(|e| e.to_string())?;
                homology_basis(&spec, &cx).map_err(|e| e.to_string())?.chains
            } else {
                basis_faces(&table, k).into_iter().map(|b| cx.boundary_of_cell(b)).collect()
            };
            ensure(BigUint::from(chains.len()) == halfcube_core::betti_eq12(n, k), || {
                format!("n={n} k={k}: {} basis chains", chains.len())
            })?;
            let verdict = class_independence(&chains, &cx, &members, k as i32 - 1)
                .map_err(|e| e.to_string())?;
            ensure(verdict.is_basis(), || format!("n={n} k={k}: {verdict:?}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} bases certified"))
}

fn contractibility() -> Outcome {
    for n in 4..=5 {
        let table = enumerate_faces(n).map_err(|e| e.to_string())?;
        let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
        let all = vec![true; table.len()];
        let report = homology_report(&cx, &all, true, "").map_err(|e| e.to_string())?;
        ensure(report.support().is_empty() && report.is_torsion_free(), || {
            format!("n={n}: ball has homology {:?}", report.betti)
        })?;
    }
    let table = enumerate_faces(4).map_err(|e| e.to_string())?;
    let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
    let boundary: Vec<bool> = (0..table.len()).map(|id| table.dim(id) < 4).collect();
    let report = homology_report(&cx, &boundary, true, "").map_err(|e| e.to_string())?;
    ensure(
        report.support() == [3] && report.betti(3) == 1 && report.is_torsion_free(),
        || format!("boundary of the 4-dimensional half cube: {:?}", report.betti),
    )?;
    Ok("balls acyclic, boundary is a homology 3-sphere".into())
}

fn worked_examples() -> Outcome {
    let text = |f: &FaceSeq| f.to_string();
    let seq = |s: &str| parse_seq(s, s.len()).map_err(|e| format!("{s}: {e}"));

    let v = seq("1110100")?;
    ensure(v.kind() == FaceKind::Vertex, || "1110100 is not a vertex".into())?;
    ensure(vertex_point(&v) == [-1, -1, -1, 1, -1, 1, 1], || "vertex point".into())?;

    let v_prime = [1i64, -1, -1, 1, -1, 1, 1];
    let mask = [1usize, 3, 6, 7];
    let symbols: Vec<Symbol> = v_prime
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let one = x == -1;
            if mask.contains(&(i + 1)) { Symbol::underlined(one) } else { Symbol::plain(one) }
        })
        .collect();
    let simplex = FaceSeq::from_symbols(symbols);
    ensure(text(&simplex) == "O1I01OO", || format!("simplex renders as {simplex}"))?;
    ensure(simplex.kind() == FaceKind::Simplex(3), || "O1I01OO kind".into())?;
    let verts: Vec<String> = simplex.vertices().iter().map(text).collect();
    let mut want = vec!["1110100", "0100100", "0110110", "0110101"];
    want.sort();
    ensure(verts == want, || format!("O1I01OO vertices {verts:?}"))?;

    let half = seq("010**1*010")?;
    ensure(half.kind() == FaceKind::HalfCube(3), || "010**1*010 kind".into())?;
    let positions: Vec<usize> = half.mask().iter().map(|p| p + 1).collect();
    ensure(positions == [4, 5, 7], || format!("mask {positions:?}"))?;
    let verts: Vec<String> = half.vertices().iter().map(text).collect();
    ensure(
        verts == ["0100011010", "0100110010", "0101010010", "0101111010"],
        || format!("010**1*010 vertices {verts:?}"),
    )?;

    let table = enumerate_faces(7).map_err(|e| e.to_string())?;
    let edge_between = |a: &str, b: &str| -> Result<String, String> {
        let pair = vec![seq(a)?, seq(b)?];
        let mut pair = pair;
        pair.sort();
        table
            .ids_of_dim(1)
            .map(|id| table.face(id))
            .find(|e| e.vertices() == pair)
            .map(text)
            .ok_or_else(|| format!("no edge joins {a} and {b}"))
    };
    ensure(edge_between("1110100", "0100100")? == "I1O0100", || "edge I1O0100".into())?;
    ensure(edge_between("0110110", "0110101")? == "01101OO", || "edge 01101OO".into())?;
    ensure(parse_seq("O1I0100", 7).is_err(), || "O1I0100 accepted".into())?;
    ensure(parse_seq("01101II", 7).is_err(), || "01101II accepted".into())?;

    let pairs = [
        ("0**1*10", "0**1**0", 1),
        ("0O1I10O", "0O1II0O", 3),
        ("0I1I10I", "0*1*10*", 5),
        ("01I01O0", "01I0IO0", 7),
        ("1110010", "11I00O0", 9),
    ];
    for (lo, hi, rule) in pairs {
        let (y, r) = match_face(&seq(lo)?, 7);
        ensure(text(&y) == hi && r == rule, || format!("{lo} -> {y} by rule {r}"))?;
        let (y, r) = match_face(&seq(hi)?, 7);
        ensure(text(&y) == lo && r == rule + 1, || format!("{hi} -> {y} by rule {r}"))?;
    }

    let (t, u) = seq("0I11OI01")?.total_and_u().map_err(|e| e.to_string())?;
    ensure(t == 23 && u == "01110101", || format!("t = {t}, u = {u}"))?;
    Ok("notation, matched pairs and statistics reproduced".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("face census", census),
        ("chain condition", chain_condition),
        ("perfect matching", perfect_matching),
        ("acyclicity", acyclicity),
        ("Morse triangularity", triangularity),
        ("Betti identity", betti_identity),
        ("unmatched census", unmatched_census),
        ("oracle homology", oracle_homology),
        ("basis certification", basis_certification),
        ("contractibility", contractibility),
        ("worked examples", worked_examples),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
