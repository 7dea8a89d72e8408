//! Self-check suite run by `z2lgt verify`.
//!
//! Each check rebuilds its objects from scratch and compares them against an
//! independent reference: dense matrices, exact exponentials or closed-form
//! counts. Dense references are kept at 8 qubits so the suite stays fast.

use crate::circuit::{
    circuit_unitary, cx_count, full_schedule_with, hop_h_long_block, hop_h_short_block, hop_v_long_block,
    hop_v_short_block, magnetic_block, magnetic_x4_block, mass_block, peephole_cancel, schedule, trotter_step,
    trotter_step_full, trotter_step_pure, Block, Circuit, Mode, Schedule, VertexTerm, VERTEX_ORDER,
};
use crate::hamiltonians::{
    build, build_eliminated, build_projected_interaction, build_pure, gauss_law_op, trotter_error_bound, Couplings,
    Part, Theory,
};
use crate::lattice::{make_lattice, LatticeGeometry};
use crate::linalg::{expm_hermitian, hermitian_eigen, max_abs, phase_insensitive_overlap, spectral_norm, CMat};
use crate::pauli::{PauliString, PauliSum};
use crate::pvqd::{Pvqd, PvqdConfig};
use crate::simulator::{expval, fidelity, ExactPropagator, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

const UNITARY_TOL: f64 = 1e-10;

/// Vertex order used when the schedule is deliberately broken.
pub const CORRUPT_ORDER: [VertexTerm; 4] = [VertexTerm::HopH, VertexTerm::HopV, VertexTerm::Mass, VertexTerm::Magnetic];

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Compile the eliminated theory with a vertex order that cancels fewer CX.
    pub corrupt_schedule: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

type Outcome = std::result::Result<String, String>;
type Check = (&'static str, fn(&Ctx) -> Outcome);

struct Ctx {
    opts: VerifyOptions,
    g22: LatticeGeometry,
    g44: LatticeGeometry,
}

impl Ctx {
    fn full_step(&self, geom: &LatticeGeometry, c: &Couplings, delta: f64, mode: Mode) -> Circuit {
        if self.opts.corrupt_schedule {
            full_schedule_with(geom, c, &CORRUPT_ORDER).compile(delta, mode).circuit
        } else {
            trotter_step_full(geom, c, delta, mode)
        }
    }

    fn full_schedule(&self, geom: &LatticeGeometry, c: &Couplings) -> Schedule {
        let order: &[VertexTerm] = if self.opts.corrupt_schedule { &CORRUPT_ORDER } else { &VERTEX_ORDER };
        full_schedule_with(geom, c, order)
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cx_per_link(ctx: &Ctx, theory: Theory, mode: Mode, geom: &LatticeGeometry, want: usize) -> Outcome {
    let c = Couplings::default();
    let circ = match theory {
        Theory::Full => ctx.full_step(geom, &c, 0.1, mode),
        _ => trotter_step(theory, geom, &c, 0.1, mode),
    };
    let cx = cx_count(&circ).cx;
    let l = geom.num_links();
    ensure(cx == want * l, format!("{cx} CX on {}x{} (L = {l}), expected {}", geom.m(), geom.n(), want * l))
}

fn blocks_match(make: impl Fn(&LatticeGeometry, &Couplings, i64, i64) -> Block, g: &LatticeGeometry) -> Outcome {
    let c = Couplings { lambda_e: 0.7, lambda_b: 1.3, eps: 0.4, mass: 0.9 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 1.0f64;
    for (x, y) in g.vertices() {
        for _ in 0..5 {
            let delta = rng.random_range(-2.0..2.0);
            let s = Schedule::new(8, vec![make(g, &c, x, y)]);
            let u = circuit_unitary(&s.compile(delta, Mode::Naive).circuit).map_err(err)?;
            worst = worst.min(phase_insensitive_overlap(&u, &s.exact_unitary(delta).map_err(err)?));
        }
    }
    ensure(worst >= 1.0 - UNITARY_TOL, format!("worst overlap 1 - {:.1e} over 20 angles", 1.0 - worst))
}

fn part_matrix(split: &crate::hamiltonians::HamiltonianSplit, p: Part) -> std::result::Result<CMat, String> {
    split.part(p).ok_or_else(|| format!("missing {p}"))?.to_matrix().map_err(err)
}

fn checks() -> Vec<Check> {
    vec![
        ("lattice sizes: L = 2MN links, MN vertices and plaquettes", |ctx| {
            let ok = [(ctx.g22, 8, 4), (ctx.g44, 32, 16)]
                .iter()
                .all(|(g, l, v)| g.num_links() == *l && g.num_vertices() == *v && g.num_plaquettes() == *v);
            ensure(ok, "2x2 and 4x4".into())
        }),
        ("link numbering is a bijection", |ctx| {
            let g = make_lattice(4, 2).map_err(err)?;
            let ok = (0..g.num_links()).all(|q| g.qubit_link(q).map(|l| g.link_qubit(l)) == Some(q))
                && ctx.g44.links().enumerate().all(|(q, l)| ctx.g44.link_qubit(l) == q);
            ensure(ok, format!("{} links on 4x2", g.num_links()))
        }),
        ("odd lattice rejected", |_| ensure(make_lattice(3, 2).is_err(), "3x2".into())),
        ("Pauli products match dense matrices", |_| {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let axes = ['I', 'X', 'Y', 'Z'];
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let a: String = (0..4).map(|_| axes[rng.random_range(0..4)]).collect();
                let b: String = (0..4).map(|_| axes[rng.random_range(0..4)]).collect();
                let (pa, pb) = (PauliString::parse(&a).unwrap(), PauliString::parse(&b).unwrap());
                let (ph, p) = pa.mul(&pb).map_err(err)?;
                let lhs = pa.to_matrix().map_err(err)? * pb.to_matrix().map_err(err)?;
                let rhs = p.to_matrix().map_err(err)? * ph.to_complex();
                worst = worst.max(max_abs(&(lhs - rhs)));
                let comm = pa.commutes(&pb).map_err(err)?;
                let dense = {
                    let (ma, mb) = (pa.to_matrix().map_err(err)?, pb.to_matrix().map_err(err)?);
                    max_abs(&(&ma * &mb - &mb * &ma)) < 1e-12
                };
                if comm != dense {
                    return Err(format!("commutation of {a} and {b}"));
                }
            }
            ensure(worst < 1e-12, format!("50 random pairs, max error {worst:.1e}"))
        }),
        ("pure step uses 3L CX on 2x2", |ctx| cx_per_link(ctx, Theory::Pure, Mode::Naive, &ctx.g22, 3)),
        ("pure step uses 3L CX on 4x4", |ctx| cx_per_link(ctx, Theory::Pure, Mode::Naive, &ctx.g44, 3)),
        ("full naive step uses 20L CX on 2x2", |ctx| cx_per_link(ctx, Theory::Full, Mode::Naive, &ctx.g22, 20)),
        ("full naive step uses 20L CX on 4x4", |ctx| cx_per_link(ctx, Theory::Full, Mode::Naive, &ctx.g44, 20)),
        ("full optimized step uses 17L CX on 2x2", |ctx| cx_per_link(ctx, Theory::Full, Mode::Optimized, &ctx.g22, 17)),
        ("full optimized step uses 17L CX on 4x4", |ctx| cx_per_link(ctx, Theory::Full, Mode::Optimized, &ctx.g44, 17)),
        ("VC step uses 14L CX on 2x2", |ctx| cx_per_link(ctx, Theory::Vc, Mode::Optimized, &ctx.g22, 14)),
        ("VC step uses 14L CX on 4x4", |ctx| cx_per_link(ctx, Theory::Vc, Mode::Optimized, &ctx.g44, 14)),
        ("qubit economy: eliminated L, VC 2L", |ctx| {
            let c = Couplings::default();
            let ok = [ctx.g22, ctx.g44].iter().all(|g| {
                build(Theory::Full, g, &c).num_qubits() == g.num_links()
                    && build(Theory::Vc, g, &c).num_qubits() == 2 * g.num_links()
            });
            ensure(ok, "2x2 and 4x4".into())
        }),
        ("projected interaction equals H_H + H_V", |ctx| {
            let c = Couplings::default();
            let h = build_eliminated(&ctx.g22, &c);
            let want = part_matrix(&h, Part::HopH)? + part_matrix(&h, Part::HopV)?;
            let got = build_projected_interaction(&ctx.g22, &c).to_matrix().map_err(err)?;
            let e = max_abs(&(got - want));
            ensure(e <= 1e-12, format!("max entry error {e:.1e}"))
        }),
        ("magnetic X4 block matches its exponential", |ctx| {
            blocks_match(|g, c, x, y| magnetic_x4_block(g, 8, c, x, y), &ctx.g22)
        }),
        ("short horizontal hopping block matches its exponential", |ctx| blocks_match(hop_h_short_block, &ctx.g22)),
        ("short vertical hopping block matches its exponential", |ctx| blocks_match(hop_v_short_block, &ctx.g22)),
        ("mass block matches its exponential", |ctx| blocks_match(mass_block, &ctx.g22)),
        ("magnetic Y2X2Z2 block matches its exponential", |ctx| blocks_match(magnetic_block, &ctx.g22)),
        ("long horizontal hopping block matches its exponential", |ctx| blocks_match(hop_h_long_block, &ctx.g22)),
        ("long vertical hopping block matches its exponential", |ctx| blocks_match(hop_v_long_block, &ctx.g22)),
        ("pure step equals exp(-iδH_B)exp(-iδH_E)", |ctx| {
            let c = Couplings::from_g(1.0);
            let h = build_pure(&ctx.g22, &c);
            let d = 0.1;
            let exact = expm_hermitian(&part_matrix(&h, Part::Magnetic)?, d)
                * expm_hermitian(&part_matrix(&h, Part::Electric)?, d);
            let u = circuit_unitary(&trotter_step_pure(&ctx.g22, &c, d)).map_err(err)?;
            let ov = phase_insensitive_overlap(&u, &exact);
            ensure(ov >= 1.0 - UNITARY_TOL, format!("overlap 1 - {:.1e}", 1.0 - ov))
        }),
        ("full naive step equals the ordered term product", |ctx| {
            let c = Couplings::default();
            let s = ctx.full_schedule(&ctx.g22, &c);
            let mut worst = 1.0f64;
            for d in [0.1, -0.37, 0.8] {
                let u = circuit_unitary(&ctx.full_step(&ctx.g22, &c, d, Mode::Naive)).map_err(err)?;
                worst = worst.min(phase_insensitive_overlap(&u, &s.exact_unitary(d).map_err(err)?));
            }
            ensure(worst >= 1.0 - UNITARY_TOL, format!("worst overlap 1 - {:.1e}", 1.0 - worst))
        }),
        ("full optimized step equals the ordered term product", |ctx| {
            let c = Couplings::default();
            let s = ctx.full_schedule(&ctx.g22, &c);
            let mut worst = 1.0f64;
            for d in [0.1, -0.37, 0.8] {
                let u = circuit_unitary(&ctx.full_step(&ctx.g22, &c, d, Mode::Optimized)).map_err(err)?;
                worst = worst.min(phase_insensitive_overlap(&u, &s.exact_unitary(d).map_err(err)?));
            }
            ensure(worst >= 1.0 - UNITARY_TOL, format!("worst overlap 1 - {:.1e}", 1.0 - worst))
        }),
        ("optimized step is the peephole pass of the naive step", |ctx| {
            let c = Couplings::default();
            let naive = ctx.full_step(&ctx.g44, &c, 0.2, Mode::Naive);
            ensure(peephole_cancel(&naive) == ctx.full_step(&ctx.g44, &c, 0.2, Mode::Optimized), "4x4".into())
        }),
        ("VC step equals the ordered term product on random states", |ctx| {
            let c = Couplings::default();
            let s = schedule(Theory::Vc, &ctx.g22, &c);
            let circ = trotter_step(Theory::Vc, &ctx.g22, &c, 0.1, Mode::Optimized);
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let mut worst = 1.0f64;
            for _ in 0..3 {
                let psi = StateVector::random(16, &mut rng);
                let mut a = psi.clone();
                a.apply_circuit(&circ).map_err(err)?;
                let mut b = psi;
                s.apply_exact(&mut b, 0.1);
                worst = worst.min(fidelity(&a, &b).map_err(err)?);
            }
            ensure(worst >= 1.0 - UNITARY_TOL, format!("worst fidelity 1 - {:.1e}", 1.0 - worst))
        }),
        ("Gauss operators commute with every pure and VC term", |ctx| {
            let ok =
                [(Theory::Pure, Couplings::from_g(0.8)), (Theory::Vc, Couplings::default())].iter().all(|(t, c)| {
                    let h = build(*t, &ctx.g22, c).total().unwrap();
                    ctx.g22.vertices().all(|(x, y)| {
                        let g = gauss_law_op(*t, &ctx.g22, x, y);
                        h.terms().iter().all(|(_, s)| s.commutes(&g).unwrap())
                    })
                });
            ensure(ok, "2x2".into())
        }),
        ("Gauss law conserved over 50 pure Trotter steps", |ctx| {
            let c = Couplings::from_g(1.0);
            let step = trotter_step_pure(&ctx.g22, &c, 0.1 / c.lambda_e);
            let gs: Vec<PauliSum> = ctx
                .g22
                .vertices()
                .map(|(x, y)| {
                    PauliSum::from_terms(8, [(1.0, gauss_law_op(Theory::Pure, &ctx.g22, x, y))], 0.0).unwrap()
                })
                .collect();
            let mut psi = StateVector::zero(8);
            let mut worst = 0.0f64;
            for _ in 0..50 {
                psi.apply_circuit(&step).map_err(err)?;
                for g in &gs {
                    worst = worst.max((expval(&psi, g).map_err(err)? - 1.0).abs());
                }
            }
            ensure(worst < 1e-9, format!("max |<G> - 1| = {worst:.1e}"))
        }),
        ("Trotter state error halves with δ", |ctx| {
            let (n1, f1) = trotter_error(&ctx.g22, 0.1)?;
            let (n2, f2) = trotter_error(&ctx.g22, 0.05)?;
            let (rn, rf) = (n1 / n2, f1 / f2);
            ensure(
                (1.7..=2.3).contains(&rn) && (3.4..=4.6).contains(&rf),
                format!("error norm ratio {rn:.3}, infidelity ratio {rf:.3}"),
            )
        }),
        ("product-formula bound dominates the Trotter error", |ctx| {
            let c = Couplings::from_g(1.0);
            let h = build_pure(&ctx.g22, &c);
            let full = h.total().map_err(err)?.to_matrix().map_err(err)?;
            let mut out = Vec::new();
            for (t, d) in [(1.0, 0.1), (1.0, 0.05), (2.0, 0.1)] {
                let v = expm_hermitian(&part_matrix(&h, Part::Magnetic)?, d)
                    * expm_hermitian(&part_matrix(&h, Part::Electric)?, d);
                let steps = (t / d).round() as usize;
                let mut vt = CMat::identity(256, 256);
                for _ in 0..steps {
                    vt = &v * vt;
                }
                let actual = spectral_norm(&(expm_hermitian(&full, t) - vt));
                let bound = trotter_error_bound(&h, t, d).map_err(err)?;
                if bound < actual {
                    return Err(format!("t={t} δ={d}: bound {bound:.4} < error {actual:.4}"));
                }
                out.push(format!("{bound:.3}≥{actual:.3}"));
            }
            Ok(out.join(", "))
        }),
        ("dense and Krylov propagators agree", |ctx| {
            let h = build_eliminated(&ctx.g22, &Couplings::default()).total().map_err(err)?;
            let psi = StateVector::zero(8);
            let a = ExactPropagator::new(&h).map_err(err)?.evolve(&psi, 2.0).map_err(err)?;
            let b = ExactPropagator::krylov(&h).map_err(err)?.evolve(&psi, 2.0).map_err(err)?;
            let f = fidelity(&a, &b).map_err(err)?;
            ensure(f >= 1.0 - 1e-9, format!("fidelity 1 - {:.1e}", 1.0 - f))
        }),
        ("pure 2x2 ground energy at g = 1", |ctx| {
            let h = build_pure(&ctx.g22, &Couplings::from_g(1.0)).total().map_err(err)?;
            let e0 = hermitian_eigen(&h.to_matrix().map_err(err)?).values[0];
            ensure((e0 + 8.54311682027943).abs() < 1e-9, format!("E0 = {e0:.12}"))
        }),
        ("exact evolution conserves energy", |ctx| {
            let h = build_eliminated(&ctx.g22, &Couplings::default()).total().map_err(err)?;
            let p = ExactPropagator::new(&h).map_err(err)?;
            let psi0 = StateVector::zero(8);
            let e0 = expval(&psi0, &h).map_err(err)?;
            let e1 = expval(&p.evolve(&psi0, 3.0).map_err(err)?, &h).map_err(err)?;
            ensure((e0 - e1).abs() < 1e-9, format!("drift {:.1e}", (e0 - e1).abs()))
        }),
        ("circuit text round trip", |ctx| {
            let circ = ctx.full_step(&ctx.g22, &Couplings::default(), 0.123, Mode::Optimized);
            let back = Circuit::from_text(&circ.to_text()).map_err(err)?;
            ensure(back == circ, format!("{} gates", circ.len()))
        }),
        ("Pauli-sum text round trip", |ctx| {
            let h = build_eliminated(&ctx.g22, &Couplings::default()).total().map_err(err)?;
            let back = PauliSum::from_text(&h.to_text()).map_err(err)?;
            ensure(back == h, format!("{} terms", h.len()))
        }),
        ("pVQD Trotter embedding has unit overlap", |ctx| {
            let c = Couplings::from_g(1.0);
            let mut worst = 1.0f64;
            for theory in [Theory::Pure, Theory::Full] {
                let cfg = PvqdConfig { k: 2, delta: 0.1, theory, ..PvqdConfig::default() };
                let p = Pvqd::new(cfg, c, ctx.g22).map_err(err)?;
                let zero = vec![0.0; p.num_params()];
                worst = worst.min(p.step_overlap(&zero, &p.trotter_embedding()).map_err(err)?);
            }
            ensure(worst >= 1.0 - 1e-12, format!("overlap 1 - {:.1e}", 1.0 - worst))
        }),
    ]
}

/// Returns (‖ψ_exact − ψ_trotter‖, 1 − F) at t = 2 on the pure 2×2 lattice, g = 1.
fn trotter_error(g: &LatticeGeometry, delta: f64) -> std::result::Result<(f64, f64), String> {
    let c = Couplings::from_g(1.0);
    let h = build_pure(g, &c).total().map_err(err)?;
    let exact = ExactPropagator::new(&h).map_err(err)?.evolve(&StateVector::zero(8), 2.0).map_err(err)?;
    let step = trotter_step_pure(g, &c, delta);
    let mut psi = StateVector::zero(8);
    for _ in 0..(2.0 / delta).round() as usize {
        psi.apply_circuit(&step).map_err(err)?;
    }
    // Align the global phase before taking the norm.
    let ov = psi.inner(&exact).map_err(err)?;
    let phase = ov / ov.norm();
    let d: f64 =
        psi.amplitudes().iter().zip(exact.amplitudes()).map(|(a, b)| (a * phase - b).norm_sqr()).sum::<f64>().sqrt();
    Ok((d, 1.0 - ov.norm_sqr()))
}

pub fn run_checks(opts: VerifyOptions) -> Vec<CheckResult> {
    let ctx = Ctx { opts, g22: make_lattice(2, 2).unwrap(), g44: make_lattice(4, 4).unwrap() };
    checks()
        .into_iter()
        .map(|(name, f)| {
            let t0 = Instant::now();
            let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&ctx)))
                .unwrap_or_else(|_| Err("panicked".into()));
            let elapsed = t0.elapsed();
            let (passed, detail) = match res {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { name: name.to_string(), passed, detail, elapsed }
        })
        .collect()
}
