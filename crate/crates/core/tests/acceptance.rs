//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hexwalk_core::coin::{self, c0, identity, near_c0, random_unitary, rephase_rows, swap12};
use hexwalk_core::dynamics::{dynloc_profile, evolve, unit_vector, DynlocParams};
use hexwalk_core::greens::{decay_profile, fractional_moment, resolvent_identity_check, sample_seed, z_circle, DecayParams, GreensQuery, Ray, WalkSetup};
use hexwalk_core::greens::ProfileStatus;
use hexwalk_core::lattice::block_of;
use hexwalk_core::linalg::{norm2, Backend, ShiftedSolver};
use hexwalk_core::operators::{schur_bound, transition_operator};
use hexwalk_core::rng::Stream;
use hexwalk_core::spectral::{self, block_theta, extract_block, gap_probability_exact, gap_probability_mc, BandScan, Mat6};
use hexwalk_core::topo::{classify_path, compute_index, normalize_path, phi_local, phi_norm, reference_path, Classification, IndexOptions, ScatteringPath, StepClass, StepVariant};
use hexwalk_core::{assemble_walk, restrict_box, BlockId, BoxSpec, CoinField, Direction, DisorderField, DisorderMode, Site, C64};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bx(l1: u32, l2: u32) -> BoxSpec {
    BoxSpec::new(l1, l2).unwrap()
}

fn unitarity() -> Outcome {
    let sizes = [(2, 2), (3, 5), (6, 4), (10, 10), (16, 16)];
    let mut st = Stream::new(1, 1);
    let mut worst: f64 = 0.0;
    let mut max_dim = 0;
    for i in 0..20u64 {
        let (l1, l2) = sizes[i as usize % sizes.len()];
        let amb = bx(l1, l2).with_origin((st.next_u64() % 7) as i32 - 3, (st.next_u64() % 7) as i32 - 3);
        let coins = match i % 4 {
            0 => CoinField::constant(random_unitary(i)),
            1 => CoinField::two_sublattice(random_unitary(i), random_unitary(i + 100)),
            2 => CoinField::constant(near_c0(0.1, i).unwrap()),
            _ => CoinField::constant(coin::theta(0.3 * i as f64)),
        }
        .map_err(|e| e.to_string())?;
        let mode = if i % 2 == 0 { DisorderMode::Decorrelated } else { DisorderMode::Correlated };
        let dis = DisorderField::sample(&amb, mode, st.next_u64());
        let w = if i % 5 == 3 && l1 >= 6 && l2 >= 4 {
            let inner = BoxSpec::new(l1 - 3, l2 - 2).unwrap().with_origin(amb.origin.0, amb.origin.1);
            restrict_box(&amb, &coins, Some(&dis), &inner)
        } else {
            assemble_walk(&amb, &coins, Some(&dis))
        }
        .map_err(|e| e.to_string())?;
        max_dim = max_dim.max(w.dim());
        worst = worst.max(w.matrix().unitarity_defect());
    }
    ensure(worst <= 1e-12, format!("max |W*W - I| = {worst:.2e} over 20 walks, dim up to {max_dim}"))
}

fn localization() -> Outcome {
    let amb = bx(6, 6);
    let coins = CoinField::constant(c0()).unwrap();
    let dis = DisorderField::sample(&amb, DisorderMode::Decorrelated, 17);
    let w = assemble_walk(&amb, &coins, Some(&dis)).map_err(|e| e.to_string())?;
    let mut leak: f64 = 0.0;
    for b in [Site::a(0, 0).with_coin(Direction::D1), Site::b(1, -2).with_coin(Direction::D3), Site::a(-2, 3).with_coin(Direction::D2)] {
        let home = block_of(b);
        let mut psi = unit_vector(&w, b).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            psi = evolve(&w, &psi, 1);
            for (i, v) in psi.iter().enumerate() {
                if block_of(w.basis().element(i)) != home {
                    leak = leak.max(v.norm());
                }
            }
        }
    }
    let mut defect: f64 = 0.0;
    let small = bx(2, 2);
    for draw in 0..100u64 {
        let dis = DisorderField::sample(&small, DisorderMode::Decorrelated, 1000 + draw);
        let w = assemble_walk(&small, &coins, Some(&dis)).map_err(|e| e.to_string())?;
        let blk = BlockId::new(0, 0);
        let m = extract_block(&w, blk).map_err(|e| e.to_string())?;
        let theta = block_theta(&dis, blk).ok_or("block phases missing")?;
        let m2 = m * m;
        let m6 = m2 * m2 * m2;
        defect = defect.max((m6 - Mat6::identity() * theta).iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    ensure(leak < 1e-14 && defect <= 1e-10, format!("cross-block amplitude {leak:.1e}, max |M^6 - Theta| = {defect:.2e}"))
}

fn transition_bound() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut schur_ok = true;
    let mut count = 0;
    for (l1, l2) in [(3, 3), (5, 5)] {
        let inner = bx(l1, l2);
        let amb = bx(l1 + 3, l2 + 3);
        for r in [0.01, 0.05, 0.1] {
            for seed in 0..20u64 {
                let c = near_c0(r, seed).map_err(|e| e.to_string())?;
                let dist = coin::inf_distance(&c, &c0());
                let coins = CoinField::constant(c).unwrap();
                let dis = DisorderField::sample(&amb, DisorderMode::Decorrelated, seed);
                let u = assemble_walk(&amb, &coins, Some(&dis)).map_err(|e| e.to_string())?;
                let ul = restrict_box(&amb, &coins, Some(&dis), &inner).map_err(|e| e.to_string())?;
                let t = transition_operator(&u, &ul).map_err(|e| e.to_string())?;
                worst_ratio = worst_ratio.max(t.norm / (3.0 * dist));
                schur_ok &= t.norm <= schur_bound(&t.matrix) * (1.0 + 1e-9);
                count += 1;
            }
        }
    }
    ensure(worst_ratio <= 1.0 && schur_ok, format!("{count} cases, max ||T|| / (3 ||C - C0||) = {worst_ratio:.3}, Schur bound held: {schur_ok}"))
}

fn gap_probability() -> Outcome {
    let b = bx(3, 3);
    let mut lines = Vec::new();
    let mut ok = true;
    for (z, eta) in [(C64::new(1.2, 0.0), 0.05), (C64::new(1.02, 0.0), 0.05), (C64::new(0.0, 0.97), 0.04)] {
        let exact = gap_probability_exact(z, eta, &b).map_err(|e| e.to_string())?;
        let mc = gap_probability_mc(z, eta, &b, 10_000, 9).map_err(|e| e.to_string())?;
        let se = (exact * (1.0 - exact) / mc.samples as f64).sqrt();
        let agree = if se == 0.0 { mc.estimate == exact } else { (mc.estimate - exact).abs() <= 3.0 * se };
        let bound = exact <= 3.0 * eta * b.volume() as f64;
        ok &= agree && bound;
        lines.push(format!("z={z} exact {exact:.4} mc {:.4}", mc.estimate));
    }
    ensure(ok, lines.join("; "))
}

fn band_identities() -> Outcome {
    let n = 64;
    let ks: Vec<[f64; 2]> = (0..n).flat_map(|i| (0..n).map(move |j| [TAU * i as f64 / n as f64, TAU * j as f64 / n as f64])).collect();
    let (mut det_var, mut conj, mut spec): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for seed in 0..20u64 {
        let (ca, cb) = (random_unitary(2 * seed + 1), random_unitary(2 * seed + 2));
        let d0 = spectral::reduced_symbol(ks[0], &ca, &cb, false).determinant();
        for &k in &ks {
            let v = spectral::reduced_symbol(k, &ca, &cb, false);
            det_var = det_var.max((v.determinant() - d0).norm());
            let [a2, a1, a0] = spectral::char_poly(&spectral::reduced_symbol(k, &ca, &cb, true));
            conj = conj.max((a1 + a2.conj()).norm()).max((a0 + 1.0).norm());
            let full = spectral::bloch_eigenvalues(k, &ca, &cb).map_err(|e| e.to_string())?;
            spec = spec.max(spectral::multiset_distance(&full, &spectral::reduced_eigenvalues(k, &ca, &cb)));
        }
    }
    let flat = BandScan::grid(n, n, &c0(), &c0()).map_err(|e| e.to_string())?.is_flat();
    let id_flat = BandScan::grid(n, n, &identity(), &identity()).map_err(|e| e.to_string())?.is_flat();
    ensure(
        det_var <= 1e-10 && conj <= 1e-10 && spec <= 1e-9 && flat && !id_flat,
        format!("det drift {det_var:.1e}, char-poly {conj:.1e}, spectra {spec:.1e}, C0 flat {flat}, identity flat {id_flat}"),
    )
}

fn coin_005() -> CoinField {
    CoinField::constant(near_c0(0.05, 3).unwrap()).unwrap()
}

fn fractional_decay() -> Outcome {
    let p = DecayParams {
        s: 0.2,
        z: z_circle(0.95, 2),
        coins: coin_005(),
        mode: DisorderMode::Decorrelated,
        ambient: bx(15, 15),
        ray: Ray::along_a1(),
        source_coin: Direction::D1,
        distances: (2..=12).collect(),
        samples: 200,
        seed: 6,
        backend: Backend::Auto,
    };
    let prof = decay_profile(&p).map_err(|e| e.to_string())?;
    let fit = prof.fit.ok_or("no fit")?;
    let drift = prof.doubling_discrepancy(100);
    ensure(fit.g > 0.0 && fit.r2 > 0.9 && drift <= 3.0, format!("g = {:.3}, R^2 = {:.4}, doubling drift {drift:.2} sigma", fit.g, fit.r2))
}

fn fractional_bound() -> Outcome {
    let setup = WalkSetup::new(bx(7, 7), coin_005(), DisorderMode::Decorrelated);
    let source = Site::a(0, 0).with_coin(Direction::D1);
    let targets: Vec<_> = [Site::a(0, 0), Site::b(1, 0), Site::a(2, 0), Site::a(-1, 3)]
        .iter()
        .flat_map(|s| Direction::ALL.map(|d| s.with_coin(d)))
        .collect();
    let mut zs = Vec::new();
    for r in [0.9, 0.95, 1.05, 1.1] {
        zs.extend(z_circle(r, 8));
    }
    let max_for = |samples: usize| -> Result<f64, String> {
        let mut m: f64 = 0.0;
        for (i, &z) in zs.iter().enumerate() {
            let q = GreensQuery { z, source, targets: targets.clone(), s: 0.2, samples, seed: sample_seed(7, i) };
            let t = fractional_moment(&q, &setup).map_err(|e| e.to_string())?;
            m = m.max(t.moments.iter().map(|x| x.mean).fold(0.0, f64::max));
        }
        Ok(m)
    };
    let (a, b) = (max_for(40)?, max_for(80)?);
    let change = (b - a).abs() / a;
    ensure(a.is_finite() && b.is_finite() && change < 0.5, format!("max moment {a:.4} -> {b:.4} on doubling ({:.1}%)", 100.0 * change))
}

fn dynamical() -> Outcome {
    let p = DynlocParams {
        coins: coin_005(),
        mode: DisorderMode::Decorrelated,
        ambient: bx(28, 28),
        ray: Ray::along_a1(),
        source_coin: Direction::D1,
        distances: (2..=12).collect(),
        n_max: 200,
        samples: 200,
        seed: 8,
    };
    let prof = dynloc_profile(&p).map_err(|e| e.to_string())?;
    let fit = prof.fit.ok_or("no fit")?;
    let exact = dynloc_profile(&DynlocParams { coins: CoinField::constant(c0()).unwrap(), samples: 10, ..p }).map_err(|e| e.to_string())?;
    let zeros = exact.status == ProfileStatus::ExactLocalization;
    ensure(fit.g > 0.0 && fit.r2 > 0.9 && zeros, format!("g = {:.3}, R^2 = {:.4}, C0 exact zeros {zeros}", fit.g, fit.r2))
}

fn index_pipeline() -> Outcome {
    let g = reference_path(6, 10);
    let swap = CoinField::constant(swap12()).unwrap();
    let opts = IndexOptions::default();
    let rep = compute_index(&g, &swap, &opts).map_err(|e| e.to_string())?;
    let legs_zero = rep.sites.iter().filter(|s| matches!(s.class, StepClass::Hh | StepClass::Pp)).all(|s| s.phi_norm == 0.0);
    let mut formula: f64 = 0.0;
    for seed in 0..100u64 {
        let c = random_unitary(500 + seed);
        let v = StepVariant::all()[(seed % 12) as usize];
        let (i, j) = v.coefficient();
        let f = phi_local(&c, &v.split());
        formula = formula.max((phi_norm(&(f * f)) - (1.0 - c[(i as usize - 1, j as usize - 1)].norm_sqr()).sqrt()).abs());
    }
    let mut w = g.waypoints.clone();
    let at = w.len() - 4;
    let f = w[at];
    let detour = f.neighbors().into_iter().find(|n| !w.contains(n)).ok_or("no detour face")?;
    w.splice(at + 1..at + 1, [detour, f]);
    let looped = normalize_path(&ScatteringPath::new(w)).map_err(|e| e.to_string())?;
    let looped_idx = compute_index(&looped, &swap, &opts).map_err(|e| e.to_string())?.index;
    let mut phased = CoinField::sparse();
    let mut st = Stream::new(9, 9);
    for s in classify_path(&g).map_err(|e| e.to_string())? {
        let ph = [st.next_f64() * TAU, st.next_f64() * TAU, st.next_f64() * TAU];
        phased.set(s.site, rephase_rows(&swap12(), ph)).map_err(|e| e.to_string())?;
    }
    let phased_idx = compute_index(&g, &phased, &opts).map_err(|e| e.to_string())?.index;
    let ok = rep.index.map(i32::abs) == Some(1)
        && rep.classification == Classification::TraceClass
        && rep.trace_estimate == 0.0
        && legs_zero
        && formula <= 1e-12
        && looped_idx == rep.index
        && phased_idx == rep.index;
    ensure(
        ok,
        format!(
            "index {:?} ({:?}), trace estimate {}, eigensolve vs formula {formula:.1e}, loop {:?}, phases {:?}",
            rep.index, rep.classification, rep.trace_estimate, looped_idx, phased_idx
        ),
    )
}

fn resolvent() -> Outcome {
    let amb = bx(5, 5);
    let inner = bx(2, 2);
    let mut worst: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut dim = 0;
    for (i, z) in [C64::new(0.3, 0.4), C64::new(-1.1, 0.6), C64::new(0.0, 0.95)].into_iter().enumerate() {
        let coins = CoinField::constant(near_c0(0.2, i as u64).unwrap()).unwrap();
        let dis = DisorderField::sample(&amb, DisorderMode::Decorrelated, 40 + i as u64);
        let u = assemble_walk(&amb, &coins, Some(&dis)).map_err(|e| e.to_string())?;
        let ul = restrict_box(&amb, &coins, Some(&dis), &inner).map_err(|e| e.to_string())?;
        dim = u.dim();
        worst = worst.max(resolvent_identity_check(&u, &ul, z, 4, i as u64).map_err(|e| e.to_string())?);
        worst = worst.max(resolvent_identity_check(&ul, &u, z, 4, 10 + i as u64).map_err(|e| e.to_string())?);
        let mut st = Stream::new(i as u64, 3);
        let v: Vec<C64> = (0..dim).map(|_| C64::new(st.normal(), st.normal())).collect();
        for w in [&u, &ul] {
            let sparse = ShiftedSolver::new(w.matrix(), z, Backend::SparseLu).and_then(|s| s.solve(&v)).map_err(|e| e.to_string())?;
            let dense = ShiftedSolver::new(w.matrix(), z, Backend::DenseLu).and_then(|s| s.solve(&v)).map_err(|e| e.to_string())?;
            let diff: Vec<C64> = sparse.iter().zip(&dense).map(|(a, b)| a - b).collect();
            oracle = oracle.max(norm2(&diff) / norm2(&dense));
        }
    }
    ensure(dim <= 600 && worst <= 1e-9 && oracle <= 1e-9, format!("dim {dim}, identity residual {worst:.1e}, sparse vs dense {oracle:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("unitarity", unitarity, Duration::from_secs(10)),
        ("exact localization at C0", localization, Duration::from_secs(5)),
        ("transition-norm bound", transition_bound, Duration::from_secs(30)),
        ("gap probability", gap_probability, Duration::from_secs(20)),
        ("band identities", band_identities, Duration::from_secs(30)),
        ("fractional-moment decay", fractional_decay, Duration::from_secs(600)),
        ("fractional-moment bound", fractional_bound, Duration::from_secs(600)),
        ("dynamical localization", dynamical, Duration::from_secs(600)),
        ("index pipeline", index_pipeline, Duration::from_secs(10)),
        ("resolvent identities", resolvent, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (n, (name, run, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let el = t.elapsed();
        let slow = el > *budget;
        let (tag, detail) = match (&out, slow) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d} [over budget {:.0} s]", budget.as_secs_f64())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} #{:<2} {name:<26} {:>7.2} s  {detail}", n + 1, el.as_secs_f64());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
