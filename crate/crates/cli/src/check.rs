//! Identity and invariant suite behind `hexwalk check`.

use std::f64::consts::TAU;

use hexwalk_core::coin::{c0, inf_distance, near_c0, random_unitary};
use hexwalk_core::greens::resolvent_identity_check;
use hexwalk_core::operators::transition_operator;
use hexwalk_core::rng::sub_seed;
use hexwalk_core::spectral::{self, block_theta, extract_block, gap_probability_exact, gap_probability_mc, Mat6};
use hexwalk_core::topo::{phi_local, phi_norm, StepVariant};
use hexwalk_core::{assemble_walk, restrict_box, BlockId, BoxSpec, CoinField, DisorderField, DisorderMode, C64};

use crate::config::CheckConfig;
use crate::output::RunDir;
use crate::CliError;

struct Row {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

pub fn run(c: &CheckConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    let n = c.samples.max(1) as u64;
    let seed = |i: u64| sub_seed(c.seed, 0xC4E, i);
    let mut rows = Vec::new();

    let amb = BoxSpec::new(4, 4)?;
    let inner = BoxSpec::new(2, 2)?;
    let (mut unit, mut bound, mut resolvent): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let c = near_c0(0.02 + 0.1 * (i % 3) as f64, seed(i))?;
        let coins = CoinField::constant(c)?;
        let dis = DisorderField::sample(&amb, DisorderMode::Decorrelated, seed(i));
        let u = assemble_walk(&amb, &coins, Some(&dis))?;
        let ul = restrict_box(&amb, &coins, Some(&dis), &inner)?;
        unit = unit.max(u.matrix().unitarity_defect()).max(ul.matrix().unitarity_defect());
        bound = bound.max(transition_operator(&u, &ul)?.norm / (3.0 * inf_distance(&c, &c0())));
        if i < 4 {
            resolvent = resolvent.max(resolvent_identity_check(&u, &ul, C64::new(0.1, 0.6), 2, seed(i))?);
        }
    }
    rows.push(Row { name: "unitarity_defect", value: unit, tolerance: 1e-12 });
    rows.push(Row { name: "transition_norm_over_bound", value: bound, tolerance: 1.0 });
    rows.push(Row { name: "resolvent_identity_residual", value: resolvent, tolerance: 1e-9 });

    let small = BoxSpec::new(2, 2)?;
    let c0f = CoinField::constant(c0())?;
    let mut sixth: f64 = 0.0;
    for i in 0..n {
        let dis = DisorderField::sample(&small, DisorderMode::Decorrelated, seed(1000 + i));
        let w = assemble_walk(&small, &c0f, Some(&dis))?;
        let blk = BlockId::new(0, 0);
        let m = extract_block(&w, blk)?;
        let theta = block_theta(&dis, blk).expect("block inside the box");
        let m2 = m * m;
        sixth = sixth.max(((m2 * m2 * m2) - Mat6::identity() * theta).iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    rows.push(Row { name: "c0_block_sixth_power", value: sixth, tolerance: 1e-10 });

    let (mut det, mut conj, mut spec): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..n.min(5) {
        let (ca, cb) = (random_unitary(seed(2000 + i)), random_unitary(seed(3000 + i)));
        let k0 = [0.0, 0.0];
        let d0 = spectral::reduced_symbol(k0, &ca, &cb, false).determinant();
        for a in 0..16 {
            for b in 0..16 {
                let k = [TAU * a as f64 / 16.0, TAU * b as f64 / 16.0];
                det = det.max((spectral::reduced_symbol(k, &ca, &cb, false).determinant() - d0).norm());
                let [a2, a1, a0] = spectral::char_poly(&spectral::reduced_symbol(k, &ca, &cb, true));
                conj = conj.max((a1 + a2.conj()).norm()).max((a0 + 1.0).norm());
                let full = spectral::bloch_eigenvalues(k, &ca, &cb)?;
                spec = spec.max(spectral::multiset_distance(&full, &spectral::reduced_eigenvalues(k, &ca, &cb)));
            }
        }
    }
    rows.push(Row { name: "band_det_drift", value: det, tolerance: 1e-10 });
    rows.push(Row { name: "band_charpoly_conjugacy", value: conj, tolerance: 1e-10 });
    rows.push(Row { name: "band_square_root_spectrum", value: spec, tolerance: 1e-9 });

    let mut phi: f64 = 0.0;
    for i in 0..n.max(12) {
        let c = random_unitary(seed(4000 + i));
        let v = StepVariant::all()[(i % 12) as usize];
        let (a, b) = v.coefficient();
        let f = phi_local(&c, &v.split());
        phi = phi.max((phi_norm(&(f * f)) - (1.0 - c[(a as usize - 1, b as usize - 1)].norm_sqr()).sqrt()).abs());
    }
    rows.push(Row { name: "flux_norm_formula", value: phi, tolerance: 1e-12 });

    let (z, eta, bx) = (C64::new(1.02, 0.0), 0.05, BoxSpec::new(3, 3)?);
    let exact = gap_probability_exact(z, eta, &bx)?;
    let mc = gap_probability_mc(z, eta, &bx, 4000, c.seed)?;
    let se = (exact * (1.0 - exact) / mc.samples as f64).sqrt();
    rows.push(Row { name: "gap_probability_sigmas", value: (mc.estimate - exact).abs() / se, tolerance: 3.0 });

    dir.write_with("check.csv", |w| {
        writeln!(w, "name,value,tolerance,pass")?;
        for r in &rows {
            writeln!(w, "{},{:.6e},{:.1e},{}", r.name, r.value, r.tolerance, u8::from(r.value <= r.tolerance))?;
        }
        Ok(())
    })?;
    Ok(rows.iter().filter(|r| !(r.value <= r.tolerance)).count())
}
