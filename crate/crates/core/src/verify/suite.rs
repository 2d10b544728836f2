use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::casimir::{
    annihilation_claims, brute_force_multiplicities, canonical_basis_s1, complete_set_check,
    conventional_match, deformed_generators, demo_eigen_checks, demo_s1_operators,
    full_closure_residual, irrep_weights, lattice_multiplicities, lattice_report,
    lplus_factor_right, residue_classes, resolvent, resolvent_commutator_check, tau_bar_forms,
    weight_count_multiplicities, weyl_residual, CasimirStack, ClosureForm, DemoOperators,
    Direction, KernelLatticeReport, ResolventForm,
};
use crate::error::{Error, Result};
use crate::fock::{dimension, enumerate_sector, FockState, SectorBasis};
use crate::ladder::{
    check_power_identity, check_rlo, check_rlo_compose, extract_coefficients, poly_operator,
    sigma_next_to_last_closed_form, solve_sigma, AlphaMatrix, Family, JPoly,
};
use crate::operator::{
    commutator, commutator_residual, residual, Restriction, SparseOperator, C64,
};
use crate::schwinger::{j_from_casimir, jordan_schwinger, jz_kernel, su2_generators, Su2Generators};

use super::registry::check_spec;
use super::report::{CheckKind, CheckParams, CheckRecord, Discrepancy, ReportConfig, VerificationReport};
use super::SuiteConfig;

/// Outcome of one check before its tolerance is applied.
enum Measured {
    Residual { value: f64, detail: Option<String> },
    Exact { holds: bool, detail: Option<String> },
}

impl Measured {
    fn residual(value: f64) -> Self {
        Self::Residual { value, detail: None }
    }

    fn residual_with(value: f64, detail: impl Into<String>) -> Self {
        Self::Residual {
            value,
            detail: Some(detail.into()),
        }
    }

    fn exact(holds: bool, detail: impl Into<String>) -> Self {
        Self::Exact {
            holds,
            detail: Some(detail.into()),
        }
    }
}

struct Recorder<'a> {
    config: &'a SuiteConfig,
    checks: Vec<CheckRecord>,
    discrepancies: Vec<Discrepancy>,
}

impl<'a> Recorder<'a> {
    fn new(config: &'a SuiteConfig) -> Self {
        Self {
            config,
            checks: Vec::new(),
            discrepancies: Vec::new(),
        }
    }

    fn tolerance(&self, name: &str) -> f64 {
        let default = check_spec(name).and_then(|s| s.tolerance).unwrap_or(1e-8);
        self.config.tolerance_for(name, default)
    }

    fn check(&mut self, name: &str, params: CheckParams, f: impl FnOnce() -> Result<Measured>) -> bool {
        let spec = check_spec(name);
        let start = self.config.timings.then(Instant::now);
        let outcome = f();
        let wall_time_ms = start.map(|t| t.elapsed().as_secs_f64() * 1e3);
        let residual_kind = spec.is_none_or(|s| s.tolerance.is_some());
        let mut record = CheckRecord {
            name: name.to_string(),
            anchor: spec.map_or("unregistered", |s| s.anchor).to_string(),
            params,
            kind: if residual_kind { CheckKind::Residual } else { CheckKind::Exact },
            residual: None,
            tolerance: residual_kind.then(|| self.tolerance(name)),
            pass: false,
            detail: None,
            error: None,
            wall_time_ms,
        };
        match outcome {
            Ok(Measured::Residual { value, detail }) => {
                let tolerance = self.tolerance(name);
                record.kind = CheckKind::Residual;
                record.tolerance = Some(tolerance);
                record.detail = detail;
                if value.is_finite() {
                    record.residual = Some(value);
                    record.pass = value < tolerance;
                } else {
                    record.error = Some(format!("non-finite residual {value}"));
                }
            }
            Ok(Measured::Exact { holds, detail }) => {
                record.kind = CheckKind::Exact;
                record.tolerance = None;
                record.pass = holds;
                record.detail = detail;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        let pass = record.pass;
        self.checks.push(record);
        pass
    }

    fn note(&mut self, topic: &str, spin: u32, stated: impl Into<String>, derived: impl Into<String>, evidence: impl Into<String>) {
        self.discrepancies.push(Discrepancy {
            topic: topic.to_string(),
            spin: Some(spin),
            stated: stated.into(),
            derived: derived.into(),
            evidence: evidence.into(),
        });
    }
}

fn relative(x: f64) -> String {
    format!("{x:.3e}")
}

/// Runs every check for every configured spin, spins in parallel, and
/// merges the results in configuration order.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    config.validate()?;
    let run = || -> Vec<(Vec<CheckRecord>, Vec<Discrepancy>)> {
        config
            .spins
            .par_iter()
            .map(|&s| {
                let mut rec = Recorder::new(config);
                run_spin(&mut rec, s, config.n_max);
                (rec.checks, rec.discrepancies)
            })
            .collect()
    };
    let per_spin = if config.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run)
    } else {
        run()
    };
    let mut checks = Vec::new();
    let mut discrepancies = Vec::new();
    for (c, d) in per_spin {
        checks.extend(c);
        discrepancies.extend(d);
    }
    Ok(VerificationReport::new(
        ReportConfig {
            spins: config.spins.clone(),
            n_max: config.n_max,
            tolerance: config.tolerance,
            tolerance_overrides: config.tolerance_overrides.clone(),
        },
        checks,
        discrepancies,
    ))
}

fn run_spin(rec: &mut Recorder, s: u32, n_max: u32) {
    let basis = Arc::new(SectorBasis::full(s, n_max));
    fock_checks(rec, &basis);
    operator_checks(rec, &basis);
    let generators = su2_generators(&basis);
    if let Ok(g) = &generators {
        su2_checks(rec, g);
    } else if let Err(e) = generators {
        rec.check("su2.jz_jplus", CheckParams::spin(s), || Err(e));
        return;
    }
    let mut stack = match CasimirStack::unverified(s, n_max) {
        Ok(stack) => stack,
        Err(e) => {
            rec.check("casimir.jhat_definition", CheckParams::spin(s), || Err(e));
            return;
        }
    };
    casimir_checks(rec, &stack);
    family_checks(rec, &stack);
    alpha_checks(rec, &stack);
    symbolic_checks(rec, &stack);
    if let Err(e) = stack.build_taus() {
        rec.check("tau.ladder", CheckParams::spin(s).margin(1), || Err(e));
        return;
    }
    tau_checks(rec, &stack);
    resolvent_checks(rec, &stack);
    lattice_checks(rec, &stack);
    deformed_checks(rec, &stack);
    if s == 1 {
        demo_checks(rec, &stack);
    }
}

fn fock_checks(rec: &mut Recorder, basis: &Arc<SectorBasis>) {
    let s = basis.spin();
    let n_max = basis.n_max();
    rec.check("fock.dimension", CheckParams::spin(s), || {
        let expected = dimension(s, n_max);
        Ok(Measured::exact(
            basis.len() as u64 == expected,
            format!("{} states, C(n_max + 2s + 1, 2s + 1) = {expected}", basis.len()),
        ))
    });
    rec.check("fock.sector_partition", CheckParams::spin(s), || {
        let mut covered = 0;
        for n in 0..=n_max {
            let top = (n * s) as i64;
            for w in -top..=top {
                let sector = enumerate_sector(s, n_max, Some(n), Some(w))?;
                let idx = basis.sector_indices(n, w);
                let same = sector.len() == idx.len()
                    && idx.iter().zip(sector.states()).all(|(&i, st)| basis.state(i) == st);
                if !same {
                    return Ok(Measured::exact(false, format!("sector (n={n}, w={w}) differs")));
                }
                covered += sector.len();
            }
        }
        Ok(Measured::exact(
            covered == basis.len(),
            format!("{covered} states over all (n, w) sectors"),
        ))
    });
}

fn operator_checks(rec: &mut Recorder, basis: &Arc<SectorBasis>) {
    let s = basis.spin();
    let si = s as i64;
    rec.check("operator.ccr", CheckParams::spin(s).margin(1), || {
        let restriction = Restriction::interior(1);
        let id = SparseOperator::identity(basis);
        let zero = SparseOperator::zero(basis);
        let mut worst: f64 = 0.0;
        for mu in -si..=si {
            let a = SparseOperator::annihilation(basis, mu)?;
            for nu in -si..=si {
                let ad = SparseOperator::creation(basis, nu)?;
                let expected = if mu == nu { &id } else { &zero };
                worst = worst.max(commutator_residual(&a, &ad, expected, &restriction)?.frobenius_relative);
                let a2 = SparseOperator::annihilation(basis, nu)?;
                worst = worst.max(commutator_residual(&a, &a2, &zero, &restriction)?.frobenius_relative);
            }
        }
        Ok(Measured::residual(worst))
    });
    rec.check("operator.creation_action", CheckParams::spin(s), || {
        let mut worst: f64 = 0.0;
        for mu in -si..=si {
            let slot = (mu + si) as usize;
            let c = SparseOperator::creation(basis, mu)?;
            let mut expected_entries = 0;
            for i in 0..basis.len() {
                if basis.total_of(i) >= basis.n_max() {
                    continue;
                }
                expected_entries += 1;
                let mut occ = basis.state(i).occupations().to_vec();
                occ[slot] += 1;
                let t = basis
                    .state_index(&FockState::new(occ.clone()))?
                    .ok_or_else(|| Error::Parse(format!("missing image state {occ:?}")))?;
                worst = worst.max((c.get(t, i) - C64::new((occ[slot] as f64).sqrt(), 0.0)).norm());
            }
            if c.nnz() != expected_entries {
                return Ok(Measured::exact(
                    false,
                    format!("a†_{mu} has {} entries, expected {expected_entries}", c.nnz()),
                ));
            }
            let a = SparseOperator::annihilation(basis, mu)?;
            worst = worst.max(residual(&a, &c.adjoint(), 0)?.frobenius_relative);
        }
        Ok(Measured::residual(worst))
    });
    let number = SparseOperator::total_number(basis);
    let id = SparseOperator::identity(basis);
    let restriction = Restriction::interior(1);
    let tol = rec.tolerance("operator.number_ladder");
    rec.check("operator.number_ladder", CheckParams::spin(s).margin(1), || {
        let mut worst: f64 = 0.0;
        for mu in -si..=si {
            let ad = SparseOperator::creation(basis, mu)?;
            worst = worst.max(check_rlo(&number, &ad, &id, &restriction, tol)?.frobenius_relative);
        }
        Ok(Measured::residual(worst))
    });
    rec.check("operator.ladder_negative_control", CheckParams::spin(s).margin(1), || {
        let ad = SparseOperator::creation(basis, 0)?;
        let r = check_rlo(&number, &ad, &id.scale_real(2.0), &restriction, tol)?;
        Ok(Measured::exact(
            r.frobenius_relative > 1e-3,
            format!("right function 2 gives residual {}", relative(r.frobenius_relative)),
        ))
    });
    let tol = rec.tolerance("operator.power_identity");
    rec.check("operator.power_identity", CheckParams::spin(s).k(3).margin(1), || {
        let ad = SparseOperator::creation(basis, 0)?;
        Ok(Measured::residual(
            check_power_identity(&number, &ad, &id, 3, &restriction, tol)?.frobenius_relative,
        ))
    });
}

fn su2_checks(rec: &mut Recorder, g: &Su2Generators) {
    let s = g.spin;
    let basis = g.basis();
    let all = Restriction::interior(0);
    let zero = SparseOperator::zero(basis);
    let p = || CheckParams::spin(s).margin(0);
    rec.check("su2.jz_jplus", p(), || {
        Ok(Measured::residual(commutator_residual(&g.jz, &g.jplus, &g.jplus, &all)?.frobenius_relative))
    });
    rec.check("su2.jz_jminus", p(), || {
        let minus = g.jminus.scale_real(-1.0);
        Ok(Measured::residual(commutator_residual(&g.jz, &g.jminus, &minus, &all)?.frobenius_relative))
    });
    rec.check("su2.jplus_jminus", p(), || {
        let two_jz = g.jz.scale_real(2.0);
        Ok(Measured::residual(commutator_residual(&g.jplus, &g.jminus, &two_jz, &all)?.frobenius_relative))
    });
    rec.check("su2.n_jz", p(), || {
        Ok(Measured::residual(commutator_residual(&g.ntot, &g.jz, &zero, &all)?.frobenius_relative))
    });
    rec.check("su2.n_jpm", p(), || {
        let a = commutator_residual(&g.ntot, &g.jplus, &zero, &all)?.frobenius_relative;
        let b = commutator_residual(&g.ntot, &g.jminus, &zero, &all)?.frobenius_relative;
        Ok(Measured::residual(a.max(b)))
    });
    rec.check("su2.j2_jpm", p(), || {
        let a = commutator_residual(&g.j2, &g.jplus, &zero, &all)?.frobenius_relative;
        let b = commutator_residual(&g.j2, &g.jminus, &zero, &all)?.frobenius_relative;
        Ok(Measured::residual(a.max(b)))
    });
    rec.check("su2.one_particle_casimir", p(), || {
        let idx: Vec<usize> = (0..basis.len()).filter(|&i| basis.total_of(i) == 1).collect();
        if idx.is_empty() {
            return Err(Error::ParticleNumberOutOfRange { n: 1, n_max: basis.n_max() });
        }
        let c = (s * (s + 1)) as f64;
        let mut dev: f64 = 0.0;
        for &a in &idx {
            for &b in &idx {
                let want = if a == b { c } else { 0.0 };
                dev = dev.max((g.j2.get(a, b) - C64::new(want, 0.0)).norm());
            }
        }
        Ok(Measured::residual_with(dev / c, format!("J² = {c} on the {}-dimensional one-particle space", idx.len())))
    });
    rec.check("su2.jordan_homomorphism", p(), || {
        let d = 2 * s as usize + 1;
        let x = DMatrix::from_fn(d, d, |i, j| {
            C64::new(((i + 2 * j) % 3) as f64 - 1.0, ((i * j) % 2) as f64)
        });
        let y = DMatrix::from_fn(d, d, |i, j| {
            let re = if i == j { i as f64 } else if i + 1 == j { 1.0 } else { 0.0 };
            let im = if j + 1 == i { 0.5 } else { 0.0 };
            C64::new(re, im)
        });
        let bracket = &x * &y - &y * &x;
        let xb = jordan_schwinger(basis, &x)?;
        let yb = jordan_schwinger(basis, &y)?;
        let expected = jordan_schwinger(basis, &bracket)?;
        Ok(Measured::residual(commutator_residual(&xb, &yb, &expected, &all)?.frobenius_relative))
    });
}

fn casimir_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let g = &stack.generators;
    rec.check("casimir.jhat_definition", CheckParams::spin(s).margin(0), || {
        let jh = &stack.jhat;
        let lhs = jh * &(jh + &SparseOperator::identity(stack.basis()));
        Ok(Measured::residual(residual(&lhs, &g.j2, 0)?.frobenius_relative))
    });
    rec.check("casimir.jhat_integer", CheckParams::spin(s), || {
        let mut worst: f64 = 0.0;
        for (sector, labels) in stack.spectrum.labeled_sectors() {
            for (&x, &j) in sector.eigenvalues.iter().zip(labels) {
                if j > sector.n * s {
                    return Ok(Measured::exact(
                        false,
                        format!("j = {j} exceeds n·s in sector (n={}, w={})", sector.n, sector.weight),
                    ));
                }
                let jf = j_from_casimir(x);
                worst = worst.max((jf - jf.round()).abs());
            }
        }
        Ok(Measured::residual_with(worst, "largest distance of a ĵ eigenvalue to an integer"))
    });
    rec.check("casimir.kernel_multiplicity", CheckParams::spin(s), || {
        for n in 0..=stack.n_max() {
            let mut found: BTreeMap<u32, usize> = BTreeMap::new();
            for v in jz_kernel(stack.basis(), g, n)? {
                *found.entry(v.j).or_default() += 1;
            }
            let expected = weight_count_multiplicities(s, n);
            if found != expected {
                return Ok(Measured::exact(
                    false,
                    format!("n={n}: kernel labels {found:?}, weight counting {expected:?}"),
                ));
            }
        }
        Ok(Measured::exact(true, "one kernel state per irrep for every n"))
    });
}

fn family_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let basis = stack.basis();
    let fam = &stack.families;
    rec.check("families.p0", CheckParams::spin(s).margin(0), || {
        let two_a0 = SparseOperator::creation(basis, 0)?.scale_real(2.0);
        Ok(Measured::residual(residual(fam.p(0), &two_a0, 0)?.frobenius_relative))
    });
    // On a†_0|0⟩: J_±^k a†_0|0⟩ = ∏√((s+i)(s−i+1)) a†_{±k}|0⟩, so
    // p†_k a†_0|0⟩ = 2|1_{−k}, 1_k⟩ and m†_k a†_0|0⟩ = 0.
    rec.check("families.definition", CheckParams::spin(s), || {
        if basis.n_max() < 2 {
            return Err(Error::ParticleNumberOutOfRange { n: 2, n_max: basis.n_max() });
        }
        let slots = 2 * s as usize + 1;
        let center = s as usize;
        let ket = |occ: Vec<u32>| -> Result<Vec<C64>> {
            let i = basis
                .state_index(&FockState::new(occ))?
                .expect("state within truncation");
            let mut v = vec![C64::new(0.0, 0.0); basis.len()];
            v[i] = C64::new(1.0, 0.0);
            Ok(v)
        };
        let mut one = vec![0; slots];
        one[center] = 1;
        let start = ket(one)?;
        let dist = |x: &[C64], y: &[C64]| -> f64 {
            x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
        };
        let mut two = vec![0; slots];
        two[center] = 2;
        let mut worst = dist(&fam.p(0).apply(&start), &ket(two)?.iter().map(|z| z * 8f64.sqrt()).collect::<Vec<_>>()) / 8f64.sqrt();
        for k in 1..=s {
            let mut pair = vec![0; slots];
            pair[center - k as usize] = 1;
            pair[center + k as usize] = 1;
            let want: Vec<C64> = ket(pair)?.iter().map(|z| z * 2.0).collect();
            worst = worst.max(dist(&fam.p(k).apply(&start), &want) / 2.0);
            let m = fam.m(k).expect("m†_k exists for 1 ≤ k ≤ s");
            worst = worst.max(m.apply(&start).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / 2.0);
        }
        Ok(Measured::residual(worst))
    });
    rec.check("families.number_shift", CheckParams::spin(s).margin(1), || {
        let restriction = Restriction::interior(1);
        let zero = SparseOperator::zero(basis);
        let g = &stack.generators;
        let mut worst: f64 = 0.0;
        for op in fam.p_ops.iter().chain(&fam.m_ops) {
            worst = worst.max(commutator_residual(&g.ntot, op, op, &restriction)?.frobenius_relative);
            worst = worst.max(commutator_residual(&g.jz, op, &zero, &restriction)?.frobenius_relative);
        }
        Ok(Measured::residual(worst))
    });
}

fn alpha_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let g = &stack.generators;
    for family in [Family::P, Family::M] {
        let alpha = stack.alpha(family);
        let ops = stack.families.ops(family);
        rec.check("alpha.tridiagonal", CheckParams::spin(s).family(family), || {
            Ok(Measured::exact(alpha.is_tridiagonal(), format!("{0}×{0}", alpha.size())))
        });
        let tol = rec.tolerance("alpha.closure");
        rec.check("alpha.closure", CheckParams::spin(s).family(family).margin(1), || {
            let reports = alpha.verify(&g.j2, ops, &stack.spectrum, &Restriction::kernel(1), tol)?;
            Ok(Measured::residual(reports.iter().map(|r| r.frobenius_relative).fold(0.0, f64::max)))
        });
        rec.check("alpha.extraction", CheckParams::spin(s).family(family).margin(1), || {
            let mut worst: f64 = 0.0;
            let mut fitted = 0;
            for col in 0..alpha.size() {
                for ex in extract_coefficients(&g.j2, ops, &stack.spectrum, col, &Restriction::kernel(1))? {
                    fitted += 1;
                    worst = worst.max(ex.fit_residual);
                    for (row, &c) in ex.coefficients.iter().enumerate() {
                        let want = alpha.entry(row, col).eval(ex.j as f64);
                        worst = worst.max((c - want).abs() / (1.0 + want.abs()));
                    }
                }
            }
            if fitted == 0 {
                // Nothing to fit only if the family kills every kernel state.
                let kernel = Restriction::kernel(1);
                let mut largest: f64 = 0.0;
                for op in ops {
                    largest = largest.max(op.restricted_norm(&kernel)?);
                }
                return Ok(Measured::exact(
                    largest < 1e-12,
                    format!("no kernel vector determines the coefficients; family norm on the kernel {}", relative(largest)),
                ));
            }
            Ok(Measured::residual_with(worst, format!("{fitted} kernel vectors fitted")))
        });
        for &k in alpha.indices.iter().filter(|&&k| k >= 1) {
            rec.check(
                "alpha.full_closure",
                CheckParams::spin(s).family(family).k(k).margin(1),
                || Ok(Measured::residual(full_closure_residual(stack, family, k, ClosureForm::Derived)?.frobenius_relative)),
            );
        }
    }

    // Diagonal s(s+1) − 4k for the P family, as sometimes quoted.
    let derived = stack.alpha(Family::P);
    let mut stated = derived.clone();
    let si = s as i64;
    for (i, &k) in derived.indices.iter().enumerate() {
        stated.entries[i][i] = JPoly::int(si * (si + 1) - 4 * k as i64);
    }
    if stated != *derived {
        let evidence = match stated.verify(
            &g.j2,
            stack.families.ops(Family::P),
            &stack.spectrum,
            &Restriction::kernel(1),
            rec.tolerance("alpha.closure"),
        ) {
            Ok(_) => "stated diagonal also verifies".to_string(),
            Err(e) => e.to_string(),
        };
        let diag = |a: &AlphaMatrix| {
            (0..a.size()).map(|i| a.entry(i, i).to_string()).collect::<Vec<_>>().join(", ")
        };
        rec.note(
            "P-family closure diagonal",
            s,
            format!("s(s+1) − 4k: [{}]", diag(&stated)),
            format!("(s+k+1)(s−k) − k(k−1): [{}]", diag(derived)),
            evidence,
        );
    }

    match full_closure_residual(stack, Family::P, 1, ClosureForm::Factored) {
        Ok(r) if !r.passes(rec.tolerance("alpha.full_closure")) => rec.note(
            "full [J², T_k] relation off the J_z kernel",
            s,
            "T_{k−1}((ĵ+J_z+1)(ĵ−J_z) − k(k−1)) + 2k(T'_k + T'_{k−1})J_z",
            "T_{k−1}(J² − J_z² − k(k−1)) − ((2k−1)T'_{k−1} + 2k T'_k)J_z",
            format!(
                "factored form residual {} for [J², p†_1] on the interior at margin 1",
                relative(r.frobenius_relative)
            ),
        ),
        Ok(_) => {}
        Err(e) => rec.note(
            "full [J², T_k] relation off the J_z kernel",
            s,
            "factored form",
            "derived form",
            format!("could not evaluate: {e}"),
        ),
    }
}

fn symbolic_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let si = s as i64;
    let mut sigmas = Vec::new();
    for theta in -si..=si {
        let family = Family::for_theta(s, theta);
        let alpha = stack.alpha(family);
        let other = stack.alpha(match family {
            Family::P => Family::M,
            Family::M => Family::P,
        });
        rec.check("symbolic.right_function", CheckParams::spin(s).theta(theta).family(family), || {
            let det = alpha.determinant_certificate(theta);
            let wrong = other.determinant_certificate(theta);
            Ok(Measured::exact(
                det.is_zero() && !wrong.is_zero(),
                format!("det = {det}; other family gives {wrong}"),
            ))
        });
        let mut solved = None;
        rec.check("symbolic.sigma_consistency", CheckParams::spin(s).theta(theta).family(family), || {
            let sv = solve_sigma(alpha, theta)?;
            let detail = sv.sigmas.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            solved = Some(sv);
            Ok(Measured::exact(true, format!("σ = [{detail}]")))
        });
        let Some(sv) = solved else { continue };
        rec.check("symbolic.sigma_degree", CheckParams::spin(s).theta(theta).family(family), || {
            let mut degrees = Vec::new();
            let mut ok = true;
            for (&k, p) in sv.indices.iter().zip(&sv.sigmas) {
                let d = p.degree();
                ok &= d.is_none_or(|d| d as u32 <= s - k);
                degrees.push(format!("{k}:{}", d.map_or("-".to_string(), |d| d.to_string())));
            }
            Ok(Measured::exact(ok, format!("degrees {}", degrees.join(" "))))
        });
        if let Some(next) = sv.sigma(s - 1) {
            let closed = sigma_next_to_last_closed_form(s, theta);
            // At s = 1 the p†_0 = 2a†_0 factor halves the coefficient.
            let expected = if s == 1 { closed.div_scalar(&crate::ladder::rational(2, 1)) } else { closed.clone() };
            rec.check("symbolic.sigma_closed_form", CheckParams::spin(s).theta(theta).k(s - 1), || {
                Ok(Measured::exact(next == &expected, format!("σ_{} = {next}", s - 1)))
            });
            if next != &closed {
                rec.note(
                    "closed form of σ_{s−1}",
                    s,
                    format!("ĵθ/s + (θ² + θ + s² − s)/(2s) = {closed} at θ = {theta}"),
                    format!("{next}"),
                    "exact back-substitution; the divisor at s = 1 is 2s(s+1) = 4 because p†_0 = 2a†_0",
                );
            }
        }
        sigmas.push(sv);
    }
    for theta in [si + 1, -si - 1] {
        let family = Family::for_theta(s, theta);
        rec.check("symbolic.negative_control", CheckParams::spin(s).theta(theta).family(family), || {
            let det = stack.alpha(family).determinant_certificate(theta);
            Ok(Measured::exact(!det.is_zero(), format!("det = {det}")))
        });
    }
    rec.check("symbolic.jpoly_roundtrip", CheckParams::spin(s), || {
        let mut count = 0;
        for sv in &sigmas {
            for p in &sv.sigmas {
                let text = serde_json::to_string(&p.to_json_value())?;
                if &JPoly::parse_json(&text)? != p {
                    return Ok(Measured::exact(false, format!("{p} does not survive {text}")));
                }
                count += 1;
            }
        }
        Ok(Measured::exact(true, format!("{count} polynomials")))
    });
}

fn tau_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let j2 = &stack.generators.j2;
    let restriction = Restriction::kernel(1);
    for tau in stack.taus() {
        let p = || CheckParams::spin(s).theta(tau.theta).margin(1);
        rec.check("tau.ladder", p(), || Ok(Measured::residual(tau.certificate.ladder.frobenius_relative)));
        rec.check("tau.jhat_shift", p(), || Ok(Measured::residual(tau.certificate.shift.frobenius_relative)));
        let right = poly_operator(&stack.spectrum, &tau.right_function).map_err(|e| e.to_string());
        let upstream = |r: &std::result::Result<SparseOperator, String>| r.clone().map_err(Error::Upstream);
        let tol = rec.tolerance("tau.power_identity");
        rec.check("tau.power_identity", p().k(2), || {
            let right = upstream(&right)?;
            Ok(Measured::residual(check_power_identity(j2, &tau.op, &right, 2, &restriction, tol)?.frobenius_relative))
        });
        let tol = rec.tolerance("tau.compose_number");
        rec.check("tau.compose_number", p(), || {
            let right = upstream(&right)?;
            Ok(Measured::residual(
                check_rlo_compose(j2, &tau.op, &right, &stack.generators.ntot, &restriction, tol)?.frobenius_relative,
            ))
        });
        let tol = rec.tolerance("tau.compose_resolvent");
        rec.check("tau.compose_resolvent", p().k(1), || {
            let right = upstream(&right)?;
            let r1 = resolvent(stack, 1)?;
            Ok(Measured::residual(check_rlo_compose(j2, &tau.op, &right, &r1, &restriction, tol)?.frobenius_relative))
        });
    }
}

fn resolvent_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let mut worst_misplaced: f64 = 0.0;
    for tau in stack.taus() {
        for k in 0..=2u32 {
            for (name, form) in [("resolvent.left", ResolventForm::Left), ("resolvent.right", ResolventForm::Right)] {
                rec.check(name, CheckParams::spin(s).theta(tau.theta).k(k).margin(1), || {
                    Ok(Measured::residual(resolvent_commutator_check(stack, tau, k, form)?.frobenius_relative))
                });
            }
            if tau.theta != 0 {
                if let Ok(r) = resolvent_commutator_check(stack, tau, k, ResolventForm::LeftFunctionOnRight) {
                    worst_misplaced = worst_misplaced.max(r.frobenius_relative);
                }
            }
        }
    }
    if worst_misplaced > rec.tolerance("resolvent.right") {
        rec.note(
            "right form of the resolvent commutator",
            s,
            "[R_k, τ†_θ] = τ†_θ(R_k − R_{k−θ})",
            "[R_k, τ†_θ] = τ†_θ(R_{k+θ} − R_k)",
            format!("stated form residual up to {} over θ ≠ 0, k = 0..2", relative(worst_misplaced)),
        );
    }
}

fn lattice_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let taus = stack.taus();
    let mut report: Option<KernelLatticeReport> = None;
    rec.check("lattice.scheme", CheckParams::spin(s), || {
        let r = lattice_report(stack, taus)?;
        let detail = format!(
            "{} nodes, {} arrows, every image inside its target node",
            r.nodes.len(),
            r.arrows.len()
        );
        report = Some(r);
        Ok(Measured::exact(true, detail))
    });
    if let Some(report) = &report {
        for claim in annihilation_claims(report) {
            // The parity statement is made for s = 1, 2 only; beyond that
            // it is evaluated and any counterexample goes to the ledger.
            if s > 2 && claim.claim.contains("trivial kernel") {
                if !claim.holds {
                    let w = claim.omega;
                    let missing: Vec<(u32, u32)> = claim
                        .offending
                        .iter()
                        .filter(|&&(n, j)| report.node(n + 1, j + w).is_none())
                        .copied()
                        .collect();
                    rec.note(
                        "parity rule for the kernel of τ†_ω",
                        s,
                        format!("τ†_{w} has trivial kernel on interior kernel states since {w} ≡ s (mod 2)"),
                        format!("τ†_{w} annihilates the nodes {:?}", claim.offending),
                        format!("no target node (n+1, j+{w}) exists for {missing:?}"),
                    );
                }
                continue;
            }
            rec.check("lattice.claim", CheckParams::spin(s).theta(claim.omega as i64), || {
                let mut detail = format!("{} ({} nodes checked)", claim.claim, claim.checked);
                if !claim.offending.is_empty() {
                    detail.push_str(&format!("; fails at (n, j) {:?}", claim.offending));
                }
                Ok(Measured::exact(claim.holds && claim.checked > 0, detail))
            });
        }
        if taus.iter().any(|t| t.theta == 0) {
            rec.check("lattice.tau0_preserves_j", CheckParams::spin(s).theta(0), || {
                let arrows: Vec<_> = report.arrows_for(Direction::Raise, 0).collect();
                let moving = arrows.iter().filter(|a| !a.annihilated).count();
                let ok = arrows.iter().all(|a| a.annihilated || a.target_j == a.j as i64);
                Ok(Measured::exact(
                    ok,
                    format!("{moving} of {} nodes mapped to (n+1, j)", arrows.len()),
                ))
            });
        }
    }
    rec.check("lattice.irrep_dimensions", CheckParams::spin(s), || {
        let mut seen = Vec::new();
        for n in 0..=stack.n_max().min(3) {
            for v in jz_kernel(stack.basis(), &stack.generators, n)? {
                let mut weights = irrep_weights(stack, &v.amplitudes);
                weights.sort_unstable();
                let j = v.j as i64;
                if weights != (-j..=j).collect::<Vec<_>>() {
                    return Ok(Measured::exact(false, format!("(n={n}, j={j}) reaches weights {weights:?}")));
                }
                seen.push(2 * j + 1);
            }
        }
        seen.sort_unstable();
        seen.dedup();
        Ok(Measured::exact(true, format!("irrep dimensions {seen:?}")))
    });
    rec.check("lattice.multiplicity_oracle", CheckParams::spin(s), || {
        let lattice = lattice_multiplicities(stack, taus)?;
        let brute = brute_force_multiplicities(stack);
        for n in 0..=stack.n_max() {
            let l = lattice.get(&n).cloned().unwrap_or_default();
            let b = brute.get(&n).cloned().unwrap_or_default();
            let w = weight_count_multiplicities(s, n);
            if l != b || b != w {
                return Ok(Measured::exact(
                    false,
                    format!("n={n}: lattice {l:?}, J² {b:?}, weight counting {w:?}"),
                ));
            }
        }
        Ok(Measured::exact(true, format!("n = 0..{} agree", stack.n_max())))
    });
}

fn deformed_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    for omega in 1..=s {
        let w = omega as i64;
        let p = || CheckParams::spin(s).theta(-w).margin(2);
        let built = stack
            .tau(-w)
            .ok_or_else(|| Error::Upstream(format!("τ†_{{-{w}}} missing")))
            .and_then(|t| deformed_generators(stack, t))
            .map_err(|e| e.to_string());
        let get = || built.as_ref().map_err(|e| Error::Upstream(e.clone()));
        rec.check("deformed.hermiticity", p(), || {
            let d = get()?;
            Ok(Measured::residual(d.lz_hermiticity.max(d.l2_hermiticity)))
        });
        rec.check("deformed.commutators", p(), || {
            let d = get()?;
            let worst = d.commutators.iter().map(|(_, _, r)| r.frobenius_relative).fold(0.0, f64::max);
            Ok(Measured::residual(worst))
        });
        rec.check("deformed.residue_classes", CheckParams::spin(s).theta(-w), || {
            let classes = residue_classes(stack, omega)?;
            let consistent = classes.iter().all(|c| c.nodes.iter().all(|&(_, j)| j % omega == c.residue));
            let total: usize = classes.iter().map(|c| c.nodes.len()).sum();
            let distinct: std::collections::BTreeSet<_> =
                classes.iter().flat_map(|c| c.nodes.iter().copied()).collect();
            let ok = consistent && total == distinct.len() && classes.len() <= omega as usize && (omega > 1 || classes.len() == 1);
            Ok(Measured::exact(ok, format!("{} classes over {total} nodes", classes.len())))
        });
    }

    let n_sep = stack.n_max().min(4);
    let report = complete_set_check(stack, stack.taus(), n_sep).map_err(|e| e.to_string());
    for tau in stack.taus() {
        rec.check("complete_set.commutators", CheckParams::spin(s).theta(tau.theta).margin(2), || {
            let r = report.as_ref().map_err(|e| Error::Upstream(e.clone()))?;
            let worst = r
                .commutators
                .iter()
                .filter(|(t, _, _)| *t == tau.theta)
                .map(|(_, _, x)| x.frobenius_relative)
                .fold(0.0, f64::max);
            Ok(Measured::residual(worst))
        });
    }
    // Separation is claimed for s ≤ 2; for larger s a failure is a ledger
    // entry carrying the offending spectra.
    if s > 2 {
        if let Ok(r) = &report {
            for x in r.nodes.iter().filter(|x| x.dimension > 1 && x.separating_theta.is_none()) {
                let spectra: Vec<String> = x
                    .spectra
                    .iter()
                    .map(|(t, sp)| {
                        let sp: Vec<String> = sp.iter().map(|v| format!("{v:.6}")).collect();
                        format!("θ={t}: [{}]", sp.join(", "))
                    })
                    .collect();
                rec.note(
                    "τ†τ separation of degenerate kernel nodes",
                    s,
                    "the τ†_θτ_θ distinguish the states of every kernel node",
                    format!("no τ†_θτ_θ has a nondegenerate spectrum on node ({}, {}) of dimension {}", x.n, x.j, x.dimension),
                    spectra.join("; "),
                );
            }
        }
    } else {
        rec.check("complete_set.separation", CheckParams::spin(s), || {
        let r = report.as_ref().map_err(|e| Error::Upstream(e.clone()))?;
        let multi: Vec<String> = r
            .nodes
            .iter()
            .filter(|x| x.dimension > 1)
            .map(|x| match x.separating_theta {
                Some(t) => format!("({}, {}) dim {} separated by θ={t}", x.n, x.j, x.dimension),
                None => format!("({}, {}) dim {} not separated", x.n, x.j, x.dimension),
            })
            .collect();
        let detail = if multi.is_empty() {
            format!("all kernel nodes with n ≤ {n_sep} are one-dimensional")
        } else {
            multi.join("; ")
        };
        Ok(Measured::exact(r.all_separated(), detail))
        });
    }
    if let Ok(r) = &report {
        let noncommuting: Vec<_> = r
            .nodes
            .iter()
            .filter(|x| x.dimension > 1 && x.max_mutual_commutator > 1e-6)
            .collect();
        if !noncommuting.is_empty() {
            let worst = noncommuting.iter().map(|x| x.max_mutual_commutator).fold(0.0, f64::max);
            let nodes: Vec<String> = noncommuting.iter().map(|x| format!("({}, {})", x.n, x.j)).collect();
            rec.note(
                "τ†τ as a complete commuting set",
                s,
                "the τ†_θτ_θ extend {N, J², J_z} to a complete set of commuting operators",
                "inside a multi-dimensional node the τ†_θτ_θ do not commute with one another; a single τ†_θτ_θ with nondegenerate restricted spectrum separates the states",
                format!(
                    "nodes {} have relative mutual commutator up to {}",
                    nodes.join(", "),
                    relative(worst)
                ),
            );
        }
    }
}

fn eigen_worst(checks: &[crate::casimir::NodeEigenCheck], op: &str) -> f64 {
    checks
        .iter()
        .filter(|c| c.operator == op)
        .map(|c| c.residual)
        .fold(0.0, f64::max)
}

fn demo_checks(rec: &mut Recorder, stack: &CasimirStack) {
    let s = stack.spin();
    let basis = stack.basis();
    let n_max = stack.n_max();
    rec.check("demo.families", CheckParams::spin(s).margin(1), || {
        let restriction = Restriction::interior(1);
        let p0 = stack.families.p(0);
        let four = SparseOperator::identity(basis).scale_real(4.0);
        let a = commutator_residual(&p0.adjoint(), p0, &four, &restriction)?.frobenius_relative;
        let kernel = Restriction::kernel(1);
        let m1 = stack.families.m(1).expect("m†_1 exists for s = 1");
        let scale = stack.families.p(1).restricted_norm(&kernel)?;
        let b = m1.restricted_norm(&kernel)? / scale.max(1.0);
        Ok(Measured::residual_with(a.max(b), "[p_0, p†_0] = 4 and m†_1 annihilates the J_z kernel"))
    });
    for theta in [1, -1] {
        rec.check("demo.conventional_match", CheckParams::spin(s).theta(theta), || {
            let m = conventional_match(stack, theta)?;
            if !m.exact {
                return Ok(Measured::exact(false, "σ coefficients differ beyond one global scale"));
            }
            Ok(Measured::residual_with(m.entrywise_residual, format!("conventional = {} · assembled", m.scale)))
        });
    }
    let ops: std::result::Result<DemoOperators, String> = demo_s1_operators(stack).map_err(|e| e.to_string());
    let ops_ref = || ops.as_ref().map_err(|e| Error::Upstream(e.clone()));
    rec.check("demo.weyl", CheckParams::spin(s).margin(2), || {
        Ok(Measured::residual(weyl_residual(stack, ops_ref()?)?.frobenius_relative))
    });
    let n_top = n_max.saturating_sub(1).min(4);
    let eigen = ops
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|o| demo_eigen_checks(stack, o, &o.lz, &o.l2, n_top).map_err(|e| e.to_string()));
    for (name, op) in [("demo.adag_a_eigen", "AdagA"), ("demo.lz_eigen", "Lz"), ("demo.l2_eigen", "L2")] {
        rec.check(name, CheckParams::spin(s), || {
            let checks = eigen.as_ref().map_err(|e| Error::Upstream(e.clone()))?;
            Ok(Measured::residual_with(eigen_worst(checks, op), format!("kernel nodes n ≤ {n_top}")))
        });
    }
    rec.check("demo.canonical_basis", CheckParams::spin(s), || {
        let n_top = n_max.min(4);
        let vectors = canonical_basis_s1(stack, n_top)?;
        let g = &stack.generators;
        let cols: Vec<DVector<C64>> = vectors.iter().map(|v| DVector::from_column_slice(&v.amplitudes)).collect();
        let m = DMatrix::from_columns(&cols);
        let gram = m.adjoint() * &m;
        let mut worst = (gram - DMatrix::<C64>::identity(cols.len(), cols.len()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        for (v, col) in vectors.iter().zip(&cols) {
            let jf = v.j as f64;
            for (op, want) in [(&g.ntot, v.n as f64), (&g.j2, jf * (jf + 1.0)), (&g.jz, v.jz as f64)] {
                let out = DVector::from_vec(op.apply(col.as_slice()));
                worst = worst.max((out - col * C64::new(want, 0.0)).norm() / want.abs().max(1.0));
            }
        }
        Ok(Measured::residual_with(worst, format!("{} vectors, n ≤ {n_top}", vectors.len())))
    });
    let bar = tau_bar_forms(stack).map_err(|e| e.to_string());
    let bar_ref = || bar.as_ref().map_err(|e| Error::Upstream(e.clone()));
    rec.check("demo.double_commutator", CheckParams::spin(s).margin(2), || {
        Ok(Measured::residual(bar_ref()?.double_commutator.frobenius_relative))
    });
    rec.check("demo.tau_bar_ladder", CheckParams::spin(s).margin(1), || {
        let b = bar_ref()?;
        let mut worst = b
            .raising
            .iter()
            .chain(&b.lowering)
            .map(|(_, r)| r.frobenius_relative)
            .fold(0.0, f64::max);
        for &(_, l) in &b.fitted_scale {
            worst = worst.max((l - 1.0).abs());
        }
        Ok(Measured::residual_with(worst, "RLO and LLO residuals and fitted right-function scale"))
    });
    rec.check("demo.tau_bar_collinear", CheckParams::spin(s), || {
        Ok(Measured::residual_with(bar_ref()?.max_collinearity(), "τ̄†_θ v against τ†_θ v per kernel node"))
    });

    // Normalization and factor placement notes.
    if let Ok(m) = conventional_match(stack, 1) {
        if m.scale != "1" {
            let down = conventional_match(stack, -1).map(|d| d.scale).unwrap_or_else(|e| e.to_string());
            rec.note(
                "normalization of τ†_{±1}",
                s,
                "τ†_1 = p†_0(ĵ+1) + 2p†_1, τ†_{−1} = p†_0ĵ − 2p†_1",
                "σ_s = 1: τ†_1 = p†_0(ĵ+1)/2 + p†_1, τ†_{−1} = −p†_0ĵ/2 + p†_1",
                format!("global scales {} and {down}; the demo operators use the conventional form", m.scale),
            );
        }
    }
    if let Ok(o) = &ops {
        let placed_right = lplus_factor_right(stack).and_then(|lp| {
            let lm = lp.adjoint();
            let lz = commutator(&lp, &lm)?.scale_real(0.5);
            let l2 = &(&(&lz * &lz) + &lz) + &(&lm * &lp);
            demo_eigen_checks(stack, o, &lz, &l2, n_top)
        });
        if let Ok(checks) = placed_right {
            let worst = eigen_worst(&checks, "Lz").max(eigen_worst(&checks, "L2"));
            if worst > rec.tolerance("demo.lz_eigen") {
                rec.note(
                    "placement of the L_+ scalar factor",
                    s,
                    "L_+ = τ†_{−1} g(ĵ)",
                    "L_+ = g(ĵ) τ†_{−1}, g evaluated on the outgoing label",
                    format!("factor on the right misses the L_z, L² eigenvalues by up to {}", relative(worst)),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_one_passes_with_ten_demo_checks() {
        let report = run_suite(&SuiteConfig { spins: vec![1], ..Default::default() }).unwrap();
        assert!(report.overall_pass, "{:?}", report.failures().collect::<Vec<_>>());
        let mut demo: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.name.starts_with("demo."))
            .map(|c| c.name.as_str())
            .collect();
        demo.dedup();
        assert_eq!(demo.len(), 10);
        assert!(report.discrepancies.iter().any(|d| d.topic.contains("L_+")));
    }

    #[test]
    fn n_max_one_reports_empty_restrictions() {
        let report = run_suite(&SuiteConfig { spins: vec![1], n_max: 1, ..Default::default() }).unwrap();
        let empty: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.error.as_deref().is_some_and(|e| e.contains("selects no states")))
            .collect();
        assert!(!empty.is_empty());
        assert!(empty.iter().all(|c| !c.pass));
        assert!(!report.overall_pass);
    }

    #[test]
    fn tight_override_fails_one_check() {
        let mut config = SuiteConfig { spins: vec![1], n_max: 3, ..Default::default() };
        config.tolerance_overrides.insert("su2.jz_jplus".into(), 1e-300);
        let report = run_suite(&config).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        // Exact zero residuals still pass a tiny tolerance; anything else fails.
        assert!(failed.iter().all(|&n| n == "su2.jz_jplus"), "{failed:?}");
    }
}
