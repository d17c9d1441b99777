//! Acceptance suite: every structural criterion at its stated tolerance,
//! one printed pass/fail line per criterion. Run with
//! `cargo test -p cstar-discrete --test acceptance -- --nocapture`.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use cstar_discrete::algebra_object::{galois_lattice, group_algebra_object};
use cstar_discrete::crossed_product::{
    expectation_report, freeness_estimate, frobenius_dim_check, peter_weyl_report,
    pp_inequality_check, CrossedAlgebra,
};
use cstar_discrete::examples::cuntz::{CuntzCore, CuntzCrossed};
use cstar_discrete::examples::group::{Cocycle, FiniteGroup, GroupActionModel, TwistedConvOracle};
use cstar_discrete::examples::semicircular::{
    noncrossing_pairing_count, FockSpace, SemicircularModel,
};
use cstar_discrete::linalg::{cr, ONE};
use cstar_discrete::tensor_cat::{group_category, CategoryData};
use cstar_discrete::FgpBimodule;

fn verdict(criterion: usize, pass: bool, detail: String) {
    println!(
        "[{}] criterion {:>2}: {detail}",
        if pass { "PASS" } else { "FAIL" },
        criterion
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_cuntz_watatani_index() {
    let mut worst: f64 = 0.0;
    let mut slowest = 0.0f64;
    for n in [2usize, 3] {
        for depth in [2usize, 3, 4] {
            let t0 = Instant::now();
            let core = CuntzCore::new(n, depth).unwrap();
            let alg = core.algebra();
            let ind = core.watatani_index().unwrap();
            let defect = (&ind - &alg.unit().scale(cr((n * n) as f64))).operator_norm();
            worst = worst.max(defect);
            slowest = slowest.max(t0.elapsed().as_secs_f64());
        }
    }
    verdict(
        1,
        worst < 1e-8 && slowest < 30.0,
        format!("watatani index n^2*1 for n in {{2,3}}, depths 2..4: worst defect {worst:.2e}, slowest config {slowest:.1}s (< 30s)"),
    );
}

#[test]
fn criterion_02_cuntz_left_basis_and_end() {
    let mut worst: f64 = 0.0;
    let mut end_ok = true;
    for n in [2usize, 3] {
        for depth in [2usize, 3, 4] {
            let core = CuntzCore::new(n, depth).unwrap();
            worst = worst.max(core.left_basis_gram_defect().unwrap());
            worst = worst.max(core.left_reconstruction_defect().unwrap());
            if core.end_dimension() != n * n {
                end_ok = false;
            }
        }
    }
    verdict(
        2,
        worst < 1e-8 && end_ok,
        format!("left-basis orthonormality defect {worst:.2e} and End dimension = n^2 exactly"),
    );
}

struct GroupConfig {
    group: Arc<FiniteGroup>,
    model: Arc<GroupActionModel>,
    category: Arc<CategoryData>,
    cocycle: Cocycle,
    cp: CrossedAlgebra,
    name: String,
}

fn inner_group_config(name: &str, cocycle: Option<Cocycle>) -> GroupConfig {
    let group = FiniteGroup::by_name(name).unwrap();
    let model = GroupActionModel::inner_regular(&group);
    let category = group_category(&model, 1e-9).unwrap();
    let cocycle = cocycle.unwrap_or_else(|| Cocycle::trivial(&group));
    let all: Vec<usize> = (0..group.order()).collect();
    let object = group_algebra_object(&category, &group, &all, &cocycle).unwrap();
    let cp = CrossedAlgebra::new(category.clone(), object, all).unwrap();
    GroupConfig {
        group,
        model,
        category,
        cocycle,
        cp,
        name: name.to_string(),
    }
}

fn criterion3_configs() -> Vec<GroupConfig> {
    let mut out = vec![
        inner_group_config("z2", None),
        inner_group_config("z3", None),
        inner_group_config("z4", None),
        inner_group_config("z2xz2", None),
        inner_group_config("z2xz2", Some(Cocycle::sign_z2z2())),
        inner_group_config("s3", None),
    ];
    // a permutation realization exercises the same tables on a commutative
    // multi-block algebra
    let group = FiniteGroup::symmetric(3);
    let model = GroupActionModel::permutation_translation(&group);
    let category = group_category(&model, 1e-9).unwrap();
    let cocycle = Cocycle::trivial(&group);
    let all: Vec<usize> = (0..6).collect();
    let object = group_algebra_object(&category, &group, &all, &cocycle).unwrap();
    let cp = CrossedAlgebra::new(category.clone(), object, all).unwrap();
    out.push(GroupConfig {
        group,
        model,
        category,
        cocycle,
        cp,
        name: "s3-permutation".into(),
    });
    out
}

#[test]
fn criterion_03_group_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    for cfg in criterion3_configs() {
        let oracle = TwistedConvOracle::new(cfg.model.clone(), cfg.cocycle.clone()).unwrap();
        let alg = cfg.model.algebra().clone();
        let units = alg.basis_units();
        for g in 0..cfg.group.order() {
            let kg = cfg.category.simple(g);
            for a in &units {
                let va = kg.element_as_vector(a);
                let mut fib = DVector::zeros(1);
                fib[0] = ONE;
                let xg = cfg.cp.pure(g, &va, &fib).unwrap();
                let og = oracle.monomial(g, a.clone());
                for h in 0..cfg.group.order() {
                    let kh = cfg.category.simple(h);
                    for b in &units {
                        let vb = kh.element_as_vector(b);
                        let mut fib2 = DVector::zeros(1);
                        fib2[0] = ONE;
                        let yh = cfg.cp.pure(h, &vb, &fib2).unwrap();
                        let oh = oracle.monomial(h, b.clone());
                        let prod = cfg.cp.mul(&xg, &yh).unwrap();
                        let oprod = oracle.mul(&og, &oh);
                        for c in 0..cfg.group.order() {
                            let k = cfg.category.simple(c);
                            let elem = match prod.terms.get(&c) {
                                None => alg.zero(),
                                Some(m) => {
                                    let flat = DVector::from_iterator(
                                        m.nrows(),
                                        m.column(0).iter().cloned(),
                                    );
                                    k.vector_as_element(&k.flat_to_vector(&flat))
                                }
                            };
                            let expect =
                                oprod.coeffs.get(&c).cloned().unwrap_or_else(|| alg.zero());
                            worst = worst.max((&elem - &expect).operator_norm());
                        }
                        let e1 = cfg.cp.expectation(&prod);
                        let e2 = oracle.expectation(&oprod);
                        worst = worst.max((&e1 - &e2).operator_norm());
                    }
                }
            }
        }
    }
    verdict(
        3,
        worst < 1e-10,
        format!("crossed multiplication tables match the twisted-convolution oracle entrywise: worst defect {worst:.2e}"),
    );
}

#[test]
fn criterion_04_galois_lattices() {
    let t0 = Instant::now();
    let names = [
        "z2", "z3", "z4", "z5", "z6", "z7", "z8", "z9", "z10", "z12", "z24", "z2xz2", "z2xz4",
        "z3xz3", "z2xz2xz2", "s3", "d4", "q8", "a4", "d6", "s4",
    ];
    let mut all_ok = true;
    let mut checked = 0;
    for name in names {
        let group = FiniteGroup::by_name(name).unwrap();
        assert!(group.order() <= 24);
        let model = GroupActionModel::permutation_translation(&group);
        let category = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..group.order()).collect();
        let object =
            group_algebra_object(&category, &group, &all, &Cocycle::trivial(&group)).unwrap();
        let lattice = galois_lattice(&object, 1 << 20).unwrap();
        let mut found: Vec<Vec<usize>> = lattice.into_iter().map(|n| n.support).collect();
        found.sort();
        let mut expected = group.subgroups();
        expected.sort();
        if found != expected {
            all_ok = false;
            eprintln!("lattice mismatch for {name}: {} vs {}", found.len(), expected.len());
        }
        checked += 1;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        4,
        all_ok && elapsed < 120.0,
        format!("galois lattice = subgroup lattice for {checked} groups of order <= 24 in {elapsed:.1}s (< 120s)"),
    );
}

#[test]
fn criterion_05_frobenius_dimensions() {
    let mut all_ok = true;
    let mut worst: f64 = 0.0;
    // group configurations
    for name in ["z2", "z3", "z4", "z2xz2"] {
        let cfg = inner_group_config(name, None);
        for c in 0..cfg.group.order() {
            let rep = frobenius_dim_check(&cfg.cp, c).unwrap();
            all_ok &= rep.dims_equal;
            worst = worst.max(rep.roundtrip_defect);
        }
    }
    {
        // a commutative multi-block realization
        let group = FiniteGroup::symmetric(3);
        let model = GroupActionModel::permutation_translation(&group);
        let category = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let object =
            group_algebra_object(&category, &group, &all, &Cocycle::trivial(&group)).unwrap();
        let cp = CrossedAlgebra::new(category, object, all).unwrap();
        for c in 0..6 {
            let rep = frobenius_dim_check(&cp, c).unwrap();
            all_ok &= rep.dims_equal;
            worst = worst.max(rep.roundtrip_defect);
        }
    }
    // cuntz configurations
    for (n, depth, window) in [(2usize, 2usize, 2i64), (2, 3, 2), (3, 2, 1)] {
        let cp = CuntzCrossed::new(n, depth, window).unwrap();
        for label in -window..=window {
            let rep = cp.label_report(label).unwrap();
            all_ok &= rep.dims_equal;
            worst = worst.max(rep.roundtrip_defect);
        }
    }
    verdict(
        5,
        all_ok && worst < 1e-8,
        format!("hom-space dimensions agree at every window label; worst round-trip defect {worst:.2e}"),
    );
}

#[test]
fn criterion_06_peter_weyl() {
    let mut ok = true;
    for name in ["z2", "z3", "z4", "z2xz2", "s3"] {
        let cfg = inner_group_config(name, None);
        let pw = peter_weyl_report(&cfg.cp).unwrap();
        // n_c = dim B(c) = 1 at every group label, and the windowed dimension
        // bookkeeping closes
        ok &= pw.multiplicities.iter().all(|&m| m == 1);
        ok &= pw.sum_matches_dimension;
        ok &= pw.commutant_profile.iter().all(|&m| m == 1);
        // relative-commutant block profile: sum of squares over labels
        let total: usize = pw.commutant_profile.iter().map(|&m| m * m).sum();
        ok &= total == cfg.group.order();
    }
    for (n, depth, window) in [(2usize, 2usize, 2i64), (3, 2, 1)] {
        let cp = CuntzCrossed::new(n, depth, window).unwrap();
        let (mults, dim_ok) = cp.peter_weyl().unwrap();
        ok &= mults.iter().all(|&(_, m)| m == 1);
        ok &= dim_ok;
    }
    verdict(
        6,
        ok,
        "peter-weyl multiplicities equal the fiber dimensions and the windowed dimension count closes".into(),
    );
}

#[test]
fn criterion_07_expectation_faithful_positive() {
    let mut ok = true;
    let mut min_norm = f64::INFINITY;
    for (name, cocycle) in [
        ("z4", None),
        ("z2xz2", Some(Cocycle::sign_z2z2())),
        ("s3", None),
    ] {
        let cfg = inner_group_config(name, cocycle);
        let rep = expectation_report(&cfg.cp, 500, 2024, 1e-9).unwrap();
        ok &= rep.positivity_failures == 0 && rep.faithfulness_failures == 0;
        min_norm = min_norm.min(rep.min_nonzero_norm);
        let _ = &cfg.name;
    }
    {
        let cp = CuntzCrossed::new(2, 3, 2).unwrap();
        let (pos, faith) = cp.expectation_report(500, 2024, 1e-9).unwrap();
        ok &= pos == 0 && faith == 0;
    }
    verdict(
        7,
        ok && min_norm > 1e-12,
        format!("E(x*x) positive and faithful over 500 seeded elements per configuration; min nonzero norm {min_norm:.2e}"),
    );
}

#[test]
fn criterion_08_pimsner_popa_inequality() {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for name in ["z2", "z3", "z4", "z2xz2", "s3"] {
        let cfg = inner_group_config(name, None);
        for c in 0..cfg.group.order() {
            let rep = pp_inequality_check(&cfg.cp, c, 100, 77, 1e-9).unwrap();
            ok &= rep.violations == 0 && rep.middle_positive && rep.middle_commutes;
            worst = worst.max(rep.worst_slack);
        }
    }
    for (n, depth, window) in [(2usize, 3usize, 2i64), (3, 2, 1)] {
        let cp = CuntzCrossed::new(n, depth, window).unwrap();
        for label in 0..=window {
            let (violations, slack) = cp.pp_inequality(label, 100, 77).unwrap();
            ok &= violations == 0;
            worst = worst.max(slack);
        }
    }
    verdict(
        8,
        ok,
        format!("both inequalities hold for 100 seeded samples per embedded irreducible; worst slack {worst:.2e} (<= 1e-9)"),
    );
}

#[test]
fn criterion_09_semicircular_moments() {
    let fock = FockSpace::build(SemicircularModel::scalar(6)).unwrap();
    let mut worst: f64 = 0.0;
    for (m, expect) in [(1usize, 1.0f64), (2, 2.0), (3, 5.0)] {
        assert_eq!(noncrossing_pairing_count(m), expect as usize);
        let moment = fock.moment(&vec![0usize; 2 * m]).unwrap();
        worst = worst.max((moment.trace().re - expect).abs());
    }
    let fock2 = FockSpace::build(SemicircularModel::m2_pair(2)).unwrap();
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let alg = fock2.model.algebra.clone();
    let mut worst_cov: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for _ in 0..20 {
                let a = alg.random_element(&mut rng);
                let op = fock2.field_operator(i) * fock2.left_action(&a) * fock2.field_operator(j);
                let e = fock2.vacuum_expectation(&op);
                let expect = fock2.model.eta(i, j, &a);
                worst_cov = worst_cov.max((&e - &expect).operator_norm());
            }
        }
    }
    verdict(
        9,
        worst < 1e-10 && worst_cov < 1e-10,
        format!("scalar moments (1, 2, 5) defect {worst:.2e}; covariance identity defect {worst_cov:.2e}"),
    );
}

#[test]
fn criterion_10_freeness_probe() {
    let group = FiniteGroup::cyclic(5);
    let model = GroupActionModel::permutation_translation(&group);
    let k = model.bimodule(2, 1e-9).unwrap();
    let xi = k.element_as_vector(&model.algebra().unit());
    let est = freeness_estimate(&k, &xi, 5, 4, 314);
    let t = FgpBimodule::trivial(model.algebra(), 1e-9).unwrap();
    let unit = t.element_as_vector(&model.algebra().unit());
    let est1 = freeness_estimate(&t, &unit, 5, 4, 315);
    verdict(
        10,
        est < 1e-12 && (est1 - 1.0).abs() < 1e-9,
        format!("translation estimate {est:.2e} (< 1e-12); unit vector estimate {est1:.12}"),
    );
}

#[test]
fn criterion_11_cross_depth_stability() {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let mut prev: Option<(f64, f64, usize)> = None;
        for depth in [2usize, 3, 4] {
            let core = CuntzCore::new(n, depth).unwrap();
            let alg = core.algebra();
            let ind_defect = (&core.watatani_index().unwrap()
                - &alg.unit().scale(cr((n * n) as f64)))
                .operator_norm();
            let gram_defect = core.left_basis_gram_defect().unwrap();
            let end = core.end_dimension();
            if let Some((pi, pg, pe)) = prev {
                worst = worst.max((ind_defect - pi).abs()).max((gram_defect - pg).abs());
                ok &= pe == end;
            }
            prev = Some((ind_defect, gram_defect, end));
        }
    }
    verdict(
        11,
        ok && worst < 1e-8,
        format!("index, basis and End quantities identical across consecutive depths; worst drift {worst:.2e}"),
    );
}
