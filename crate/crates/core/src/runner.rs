//! Check-suite orchestration: a configuration names a model family; a suite
//! names the battery of checks to run over it. Reports are deterministic for
//! a fixed (config, seed) pair.

use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra_object::{
    check_algebra_object, galois_lattice, group_algebra_object, restrict_to_node, trivial_object,
    GradedAlgebraObject,
};
use crate::config::{ActionSpec, ObjectSpec, RunConfig};
use crate::crossed_product::{
    bounded_multiplier_check, delta_roundtrip_check, expectation_report, freeness_estimate,
    frobenius_dim_check, galois_compatibility_check, peter_weyl_report, pqn_membership_report,
    CrossedAlgebra,
};
use crate::examples::cuntz::{CuntzAlgebraObject, CuntzCore, CuntzCrossed};
use crate::examples::group::{Cocycle, FiniteGroup, GroupActionModel, TwistedConvOracle};
use crate::examples::semicircular::{noncrossing_pairing_count, FockSpace, SemicircularModel};
use crate::linalg::ONE;
use crate::report::{CheckRecord, RunReport};
use crate::tensor_cat::{group_category, CategoryData};
use crate::{Error, Result};

pub const SUITES: &[&str] = &[
    "axioms",
    "crossed",
    "peter-weyl",
    "frobenius",
    "galois",
    "freeness",
    "cuntz",
    "semicircular",
    "all",
];

/// Run the named suite for a configuration; the report carries one record
/// per executed check.
pub fn run_checks(config: &RunConfig, suite: &str) -> Result<RunReport> {
    config.validate()?;
    if !SUITES.contains(&suite) {
        return Err(Error::Config(format!(
            "unknown suite '{suite}' (expected one of {SUITES:?})"
        )));
    }
    let hash = config.hash();
    let mut report = RunReport::new(&hash, config.run.seed, suite);
    match &config.action {
        ActionSpec::Group { group, model } => {
            run_group_suites(config, suite, group, model, &mut report)?;
        }
        ActionSpec::Cuntz { n, depth } => {
            run_cuntz_suites(config, suite, *n, *depth, &mut report)?;
        }
        ActionSpec::Semicircular { family, degree_cap } => {
            if !matches!(suite, "semicircular" | "all") {
                return Err(Error::Config(format!(
                    "suite '{suite}' does not apply to a semicircular action"
                )));
            }
            run_semicircular_suite(config, family, *degree_cap, &mut report)?;
        }
    }
    Ok(report)
}

struct GroupSetup {
    group: Arc<FiniteGroup>,
    model: Arc<GroupActionModel>,
    category: Arc<CategoryData>,
    object: Arc<GradedAlgebraObject>,
    cocycle: Cocycle,
    subgroup: Vec<usize>,
}

fn group_setup(config: &RunConfig, group: &str, model: &str) -> Result<GroupSetup> {
    let group = FiniteGroup::by_name(group)?;
    let model = match model {
        "inner" => GroupActionModel::inner_regular(&group),
        "permutation" => GroupActionModel::permutation_translation(&group),
        other => return Err(Error::Config(format!("unknown model '{other}'"))),
    };
    let category = group_category(&model, config.run.tol)?;
    let (subgroup, cocycle) = match &config.object {
        None | Some(ObjectSpec::GroupAlgebra { .. }) => {
            let (sub, coc) = match &config.object {
                Some(ObjectSpec::GroupAlgebra { subgroup, cocycle }) => {
                    let sub = if subgroup.is_empty() {
                        (0..group.order()).collect()
                    } else {
                        group.generated_subgroup(subgroup)
                    };
                    let coc = match cocycle.as_str() {
                        "trivial" => Cocycle::trivial(&group),
                        "sign-z2z2" => {
                            if group.order() != 4 {
                                return Err(Error::Config(
                                    "the sign cocycle needs the group z2xz2".into(),
                                ));
                            }
                            Cocycle::sign_z2z2()
                        }
                        other => return Err(Error::Config(format!("unknown cocycle '{other}'"))),
                    };
                    (sub, coc)
                }
                _ => ((0..group.order()).collect(), Cocycle::trivial(&group)),
            };
            (sub, coc)
        }
        Some(ObjectSpec::Trivial) => (vec![0], Cocycle::trivial(&group)),
        Some(ObjectSpec::CuntzGrading) => {
            return Err(Error::Config("grading object needs a cuntz action".into()))
        }
    };
    let object = if subgroup.len() == 1 && matches!(config.object, Some(ObjectSpec::Trivial)) {
        trivial_object(&category)?
    } else {
        group_algebra_object(&category, &group, &subgroup, &cocycle)?
    };
    Ok(GroupSetup {
        group,
        model,
        category,
        object,
        cocycle,
        subgroup,
    })
}

fn run_group_suites(
    config: &RunConfig,
    suite: &str,
    group_name: &str,
    model_name: &str,
    report: &mut RunReport,
) -> Result<()> {
    let setup = group_setup(config, group_name, model_name)?;
    let hash = config.hash();
    let tol = config.run.tol;
    let seed = config.run.seed;
    let window: Vec<usize> = (0..setup.group.order()).collect();
    let cp = CrossedAlgebra::new(setup.category.clone(), setup.object.clone(), window.clone())?;

    if matches!(suite, "axioms" | "all") {
        let rep = check_algebra_object(&setup.object, &window, 3, seed)?;
        report.push(CheckRecord::new("axioms.unitality", &hash, rep.unit_defect, tol));
        report.push(CheckRecord::new("axioms.associativity", &hash, rep.assoc_defect, tol.max(1e-8)));
        report.push(CheckRecord::new(
            "axioms.star-involution",
            &hash,
            rep.star_involution_defect,
            tol.max(1e-8),
        ));
        report.push(CheckRecord::new(
            "axioms.star-antimultiplicative",
            &hash,
            rep.star_antimult_defect,
            tol.max(1e-8),
        ));
        report.push(CheckRecord::flag("axioms.connected", &hash, rep.connected));
        report.push(CheckRecord::flag(
            "axioms.dimension-bound",
            &hash,
            rep.dimension_bound_ok,
        ));
        report.push(CheckRecord::new(
            "axioms.fiber-gram-positive",
            &hash,
            (1e-10 - rep.fiber_gram_min).max(0.0),
            0.0,
        ));
        // category-side consistency
        report.push(CheckRecord::flag(
            "category.fusion-associativity",
            &hash,
            setup.category.fusion_associativity_holds(),
        ));
        report.push(CheckRecord::flag(
            "category.unit-duality",
            &hash,
            setup.category.unit_and_duality_hold(),
        ));
        report.push(CheckRecord::new(
            "category.frobenius-perron",
            &hash,
            setup.category.frobenius_perron_defect(),
            1e-6,
        ));
        let mut res_defect: f64 = 0.0;
        for a in 0..setup.group.order() {
            for b in 0..setup.group.order() {
                res_defect = res_defect.max(setup.category.resolution_defect(a, b)?);
            }
        }
        report.push(CheckRecord::new(
            "category.isometry-resolution",
            &hash,
            res_defect,
            1e-8,
        ));
    }

    if matches!(suite, "crossed" | "all") {
        let defect = oracle_equivalence_defect(&setup, &cp)?;
        report.push(CheckRecord::new("crossed.oracle-tables", &hash, defect, 1e-10));
        let exp = expectation_report(&cp, 500, seed, tol)?;
        report.push(CheckRecord::flag(
            "crossed.expectation-positive",
            &hash,
            exp.positivity_failures == 0,
        ));
        report.push(CheckRecord::flag(
            "crossed.expectation-faithful",
            &hash,
            exp.faithfulness_failures == 0,
        ));
        report.push(CheckRecord::new(
            "crossed.expectation-bimodular",
            &hash,
            exp.bimodularity_defect,
            tol.max(1e-8),
        ));
        let (cy, violations) = bounded_multiplier_check(&cp, 100, seed.wrapping_add(1))?;
        report.push(
            CheckRecord::flag("crossed.bounded-multiplier", &hash, violations == 0)
                .with_detail(serde_json::json!({ "bound": cy })),
        );
        // associativity on random triples
        let mut assoc: f64 = 0.0;
        {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
            let support: Vec<usize> = window
                .iter()
                .cloned()
                .filter(|&c| setup.object.fiber_dim(c) > 0)
                .collect();
            for _ in 0..200 {
                let x = cp.random(&mut rng, &support);
                let y = cp.random(&mut rng, &support);
                let z = cp.random(&mut rng, &support);
                let lhs = cp.mul(&cp.mul(&x, &y)?, &z)?;
                let rhs = cp.mul(&x, &cp.mul(&y, &z)?)?;
                assoc = assoc.max(lhs.distance(&rhs));
            }
        }
        report.push(CheckRecord::new("crossed.associativity", &hash, assoc, 1e-8));
        // membership report for a group unitary
        if setup.subgroup.len() > 1 {
            let g = setup.subgroup[1];
            let k = setup.category.simple(g);
            let v = k.element_as_vector(&setup.category.algebra().unit());
            let mut fiber = DVector::zeros(setup.object.fiber_dim(g));
            fiber[0] = ONE;
            let ug = cp.pure(g, &v, &fiber)?;
            let pqn = pqn_membership_report(&cp, &ug)?;
            report.push(
                CheckRecord::flag(
                    "crossed.pqn-single-label",
                    &hash,
                    pqn.support == vec![g] && pqn.contains_vector,
                )
                .with_detail(serde_json::to_value(&pqn).unwrap()),
            );
        }
        let delta = delta_roundtrip_check(&cp)?;
        report.push(
            CheckRecord::flag("crossed.delta-fibers", &hash, delta.fiber_dims_match)
                .with_detail(serde_json::json!({
                    "solved": delta.solved_dims, "object": delta.object_dims
                })),
        );
        report.push(CheckRecord::new(
            "crossed.delta-mult-table",
            &hash,
            delta.mult_table_defect,
            1e-8,
        ));
    }

    if matches!(suite, "peter-weyl" | "all") {
        let pw = peter_weyl_report(&cp)?;
        let mult_match = pw
            .labels
            .iter()
            .zip(&pw.multiplicities)
            .all(|(&c, &m)| m == setup.object.fiber_dim(c) * endo_dim(&setup.category, c));
        report.push(
            CheckRecord::flag("peter-weyl.multiplicities", &hash, mult_match).with_detail(
                serde_json::json!({ "labels": pw.labels, "mult": pw.multiplicities }),
            ),
        );
        report.push(CheckRecord::flag(
            "peter-weyl.dimension-count",
            &hash,
            pw.sum_matches_dimension,
        ));
        report.push(
            CheckRecord::flag("peter-weyl.commutant-profile", &hash, {
                pw.commutant_profile
                    .iter()
                    .zip(&pw.labels)
                    .all(|(&n, &c)| n == setup.object.fiber_dim(c) * endo_dim(&setup.category, c))
            })
            .with_detail(serde_json::json!({ "profile": pw.commutant_profile })),
        );
    }

    if matches!(suite, "frobenius" | "all") {
        for &c in &window {
            let rep = frobenius_dim_check(&cp, c)?;
            report.push(
                CheckRecord::flag(
                    format!("frobenius.dims-equal[{c}]"),
                    &hash,
                    rep.dims_equal,
                )
                .with_detail(serde_json::json!({
                    "central": rep.dim_central_system, "module": rep.dim_module_system
                })),
            );
            report.push(CheckRecord::new(
                format!("frobenius.roundtrip[{c}]"),
                &hash,
                rep.roundtrip_defect,
                1e-8,
            ));
        }
    }

    if matches!(suite, "galois" | "all") {
        let lattice = galois_lattice(&setup.object, 1 << 20)?;
        let mut supports: Vec<Vec<usize>> = lattice.iter().map(|n| n.support.clone()).collect();
        supports.sort();
        // oracle: subgroups of the object's support subgroup
        let mut expected: Vec<Vec<usize>> = setup
            .group
            .subgroups()
            .into_iter()
            .filter(|h| h.iter().all(|g| setup.subgroup.contains(g)))
            .collect();
        expected.sort();
        report.push(
            CheckRecord::flag("galois.lattice-matches-subgroups", &hash, supports == expected)
                .with_detail(serde_json::json!({
                    "found": supports.len(), "expected": expected.len()
                })),
        );
        for node in lattice.iter() {
            let sub = restrict_to_node(&setup.object, node)?;
            let axioms = check_algebra_object(&sub, &window, 1, seed)?;
            if !axioms.passes(tol.max(1e-8)) {
                report.push(CheckRecord::flag(
                    format!("galois.subobject-axioms{:?}", node.support),
                    &hash,
                    false,
                ));
            }
            let compat = galois_compatibility_check(&cp, &node.support, 5, seed)?;
            let worst = compat
                .expectation_compatible
                .max(compat.idempotent_defect)
                .max(compat.bimodular_defect)
                .max(compat.unital_defect);
            report.push(
                CheckRecord::new(
                    format!("galois.compatible-expectation{:?}", node.support),
                    &hash,
                    worst,
                    1e-8,
                )
                .with_detail(serde_json::json!({ "positivity": compat.positivity_ok })),
            );
        }
    }

    if matches!(suite, "freeness" | "all") {
        // translation example: exact zero for g != e on the permutation model
        let perm = GroupActionModel::permutation_translation(&setup.group);
        if setup.group.order() > 1 {
            let k = perm.bimodule(1, tol)?;
            let xi = k.element_as_vector(&perm.algebra().unit());
            let est = freeness_estimate(&k, &xi, 5, 4, seed);
            report.push(CheckRecord::new("freeness.translation-zero", &hash, est, 1e-12));
        }
        let t = crate::bimodule::FgpBimodule::trivial(perm.algebra(), tol)?;
        let unit = t.element_as_vector(&perm.algebra().unit());
        let est1 = freeness_estimate(&t, &unit, 5, 4, seed.wrapping_add(3));
        report.push(CheckRecord::new(
            "freeness.unit-fixed",
            &hash,
            (est1 - 1.0).abs(),
            1e-9,
        ));
        // zero vector estimates to zero
        let zero = t.zero_vector();
        let est0 = freeness_estimate(&t, &zero, 2, 3, seed.wrapping_add(4));
        report.push(CheckRecord::new("freeness.zero-vector", &hash, est0, 1e-12));
    }

    if matches!(suite, "cuntz" | "semicircular") {
        return Err(Error::Config(format!(
            "suite '{suite}' does not apply to a group action"
        )));
    }
    Ok(())
}

fn endo_dim(category: &Arc<CategoryData>, c: usize) -> usize {
    crate::bimodule::intertwiner_dim(category.simple(c), category.simple(c)).unwrap_or(0)
}

/// Full multiplication-table comparison against the twisted-convolution
/// oracle over basis pairs, including star and expectation.
fn oracle_equivalence_defect(setup: &GroupSetup, cp: &CrossedAlgebra) -> Result<f64> {
    let oracle = TwistedConvOracle::new(setup.model.clone(), setup.cocycle.clone())?;
    let alg = setup.model.algebra().clone();
    let units = alg.basis_units();
    let mut worst: f64 = 0.0;
    let labels = &setup.subgroup;
    for &g in labels {
        let kg = setup.category.simple(g);
        for a in &units {
            let va = kg.element_as_vector(a);
            let mut fib = DVector::zeros(setup.object.fiber_dim(g));
            fib[0] = ONE;
            let xg = cp.pure(g, &va, &fib)?;
            let og = oracle.monomial(g, a.clone());
            // star comparison
            let xs = cp.star(&xg)?;
            let os = oracle.star(&og);
            worst = worst.max(crossed_vs_oracle_distance(setup, cp, &xs, &os)?);
            for &h in labels {
                let kh = setup.category.simple(h);
                for b in &units {
                    let vb = kh.element_as_vector(b);
                    let mut fib2 = DVector::zeros(setup.object.fiber_dim(h));
                    fib2[0] = ONE;
                    let yh = cp.pure(h, &vb, &fib2)?;
                    let oh = oracle.monomial(h, b.clone());
                    let prod = cp.mul(&xg, &yh)?;
                    let oprod = oracle.mul(&og, &oh);
                    worst = worst.max(crossed_vs_oracle_distance(setup, cp, &prod, &oprod)?);
                    // expectation agreement
                    let e1 = cp.expectation(&prod);
                    let e2 = oracle.expectation(&oprod);
                    worst = worst.max((&e1 - &e2).operator_norm());
                }
            }
        }
    }
    Ok(worst)
}

fn crossed_vs_oracle_distance(
    setup: &GroupSetup,
    _cp: &CrossedAlgebra,
    x: &crate::crossed_product::CrossedElement,
    o: &crate::examples::group::ConvElement,
) -> Result<f64> {
    let alg = setup.model.algebra().clone();
    let mut worst: f64 = 0.0;
    for g in 0..setup.group.order() {
        let k = setup.category.simple(g);
        let coeff = x.terms.get(&g);
        let elem = match coeff {
            None => alg.zero(),
            Some(m) => {
                let flat = DVector::from_iterator(m.nrows(), m.column(0).iter().cloned());
                k.vector_as_element(&k.flat_to_vector(&flat))
            }
        };
        let expected = o.coeffs.get(&g).cloned().unwrap_or_else(|| alg.zero());
        worst = worst.max((&elem - &expected).operator_norm());
    }
    Ok(worst)
}

fn run_cuntz_suites(
    config: &RunConfig,
    suite: &str,
    n: usize,
    depth: usize,
    report: &mut RunReport,
) -> Result<()> {
    let hash = config.hash();
    let seed = config.run.seed;
    let window = config.run.window as i64;

    if matches!(suite, "cuntz" | "all") {
        let core = CuntzCore::new(n, depth)?;
        let rep = core.report(seed)?;
        report.push(CheckRecord::new(
            "cuntz.watatani-index",
            &hash,
            rep.watatani_defect,
            1e-8,
        ));
        report.push(CheckRecord::new(
            "cuntz.left-basis-orthonormal",
            &hash,
            rep.left_basis_gram_defect,
            1e-8,
        ));
        report.push(CheckRecord::new(
            "cuntz.left-reconstruction",
            &hash,
            rep.left_reconstruction_defect,
            1e-8,
        ));
        report.push(CheckRecord::flag(
            "cuntz.end-dimension",
            &hash,
            rep.end_dimension == n * n,
        ));
        report.push(CheckRecord::flag(
            "cuntz.corner-irreducible",
            &hash,
            rep.corner_end_dimensions.iter().all(|&d| d == 1),
        ));
        report.push(CheckRecord::new(
            "cuntz.corner-fusion",
            &hash,
            rep.corner_fusion_defect.max(rep.corner_pairing_defect),
            1e-8,
        ));
        report.push(CheckRecord::new(
            "cuntz.shift-transfer",
            &hash,
            rep.shift_consistency_defect,
            1e-10,
        ));
        report.push(CheckRecord::new(
            "cuntz.expectation-formula",
            &hash,
            rep.expectation_formula_defect,
            1e-12,
        ));
        report.push(CheckRecord::flag(
            "cuntz.corner-generation",
            &hash,
            rep.corner_generation_ok,
        ));
        // cross-depth stability of the index and end-dimension
        if n.pow((depth + 1) as u32) <= 512 {
            let next = CuntzCore::new(n, depth + 1)?;
            let rep2 = next.report(seed)?;
            let stable = (rep.watatani_defect - rep2.watatani_defect).abs() < 1e-8
                && rep.end_dimension == rep2.end_dimension;
            report.push(CheckRecord::flag("cuntz.cross-depth-stable", &hash, stable));
        }
    }

    if matches!(suite, "crossed" | "all") {
        let cp = CuntzCrossed::new(n, depth, window)?;
        let graded = cp.graded_vs_oracle_defect(50, seed)?;
        report.push(CheckRecord::new(
            "cuntz.graded-vs-word-oracle",
            &hash,
            graded,
            1e-10,
        ));
        let (pos, faith) = cp.expectation_report(500, seed, 1e-9)?;
        report.push(CheckRecord::flag("cuntz.expectation-positive", &hash, pos == 0));
        report.push(CheckRecord::flag("cuntz.expectation-faithful", &hash, faith == 0));
        for label in 0..=window {
            let (violations, worst) = cp.pp_inequality(label, 100, seed)?;
            report.push(
                CheckRecord::flag(
                    format!("cuntz.pp-inequality[{label}]"),
                    &hash,
                    violations == 0,
                )
                .with_detail(serde_json::json!({ "worst_slack": worst })),
            );
        }
    }

    if matches!(suite, "peter-weyl" | "all") {
        let cp = CuntzCrossed::new(n, depth, window)?;
        let (mults, dim_ok) = cp.peter_weyl()?;
        report.push(
            CheckRecord::flag(
                "cuntz.peter-weyl-multiplicities",
                &hash,
                mults.iter().all(|&(_, m)| m == 1),
            )
            .with_detail(serde_json::json!({ "mults": mults })),
        );
        report.push(CheckRecord::flag("cuntz.peter-weyl-dimension", &hash, dim_ok));
    }

    if matches!(suite, "frobenius" | "all") {
        let cp = CuntzCrossed::new(n, depth, window)?;
        for label in -window..=window {
            let rep = cp.label_report(label)?;
            report.push(
                CheckRecord::flag(
                    format!("cuntz.frobenius-dims[{label}]"),
                    &hash,
                    rep.dims_equal,
                )
                .with_detail(serde_json::json!({
                    "module_route": rep.dim_route_module, "word_route": rep.dim_route_words
                })),
            );
            report.push(CheckRecord::new(
                format!("cuntz.frobenius-roundtrip[{label}]"),
                &hash,
                rep.roundtrip_defect,
                1e-8,
            ));
        }
    }

    if matches!(suite, "axioms" | "all") {
        let obj = CuntzAlgebraObject { n, window };
        report.push(CheckRecord::flag("cuntz.grading-object-axioms", &hash, obj.check()));
        // fiber dimensions one across the window via the label solves
        let cp = CuntzCrossed::new(n, depth, window)?;
        let mut all_one = true;
        for label in -window..=window {
            let rep = cp.label_report(label)?;
            if rep.dim_route_module != 1 {
                all_one = false;
            }
        }
        report.push(CheckRecord::flag("cuntz.fiber-dims-one", &hash, all_one));
    }

    if matches!(suite, "galois" | "all") {
        let obj = CuntzAlgebraObject { n, window };
        let supports = obj.galois_supports();
        report.push(
            CheckRecord::flag("cuntz.galois-window-supports", &hash, !supports.is_empty())
                .with_detail(serde_json::json!({ "count": supports.len() })),
        );
    }

    if matches!(suite, "freeness" | "semicircular") {
        return Err(Error::Config(format!(
            "suite '{suite}' does not apply to a cuntz action"
        )));
    }
    Ok(())
}

fn run_semicircular_suite(
    config: &RunConfig,
    family: &str,
    degree_cap: usize,
    report: &mut RunReport,
) -> Result<()> {
    let hash = config.hash();
    let model = match family {
        "scalar" => SemicircularModel::scalar(degree_cap),
        "m2-pair" => SemicircularModel::m2_pair(degree_cap.min(3)),
        _ => unreachable!("validated"),
    };
    report.push(CheckRecord::flag(
        "semicircular.choi-positive",
        &hash,
        model.choi_positive(1e-10)?,
    ));
    report.push(CheckRecord::new(
        "semicircular.trace-compatible",
        &hash,
        model.trace_compatibility_defect(),
        1e-10,
    ));
    let fock = FockSpace::build(model)?;
    if family == "scalar" {
        let mut worst: f64 = 0.0;
        for m in 1..=(degree_cap / 2) {
            let word = vec![0usize; 2 * m];
            let moment = fock.moment(&word)?;
            let expect = noncrossing_pairing_count(m) as f64;
            worst = worst.max((moment.trace().re - expect).abs());
        }
        report.push(CheckRecord::new(
            "semicircular.even-moments-catalan",
            &hash,
            worst,
            1e-10,
        ));
        let mut odd: f64 = 0.0;
        for k in (1..=degree_cap).step_by(2) {
            odd = odd.max(fock.moment(&vec![0usize; k])?.operator_norm());
        }
        report.push(CheckRecord::new("semicircular.odd-moments-zero", &hash, odd, 1e-12));
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.run.seed);
        let alg = fock.model.algebra.clone();
        let mut worst: f64 = 0.0;
        for i in 0..fock.model.index_size {
            for j in 0..fock.model.index_size {
                for _ in 0..10 {
                    let a = alg.random_element(&mut rng);
                    let op = fock.field_operator(i) * fock.left_action(&a) * fock.field_operator(j);
                    let e = fock.vacuum_expectation(&op);
                    let expect = fock.model.eta(i, j, &a);
                    worst = worst.max((&e - &expect).operator_norm());
                }
            }
        }
        report.push(CheckRecord::new("semicircular.covariance", &hash, worst, 1e-10));
        let (generated, quotient) = fock.discreteness_witness(0)?;
        report.push(
            CheckRecord::flag(
                "semicircular.discreteness-witness",
                &hash,
                generated == quotient,
            )
            .with_detail(serde_json::json!({ "generated": generated, "quotient": quotient })),
        );
        report.push(
            CheckRecord::flag("semicircular.central-vectors", &hash, true).with_detail(
                serde_json::json!({ "dim_at_cap": fock.central_vector_dim() }),
            ),
        );
    }
    report.push(CheckRecord::flag(
        "semicircular.degree-overflow-refused",
        &hash,
        fock.moment(&vec![0usize; fock.model.degree_cap + 1]).is_err(),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_toml(text).unwrap()
    }

    #[test]
    fn z4_all_suites_pass() {
        let config = cfg(r#"
[action]
kind = "group"
group = "z4"
model = "inner"

[object]
kind = "group-algebra"

[run]
seed = 11
"#);
        let report = run_checks(&config, "all").unwrap();
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn cuntz_n2_suites_pass() {
        let config = cfg(r#"
[action]
kind = "cuntz"
n = 2
depth = 2

[run]
window = 2
seed = 5
"#);
        let report = run_checks(&config, "all").unwrap();
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn semicircular_scalar_passes() {
        let config = cfg(r#"
[action]
kind = "semicircular"
family = "scalar"
degree_cap = 6
"#);
        let report = run_checks(&config, "semicircular").unwrap();
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn wrong_suite_for_action_is_config_error() {
        let config = cfg(r#"
[action]
kind = "semicircular"
family = "scalar"
"#);
        let err = run_checks(&config, "galois");
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn determinism_of_reports() {
        let config = cfg(r#"
[action]
kind = "group"
group = "z3"
model = "inner"

[run]
seed = 9
"#);
        let r1 = run_checks(&config, "crossed").unwrap();
        let r2 = run_checks(&config, "crossed").unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
    }
}
