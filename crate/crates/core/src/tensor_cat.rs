//! Finite unitary-tensor-category data extracted from a concrete family of
//! bimodules: simple representatives, fusion multiplicities, duals, and the
//! chosen isometry families that resolve every tensor product.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::{AlgebraElement, MatrixCStarAlgebra};
use crate::bimodule::{
    self, conjugate, decompose_irreducibles, intertwiner_space, relative_tensor,
    unitary_isomorphism, BimoduleVector, FgpBimodule, Intertwiner,
};
use crate::linalg::{self, cr, CMat};
use crate::{Error, Result};

/// A conjugate-linear map between modules, stored as a matrix applied to the
/// conjugated flat coordinates.
#[derive(Clone)]
pub struct ConjLinMap {
    pub source: Arc<FgpBimodule>,
    pub target: Arc<FgpBimodule>,
    pub matrix: CMat,
}

impl ConjLinMap {
    pub fn apply(&self, v: &BimoduleVector) -> BimoduleVector {
        let flat = self.source.vector_to_flat(v);
        let conj = DVector::from_iterator(flat.len(), flat.iter().map(|z| z.conj()));
        self.target.flat_to_vector(&(&self.matrix * conj))
    }

    pub fn compose_after(&self, other: &ConjLinMap) -> CMat {
        // self ∘ other as a LINEAR map: M_self · conj(M_other)
        let conj_other = other.matrix.map(|z| z.conj());
        &self.matrix * conj_other
    }
}

/// Category data over a fixed base algebra: simples with the unit first,
/// fusion multiplicities, duals, realized tensor products, and chosen
/// complete isometry families with orthogonal ranges.
pub struct CategoryData {
    algebra: Arc<MatrixCStarAlgebra>,
    simples: Vec<Arc<FgpBimodule>>,
    /// N_{ab}^c indexed as fusion[&(a,b)][c]
    fusion: BTreeMap<(usize, usize), Vec<usize>>,
    dual: Vec<usize>,
    tensors: BTreeMap<(usize, usize), Arc<FgpBimodule>>,
    /// isometries[(a,b)] is a list of (c, family of isometries F(c) -> F(a)⊠F(b))
    isometries: BTreeMap<(usize, usize), Vec<(usize, Vec<Intertwiner>)>>,
    /// conjugation operators J_c : F(c) -> F(c̄)
    conj_ops: Vec<ConjLinMap>,
    watatani: Vec<AlgebraElement>,
    complete: bool,
    label: String,
}

impl CategoryData {
    pub fn algebra(&self) -> &Arc<MatrixCStarAlgebra> {
        &self.algebra
    }

    pub fn num_simples(&self) -> usize {
        self.simples.len()
    }

    pub fn simple(&self, c: usize) -> &Arc<FgpBimodule> {
        &self.simples[c]
    }

    pub fn simples(&self) -> &[Arc<FgpBimodule>] {
        &self.simples
    }

    pub fn unit_label(&self) -> usize {
        0
    }

    pub fn dual(&self, c: usize) -> usize {
        self.dual[c]
    }

    pub fn conj_op(&self, c: usize) -> &ConjLinMap {
        &self.conj_ops[c]
    }

    pub fn watatani(&self, c: usize) -> &AlgebraElement {
        &self.watatani[c]
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn fusion_row(&self, a: usize, b: usize) -> Option<&Vec<usize>> {
        self.fusion.get(&(a, b))
    }

    pub fn fusion_mult(&self, a: usize, b: usize, c: usize) -> usize {
        self.fusion
            .get(&(a, b))
            .map(|row| row.get(c).cloned().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn tensor_module(&self, a: usize, b: usize) -> Option<&Arc<FgpBimodule>> {
        self.tensors.get(&(a, b))
    }

    /// The chosen isometry families for a fusion row: for each channel c with
    /// N_{ab}^c > 0, an orthonormal family of isometries F(c) -> F(a)⊠F(b).
    pub fn choose_isometries(&self, a: usize, b: usize) -> Result<&Vec<(usize, Vec<Intertwiner>)>> {
        self.isometries
            .get(&(a, b))
            .ok_or_else(|| Error::Config(format!("fusion row ({a},{b}) not computed")))
    }

    /// Defect of Σ_{c,α} α α^† = id on the realized tensor product.
    pub fn resolution_defect(&self, a: usize, b: usize) -> Result<f64> {
        let t = self
            .tensors
            .get(&(a, b))
            .ok_or_else(|| Error::Config(format!("tensor ({a},{b}) not realized")))?;
        let fams = self.choose_isometries(a, b)?;
        let mut acc: Option<Intertwiner> = None;
        for (_, fam) in fams {
            for alpha in fam {
                let proj = alpha.compose(&alpha.adjoint());
                acc = Some(match acc {
                    None => proj,
                    Some(x) => x.add(&proj),
                });
            }
        }
        let id = Intertwiner::identity(t);
        Ok(match acc {
            None => 1.0,
            Some(total) => total.distance(&id),
        })
    }

    /// Orthonormality defect max |α^†β - δ_{αβ} id| within each family.
    pub fn isometry_orthonormality_defect(&self, a: usize, b: usize) -> Result<f64> {
        let fams = self.choose_isometries(a, b)?;
        let mut defect: f64 = 0.0;
        for (c, fam) in fams {
            let idc = Intertwiner::identity(&self.simples[*c]);
            for (i, f) in fam.iter().enumerate() {
                for (j, g) in fam.iter().enumerate() {
                    let pair = f.adjoint().compose(g);
                    let expect = if i == j { idc.clone() } else { idc.scale(cr(0.0)) };
                    defect = defect.max(pair.distance(&expect));
                }
            }
        }
        Ok(defect)
    }

    /// Fusion associativity as an exact integer identity:
    /// Σ_e N_{ab}^e N_{ec}^d = Σ_f N_{bc}^f N_{af}^d.
    pub fn fusion_associativity_holds(&self) -> bool {
        let n = self.simples.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let lhs: usize = (0..n)
                            .map(|e| self.fusion_mult(a, b, e) * self.fusion_mult(e, c, d))
                            .sum();
                        let rhs: usize = (0..n)
                            .map(|f| self.fusion_mult(b, c, f) * self.fusion_mult(a, f, d))
                            .sum();
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Unit and duality constraints on the fusion table.
    pub fn unit_and_duality_hold(&self) -> bool {
        let n = self.simples.len();
        for a in 0..n {
            for b in 0..n {
                if self.fusion_mult(0, a, b) != usize::from(a == b)
                    || self.fusion_mult(a, 0, b) != usize::from(a == b)
                {
                    return false;
                }
                let expected = usize::from(b == self.dual[a]);
                if self.fusion_mult(a, b, 0) != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Frobenius-Perron consistency: the vector of square roots of Watatani
    /// index norms satisfies (N_a v)_b = v_a v_b. Returns the worst defect.
    pub fn frobenius_perron_defect(&self) -> f64 {
        let n = self.simples.len();
        let v: Vec<f64> = self
            .watatani
            .iter()
            .map(|w| w.operator_norm().sqrt())
            .collect();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += self.fusion_mult(a, b, c) as f64 * v[c];
                }
                worst = worst.max((acc - v[a] * v[b]).abs());
            }
        }
        worst
    }

    /// Machine-readable summary: labels, fusion, duals, index norms.
    pub fn summary(&self) -> serde_json::Value {
        let n = self.simples.len();
        let mut fusion = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(row) = self.fusion.get(&(a, b)) {
                    for (c, &m) in row.iter().enumerate() {
                        if m > 0 {
                            fusion.push(serde_json::json!({ "a": a, "b": b, "c": c, "mult": m }));
                        }
                    }
                }
            }
        }
        serde_json::json!({
            "label": self.label,
            "algebra": self.algebra.label(),
            "simples": self.simples.iter().map(|s| s.label().to_string()).collect::<Vec<_>>(),
            "dual": self.dual,
            "watatani_norms": self.watatani.iter().map(|w| w.operator_norm()).collect::<Vec<_>>(),
            "fusion": fusion,
            "complete": self.complete,
        })
    }
}

/// Direct construction from a pointed family: one module per label of a
/// group-like index set with multiplicity-free fusion given by a composition
/// rule. The isometries are the adjoints of the concrete tensor-structure
/// unitaries, so crossed-product multiplication tables are canonical.
pub struct PointedBuilder {
    pub algebra: Arc<MatrixCStarAlgebra>,
    pub modules: Vec<Arc<FgpBimodule>>,
    /// composition rule: product[a][b] = c
    pub product: Vec<Vec<usize>>,
    pub dual: Vec<usize>,
    /// tensor-structure map F(a)⊠F(b) -> F(ab) on vector pairs
    pub tensorator: Box<dyn Fn(usize, usize, &BimoduleVector, &BimoduleVector) -> BimoduleVector>,
    /// conjugation F(a) -> F(ā)
    pub conj: Box<dyn Fn(usize, &BimoduleVector) -> BimoduleVector>,
    pub label: String,
}

impl PointedBuilder {
    pub fn build(self, tol: f64) -> Result<Arc<CategoryData>> {
        let n = self.modules.len();
        let mut tensors = BTreeMap::new();
        let mut isometries = BTreeMap::new();
        let mut fusion = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let t = relative_tensor(&self.modules[a], &self.modules[b], tol)?;
                let c = self.product[a][b];
                let target = &self.modules[c];
                let ka = &self.modules[a];
                let kb = &self.modules[b];
                let mut pair_mat = CMat::zeros(target.dim(), ka.dim() * kb.dim());
                for (i, va) in ka.basis_vectors().iter().enumerate() {
                    for (j, vb) in kb.basis_vectors().iter().enumerate() {
                        let out = (self.tensorator)(a, b, va, vb);
                        pair_mat.set_column(i * kb.dim() + j, &target.vector_to_flat(&out));
                    }
                }
                let mat = if let crate::bimodule::ModuleKind::Tensor { embed_pinv, .. } = t.kind() {
                    &pair_mat * embed_pinv
                } else {
                    unreachable!("relative_tensor returns tensor kind")
                };
                let tensorator_map = Intertwiner::from_flat(&t, target, &mat, 1e-7)?;
                let uu = tensorator_map.compose(&tensorator_map.adjoint());
                let defect = uu.distance(&Intertwiner::identity(target));
                if defect > 1e-7 {
                    return Err(Error::Numerical(format!(
                        "tensorator ({a},{b}) is not a coisometry (defect {defect:.2e})"
                    )));
                }
                let iso = tensorator_map.adjoint();
                let iso_defect = iso
                    .adjoint()
                    .compose(&iso)
                    .distance(&Intertwiner::identity(target));
                if iso_defect > 1e-7 {
                    return Err(Error::Numerical(format!(
                        "tensorator ({a},{b}) is not unitary (defect {iso_defect:.2e})"
                    )));
                }
                let mut row = vec![0usize; n];
                row[c] = 1;
                fusion.insert((a, b), row);
                isometries.insert((a, b), vec![(c, vec![iso])]);
                tensors.insert((a, b), t);
            }
        }
        let mut conj_ops = Vec::with_capacity(n);
        for a in 0..n {
            let src = &self.modules[a];
            let tgt = &self.modules[self.dual[a]];
            let mut mat = CMat::zeros(tgt.dim(), src.dim());
            for (i, v) in src.basis_vectors().iter().enumerate() {
                let out = (self.conj)(a, v);
                mat.set_column(i, &tgt.vector_to_flat(&out));
            }
            conj_ops.push(ConjLinMap {
                source: src.clone(),
                target: tgt.clone(),
                matrix: mat,
            });
        }
        for a in 0..n {
            let ab = self.dual[a];
            let comp = conj_ops[ab].compose_after(&conj_ops[a]);
            let id = CMat::identity(comp.nrows(), comp.ncols());
            let defect = linalg::op_norm(&(comp - id));
            if defect > 1e-8 {
                return Err(Error::Numerical(format!(
                    "conjugation on label {a} is not involutive (defect {defect:.2e})"
                )));
            }
        }
        let mut watatani = Vec::with_capacity(n);
        for module in &self.modules {
            watatani.push(module.watatani_index(tol)?);
        }
        Ok(Arc::new(CategoryData {
            algebra: self.algebra,
            simples: self.modules,
            fusion,
            dual: self.dual,
            tensors,
            isometries,
            conj_ops,
            watatani,
            complete: true,
            label: self.label,
        }))
    }
}

/// Close a generating family of bimodules under tensor product and
/// conjugation up to isomorphism, decomposing into irreducibles. Flags
/// `complete = false` when more than `max_simples` classes appear.
pub fn generate_category(
    generators: &[Arc<FgpBimodule>],
    max_simples: usize,
    tol: f64,
    seed: u64,
) -> Result<Arc<CategoryData>> {
    if generators.is_empty() {
        return Err(Error::Config("no generating bimodules".into()));
    }
    let algebra = generators[0].algebra().clone();
    let trivial = FgpBimodule::trivial(&algebra, tol)?;
    let mut simples: Vec<Arc<FgpBimodule>> = vec![trivial];
    let mut complete = true;

    fn match_or_insert(
        simples: &mut Vec<Arc<FgpBimodule>>,
        cand: &Arc<FgpBimodule>,
        max_simples: usize,
    ) -> Result<Option<usize>> {
        for (i, s) in simples.iter().enumerate() {
            if unitary_isomorphism(s, cand, 1e-7)?.is_some() {
                return Ok(Some(i));
            }
        }
        if simples.len() >= max_simples {
            return Ok(None);
        }
        simples.push(cand.clone());
        Ok(Some(simples.len() - 1))
    }

    for (gi, g) in generators.iter().enumerate() {
        let parts = decompose_irreducibles(g, tol, 1e-6, seed.wrapping_add(gi as u64))?;
        for part in parts {
            if match_or_insert(&mut simples, &part.module, max_simples)?.is_none() {
                complete = false;
            }
        }
    }

    let mut fusion: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut tensors = BTreeMap::new();
    let mut isometries = BTreeMap::new();
    let mut processed = 0usize;
    while processed < simples.len() && complete {
        let upto = simples.len();
        for a in 0..upto {
            for b in 0..upto {
                if fusion.contains_key(&(a, b)) {
                    continue;
                }
                let t = relative_tensor(&simples[a], &simples[b], tol)?;
                let parts = decompose_irreducibles(
                    &t,
                    tol,
                    1e-6,
                    seed ^ (((a as u64) << 20) | b as u64),
                )?;
                let mut row = vec![0usize; simples.len()];
                let mut fams: Vec<(usize, Vec<Intertwiner>)> = Vec::new();
                for part in &parts {
                    match match_or_insert(&mut simples, &part.module, max_simples)? {
                        Some(c) => {
                            if row.len() <= c {
                                row.resize(c + 1, 0);
                            }
                            row[c] += part.multiplicity;
                        }
                        None => {
                            complete = false;
                        }
                    }
                }
                for (c, &m) in row.clone().iter().enumerate() {
                    if m == 0 || c >= simples.len() {
                        continue;
                    }
                    let fam = intertwiner_space(&simples[c], &t)?;
                    if fam.len() != m {
                        return Err(Error::Numerical(format!(
                            "isometry family for ({a},{b})->{c}: found {} expected {m}",
                            fam.len()
                        )));
                    }
                    let mut family = Vec::with_capacity(m);
                    for f in fam {
                        let c_scalar = f.scalar_pairing(&f);
                        if c_scalar.re <= 0.0 {
                            return Err(Error::Numerical(
                                "degenerate isometry candidate in closure".into(),
                            ));
                        }
                        family.push(f.scale(cr(1.0 / c_scalar.re.sqrt())));
                    }
                    fams.push((c, family));
                }
                fusion.insert((a, b), row);
                tensors.insert((a, b), t);
                isometries.insert((a, b), fams);
            }
        }
        processed = upto;
        if simples.len() == upto {
            break;
        }
    }
    let n = simples.len();
    for row in fusion.values_mut() {
        row.resize(n, 0);
    }

    let mut dual = vec![usize::MAX; n];
    let mut conj_ops: Vec<Option<ConjLinMap>> = (0..n).map(|_| None).collect();
    for a in 0..n {
        if conj_ops[a].is_some() {
            continue;
        }
        let data = conjugate(&simples[a], tol)?;
        let mut target = None;
        for c in 0..n {
            if let Some(u) = unitary_isomorphism(&data.conj, &simples[c], 1e-7)? {
                target = Some((c, u));
                break;
            }
        }
        let Some((abar, u)) = target else {
            complete = false;
            dual[a] = a;
            conj_ops[a] = Some(ConjLinMap {
                source: simples[a].clone(),
                target: simples[a].clone(),
                matrix: CMat::identity(simples[a].dim(), simples[a].dim()),
            });
            continue;
        };
        dual[a] = abar;
        let mut bar_mat = CMat::zeros(data.conj.dim(), simples[a].dim());
        for (i, v) in simples[a].basis_vectors().iter().enumerate() {
            let vb = bimodule::conjugate_bar(&simples[a], &data.left_basis, &data.conj, v);
            bar_mat.set_column(i, &data.conj.vector_to_flat(&vb));
        }
        let j_mat = u.flat_matrix() * bar_mat;
        if abar == a {
            let jj = {
                let conj_j = j_mat.map(|z| z.conj());
                &j_mat * conj_j
            };
            let mu = jj[(0, 0)];
            let scale = cr(1.0 / mu.norm().sqrt());
            let j_scaled = &j_mat * scale;
            let jj2 = {
                let conj_j = j_scaled.map(|z| z.conj());
                &j_scaled * conj_j
            };
            let id = CMat::identity(jj2.nrows(), jj2.ncols());
            if linalg::op_norm(&(&jj2 - &id)) > 1e-7 {
                if linalg::op_norm(&(&jj2 + &id)) < 1e-7 {
                    return Err(Error::Numerical(format!(
                        "simple {a} is pseudoreal; no involutive conjugation exists"
                    )));
                }
                return Err(Error::Numerical(format!(
                    "conjugation normalization failed on simple {a}"
                )));
            }
            conj_ops[a] = Some(ConjLinMap {
                source: simples[a].clone(),
                target: simples[a].clone(),
                matrix: j_scaled,
            });
        } else {
            conj_ops[a] = Some(ConjLinMap {
                source: simples[a].clone(),
                target: simples[abar].clone(),
                matrix: j_mat.clone(),
            });
            let inv = j_mat
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("conjugation not invertible".into()))?;
            let inv_conj = inv.map(|z| z.conj());
            conj_ops[abar] = Some(ConjLinMap {
                source: simples[abar].clone(),
                target: simples[a].clone(),
                matrix: inv_conj,
            });
            dual[abar] = a;
        }
    }
    let conj_ops: Vec<ConjLinMap> = conj_ops.into_iter().map(|x| x.unwrap()).collect();
    let mut watatani = Vec::with_capacity(n);
    for module in &simples {
        watatani.push(module.watatani_index(tol)?);
    }
    let label = format!("closure({} gens)", generators.len());
    Ok(Arc::new(CategoryData {
        algebra,
        simples,
        fusion,
        dual,
        tensors,
        isometries,
        conj_ops,
        watatani,
        complete,
        label,
    }))
}

/// Pointed category for a finite group action: labels are group elements
/// (identity first), fusion is the group law, the isometries come from the
/// concrete tensorator ξ⊠η ↦ α_{h⁻¹}(ξ)η and conjugation is ξ ↦ α_g(ξ*).
pub fn group_category(
    model: &Arc<crate::examples::group::GroupActionModel>,
    tol: f64,
) -> Result<Arc<CategoryData>> {
    let group = model.group().clone();
    let n = group.order();
    let mut modules = Vec::with_capacity(n);
    for g in 0..n {
        modules.push(model.bimodule(g, tol)?);
    }
    let product: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).map(|b| group.mul(a, b)).collect())
        .collect();
    let dual: Vec<usize> = (0..n).map(|g| group.inv(g)).collect();
    let model_t = model.clone();
    let modules_t = modules.clone();
    let group_t = group.clone();
    let tensorator = Box::new(
        move |a: usize, b: usize, va: &BimoduleVector, vb: &BimoduleVector| {
            let xa = modules_t[a].vector_as_element(va);
            let xb = modules_t[b].vector_as_element(vb);
            let shifted = model_t.apply(group_t.inv(b), &xa);
            let prod = shifted.mul(&xb).expect("same algebra");
            modules_t[group_t.mul(a, b)].element_as_vector(&prod)
        },
    );
    let model_c = model.clone();
    let modules_c = modules.clone();
    let group_c = group.clone();
    let conj = Box::new(move |a: usize, v: &BimoduleVector| {
        let xa = modules_c[a].vector_as_element(v);
        let out = model_c.apply(a, &xa.adjoint());
        modules_c[group_c.inv(a)].element_as_vector(&out)
    });
    PointedBuilder {
        algebra: model.algebra().clone(),
        modules,
        product,
        dual,
        tensorator,
        conj,
        label: format!("Hilb({})@{}", group.label(), model.label()),
    }
    .build(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::group::{FiniteGroup, GroupActionModel};

    #[test]
    fn group_category_z3_inner() {
        let g = FiniteGroup::cyclic(3);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        assert_eq!(cat.num_simples(), 3);
        assert!(cat.fusion_associativity_holds());
        assert!(cat.unit_and_duality_hold());
        for a in 0..3 {
            for b in 0..3 {
                assert!(cat.resolution_defect(a, b).unwrap() < 1e-8);
                assert!(cat.isometry_orthonormality_defect(a, b).unwrap() < 1e-8);
            }
        }
        assert!(cat.frobenius_perron_defect() < 1e-6);
    }

    #[test]
    fn group_category_z3_permutation() {
        let g = FiniteGroup::cyclic(3);
        let model = GroupActionModel::permutation_translation(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        assert_eq!(cat.num_simples(), 3);
        assert!(cat.fusion_associativity_holds());
        assert!(cat.unit_and_duality_hold());
        for a in 0..3 {
            for b in 0..3 {
                assert!(cat.resolution_defect(a, b).unwrap() < 1e-8);
            }
        }
        assert!(cat.frobenius_perron_defect() < 1e-6);
    }

    #[test]
    fn closure_of_trivial_is_one_simple() {
        let a = MatrixCStarAlgebra::full_matrix(2, "M2");
        let t = FgpBimodule::trivial(&a, 1e-9).unwrap();
        let cat = generate_category(&[t], 8, 1e-9, 7).unwrap();
        assert_eq!(cat.num_simples(), 1);
        assert!(cat.is_complete());
        assert_eq!(cat.fusion_mult(0, 0, 0), 1);
    }

    #[test]
    fn s3_group_category_fusion_is_group_table() {
        let g = FiniteGroup::symmetric(3);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        assert!(cat.fusion_associativity_holds());
        for a in 0..6 {
            for b in 0..6 {
                let c = g.mul(a, b);
                for x in 0..6 {
                    assert_eq!(cat.fusion_mult(a, b, x), usize::from(x == c));
                }
            }
        }
    }
}
