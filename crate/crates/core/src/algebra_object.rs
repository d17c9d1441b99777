//! Connected graded *-algebra objects over category data: finite-dimensional
//! fibers with multiplication components stored through the chosen
//! isometries, a unit, and a conjugate-linear star. Includes the lattice of
//! graded *-subalgebra objects.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::DVector;

use crate::examples::group::{Cocycle, FiniteGroup};
use crate::linalg::{self, CMat, C64, ONE};
use crate::tensor_cat::CategoryData;
use crate::{Error, Result};

/// A C-graded algebra object with finite-dimensional fibers.
///
/// The multiplication is stored componentwise: for each fusion row (a, b) and
/// each channel (c, α) of the category's chosen isometry family, a matrix
/// B(c) <- B(a) ⊗ B(b) with column index i * dim B(b) + j.
pub struct GradedAlgebraObject {
    category: Arc<CategoryData>,
    fiber_dims: Vec<usize>,
    mult: BTreeMap<(usize, usize), Vec<(usize, Vec<CMat>)>>,
    unit_vec: DVector<C64>,
    /// star maps j_c: B(c) -> B(c̄), conjugate-linear: matrix applied to
    /// conjugated coordinates
    star: Vec<CMat>,
    label: String,
}

impl GradedAlgebraObject {
    pub fn new(
        category: Arc<CategoryData>,
        fiber_dims: Vec<usize>,
        mult: BTreeMap<(usize, usize), Vec<(usize, Vec<CMat>)>>,
        unit_vec: DVector<C64>,
        star: Vec<CMat>,
        label: impl Into<String>,
    ) -> Result<Arc<Self>> {
        let n = category.num_simples();
        if fiber_dims.len() != n || star.len() != n {
            return Err(Error::Dimension("fiber data must match the simple count".into()));
        }
        if unit_vec.len() != fiber_dims[0] {
            return Err(Error::Dimension("unit vector must live in the unit fiber".into()));
        }
        // validate alignment of mult components with the category channels
        for ((a, b), rows) in &mult {
            let channels = category.choose_isometries(*a, *b)?;
            if rows.len() != channels.len() {
                return Err(Error::Dimension(format!(
                    "mult row ({a},{b}) has {} channels, category has {}",
                    rows.len(),
                    channels.len()
                )));
            }
            for ((c, mats), (cc, fam)) in rows.iter().zip(channels.iter()) {
                if c != cc || mats.len() != fam.len() {
                    return Err(Error::Dimension(format!(
                        "mult row ({a},{b}) is misaligned with the isometry family"
                    )));
                }
                for m in mats {
                    if m.shape() != (fiber_dims[*c], fiber_dims[*a] * fiber_dims[*b]) {
                        return Err(Error::Dimension(format!(
                            "mult component ({a},{b})->{c} has shape {:?}",
                            m.shape()
                        )));
                    }
                }
            }
        }
        for (c, j) in star.iter().enumerate() {
            let cbar = category.dual(c);
            if j.shape() != (fiber_dims[cbar], fiber_dims[c]) {
                return Err(Error::Dimension(format!("star map at label {c} has wrong shape")));
            }
        }
        Ok(Arc::new(Self {
            category,
            fiber_dims,
            mult,
            unit_vec,
            star,
            label: label.into(),
        }))
    }

    pub fn category(&self) -> &Arc<CategoryData> {
        &self.category
    }

    pub fn fiber_dim(&self, c: usize) -> usize {
        self.fiber_dims[c]
    }

    pub fn fiber_dims(&self) -> &[usize] {
        &self.fiber_dims
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.fiber_dims.len())
            .filter(|&c| self.fiber_dims[c] > 0)
            .collect()
    }

    pub fn unit_vec(&self) -> &DVector<C64> {
        &self.unit_vec
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mult_row(&self, a: usize, b: usize) -> Option<&Vec<(usize, Vec<CMat>)>> {
        self.mult.get(&(a, b))
    }

    /// Apply j_c to a fiber vector.
    pub fn star_apply(&self, c: usize, v: &DVector<C64>) -> DVector<C64> {
        let conj = DVector::from_iterator(v.len(), v.iter().map(|z| z.conj()));
        &self.star[c] * conj
    }

    pub fn star_matrix(&self, c: usize) -> &CMat {
        &self.star[c]
    }

    /// Is the object connected (one-dimensional unit fiber)?
    pub fn is_connected(&self) -> bool {
        self.fiber_dims[0] == 1
    }

    /// Canonical fiber inner product (f|g) at label c: the unit-fiber
    /// coefficient of m_{c̄,c}(j_c f ⊗ g) through the channel onto the unit.
    pub fn fiber_gram(&self, c: usize) -> Result<CMat> {
        let d = self.fiber_dims[c];
        if d == 0 {
            return Ok(CMat::zeros(0, 0));
        }
        let cbar = self.category.dual(c);
        let rows = self
            .mult
            .get(&(cbar, c))
            .ok_or_else(|| Error::Config(format!("mult row ({cbar},{c}) missing")))?;
        let unit_row = rows
            .iter()
            .find(|(ch, _)| *ch == self.category.unit_label())
            .ok_or_else(|| Error::Config(format!("no unit channel in row ({cbar},{c})")))?;
        if unit_row.1.len() != 1 {
            return Err(Error::Config("unit channel multiplicity must be 1".into()));
        }
        let m = &unit_row.1[0];
        let mut gram = CMat::zeros(d, d);
        let dbar = self.fiber_dims[cbar];
        for i in 0..d {
            let mut ei = DVector::zeros(d);
            ei[i] = ONE;
            let ji = self.star_apply(c, &ei);
            for j in 0..d {
                // coefficient of m(j_c e_i ⊗ e_j) against the unit vector
                let mut pair = DVector::<C64>::zeros(dbar * d);
                for (r, z) in ji.iter().enumerate() {
                    pair[r * d + j] = *z;
                }
                let out = m * pair;
                // unit fiber is 1-dimensional for connected objects
                gram[(i, j)] = out[0] / self.unit_vec[0];
            }
        }
        Ok(gram)
    }

    /// dim B(c) <= ||Ind_W(F(c))|| for every label.
    pub fn dimension_bound_ok(&self) -> bool {
        (0..self.fiber_dims.len()).all(|c| {
            self.fiber_dims[c] == 0
                || (self.fiber_dims[c] as f64)
                    <= self.category.watatani(c).operator_norm() + 1e-9
        })
    }

    /// Machine-readable summary.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "fiber_dims": self.fiber_dims,
            "support": self.support(),
        })
    }
}

/// The trivial object: fiber C at the unit only.
pub fn trivial_object(category: &Arc<CategoryData>) -> Result<Arc<GradedAlgebraObject>> {
    let n = category.num_simples();
    let mut fiber_dims = vec![0usize; n];
    fiber_dims[0] = 1;
    let mut mult = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let channels = category.choose_isometries(a, b)?;
            let rows: Vec<(usize, Vec<CMat>)> = channels
                .iter()
                .map(|(c, fam)| {
                    let mats = fam
                        .iter()
                        .map(|_| {
                            let rows = fiber_dims[*c];
                            let cols = fiber_dims[a] * fiber_dims[b];
                            let mut m = CMat::zeros(rows, cols);
                            if a == 0 && b == 0 && *c == 0 {
                                m[(0, 0)] = ONE;
                            }
                            m
                        })
                        .collect();
                    (*c, mats)
                })
                .collect();
            mult.insert((a, b), rows);
        }
    }
    let mut star = Vec::with_capacity(n);
    for c in 0..n {
        let cbar = category.dual(c);
        star.push(CMat::from_fn(fiber_dims[cbar], fiber_dims[c], |_, _| ONE));
    }
    GradedAlgebraObject::new(
        category.clone(),
        fiber_dims,
        mult,
        DVector::from_element(1, ONE),
        star,
        "unit-object",
    )
}

/// The (twisted) group algebra object over a pointed group category: fiber C
/// for each subgroup element, multiplication twisted by a normalized
/// 2-cocycle, star j_h(z) = conj(ω(h,h⁻¹)) conj(z).
pub fn group_algebra_object(
    category: &Arc<CategoryData>,
    group: &Arc<FiniteGroup>,
    subgroup: &[usize],
    cocycle: &Cocycle,
) -> Result<Arc<GradedAlgebraObject>> {
    cocycle.validate(group)?;
    let n = category.num_simples();
    if n != group.order() {
        return Err(Error::Config(
            "group algebra object needs the pointed category of the same group".into(),
        ));
    }
    let inside: BTreeSet<usize> = subgroup.iter().cloned().collect();
    if !inside.contains(&0) {
        return Err(Error::Config("subgroup must contain the identity".into()));
    }
    for &g in &inside {
        if !inside.contains(&group.inv(g)) {
            return Err(Error::Config(format!(
                "subgroup set is not closed under inverse at {g}"
            )));
        }
        for &h in &inside {
            if !inside.contains(&group.mul(g, h)) {
                return Err(Error::Config(format!(
                    "subgroup set is not closed under product at ({g},{h})"
                )));
            }
        }
    }
    let fiber_dims: Vec<usize> = (0..n).map(|c| usize::from(inside.contains(&c))).collect();
    let mut mult = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let channels = category.choose_isometries(a, b)?;
            let rows: Vec<(usize, Vec<CMat>)> = channels
                .iter()
                .map(|(c, fam)| {
                    let mats = fam
                        .iter()
                        .map(|_| {
                            let rows = fiber_dims[*c];
                            let cols = fiber_dims[a] * fiber_dims[b];
                            let mut m = CMat::zeros(rows, cols);
                            if rows == 1 && cols == 1 {
                                m[(0, 0)] = cocycle.value(a, b);
                            }
                            m
                        })
                        .collect();
                    (*c, mats)
                })
                .collect();
            mult.insert((a, b), rows);
        }
    }
    let mut star = Vec::with_capacity(n);
    for c in 0..n {
        let cbar = category.dual(c);
        let mut m = CMat::zeros(fiber_dims[cbar], fiber_dims[c]);
        if fiber_dims[c] == 1 && fiber_dims[cbar] == 1 {
            m[(0, 0)] = cocycle.value(c, group.inv(c)).conj();
        }
        star.push(m);
    }
    let sub_names: Vec<&str> = subgroup.iter().map(|&g| group.name(g)).collect();
    GradedAlgebraObject::new(
        category.clone(),
        fiber_dims,
        mult,
        DVector::from_element(1, ONE),
        star,
        format!("C[{}<{}]", sub_names.join(","), group.label()),
    )
}

/// A node of the Galois lattice: a graded *-subalgebra object described by
/// fiberwise subspaces (here: full fibers on a support set).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubObjectNode {
    pub support: Vec<usize>,
}

impl SubObjectNode {
    pub fn contains(&self, other: &SubObjectNode) -> bool {
        other.support.iter().all(|c| self.support.binary_search(c).is_ok())
    }
}

/// Lattice of graded *-subalgebra objects containing the unit fiber.
///
/// For multiplicity-free pointed objects (all fiber dimensions <= 1) this is
/// an exact support-set enumeration closed under the multiplication and star
/// support maps. For higher-dimensional fibers only full-or-zero fiber
/// profiles are searched, capped by `cap` candidates.
pub fn galois_lattice(
    object: &Arc<GradedAlgebraObject>,
    cap: usize,
) -> Result<Vec<SubObjectNode>> {
    let cat = object.category();
    let n = cat.num_simples();
    let support = object.support();
    if support.len() > 24 {
        return Err(Error::SearchCap(format!(
            "support of size {} exceeds the exhaustive search bound",
            support.len()
        )));
    }
    let approx_space = 1usize << support.len().min(60);
    if approx_space > cap {
        return Err(Error::SearchCap(format!(
            "candidate profile space 2^{} exceeds the cap {cap}",
            support.len()
        )));
    }
    // closure of a support set under multiplication channels and star
    let closure = |start: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut set = start.clone();
        set.insert(0);
        loop {
            let mut grew = false;
            let members: Vec<usize> = set.iter().cloned().collect();
            for &a in &members {
                let abar = cat.dual(a);
                if object.fiber_dim(abar) > 0 && set.insert(abar) {
                    grew = true;
                }
                for &b in &members {
                    if let Some(rows) = object.mult_row(a, b) {
                        for (c, mats) in rows {
                            let nonzero = mats.iter().any(|m| linalg::op_norm(m) > 1e-12);
                            if nonzero && object.fiber_dim(*c) > 0 && set.insert(*c) {
                                grew = true;
                            }
                        }
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    };
    if object.fiber_dims().iter().any(|&d| d > 1) {
        // full-or-zero profile walk
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let base = closure(&BTreeSet::new());
        found.insert(base.iter().cloned().collect());
        let mut frontier: Vec<BTreeSet<usize>> = vec![base];
        while let Some(s) = frontier.pop() {
            for &c in &support {
                if s.contains(&c) {
                    continue;
                }
                let mut bigger = s.clone();
                bigger.insert(c);
                let closed = closure(&bigger);
                if !closed.iter().all(|x| object.fiber_dim(*x) > 0) {
                    continue;
                }
                if found.insert(closed.iter().cloned().collect()) {
                    frontier.push(closed);
                }
            }
            if found.len() > cap {
                return Err(Error::SearchCap(format!(
                    "more than {cap} candidate subobjects"
                )));
            }
        }
        return Ok(found
            .into_iter()
            .map(|support| SubObjectNode { support })
            .collect());
    }
    // multiplicity-free: enumerate all closed subsets by breadth-first closure
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let base = closure(&BTreeSet::new());
    found.insert(base.iter().cloned().collect());
    let mut frontier: Vec<BTreeSet<usize>> = vec![base];
    while let Some(s) = frontier.pop() {
        for &c in &support {
            if s.contains(&c) {
                continue;
            }
            let mut bigger = s.clone();
            bigger.insert(c);
            let closed = closure(&bigger);
            if found.insert(closed.iter().cloned().collect()) {
                frontier.push(closed);
            }
        }
        if found.len() > cap {
            return Err(Error::SearchCap(format!("more than {cap} candidate subobjects")));
        }
    }
    let mut out: Vec<SubObjectNode> = found
        .into_iter()
        .map(|support| SubObjectNode { support })
        .collect();
    out.sort();
    let _ = n;
    Ok(out)
}

/// Restrict an object to a subobject node (full fibers on the support).
pub fn restrict_to_node(
    object: &Arc<GradedAlgebraObject>,
    node: &SubObjectNode,
) -> Result<Arc<GradedAlgebraObject>> {
    let cat = object.category().clone();
    let n = cat.num_simples();
    let keep: BTreeSet<usize> = node.support.iter().cloned().collect();
    let fiber_dims: Vec<usize> = (0..n)
        .map(|c| if keep.contains(&c) { object.fiber_dim(c) } else { 0 })
        .collect();
    let mut mult = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let channels = cat.choose_isometries(a, b)?;
            let rows: Vec<(usize, Vec<CMat>)> = channels
                .iter()
                .map(|(c, fam)| {
                    let mats = fam
                        .iter()
                        .enumerate()
                        .map(|(ai, _)| {
                            let rows_d = fiber_dims[*c];
                            let cols = fiber_dims[a] * fiber_dims[b];
                            if rows_d == 0 || cols == 0 {
                                CMat::zeros(rows_d, cols)
                            } else {
                                object
                                    .mult_row(a, b)
                                    .map(|r| r[channel_index(r, *c)].1[ai].clone())
                                    .unwrap_or_else(|| CMat::zeros(rows_d, cols))
                            }
                        })
                        .collect();
                    (*c, mats)
                })
                .collect();
            mult.insert((a, b), rows);
        }
    }
    let mut star = Vec::with_capacity(n);
    for c in 0..n {
        let cbar = cat.dual(c);
        if fiber_dims[c] == 0 || fiber_dims[cbar] == 0 {
            star.push(CMat::zeros(fiber_dims[cbar], fiber_dims[c]));
        } else {
            star.push(object.star_matrix(c).clone());
        }
    }
    GradedAlgebraObject::new(
        cat,
        fiber_dims,
        mult,
        object.unit_vec().clone(),
        star,
        format!("{}|support{:?}", object.label(), node.support),
    )
}

fn channel_index(rows: &[(usize, Vec<CMat>)], c: usize) -> usize {
    rows.iter().position(|(ch, _)| *ch == c).expect("channel present")
}

/// Corrupt one multiplication entry; negative-control helper for axiom checks.
pub fn corrupt_mult_entry(
    object: &Arc<GradedAlgebraObject>,
    a: usize,
    b: usize,
    bump: C64,
) -> Result<Arc<GradedAlgebraObject>> {
    let cat = object.category().clone();
    let n = cat.num_simples();
    let mut mult = BTreeMap::new();
    for x in 0..n {
        for y in 0..n {
            let rows = object
                .mult_row(x, y)
                .cloned()
                .ok_or_else(|| Error::Config("missing mult row".into()))?;
            mult.insert((x, y), rows);
        }
    }
    if let Some(rows) = mult.get_mut(&(a, b)) {
        let mut bumped = false;
        for (_, mats) in rows.iter_mut() {
            for m in mats.iter_mut() {
                if m.nrows() > 0 && m.ncols() > 0 {
                    m[(0, 0)] += bump;
                    bumped = true;
                    break;
                }
            }
            if bumped {
                break;
            }
        }
        if !bumped {
            return Err(Error::Config(format!("mult row ({a},{b}) has no nonzero entry")));
        }
    }
    let star = (0..n).map(|c| object.star_matrix(c).clone()).collect();
    GradedAlgebraObject::new(
        cat,
        object.fiber_dims().to_vec(),
        mult,
        object.unit_vec().clone(),
        star,
        format!("{}+corrupted", object.label()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::group::GroupActionModel;
    use crate::tensor_cat::group_category;

    #[test]
    fn z4_galois_lattice_matches_subgroups() {
        let g = FiniteGroup::cyclic(4);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let obj = group_algebra_object(&cat, &g, &all, &Cocycle::trivial(&g)).unwrap();
        let lattice = galois_lattice(&obj, 1 << 20).unwrap();
        let mut supports: Vec<Vec<usize>> = lattice.into_iter().map(|n| n.support).collect();
        supports.sort();
        let mut expected = g.subgroups();
        expected.sort();
        assert_eq!(supports, expected);
    }

    #[test]
    fn trivial_object_lattice_is_singleton() {
        let g = FiniteGroup::cyclic(3);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let obj = trivial_object(&cat).unwrap();
        let lattice = galois_lattice(&obj, 1 << 20).unwrap();
        assert_eq!(lattice.len(), 1);
        assert_eq!(lattice[0].support, vec![0]);
    }

    #[test]
    fn s3_galois_lattice_matches_subgroup_oracle() {
        let g = FiniteGroup::symmetric(3);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let obj = group_algebra_object(&cat, &g, &all, &Cocycle::trivial(&g)).unwrap();
        let lattice = galois_lattice(&obj, 1 << 20).unwrap();
        let mut supports: Vec<Vec<usize>> = lattice.into_iter().map(|n| n.support).collect();
        supports.sort();
        let mut expected = g.subgroups();
        expected.sort();
        assert_eq!(supports, expected);
    }

    #[test]
    fn fiber_gram_positive_for_group_objects() {
        let g = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..4).collect();
        for cocycle in [Cocycle::trivial(&g), Cocycle::sign_z2z2()] {
            let obj = group_algebra_object(&cat, &g, &all, &cocycle).unwrap();
            assert!(obj.is_connected());
            assert!(obj.dimension_bound_ok());
            for c in 0..4 {
                let gram = obj.fiber_gram(c).unwrap();
                let (vals, _) = linalg::herm_eigen(&gram);
                assert!(vals[0] > 1e-10, "fiber {c} gram {:?}", vals);
            }
        }
    }

    #[test]
    fn subgroup_validation_rejects_non_closed_sets() {
        let g = FiniteGroup::cyclic(4);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let err = group_algebra_object(&cat, &g, &[0, 1], &Cocycle::trivial(&g));
        assert!(err.is_err());
    }
}

// ---------------------------------------------------------------------------
// axiom verification through the realized graded algebra
// ---------------------------------------------------------------------------

/// Per-axiom defect report for a graded *-algebra object.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AlgebraObjectReport {
    pub connected: bool,
    pub unit_defect: f64,
    pub assoc_defect: f64,
    pub star_involution_defect: f64,
    pub star_unit_defect: f64,
    pub star_antimult_defect: f64,
    pub fiber_gram_min: f64,
    pub dimension_bound_ok: bool,
    pub max_defect: f64,
}

impl AlgebraObjectReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.connected && self.dimension_bound_ok && self.fiber_gram_min > 1e-10 && self.max_defect < tol
    }
}

/// Verify the algebra-object axioms on the realized graded algebra over the
/// given window: unitality and associativity of the graded multiplication,
/// involutivity and anti-multiplicativity of the star, the canonical fiber
/// inner products, and the Watatani dimension bound. Products are probed on
/// fiber bases tensored with the right-basis module vectors plus seeded
/// random vectors; window overflow during a probe skips that probe triple.
pub fn check_algebra_object(
    object: &Arc<GradedAlgebraObject>,
    window: &[usize],
    samples: usize,
    seed: u64,
) -> Result<AlgebraObjectReport> {
    use crate::crossed_product::CrossedAlgebra;
    use rand::SeedableRng;
    let cat = object.category().clone();
    let cp = CrossedAlgebra::new(cat.clone(), object.clone(), window.to_vec())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let support: Vec<usize> = window
        .iter()
        .cloned()
        .filter(|&c| object.fiber_dim(c) > 0)
        .collect();

    // probe elements: pure tensors on right-basis vectors with fiber basis
    let mut probes = Vec::new();
    for &c in &support {
        let k = cat.simple(c);
        let db = object.fiber_dim(c);
        let u = k.right_pp_basis().into_iter().next().expect("right basis");
        for j in 0..db {
            let mut f = nalgebra::DVector::zeros(db);
            f[j] = ONE;
            probes.push(cp.pure(c, &u, &f)?);
        }
    }
    for _ in 0..samples {
        probes.push(cp.random(&mut rng, &support));
    }

    let one = cp.one();
    let mut unit_defect: f64 = 0.0;
    for x in &probes {
        unit_defect = unit_defect.max(cp.mul(&one, x)?.distance(x));
        unit_defect = unit_defect.max(cp.mul(x, &one)?.distance(x));
    }

    let mut assoc_defect: f64 = 0.0;
    let mut star_involution_defect: f64 = 0.0;
    let mut star_antimult_defect: f64 = 0.0;
    for (i, x) in probes.iter().enumerate() {
        let xs = cp.star(x)?;
        star_involution_defect = star_involution_defect.max(cp.star(&xs)?.distance(x));
        for (j, y) in probes.iter().enumerate() {
            if (i + j) % 3 != 0 && probes.len() > 12 {
                continue;
            }
            match (cp.mul(x, y), cp.star(&cp.mul(x, y).unwrap_or_else(|_| cp.zero()))) {
                (Ok(xy), Ok(xy_star)) => {
                    let ys = cp.star(y)?;
                    let rhs = cp.mul(&ys, &xs)?;
                    star_antimult_defect = star_antimult_defect.max(xy_star.distance(&rhs));
                    for z in probes.iter().take(4) {
                        if let (Ok(l), Ok(r)) = (cp.mul(&xy, z), cp.mul(y, z).and_then(|yz| cp.mul(x, &yz))) {
                            assoc_defect = assoc_defect.max(l.distance(&r));
                        }
                    }
                }
                _ => continue,
            }
        }
    }

    let star_unit_defect = cp.star(&one)?.distance(&one);

    let mut fiber_gram_min = f64::INFINITY;
    for &c in &support {
        let gram = object.fiber_gram(c)?;
        if gram.nrows() == 0 {
            continue;
        }
        let herm = (&gram + gram.adjoint()) * crate::linalg::cr(0.5);
        let herm_defect = linalg::op_norm(&(&gram - &herm));
        let (vals, _) = linalg::herm_eigen(&herm);
        let minval = vals.first().cloned().unwrap_or(0.0) - herm_defect;
        fiber_gram_min = fiber_gram_min.min(minval);
    }
    if fiber_gram_min == f64::INFINITY {
        fiber_gram_min = 1.0;
    }

    let max_defect = unit_defect
        .max(assoc_defect)
        .max(star_involution_defect)
        .max(star_unit_defect)
        .max(star_antimult_defect);
    Ok(AlgebraObjectReport {
        connected: object.is_connected(),
        unit_defect,
        assoc_defect,
        star_involution_defect,
        star_unit_defect,
        star_antimult_defect,
        fiber_gram_min,
        dimension_bound_ok: object.dimension_bound_ok(),
        max_defect,
    })
}

#[cfg(test)]
mod axiom_tests {
    use super::*;
    use crate::examples::group::GroupActionModel;
    use crate::tensor_cat::group_category;

    #[test]
    fn group_algebra_object_passes_axioms() {
        let g = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..4).collect();
        for cocycle in [Cocycle::trivial(&g), Cocycle::sign_z2z2()] {
            let obj = group_algebra_object(&cat, &g, &all, &cocycle).unwrap();
            let report = check_algebra_object(&obj, &all, 3, 17).unwrap();
            assert!(report.passes(1e-10), "{report:?}");
        }
    }

    #[test]
    fn corrupted_mult_fails_associativity() {
        let g = FiniteGroup::cyclic(4);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let obj = group_algebra_object(&cat, &g, &all, &Cocycle::trivial(&g)).unwrap();
        let bad = corrupt_mult_entry(&obj, 1, 1, crate::linalg::cr(0.5)).unwrap();
        let report = check_algebra_object(&bad, &all, 3, 17).unwrap();
        assert!(report.assoc_defect > 1e-6, "{report:?}");
        assert!(!report.passes(1e-10));
    }

    #[test]
    fn trivial_object_passes() {
        let g = FiniteGroup::cyclic(3);
        let model = GroupActionModel::inner_regular(&g);
        let cat = group_category(&model, 1e-9).unwrap();
        let obj = trivial_object(&cat).unwrap();
        let report = check_algebra_object(&obj, &[0, 1, 2], 3, 17).unwrap();
        assert!(report.passes(1e-10), "{report:?}");
    }
}
