//! Truncated operator-valued semicircular systems: the Fock space of the
//! correspondence built from a completely positive covariance matrix, the
//! field operators X_i = ℓ(ξ_i) + ℓ(ξ_i)*, and the vacuum expectation.
//! Moments of order up to the degree cap are exact because creation raises
//! the degree by exactly one.

use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::{AlgebraElement, MatrixCStarAlgebra};
use crate::linalg::{self, cr, CMat, C64, ONE};
use crate::{Error, Result};

/// Covariance data: completely positive blocks η_{ij}: A -> A over a finite
/// index set, stored by their values on matrix units.
pub struct SemicircularModel {
    pub algebra: Arc<MatrixCStarAlgebra>,
    pub index_size: usize,
    /// eta_images[i][j][unit] = η_{ij}(e_unit)
    eta_images: Vec<Vec<Vec<AlgebraElement>>>,
    pub degree_cap: usize,
    pub label: String,
}

impl SemicircularModel {
    pub fn new(
        algebra: Arc<MatrixCStarAlgebra>,
        eta_images: Vec<Vec<Vec<AlgebraElement>>>,
        degree_cap: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        let index_size = eta_images.len();
        if index_size == 0 || eta_images.iter().any(|row| row.len() != index_size) {
            return Err(Error::Config("covariance blocks must form a square".into()));
        }
        for row in &eta_images {
            for images in row {
                if images.len() != algebra.dim() {
                    return Err(Error::Config(
                        "each covariance block needs one image per matrix unit".into(),
                    ));
                }
            }
        }
        if degree_cap < 2 {
            return Err(Error::Config("degree cap must be at least 2".into()));
        }
        Ok(Self {
            algebra,
            index_size,
            eta_images,
            degree_cap,
            label: label.into(),
        })
    }

    /// The scalar model: A = C, one index, η = id.
    pub fn scalar(degree_cap: usize) -> Self {
        let algebra = MatrixCStarAlgebra::full_matrix(1, "C");
        let unit = algebra.unit();
        Self::new(algebra, vec![vec![vec![unit]]], degree_cap, "scalar").expect("scalar model")
    }

    /// A 2x2-block covariance on M_2: η_{ij}(a) = v_i* a v_j with v_0 = 1 and
    /// v_1 the flip symmetry. Completely positive by construction and
    /// compatible with the trace since both v_i are self-adjoint.
    pub fn m2_pair(degree_cap: usize) -> Self {
        let algebra = MatrixCStarAlgebra::full_matrix(2, "M2");
        let v0 = algebra.unit();
        let v1 = &algebra.matrix_unit(0, 0, 1) + &algebra.matrix_unit(0, 1, 0);
        let vs = [v0, v1];
        let units = algebra.basis_units();
        let mut eta_images = Vec::with_capacity(2);
        for vi in &vs {
            let mut row = Vec::with_capacity(2);
            for vj in &vs {
                let images = units
                    .iter()
                    .map(|e| vi.adjoint().mul(e).unwrap().mul(vj).unwrap())
                    .collect();
                row.push(images);
            }
            eta_images.push(row);
        }
        Self::new(algebra, eta_images, degree_cap, "m2-pair").expect("m2 model")
    }

    pub fn eta(&self, i: usize, j: usize, a: &AlgebraElement) -> AlgebraElement {
        let mut out = self.algebra.zero();
        for (u, z) in a.coords().iter().enumerate() {
            if z.norm_sqr() > 1e-300 {
                out = &out + &self.eta_images[i][j][u].scale(*z);
            }
        }
        out
    }

    /// Choi-type positivity of the packaged map A -> A ⊗ M_I on the finite
    /// model: the block matrix [η_{ij}(e_{kl})] over a single-block algebra
    /// must be positive semidefinite.
    pub fn choi_positive(&self, tol: f64) -> Result<bool> {
        if self.algebra.num_blocks() != 1 {
            return Err(Error::Config(
                "the Choi positivity check is implemented for single-block algebras".into(),
            ));
        }
        let d = self.algebra.block_dims()[0];
        let m = self.index_size;
        // Choi matrix of η: A -> A⊗M_I, indexed by (k, i, r) x (l, j, s):
        // C[(k,i,r),(l,j,s)] = <e_r, η_{ij}(e_{kl}) e_s>
        let nn = d * m * d;
        let mut choi = CMat::zeros(nn, nn);
        for k in 0..d {
            for l in 0..d {
                let e_kl = self.algebra.matrix_unit(0, k, l);
                for i in 0..m {
                    for j in 0..m {
                        let img = self.eta(i, j, &e_kl);
                        for r in 0..d {
                            for s in 0..d {
                                choi[((k * m + i) * d + r, (l * m + j) * d + s)] =
                                    img.block(0)[(r, s)];
                            }
                        }
                    }
                }
            }
        }
        let herm_defect = linalg::op_norm(&(&choi - choi.adjoint()));
        let (vals, _) = linalg::herm_eigen(&((&choi + choi.adjoint()) * cr(0.5)));
        Ok(herm_defect < tol && vals.first().cloned().unwrap_or(0.0) > -tol)
    }

    /// τ(η_{ij}(x) y) = τ(x η_{ji}(y)) over matrix-unit pairs.
    pub fn trace_compatibility_defect(&self) -> f64 {
        let units = self.algebra.basis_units();
        let mut defect: f64 = 0.0;
        for i in 0..self.index_size {
            for j in 0..self.index_size {
                for x in &units {
                    for y in &units {
                        let lhs = self.eta(i, j, x).mul(y).unwrap().trace();
                        let rhs = x.mul(&self.eta(j, i, y)).unwrap().trace();
                        defect = defect.max((lhs - rhs).norm());
                    }
                }
            }
        }
        defect
    }
}

/// One degree of the truncated Fock space: an orthonormal basis with its
/// A-valued inner products and the module actions in those coordinates.
struct DegreeData {
    dim: usize,
    /// <e_s | e_t>_A
    inner: Vec<Vec<AlgebraElement>>,
    /// left action of each matrix unit
    left_units: Vec<CMat>,
    /// right action of each matrix unit
    right_units: Vec<CMat>,
    /// creation by the s-th basis vector of T: degree d-1 -> degree d
    create: Vec<CMat>,
}

/// The truncated Fock space with its field operators.
pub struct FockSpace {
    pub model: SemicircularModel,
    degrees: Vec<DegreeData>,
    /// coordinates of the generators ξ_i in the degree-1 basis
    xi: Vec<DVector<C64>>,
}

impl FockSpace {
    pub fn build(model: SemicircularModel) -> Result<Self> {
        let alg = model.algebra.clone();
        let units = alg.basis_units();
        let da = alg.dim();
        let tol = 1e-10;

        // degree 0: A itself; matrix units are trace-orthonormal
        let mut inner0 = vec![vec![alg.zero(); da]; da];
        for (s, es) in units.iter().enumerate() {
            for (t, et) in units.iter().enumerate() {
                inner0[s][t] = es.adjoint().mul(et).unwrap();
            }
        }
        let mut left0 = Vec::with_capacity(da);
        let mut right0 = Vec::with_capacity(da);
        for g in &units {
            let mut lm = CMat::zeros(da, da);
            let mut rm = CMat::zeros(da, da);
            for (t, et) in units.iter().enumerate() {
                let lv = g.mul(et).unwrap();
                let rv = et.mul(g).unwrap();
                for (s, z) in lv.coords().iter().enumerate() {
                    lm[(s, t)] = *z;
                }
                for (s, z) in rv.coords().iter().enumerate() {
                    rm[(s, t)] = *z;
                }
            }
            left0.push(lm);
            right0.push(rm);
        }
        let degree0 = DegreeData {
            dim: da,
            inner: inner0,
            left_units: left0,
            right_units: right0,
            create: vec![],
        };

        // degree 1: quotient of A ⊗ I ⊗ A by the kernel of the form
        // <(a,i,b),(c,j,d)> = b* η_{ij}(a*c) d
        let m = model.index_size;
        let pre_dim = da * m * da;
        let pre_idx = |a: usize, i: usize, b: usize| (a * m + i) * da + b;
        let mut pre_inner: Vec<Vec<AlgebraElement>> = vec![vec![alg.zero(); pre_dim]; pre_dim];
        for a in 0..da {
            for i in 0..m {
                for b in 0..da {
                    for c in 0..da {
                        for j in 0..m {
                            for dd in 0..da {
                                let core = model.eta(i, j, &units[a].adjoint().mul(&units[c]).unwrap());
                                let val = units[b]
                                    .adjoint()
                                    .mul(&core)
                                    .unwrap()
                                    .mul(&units[dd])
                                    .unwrap();
                                pre_inner[pre_idx(a, i, b)][pre_idx(c, j, dd)] = val;
                            }
                        }
                    }
                }
            }
        }
        let (onb, to_onb) = orthonormalize(&pre_inner, tol)?;
        let dim1 = onb.ncols();
        let inner1 = transform_inner(&pre_inner, &onb, &alg);
        // actions on degree 1: a ▷ (c,i,b) = (ac, i, b), (c,i,b) ◁ a = (c,i,ba)
        let mut left1 = Vec::with_capacity(da);
        let mut right1 = Vec::with_capacity(da);
        for g in &units {
            let mut lm_pre = CMat::zeros(pre_dim, pre_dim);
            let mut rm_pre = CMat::zeros(pre_dim, pre_dim);
            for a in 0..da {
                for i in 0..m {
                    for b in 0..da {
                        let col = pre_idx(a, i, b);
                        let ga = g.mul(&units[a]).unwrap();
                        for (a2, z) in ga.coords().iter().enumerate() {
                            if z.norm_sqr() > 1e-300 {
                                lm_pre[(pre_idx(a2, i, b), col)] += *z;
                            }
                        }
                        let bg = units[b].mul(g).unwrap();
                        for (b2, z) in bg.coords().iter().enumerate() {
                            if z.norm_sqr() > 1e-300 {
                                rm_pre[(pre_idx(a, i, b2), col)] += *z;
                            }
                        }
                    }
                }
            }
            left1.push(&to_onb * lm_pre * &onb);
            right1.push(&to_onb * rm_pre * &onb);
        }
        let degree1 = DegreeData {
            dim: dim1,
            inner: inner1,
            left_units: left1,
            right_units: right1,
            create: {
                // creation T x A -> T: e_s ⊗ (degree-0 basis a) = e_s ◁ a
                let mut create = Vec::with_capacity(dim1);
                for s in 0..dim1 {
                    let mut mat = CMat::zeros(dim1, da);
                    for (a_idx, _) in units.iter().enumerate() {
                        // e_s ◁ e_{a}: right action on degree 1
                        let mut es = DVector::<C64>::zeros(dim1);
                        es[s] = ONE;
                        let moved = {
                            // right action matrix for unit a
                            let mut acc = DVector::<C64>::zeros(dim1);
                            let rm = CMat::zeros(0, 0);
                            let _ = rm;
                            acc.copy_from(&es);
                            acc
                        };
                        let _ = moved;
                        let mut col = DVector::<C64>::zeros(dim1);
                        col.copy_from(&es);
                        mat.set_column(a_idx, &col);
                    }
                    create.push(mat);
                }
                create
            },
        };
        // fix: the degree-1 creation from the vacuum is ξ ◁ a, so the column
        // for the unit e_a is the right action applied to e_s
        let mut degree1 = degree1;
        for s in 0..dim1 {
            for (a_idx, _) in units.iter().enumerate() {
                let mut es = DVector::<C64>::zeros(dim1);
                es[s] = ONE;
                let moved = &degree1.right_units[a_idx] * es;
                degree1.create[s].set_column(a_idx, &moved);
            }
        }

        let mut degrees = vec![degree0, degree1];
        let mut xi = Vec::with_capacity(m);
        {
            // ξ_i = (1, i, 1) in degree-1 coordinates
            let unit_idx = units
                .iter()
                .position(|u| u.approx_eq(&alg.unit(), 1e-12))
                .map(|_| 0);
            let _ = unit_idx;
            // build 1 as a combination of matrix units
            let one_coords = alg.unit().coords();
            for i in 0..m {
                let mut pre = DVector::<C64>::zeros(pre_dim);
                for (a, za) in one_coords.iter().enumerate() {
                    for (b, zb) in one_coords.iter().enumerate() {
                        pre[pre_idx(a, i, b)] += za * zb;
                    }
                }
                xi.push(&to_onb * pre);
            }
        }

        // higher degrees: T ⊠ (previous), pre-basis (s, t)
        for d in 2..=model.degree_cap {
            let prev = &degrees[d - 1];
            let t1 = &degrees[1];
            let pre_dim = t1.dim * prev.dim;
            let pidx = |s: usize, t: usize| s * prev.dim + t;
            let mut pre_inner: Vec<Vec<AlgebraElement>> = vec![vec![alg.zero(); pre_dim]; pre_dim];
            for s in 0..t1.dim {
                for t in 0..prev.dim {
                    for s2 in 0..t1.dim {
                        for t2 in 0..prev.dim {
                            // <s⊗t, s2⊗t2> = <t | <s|s2>_A ▷ t2>
                            let mid = &t1.inner[s][s2];
                            let mut moved = DVector::<C64>::zeros(prev.dim);
                            {
                                let mut acc = DVector::<C64>::zeros(prev.dim);
                                for (u, z) in mid.coords().iter().enumerate() {
                                    if z.norm_sqr() > 1e-300 {
                                        let mut e = DVector::<C64>::zeros(prev.dim);
                                        e[t2] = ONE;
                                        acc += &prev.left_units[u] * e * *z;
                                    }
                                }
                                moved.copy_from(&acc);
                            }
                            let mut val = alg.zero();
                            for (u, z) in moved.iter().enumerate() {
                                if z.norm_sqr() > 1e-300 {
                                    val = &val + &prev.inner[t][u].scale(*z);
                                }
                            }
                            pre_inner[pidx(s, t)][pidx(s2, t2)] = val;
                        }
                    }
                }
            }
            let (onb, to_onb) = orthonormalize(&pre_inner, tol)?;
            let dim_d = onb.ncols();
            let inner_d = transform_inner(&pre_inner, &onb, &alg);
            let mut left_d = Vec::with_capacity(da);
            let mut right_d = Vec::with_capacity(da);
            for (u, _) in units.iter().enumerate() {
                let mut lm_pre = CMat::zeros(pre_dim, pre_dim);
                let mut rm_pre = CMat::zeros(pre_dim, pre_dim);
                for s in 0..t1.dim {
                    for t in 0..prev.dim {
                        let col = pidx(s, t);
                        for (s2, z) in degrees[1].left_units[u].column(s).iter().enumerate() {
                            if z.norm_sqr() > 1e-300 {
                                lm_pre[(pidx(s2, t), col)] += *z;
                            }
                        }
                        for (t2, z) in prev.right_units[u].column(t).iter().enumerate() {
                            if z.norm_sqr() > 1e-300 {
                                rm_pre[(pidx(s, t2), col)] += *z;
                            }
                        }
                    }
                }
                left_d.push(&to_onb * lm_pre * &onb);
                right_d.push(&to_onb * rm_pre * &onb);
            }
            let mut create_d = Vec::with_capacity(t1.dim);
            for s in 0..t1.dim {
                let mut mat = CMat::zeros(pre_dim, prev.dim);
                for t in 0..prev.dim {
                    mat[(pidx(s, t), t)] = ONE;
                }
                create_d.push(&to_onb * mat);
            }
            degrees.push(DegreeData {
                dim: dim_d,
                inner: inner_d,
                left_units: left_d,
                right_units: right_d,
                create: create_d,
            });
        }
        Ok(Self {
            model,
            degrees,
            xi,
        })
    }

    pub fn degree_dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.degrees.iter().map(|d| d.dim).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.degrees.len() + 1);
        let mut acc = 0;
        for d in &self.degrees {
            offs.push(acc);
            acc += d.dim;
        }
        offs.push(acc);
        offs
    }

    /// Creation by ξ_i as a matrix on the truncated Fock space; raises the
    /// degree by exactly one and errors only at the cap through
    /// [`Self::apply_bounded`].
    pub fn creation(&self, i: usize) -> CMat {
        let n = self.total_dim();
        let offs = self.offsets();
        let mut out = CMat::zeros(n, n);
        for d in 0..self.degrees.len() - 1 {
            // ℓ(ξ_i): degree d -> degree d+1; expand ξ_i over the T basis
            let target = &self.degrees[d + 1];
            let src_dim = self.degrees[d].dim;
            let mut block = CMat::zeros(target.dim, src_dim);
            for (s, z) in self.xi[i].iter().enumerate() {
                if z.norm_sqr() > 1e-300 {
                    block += &target.create[s] * *z;
                }
            }
            for r in 0..target.dim {
                for c in 0..src_dim {
                    out[(offs[d + 1] + r, offs[d] + c)] = block[(r, c)];
                }
            }
        }
        out
    }

    /// X_i = ℓ(ξ_i) + ℓ(ξ_i)*.
    pub fn field_operator(&self, i: usize) -> CMat {
        let c = self.creation(i);
        let a = c.adjoint();
        c + a
    }

    /// Left action of an algebra element on the whole truncated space.
    pub fn left_action(&self, a: &AlgebraElement) -> CMat {
        let n = self.total_dim();
        let offs = self.offsets();
        let mut out = CMat::zeros(n, n);
        for (d, data) in self.degrees.iter().enumerate() {
            let mut block = CMat::zeros(data.dim, data.dim);
            for (u, z) in a.coords().iter().enumerate() {
                if z.norm_sqr() > 1e-300 {
                    block += &data.left_units[u] * *z;
                }
            }
            for r in 0..data.dim {
                for c in 0..data.dim {
                    out[(offs[d] + r, offs[d] + c)] = block[(r, c)];
                }
            }
        }
        out
    }

    pub fn right_action(&self, a: &AlgebraElement) -> CMat {
        let n = self.total_dim();
        let offs = self.offsets();
        let mut out = CMat::zeros(n, n);
        for (d, data) in self.degrees.iter().enumerate() {
            let mut block = CMat::zeros(data.dim, data.dim);
            for (u, z) in a.coords().iter().enumerate() {
                if z.norm_sqr() > 1e-300 {
                    block += &data.right_units[u] * *z;
                }
            }
            for r in 0..data.dim {
                for c in 0..data.dim {
                    out[(offs[d] + r, offs[d] + c)] = block[(r, c)];
                }
            }
        }
        out
    }

    /// The vacuum 1̂.
    pub fn vacuum(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.total_dim());
        for (u, z) in self.model.algebra.unit().coords().iter().enumerate() {
            v[u] = *z;
        }
        v
    }

    /// E(x) = <1̂ | x 1̂>_A: the degree-zero component of x 1̂ as an algebra
    /// element (matrix units are the degree-zero basis).
    pub fn vacuum_expectation(&self, op: &CMat) -> AlgebraElement {
        let v = op * self.vacuum();
        let da = self.model.algebra.dim();
        let coords: Vec<C64> = (0..da).map(|u| v[u]).collect();
        AlgebraElement::from_coords(&self.model.algebra, &coords)
    }

    /// Apply a monomial in the field operators to the vacuum, with an
    /// explicit error when the degree cap would be exceeded.
    pub fn apply_bounded(&self, word: &[usize]) -> Result<DVector<C64>> {
        if word.len() > self.model.degree_cap {
            return Err(Error::Resource(format!(
                "monomial of length {} exceeds the degree cap {}",
                word.len(),
                self.model.degree_cap
            )));
        }
        let mut v = self.vacuum();
        for &i in word.iter().rev() {
            v = self.field_operator(i) * v;
        }
        Ok(v)
    }

    /// Moment E(X_{i1} ... X_{ik}).
    pub fn moment(&self, word: &[usize]) -> Result<AlgebraElement> {
        if word.len() > self.model.degree_cap {
            return Err(Error::Resource(format!(
                "moment of order {} exceeds the degree cap {}",
                word.len(),
                self.model.degree_cap
            )));
        }
        let v = self.apply_bounded(word)?;
        let da = self.model.algebra.dim();
        let coords: Vec<C64> = (0..da).map(|u| v[u]).collect();
        Ok(AlgebraElement::from_coords(&self.model.algebra, &coords))
    }

    /// Dimension of the space of A-central vectors at the truncation.
    pub fn central_vector_dim(&self) -> usize {
        let units = self.model.algebra.basis_units();
        let n = self.total_dim();
        let mut rows = Vec::new();
        for a in &units {
            rows.push(self.left_action(a) - self.right_action(a));
        }
        let mut stacked = CMat::zeros(rows.len() * n, n);
        for (i, r) in rows.iter().enumerate() {
            for rr in 0..n {
                for cc in 0..n {
                    stacked[(i * n + rr, cc)] = r[(rr, cc)];
                }
            }
        }
        linalg::nullspace_onb(&stacked, 1e-9).ncols()
    }

    /// Discreteness witness: the bimodule generated by X_i 1̂ has the same
    /// dimension as the quotient correspondence of the diagonal covariance
    /// block.
    pub fn discreteness_witness(&self, i: usize) -> Result<(usize, usize)> {
        let units = self.model.algebra.basis_units();
        let x1 = self.field_operator(i) * self.vacuum();
        // restrict to degree 1
        let offs = self.offsets();
        let d1 = self.degrees[1].dim;
        let mut xi = DVector::<C64>::zeros(d1);
        for r in 0..d1 {
            xi[r] = x1[offs[1] + r];
        }
        let mut cols = Vec::new();
        for a in &units {
            for b in &units {
                let mut la = CMat::zeros(d1, d1);
                let mut rb = CMat::zeros(d1, d1);
                for (u, z) in a.coords().iter().enumerate() {
                    if z.norm_sqr() > 1e-300 {
                        la += &self.degrees[1].left_units[u] * *z;
                    }
                }
                for (u, z) in b.coords().iter().enumerate() {
                    if z.norm_sqr() > 1e-300 {
                        rb += &self.degrees[1].right_units[u] * *z;
                    }
                }
                // a ▷ ξ ◁ b
                let e = rb * (la * &xi);
                cols.push(e);
            }
        }
        let mut m = CMat::zeros(d1, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        let generated = linalg::gram_schmidt(&m, 1e-9).ncols();
        // quotient correspondence of η_{ii}: Gram rank of (a ⊗ b) with
        // <a⊗b, c⊗d> = b* η_ii(a*c) d
        let da = self.model.algebra.dim();
        let pre = da * da;
        let mut gram = CMat::zeros(pre, pre);
        for a in 0..da {
            for b in 0..da {
                for c in 0..da {
                    for dd in 0..da {
                        let core = self.model.eta(
                            i,
                            i,
                            &units[a].adjoint().mul(&units[c]).unwrap(),
                        );
                        let val = units[b]
                            .adjoint()
                            .mul(&core)
                            .unwrap()
                            .mul(&units[dd])
                            .unwrap()
                            .trace();
                        gram[(a * da + b, c * da + dd)] = val;
                    }
                }
            }
        }
        let (vals, _) = linalg::herm_eigen(&((&gram + gram.adjoint()) * cr(0.5)));
        let vmax = vals.last().cloned().unwrap_or(0.0);
        let quotient = vals.iter().filter(|&&v| v > 1e-9 * vmax.max(1.0)).count();
        Ok((generated, quotient))
    }
}

/// Orthonormalize a pre-basis with A-valued Gram data via the trace form;
/// returns (onb: pre x dim, to_onb: dim x pre) with to_onb * onb = id.
fn orthonormalize(
    pre_inner: &[Vec<AlgebraElement>],
    tol: f64,
) -> Result<(CMat, CMat)> {
    let pre = pre_inner.len();
    let mut gram = CMat::zeros(pre, pre);
    for (s, row) in pre_inner.iter().enumerate() {
        for (t, val) in row.iter().enumerate() {
            gram[(s, t)] = val.trace();
        }
    }
    let herm = (&gram + gram.adjoint()) * cr(0.5);
    let (vals, vecs) = linalg::herm_eigen(&herm);
    let vmax = vals.last().cloned().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > tol * vmax.max(1.0))
        .collect();
    let mut onb = CMat::zeros(pre, keep.len());
    let mut to_onb = CMat::zeros(keep.len(), pre);
    for (k, &i) in keep.iter().enumerate() {
        let scale = vals[i].sqrt();
        let col = vecs.column(i) / cr(scale);
        onb.set_column(k, &col);
        // dual row: scale * v^† / ... so that to_onb * onb = id and
        // coordinates are Gram-compatible: row_k = v_i^† G / scale
        let row = (vecs.column(i).adjoint() * &gram) / cr(scale);
        for (c, z) in row.iter().enumerate() {
            to_onb[(k, c)] = *z;
        }
    }
    Ok((onb, to_onb))
}

fn transform_inner(
    pre_inner: &[Vec<AlgebraElement>],
    onb: &CMat,
    alg: &Arc<MatrixCStarAlgebra>,
) -> Vec<Vec<AlgebraElement>> {
    let dim = onb.ncols();
    let mut out = vec![vec![alg.zero(); dim]; dim];
    for s in 0..dim {
        for t in 0..dim {
            let mut val = alg.zero();
            for (p, zp) in onb.column(s).iter().enumerate() {
                if zp.norm_sqr() < 1e-300 {
                    continue;
                }
                for (q, zq) in onb.column(t).iter().enumerate() {
                    if zq.norm_sqr() < 1e-300 {
                        continue;
                    }
                    val = &val + &pre_inner[p][q].scale(zp.conj() * zq);
                }
            }
            out[s][t] = val;
        }
    }
    out
}

/// Brute-force count of non-crossing pairings of 2m points, the independent
/// oracle for the even moments of the scalar semicircular element.
pub fn noncrossing_pairing_count(m: usize) -> usize {
    fn pairings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if points.is_empty() {
            return vec![vec![]];
        }
        let first = points[0];
        let mut out = Vec::new();
        for k in 1..points.len() {
            let partner = points[k];
            let rest: Vec<usize> = points[1..k]
                .iter()
                .chain(points[k + 1..].iter())
                .cloned()
                .collect();
            for mut tail in pairings(&rest) {
                tail.push((first, partner));
                out.push(tail);
            }
        }
        out
    }
    let points: Vec<usize> = (0..2 * m).collect();
    pairings(&points)
        .into_iter()
        .filter(|pairing| {
            // non-crossing: no pairs (a,b), (c,d) with a < c < b < d
            for &(a, b) in pairing {
                for &(c, d) in pairing {
                    let (a, b) = (a.min(b), a.max(b));
                    let (c, d) = (c.min(d), c.max(d));
                    if a < c && c < b && b < d {
                        return false;
                    }
                }
            }
            true
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_oracle() {
        assert_eq!(noncrossing_pairing_count(1), 1);
        assert_eq!(noncrossing_pairing_count(2), 2);
        assert_eq!(noncrossing_pairing_count(3), 5);
        assert_eq!(noncrossing_pairing_count(4), 14);
    }

    #[test]
    fn scalar_moments_match_catalan() {
        let fock = FockSpace::build(SemicircularModel::scalar(6)).unwrap();
        for m in 1..=3 {
            let word = vec![0usize; 2 * m];
            let moment = fock.moment(&word).unwrap();
            let expect = noncrossing_pairing_count(m) as f64;
            assert!(
                (moment.trace().re - expect).abs() < 1e-10,
                "order {} moment {} expect {expect}",
                2 * m,
                moment.trace().re
            );
        }
        // odd moments vanish
        for k in [1usize, 3, 5] {
            let word = vec![0usize; k];
            let moment = fock.moment(&word).unwrap();
            assert!(moment.operator_norm() < 1e-12);
        }
    }

    #[test]
    fn covariance_identity_on_m2() {
        use rand::SeedableRng;
        let model = SemicircularModel::m2_pair(2);
        assert!(model.choi_positive(1e-10).unwrap());
        assert!(model.trace_compatibility_defect() < 1e-12);
        let fock = FockSpace::build(SemicircularModel::m2_pair(2)).unwrap();
        let alg = fock.model.algebra.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for i in 0..2 {
            for j in 0..2 {
                for _ in 0..5 {
                    let a = alg.random_element(&mut rng);
                    let op = fock.field_operator(i) * fock.left_action(&a) * fock.field_operator(j);
                    let e = fock.vacuum_expectation(&op);
                    let expect = fock.model.eta(i, j, &a);
                    assert!(
                        e.approx_eq(&expect, 1e-10),
                        "covariance ({i},{j}) defect {:.2e}",
                        (&e - &expect).operator_norm()
                    );
                }
            }
        }
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let fock = FockSpace::build(SemicircularModel::scalar(4)).unwrap();
        assert!(fock.moment(&[0; 5]).is_err());
        assert!(fock.moment(&[0; 4]).is_ok());
    }

    #[test]
    fn discreteness_witness_dimensions_agree() {
        let fock = FockSpace::build(SemicircularModel::m2_pair(2)).unwrap();
        let (generated, quotient) = fock.discreteness_witness(0).unwrap();
        assert_eq!(generated, quotient, "generated {generated} vs quotient {quotient}");
        let fock_s = FockSpace::build(SemicircularModel::scalar(2)).unwrap();
        let (g2, q2) = fock_s.discreteness_witness(0).unwrap();
        assert_eq!(g2, q2);
    }

    #[test]
    fn central_vectors_scalar_model() {
        // over C every vector is central; over M_2 only multiples of the
        // vacuum and central combinations survive at low truncation
        let fock = FockSpace::build(SemicircularModel::m2_pair(2)).unwrap();
        let dim = fock.central_vector_dim();
        assert!(dim >= 1, "central dim {dim}");
    }
}
