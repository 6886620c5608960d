//! Brute-force ground truth on the full `2^(2M+1)`-dimensional spin space.
//!
//! Site `j ∈ −M..=M` of a row is tensor factor `j + M`; factor 0 is the most
//! significant bit of a basis index, and a set bit means spin `−1`.
//!
//! The Clifford generators, `U` and the spin operators are signed
//! permutation-with-phase matrices, so they are stored as [`MonomialOp`]s:
//! one target index and one coefficient per column. Products and
//! anticommutators of such operators stay exact and cost `O(dim)`. The
//! transfer matrices are dense real symmetric matrices:
//!
//! * `Vsym = V₂^{1/2} V₁ V₂^{1/2}`, the symmetric form used by the Fock
//!   description of the spin operator at the last site;
//! * `Vrow = V₁^{1/2} V₂ V₁^{1/2}`, the form in which `σ_j` commutes with the
//!   half-step and matrix elements coincide with those of the physical
//!   row-to-row transfer matrix.
//!
//! Both are similar to `V = V₁V₂` and share its spectrum. `V₂` is normalised
//! as the Clifford element `⊗(cosh K₂* + sinh K₂* C)`; the Boltzmann
//! row-to-row weight is `(2 sinh 2K₂)^{(2M+1)/2}` times that.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{capacity, domain, Error, Result};
use crate::rotation::Frame;
use crate::spectral::{self, CouplingParams, Sector};

/// Largest `M` accepted by [`OracleSpace::build`].
pub const DEFAULT_MAX_M: usize = 4;
/// Largest `M` accepted by [`OracleSpace::build_with_override`].
pub const OVERRIDE_MAX_M: usize = 6;
/// Largest lattice handled by [`exhaustive_partition`].
pub const MAX_EXHAUSTIVE_SITES: usize = 25;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A matrix with exactly one nonzero entry per column: `O e_j = coef[j] e_{target[j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialOp {
    target: Vec<usize>,
    coef: Vec<Complex64>,
}

/// One-site factor of a monomial tensor product.
#[derive(Debug, Clone, Copy)]
struct SiteOp {
    target: [usize; 2],
    coef: [Complex64; 2],
}

impl SiteOp {
    const ID: SiteOp = SiteOp { target: [0, 1], coef: [ONE, ONE] };
    const SIGMA: SiteOp = SiteOp { target: [0, 1], coef: [ONE, Complex64::new(-1.0, 0.0)] };
    const FLIP: SiteOp = SiteOp { target: [1, 0], coef: [ONE, ONE] };
    /// `−iσC = [[0, −i], [i, 0]]`.
    const MINUS_I_SIGMA_FLIP: SiteOp = SiteOp {
        target: [1, 0],
        coef: [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
    };
}

impl MonomialOp {
    pub fn identity(dim: usize) -> Self {
        Self { target: (0..dim).collect(), coef: vec![ONE; dim] }
    }

    fn tensor(sites: &[SiteOp]) -> Self {
        let n = sites.len();
        let dim = 1usize << n;
        let mut target = Vec::with_capacity(dim);
        let mut coef = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut t = 0usize;
            let mut c = ONE;
            for (i, op) in sites.iter().enumerate() {
                let shift = n - 1 - i;
                let bit = (j >> shift) & 1;
                t |= op.target[bit] << shift;
                c *= op.coef[bit];
            }
            target.push(t);
            coef.push(c);
        }
        Self { target, coef }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// Row index of the nonzero entry in column `j`.
    pub fn target(&self, j: usize) -> usize {
        self.target[j]
    }

    /// Value of the nonzero entry in column `j`.
    pub fn coef(&self, j: usize) -> Complex64 {
        self.coef[j]
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let (target, coef) = (0..other.dim())
            .map(|j| {
                let mid = other.target[j];
                (self.target[mid], self.coef[mid] * other.coef[j])
            })
            .unzip();
        Self { target, coef }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { target: self.target.clone(), coef: self.coef.iter().map(|c| c * s).collect() }
    }

    /// The diagonal if the operator is diagonal.
    pub fn diagonal(&self) -> Option<Vec<Complex64>> {
        self.target
            .iter()
            .enumerate()
            .all(|(j, &t)| t == j)
            .then(|| self.coef.clone())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            m[(self.target[j], j)] = self.coef[j];
        }
        m
    }

    /// `self · m`.
    pub fn apply_left(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            for j in 0..self.dim() {
                out[(self.target[j], c)] = self.coef[j] * m[(j, c)];
            }
        }
        out
    }

    /// `m · self`.
    pub fn apply_right(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for j in 0..self.dim() {
            let t = self.target[j];
            let c = self.coef[j];
            for r in 0..m.nrows() {
                out[(r, j)] = m[(r, t)] * c;
            }
        }
        out
    }

    /// `tr(self)`.
    pub fn trace(&self) -> Complex64 {
        self.target
            .iter()
            .enumerate()
            .filter(|(j, &t)| *j == t)
            .map(|(j, _)| self.coef[j])
            .sum()
    }
}

/// Largest entry of `Σ_t c_t O_t` for monomial operators of equal dimension.
pub fn monomial_sum_max(terms: &[(Complex64, &MonomialOp)]) -> f64 {
    let dim = terms.first().map_or(0, |t| t.1.dim());
    let mut worst = 0.0f64;
    let mut acc: Vec<(usize, Complex64)> = Vec::with_capacity(terms.len());
    for j in 0..dim {
        acc.clear();
        for (c, op) in terms {
            let row = op.target[j];
            let v = c * op.coef[j];
            match acc.iter_mut().find(|(r, _)| *r == row) {
                Some(slot) => slot.1 += v,
                None => acc.push((row, v)),
            }
        }
        for (_, v) in &acc {
            worst = worst.max(v.norm());
        }
    }
    worst
}

/// Sum of monomial operators, enough to hold `cosh x·I + sinh x·O` and products.
pub type MonomialSum = Vec<(Complex64, MonomialOp)>;

/// Residuals of the operator identities the construction must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CliffordResiduals {
    /// Largest entry of `{p_k, p_l} − 2δ_kl`, `{q_k, q_l} − 2δ_kl`, `{p_k, q_l}`.
    pub anticommutator: f64,
    /// Largest entry of `U² − I`.
    pub u_squared: f64,
    /// Largest entry of `UV − VU` relative to the largest entry of `V`.
    pub u_commutes_v: f64,
    /// Largest entry of `σ_j U + U σ_j` over all sites.
    pub sigma_anticommutes_u: f64,
    /// Largest entry of the difference of the two `V₁` constructions, relative.
    pub v1_two_ways: f64,
}

impl CliffordResiduals {
    pub fn max(&self) -> f64 {
        [
            self.anticommutator,
            self.u_squared,
            self.u_commutes_v,
            self.sigma_anticommutes_u,
            self.v1_two_ways,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Dense representation of the transfer matrices and their generators.
#[derive(Debug, Clone)]
pub struct OracleSpace {
    pub m: usize,
    pub n_sites: usize,
    pub dim: usize,
    pub params: CouplingParams,
    /// `p_k` for `k = −M..=M`.
    pub p: Vec<MonomialOp>,
    /// `q_k` for `k = −M..=M`.
    pub q: Vec<MonomialOp>,
    /// `U = ⊗C`.
    pub u: MonomialOp,
    /// Diagonal of `V₁`, the intra-row Boltzmann weights.
    pub v1_diag: Vec<f64>,
    /// `V₂^{1/2} V₁ V₂^{1/2}`.
    pub vsym: DMatrix<f64>,
    /// `V₁^{1/2} V₂ V₁^{1/2}`.
    pub vrow: DMatrix<f64>,
}

impl OracleSpace {
    /// Build for `M ≤ 4`.
    pub fn build(m: usize, params: &CouplingParams) -> Result<Self> {
        if m > DEFAULT_MAX_M {
            return capacity(format!(
                "oracle dimension 2^{} exceeds the M <= {DEFAULT_MAX_M} guard; use build_with_override",
                2 * m + 1
            ));
        }
        Self::construct(m, params)
    }

    /// Build for `M ≤ 6`. Memory grows as `4^(2M+1)`; `M = 6` needs about 1 GB.
    pub fn build_with_override(m: usize, params: &CouplingParams) -> Result<Self> {
        if m > OVERRIDE_MAX_M {
            return capacity(format!("oracle is limited to M <= {OVERRIDE_MAX_M}, got {m}"));
        }
        Self::construct(m, params)
    }

    fn construct(m: usize, params: &CouplingParams) -> Result<Self> {
        let n = 2 * m + 1;
        let dim = 1usize << n;
        let mut p = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        for pos in 0..n {
            let mut sites = vec![SiteOp::ID; n];
            sites[..pos].fill(SiteOp::FLIP);
            sites[pos] = SiteOp::SIGMA;
            p.push(MonomialOp::tensor(&sites));
            sites[pos] = SiteOp::MINUS_I_SIGMA_FLIP;
            q.push(MonomialOp::tensor(&sites));
        }
        let u = MonomialOp::tensor(&vec![SiteOp::FLIP; n]);
        let v1_diag: Vec<f64> = (0..dim)
            .map(|idx| (params.k1 * row_bond_sum(idx, n) as f64).exp())
            .collect();

        let (ch, sh) = ((0.5 * params.k2s).cosh(), (0.5 * params.k2s).sinh());
        let mut vsym = DMatrix::from_diagonal(&DVector::from_vec(v1_diag.clone()));
        mix_columns(&mut vsym, n, ch, sh);
        vsym.transpose_mut();
        mix_columns(&mut vsym, n, ch, sh);

        let (ch2, sh2) = (params.k2s.cosh(), params.k2s.sinh());
        let root: Vec<f64> = v1_diag.iter().map(|v| v.sqrt()).collect();
        let vrow = DMatrix::from_fn(dim, dim, |r, c| {
            let d = (r ^ c).count_ones() as i32;
            root[r] * root[c] * ch2.powi(n as i32 - d) * sh2.powi(d)
        });

        Ok(Self { m, n_sites: n, dim, params: *params, p, q, u, v1_diag, vsym, vrow })
    }

    /// Position of index `k ∈ −M..=M` in the generator lists.
    pub fn pos(&self, k: i64) -> usize {
        (k + self.m as i64) as usize
    }

    /// Diagonal of `σ_j` as ±1 values.
    pub fn sigma(&self, j: i64) -> Result<Vec<f64>> {
        if j.unsigned_abs() as usize > self.m {
            return domain(format!("site {j} outside -{0}..={0}", self.m));
        }
        let shift = self.n_sites - 1 - self.pos(j);
        Ok((0..self.dim).map(|idx| 1.0 - 2.0 * ((idx >> shift) & 1) as f64).collect())
    }

    /// `σ_j` as a monomial operator.
    pub fn sigma_op(&self, j: i64) -> Result<MonomialOp> {
        let mut sites = vec![SiteOp::ID; self.n_sites];
        if j.unsigned_abs() as usize > self.m {
            return domain(format!("site {j} outside -{0}..={0}", self.m));
        }
        sites[self.pos(j)] = SiteOp::SIGMA;
        Ok(MonomialOp::tensor(&sites))
    }

    /// `C_j`, the spin flip at site `j`.
    pub fn flip_op(&self, j: i64) -> Result<MonomialOp> {
        if j.unsigned_abs() as usize > self.m {
            return domain(format!("site {j} outside -{0}..={0}", self.m));
        }
        let mut sites = vec![SiteOp::ID; self.n_sites];
        sites[self.pos(j)] = SiteOp::FLIP;
        Ok(MonomialOp::tensor(&sites))
    }

    /// Cyclic translation, moving the spin at site `j` to site `j+1`.
    pub fn translate_index(&self, idx: usize) -> usize {
        let n = self.n_sites;
        (idx >> 1) | ((idx & 1) << (n - 1))
    }

    /// `V₁` assembled from the Clifford exponentials, including the wrap factor
    /// `exp(i K₁ p_{−M} q_M U)`.
    pub fn v1_clifford(&self) -> DMatrix<Complex64> {
        let k1 = self.params.k1;
        let (c, s) = (k1.cosh(), k1.sinh());
        let mut out = DMatrix::<Complex64>::identity(self.dim, self.dim);
        for j in 0..self.n_sites - 1 {
            let x = self.p[j + 1].mul(&self.q[j]);
            let term = x.apply_left(&out);
            out = out * Complex64::new(c, 0.0) + term * Complex64::new(0.0, -s);
        }
        let wrap = self.p[0].mul(&self.q[self.n_sites - 1]).mul(&self.u);
        let term = wrap.apply_left(&out);
        out * Complex64::new(c, 0.0) + term * Complex64::new(0.0, s)
    }

    /// `V = V₁ V₂` with the Clifford normalisation of `V₂`.
    pub fn v_product(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let (ch, sh) = (self.params.k2s.cosh(), self.params.k2s.sinh());
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let d = (r ^ c).count_ones() as i32;
            self.v1_diag[r] * ch.powi(n as i32 - d) * sh.powi(d)
        })
    }

    /// All operator identities at once.
    pub fn clifford_residuals(&self) -> CliffordResiduals {
        let n = self.n_sites;
        let id = MonomialOp::identity(self.dim);
        let mut anti = 0.0f64;
        for k in 0..n {
            for l in 0..n {
                let delta = if k == l { Complex64::new(-2.0, 0.0) } else { ZERO };
                for (x, y, d) in [
                    (&self.p[k], &self.p[l], delta),
                    (&self.q[k], &self.q[l], delta),
                    (&self.p[k], &self.q[l], ZERO),
                ] {
                    let xy = x.mul(y);
                    let yx = y.mul(x);
                    anti = anti.max(monomial_sum_max(&[(ONE, &xy), (ONE, &yx), (d, &id)]));
                }
            }
        }
        let uu = self.u.mul(&self.u);
        let u_squared = monomial_sum_max(&[(ONE, &uu), (-ONE, &id)]);

        let mut sig = 0.0f64;
        let mi = self.m as i64;
        for j in -mi..=mi {
            let s = self.sigma_op(j).expect("site in range");
            let su = s.mul(&self.u);
            let us = self.u.mul(&s);
            sig = sig.max(monomial_sum_max(&[(ONE, &su), (ONE, &us)]));
        }

        let v = self.v_product().map(|x| Complex64::new(x, 0.0));
        let vmax = crate::pfaffian::max_abs(&v);
        let comm = self.u.apply_left(&v) - self.u.apply_right(&v);
        let u_commutes_v = crate::pfaffian::max_abs(&comm) / vmax;

        CliffordResiduals {
            anticommutator: anti,
            u_squared,
            u_commutes_v,
            sigma_anticommutes_u: sig,
            v1_two_ways: self.v1_two_way_residual(),
        }
    }

    /// Largest entry of `V₁(diagonal) − V₁(Clifford)` relative to the largest weight.
    pub fn v1_two_way_residual(&self) -> f64 {
        let cliff = self.v1_clifford();
        let vmax = self.v1_diag.iter().fold(0.0f64, |a, &b| a.max(b));
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let want = if r == c { self.v1_diag[r] } else { 0.0 };
                worst = worst.max((cliff[(r, c)] - want).norm());
            }
        }
        worst / vmax
    }

    /// Torus partition function `Z = tr(V^{2N+1})` with Boltzmann weights.
    ///
    /// Evaluated from the spectrum of the symmetric transfer matrix; the
    /// Clifford normalisation of `V₂` is undone by the factor
    /// `(2 sinh 2K₂)^{(2M+1)(2N+1)/2}`.
    pub fn partition_trace(&self, n_half: usize) -> f64 {
        let rows = 2 * n_half + 1;
        let eig = SymmetricEigen::new(self.vsym.clone()).eigenvalues;
        let lmax = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let sum: f64 = eig.iter().map(|&l| (l / lmax).powi(rows as i32)).sum();
        let log_z = sum.ln()
            + rows as f64 * lmax.ln()
            + 0.5 * (self.n_sites * rows) as f64 * (2.0 * self.params.s2).ln();
        log_z.exp()
    }

    fn block_basis(&self) -> Vec<usize> {
        (0..self.dim / 2).collect()
    }

    fn block_matrix(&self, v: &DMatrix<f64>, sector: Sector) -> DMatrix<f64> {
        let sign = match sector {
            Sector::A => 1.0,
            Sector::P => -1.0,
        };
        let all = self.dim - 1;
        let basis = self.block_basis();
        let h = basis.len();
        DMatrix::from_fn(h, h, |i, j| {
            let (bi, bj) = (basis[i], basis[j]);
            0.5 * (v[(bi, bj)] + sign * v[(bi, bj ^ all)] + sign * v[(bi ^ all, bj)] + v[(bi ^ all, bj ^ all)])
        })
    }

    fn lift(&self, w: &DVector<f64>, sector: Sector) -> DVector<Complex64> {
        let sign = match sector {
            Sector::A => 1.0,
            Sector::P => -1.0,
        };
        let all = self.dim - 1;
        let mut out = DVector::zeros(self.dim);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (i, b) in self.block_basis().into_iter().enumerate() {
            out[b] += Complex64::new(w[i] * r, 0.0);
            out[b ^ all] += Complex64::new(sign * w[i] * r, 0.0);
        }
        out
    }

    fn frame_matrix(&self, frame: Frame) -> &DMatrix<f64> {
        match frame {
            Frame::Symmetric => &self.vsym,
            Frame::Row => &self.vrow,
        }
    }

    /// Eigenvalues of `Vsym` on the `U = +1` and `U = −1` subspaces, descending.
    pub fn u_block_spectra(&self) -> (Vec<f64>, Vec<f64>) {
        let spectrum = |sector| {
            let mut ev: Vec<f64> =
                SymmetricEigen::new(self.block_matrix(&self.vsym, sector)).eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            ev
        };
        (spectrum(Sector::A), spectrum(Sector::P))
    }

    /// Eigenvectors of one `U`-block, labelled by excitation masks.
    pub fn labelled_block(&self, frame: Frame, sector: Sector) -> Result<LabelledBlock> {
        let eig = SymmetricEigen::new(self.block_matrix(self.frame_matrix(frame), sector));
        let h = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..h).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let phase = Complex64::from_polar(1.0, MOMENTUM_SPLIT_PHASE);
        let mut values = Vec::with_capacity(h);
        let mut vectors: Vec<DVector<Complex64>> = Vec::with_capacity(h);
        let mut momenta = Vec::with_capacity(h);
        let mut start = 0;
        while start < h {
            let lead = eig.eigenvalues[order[start]];
            let mut end = start + 1;
            while end < h && (eig.eigenvalues[order[end]] - lead).abs() < 1e-9 * lead.abs() {
                end += 1;
            }
            let group: Vec<DVector<Complex64>> = order[start..end]
                .iter()
                .map(|&c| self.lift(&eig.eigenvectors.column(c).into_owned(), sector))
                .collect();
            let shifted: Vec<DVector<Complex64>> = group.iter().map(|v| self.translate(v)).collect();
            let g = group.len();
            let t = DMatrix::from_fn(g, g, |r, c| group[r].dotc(&shifted[c]));
            let herm = (&t * phase.conj() + t.adjoint() * phase) * Complex64::new(0.5, 0.0);
            let split = SymmetricEigen::new(herm);
            for c in 0..g {
                let mut v = DVector::zeros(self.dim);
                for (r, basis) in group.iter().enumerate() {
                    v += basis * split.eigenvectors[(r, c)];
                }
                let norm = v.norm();
                v /= Complex64::new(norm, 0.0);
                fix_phase(&mut v);
                momenta.push(v.dotc(&self.translate(&v)));
                values.push(lead);
                vectors.push(v);
            }
            start = end;
        }
        let vectors = DMatrix::from_columns(&vectors);
        label_block(&self.params, self.m, sector, frame, values, vectors, momenta)
    }

    fn translate(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for idx in 0..self.dim {
            out[self.translate_index(idx)] = v[idx];
        }
        out
    }

    /// `|⟨v_A(I), σ_M v_P(J)⟩|` over the labelled eigenbases of one frame.
    pub fn exact_spin_elements(&self, frame: Frame) -> Result<ExactSpinElements> {
        let a = self.labelled_block(frame, Sector::A)?;
        let p = self.labelled_block(frame, Sector::P)?;
        let sigma = self.sigma(self.m as i64)?;
        let h = a.vectors.ncols();
        let mut weighted = p.vectors.clone();
        for (r, s) in sigma.iter().enumerate() {
            for c in 0..h {
                weighted[(r, c)] *= s;
            }
        }
        let elements = a.vectors.adjoint() * weighted;
        let vac = elements[(a.columns_of(0)?[0], p.columns_of(0)?[0])].norm();
        Ok(ExactSpinElements { frame, m: self.m, a, p, elements, vacuum: vac })
    }

    /// `tr(σ_i V^r σ_j V^{2N+1−r}) / tr(V^{2N+1})` on the torus.
    pub fn two_point_trace(&self, n_half: usize, i: i64, j: i64, rowsep: usize) -> Result<f64> {
        let rows = 2 * n_half + 1;
        if rowsep == 0 || rowsep >= rows {
            return domain(format!("row separation must lie in 1..={}, got {rowsep}", rows - 1));
        }
        let eig = SymmetricEigen::new(self.vrow.clone());
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let w: Vec<f64> = eig.eigenvalues.iter().map(|l| l / lmax).collect();
        let vecs = &eig.eigenvectors;
        let project = |site: i64| -> Result<DMatrix<f64>> {
            let s = self.sigma(site)?;
            let mut scaled = vecs.clone();
            for (r, sv) in s.iter().enumerate() {
                for c in 0..self.dim {
                    scaled[(r, c)] *= sv;
                }
            }
            Ok(vecs.transpose() * scaled)
        };
        let si = project(i)?;
        let sj = if i == j { si.clone() } else { project(j)? };
        let wr: Vec<f64> = w.iter().map(|x| x.powi(rowsep as i32)).collect();
        let wl: Vec<f64> = w.iter().map(|x| x.powi((rows - rowsep) as i32)).collect();
        let mut num = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                num += wr[a] * wl[b] * si[(a, b)] * sj[(b, a)];
            }
        }
        let den: f64 = w.iter().map(|x| x.powi(rows as i32)).sum();
        Ok(num / den)
    }
}

/// Phase used to split translation eigenvalues inside a degenerate energy level.
const MOMENTUM_SPLIT_PHASE: f64 = 0.3;

fn fix_phase(v: &mut DVector<Complex64>) {
    let (mut best, mut big) = (ZERO, 0.0);
    for x in v.iter() {
        if x.norm() > big + 1e-12 {
            big = x.norm();
            best = *x;
        }
    }
    if big > 0.0 {
        let rot = best.conj() / big;
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Sum of `s_j s_{j+1}` around a row, with wrap.
fn row_bond_sum(idx: usize, n: usize) -> i64 {
    let spin = |i: usize| 1 - 2 * ((idx >> (n - 1 - i)) & 1) as i64;
    (0..n).map(|i| spin(i) * spin((i + 1) % n)).sum()
}

/// Right-multiply by `⊗(ch·I + sh·C)` one site at a time.
fn mix_columns(m: &mut DMatrix<f64>, n: usize, ch: f64, sh: f64) {
    let dim = 1usize << n;
    for site in 0..n {
        let bit = 1usize << (n - 1 - site);
        for c in 0..dim {
            if c & bit != 0 {
                continue;
            }
            let c2 = c | bit;
            for r in 0..m.nrows() {
                let (x, y) = (m[(r, c)], m[(r, c2)]);
                m[(r, c)] = ch * x + sh * y;
                m[(r, c2)] = sh * x + ch * y;
            }
        }
    }
}

/// A set of excitation masks that the oracle cannot tell apart, together
/// with the eigenvector columns spanning their common eigenspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelClass {
    pub masks: Vec<u64>,
    pub columns: Vec<usize>,
}

/// Eigenvectors of one `U`-block with their excitation labels.
///
/// A mask `S` (bit `i` ↔ mode `i − M`) has energy `λ₀ e^{−Σ_S γ}` and
/// translation eigenvalue `∏_{k∈S} z_k`. Sets related by `z ↦ 1/z` can share
/// both; such sets form one [`LabelClass`] and only basis-independent sums
/// over the class are meaningful.
#[derive(Debug, Clone)]
pub struct LabelledBlock {
    pub sector: Sector,
    pub frame: Frame,
    pub values: Vec<f64>,
    pub momenta: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub classes: Vec<LabelClass>,
    class_of: HashMap<u64, usize>,
}

impl LabelledBlock {
    /// Class index of a mask.
    pub fn class_of(&self, mask: u64) -> Result<usize> {
        self.class_of
            .get(&mask)
            .copied()
            .ok_or_else(|| Error::Domain(format!("mask {mask:#b} is not an even excitation set")))
    }

    /// Eigenvector columns of the class containing `mask`.
    pub fn columns_of(&self, mask: u64) -> Result<&[usize]> {
        Ok(&self.classes[self.class_of(mask)?].columns)
    }

    /// True when `mask` is the only member of its class.
    pub fn is_unique(&self, mask: u64) -> Result<bool> {
        Ok(self.classes[self.class_of(mask)?].masks.len() == 1)
    }
}

fn label_block(
    params: &CouplingParams,
    m: usize,
    sector: Sector,
    frame: Frame,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
    momenta: Vec<Complex64>,
) -> Result<LabelledBlock> {
    let n = 2 * m + 1;
    let points = spectral::spectral_points(m, sector);
    let gam = spectral::gammas(params, m, sector)?;
    let log0 = 0.5 * gam.iter().sum::<f64>();
    let mut by_candidates: HashMap<Vec<usize>, Vec<u64>> = HashMap::new();
    for mask in 0..(1u64 << n) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let energy = (log0 - members.iter().map(|&i| gam[i]).sum::<f64>()).exp();
        let mom: Complex64 = members.iter().map(|&i| points[i].z).product();
        let cand: Vec<usize> = (0..values.len())
            .filter(|&t| (values[t] - energy).abs() < 1e-8 * energy && (momenta[t] - mom).norm() < 1e-6)
            .collect();
        if cand.is_empty() {
            return Err(Error::Degenerate(format!(
                "no oracle eigenvector of the {sector} block matches mask {mask:#b} (energy {energy})"
            )));
        }
        by_candidates.entry(cand).or_default().push(mask);
    }
    let mut classes: Vec<LabelClass> = by_candidates
        .into_iter()
        .map(|(columns, mut masks)| {
            masks.sort_unstable();
            LabelClass { masks, columns }
        })
        .collect();
    classes.sort_by_key(|c| c.masks[0]);
    let mut used = vec![false; values.len()];
    for class in &classes {
        if class.masks.len() != class.columns.len() {
            return Err(Error::Degenerate(format!(
                "masks {:?} share {} eigenvectors in the {sector} block",
                class.masks,
                class.columns.len()
            )));
        }
        for &c in &class.columns {
            if used[c] {
                return Err(Error::Degenerate(format!("eigenvector {c} of the {sector} block matches two classes")));
            }
            used[c] = true;
        }
    }
    let class_of = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.masks.iter().map(move |&mk| (mk, ci)))
        .collect();
    Ok(LabelledBlock { sector, frame, values, momenta, vectors, classes, class_of })
}

/// Exact spin matrix elements `⟨v_A, σ_M v_P⟩` between labelled eigenvectors.
#[derive(Debug, Clone)]
pub struct ExactSpinElements {
    pub frame: Frame,
    pub m: usize,
    pub a: LabelledBlock,
    pub p: LabelledBlock,
    /// `elements[(α, β)] = ⟨a.vectors[α], σ_M p.vectors[β]⟩`.
    pub elements: DMatrix<Complex64>,
    /// `|⟨0_A, σ_M 0_P⟩|`.
    pub vacuum: f64,
}

impl ExactSpinElements {
    /// `|⟨v_A(I), σ_M v_P(J)⟩|` when both labels are unique, else `None`.
    pub fn modulus(&self, mask_a: u64, mask_p: u64) -> Result<Option<f64>> {
        if !(self.a.is_unique(mask_a)? && self.p.is_unique(mask_p)?) {
            return Ok(None);
        }
        let r = self.a.columns_of(mask_a)?[0];
        let c = self.p.columns_of(mask_p)?[0];
        Ok(Some(self.elements[(r, c)].norm()))
    }

    /// `Σ |⟨v, σ_M w⟩|²` over the classes of `mask_a` and `mask_p`, with the masks
    /// of each class, for comparing basis-independent sums.
    pub fn class_sum(&self, mask_a: u64, mask_p: u64) -> Result<(f64, Vec<u64>, Vec<u64>)> {
        let ca = &self.a.classes[self.a.class_of(mask_a)?];
        let cp = &self.p.classes[self.p.class_of(mask_p)?];
        let mut total = 0.0;
        for &r in &ca.columns {
            for &c in &cp.columns {
                total += self.elements[(r, c)].norm_sqr();
            }
        }
        Ok((total, ca.masks.clone(), cp.masks.clone()))
    }

    /// Largest `|element|` between states whose excitation counts differ in parity.
    ///
    /// Both blocks only contain even states, so this inspects the full
    /// `σ_M` action instead: the `U = −1` image of `σ_M` must have no
    /// component in the `U = −1` block.
    pub fn parity_leak(&self, space: &OracleSpace) -> Result<f64> {
        let sigma = space.sigma(self.m as i64)?;
        let mut worst = 0.0f64;
        let p = &self.p.vectors;
        for c in 0..p.ncols() {
            let img = DVector::from_fn(space.dim, |r, _| p[(r, c)] * sigma[r]);
            let leak = p.adjoint() * img;
            worst = worst.max(leak.iter().fold(0.0, |acc, z| acc.max(z.norm())));
        }
        Ok(worst)
    }
}

/// Torus partition function by direct summation over all configurations.
///
/// Takes raw couplings so that the free case `K₁ = K₂ = 0` can be checked.
pub fn exhaustive_partition(m: usize, n_half: usize, k1: f64, k2: f64) -> Result<f64> {
    let (cols, rows) = (2 * m + 1, 2 * n_half + 1);
    check_exhaustive(cols, rows)?;
    let mut z = 0.0;
    for_each_configuration(cols, rows, |cfg| {
        z += (k1 * horizontal(cfg, cols, rows) as f64 + k2 * vertical(cfg, cols, rows) as f64).exp();
    });
    Ok(z)
}

/// `⟨σ(0, i) σ(rowsep, j)⟩` on the torus by direct summation.
pub fn exhaustive_two_point(
    m: usize,
    n_half: usize,
    k1: f64,
    k2: f64,
    i: i64,
    j: i64,
    rowsep: usize,
) -> Result<f64> {
    let (cols, rows) = (2 * m + 1, 2 * n_half + 1);
    check_exhaustive(cols, rows)?;
    let mi = m as i64;
    if i.abs() > mi || j.abs() > mi || rowsep >= rows {
        return domain("column or row separation out of range");
    }
    let (ci, cj) = ((i + mi) as usize, (j + mi) as usize);
    let (mut z, mut acc) = (0.0, 0.0);
    for_each_configuration(cols, rows, |cfg| {
        let w = (k1 * horizontal(cfg, cols, rows) as f64 + k2 * vertical(cfg, cols, rows) as f64).exp();
        z += w;
        acc += w * (spin_at(cfg, cols, 0, ci) * spin_at(cfg, cols, rowsep, cj)) as f64;
    });
    Ok(acc / z)
}

fn check_exhaustive(cols: usize, rows: usize) -> Result<()> {
    if cols * rows > MAX_EXHAUSTIVE_SITES {
        return capacity(format!(
            "{cols}x{rows} lattice has more than {MAX_EXHAUSTIVE_SITES} sites"
        ));
    }
    Ok(())
}

fn for_each_configuration(cols: usize, rows: usize, mut f: impl FnMut(u64)) {
    for cfg in 0..(1u64 << (cols * rows)) {
        f(cfg);
    }
}

fn spin_at(cfg: u64, cols: usize, row: usize, col: usize) -> i64 {
    1 - 2 * ((cfg >> (row * cols + col)) & 1) as i64
}

fn horizontal(cfg: u64, cols: usize, rows: usize) -> i64 {
    let mut e = 0;
    for r in 0..rows {
        for c in 0..cols {
            e += spin_at(cfg, cols, r, c) * spin_at(cfg, cols, r, (c + 1) % cols);
        }
    }
    e
}

fn vertical(cfg: u64, cols: usize, rows: usize) -> i64 {
    let mut e = 0;
    for r in 0..rows {
        for c in 0..cols {
            e += spin_at(cfg, cols, r, c) * spin_at(cfg, cols, (r + 1) % rows, c);
        }
    }
    e
}

/// Induced rotation `X w X⁻¹ = T w` of an operator given as a sum of
/// monomials, in the generator basis `(q_{−M}, …, q_M, p_{−M}, …, p_M)`.
///
/// Returns `None` when the image leaves the span of the generators.
pub fn induced_rotation(space: &OracleSpace, x: &MonomialSum, x_inv: &MonomialSum) -> Option<DMatrix<Complex64>> {
    let n = space.n_sites;
    let basis: Vec<&MonomialOp> = space.q.iter().chain(space.p.iter()).collect();
    let dim = space.dim as f64;
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    for (c, b) in basis.iter().enumerate() {
        let mut image: MonomialSum = Vec::new();
        for (cx, ox) in x {
            for (ci, oi) in x_inv {
                image.push((cx * ci, ox.mul(b).mul(oi)));
            }
        }
        let mut recon: MonomialSum = Vec::new();
        for (r, br) in basis.iter().enumerate() {
            let coeff: Complex64 = image.iter().map(|(ci, oi)| ci * br.mul(oi).trace()).sum::<Complex64>() / dim;
            t[(r, c)] = coeff;
            if coeff.norm() > 0.0 {
                recon.push((-coeff, (*br).clone()));
            }
        }
        let terms: Vec<(Complex64, &MonomialOp)> = image.iter().chain(recon.iter()).map(|(c, o)| (*c, o)).collect();
        if monomial_sum_max(&terms) > 1e-10 {
            return None;
        }
    }
    Some(t)
}
