//! ADMM on the homogeneous self-dual embedding.
//!
//! The problem `min c'x : Ax = b, x in K` is rewritten in constraint
//! form as
//!
//!     min c'x   s.t.  [A; -S] x + s = [b; 0],   s in {0}^m x K',
//!
//! where S selects the non-free blocks of x, so the variable vector is
//! unconstrained and every cone lives in the constraint space. The
//! embedding variable is u = (x, y, tau) with the usual skew matrix Q;
//! each iteration solves one cached linear system, projects, and
//! over-relaxes. Ruiz equilibration with block-uniform row scaling keeps
//! the cones invariant.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::cones::project_block;
use super::{ConeBlock, ConicProblem, ConicSolution, Residuals, SolveOptions, SolveStatus};

const CHECK_EVERY: usize = 25;
const RUIZ_ITERS: usize = 10;
const TAU_FLOOR: f64 = 1e-12;

struct RowCone {
    block: ConeBlock,
    offset: usize, // into the full row space (after the m_eq zero rows)
}

struct Embedding {
    nvars: usize,
    nrows: usize,
    // scaled data
    entries: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    c: Vec<f64>,
    // original data for unscaled residuals
    entries0: Vec<(usize, usize, f64)>,
    b0: Vec<f64>,
    c0: Vec<f64>,
    // scaling: row scales d, col scales e, rhs/obj scalars rho/sigma
    d: Vec<f64>,
    e: Vec<f64>,
    rho: f64,
    sigma: f64,
    row_cones: Vec<RowCone>,
    chol: Cholesky<f64, Dyn>,
    g: Vec<f64>,        // cached M^-1 h
    denom: f64,         // 1 + h' M^-1 h
    h: Vec<f64>,        // (c, b) scaled
}

impl Embedding {
    fn build(p: &ConicProblem) -> Self {
        let nvars = p.num_vars();
        let m_eq = p.a.nrows;
        // attached rows: -I over each non-free block
        let mut entries0 = p.a.entries.clone();
        let mut row_cones = Vec::new();
        let mut row = m_eq;
        let mut col = 0usize;
        for &block in &p.blocks {
            let dim = block.dim();
            if !matches!(block, ConeBlock::Free(_)) {
                row_cones.push(RowCone {
                    block,
                    offset: row,
                });
                for k in 0..dim {
                    entries0.push((row + k, col + k, -1.0));
                }
                row += dim;
            }
            col += dim;
        }
        let nrows = row;
        let mut b0 = vec![0.0; nrows];
        b0[..m_eq].copy_from_slice(&p.b);
        let c0 = p.c.clone();

        // Ruiz equilibration with block-uniform row scaling
        let mut d = vec![1.0; nrows];
        let mut e = vec![1.0; nvars];
        for _ in 0..RUIZ_ITERS {
            let mut row_norm = vec![0.0f64; nrows];
            let mut col_norm = vec![0.0f64; nvars];
            for &(i, j, v) in &entries0 {
                let s = (d[i] * v * e[j]).abs();
                row_norm[i] = row_norm[i].max(s);
                col_norm[j] = col_norm[j].max(s);
            }
            // uniform scale inside soc/psd row blocks
            for rc in &row_cones {
                if matches!(rc.block, ConeBlock::Soc(_) | ConeBlock::Psd(_)) {
                    let dim = rc.block.dim();
                    let m = row_norm[rc.offset..rc.offset + dim]
                        .iter()
                        .cloned()
                        .fold(0.0, f64::max);
                    for r in rc.offset..rc.offset + dim {
                        row_norm[r] = m;
                    }
                }
            }
            for (i, rn) in row_norm.iter().enumerate() {
                if *rn > 0.0 {
                    d[i] /= rn.sqrt();
                }
            }
            for (j, cn) in col_norm.iter().enumerate() {
                if *cn > 0.0 {
                    e[j] /= cn.sqrt();
                }
            }
        }
        let entries: Vec<(usize, usize, f64)> = entries0
            .iter()
            .map(|&(i, j, v)| (i, j, d[i] * v * e[j]))
            .collect();
        let mut b: Vec<f64> = b0.iter().enumerate().map(|(i, &v)| d[i] * v).collect();
        let mut c: Vec<f64> = c0.iter().enumerate().map(|(j, &v)| e[j] * v).collect();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cnorm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = 1.0 / bnorm.max(1e-9);
        let sigma = 1.0 / cnorm.max(1e-9);
        for v in b.iter_mut() {
            *v *= rho;
        }
        for v in c.iter_mut() {
            *v *= sigma;
        }

        // factor I + A'A (dense; problems here stay a few hundred columns)
        let mut gram = DMatrix::<f64>::identity(nvars, nvars);
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in &entries {
            by_row[i].push((j, v));
        }
        for row_entries in &by_row {
            for &(j1, v1) in row_entries {
                for &(j2, v2) in row_entries {
                    gram[(j1, j2)] += v1 * v2;
                }
            }
        }
        let chol = loop {
            match Cholesky::new(gram.clone()) {
                Some(c) => break c,
                None => {
                    for i in 0..nvars {
                        gram[(i, i)] += 1e-10;
                    }
                }
            }
        };

        let mut emb = Self {
            nvars,
            nrows,
            entries,
            b,
            c,
            entries0,
            b0,
            c0,
            d,
            e,
            rho,
            sigma,
            row_cones,
            chol,
            g: Vec::new(),
            denom: 0.0,
            h: Vec::new(),
        };
        let mut h = emb.c.clone();
        h.extend_from_slice(&emb.b);
        let g = emb.solve_m(&h);
        let hg: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
        emb.h = h;
        emb.g = g;
        emb.denom = 1.0 + hg;
        emb
    }

    fn mul_a(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, v) in &self.entries {
            out[i] += v * x[j];
        }
    }

    fn mul_at(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, v) in &self.entries {
            out[j] += v * y[i];
        }
    }

    /// Solve [[I, A'], [-A, I]] p = r.
    fn solve_m(&self, r: &[f64]) -> Vec<f64> {
        let (rx, ry) = r.split_at(self.nvars);
        let mut atry = vec![0.0; self.nvars];
        self.mul_at(ry, &mut atry);
        let rhs = DVector::from_fn(self.nvars, |j, _| rx[j] - atry[j]);
        let px = self.chol.solve(&rhs);
        let mut apx = vec![0.0; self.nrows];
        self.mul_a(px.as_slice(), &mut apx);
        let mut out = Vec::with_capacity(self.nvars + self.nrows);
        out.extend_from_slice(px.as_slice());
        for i in 0..self.nrows {
            out.push(ry[i] + apx[i]);
        }
        out
    }

    /// Solve (I + Q) z = w for the embedding variable w = (w_xy, w_tau).
    fn solve_linear(&self, w: &[f64]) -> Vec<f64> {
        let dim = self.nvars + self.nrows;
        let w_xy = &w[..dim];
        let w_tau = w[dim];
        let m_w = self.solve_m(w_xy);
        let h_mw: f64 = self.h.iter().zip(&m_w).map(|(a, b)| a * b).sum();
        let z_tau = (w_tau + h_mw) / self.denom;
        let mut z = Vec::with_capacity(dim + 1);
        for j in 0..dim {
            z.push(m_w[j] - z_tau * self.g[j]);
        }
        z.push(z_tau);
        z
    }

    /// Project u = (x, y, tau) onto R^n x C* x R_+.
    fn project_u(&self, u: &mut [f64]) {
        // x free; y: equality rows free, attached rows onto their cones
        for rc in &self.row_cones {
            let lo = self.nvars + rc.offset;
            let hi = lo + rc.block.dim();
            project_block(rc.block, &mut u[lo..hi]);
        }
        let t = self.nvars + self.nrows;
        if u[t] < 0.0 {
            u[t] = 0.0;
        }
    }

    /// Unscaled candidate (x, y, s) from embedding iterates.
    fn candidate(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let tau = u[self.nvars + self.nrows].max(TAU_FLOOR);
        let x: Vec<f64> = (0..self.nvars)
            .map(|j| self.e[j] * u[j] / (self.rho * tau))
            .collect();
        let y: Vec<f64> = (0..self.nrows)
            .map(|i| self.d[i] * u[self.nvars + i] / (self.sigma * tau))
            .collect();
        let s: Vec<f64> = (0..self.nrows)
            .map(|i| v[self.nvars + i] / (self.d[i] * self.rho * tau))
            .collect();
        (x, y, s)
    }

    fn unscaled_residuals(&self, x: &[f64], y: &[f64], s: &[f64]) -> (Residuals, f64, f64) {
        let mut ax = vec![0.0; self.nrows];
        for &(i, j, v) in &self.entries0 {
            ax[i] += v * x[j];
        }
        let bnorm = self.b0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cnorm = self.c0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pres = (0..self.nrows)
            .map(|i| (ax[i] + s[i] - self.b0[i]).powi(2))
            .sum::<f64>()
            .sqrt()
            / (1.0 + bnorm);
        let mut aty = vec![0.0; self.nvars];
        for &(i, j, v) in &self.entries0 {
            aty[j] += v * y[i];
        }
        let dres = (0..self.nvars)
            .map(|j| (aty[j] + self.c0[j]).powi(2))
            .sum::<f64>()
            .sqrt()
            / (1.0 + cnorm);
        let pobj: f64 = self.c0.iter().zip(x).map(|(a, b)| a * b).sum();
        let dobj_neg: f64 = self.b0.iter().zip(y).map(|(a, b)| a * b).sum();
        let gap = (pobj + dobj_neg).abs() / (1.0 + pobj.abs() + dobj_neg.abs());
        (
            Residuals {
                primal: pres,
                dual: dres,
                gap,
            },
            pobj,
            -dobj_neg,
        )
    }
}

/// One relaxed Douglas-Rachford step of the embedding: (u, v) packed as
/// a single state vector.
fn dr_step(emb: &Embedding, z: &[f64]) -> Vec<f64> {
    let dim = z.len() / 2;
    let (u, v) = z.split_at(dim);
    let mut w = vec![0.0; dim];
    for k in 0..dim {
        w[k] = u[k] + v[k];
    }
    let ut = emb.solve_linear(&w);
    let alpha = 1.5;
    let mut u_next = vec![0.0; dim];
    for k in 0..dim {
        let rel = alpha * ut[k] + (1.0 - alpha) * u[k];
        u_next[k] = rel - v[k];
        w[k] = rel;
    }
    emb.project_u(&mut u_next);
    let mut out = Vec::with_capacity(2 * dim);
    out.extend_from_slice(&u_next);
    for k in 0..dim {
        out.push(v[k] + u_next[k] - w[k]);
    }
    out
}

/// Anderson memory: fixed-point images and residuals of recent iterates.
struct Anderson {
    images: Vec<Vec<f64>>,
    resids: Vec<Vec<f64>>,
    cap: usize,
}

impl Anderson {
    fn new(cap: usize) -> Self {
        Self {
            images: Vec::new(),
            resids: Vec::new(),
            cap,
        }
    }

    fn clear(&mut self) {
        self.images.clear();
        self.resids.clear();
    }

    fn push(&mut self, g: Vec<f64>, f: Vec<f64>) {
        self.images.push(g);
        self.resids.push(f);
        if self.images.len() > self.cap {
            self.images.remove(0);
            self.resids.remove(0);
        }
    }

    /// Extrapolated iterate minimizing the combined residual, or `None`
    /// when the memory is too short or degenerate.
    fn extrapolate(&self) -> Option<Vec<f64>> {
        let m = self.images.len();
        if m < 2 {
            return None;
        }
        let dim = self.images[0].len();
        let f_last = &self.resids[m - 1];
        // columns: f_last - f_i for i < m-1
        let cols = m - 1;
        let mut df = nalgebra::DMatrix::zeros(dim, cols);
        for c in 0..cols {
            for r in 0..dim {
                df[(r, c)] = f_last[r] - self.resids[c][r];
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(f_last);
        let svd = df.svd(true, true);
        let gamma = svd.solve(&rhs, 1e-12).ok()?;
        let mut z = self.images[m - 1].clone();
        for c in 0..cols {
            let gc = gamma[c];
            if !gc.is_finite() {
                return None;
            }
            for r in 0..dim {
                z[r] -= gc * (self.images[m - 1][r] - self.images[c][r]);
            }
        }
        Some(z)
    }
}

pub(super) fn admm_solve(p: &ConicProblem, opts: &SolveOptions) -> ConicSolution {
    let emb = Embedding::build(p);
    let dim = emb.nvars + emb.nrows + 1;
    let mut z = match &p.warm_start {
        Some((u0, v0)) if u0.len() == dim && v0.len() == dim => {
            let mut z = u0.clone();
            z.extend_from_slice(v0);
            z
        }
        _ => {
            let mut z = vec![0.0; 2 * dim];
            z[dim - 1] = 1.0;
            z[2 * dim - 1] = 1.0;
            z
        }
    };

    let mut best: Option<(Residuals, Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)> = None;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = opts.max_iter;

    let mut aa = Anderson::new(10);
    let mut prev_nf = f64::INFINITY;
    let mut fallback: Option<Vec<f64>> = None;
    let mut from_aa = false;

    for it in 0..opts.max_iter {
        let g = dr_step(&emb, &z);
        let mut nf2 = 0.0;
        let mut f = vec![0.0; 2 * dim];
        for k in 0..2 * dim {
            f[k] = g[k] - z[k];
            nf2 += f[k] * f[k];
        }
        let nf = nf2.sqrt();
        // safeguard: plain DR never increases the fixed-point residual,
        // so an increase after an Anderson jump means the jump was bad
        if from_aa && nf > prev_nf {
            if let Some(fb) = fallback.take() {
                z = fb;
                aa.clear();
                from_aa = false;
                continue;
            }
        }
        prev_nf = nf;
        fallback = Some(g.clone());
        aa.push(g.clone(), f);
        let (u, v) = g.split_at(dim);

        match aa.extrapolate() {
            Some(znext) => {
                z = znext;
                from_aa = true;
            }
            None => {
                z = g.clone();
                from_aa = false;
            }
        }

        if it % 10_000 == 9_999 && std::env::var_os("SPIKESOLVE_DEBUG").is_some() {
            let (x, y, s) = emb.candidate(u, v);
            let (res, pobj, _) = emb.unscaled_residuals(&x, &y, &s);
            let unorm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let vnorm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            eprintln!(
                "it {it}: nf={nf:.3e} from_aa={from_aa} res=({:.1e},{:.1e},{:.1e}) obj={pobj:.6e} tau={:.3e} kappa={:.3e} |u|={unorm:.3e} |v|={vnorm:.3e}",
                res.primal, res.dual, res.gap, u[dim - 1], v[dim - 1]
            );
        }
        if it % CHECK_EVERY == CHECK_EVERY - 1 || it + 1 == opts.max_iter || nf < 1e-14 {
            let tau = u[dim - 1];
            let unorm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            if tau > 1e-9 * unorm.max(1.0) {
                let (x, y, s) = emb.candidate(u, v);
                let (res, pobj, dobj) = emb.unscaled_residuals(&x, &y, &s);
                let better = best
                    .as_ref()
                    .map(|(r, ..)| {
                        res.primal.max(res.dual).max(res.gap) < r.primal.max(r.dual).max(r.gap)
                    })
                    .unwrap_or(true);
                if better {
                    best = Some((res, x, y, s, pobj, dobj));
                }
                let (res, ..) = best.as_ref().unwrap();
                if res.primal <= opts.tol && res.dual <= opts.tol && res.gap <= opts.tol {
                    status = SolveStatus::Optimal;
                    iterations = it + 1;
                    break;
                }
            } else {
                // certificate tests on the homogeneous directions
                let ydir: Vec<f64> = (0..emb.nrows)
                    .map(|i| emb.d[i] * u[emb.nvars + i] / emb.sigma)
                    .collect();
                let bty: f64 = emb.b0.iter().zip(&ydir).map(|(a, b)| a * b).sum();
                if bty < 0.0 {
                    let mut aty = vec![0.0; emb.nvars];
                    for &(i, j, val) in &emb.entries0 {
                        aty[j] += val * ydir[i];
                    }
                    let n_aty = aty.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if n_aty * (1.0 + emb.b0.iter().map(|a| a * a).sum::<f64>().sqrt())
                        <= opts.tol * (-bty)
                    {
                        status = SolveStatus::Infeasible;
                        iterations = it + 1;
                        break;
                    }
                }
                let xdir: Vec<f64> = (0..emb.nvars).map(|j| emb.e[j] * u[j] / emb.rho).collect();
                let sdir: Vec<f64> = (0..emb.nrows)
                    .map(|i| v[emb.nvars + i] / (emb.d[i] * emb.rho))
                    .collect();
                let ctx: f64 = emb.c0.iter().zip(&xdir).map(|(a, b)| a * b).sum();
                if ctx < 0.0 {
                    let mut ax = vec![0.0; emb.nrows];
                    for &(i, j, val) in &emb.entries0 {
                        ax[i] += val * xdir[j];
                    }
                    let n_axs = (0..emb.nrows)
                        .map(|i| (ax[i] + sdir[i]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if n_axs * (1.0 + emb.c0.iter().map(|a| a * a).sum::<f64>().sqrt())
                        <= opts.tol * (-ctx)
                    {
                        status = SolveStatus::Unbounded;
                        iterations = it + 1;
                        break;
                    }
                }
            }
        }
    }

    let (uf, vf) = z.split_at(dim);
    let (res, x, y, _s, pobj, dobj) = best.unwrap_or_else(|| {
        let (x, y, s) = emb.candidate(uf, vf);
        let (res, pobj, dobj) = emb.unscaled_residuals(&x, &y, &s);
        (res, x, y, s, pobj, dobj)
    });
    ConicSolution {
        status,
        x,
        y,
        primal_obj: pobj,
        dual_obj: dobj,
        residuals: res,
        iterations,
        warm_start: (uf.to_vec(), vf.to_vec()),
    }
}
