//! Euclidean projections onto the supported cone blocks.

use nalgebra::DMatrix;

use super::ConeBlock;

/// Packed length of a symmetric side x side matrix.
pub fn svec_dim(side: usize) -> usize {
    side * (side + 1) / 2
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Pack a symmetric matrix into svec order (upper triangle, column
/// major, off-diagonals scaled by sqrt(2)).
pub fn svec_pack(m: &DMatrix<f64>) -> Vec<f64> {
    let s = m.nrows();
    let mut out = Vec::with_capacity(svec_dim(s));
    for j in 0..s {
        for i in 0..=j {
            if i == j {
                out.push(m[(i, j)]);
            } else {
                out.push(SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
    }
    out
}

/// Inverse of [`svec_pack`].
pub fn svec_unpack(v: &[f64], side: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), svec_dim(side));
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in 0..=j {
            if i == j {
                m[(i, j)] = v[k];
            } else {
                m[(i, j)] = v[k] / SQRT2;
                m[(j, i)] = v[k] / SQRT2;
            }
            k += 1;
        }
    }
    m
}

/// Euclidean projection of `v` onto the block's cone, in place.
pub fn project_block(block: ConeBlock, v: &mut [f64]) {
    match block {
        ConeBlock::Free(_) => {}
        ConeBlock::NonNeg(_) => {
            for x in v.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
        }
        ConeBlock::Soc(n) => {
            debug_assert_eq!(v.len(), n);
            if n == 1 {
                if v[0] < 0.0 {
                    v[0] = 0.0;
                }
                return;
            }
            let t = v[0];
            let nz = v[1..].iter().map(|z| z * z).sum::<f64>().sqrt();
            if nz <= t {
                // inside
            } else if nz <= -t {
                v.fill(0.0);
            } else {
                let a = 0.5 * (t + nz);
                v[0] = a;
                let scale = a / nz;
                for z in v[1..].iter_mut() {
                    *z *= scale;
                }
            }
        }
        ConeBlock::Psd(side) => {
            let m = svec_unpack(v, side);
            let eig = nalgebra::SymmetricEigen::new(m);
            let mut proj = DMatrix::zeros(side, side);
            for k in 0..side {
                let lam = eig.eigenvalues[k];
                if lam > 0.0 {
                    let col = eig.eigenvectors.column(k);
                    proj += lam * &col * col.transpose();
                }
            }
            v.copy_from_slice(&svec_pack(&proj));
        }
    }
}

/// Euclidean projection onto the block's cone (allocating form).
pub fn project_cone(block: ConeBlock, v: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), block.dim(), "vector must match block dimension");
    let mut out = v.to_vec();
    project_block(block, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nonneg_projection() {
        assert_eq!(
            project_cone(ConeBlock::NonNeg(2), &[-1.0, 2.0]),
            vec![0.0, 2.0]
        );
    }

    #[test]
    fn psd_projection_clips_eigenvalue() {
        // diag(-1, 3): packed (m11, sqrt2*m12, m22)
        let v = vec![-1.0, 0.0, 3.0];
        let p = project_cone(ConeBlock::Psd(2), &v);
        assert!((p[0] - 0.0).abs() < 1e-12);
        assert!((p[1] - 0.0).abs() < 1e-12);
        assert!((p[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn soc_projection_halfway_case() {
        // (t=0, x=(1,0)) -> (1/2, (1/2, 0))
        let p = project_cone(ConeBlock::Soc(3), &[0.0, 1.0, 0.0]);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert!(p[2].abs() < 1e-15);
    }

    #[test]
    fn svec_roundtrip_preserves_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let side = 4;
        let a0 = DMatrix::from_fn(side, side, |_, _| rng.gen_range(-1.0..1.0));
        let b0 = DMatrix::from_fn(side, side, |_, _| rng.gen_range(-1.0..1.0));
        let a = &a0 + a0.transpose();
        let b = &b0 + b0.transpose();
        let va = svec_pack(&a);
        let vb = svec_pack(&b);
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        let frob = (a.clone() * b.clone()).trace();
        assert!((dot - frob).abs() < 1e-12);
        let back = svec_unpack(&va, side);
        assert!((back - a).amax() < 1e-13);
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let blocks = [
            ConeBlock::Free(5),
            ConeBlock::NonNeg(5),
            ConeBlock::Soc(5),
            ConeBlock::Psd(3),
        ];
        for block in blocks {
            for _ in 0..50 {
                let v: Vec<f64> = (0..block.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let p1 = project_cone(block, &v);
                let p2 = project_cone(block, &p1);
                let diff = p1
                    .iter()
                    .zip(&p2)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(diff <= 1e-12, "{block:?}");
            }
        }
    }

    #[test]
    fn projection_is_closest_point() {
        // ||v - P(v)|| <= ||v - w|| for random cone members w
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let blocks = [ConeBlock::NonNeg(4), ConeBlock::Soc(4), ConeBlock::Psd(3)];
        for block in blocks {
            for _ in 0..100 {
                let v: Vec<f64> = (0..block.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let p = project_cone(block, &v);
                let dp: f64 = v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
                // random member: project a random vector
                let w0: Vec<f64> = (0..block.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let w = project_cone(block, &w0);
                let dw: f64 = v.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
                assert!(dp <= dw + 1e-12, "{block:?}");
            }
        }
    }
}
